//! Sample access to discounted transition occupancies.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::MarkovChain;
use crate::error::{Error, Result};

/// One observed transition `(X_t, X_{t+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransitionPair {
    pub from_state: usize,
    pub to_state: usize,
}

impl TransitionPair {
    pub fn new(from_state: usize, to_state: usize) -> Self {
        Self {
            from_state,
            to_state,
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    /// Exact draws from the occupancy: roll the chain for a geometric number
    /// of steps and keep the last transition.
    Geometric {
        n: usize,
        initial: usize,
        /// Row-wise cumulative transition probabilities.
        cumulative: Vec<f64>,
        /// Last state with positive probability in each row.
        last_support: Vec<usize>,
    },
    /// Uniform draws with replacement from a recorded list of transitions.
    Buffer {
        pairs: Vec<TransitionPair>,
        n: usize,
    },
}

/// Seeded sampler of transition pairs.
#[derive(Debug, Clone)]
pub struct TransitionSampler {
    source: Source,
    rng: ChaCha8Rng,
}

/// Independent random stream for a seed; streams 1 and 2 are used for the two
/// chains of a problem.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl TransitionSampler {
    /// Exact occupancy sampler for a known chain.
    pub fn geometric(chain: &MarkovChain, seed: u64, stream: u64) -> Self {
        let n = chain.num_states();
        let mut cumulative = Vec::with_capacity(n * n);
        let mut last_support = Vec::with_capacity(n);
        for x in 0..n {
            let mut acc = 0.0;
            let mut last = 0;
            for (next, &p) in chain.row(x).iter().enumerate() {
                acc += p;
                cumulative.push(acc);
                if p > 0.0 {
                    last = next;
                }
            }
            last_support.push(last);
        }
        Self {
            source: Source::Geometric {
                n,
                initial: chain.initial(),
                cumulative,
                last_support,
            },
            rng: seeded_rng(seed, stream),
        }
    }

    /// Replay sampler over recorded transitions. `num_states` defaults to one
    /// past the largest index seen.
    pub fn buffer(
        pairs: Vec<TransitionPair>,
        num_states: Option<usize>,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        let inferred = pairs
            .iter()
            .map(|p| p.from_state.max(p.to_state) + 1)
            .max()
            .unwrap_or(0);
        let n = match num_states {
            Some(n) if n < inferred => {
                return Err(Error::Config(format!(
                    "transition buffer references state {} but only {n} states were declared",
                    inferred - 1
                )))
            }
            Some(n) => n,
            None => inferred,
        };
        Ok(Self {
            source: Source::Buffer { pairs, n },
            rng: seeded_rng(seed, stream),
        })
    }

    pub fn reseed(&mut self, seed: u64, stream: u64) {
        self.rng = seeded_rng(seed, stream);
    }

    pub fn num_states(&self) -> usize {
        match &self.source {
            Source::Geometric { n, .. } | Source::Buffer { n, .. } => *n,
        }
    }

    pub fn is_buffer(&self) -> bool {
        matches!(self.source, Source::Buffer { .. })
    }

    /// Recorded pairs in buffer mode.
    pub fn pairs(&self) -> Option<&[TransitionPair]> {
        match &self.source {
            Source::Buffer { pairs, .. } => Some(pairs),
            Source::Geometric { .. } => None,
        }
    }

    /// Draws one transition. In geometric mode this is an exact sample from
    /// the `gamma`-discounted occupancy; in buffer mode `gamma` is ignored.
    pub fn sample(&mut self, gamma: f64) -> TransitionPair {
        match &self.source {
            Source::Geometric {
                n,
                initial,
                cumulative,
                last_support,
            } => {
                let steps = geometric_steps(&mut self.rng, gamma);
                let mut state = *initial;
                for _ in 0..steps {
                    state = next_state(&mut self.rng, cumulative, last_support, *n, state);
                }
                let next = next_state(&mut self.rng, cumulative, last_support, *n, state);
                TransitionPair::new(state, next)
            }
            Source::Buffer { pairs, .. } => pairs[self.rng.random_range(0..pairs.len())],
        }
    }
}

/// `G` with `P(G = t) = (1 - gamma) gamma^t`, by inversion.
fn geometric_steps(rng: &mut ChaCha8Rng, gamma: f64) -> u64 {
    if gamma <= 0.0 {
        return 0;
    }
    // u in (0, 1]: P(floor(ln u / ln gamma) >= t) = P(u <= gamma^t) = gamma^t.
    let u = 1.0 - rng.random::<f64>();
    (u.ln() / gamma.ln()).floor() as u64
}

fn next_state(
    rng: &mut ChaCha8Rng,
    cumulative: &[f64],
    last_support: &[usize],
    n: usize,
    state: usize,
) -> usize {
    let u: f64 = rng.random();
    let row = &cumulative[state * n..(state + 1) * n];
    let idx = row.partition_point(|&c| c <= u);
    idx.min(last_support[state])
}

/// Draws one transition; free-function form of [`TransitionSampler::sample`]
/// that reports the empty-buffer configuration error.
pub fn sample_transition(sampler: &mut TransitionSampler, gamma: f64) -> Result<TransitionPair> {
    if let Source::Buffer { pairs, .. } = &sampler.source {
        if pairs.is_empty() {
            return Err(Error::EmptyBuffer);
        }
    }
    Ok(sampler.sample(gamma))
}

/// Parses a transition dump: one zero-based `from,to` pair per line. Blank
/// lines and lines starting with `#` are skipped.
pub fn parse_transitions(text: &str, path: &Path) -> Result<Vec<TransitionPair>> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(
                i + 1,
                format!("expected `from,to`, found `{line}`"),
            ));
        };
        let index = |s: &str| -> Result<usize> {
            let v: i64 = s
                .parse()
                .map_err(|_| parse_err(i + 1, format!("`{s}` is not an integer")))?;
            usize::try_from(v).map_err(|_| parse_err(i + 1, format!("negative state index {v}")))
        };
        pairs.push(TransitionPair::new(index(a)?, index(b)?));
    }
    if pairs.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: "no transitions found".into(),
        });
    }
    Ok(pairs)
}

/// Loads a transition dump into a buffer-mode sampler.
pub fn ingest_transitions(
    path: impl AsRef<Path>,
    num_states: Option<usize>,
    seed: u64,
    stream: u64,
) -> Result<TransitionSampler> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let pairs = parse_transitions(&text, path)?;
    TransitionSampler::buffer(pairs, num_states, seed, stream)
}

/// Writes transitions in the dump format read by [`ingest_transitions`].
pub fn write_transitions(path: impl AsRef<Path>, pairs: &[TransitionPair]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(pairs.len() * 6);
    for p in pairs {
        out.push_str(&format!("{},{}\n", p.from_state, p.to_state));
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))
}
