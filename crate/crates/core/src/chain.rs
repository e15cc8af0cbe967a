//! Finite Markov chains, their discounted transition occupancies, and the
//! benchmark families used by the experiments.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::discounted_visitation;

/// Row-sum tolerance for chains built in code.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Row-sum tolerance for chains read from a file. Rows are renormalized after
/// passing this check.
pub const FILE_ROW_SUM_TOL: f64 = 1e-9;

/// A finite, time-homogeneous Markov chain started from a fixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    n: usize,
    transition: Vec<f64>,
    initial: usize,
    labels: Option<Vec<String>>,
    rewards: Option<Vec<f64>>,
}

impl MarkovChain {
    /// Builds a chain from a dense row-major transition matrix.
    pub fn new(rows: Vec<Vec<f64>>, initial: usize) -> Result<Self> {
        Self::with_tolerance(rows, initial, ROW_SUM_TOL)
    }

    fn with_tolerance(rows: Vec<Vec<f64>>, initial: usize, tol: f64) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidChain(
                "chain must have at least one state".into(),
            ));
        }
        if initial >= n {
            return Err(Error::InvalidChain(format!(
                "initial state {initial} out of range for {n} states"
            )));
        }
        let mut transition = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidChain(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
                return Err(Error::InvalidChain(format!(
                    "row {i} has invalid probability {bad}"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::InvalidChain(format!("row {i} sums to {sum}, not 1")));
            }
            if sum == 1.0 {
                transition.extend_from_slice(row);
            } else {
                transition.extend(row.iter().map(|p| p / sum));
            }
        }
        Ok(Self {
            n,
            transition,
            initial,
            labels: None,
            rewards: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidChain(format!(
                "{} labels for {} states",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_rewards(mut self, rewards: Vec<f64>) -> Result<Self> {
        if rewards.len() != self.n {
            return Err(Error::InvalidChain(format!(
                "{} rewards for {} states",
                rewards.len(),
                self.n
            )));
        }
        self.rewards = Some(rewards);
        Ok(self)
    }

    pub fn with_initial(mut self, initial: usize) -> Result<Self> {
        if initial >= self.n {
            return Err(Error::InvalidChain(format!(
                "initial state {initial} out of range for {} states",
                self.n
            )));
        }
        self.initial = initial;
        Ok(self)
    }

    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    /// `P(to | from)`.
    #[inline]
    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.n + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.transition[from * self.n..(from + 1) * self.n]
    }

    /// Row-major transition matrix.
    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn rewards(&self) -> Option<&[f64]> {
        self.rewards.as_deref()
    }

    /// The label of a state, or its index when the chain is unlabeled.
    pub fn state_key(&self, state: usize) -> String {
        match &self.labels {
            Some(labels) => labels[state].clone(),
            None => state.to_string(),
        }
    }

    /// Reads a chain file (TOML with `n`, `initial`, `rows` and optional
    /// `rewards` / `labels`).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidChain(msg) | Error::Config(msg) => Error::Format {
                path: path.to_path_buf(),
                msg,
            },
            other => other,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ChainFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.into_chain()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = self.to_toml_string();
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn to_toml_string(&self) -> String {
        let file = ChainFile {
            n: self.n,
            initial: InitialSpec::State(self.initial),
            rows: (0..self.n).map(|i| self.row(i).to_vec()).collect(),
            rewards: self.rewards.clone(),
            labels: self.labels.clone(),
        };
        toml::to_string(&file).expect("chain file serialization cannot fail")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum InitialSpec {
    State(usize),
    Distribution(Vec<f64>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainFile {
    n: usize,
    initial: InitialSpec,
    rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rewards: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl ChainFile {
    fn into_chain(self) -> Result<MarkovChain> {
        if self.rows.len() != self.n {
            return Err(Error::InvalidChain(format!(
                "field `rows` has {} rows but `n` = {}",
                self.rows.len(),
                self.n
            )));
        }
        let initial = match self.initial {
            InitialSpec::State(s) => s,
            InitialSpec::Distribution(dist) => dirac_index(&dist).ok_or_else(|| {
                Error::InvalidChain(
                    "field `initial` must be a state index; general initial distributions are not supported"
                        .into(),
                )
            })?,
        };
        let mut chain = MarkovChain::with_tolerance(self.rows, initial, FILE_ROW_SUM_TOL)?;
        if let Some(rewards) = self.rewards {
            chain = chain.with_rewards(rewards)?;
        }
        if let Some(labels) = self.labels {
            chain = chain.with_labels(labels)?;
        }
        Ok(chain)
    }
}

fn dirac_index(dist: &[f64]) -> Option<usize> {
    let mut hit = None;
    for (i, &p) in dist.iter().enumerate() {
        if p == 1.0 && hit.is_none() {
            hit = Some(i);
        } else if p != 0.0 {
            return None;
        }
    }
    hit
}

/// Discounted state/next-state occupancy of a chain, `nu(x, x')`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyTable {
    n: usize,
    values: Vec<f64>,
}

impl OccupancyTable {
    pub fn num_states(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, x: usize, next: usize) -> f64 {
        self.values[x * self.n + next]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// State marginal `nu(x) = sum_{x'} nu(x, x')`.
    pub fn marginal(&self) -> Vec<f64> {
        self.values
            .chunks(self.n)
            .map(|row| row.iter().sum())
            .collect()
    }

    /// Largest coordinate-wise violation of the two defining equations: the
    /// flow equation and the kernel factorization `nu(x,x') = P(x'|x) nu(x)`.
    pub fn defining_residual(&self, chain: &MarkovChain, gamma: f64) -> f64 {
        let n = self.n;
        let marginal = self.marginal();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            let inflow: f64 = (0..n).map(|prev| self.get(prev, x)).sum();
            let start = if x == chain.initial() {
                1.0 - gamma
            } else {
                0.0
            };
            worst = worst.max((marginal[x] - gamma * inflow - start).abs());
            for next in 0..n {
                worst = worst.max((self.get(x, next) - chain.prob(x, next) * marginal[x]).abs());
            }
        }
        worst
    }
}

/// Exact discounted occupancy `nu(x,x') = P(x'|x) xi(x)` with
/// `(I - gamma P^T) xi = (1 - gamma) delta_{x0}`.
pub fn exact_occupancy(chain: &MarkovChain, gamma: f64) -> Result<OccupancyTable> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Config(format!("discount {gamma} outside (0, 1)")));
    }
    let n = chain.num_states();
    let xi = discounted_visitation(chain.transition(), n, gamma, chain.initial())?;
    let mut values = Vec::with_capacity(n * n);
    for (x, weight) in xi.iter().enumerate() {
        values.extend(chain.row(x).iter().map(|p| p * weight));
    }
    Ok(OccupancyTable { n, values })
}

/// Biased random walk on `n` states with sticky walls.
///
/// Interior states step up with probability `theta` and down otherwise. The
/// two end states stay put with probability 0.9 and step inward with 0.1.
/// Starts at the first state; rewards are `+1` at the first state, `-1` at the
/// last one and `0` elsewhere.
pub fn make_random_walk(n: usize, theta: f64) -> Result<MarkovChain> {
    if n < 2 {
        return Err(Error::InvalidChain(format!(
            "random walk needs n >= 2, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidChain(format!(
            "walk bias {theta} outside [0, 1]"
        )));
    }
    let mut rows = vec![vec![0.0; n]; n];
    rows[0][0] = 0.9;
    rows[0][1] = 0.1;
    rows[n - 1][n - 1] = 0.9;
    rows[n - 1][n - 2] = 0.1;
    for (x, row) in rows.iter_mut().enumerate().take(n - 1).skip(1) {
        row[x + 1] = theta;
        row[x - 1] = 1.0 - theta;
    }
    let mut rewards = vec![0.0; n];
    rewards[0] = 1.0;
    rewards[n - 1] = -1.0;
    MarkovChain::new(rows, 0)?.with_rewards(rewards)
}

/// Lifts a chain onto `base x {0..blocks}` with an independent, uniformly
/// redrawn block index at every step.
///
/// State `(x, b)` has index `x * blocks + b`; the chain starts in block 0.
/// Labels and rewards are inherited from the base state.
pub fn make_block_lift(base: &MarkovChain, blocks: usize) -> Result<MarkovChain> {
    if blocks == 0 {
        return Err(Error::InvalidChain("block count must be positive".into()));
    }
    let n = base.num_states();
    let size = n * blocks;
    let weight = 1.0 / blocks as f64;
    let rows: Vec<Vec<f64>> = (0..size)
        .map(|state| {
            let x = state / blocks;
            let mut row = vec![0.0; size];
            for next in 0..n {
                let p = base.prob(x, next) * weight;
                for b in 0..blocks {
                    row[next * blocks + b] = p;
                }
            }
            row
        })
        .collect();
    let mut lifted = MarkovChain::with_tolerance(rows, base.initial() * blocks, 1e-11)?;
    lifted = lifted.with_labels((0..size).map(|s| base.state_key(s / blocks)).collect())?;
    if let Some(rewards) = base.rewards() {
        lifted = lifted.with_rewards((0..size).map(|s| rewards[s / blocks]).collect())?;
    }
    Ok(lifted)
}
