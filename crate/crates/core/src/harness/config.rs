use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::chain::{make_block_lift, make_random_walk, MarkovChain};
use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::sampler::{parse_transitions, TransitionPair};
use crate::solver::{Preset, SolverConfig};

/// Where a chain comes from.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChainSpec {
    /// Biased walk with sticky walls; `initial` and `rewards` override the
    /// defaults (first state, `+1/-1` at the ends).
    Walk {
        n: usize,
        theta: f64,
        #[serde(default)]
        initial: Option<usize>,
        #[serde(default)]
        rewards: Option<Vec<f64>>,
    },
    /// A walk lifted with `blocks` uniformly redrawn noise values per state.
    BlockLift {
        n: usize,
        theta: f64,
        blocks: usize,
        #[serde(default)]
        initial: Option<usize>,
    },
    /// A chain file.
    File { path: PathBuf },
    /// Recorded `from,to` transitions; the kernel is unknown.
    Transitions {
        path: PathBuf,
        #[serde(default)]
        num_states: Option<usize>,
        #[serde(default)]
        initial: Option<usize>,
        #[serde(default)]
        rewards: Option<Vec<f64>>,
    },
}

/// A chain with a known kernel, or only recorded transitions.
#[derive(Debug, Clone)]
pub enum ChainSource {
    Known(MarkovChain),
    Recorded {
        pairs: Vec<TransitionPair>,
        num_states: usize,
        initial: usize,
        rewards: Option<Vec<f64>>,
    },
}

impl ChainSource {
    pub fn num_states(&self) -> usize {
        match self {
            Self::Known(c) => c.num_states(),
            Self::Recorded { num_states, .. } => *num_states,
        }
    }

    pub fn initial(&self) -> usize {
        match self {
            Self::Known(c) => c.initial(),
            Self::Recorded { initial, .. } => *initial,
        }
    }

    pub fn known(&self) -> Option<&MarkovChain> {
        match self {
            Self::Known(c) => Some(c),
            Self::Recorded { .. } => None,
        }
    }

    fn rewards(&self) -> Option<&[f64]> {
        match self {
            Self::Known(c) => c.rewards(),
            Self::Recorded { rewards, .. } => rewards.as_deref(),
        }
    }

    fn key(&self, state: usize) -> String {
        match self {
            Self::Known(c) => c.state_key(state),
            Self::Recorded { .. } => state.to_string(),
        }
    }
}

pub fn walk_with(
    n: usize,
    theta: f64,
    initial: Option<usize>,
    rewards: Option<Vec<f64>>,
) -> Result<MarkovChain> {
    let mut chain = make_random_walk(n, theta)?;
    if let Some(s) = initial {
        chain = chain.with_initial(s)?;
    }
    if let Some(r) = rewards {
        chain = chain.with_rewards(r)?;
    }
    Ok(chain)
}

impl ChainSpec {
    /// Builds the chain; relative paths are taken from `base`.
    pub fn resolve(&self, base: &Path) -> Result<ChainSource> {
        match self {
            Self::Walk {
                n,
                theta,
                initial,
                rewards,
            } => walk_with(*n, *theta, *initial, rewards.clone()).map(ChainSource::Known),
            Self::BlockLift {
                n,
                theta,
                blocks,
                initial,
            } => {
                let lifted = make_block_lift(&make_random_walk(*n, *theta)?, *blocks)?;
                match initial {
                    Some(s) => lifted.with_initial(*s).map(ChainSource::Known),
                    None => Ok(ChainSource::Known(lifted)),
                }
            }
            Self::File { path } => MarkovChain::load(base.join(path)).map(ChainSource::Known),
            Self::Transitions {
                path,
                num_states,
                initial,
                rewards,
            } => {
                let path = base.join(path);
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let pairs = parse_transitions(&text, &path)?;
                let inferred = pairs
                    .iter()
                    .map(|p| p.from_state.max(p.to_state) + 1)
                    .max()
                    .unwrap_or(0);
                let n = num_states.unwrap_or(inferred);
                if n < inferred {
                    return Err(Error::Config(format!(
                        "{}: transitions reference state {} but num_states = {n}",
                        path.display(),
                        inferred - 1
                    )));
                }
                let initial = initial.unwrap_or(0);
                if initial >= n {
                    return Err(Error::Config(format!(
                        "initial state {initial} out of range for {n} states"
                    )));
                }
                if let Some(r) = rewards {
                    if r.len() != n {
                        return Err(Error::Config(format!(
                            "{} rewards given for {n} states",
                            r.len()
                        )));
                    }
                }
                Ok(ChainSource::Recorded {
                    pairs,
                    num_states: n,
                    initial,
                    rewards: rewards.clone(),
                })
            }
        }
    }
}

/// How the ground cost is built.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CostSpec {
    /// `|r(x) - r(y)|`.
    #[default]
    RewardAbsDiff,
    /// `1{label(x) != label(y)}`.
    Indicator,
    /// Comma-separated `nx x ny` matrix.
    File { path: PathBuf },
}

impl CostSpec {
    pub fn build(&self, x: &ChainSource, y: &ChainSource, base: &Path) -> Result<CostMatrix> {
        let (nx, ny) = (x.num_states(), y.num_states());
        let cost = match self {
            Self::RewardAbsDiff => {
                let (Some(rx), Some(ry)) = (x.rewards(), y.rewards()) else {
                    return Err(Error::Config(
                        "cost `reward-abs-diff` needs rewards on both chains".into(),
                    ));
                };
                CostMatrix::from_fn(nx, ny, |i, j| (rx[i] - ry[j]).abs())?
            }
            Self::Indicator => {
                let kx: Vec<String> = (0..nx).map(|i| x.key(i)).collect();
                let ky: Vec<String> = (0..ny).map(|j| y.key(j)).collect();
                CostMatrix::from_fn(nx, ny, |i, j| if kx[i] == ky[j] { 0.0 } else { 1.0 })?
            }
            Self::File { path } => CostMatrix::load(base.join(path))?,
        };
        if cost.nx() != nx || cost.ny() != ny {
            return Err(Error::Shape(format!(
                "cost is {}x{}, chains have {nx} and {ny} states",
                cost.nx(),
                cost.ny()
            )));
        }
        Ok(cost)
    }
}

fn default_seeds() -> usize {
    5
}

fn default_sweep_iterations() -> Vec<usize> {
    vec![1_000, 10_000, 100_000]
}

/// Grid for `sweep`: every iteration budget is run for `seeds` consecutive
/// seeds starting at the solver seed.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_sweep_iterations")]
    pub iterations: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            iterations: default_sweep_iterations(),
            seeds: default_seeds(),
        }
    }
}

fn theta_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// Candidates `walk(n, theta)` against a block lift of `walk(n, true_theta)`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSelectSpec {
    pub n: usize,
    pub blocks: usize,
    pub true_theta: f64,
    pub thetas: Vec<f64>,
    pub iterations: Vec<usize>,
    pub seeds: usize,
    pub oracle: bool,
}

impl Default for ModelSelectSpec {
    fn default() -> Self {
        Self {
            n: 10,
            blocks: 5,
            true_theta: 0.5,
            thetas: theta_grid(),
            iterations: vec![1_000, 10_000],
            seeds: 1,
            oracle: true,
        }
    }
}

/// A walk against its block lift; one pair of conditional tables per sample
/// size.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncDecSpec {
    pub n: usize,
    pub theta: f64,
    pub blocks: usize,
    pub sample_sizes: Vec<usize>,
    pub cost: CostSpec,
}

impl Default for EncDecSpec {
    fn default() -> Self {
        Self {
            n: 10,
            theta: 0.5,
            blocks: 5,
            sample_sizes: vec![1_000, 10_000, 100_000],
            cost: CostSpec::RewardAbsDiff,
        }
    }
}

/// Pairwise distances over walks indexed by (initial state, theta).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistMatrixSpec {
    pub n: usize,
    pub thetas: Vec<f64>,
    pub initial_states: Vec<usize>,
    /// Reward `+1` at both ends instead of `+1/-1`.
    pub symmetric_rewards: bool,
    pub oracle: bool,
}

impl Default for DistMatrixSpec {
    fn default() -> Self {
        Self {
            n: 10,
            thetas: (0..19).map(|i| 0.05 + 0.05 * i as f64).collect(),
            initial_states: (1..9).collect(),
            symmetric_rewards: true,
            oracle: false,
        }
    }
}

fn default_oracle_tol() -> f64 {
    crate::oracle::DEFAULT_TOL
}

/// Contents of an experiment file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub chain_x: Option<ChainSpec>,
    #[serde(default)]
    pub chain_y: Option<ChainSpec>,
    #[serde(default)]
    pub cost: CostSpec,
    /// Named hyperparameter row applied before `[solver]`.
    #[serde(default)]
    pub preset: Option<String>,
    /// Individual solver fields; they override the preset.
    #[serde(default)]
    pub solver: toml::Table,
    #[serde(default = "default_oracle_tol")]
    pub oracle_tol: f64,
    /// Also write the averaged coupling and conditionals.
    #[serde(default)]
    pub dump_tensors: bool,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub model_select: ModelSelectSpec,
    #[serde(default)]
    pub enc_dec: EncDecSpec,
    #[serde(default)]
    pub dist_matrix: DistMatrixSpec,
    /// Directory that relative paths refer to.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub gamma: Option<f64>,
    pub iterations: Option<usize>,
    pub preset: Option<String>,
    pub compare_oracle: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Format {
                path: path.to_path_buf(),
                msg,
            },
            other => other,
        })?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Solver settings: the preset (flag, file, or the command's default),
    /// then `[solver]` fields, then flags.
    pub fn solver_config(
        &self,
        overrides: &Overrides,
        default_preset: Option<Preset>,
    ) -> Result<SolverConfig> {
        let mut config = SolverConfig::default();
        let preset = match overrides.preset.as_deref().or(self.preset.as_deref()) {
            Some(name) => Some(Preset::parse(name)?),
            None => default_preset,
        };
        if let Some(p) = preset {
            p.apply(&mut config);
        }
        if !self.solver.is_empty() {
            let mut merged =
                toml::Table::try_from(&config).map_err(|e| Error::Config(e.to_string()))?;
            for (key, value) in &self.solver {
                merged.insert(key.clone(), value.clone());
            }
            config = merged.try_into().map_err(|e: toml::de::Error| {
                Error::Config(format!("[solver]: {}", e.message()))
            })?;
        }
        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        if let Some(gamma) = overrides.gamma {
            config.gamma = gamma;
        }
        if let Some(k) = overrides.iterations {
            config.iterations = k;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn out_dir(&self, overrides: &Overrides) -> PathBuf {
        overrides
            .out
            .clone()
            .or_else(|| self.out.as_ref().map(|p| self.base_dir.join(p)))
            .unwrap_or_else(|| PathBuf::from("results"))
    }

    pub fn chains(&self) -> Result<(ChainSource, ChainSource)> {
        let missing = |field: &str| Error::Config(format!("missing field `{field}`"));
        let x = self.chain_x.as_ref().ok_or_else(|| missing("chain_x"))?;
        let y = self.chain_y.as_ref().ok_or_else(|| missing("chain_y"))?;
        Ok((x.resolve(&self.base_dir)?, y.resolve(&self.base_dir)?))
    }
}
