use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learning-rate schedule family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatePreset {
    /// Six horizon-dependent constant rates, see [`theory_rates`].
    Theory,
    /// `eta_k = eta0 / sqrt(1 + decay * k)` shared by all primal variables,
    /// constant `beta0` shared by all duals.
    Practical,
}

/// Which post-update iterates enter the returned averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    All,
    LastHalf,
}

/// Tuned hyperparameter rows for the practical schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    EncDec,
    Similarity,
    ModelSelect,
    Trajectory,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Self::EncDec,
        Self::Similarity,
        Self::ModelSelect,
        Self::Trajectory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::EncDec => "enc-dec",
            Self::Similarity => "similarity",
            Self::ModelSelect => "model-select",
            Self::Trajectory => "trajectory",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
                Error::Config(format!(
                    "unknown preset `{name}`, expected one of {}",
                    known.join(", ")
                ))
            })
    }

    /// `(eta0, decay, beta0, batch_size, gamma)`.
    pub fn values(self) -> (f64, f64, f64, usize, f64) {
        match self {
            Self::EncDec => (40.0, 0.0, 0.2, 1, 0.99),
            Self::Similarity => (20.0, 0.0, 0.5, 1, 0.99),
            Self::ModelSelect => (0.1, 0.001, 0.5, 8, 0.95),
            Self::Trajectory => (0.1, 0.05, 0.2, 16, 0.95),
        }
    }

    pub fn apply(self, config: &mut SolverConfig) {
        let (eta0, decay, beta0, batch, gamma) = self.values();
        config.rate_preset = RatePreset::Practical;
        config.eta0 = eta0;
        config.decay = decay;
        config.beta0 = beta0;
        config.batch_size = batch;
        config.gamma = gamma;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub gamma: f64,
    pub iterations: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub rate_preset: RatePreset,
    pub eta0: f64,
    pub decay: f64,
    pub beta0: f64,
    pub snapshot_every: usize,
    pub averaging: Averaging,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let mut config = Self {
            gamma: 0.95,
            iterations: 10_000,
            batch_size: 1,
            seed: 0,
            rate_preset: RatePreset::Practical,
            eta0: 0.0,
            decay: 0.0,
            beta0: 0.0,
            snapshot_every: 1_000,
            averaging: Averaging::All,
        };
        Preset::ModelSelect.apply(&mut config);
        config
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("snapshot_every must be at least 1".into()));
        }
        if self.rate_preset == RatePreset::Practical {
            let finite = [self.eta0, self.decay, self.beta0]
                .iter()
                .all(|v| v.is_finite());
            if !finite || self.eta0 <= 0.0 || self.beta0 <= 0.0 || self.decay < 0.0 {
                return Err(Error::Config(
                    "practical rates need eta0 > 0, beta0 > 0 and decay >= 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Step sizes for one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub eta: f64,
    pub eta_x: f64,
    pub eta_y: f64,
    pub beta_x: f64,
    pub beta_y: f64,
    pub beta: f64,
}

/// Horizon-tuned constant rates for `K` iterations:
///
/// ```text
/// eta    = sqrt(ln(nx^2 ny^2) (1-gamma)^2 / K)
/// eta_x  = sqrt(nx ln(ny) (1-gamma)^2 / K)     eta_y  = sqrt(ny ln(nx) (1-gamma)^2 / K)
/// beta_x = sqrt(nx^2 ny / ((1-gamma)^2 K))     beta_y = sqrt(nx ny^2 / ((1-gamma)^2 K))
/// beta   = sqrt(nx ny / ((1-gamma)^2 K))
/// ```
///
/// A chain with a single state makes the matching conditional rate zero.
pub fn theory_rates(nx: usize, ny: usize, gamma: f64, iterations: usize) -> Rates {
    let (nx, ny, k) = (nx as f64, ny as f64, iterations as f64);
    let h2 = (1.0 - gamma) * (1.0 - gamma);
    Rates {
        eta: ((nx * nx * ny * ny).ln() * h2 / k).sqrt(),
        eta_x: (nx * ny.ln() * h2 / k).sqrt(),
        eta_y: (ny * nx.ln() * h2 / k).sqrt(),
        beta_x: (nx * nx * ny / (h2 * k)).sqrt(),
        beta_y: (nx * ny * ny / (h2 * k)).sqrt(),
        beta: (nx * ny / (h2 * k)).sqrt(),
    }
}

/// Rates used at 1-based iteration `k`.
pub fn rates_at(config: &SolverConfig, nx: usize, ny: usize, k: usize) -> Rates {
    match config.rate_preset {
        RatePreset::Theory => theory_rates(nx, ny, config.gamma, config.iterations),
        RatePreset::Practical => {
            let eta = config.eta0 / (1.0 + config.decay * k as f64).sqrt();
            Rates {
                eta,
                eta_x: eta,
                eta_y: eta,
                beta_x: config.beta0,
                beta_y: config.beta0,
                beta: config.beta0,
            }
        }
    }
}
