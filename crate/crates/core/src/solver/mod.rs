//! Stochastic primal-dual solver for the occupancy-coupling program.
//!
//! Each iteration draws transitions of both chains, forms unbiased gradient
//! estimates of the Lagrangian, takes entropic mirror steps on the coupling
//! and the conditionals and projected steps on the multipliers. The averaged
//! coupling estimates the distance.

mod config;
mod gradients;
mod state;

pub use config::{rates_at, theory_rates, Averaging, Preset, RatePreset, Rates, SolverConfig};
pub use gradients::{
    estimate_dual_gradients, estimate_primal_gradients, DualGradients, MuGradient, PrimalGradients,
    SparseRows,
};
pub use state::{exponentiated_step, update_dual, update_primal, SolverState};

use crate::chain::{exact_occupancy, MarkovChain, OccupancyTable};
use crate::cost::CostMatrix;
use crate::coupling::{
    residuals_from_marginals, ConditionalKernel, ConstraintResiduals, Dims, JointInitial,
    OccupancyCoupling,
};
use crate::error::{Error, Result};
use crate::sampler::{TransitionPair, TransitionSampler};

/// Sampler streams used for the two chains.
pub const STREAM_X: u64 = 1;
pub const STREAM_Y: u64 = 2;

/// What the solver knows about an instance besides samples: the cost, the
/// joint initial state and, when the kernels are known, the exact marginal
/// occupancies used for residual diagnostics.
#[derive(Debug, Clone)]
pub struct Problem {
    dims: Dims,
    cost: CostMatrix,
    nu0: JointInitial,
    exact: Option<Exact>,
}

#[derive(Debug, Clone)]
struct Exact {
    gamma: f64,
    nu_x: OccupancyTable,
    nu_y: OccupancyTable,
}

impl Problem {
    pub fn from_chains(
        chain_x: &MarkovChain,
        chain_y: &MarkovChain,
        cost: CostMatrix,
        gamma: f64,
    ) -> Result<Self> {
        let mut problem = Self::from_samples(
            chain_x.num_states(),
            chain_y.num_states(),
            cost,
            JointInitial::of(chain_x, chain_y),
        )?;
        problem.exact = Some(Exact {
            gamma,
            nu_x: exact_occupancy(chain_x, gamma)?,
            nu_y: exact_occupancy(chain_y, gamma)?,
        });
        Ok(problem)
    }

    /// An instance known only through samples; diagnostics carry no
    /// residuals.
    pub fn from_samples(nx: usize, ny: usize, cost: CostMatrix, nu0: JointInitial) -> Result<Self> {
        if cost.nx() != nx || cost.ny() != ny {
            return Err(Error::Shape(format!(
                "cost is {}x{}, chains have {nx} and {ny} states",
                cost.nx(),
                cost.ny()
            )));
        }
        if nu0.x >= nx || nu0.y >= ny {
            return Err(Error::Config(format!(
                "initial pair ({}, {}) out of range",
                nu0.x, nu0.y
            )));
        }
        Ok(Self {
            dims: Dims::new(nx, ny),
            cost,
            nu0,
            exact: None,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn cost(&self) -> &CostMatrix {
        &self.cost
    }

    pub fn nu0(&self) -> JointInitial {
        self.nu0
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }
}

/// One row of the convergence trace, evaluated at the running average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateDiagnostics {
    pub k: usize,
    /// `<mu_bar, c>` in the cost's original units.
    pub distance: f64,
    pub residuals: Option<ConstraintResiduals>,
    pub certificate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub mu_bar: OccupancyCoupling,
    pub lambda_x_bar: ConditionalKernel,
    pub lambda_y_bar: ConditionalKernel,
    pub trace: Vec<IterateDiagnostics>,
}

impl SolverRun {
    /// Distance estimate of the final average.
    pub fn distance(&self) -> f64 {
        self.trace.last().map(|d| d.distance).unwrap_or(f64::NAN)
    }
}

fn diagnostics(problem: &Problem, state: &SolverState, k: usize, gamma: f64) -> IterateDiagnostics {
    let d = problem.dims;
    let m = state.average_marginals();
    let working: f64 = m
        .state
        .iter()
        .zip(problem.cost.values())
        .map(|(a, c)| a * c)
        .sum();
    let scale = problem.cost.scale();
    let (residuals, certificate) = match &problem.exact {
        Some(exact) => {
            let (_, lx, ly) = state.averages();
            let r = residuals_from_marginals(
                d,
                &m,
                &lx,
                &ly,
                &exact.nu_x,
                &exact.nu_y,
                problem.nu0,
                gamma,
            );
            let penalty = (6.0 * r.causal_x + 6.0 * r.causal_y + 2.0 * r.flow) / (1.0 - gamma);
            (Some(r), Some((working + penalty) * scale))
        }
        None => (None, None),
    };
    IterateDiagnostics {
        k,
        distance: working * scale,
        residuals,
        certificate,
    }
}

/// Runs the solver for `config.iterations` iterations.
///
/// Averages cover the post-update iterates `1..=K` (or the last half of
/// them); a trace row is emitted every `snapshot_every` iterations and at the
/// end.
pub fn run(
    problem: &Problem,
    sampler_x: &mut TransitionSampler,
    sampler_y: &mut TransitionSampler,
    config: &SolverConfig,
) -> Result<SolverRun> {
    config.validate()?;
    let d = problem.dims;
    if sampler_x.num_states() > d.nx || sampler_y.num_states() > d.ny {
        return Err(Error::Shape(
            "sampler state space exceeds the problem's".into(),
        ));
    }
    if let Some(exact) = &problem.exact {
        if exact.gamma != config.gamma {
            return Err(Error::Config(format!(
                "problem was built for gamma {}, config has {}",
                exact.gamma, config.gamma
            )));
        }
    }
    let gamma = config.gamma;
    let k_total = config.iterations;
    let first_averaged = match config.averaging {
        Averaging::All => 1,
        Averaging::LastHalf => k_total / 2 + 1,
    };

    let mut state = SolverState::new(d);
    let mut xs: Vec<TransitionPair> = Vec::with_capacity(config.batch_size);
    let mut ys: Vec<TransitionPair> = Vec::with_capacity(config.batch_size);
    let mut dual = DualGradients {
        alpha_x: Vec::new(),
        alpha_y: Vec::new(),
        v: Vec::new(),
    };
    let mut trace = Vec::with_capacity(k_total / config.snapshot_every + 1);

    for k in 1..=k_total {
        xs.clear();
        ys.clear();
        for _ in 0..config.batch_size {
            xs.push(sampler_x.sample(gamma));
        }
        for _ in 0..config.batch_size {
            ys.push(sampler_y.sample(gamma));
        }
        let rates = rates_at(config, d.nx, d.ny, k);
        gradients::dual_gradients_into(&state, &xs, &ys, problem.nu0, gamma, &mut dual);
        let primal = estimate_primal_gradients(&state, &problem.cost, &xs, &ys, gamma);
        update_primal(&mut state, &primal, &rates);
        update_dual(&mut state, &dual, &rates, gamma);

        let mass = state.mass();
        let dual_sum: f64 = state.duals.v.iter().sum();
        if !mass.is_finite() || !dual_sum.is_finite() {
            return Err(Error::NonFinite(k));
        }
        if k >= first_averaged {
            state.accumulate();
        }
        if k % config.snapshot_every == 0 || k == k_total {
            trace.push(diagnostics(problem, &state, k, gamma));
        }
    }

    let (mu_bar, lambda_x_bar, lambda_y_bar) = state.averages();
    Ok(SolverRun {
        mu_bar,
        lambda_x_bar,
        lambda_y_bar,
        trace,
    })
}

/// Runs the solver on two known chains with exact geometric samplers seeded
/// from `config.seed`.
pub fn run_chains(
    chain_x: &MarkovChain,
    chain_y: &MarkovChain,
    cost: CostMatrix,
    config: &SolverConfig,
) -> Result<SolverRun> {
    config.validate()?;
    let problem = Problem::from_chains(chain_x, chain_y, cost, config.gamma)?;
    let mut sx = TransitionSampler::geometric(chain_x, config.seed, STREAM_X);
    let mut sy = TransitionSampler::geometric(chain_y, config.seed, STREAM_Y);
    run(&problem, &mut sx, &mut sy, config)
}
