//! Exact bicausal OT distances on small instances by value iteration.
//!
//! The value table solves `W(x,y) = c(x,y) + gamma * OT_W(P_X(.|x), P_Y(.|y))`
//! with each inner transport problem solved exactly. The reported distance is
//! `(1 - gamma) W(x0, y0)`, the normalization under which it equals `<mu, c>`
//! for the optimal occupancy coupling.

use rayon::prelude::*;

use crate::chain::MarkovChain;
use crate::cost::CostMatrix;
use crate::coupling::{Dims, JointInitial, OccupancyCoupling};
use crate::error::{Error, Result};
use crate::rounding::{induced_occupancy, TransitionCoupling};
use crate::transport::solve_transport;

pub const DEFAULT_TOL: f64 = 1e-8;

/// Output of [`bicausal_value_iteration`].
#[derive(Debug, Clone)]
pub struct OracleSolution {
    /// `(1 - gamma) W(x0, y0)` in the cost's original units.
    pub distance: f64,
    /// `W`, indexed `x * ny + y`, in the cost's original units.
    pub values: Vec<f64>,
    /// Greedy transition coupling of the final sweep.
    pub plan: TransitionCoupling,
    pub sweeps: usize,
}

fn check_inputs(
    chain_x: &MarkovChain,
    chain_y: &MarkovChain,
    cost: &CostMatrix,
    gamma: f64,
) -> Result<Dims> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Config(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    let dims = Dims::new(chain_x.num_states(), chain_y.num_states());
    if cost.nx() != dims.nx || cost.ny() != dims.ny {
        return Err(Error::Shape(format!(
            "cost is {}x{}, chains have {} and {} states",
            cost.nx(),
            cost.ny(),
            dims.nx,
            dims.ny
        )));
    }
    Ok(dims)
}

/// One application of the Bellman operator, `T W`, together with the
/// optimal inner plans.
pub fn bellman_update(
    chain_x: &MarkovChain,
    chain_y: &MarkovChain,
    cost: &CostMatrix,
    gamma: f64,
    w: &[f64],
) -> Result<(Vec<f64>, TransitionCoupling)> {
    let dims = check_inputs(chain_x, chain_y, cost, gamma)?;
    if w.len() != dims.pair_len() {
        return Err(Error::Shape(format!(
            "value table has {} entries, expected {}",
            w.len(),
            dims.pair_len()
        )));
    }
    let solved: Vec<(f64, Vec<f64>)> = (0..dims.pair_len())
        .into_par_iter()
        .map(|p| {
            let (x, y) = (p / dims.ny, p % dims.ny);
            let sol = solve_transport(chain_x.row(x), chain_y.row(y), w);
            (cost.raw(x, y) + gamma * sol.value, sol.plan)
        })
        .collect();
    let mut next = Vec::with_capacity(dims.pair_len());
    let mut plan = Vec::with_capacity(dims.coupling_len());
    for (value, block) in solved {
        next.push(value);
        plan.extend(block);
    }
    Ok((next, TransitionCoupling::from_values(dims, plan)?))
}

/// Iterates the Bellman operator from `W = 0` until the sup-norm change is at
/// most `tol (1 - gamma) / (2 gamma)`, which bounds the error of the
/// normalized distance by `tol`.
pub fn bicausal_value_iteration(
    chain_x: &MarkovChain,
    chain_y: &MarkovChain,
    cost: &CostMatrix,
    gamma: f64,
    tol: f64,
) -> Result<OracleSolution> {
    let dims = check_inputs(chain_x, chain_y, cost, gamma)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let threshold = tol * (1.0 - gamma) / (2.0 * gamma);
    let mut w = vec![0.0; dims.pair_len()];
    let mut sweeps = 0;
    loop {
        let (next, plan) = bellman_update(chain_x, chain_y, cost, gamma, &w)?;
        sweeps += 1;
        let change = next
            .iter()
            .zip(&w)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        w = next;
        if change <= threshold {
            let start = dims.pair(chain_x.initial(), chain_y.initial());
            return Ok(OracleSolution {
                distance: (1.0 - gamma) * w[start],
                values: w,
                plan,
                sweeps,
            });
        }
    }
}

/// The occupancy coupling induced by the oracle's greedy plan.
pub fn oracle_occupancy(
    chain_x: &MarkovChain,
    chain_y: &MarkovChain,
    cost: &CostMatrix,
    gamma: f64,
    tol: f64,
) -> Result<OccupancyCoupling> {
    let sol = bicausal_value_iteration(chain_x, chain_y, cost, gamma, tol)?;
    induced_occupancy(&sol.plan, JointInitial::of(chain_x, chain_y), gamma)
}
