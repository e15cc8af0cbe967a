//! Iterate of the primal-dual method and its update rules.

use crate::coupling::{
    accumulate_marginals, ConditionalKernel, CouplingMarginals, Dims, DualVariables,
    OccupancyCoupling,
};

use super::config::Rates;
use super::gradients::{DualGradients, MuGradient, PrimalGradients};

/// Below this normalizer the factored coupling update is redone entry-wise in
/// the log domain.
const MIN_NORMALIZER: f64 = 1e-250;

/// Current iterate plus the running sums behind the averaged output.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub mu: OccupancyCoupling,
    pub lambda_x: ConditionalKernel,
    pub lambda_y: ConditionalKernel,
    pub duals: DualVariables,
    marginals: CouplingMarginals,
    mu_sum: Vec<f64>,
    lambda_x_sum: Vec<f64>,
    lambda_y_sum: Vec<f64>,
    averaged: usize,
    scratch: Vec<f64>,
}

impl SolverState {
    /// Uniform coupling and conditionals, zero duals.
    pub fn new(dims: Dims) -> Self {
        Self::from_coupling(OccupancyCoupling::uniform(dims))
    }

    pub fn from_coupling(mu: OccupancyCoupling) -> Self {
        let dims = mu.dims();
        let marginals = mu.marginals();
        Self {
            lambda_x: ConditionalKernel::uniform(dims.nx, dims.ny),
            lambda_y: ConditionalKernel::uniform(dims.ny, dims.nx),
            duals: DualVariables::zeros(dims),
            marginals,
            mu_sum: vec![0.0; dims.coupling_len()],
            lambda_x_sum: vec![0.0; dims.nx * dims.ny],
            lambda_y_sum: vec![0.0; dims.nx * dims.ny],
            averaged: 0,
            scratch: vec![0.0; dims.coupling_len()],
            mu,
        }
    }

    pub fn dims(&self) -> Dims {
        self.mu.dims()
    }

    /// Marginals of the current coupling.
    pub fn marginals(&self) -> &CouplingMarginals {
        &self.marginals
    }

    /// Number of iterates in the running average.
    pub fn averaged(&self) -> usize {
        self.averaged
    }

    /// Adds the current primal iterate to the running sums.
    pub fn accumulate(&mut self) {
        for (s, m) in self.mu_sum.iter_mut().zip(self.mu.values()) {
            *s += m;
        }
        for (s, l) in self.lambda_x_sum.iter_mut().zip(self.lambda_x.values()) {
            *s += l;
        }
        for (s, l) in self.lambda_y_sum.iter_mut().zip(self.lambda_y.values()) {
            *s += l;
        }
        self.averaged += 1;
    }

    /// Running averages, or the current iterate when nothing was accumulated.
    pub fn averages(&self) -> (OccupancyCoupling, ConditionalKernel, ConditionalKernel) {
        let d = self.dims();
        if self.averaged == 0 {
            return (
                self.mu.clone(),
                self.lambda_x.clone(),
                self.lambda_y.clone(),
            );
        }
        let inv = 1.0 / self.averaged as f64;
        let scaled = |v: &[f64]| v.iter().map(|s| s * inv).collect::<Vec<_>>();
        (
            OccupancyCoupling::from_values(d, scaled(&self.mu_sum)).expect("shape fixed"),
            ConditionalKernel::from_values(d.nx, d.ny, scaled(&self.lambda_x_sum))
                .expect("shape fixed"),
            ConditionalKernel::from_values(d.ny, d.nx, scaled(&self.lambda_y_sum))
                .expect("shape fixed"),
        )
    }

    /// Marginals of the averaged coupling.
    pub fn average_marginals(&self) -> CouplingMarginals {
        if self.averaged == 0 {
            return self.marginals.clone();
        }
        let mut m = CouplingMarginals::zeros(self.dims());
        accumulate_marginals(self.dims(), &self.mu_sum, &mut m);
        m.scale(1.0 / self.averaged as f64);
        m
    }

    /// Sum of the current coupling, for finiteness checks.
    pub(crate) fn mass(&self) -> f64 {
        self.marginals.state.iter().sum()
    }
}

/// `w <- w * exp(-eta g) / Z`, evaluated as `exp(ln w - eta g - s)` with `s`
/// the largest exponent over the support of `w`.
pub fn exponentiated_step(weights: &mut [f64], grad: &[f64], eta: f64) {
    let shift = weights
        .iter()
        .zip(grad)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, g)| w.ln() - eta * g)
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return;
    }
    let mut total = 0.0;
    for (w, g) in weights.iter_mut().zip(grad) {
        if *w > 0.0 {
            *w = (w.ln() - eta * g - shift).exp();
            total += *w;
        }
    }
    let inv = 1.0 / total;
    weights.iter_mut().for_each(|w| *w *= inv);
}

/// `exp(sign * eta * t - max)` for each `t`.
fn shifted_exp(values: &[f64], scale: f64) -> Vec<f64> {
    let max = values
        .iter()
        .map(|t| scale * t)
        .fold(f64::NEG_INFINITY, f64::max);
    values.iter().map(|t| (scale * t - max).exp()).collect()
}

/// Entropic mirror step on the coupling. The exponential of the gradient
/// factors over `(x,y)`, `(x,x',y)`, `(x,y,y')` and `(x',y')`, so one pass
/// of three multiplies per entry suffices; the marginals are refreshed in the
/// same pass.
fn update_mu(state: &mut SolverState, g: &MuGradient, eta: f64) {
    let d = state.dims();
    let (nx, ny) = (d.nx, d.ny);
    let a = shifted_exp(&g.base, -eta);
    let bx = shifted_exp(&g.alpha_x, eta);
    let by = shifted_exp(&g.alpha_y, eta);
    let c = shifted_exp(&g.next, -eta);

    let m = &mut state.marginals;
    m.clear();
    let old = state.mu.values();
    let out = &mut state.scratch;
    for x in 0..nx {
        for y in 0..ny {
            let pair = d.pair(x, y);
            let ay = d.ay(x, y, 0);
            let by_row = &by[ay..ay + ny];
            let mut state_mass = 0.0;
            for x2 in 0..nx {
                let ax = d.ax(x, x2, y);
                let factor = a[pair] * bx[ax];
                let base = d.mu(x, y, x2, 0);
                let src = &old[base..base + ny];
                let dst = &mut out[base..base + ny];
                let c_row = &c[x2 * ny..(x2 + 1) * ny];
                let over_x = &mut m.over_next_x[ay..ay + ny];
                let shifted = &mut m.shifted[x2 * ny..(x2 + 1) * ny];
                let mut row = 0.0;
                for y2 in 0..ny {
                    let w = src[y2] * factor * by_row[y2] * c_row[y2];
                    dst[y2] = w;
                    row += w;
                    over_x[y2] += w;
                    shifted[y2] += w;
                }
                m.over_next_y[ax] = row;
                state_mass += row;
            }
            m.state[pair] = state_mass;
        }
    }
    let total: f64 = m.state.iter().sum();
    if total.is_finite() && total > MIN_NORMALIZER {
        let inv = 1.0 / total;
        out.iter_mut().for_each(|v| *v *= inv);
        m.scale(inv);
    } else {
        // The factor maxima are not attained jointly and the product
        // underflowed; redo the step entry-wise with one global shift.
        let dense = g.dense();
        let shift = old
            .iter()
            .zip(&dense)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, g)| w.ln() - eta * g)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for ((dst, w), g) in out.iter_mut().zip(old).zip(&dense) {
            *dst = if *w > 0.0 {
                (w.ln() - eta * g - shift).exp()
            } else {
                0.0
            };
            total += *dst;
        }
        let inv = 1.0 / total;
        out.iter_mut().for_each(|v| *v *= inv);
        m.clear();
        accumulate_marginals(d, out, m);
    }
    state.mu.swap_values(&mut state.scratch);
}

/// Mirror steps on the coupling and on the sampled rows of the conditionals.
pub fn update_primal(state: &mut SolverState, grads: &PrimalGradients, rates: &Rates) {
    update_mu(state, &grads.mu, rates.eta);
    for (row, g) in grads.lambda_x.rows() {
        exponentiated_step(state.lambda_x.row_mut(*row), g, rates.eta_x);
    }
    for (row, g) in grads.lambda_y.rows() {
        exponentiated_step(state.lambda_y.row_mut(*row), g, rates.eta_y);
    }
}

/// Projected steps `alpha <- clamp(alpha - beta g)`, `v <- clamp(v - beta g)`
/// onto the sup-norm balls of radii `6/(1-gamma)` and `2/(1-gamma)`.
pub fn update_dual(state: &mut SolverState, grads: &DualGradients, rates: &Rates, gamma: f64) {
    let ra = DualVariables::alpha_radius(gamma);
    let rv = DualVariables::v_radius(gamma);
    let step = |vars: &mut [f64], g: &[f64], beta: f64, r: f64| {
        for (v, g) in vars.iter_mut().zip(g) {
            *v = (*v - beta * g).clamp(-r, r);
        }
    };
    let duals = &mut state.duals;
    step(&mut duals.alpha_x, &grads.alpha_x, rates.beta_x, ra);
    step(&mut duals.alpha_y, &grads.alpha_y, rates.beta_y, ra);
    step(&mut duals.v, &grads.v, rates.beta, rv);
}
