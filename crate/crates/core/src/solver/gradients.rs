//! Gradient estimators of the Lagrangian from sampled transitions.

use crate::cost::CostMatrix;
use crate::coupling::{Dims, DualVariables, JointInitial};
use crate::sampler::TransitionPair;

use super::state::SolverState;

/// The exact `mu`-gradient
/// `c(x,y) - ax(x,x',y) - ay(x,y,y') + gamma v(x',y') - v(x,y)`,
/// kept in factored form.
#[derive(Debug, Clone)]
pub struct MuGradient {
    pub(crate) dims: Dims,
    /// `c(x,y) - v(x,y)`, indexed by pair.
    pub(crate) base: Vec<f64>,
    pub(crate) alpha_x: Vec<f64>,
    pub(crate) alpha_y: Vec<f64>,
    /// `gamma v(x',y')`, indexed by pair.
    pub(crate) next: Vec<f64>,
}

impl MuGradient {
    pub fn new(cost: &CostMatrix, duals: &DualVariables, gamma: f64) -> Self {
        let dims = Dims::new(cost.nx(), cost.ny());
        Self {
            dims,
            base: cost
                .values()
                .iter()
                .zip(&duals.v)
                .map(|(c, v)| c - v)
                .collect(),
            alpha_x: duals.alpha_x.clone(),
            alpha_y: duals.alpha_y.clone(),
            next: duals.v.iter().map(|v| gamma * v).collect(),
        }
    }

    pub fn get(&self, x: usize, y: usize, x2: usize, y2: usize) -> f64 {
        let d = self.dims;
        self.base[d.pair(x, y)] - self.alpha_x[d.ax(x, x2, y)] - self.alpha_y[d.ay(x, y, y2)]
            + self.next[d.pair(x2, y2)]
    }

    /// Materializes the gradient in the coupling layout.
    pub fn dense(&self) -> Vec<f64> {
        let d = self.dims;
        let mut out = Vec::with_capacity(d.coupling_len());
        for x in 0..d.nx {
            for y in 0..d.ny {
                for x2 in 0..d.nx {
                    for y2 in 0..d.ny {
                        out.push(self.get(x, y, x2, y2));
                    }
                }
            }
        }
        out
    }
}

/// A gradient over a conditional kernel that is zero outside a few rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    cols: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

impl SparseRows {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            rows: Vec::new(),
        }
    }

    /// Adds `weight * values` to row `row`.
    pub fn add(&mut self, row: usize, values: impl Iterator<Item = f64>, weight: f64) {
        let idx = match self.rows.iter().position(|(r, _)| *r == row) {
            Some(i) => i,
            None => {
                self.rows.push((row, vec![0.0; self.cols]));
                self.rows.len() - 1
            }
        };
        for (acc, v) in self.rows[idx].1.iter_mut().zip(values) {
            *acc += weight * v;
        }
    }

    pub fn rows(&self) -> &[(usize, Vec<f64>)] {
        &self.rows
    }

    pub fn dense(&self, num_rows: usize) -> Vec<f64> {
        let mut out = vec![0.0; num_rows * self.cols];
        for (r, values) in &self.rows {
            out[r * self.cols..(r + 1) * self.cols].copy_from_slice(values);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct PrimalGradients {
    pub mu: MuGradient,
    pub lambda_x: SparseRows,
    pub lambda_y: SparseRows,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualGradients {
    pub alpha_x: Vec<f64>,
    pub alpha_y: Vec<f64>,
    pub v: Vec<f64>,
}

/// Primal gradients at the current iterate. The conditional gradients are
/// `ax(X, X', .)` on row `X` of `lambda_x` and `ay(., Y, Y')` on row `Y` of
/// `lambda_y`, averaged over the batch.
pub fn estimate_primal_gradients(
    state: &SolverState,
    cost: &CostMatrix,
    samples_x: &[TransitionPair],
    samples_y: &[TransitionPair],
    gamma: f64,
) -> PrimalGradients {
    let d = state.dims();
    let duals = &state.duals;
    let mut lambda_x = SparseRows::new(d.ny);
    let wx = 1.0 / samples_x.len() as f64;
    for s in samples_x {
        let start = d.ax(s.from_state, s.to_state, 0);
        lambda_x.add(
            s.from_state,
            duals.alpha_x[start..start + d.ny].iter().copied(),
            wx,
        );
    }
    let mut lambda_y = SparseRows::new(d.nx);
    let wy = 1.0 / samples_y.len() as f64;
    for s in samples_y {
        let (y, y2) = (s.from_state, s.to_state);
        lambda_y.add(y, (0..d.nx).map(|x| duals.alpha_y[d.ay(x, y, y2)]), wy);
    }
    PrimalGradients {
        mu: MuGradient::new(cost, duals, gamma),
        lambda_x,
        lambda_y,
    }
}

/// Dual gradients at the current iterate:
///
/// ```text
/// g_ax(x,x',y) = sum_{y'} mu(x,y,x',y') - 1{(X,X') = (x,x')} lambda_x(y|x)
/// g_ay(x,y,y') = sum_{x'} mu(x,y,x',y') - 1{(Y,Y') = (y,y')} lambda_y(x|y)
/// g_v(x,y)     = nu_mu(x,y) - (1-gamma) nu0(x,y) - gamma (E mu)(x,y)
/// ```
///
/// with the indicator terms averaged over the batch.
pub fn estimate_dual_gradients(
    state: &SolverState,
    samples_x: &[TransitionPair],
    samples_y: &[TransitionPair],
    nu0: JointInitial,
    gamma: f64,
) -> DualGradients {
    let mut out = DualGradients {
        alpha_x: Vec::new(),
        alpha_y: Vec::new(),
        v: Vec::new(),
    };
    dual_gradients_into(state, samples_x, samples_y, nu0, gamma, &mut out);
    out
}

pub(crate) fn dual_gradients_into(
    state: &SolverState,
    samples_x: &[TransitionPair],
    samples_y: &[TransitionPair],
    nu0: JointInitial,
    gamma: f64,
    out: &mut DualGradients,
) {
    let d = state.dims();
    let m = state.marginals();
    out.alpha_x.clear();
    out.alpha_x.extend_from_slice(&m.over_next_y);
    out.alpha_y.clear();
    out.alpha_y.extend_from_slice(&m.over_next_x);

    let wx = 1.0 / samples_x.len() as f64;
    for s in samples_x {
        let start = d.ax(s.from_state, s.to_state, 0);
        let row = state.lambda_x.row(s.from_state);
        for (g, l) in out.alpha_x[start..start + d.ny].iter_mut().zip(row) {
            *g -= wx * l;
        }
    }
    let wy = 1.0 / samples_y.len() as f64;
    for s in samples_y {
        let (y, y2) = (s.from_state, s.to_state);
        let row = state.lambda_y.row(y);
        for x in 0..d.nx {
            out.alpha_y[d.ay(x, y, y2)] -= wy * row[x];
        }
    }

    out.v.clear();
    for x in 0..d.nx {
        for y in 0..d.ny {
            let p = d.pair(x, y);
            out.v
                .push(m.state[p] - (1.0 - gamma) * nu0.mass(x, y) - gamma * m.shifted[p]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::OccupancyCoupling;
    use approx::assert_abs_diff_eq;

    fn state_2x2() -> SolverState {
        SolverState::new(Dims::new(2, 2))
    }

    #[test]
    fn zero_duals_give_broadcast_cost() {
        let state = state_2x2();
        let cost = CostMatrix::new(2, 2, vec![0.0, 0.3, 0.7, 0.1]).unwrap();
        let samples = [TransitionPair::new(0, 1)];
        let g = estimate_primal_gradients(&state, &cost, &samples, &samples, 0.9);
        let dense = g.mu.dense();
        let d = state.dims();
        for x in 0..2 {
            for y in 0..2 {
                for x2 in 0..2 {
                    for y2 in 0..2 {
                        assert_eq!(dense[d.mu(x, y, x2, y2)], cost.get(x, y));
                    }
                }
            }
        }
        assert!(g.lambda_x.dense(2).iter().all(|&v| v == 0.0));
        assert!(g.lambda_y.dense(2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_coupling_alpha_gradient() {
        let state = state_2x2();
        let g = estimate_dual_gradients(
            &state,
            &[TransitionPair::new(0, 0)],
            &[TransitionPair::new(1, 1)],
            JointInitial::new(0, 0),
            0.5,
        );
        let d = state.dims();
        for x in 0..2 {
            for x2 in 0..2 {
                for y in 0..2 {
                    let want = if (x, x2) == (0, 0) { -0.375 } else { 0.125 };
                    assert_abs_diff_eq!(g.alpha_x[d.ax(x, x2, y)], want, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn mu_gradient_matches_formula() {
        let d = Dims::new(2, 3);
        let mut duals = DualVariables::zeros(d);
        for (i, v) in duals.alpha_x.iter_mut().enumerate() {
            *v = i as f64 * 0.1 - 0.4;
        }
        for (i, v) in duals.alpha_y.iter_mut().enumerate() {
            *v = 0.3 - i as f64 * 0.05;
        }
        for (i, v) in duals.v.iter_mut().enumerate() {
            *v = (i as f64).sin();
        }
        let cost = CostMatrix::from_fn(2, 3, |x, y| (x + y) as f64 / 4.0).unwrap();
        let g = MuGradient::new(&cost, &duals, 0.7);
        let dense = g.dense();
        for x in 0..2 {
            for y in 0..3 {
                for x2 in 0..2 {
                    for y2 in 0..3 {
                        let want = cost.get(x, y)
                            - duals.alpha_x[d.ax(x, x2, y)]
                            - duals.alpha_y[d.ay(x, y, y2)]
                            + 0.7 * duals.v[d.pair(x2, y2)]
                            - duals.v[d.pair(x, y)];
                        assert_abs_diff_eq!(dense[d.mu(x, y, x2, y2)], want, epsilon = 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn batch_averages_rows() {
        let d = Dims::new(2, 2);
        let mut state = SolverState::new(d);
        state.duals.alpha_x = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let cost = CostMatrix::new(2, 2, vec![0.0; 4]).unwrap();
        let xs = [TransitionPair::new(0, 0), TransitionPair::new(0, 1)];
        let g = estimate_primal_gradients(&state, &cost, &xs, &[TransitionPair::new(0, 0)], 0.5);
        assert_eq!(g.lambda_x.rows().len(), 1);
        assert_eq!(g.lambda_x.dense(2), vec![2.0, 3.0, 0.0, 0.0]);
    }

    #[test]
    fn feasible_flow_has_zero_v_gradient() {
        use crate::chain::make_random_walk;
        use crate::rounding::{induced_occupancy, TransitionCoupling};
        let a = make_random_walk(3, 0.4).unwrap();
        let b = make_random_walk(2, 0.5).unwrap();
        let pi = TransitionCoupling::independent(&a, &b);
        let nu0 = JointInitial::of(&a, &b);
        let mu: OccupancyCoupling = induced_occupancy(&pi, nu0, 0.8).unwrap();
        let state = SolverState::from_coupling(mu);
        let g = estimate_dual_gradients(
            &state,
            &[TransitionPair::new(0, 0)],
            &[TransitionPair::new(0, 0)],
            nu0,
            0.8,
        );
        assert!(g.v.iter().all(|v| v.abs() < 1e-10));
    }
}
