//! Primal and dual objects of the occupancy-coupling linear program, with the
//! constraint residuals, the Lagrangian and the feasibility-aware certificate.
//!
//! Index conventions for a pair of chains with `nx` and `ny` states:
//!
//! | object            | shape          | flat index                      |
//! |-------------------|----------------|---------------------------------|
//! | coupling `mu`     | `X x Y x X x Y`| `((x*ny + y)*nx + x')*ny + y'`  |
//! | `alpha_x`, `sum_{y'} mu` | `X x X x Y` | `(x*nx + x')*ny + y`      |
//! | `alpha_y`, `sum_{x'} mu` | `X x Y x Y` | `(x*ny + y)*ny + y'`      |
//! | `v`, state marginal | `X x Y`      | `x*ny + y`                      |

use crate::chain::{MarkovChain, OccupancyTable};
use crate::cost::CostMatrix;
use crate::error::{Error, Result};

/// Threshold on `nu_X(x)` below which a conditional row cannot be recovered
/// from a coupling.
pub const CONDITIONAL_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
}

impl Dims {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self { nx, ny }
    }

    #[inline]
    pub fn coupling_len(&self) -> usize {
        self.nx * self.ny * self.nx * self.ny
    }

    #[inline]
    pub fn pair_len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn alpha_x_len(&self) -> usize {
        self.nx * self.nx * self.ny
    }

    #[inline]
    pub fn alpha_y_len(&self) -> usize {
        self.nx * self.ny * self.ny
    }

    #[inline]
    pub fn mu(&self, x: usize, y: usize, x2: usize, y2: usize) -> usize {
        ((x * self.ny + y) * self.nx + x2) * self.ny + y2
    }

    #[inline]
    pub fn pair(&self, x: usize, y: usize) -> usize {
        x * self.ny + y
    }

    #[inline]
    pub fn ax(&self, x: usize, x2: usize, y: usize) -> usize {
        (x * self.nx + x2) * self.ny + y
    }

    #[inline]
    pub fn ay(&self, x: usize, y: usize, y2: usize) -> usize {
        (x * self.ny + y) * self.ny + y2
    }
}

/// The joint initial state `(x0, y0)`; the initial law is the Dirac mass on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JointInitial {
    pub x: usize,
    pub y: usize,
}

impl JointInitial {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    pub fn of(chain_x: &MarkovChain, chain_y: &MarkovChain) -> Self {
        Self::new(chain_x.initial(), chain_y.initial())
    }

    #[inline]
    pub fn mass(&self, x: usize, y: usize) -> f64 {
        if x == self.x && y == self.y {
            1.0
        } else {
            0.0
        }
    }
}

/// Marginals of a coupling used by the constraints and the dual gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMarginals {
    /// `sum_{y'} mu(x,y,x',y')`, indexed like `alpha_x`.
    pub over_next_y: Vec<f64>,
    /// `sum_{x'} mu(x,y,x',y')`, indexed like `alpha_y`.
    pub over_next_x: Vec<f64>,
    /// `nu_mu(x,y) = sum_{x'y'} mu(x,y,x',y')`.
    pub state: Vec<f64>,
    /// `(E mu)(x,y) = sum_{x^y^} mu(x^,y^,x,y)`.
    pub shifted: Vec<f64>,
}

impl CouplingMarginals {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            over_next_y: vec![0.0; dims.alpha_x_len()],
            over_next_x: vec![0.0; dims.alpha_y_len()],
            state: vec![0.0; dims.pair_len()],
            shifted: vec![0.0; dims.pair_len()],
        }
    }

    pub(crate) fn clear(&mut self) {
        for v in [
            &mut self.over_next_y,
            &mut self.over_next_x,
            &mut self.state,
            &mut self.shifted,
        ] {
            v.iter_mut().for_each(|e| *e = 0.0);
        }
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for v in [
            &mut self.over_next_y,
            &mut self.over_next_x,
            &mut self.state,
            &mut self.shifted,
        ] {
            v.iter_mut().for_each(|e| *e *= factor);
        }
    }
}

/// Nonnegative weights over `X x Y x X x Y`; a point of the simplex when it
/// comes out of the solver or the rounding procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyCoupling {
    dims: Dims,
    values: Vec<f64>,
}

impl OccupancyCoupling {
    pub fn uniform(dims: Dims) -> Self {
        let len = dims.coupling_len();
        Self {
            dims,
            values: vec![1.0 / len as f64; len],
        }
    }

    pub fn from_values(dims: Dims, values: Vec<f64>) -> Result<Self> {
        if values.len() != dims.coupling_len() {
            return Err(Error::Shape(format!(
                "coupling has {} entries, expected {}",
                values.len(),
                dims.coupling_len()
            )));
        }
        Ok(Self { dims, values })
    }

    pub fn from_fn(dims: Dims, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; dims.coupling_len()];
        for x in 0..dims.nx {
            for y in 0..dims.ny {
                for x2 in 0..dims.nx {
                    for y2 in 0..dims.ny {
                        values[dims.mu(x, y, x2, y2)] = f(x, y, x2, y2);
                    }
                }
            }
        }
        Self { dims, values }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, x2: usize, y2: usize) -> f64 {
        self.values[self.dims.mu(x, y, x2, y2)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[cfg(test)]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Exchanges the entries with an equally long buffer.
    pub(crate) fn swap_values(&mut self, other: &mut Vec<f64>) {
        assert_eq!(other.len(), self.values.len(), "buffer length mismatch");
        std::mem::swap(&mut self.values, other);
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn marginals(&self) -> CouplingMarginals {
        let mut out = CouplingMarginals::zeros(self.dims);
        accumulate_marginals(self.dims, &self.values, &mut out);
        out
    }

    /// State marginal `nu_mu(x, y)`.
    pub fn state_marginal(&self) -> Vec<f64> {
        self.values
            .chunks(self.dims.pair_len())
            .map(|block| block.iter().sum())
            .collect()
    }

    /// Marginal over the X-chain transition, `sum_{y,y'} mu(x,y,x',y')`.
    pub fn x_transition_marginal(&self) -> Vec<f64> {
        let d = self.dims;
        let mut out = vec![0.0; d.nx * d.nx];
        for x in 0..d.nx {
            for y in 0..d.ny {
                for x2 in 0..d.nx {
                    for y2 in 0..d.ny {
                        out[x * d.nx + x2] += self.get(x, y, x2, y2);
                    }
                }
            }
        }
        out
    }

    /// Marginal over the Y-chain transition, `sum_{x,x'} mu(x,y,x',y')`.
    pub fn y_transition_marginal(&self) -> Vec<f64> {
        let d = self.dims;
        let mut out = vec![0.0; d.ny * d.ny];
        for x in 0..d.nx {
            for y in 0..d.ny {
                for x2 in 0..d.nx {
                    for y2 in 0..d.ny {
                        out[y * d.ny + y2] += self.get(x, y, x2, y2);
                    }
                }
            }
        }
        out
    }
}

/// Adds the marginals of `values` into `out`.
pub(crate) fn accumulate_marginals(dims: Dims, values: &[f64], out: &mut CouplingMarginals) {
    let (nx, ny) = (dims.nx, dims.ny);
    for x in 0..nx {
        for y in 0..ny {
            let pair = dims.pair(x, y);
            let mut state = 0.0;
            for x2 in 0..nx {
                let base = dims.mu(x, y, x2, 0);
                let block = &values[base..base + ny];
                let ax = dims.ax(x, x2, y);
                let ay = dims.ay(x, y, 0);
                let shifted = &mut out.shifted[x2 * ny..(x2 + 1) * ny];
                let over_x = &mut out.over_next_x[ay..ay + ny];
                let mut row = 0.0;
                for y2 in 0..ny {
                    let m = block[y2];
                    row += m;
                    over_x[y2] += m;
                    shifted[y2] += m;
                }
                out.over_next_y[ax] += row;
                state += row;
            }
            out.state[pair] += state;
        }
    }
}

/// A row-stochastic matrix of conditionals, e.g. `lambda_x(y | x)` with one
/// row per `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalKernel {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ConditionalKernel {
    pub fn uniform(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![1.0 / cols as f64; rows * cols],
        }
    }

    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "kernel has {} entries, expected {rows} x {cols}",
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `lambda(col | row)`.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest deviation of a row sum from 1.
    pub fn row_sum_error(&self) -> f64 {
        self.values
            .chunks(self.cols)
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Lagrange multipliers: `alpha_x` for the X-causality equations, `alpha_y`
/// for the Y-causality equations and `v` for the flow equations.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVariables {
    pub alpha_x: Vec<f64>,
    pub alpha_y: Vec<f64>,
    pub v: Vec<f64>,
}

impl DualVariables {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            alpha_x: vec![0.0; dims.alpha_x_len()],
            alpha_y: vec![0.0; dims.alpha_y_len()],
            v: vec![0.0; dims.pair_len()],
        }
    }

    /// Sup-norm radius of the `alpha` domain, `6 / (1 - gamma)`.
    pub fn alpha_radius(gamma: f64) -> f64 {
        6.0 / (1.0 - gamma)
    }

    /// Sup-norm radius of the `v` domain, `2 / (1 - gamma)`.
    pub fn v_radius(gamma: f64) -> f64 {
        2.0 / (1.0 - gamma)
    }

    pub fn in_domain(&self, gamma: f64) -> bool {
        let ra = Self::alpha_radius(gamma);
        let rv = Self::v_radius(gamma);
        self.alpha_x
            .iter()
            .chain(&self.alpha_y)
            .all(|a| a.abs() <= ra)
            && self.v.iter().all(|v| v.abs() <= rv)
    }
}

/// Total absolute (l1) violations of the flow and the two causality systems.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstraintResiduals {
    pub flow: f64,
    pub causal_x: f64,
    pub causal_y: f64,
}

impl ConstraintResiduals {
    pub fn max(&self) -> f64 {
        self.flow.max(self.causal_x).max(self.causal_y)
    }
}

fn check_shapes(
    dims: Dims,
    lx: &ConditionalKernel,
    ly: &ConditionalKernel,
    nu_x: &OccupancyTable,
    nu_y: &OccupancyTable,
) -> Result<()> {
    if lx.rows() != dims.nx || lx.cols() != dims.ny {
        return Err(Error::Shape(format!(
            "lambda_x is {}x{}, expected {}x{}",
            lx.rows(),
            lx.cols(),
            dims.nx,
            dims.ny
        )));
    }
    if ly.rows() != dims.ny || ly.cols() != dims.nx {
        return Err(Error::Shape(format!(
            "lambda_y is {}x{}, expected {}x{}",
            ly.rows(),
            ly.cols(),
            dims.ny,
            dims.nx
        )));
    }
    if nu_x.num_states() != dims.nx || nu_y.num_states() != dims.ny {
        return Err(Error::Shape(
            "occupancy tables do not match coupling dims".into(),
        ));
    }
    Ok(())
}

/// Per-equation flow residual `nu_mu - gamma E mu - (1 - gamma) nu0`.
fn flow_residual_vector(
    dims: Dims,
    marginals: &CouplingMarginals,
    nu0: JointInitial,
    gamma: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(dims.pair_len());
    for x in 0..dims.nx {
        for y in 0..dims.ny {
            let p = dims.pair(x, y);
            out.push(
                marginals.state[p] - gamma * marginals.shifted[p] - (1.0 - gamma) * nu0.mass(x, y),
            );
        }
    }
    out
}

/// l1 residuals of the flow equations and the sample-based causality
/// equations `sum_{y'} mu = nu_X(x,x') lambda_x(y|x)` and
/// `sum_{x'} mu = nu_Y(y,y') lambda_y(x|y)`.
pub fn residuals(
    mu: &OccupancyCoupling,
    lx: &ConditionalKernel,
    ly: &ConditionalKernel,
    nu_x: &OccupancyTable,
    nu_y: &OccupancyTable,
    nu0: JointInitial,
    gamma: f64,
) -> Result<ConstraintResiduals> {
    let dims = mu.dims();
    check_shapes(dims, lx, ly, nu_x, nu_y)?;
    Ok(residuals_from_marginals(
        dims,
        &mu.marginals(),
        lx,
        ly,
        nu_x,
        nu_y,
        nu0,
        gamma,
    ))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn residuals_from_marginals(
    dims: Dims,
    m: &CouplingMarginals,
    lx: &ConditionalKernel,
    ly: &ConditionalKernel,
    nu_x: &OccupancyTable,
    nu_y: &OccupancyTable,
    nu0: JointInitial,
    gamma: f64,
) -> ConstraintResiduals {
    let flow = flow_residual_vector(dims, m, nu0, gamma)
        .iter()
        .map(|r| r.abs())
        .sum();
    let mut causal_x = 0.0;
    for x in 0..dims.nx {
        for x2 in 0..dims.nx {
            let nu = nu_x.get(x, x2);
            for y in 0..dims.ny {
                causal_x += (m.over_next_y[dims.ax(x, x2, y)] - nu * lx.get(x, y)).abs();
            }
        }
    }
    let mut causal_y = 0.0;
    for x in 0..dims.nx {
        for y in 0..dims.ny {
            for y2 in 0..dims.ny {
                causal_y +=
                    (m.over_next_x[dims.ay(x, y, y2)] - nu_y.get(y, y2) * ly.get(y, x)).abs();
            }
        }
    }
    ConstraintResiduals {
        flow,
        causal_x,
        causal_y,
    }
}

/// `<mu, c>` in the cost's original units.
pub fn distance_of(mu: &OccupancyCoupling, cost: &CostMatrix) -> f64 {
    working_distance(mu, cost) * cost.scale()
}

/// `<mu, c>` with the rescaled cost.
pub(crate) fn working_distance(mu: &OccupancyCoupling, cost: &CostMatrix) -> f64 {
    mu.state_marginal()
        .iter()
        .zip(cost.values())
        .map(|(m, c)| m * c)
        .sum()
}

/// The Lagrangian
///
/// ```text
/// L = sum mu(x,y,x',y') [c(x,y) - ax(x,x',y) - ay(x,y,y') + gamma v(x',y') - v(x,y)]
///   + sum nu_X(x,x') lambda_x(y|x) ax(x,x',y)
///   + sum nu_Y(y,y') lambda_y(x|y) ay(x,y,y')
///   + (1 - gamma) v(x0,y0)
/// ```
///
/// in the sign convention under which the solver's updates are exact
/// descent/ascent steps. Evaluated with the rescaled cost.
#[allow(clippy::too_many_arguments)]
pub fn lagrangian(
    mu: &OccupancyCoupling,
    lx: &ConditionalKernel,
    ly: &ConditionalKernel,
    duals: &DualVariables,
    cost: &CostMatrix,
    nu_x: &OccupancyTable,
    nu_y: &OccupancyTable,
    nu0: JointInitial,
    gamma: f64,
) -> Result<f64> {
    let d = mu.dims();
    check_shapes(d, lx, ly, nu_x, nu_y)?;
    let mut total = 0.0;
    for x in 0..d.nx {
        for y in 0..d.ny {
            let base = cost.get(x, y) - duals.v[d.pair(x, y)];
            for x2 in 0..d.nx {
                let ax = duals.alpha_x[d.ax(x, x2, y)];
                for y2 in 0..d.ny {
                    let g =
                        base - ax - duals.alpha_y[d.ay(x, y, y2)] + gamma * duals.v[d.pair(x2, y2)];
                    total += mu.get(x, y, x2, y2) * g;
                }
            }
        }
    }
    for x in 0..d.nx {
        for x2 in 0..d.nx {
            for y in 0..d.ny {
                total += nu_x.get(x, x2) * lx.get(x, y) * duals.alpha_x[d.ax(x, x2, y)];
            }
        }
    }
    for x in 0..d.nx {
        for y in 0..d.ny {
            for y2 in 0..d.ny {
                total += nu_y.get(y, y2) * ly.get(y, x) * duals.alpha_y[d.ay(x, y, y2)];
            }
        }
    }
    total += (1.0 - gamma) * duals.v[d.pair(nu0.x, nu0.y)];
    Ok(total)
}

/// `<mu, c> + (6 causal_x + 6 causal_y + 2 flow) / (1 - gamma)`, in the cost's
/// original units. Upper-bounds the best-response value of the Lagrangian over
/// the dual domains.
pub fn dual_certificate(
    mu: &OccupancyCoupling,
    cost: &CostMatrix,
    residuals: &ConstraintResiduals,
    gamma: f64,
) -> f64 {
    let penalty = (6.0 * residuals.causal_x + 6.0 * residuals.causal_y + 2.0 * residuals.flow)
        / (1.0 - gamma);
    (working_distance(mu, cost) + penalty) * cost.scale()
}

/// Conditionals read off a coupling: `lambda_x(y|x) = nu_mu(x,y) / nu_X(x)`
/// and `lambda_y(x|y) = nu_mu(x,y) / nu_Y(y)`.
///
/// Rows whose occupancy is below [`CONDITIONAL_THRESHOLD`] are undetermined;
/// they are filled uniformly and reported.
#[derive(Debug, Clone)]
pub struct InducedConditionals {
    pub lambda_x: ConditionalKernel,
    pub lambda_y: ConditionalKernel,
    pub undetermined_x: Vec<usize>,
    pub undetermined_y: Vec<usize>,
}

pub fn induced_conditionals(
    mu: &OccupancyCoupling,
    nu_x: &OccupancyTable,
    nu_y: &OccupancyTable,
) -> InducedConditionals {
    let d = mu.dims();
    let state = mu.state_marginal();
    let px = nu_x.marginal();
    let py = nu_y.marginal();
    let mut lambda_x = ConditionalKernel::uniform(d.nx, d.ny);
    let mut lambda_y = ConditionalKernel::uniform(d.ny, d.nx);
    let mut undetermined_x = Vec::new();
    let mut undetermined_y = Vec::new();
    for x in 0..d.nx {
        if px[x] > CONDITIONAL_THRESHOLD {
            let row = lambda_x.row_mut(x);
            for y in 0..d.ny {
                row[y] = state[d.pair(x, y)] / px[x];
            }
        } else {
            undetermined_x.push(x);
        }
    }
    for y in 0..d.ny {
        if py[y] > CONDITIONAL_THRESHOLD {
            let row = lambda_y.row_mut(y);
            for x in 0..d.nx {
                row[x] = state[d.pair(x, y)] / py[y];
            }
        } else {
            undetermined_y.push(y);
        }
    }
    InducedConditionals {
        lambda_x,
        lambda_y,
        undetermined_x,
        undetermined_y,
    }
}

/// Comparison of the two equivalent constraint systems on one coupling.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// Largest equation residual of flow + sample-based causality (with the
    /// supplied conditionals).
    pub sample_system_max: f64,
    /// Largest equation residual of flow + kernel-based marginal equations.
    pub kernel_system_max: f64,
    /// Largest gap between the supplied conditionals and those recovered
    /// from `mu`, over determined rows.
    pub conditional_gap: f64,
    pub undetermined_x: Vec<usize>,
    pub undetermined_y: Vec<usize>,
}

impl EquivalenceReport {
    pub fn sample_system_holds(&self, tol: f64) -> bool {
        self.sample_system_max <= tol
    }

    pub fn kernel_system_holds(&self, tol: f64) -> bool {
        self.kernel_system_max <= tol
    }
}

/// Evaluates both characterizations of valid occupancy couplings: the one
/// using `nu_X`, `nu_Y` and free conditionals, and the one using the kernels
/// `P_X`, `P_Y` directly.
pub fn check_equivalence(
    mu: &OccupancyCoupling,
    lx: &ConditionalKernel,
    ly: &ConditionalKernel,
    chain_x: &MarkovChain,
    chain_y: &MarkovChain,
    gamma: f64,
) -> Result<EquivalenceReport> {
    let d = mu.dims();
    if chain_x.num_states() != d.nx || chain_y.num_states() != d.ny {
        return Err(Error::Shape("chains do not match coupling dims".into()));
    }
    let nu_x = crate::chain::exact_occupancy(chain_x, gamma)?;
    let nu_y = crate::chain::exact_occupancy(chain_y, gamma)?;
    check_shapes(d, lx, ly, &nu_x, &nu_y)?;
    let nu0 = JointInitial::of(chain_x, chain_y);
    let m = mu.marginals();

    let flow_max = flow_residual_vector(d, &m, nu0, gamma)
        .iter()
        .fold(0.0_f64, |a, r| a.max(r.abs()));

    let mut sample_max = flow_max;
    let mut kernel_max = flow_max;
    for x in 0..d.nx {
        for y in 0..d.ny {
            let state = m.state[d.pair(x, y)];
            for x2 in 0..d.nx {
                let lhs = m.over_next_y[d.ax(x, x2, y)];
                sample_max = sample_max.max((lhs - nu_x.get(x, x2) * lx.get(x, y)).abs());
                kernel_max = kernel_max.max((lhs - state * chain_x.prob(x, x2)).abs());
            }
            for y2 in 0..d.ny {
                let lhs = m.over_next_x[d.ay(x, y, y2)];
                sample_max = sample_max.max((lhs - nu_y.get(y, y2) * ly.get(y, x)).abs());
                kernel_max = kernel_max.max((lhs - state * chain_y.prob(y, y2)).abs());
            }
        }
    }

    let induced = induced_conditionals(mu, &nu_x, &nu_y);
    let mut gap: f64 = 0.0;
    for x in (0..d.nx).filter(|x| !induced.undetermined_x.contains(x)) {
        for y in 0..d.ny {
            gap = gap.max((induced.lambda_x.get(x, y) - lx.get(x, y)).abs());
        }
    }
    for y in (0..d.ny).filter(|y| !induced.undetermined_y.contains(y)) {
        for x in 0..d.nx {
            gap = gap.max((induced.lambda_y.get(y, x) - ly.get(y, x)).abs());
        }
    }
    Ok(EquivalenceReport {
        sample_system_max: sample_max,
        kernel_system_max: kernel_max,
        conditional_gap: gap,
        undetermined_x: induced.undetermined_x,
        undetermined_y: induced.undetermined_y,
    })
}
