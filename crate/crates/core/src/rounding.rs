//! Rounding of approximate occupancy couplings onto exactly feasible ones.
//!
//! An approximate coupling is turned into a transition coupling, each
//! conditional is rounded onto the couplings of the true next-state laws, and
//! the occupancy induced by the rounded transition coupling is returned. This
//! needs the kernels and is an analysis tool, never part of the solver loop.

use crate::chain::MarkovChain;
use crate::coupling::{Dims, JointInitial, OccupancyCoupling};
use crate::error::{Error, Result};
use crate::linalg::discounted_visitation;

/// State-occupancy mass below which a conditional is replaced by the
/// independent product of the kernels.
pub const ZERO_MASS_THRESHOLD: f64 = 1e-12;

/// A kernel from state pairs to distributions over next-state pairs,
/// `pi(x', y' | x, y)`.
///
/// Stored with the same layout as [`OccupancyCoupling`], so the conditional of
/// `(x, y)` is the contiguous `nx x ny` block at `pair(x, y)`; viewed as a
/// whole it is the row-major transition matrix of the joint chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCoupling {
    dims: Dims,
    values: Vec<f64>,
}

impl TransitionCoupling {
    pub fn from_values(dims: Dims, values: Vec<f64>) -> Result<Self> {
        if values.len() != dims.coupling_len() {
            return Err(Error::Shape(format!(
                "transition coupling has {} entries, expected {}",
                values.len(),
                dims.coupling_len()
            )));
        }
        Ok(Self { dims, values })
    }

    /// The coupling that moves the two chains independently.
    pub fn independent(chain_x: &MarkovChain, chain_y: &MarkovChain) -> Self {
        let dims = Dims::new(chain_x.num_states(), chain_y.num_states());
        let mut values = vec![0.0; dims.coupling_len()];
        for x in 0..dims.nx {
            for y in 0..dims.ny {
                let block = conditional_block_mut(dims, &mut values, x, y);
                product_into(block, chain_x.row(x), chain_y.row(y));
            }
        }
        Self { dims, values }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// `pi(. | x, y)` as a row-major `nx x ny` matrix.
    pub fn conditional(&self, x: usize, y: usize) -> &[f64] {
        let len = self.dims.pair_len();
        let start = self.dims.pair(x, y) * len;
        &self.values[start..start + len]
    }

    pub(crate) fn conditional_mut(&mut self, x: usize, y: usize) -> &mut [f64] {
        conditional_block_mut(self.dims, &mut self.values, x, y)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest violation of `sum pi(.|x,y) = 1` and of the two marginal
    /// conditions `sum_{y'} pi = P_X(.|x)`, `sum_{x'} pi = P_Y(.|y)`.
    pub fn validity_error(&self, chain_x: &MarkovChain, chain_y: &MarkovChain) -> f64 {
        let d = self.dims;
        let mut worst: f64 = 0.0;
        for x in 0..d.nx {
            for y in 0..d.ny {
                let block = self.conditional(x, y);
                let (rows, cols) = marginal_sums(block, d.nx, d.ny);
                worst = worst.max((block.iter().sum::<f64>() - 1.0).abs());
                for (r, p) in rows.iter().zip(chain_x.row(x)) {
                    worst = worst.max((r - p).abs());
                }
                for (c, q) in cols.iter().zip(chain_y.row(y)) {
                    worst = worst.max((c - q).abs());
                }
            }
        }
        worst
    }
}

fn conditional_block_mut(dims: Dims, values: &mut [f64], x: usize, y: usize) -> &mut [f64] {
    let len = dims.pair_len();
    let start = dims.pair(x, y) * len;
    &mut values[start..start + len]
}

fn product_into(block: &mut [f64], p: &[f64], q: &[f64]) {
    let n = q.len();
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            block[i * n + j] = pi * qj;
        }
    }
}

fn marginal_sums(block: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<f64>) {
    let mut r = vec![0.0; rows];
    let mut c = vec![0.0; cols];
    for i in 0..rows {
        for j in 0..cols {
            let v = block[i * cols + j];
            r[i] += v;
            c[j] += v;
        }
    }
    (r, c)
}

/// `pi_mu(x',y'|x,y) = mu(x,y,x',y') / nu_mu(x,y)`, falling back to the
/// independent product of the kernels where `nu_mu(x,y)` vanishes.
pub fn transition_coupling_of(
    mu: &OccupancyCoupling,
    chain_x: &MarkovChain,
    chain_y: &MarkovChain,
) -> Result<TransitionCoupling> {
    let dims = mu.dims();
    if chain_x.num_states() != dims.nx || chain_y.num_states() != dims.ny {
        return Err(Error::Shape("chains do not match coupling dims".into()));
    }
    let mut pi = TransitionCoupling {
        dims,
        values: vec![0.0; dims.coupling_len()],
    };
    let len = dims.pair_len();
    for x in 0..dims.nx {
        for y in 0..dims.ny {
            let start = dims.pair(x, y) * len;
            let src = &mu.values()[start..start + len];
            let mass: f64 = src.iter().sum();
            let block = pi.conditional_mut(x, y);
            if mass > ZERO_MASS_THRESHOLD {
                for (dst, m) in block.iter_mut().zip(src) {
                    *dst = m / mass;
                }
            } else {
                product_into(block, chain_x.row(x), chain_y.row(y));
            }
        }
    }
    Ok(pi)
}

/// Rounds a nonnegative `m x n` matrix onto the couplings of `p` and `q`:
/// scale down rows exceeding `p`, scale down columns exceeding `q`, then
/// spread the missing mass as a rank-one correction.
///
/// The output moves at most `2 (|F 1 - p|_1 + |F^T 1 - q|_1)` in l1.
pub fn round_to_coupling(f: &[f64], p: &[f64], q: &[f64]) -> Vec<f64> {
    let (m, n) = (p.len(), q.len());
    assert_eq!(f.len(), m * n, "matrix shape does not match marginals");
    let mut g = f.to_vec();

    for (i, row) in g.chunks_mut(n).enumerate() {
        let sum: f64 = row.iter().sum();
        if sum > p[i] {
            let scale = p[i] / sum;
            row.iter_mut().for_each(|v| *v *= scale);
        }
    }
    let mut cols = vec![0.0; n];
    for row in g.chunks(n) {
        for (c, v) in cols.iter_mut().zip(row) {
            *c += v;
        }
    }
    let col_scale: Vec<f64> = cols
        .iter()
        .zip(q)
        .map(|(&c, &qj)| if c > qj { qj / c } else { 1.0 })
        .collect();
    for row in g.chunks_mut(n) {
        for (v, s) in row.iter_mut().zip(&col_scale) {
            *v *= s;
        }
    }

    let (rows, cols) = marginal_sums(&g, m, n);
    let err_p: Vec<f64> = p.iter().zip(&rows).map(|(a, b)| (a - b).max(0.0)).collect();
    let err_q: Vec<f64> = q.iter().zip(&cols).map(|(a, b)| (a - b).max(0.0)).collect();
    let norm: f64 = err_p.iter().sum();
    if norm == 0.0 {
        return g;
    }
    for (i, row) in g.chunks_mut(n).enumerate() {
        let ei = err_p[i] / norm;
        if ei == 0.0 {
            continue;
        }
        for (v, ej) in row.iter_mut().zip(&err_q) {
            *v += ei * ej;
        }
    }
    g
}

/// Average of the rounding of `F` and the transposed rounding of `F^T`.
pub fn round_symmetric(f: &[f64], p: &[f64], q: &[f64]) -> Vec<f64> {
    let (m, n) = (p.len(), q.len());
    let forward = round_to_coupling(f, p, q);
    let ft = transpose(f, m, n);
    let backward = round_to_coupling(&ft, q, p);
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            out[i * n + j] = 0.5 * (forward[i * n + j] + backward[j * m + i]);
        }
    }
    out
}

fn transpose(f: &[f64], m: usize, n: usize) -> Vec<f64> {
    let mut t = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            t[j * m + i] = f[i * n + j];
        }
    }
    t
}

/// Rounds every conditional of a transition coupling onto the couplings of
/// `P_X(.|x)` and `P_Y(.|y)`.
pub fn round_transition_coupling(
    pi: &TransitionCoupling,
    chain_x: &MarkovChain,
    chain_y: &MarkovChain,
) -> TransitionCoupling {
    let d = pi.dims();
    let mut out = pi.clone();
    for x in 0..d.nx {
        for y in 0..d.ny {
            let rounded = round_symmetric(pi.conditional(x, y), chain_x.row(x), chain_y.row(y));
            out.conditional_mut(x, y).copy_from_slice(&rounded);
        }
    }
    out
}

/// Occupancy coupling of the joint chain driven by `pi` from `nu0`:
/// `mu(x,y,x',y') = xi(x,y) pi(x',y'|x,y)` with
/// `xi = gamma Pi^T xi + (1 - gamma) nu0`.
pub fn induced_occupancy(
    pi: &TransitionCoupling,
    nu0: JointInitial,
    gamma: f64,
) -> Result<OccupancyCoupling> {
    let d = pi.dims();
    let n = d.pair_len();
    let xi = discounted_visitation(pi.values(), n, gamma, d.pair(nu0.x, nu0.y))?;
    let mut values = pi.values().to_vec();
    for (block, weight) in values.chunks_mut(n).zip(&xi) {
        block.iter_mut().for_each(|v| *v *= weight);
    }
    OccupancyCoupling::from_values(d, values)
}

/// Rounds `mu` onto a valid occupancy coupling and reports `|mu - r(mu)|_1`.
pub fn round_occupancy(
    mu: &OccupancyCoupling,
    chain_x: &MarkovChain,
    chain_y: &MarkovChain,
    gamma: f64,
) -> Result<(OccupancyCoupling, f64)> {
    let pi = transition_coupling_of(mu, chain_x, chain_y)?;
    let rounded = round_transition_coupling(&pi, chain_x, chain_y);
    let r_mu = induced_occupancy(&rounded, JointInitial::of(chain_x, chain_y), gamma)?;
    let gap = mu.l1_distance(&r_mu);
    Ok((r_mu, gap))
}
