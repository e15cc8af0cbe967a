#![allow(dead_code)]

use bisim_ot::rounding::{round_transition_coupling, TransitionCoupling};
use bisim_ot::{Dims, MarkovChain, OccupancyCoupling};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Positive weights normalized to one; a few entries are zeroed when
/// `sparse` is set.
pub fn simplex(rng: &mut ChaCha8Rng, n: usize, sparse: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            if sparse && rng.random::<f64>() < 0.3 {
                0.0
            } else {
                rng.random::<f64>() + 1e-3
            }
        })
        .collect();
    if w.iter().all(|v| *v == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

pub fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> MarkovChain {
    let sparse = rng.random::<bool>();
    let rows = (0..n).map(|_| simplex(rng, n, sparse)).collect();
    let rewards = (0..n).map(|_| rng.random::<f64>()).collect();
    MarkovChain::new(rows, rng.random_range(0..n))
        .unwrap()
        .with_rewards(rewards)
        .unwrap()
}

pub fn random_coupling(rng: &mut ChaCha8Rng, dims: Dims) -> OccupancyCoupling {
    OccupancyCoupling::from_values(dims, simplex(rng, dims.coupling_len(), false)).unwrap()
}

/// A valid transition coupling: random conditionals rounded onto the
/// kernels' couplings.
pub fn random_transition_coupling(
    rng: &mut ChaCha8Rng,
    cx: &MarkovChain,
    cy: &MarkovChain,
) -> TransitionCoupling {
    let dims = Dims::new(cx.num_states(), cy.num_states());
    let mut values = Vec::with_capacity(dims.coupling_len());
    for _ in 0..dims.pair_len() {
        values.extend(simplex(rng, dims.pair_len(), true));
    }
    let raw = TransitionCoupling::from_values(dims, values).unwrap();
    round_transition_coupling(&raw, cx, cy)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
