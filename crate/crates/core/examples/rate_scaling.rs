//! Error of the averaged estimate against the iteration budget, with step
//! sizes tuned to the horizon: quadrupling K roughly halves the error.
//!
//!     cargo run --release --example rate_scaling

use bisim_ot::harness::{sweep, sweep_summary, ChainSource};
use bisim_ot::oracle::bicausal_value_iteration;
use bisim_ot::solver::{theory_rates, RatePreset, SolverConfig};
use bisim_ot::{make_random_walk, CostMatrix};

fn main() -> bisim_ot::Result<()> {
    let gamma = 0.9;
    let x = make_random_walk(4, 0.3)?;
    let y = make_random_walk(4, 0.7)?;
    let cost = CostMatrix::reward_abs_diff(&x, &y)?;
    let truth = bicausal_value_iteration(&x, &y, &cost, gamma, 1e-10)?.distance;
    let (sx, sy) = (ChainSource::Known(x), ChainSource::Known(y));

    let mut previous: Option<f64> = None;
    for k in [4_000, 16_000, 64_000] {
        let r = theory_rates(4, 4, gamma, k);
        let config = SolverConfig {
            gamma,
            iterations: k,
            batch_size: 1,
            rate_preset: RatePreset::Practical,
            eta0: 30.0 * r.eta,
            decay: 0.0,
            beta0: 0.25 * r.beta,
            snapshot_every: k,
            ..SolverConfig::default()
        };
        let rows = sweep(&sx, &sy, &cost, &config, &[k], 5, Some(truth))?;
        let (_, estimate, error) = sweep_summary(&rows)[0];
        let error = error.unwrap_or(f64::NAN);
        let ratio = previous.map_or(String::new(), |p| format!("  ratio {:.2}", p / error));
        println!("K={k:>6}  median estimate {estimate:.4}  median error {error:.4}{ratio}");
        previous = Some(error);
    }
    Ok(())
}
