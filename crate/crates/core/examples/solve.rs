//! The stochastic primal-dual solver on two walks, with its convergence
//! trace against the exact value.
//!
//!     cargo run --release --example solve

use bisim_ot::oracle::bicausal_value_iteration;
use bisim_ot::solver::{run_chains, RatePreset, SolverConfig};
use bisim_ot::{make_random_walk, CostMatrix};

fn main() -> bisim_ot::Result<()> {
    let x = make_random_walk(4, 0.3)?;
    let y = make_random_walk(4, 0.7)?;
    let cost = CostMatrix::reward_abs_diff(&x, &y)?;
    let config = SolverConfig {
        gamma: 0.9,
        iterations: 200_000,
        batch_size: 1,
        rate_preset: RatePreset::Practical,
        eta0: 0.05,
        decay: 0.0,
        beta0: 0.01,
        snapshot_every: 20_000,
        ..SolverConfig::default()
    };
    let truth = bicausal_value_iteration(&x, &y, &cost, config.gamma, 1e-10)?.distance;
    let result = run_chains(&x, &y, cost, &config)?;

    println!("exact {truth:.5}");
    println!(
        "{:>8} {:>9} {:>9} {:>9} {:>11}",
        "k", "estimate", "flow", "causal", "certificate"
    );
    for d in &result.trace {
        let r = d.residuals.expect("known kernels");
        println!(
            "{:>8} {:>9.5} {:>9.2e} {:>9.2e} {:>11.5}",
            d.k,
            d.distance,
            r.flow,
            r.causal_x + r.causal_y,
            d.certificate.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
