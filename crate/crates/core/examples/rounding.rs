//! Rounds the solver's averaged coupling onto the feasible set and compares
//! the gap with the constraint violations.
//!
//!     cargo run --release --example rounding

use bisim_ot::coupling::{distance_of, induced_conditionals, residuals};
use bisim_ot::oracle::bicausal_value_iteration;
use bisim_ot::rounding::round_occupancy;
use bisim_ot::solver::{run_chains, RatePreset, SolverConfig};
use bisim_ot::{exact_occupancy, make_random_walk, CostMatrix, JointInitial};

fn main() -> bisim_ot::Result<()> {
    let gamma = 0.9;
    let x = make_random_walk(3, 0.2)?;
    let y = make_random_walk(3, 0.6)?;
    let cost = CostMatrix::reward_abs_diff(&x, &y)?;
    let config = SolverConfig {
        gamma,
        iterations: 100_000,
        batch_size: 1,
        rate_preset: RatePreset::Practical,
        eta0: 0.05,
        decay: 0.0,
        beta0: 0.01,
        ..SolverConfig::default()
    };
    let mu = run_chains(&x, &y, cost.clone(), &config)?.mu_bar;

    let (nu_x, nu_y) = (exact_occupancy(&x, gamma)?, exact_occupancy(&y, gamma)?);
    let lam = induced_conditionals(&mu, &nu_x, &nu_y);
    let res = residuals(
        &mu,
        &lam.lambda_x,
        &lam.lambda_y,
        &nu_x,
        &nu_y,
        JointInitial::of(&x, &y),
        gamma,
    )?;
    let (rounded, gap) = round_occupancy(&mu, &x, &y, gamma)?;
    let bound = (3.0 * res.causal_x + 3.0 * res.causal_y + res.flow) / (1.0 - gamma);

    println!(
        "violations: flow {:.2e}, causal {:.2e} / {:.2e}",
        res.flow, res.causal_x, res.causal_y
    );
    println!("l1 gap {gap:.3e} <= bound {bound:.3e}");
    let exact = bicausal_value_iteration(&x, &y, &cost, gamma, 1e-10)?.distance;
    println!(
        "estimate {:.5}, rounded {:.5}, exact {exact:.5}",
        distance_of(&mu, &cost),
        distance_of(&rounded, &cost)
    );
    Ok(())
}
