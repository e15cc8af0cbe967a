//! Discounted occupancy of a walk, and how closely geometric sampling
//! reproduces it.
//!
//!     cargo run --example occupancy

use bisim_ot::{exact_occupancy, make_random_walk, TransitionSampler};

fn main() -> bisim_ot::Result<()> {
    let gamma = 0.9;
    let walk = make_random_walk(5, 0.4)?;
    let nu = exact_occupancy(&walk, gamma)?;
    println!(
        "residual of the defining system: {:.1e}",
        nu.defining_residual(&walk, gamma)
    );

    let n = walk.num_states();
    let mut counts = vec![0usize; n * n];
    let mut sampler = TransitionSampler::geometric(&walk, 1, 0);
    let draws = 100_000;
    for _ in 0..draws {
        let p = sampler.sample(gamma);
        counts[p.from_state * n + p.to_state] += 1;
    }
    let tv: f64 = counts
        .iter()
        .zip(nu.values())
        .map(|(&c, v)| (c as f64 / draws as f64 - v).abs())
        .sum::<f64>()
        / 2.0;

    println!("state  occupancy  empirical");
    let marginal = nu.marginal();
    for x in 0..n {
        let seen: usize = counts[x * n..(x + 1) * n].iter().sum();
        println!(
            "{x:>5}  {:>9.4}  {:>9.4}",
            marginal[x],
            seen as f64 / draws as f64
        );
    }
    println!("total variation over pairs after {draws} draws: {tv:.4}");
    Ok(())
}
