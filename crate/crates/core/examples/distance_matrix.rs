//! Pairwise distances between walks that differ in bias and start state,
//! next to the exact values. With rewards on both walls, a walk started at
//! state 1 with bias theta mirrors the walk started at n-2 with bias
//! 1 - theta.
//!
//!     cargo run --release --example distance_matrix

use bisim_ot::harness::{dist_matrix, matrix_instances, DistMatrixSpec};
use bisim_ot::solver::{RatePreset, SolverConfig};

fn main() -> bisim_ot::Result<()> {
    let spec = DistMatrixSpec {
        n: 4,
        thetas: vec![0.2, 0.8],
        initial_states: vec![1, 2],
        oracle: true,
        ..DistMatrixSpec::default()
    };
    let config = SolverConfig {
        gamma: 0.9,
        iterations: 50_000,
        batch_size: 1,
        rate_preset: RatePreset::Practical,
        eta0: 0.05,
        decay: 0.0,
        beta0: 0.01,
        ..SolverConfig::default()
    };

    let instances = matrix_instances(&spec)?;
    let entries = dist_matrix(&spec, &config, 1e-8)?;
    let n = instances.len();
    let labels: Vec<String> = instances
        .iter()
        .map(|(s, t, _)| format!("s{s}/{t}"))
        .collect();
    println!("estimate (exact)");
    println!(
        "{:>7} {}",
        "",
        labels
            .iter()
            .map(|l| format!("{l:>15}"))
            .collect::<String>()
    );
    for (i, label) in labels.iter().enumerate() {
        let row: String = entries[i * n..(i + 1) * n]
            .iter()
            .map(|e| format!("{:>7.3} ({:.3})", e.distance, e.oracle.unwrap_or(f64::NAN)))
            .collect();
        println!("{label:>7} {row}");
    }
    Ok(())
}
