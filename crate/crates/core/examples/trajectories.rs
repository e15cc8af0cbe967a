//! Distances from recorded transitions only: dump samples of two walks to
//! disk, read them back and run the solver without the kernels.
//!
//!     cargo run --release --example trajectories

use bisim_ot::harness::{solve_sources, ChainSource};
use bisim_ot::sampler::{ingest_transitions, write_transitions};
use bisim_ot::solver::{RatePreset, SolverConfig};
use bisim_ot::{make_random_walk, CostMatrix, TransitionSampler};

fn main() -> bisim_ot::Result<()> {
    let gamma = 0.9;
    let x = make_random_walk(4, 0.3)?;
    let y = make_random_walk(4, 0.7)?;
    let cost = CostMatrix::reward_abs_diff(&x, &y)?;
    let dir = std::env::temp_dir().join("bisim-ot-trajectories");
    std::fs::create_dir_all(&dir).map_err(|e| bisim_ot::Error::io(&dir, e))?;

    let mut sources = Vec::new();
    for (name, chain) in [("x", &x), ("y", &y)] {
        let mut s = TransitionSampler::geometric(chain, 3, 0);
        let pairs: Vec<_> = (0..10_000).map(|_| s.sample(gamma)).collect();
        let path = dir.join(format!("{name}.csv"));
        write_transitions(&path, &pairs)?;
        let replay = ingest_transitions(&path, Some(4), 0, 0)?;
        println!(
            "{}: {} transitions",
            path.display(),
            replay.pairs().map_or(0, <[_]>::len)
        );
        sources.push(ChainSource::Recorded {
            pairs: replay.pairs().unwrap_or_default().to_vec(),
            num_states: 4,
            initial: chain.initial(),
            rewards: chain.rewards().map(<[f64]>::to_vec),
        });
    }

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
    let replayed = solve_sources(&sources[0], &sources[1], cost.clone(), &config)?;
    let known = solve_sources(
        &ChainSource::Known(x),
        &ChainSource::Known(y),
        cost,
        &config,
    )?;
    println!(
        "from recordings {:.4}, from kernels {:.4}",
        replayed.distance(),
        known.distance()
    );
    Ok(())
}
