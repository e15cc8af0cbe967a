use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::chain::{make_block_lift, make_random_walk, MarkovChain};
use crate::cost::CostMatrix;
use crate::coupling::JointInitial;
use crate::error::{Error, Result};
use crate::oracle::{bicausal_value_iteration, oracle_occupancy};
use crate::sampler::TransitionSampler;
use crate::solver::{
    run, Preset, Problem, RatePreset, SolverConfig, SolverRun, STREAM_X, STREAM_Y,
};

use super::config::{walk_with, ChainSource, ExperimentConfig, Overrides};
use super::output::{coupling_table, fmt_f64, kernel_table, read_distance, trace_table, Table};

fn sampler_for(source: &ChainSource, seed: u64, stream: u64) -> Result<TransitionSampler> {
    match source {
        ChainSource::Known(chain) => Ok(TransitionSampler::geometric(chain, seed, stream)),
        ChainSource::Recorded {
            pairs, num_states, ..
        } => TransitionSampler::buffer(pairs.clone(), Some(*num_states), seed, stream),
    }
}

/// One solver run on a pair of chain sources. Residual diagnostics need both
/// kernels.
pub fn solve_sources(
    x: &ChainSource,
    y: &ChainSource,
    cost: CostMatrix,
    config: &SolverConfig,
) -> Result<SolverRun> {
    let problem = match (x.known(), y.known()) {
        (Some(cx), Some(cy)) => Problem::from_chains(cx, cy, cost, config.gamma)?,
        _ => Problem::from_samples(
            x.num_states(),
            y.num_states(),
            cost,
            JointInitial::new(x.initial(), y.initial()),
        )?,
    };
    let mut sx = sampler_for(x, config.seed, STREAM_X)?;
    let mut sy = sampler_for(y, config.seed, STREAM_Y)?;
    run(&problem, &mut sx, &mut sy, config)
}

fn require_known<'a>(source: &'a ChainSource, field: &str) -> Result<&'a MarkovChain> {
    source.known().ok_or_else(|| {
        Error::Config(format!(
            "`{field}` must have a known kernel for this command"
        ))
    })
}

/// Runs the solver on the configured pair and writes `trace.csv`,
/// `summary.csv` and, when `dump_tensors` is set, the averaged coupling and
/// conditionals.
pub fn cmd_solve(cfg: &ExperimentConfig, o: &Overrides) -> Result<Vec<PathBuf>> {
    let solver = cfg.solver_config(o, None)?;
    let (x, y) = cfg.chains()?;
    let cost = cfg.cost.build(&x, &y, &cfg.base_dir)?;
    let reference = o.compare_oracle.as_deref().map(read_distance).transpose()?;
    let out = cfg.out_dir(o);
    let result = solve_sources(&x, &y, cost, &solver)?;

    let mut written = vec![trace_table(&result.trace, reference).write(&out.join("trace.csv"))?];
    let last = result.trace.last().expect("at least one snapshot");
    let mut header = vec!["distance", "iterations", "seed"];
    let mut row = vec![
        fmt_f64(last.distance),
        solver.iterations.to_string(),
        solver.seed.to_string(),
    ];
    if let (Some(r), Some(c)) = (last.residuals, last.certificate) {
        header.extend([
            "flow_residual",
            "causal_x_residual",
            "causal_y_residual",
            "certificate",
        ]);
        row.extend([
            fmt_f64(r.flow),
            fmt_f64(r.causal_x),
            fmt_f64(r.causal_y),
            fmt_f64(c),
        ]);
    }
    if let Some(reference) = reference {
        header.extend(["oracle", "abs_error"]);
        row.extend([
            fmt_f64(reference),
            fmt_f64((last.distance - reference).abs()),
        ]);
    }
    let mut summary = Table::new(header);
    summary.push(row);
    written.push(summary.write(&out.join("summary.csv"))?);
    if cfg.dump_tensors {
        written.push(coupling_table(&result.mu_bar).write(&out.join("mu_bar.csv"))?);
        written
            .push(kernel_table(&result.lambda_x_bar, "x", "y").write(&out.join("lambda_x.csv"))?);
        written
            .push(kernel_table(&result.lambda_y_bar, "y", "x").write(&out.join("lambda_y.csv"))?);
    }
    Ok(written)
}

/// Exact distance by value iteration: `oracle.csv`, `value_table.csv` and
/// the optimal coupling `mu_star.csv`.
pub fn cmd_oracle(cfg: &ExperimentConfig, o: &Overrides) -> Result<Vec<PathBuf>> {
    let solver = cfg.solver_config(o, None)?;
    let (x, y) = cfg.chains()?;
    let (cx, cy) = (require_known(&x, "chain_x")?, require_known(&y, "chain_y")?);
    let cost = cfg.cost.build(&x, &y, &cfg.base_dir)?;
    let out = cfg.out_dir(o);
    let sol = bicausal_value_iteration(cx, cy, &cost, solver.gamma, cfg.oracle_tol)?;

    let mut summary = Table::new(["distance", "gamma", "tol", "sweeps"]);
    summary.push(vec![
        fmt_f64(sol.distance),
        fmt_f64(solver.gamma),
        fmt_f64(cfg.oracle_tol),
        sol.sweeps.to_string(),
    ]);
    let mut values = Table::new(["x", "y", "value"]);
    for (p, v) in sol.values.iter().enumerate() {
        values.push(vec![
            (p / cy.num_states()).to_string(),
            (p % cy.num_states()).to_string(),
            fmt_f64(*v),
        ]);
    }
    let mu = oracle_occupancy(cx, cy, &cost, solver.gamma, cfg.oracle_tol)?;
    Ok(vec![
        summary.write(&out.join("oracle.csv"))?,
        values.write(&out.join("value_table.csv"))?,
        coupling_table(&mu).write(&out.join("mu_star.csv"))?,
    ])
}

/// Trace rows at the requested iteration counts. Practical schedules do not
/// depend on the horizon, so one run to the largest count serves all of them;
/// horizon-tuned schedules get one run per count.
fn distances_at(
    x: &ChainSource,
    y: &ChainSource,
    cost: &CostMatrix,
    base: &SolverConfig,
    iterations: &[usize],
) -> Result<Vec<f64>> {
    let max = *iterations
        .iter()
        .max()
        .ok_or_else(|| Error::Config("empty iteration grid".into()))?;
    if iterations.contains(&0) {
        return Err(Error::Config("iteration counts must be positive".into()));
    }
    if base.rate_preset == RatePreset::Practical {
        let step = iterations.iter().copied().fold(0, gcd);
        let config = SolverConfig {
            iterations: max,
            snapshot_every: step,
            ..base.clone()
        };
        let result = solve_sources(x, y, cost.clone(), &config)?;
        Ok(iterations
            .iter()
            .map(|&k| {
                result
                    .trace
                    .iter()
                    .find(|d| d.k == k)
                    .expect("grid points are snapshot points")
                    .distance
            })
            .collect())
    } else {
        iterations
            .iter()
            .map(|&k| {
                let config = SolverConfig {
                    iterations: k,
                    snapshot_every: k,
                    ..base.clone()
                };
                Ok(solve_sources(x, y, cost.clone(), &config)?.distance())
            })
            .collect()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// One row of a seed/iteration sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub iterations: usize,
    pub seed: u64,
    pub distance: f64,
    pub oracle: Option<f64>,
}

/// Runs every iteration budget for `seeds` consecutive seeds.
pub fn sweep(
    x: &ChainSource,
    y: &ChainSource,
    cost: &CostMatrix,
    base: &SolverConfig,
    iterations: &[usize],
    seeds: usize,
    oracle: Option<f64>,
) -> Result<Vec<SweepRow>> {
    let per_seed: Vec<Result<Vec<SweepRow>>> = (0..seeds as u64)
        .into_par_iter()
        .map(|i| {
            let config = SolverConfig {
                seed: base.seed + i,
                ..base.clone()
            };
            let d = distances_at(x, y, cost, &config, iterations)?;
            Ok(iterations
                .iter()
                .zip(d)
                .map(|(&k, distance)| SweepRow {
                    iterations: k,
                    seed: config.seed,
                    distance,
                    oracle,
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    rows.sort_by_key(|r| (r.iterations, r.seed));
    Ok(rows)
}

/// Median estimate and median absolute error per iteration budget.
pub fn sweep_summary(rows: &[SweepRow]) -> Vec<(usize, f64, Option<f64>)> {
    let mut ks: Vec<usize> = rows.iter().map(|r| r.iterations).collect();
    ks.dedup();
    ks.into_iter()
        .map(|k| {
            let at: Vec<&SweepRow> = rows.iter().filter(|r| r.iterations == k).collect();
            let mut d: Vec<f64> = at.iter().map(|r| r.distance).collect();
            let mut e: Vec<f64> = at
                .iter()
                .filter_map(|r| r.oracle.map(|o| (r.distance - o).abs()))
                .collect();
            let err = (!e.is_empty()).then(|| median(&mut e));
            (k, median(&mut d), err)
        })
        .collect()
}

/// Seeds x iteration budgets on the configured pair: `sweep.csv` and
/// `sweep_summary.csv`; with known kernels the oracle distance and absolute
/// errors are included.
pub fn cmd_sweep(cfg: &ExperimentConfig, o: &Overrides) -> Result<Vec<PathBuf>> {
    let solver = cfg.solver_config(o, None)?;
    let (x, y) = cfg.chains()?;
    let cost = cfg.cost.build(&x, &y, &cfg.base_dir)?;
    let oracle = match (x.known(), y.known(), &o.compare_oracle) {
        (_, _, Some(path)) => Some(read_distance(path)?),
        (Some(cx), Some(cy), None) => {
            Some(bicausal_value_iteration(cx, cy, &cost, solver.gamma, cfg.oracle_tol)?.distance)
        }
        _ => None,
    };
    let rows = sweep(
        &x,
        &y,
        &cost,
        &solver,
        &cfg.sweep.iterations,
        cfg.sweep.seeds,
        oracle,
    )?;
    let out = cfg.out_dir(o);

    let mut table = Table::new(["iterations", "seed", "distance", "oracle", "abs_error"]);
    for r in &rows {
        table.push(vec![
            r.iterations.to_string(),
            r.seed.to_string(),
            fmt_f64(r.distance),
            r.oracle.map(fmt_f64).unwrap_or_default(),
            r.oracle
                .map(|v| fmt_f64((r.distance - v).abs()))
                .unwrap_or_default(),
        ]);
    }
    let mut summary = Table::new(["iterations", "median_distance", "median_abs_error"]);
    for (k, d, e) in sweep_summary(&rows) {
        summary.push(vec![
            k.to_string(),
            fmt_f64(d),
            e.map(fmt_f64).unwrap_or_default(),
        ]);
    }
    Ok(vec![
        table.write(&out.join("sweep.csv"))?,
        summary.write(&out.join("sweep_summary.csv"))?,
    ])
}

/// One row of the model-selection table.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSelectRow {
    pub theta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub distance: f64,
    pub oracle: Option<f64>,
}

/// Distances between candidate walks `walk(n, theta)` and a block lift of
/// the true walk, for every theta, iteration count and seed.
pub fn model_select(
    spec: &super::config::ModelSelectSpec,
    base: &SolverConfig,
    oracle_tol: f64,
) -> Result<Vec<ModelSelectRow>> {
    if spec.thetas.is_empty() || spec.iterations.is_empty() || spec.seeds == 0 {
        return Err(Error::Config("model-select grids must be nonempty".into()));
    }
    let target = make_block_lift(&make_random_walk(spec.n, spec.true_theta)?, spec.blocks)?;
    let jobs: Vec<(f64, u64)> = spec
        .thetas
        .iter()
        .flat_map(|&t| (0..spec.seeds as u64).map(move |s| (t, s)))
        .collect();
    let results: Vec<Result<Vec<ModelSelectRow>>> = jobs
        .par_iter()
        .map(|&(theta, s)| {
            let candidate = make_random_walk(spec.n, theta)?;
            let cost = CostMatrix::reward_abs_diff(&candidate, &target)?;
            let oracle = if spec.oracle {
                Some(
                    bicausal_value_iteration(&candidate, &target, &cost, base.gamma, oracle_tol)?
                        .distance,
                )
            } else {
                None
            };
            let config = SolverConfig {
                seed: base.seed + s,
                ..base.clone()
            };
            let x = ChainSource::Known(candidate);
            let y = ChainSource::Known(target.clone());
            let d = distances_at(&x, &y, &cost, &config, &spec.iterations)?;
            Ok(spec
                .iterations
                .iter()
                .zip(d)
                .map(|(&k, distance)| ModelSelectRow {
                    theta,
                    iterations: k,
                    seed: config.seed,
                    distance,
                    oracle,
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// `model_select.csv` with one row per (theta, iterations, seed).
pub fn cmd_model_select(cfg: &ExperimentConfig, o: &Overrides) -> Result<Vec<PathBuf>> {
    let solver = cfg.solver_config(o, Some(Preset::ModelSelect))?;
    let rows = model_select(&cfg.model_select, &solver, cfg.oracle_tol)?;
    let mut table = Table::new(["theta", "iterations", "seed", "distance", "oracle"]);
    for r in &rows {
        table.push(vec![
            fmt_f64(r.theta),
            r.iterations.to_string(),
            r.seed.to_string(),
            fmt_f64(r.distance),
            r.oracle.map(fmt_f64).unwrap_or_default(),
        ]);
    }
    Ok(vec![table.write(&cfg.out_dir(o).join("model_select.csv"))?])
}

/// Averaged conditionals of a walk against its block lift at each sample
/// size.
pub fn enc_dec(
    spec: &super::config::EncDecSpec,
    base: &SolverConfig,
    base_dir: &Path,
) -> Result<Vec<(usize, SolverRun)>> {
    if spec.sample_sizes.is_empty() || spec.sample_sizes.contains(&0) {
        return Err(Error::Config(
            "enc-dec sample sizes must be positive and nonempty".into(),
        ));
    }
    let walk = make_random_walk(spec.n, spec.theta)?;
    let x = ChainSource::Known(walk.clone());
    let y = ChainSource::Known(make_block_lift(&walk, spec.blocks)?);
    let cost = spec.cost.build(&x, &y, base_dir)?;
    spec.sample_sizes
        .par_iter()
        .map(|&k| {
            let config = SolverConfig {
                iterations: k.div_ceil(base.batch_size),
                snapshot_every: k.div_ceil(base.batch_size),
                ..base.clone()
            };
            Ok((k, solve_sources(&x, &y, cost.clone(), &config)?))
        })
        .collect()
}

/// `lambda_x_<size>.csv` and `lambda_y_<size>.csv` per sample size.
pub fn cmd_enc_dec(cfg: &ExperimentConfig, o: &Overrides) -> Result<Vec<PathBuf>> {
    let solver = cfg.solver_config(o, Some(Preset::EncDec))?;
    let out = cfg.out_dir(o);
    let mut written = Vec::new();
    for (k, result) in enc_dec(&cfg.enc_dec, &solver, &cfg.base_dir)? {
        written.push(
            kernel_table(&result.lambda_x_bar, "x", "y")
                .write(&out.join(format!("lambda_x_{k}.csv")))?,
        );
        written.push(
            kernel_table(&result.lambda_y_bar, "y", "x")
                .write(&out.join(format!("lambda_y_{k}.csv")))?,
        );
    }
    Ok(written)
}

/// One entry of the pairwise distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEntry {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    pub oracle: Option<f64>,
}

/// Instances of the distance matrix, ordered by initial state, then theta.
pub fn matrix_instances(
    spec: &super::config::DistMatrixSpec,
) -> Result<Vec<(usize, f64, MarkovChain)>> {
    let rewards = spec.symmetric_rewards.then(|| {
        let mut r = vec![0.0; spec.n];
        r[0] = 1.0;
        r[spec.n - 1] = 1.0;
        r
    });
    let mut out = Vec::new();
    for &s in &spec.initial_states {
        for &theta in &spec.thetas {
            out.push((
                s,
                theta,
                walk_with(spec.n, theta, Some(s), rewards.clone())?,
            ));
        }
    }
    if out.is_empty() {
        return Err(Error::Config("dist-matrix grid is empty".into()));
    }
    Ok(out)
}

/// All pairwise distance estimates (and oracle values when requested).
pub fn dist_matrix(
    spec: &super::config::DistMatrixSpec,
    base: &SolverConfig,
    oracle_tol: f64,
) -> Result<Vec<MatrixEntry>> {
    let instances = matrix_instances(spec)?;
    let n = instances.len();
    (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let (cx, cy) = (&instances[i].2, &instances[j].2);
            let cost = CostMatrix::reward_abs_diff(cx, cy)?;
            let oracle = if spec.oracle {
                Some(bicausal_value_iteration(cx, cy, &cost, base.gamma, oracle_tol)?.distance)
            } else {
                None
            };
            let x = ChainSource::Known(cx.clone());
            let y = ChainSource::Known(cy.clone());
            let distance = solve_sources(&x, &y, cost, base)?.distance();
            Ok(MatrixEntry {
                i,
                j,
                distance,
                oracle,
            })
        })
        .collect()
}

/// `dist_matrix.csv` with one row per ordered instance pair.
pub fn cmd_dist_matrix(cfg: &ExperimentConfig, o: &Overrides) -> Result<Vec<PathBuf>> {
    let solver = cfg.solver_config(o, Some(Preset::Similarity))?;
    let spec = &cfg.dist_matrix;
    let instances = matrix_instances(spec)?;
    let entries = dist_matrix(spec, &solver, cfg.oracle_tol)?;
    let mut table = Table::new([
        "i",
        "j",
        "initial_i",
        "theta_i",
        "initial_j",
        "theta_j",
        "distance",
        "oracle",
    ]);
    for e in &entries {
        let (si, ti, _) = &instances[e.i];
        let (sj, tj, _) = &instances[e.j];
        table.push(vec![
            e.i.to_string(),
            e.j.to_string(),
            si.to_string(),
            fmt_f64(*ti),
            sj.to_string(),
            fmt_f64(*tj),
            fmt_f64(e.distance),
            e.oracle.map(fmt_f64).unwrap_or_default(),
        ]);
    }
    Ok(vec![table.write(&cfg.out_dir(o).join("dist_matrix.csv"))?])
}
