//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use bisim_ot::coupling::{check_equivalence, induced_conditionals, residuals};
use bisim_ot::harness::{model_select, ModelSelectSpec};
use bisim_ot::oracle::bicausal_value_iteration;
use bisim_ot::rounding::{induced_occupancy, round_occupancy, round_symmetric, round_to_coupling};
use bisim_ot::solver::{
    estimate_dual_gradients, estimate_primal_gradients, run_chains, theory_rates, Preset,
    RatePreset, SolverConfig, SolverState,
};
use bisim_ot::{
    exact_occupancy, make_random_walk, ConditionalKernel, CostMatrix, Dims, JointInitial,
    MarkovChain, TransitionSampler,
};
use common::{median, random_chain, random_coupling, random_transition_coupling, rng, simplex};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn nonzero_instance() -> (MarkovChain, MarkovChain, CostMatrix) {
    let x = make_random_walk(4, 0.3).unwrap();
    let y = make_random_walk(4, 0.7).unwrap();
    let c = CostMatrix::reward_abs_diff(&x, &y).unwrap();
    (x, y, c)
}

/// Constant practical rates used for both oracle comparisons.
fn oracle_run_config(k: usize, seed: u64) -> SolverConfig {
    SolverConfig {
        gamma: 0.9,
        iterations: k,
        batch_size: 1,
        seed,
        rate_preset: RatePreset::Practical,
        eta0: 0.05,
        decay: 0.0,
        beta0: 0.01,
        snapshot_every: k,
        ..SolverConfig::default()
    }
}

fn zero_case() -> Outcome {
    const K: usize = 300_000;
    let w = make_random_walk(5, 0.5).unwrap();
    let cost = CostMatrix::indicator(&w, &w).unwrap();
    let mut errors = Vec::new();
    let mut slowest = 0.0f64;
    for seed in 0..5 {
        let t = Instant::now();
        errors.push(
            run_chains(&w, &w, cost.clone(), &oracle_run_config(K, seed))
                .unwrap()
                .distance()
                .abs(),
        );
        slowest = slowest.max(t.elapsed().as_secs_f64());
    }
    let m = median(&mut errors);
    outcome(
        m <= 0.05 && slowest <= 180.0,
        format!("median |d| = {m:.3e} (tol 0.05), slowest seed {slowest:.1}s"),
    )
}

fn nonzero_case() -> Outcome {
    const K: usize = 500_000;
    let (x, y, cost) = nonzero_instance();
    let truth = bicausal_value_iteration(&x, &y, &cost, 0.9, 1e-10)
        .unwrap()
        .distance;
    let mut errors: Vec<f64> = (0..5)
        .map(|seed| {
            (run_chains(&x, &y, cost.clone(), &oracle_run_config(K, seed))
                .unwrap()
                .distance()
                - truth)
                .abs()
        })
        .collect();
    let m = median(&mut errors);
    outcome(
        m <= 0.05,
        format!("oracle {truth:.6}, median error {m:.3e} (tol 0.05)"),
    )
}

/// Horizon-tuned constant rates: multiples of the theoretical step sizes.
fn scaled_theory_config(k: usize, seed: u64) -> SolverConfig {
    let r = theory_rates(4, 4, 0.9, k);
    SolverConfig {
        gamma: 0.9,
        iterations: k,
        batch_size: 1,
        seed,
        rate_preset: RatePreset::Practical,
        eta0: 30.0 * r.eta,
        decay: 0.0,
        beta0: 0.25 * r.beta,
        snapshot_every: k,
        ..SolverConfig::default()
    }
}

fn rate_scaling() -> Outcome {
    const K: usize = 16_000;
    let (x, y, cost) = nonzero_instance();
    let truth = bicausal_value_iteration(&x, &y, &cost, 0.9, 1e-10)
        .unwrap()
        .distance;
    let median_error = |k: usize| {
        let mut e: Vec<f64> = (0..10)
            .map(|seed| {
                (run_chains(&x, &y, cost.clone(), &scaled_theory_config(k, seed))
                    .unwrap()
                    .distance()
                    - truth)
                    .abs()
            })
            .collect();
        median(&mut e)
    };
    let (e1, e4) = (median_error(K), median_error(4 * K));
    let ratio = e1 / e4;
    outcome(
        (1.5..=3.0).contains(&ratio),
        format!("median error {e1:.3e} at K={K}, {e4:.3e} at 4K, ratio {ratio:.2} (want [1.5, 3])"),
    )
}

/// Running per-entry mean and variance.
struct Moments {
    sum: Vec<f64>,
    sq: Vec<f64>,
    first: Vec<f64>,
    n: f64,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            sum: vec![0.0; len],
            sq: vec![0.0; len],
            first: Vec::new(),
            n: 0.0,
        }
    }

    fn push(&mut self, v: &[f64]) {
        if self.first.is_empty() {
            self.first = v.to_vec();
        }
        for ((s, q), x) in self.sum.iter_mut().zip(&mut self.sq).zip(v) {
            *s += x;
            *q += x * x;
        }
        self.n += 1.0;
    }

    /// Largest `|mean - exact|` in standard errors; entries without variance
    /// are compared through their first draw to `1e-12`. Returns `(worst z,
    /// exact-entry failures)`.
    fn compare(&self, exact: &[f64]) -> (f64, usize) {
        let mut worst = 0.0f64;
        let mut bad = 0;
        for (((s, q), e), f) in self.sum.iter().zip(&self.sq).zip(exact).zip(&self.first) {
            let mean = s / self.n;
            let var = (q / self.n - mean * mean).max(0.0) * self.n / (self.n - 1.0);
            let se = (var / self.n).sqrt();
            if se < 1e-12 {
                if (f - e).abs() > 1e-12 {
                    bad += 1;
                }
            } else {
                worst = worst.max((mean - e).abs() / se);
            }
        }
        (worst, bad)
    }
}

fn unbiasedness() -> Outcome {
    const DRAWS: usize = 100_000;
    let gamma = 0.8;
    let mut r = rng(11);
    let mut details = Vec::new();
    let mut pass = true;
    for (nx, ny) in [(2, 3), (3, 3)] {
        let cx = random_chain(&mut r, nx);
        let cy = random_chain(&mut r, ny);
        let cost = CostMatrix::reward_abs_diff(&cx, &cy).unwrap();
        let d = Dims::new(nx, ny);
        let mut state = SolverState::from_coupling(random_coupling(&mut r, d));
        let rows = |r: &mut _, a: usize, b: usize| {
            (0..a)
                .flat_map(|_| simplex(r, b, false))
                .collect::<Vec<_>>()
        };
        state.lambda_x = ConditionalKernel::from_values(nx, ny, rows(&mut r, nx, ny)).unwrap();
        state.lambda_y = ConditionalKernel::from_values(ny, nx, rows(&mut r, ny, nx)).unwrap();
        let ra = 6.0 / (1.0 - gamma);
        for a in state
            .duals
            .alpha_x
            .iter_mut()
            .chain(state.duals.alpha_y.iter_mut())
        {
            *a = r.random_range(-ra..ra);
        }
        for v in state.duals.v.iter_mut() {
            *v = r.random_range(-2.0..2.0);
        }
        let nu0 = JointInitial::of(&cx, &cy);
        let (nu_x, nu_y) = (
            exact_occupancy(&cx, gamma).unwrap(),
            exact_occupancy(&cy, gamma).unwrap(),
        );

        // Exact gradients from the definitions.
        let mu = |x, y, x2, y2| state.mu.get(x, y, x2, y2);
        let (ax, ay, v) = (&state.duals.alpha_x, &state.duals.alpha_y, &state.duals.v);
        let mut g_lx = vec![0.0; nx * ny];
        let mut g_ly = vec![0.0; ny * nx];
        let mut g_ax = vec![0.0; d.alpha_x_len()];
        let mut g_ay = vec![0.0; d.alpha_y_len()];
        let mut g_v = vec![0.0; d.pair_len()];
        let mut g_mu = vec![0.0; d.coupling_len()];
        for x in 0..nx {
            for y in 0..ny {
                for x2 in 0..nx {
                    g_lx[x * ny + y] += nu_x.get(x, x2) * ax[d.ax(x, x2, y)];
                    g_ax[d.ax(x, x2, y)] = (0..ny).map(|y2| mu(x, y, x2, y2)).sum::<f64>()
                        - nu_x.get(x, x2) * state.lambda_x.get(x, y);
                }
                for y2 in 0..ny {
                    g_ly[y * nx + x] += nu_y.get(y, y2) * ay[d.ay(x, y, y2)];
                    g_ay[d.ay(x, y, y2)] = (0..nx).map(|x2| mu(x, y, x2, y2)).sum::<f64>()
                        - nu_y.get(y, y2) * state.lambda_y.get(y, x);
                }
                let out: f64 = (0..nx)
                    .flat_map(|a| (0..ny).map(move |b| (a, b)))
                    .map(|(a, b)| mu(x, y, a, b))
                    .sum();
                let inflow: f64 = (0..nx)
                    .flat_map(|a| (0..ny).map(move |b| (a, b)))
                    .map(|(a, b)| mu(a, b, x, y))
                    .sum();
                g_v[d.pair(x, y)] = out - (1.0 - gamma) * nu0.mass(x, y) - gamma * inflow;
                for x2 in 0..nx {
                    for y2 in 0..ny {
                        g_mu[d.mu(x, y, x2, y2)] =
                            cost.get(x, y) - ax[d.ax(x, x2, y)] - ay[d.ay(x, y, y2)]
                                + gamma * v[d.pair(x2, y2)]
                                - v[d.pair(x, y)];
                    }
                }
            }
        }

        let mut sx = TransitionSampler::geometric(&cx, 5, 1);
        let mut sy = TransitionSampler::geometric(&cy, 5, 2);
        let mut m = [
            g_lx.len(),
            g_ly.len(),
            g_ax.len(),
            g_ay.len(),
            g_v.len(),
            g_mu.len(),
        ]
        .map(Moments::new);
        for _ in 0..DRAWS {
            let (px, py) = ([sx.sample(gamma)], [sy.sample(gamma)]);
            let p = estimate_primal_gradients(&state, &cost, &px, &py, gamma);
            let q = estimate_dual_gradients(&state, &px, &py, nu0, gamma);
            m[0].push(&p.lambda_x.dense(nx));
            m[1].push(&p.lambda_y.dense(ny));
            m[2].push(&q.alpha_x);
            m[3].push(&q.alpha_y);
            m[4].push(&q.v);
            m[5].push(&p.mu.dense());
        }
        let names = ["lambda_x", "lambda_y", "alpha_x", "alpha_y", "v", "mu"];
        let exact = [&g_lx, &g_ly, &g_ax, &g_ay, &g_v, &g_mu];
        for ((name, mom), e) in names.iter().zip(&m).zip(exact) {
            let (z, bad) = mom.compare(e);
            pass &= z <= 3.0 && bad == 0;
            details.push(format!(
                "{nx}x{ny} {name}: max z {z:.2}, exact mismatches {bad}"
            ));
        }
    }
    outcome(pass, details.join("; "))
}

fn rounding() -> Outcome {
    let mut r = rng(21);
    let mut worst_marginal = 0.0f64;
    let mut l1_slack = f64::INFINITY;
    for trial in 0..1000 {
        let (m, n) = (r.random_range(1..6), r.random_range(1..6));
        let scale = r.random_range(0.0..2.0);
        let f: Vec<f64> = (0..m * n)
            .map(|_| r.random::<f64>() * scale / (m * n) as f64)
            .collect();
        let (p, q) = (
            simplex(&mut r, m, trial % 3 == 0),
            simplex(&mut r, n, trial % 5 == 0),
        );
        for (g, sym) in [
            (round_to_coupling(&f, &p, &q), false),
            (round_symmetric(&f, &p, &q), true),
        ] {
            for i in 0..m {
                worst_marginal =
                    worst_marginal.max((g[i * n..(i + 1) * n].iter().sum::<f64>() - p[i]).abs());
            }
            for j in 0..n {
                worst_marginal =
                    worst_marginal.max(((0..m).map(|i| g[i * n + j]).sum::<f64>() - q[j]).abs());
            }
            if !sym {
                let row_err: f64 = (0..m)
                    .map(|i| (f[i * n..(i + 1) * n].iter().sum::<f64>() - p[i]).abs())
                    .sum();
                let col_err: f64 = (0..n)
                    .map(|j| ((0..m).map(|i| f[i * n + j]).sum::<f64>() - q[j]).abs())
                    .sum();
                let moved: f64 = g.iter().zip(&f).map(|(a, b)| (a - b).abs()).sum();
                l1_slack = l1_slack.min(2.0 * (row_err + col_err) - moved);
            }
        }
    }

    let mut occupancy_slack = f64::INFINITY;
    let mut worst_fixed_point = 0.0f64;
    for _ in 0..200 {
        let gamma = r.random_range(0.3..0.95);
        let (nx, ny) = (r.random_range(1..5), r.random_range(1..5));
        let cx = random_chain(&mut r, nx);
        let cy = random_chain(&mut r, ny);
        let (nu_x, nu_y) = (
            exact_occupancy(&cx, gamma).unwrap(),
            exact_occupancy(&cy, gamma).unwrap(),
        );
        let nu0 = JointInitial::of(&cx, &cy);

        let mu = random_coupling(&mut r, Dims::new(nx, ny));
        let lam = induced_conditionals(&mu, &nu_x, &nu_y);
        let res = residuals(&mu, &lam.lambda_x, &lam.lambda_y, &nu_x, &nu_y, nu0, gamma).unwrap();
        let (_, gap) = round_occupancy(&mu, &cx, &cy, gamma).unwrap();
        let bound = (3.0 * res.causal_x + 3.0 * res.causal_y + res.flow) / (1.0 - gamma) + 1e-6;
        occupancy_slack = occupancy_slack.min(bound - gap);

        let pi = random_transition_coupling(&mut r, &cx, &cy);
        let feasible = induced_occupancy(&pi, nu0, gamma).unwrap();
        let (_, gap) = round_occupancy(&feasible, &cx, &cy, gamma).unwrap();
        worst_fixed_point = worst_fixed_point.max(gap);
    }
    outcome(
        worst_marginal <= 1e-12 && l1_slack >= -1e-12 && occupancy_slack >= 0.0 && worst_fixed_point <= 1e-9,
        format!(
            "marginal error {worst_marginal:.1e} (tol 1e-12), min l1-bound slack {l1_slack:.2e}, \
             min occupancy-bound slack {occupancy_slack:.2e}, fixed-point gap {worst_fixed_point:.1e} (tol 1e-9)"
        ),
    )
}

fn equivalence() -> Outcome {
    let mut r = rng(31);
    let mut worst_valid = 0.0f64;
    let mut infeasible_caught = 0;
    for _ in 0..100 {
        let gamma = r.random_range(0.3..0.95);
        let (nx, ny) = (r.random_range(1..5), r.random_range(1..5));
        let cx = random_chain(&mut r, nx);
        let cy = random_chain(&mut r, ny);
        let (nu_x, nu_y) = (
            exact_occupancy(&cx, gamma).unwrap(),
            exact_occupancy(&cy, gamma).unwrap(),
        );

        let pi = random_transition_coupling(&mut r, &cx, &cy);
        let mu = induced_occupancy(&pi, JointInitial::of(&cx, &cy), gamma).unwrap();
        let lam = induced_conditionals(&mu, &nu_x, &nu_y);
        let rep = check_equivalence(&mu, &lam.lambda_x, &lam.lambda_y, &cx, &cy, gamma).unwrap();
        worst_valid = worst_valid
            .max(rep.sample_system_max)
            .max(rep.kernel_system_max);

        let bad = random_coupling(&mut r, Dims::new(nx.max(2), ny.max(2)));
        let (cx, cy) = (
            if nx < 2 { random_chain(&mut r, 2) } else { cx },
            if ny < 2 { random_chain(&mut r, 2) } else { cy },
        );
        let (nu_x, nu_y) = (
            exact_occupancy(&cx, gamma).unwrap(),
            exact_occupancy(&cy, gamma).unwrap(),
        );
        let lam = induced_conditionals(&bad, &nu_x, &nu_y);
        let rep = check_equivalence(&bad, &lam.lambda_x, &lam.lambda_y, &cx, &cy, gamma).unwrap();
        if !rep.sample_system_holds(1e-8) && !rep.kernel_system_holds(1e-8) {
            infeasible_caught += 1;
        }
    }
    outcome(
        worst_valid <= 1e-8 && infeasible_caught == 100,
        format!("valid couplings: max residual {worst_valid:.1e} (tol 1e-8); random couplings rejected by both: {infeasible_caught}/100"),
    )
}

fn model_selection() -> Outcome {
    let spec = ModelSelectSpec {
        iterations: vec![MODEL_SELECT_K],
        oracle: false,
        ..ModelSelectSpec::default()
    };
    let mut config = SolverConfig::default();
    Preset::ModelSelect.apply(&mut config);
    let rows = model_select(&spec, &config, 1e-8).unwrap();
    let d: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    let argmin = d
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let best = rows[argmin].theta;
    let centre = spec
        .thetas
        .iter()
        .position(|t| (t - 0.5).abs() < 1e-9)
        .unwrap();
    // Inversions: steps moving towards the true model that increase the
    // estimate.
    let left = (0..centre).filter(|&i| d[i + 1] > d[i]).count();
    let right = (centre..d.len() - 1).filter(|&i| d[i] > d[i + 1]).count();
    let formatted: Vec<String> = d.iter().map(|v| format!("{v:.4}")).collect();
    outcome(
        (best - 0.5).abs() < 1e-9 && left + right <= 1,
        format!(
            "K={MODEL_SELECT_K}: argmin theta {best}, inversions {}, estimates [{}]",
            left + right,
            formatted.join(", ")
        ),
    )
}

const MODEL_SELECT_K: usize = 10_000;

fn exact_occupancy_suite() -> Outcome {
    let mut r = rng(41);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(1..8);
        let gamma = r.random_range(0.05..0.99);
        let c = random_chain(&mut r, n);
        worst = worst.max(
            exact_occupancy(&c, gamma)
                .unwrap()
                .defining_residual(&c, gamma),
        );
    }
    let mut worst_tv = 0.0f64;
    for (i, n) in (1..=5).enumerate() {
        let c = random_chain(&mut r, n);
        let gamma = 0.9;
        let nu = exact_occupancy(&c, gamma).unwrap();
        let mut counts = vec![0.0; n * n];
        let mut s = TransitionSampler::geometric(&c, 100 + i as u64, 1);
        const DRAWS: usize = 100_000;
        for _ in 0..DRAWS {
            let p = s.sample(gamma);
            counts[p.from_state * n + p.to_state] += 1.0;
        }
        let tv: f64 = 0.5
            * counts
                .iter()
                .zip(nu.values())
                .map(|(c, v)| (c / DRAWS as f64 - v).abs())
                .sum::<f64>();
        worst_tv = worst_tv.max(tv);
    }
    outcome(
        worst <= 1e-10 && worst_tv <= 0.02,
        format!(
            "max system residual {worst:.1e} (tol 1e-10), max sampler TV {worst_tv:.4} (tol 0.02)"
        ),
    )
}

fn determinism() -> Outcome {
    use bisim_ot::harness::{cmd_solve, ExperimentConfig, Overrides};
    let cfg = ExperimentConfig::from_toml_str(
        r#"
        [chain_x]
        kind = "walk"
        n = 4
        theta = 0.3
        [chain_y]
        kind = "walk"
        n = 4
        theta = 0.7
        [solver]
        iterations = 20000
        snapshot_every = 500
        "#,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let read = |sub: &str| {
        let o = Overrides {
            seed: Some(9),
            out: Some(dir.path().join(sub)),
            ..Overrides::default()
        };
        cmd_solve(&cfg, &o).unwrap();
        std::fs::read(dir.path().join(sub).join("trace.csv")).unwrap()
    };
    let (a, b) = (read("a"), read("b"));
    outcome(
        a == b && !a.is_empty(),
        format!("two runs, {} trace bytes, identical: {}", a.len(), a == b),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence, zero case", zero_case),
        ("oracle equivalence, nonzero case", nonzero_case),
        ("rate scaling K vs 4K", rate_scaling),
        ("gradient unbiasedness", unbiasedness),
        ("rounding and feasibility", rounding),
        ("constraint-system equivalence", equivalence),
        ("model selection", model_selection),
        ("exact occupancy and sampler", exact_occupancy_suite),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {name}: {} [{:.1}s]",
            o.detail,
            t.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
