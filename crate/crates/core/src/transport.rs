//! Exact discrete optimal transport by the transportation simplex method.
//!
//! Starts from a north-west-corner basic solution and pivots on the first
//! cell (in row-major order) with negative reduced cost; the leaving cell is
//! the lowest-indexed blocking cell. Smallest-index choices on both sides
//! keep degenerate pivots from cycling.

/// Optimal transport value and plan between two finite distributions.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    pub value: f64,
    /// Row-major `p.len() x q.len()` plan.
    pub plan: Vec<f64>,
}

const REDUCED_COST_TOL: f64 = 1e-12;

/// Solves `min <P, C>` over couplings `P` of `p` and `q`.
///
/// Rows and columns with zero mass are dropped before pivoting and get zero
/// transport in the returned plan.
pub fn solve_transport(p: &[f64], q: &[f64], cost: &[f64]) -> TransportSolution {
    let (m_full, n_full) = (p.len(), q.len());
    assert_eq!(
        cost.len(),
        m_full * n_full,
        "cost shape does not match marginals"
    );
    let rows: Vec<usize> = (0..m_full).filter(|&i| p[i] > 0.0).collect();
    let cols: Vec<usize> = (0..n_full).filter(|&j| q[j] > 0.0).collect();
    let mut plan = vec![0.0; m_full * n_full];
    if rows.is_empty() || cols.is_empty() {
        return TransportSolution { value: 0.0, plan };
    }

    let supply: Vec<f64> = rows.iter().map(|&i| p[i]).collect();
    let demand: Vec<f64> = cols.iter().map(|&j| q[j]).collect();
    let sub_cost: Vec<f64> = rows
        .iter()
        .flat_map(|&i| cols.iter().map(move |&j| cost[i * n_full + j]))
        .collect();
    let reduced = Simplex::new(supply, demand, sub_cost).solve();

    let n = cols.len();
    let mut value = 0.0;
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            let flow = reduced[a * n + b];
            plan[i * n_full + j] = flow;
            value += flow * cost[i * n_full + j];
        }
    }
    TransportSolution { value, plan }
}

struct Simplex {
    m: usize,
    n: usize,
    cost: Vec<f64>,
    flow: Vec<f64>,
    basic: Vec<bool>,
}

impl Simplex {
    fn new(supply: Vec<f64>, demand: Vec<f64>, cost: Vec<f64>) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let mut flow = vec![0.0; m * n];
        let mut basic = vec![false; m * n];
        let (mut s, mut d) = (supply, demand);
        let (mut i, mut j) = (0, 0);
        loop {
            let amount = s[i].min(d[j]);
            flow[i * n + j] = amount;
            basic[i * n + j] = true;
            s[i] -= amount;
            d[j] -= amount;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && s[i] <= d[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Float leftovers from unequal totals land on the last cell.
        let last = m * n - 1;
        flow[last] = (flow[last] + s[m - 1].max(d[n - 1])).max(0.0);
        Self {
            m,
            n,
            cost,
            flow,
            basic,
        }
    }

    fn solve(mut self) -> Vec<f64> {
        // Each pivot strictly improves or is degenerate; Bland's rule bounds
        // the number of degenerate pivots, this cap only guards float noise.
        let max_pivots = 50 * (self.m + self.n) * (self.m * self.n).max(1);
        for _ in 0..max_pivots {
            let (u, v) = self.potentials();
            let entering = (0..self.m * self.n).find(|&cell| {
                !self.basic[cell]
                    && self.cost[cell] - u[cell / self.n] - v[cell % self.n] < -REDUCED_COST_TOL
            });
            let Some(cell) = entering else {
                break;
            };
            self.pivot(cell);
        }
        self.flow
    }

    /// Row and column potentials with `u_i + v_j = c_ij` on basic cells.
    fn potentials(&self) -> (Vec<f64>, Vec<f64>) {
        let (m, n) = (self.m, self.n);
        let mut u = vec![f64::NAN; m];
        let mut v = vec![f64::NAN; n];
        u[0] = 0.0;
        let mut stack = vec![(true, 0usize)];
        while let Some((is_row, k)) = stack.pop() {
            if is_row {
                for j in 0..n {
                    if self.basic[k * n + j] && v[j].is_nan() {
                        v[j] = self.cost[k * n + j] - u[k];
                        stack.push((false, j));
                    }
                }
            } else {
                for i in 0..m {
                    if self.basic[i * n + k] && u[i].is_nan() {
                        u[i] = self.cost[i * n + k] - v[k];
                        stack.push((true, i));
                    }
                }
            }
        }
        (u, v)
    }

    /// Path of basic cells from row `start_row` to column `end_col` in the
    /// basis tree.
    fn tree_path(&self, start_row: usize, end_col: usize) -> Vec<usize> {
        let (m, n) = (self.m, self.n);
        // Nodes: rows 0..m, columns m..m+n.
        let mut parent = vec![usize::MAX; m + n];
        let mut via = vec![usize::MAX; m + n];
        parent[start_row] = start_row;
        let mut stack = vec![start_row];
        while let Some(node) = stack.pop() {
            if node == m + end_col {
                break;
            }
            if node < m {
                for j in 0..n {
                    let cell = node * n + j;
                    if self.basic[cell] && parent[m + j] == usize::MAX {
                        parent[m + j] = node;
                        via[m + j] = cell;
                        stack.push(m + j);
                    }
                }
            } else {
                let j = node - m;
                for i in 0..m {
                    let cell = i * n + j;
                    if self.basic[cell] && parent[i] == usize::MAX {
                        parent[i] = node;
                        via[i] = cell;
                        stack.push(i);
                    }
                }
            }
        }
        let mut path = Vec::new();
        let mut node = m + end_col;
        while node != start_row {
            path.push(via[node]);
            node = parent[node];
        }
        path.reverse();
        path
    }

    fn pivot(&mut self, entering: usize) {
        let (i, j) = (entering / self.n, entering % self.n);
        // Cycle: entering cell (+), then the tree path from row i to column j
        // alternating (-), (+), ...
        let path = self.tree_path(i, j);
        let mut theta = f64::INFINITY;
        let mut leaving = usize::MAX;
        for (k, &cell) in path.iter().enumerate() {
            if k % 2 == 0 {
                let f = self.flow[cell];
                if f < theta || (f == theta && cell < leaving) {
                    theta = f;
                    leaving = cell;
                }
            }
        }
        self.flow[entering] = theta;
        for (k, &cell) in path.iter().enumerate() {
            if k % 2 == 0 {
                self.flow[cell] -= theta;
            } else {
                self.flow[cell] += theta;
            }
        }
        self.flow[leaving] = 0.0;
        self.basic[leaving] = false;
        self.basic[entering] = true;
    }
}
