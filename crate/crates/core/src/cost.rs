use std::fs;
use std::path::Path;

use crate::chain::MarkovChain;
use crate::error::{Error, Result};

/// Ground cost `c(x, y)` between the states of two chains.
///
/// Values are stored rescaled so that the largest entry is at most 1; `scale`
/// converts back to the original units.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    scale: f64,
}

impl CostMatrix {
    /// Builds a cost from a row-major `nx x ny` matrix in original units.
    pub fn new(nx: usize, ny: usize, raw: Vec<f64>) -> Result<Self> {
        if raw.len() != nx * ny {
            return Err(Error::Shape(format!(
                "cost has {} entries, expected {nx} x {ny}",
                raw.len()
            )));
        }
        if let Some(bad) = raw.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::Config(format!(
                "cost entry {bad} is not a finite nonnegative number"
            )));
        }
        let max = raw.iter().copied().fold(0.0, f64::max);
        let scale = if max > 1.0 { max } else { 1.0 };
        let values = if scale == 1.0 {
            raw
        } else {
            raw.into_iter().map(|c| c / scale).collect()
        };
        Ok(Self {
            nx,
            ny,
            values,
            scale,
        })
    }

    pub fn from_fn(nx: usize, ny: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let raw = (0..nx)
            .flat_map(|x| (0..ny).map(move |y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(nx, ny, raw)
    }

    /// `c(x, y) = |r(x) - r(y)|` from the chains' rewards.
    pub fn reward_abs_diff(chain_x: &MarkovChain, chain_y: &MarkovChain) -> Result<Self> {
        let (Some(rx), Some(ry)) = (chain_x.rewards(), chain_y.rewards()) else {
            return Err(Error::Config(
                "reward-abs-diff cost needs rewards on both chains".into(),
            ));
        };
        Self::from_fn(rx.len(), ry.len(), |x, y| (rx[x] - ry[y]).abs())
    }

    /// `c(x, y) = 1` when the state labels differ, `0` otherwise.
    pub fn indicator(chain_x: &MarkovChain, chain_y: &MarkovChain) -> Result<Self> {
        let kx: Vec<String> = (0..chain_x.num_states())
            .map(|s| chain_x.state_key(s))
            .collect();
        let ky: Vec<String> = (0..chain_y.num_states())
            .map(|s| chain_y.state_key(s))
            .collect();
        Self::from_fn(
            kx.len(),
            ky.len(),
            |x, y| if kx[x] == ky[y] { 0.0 } else { 1.0 },
        )
    }

    /// Reads a comma-separated matrix, one row per line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| Error::Parse {
                        path: path.to_path_buf(),
                        line: i + 1,
                        msg: format!("`{}` is not a number", f.trim()),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        if nx == 0 || rows.iter().any(|r| r.len() != ny) {
            return Err(Error::Format {
                path: path.to_path_buf(),
                msg: "cost matrix must be a nonempty rectangular table".into(),
            });
        }
        Self::new(nx, ny, rows.into_iter().flatten().collect())
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Rescaled cost, at most 1.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.ny + y]
    }

    /// Cost in original units.
    pub fn raw(&self, x: usize, y: usize) -> f64 {
        self.get(x, y) * self.scale
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Cost with the roles of the two chains swapped.
    pub fn transposed(&self) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for x in 0..self.nx {
            for y in 0..self.ny {
                values[y * self.nx + x] = self.get(x, y);
            }
        }
        Self {
            nx: self.ny,
            ny: self.nx,
            values,
            scale: self.scale,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{make_block_lift, make_random_walk};

    #[test]
    fn rescales_large_costs() {
        let c = CostMatrix::new(1, 2, vec![0.5, 4.0]).unwrap();
        assert_eq!(c.scale(), 4.0);
        assert_eq!(c.get(0, 1), 1.0);
        assert_eq!(c.raw(0, 0), 0.5);
        let small = CostMatrix::new(1, 1, vec![0.8]).unwrap();
        assert_eq!(small.scale(), 1.0);
        assert!(CostMatrix::new(1, 1, vec![-0.1]).is_err());
        assert!(CostMatrix::new(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn reward_and_indicator_costs() {
        let walk = make_random_walk(3, 0.5).unwrap();
        let c = CostMatrix::reward_abs_diff(&walk, &walk).unwrap();
        assert_eq!(c.scale(), 2.0);
        assert_eq!(c.raw(0, 2), 2.0);
        assert_eq!(c.raw(1, 1), 0.0);

        let lifted = make_block_lift(&walk, 2).unwrap();
        let ind = CostMatrix::indicator(&walk, &lifted).unwrap();
        assert_eq!((ind.nx(), ind.ny()), (3, 6));
        assert_eq!(ind.get(1, 2), 0.0);
        assert_eq!(ind.get(1, 3), 0.0);
        assert_eq!(ind.get(1, 4), 1.0);
    }
}
