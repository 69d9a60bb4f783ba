use crate::bump::Bump;
use crate::error::{Error, Result};
use crate::geometry::region::Region;
use crate::grid::{Grid, GridField};
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

/// Compactly supported source on the slab; zero within 2 levels of either temporal end.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    values: GridField,
    hash: u64,
}

fn content_hash(f: &GridField) -> u64 {
    let mut h = DefaultHasher::new();
    let g = f.grid;
    (g.n_t, g.n_x, g.t0.to_bits(), g.dt.to_bits(), g.length.to_bits()).hash(&mut h);
    for v in &f.data {
        // +0 and -0 hash alike
        (if *v == 0.0 { 0u64 } else { v.to_bits() }).hash(&mut h);
    }
    h.finish()
}

impl TestFunction {
    pub fn new(values: GridField) -> Result<TestFunction> {
        let g = values.grid;
        if values.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("test function has non-finite values".into()));
        }
        if g.n_t < 5 {
            return Err(Error::OutOfDomain("slab too short to hold a test function".into()));
        }
        for j in [0, 1, g.n_t - 2, g.n_t - 1] {
            if values.row(j).iter().any(|&v| v != 0.0) {
                return Err(Error::OutOfDomain(format!("test function nonzero on boundary level {j}")));
            }
        }
        let hash = content_hash(&values);
        Ok(TestFunction { values, hash })
    }

    pub fn zero(grid: Grid) -> TestFunction {
        let values = GridField::zeros(grid);
        let hash = content_hash(&values);
        TestFunction { values, hash }
    }

    /// amp * bump sampled on the grid.
    pub fn bump(grid: Grid, bump: Bump, amp: f64) -> Result<TestFunction> {
        TestFunction::new(GridField::from_fn(grid, |t, x| amp * bump.value(t, x, grid.length)))
    }

    pub fn grid(&self) -> Grid {
        self.values.grid
    }
    pub fn values(&self) -> &GridField {
        &self.values
    }
    pub fn content_hash(&self) -> u64 {
        self.hash
    }
    pub fn is_zero(&self) -> bool {
        self.values.is_zero()
    }

    /// First and last level with a nonzero value.
    pub fn level_range(&self) -> Option<(usize, usize)> {
        let g = self.grid();
        let rows: Vec<usize> = (0..g.n_t).filter(|&j| self.values.row(j).iter().any(|&v| v != 0.0)).collect();
        Some((*rows.first()?, *rows.last()?))
    }

    /// Smallest coordinate box (minimal arc in x) containing the support.
    pub fn support_region(&self) -> Option<Region> {
        let g = self.grid();
        let (lo, hi) = self.level_range()?;
        let n = g.n_x;
        let cols: Vec<bool> = (0..n).map(|i| (lo..=hi).any(|j| self.values.at(j, i) != 0.0)).collect();
        // largest run of empty columns (cyclic) is the complement of the arc
        let mut best = (0usize, 0usize); // (length, start)
        for s in 0..n {
            // a run of empty columns starts where the previous column is occupied
            if cols[s] || !cols[(s + n - 1) % n] {
                continue;
            }
            let mut len = 0;
            while len < n && !cols[(s + len) % n] {
                len += 1;
            }
            if len > best.0 {
                best = (len, s);
            }
        }
        let dx = g.dx();
        let (t_a, t_b) = (g.t(lo), g.t(hi));
        if best.0 == 0 {
            return Some(Region::Rect { t_a, t_b, xc: 0.0, half_width: 0.5 * g.length });
        }
        let first = (best.1 + best.0) % n; // first occupied column
        let count = n - best.0;
        let half_width = 0.5 * (count - 1) as f64 * dx;
        let xc = (first as f64 * dx + half_width).rem_euclid(g.length);
        Some(Region::Rect { t_a, t_b, xc, half_width })
    }

    pub fn add(&self, other: &TestFunction) -> Result<TestFunction> {
        if self.grid() != other.grid() {
            return Err(Error::SpaceMismatch("test functions on different grids".into()));
        }
        TestFunction::new(self.values.add(&other.values))
    }
    pub fn scale(&self, c: f64) -> TestFunction {
        TestFunction::new(self.values.scale(c)).expect("scaling keeps the support")
    }

    /// sum f h w dt dx over the slab.
    pub fn weighted_dot(&self, h: &GridField, w: &[f64]) -> f64 {
        let g = self.grid();
        let mut s = 0.0;
        for (k, &v) in self.values.data.iter().enumerate() {
            if v != 0.0 {
                s += v * h.data[k] * w[k];
            }
        }
        s * g.dt * g.dx()
    }
}
