use crate::bump::{Bump, VectorBump};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Background,
    Perturbed,
    PulledBack,
}

/// Lorentzian metric (+,-) on the slab: components g_tt, g_tx, g_xx per node.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    pub g_tt: GridField,
    pub g_tx: GridField,
    pub g_xx: GridField,
    pub provenance: Provenance,
}

/// Inverse metric (g^tt, g^tx, g^xx) of one node.
#[inline]
pub fn inverse(g: [f64; 3]) -> [f64; 3] {
    let det = g[0] * g[2] - g[1] * g[1];
    [g[2] / det, -g[1] / det, g[0] / det]
}

/// Null slopes dx/dt of one node (left, right).
#[inline]
pub fn null_speeds(g: [f64; 3]) -> (f64, f64) {
    let disc = (g[1] * g[1] - g[0] * g[2]).sqrt();
    let a = (-g[1] + disc) / g[2];
    let b = (-g[1] - disc) / g[2];
    (a.min(b), a.max(b))
}

impl Metric {
    pub fn new(g_tt: GridField, g_tx: GridField, g_xx: GridField, provenance: Provenance) -> Result<Metric> {
        if g_tt.grid != g_tx.grid || g_tt.grid != g_xx.grid {
            return Err(Error::InvalidMetric("component grids differ".into()));
        }
        let m = Metric { g_tt, g_tx, g_xx, provenance };
        m.validate()?;
        Ok(m)
    }

    pub fn flat(grid: Grid) -> Metric {
        Metric {
            g_tt: GridField::constant(grid, 1.0),
            g_tx: GridField::zeros(grid),
            g_xx: GridField::constant(grid, -1.0),
            provenance: Provenance::Background,
        }
    }

    pub fn from_fn(grid: Grid, provenance: Provenance, f: impl Fn(f64, f64) -> [f64; 3]) -> Result<Metric> {
        let mut tt = GridField::zeros(grid);
        let mut tx = GridField::zeros(grid);
        let mut xx = GridField::zeros(grid);
        for j in 0..grid.n_t {
            for i in 0..grid.n_x {
                let g = f(grid.t(j), grid.x(i));
                tt.set(j, i, g[0]);
                tx.set(j, i, g[1]);
                xx.set(j, i, g[2]);
            }
        }
        Metric::new(tt, tx, xx, provenance)
    }

    pub fn grid(&self) -> Grid {
        self.g_tt.grid
    }

    #[inline]
    pub fn at(&self, j: usize, i: usize) -> [f64; 3] {
        [self.g_tt.at(j, i), self.g_tx.at(j, i), self.g_xx.at(j, i)]
    }

    /// Signature and g^tt > 0 at every node.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid();
        for j in 0..grid.n_t {
            for i in 0..grid.n_x {
                let g = self.at(j, i);
                let det = g[0] * g[2] - g[1] * g[1];
                if !(det < 0.0) || !det.is_finite() {
                    return Err(Error::InvalidMetric(format!("det g = {det} at node ({j},{i})")));
                }
                if !(inverse(g)[0] > 0.0) {
                    return Err(Error::InvalidMetric(format!("g^tt <= 0 at node ({j},{i})")));
                }
            }
        }
        Ok(())
    }

    pub fn is_flat(&self) -> bool {
        self.g_tt.data.iter().all(|&v| v == 1.0)
            && self.g_tx.data.iter().all(|&v| v == 0.0)
            && self.g_xx.data.iter().all(|&v| v == -1.0)
    }

    /// Largest |null slope| over the slab.
    pub fn max_speed(&self) -> f64 {
        self.max_speed_levels(0, self.grid().n_t - 1)
    }

    pub fn max_speed_levels(&self, lo: usize, hi: usize) -> f64 {
        let n = self.grid().n_x;
        let mut c: f64 = 0.0;
        for j in lo..=hi {
            for i in 0..n {
                let (a, b) = null_speeds(self.at(j, i));
                c = c.max(a.abs()).max(b.abs());
            }
        }
        c
    }

    /// Levels lo..=hi as a metric on the sub-slab.
    pub fn levels(&self, lo: usize, hi: usize, grid: Grid) -> Metric {
        let n = self.grid().n_x;
        let cut = |f: &GridField| GridField { grid, data: f.data[lo * n..(hi + 1) * n].to_vec() };
        Metric { g_tt: cut(&self.g_tt), g_tx: cut(&self.g_tx), g_xx: cut(&self.g_xx), provenance: self.provenance }
    }

    /// Max componentwise difference.
    pub fn max_diff(&self, other: &Metric) -> f64 {
        self.g_tt
            .sub(&other.g_tt)
            .max_abs()
            .max(self.g_tx.sub(&other.g_tx).max_abs())
            .max(self.g_xx.sub(&other.g_xx).max_abs())
    }

    pub fn with_provenance(mut self, p: Provenance) -> Metric {
        self.provenance = p;
        self
    }
}

/// sqrt(-det g) per node.
pub fn volume_element(metric: &Metric) -> GridField {
    let g = metric.grid();
    let mut out = GridField::zeros(g);
    for k in 0..g.len() {
        let det = metric.g_tt.data[k] * metric.g_xx.data[k] - metric.g_tx.data[k] * metric.g_tx.data[k];
        out.data[k] = (-det).sqrt();
    }
    out
}

/// Named analytic metric families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum MetricFamily {
    Flat,
    /// e^{2w} diag(1,-1), w = eps * bump.
    ConformalBump { eps: f64, bump: Bump },
    /// diag(1,-1) + amp * bump * (c_tt, c_tx, c_xx).
    TensorBump { amp: f64, comps: [f64; 3], bump: Bump },
    /// diag(1,-1) + amp * Lie_X diag(1,-1).
    LieOfX { amp: f64, field: VectorBump },
}

impl MetricFamily {
    pub fn eval(&self, t: f64, x: f64, length: f64) -> [f64; 3] {
        match self {
            MetricFamily::Flat => [1.0, 0.0, -1.0],
            MetricFamily::ConformalBump { eps, bump } => {
                let e = (2.0 * eps * bump.value(t, x, length)).exp();
                [e, 0.0, -e]
            }
            MetricFamily::TensorBump { amp, comps, bump } => {
                let b = amp * bump.value(t, x, length);
                [1.0 + b * comps[0], b * comps[1], -1.0 + b * comps[2]]
            }
            MetricFamily::LieOfX { amp, field } => {
                let h = lie_flat(field, t, x, length);
                [1.0 + amp * h[0], amp * h[1], -1.0 + amp * h[2]]
            }
        }
    }

    pub fn metric(&self, grid: Grid) -> Result<Metric> {
        let prov = if matches!(self, MetricFamily::Flat) { Provenance::Background } else { Provenance::Perturbed };
        if matches!(self, MetricFamily::Flat) {
            return Ok(Metric::flat(grid));
        }
        Metric::from_fn(grid, prov, |t, x| self.eval(t, x, grid.length))
    }

    /// Support in time of g - diag(1,-1).
    pub fn t_support(&self) -> Option<(f64, f64)> {
        match self {
            MetricFamily::Flat => None,
            MetricFamily::ConformalBump { bump, .. } | MetricFamily::TensorBump { bump, .. } => Some(bump.t_range()),
            MetricFamily::LieOfX { field, .. } => Some(field.bump.t_range()),
        }
    }
}

/// Lie derivative of diag(1,-1) along an analytic vector bump.
pub fn lie_flat(field: &VectorBump, t: f64, x: f64, length: f64) -> [f64; 3] {
    let (_, d) = field.eval(t, x, length);
    // d[a][b] = d_b X^a
    [2.0 * d[0][0], d[0][1] - d[1][0], -2.0 * d[1][1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_is_valid_with_unit_speed() {
        let m = Metric::flat(Grid::base());
        m.validate().unwrap();
        assert_eq!(m.max_speed(), 1.0);
        assert!(volume_element(&m).data.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn euclidean_patch_rejected() {
        let g = Grid::new(4, 8, 0.0, 0.1, 1.0).unwrap();
        let r = Metric::from_fn(g, Provenance::Perturbed, |t, _| if t > 0.15 { [1.0, 0.0, 1.0] } else { [1.0, 0.0, -1.0] });
        assert!(matches!(r, Err(Error::InvalidMetric(_))));
    }

    #[test]
    fn null_speeds_of_tilted_metric() {
        // ds^2 = dt^2 - (dx - v dt)^2
        let v: f64 = 0.3;
        let g = [1.0 - v * v, v, -1.0];
        let (a, b) = null_speeds(g);
        assert!((a - (v - 1.0)).abs() < 1e-14 && (b - (v + 1.0)).abs() < 1e-14);
    }
}
