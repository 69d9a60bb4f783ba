use super::curvature::scalar_curvature;
use super::metric::{inverse, Metric};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Leapfrog rejection threshold on dt c_max / dx.
pub const STABILITY_LIMIT: f64 = 0.9;

/// Field parameters shared by every spacetime of a session.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theory {
    pub mass: f64,
    pub xi: f64,
}

impl Default for Theory {
    fn default() -> Self {
        Theory { mass: 1.0, xi: 0.0 }
    }
}

impl Theory {
    pub fn new(mass: f64, xi: f64) -> Result<Theory> {
        if !(mass >= 0.0) || !(xi >= 0.0) {
            return Err(Error::Precondition(format!("need m >= 0 and xi >= 0, got m = {mass}, xi = {xi}")));
        }
        Ok(Theory { mass, xi })
    }
}

/// Densitized operator coefficients: A^{mn} = sqrt(-g) g^{mn}, pot = sqrt(-g)(m^2 + xi R).
#[derive(Clone, Debug, PartialEq)]
pub struct Coeffs {
    pub sg: Vec<f64>,
    pub att: Vec<f64>,
    pub atx: Vec<f64>,
    pub axx: Vec<f64>,
    pub pot: Vec<f64>,
    /// false when A^tx vanishes identically.
    pub cross: bool,
}

impl Coeffs {
    pub fn from_metric(metric: &Metric, theory: &Theory, curvature: &GridField) -> Coeffs {
        let n = metric.grid().len();
        let mut c = Coeffs {
            sg: vec![0.0; n],
            att: vec![0.0; n],
            atx: vec![0.0; n],
            axx: vec![0.0; n],
            pot: vec![0.0; n],
            cross: false,
        };
        let m2 = theory.mass * theory.mass;
        for k in 0..n {
            let g = [metric.g_tt.data[k], metric.g_tx.data[k], metric.g_xx.data[k]];
            let sg = (-(g[0] * g[2] - g[1] * g[1])).sqrt();
            let gi = inverse(g);
            c.sg[k] = sg;
            c.att[k] = sg * gi[0];
            c.atx[k] = sg * gi[1];
            c.axx[k] = sg * gi[2];
            c.pot[k] = sg * (m2 + theory.xi * curvature.data[k]);
        }
        c.cross = c.atx.iter().any(|&v| v != 0.0);
        c
    }

    pub fn levels(&self, lo: usize, hi: usize, n_x: usize) -> Coeffs {
        let r = lo * n_x..(hi + 1) * n_x;
        let atx = self.atx[r.clone()].to_vec();
        let cross = atx.iter().any(|&v| v != 0.0);
        Coeffs {
            sg: self.sg[r.clone()].to_vec(),
            att: self.att[r.clone()].to_vec(),
            atx,
            axx: self.axx[r.clone()].to_vec(),
            pot: self.pot[r].to_vec(),
            cross,
        }
    }
}

/// A globally hyperbolic slab (M, g) with the session's field parameters.
#[derive(Debug)]
pub struct Spacetime {
    pub theory: Theory,
    pub grid: Grid,
    pub metric: Metric,
    pub curvature: GridField,
    pub coeffs: Coeffs,
}

impl Spacetime {
    pub fn new(theory: Theory, metric: Metric) -> Result<Arc<Spacetime>> {
        metric.validate()?;
        let curvature = if metric.is_flat() { GridField::zeros(metric.grid()) } else { scalar_curvature(&metric)? };
        Self::assemble(theory, metric, curvature)
    }

    fn assemble(theory: Theory, metric: Metric, curvature: GridField) -> Result<Arc<Spacetime>> {
        let grid = metric.grid();
        let c = metric.max_speed();
        if grid.dt * c > STABILITY_LIMIT * grid.dx() {
            return Err(Error::Stability(format!(
                "dt c_max / dx = {:.4} exceeds {STABILITY_LIMIT}",
                grid.dt * c / grid.dx()
            )));
        }
        let coeffs = Coeffs::from_metric(&metric, &theory, &curvature);
        Ok(Arc::new(Spacetime { theory, grid, metric, curvature, coeffs }))
    }

    pub fn flat(theory: Theory, grid: Grid) -> Result<Arc<Spacetime>> {
        Spacetime::new(theory, Metric::flat(grid))
    }

    pub fn is_flat(&self) -> bool {
        self.metric.is_flat()
    }

    /// Levels lo..=hi as a spacetime of their own. Coefficients (including R) are copied,
    /// so the local operator coincides with the global one on shared interior rows.
    pub fn sub_slab(&self, lo: usize, hi: usize) -> Result<Arc<Spacetime>> {
        if hi <= lo || hi >= self.grid.n_t {
            return Err(Error::OutOfDomain(format!("levels {lo}..={hi} outside 0..{}", self.grid.n_t)));
        }
        let grid = Grid::new(hi - lo + 1, self.grid.n_x, self.grid.t(lo), self.grid.dt, self.grid.length)?;
        let metric = self.metric.levels(lo, hi, grid);
        let n = self.grid.n_x;
        let curvature = GridField { grid, data: self.curvature.data[lo * n..(hi + 1) * n].to_vec() };
        let coeffs = self.coeffs.levels(lo, hi, n);
        Ok(Arc::new(Spacetime { theory: self.theory, grid, metric, curvature, coeffs }))
    }

    /// Same grid, same theory, metric replaced.
    pub fn with_metric(&self, metric: Metric) -> Result<Arc<Spacetime>> {
        if metric.grid() != self.grid {
            return Err(Error::SpaceMismatch("metric grid differs from spacetime grid".into()));
        }
        Spacetime::new(self.theory, metric)
    }

    pub fn same_theory(&self, other: &Spacetime) -> Result<()> {
        if self.theory != other.theory {
            return Err(Error::SpaceMismatch(format!("theories differ: {:?} vs {:?}", self.theory, other.theory)));
        }
        Ok(())
    }
}
