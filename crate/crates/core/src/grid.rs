//! Space-time lattice on a slab of the cylinder.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_t: usize,
    pub n_x: usize,
    pub t0: f64,
    pub dt: f64,
    pub length: f64,
}

impl Grid {
    pub fn new(n_t: usize, n_x: usize, t0: f64, dt: f64, length: f64) -> Result<Grid> {
        if n_x < 8 {
            return Err(Error::InvalidGrid(format!("n_x = {n_x} < 8")));
        }
        if n_t < 2 {
            return Err(Error::InvalidGrid(format!("n_t = {n_t} < 2")));
        }
        if !(dt > 0.0 && dt.is_finite()) || !(length > 0.0 && length.is_finite()) || !t0.is_finite() {
            return Err(Error::InvalidGrid("dt and L must be positive and finite".into()));
        }
        Ok(Grid { n_t, n_x, t0, dt, length })
    }

    /// `dt = courant * dx`.
    pub fn with_courant(n_t: usize, n_x: usize, t0: f64, length: f64, courant: f64) -> Result<Grid> {
        Grid::new(n_t, n_x, t0, courant * length / n_x as f64, length)
    }

    /// Desk-scale default: L = 2π, 256 x 512, dt = dx/2.
    pub fn base() -> Grid {
        Grid::with_courant(512, 256, 0.0, std::f64::consts::TAU, 0.5).unwrap()
    }

    /// Halve both steps (`factor` times), keeping t0 and L.
    pub fn refined(&self, factor: u32) -> Grid {
        let s = 1usize << factor;
        Grid { n_t: self.n_t * s, n_x: self.n_x * s, t0: self.t0, dt: self.dt / s as f64, length: self.length }
    }

    /// One dyadic level coarser.
    pub fn coarsened(&self) -> Result<Grid> {
        Grid::new(self.n_t / 2, self.n_x / 2, self.t0, self.dt * 2.0, self.length)
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_x as f64
    }
    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }
    pub fn t_end(&self) -> f64 {
        self.t(self.n_t - 1)
    }
    pub fn len(&self) -> usize {
        self.n_t * self.n_x
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    #[inline]
    pub fn idx(&self, j: usize, i: usize) -> usize {
        j * self.n_x + i
    }
    #[inline]
    pub fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.n_x as isize) as usize
    }

    /// Level index of a time lying on the lattice.
    pub fn level_of(&self, t: f64) -> Result<usize> {
        let r = (t - self.t0) / self.dt;
        let j = r.round();
        if (r - j).abs() > 1e-6 || j < 0.0 || j as usize >= self.n_t {
            return Err(Error::OutOfDomain(format!("t = {t} is not a level of the slab [{}, {}]", self.t0, self.t_end())));
        }
        Ok(j as usize)
    }

    /// First level at or after t (clamped).
    pub fn level_ceil(&self, t: f64) -> usize {
        let r = ((t - self.t0) / self.dt - 1e-9).ceil().max(0.0) as usize;
        r.min(self.n_t - 1)
    }
    /// Last level at or before t (clamped).
    pub fn level_floor(&self, t: f64) -> usize {
        let r = ((t - self.t0) / self.dt + 1e-9).floor().max(0.0) as usize;
        r.min(self.n_t - 1)
    }

    /// Same lattice spacing and circle.
    pub fn same_lattice(&self, other: &Grid) -> bool {
        self.n_x == other.n_x
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.length - other.length).abs() <= 1e-12 * self.length
    }

    /// Signed periodic difference x - y in (-L/2, L/2].
    pub fn periodic_delta(&self, x: f64, y: f64) -> f64 {
        periodic_delta(x, y, self.length)
    }
}

pub fn periodic_delta(x: f64, y: f64, length: f64) -> f64 {
    let mut d = (x - y).rem_euclid(length);
    if d > 0.5 * length {
        d -= length;
    }
    d
}

/// Real field sampled on every node, time-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: Grid) -> GridField {
        GridField { grid, data: vec![0.0; grid.len()] }
    }
    pub fn constant(grid: Grid, c: f64) -> GridField {
        GridField { grid, data: vec![c; grid.len()] }
    }
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> GridField {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.n_t {
            let t = grid.t(j);
            for i in 0..grid.n_x {
                data.push(f(t, grid.x(i)));
            }
        }
        GridField { grid, data }
    }
    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<GridField> {
        if data.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("field has {} values, grid needs {}", data.len(), grid.len())));
        }
        Ok(GridField { grid, data })
    }
    #[inline]
    pub fn at(&self, j: usize, i: usize) -> f64 {
        self.data[j * self.grid.n_x + i]
    }
    #[inline]
    pub fn set(&mut self, j: usize, i: usize, v: f64) {
        let n = self.grid.n_x;
        self.data[j * n + i] = v;
    }
    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.grid.n_x;
        &self.data[j * n..(j + 1) * n]
    }
    pub fn row_mut(&mut self, j: usize) -> &mut [f64] {
        let n = self.grid.n_x;
        &mut self.data[j * n..(j + 1) * n]
    }
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField { grid: self.grid, data: self.data.iter().map(|&v| f(v)).collect() }
    }
    pub fn zip(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> GridField {
        debug_assert_eq!(self.data.len(), other.data.len());
        GridField { grid: self.grid, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }
    pub fn add(&self, other: &GridField) -> GridField {
        self.zip(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &GridField) -> GridField {
        self.zip(other, |a, b| a - b)
    }
    pub fn scale(&self, c: f64) -> GridField {
        self.map(|v| c * v)
    }
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| if v.is_nan() { m } else { m.max(v.abs()) })
    }
    /// Max over levels `lo..=hi`.
    pub fn max_abs_levels(&self, lo: usize, hi: usize) -> f64 {
        let n = self.grid.n_x;
        self.data[lo * n..(hi + 1) * n].iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    /// Discrete L2 norm with weight dt dx.
    pub fn l2(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.dt * self.grid.dx()).sqrt()
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }
}
