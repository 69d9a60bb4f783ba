use crate::error::{Error, Result};
use crate::geometry::region::Region;
use crate::grid::{Grid, GridField};
use crate::solver::{apply_kg, SolutionField, TestFunction};
use crate::geometry::spacetime::Spacetime;

/// Fewest strip levels that still hold a cutoff transition.
pub const MIN_STRIP_LEVELS: usize = 8;
/// Below this the strip cannot be resolved at all.
pub const RESOLUTION_LEVELS: usize = 6;
/// Levels kept between the transition and each strip edge.
pub const EDGE_MARGIN: usize = 3;

/// Smoothstep S_p: S_p(0) = 0, S_p(1) = 1, first p derivatives vanish at both ends.
pub fn smoothstep(u: f64, order: usize) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let p = order as i64;
    let mut s = 0.0;
    for k in 0..=p {
        s += binom(p + k, k) * binom(2 * p + 1, p - k) * (-u).powi(k as i32);
    }
    s * u.powi(order as i32 + 1)
}

fn binom(n: i64, k: i64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Partition of unity chi_ret + chi_adv = 1 across a strip, constant in x.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffPair {
    pub grid: Grid,
    pub strip: (f64, f64),
    /// chi_ret = 1 up to here
    pub sigma_ret: f64,
    /// chi_ret = 0 from here on
    pub sigma_adv: f64,
    pub order: usize,
    /// per level
    pub chi_ret: Vec<f64>,
    pub chi_adv: Vec<f64>,
    /// first and last strip level
    pub levels: (usize, usize),
}

/// Cutoffs for `strip` on `grid`; transition between Sigma_ret and Sigma_adv, both 3 levels
/// inside the strip.
pub fn cutoffs(strip: &Region, grid: Grid, order: usize) -> Result<CutoffPair> {
    let (t_a, t_b) = match strip {
        Region::Strip { t_a, t_b } => (*t_a, *t_b),
        _ => return Err(Error::Precondition("cutoffs need a strip".into())),
    };
    strip.validate(&grid)?;
    let la = grid.level_ceil(t_a);
    let lb = grid.level_floor(t_b).min(grid.n_t - 1);
    let count = if lb >= la { lb - la + 1 } else { 0 };
    if count < RESOLUTION_LEVELS {
        return Err(Error::Resolution(format!("strip holds {count} levels, fewer than {RESOLUTION_LEVELS}")));
    }
    if count < MIN_STRIP_LEVELS {
        return Err(Error::Resolution(format!(
            "strip holds {count} levels; a smooth cutoff needs {MIN_STRIP_LEVELS}"
        )));
    }
    if la < 2 || lb + 2 >= grid.n_t {
        return Err(Error::OutOfDomain("strip must keep two levels from the slab ends".into()));
    }
    let (jr, ja) = (la + EDGE_MARGIN, lb - EDGE_MARGIN);
    let (sr, sa) = (grid.t(jr), grid.t(ja));
    let chi_ret: Vec<f64> = (0..grid.n_t)
        .map(|j| if j <= jr { 1.0 } else if j >= ja { 0.0 } else { 1.0 - smoothstep((grid.t(j) - sr) / (sa - sr), order) })
        .collect();
    let chi_adv = chi_ret.iter().map(|c| 1.0 - c).collect();
    Ok(CutoffPair { grid, strip: (t_a, t_b), sigma_ret: sr, sigma_adv: sa, order, chi_ret, chi_adv, levels: (la, lb) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Adv,
    Ret,
}

impl CutoffPair {
    pub fn chi(&self, b: Branch) -> &[f64] {
        match b {
            Branch::Adv => &self.chi_adv,
            Branch::Ret => &self.chi_ret,
        }
    }

    /// chi * u, level by level.
    pub fn multiply(&self, b: Branch, u: &GridField) -> GridField {
        let c = self.chi(b);
        let g = u.grid;
        let mut out = u.clone();
        for j in 0..g.n_t {
            let cj = c[j];
            out.row_mut(j).iter_mut().for_each(|v| *v *= cj);
        }
        out
    }

    /// K (chi phi) as a test function; supported in the transition layer when phi solves K phi = 0.
    /// Values on rows where K phi itself is at round-off are set to zero.
    pub fn source(&self, st: &Spacetime, b: Branch, phi: &SolutionField) -> Result<TestFunction> {
        let g = st.grid;
        if g != self.grid {
            return Err(Error::SpaceMismatch("cutoffs built for another grid".into()));
        }
        let k = apply_kg(st, &self.multiply(b, &phi.values));
        let (jr, ja) = (g.level_of(self.sigma_ret)?, g.level_of(self.sigma_adv)?);
        let mut out = GridField::zeros(g);
        for j in jr.saturating_sub(1)..=(ja + 1).min(g.n_t - 2) {
            out.row_mut(j).copy_from_slice(k.row(j));
        }
        TestFunction::new(out)
    }
}
