use super::state::{QuasifreeState, StateKind};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;

/// Modes kept in the point-split sums; the neglected tail is O(m^2 L^2 / K^2).
pub const HADAMARD_MODES: usize = 32768;
/// Largest accepted gap between the two extrapolation stencils; the fine stencil error is about 1/16 of it.
pub const EXTRAPOLATION_TOL: f64 = 1e-4;

/// Expectation-shift field of a Wick square (or the cocycle between two states).
#[derive(Clone, Debug)]
pub struct WickSquareField {
    pub values: GridField,
    pub mu: Option<f64>,
    pub provenance: String,
    /// Gap between the {4,2,1}dx and {8,4,2}dx extrapolants; zero for mode-sum cocycles.
    pub noise: f64,
}

impl WickSquareField {
    /// Largest spatial Fourier coefficient with 1 <= k <= k_max on each row, relative to the row mean.
    pub fn fourier_tail(&self, k_max: usize) -> f64 {
        let g = self.values.grid;
        let mut worst: f64 = 0.0;
        for j in 0..g.n_t {
            let row = self.values.row(j);
            if row.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let n = row.len() as f64;
            let mean = row.iter().sum::<f64>() / n;
            for k in 1..=k_max.min(g.n_x / 2) {
                let (mut c, mut s) = (0.0, 0.0);
                for (i, v) in row.iter().enumerate() {
                    let th = 2.0 * PI * (k * i) as f64 / n;
                    c += v * th.cos();
                    s += v * th.sin();
                }
                worst = worst.max((c.hypot(s) / n) / mean.abs().max(f64::MIN_POSITIVE));
            }
        }
        worst
    }

    /// (min, max) over finite entries.
    pub fn range(&self) -> (f64, f64) {
        self.values.data.iter().filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    }

    pub fn sub(&self, other: &WickSquareField) -> Result<GridField> {
        if self.values.grid != other.values.grid {
            return Err(Error::SpaceMismatch("Wick fields on different grids".into()));
        }
        Ok(self.values.sub(&other.values))
    }
}

fn root(state: &QuasifreeState) -> &QuasifreeState {
    match &state.kind {
        StateKind::PulledBack { parent, .. } => root(parent),
        _ => state,
    }
}

/// Regular part of the equal-time point split of a homogeneous state:
/// w(eps) + (1/2pi) ln(2 sin(pi eps / L)), i.e. everything except the closed-form log sum.
fn split_regular(state: &QuasifreeState, eps: f64) -> f64 {
    let b = &state.basis;
    let l = b.length;
    let mut s = (1.0 + 2.0 * state.occupation(0)) / (2.0 * l * b.mass);
    for n in 1..=HADAMARD_MODES as i64 {
        let (k, w) = (b.k(n), b.omega(n));
        s += ((1.0 + 2.0 * state.occupation(n)) / (l * w) - 1.0 / (l * k)) * (k * eps).cos();
    }
    s
}

/// H(eps) = w(eps) - P_mu(eps), P_mu = -(1/2pi) ln(mu eps).
fn split_h(state: &QuasifreeState, mu: f64, eps: f64) -> f64 {
    let l = state.basis.length;
    split_regular(state, eps) - (2.0 * (PI * eps / l).sin()).ln() / (2.0 * PI) + (mu * eps).ln() / (2.0 * PI)
}

/// Constant term of the fit a + b eps^2 + c eps^2 ln eps through three separations.
fn extrapolate(eps: [f64; 3], h: [f64; 3]) -> Result<f64> {
    let m = Matrix3::from_fn(|r, c| match c {
        0 => 1.0,
        1 => eps[r] * eps[r],
        _ => eps[r] * eps[r] * eps[r].ln(),
    });
    let sol = m.lu().solve(&Vector3::from(h)).ok_or_else(|| Error::Extrapolation("singular point-split fit".into()))?;
    Ok(sol[0])
}

/// H_omega(x, x) for a homogeneous state, with its extrapolation noise.
pub fn hadamard_constant(state: &QuasifreeState, mu: f64, dx: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0) {
        return Err(Error::Precondition(format!("parametrix scale must be positive, got {mu}")));
    }
    let st = root(state);
    let hs: Vec<f64> = [8.0, 4.0, 2.0, 1.0].iter().map(|k| split_h(st, mu, k * dx)).collect();
    let fine = extrapolate([4.0 * dx, 2.0 * dx, dx], [hs[1], hs[2], hs[3]])?;
    let coarse = extrapolate([8.0 * dx, 4.0 * dx, 2.0 * dx], [hs[0], hs[1], hs[2]])?;
    let noise = (fine - coarse).abs();
    if !fine.is_finite() || noise > EXTRAPOLATION_TOL {
        return Err(Error::Extrapolation(format!("point-split extrapolants differ by {noise:.3e}")));
    }
    Ok((fine, noise))
}

/// Closed form of H_vac(x, x): (1/2L)[1/m + 2 sum (1/w_n - 1/k_n)] - (1/2pi) ln(2pi/L) + (1/2pi) ln mu.
pub fn vacuum_hadamard_oracle(mass: f64, length: f64, mu: f64, modes: usize) -> f64 {
    let mut s = 1.0 / mass;
    // summed from the small terms up
    for n in (1..=modes).rev() {
        let k = 2.0 * PI * n as f64 / length;
        s += 2.0 * (1.0 / (mass * mass + k * k).sqrt() - 1.0 / k);
    }
    s / (2.0 * length) - (2.0 * PI / length).ln() / (2.0 * PI) + mu.ln() / (2.0 * PI)
}

/// Sum over all n of 1 / (L w_n (e^{beta w_n} - 1)).
pub fn thermal_cocycle_oracle(mass: f64, length: f64, beta: f64) -> f64 {
    let mut s = 0.0;
    let mut n = 0i64;
    loop {
        let k = 2.0 * PI * n as f64 / length;
        let w = (mass * mass + k * k).sqrt();
        let term = 1.0 / (length * w * (beta * w).exp_m1());
        s += if n == 0 { term } else { 2.0 * term };
        if term < 1e-20 * s || n > 10_000_000 {
            break;
        }
        n += 1;
    }
    s
}

fn check_grid(state: &QuasifreeState, grid: &Grid) -> Result<()> {
    if (grid.length - state.basis.length).abs() > 1e-12 * state.basis.length {
        return Err(Error::SpaceMismatch(format!("grid L = {} but state L = {}", grid.length, state.basis.length)));
    }
    Ok(())
}

/// Pull a field on the embedding target back to its source; NaN off the domain.
fn pull_back(state: &QuasifreeState, field: GridField) -> GridField {
    match &state.kind {
        StateKind::PulledBack { embedding, .. } => {
            let g = embedding.source.grid;
            let mut out = GridField::constant(g, f64::NAN);
            for j in 0..g.n_t {
                for i in 0..g.n_x {
                    if embedding.in_domain(j, i) {
                        let (tj, ti) = embedding.map_node(j, i);
                        out.set(j, i, field.at(tj, ti));
                    }
                }
            }
            out
        }
        _ => field,
    }
}

/// Grid the field of `state` lives on: pulled-back states carry their own.
fn field_on(state: &QuasifreeState, grid: &Grid, value: &dyn Fn(&Grid) -> GridField) -> Result<GridField> {
    match &state.kind {
        StateKind::PulledBack { parent, embedding } => {
            if embedding.source.grid != *grid {
                return Err(Error::SpaceMismatch("pulled-back state lives on the embedding source grid".into()));
            }
            let up = field_on(parent, &embedding.target.grid, value)?;
            Ok(pull_back(state, up))
        }
        _ => {
            check_grid(state, grid)?;
            Ok(value(grid))
        }
    }
}

/// f_omega(x) = H_omega(x, x) on `grid`.
pub fn hadamard_diagonal(state: &QuasifreeState, mu: f64, grid: &Grid) -> Result<WickSquareField> {
    let (c, noise) = hadamard_constant(state, mu, grid.dx())?;
    let values = field_on(state, grid, &|g| GridField::constant(*g, c))?;
    Ok(WickSquareField { values, mu: Some(mu), provenance: state.label(), noise })
}

/// Expectation of the locally covariant Wick square in `state`.
pub fn wick_square(state: &QuasifreeState, mu: f64, grid: &Grid) -> Result<WickSquareField> {
    hadamard_diagonal(state, mu, grid)
}

/// B_{A,B}(x) = w_A(x, x) - w_B(x, x) as a convergent mode sum.
pub fn cocycle(a: &QuasifreeState, b: &QuasifreeState, grid: &Grid) -> Result<WickSquareField> {
    let (ra, rb) = (root(a), root(b));
    if ra.basis.mass != rb.basis.mass || ra.basis.length != rb.basis.length {
        return Err(Error::SpaceMismatch("cocycle needs states on the same background".into()));
    }
    let basis = ra.basis;
    let mut s = 0.0;
    for n in (-(HADAMARD_MODES as i64)..=HADAMARD_MODES as i64).rev() {
        let d = ra.occupation(n) - rb.occupation(n);
        s += d / (basis.length * basis.omega(n));
    }
    // the zero field on b's side carries its domain mask
    let values = field_on(a, grid, &|g| GridField::constant(*g, s))?.add(&field_on(b, grid, &|g| GridField::zeros(*g))?);
    Ok(WickSquareField { values, mu: None, provenance: format!("{} - {}", a.label(), b.label()), noise: 0.0 })
}

/// <:Phi^n:> from the generating factor e^{lambda^2 f / 2}: 1, 0, f, 0, 3 f^2.
pub fn wick_power(state: &QuasifreeState, mu: f64, n: u32, grid: &Grid) -> Result<GridField> {
    if n > 4 {
        return Err(Error::Precondition(format!("Wick powers implemented up to 4, asked for {n}")));
    }
    if n == 0 {
        return field_on(state, grid, &|g| GridField::constant(*g, 1.0));
    }
    if n % 2 == 1 {
        return field_on(state, grid, &|g| GridField::zeros(*g));
    }
    let f = hadamard_diagonal(state, mu, grid)?.values;
    Ok(if n == 2 { f } else { f.map(|v| 3.0 * v * v) })
}

/// |Fourier coefficients| in the separation of w_A(x, x + eps) - w_B(x, x + eps), n = 0..=k_max.
pub fn difference_spectrum(a: &QuasifreeState, b: &QuasifreeState, k_max: usize) -> Vec<f64> {
    let (ra, rb) = (root(a), root(b));
    let basis = ra.basis;
    (0..=k_max as i64)
        .map(|n| {
            let c = (ra.occupation(n) - rb.occupation(n)) / (basis.length * basis.omega(n));
            if n == 0 { c.abs() } else { 2.0 * c.abs() }
        })
        .collect()
}
