use super::curvature::{d_t, d_x};
use super::metric::{Metric, MetricFamily, Provenance};
use crate::bump::VectorBump;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};

/// Contravariant vector field X^mu with compact support.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldX {
    pub x_t: GridField,
    pub x_x: GridField,
    /// Closed form, when known; used by the flow integrator.
    pub analytic: Option<VectorBump>,
}

impl VectorFieldX {
    pub fn from_bump(grid: Grid, vb: VectorBump) -> VectorFieldX {
        let x_t = GridField::from_fn(grid, |t, x| vb.eval(t, x, grid.length).0[0]);
        let x_x = GridField::from_fn(grid, |t, x| vb.eval(t, x, grid.length).0[1]);
        VectorFieldX { x_t, x_x, analytic: Some(vb) }
    }

    pub fn zero(grid: Grid) -> VectorFieldX {
        VectorFieldX { x_t: GridField::zeros(grid), x_x: GridField::zeros(grid), analytic: None }
    }

    pub fn grid(&self) -> Grid {
        self.x_t.grid
    }

    pub fn is_zero(&self) -> bool {
        self.x_t.is_zero() && self.x_x.is_zero()
    }

    /// First and last level where X is nonzero.
    pub fn support_levels(&self) -> Option<(usize, usize)> {
        support_levels(&[&self.x_t, &self.x_x])
    }
}

fn support_levels(fields: &[&GridField]) -> Option<(usize, usize)> {
    let g = fields[0].grid;
    let rows: Vec<usize> =
        (0..g.n_t).filter(|&j| fields.iter().any(|f| f.row(j).iter().any(|&v| v != 0.0))).collect();
    Some((*rows.first()?, *rows.last()?))
}

/// Compactly supported symmetric tensor h_{mu nu}; the metric family is g_s = g0 + s h.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    pub h_tt: GridField,
    pub h_tx: GridField,
    pub h_xx: GridField,
    /// Time support [t_minus, t_plus]; empty support gives (inf, -inf).
    pub t_minus: f64,
    pub t_plus: f64,
    pub scale: f64,
}

impl Perturbation {
    pub fn new(h_tt: GridField, h_tx: GridField, h_xx: GridField) -> Perturbation {
        let g = h_tt.grid;
        let (t_minus, t_plus) = match support_levels(&[&h_tt, &h_tx, &h_xx]) {
            Some((a, b)) => (g.t(a), g.t(b)),
            None => (f64::INFINITY, f64::NEG_INFINITY),
        };
        Perturbation { h_tt, h_tx, h_xx, t_minus, t_plus, scale: 1.0 }
    }

    pub fn zero(grid: Grid) -> Perturbation {
        Perturbation::new(GridField::zeros(grid), GridField::zeros(grid), GridField::zeros(grid))
    }

    /// h = perturbed - background.
    pub fn between(perturbed: &Metric, background: &Metric) -> Perturbation {
        Perturbation::new(
            perturbed.g_tt.sub(&background.g_tt),
            perturbed.g_tx.sub(&background.g_tx),
            perturbed.g_xx.sub(&background.g_xx),
        )
    }

    pub fn grid(&self) -> Grid {
        self.h_tt.grid
    }

    pub fn is_zero(&self) -> bool {
        self.h_tt.is_zero() && self.h_tx.is_zero() && self.h_xx.is_zero()
    }

    #[inline]
    pub fn at(&self, j: usize, i: usize) -> [f64; 3] {
        [self.h_tt.at(j, i), self.h_tx.at(j, i), self.h_xx.at(j, i)]
    }

    pub fn scaled(&self, c: f64) -> Perturbation {
        let mut p = Perturbation::new(self.h_tt.scale(c), self.h_tx.scale(c), self.h_xx.scale(c));
        p.scale = self.scale * c;
        p
    }

    /// L2 norm of (h_tt, sqrt 2 h_tx, h_xx).
    pub fn norm(&self) -> f64 {
        let a = self.h_tt.l2();
        let b = self.h_tx.l2();
        let c = self.h_xx.l2();
        (a * a + 2.0 * b * b + c * c).sqrt()
    }

    /// background + s h.
    pub fn apply(&self, background: &Metric, s: f64) -> Result<Metric> {
        let prov = if s == 0.0 { background.provenance } else { Provenance::Perturbed };
        Metric::new(
            background.g_tt.zip(&self.h_tt, |a, b| a + s * b),
            background.g_tx.zip(&self.h_tx, |a, b| a + s * b),
            background.g_xx.zip(&self.h_xx, |a, b| a + s * b),
            prov,
        )
    }
}

/// Lie_X g_{mn} = X^a d_a g_{mn} + g_{an} d_m X^a + g_{ma} d_n X^a (centered differences).
pub fn lie_derivative_metric(x: &VectorFieldX, metric: &Metric) -> Perturbation {
    let grid = metric.grid();
    if x.is_zero() {
        return Perturbation::zero(grid);
    }
    let xs = [&x.x_t, &x.x_x];
    // dx_[a][m] = d_m X^a
    let dxv = [[d_t(xs[0]), d_x(xs[0])], [d_t(xs[1]), d_x(xs[1])]];
    let gc = [[&metric.g_tt, &metric.g_tx], [&metric.g_tx, &metric.g_xx]];
    let dg = [
        [d_t(&metric.g_tt), d_x(&metric.g_tt)],
        [d_t(&metric.g_tx), d_x(&metric.g_tx)],
        [d_t(&metric.g_xx), d_x(&metric.g_xx)],
    ];
    let comp = |m: usize, n: usize| if m == 0 && n == 0 { 0 } else if m == 1 && n == 1 { 2 } else { 1 };
    let mut h = [GridField::zeros(grid), GridField::zeros(grid), GridField::zeros(grid)];
    for k in 0..grid.len() {
        for (slot, (m, n)) in [(0usize, 0usize), (0, 1), (1, 1)].into_iter().enumerate() {
            let mut v = 0.0;
            for a in 0..2 {
                v += xs[a].data[k] * dg[comp(m, n)][a].data[k];
                v += gc[a][n].data[k] * dxv[a][m].data[k];
                v += gc[m][a].data[k] * dxv[a][n].data[k];
            }
            h[slot].data[k] = v;
        }
    }
    let [a, b, c] = h;
    Perturbation::new(a, b, c)
}

fn catmull_rom(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    [
        0.5 * (-u3 + 2.0 * u2 - u),
        0.5 * (3.0 * u3 - 5.0 * u2 + 2.0),
        0.5 * (-3.0 * u3 + 4.0 * u2 + u),
        0.5 * (u3 - u2),
    ]
}

/// Periodic-in-x Catmull-Rom interpolation; t must lie in the slab.
pub fn interpolate(f: &GridField, t: f64, x: f64) -> Result<f64> {
    let g = f.grid;
    let r = (t - g.t0) / g.dt;
    if r < -1e-9 || r > (g.n_t - 1) as f64 + 1e-9 {
        return Err(Error::OutOfDomain(format!("t = {t} outside the slab")));
    }
    let j0 = (r.floor() as isize).clamp(0, g.n_t as isize - 1);
    let ut = r - j0 as f64;
    let sx = x.rem_euclid(g.length) / g.dx();
    let i0 = sx.floor() as isize;
    let ux = sx - i0 as f64;
    let wt = catmull_rom(ut);
    let wx = catmull_rom(ux);
    let mut s = 0.0;
    for (a, wa) in wt.iter().enumerate() {
        if *wa == 0.0 {
            continue;
        }
        let j = (j0 + a as isize - 1).clamp(0, g.n_t as isize - 1) as usize;
        for (b, wb) in wx.iter().enumerate() {
            s += wa * wb * f.at(j, g.wrap(i0 + b as isize - 1));
        }
    }
    Ok(s)
}

struct FlowField<'a> {
    x: &'a VectorFieldX,
    grad: Option<[[GridField; 2]; 2]>,
}

impl<'a> FlowField<'a> {
    fn new(x: &'a VectorFieldX) -> Self {
        let grad = if x.analytic.is_some() {
            None
        } else {
            Some([[d_t(&x.x_t), d_x(&x.x_t)], [d_t(&x.x_x), d_x(&x.x_x)]])
        };
        FlowField { x, grad }
    }

    fn eval(&self, t: f64, x: f64) -> Result<([f64; 2], [[f64; 2]; 2])> {
        let g = self.x.grid();
        if let Some(vb) = &self.x.analytic {
            if t < g.t0 - 1e-9 || t > g.t_end() + 1e-9 {
                return Err(Error::OutOfDomain(format!("flow reached t = {t} outside the slab")));
            }
            return Ok(vb.eval(t, x, g.length));
        }
        let gr = self.grad.as_ref().unwrap();
        Ok((
            [interpolate(&self.x.x_t, t, x)?, interpolate(&self.x.x_x, t, x)?],
            [
                [interpolate(&gr[0][0], t, x)?, interpolate(&gr[0][1], t, x)?],
                [interpolate(&gr[1][0], t, x)?, interpolate(&gr[1][1], t, x)?],
            ],
        ))
    }

    /// Endpoint and Jacobian of the time-s flow from (t, x); RK4 with step <= dt.
    fn integrate(&self, t: f64, x: f64, s: f64) -> Result<([f64; 2], [[f64; 2]; 2])> {
        let g = self.x.grid();
        let n = ((s.abs() / g.dt).ceil() as usize).max(1);
        let h = s / n as f64;
        let mut y = [t, x, 1.0, 0.0, 0.0, 1.0];
        let rhs = |y: &[f64; 6]| -> Result<[f64; 6]> {
            let (v, d) = self.eval(y[0], y[1])?;
            // J[a][m] stored row-major at y[2..6]; dJ = dX J
            let jm = [[y[2], y[3]], [y[4], y[5]]];
            let mut out = [v[0], v[1], 0.0, 0.0, 0.0, 0.0];
            for a in 0..2 {
                for m in 0..2 {
                    out[2 + 2 * a + m] = d[a][0] * jm[0][m] + d[a][1] * jm[1][m];
                }
            }
            Ok(out)
        };
        let axpy = |y: &[f64; 6], k: &[f64; 6], c: f64| -> [f64; 6] {
            let mut o = *y;
            for q in 0..6 {
                o[q] += c * k[q];
            }
            o
        };
        for _ in 0..n {
            let k1 = rhs(&y)?;
            let k2 = rhs(&axpy(&y, &k1, 0.5 * h))?;
            let k3 = rhs(&axpy(&y, &k2, 0.5 * h))?;
            let k4 = rhs(&axpy(&y, &k3, h))?;
            for q in 0..6 {
                y[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
            }
        }
        if y[0] < g.t0 - 1e-9 || y[0] > g.t_end() + 1e-9 {
            return Err(Error::OutOfDomain(format!("flow left the slab at t = {}", y[0])));
        }
        Ok(([y[0], y[1]], [[y[2], y[3]], [y[4], y[5]]]))
    }
}

fn pullback_with(
    flow: &VectorFieldX,
    s: f64,
    base: &Metric,
    g_at: impl Fn(f64, f64) -> Result<[f64; 3]>,
) -> Result<Metric> {
    let grid = base.grid();
    if flow.grid() != grid {
        return Err(Error::SpaceMismatch("flow and metric grids differ".into()));
    }
    if s == 0.0 || flow.is_zero() {
        return Ok(base.clone());
    }
    let ff = FlowField::new(flow);
    let mut out = base.clone();
    for j in 0..grid.n_t {
        for i in 0..grid.n_x {
            let (t, x) = (grid.t(j), grid.x(i));
            let (v, d) = ff.eval(t, x)?;
            if v == [0.0, 0.0] && d == [[0.0, 0.0], [0.0, 0.0]] {
                continue; // fixed point of the flow: copied bit for bit
            }
            let (p, jac) = ff.integrate(t, x, s)?;
            let g = g_at(p[0], p[1])?;
            let gm = [[g[0], g[1]], [g[1], g[2]]];
            let mut r = [[0.0; 2]; 2];
            for m in 0..2 {
                for n in 0..2 {
                    let mut acc = 0.0;
                    for a in 0..2 {
                        for b in 0..2 {
                            acc += jac[a][m] * jac[b][n] * gm[a][b];
                        }
                    }
                    r[m][n] = acc;
                }
            }
            out.g_tt.set(j, i, r[0][0]);
            out.g_tx.set(j, i, 0.5 * (r[0][1] + r[1][0]));
            out.g_xx.set(j, i, r[1][1]);
        }
    }
    out.provenance = Provenance::PulledBack;
    out.validate()?;
    Ok(out)
}

/// phi_s^* g for the time-s flow of X; d/ds at 0 is Lie_X g. Metric values off the lattice
/// come from bicubic interpolation.
pub fn pullback_metric(flow: &VectorFieldX, s: f64, metric: &Metric) -> Result<Metric> {
    let flat = metric.is_flat();
    pullback_with(flow, s, metric, |t, x| {
        if flat {
            Ok([1.0, 0.0, -1.0])
        } else {
            Ok([interpolate(&metric.g_tt, t, x)?, interpolate(&metric.g_tx, t, x)?, interpolate(&metric.g_xx, t, x)?])
        }
    })
}

/// As `pullback_metric`, evaluating an analytic family at the flowed points.
pub fn pullback_family(flow: &VectorFieldX, s: f64, family: &MetricFamily, grid: Grid) -> Result<Metric> {
    let base = family.metric(grid)?;
    pullback_with(flow, s, &base, |t, x| Ok(family.eval(t, x, grid.length)))
}
