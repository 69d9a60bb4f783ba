//! Conservative second-order discretization of sqrt(-g) K_g.
//!
//! Row j at node i:
//!   [A^tt_{j+1/2}(p_{j+1} - p_j) - A^tt_{j-1/2}(p_j - p_{j-1})] / dt^2
//! + [A^tx_{j+1,i} D_x p_{j+1} - A^tx_{j-1,i} D_x p_{j-1}] / (4 dt dx)
//! + [A^tx_{j,i+1}(p_{j+1} - p_{j-1})_{i+1} - A^tx_{j,i-1}(p_{j+1} - p_{j-1})_{i-1}] / (4 dt dx)
//! + [A^xx_{i+1/2}(p_{i+1} - p_i) - A^xx_{i-1/2}(p_i - p_{i-1})] / dx^2 + pot p_j
//! with D_x p = p_{i+1} - p_{i-1}. The matrix is symmetric.

use crate::geometry::spacetime::{Coeffs, Spacetime};
use crate::grid::{Grid, GridField};

/// (sqrt(-g) K phi) on row j.
pub(crate) fn row_apply(c: &Coeffs, g: &Grid, j: usize, prev: &[f64], cur: &[f64], next: &[f64], out: &mut [f64]) {
    let n = g.n_x;
    let idt2 = 1.0 / (g.dt * g.dt);
    let idx2 = 1.0 / (g.dx() * g.dx());
    let inv4 = 1.0 / (4.0 * g.dt * g.dx());
    let r = j * n;
    let rp = (j + 1) * n;
    let rm = (j - 1) * n;
    for i in 0..n {
        let ip = if i + 1 == n { 0 } else { i + 1 };
        let im = if i == 0 { n - 1 } else { i - 1 };
        let att_p = 0.5 * (c.att[r + i] + c.att[rp + i]);
        let att_m = 0.5 * (c.att[r + i] + c.att[rm + i]);
        let mut v = (att_p * (next[i] - cur[i]) - att_m * (cur[i] - prev[i])) * idt2;
        if c.cross {
            v += (c.atx[rp + i] * (next[ip] - next[im]) - c.atx[rm + i] * (prev[ip] - prev[im])
                + c.atx[r + ip] * (next[ip] - prev[ip])
                - c.atx[r + im] * (next[im] - prev[im]))
                * inv4;
        }
        let axx_p = 0.5 * (c.axx[r + i] + c.axx[r + ip]);
        let axx_m = 0.5 * (c.axx[r + i] + c.axx[r + im]);
        v += (axx_p * (cur[ip] - cur[i]) - axx_m * (cur[i] - cur[im])) * idx2;
        out[i] = v + c.pot[r + i] * cur[i];
    }
}

/// sqrt(-g) K applied to a whole field with arbitrary coefficients; boundary levels are NaN.
pub(crate) fn apply_weighted(c: &Coeffs, g: &Grid, field: &GridField) -> GridField {
    let mut out = GridField::constant(*g, f64::NAN);
    let n = g.n_x;
    for j in 1..g.n_t - 1 {
        let (prev, cur, next) = (field.row(j - 1), field.row(j), field.row(j + 1));
        row_apply(c, g, j, prev, cur, next, &mut out.data[j * n..(j + 1) * n]);
    }
    out
}

/// K_g phi by centered second-order stencils. Levels 0 and n_t - 1 are NaN (invalid).
pub fn apply_kg(spacetime: &Spacetime, field: &GridField) -> GridField {
    let mut out = apply_weighted(&spacetime.coeffs, &spacetime.grid, field);
    for (v, s) in out.data.iter_mut().zip(&spacetime.coeffs.sg) {
        *v /= s;
    }
    out
}

/// Solves c_i x_{i-1} + d_i x_i + b_i x_{i+1} = r_i with periodic wrap (Sherman-Morrison).
pub(crate) fn cyclic_tridiagonal(c: &[f64], d: &[f64], b: &[f64], r: &[f64], x: &mut [f64], work: &mut Work) {
    let n = d.len();
    let alpha = b[n - 1];
    let beta = c[0];
    if alpha == 0.0 && beta == 0.0 {
        thomas(c, d, b, r, x, &mut work.cp);
        return;
    }
    let gamma = -d[0];
    work.dd.clear();
    work.dd.extend_from_slice(d);
    work.dd[0] -= gamma;
    work.dd[n - 1] -= alpha * beta / gamma;
    thomas(c, &work.dd, b, r, x, &mut work.cp);
    work.u.clear();
    work.u.resize(n, 0.0);
    work.u[0] = gamma;
    work.u[n - 1] = alpha;
    work.z.clear();
    work.z.resize(n, 0.0);
    let dd = std::mem::take(&mut work.dd);
    let u = std::mem::take(&mut work.u);
    let mut z = std::mem::take(&mut work.z);
    thomas(c, &dd, b, &u, &mut z, &mut work.cp);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    for i in 0..n {
        x[i] -= fact * z[i];
    }
    work.dd = dd;
    work.u = u;
    work.z = z;
}

fn thomas(c: &[f64], d: &[f64], b: &[f64], r: &[f64], x: &mut [f64], cp: &mut Vec<f64>) {
    let n = d.len();
    cp.clear();
    cp.resize(n, 0.0);
    let mut m = d[0];
    cp[0] = b[0] / m;
    x[0] = r[0] / m;
    for i in 1..n {
        m = d[i] - c[i] * cp[i - 1];
        cp[i] = b[i] / m;
        x[i] = (r[i] - c[i] * x[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
}

#[derive(Default)]
pub(crate) struct Work {
    cp: Vec<f64>,
    dd: Vec<f64>,
    u: Vec<f64>,
    z: Vec<f64>,
    pub(crate) c: Vec<f64>,
    pub(crate) d: Vec<f64>,
    pub(crate) b: Vec<f64>,
    pub(crate) r: Vec<f64>,
    pub(crate) tmp: Vec<f64>,
    pub(crate) zero: Vec<f64>,
}

impl Work {
    pub(crate) fn new(n: usize) -> Work {
        Work {
            c: vec![0.0; n],
            d: vec![0.0; n],
            b: vec![0.0; n],
            r: vec![0.0; n],
            tmp: vec![0.0; n],
            zero: vec![0.0; n],
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Unknown {
    /// level j+1 from rows at j
    Next,
    /// level j-1
    Prev,
    /// level j+1 with p_{j-1} = p_{j+1} - 2 dt pi
    Both,
}

/// Solve row j for one unknown level. `known_prev`/`known_next` hold the known neighbour
/// (for `Both`, known_prev is -2 dt pi). `src` is sqrt(-g) f on row j.
pub(crate) fn solve_row(
    c: &Coeffs,
    g: &Grid,
    j: usize,
    known_prev: &[f64],
    cur: &[f64],
    known_next: &[f64],
    src: &[f64],
    which: Unknown,
    out: &mut [f64],
    w: &mut Work,
) {
    let n = g.n_x;
    let idt2 = 1.0 / (g.dt * g.dt);
    let inv4 = 1.0 / (4.0 * g.dt * g.dx());
    let mut tmp = std::mem::take(&mut w.tmp);
    let zero = std::mem::take(&mut w.zero);
    match which {
        Unknown::Next | Unknown::Both => row_apply(c, g, j, known_prev, cur, &zero, &mut tmp),
        Unknown::Prev => row_apply(c, g, j, &zero, cur, known_next, &mut tmp),
    }
    let (r, rp, rm) = (j * n, (j + 1) * n, (j - 1) * n);
    if !c.cross {
        for i in 0..n {
            let d = match which {
                Unknown::Next => 0.5 * (c.att[r + i] + c.att[rp + i]),
                Unknown::Prev => 0.5 * (c.att[r + i] + c.att[rm + i]),
                Unknown::Both => 0.5 * (2.0 * c.att[r + i] + c.att[rp + i] + c.att[rm + i]),
            } * idt2;
            out[i] = (src[i] - tmp[i]) / d;
        }
    } else {
        for i in 0..n {
            let ip = (i + 1) % n;
            let im = (i + n - 1) % n;
            let (d, b, cc) = match which {
                Unknown::Next => (
                    0.5 * (c.att[r + i] + c.att[rp + i]) * idt2,
                    (c.atx[rp + i] + c.atx[r + ip]) * inv4,
                    -(c.atx[rp + i] + c.atx[r + im]) * inv4,
                ),
                Unknown::Prev => (
                    0.5 * (c.att[r + i] + c.att[rm + i]) * idt2,
                    -(c.atx[rm + i] + c.atx[r + ip]) * inv4,
                    (c.atx[rm + i] + c.atx[r + im]) * inv4,
                ),
                Unknown::Both => (
                    0.5 * (2.0 * c.att[r + i] + c.att[rp + i] + c.att[rm + i]) * idt2,
                    (c.atx[rp + i] - c.atx[rm + i]) * inv4,
                    -(c.atx[rp + i] - c.atx[rm + i]) * inv4,
                ),
            };
            w.d[i] = d;
            w.b[i] = b;
            w.c[i] = cc;
            w.r[i] = src[i] - tmp[i];
        }
        let (cv, dv, bv, rv) = (std::mem::take(&mut w.c), std::mem::take(&mut w.d), std::mem::take(&mut w.b), std::mem::take(&mut w.r));
        cyclic_tridiagonal(&cv, &dv, &bv, &rv, out, w);
        w.c = cv;
        w.d = dv;
        w.b = bv;
        w.r = rv;
    }
    w.tmp = tmp;
    w.zero = zero;
}

/// Second time derivative from the continuum equation on a boundary level (Taylor start).
/// `lvl` is 0 or n_t - 1; returns phi_tt.
pub(crate) fn phi_tt_boundary(c: &Coeffs, g: &Grid, lvl: usize, phi: &[f64], pi: &[f64], src: &[f64]) -> Vec<f64> {
    let n = g.n_x;
    let nt = g.n_t;
    let dx = g.dx();
    let dt_coef = |a: &[f64], i: usize| -> f64 {
        if nt < 3 {
            return (a[n + i] - a[i]) / g.dt;
        }
        if lvl == 0 {
            (-3.0 * a[i] + 4.0 * a[n + i] - a[2 * n + i]) / (2.0 * g.dt)
        } else {
            let r = lvl * n;
            (3.0 * a[r + i] - 4.0 * a[r - n + i] + a[r - 2 * n + i]) / (2.0 * g.dt)
        }
    };
    let r = lvl * n;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        let phx = (phi[ip] - phi[im]) / (2.0 * dx);
        let pix = (pi[ip] - pi[im]) / (2.0 * dx);
        let d_atx_pi = (c.atx[r + ip] * pi[ip] - c.atx[r + im] * pi[im]) / (2.0 * dx);
        let axx_p = 0.5 * (c.axx[r + i] + c.axx[r + ip]);
        let axx_m = 0.5 * (c.axx[r + i] + c.axx[r + im]);
        let sp = (axx_p * (phi[ip] - phi[i]) - axx_m * (phi[i] - phi[im])) / (dx * dx);
        let rest = src[i]
            - c.pot[r + i] * phi[i]
            - dt_coef(&c.att, i) * pi[i]
            - dt_coef(&c.atx, i) * phx
            - c.atx[r + i] * pix
            - d_atx_pi
            - sp;
        out[i] = rest / c.att[r + i];
    }
    out
}
