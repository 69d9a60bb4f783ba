use super::config::RceConfig;
use super::evolution::Relative;
use crate::error::{Error, Result};
use crate::geometry::curvature::{d_t, d_x};
use crate::geometry::flow::Perturbation;
use crate::geometry::metric::inverse;
use crate::geometry::spacetime::{Coeffs, Spacetime};
use crate::grid::GridField;
use crate::solver::kg::apply_weighted;
use crate::solver::{apply_kg, e_causal, evolve, restrict_values, CauchyData, TestFunction};
use crate::tolerances::PDE_REL;
use std::sync::Arc;

/// First variation of K_g at the background along h, built from the variations of the
/// densitized coefficients; exact derivative of the discrete operator for xi = 0.
#[derive(Clone, Debug)]
pub struct DeltaK {
    pub background: Arc<Spacetime>,
    /// delta sqrt(-g) in `sg`, delta A^{mn} and delta pot in the rest
    pub coeffs: Coeffs,
}

impl DeltaK {
    pub fn new(background: &Arc<Spacetime>, h: &Perturbation) -> Result<DeltaK> {
        let grid = background.grid;
        if h.grid() != grid {
            return Err(Error::SpaceMismatch("perturbation on another grid".into()));
        }
        let n = grid.len();
        let th = background.theory;
        let m2 = th.mass * th.mass;
        let mut c = Coeffs { sg: vec![0.0; n], att: vec![0.0; n], atx: vec![0.0; n], axx: vec![0.0; n], pot: vec![0.0; n], cross: false };
        let dr = if th.xi != 0.0 && !h.is_zero() {
            if !background.is_flat() {
                return Err(Error::Precondition("the curvature variation is implemented on flat backgrounds".into()));
            }
            Some(delta_r_flat(h))
        } else {
            None
        };
        let m = &background.metric;
        for k in 0..n {
            let hk = [h.h_tt.data[k], h.h_tx.data[k], h.h_xx.data[k]];
            if hk == [0.0; 3] && dr.as_ref().map_or(true, |d| d.data[k] == 0.0) {
                continue;
            }
            let g = [m.g_tt.data[k], m.g_tx.data[k], m.g_xx.data[k]];
            let gi = inverse(g);
            let sg = (-(g[0] * g[2] - g[1] * g[1])).sqrt();
            let tr = gi[0] * hk[0] + 2.0 * gi[1] * hk[1] + gi[2] * hk[2];
            // delta g^{mn} = -g^{ma} h_ab g^{bn}
            let gm = [[gi[0], gi[1]], [gi[1], gi[2]]];
            let hm = [[hk[0], hk[1]], [hk[1], hk[2]]];
            let mut dg = [[0.0; 2]; 2];
            for (mu, row) in dg.iter_mut().enumerate() {
                for (nu, v) in row.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for a in 0..2 {
                        for b in 0..2 {
                            s += gm[mu][a] * hm[a][b] * gm[b][nu];
                        }
                    }
                    *v = -s;
                }
            }
            let dsg = 0.5 * sg * tr;
            c.sg[k] = dsg;
            c.att[k] = dsg * gi[0] + sg * dg[0][0];
            c.atx[k] = dsg * gi[1] + sg * dg[0][1];
            c.axx[k] = dsg * gi[2] + sg * dg[1][1];
            let r0 = background.curvature.data[k];
            c.pot[k] = dsg * (m2 + th.xi * r0) + dr.as_ref().map_or(0.0, |d| sg * th.xi * d.data[k]);
        }
        c.cross = c.atx.iter().any(|&v| v != 0.0);
        Ok(DeltaK { background: background.clone(), coeffs: c })
    }

    pub fn is_zero(&self) -> bool {
        let c = &self.coeffs;
        [&c.sg, &c.att, &c.atx, &c.axx, &c.pot].iter().all(|v| v.iter().all(|&x| x == 0.0))
    }

    /// delta K phi = (delta L phi - delta sqrt(-g) K0 phi) / sqrt(-g0). Boundary levels are NaN.
    pub fn apply(&self, field: &GridField) -> GridField {
        let bg = &self.background;
        let g = bg.grid;
        if self.is_zero() {
            let mut z = GridField::zeros(g);
            z.row_mut(0).fill(f64::NAN);
            z.row_mut(g.n_t - 1).fill(f64::NAN);
            return z;
        }
        let dl = apply_weighted(&self.coeffs, &g, field);
        let k0 = apply_kg(bg, field);
        let mut out = dl;
        for q in 0..g.len() {
            out.data[q] = (out.data[q] - self.coeffs.sg[q] * k0.data[q]) / bg.coeffs.sg[q];
        }
        out
    }

    /// delta K phi as a source; boundary levels (where the coefficients vanish) set to zero.
    pub fn source(&self, field: &GridField) -> Result<TestFunction> {
        let mut u = self.apply(field);
        let n_t = u.grid.n_t;
        u.row_mut(0).fill(0.0);
        u.row_mut(n_t - 1).fill(0.0);
        TestFunction::new(u)
    }
}

/// delta R = d^m d^n h_mn - box tr h on the flat background (signature +,-).
pub fn delta_r_flat(h: &Perturbation) -> GridField {
    let tr = h.h_tt.sub(&h.h_xx);
    let htt_tt = d_t(&d_t(&h.h_tt));
    let htx_tx = d_t(&d_x(&h.h_tx));
    let hxx_xx = d_x(&d_x(&h.h_xx));
    let box_tr = d_t(&d_t(&tr)).sub(&d_x(&d_x(&tr)));
    htt_tt.sub(&htx_tx.scale(2.0)).add(&hxx_xx).sub(&box_tr)
}

pub fn delta_k(cfg: &RceConfig) -> Result<DeltaK> {
    DeltaK::new(&cfg.background, &cfg.perturbation)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaFMode {
    FiniteDifference,
    Analytic,
}

#[derive(Clone, Debug)]
pub struct DeltaF {
    pub data: CauchyData,
    /// ||D(s0/2) - D(s0)|| / ||D_fd||; zero in analytic mode
    pub noise_floor: f64,
    pub inconclusive: bool,
}

/// Default Richardson step in units of the configured perturbation.
pub const RICHARDSON_S0: f64 = 1.0;

/// d/ds F_{g0 + s h} phi at s = 0, per unit s.
pub fn delta_f(cfg: &RceConfig, phi: &CauchyData, mode: DeltaFMode) -> Result<DeltaF> {
    match mode {
        DeltaFMode::Analytic => {
            let dk = delta_k(cfg)?;
            let phi0 = evolve(&cfg.background, phi, None)?;
            let u = dk.source(&phi0.values)?;
            let eu = e_causal(&cfg.background, &u)?;
            let data = restrict_values(&eu.values, phi.slice_time)?.scale(-1.0);
            Ok(DeltaF { data, noise_floor: 0.0, inconclusive: false })
        }
        DeltaFMode::FiniteDifference => delta_f_richardson(cfg, phi, RICHARDSON_S0),
    }
}

pub fn delta_f_richardson(cfg: &RceConfig, phi: &CauchyData, s0: f64) -> Result<DeltaF> {
    if cfg.perturbation.is_zero() {
        return Ok(DeltaF { data: phi.scale(0.0), noise_floor: 0.0, inconclusive: false });
    }
    let f = |s: f64| Relative::new(cfg, s)?.composed(phi);
    let d = |s: f64| -> Result<CauchyData> { Ok(f(s)?.sub(&f(-s)?)?.scale(1.0 / (2.0 * s))) };
    let d1 = d(s0)?;
    let d2 = d(0.5 * s0)?;
    let fd = d2.lincomb(4.0 / 3.0, &d1, -1.0 / 3.0)?;
    let dx = cfg.grid().dx();
    let noise = d2.distance(&d1, dx)? / fd.norm(dx).max(1e-300);
    Ok(DeltaF { data: fd, noise_floor: noise, inconclusive: noise > PDE_REL })
}
