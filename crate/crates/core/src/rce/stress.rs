use super::config::RceConfig;
use super::variation::DeltaK;
use crate::error::{Error, Result};
use crate::geometry::curvature::{d_t, d_x};
use crate::geometry::flow::Perturbation;
use crate::geometry::spacetime::Spacetime;
use crate::grid::GridField;
use crate::solver::{e_causal, evolve, restrict_values, symplectic_surface, CauchyData};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StressForm {
    /// sigma(E0 dK phi0, psi)
    Propagator,
    /// sum (dK phi0) psi0 sqrt(-g0)
    Integral,
    /// sum t^{mn}[phi0, psi0] h_mn sqrt(-g0)
    Tensor,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pairing {
    pub value: f64,
    /// tensor form with xi != 0
    pub experimental: bool,
}

pub fn stress_pairing(cfg: &RceConfig, phi: &CauchyData, psi: &CauchyData, form: StressForm) -> Result<Pairing> {
    stress_pairing_with(&cfg.background, &cfg.perturbation, phi, psi, form)
}

/// The first-order response pairing along an arbitrary compactly supported h.
pub fn stress_pairing_with(
    bg: &Arc<Spacetime>,
    h: &Perturbation,
    phi: &CauchyData,
    psi: &CauchyData,
    form: StressForm,
) -> Result<Pairing> {
    if (phi.slice_time - psi.slice_time).abs() > 1e-9 {
        return Err(Error::SpaceMismatch("probes on different slices".into()));
    }
    if h.is_zero() {
        return Ok(Pairing { value: 0.0, experimental: false });
    }
    let phi0 = evolve(bg, phi, None)?;
    match form {
        StressForm::Propagator => {
            let u = DeltaK::new(bg, h)?.source(&phi0.values)?;
            let eu = restrict_values(&e_causal(bg, &u)?.values, psi.slice_time)?;
            Ok(Pairing { value: symplectic_surface(&eu, psi, bg, psi.slice_time)?, experimental: false })
        }
        StressForm::Integral => {
            let psi0 = evolve(bg, psi, None)?;
            let u = DeltaK::new(bg, h)?.source(&phi0.values)?;
            Ok(Pairing { value: u.weighted_dot(&psi0.values, &bg.coeffs.sg), experimental: false })
        }
        StressForm::Tensor => {
            if !bg.is_flat() {
                return Err(Error::Precondition("tensor form is written in the flat chart".into()));
            }
            let psi0 = evolve(bg, psi, None)?;
            let g = bg.grid;
            let s: f64 = tensor_density(bg, h, &phi0.values, &psi0.values).data.iter().sum();
            let xi = bg.theory.xi;
            Ok(Pairing { value: s * g.dt * g.dx(), experimental: xi != 0.0 })
        }
    }
}

/// t^{mn}[a, b] h_mn node by node (flat chart, no volume factor).
fn tensor_density(bg: &Spacetime, h: &Perturbation, a: &GridField, b: &GridField) -> GridField {
    let (at, ax, bt, bx) = (d_t(a), d_x(a), d_t(b), d_x(b));
    let g = bg.grid;
    let m2 = bg.theory.mass * bg.theory.mass;
    let xi = bg.theory.xi;
    let rho = a.zip(b, |p, q| p * q);
    let (rtt, rtx, rxx) = if xi != 0.0 {
        (d_t(&d_t(&rho)), d_t(&d_x(&rho)), d_x(&d_x(&rho)))
    } else {
        (rho.clone(), rho.clone(), rho.clone())
    };
    let mut out = GridField::zeros(g);
    for q in 0..g.len() {
        let (htt, htx, hxx) = (h.h_tt.data[q], h.h_tx.data[q], h.h_xx.data[q]);
        if htt == 0.0 && htx == 0.0 && hxx == 0.0 {
            continue;
        }
        let (pt, px, qt, qx) = (at.data[q], ax.data[q], bt.data[q], bx.data[q]);
        let lag = pt * qt - px * qx - m2 * rho.data[q];
        let mut v = htt * pt * qt - htx * (pt * qx + px * qt) + hxx * px * qx - 0.5 * (htt - hxx) * lag;
        if xi != 0.0 {
            let boxr = rtt.data[q] - rxx.data[q];
            v += xi * (htt * rtt.data[q] - 2.0 * htx * rtx.data[q] + hxx * rxx.data[q] - (htt - hxx) * boxr);
        }
        out.data[q] = v;
    }
    out
}

/// Integrand of the tensor form over the slab, for plotting.
pub fn stress_integrand(cfg: &RceConfig, phi: &CauchyData, psi: &CauchyData) -> Result<GridField> {
    let bg = &cfg.background;
    if !bg.is_flat() {
        return Err(Error::Precondition("tensor form is written in the flat chart".into()));
    }
    let (a, b) = (evolve(bg, phi, None)?, evolve(bg, psi, None)?);
    Ok(tensor_density(bg, &cfg.perturbation, &a.values, &b.values))
}
