use super::propagate::{e_causal, CauchyData, SolutionField};
use super::testfn::TestFunction;
use crate::error::{Error, Result};
use crate::geometry::spacetime::Spacetime;
use std::sync::Arc;

/// sigma(Ef, Eh) = sum f (Eh) sqrt(-g) dt dx.
pub fn symplectic_volume(st: &Arc<Spacetime>, f: &TestFunction, h: &TestFunction) -> Result<f64> {
    let eh = e_causal(st, h)?;
    pair_volume(st, f, &eh)
}

/// sum f * phi * sqrt(-g) dt dx for a precomputed solution phi.
pub fn pair_volume(st: &Spacetime, f: &TestFunction, phi: &SolutionField) -> Result<f64> {
    if f.grid() != st.grid || phi.values.grid != st.grid {
        return Err(Error::SpaceMismatch("pairing across grids".into()));
    }
    Ok(f.weighted_dot(&phi.values, &st.coeffs.sg))
}

/// Canonical momentum sqrt(-g)(g^tt pi + g^tx d_x phi) on the data's level.
pub fn momentum(st: &Spacetime, data: &CauchyData) -> Result<Vec<f64>> {
    let g = st.grid;
    let j = g.level_of(data.slice_time)?;
    let n = g.n_x;
    let dx = g.dx();
    let c = &st.coeffs;
    Ok((0..n)
        .map(|i| {
            let d = (data.phi[(i + 1) % n] - data.phi[(i + n - 1) % n]) / (2.0 * dx);
            c.att[j * n + i] * data.pi[i] + c.atx[j * n + i] * d
        })
        .collect())
}

/// sigma = sum (phi1 P2 - phi2 P1) dx on one slice; sign matches the volume form for E = E^adv - E^ret.
pub fn symplectic_surface(d1: &CauchyData, d2: &CauchyData, st: &Spacetime, slice_time: f64) -> Result<f64> {
    if (d1.slice_time - slice_time).abs() > 1e-9 || (d2.slice_time - slice_time).abs() > 1e-9 {
        return Err(Error::SpaceMismatch(format!(
            "data on t = {} and t = {}, requested t = {slice_time}",
            d1.slice_time, d2.slice_time
        )));
    }
    if d1.phi.len() != st.grid.n_x || d2.phi.len() != st.grid.n_x {
        return Err(Error::SpaceMismatch("data length differs from n_x".into()));
    }
    if d1 == d2 {
        return Ok(0.0);
    }
    let p1 = momentum(st, d1)?;
    let p2 = momentum(st, d2)?;
    let s: f64 = (0..d1.phi.len()).map(|i| d1.phi[i] * p2[i] - d2.phi[i] * p1[i]).sum();
    Ok(s * st.grid.dx())
}
