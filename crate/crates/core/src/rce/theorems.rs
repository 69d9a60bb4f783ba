use super::config::RceConfig;
use super::config::RceSetup;
use super::evolution::{probe_data, Relative};
use super::stress::{stress_pairing_with, StressForm};
use crate::bump::{Bump, VectorBump};
use crate::error::{Error, Result};
use crate::geometry::flow::{lie_derivative_metric, pullback_family, Perturbation, VectorFieldX};
use crate::geometry::spacetime::{Spacetime, Theory};
use crate::geometry::region::Region;
use crate::grid::Grid;
use crate::grid::GridField;
use crate::report::CheckRecord;
use crate::solver::CauchyData;
use crate::tolerances::DIVERGENCE_CONTRAST;

fn check_window(cfg: &RceConfig, levels: Option<(usize, usize)>, what: &str) -> Result<()> {
    if let Some((lo, hi)) = levels {
        let g = cfg.grid();
        let (a, b) = cfg.free_window();
        if !(g.t(lo) > a && g.t(hi) < b) {
            return Err(Error::Precondition(format!("{what} support leaves the region between N- and N+")));
        }
    }
    Ok(())
}

/// Tensor bumps h = b e_tt, b e_tx, b e_xx for b the bump and its two half-width neighbours
/// at xc -+ rx/2, each scaled to `norm`. The neighbours guard the reference scale against an
/// accidental cancellation in one pairing.
pub fn non_gauge_tensors(cfg: &RceConfig, bump: Bump, norm: f64) -> Vec<Perturbation> {
    let g = cfg.grid();
    let z = GridField::zeros(g);
    let halves = [-0.5, 0.5].map(|s| Bump::new(bump.tc, bump.xc + s * bump.rx, bump.rt, 0.5 * bump.rx));
    let mut out = vec![];
    for b in std::iter::once(bump).chain(halves) {
        let b = GridField::from_fn(g, |t, x| b.value(t, x, g.length));
        out.push(Perturbation::new(b.clone(), z.clone(), z.clone()));
        out.push(Perturbation::new(z.clone(), b.clone(), z.clone()));
        out.push(Perturbation::new(z.clone(), z.clone(), b));
    }
    for p in out.iter_mut() {
        let n = p.norm();
        *p = p.scaled(norm / n);
    }
    out
}

/// Divergence-free response: the stress pairing along Lie_X g0 against the largest pairing
/// along non-gauge tensors of the same norm.
pub fn divergence_test(cfg: &RceConfig, phi: &CauchyData, psi: &CauchyData, x: &VectorFieldX) -> Result<CheckRecord> {
    let name = "divergence-free stress";
    let anchor = "relative Cauchy evolution is divergence-free";
    if x.is_zero() {
        return Ok(CheckRecord::bound(name, anchor, 0.0, DIVERGENCE_CONTRAST).with("gauge_pairing", 0.0));
    }
    check_window(cfg, x.support_levels(), "vector field")?;
    let bg = &cfg.background;
    let lie = lie_derivative_metric(x, &bg.metric);
    let gauge = stress_pairing_with(bg, &lie, phi, psi, StressForm::Integral)?.value;
    let bump = match &x.analytic {
        Some(vb) => vb.bump,
        None => return Err(Error::Precondition("contrast tensors need the vector field's bump".into())),
    };
    let mut scale: f64 = 0.0;
    for h in non_gauge_tensors(cfg, bump, lie.norm()) {
        scale = scale.max(stress_pairing_with(bg, &h, phi, psi, StressForm::Integral)?.value.abs());
    }
    Ok(CheckRecord::bound(name, anchor, gauge.abs() / scale.max(1e-300), DIVERGENCE_CONTRAST)
        .with("gauge_pairing", gauge)
        .with("non_gauge_scale", scale))
}

/// Result of comparing F_g with F_{phi_s^* g} on probes.
#[derive(Clone, Debug)]
pub struct DiffeoComparison {
    /// max ||F_g p - F_{g'} p|| / ||p||
    pub deviation: f64,
    /// (F_g - 1) p and (F_{g'} - 1) p per probe
    pub effects: Vec<(CauchyData, CauchyData)>,
}

/// The perturbed spacetime pulled back along the flow of X at parameter s.
pub fn pulled_back_spacetime(cfg: &RceConfig, x: &VectorFieldX, s: f64) -> Result<std::sync::Arc<Spacetime>> {
    let family = cfg.family.as_ref().ok_or_else(|| Error::Precondition("pullback needs the analytic metric family".into()))?;
    let m = pullback_family(x, s, family, cfg.grid())?;
    Spacetime::new(cfg.background.theory, m)
}

pub fn compare_diffeo(cfg: &RceConfig, x: &VectorFieldX, s: f64, probes: &[CauchyData]) -> Result<DiffeoComparison> {
    check_window(cfg, x.support_levels(), "vector field")?;
    let g = Relative::new(cfg, 1.0)?;
    let gp = Relative::with_spacetime(cfg, pulled_back_spacetime(cfg, x, s)?)?;
    let dx = cfg.grid().dx();
    let mut dev: f64 = 0.0;
    let mut effects = vec![];
    for p in probes {
        let a = g.composed(p)?;
        let b = gp.composed(p)?;
        dev = dev.max(a.distance(&b, dx)? / p.norm(dx));
        effects.push((a.sub(p)?, b.sub(p)?));
    }
    Ok(DiffeoComparison { deviation: dev, effects })
}

/// F_g = F_{phi_s^* g} on probes, within `tolerance`.
pub fn diffeo_invariance_test(cfg: &RceConfig, x: &VectorFieldX, s: f64, probes: &[CauchyData], tolerance: f64) -> Result<CheckRecord> {
    let c = compare_diffeo(cfg, x, s, probes)?;
    Ok(CheckRecord::bound("diffeomorphism invariance", "relative Cauchy evolution is diffeomorphism invariant", c.deviation, tolerance)
        .with("flow_parameter", s))
}

/// F_g against F_{phi_s^* g} on the base grid, with the tolerance taken from the discretization
/// error of both effects: e = ||effect_base - effect_coarse|| / 3 at shared nodes (second order),
/// tolerance = 2 (e_g + e_g') / ||p||.
pub fn diffeo_invariance_study(
    setup: &RceSetup,
    theory: Theory,
    grid: Grid,
    field: VectorBump,
    s: f64,
    count: usize,
) -> Result<CheckRecord> {
    let coarse_grid = grid.coarsened()?;
    let coarse = setup.build(theory, coarse_grid)?;
    let setup = RceSetup { reference: Some(coarse.reference), ..setup.clone() };
    let base = setup.build(theory, grid)?;
    let run = |cfg: &RceConfig| -> Result<(DiffeoComparison, Vec<CauchyData>)> {
        let x = VectorFieldX::from_bump(cfg.grid(), field);
        let probes = probe_data(cfg, count)?;
        Ok((compare_diffeo(cfg, &x, s, &probes)?, probes))
    };
    let (cb, pb) = run(&base)?;
    let (cc, _) = run(&coarse)?;
    let dx = coarse_grid.dx();
    let mut tol: f64 = 0.0;
    for (k, ((bg, bgp), (cg, cgp))) in cb.effects.iter().zip(&cc.effects).enumerate() {
        let e_g = every_other(bg).distance(cg, dx)? / 3.0;
        let e_gp = every_other(bgp).distance(cgp, dx)? / 3.0;
        tol = tol.max(2.0 * (e_g + e_gp) / every_other(&pb[k]).norm(dx));
    }
    Ok(CheckRecord::bound("diffeomorphism invariance", "relative Cauchy evolution is diffeomorphism invariant", cb.deviation, tol)
        .with("flow_parameter", s)
        .with("coarse_deviation", cc.deviation))
}

/// Data sampled at the even nodes.
fn every_other(d: &CauchyData) -> CauchyData {
    let pick = |v: &[f64]| v.iter().step_by(2).copied().collect::<Vec<f64>>();
    CauchyData { phi: pick(&d.phi), pi: pick(&d.pi), slice_time: d.slice_time }
}

/// Random compactly supported gauge fields centred on the probe bumps (probe_data with
/// `probes` functions), so that the probe solutions actually meet them.
pub fn gauge_fields(cfg: &RceConfig, probes: usize, count: usize, seed: u64) -> Result<Vec<VectorBump>> {
    use rand::{Rng, SeedableRng};
    let g = cfg.grid();
    let (a, b) = cfg.free_window();
    let bumps = crate::probe::probe_bumps(&Region::strip(a, b), g, probes)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let p = bumps[k % bumps.len()];
        let tc = 0.5 * (a + b) + rng.gen_range(-0.1..0.1) * (b - a);
        let rt = (tc - a).min(b - tc) * rng.gen_range(0.8..0.95);
        let xc = p.xc + rng.gen_range(-0.3..0.3) * p.rx;
        let rx = p.rx * rng.gen_range(1.3..1.8);
        let amp = |r: &mut rand_chacha::ChaCha8Rng| r.gen_range(0.15..0.4) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (a_t, a_x) = (amp(&mut rng), amp(&mut rng));
        out.push(VectorBump { bump: Bump::new(tc, xc, rt, rx), a_t, a_x });
    }
    Ok(out)
}
