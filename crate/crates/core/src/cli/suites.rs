//! Check suites. Each suite measures a list of quantities on one grid; the driver turns
//! them into records against (possibly overridden) tolerances and, when asked, into
//! convergence rows across refinement levels.

use super::config::{RunConfig, Suite, ToleranceMode};
use super::io;
use crate::algebra::*;
use crate::bump::{Bump, VectorBump};
use crate::error::{Error, Result};
use crate::geometry::region::Direction;
use crate::geometry::*;
use crate::grid::Grid;
use crate::probe::probe_functions;
use crate::rce::*;
use crate::report::{CheckRecord, ConvergenceRow, Report, SuiteTiming};
use crate::solver::{e_ret, symplectic_volume, CauchyData, TestFunction};
use crate::states::*;
use crate::tolerances::*;
use num_complex::Complex64;
use serde_json::{Map, Value};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

pub const WEYL_CONVENTION: &str =
    "omega(W(Ef)) = exp(-w2(f,f)/2), w2(f,h) - w2(h,f) = i sigma(Ef,Eh); lambda = 1/2 fixed by the mixed-derivative test";

/// One measured quantity before a tolerance is attached.
#[derive(Clone, Debug)]
pub struct Measure {
    pub name: String,
    pub anchor: String,
    pub value: f64,
    pub pinned: f64,
    /// Discretization-limited: ask for second-order decay under refinement.
    pub converges: bool,
    pub inputs: Map<String, Value>,
}

impl Measure {
    fn new(name: &str, anchor: &str, value: f64, pinned: f64) -> Measure {
        Measure { name: name.into(), anchor: anchor.into(), value, pinned, converges: false, inputs: Map::new() }
    }
    fn converging(mut self) -> Measure {
        self.converges = true;
        self
    }
    fn with(mut self, k: &str, v: impl Into<Value>) -> Measure {
        self.inputs.insert(k.into(), v.into());
        self
    }
    /// Adopt a record computed by a library check, renamed.
    fn from_record(name: &str, r: CheckRecord, pinned: f64) -> Measure {
        Measure { name: name.into(), anchor: r.anchor, value: r.measured, pinned, converges: false, inputs: r.inputs }
    }

    pub fn record(&self, cfg: &RunConfig) -> CheckRecord {
        let mut r = CheckRecord::bound(&self.name, &self.anchor, self.value, cfg.tolerances.resolve(&self.name, self.pinned));
        r.inputs = self.inputs.clone();
        r
    }
}

/// Where a suite may write solution fields.
pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub n_x: usize,
    /// false on convergence pre-pass levels: skip checks that do not converge
    pub full: bool,
    pub dump: Option<&'a Path>,
}

impl Ctx<'_> {
    fn grid(&self) -> Result<Grid> {
        self.cfg.grid_at(self.n_x)
    }
    fn flat(&self) -> Result<Arc<Spacetime>> {
        Spacetime::flat(self.cfg.theory, self.grid()?)
    }
    fn k_max(&self) -> usize {
        self.n_x / 2
    }
}

pub fn anchor_of(suite: Suite) -> &'static str {
    match suite {
        Suite::Functor => "functor: identity and composition",
        Suite::Causality => "causality: separated regions commute",
        Suite::Timeslice => "time-slice axiom",
        Suite::Net => "net of local algebras",
        Suite::BuField => "Borchers-Uhlmann field and its naturality",
        Suite::RceInvariance | Suite::RceTriple => "relative Cauchy evolution",
        Suite::RceDerivative => "metric derivative of the relative Cauchy evolution",
        Suite::RceDivergence => "stress pairing is divergence free",
        Suite::States => "quasifree state calibration",
        Suite::Wick => "Wick square and its cocycle",
        Suite::Geometry => "lattice geometry",
    }
}

pub fn measure(suite: Suite, ctx: &Ctx) -> Result<Vec<Measure>> {
    match suite {
        Suite::Functor => functor(ctx),
        Suite::Causality => causality(ctx),
        Suite::Timeslice => timeslice(ctx),
        Suite::Net => net(ctx),
        Suite::BuField => bu(ctx),
        Suite::RceInvariance => rce_invariance(ctx, true),
        Suite::RceTriple => rce_invariance(ctx, false),
        Suite::RceDerivative => rce_derivative(ctx),
        Suite::RceDivergence => rce_divergence(ctx),
        Suite::States => states(ctx),
        Suite::Wick => wick(ctx),
        Suite::Geometry => geometry(ctx),
    }
}

/// Does the suite have any quantity with an order requirement.
pub fn has_orders(suite: Suite) -> bool {
    !matches!(suite, Suite::Net | Suite::BuField | Suite::States | Suite::Wick)
}

fn steps(g: Grid, s: (isize, isize)) -> (f64, f64) {
    (s.0 as f64 * g.dt, s.1 as f64 * g.dx())
}

fn functor(ctx: &Ctx) -> Result<Vec<Measure>> {
    let st = ctx.flat()?;
    let g = st.grid;
    let mut out = vec![];
    if ctx.full {
        out.push(Measure::from_record("functor identity", check_identity(&st)?, 0.0));
        let dom = ctx.cfg.region(&ctx.cfg.functor_domain)?.clone();
        let (t1, x1) = steps(g, ctx.cfg.functor_shifts[0]);
        let (t2, x2) = steps(g, ctx.cfg.functor_shifts[1]);
        let psi1 = Embedding::translation(st.clone(), st.clone(), dom, t1, x1)?;
        let psi2 = Embedding::translation(st.clone(), st.clone(), psi1.image.clone(), t2, x2)?;
        out.push(Measure::from_record("functor composition (translations)", check_functor_law(&psi1, &psi2)?, FUNCTOR_ALGEBRAIC));
        let m = algebra_morphism(&psi1)?;
        out.push(
            Measure::new("morphism certificate", "functor: morphisms preserve sigma", m.certificate, CERTIFICATE_REL)
                .with("injectivity", m.injectivity),
        );
    }
    // nested sub-slabs: the maps go through the strip propagators
    let nt = g.n_t;
    let mid = st.sub_slab(nt * 5 / 64, nt * 59 / 64)?;
    let small = mid.sub_slab(nt * 5 / 64, nt * 45 / 64)?;
    let psi1 = Embedding::inclusion(small, mid.clone())?;
    let psi2 = Embedding::inclusion(mid, st)?;
    out.push(Measure::from_record("functor composition (inclusions)", check_functor_law(&psi1, &psi2)?, PDE_REL).converging());
    Ok(out)
}

fn causality(ctx: &Ctx) -> Result<Vec<Measure>> {
    let st = ctx.flat()?;
    let g = st.grid;
    let cfg = ctx.cfg;
    let (a, b) = (cfg.region(&cfg.causality_pair.0)?.clone(), cfg.region(&cfg.causality_pair.1)?.clone());
    let p1 = Embedding::translation(st.clone(), st.clone(), a, 0.0, 0.0)?;
    let p2 = Embedding::translation(st.clone(), st.clone(), b, 0.0, 0.0)?;
    let mut out = vec![Measure::from_record("causal commutation", check_causality(&p1, &p2)?, PDE_REL).converging()];

    // sigma from the surface form against the volume form
    let fs = probe_functions(&Region::Whole, g, 3)?;
    let space = SolutionSpace::new(st.clone());
    let ids = fs.iter().map(|f| space.register_generator(f)).collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let vol = symplectic_volume(&st, &fs[i], &fs[j])?;
        worst = worst.max((space.sigma(ids[i], ids[j])? - vol).abs());
        scale = scale.max(vol.abs());
    }
    out.push(Measure::new("sigma surface vs volume", "symplectic form is slice independent", worst / scale, PDE_REL).converging());

    Ok(out)
}

fn geometry(ctx: &Ctx) -> Result<Vec<Measure>> {
    let cfg = ctx.cfg;
    let g = ctx.grid()?;
    let mut out = vec![];
    // conformal factor with closed-form curvature -2 e^{-2w} (w_tt - w_xx)
    let a = 0.2;
    let w = |t: f64, x: f64| a * x.sin() * (0.5 * t).cos();
    let m = Metric::from_fn(g, Provenance::Perturbed, |t, x| {
        let e = (2.0 * w(t, x)).exp();
        [e, 0.0, -e]
    })?;
    let r = scalar_curvature(&m)?;
    let mut err: f64 = 0.0;
    for j in 2..g.n_t - 2 {
        for i in 0..g.n_x {
            let v = w(g.t(j), g.x(i));
            err = err.max((r.at(j, i) + 2.0 * (-2.0 * v).exp() * (-0.25 * v + v)).abs());
        }
    }
    out.push(Measure::new("conformal curvature", "scalar curvature of a conformally flat metric", err, PDE_REL).converging());

    // pulled back flat metric: R vanishes up to truncation error (rms over the slab)
    let span = g.t_end() - g.t0;
    let (at, ax) = cfg.diffeo_amplitudes;
    let wide = VectorBump { bump: Bump::new(g.t0 + 0.5 * span, 0.5 * g.length, 0.45 * span, 0.49 * g.length), a_t: at, a_x: ax };
    let pulled = pullback_metric(&VectorFieldX::from_bump(g, wide), 0.5, &Metric::flat(g))?;
    let r = scalar_curvature(&pulled)?;
    let mut ss = 0.0;
    for j in 2..g.n_t - 2 {
        ss += r.row(j).iter().map(|v| v * v).sum::<f64>();
    }
    out.push(
        Measure::new("pulled-back flat curvature", "curvature is a scalar: pulled-back flat metric is flat", (ss * g.dt * g.dx()).sqrt(), PDE_REL)
            .converging(),
    );

    // Lie derivative on the grid against the closed form
    let vb = VectorBump { bump: Bump::new(g.t0 + 0.5 * span, 2.0, 0.38 * span, 0.41 * g.length), a_t: 0.4, a_x: 0.7 };
    let h = lie_derivative_metric(&VectorFieldX::from_bump(g, vb), &Metric::flat(g));
    let mut lie: f64 = 0.0;
    for j in 1..g.n_t - 1 {
        for i in 0..g.n_x {
            let want = crate::geometry::metric::lie_flat(&vb, g.t(j), g.x(i), g.length);
            let got = h.at(j, i);
            lie = (0..3).fold(lie, |e, k| e.max((want[k] - got[k]).abs()));
        }
    }
    out.push(Measure::new("lie derivative", "Lie derivative of the metric", lie, PDE_REL).converging());

    // outside the causal hull of a source the retarded solution is at discretization level
    let v = 0.2;
    let cmax = 1.0 + v;
    let gt = Grid::with_courant(g.n_t, g.n_x, g.t0, g.length, cfg.courant / cmax)?;
    let m = Metric::from_fn(gt, Provenance::Perturbed, |_, _| [1.0 - v * v, v, -1.0])?;
    let tilted = Spacetime::new(cfg.theory, m)?;
    let t_mid = gt.t0 + 0.15 * (gt.t_end() - gt.t0);
    let src = TestFunction::bump(gt, Bump::new(t_mid, 3.0, 0.4, 0.4), 1.0)?;
    let u = e_ret(&tilted, &src)?;
    let hull = causal_hull(&Region::Rect { t_a: t_mid - 0.4, t_b: t_mid + 0.4, xc: 3.0, half_width: 0.4 }, &tilted, Direction::Future);
    let mut leak: f64 = 0.0;
    for j in 0..gt.n_t {
        for i in 0..gt.n_x {
            if hull.margin(gt.t(j), gt.x(i)) > 4.0 * gt.dx() {
                leak = leak.max(u.values.at(j, i).abs());
            }
        }
    }
    out.push(
        Measure::new("causal hull leakage", "supports propagate inside the causal future", leak / u.values.max_abs(), PDE_REL)
            .converging()
            .with("max_speed", cmax),
    );
    if let Some(dir) = ctx.dump {
        io::write_grid_field(dir, "causality_tilted_eret.csv", &u.values, "value")?;
    }
    Ok(out)
}

fn timeslice(ctx: &Ctx) -> Result<Vec<Measure>> {
    let st = ctx.flat()?;
    let cfg = ctx.cfg;
    let strip = cfg.region(&cfg.timeslice_strip)?;
    let f = TestFunction::bump(st.grid, cfg.timeslice_source, 1.0)?;
    let ts = time_slice(&st, strip, &f, 2)?;
    if let Some(dir) = ctx.dump {
        io::write_grid_field(dir, "timeslice_ef.csv", &crate::solver::e_causal(&st, &f)?.values, "value")?;
        io::write_grid_field(dir, "timeslice_eh.csv", &crate::solver::e_causal(&st, &ts.h)?.values, "value")?;
    }
    Ok(vec![
        Measure::new("time slice", "time-slice axiom", ts.deviation, PDE_REL).converging().with("support_inside", ts.support_inside),
        Measure::new("time slice support", "time-slice axiom", if ts.support_inside { 0.0 } else { 1.0 }, 0.0),
    ])
}

fn net(ctx: &Ctx) -> Result<Vec<Measure>> {
    if !ctx.full {
        return Ok(vec![]);
    }
    let st = ctx.flat()?;
    let g = st.grid;
    let cfg = ctx.cfg;
    let space = SolutionSpace::new(st.clone());
    let small = cfg.region(&cfg.net_region)?.clone();
    let n = net_algebra(&small, &space)?;
    let far = net_algebra(cfg.region(&cfg.net_far)?, &space)?;
    let kappa = Embedding::translation(st.clone(), st.clone(), small, 6.0 * g.dt, 20.0 * g.dx())?;
    Ok(vec![
        Measure::from_record("net isotony (diamond)", check_isotony(&n, cfg.region(&cfg.net_big)?, 2)?, PDE_REL),
        Measure::from_record("net isotony (strip)", check_isotony(&n, cfg.region(&cfg.net_strip)?, 2)?, PDE_REL),
        Measure::from_record("net covariance", check_covariance(&n, &kappa)?, FUNCTOR_ALGEBRAIC),
        Measure::from_record("net commutativity", check_net_commutativity(&n, &far)?, PDE_REL),
    ])
}

fn bu(ctx: &Ctx) -> Result<Vec<Measure>> {
    if !ctx.full {
        return Ok(vec![]);
    }
    let st = ctx.flat()?;
    let g = st.grid;
    let c = |re: f64| Complex64::new(re, 0.0);
    let anchor = "Borchers-Uhlmann algebra and the field map";
    let dom = Region::Diamond { tc: 3.0, xc: 2.0, radius: 1.4 };
    let psi1 = Embedding::translation(st.clone(), st.clone(), dom, 2.0 * g.dt, 5.0 * g.dx())?;
    let psi2 = Embedding::translation(st.clone(), st.clone(), psi1.image.clone(), 3.0 * g.dt, -7.0 * g.dx())?;
    let fs = probe_functions(&psi1.domain, g, 3)?;
    let (a, b, k) = (bu_field(&fs[0], 4)?, bu_field(&fs[1], 4)?, bu_field(&fs[2], 4)?);
    let x = a.add(&b.scale(Complex64::new(0.0, 1.0)))?;
    let y = k.mul(&a)?.add(&BUElement::scalar(4, c(2.0)))?;
    let scale = x.norm1().max(y.norm1()).max(1.0);
    let mut star: f64 = bu_star(&bu_star(&x)).distance(&x)?;
    star = star.max(bu_star(&bu_mul(&x, &y)?).distance(&bu_mul(&bu_star(&y), &bu_star(&x))?)?);
    let assoc = bu_mul(&bu_mul(&x, &y)?, &k)?.distance(&bu_mul(&x, &bu_mul(&y, &k)?)?)?;
    let z = a.mul(&b)?.add(&a.scale(c(3.0)))?;
    let functorial = bu_push_forward(&psi2, &bu_push_forward(&psi1, &z)?)?.distance(&bu_push_forward(&psi1.then(&psi2)?, &z)?)?;
    let natural = bu_push_forward(&psi1, &a)?.distance(&bu_field(&psi1.push_forward(&fs[0])?, 4)?)?;
    let hom = bu_push_forward(&psi1, &a.mul(&b)?)?.distance(&bu_push_forward(&psi1, &a)?.mul(&bu_push_forward(&psi1, &b)?)?)?
        .max(bu_push_forward(&psi1, &bu_star(&z))?.distance(&bu_star(&bu_push_forward(&psi1, &z)?))?);

    // the commutator ideal is invisible to a state
    let vac = vacuum_state(ctx.cfg.theory.mass, g.length, ctx.k_max())?;
    let ff = probe_functions(&Region::Whole, g, 3)?;
    let (pf, ph, pk) = (bu_field(&ff[0], 4)?, bu_field(&ff[1], 4)?, bu_field(&ff[2], 4)?);
    let s = symplectic_volume(&st, &ff[0], &ff[1])?;
    let j = pf.mul(&ph)?.sub(&ph.mul(&pf)?)?.sub(&BUElement::scalar(4, Complex64::new(0.0, s)))?;
    let bare = quasifree_eval_bu(vac.as_ref(), &j)?.norm() / s.abs();
    let kjk = quasifree_eval_bu(vac.as_ref(), &pk.mul(&j)?.mul(&pk)?)?.norm()
        / (quasifree_eval_bu(vac.as_ref(), &pk.mul(&pk)?)?.norm() * s.abs());
    Ok(vec![
        Measure::new("bu star laws", anchor, star / scale, BU_EXACT),
        Measure::new("bu associativity", anchor, assoc / scale, BU_EXACT),
        Measure::new("bu push-forward functorial", anchor, functorial, BU_EXACT),
        Measure::new("bu field naturality", "the field is a natural transformation", natural, BU_EXACT),
        Measure::new("bu push-forward homomorphism", anchor, hom / scale, BU_EXACT),
        Measure::new("commutator ideal annihilated", "states vanish on the field-equation and commutator ideal", bare.max(kjk), CCR_REL)
            .with("k_max", ctx.k_max() as u64),
    ])
}

pub fn rce_setup(cfg: &RunConfig, g: &Grid) -> RceSetup {
    let mut s = RceSetup::standard(g, cfg.rce_amplitude);
    let span = g.t_end() - g.t0;
    s.n_minus = (g.t0 + cfg.rce_n_minus.0 * span, g.t0 + cfg.rce_n_minus.1 * span);
    s.n_plus = (g.t0 + cfg.rce_n_plus.0 * span, g.t0 + cfg.rce_n_plus.1 * span);
    s.smoothstep_order = cfg.rce_smoothstep;
    let bump = match &s.family {
        MetricFamily::TensorBump { bump, .. } => *bump,
        _ => unreachable!("standard setup is a tensor bump"),
    };
    match cfg.rce_family.as_str() {
        "conformal-bump" => s.with_family(MetricFamily::ConformalBump { eps: cfg.rce_amplitude, bump }),
        "flat" => s.with_family(MetricFamily::Flat),
        _ => s,
    }
}

pub fn rce_config(cfg: &RunConfig, n_x: usize) -> Result<RceConfig> {
    let g = cfg.grid_at(n_x)?;
    rce_setup(cfg, &g).build(cfg.theory, g)
}

fn rel_l2(a: &CauchyData, b: &CauchyData, dx: f64) -> Result<f64> {
    Ok(a.distance(b, dx)? / a.norm(dx).max(b.norm(dx)).max(1e-300))
}

fn rce_invariance(ctx: &Ctx, with_diffeo: bool) -> Result<Vec<Measure>> {
    let cfg = ctx.cfg;
    let rc = rce_config(cfg, ctx.n_x)?;
    let g = rc.grid();
    let dx = g.dx();
    let rel = Relative::new(&rc, 1.0)?;
    let ps = probe_data(&rc, cfg.rce_probes)?;
    let anchor = "relative Cauchy evolution: three constructions agree";
    let (mut triple, mut moved): (f64, f64) = (0.0, f64::INFINITY);
    let mut fg = vec![];
    for p in &ps {
        let a = rel.composed(p)?;
        let b = rel.closed_form(p)?;
        let c = rel.direct(p)?;
        triple = triple.max(rel_l2(&a, &b, dx)?).max(rel_l2(&a, &c, dx)?).max(rel_l2(&b, &c, dx)?);
        moved = moved.min(rel_l2(&a, p, dx)?);
        fg.push(a);
    }
    let flat_rc = rc.with_perturbation(Perturbation::zero(g), Some(MetricFamily::Flat))?;
    let mut ident: f64 = 0.0;
    for p in &ps {
        ident = ident.max(rel_l2(&rce_composed(&flat_rc, p)?, p, dx)?);
    }
    let sp = SolutionSpace::at_slice(rc.background.clone(), rc.reference)?;
    let (mut dsig, mut scale): (f64, f64) = (0.0, 0.0);
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let s0 = sp.sigma_data(&ps[i], &ps[j])?;
            dsig = dsig.max((sp.sigma_data(&fg[i], &fg[j])? - s0).abs());
            scale = scale.max(s0.abs());
        }
    }
    let mut out = vec![
        Measure::new("triple agreement", anchor, triple, PDE_REL).converging().with("min_relative_change", moved),
        Measure::new("flat relative evolution is identity", "relative Cauchy evolution of the background", ident, PDE_REL).converging(),
        Measure::new("relative evolution symplectic", "relative Cauchy evolution preserves sigma", dsig / scale.max(1e-300), PDE_REL)
            .converging(),
    ];
    if with_diffeo {
        let gx = cfg.grid_at(ctx.n_x)?;
        let span = gx.t_end() - gx.t0;
        let (at, ax) = cfg.diffeo_amplitudes;
        if ctx.full {
            let field = VectorBump { bump: Bump::new(gx.t0 + 0.5 * span, 2.5, 0.12 * span, 1.2), a_t: at, a_x: ax };
            let setup = rce_setup(cfg, &gx.coarsened()?);
            let rec = diffeo_invariance_study(&setup, cfg.theory, gx, field, cfg.diffeo_s, cfg.rce_probes)?;
            let tol = rec.tolerance;
            out.push(Measure::from_record("diffeomorphism invariance", rec, tol));
        }
    }
    Ok(out)
}

fn rce_derivative(ctx: &Ctx) -> Result<Vec<Measure>> {
    let rc = rce_config(ctx.cfg, ctx.n_x)?;
    let dx = rc.grid().dx();
    let ps = probe_data(&rc, ctx.cfg.rce_probes)?;
    let mut out = vec![];
    if ctx.full {
        let (mut worst, mut noise): (f64, f64) = (0.0, 0.0);
        for p in &ps {
            let fd = delta_f(&rc, p, DeltaFMode::FiniteDifference)?;
            if fd.inconclusive {
                return Err(Error::Extrapolation("finite-difference derivative inconclusive".into()));
            }
            let an = delta_f(&rc, p, DeltaFMode::Analytic)?;
            worst = worst.max(rel_l2(&fd.data, &an.data, dx)?);
            noise = noise.max(fd.noise_floor);
        }
        out.push(
            Measure::new("metric derivative fd vs analytic", "derivative of the relative evolution is E(dK)", worst, PDE_REL.max(noise))
                .with("noise_floor", noise),
        );
    }
    let sp = SolutionSpace::at_slice(rc.background.clone(), rc.reference)?;
    let (mut ab, mut ca, mut sig): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..ps.len() - 1 {
        let (p, q) = (&ps[k], &ps[k + 1]);
        let v = |f| stress_pairing(&rc, p, q, f).map(|x| x.value);
        let (a, b, c) = (v(StressForm::Propagator)?, v(StressForm::Integral)?, v(StressForm::Tensor)?);
        let r = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-300);
        ab = ab.max(r(b, a));
        ca = ca.max(r(c, a));
        let df = delta_f(&rc, p, DeltaFMode::Analytic)?.data;
        sig = sig.max(r(sp.sigma_data(&df, q)?, -a));
    }
    let anchor = "stress-energy pairing";
    out.push(Measure::new("stress propagator vs integral", anchor, ab, PDE_REL).converging());
    out.push(Measure::new("stress tensor vs propagator", anchor, ca, PDE_REL).converging());
    out.push(Measure::new("sigma of derivative vs stress", anchor, sig, PDE_REL).converging());
    Ok(out)
}

fn rce_divergence(ctx: &Ctx) -> Result<Vec<Measure>> {
    let rc = rce_config(ctx.cfg, ctx.n_x)?;
    let ps = probe_data(&rc, 2)?;
    let fields = gauge_fields(&rc, 2, ctx.cfg.divergence_fields, ctx.cfg.divergence_seed)?;
    let mut worst: f64 = 0.0;
    for vb in &fields {
        let r = divergence_test(&rc, &ps[0], &ps[1], &VectorFieldX::from_bump(rc.grid(), *vb))?;
        worst = worst.max(r.measured);
    }
    Ok(vec![Measure::new("gauge pairing contrast", "stress pairing is divergence free", worst, DIVERGENCE_CONTRAST)
        .converging()
        .with("gauge_fields", fields.len() as u64)
        .with("seed", ctx.cfg.divergence_seed)])
}

/// Five staggered probes away from the slab ends.
pub fn state_probes(g: Grid, count: usize, amp: f64) -> Result<Vec<TestFunction>> {
    let span = g.t_end() - g.t0;
    (0..count)
        .map(|k| {
            let u = (k as f64 * 0.618_033_988_75).fract();
            let b = Bump::new(g.t0 + span * (0.41 + 0.2 * u), g.length * (k as f64 + 0.3) / count as f64, 0.8 + 0.1 * (k % 5) as f64, 1.0);
            TestFunction::bump(g, b, amp)
        })
        .collect()
}

fn states(ctx: &Ctx) -> Result<Vec<Measure>> {
    if !ctx.full {
        return Ok(vec![]);
    }
    let st = ctx.flat()?;
    let g = st.grid;
    let (m, l) = (ctx.cfg.theory.mass, g.length);
    let fs = state_probes(g, ctx.cfg.states_probes, 1.0)?;
    let vac = vacuum_state(m, l, ctx.k_max())?;
    let mut ccr = ccr_deviation(&vac, &st, &fs)?;
    for &beta in &ctx.cfg.states_betas {
        ccr = ccr.max(ccr_deviation(thermal_state(m, l, ctx.k_max(), beta)?.as_ref(), &st, &fs)?);
    }
    let strong = state_probes(g, ctx.cfg.states_probes, 3.0)?;
    let floor = |lambda: f64| -> Result<f64> {
        let (min, tr) = gram_spectrum(&vac, &st, &strong, lambda)?;
        Ok(min / tr)
    };
    let half = floor(0.5)?;
    let control = floor(0.125)?;
    // mixed derivative of the generating function reproduces w2 only at lambda = 1/2
    let (f, h) = (&fs[0], &fs[1]);
    let s = symplectic_volume(&st, f, h)?;
    let w = vac.two_point_matrix(&[f.clone(), h.clone()])?;
    let gen = |t: f64, u: f64| {
        let ws = (t * t * w[(0, 0)] + u * u * w[(1, 1)] + t * u * (w[(0, 1)] + w[(1, 0)])).re;
        Complex64::from_polar((-0.5 * ws).exp(), -0.5 * t * u * s)
    };
    let e = 1e-3;
    let mixed = (gen(e, e) - gen(e, -e) - gen(-e, e) + gen(-e, -e)) / (4.0 * e * e);
    let want = -vac.two_point(f, h)?;
    let anchor = "quasifree states";
    Ok(vec![
        Measure::new("ccr antisymmetric part", "two-point function antisymmetric part is i sigma", ccr, CCR_REL)
            .with("probes", fs.len() as u64)
            .with("states", 1 + ctx.cfg.states_betas.len() as u64),
        Measure::new("gram positivity", anchor, (-half).max(0.0), GRAM_FLOOR).with("min_over_trace", half).with("convention", WEYL_CONVENTION),
        Measure::new("gram control (lambda 1/8 not positive)", anchor, control, -GRAM_FLOOR),
        Measure::new("weyl normalization", anchor, (mixed - want).norm() / want.norm(), CCR_REL),
    ])
}

fn label(beta: Option<f64>) -> String {
    match beta {
        None => "vacuum".into(),
        Some(b) => format!("thermal-beta{b}"),
    }
}

fn wick(ctx: &Ctx) -> Result<Vec<Measure>> {
    if !ctx.full {
        return Ok(vec![]);
    }
    let g = ctx.grid()?;
    let (m, l) = (ctx.cfg.theory.mass, g.length);
    let mut states = vec![(None, vacuum_state(m, l, ctx.k_max())?)];
    for &b in &ctx.cfg.wick_betas {
        states.push((Some(b), thermal_state(m, l, ctx.k_max(), b)?));
    }
    let b = |x: &QuasifreeState, y: &QuasifreeState| cocycle(x, y, &g).map(|w| w.values);
    let mut cyc: f64 = 0.0;
    for i in 0..states.len() {
        for j in 0..states.len() {
            for k in 0..states.len() {
                let s = b(&states[i].1, &states[j].1)?.add(&b(&states[j].1, &states[k].1)?).add(&b(&states[k].1, &states[i].1)?);
                cyc = cyc.max(s.max_abs());
            }
        }
    }
    let mut triv: f64 = 0.0;
    let mut shift: f64 = 0.0;
    let mut noise: f64 = 0.0;
    for &mu in &ctx.cfg.wick_mu {
        let fields = states.iter().map(|(_, s)| wick_square(s, mu, &g)).collect::<Result<Vec<_>>>()?;
        noise = fields.iter().map(|f| f.noise).fold(noise, f64::max);
        for i in 0..states.len() {
            for j in 0..states.len() {
                if i != j {
                    let c = b(&states[i].1, &states[j].1)?;
                    triv = triv.max(fields[i].sub(&fields[j])?.sub(&c).max_abs() / c.max_abs());
                }
            }
        }
        for &mu2 in &ctx.cfg.wick_mu {
            for (_, s) in &states {
                let d = wick_square(s, mu2, &g)?.sub(&wick_square(s, mu, &g)?)?;
                let want = (mu2 / mu).ln() / (2.0 * std::f64::consts::PI);
                shift = d.data.iter().fold(shift, |a, v| a.max((v - want).abs()));
            }
        }
    }
    let mut oracle: f64 = 0.0;
    for (beta, s) in &states[1..] {
        let v = b(s, &states[0].1)?.at(g.n_t / 2, 0);
        oracle = oracle.max((v - thermal_cocycle_oracle(m, l, beta.expect("thermal"))).abs());
    }
    let mut vac_err: f64 = 0.0;
    for &mu in &ctx.cfg.wick_mu {
        let f = hadamard_diagonal(&states[0].1, mu, &g)?;
        vac_err = vac_err.max((f.range().0 - vacuum_hadamard_oracle(m, l, mu, 2_000_000)).abs());
    }
    let anchor = "Wick square: state-independent cocycle";
    Ok(vec![
        Measure::new("cocycle identity", anchor, cyc, COCYCLE),
        Measure::new("cocycle trivialization", "Hadamard differences trivialize the cocycle", triv, TRIVIALIZATION_REL)
            .with("extrapolation_noise", noise),
        Measure::new("mu shift", "renormalization scale moves the Wick square by a constant", shift, MU_SHIFT),
        Measure::new("thermal cocycle oracle", anchor, oracle, THERMAL_ORACLE),
        Measure::new("vacuum Hadamard oracle", "Hadamard point splitting", vac_err, THERMAL_ORACLE),
    ])
}

/// Measures of one suite on one grid, errors turned into a failed measure.
fn measure_or_fail(suite: Suite, ctx: &Ctx) -> Vec<Measure> {
    match measure(suite, ctx) {
        Ok(m) => m,
        Err(e) => {
            let mut m = Measure::new(&format!("{suite} (n_x = {})", ctx.n_x), anchor_of(suite), f64::NAN, 0.0);
            m.inputs.insert("error".into(), Value::String(e.to_string()));
            vec![m]
        }
    }
}

/// Orders across levels for every converging measure present on all of them.
pub fn convergence(levels: &[usize], runs: &[Vec<Measure>]) -> (Vec<ConvergenceRow>, Vec<CheckRecord>) {
    let (mut rows, mut recs) = (vec![], vec![]);
    let Some(last) = runs.last() else { return (rows, recs) };
    for m in last.iter().filter(|m| m.converges) {
        let vals: Vec<f64> = runs.iter().filter_map(|r| r.iter().find(|x| x.name == m.name).map(|x| x.value)).collect();
        if vals.len() != runs.len() {
            recs.push(CheckRecord::failed(&format!("{} order", m.name), &m.anchor, "missing on a refinement level"));
            continue;
        }
        let rec = CheckRecord::order(&format!("{} order", m.name), &m.anchor, &vals).with("n_x", levels.to_vec());
        rows.push(ConvergenceRow {
            name: m.name.clone(),
            n_x: levels.to_vec(),
            measured: vals.clone(),
            orders: observed_orders(&vals),
            pass: rec.pass,
        });
        recs.push(rec);
    }
    (rows, recs)
}

fn base_report(cfg: &RunConfig) -> Report {
    let mut echo = cfg.echo();
    echo.insert("weyl.convention".into(), Value::String(WEYL_CONVENTION.into()));
    echo.insert(
        "tolerance.mode".into(),
        Value::String(match cfg.tolerances.mode {
            ToleranceMode::Auto => "auto".into(),
            ToleranceMode::Explicit => "explicit".into(),
        }),
    );
    Report::new(echo)
}

/// Grids of the convergence pre-pass. Geometry quantities built from compact bumps only
/// settle into their asymptotic order from n_x = 128 on, and are cheap, so they are
/// refined instead of coarsened.
pub fn prepass_levels(suite: Suite, n_x: usize) -> [usize; 3] {
    match suite {
        Suite::Geometry => [n_x / 2, n_x, 2 * n_x],
        _ => [n_x / 4, n_x / 2, n_x],
    }
}

/// Runs the suites on the base grid; in auto mode with a convergence pre-pass.
pub fn verify(cfg: &RunConfig, suites: &[Suite], dump: Option<&Path>) -> Report {
    let mut report = base_report(cfg);
    for &suite in suites {
        let clock = Instant::now();
        let base = measure_or_fail(suite, &Ctx { cfg, n_x: cfg.n_x, full: true, dump });
        report.extend(base.iter().map(|m| m.record(cfg)));
        if cfg.tolerances.mode == ToleranceMode::Auto && has_orders(suite) {
            let levels = prepass_levels(suite, cfg.n_x);
            let runs: Vec<Vec<Measure>> = levels
                .iter()
                .map(|&n| if n == cfg.n_x { base.clone() } else { measure_or_fail(suite, &Ctx { cfg, n_x: n, full: false, dump: None }) })
                .collect();
            for (r, &n) in runs.iter().zip(&levels) {
                if n != cfg.n_x {
                    report.extend(r.iter().filter(|m| m.value.is_nan()).map(|m| m.record(cfg)));
                }
            }
            let (rows, recs) = convergence(&levels, &runs);
            rows.into_iter().for_each(|r| report.push_row(r));
            report.extend(recs);
        }
        report.timings.push(SuiteTiming { suite: suite.name().into(), seconds: clock.elapsed().as_secs_f64() });
    }
    report
}

/// Reruns suites on n_x, 2 n_x, ... (`levels` grids) and fits orders.
pub fn converge(cfg: &RunConfig, suites: &[Suite], levels: usize) -> Report {
    let mut report = base_report(cfg);
    let ns: Vec<usize> = (0..levels.max(2)).map(|k| cfg.n_x << k).collect();
    for &suite in suites {
        let clock = Instant::now();
        let runs: Vec<Vec<Measure>> = ns.iter().map(|&n| measure_or_fail(suite, &Ctx { cfg, n_x: n, full: false, dump: None })).collect();
        for r in &runs {
            report.extend(r.iter().filter(|m| m.value.is_nan()).map(|m| m.record(cfg)));
        }
        let (rows, recs) = convergence(&ns, &runs);
        rows.into_iter().for_each(|r| report.push_row(r));
        report.extend(recs);
        report.timings.push(SuiteTiming { suite: suite.name().into(), seconds: clock.elapsed().as_secs_f64() });
    }
    report
}

/// CSV files for external plotting; returns the file names written.
pub fn plotdata(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>> {
    let mut files = vec![];
    let rc = rce_config(cfg, cfg.n_x)?;
    let g = rc.grid();
    let xs: Vec<f64> = (0..g.n_x).map(|i| g.x(i)).collect();
    let ps = probe_data(&rc, cfg.rce_probes)?;
    for (k, p) in ps.iter().enumerate() {
        let f = rce_composed(&rc, p)?;
        let name = format!("fg_probe{k}.csv");
        io::write(dir, &name, &io::columns_csv(&["x", "phi", "pi", "fg_phi", "fg_pi"], &[&xs, &p.phi, &p.pi, &f.phi, &f.pi])?)?;
        files.push(name);
    }
    let dens = stress_integrand(&rc, &ps[0], &ps[1])?;
    io::write_grid_field(dir, "stress_integrand.csv", &dens, "value")?;
    files.push("stress_integrand.csv".into());
    let (m, l) = (cfg.theory.mass, g.length);
    let vac = vacuum_state(m, l, cfg.n_x / 2)?;
    let mut states = vec![(None, vac.clone())];
    for &b in &cfg.wick_betas {
        states.push((Some(b), thermal_state(m, l, cfg.n_x / 2, b)?));
    }
    let mid = g.n_t / 2;
    for &mu in &cfg.wick_mu {
        for (beta, s) in &states {
            let w = wick_square(s, mu, &g)?;
            let name = format!("wick_{}_mu{mu}.csv", label(*beta));
            io::write(dir, &name, &io::columns_csv(&["x", "value"], &[&xs, w.values.row(mid)])?)?;
            files.push(name);
        }
    }
    for (beta, s) in &states[1..] {
        let c = cocycle(s, &vac, &g)?;
        let name = format!("cocycle_{}_vacuum.csv", label(*beta));
        io::write(dir, &name, &io::columns_csv(&["x", "value"], &[&xs, c.values.row(mid)])?)?;
        files.push(name);
    }
    Ok(files)
}

/// Summary of one state's Wick square; profiles go to `dir` when given.
pub fn wick_summary(cfg: &RunConfig, beta: Option<f64>, mu: f64, dir: Option<&Path>) -> Result<Report> {
    let g = cfg.grid()?;
    let (m, l, k) = (cfg.theory.mass, g.length, cfg.n_x / 2);
    let state = match beta {
        None => vacuum_state(m, l, k)?,
        Some(b) => thermal_state(m, l, k, b)?,
    };
    let vac = vacuum_state(m, l, k)?;
    let w = wick_square(&state, mu, &g)?;
    let wv = wick_square(&vac, mu, &g)?;
    let c = cocycle(&state, &vac, &g)?;
    let resid = w.sub(&wv)?.sub(&c.values).max_abs();
    // the vacuum against itself has a zero cocycle; compare absolutely then
    let scale = if c.values.max_abs() > 0.0 { c.values.max_abs() } else { 1.0 };
    let (constant, noise) = hadamard_constant(&state, mu, g.dx())?;
    let mut report = base_report(cfg);
    let name = label(beta);
    let mut r = CheckRecord::bound(&format!("cocycle trivialization ({name})"), "Hadamard differences trivialize the cocycle", resid / scale, TRIVIALIZATION_REL)
        .with("state", name.clone())
        .with("mu", mu)
        .with("hadamard_constant", constant)
        .with("extrapolation_noise", noise)
        .with("cocycle_vs_vacuum", c.values.at(g.n_t / 2, 0));
    if let Some(b) = beta {
        r = r.with("cocycle_oracle", thermal_cocycle_oracle(m, l, b));
    } else {
        r = r.with("vacuum_oracle", vacuum_hadamard_oracle(m, l, mu, 2_000_000));
    }
    report.push(r);
    if let Some(dir) = dir {
        let xs: Vec<f64> = (0..g.n_x).map(|i| g.x(i)).collect();
        let mid = g.n_t / 2;
        io::write(dir, &format!("wick_{name}_mu{mu}.csv"), &io::columns_csv(&["x", "value"], &[&xs, w.values.row(mid)])?)?;
        io::write(dir, &format!("cocycle_{name}_vacuum.csv"), &io::columns_csv(&["x", "value"], &[&xs, c.values.row(mid)])?)?;
    }
    Ok(report)
}
