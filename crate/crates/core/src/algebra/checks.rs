use super::morphism::AlgebraMorphism;
use super::space::{SolutionId, SolutionSpace};
use crate::error::{Error, Result};
use crate::geometry::embedding::Embedding;
use crate::geometry::region::{causally_separated, Region};
use crate::geometry::spacetime::Spacetime;
use crate::probe::probe_functions;
use crate::rce::cutoff::{cutoffs, Branch};
use crate::report::CheckRecord;
use crate::solver::{e_causal, CauchyData, TestFunction};
use crate::tolerances::{FUNCTOR_ALGEBRAIC, PDE_REL};
use std::sync::Arc;

/// Picks one solution space per distinct spacetime.
struct Spaces(Vec<Arc<SolutionSpace>>);

impl Spaces {
    fn get(&mut self, st: &Arc<Spacetime>) -> Arc<SolutionSpace> {
        if let Some(s) = self.0.iter().find(|s| Arc::ptr_eq(&s.spacetime, st)) {
            return s.clone();
        }
        let s = SolutionSpace::new(st.clone());
        self.0.push(s.clone());
        s
    }
}

fn rel_distance(space: &SolutionSpace, a: SolutionId, b: SolutionId) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let dx = space.spacetime.grid.dx();
    let (da, db) = (space.data(a)?, space.data(b)?);
    Ok(da.distance(&db, dx)? / da.norm(dx).max(db.norm(dx)).max(1e-300))
}

/// alpha_id = id: every probe solution is mapped to itself.
pub fn check_identity(st: &Arc<Spacetime>) -> Result<CheckRecord> {
    let space = SolutionSpace::new(st.clone());
    let m = AlgebraMorphism::between(&Embedding::identity(st.clone()), space.clone(), space.clone())?;
    let mut dev: f64 = 0.0;
    for f in probe_functions(&Region::Whole, st.grid, 5)? {
        let a = space.register_generator(&f)?;
        dev = dev.max(rel_distance(&space, a, m.apply(a)?)?);
    }
    Ok(CheckRecord::bound("functor identity", "functor: identity morphism", dev, 0.0))
}

/// alpha_{psi2} alpha_{psi1} = alpha_{psi2 psi1} on generator-registered and data-registered probes.
pub fn check_functor_law(psi1: &Embedding, psi2: &Embedding) -> Result<CheckRecord> {
    let composed = psi1.then(psi2)?;
    let mut spaces = Spaces(vec![]);
    let a = spaces.get(&psi1.source);
    let b = spaces.get(&psi1.target);
    let c = spaces.get(&psi2.target);
    let m1 = AlgebraMorphism::between(psi1, a.clone(), b)?;
    let m2 = AlgebraMorphism::between(psi2, m1.target.clone(), c.clone())?;
    let m12 = AlgebraMorphism::between(&composed, a.clone(), c.clone())?;
    let mut ids = vec![];
    for f in probe_functions(&psi1.domain, psi1.source.grid, 5)? {
        ids.push(a.register_generator(&f)?);
    }
    let mut data_probes = 0;
    // probes known only by their data exercise the transport path
    let g = a.spacetime.grid;
    for k in 1..=3usize {
        let kk = k as f64 * 2.0 * std::f64::consts::PI / g.length;
        let phi = (0..g.n_x).map(|i| (kk * g.x(i) + 0.3 * k as f64).cos()).collect();
        let pi = (0..g.n_x).map(|i| (kk * g.x(i)).sin() / k as f64).collect();
        let id = a.register_data(CauchyData::new(phi, pi, a.slice_time)?)?;
        if a.generator(id)?.is_none() && m1.apply(id).is_ok() {
            ids.push(id);
            data_probes += 1;
        }
    }
    let mut dev: f64 = 0.0;
    for &id in &ids {
        let two_step = m2.apply(m1.apply(id)?)?;
        let one_step = m12.apply(id)?;
        dev = dev.max(rel_distance(&c, two_step, one_step)?);
    }
    Ok(CheckRecord::bound("functor composition", "functor: composition law", dev, FUNCTOR_ALGEBRAIC)
        .with("generator_probes", ids.len() - data_probes)
        .with("data_probes", data_probes)
        .with("certificates", vec![m1.certificate, m2.certificate, m12.certificate]))
}

/// Weyl generators localized in causally separated images commute: |sigma| at leakage level.
/// Measured is max |sigma(T1 a, T2 b)| relative to the largest same-side pairing.
pub fn check_causality(psi1: &Embedding, psi2: &Embedding) -> Result<CheckRecord> {
    if !Arc::ptr_eq(&psi1.target, &psi2.target) {
        return Err(Error::Precondition("embeddings into different targets".into()));
    }
    if !causally_separated(&psi1.image, &psi2.image, &psi1.target) {
        return Err(Error::Precondition("images are not causally separated".into()));
    }
    let mut spaces = Spaces(vec![]);
    let t = spaces.get(&psi1.target);
    let s1 = spaces.get(&psi1.source);
    let s2 = spaces.get(&psi2.source);
    let m1 = AlgebraMorphism::between(psi1, s1.clone(), t.clone())?;
    let m2 = AlgebraMorphism::between(psi2, s2.clone(), t.clone())?;
    let side = |m: &AlgebraMorphism, s: &Arc<SolutionSpace>, e: &Embedding| -> Result<Vec<SolutionId>> {
        probe_functions(&e.domain, e.source.grid, 5)?.iter().map(|f| m.apply(s.register_generator(f)?)).collect()
    };
    let a = side(&m1, &s1, psi1)?;
    let b = side(&m2, &s2, psi2)?;
    let mut cross: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &x in &a {
        for &y in &b {
            cross = cross.max(t.sigma(x, y)?.abs());
        }
    }
    for ids in [&a, &b] {
        for (k, &x) in ids.iter().enumerate() {
            for &y in &ids[k + 1..] {
                scale = scale.max(t.sigma(x, y)?.abs());
            }
        }
    }
    let rel = cross / scale.max(1e-300);
    Ok(CheckRecord::bound("causality", "causality: separated regions commute", rel, PDE_REL)
        .with("max_abs_sigma", cross)
        .with("commutator_surrogate", 2.0 * (0.5 * cross).sin().abs())
        .with("scale", scale)
        .with("note", "verified on generator probes only"))
}

/// Result of the time-slice reconstruction for one f.
#[derive(Clone, Debug)]
pub struct TimeSlice {
    pub h: TestFunction,
    /// ||E h - E f|| / ||E f|| over the slab
    pub deviation: f64,
    pub support_inside: bool,
}

/// h = K(chi_ret E f) is supported in the strip and E h = E f.
pub fn time_slice(st: &Arc<Spacetime>, strip: &Region, f: &TestFunction, order: usize) -> Result<TimeSlice> {
    let cut = cutoffs(strip, st.grid, order)?;
    let ef = e_causal(st, f)?;
    let h = cut.source(st, Branch::Ret, &ef)?;
    let eh = e_causal(st, &h)?;
    let deviation = eh.values.sub(&ef.values).l2() / ef.values.l2().max(1e-300);
    let support_inside = match h.level_range() {
        None => true,
        Some((lo, hi)) => strip.contains(st.grid.t(lo), 0.0, st.grid.length) && strip.contains(st.grid.t(hi), 0.0, st.grid.length),
    };
    Ok(TimeSlice { h, deviation, support_inside })
}

pub fn check_time_slice(st: &Arc<Spacetime>, strip: &Region, f: &TestFunction, order: usize) -> Result<CheckRecord> {
    let ts = time_slice(st, strip, f, order)?;
    let mut r = CheckRecord::bound("time slice", "time-slice axiom", ts.deviation, PDE_REL)
        .with("support_inside_strip", ts.support_inside);
    r.pass &= ts.support_inside;
    Ok(r)
}
