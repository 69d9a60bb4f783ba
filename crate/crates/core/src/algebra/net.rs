use super::checks::time_slice;
use super::space::{SolutionId, SolutionSpace};
use crate::error::{Error, Result};
use crate::geometry::embedding::Embedding;
use crate::geometry::region::{is_causally_convex, Region};
use crate::probe::probe_functions;
use crate::report::CheckRecord;
use crate::solver::{e_causal, TestFunction};
use crate::tolerances::{FUNCTOR_ALGEBRAIC, PDE_REL};
use std::sync::Arc;

/// Generating family { E f : supp f in O } of A(O), as a finite probe basis.
#[derive(Clone, Debug)]
pub struct NetAlgebra {
    pub region: Region,
    pub space: Arc<SolutionSpace>,
    pub generators: Vec<(TestFunction, SolutionId)>,
}

pub const NET_PROBES: usize = 5;

pub fn net_algebra(region: &Region, space: &Arc<SolutionSpace>) -> Result<NetAlgebra> {
    let st = &space.spacetime;
    if !is_causally_convex(region, st)? {
        return Err(Error::Precondition("region is not causally convex".into()));
    }
    let mut generators = vec![];
    for f in probe_functions(region, st.grid, NET_PROBES)? {
        let id = space.register_generator(&f)?;
        generators.push((f, id));
    }
    Ok(NetAlgebra { region: region.clone(), space: space.clone(), generators })
}

fn support_in(f: &TestFunction, region: &Region) -> bool {
    let g = f.grid();
    let v = f.values();
    (0..g.n_t).all(|j| (0..g.n_x).all(|i| v.at(j, i) == 0.0 || region.contains(g.t(j), g.x(i), g.length)))
}

/// Isotony A(O1) in A(O2): each generator of the smaller net is reproduced inside O2, by
/// time-slice reconstruction when O2 is a strip and by support inclusion otherwise.
pub fn check_isotony(small: &NetAlgebra, big: &Region, order: usize) -> Result<CheckRecord> {
    let st = &small.space.spacetime;
    let mut dev: f64 = 0.0;
    let mut inside = true;
    for (f, _) in &small.generators {
        match big {
            Region::Strip { .. } => {
                let ts = time_slice(st, big, f, order)?;
                dev = dev.max(ts.deviation);
                inside &= ts.support_inside;
            }
            _ => inside &= support_in(f, big),
        }
    }
    let mut r = CheckRecord::bound("net isotony", "net: isotony", dev, PDE_REL).with("supports_inside", inside);
    r.pass &= inside;
    Ok(r)
}

/// Covariance: the generators of A(kappa O) are the transported generators of A(O).
pub fn check_covariance(net: &NetAlgebra, kappa: &Embedding) -> Result<CheckRecord> {
    if net.region != kappa.domain || !Arc::ptr_eq(&kappa.source, &net.space.spacetime) {
        return Err(Error::Precondition("kappa must be defined on the net's region".into()));
    }
    let target_space = if Arc::ptr_eq(&kappa.target, &net.space.spacetime) {
        net.space.clone()
    } else {
        SolutionSpace::new(kappa.target.clone())
    };
    let image = net_algebra(&kappa.image, &target_space)?;
    let tg = kappa.target.grid;
    let mut dev: f64 = 0.0;
    for ((f, _), (fk, _)) in net.generators.iter().zip(&image.generators) {
        let moved = kappa.push_forward(f)?;
        let scale = f.values().max_abs();
        dev = dev.max(moved.values().sub(fk.values()).max_abs() / scale);
        let ef = e_causal(&net.space.spacetime, f)?;
        let efk = e_causal(&kappa.target, fk)?;
        let fmax = ef.values.max_abs();
        // compare on source levels whose image is interior to the target
        let sg = f.grid();
        for j in 1..sg.n_t - 1 {
            let (jt, _) = kappa.map_node(j, 0);
            if jt == 0 || jt + 1 >= tg.n_t {
                continue;
            }
            for i in 0..sg.n_x {
                let (jt, it) = kappa.map_node(j, i);
                dev = dev.max((ef.values.at(j, i) - efk.values.at(jt, it)).abs() / fmax);
            }
        }
    }
    Ok(CheckRecord::bound("net covariance", "net: isometry covariance", dev, FUNCTOR_ALGEBRAIC))
}

/// Cross-sigma between generators of two nets, relative to the largest same-net sigma.
pub fn check_net_commutativity(a: &NetAlgebra, b: &NetAlgebra) -> Result<CheckRecord> {
    if !Arc::ptr_eq(&a.space, &b.space) {
        return Err(Error::SpaceMismatch("nets over different spaces".into()));
    }
    let sp = &a.space;
    let mut cross: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (_, x) in &a.generators {
        for (_, y) in &b.generators {
            cross = cross.max(sp.sigma(*x, *y)?.abs());
        }
    }
    for net in [a, b] {
        for (k, (_, x)) in net.generators.iter().enumerate() {
            for (_, y) in &net.generators[k + 1..] {
                scale = scale.max(sp.sigma(*x, *y)?.abs());
            }
        }
    }
    Ok(CheckRecord::bound("net commutativity", "net: spacelike commutativity", cross / scale.max(1e-300), PDE_REL)
        .with("max_abs_sigma", cross))
}
