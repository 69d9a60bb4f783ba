use super::region::{is_causally_convex, Region};
use super::spacetime::Spacetime;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::solver::testfn::TestFunction;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Lattice map (j, i) -> (j + dt_steps, i + dx_steps). Reflection flags exist only to be refused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IsometryMap {
    pub dt_steps: isize,
    pub dx_steps: isize,
    pub reflect_t: bool,
    pub reflect_x: bool,
}

/// Isometric, causality- and orientation-preserving map of a source region into a target slab.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub source: Arc<Spacetime>,
    pub target: Arc<Spacetime>,
    pub domain: Region,
    pub map: IsometryMap,
    pub image: Region,
}

const ISOMETRY_TOL: f64 = 1e-12;

impl Embedding {
    pub fn new(source: Arc<Spacetime>, target: Arc<Spacetime>, domain: Region, map: IsometryMap) -> Result<Embedding> {
        if map.reflect_t || map.reflect_x {
            return Err(Error::Embedding("reflections reverse (time-)orientation".into()));
        }
        source.same_theory(&target)?;
        if !source.grid.same_lattice(&target.grid) {
            return Err(Error::Embedding("source and target lattices differ".into()));
        }
        if !is_causally_convex(&domain, &source)? {
            return Err(Error::Embedding("domain is not causally convex in the source".into()));
        }
        let sg = source.grid;
        let tg = target.grid;
        let mut touched = false;
        for j in 0..sg.n_t {
            for i in 0..sg.n_x {
                if !domain.contains(sg.t(j), sg.x(i), sg.length) {
                    continue;
                }
                touched = true;
                let jt = j as isize + map.dt_steps;
                if jt < 0 || jt >= tg.n_t as isize {
                    return Err(Error::OutOfDomain(format!("node ({j},{i}) maps outside the target slab")));
                }
                let it = tg.wrap(i as isize + map.dx_steps);
                let a = source.metric.at(j, i);
                let b = target.metric.at(jt as usize, it);
                let d = (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max);
                if d > ISOMETRY_TOL {
                    return Err(Error::Embedding(format!("not isometric at node ({j},{i}): |dg| = {d:.3e}")));
                }
            }
        }
        if !touched {
            return Err(Error::Embedding("domain contains no lattice node".into()));
        }
        let (dt, dx) = shift_of(&source, &target, &map);
        let image = domain.translated(dt, dx);
        if !is_causally_convex(&image, &target)? {
            return Err(Error::Embedding("image is not causally convex in the target".into()));
        }
        Ok(Embedding { source, target, domain, map, image })
    }

    /// Continuous translation (delta_t, delta_x); must land on the lattice.
    pub fn translation(
        source: Arc<Spacetime>,
        target: Arc<Spacetime>,
        domain: Region,
        delta_t: f64,
        delta_x: f64,
    ) -> Result<Embedding> {
        let g = source.grid;
        let st = (source.grid.t0 + delta_t - target.grid.t0) / g.dt;
        let sx = delta_x / g.dx();
        if (st - st.round()).abs() > 1e-6 || (sx - sx.round()).abs() > 1e-6 {
            return Err(Error::Embedding(format!("translation ({delta_t}, {delta_x}) is not a lattice vector")));
        }
        let map = IsometryMap { dt_steps: st.round() as isize, dx_steps: sx.round() as isize, ..Default::default() };
        Embedding::new(source, target, domain, map)
    }

    pub fn identity(st: Arc<Spacetime>) -> Embedding {
        Embedding { source: st.clone(), target: st, domain: Region::Whole, map: IsometryMap::default(), image: Region::Whole }
    }

    /// A sub-slab (or any slab sharing the lattice) placed at its own times in `parent`.
    pub fn inclusion(sub: Arc<Spacetime>, parent: Arc<Spacetime>) -> Result<Embedding> {
        Embedding::translation(sub, parent, Region::Whole, 0.0, 0.0)
    }

    pub fn is_identity(&self) -> bool {
        Arc::ptr_eq(&self.source, &self.target) && self.map == IsometryMap::default() && self.domain == Region::Whole
    }

    pub fn shift(&self) -> (f64, f64) {
        shift_of(&self.source, &self.target, &self.map)
    }

    pub fn map_node(&self, j: usize, i: usize) -> (usize, usize) {
        ((j as isize + self.map.dt_steps) as usize, self.target.grid.wrap(i as isize + self.map.dx_steps))
    }

    pub fn in_domain(&self, j: usize, i: usize) -> bool {
        let g = &self.source.grid;
        self.domain.contains(g.t(j), g.x(i), g.length)
    }

    /// `next` after `self`.
    pub fn then(&self, next: &Embedding) -> Result<Embedding> {
        if !Arc::ptr_eq(&self.target, &next.source) {
            return Err(Error::NotComposable("target of the first map is not the source of the second".into()));
        }
        let sg = self.source.grid;
        let mg = self.target.grid;
        for j in 0..sg.n_t {
            for i in 0..sg.n_x {
                if self.in_domain(j, i) {
                    let (jm, im) = self.map_node(j, i);
                    if !next.domain.contains(mg.t(jm), mg.x(im), mg.length) {
                        return Err(Error::NotComposable(format!("image of node ({j},{i}) leaves the second domain")));
                    }
                }
            }
        }
        let map = IsometryMap {
            dt_steps: self.map.dt_steps + next.map.dt_steps,
            dx_steps: self.map.dx_steps + next.map.dx_steps,
            ..Default::default()
        };
        if Arc::ptr_eq(&self.source, &next.target) && map == IsometryMap::default() && self.domain == Region::Whole {
            return Ok(Embedding::identity(self.source.clone()));
        }
        Embedding::new(self.source.clone(), next.target.clone(), self.domain.clone(), map)
    }

    /// psi_* f: f must be supported in the domain.
    pub fn push_forward(&self, f: &TestFunction) -> Result<TestFunction> {
        if f.grid() != self.source.grid {
            return Err(Error::SpaceMismatch("test function does not live on the source".into()));
        }
        if self.is_identity() {
            return Ok(f.clone());
        }
        let sg = self.source.grid;
        let mut out = GridField::zeros(self.target.grid);
        for j in 0..sg.n_t {
            for i in 0..sg.n_x {
                let v = f.values().at(j, i);
                if v == 0.0 {
                    continue;
                }
                if !self.in_domain(j, i) {
                    return Err(Error::OutOfDomain(format!("support point ({j},{i}) outside the embedded region")));
                }
                let (jt, it) = self.map_node(j, i);
                out.set(jt, it, v);
            }
        }
        TestFunction::new(out)
    }

    /// psi^* u on the domain, zero elsewhere.
    pub fn pull_back_field(&self, u: &GridField) -> GridField {
        let sg = self.source.grid;
        let mut out = GridField::zeros(sg);
        for j in 0..sg.n_t {
            for i in 0..sg.n_x {
                if self.in_domain(j, i) {
                    let (jt, it) = self.map_node(j, i);
                    out.set(j, i, u.at(jt, it));
                }
            }
        }
        out
    }
}

fn shift_of(source: &Spacetime, target: &Spacetime, map: &IsometryMap) -> (f64, f64) {
    (
        target.grid.t0 + map.dt_steps as f64 * target.grid.dt - source.grid.t0,
        map.dx_steps as f64 * source.grid.dx(),
    )
}
