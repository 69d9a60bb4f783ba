use crate::error::{Error, Result};
use crate::geometry::spacetime::Spacetime;
use crate::solver::{e_causal, evolve, restrict_to_data, symplectic_surface, CauchyData, SolutionField, TestFunction};
use std::sync::{Arc, RwLock};

/// Registered solutions closer than this (relative L2 on the reference slice) are merged.
pub const TOL_MERGE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Entry {
    pub data: CauchyData,
    /// Some f with E f = this solution, when known.
    pub generator: Option<TestFunction>,
}

/// The symplectic space R(M, g) as an append-only registry of Cauchy data on one slice.
/// Id 0 is the zero solution.
#[derive(Debug)]
pub struct SolutionSpace {
    pub spacetime: Arc<Spacetime>,
    pub slice_time: f64,
    pub tol_merge: f64,
    entries: RwLock<Vec<Entry>>,
}

pub type SolutionId = usize;

impl SolutionSpace {
    /// Reference slice at the middle level of the slab.
    pub fn new(st: Arc<Spacetime>) -> Arc<SolutionSpace> {
        let t = st.grid.t(st.grid.n_t / 2);
        SolutionSpace::at_slice(st, t).expect("middle level is interior")
    }

    pub fn at_slice(st: Arc<Spacetime>, slice_time: f64) -> Result<Arc<SolutionSpace>> {
        let g = st.grid;
        let j = g.level_of(slice_time)?;
        if j == 0 || j + 1 >= g.n_t {
            return Err(Error::OutOfDomain("reference slice must be an interior level".into()));
        }
        let zero = Entry { data: CauchyData::zero(g.n_x, g.t(j)), generator: Some(TestFunction::zero(g)) };
        Ok(Arc::new(SolutionSpace { spacetime: st, slice_time: g.t(j), tol_merge: TOL_MERGE, entries: RwLock::new(vec![zero]) }))
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn data(&self, id: SolutionId) -> Result<CauchyData> {
        self.entry(id).map(|e| e.data)
    }
    pub fn generator(&self, id: SolutionId) -> Result<Option<TestFunction>> {
        self.entry(id).map(|e| e.generator)
    }

    pub fn entry(&self, id: SolutionId) -> Result<Entry> {
        self.entries.read().unwrap().get(id).cloned().ok_or_else(|| Error::SpaceMismatch(format!("no solution with id {id}")))
    }

    fn dx(&self) -> f64 {
        self.spacetime.grid.dx()
    }

    /// Registers data on the reference slice, merging with an existing entry within tol_merge.
    pub fn register_data(&self, data: CauchyData) -> Result<SolutionId> {
        self.register(data, None)
    }

    /// Registers E f and remembers f.
    pub fn register_generator(&self, f: &TestFunction) -> Result<SolutionId> {
        if f.grid() != self.spacetime.grid {
            return Err(Error::SpaceMismatch("generator lives on another grid".into()));
        }
        let ef = e_causal(&self.spacetime, f)?;
        let d = restrict_to_data(&ef, self.slice_time)?;
        self.register(d, Some(f.clone()))
    }

    /// Registers a full solution field by its data on the reference slice.
    pub fn register_field(&self, field: &SolutionField) -> Result<SolutionId> {
        if !Arc::ptr_eq(&field.spacetime, &self.spacetime) {
            return Err(Error::SpaceMismatch("solution field lives on another spacetime".into()));
        }
        self.register(restrict_to_data(field, self.slice_time)?, None)
    }

    fn register(&self, data: CauchyData, generator: Option<TestFunction>) -> Result<SolutionId> {
        if data.phi.len() != self.spacetime.grid.n_x || (data.slice_time - self.slice_time).abs() > 1e-9 {
            return Err(Error::SpaceMismatch(format!("data on t = {}, space slice t = {}", data.slice_time, self.slice_time)));
        }
        let dx = self.dx();
        let nrm = data.norm(dx);
        let mut es = self.entries.write().unwrap();
        for (k, e) in es.iter_mut().enumerate() {
            if e.data.distance(&data, dx)? <= self.tol_merge * nrm.max(e.data.norm(dx)).max(1e-300) {
                if e.generator.is_none() {
                    e.generator = generator;
                }
                return Ok(k);
            }
        }
        es.push(Entry { data, generator });
        Ok(es.len() - 1)
    }

    /// Id of the sum of two registered solutions.
    pub fn register_lincomb(&self, a: f64, x: SolutionId, b: f64, y: SolutionId) -> Result<SolutionId> {
        let ex = self.entry(x)?;
        let ey = self.entry(y)?;
        let data = ex.data.lincomb(a, &ey.data, b)?;
        let gen = match (ex.generator, ey.generator) {
            (Some(f), Some(h)) => Some(TestFunction::new(f.values().zip(h.values(), |u, v| a * u + b * v))?),
            _ => None,
        };
        self.register(data, gen)
    }

    pub fn sigma(&self, x: SolutionId, y: SolutionId) -> Result<f64> {
        let (dx_, dy) = (self.data(x)?, self.data(y)?);
        symplectic_surface(&dx_, &dy, &self.spacetime, self.slice_time)
    }

    pub fn sigma_data(&self, a: &CauchyData, b: &CauchyData) -> Result<f64> {
        symplectic_surface(a, b, &self.spacetime, self.slice_time)
    }

    /// Global solution of a registered entry.
    pub fn field(&self, id: SolutionId) -> Result<SolutionField> {
        evolve(&self.spacetime, &self.data(id)?, None)
    }

    pub fn norm(&self, id: SolutionId) -> Result<f64> {
        Ok(self.data(id)?.norm(self.dx()))
    }

    pub fn same(&self, other: &SolutionSpace) -> bool {
        std::ptr::eq(self, other)
    }
}
