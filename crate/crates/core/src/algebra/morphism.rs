use super::space::{SolutionId, SolutionSpace};
use super::weyl::WeylElement;
use crate::error::{Error, Result};
use crate::geometry::embedding::Embedding;
use crate::geometry::region::Region;
use crate::probe::probe_functions;
use crate::solver::{evolve, restrict_values, CauchyData};
use crate::tolerances::CERTIFICATE_REL;
use std::sync::Arc;

/// alpha_psi on generators: W(phi) -> W'(T phi), with its sigma-preservation certificate.
#[derive(Clone, Debug)]
pub struct AlgebraMorphism {
    pub embedding: Embedding,
    pub source: Arc<SolutionSpace>,
    pub target: Arc<SolutionSpace>,
    /// max |sigma'(T a, T b) - sigma(a, b)| / max |sigma(a, b)| over the probe pairs
    pub certificate: f64,
    pub tolerance: f64,
    /// min ||T a|| / ||a|| over the probes
    pub injectivity: f64,
    pub probe_pairs: usize,
}

/// Morphism between fresh solution spaces of the embedding's source and target.
pub fn algebra_morphism(embedding: &Embedding) -> Result<AlgebraMorphism> {
    let source = SolutionSpace::new(embedding.source.clone());
    let target =
        if embedding.is_identity() { source.clone() } else { SolutionSpace::new(embedding.target.clone()) };
    AlgebraMorphism::between(embedding, source, target)
}

impl AlgebraMorphism {
    pub fn between(embedding: &Embedding, source: Arc<SolutionSpace>, target: Arc<SolutionSpace>) -> Result<AlgebraMorphism> {
        AlgebraMorphism::with_tolerance(embedding, source, target, CERTIFICATE_REL)
    }

    pub fn with_tolerance(
        embedding: &Embedding,
        source: Arc<SolutionSpace>,
        target: Arc<SolutionSpace>,
        tolerance: f64,
    ) -> Result<AlgebraMorphism> {
        if !Arc::ptr_eq(&source.spacetime, &embedding.source) || !Arc::ptr_eq(&target.spacetime, &embedding.target) {
            return Err(Error::SpaceMismatch("solution spaces do not match the embedding".into()));
        }
        let mut m = AlgebraMorphism {
            embedding: embedding.clone(),
            source,
            target,
            certificate: 0.0,
            tolerance,
            injectivity: 1.0,
            probe_pairs: 0,
        };
        if m.is_identity() {
            return Ok(m);
        }
        let probes = probe_functions(&embedding.domain, embedding.source.grid, 5)?;
        let ids: Vec<SolutionId> = probes.iter().map(|f| m.source.register_generator(f)).collect::<Result<_>>()?;
        let images: Vec<SolutionId> = ids.iter().map(|&a| m.apply(a)).collect::<Result<_>>()?;
        let mut dev: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                let s0 = m.source.sigma(ids[a], ids[b])?;
                let s1 = m.target.sigma(images[a], images[b])?;
                dev = dev.max((s1 - s0).abs());
                scale = scale.max(s0.abs());
                m.probe_pairs += 1;
            }
        }
        m.certificate = if scale > 0.0 { dev / scale } else { dev };
        m.injectivity = ids
            .iter()
            .zip(&images)
            .map(|(&a, &b)| Ok(m.target.norm(b)? / m.source.norm(a)?))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if !(m.certificate <= tolerance) {
            return Err(Error::Certificate { measured: m.certificate, tolerance });
        }
        Ok(m)
    }

    pub fn is_identity(&self) -> bool {
        self.embedding.is_identity() && Arc::ptr_eq(&self.source, &self.target)
    }

    /// T on a registered solution. Solutions with a generator inside the domain go through
    /// E' psi_* f; others are transported as data through a Cauchy slice of the domain.
    pub fn apply(&self, id: SolutionId) -> Result<SolutionId> {
        if self.is_identity() {
            return Ok(id);
        }
        let e = self.source.entry(id)?;
        if let Some(f) = &e.generator {
            if let Ok(pf) = self.embedding.push_forward(f) {
                return self.target.register_generator(&pf);
            }
        }
        let d = self.transport(&e.data)?;
        self.target.register_data(d)
    }

    /// Data transport of source data (on the source reference slice) to target reference data.
    pub fn transport(&self, data: &CauchyData) -> Result<CauchyData> {
        let emb = &self.embedding;
        let sg = emb.source.grid;
        let j = self.cauchy_level()?;
        let field = evolve(&emb.source, data, None)?;
        let d = restrict_values(&field.values, sg.t(j))?;
        let n = sg.n_x;
        let mut phi = vec![0.0; n];
        let mut pi = vec![0.0; n];
        for i in 0..n {
            let (_, it) = emb.map_node(j, i);
            phi[it] = d.phi[i];
            pi[it] = d.pi[i];
        }
        let (jt, _) = emb.map_node(j, 0);
        let moved = CauchyData::new(phi, pi, emb.target.grid.t(jt))?;
        let out = evolve(&emb.target, &moved, None)?;
        restrict_values(&out.values, self.target.slice_time)
    }

    /// A level whose whole circle lies in the domain, away from both slab ends (source and image).
    fn cauchy_level(&self) -> Result<usize> {
        let emb = &self.embedding;
        let sg = emb.source.grid;
        let tg = emb.target.grid;
        let full = |j: usize| (0..sg.n_x).all(|i| emb.in_domain(j, i));
        let ok: Vec<usize> = (1..sg.n_t - 1)
            .filter(|&j| {
                let jt = j as isize + emb.map.dt_steps;
                jt >= 1 && jt < tg.n_t as isize - 1 && full(j)
            })
            .collect();
        if ok.is_empty() {
            return Err(Error::Precondition(match emb.domain {
                Region::Diamond { .. } | Region::Rect { .. } => {
                    "data transport needs a domain containing a Cauchy slice; register the solution by a generator".into()
                }
                _ => "domain has no interior Cauchy level".into(),
            }));
        }
        Ok(ok[ok.len() / 2])
    }

    pub fn apply_weyl(&self, a: &WeylElement) -> Result<WeylElement> {
        if !Arc::ptr_eq(&a.space, &self.source) {
            return Err(Error::SpaceMismatch("element is not over the morphism's source".into()));
        }
        let terms = a.terms.iter().map(|&(c, id)| Ok((c, self.apply(id)?))).collect::<Result<Vec<_>>>()?;
        WeylElement::new(self.target.clone(), terms)
    }
}
