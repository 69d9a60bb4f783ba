use super::space::{SolutionId, SolutionSpace};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

/// Finite combination sum c_k W(phi_k) in the Weyl algebra of one solution space.
#[derive(Clone, Debug)]
pub struct WeylElement {
    pub space: Arc<SolutionSpace>,
    /// Sorted by id, ids unique, no zero coefficients.
    pub terms: Vec<(Complex64, SolutionId)>,
}

fn normalize(mut terms: Vec<(Complex64, SolutionId)>) -> Vec<(Complex64, SolutionId)> {
    terms.sort_by_key(|t| t.1);
    let mut out: Vec<(Complex64, SolutionId)> = Vec::with_capacity(terms.len());
    for (c, id) in terms {
        match out.last_mut() {
            Some(last) if last.1 == id => last.0 += c,
            _ => out.push((c, id)),
        }
    }
    out.retain(|t| t.0 != Complex64::new(0.0, 0.0));
    out
}

impl WeylElement {
    pub fn new(space: Arc<SolutionSpace>, terms: Vec<(Complex64, SolutionId)>) -> Result<WeylElement> {
        let n = space.len();
        if let Some(t) = terms.iter().find(|t| t.1 >= n) {
            return Err(Error::SpaceMismatch(format!("solution id {} not registered", t.1)));
        }
        Ok(WeylElement { space, terms: normalize(terms) })
    }

    pub fn unit(space: Arc<SolutionSpace>) -> WeylElement {
        WeylElement { space, terms: vec![(Complex64::new(1.0, 0.0), 0)] }
    }

    pub fn zero(space: Arc<SolutionSpace>) -> WeylElement {
        WeylElement { space, terms: vec![] }
    }

    pub fn generator(space: Arc<SolutionSpace>, id: SolutionId) -> Result<WeylElement> {
        WeylElement::new(space, vec![(Complex64::new(1.0, 0.0), id)])
    }

    fn check(&self, other: &WeylElement) -> Result<()> {
        if !Arc::ptr_eq(&self.space, &other.space) {
            return Err(Error::SpaceMismatch("Weyl elements over different solution spaces".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &WeylElement) -> Result<WeylElement> {
        self.check(other)?;
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Ok(WeylElement { space: self.space.clone(), terms: normalize(terms) })
    }

    pub fn scale(&self, c: Complex64) -> WeylElement {
        WeylElement { space: self.space.clone(), terms: normalize(self.terms.iter().map(|t| (c * t.0, t.1)).collect()) }
    }

    pub fn sub(&self, other: &WeylElement) -> Result<WeylElement> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// W(phi) W(psi) = exp(-i sigma(phi, psi) / 2) W(phi + psi), extended bilinearly.
    pub fn mul(&self, other: &WeylElement) -> Result<WeylElement> {
        self.check(other)?;
        let sp = &self.space;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(a, x) in &self.terms {
            for &(b, y) in &other.terms {
                let s = sp.sigma(x, y)?;
                let z = sp.register_lincomb(1.0, x, 1.0, y)?;
                terms.push((a * b * Complex64::from_polar(1.0, -0.5 * s), z));
            }
        }
        Ok(WeylElement { space: sp.clone(), terms: normalize(terms) })
    }

    /// W(phi)* = W(-phi), coefficients conjugated.
    pub fn star(&self) -> Result<WeylElement> {
        let sp = &self.space;
        let mut terms = Vec::with_capacity(self.terms.len());
        for &(c, x) in &self.terms {
            terms.push((c.conj(), sp.register_lincomb(-1.0, x, 0.0, 0)?));
        }
        Ok(WeylElement { space: sp.clone(), terms: normalize(terms) })
    }

    /// sum |c_k|.
    pub fn norm1(&self) -> f64 {
        self.terms.iter().map(|t| t.0.norm()).sum()
    }

    /// || self - other ||_1 after merging equal generators.
    pub fn distance(&self, other: &WeylElement) -> Result<f64> {
        Ok(self.sub(other)?.norm1())
    }

    pub fn is_unit(&self, tol: f64) -> Result<bool> {
        Ok(self.distance(&WeylElement::unit(self.space.clone()))? <= tol)
    }
}
