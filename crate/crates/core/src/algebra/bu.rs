use crate::error::{Error, Result};
use crate::geometry::embedding::Embedding;
use crate::solver::TestFunction;
use num_complex::Complex64;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

pub const DEFAULT_CUTOFF: usize = 4;

/// Ordered tensor product f_1 x ... x f_n, keyed by the factors' content hashes.
pub type Word = Vec<u64>;

/// Truncated tensor algebra element (f_0, f_1, ..., f_N); f_n is a sparse sum of elementary
/// tensors with complex coefficients.
#[derive(Clone, Debug)]
pub struct BUElement {
    pub cutoff: usize,
    /// components[n]: word of length n -> coefficient
    pub components: Vec<BTreeMap<Word, Complex64>>,
    pub factors: HashMap<u64, Arc<TestFunction>>,
    /// set when a product produced degrees above the cutoff
    pub truncated: bool,
}

impl BUElement {
    pub fn zero(cutoff: usize) -> BUElement {
        BUElement { cutoff, components: vec![BTreeMap::new(); cutoff + 1], factors: HashMap::new(), truncated: false }
    }

    pub fn unit(cutoff: usize) -> BUElement {
        BUElement::scalar(cutoff, Complex64::new(1.0, 0.0))
    }

    pub fn scalar(cutoff: usize, c: Complex64) -> BUElement {
        let mut e = BUElement::zero(cutoff);
        if c != Complex64::new(0.0, 0.0) {
            e.components[0].insert(vec![], c);
        }
        e
    }

    /// c f_1 x ... x f_n as an element.
    pub fn monomial(cutoff: usize, c: Complex64, fs: &[TestFunction]) -> Result<BUElement> {
        if fs.len() > cutoff {
            return Err(Error::Combinatorial(format!("degree {} above cutoff {cutoff}", fs.len())));
        }
        let mut e = BUElement::zero(cutoff);
        let word = fs
            .iter()
            .map(|f| {
                e.factors.insert(f.content_hash(), Arc::new(f.clone()));
                f.content_hash()
            })
            .collect::<Word>();
        e.insert(word, c);
        Ok(e)
    }

    fn insert(&mut self, w: Word, c: Complex64) {
        let comp = &mut self.components[w.len()];
        let v = comp.entry(w.clone()).or_insert(Complex64::new(0.0, 0.0));
        *v += c;
        if *v == Complex64::new(0.0, 0.0) {
            comp.remove(&w);
        }
    }

    pub fn factor(&self, h: u64) -> &TestFunction {
        &self.factors[&h]
    }

    pub fn degree(&self) -> usize {
        (0..=self.cutoff).rev().find(|&n| !self.components[n].is_empty()).unwrap_or(0)
    }

    fn check(&self, o: &BUElement) -> Result<()> {
        if self.cutoff != o.cutoff {
            return Err(Error::SpaceMismatch(format!("cutoffs {} and {} differ", self.cutoff, o.cutoff)));
        }
        Ok(())
    }

    pub fn add(&self, o: &BUElement) -> Result<BUElement> {
        self.lincomb(Complex64::new(1.0, 0.0), o, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, o: &BUElement) -> Result<BUElement> {
        self.lincomb(Complex64::new(1.0, 0.0), o, Complex64::new(-1.0, 0.0))
    }

    pub fn lincomb(&self, a: Complex64, o: &BUElement, b: Complex64) -> Result<BUElement> {
        self.check(o)?;
        let mut e = BUElement::zero(self.cutoff);
        e.truncated = self.truncated || o.truncated;
        for (src, c) in [(self, a), (o, b)] {
            for comp in &src.components {
                for (w, v) in comp {
                    e.insert(w.clone(), c * v);
                }
            }
            for (h, f) in &src.factors {
                e.factors.entry(*h).or_insert_with(|| f.clone());
            }
        }
        Ok(e)
    }

    pub fn scale(&self, c: Complex64) -> BUElement {
        self.lincomb(c, &BUElement::zero(self.cutoff), Complex64::new(0.0, 0.0)).expect("same cutoff")
    }

    /// (fg)_n = sum_{i+j=n} f_i x g_j, components above the cutoff dropped and flagged.
    pub fn mul(&self, o: &BUElement) -> Result<BUElement> {
        self.check(o)?;
        let mut e = BUElement::zero(self.cutoff);
        e.truncated = self.truncated || o.truncated;
        for (h, f) in self.factors.iter().chain(&o.factors) {
            e.factors.entry(*h).or_insert_with(|| f.clone());
        }
        for a in &self.components {
            for (wa, ca) in a {
                for b in &o.components {
                    for (wb, cb) in b {
                        if wa.len() + wb.len() > self.cutoff {
                            e.truncated = true;
                            continue;
                        }
                        let mut w = wa.clone();
                        w.extend_from_slice(wb);
                        e.insert(w, ca * cb);
                    }
                }
            }
        }
        Ok(e)
    }

    /// (f*)_n(x_1..x_n) = conj f_n(x_n..x_1).
    pub fn star(&self) -> BUElement {
        let mut e = BUElement::zero(self.cutoff);
        e.truncated = self.truncated;
        e.factors = self.factors.clone();
        for comp in &self.components {
            for (w, c) in comp {
                e.insert(w.iter().rev().cloned().collect(), c.conj());
            }
        }
        e
    }

    /// Sum of |coefficients|; words are canonical so this is a norm on the sparse representation.
    pub fn norm1(&self) -> f64 {
        self.components.iter().flat_map(|c| c.values()).map(|c| c.norm()).sum()
    }

    pub fn distance(&self, o: &BUElement) -> Result<f64> {
        Ok(self.sub(o)?.norm1())
    }

    /// Terms (coefficient, factors) in a fixed order.
    pub fn terms(&self) -> Vec<(Complex64, Vec<&TestFunction>)> {
        self.components
            .iter()
            .flat_map(|comp| comp.iter().map(|(w, c)| (*c, w.iter().map(|h| self.factor(*h)).collect())))
            .collect()
    }
}

/// Phi(f): f in degree one.
pub fn bu_field(f: &TestFunction, cutoff: usize) -> Result<BUElement> {
    BUElement::monomial(cutoff, Complex64::new(1.0, 0.0), std::slice::from_ref(f))
}

pub fn bu_mul(a: &BUElement, b: &BUElement) -> Result<BUElement> {
    a.mul(b)
}

pub fn bu_star(a: &BUElement) -> BUElement {
    a.star()
}

/// alpha_psi((f_n)) = (psi_* f_n), factor by factor.
pub fn bu_push_forward(psi: &Embedding, a: &BUElement) -> Result<BUElement> {
    let mut map: HashMap<u64, Arc<TestFunction>> = HashMap::new();
    for (h, f) in &a.factors {
        map.insert(*h, Arc::new(psi.push_forward(f)?));
    }
    let mut e = BUElement::zero(a.cutoff);
    e.truncated = a.truncated;
    for comp in &a.components {
        for (w, c) in comp {
            let nw: Word = w.iter().map(|h| map[h].content_hash()).collect();
            e.insert(nw, *c);
        }
    }
    for f in map.values() {
        e.factors.insert(f.content_hash(), f.clone());
    }
    Ok(e)
}

/// Anything with a two-point function on test functions.
pub trait TwoPointFunction {
    fn w2(&self, f: &TestFunction, h: &TestFunction) -> Result<Complex64>;
}

pub const MAX_EVAL_DEGREE: usize = 8;

/// omega(a) for a quasifree omega: odd moments vanish, even moments are sums over pairings
/// of products w2(f_i, f_j), i < j.
pub fn quasifree_eval_bu(state: &dyn TwoPointFunction, a: &BUElement) -> Result<Complex64> {
    if a.cutoff > MAX_EVAL_DEGREE {
        return Err(Error::Combinatorial(format!("cutoff {} above {MAX_EVAL_DEGREE}", a.cutoff)));
    }
    let mut cache: HashMap<(u64, u64), Complex64> = HashMap::new();
    let mut total = Complex64::new(0.0, 0.0);
    for (n, comp) in a.components.iter().enumerate() {
        if n % 2 == 1 {
            continue;
        }
        for (w, c) in comp {
            let mut pair = |i: usize, j: usize| -> Result<Complex64> {
                let key = (w[i], w[j]);
                if let Some(v) = cache.get(&key) {
                    return Ok(*v);
                }
                let v = state.w2(a.factor(w[i]), a.factor(w[j]))?;
                cache.insert(key, v);
                Ok(v)
            };
            let mut idx: Vec<usize> = (0..n).collect();
            total += c * pairings(&mut idx, &mut pair)?;
        }
    }
    Ok(total)
}

fn pairings(rest: &mut Vec<usize>, pair: &mut dyn FnMut(usize, usize) -> Result<Complex64>) -> Result<Complex64> {
    if rest.is_empty() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let first = rest.remove(0);
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..rest.len() {
        let partner = rest.remove(k);
        s += pair(first, partner)? * pairings(rest, pair)?;
        rest.insert(k, partner);
    }
    rest.insert(0, first);
    Ok(s)
}
