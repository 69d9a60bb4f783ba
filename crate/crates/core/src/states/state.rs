use super::modes::{bose, ModeBasis};
use crate::algebra::TwoPointFunction;
use crate::error::{Error, Result};
use crate::geometry::embedding::Embedding;
use crate::geometry::spacetime::Spacetime;
use crate::solver::{symplectic_volume, TestFunction};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Relative weight allowed in the upper quarter of the mode range.
pub const TAIL_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub enum StateKind {
    Vacuum,
    Thermal { beta: f64 },
    PulledBack { parent: Arc<QuasifreeState>, embedding: Embedding },
}

/// Quasifree state on the flat cylinder given by its two-point function.
#[derive(Debug)]
pub struct QuasifreeState {
    pub kind: StateKind,
    pub basis: ModeBasis,
    cache: Mutex<HashMap<u64, Arc<Vec<Complex64>>>>,
}

pub fn vacuum_state(mass: f64, length: f64, k_max: usize) -> Result<Arc<QuasifreeState>> {
    Ok(Arc::new(QuasifreeState::root(StateKind::Vacuum, ModeBasis::new(mass, length, k_max)?)))
}

pub fn thermal_state(mass: f64, length: f64, k_max: usize, beta: f64) -> Result<Arc<QuasifreeState>> {
    if !(beta > 0.0) {
        return Err(Error::Precondition(format!("inverse temperature must be positive, got {beta}")));
    }
    Ok(Arc::new(QuasifreeState::root(StateKind::Thermal { beta }, ModeBasis::new(mass, length, k_max)?)))
}

/// omega o alpha_psi: f, h -> w2(psi_* f, psi_* h).
pub fn pullback_state(psi: &Embedding, state: &Arc<QuasifreeState>) -> Result<Arc<QuasifreeState>> {
    if !psi.target.is_flat() || !psi.source.is_flat() {
        return Err(Error::Precondition("mode states live on the flat cylinder".into()));
    }
    if (psi.target.grid.length - state.basis.length).abs() > 1e-12 || psi.target.theory.mass != state.basis.mass {
        return Err(Error::SpaceMismatch("state and embedding target disagree on L or m".into()));
    }
    Ok(Arc::new(QuasifreeState::root(
        StateKind::PulledBack { parent: state.clone(), embedding: psi.clone() },
        state.basis,
    )))
}

impl QuasifreeState {
    fn root(kind: StateKind, basis: ModeBasis) -> QuasifreeState {
        QuasifreeState { kind, basis, cache: Mutex::new(HashMap::new()) }
    }

    /// Occupation numbers of the underlying mode state.
    pub fn occupation(&self, n: i64) -> f64 {
        match &self.kind {
            StateKind::Vacuum => 0.0,
            StateKind::Thermal { beta } => bose(*beta, self.basis.omega(n)),
            StateKind::PulledBack { parent, .. } => parent.occupation(n),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            StateKind::Vacuum => "vacuum".into(),
            StateKind::Thermal { beta } => format!("thermal:{beta}"),
            StateKind::PulledBack { parent, .. } => format!("pullback({})", parent.label()),
        }
    }

    fn coefficients(&self, f: &TestFunction) -> Result<Arc<Vec<Complex64>>> {
        if let Some(c) = self.cache.lock().unwrap().get(&f.content_hash()) {
            return Ok(c.clone());
        }
        let c = self.basis.coefficients(f)?;
        let b = &self.basis;
        let lw = |n: i64| 1.0 / (2.0 * b.length * b.omega(n));
        let weight = |n: i64, a: &Complex64| a.norm_sqr() * lw(n) * (1.0 + 2.0 * self.occupation(n));
        let total: f64 = b.modes().zip(c.iter()).map(|(n, a)| weight(n, a)).sum();
        let cut = (3 * b.k_max / 4) as i64;
        let tail: f64 = b.modes().zip(c.iter()).filter(|(n, _)| n.abs() > cut).map(|(n, a)| weight(n, a)).sum();
        if tail > TAIL_TOL * total {
            return Err(Error::Cutoff(format!("mode tail {:.2e} of the total; raise k_max above {}", tail / total, b.k_max)));
        }
        let c = Arc::new(c);
        self.cache.lock().unwrap().insert(f.content_hash(), c.clone());
        Ok(c)
    }

    /// w2(f, h) = sum_n [(1 + N) a_n(f) conj a_n(h) + N conj a_n(f) a_n(h)] / (2 L w_n).
    pub fn two_point(&self, f: &TestFunction, h: &TestFunction) -> Result<Complex64> {
        if let StateKind::PulledBack { parent, embedding } = &self.kind {
            return parent.two_point(&embedding.push_forward(f)?, &embedding.push_forward(h)?);
        }
        let (af, ah) = (self.coefficients(f)?, self.coefficients(h)?);
        let b = &self.basis;
        let mut s = Complex64::new(0.0, 0.0);
        for (m, n) in b.modes().enumerate() {
            let occ = self.occupation(n);
            let p = af[m] * ah[m].conj();
            s += ((1.0 + occ) * p + occ * p.conj()) / (2.0 * b.length * b.omega(n));
        }
        Ok(s)
    }

    /// omega(W(E f)) = exp(-lambda w2(f, f)); lambda = 1/2 is the session convention.
    pub fn weyl_expectation(&self, f: &TestFunction, lambda: f64) -> Result<f64> {
        Ok((-lambda * self.two_point(f, f)?.re).exp())
    }

    /// Two-point matrix W_ij = w2(f_i, f_j).
    pub fn two_point_matrix(&self, fs: &[TestFunction]) -> Result<DMatrix<Complex64>> {
        let n = fs.len();
        let mut w = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            for j in i..n {
                let v = self.two_point(&fs[i], &fs[j])?;
                w[(i, j)] = v;
                w[(j, i)] = v.conj();
            }
        }
        Ok(w)
    }
}

impl TwoPointFunction for QuasifreeState {
    fn w2(&self, f: &TestFunction, h: &TestFunction) -> Result<Complex64> {
        self.two_point(f, h)
    }
}

/// Gram matrix M_ij = omega(W(phi_i)^* W(phi_j)) = e^{i sigma_ij / 2} e^{-lambda w(phi_j - phi_i)}.
pub fn weyl_gram(w: &DMatrix<Complex64>, sigma: &DMatrix<f64>, lambda: f64) -> DMatrix<Complex64> {
    let n = w.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let d = (w[(j, j)] + w[(i, i)] - w[(i, j)] - w[(j, i)]).re;
        Complex64::from_polar((-lambda * d).exp(), 0.5 * sigma[(i, j)])
    })
}

/// (smallest eigenvalue, trace) of a Hermitian matrix.
pub fn hermitian_min_eigen(m: &DMatrix<Complex64>) -> (f64, f64) {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(h);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    (min, m.trace().re)
}

/// max |w2(f,h) - w2(h,f) - i sigma(Ef, Eh)| / max |sigma| over the cyclic pairs (f_k, f_{k+1}).
pub fn ccr_deviation(state: &QuasifreeState, st: &Arc<Spacetime>, fs: &[TestFunction]) -> Result<f64> {
    let (mut dev, mut scale) = (0.0f64, 0.0f64);
    for k in 0..fs.len() {
        let (f, h) = (&fs[k], &fs[(k + 1) % fs.len()]);
        let asym = state.two_point(f, h)? - state.two_point(h, f)?;
        let s = symplectic_volume(st, f, h)?;
        dev = dev.max((asym - Complex64::new(0.0, s)).norm());
        scale = scale.max(s.abs());
    }
    if scale == 0.0 {
        return Err(Error::Precondition("probe pairs have vanishing symplectic form".into()));
    }
    Ok(dev / scale)
}

/// sigma_ij = sigma(E f_i, E f_j) by the solver.
pub fn sigma_matrix(st: &Arc<Spacetime>, fs: &[TestFunction]) -> Result<DMatrix<f64>> {
    let n = fs.len();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = symplectic_volume(st, &fs[i], &fs[j])?;
            s[(i, j)] = v;
            s[(j, i)] = -v;
        }
    }
    Ok(s)
}

/// (smallest eigenvalue, trace) of the Weyl Gram matrix for the family.
pub fn gram_spectrum(state: &QuasifreeState, st: &Arc<Spacetime>, fs: &[TestFunction], lambda: f64) -> Result<(f64, f64)> {
    let w = state.two_point_matrix(fs)?;
    Ok(hermitian_min_eigen(&weyl_gram(&w, &sigma_matrix(st, fs)?, lambda)))
}
