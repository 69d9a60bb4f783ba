use super::kg::{apply_kg, phi_tt_boundary, solve_row, Unknown, Work};
use super::testfn::TestFunction;
use crate::error::{Error, Result};
use crate::geometry::spacetime::Spacetime;
use crate::grid::GridField;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Relative round-off allowance for the stored residual check.
pub const RESIDUAL_RTOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeDirection {
    Forward,
    Backward,
}

/// Field value and time derivative on one level. Away from the slab ends pi is the centered
/// difference (phi_{j+1} - phi_{j-1}) / 2dt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
    pub slice_time: f64,
}

impl CauchyData {
    pub fn new(phi: Vec<f64>, pi: Vec<f64>, slice_time: f64) -> Result<CauchyData> {
        if phi.len() != pi.len() {
            return Err(Error::Precondition("phi and pi lengths differ".into()));
        }
        if phi.iter().chain(&pi).any(|v| !v.is_finite()) || !slice_time.is_finite() {
            return Err(Error::Precondition("Cauchy data must be finite".into()));
        }
        Ok(CauchyData { phi, pi, slice_time })
    }

    pub fn zero(n_x: usize, slice_time: f64) -> CauchyData {
        CauchyData { phi: vec![0.0; n_x], pi: vec![0.0; n_x], slice_time }
    }

    fn same_slice(&self, o: &CauchyData) -> Result<()> {
        if (self.slice_time - o.slice_time).abs() > 1e-9 || self.phi.len() != o.phi.len() {
            return Err(Error::SpaceMismatch(format!("slices t = {} and t = {} differ", self.slice_time, o.slice_time)));
        }
        Ok(())
    }

    pub fn lincomb(&self, a: f64, o: &CauchyData, b: f64) -> Result<CauchyData> {
        self.same_slice(o)?;
        Ok(CauchyData {
            phi: self.phi.iter().zip(&o.phi).map(|(x, y)| a * x + b * y).collect(),
            pi: self.pi.iter().zip(&o.pi).map(|(x, y)| a * x + b * y).collect(),
            slice_time: self.slice_time,
        })
    }
    pub fn add(&self, o: &CauchyData) -> Result<CauchyData> {
        self.lincomb(1.0, o, 1.0)
    }
    pub fn sub(&self, o: &CauchyData) -> Result<CauchyData> {
        self.lincomb(1.0, o, -1.0)
    }
    pub fn scale(&self, c: f64) -> CauchyData {
        CauchyData {
            phi: self.phi.iter().map(|v| c * v).collect(),
            pi: self.pi.iter().map(|v| c * v).collect(),
            slice_time: self.slice_time,
        }
    }

    /// sqrt(sum (phi^2 + pi^2) dx).
    pub fn norm(&self, dx: f64) -> f64 {
        (self.phi.iter().chain(&self.pi).map(|v| v * v).sum::<f64>() * dx).sqrt()
    }

    pub fn distance(&self, o: &CauchyData, dx: f64) -> Result<f64> {
        Ok(self.sub(o)?.norm(dx))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Origin {
    Data { slice_time: f64 },
    Retarded { source: u64 },
    Advanced { source: u64 },
    Causal { source: u64 },
    Combination,
}

/// Grid solution of K_g phi = source over the whole slab with its residual record.
#[derive(Clone, Debug)]
pub struct SolutionField {
    pub spacetime: Arc<Spacetime>,
    pub values: GridField,
    pub origin: Origin,
    /// max |K phi - source| over interior levels
    pub residual: f64,
    pub tolerance: f64,
}

impl SolutionField {
    pub fn lincomb(&self, a: f64, o: &SolutionField, b: f64) -> Result<SolutionField> {
        if !Arc::ptr_eq(&self.spacetime, &o.spacetime) {
            return Err(Error::SpaceMismatch("solutions on different spacetimes".into()));
        }
        Ok(SolutionField {
            spacetime: self.spacetime.clone(),
            values: self.values.zip(&o.values, |x, y| a * x + b * y),
            origin: Origin::Combination,
            residual: a.abs() * self.residual + b.abs() * o.residual,
            tolerance: a.abs() * self.tolerance + b.abs() * o.tolerance,
        })
    }
}

fn weighted_source(st: &Spacetime, source: Option<&GridField>, j: usize, out: &mut [f64]) {
    let n = st.grid.n_x;
    match source {
        None => out.iter_mut().for_each(|v| *v = 0.0),
        Some(f) => {
            for i in 0..n {
                out[i] = st.coeffs.sg[j * n + i] * f.at(j, i);
            }
        }
    }
}

fn march_forward(st: &Spacetime, v: &mut GridField, source: Option<&GridField>, from_row: usize, w: &mut Work) {
    let g = st.grid;
    let n = g.n_x;
    let mut src = vec![0.0; n];
    let mut out = vec![0.0; n];
    for j in from_row..g.n_t - 1 {
        weighted_source(st, source, j, &mut src);
        {
            let prev = &v.data[(j - 1) * n..j * n];
            let cur = &v.data[j * n..(j + 1) * n];
            solve_row(&st.coeffs, &g, j, prev, cur, &[], &src, Unknown::Next, &mut out, w);
        }
        v.row_mut(j + 1).copy_from_slice(&out);
    }
}

fn march_backward(st: &Spacetime, v: &mut GridField, source: Option<&GridField>, from_row: usize, w: &mut Work) {
    let g = st.grid;
    let n = g.n_x;
    let mut src = vec![0.0; n];
    let mut out = vec![0.0; n];
    for j in (1..=from_row).rev() {
        weighted_source(st, source, j, &mut src);
        {
            let cur = &v.data[j * n..(j + 1) * n];
            let next = &v.data[(j + 1) * n..(j + 2) * n];
            solve_row(&st.coeffs, &g, j, &[], cur, next, &src, Unknown::Prev, &mut out, w);
        }
        v.row_mut(j - 1).copy_from_slice(&out);
    }
}

/// max |K phi - f| over interior levels, and the matching round-off tolerance.
pub fn residual(st: &Spacetime, values: &GridField, source: Option<&GridField>) -> (f64, f64) {
    let g = st.grid;
    if g.n_t < 3 {
        return (0.0, 0.0);
    }
    let k = apply_kg(st, values);
    let n = g.n_x;
    let mut res: f64 = 0.0;
    let mut fmax: f64 = 0.0;
    for j in 1..g.n_t - 1 {
        for i in 0..n {
            let f = source.map_or(0.0, |s| s.at(j, i));
            res = res.max((k.at(j, i) - f).abs());
            fmax = fmax.max(f.abs());
        }
    }
    let c = &st.coeffs;
    let (idt2, idx2, imix) = (1.0 / (g.dt * g.dt), 1.0 / (g.dx() * g.dx()), 1.0 / (g.dt * g.dx()));
    let mut scale: f64 = 0.0;
    for q in 0..g.len() {
        let s = (2.0 * c.att[q].abs() * idt2 + 2.0 * c.axx[q].abs() * idx2 + 2.0 * c.atx[q].abs() * imix + c.pot[q].abs())
            / c.sg[q];
        scale = scale.max(s);
    }
    (res, RESIDUAL_RTOL * (scale * values.max_abs() + fmax) + 1e-300)
}

fn finish(st: &Arc<Spacetime>, values: GridField, source: Option<&GridField>, origin: Origin) -> Result<SolutionField> {
    let (res, tol) = residual(st, &values, source);
    if !(res <= tol) {
        return Err(Error::InvalidSolution(format!("residual {res:.3e} above tolerance {tol:.3e}")));
    }
    Ok(SolutionField { spacetime: st.clone(), values, origin, residual: res, tolerance: tol })
}

fn check_source(st: &Spacetime, f: Option<&TestFunction>) -> Result<()> {
    if let Some(f) = f {
        if f.grid() != st.grid {
            return Err(Error::SpaceMismatch("source lives on another grid".into()));
        }
    }
    Ok(())
}

/// Evolve Cauchy data given on any level through the whole slab. On interior levels the
/// neighbouring levels are reconstructed exactly from row j of the scheme; on the slab ends a
/// second-order Taylor step from the continuum equation starts the march.
pub fn evolve(st: &Arc<Spacetime>, data: &CauchyData, source: Option<&TestFunction>) -> Result<SolutionField> {
    check_source(st, source)?;
    let g = st.grid;
    let n = g.n_x;
    if data.phi.len() != n {
        return Err(Error::SpaceMismatch(format!("data has {} nodes, grid has {n}", data.phi.len())));
    }
    let j = g.level_of(data.slice_time)?;
    let src_field = source.map(|f| f.values());
    let mut v = GridField::zeros(g);
    v.row_mut(j).copy_from_slice(&data.phi);
    let mut w = Work::new(n);
    let mut src = vec![0.0; n];
    weighted_source(st, src_field, j, &mut src);
    if j == 0 || j == g.n_t - 1 {
        let tt = phi_tt_boundary(&st.coeffs, &g, j, &data.phi, &data.pi, &src);
        let s = if j == 0 { 1.0 } else { -1.0 };
        let other: Vec<f64> =
            (0..n).map(|i| data.phi[i] + s * g.dt * data.pi[i] + 0.5 * g.dt * g.dt * tt[i]).collect();
        if j == 0 {
            v.row_mut(1).copy_from_slice(&other);
            march_forward(st, &mut v, src_field, 1, &mut w);
        } else {
            v.row_mut(j - 1).copy_from_slice(&other);
            march_backward(st, &mut v, src_field, j - 1, &mut w);
        }
    } else {
        let shift: Vec<f64> = data.pi.iter().map(|p| -2.0 * g.dt * p).collect();
        let mut next = vec![0.0; n];
        solve_row(&st.coeffs, &g, j, &shift, &data.phi, &[], &src, Unknown::Both, &mut next, &mut w);
        let prev: Vec<f64> = next.iter().zip(&shift).map(|(a, b)| a + b).collect();
        v.row_mut(j + 1).copy_from_slice(&next);
        v.row_mut(j - 1).copy_from_slice(&prev);
        march_forward(st, &mut v, src_field, j + 1, &mut w);
        march_backward(st, &mut v, src_field, j - 1, &mut w);
    }
    finish(st, v, src_field, Origin::Data { slice_time: data.slice_time })
}

/// Cauchy problem K_g phi = source. Data on the first level march forward, data on the last
/// level march backward; data on an interior level are evolved both ways.
pub fn solve_cauchy(
    st: &Arc<Spacetime>,
    data: &CauchyData,
    source: Option<&TestFunction>,
    direction: TimeDirection,
) -> Result<SolutionField> {
    let g = st.grid;
    let j = g.level_of(data.slice_time)?;
    match (direction, j) {
        (TimeDirection::Forward, j) if j == g.n_t - 1 && g.n_t > 1 => {
            Err(Error::OutOfDomain("forward solve from the last level".into()))
        }
        (TimeDirection::Backward, 0) => Err(Error::OutOfDomain("backward solve from the first level".into())),
        _ => evolve(st, data, source),
    }
}

/// Retarded solution: vanishes before supp f.
pub fn e_ret(st: &Arc<Spacetime>, f: &TestFunction) -> Result<SolutionField> {
    check_source(st, Some(f))?;
    let mut v = GridField::zeros(st.grid);
    if !f.is_zero() {
        let mut w = Work::new(st.grid.n_x);
        march_forward(st, &mut v, Some(f.values()), 1, &mut w);
    }
    finish(st, v, Some(f.values()), Origin::Retarded { source: f.content_hash() })
}

/// Advanced solution: vanishes after supp f.
pub fn e_adv(st: &Arc<Spacetime>, f: &TestFunction) -> Result<SolutionField> {
    check_source(st, Some(f))?;
    let g = st.grid;
    let mut v = GridField::zeros(g);
    if !f.is_zero() {
        let mut w = Work::new(g.n_x);
        march_backward(st, &mut v, Some(f.values()), g.n_t - 2, &mut w);
    }
    finish(st, v, Some(f.values()), Origin::Advanced { source: f.content_hash() })
}

/// E f = E^adv f - E^ret f.
pub fn e_causal(st: &Arc<Spacetime>, f: &TestFunction) -> Result<SolutionField> {
    let a = e_adv(st, f)?;
    let r = e_ret(st, f)?;
    let mut s = a.lincomb(1.0, &r, -1.0)?;
    let (res, tol) = residual(st, &s.values, None);
    s.residual = res;
    s.tolerance = tol.max(s.tolerance);
    s.origin = Origin::Causal { source: f.content_hash() };
    Ok(s)
}

/// Data of a field on an interior level.
pub fn restrict_to_data(field: &SolutionField, slice_time: f64) -> Result<CauchyData> {
    restrict_values(&field.values, slice_time)
}

pub fn restrict_values(values: &GridField, slice_time: f64) -> Result<CauchyData> {
    let g = values.grid;
    let j = g.level_of(slice_time)?;
    if j == 0 || j == g.n_t - 1 {
        return Err(Error::OutOfDomain(format!("level {j} is a slab end; centered pi needs both neighbours")));
    }
    let pi = values.row(j + 1).iter().zip(values.row(j - 1)).map(|(a, b)| (a - b) / (2.0 * g.dt)).collect();
    Ok(CauchyData { phi: values.row(j).to_vec(), pi, slice_time: g.t(j) })
}
