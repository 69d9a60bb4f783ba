use super::config::RceConfig;
use super::cutoff::{Branch, CutoffPair};
use crate::algebra::WeylElement;
use crate::error::{Error, Result};
use crate::geometry::spacetime::Spacetime;
use crate::grid::GridField;
use crate::solver::propagate::residual;
use crate::solver::{e_causal, evolve, restrict_values, CauchyData, SolutionField, TestFunction};
use std::sync::Arc;

/// Compactly supported source u with E u = phi, and the strip-local solution E_N u.
#[derive(Clone, Debug)]
pub struct TInverse {
    pub source: TestFunction,
    pub local: SolutionField,
}

/// T_N^{-1} phi. ret: u = +K(chi_ret phi); adv: u = -K(chi_adv phi). Either way E u = phi.
pub fn t_inverse(st: &Arc<Spacetime>, cut: &CutoffPair, phi: &SolutionField, branch: Branch) -> Result<TInverse> {
    if !Arc::ptr_eq(&phi.spacetime, st) {
        return Err(Error::SpaceMismatch("solution lives on another spacetime".into()));
    }
    let (res, tol) = residual(st, &phi.values, None);
    if !(res <= 10.0 * tol) {
        return Err(Error::InvalidSolution(format!("K phi = {res:.3e} is not a solution (tolerance {tol:.3e})")));
    }
    let u = cut.source(st, branch, phi)?;
    let u = if branch == Branch::Adv { u.scale(-1.0) } else { u };
    let (la, lb) = cut.levels;
    let sub = st.sub_slab(la, lb)?;
    let n = st.grid.n_x;
    let local_u = TestFunction::new(GridField { grid: sub.grid, data: u.values().data[la * n..(lb + 1) * n].to_vec() })?;
    let local = e_causal(&sub, &local_u)?;
    Ok(TInverse { source: u, local })
}

/// T_N: a strip-local solution extended to the whole slab of `st`.
pub fn t_extend(st: &Arc<Spacetime>, local: &SolutionField) -> Result<SolutionField> {
    let g = local.spacetime.grid;
    let d = restrict_values(&local.values, g.t(g.n_t / 2))?;
    evolve(st, &d, None)
}

/// The three evaluations of F_g for one perturbed spacetime g.
pub struct Relative<'a> {
    pub config: &'a RceConfig,
    pub g: Arc<Spacetime>,
}

impl<'a> Relative<'a> {
    pub fn new(config: &'a RceConfig, s: f64) -> Result<Relative<'a>> {
        Ok(Relative { config, g: config.perturbed(s)? })
    }

    pub fn with_spacetime(config: &'a RceConfig, g: Arc<Spacetime>) -> Result<Relative<'a>> {
        if g.grid != config.grid() {
            return Err(Error::SpaceMismatch("perturbed spacetime on another grid".into()));
        }
        Ok(Relative { config, g })
    }

    fn background(&self, phi: &CauchyData) -> Result<SolutionField> {
        evolve(&self.config.background, phi, None)
    }

    /// T_{N-,0} T_{N-,g}^{-1} T_{N+,g} T_{N+,0}^{-1}, with strip-local propagators.
    pub fn composed(&self, phi: &CauchyData) -> Result<CauchyData> {
        let c = self.config;
        let bg = &c.background;
        let phi0 = self.background(phi)?;
        let plus = t_inverse(bg, &c.cut_plus, &phi0, Branch::Ret)?;
        let psi = t_extend(&self.g, &plus.local)?;
        let minus = t_inverse(&self.g, &c.cut_minus, &psi, Branch::Ret)?;
        let out = t_extend(bg, &minus.local)?;
        restrict_values(&out.values, phi.slice_time)
    }

    /// E0 K_g chi-_ret E_g K0 chi+_ret phi, literally.
    pub fn closed_form(&self, phi: &CauchyData) -> Result<CauchyData> {
        let c = self.config;
        let bg = &c.background;
        let phi0 = self.background(phi)?;
        let u_plus = c.cut_plus.source(bg, Branch::Ret, &phi0)?;
        let psi = e_causal(&self.g, &u_plus)?;
        let u_minus = c.cut_minus.source(&self.g, Branch::Ret, &psi)?;
        let out = e_causal(bg, &u_minus)?;
        restrict_values(&out.values, phi.slice_time)
    }

    /// Plain Cauchy evolution: g0 up to N+, g back down to N-, g0 to the slice.
    pub fn direct(&self, phi: &CauchyData) -> Result<CauchyData> {
        let c = self.config;
        let grid = c.grid();
        let phi0 = self.background(phi)?;
        let d_plus = restrict_values(&phi0.values, grid.t(RceConfig::mid_level(&c.cut_plus)))?;
        let psi = evolve(&self.g, &d_plus, None)?;
        let d_minus = restrict_values(&psi.values, grid.t(RceConfig::mid_level(&c.cut_minus)))?;
        let out = evolve(&c.background, &d_minus, None)?;
        restrict_values(&out.values, phi.slice_time)
    }
}

pub fn rce_composed(cfg: &RceConfig, phi: &CauchyData) -> Result<CauchyData> {
    Relative::new(cfg, 1.0)?.composed(phi)
}

pub fn rce_closed_form(cfg: &RceConfig, phi: &CauchyData) -> Result<CauchyData> {
    Relative::new(cfg, 1.0)?.closed_form(phi)
}

pub fn rce_direct(cfg: &RceConfig, phi: &CauchyData) -> Result<CauchyData> {
    Relative::new(cfg, 1.0)?.direct(phi)
}

/// beta_g(W(phi)) = W(F_g phi), coefficients unchanged.
pub fn beta_on_weyl(cfg: &RceConfig, a: &WeylElement) -> Result<WeylElement> {
    let sp = &a.space;
    if !Arc::ptr_eq(&sp.spacetime, &cfg.background) {
        return Err(Error::SpaceMismatch("element is not over the background's solution space".into()));
    }
    let rel = Relative::new(cfg, 1.0)?;
    let mut terms = Vec::with_capacity(a.terms.len());
    for &(c, id) in &a.terms {
        let image = if id == 0 { 0 } else { sp.register_data(rel.composed(&sp.data(id)?)?)? };
        terms.push((c, image));
    }
    WeylElement::new(sp.clone(), terms)
}

/// Probe Cauchy data on the reference slice: E0 of bumps spread over the slab.
pub fn probe_data(cfg: &RceConfig, count: usize) -> Result<Vec<CauchyData>> {
    use crate::geometry::region::Region;
    let bg = &cfg.background;
    let (a, b) = cfg.free_window();
    let fs = crate::probe::probe_functions(&Region::strip(a, b), bg.grid, count)?;
    fs.iter().map(|f| restrict_values(&e_causal(bg, f)?.values, cfg.reference)).collect()
}
