use super::cutoff::{cutoffs, CutoffPair, EDGE_MARGIN};
use crate::bump::Bump;
use crate::error::{Error, Result};
use crate::geometry::flow::Perturbation;
use crate::geometry::metric::{Metric, MetricFamily};
use crate::geometry::region::Region;
use crate::geometry::spacetime::{Spacetime, Theory};
use crate::grid::Grid;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Grid-independent description of a relative Cauchy evolution scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RceSetup {
    /// The perturbed metric g; g - flat is the perturbation.
    pub family: MetricFamily,
    pub n_minus: (f64, f64),
    pub n_plus: (f64, f64),
    pub smoothstep_order: usize,
    /// Reference slice; defaults to the middle of N-.
    pub reference: Option<f64>,
}

impl RceSetup {
    /// N- = [0.10, 0.25] T, N+ = [0.75, 0.90] T of the slab, tensor bump of amplitude `amp`
    /// centred at T/2.
    pub fn standard(grid: &Grid, amp: f64) -> RceSetup {
        let t0 = grid.t0;
        let span = grid.t_end() - t0;
        let bump = Bump::new(t0 + 0.5 * span, 0.5 * grid.length, 0.15 * span, 0.25 * grid.length);
        RceSetup {
            family: MetricFamily::TensorBump { amp, comps: [1.0, 0.6, -0.8], bump },
            n_minus: (t0 + 0.10 * span, t0 + 0.25 * span),
            n_plus: (t0 + 0.75 * span, t0 + 0.90 * span),
            smoothstep_order: 2,
            reference: None,
        }
    }

    pub fn with_family(mut self, family: MetricFamily) -> RceSetup {
        self.family = family;
        self
    }

    pub fn build(&self, theory: Theory, grid: Grid) -> Result<RceConfig> {
        let background = Spacetime::flat(theory, grid)?;
        let g = self.family.metric(grid)?;
        let h = Perturbation::between(&g, &background.metric);
        let mut cfg = RceConfig::new(
            background,
            Region::strip(self.n_minus.0, self.n_minus.1),
            Region::strip(self.n_plus.0, self.n_plus.1),
            h,
            self.smoothstep_order,
            self.reference,
        )?;
        cfg.family = Some(self.family.clone());
        Ok(cfg)
    }
}

/// Background, the two Cauchy strips with their cutoffs, and the perturbation g - g0.
#[derive(Clone, Debug)]
pub struct RceConfig {
    pub background: Arc<Spacetime>,
    pub n_minus: Region,
    pub n_plus: Region,
    pub perturbation: Perturbation,
    pub family: Option<MetricFamily>,
    pub cut_minus: CutoffPair,
    pub cut_plus: CutoffPair,
    pub reference: f64,
}

fn strip_bounds(r: &Region) -> Result<(f64, f64)> {
    match r {
        Region::Strip { t_a, t_b } => Ok((*t_a, *t_b)),
        _ => Err(Error::Precondition("N+ and N- must be strips".into())),
    }
}

impl RceConfig {
    pub fn new(
        background: Arc<Spacetime>,
        n_minus: Region,
        n_plus: Region,
        perturbation: Perturbation,
        order: usize,
        reference: Option<f64>,
    ) -> Result<RceConfig> {
        if !background.is_flat() {
            return Err(Error::Precondition("relative Cauchy evolution needs a flat background".into()));
        }
        let grid = background.grid;
        if perturbation.grid() != grid {
            return Err(Error::SpaceMismatch("perturbation on another grid".into()));
        }
        let (ma, mb) = strip_bounds(&n_minus)?;
        let (pa, pb) = strip_bounds(&n_plus)?;
        if !(mb < pa) {
            return Err(Error::Precondition("N- must lie in the past of N+".into()));
        }
        let cut_minus = cutoffs(&n_minus, grid, order)?;
        let cut_plus = cutoffs(&n_plus, grid, order)?;
        if !perturbation.is_zero() && !(perturbation.t_minus > mb && perturbation.t_plus < pa) {
            return Err(Error::Precondition(format!(
                "perturbation support [{}, {}] not strictly between N- = [{ma}, {mb}] and N+ = [{pa}, {pb}]",
                perturbation.t_minus, perturbation.t_plus
            )));
        }
        perturbation.apply(&background.metric, 1.0)?;
        let reference = match reference {
            Some(t) => grid.t(grid.level_of(t)?),
            None => grid.t((cut_minus.levels.0 + cut_minus.levels.1) / 2),
        };
        let jr = grid.level_of(reference)?;
        if jr == 0 || jr + 1 >= grid.n_t || (!perturbation.is_zero() && reference >= perturbation.t_minus) {
            return Err(Error::Precondition("reference slice must be interior and in the past of the perturbation".into()));
        }
        Ok(RceConfig { background, n_minus, n_plus, perturbation, family: None, cut_minus, cut_plus, reference })
    }

    pub fn grid(&self) -> Grid {
        self.background.grid
    }

    /// g0 + s h.
    pub fn metric(&self, s: f64) -> Result<Metric> {
        self.perturbation.apply(&self.background.metric, s)
    }

    pub fn perturbed(&self, s: f64) -> Result<Arc<Spacetime>> {
        if s == 0.0 {
            return Ok(self.background.clone());
        }
        Spacetime::new(self.background.theory, self.metric(s)?)
    }

    /// Same strips, another perturbation.
    pub fn with_perturbation(&self, h: Perturbation, family: Option<MetricFamily>) -> Result<RceConfig> {
        let mut c = RceConfig::new(
            self.background.clone(),
            self.n_minus.clone(),
            self.n_plus.clone(),
            h,
            self.cut_minus.order,
            Some(self.reference),
        )?;
        c.family = family;
        Ok(c)
    }

    /// Level in the middle of a strip's cutoff transition.
    pub fn mid_level(cut: &CutoffPair) -> usize {
        let (la, lb) = cut.levels;
        let _ = EDGE_MARGIN;
        (la + lb) / 2
    }

    /// (t_b of N-, t_a of N+): the open region the perturbation and gauge fields must live in.
    pub fn free_window(&self) -> (f64, f64) {
        (self.cut_minus.strip.1, self.cut_plus.strip.0)
    }
}
