#![allow(dead_code)]

use covkg::bump::Bump;
use covkg::geometry::{Metric, MetricFamily, Spacetime, Theory};
use covkg::solver::TestFunction;
use covkg::Grid;
use std::sync::Arc;

pub const TAU: f64 = std::f64::consts::TAU;

pub fn grid(n_x: usize) -> Grid {
    Grid::with_courant(2 * n_x, n_x, 0.0, TAU, 0.5).unwrap()
}

pub fn flat(n_x: usize) -> Arc<Spacetime> {
    Spacetime::flat(Theory::default(), grid(n_x)).unwrap()
}

pub fn family_st(n_x: usize, fam: &MetricFamily) -> Arc<Spacetime> {
    let g = grid(n_x);
    Spacetime::new(Theory::default(), fam.metric(g).unwrap()).unwrap()
}

pub fn bump_fn(g: Grid, tc: f64, xc: f64, rt: f64, rx: f64) -> TestFunction {
    TestFunction::bump(g, Bump::new(tc, xc, rt, rx), 1.0).unwrap()
}

pub fn tensor_bump(amp: f64) -> MetricFamily {
    MetricFamily::TensorBump { amp, comps: [1.0, 0.6, -0.8], bump: Bump::new(3.1, 2.0, 0.9, 1.1) }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn metric_of(st: &Spacetime) -> &Metric {
    &st.metric
}

/// log2 of successive error ratios.
pub fn orders(errs: &[f64]) -> Vec<f64> {
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
