//! Pinned acceptance tolerances.

/// Functor composition for lattice translations and inclusions (relative).
pub const FUNCTOR_ALGEBRAIC: f64 = 1e-8;
/// Discretization-limited quantities at the base grid (relative).
pub const PDE_REL: f64 = 1e-2;
/// Minimum observed convergence order.
pub const ORDER_MIN: f64 = 1.7;
/// Below this relative error a quantity counts as a discrete identity; no order is asked for.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;
/// Antisymmetric part of the two-point function against i sigma / 2 (relative).
pub const CCR_REL: f64 = 1e-3;
/// Gram eigenvalue floor, in units of the trace.
pub const GRAM_FLOOR: f64 = 1e-8;
pub const COCYCLE: f64 = 1e-12;
pub const TRIVIALIZATION_REL: f64 = 1e-3;
pub const MU_SHIFT: f64 = 1e-6;
pub const THERMAL_ORACLE: f64 = 1e-6;
/// Borchers-Uhlmann identities.
pub const BU_EXACT: f64 = 1e-12;
/// Gauge over non-gauge stress pairing.
pub const DIVERGENCE_CONTRAST: f64 = 1e-2;
/// Morphism certificate: |sigma' - sigma| / max |sigma| over the probes.
pub const CERTIFICATE_REL: f64 = 1e-8;

/// Observed orders log2(e_k / e_{k+1}) of a dyadic refinement sequence.
pub fn observed_orders(errs: &[f64]) -> Vec<f64> {
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Convergence verdict: every order at least ORDER_MIN, unless the finest error is already at
/// the round-off floor. Returns (pass, worst order or NaN when at floor).
pub fn order_verdict(errs: &[f64]) -> (bool, f64) {
    let last = *errs.last().unwrap_or(&0.0);
    if last <= ROUNDOFF_FLOOR {
        return (true, f64::NAN);
    }
    let ps = observed_orders(errs);
    let worst = ps.iter().cloned().fold(f64::INFINITY, f64::min);
    (ps.iter().all(|&p| p >= ORDER_MIN), worst)
}
