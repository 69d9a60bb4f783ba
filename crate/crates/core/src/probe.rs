//! Deterministic probe test functions placed inside regions.

use crate::bump::Bump;
use crate::error::{Error, Result};
use crate::geometry::region::Region;
use crate::grid::Grid;
use crate::solver::TestFunction;

/// Levels a test function must keep free at each slab end.
const END_LEVELS: f64 = 3.0;

/// Bumps whose coordinate support sits inside `region`, with staggered centres and widths.
pub fn probe_bumps(region: &Region, grid: Grid, count: usize) -> Result<Vec<Bump>> {
    let lo = grid.t0 + END_LEVELS * grid.dt;
    let hi = grid.t_end() - END_LEVELS * grid.dt;
    let frac = |k: usize| (k as f64 + 0.5) / count as f64 - 0.5;
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        // deterministic jitter in (-0.5, 0.5)
        let j = ((k as f64 * 0.618_033_988_75).fract()) - 0.5;
        let b = match region {
            Region::Diamond { tc, xc, radius } => {
                let r = *radius;
                let (dt, dx) = (0.12 * r * j, 0.12 * r * frac(k) * 2.0);
                Bump::new(tc + dt, xc + dx, r * (0.32 + 0.06 * j), r * (0.3 - 0.05 * j))
            }
            Region::Strip { t_a, t_b } | Region::Rect { t_a, t_b, .. } => {
                let (a, b) = (t_a.max(lo), t_b.min(hi));
                let w = b - a;
                let rt = w * (0.3 + 0.05 * j);
                let xc = match region {
                    Region::Rect { xc, .. } => *xc,
                    _ => grid.length * (0.5 + 0.8 * frac(k)),
                };
                let rx = match region {
                    Region::Rect { half_width, .. } => half_width * (0.8 + 0.1 * j),
                    _ => grid.length * (0.15 + 0.03 * j),
                };
                Bump::new(0.5 * (a + b) + 0.1 * w * j, xc, rt, rx)
            }
            Region::Whole => {
                let w = hi - lo;
                Bump::new(0.5 * (lo + hi) + 0.1 * w * j, grid.length * (0.5 + 0.8 * frac(k)), w * (0.25 + 0.05 * j), grid.length * (0.15 + 0.03 * j))
            }
            Region::Union { parts } => {
                let p = &parts[k % parts.len()];
                probe_bumps(p, grid, count)?[k]
            }
        };
        out.push(b);
    }
    for b in &out {
        if b.rt < 2.0 * grid.dt || b.rx < 2.0 * grid.dx() {
            return Err(Error::Resolution(format!("region too small for resolved probes (rt = {}, rx = {})", b.rt, b.rx)));
        }
    }
    Ok(out)
}

/// Probe test functions with amplitudes of order one.
pub fn probe_functions(region: &Region, grid: Grid, count: usize) -> Result<Vec<TestFunction>> {
    probe_bumps(region, grid, count)?
        .into_iter()
        .enumerate()
        .map(|(k, b)| TestFunction::bump(grid, b, 1.0 + 0.25 * k as f64))
        .collect()
}
