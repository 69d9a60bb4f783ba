use super::spacetime::Spacetime;
use crate::error::{Error, Result};
use crate::grid::{periodic_delta, Grid};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    /// { |t - tc| + d(x, xc) < radius }
    Diamond { tc: f64, xc: f64, radius: f64 },
    /// { t_a <= t <= t_b }
    Strip { t_a: f64, t_b: f64 },
    Whole,
    /// Coordinate box { t_a <= t <= t_b, d(x, xc) <= half_width }; used for supports.
    Rect { t_a: f64, t_b: f64, xc: f64, half_width: f64 },
    Union { parts: Vec<Region> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Future,
    Past,
    Both,
}

impl Region {
    pub fn diamond(tc: f64, xc: f64, radius: f64) -> Region {
        Region::Diamond { tc, xc, radius }
    }
    pub fn strip(t_a: f64, t_b: f64) -> Region {
        Region::Strip { t_a, t_b }
    }

    pub fn contains(&self, t: f64, x: f64, length: f64) -> bool {
        match self {
            Region::Diamond { tc, xc, radius } => (t - tc).abs() + periodic_delta(x, *xc, length).abs() < *radius,
            Region::Strip { t_a, t_b } => t >= t_a - 1e-12 && t <= t_b + 1e-12,
            Region::Whole => true,
            Region::Rect { t_a, t_b, xc, half_width } => {
                t >= t_a - 1e-12 && t <= t_b + 1e-12 && periodic_delta(x, *xc, length).abs() <= half_width + 1e-12
            }
            Region::Union { parts } => parts.iter().any(|p| p.contains(t, x, length)),
        }
    }

    /// Time extent, clipped to the grid's slab.
    pub fn t_range(&self, grid: &Grid) -> (f64, f64) {
        match self {
            Region::Diamond { tc, radius, .. } => (tc - radius, tc + radius),
            Region::Strip { t_a, t_b } | Region::Rect { t_a, t_b, .. } => (*t_a, *t_b),
            Region::Whole => (grid.t0, grid.t_end()),
            Region::Union { parts } => parts
                .iter()
                .map(|p| p.t_range(grid))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1))),
        }
    }

    /// Region lies in the slab and satisfies its own invariants.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let eps = 1e-9 * grid.dt;
        match self {
            Region::Diamond { radius, .. } => {
                if !(*radius > 0.0) || *radius >= 0.5 * grid.length {
                    return Err(Error::Precondition(format!("diamond radius {radius} must be in (0, L/2)")));
                }
            }
            Region::Strip { t_a, t_b } => {
                if !(t_a < t_b) {
                    return Err(Error::Precondition(format!("strip needs t_a < t_b, got [{t_a}, {t_b}]")));
                }
            }
            Region::Union { parts } => {
                for p in parts {
                    p.validate(grid)?;
                }
            }
            _ => {}
        }
        let (a, b) = self.t_range(grid);
        if a < grid.t0 - eps || b > grid.t_end() + eps {
            return Err(Error::OutOfDomain(format!("region spans [{a}, {b}], slab is [{}, {}]", grid.t0, grid.t_end())));
        }
        Ok(())
    }

    pub fn translated(&self, dt: f64, dx: f64) -> Region {
        match self {
            Region::Diamond { tc, xc, radius } => Region::Diamond { tc: tc + dt, xc: xc + dx, radius: *radius },
            Region::Strip { t_a, t_b } => Region::Strip { t_a: t_a + dt, t_b: t_b + dt },
            Region::Whole => Region::Whole,
            Region::Rect { t_a, t_b, xc, half_width } => {
                Region::Rect { t_a: t_a + dt, t_b: t_b + dt, xc: xc + dx, half_width: *half_width }
            }
            Region::Union { parts } => Region::Union { parts: parts.iter().map(|p| p.translated(dt, dx)).collect() },
        }
    }
}

/// Cone { d(x, xc) <= half0 + speed |t - t_apex| } on the future or past side of t_apex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub future: bool,
    pub t_apex: f64,
    pub xc: f64,
    pub half0: f64,
    pub speed: f64,
}

/// Union of cones covering J^{+/-} of a set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalBound {
    pub cones: Vec<Cone>,
    pub length: f64,
}

impl CausalBound {
    pub fn contains(&self, t: f64, x: f64) -> bool {
        self.cones.iter().any(|c| {
            let s = if c.future { t - c.t_apex } else { c.t_apex - t };
            if s < -1e-12 {
                return false;
            }
            let w = c.half0 + c.speed * s.max(0.0);
            w >= 0.5 * self.length || periodic_delta(x, c.xc, self.length).abs() <= w + 1e-12
        })
    }

    /// Node-wise distance (in x) outside the bound, 0 inside; used for leakage masks.
    pub fn margin(&self, t: f64, x: f64) -> f64 {
        let mut best = f64::INFINITY;
        for c in &self.cones {
            let s = if c.future { t - c.t_apex } else { c.t_apex - t };
            if s < 0.0 {
                continue;
            }
            let w = c.half0 + c.speed * s;
            if w >= 0.5 * self.length {
                return 0.0;
            }
            best = best.min((periodic_delta(x, c.xc, self.length).abs() - w).max(0.0));
        }
        best
    }
}

fn cones_of(region: &Region, speed: f64, dir: Direction, grid: &Grid, out: &mut Vec<Cone>) {
    let fut = matches!(dir, Direction::Future | Direction::Both);
    let past = matches!(dir, Direction::Past | Direction::Both);
    let mut push = |t_lo: f64, t_hi: f64, xc: f64, half0: f64| {
        if fut {
            out.push(Cone { future: true, t_apex: t_lo, xc, half0, speed });
        }
        if past {
            out.push(Cone { future: false, t_apex: t_hi, xc, half0, speed });
        }
    };
    match region {
        Region::Diamond { tc, xc, radius } => push(tc - radius, tc + radius, *xc, 0.0),
        Region::Strip { t_a, t_b } => push(*t_a, *t_b, 0.0, f64::INFINITY),
        Region::Whole => push(f64::NEG_INFINITY, f64::INFINITY, 0.0, f64::INFINITY),
        Region::Rect { t_a, t_b, xc, half_width } => push(*t_a, *t_b, *xc, *half_width),
        Region::Union { parts } => {
            for p in parts {
                cones_of(p, speed, dir, grid, out);
            }
        }
    }
}

/// Covering bound of J^+/J^- of the region, from the maximal characteristic speed of the slab.
/// Exact on the flat background.
pub fn causal_hull(region: &Region, spacetime: &Spacetime, dir: Direction) -> CausalBound {
    let speed = spacetime.metric.max_speed();
    let mut cones = Vec::new();
    cones_of(region, speed, dir, &spacetime.grid, &mut cones);
    CausalBound { cones, length: spacetime.grid.length }
}

/// Some point of `b` lies in J(a), using cone slope `c`. Exact for diamonds on the flat cylinder.
fn diamonds_related(a: (f64, f64, f64), b: (f64, f64, f64), c: f64, length: f64) -> bool {
    let (ta, xa, ra) = a;
    let (tb, xb, rb) = b;
    for k in -3i32..=3 {
        let xs = xb + k as f64 * length;
        let du = (c * tb - xs) - (c * ta - xa);
        let dv = (c * tb + xs) - (c * ta + xa);
        let r = c * (ra + rb);
        // some point of b in the future of a, or in its past
        if (du + r > 0.0 && dv + r > 0.0) || (r - du > 0.0 && r - dv > 0.0) {
            return true;
        }
    }
    false
}

/// No point of one region lies in the causal shadow of the other.
pub fn causally_separated(a: &Region, b: &Region, spacetime: &Spacetime) -> bool {
    let c = spacetime.metric.max_speed().max(1.0);
    let length = spacetime.grid.length;
    if let (Region::Diamond { tc: t1, xc: x1, radius: r1 }, Region::Diamond { tc: t2, xc: x2, radius: r2 }) = (a, b) {
        return !diamonds_related((*t1, *x1, *r1), (*t2, *x2, *r2), c, length);
    }
    let g = &spacetime.grid;
    let hull = causal_hull(a, spacetime, Direction::Both);
    for j in 0..g.n_t {
        for i in 0..g.n_x {
            let (t, x) = (g.t(j), g.x(i));
            if b.contains(t, x, length) && hull.contains(t, x) {
                return false;
            }
        }
    }
    true
}

/// Causal convexity: exact for strips and diamonds on the flat cylinder; on other metrics
/// a diamond is certified when all null slopes over its time range are at most 1.
pub fn is_causally_convex(region: &Region, spacetime: &Spacetime) -> Result<bool> {
    let g = &spacetime.grid;
    match region {
        Region::Union { parts } => {
            for p in parts {
                p.validate(g)?;
            }
        }
        _ => region.validate(g).or_else(|e| match (e, region) {
            (Error::Precondition(_), Region::Diamond { .. }) => Ok(()),
            (e, _) => Err(e),
        })?,
    }
    Ok(match region {
        Region::Whole | Region::Strip { .. } => true,
        Region::Diamond { tc, radius, .. } => {
            if *radius >= 0.5 * g.length {
                false
            } else if spacetime.is_flat() {
                true
            } else {
                let lo = g.level_floor(tc - radius);
                let hi = g.level_ceil(tc + radius);
                spacetime.metric.max_speed_levels(lo, hi) <= 1.0 + 1e-12
            }
        }
        Region::Rect { half_width, .. } => *half_width >= 0.5 * g.length,
        Region::Union { parts } => {
            let mut ok = true;
            for p in parts {
                ok &= is_causally_convex(p, spacetime)?;
            }
            for (k, p) in parts.iter().enumerate() {
                for q in &parts[k + 1..] {
                    ok &= causally_separated(p, q, spacetime);
                }
            }
            ok
        }
    })
}
