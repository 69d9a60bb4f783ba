mod common;

use common::*;
use covkg::bump::{Bump, VectorBump};
use covkg::geometry::metric::{inverse, lie_flat, null_speeds};
use covkg::geometry::region::Direction;
use covkg::geometry::*;
use covkg::solver::e_ret;
use covkg::tolerances::*;
use covkg::{Grid, GridField};
use proptest::prelude::*;

fn conformal(eps: f64) -> (MetricFamily, Bump) {
    let b = Bump::new(3.1, 3.0, 2.4, 2.6);
    (MetricFamily::ConformalBump { eps, bump: b }, b)
}

/// Max error of R against -2 e^{-2w}(w_tt - w_xx) away from the slab ends.
fn conformal_curvature_error(g: Grid, w: impl Fn(f64, f64) -> (f64, f64, f64)) -> f64 {
    let m = Metric::from_fn(g, Provenance::Perturbed, |t, x| {
        let e = (2.0 * w(t, x).0).exp();
        [e, 0.0, -e]
    })
    .unwrap();
    let r = scalar_curvature(&m).unwrap();
    let mut err: f64 = 0.0;
    for j in 2..g.n_t - 2 {
        for i in 0..g.n_x {
            let (v, tt, xx) = w(g.t(j), g.x(i));
            err = err.max((r.at(j, i) - (-2.0 * (-2.0 * v).exp() * (tt - xx))).abs());
        }
    }
    err
}

#[test]
fn conformal_curvature_matches_closed_form() {
    // w = a sin(x) cos(t/2): every derivative in closed form
    let a = 0.2;
    let w = |t: f64, x: f64| {
        let v = a * x.sin() * (0.5 * t).cos();
        (v, -0.25 * v, -v)
    };
    let errs: Vec<f64> = [64, 128, 256].iter().map(|&n| conformal_curvature_error(grid(n), w)).collect();
    assert!(errs[2] < 1e-4, "{errs:?}");
    let (ok, p) = order_verdict(&errs);
    assert!(ok, "{errs:?} {p}");
}

#[test]
fn conformal_bump_curvature_converges() {
    // compact bumps are steep near their rims, so orders only settle on fine grids
    let (fam, b) = conformal(0.2);
    let w = |t: f64, x: f64| {
        let j = b.jet(t, x, TAU).scale(0.2);
        (j.v, j.tt, j.xx)
    };
    let g = grid(256);
    assert_eq!(fam.metric(g).unwrap().g_tt.at(10, 10), (2.0 * w(g.t(10), g.x(10)).0).exp());
    let errs: Vec<f64> = [128, 256, 512].iter().map(|&n| conformal_curvature_error(grid(n), w)).collect();
    let peak = 2.0 * 0.2 * 2.0 * (1.0 / (2.4f64 * 2.4) + 1.0 / (2.6f64 * 2.6));
    assert!(errs[2] < 0.05 * peak, "{errs:?}");
    assert!(orders(&errs)[1] > ORDER_MIN, "{errs:?}");
}

#[test]
fn flat_and_tensor_volume_elements() {
    let g = grid(64);
    let fam = tensor_bump(0.1);
    let m = fam.metric(g).unwrap();
    let v = volume_element(&m);
    for (j, i) in [(10, 3), (64, 20), (70, 40), (100, 60)] {
        let [a, b, c] = fam.eval(g.t(j), g.x(i), g.length);
        assert!((v.at(j, i) - (b * b - a * c).sqrt()).abs() < 1e-15);
    }
    assert!(volume_element(&Metric::flat(g)).data.iter().all(|&x| x == 1.0));
}

#[test]
fn flat_metric_has_zero_curvature() {
    let r = scalar_curvature(&Metric::flat(grid(32))).unwrap();
    assert_eq!(r.max_abs(), 0.0);
}

#[test]
fn pulled_back_flat_metric_is_flat_to_second_order() {
    let mut errs = vec![];
    for nx in [128, 256, 512] {
        let g = grid(nx);
        let x = VectorFieldX::from_bump(g, VectorBump { bump: Bump::new(3.1, 3.0, 2.4, 2.6), a_t: 0.3, a_x: -0.25 });
        let m = pullback_metric(&x, 0.5, &Metric::flat(g)).unwrap();
        assert!(!m.is_flat());
        let r = scalar_curvature(&m).unwrap();
        errs.push(r.max_abs_levels(2, g.n_t - 3));
    }
    assert!(errs[2] < 1e-2, "{errs:?}");
    assert!(orders(&errs)[1] > ORDER_MIN, "{errs:?}");
}

#[test]
fn lie_derivative_on_the_grid_matches_the_closed_form() {
    let mut errs = vec![];
    for nx in [64, 128, 256] {
        let g = grid(nx);
        let vb = VectorBump { bump: Bump::new(3.0, 2.0, 2.4, 2.6), a_t: 0.4, a_x: 0.7 };
        let h = lie_derivative_metric(&VectorFieldX::from_bump(g, vb), &Metric::flat(g));
        let mut e: f64 = 0.0;
        for j in 1..g.n_t - 1 {
            for i in 0..g.n_x {
                let want = lie_flat(&vb, g.t(j), g.x(i), g.length);
                let got = h.at(j, i);
                e = e.max((0..3).map(|k| (want[k] - got[k]).abs()).fold(0.0, f64::max));
            }
        }
        errs.push(e);
    }
    assert!(orders(&errs).iter().all(|&p| p > ORDER_MIN), "{errs:?}");
}

#[test]
fn pullback_flow_derivative_is_the_lie_derivative() {
    let g = grid(128);
    let vb = VectorBump { bump: Bump::new(3.1, 3.0, 2.4, 2.6), a_t: 0.3, a_x: -0.25 };
    let x = VectorFieldX::from_bump(g, vb);
    let fam = tensor_bump(0.2);
    let base = fam.metric(g).unwrap();
    let s = 1e-3;
    let p = pullback_family(&x, s, &fam, g).unwrap();
    let m = pullback_family(&x, -s, &fam, g).unwrap();
    let lie = lie_derivative_metric(&x, &base);
    let mut err: f64 = 0.0;
    for j in 2..g.n_t - 2 {
        for i in 0..g.n_x {
            let d = [(p.g_tt.at(j, i) - m.g_tt.at(j, i)) / (2.0 * s), (p.g_tx.at(j, i) - m.g_tx.at(j, i)) / (2.0 * s), (p.g_xx.at(j, i) - m.g_xx.at(j, i)) / (2.0 * s)];
            let l = lie.at(j, i);
            err = err.max((0..3).map(|k| (d[k] - l[k]).abs()).fold(0.0, f64::max));
        }
    }
    assert!(err < 1e-2, "{err}");
    assert_eq!(pullback_family(&x, 0.0, &fam, g).unwrap().max_diff(&base), 0.0);
}

#[test]
fn tilted_metric_leaks_only_at_discretization_level() {
    // ds^2 = dt^2 - (dx - v dt)^2: null speeds v - 1 and v + 1 = 1.2
    let v = 0.2;
    let mut leak = vec![];
    for nx in [64, 128, 256] {
        let g = Grid::with_courant(2 * nx, nx, 0.0, TAU, 0.5 / 1.2).unwrap();
        let m = Metric::from_fn(g, Provenance::Perturbed, |_, _| [1.0 - v * v, v, -1.0]).unwrap();
        let st = Spacetime::new(Theory::default(), m).unwrap();
        assert!((st.metric.max_speed() - 1.2).abs() < 1e-12);
        let f = bump_fn(g, 1.0, 3.0, 0.4, 0.4);
        let u = e_ret(&st, &f).unwrap();
        let hull = causal_hull(&Region::Rect { t_a: 0.6, t_b: 1.4, xc: 3.0, half_width: 0.4 }, &st, Direction::Future);
        let mut out: f64 = 0.0;
        for j in 0..g.n_t {
            for i in 0..g.n_x {
                if hull.margin(g.t(j), g.x(i)) > 4.0 * g.dx() {
                    out = out.max(u.values.at(j, i).abs());
                }
            }
        }
        leak.push(out / u.values.max_abs());
    }
    assert!(leak[2] < PDE_REL, "{leak:?}");
    assert!(leak.windows(2).all(|w| w[1] < w[0]) || leak[2] < ROUNDOFF_FLOOR, "{leak:?}");
}

#[test]
fn causal_convexity_by_ray_sampling() {
    // a region is convex iff no causal segment between two of its points leaves it; sample
    // null segments between nodes of a tall thin box and of a diamond
    let st = flat(64);
    let g = st.grid;
    let diamond = Region::diamond(3.0, 3.0, 1.0);
    let thin = Region::Rect { t_a: 1.0, t_b: 5.0, xc: 3.0, half_width: 0.3 };
    let leaves = |r: &Region| {
        for (t0, x0) in [(2.2, 3.0), (1.2, 3.1), (2.0, 2.8)] {
            if !r.contains(t0, x0, g.length) {
                continue;
            }
            for slope in [-1.0, 1.0] {
                let mut inside_again = false;
                let mut left = false;
                for k in 1..200 {
                    let s = k as f64 * 0.02;
                    let p = r.contains(t0 + s, x0 + slope * s, g.length);
                    if !p {
                        left = true;
                    } else if left {
                        inside_again = true;
                    }
                }
                if inside_again {
                    return true;
                }
            }
            // a timelike-then-null path: up inside, sideways along a null ray, still causal
            let top = (t0 + 2.0, x0);
            if r.contains(top.0, top.1, g.length) && !r.contains(t0 + 1.0, x0 + 1.0, g.length) {
                return true;
            }
        }
        false
    };
    assert!(!leaves(&diamond));
    assert!(leaves(&thin));
    assert!(is_causally_convex(&diamond, &st).unwrap());
    assert!(!is_causally_convex(&thin, &st).unwrap());
}

#[test]
fn embeddings_reject_bad_maps() {
    let st = flat(64);
    let g = st.grid;
    let d = Region::diamond(3.0, 3.0, 1.0);
    assert!(Embedding::translation(st.clone(), st.clone(), d.clone(), 0.5 * g.dt, 0.0).is_err());
    let map = IsometryMap { reflect_x: true, ..Default::default() };
    assert!(matches!(Embedding::new(st.clone(), st.clone(), d.clone(), map), Err(covkg::Error::Embedding(_))));
    let bumpy = family_st(64, &tensor_bump(0.1));
    assert!(Embedding::translation(bumpy, st.clone(), Region::diamond(3.1, 2.0, 0.8), 0.0, 0.0).is_err());
    // a diamond clear of the bump is fine
    let bumpy = family_st(64, &tensor_bump(0.1));
    let e = Embedding::translation(bumpy, st.clone(), Region::diamond(5.2, 5.2, 0.5), 0.0, 0.0);
    assert!(e.is_ok(), "{e:?}");
    let far = Embedding::translation(st.clone(), st.clone(), d, 300.0 * g.dt, 0.0);
    assert!(far.is_err());
}

#[test]
fn composition_of_translations() {
    let st = flat(64);
    let g = st.grid;
    let d = Region::diamond(3.0, 3.0, 1.0);
    let a = Embedding::translation(st.clone(), st.clone(), d, 4.0 * g.dt, 3.0 * g.dx()).unwrap();
    let b = Embedding::translation(st.clone(), st.clone(), a.image.clone(), -4.0 * g.dt, -3.0 * g.dx()).unwrap();
    let ab = a.then(&b).unwrap();
    assert_eq!(ab.map, IsometryMap::default());
    let f = bump_fn(g, 3.0, 3.0, 0.3, 0.3);
    assert_eq!(ab.push_forward(&f).unwrap(), f);
    let other = flat(64);
    let c = Embedding::identity(other);
    assert!(matches!(a.then(&c), Err(covkg::Error::NotComposable(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn inverse_metric_is_an_inverse(a in 0.5f64..2.0, b in -0.4f64..0.4, c in -2.0f64..-0.5) {
        let gi = inverse([a, b, c]);
        // g^{mu a} g_{a nu} = delta
        prop_assert!((gi[0] * a + gi[1] * b - 1.0).abs() < 1e-12);
        prop_assert!((gi[0] * b + gi[1] * c).abs() < 1e-12);
        prop_assert!((gi[1] * b + gi[2] * c - 1.0).abs() < 1e-12);
        let (lo, hi) = null_speeds([a, b, c]);
        for v in [lo, hi] {
            prop_assert!((a + 2.0 * b * v + c * v * v).abs() < 1e-10);
        }
    }

    #[test]
    fn push_forward_moves_values(dt in -10isize..10, dx in -40isize..40) {
        let st = flat(32);
        let g = st.grid;
        let d = Region::diamond(3.1, 3.0, 1.0);
        let psi = Embedding::translation(st.clone(), st.clone(), d, dt as f64 * g.dt, dx as f64 * g.dx()).unwrap();
        let f = bump_fn(g, 3.1, 3.0, 0.3, 0.3);
        let pf = psi.push_forward(&f).unwrap();
        let sum = |u: &GridField| u.data.iter().sum::<f64>();
        prop_assert!((sum(f.values()) - sum(pf.values())).abs() < 1e-12 * sum(f.values()));
        let back = psi.pull_back_field(pf.values());
        prop_assert_eq!(&back, f.values());
    }

    #[test]
    fn periodic_delta_is_the_short_way(x in -20.0f64..20.0, y in -20.0f64..20.0) {
        let d = covkg::grid::periodic_delta(x, y, TAU);
        prop_assert!(d.abs() <= 0.5 * TAU + 1e-12);
        prop_assert!(((x - y - d) / TAU - ((x - y - d) / TAU).round()).abs() < 1e-9);
    }
}
