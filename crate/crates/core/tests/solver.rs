mod common;

use common::*;
use covkg::bump::Bump;
use covkg::geometry::{causal_hull, Direction, MetricFamily, Spacetime, Theory};
use covkg::solver::*;
use covkg::{Grid, GridField};
use std::sync::Arc;

fn mode(k: f64, m: f64) -> f64 {
    (k * k + m * m).sqrt()
}

#[test]
fn kg_annihilates_exact_mode() {
    let mut errs = vec![];
    for n in [64, 128, 256] {
        let st = flat(n);
        let (k, w) = (3.0, mode(3.0, 1.0));
        let phi = GridField::from_fn(st.grid, |t, x| (w * t - k * x).cos());
        let r = apply_kg(&st, &phi);
        assert!(r.row(0)[0].is_nan() && r.row(st.grid.n_t - 1)[3].is_nan());
        errs.push(r.max_abs());
    }
    let p = orders(&errs);
    assert!(p.iter().all(|&p| p > 1.9), "{errs:?} {p:?}");
}

#[test]
fn kg_of_constant_is_mass_term() {
    let st = Spacetime::flat(Theory::new(1.7, 0.3).unwrap(), grid(32)).unwrap();
    let r = apply_kg(&st, &GridField::constant(st.grid, 2.0));
    for j in 1..st.grid.n_t - 1 {
        for i in 0..32 {
            assert!((r.at(j, i) - 1.7 * 1.7 * 2.0).abs() < 1e-10);
        }
    }
}

/// Divergence form evaluated from analytic fields with nested 4th-order differences.
fn slow_kg(fam: &MetricFamily, phi: &dyn Fn(f64, f64) -> f64, t: f64, x: f64, m2: f64) -> f64 {
    let l = TAU;
    let h = 1e-3;
    let flux = |t: f64, x: f64| -> [f64; 2] {
        let g = fam.eval(t, x, l);
        let det = g[0] * g[2] - g[1] * g[1];
        let sg = (-det).sqrt();
        let gi = [g[2] / det, -g[1] / det, g[0] / det];
        let pt = (-phi(t + 2.0 * h, x) + 8.0 * phi(t + h, x) - 8.0 * phi(t - h, x) + phi(t - 2.0 * h, x)) / (12.0 * h);
        let px = (-phi(t, x + 2.0 * h) + 8.0 * phi(t, x + h) - 8.0 * phi(t, x - h) + phi(t, x - 2.0 * h)) / (12.0 * h);
        [sg * (gi[0] * pt + gi[1] * px), sg * (gi[1] * pt + gi[2] * px)]
    };
    let d4 = |f: &dyn Fn(f64) -> f64| (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
    let div = d4(&|e| flux(t + e, x)[0]) + d4(&|e| flux(t, x + e)[1]);
    let g = fam.eval(t, x, l);
    let sg = (-(g[0] * g[2] - g[1] * g[1])).sqrt();
    div / sg + m2 * phi(t, x)
}

#[test]
fn kg_matches_divergence_form_oracle_on_perturbed_metric() {
    let fam = MetricFamily::TensorBump { amp: 0.2, comps: [1.0, 0.5, -0.7], bump: Bump::new(3.0, 3.0, 1.5, 1.5) };
    let phi = |t: f64, x: f64| (0.7 * t).sin() * (2.0 * x + 0.3).cos() + 0.4 * (x - 0.2 * t).sin();
    let nodes = [(100usize, 50usize), (110, 60), (120, 70), (125, 64), (130, 45), (140, 80), (150, 55), (115, 66), (135, 72), (105, 58)];
    let mut worst = vec![];
    for n in [128usize, 256] {
        let st = family_st(n, &fam);
        let f = GridField::from_fn(st.grid, |t, x| phi(t, x));
        let k = apply_kg(&st, &f);
        let s = n / 128;
        let mut e: f64 = 0.0;
        for &(j, i) in &nodes {
            let (j, i) = (j * s, i * s);
            e = e.max((k.at(j, i) - slow_kg(&fam, &phi, st.grid.t(j), st.grid.x(i), 1.0)).abs());
        }
        worst.push(e);
    }
    assert!(worst[1] < 5e-3, "{worst:?}");
    assert!(worst[0] / worst[1] > 3.0, "{worst:?}");
}

#[test]
fn zero_data_zero_field() {
    let st = flat(32);
    let s = solve_cauchy(&st, &CauchyData::zero(32, 0.0), None, TimeDirection::Forward).unwrap();
    assert!(s.values.is_zero());
}

#[test]
fn single_mode_evolution_converges_at_second_order() {
    let mut errs = vec![];
    for n in [64usize, 128, 256] {
        let st = flat(n);
        let (k, w) = (2.0, mode(2.0, 1.0));
        let g = st.grid;
        let phi = (0..n).map(|i| (k * g.x(i)).cos()).collect();
        let pi = (0..n).map(|i| w * (k * g.x(i)).sin()).collect();
        let s = solve_cauchy(&st, &CauchyData::new(phi, pi, 0.0).unwrap(), None, TimeDirection::Forward).unwrap();
        let exact = GridField::from_fn(g, |t, x| (k * x - w * t).cos());
        errs.push(s.values.sub(&exact).max_abs());
        assert!(s.residual <= s.tolerance);
    }
    let p = orders(&errs);
    assert!(p.iter().all(|&p| p > 1.8), "{errs:?} {p:?}");
}

#[test]
fn forward_then_backward_returns_initial_data() {
    let st = family_st(128, &tensor_bump(0.05));
    let g = st.grid;
    let phi: Vec<f64> = (0..128).map(|i| (g.x(i)).sin() + 0.3 * (3.0 * g.x(i)).cos()).collect();
    let pi: Vec<f64> = (0..128).map(|i| 0.5 * (2.0 * g.x(i)).cos()).collect();
    let d0 = CauchyData::new(phi, pi, 0.0).unwrap();
    let fwd = solve_cauchy(&st, &d0, None, TimeDirection::Forward).unwrap();
    let last = g.t_end();
    let n = g.n_t;
    let pi_end: Vec<f64> = (0..128)
        .map(|i| (3.0 * fwd.values.at(n - 1, i) - 4.0 * fwd.values.at(n - 2, i) + fwd.values.at(n - 3, i)) / (2.0 * g.dt))
        .collect();
    let d1 = CauchyData::new(fwd.values.row(n - 1).to_vec(), pi_end, last).unwrap();
    let back = solve_cauchy(&st, &d1, None, TimeDirection::Backward).unwrap();
    let e = back.values.row(0).iter().zip(&d0.phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    // one-sided start/end steps dominate the accumulated truncation error
    assert!(e < 2e-2, "{e}");
    assert!(solve_cauchy(&st, &d1, None, TimeDirection::Forward).is_err());
}

#[test]
fn interior_restrict_and_resolve_is_exact() {
    let st = family_st(128, &tensor_bump(0.05));
    let f = bump_fn(st.grid, 3.0, 1.0, 0.6, 0.6);
    let er = e_ret(&st, &f).unwrap();
    for j in [20usize, 122, 230] {
        let d = restrict_to_data(&er, st.grid.t(j)).unwrap();
        let again = evolve(&st, &d, Some(&f)).unwrap();
        assert!(again.values.sub(&er.values).max_abs() < 1e-10 * er.values.max_abs());
    }
    assert!(restrict_to_data(&er, 0.0).is_err());
}

#[test]
fn mode_momentum_matches_closed_form() {
    let st = flat(256);
    let g = st.grid;
    let (k, w) = (2.0, mode(2.0, 1.0));
    let v = GridField::from_fn(g, |t, x| (k * x - w * t).cos());
    let d = restrict_values(&v, g.t(100)).unwrap();
    let t = g.t(100);
    let e = (0..256).map(|i| (d.pi[i] - w * (k * g.x(i) - w * t).sin()).abs()).fold(0.0, f64::max);
    assert!(e < w * w * w * g.dt * g.dt, "{e}");
}

#[test]
fn propagators_solve_with_source_and_vanish_outside_hull() {
    let st = flat(256);
    let g = st.grid;
    let f = bump_fn(g, 3.0, 3.0, 0.5, 0.5);
    let r = e_ret(&st, &f).unwrap();
    let a = e_adv(&st, &f).unwrap();
    assert!(r.residual <= r.tolerance && a.residual <= a.tolerance);
    let k = apply_kg(&st, &r.values);
    for j in 1..g.n_t - 1 {
        for i in 0..g.n_x {
            assert!((k.at(j, i) - f.values().at(j, i)).abs() <= r.tolerance);
        }
    }
    let sup = f.support_region().unwrap();
    let fut = causal_hull(&sup, &st, Direction::Future);
    let past = causal_hull(&sup, &st, Direction::Past);
    let (mut leak_r, mut leak_a): (f64, f64) = (0.0, 0.0);
    for j in 0..g.n_t {
        for i in 0..g.n_x {
            if !fut.contains(g.t(j), g.x(i)) {
                leak_r = leak_r.max(r.values.at(j, i).abs());
            }
            if !past.contains(g.t(j), g.x(i)) {
                leak_a = leak_a.max(a.values.at(j, i).abs());
            }
        }
    }
    let scale = r.values.max_abs();
    assert!(leak_r < 1e-3 * scale && leak_a < 1e-3 * scale, "{leak_r} {leak_a} {scale}");
}

#[test]
fn causal_propagator_is_a_solution_and_kills_k_images() {
    let st = family_st(128, &tensor_bump(0.05));
    let g = st.grid;
    let f = bump_fn(g, 3.0, 2.0, 0.7, 0.7);
    let e = e_causal(&st, &f).unwrap();
    assert!(e.residual <= e.tolerance);
    // E K h = 0 for compactly supported h
    let h = GridField::from_fn(g, |t, x| Bump::new(3.0, 4.0, 0.8, 0.8).value(t, x, g.length));
    let mut kh = apply_kg(&st, &h);
    for j in [0, g.n_t - 1] {
        kh.row_mut(j).iter_mut().for_each(|v| *v = 0.0);
    }
    let ekh = e_causal(&st, &TestFunction::new(kh).unwrap()).unwrap();
    assert!(ekh.values.max_abs() < 1e-9 * h.max_abs(), "{}", ekh.values.max_abs());
}

#[test]
fn causal_propagator_sign_in_the_past() {
    let st = flat(128);
    let g = st.grid;
    let f = bump_fn(g, 4.0, 3.0, 0.4, 0.4);
    let e = e_causal(&st, &f).unwrap();
    let r = e_ret(&st, &f).unwrap();
    // ret vanishes in the past, adv is there, so E = adv there
    let j = g.level_of(g.t(0) + 3.2 - (3.2 % g.dt)).unwrap();
    let past_nonzero = e.values.row(j).iter().any(|v| v.abs() > 1e-6);
    assert!(past_nonzero);
    assert!(r.values.row(j).iter().all(|&v| v == 0.0));
    // in the future E = -ret
    let jf = g.n_t - 10;
    for i in 0..g.n_x {
        assert!((e.values.at(jf, i) + r.values.at(jf, i)).abs() < 1e-12);
    }
}

#[test]
fn sigma_antisymmetry_and_surface_agreement() {
    let mut gaps = vec![];
    for n in [64usize, 128, 256] {
        let st = flat(n);
        let g = st.grid;
        let f = bump_fn(g, 2.4, 2.0, 0.6, 0.8);
        let h = bump_fn(g, 3.2, 3.0, 0.7, 0.6);
        let svol = symplectic_volume(&st, &f, &h).unwrap();
        let rev = symplectic_volume(&st, &h, &f).unwrap();
        assert!((svol + rev).abs() < 1e-10 * svol.abs());
        assert!(symplectic_volume(&st, &f, &f).unwrap().abs() < 1e-10 * svol.abs());
        let t = g.t(g.n_t - 20);
        let ef = restrict_to_data(&e_causal(&st, &f).unwrap(), t).unwrap();
        let eh = restrict_to_data(&e_causal(&st, &h).unwrap(), t).unwrap();
        let ssur = symplectic_surface(&ef, &eh, &st, t).unwrap();
        assert_eq!(symplectic_surface(&ef, &ef, &st, t).unwrap(), 0.0);
        gaps.push(rel(ssur, svol));
    }
    // on a flat slice the centered-momentum surface form averages two exactly conserved
    // discrete currents, so it reproduces the volume form to round-off
    assert!(gaps.iter().all(|&e| e < 1e-10), "{gaps:?}");
}

#[test]
fn surface_form_is_slice_independent() {
    let st = family_st(256, &tensor_bump(0.05));
    let g = st.grid;
    let f = bump_fn(g, 3.0, 1.0, 0.6, 0.6);
    let h = bump_fn(g, 3.0, 2.5, 0.6, 0.6);
    let (ef, eh) = (e_causal(&st, &f).unwrap(), e_causal(&st, &h).unwrap());
    let at = |t: f64| {
        let t = g.t(g.level_of(t - t % g.dt).unwrap());
        symplectic_surface(&restrict_to_data(&ef, t).unwrap(), &restrict_to_data(&eh, t).unwrap(), &st, t).unwrap()
    };
    let (a, b) = (at(0.5), at(5.8));
    assert!(rel(a, b) < 1e-2, "{a} {b}");
}

#[test]
fn out_of_domain_sources_rejected() {
    let g = grid(32);
    let v = GridField::from_fn(g, |t, _| if t < 1e-12 { 1.0 } else { 0.0 });
    assert!(TestFunction::new(v).is_err());
    let other: Arc<Spacetime> = flat(64);
    assert!(e_ret(&other, &bump_fn(g, 3.0, 1.0, 0.5, 0.5)).is_err());
}

#[test]
fn stability_violation_is_reported() {
    let g = Grid::new(64, 32, 0.0, 0.25, TAU).unwrap();
    assert!(matches!(Spacetime::flat(Theory::default(), g), Err(covkg::Error::Stability(_))));
}

#[test]
fn surface_form_inside_a_perturbation_converges() {
    let mut gaps = vec![];
    for n in [64usize, 128, 256] {
        let fam = MetricFamily::TensorBump { amp: 0.3, comps: [1.0, 0.5, -0.5], bump: Bump::new(3.1, 2.0, 1.5, 2.0) };
        let st = family_st(n, &fam);
        let g = st.grid;
        let f = bump_fn(g, 1.0, 2.0, 0.6, 0.8);
        let h = bump_fn(g, 1.2, 3.0, 0.7, 0.6);
        let svol = symplectic_volume(&st, &f, &h).unwrap();
        let t = g.t(g.level_of(3.1 - 3.1 % (4.0 * grid(64).dt)).unwrap());
        let ef = restrict_to_data(&e_causal(&st, &f).unwrap(), t).unwrap();
        let eh = restrict_to_data(&e_causal(&st, &h).unwrap(), t).unwrap();
        gaps.push(rel(symplectic_surface(&ef, &eh, &st, t).unwrap(), svol));
    }
    assert!(gaps[2] < 1e-2, "{gaps:?}");
    assert!(orders(&gaps).iter().all(|&p| p > 1.7), "{gaps:?}");
}
