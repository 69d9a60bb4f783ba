mod common;

use common::*;
use covkg::geometry::{Embedding, Region};
use covkg::solver::{apply_kg, TestFunction};
use covkg::states::*;
use covkg::tolerances::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn probes(g: covkg::Grid, amp: f64) -> Vec<TestFunction> {
    [(2.6, 1.0), (3.2, 2.4), (3.8, 3.9), (2.9, 5.0), (3.5, 0.2)]
        .iter()
        .enumerate()
        .map(|(k, &(t, x))| TestFunction::bump(g, covkg::bump::Bump::new(t, x, 0.8 + 0.1 * k as f64, 1.0), amp).unwrap())
        .collect()
}

#[test]
fn antisymmetric_part_is_the_solver_sigma() {
    let mut errs = vec![];
    for nx in [128, 256, 512] {
        let st = flat(nx);
        let vac = vacuum_state(1.0, TAU, nx / 2).unwrap();
        errs.push(ccr_deviation(&vac, &st, &probes(st.grid, 1.0)).unwrap());
    }
    assert!(errs[1] < CCR_REL, "{errs:?}");
    // continuum modes against the lattice propagator: second order
    assert!(orders(&errs).iter().all(|&p| p > ORDER_MIN), "{errs:?}");
}

#[test]
fn thermal_state_has_the_same_commutator() {
    let st = flat(256);
    let th = thermal_state(1.0, TAU, 128, 0.7).unwrap();
    assert!(ccr_deviation(&th, &st, &probes(st.grid, 1.0)).unwrap() < CCR_REL);
}

#[test]
fn two_point_kernel_solves_the_field_equation() {
    let f = |g| bump_fn(g, 3.0, 2.0, 1.0, 1.2);
    let h = |g| bump_fn(g, 4.0, 3.5, 0.8, 1.0);
    let mut ratios = vec![];
    for nx in [256, 512] {
        let st = flat(nx);
        let vac = vacuum_state(1.0, TAU, nx / 2).unwrap();
        let kf = TestFunction::new(apply_kg(&st, f(st.grid).values()).map(|v| if v.is_nan() { 0.0 } else { v })).unwrap();
        // the mass term alone sets the scale
        let wk = vac.two_point(&kf, &h(st.grid)).unwrap().norm();
        let wm = vac.two_point(&f(st.grid), &h(st.grid)).unwrap().norm();
        ratios.push(wk / wm);
    }
    assert!(ratios[0] < 1e-3, "{ratios:?}");
    assert!((ratios[0] / ratios[1]).log2() > ORDER_MIN, "{ratios:?}");
}

#[test]
fn cold_thermal_state_is_the_vacuum() {
    let g = grid(128);
    let vac = vacuum_state(1.0, TAU, 64).unwrap();
    let cold = thermal_state(1.0, TAU, 64, 80.0).unwrap();
    let fs = probes(g, 1.0);
    for (f, h) in fs.iter().zip(fs.iter().skip(1)) {
        let (a, b) = (vac.two_point(f, h).unwrap(), cold.two_point(f, h).unwrap());
        assert!((a - b).norm() <= 1e-14 * a.norm().max(1.0));
    }
    let warm = thermal_state(1.0, TAU, 64, 1.0).unwrap();
    assert!(warm.two_point(&fs[0], &fs[0]).unwrap().re > vac.two_point(&fs[0], &fs[0]).unwrap().re);
}

#[test]
fn coarse_modes_are_rejected() {
    let g = grid(64);
    let vac = vacuum_state(1.0, TAU, 4).unwrap();
    assert!(matches!(vac.two_point(&bump_fn(g, 3.0, 2.0, 0.5, 0.3), &bump_fn(g, 3.0, 2.0, 0.5, 0.3)), Err(covkg::Error::Cutoff(_))));
    assert!(vacuum_state(0.0, TAU, 8).is_err());
    assert!(thermal_state(1.0, TAU, 8, -1.0).is_err());
}

#[test]
fn gram_matrix_positivity_fixes_the_weyl_normalization() {
    let st = flat(128);
    let vac = vacuum_state(1.0, TAU, 64).unwrap();
    let fs = probes(st.grid, 3.0);
    let (min_half, tr) = gram_spectrum(&vac, &st, &fs, 0.5).unwrap();
    assert!(min_half >= -GRAM_FLOOR * tr, "lambda 1/2: {min_half} of {tr}");
    // the literal display e^{-w} is positive as well
    let (min_one, tr1) = gram_spectrum(&vac, &st, &fs, 1.0).unwrap();
    assert!(min_one >= -GRAM_FLOOR * tr1);
    // too little damping breaks positivity
    let (min_low, tr2) = gram_spectrum(&vac, &st, &fs, 0.125).unwrap();
    assert!(min_low < -GRAM_FLOOR * tr2, "control stayed positive: {min_low}");
}

#[test]
fn weyl_expectation_of_a_doubled_function() {
    let g = grid(128);
    let vac = vacuum_state(1.0, TAU, 64).unwrap();
    let f = bump_fn(g, 3.0, 1.0, 1.0, 1.0);
    let e1 = vac.weyl_expectation(&f, 0.5).unwrap();
    let e2 = vac.weyl_expectation(&f.scale(2.0), 0.5).unwrap();
    assert!(rel(e2, e1.powi(4)) < 1e-12);
    assert!(e1 > 0.0 && e1 < 1.0);
}

#[test]
fn pullback_along_identity_changes_nothing() {
    let st = flat(128);
    let vac = vacuum_state(1.0, TAU, 64).unwrap();
    let pb = pullback_state(&Embedding::identity(st.clone()), &vac).unwrap();
    let fs = probes(st.grid, 1.0);
    assert_eq!(pb.two_point(&fs[0], &fs[1]).unwrap(), vac.two_point(&fs[0], &fs[1]).unwrap());
}

#[test]
fn pullback_is_contravariant() {
    let big = flat(128);
    let g = big.grid;
    let mid = big.sub_slab(20, 230).unwrap();
    let small = mid.sub_slab(10, 190).unwrap();
    let dxs = 8.0 * g.dx();
    let psi1 = Embedding::translation(small.clone(), mid.clone(), Region::Whole, small.grid.t0 - mid.grid.t0, dxs).unwrap();
    let psi2 = Embedding::translation(mid.clone(), big.clone(), Region::Whole, mid.grid.t0, 3.0 * g.dx()).unwrap();
    let th = thermal_state(1.0, TAU, 64, 1.5).unwrap();
    let two_step = pullback_state(&psi1, &pullback_state(&psi2, &th).unwrap()).unwrap();
    let one_step = pullback_state(&psi1.then(&psi2).unwrap(), &th).unwrap();
    let fs = probes(small.grid, 1.0);
    for (f, h) in fs.iter().zip(fs.iter().skip(1)) {
        let (a, b) = (two_step.two_point(f, h).unwrap(), one_step.two_point(f, h).unwrap());
        assert!((a - b).norm() <= 1e-12 * a.norm());
    }
    assert!(ccr_deviation(&one_step, &small, &fs).unwrap() < 10.0 * CCR_REL);
}

#[test]
fn vacuum_hadamard_value_matches_closed_form() {
    let g = grid(256);
    let vac = vacuum_state(1.0, TAU, 128).unwrap();
    for mu in [0.5, 1.0, 3.0] {
        let f = hadamard_diagonal(&vac, mu, &g).unwrap();
        let (lo, hi) = f.range();
        assert_eq!(lo, hi, "vacuum field must be constant");
        let oracle = vacuum_hadamard_oracle(1.0, TAU, mu, 2_000_000);
        assert!((lo - oracle).abs() < 1e-6, "mu {mu}: {lo} vs {oracle}");
    }
}

#[test]
fn oracle_by_brute_force_partial_sums() {
    // H_vac(0) at L = 2 pi, m = 1, mu = 1: (1/4pi)[1 + 2 sum (1/sqrt(1+n^2) - 1/n)]
    let mut s = 1.0;
    for n in 1..400_000u64 {
        let n = n as f64;
        s += 2.0 * (1.0 / (1.0 + n * n).sqrt() - 1.0 / n);
    }
    // tail of -1/n^3 summed from 400000 on
    s += -1.0 / (2.0 * 4.0e5f64.powi(2));
    let direct = s / (4.0 * PI);
    assert!((direct - vacuum_hadamard_oracle(1.0, TAU, 1.0, 2_000_000)).abs() < 1e-10);
}

#[test]
fn mu_shift_is_an_exact_log() {
    let g = grid(256);
    let th = thermal_state(1.0, TAU, 128, 2.0).unwrap();
    let (m1, m2) = (0.7, 4.2);
    let d = wick_square(&th, m2, &g).unwrap().sub(&wick_square(&th, m1, &g).unwrap()).unwrap();
    let want = (m2 / m1).ln() / (2.0 * PI);
    assert!(d.data.iter().all(|v| (v - want).abs() < MU_SHIFT));
}

#[test]
fn cocycle_identity_and_thermal_oracle() {
    let g = grid(256);
    let vac = vacuum_state(1.0, TAU, 128).unwrap();
    let t1 = thermal_state(1.0, TAU, 128, 0.8).unwrap();
    let t2 = thermal_state(1.0, TAU, 128, 3.0).unwrap();
    let b = |x: &QuasifreeState, y: &QuasifreeState| cocycle(x, y, &g).unwrap().values;
    let sum = b(&vac, &t1).add(&b(&t1, &t2)).add(&b(&t2, &vac));
    assert!(sum.max_abs() <= COCYCLE);
    for (st, beta) in [(&t1, 0.8), (&t2, 3.0)] {
        let v = b(st, &vac).at(7, 11);
        assert!((v - thermal_cocycle_oracle(1.0, TAU, beta)).abs() < THERMAL_ORACLE);
    }
}

#[test]
fn hadamard_differences_trivialize_the_cocycle() {
    let g = grid(256);
    let states = [
        vacuum_state(1.0, TAU, 128).unwrap(),
        thermal_state(1.0, TAU, 128, 1.0).unwrap(),
        thermal_state(1.0, TAU, 128, 2.5).unwrap(),
    ];
    for mu in [1.0, 2.0] {
        for a in 0..3 {
            for b in 0..3 {
                if a == b {
                    continue;
                }
                let d = wick_square(&states[a], mu, &g).unwrap().sub(&wick_square(&states[b], mu, &g).unwrap()).unwrap();
                let c = cocycle(&states[a], &states[b], &g).unwrap().values;
                let err = d.sub(&c).max_abs() / c.max_abs();
                assert!(err < TRIVIALIZATION_REL, "{a} {b} mu {mu}: {err}");
            }
        }
    }
}

#[test]
fn wick_powers_follow_the_gaussian_factor() {
    let g = grid(128);
    let th = thermal_state(1.0, TAU, 64, 1.0).unwrap();
    let f = wick_square(&th, 1.0, &g).unwrap().values;
    assert_eq!(wick_power(&th, 1.0, 2, &g).unwrap(), f);
    assert!(wick_power(&th, 1.0, 0, &g).unwrap().data.iter().all(|&v| v == 1.0));
    for n in [1, 3] {
        assert!(wick_power(&th, 1.0, n, &g).unwrap().is_zero());
    }
    // fourth lambda-derivative of exp(lambda^2 f / 2) at 0: 4!/(2! 2^2) f^2
    let c4 = 24.0 / (2.0 * 4.0);
    let p4 = wick_power(&th, 1.0, 4, &g).unwrap();
    assert!(p4.data.iter().zip(&f.data).all(|(p, v)| (p - c4 * v * v).abs() <= 1e-15 * p.abs().max(1.0)));
    assert!(wick_power(&th, 1.0, 5, &g).is_err());
}

#[test]
fn wick_square_commutes_with_pullback() {
    let big = flat(128);
    let small = big.sub_slab(30, 200).unwrap();
    let dom = Region::Diamond { tc: small.grid.t(85), xc: 2.0, radius: 1.2 };
    let psi = Embedding::translation(small.clone(), big.clone(), dom, small.grid.t0, 5.0 * big.grid.dx()).unwrap();
    let th = thermal_state(1.0, TAU, 64, 1.3).unwrap();
    let pulled = wick_square(&pullback_state(&psi, &th).unwrap(), 1.5, &small.grid).unwrap().values;
    let parent = wick_square(&th, 1.5, &big.grid).unwrap().values;
    let mut checked = 0;
    for j in 0..small.grid.n_t {
        for i in 0..small.grid.n_x {
            if psi.in_domain(j, i) {
                let (tj, ti) = psi.map_node(j, i);
                assert_eq!(pulled.at(j, i), parent.at(tj, ti));
                checked += 1;
            } else {
                assert!(pulled.at(j, i).is_nan());
            }
        }
    }
    assert!(checked > 100);
    assert!(wick_square(&pullback_state(&psi, &th).unwrap(), 1.5, &big.grid).is_err());
}

#[test]
fn state_differences_are_smooth() {
    let vac = vacuum_state(1.0, TAU, 128).unwrap();
    let states = [thermal_state(1.0, TAU, 128, 0.5).unwrap(), thermal_state(1.0, TAU, 128, 2.0).unwrap()];
    for s in &states {
        let c = difference_spectrum(s, &vac, 64);
        // faster than any tested inverse power: n^p c_n still falls between K/4 and K/2
        for p in [2, 4, 8] {
            let w = |n: usize| c[n] * (n as f64).powi(p);
            assert!(w(64) < 1e-2 * w(32), "power {p}: {:e} vs {:e}", w(64), w(32));
        }
    }
    let b = cocycle(&states[0], &vac, &grid(128)).unwrap();
    assert!(b.fourier_tail(32) < 1e-14);
}

#[test]
fn rejects_bad_scale_and_mismatched_grids() {
    let vac = vacuum_state(1.0, TAU, 64).unwrap();
    assert!(hadamard_diagonal(&vac, 0.0, &grid(128)).is_err());
    let other = covkg::Grid::with_courant(64, 32, 0.0, 5.0, 0.5).unwrap();
    assert!(hadamard_diagonal(&vac, 1.0, &other).is_err());
    let heavy = vacuum_state(2.0, TAU, 64).unwrap();
    assert!(cocycle(&vac, &heavy, &grid(64)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hermitian(t1 in 2.5f64..4.0, x1 in 0.0f64..6.2, t2 in 2.5f64..4.0, x2 in 0.0f64..6.2, beta in 0.3f64..5.0) {
        let g = grid(128);
        let th = thermal_state(1.0, TAU, 64, beta).unwrap();
        let (f, h) = (bump_fn(g, t1, x1, 0.9, 1.1), bump_fn(g, t2, x2, 0.8, 1.2));
        let (a, b) = (th.two_point(&f, &h).unwrap(), th.two_point(&h, &f).unwrap());
        prop_assert!((a - b.conj()).norm() <= 1e-13 * a.norm().max(1e-3));
        prop_assert!(th.two_point(&f, &f).unwrap().re > 0.0);
    }

    #[test]
    fn translation_invariant(steps_t in 0usize..30, steps_x in 0usize..128, beta in 0.3f64..5.0) {
        let g = grid(128);
        let th = thermal_state(1.0, TAU, 64, beta).unwrap();
        let (dt, dx) = (steps_t as f64 * g.dt, steps_x as f64 * g.dx());
        let f = bump_fn(g, 2.5, 1.0, 0.9, 1.1);
        let h = bump_fn(g, 3.0, 2.0, 0.8, 1.0);
        let fs = bump_fn(g, 2.5 + dt, 1.0 + dx, 0.9, 1.1);
        let hs = bump_fn(g, 3.0 + dt, 2.0 + dx, 0.8, 1.0);
        let (a, b) = (th.two_point(&f, &h).unwrap(), th.two_point(&fs, &hs).unwrap());
        prop_assert!((a - b).norm() <= 1e-10 * a.norm());
    }

    #[test]
    fn mu_shift_any_pair(m1 in 0.1f64..10.0, m2 in 0.1f64..10.0) {
        let vac = vacuum_state(1.0, TAU, 64).unwrap();
        let dx = TAU / 256.0;
        let d = hadamard_constant(&vac, m2, dx).unwrap().0 - hadamard_constant(&vac, m1, dx).unwrap().0;
        prop_assert!((d - (m2 / m1).ln() / (2.0 * PI)).abs() < MU_SHIFT);
    }
}

#[test]
fn weyl_normalization_matches_the_field_two_point_function() {
    // omega(W(tEf) W(sEh)) = exp(-i ts sigma / 2 - lambda w_s(tf + sh)); its mixed derivative at 0 is -w2(f, h)
    // only for lambda = 1/2
    let st = flat(128);
    let vac = vacuum_state(1.0, TAU, 64).unwrap();
    let f = bump_fn(st.grid, 3.0, 2.0, 0.8, 1.0);
    let h = bump_fn(st.grid, 3.4, 2.6, 0.7, 1.0);
    let s = covkg::solver::symplectic_volume(&st, &f, &h).unwrap();
    let w = vac.two_point_matrix(&[f.clone(), h.clone()]).unwrap();
    let gen = |lambda: f64, t: f64, u: f64| {
        let ws = (t * t * w[(0, 0)] + u * u * w[(1, 1)] + t * u * (w[(0, 1)] + w[(1, 0)])).re;
        num_complex::Complex64::from_polar((-lambda * ws).exp(), -0.5 * t * u * s)
    };
    let e = 1e-3;
    let mixed = |lambda: f64| (gen(lambda, e, e) - gen(lambda, e, -e) - gen(lambda, -e, e) + gen(lambda, -e, -e)) / (4.0 * e * e);
    let want = -vac.two_point(&f, &h).unwrap();
    assert!((mixed(0.5) - want).norm() < CCR_REL * want.norm());
    assert!((mixed(1.0) - want).norm() > 0.1 * want.norm());
}
