mod common;

use common::*;
use covkg::algebra::*;
use covkg::geometry::{Embedding, Region};
use covkg::solver::symplectic_volume;
use covkg::states::vacuum_state;
use covkg::tolerances::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn identity_morphism_is_exact() {
    let r = check_identity(&flat(64)).unwrap();
    assert_eq!(r.measured, 0.0);
    assert!(r.pass);
}

#[test]
fn translations_compose() {
    let st = flat(64);
    let g = st.grid;
    let d1 = Region::Diamond { tc: 3.0, xc: 2.0, radius: 1.2 };
    let psi1 = Embedding::translation(st.clone(), st.clone(), d1, 4.0 * g.dt, 6.0 * g.dx()).unwrap();
    let psi2 = Embedding::translation(st.clone(), st.clone(), psi1.image.clone(), -2.0 * g.dt, 10.0 * g.dx()).unwrap();
    let r = check_functor_law(&psi1, &psi2).unwrap();
    assert!(r.pass && r.measured <= FUNCTOR_ALGEBRAIC, "{}", r.line());
}

#[test]
fn inclusions_compose_through_the_propagator() {
    let big = flat(64);
    let mid = big.sub_slab(10, 118).unwrap();
    let small = mid.sub_slab(10, 90).unwrap();
    let psi1 = Embedding::inclusion(small.clone(), mid.clone()).unwrap();
    let psi2 = Embedding::inclusion(mid, big).unwrap();
    let r = check_functor_law(&psi1, &psi2).unwrap();
    assert!(r.pass, "{}", r.line());
    assert!(r.inputs["data_probes"].as_u64().unwrap() > 0);
}

#[test]
fn separated_diamonds_commute_at_second_order() {
    let mut errs = vec![];
    for nx in [64, 128, 256] {
        let st = flat(nx);
        let a = Region::Diamond { tc: 3.0, xc: 1.5, radius: 1.0 };
        let b = Region::Diamond { tc: 3.0, xc: 4.7, radius: 1.0 };
        let p1 = Embedding::translation(st.clone(), st.clone(), a, 0.0, 0.0).unwrap();
        let p2 = Embedding::translation(st.clone(), st.clone(), b, 0.0, 0.0).unwrap();
        let r = check_causality(&p1, &p2).unwrap();
        errs.push(r.measured);
    }
    assert!(errs[2] <= PDE_REL, "{errs:?}");
    let (ok, p) = order_verdict(&errs);
    assert!(ok, "{errs:?} order {p}");
}

#[test]
fn causality_demands_separation() {
    let st = flat(64);
    let a = Region::Diamond { tc: 3.0, xc: 1.5, radius: 1.0 };
    let b = Region::Diamond { tc: 3.5, xc: 2.5, radius: 1.0 };
    let p1 = Embedding::translation(st.clone(), st.clone(), a, 0.0, 0.0).unwrap();
    let p2 = Embedding::translation(st.clone(), st.clone(), b, 0.0, 0.0).unwrap();
    assert!(matches!(check_causality(&p1, &p2), Err(covkg::Error::Precondition(_))));
}

#[test]
fn time_slice_reconstruction() {
    let mut errs = vec![];
    for nx in [64, 128, 256] {
        let st = flat(nx);
        let f = bump_fn(st.grid, 3.2, 2.0, 0.8, 1.0);
        let ts = time_slice(&st, &Region::Strip { t_a: 1.0, t_b: 1.8 }, &f, 2).unwrap();
        assert!(ts.support_inside);
        errs.push(ts.deviation);
    }
    assert!(errs[2] <= PDE_REL, "{errs:?}");
    assert!(order_verdict(&errs).0, "{errs:?}");
}

#[test]
fn nets_isotony_covariance_commutativity() {
    let st = flat(128);
    let space = SolutionSpace::new(st.clone());
    let small = Region::Diamond { tc: 3.0, xc: 2.0, radius: 0.8 };
    let net = net_algebra(&small, &space).unwrap();
    assert!(check_isotony(&net, &Region::Diamond { tc: 3.0, xc: 2.0, radius: 1.5 }, 2).unwrap().pass);
    let strip = check_isotony(&net, &Region::Strip { t_a: 4.6, t_b: 5.4 }, 2).unwrap();
    assert!(strip.pass, "{}", strip.line());
    let g = st.grid;
    let kappa = Embedding::translation(st.clone(), st.clone(), small.clone(), 6.0 * g.dt, 20.0 * g.dx()).unwrap();
    let cov = check_covariance(&net, &kappa).unwrap();
    assert!(cov.pass, "{}", cov.line());
    let far = net_algebra(&Region::Diamond { tc: 3.0, xc: 5.2, radius: 0.8 }, &space).unwrap();
    let comm = check_net_commutativity(&net, &far).unwrap();
    assert!(comm.pass, "{}", comm.line());
}

#[test]
fn non_convex_region_is_refused() {
    let st = flat(64);
    let space = SolutionSpace::new(st);
    let l = Region::Rect { t_a: 1.0, t_b: 5.0, xc: 3.0, half_width: 0.3 };
    assert!(net_algebra(&l, &space).is_err());
}

#[test]
fn weyl_products_follow_the_ccr() {
    let st = flat(64);
    let space = SolutionSpace::new(st.clone());
    let f = bump_fn(st.grid, 3.0, 2.0, 0.8, 1.0);
    let h = bump_fn(st.grid, 3.4, 3.0, 0.7, 1.0);
    let (a, b) = (space.register_generator(&f).unwrap(), space.register_generator(&h).unwrap());
    let wa = WeylElement::generator(space.clone(), a).unwrap();
    let wb = WeylElement::generator(space.clone(), b).unwrap();
    let ab = wa.mul(&wb).unwrap();
    let ba = wb.mul(&wa).unwrap();
    // W(a)W(b) = e^{-i sigma(a,b)} W(b)W(a)
    let s = space.sigma(a, b).unwrap();
    assert!(ab.distance(&ba.scale(Complex64::from_polar(1.0, -s))).unwrap() < 1e-12);
    // W(a)* W(a) = 1
    assert!(wa.star().unwrap().mul(&wa).unwrap().is_unit(1e-12).unwrap());
    // the surface sigma agrees with the volume form
    assert!(rel(s, symplectic_volume(&st, &f, &h).unwrap()) < 1e-10);
}

#[test]
fn weyl_product_is_associative_and_star_reverses() {
    let st = flat(64);
    let space = SolutionSpace::new(st.clone());
    let ids: Vec<_> = [(2.5, 1.0), (3.0, 3.0), (3.5, 5.0)]
        .iter()
        .map(|&(t, x)| space.register_generator(&bump_fn(st.grid, t, x, 0.7, 0.9)).unwrap())
        .collect();
    let w: Vec<_> = ids.iter().map(|&i| WeylElement::generator(space.clone(), i).unwrap()).collect();
    let x = w[0].add(&w[1].scale(c(0.5))).unwrap();
    let y = w[2].sub(&w[0]).unwrap();
    let z = w[1].scale(Complex64::new(0.0, 2.0));
    let l = x.mul(&y).unwrap().mul(&z).unwrap();
    let r = x.mul(&y.mul(&z).unwrap()).unwrap();
    assert!(l.distance(&r).unwrap() < 1e-12 * l.norm1());
    let s1 = x.mul(&y).unwrap().star().unwrap();
    let s2 = y.star().unwrap().mul(&x.star().unwrap()).unwrap();
    assert!(s1.distance(&s2).unwrap() < 1e-12 * s1.norm1());
    assert!(x.star().unwrap().star().unwrap().distance(&x).unwrap() < 1e-14);
}

#[test]
fn morphisms_carry_weyl_products() {
    let st = flat(64);
    let g = st.grid;
    let d = Region::Diamond { tc: 3.0, xc: 2.0, radius: 1.2 };
    let psi = Embedding::translation(st.clone(), st.clone(), d.clone(), 4.0 * g.dt, 9.0 * g.dx()).unwrap();
    let m = algebra_morphism(&psi).unwrap();
    assert!(m.certificate <= CERTIFICATE_REL);
    let fs = covkg::probe::probe_functions(&d, g, 2).unwrap();
    let a = WeylElement::generator(m.source.clone(), m.source.register_generator(&fs[0]).unwrap()).unwrap();
    let b = WeylElement::generator(m.source.clone(), m.source.register_generator(&fs[1]).unwrap()).unwrap();
    let lhs = m.apply_weyl(&a.mul(&b).unwrap()).unwrap();
    let rhs = m.apply_weyl(&a).unwrap().mul(&m.apply_weyl(&b).unwrap()).unwrap();
    assert!(lhs.distance(&rhs).unwrap() < 1e-10);
}

#[test]
fn bu_star_and_product_laws() {
    let g = grid(64);
    let f = bump_fn(g, 3.0, 2.0, 0.8, 1.0);
    let h = bump_fn(g, 3.4, 3.0, 0.7, 1.0);
    let k = bump_fn(g, 2.6, 4.0, 0.6, 0.9);
    let (pf, ph, pk) = (bu_field(&f, 4).unwrap(), bu_field(&h, 4).unwrap(), bu_field(&k, 4).unwrap());
    let a = pf.add(&ph.scale(Complex64::new(0.0, 1.0))).unwrap();
    let b = pk.mul(&pf).unwrap().add(&BUElement::scalar(4, c(2.0))).unwrap();
    assert_eq!(bu_star(&bu_star(&a)).distance(&a).unwrap(), 0.0);
    assert!(bu_star(&bu_mul(&a, &b).unwrap()).distance(&bu_mul(&bu_star(&b), &bu_star(&a)).unwrap()).unwrap() <= 1e-12);
    let l = bu_mul(&bu_mul(&a, &b).unwrap(), &pk).unwrap();
    let r = bu_mul(&a, &bu_mul(&b, &pk).unwrap()).unwrap();
    assert!(l.distance(&r).unwrap() <= 1e-12);
    // beyond the cutoff the product is flagged
    let deep = bu_mul(&l, &pf).unwrap();
    assert!(deep.truncated);
}

#[test]
fn bu_push_forward_is_functorial_and_natural() {
    let st = flat(64);
    let g = st.grid;
    let d = Region::Diamond { tc: 3.0, xc: 2.0, radius: 1.4 };
    let psi1 = Embedding::translation(st.clone(), st.clone(), d, 2.0 * g.dt, 5.0 * g.dx()).unwrap();
    let psi2 = Embedding::translation(st.clone(), st.clone(), psi1.image.clone(), 3.0 * g.dt, -7.0 * g.dx()).unwrap();
    let fs = covkg::probe::probe_functions(&psi1.domain, g, 2).unwrap();
    let (a, b) = (bu_field(&fs[0], 4).unwrap(), bu_field(&fs[1], 4).unwrap());
    let x = a.mul(&b).unwrap().add(&a.scale(c(3.0))).unwrap();
    let two = bu_push_forward(&psi2, &bu_push_forward(&psi1, &x).unwrap()).unwrap();
    let one = bu_push_forward(&psi1.then(&psi2).unwrap(), &x).unwrap();
    assert_eq!(two.distance(&one).unwrap(), 0.0);
    // naturality of Phi: alpha_psi(Phi(f)) = Phi(psi_* f)
    let nat = bu_push_forward(&psi1, &a).unwrap().distance(&bu_field(&psi1.push_forward(&fs[0]).unwrap(), 4).unwrap()).unwrap();
    assert_eq!(nat, 0.0);
    // push-forward is a *-homomorphism
    let l = bu_push_forward(&psi1, &a.mul(&b).unwrap()).unwrap();
    let r = bu_push_forward(&psi1, &a).unwrap().mul(&bu_push_forward(&psi1, &b).unwrap()).unwrap();
    assert!(l.distance(&r).unwrap() <= 1e-12);
    assert_eq!(bu_push_forward(&psi1, &bu_star(&x)).unwrap().distance(&bu_star(&bu_push_forward(&psi1, &x).unwrap())).unwrap(), 0.0);
}

#[test]
fn commutator_ideal_is_annihilated_by_the_vacuum() {
    let st = flat(256);
    let vac = vacuum_state(1.0, TAU, 128).unwrap();
    let f = bump_fn(st.grid, 3.0, 2.0, 0.8, 1.0);
    let h = bump_fn(st.grid, 3.4, 3.0, 0.7, 1.0);
    let (pf, ph) = (bu_field(&f, 4).unwrap(), bu_field(&h, 4).unwrap());
    let s = symplectic_volume(&st, &f, &h).unwrap();
    let j = pf.mul(&ph).unwrap().sub(&ph.mul(&pf).unwrap()).unwrap().sub(&BUElement::scalar(4, Complex64::new(0.0, s))).unwrap();
    let res = quasifree_eval_bu(vac.as_ref(), &j).unwrap().norm() / s.abs();
    assert!(res <= CCR_REL, "{res}");
    // and inside a product with another field
    let k = bu_field(&bump_fn(st.grid, 2.8, 4.5, 0.6, 0.9), 4).unwrap();
    let kjk = k.mul(&j).unwrap().mul(&k).unwrap();
    let scale = quasifree_eval_bu(vac.as_ref(), &k.mul(&k).unwrap()).unwrap().norm() * s.abs();
    assert!(quasifree_eval_bu(vac.as_ref(), &kjk).unwrap().norm() <= CCR_REL * scale);
}

#[test]
fn quasifree_moments_pair_up() {
    let g = grid(128);
    let vac = vacuum_state(1.0, TAU, 64).unwrap();
    let f = bump_fn(g, 3.0, 2.0, 0.8, 1.0);
    let pf = bu_field(&f, 4).unwrap();
    let w = vac.two_point(&f, &f).unwrap();
    let p4 = pf.mul(&pf).unwrap().mul(&pf).unwrap().mul(&pf).unwrap();
    assert!((quasifree_eval_bu(vac.as_ref(), &p4).unwrap() - 3.0 * w * w).norm() < 1e-12 * w.norm_sqr());
    assert_eq!(quasifree_eval_bu(vac.as_ref(), &pf.mul(&pf).unwrap().mul(&pf).unwrap()).unwrap(), c(0.0));
    assert_eq!(quasifree_eval_bu(vac.as_ref(), &BUElement::unit(4)).unwrap(), c(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lattice_translations_preserve_sigma(st_steps in -6isize..6, sx_steps in 0isize..64) {
        let st = flat(64);
        let g = st.grid;
        let d = Region::Diamond { tc: 3.1, xc: 3.0, radius: 1.1 };
        let psi = Embedding::translation(st.clone(), st.clone(), d, st_steps as f64 * g.dt, sx_steps as f64 * g.dx()).unwrap();
        let m = algebra_morphism(&psi).unwrap();
        prop_assert!(m.certificate <= CERTIFICATE_REL);
    }

    #[test]
    fn weyl_ccr_random(t1 in 2.4f64..3.8, x1 in 0.0f64..6.2, t2 in 2.4f64..3.8, x2 in 0.0f64..6.2, a in 0.2f64..2.0) {
        let st = flat(32);
        let space = SolutionSpace::new(st.clone());
        let f = covkg::solver::TestFunction::bump(st.grid, covkg::bump::Bump::new(t1, x1, 0.8, 1.0), a).unwrap();
        let h = bump_fn(st.grid, t2, x2, 0.8, 1.0);
        let (i, j) = (space.register_generator(&f).unwrap(), space.register_generator(&h).unwrap());
        let wi = WeylElement::generator(space.clone(), i).unwrap();
        let wj = WeylElement::generator(space.clone(), j).unwrap();
        let s = space.sigma(i, j).unwrap();
        let lhs = wi.mul(&wj).unwrap();
        let rhs = wj.mul(&wi).unwrap().scale(Complex64::from_polar(1.0, -s));
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-12);
        prop_assert!((s + space.sigma(j, i).unwrap()).abs() <= 1e-12 * s.abs().max(1e-12));
    }
}
