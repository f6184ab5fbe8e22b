use std::sync::Arc;

use homog_dirac::bundle::{monopole_bundle, rank_one_endo, tangent_bundle, trivial_bundle};
use homog_dirac::lie::{GroupElement, GroupModel, C64};
use homog_dirac::rep::{spin_conjugation, Representation, Spin};
use homog_dirac::section::{equivariance_residual, Section};
use homog_dirac::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn su2() -> Arc<GroupModel> {
    GroupModel::catalog("su2", 1.0).unwrap()
}

fn op(s: &Section, x: &GroupElement) -> DMatrix<C64> {
    s.value(x).as_operator().unwrap().clone()
}

fn pauli() -> [DMatrix<C64>; 3] {
    let c = |re: f64, im: f64| C64::new(re, im);
    [
        DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    ]
}

/// Numerical rank from singular values.
fn svd_rank(m: &DMatrix<C64>) -> usize {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > 1e-8)
        .count()
}

/// (charge, twice level) pairs with matching parity.
fn monopole_params() -> impl Strategy<Value = (i32, u32)> {
    (-3i32..=3).prop_flat_map(|n| {
        let lo = n.unsigned_abs();
        (Just(n), (0u32..=2).prop_map(move |k| lo + 2 * k))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// ξ = Σ_j η_j⟨η_j, ξ⟩_A, pointwise.
    #[test]
    fn reproducing_formula((n, tl) in monopole_params(), seed in any::<u64>()) {
        let g = su2();
        let bundle = monopole_bundle(&g, n, Some(Spin(tl))).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let xi = bundle.random_section(4, &mut r).unwrap();
        let terms: Vec<Section> = bundle
            .frame()
            .iter()
            .map(|eta| eta.mul(&eta.a_inner(&xi).unwrap()).unwrap())
            .collect();
        let back = Section::sum(&terms).unwrap();
        for _ in 0..4 {
            let x = g.sample_haar(&mut r).unwrap();
            let (a, b) = (back.value(&x), xi.value(&x));
            prop_assert!(a.sub(&b).norm() < 1e-11 * (1.0 + b.norm()));
        }
    }

    /// p² = p = p*, tr p = rank, p(xs) = p(x), and the frame Gram matrix equals p.
    #[test]
    fn projection_properties((n, tl) in monopole_params(), seed in any::<u64>()) {
        let g = su2();
        let bundle = monopole_bundle(&g, n, Some(Spin(tl))).unwrap();
        let p = bundle.projection_section().unwrap();
        let gram = bundle.frame_gram().unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let x = g.sample_haar(&mut r).unwrap();
        let s = g.sample_k(&mut r);
        let m = op(&p, &x);
        prop_assert!((&m * &m - &m).norm() < 1e-11);
        prop_assert!((m.adjoint() - &m).norm() < 1e-11);
        prop_assert!((m.trace() - C64::new(1.0, 0.0)).norm() < 1e-11);
        prop_assert!((op(&p, &x.mul(&s)) - &m).norm() < 1e-11);
        let gm = op(&gram, &x);
        prop_assert!((&gm - &m).norm() < 1e-11);
        prop_assert_eq!(svd_rank(&gm), bundle.rank());
    }

    /// Frames of charge n and −n have conjugate projections, related by the
    /// charge-conjugation matrix.
    #[test]
    fn opposite_charges_are_conjugate(n in 1i32..=3, seed in any::<u64>()) {
        let g = su2();
        let plus = monopole_bundle(&g, n, None).unwrap().frame_gram().unwrap();
        let minus = monopole_bundle(&g, -n, None).unwrap().frame_gram().unwrap();
        let spin = Spin(n as u32);
        let j = spin_conjugation(spin);
        let rep = Representation::spin(&g, spin).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let x = g.sample_haar(&mut r).unwrap();
        // J conj(ρ) J* = ρ, checked before it is relied on
        let u = rep.matrix(&x);
        prop_assert!((&j * u.conjugate() * j.adjoint() - &u).norm() < 1e-11);
        let lhs = &j * op(&plus, &x).conjugate() * j.adjoint();
        prop_assert!((lhs - op(&minus, &x)).norm() < 1e-11);
    }

    /// Frame elements and rank-one endomorphisms are equivariant.
    #[test]
    fn frame_and_endomorphisms_are_equivariant(seed in any::<u64>()) {
        let g = su2();
        let bundle = monopole_bundle(&g, 2, None).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<_> = (0..3).map(|_| g.sample_haar(&mut r).unwrap()).collect();
        let ss: Vec<_> = (0..3).map(|_| g.sample_k(&mut r)).collect();
        for eta in bundle.frame() {
            prop_assert!(equivariance_residual(eta, &bundle.action(), &xs, &ss) < 1e-11);
        }
        let t = rank_one_endo(&bundle.frame()[0], &bundle.frame()[1]).unwrap();
        prop_assert!(equivariance_residual(&t, &bundle.endomorphism_action(), &xs, &ss) < 1e-11);
    }
}

/// Charge ±1 over S²: p(x) = ½(1 ± n(x)·σ), n(x) the image of the pole.
#[test]
fn charge_one_is_the_bott_projection() {
    let g = su2();
    let sigma = pauli();
    let pole = g.k_basis().column(0).into_owned();
    let rep = Representation::spin(&g, Spin(1)).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(17);
    for (charge, sign) in [(1, 1.0), (-1, -1.0)] {
        let p = monopole_bundle(&g, charge, None).unwrap().projection_section().unwrap();
        for _ in 0..8 {
            let x = g.sample_haar(&mut r).unwrap();
            assert!(
                (rep.matrix(&x) - x.matrix()).norm() < 1e-12,
                "spin 1/2 is the defining rep"
            );
            let nvec = g.ad_matrix(&x) * &pole;
            let mut want = DMatrix::<C64>::identity(2, 2);
            for (i, s) in sigma.iter().enumerate() {
                want += s * C64::new(sign * nvec[i], 0.0);
            }
            want *= C64::new(0.5, 0.0);
            assert!((op(&p, &x) - want).norm() < 1e-12, "charge {charge}");
        }
    }
}

#[test]
fn trivial_and_tangent_bundles() {
    let g = su2();
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let triv = trivial_bundle(&g).unwrap();
    assert_eq!((triv.rank(), triv.frame().len()), (1, 1));
    let tan = tangent_bundle(&g).unwrap();
    assert_eq!((tan.rank(), tan.frame().len()), (2, 3));
    let pt = tan.projection_section().unwrap();
    for _ in 0..4 {
        let x = g.sample_haar(&mut r).unwrap();
        let one = op(&triv.projection_section().unwrap(), &x);
        assert!((one[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        let m = op(&pt, &x);
        assert_eq!(svd_rank(&m), 2);
        assert!((m.trace() - C64::new(2.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn bad_charges_are_rejected() {
    let g = su2();
    assert!(matches!(
        monopole_bundle(&g, 3, Some(Spin(2))),
        Err(Error::InvalidCharge { .. })
    ));
    assert!(matches!(
        monopole_bundle(&g, 1, Some(Spin(2))),
        Err(Error::InvalidCharge { .. })
    ));
    let s3 = GroupModel::catalog("su2-trivial-k", 1.0).unwrap();
    assert!(monopole_bundle(&s3, 1, None).is_err());
}
