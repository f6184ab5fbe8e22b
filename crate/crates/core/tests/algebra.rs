use std::sync::Arc;

use homog_dirac::clifford::CliffordElement;
use homog_dirac::lie::{AlgebraVector, GroupElement, GroupModel, C64};
use homog_dirac::quadrature::haar_rule;
use homog_dirac::rep::{Representation, Spin};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn su2() -> Arc<GroupModel> {
    GroupModel::catalog("su2", 1.0).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// iγ_k from a Jordan–Wigner chain on (C²)^⊗2: anticommuting, square −1.
fn jordan_wigner() -> Vec<DMatrix<C64>> {
    let c = |re: f64, im: f64| C64::new(re, im);
    let i2 = DMatrix::<C64>::identity(2, 2);
    let x = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
    let y = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
    let z = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
    [kron(&x, &i2), kron(&y, &i2), kron(&z, &x), kron(&z, &y)]
        .into_iter()
        .map(|g| g * c(0.0, 1.0))
        .collect()
}

fn to_matrix(a: &CliffordElement, gens: &[DMatrix<C64>]) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::zeros(4, 4);
    for (mask, c) in a.coeffs().iter().enumerate() {
        let mut m = DMatrix::<C64>::identity(4, 4);
        for (i, g) in gens.iter().enumerate().take(a.p()) {
            if mask >> i & 1 == 1 {
                m *= g;
            }
        }
        out += m * C64::new(*c, 0.0);
    }
    out
}

fn clifford(p: usize) -> impl Strategy<Value = CliffordElement> {
    prop::collection::vec(-2.0..2.0f64, 1 << p).prop_map(move |c| CliffordElement::from_coeffs(p, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clifford_product_matches_matrix_model(p in 1usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut draw = || {
            let c: Vec<f64> = (0..1 << p).map(|_| rand::Rng::gen_range(&mut r, -1.0..1.0)).collect();
            CliffordElement::from_coeffs(p, c).unwrap()
        };
        let (a, b) = (draw(), draw());
        let gens = jordan_wigner();
        let lhs = to_matrix(&a.mul(&b).unwrap(), &gens);
        let rhs = to_matrix(&a, &gens) * to_matrix(&b, &gens);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn clifford_star_and_trace(a in clifford(3), b in clifford(3)) {
        // (ab)* = b*a*, τ(a*a) = ‖a‖², τ(ab) = τ(ba)
        let ab = a.mul(&b).unwrap();
        let rhs = b.star().mul(&a.star()).unwrap();
        prop_assert!((&ab.star() - &rhs).norm() < 1e-12);
        let n2 = a.star().mul(&a).unwrap().trace();
        prop_assert!((n2 - a.norm().powi(2)).abs() < 1e-11);
        prop_assert!((ab.trace() - b.mul(&a).unwrap().trace()).abs() < 1e-11);
    }

    #[test]
    fn vectors_square_to_minus_norm(v in prop::collection::vec(-3.0..3.0f64, 3)) {
        let x = CliffordElement::from_vector(&DVector::from_vec(v.clone()));
        let sq = x.mul(&x).unwrap();
        let n2: f64 = v.iter().map(|c| c * c).sum();
        prop_assert!((&sq - &CliffordElement::scalar(3, -n2)).norm() < 1e-12);
    }

    #[test]
    fn adjoint_is_a_homomorphism(seed in any::<u64>()) {
        let g = su2();
        let mut r = rng(seed);
        let x = g.sample_haar(&mut r).unwrap();
        let y = g.sample_haar(&mut r).unwrap();
        let lhs = g.ad_matrix(&x.mul(&y));
        let rhs = g.ad_matrix(&x) * g.ad_matrix(&y);
        prop_assert!((lhs - rhs).norm() < 1e-12);
        // Ad_x preserves the bracket
        let (a, b) = (g.sample_algebra(&mut r), g.sample_algebra(&mut r));
        let ad = g.ad_matrix(&x);
        let lhs = &ad * g.bracket(&a, &b).coords;
        let rhs = g.bracket_coords(&(&ad * &a.coords), &(&ad * &b.coords));
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn bracket_agrees_with_matrix_commutator(seed in any::<u64>()) {
        let g = su2();
        let mut r = rng(seed);
        let (a, b) = (g.sample_algebra(&mut r), g.sample_algebra(&mut r));
        let (am, bm) = (g.to_matrix(&a.coords), g.to_matrix(&b.coords));
        let comm = &am * &bm - &bm * &am;
        let want = g.expand(&comm).unwrap();
        prop_assert!((g.bracket(&a, &b).coords - want).norm() < 1e-12);
    }

    #[test]
    fn exp_is_a_one_parameter_group(seed in any::<u64>(), s in -3.0..3.0f64, t in -3.0..3.0f64) {
        let g = su2();
        let mut r = rng(seed);
        let a = g.sample_algebra(&mut r);
        let lhs = g.exp_map(&a, s + t);
        let rhs = g.exp_map(&a, s).mul(&g.exp_map(&a, t));
        prop_assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-12);
        prop_assert!(lhs.unitarity_defect() < 1e-12);
    }

    #[test]
    fn spin_reps_are_unitary_homomorphisms(twice in 0u32..=4, seed in any::<u64>()) {
        let g = su2();
        let rep = Representation::spin(&g, Spin(twice)).unwrap();
        let mut r = rng(seed);
        let x = g.sample_haar(&mut r).unwrap();
        let y = g.sample_haar(&mut r).unwrap();
        let n = rep.dim();
        prop_assert!((rep.matrix(&x.mul(&y)) - rep.matrix(&x) * rep.matrix(&y)).norm() < 1e-11);
        let u = rep.matrix(&x);
        prop_assert!((u.adjoint() * &u - DMatrix::identity(n, n)).norm() < 1e-11);
        // dρ is a Lie algebra map
        let (a, b) = (g.sample_algebra(&mut r), g.sample_algebra(&mut r));
        let (da, db) = (rep.differential(&a.coords), rep.differential(&b.coords));
        let lhs = rep.differential(&g.bracket(&a, &b).coords);
        prop_assert!((lhs - (&da * &db - &db * &da)).norm() < 1e-11);
    }
}

/// ∫ ρ^ℓ_{ab} conj(ρ^ℓ_{cd}) dx = δ_ac δ_bd / (2ℓ + 1).
#[test]
fn schur_orthogonality() {
    let g = su2();
    let rule = haar_rule(&g, 4, None).unwrap();
    for twice in 0..=4u32 {
        let rep = Representation::spin(&g, Spin(twice)).unwrap();
        let n = rep.dim();
        let mats: Vec<DMatrix<C64>> = rule.nodes.iter().map(|x| rep.matrix(x)).collect();
        for (a, b, c, d) in [
            (0, 0, 0, 0),
            (0, n - 1, 0, n - 1),
            (0, 0, n - 1, n - 1),
            (n / 2, 0, n / 2, 0),
        ] {
            let val: C64 = mats
                .iter()
                .zip(&rule.weights)
                .map(|(m, w)| m[(a, b)] * m[(c, d)].conj() * *w)
                .sum();
            let want = if a == c && b == d { 1.0 / n as f64 } else { 0.0 };
            assert!(
                (val - C64::new(want, 0.0)).norm() < 1e-12,
                "spin {twice}/2 ({a}{b},{c}{d}): {val}"
            );
        }
    }
}

#[test]
fn catalog_spaces() {
    let s2 = su2();
    assert_eq!((s2.dim(), s2.dim_m()), (3, 2));
    let s3 = GroupModel::catalog("su2-trivial-k", 1.0).unwrap();
    assert_eq!(s3.dim_m(), 3);
    assert!(GroupModel::catalog("g2", 1.0).is_err());
    let e = GroupElement::identity(2);
    let x = AlgebraVector::basis(3, 0);
    assert_eq!(s2.adjoint(&e, &x).unwrap().coords, x.coords);
}
