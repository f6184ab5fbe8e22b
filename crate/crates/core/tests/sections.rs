use std::sync::Arc;

use homog_dirac::geometry::random_tangent_section;
use homog_dirac::lie::{AlgebraVector, GroupModel, C64};
use homog_dirac::quadrature::haar_rule;
use homog_dirac::rep::{Representation, Spin};
use homog_dirac::section::{
    equivariance_residual, integrate, l2_inner_complex, random_function, KAction, Section, Value,
};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn su2() -> Arc<GroupModel> {
    GroupModel::catalog("su2", 1.0).unwrap()
}

fn cvec(r: &mut ChaCha8Rng, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The engine's directional derivative against a central difference.
    #[test]
    fn derivative_matches_finite_difference(seed in any::<u64>(), twice in 1u32..=4) {
        let g = su2();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let rep = Representation::spin(&g, Spin(twice)).unwrap();
        let f = Section::matrix_coefficient(&rep, cvec(&mut r, rep.dim()), cvec(&mut r, rep.dim())).unwrap();
        let x = g.sample_haar(&mut r).unwrap();
        let y = g.sample_algebra(&mut r);
        let h = 1e-5;
        let plus = f.value(&x.mul(&g.exp_map(&y, h)));
        let minus = f.value(&x.mul(&g.exp_map(&y, -h)));
        let fd = plus.sub(&minus).scale(0.5 / h);
        let d = f.deriv(&x, &y).unwrap();
        prop_assert!(d.sub(&fd).norm() < 1e-7 * (1.0 + d.norm()), "{d:?} vs {fd:?}");
    }

    #[test]
    fn linear_combinations_evaluate_pointwise(seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let g = su2();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let s = random_tangent_section(&g, 2, &mut r).unwrap();
        let t = random_tangent_section(&g, 2, &mut r).unwrap();
        let comb = Section::linear_combination(&[a, b], &[s.clone(), t.clone()]).unwrap();
        let x = g.sample_haar(&mut r).unwrap();
        let want = s.value(&x).scale(a);
        let mut want = want;
        want.axpy(b, &t.value(&x));
        prop_assert!(comb.value(&x).sub(&want).norm() < 1e-12);
    }

    /// λ_y f (x) = f(y⁻¹x), and derivatives commute with translation.
    #[test]
    fn translation_acts_on_the_left(seed in any::<u64>()) {
        let g = su2();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let f = random_function(&g, 3, false, &mut r).unwrap();
        let (x, y) = (g.sample_haar(&mut r).unwrap(), g.sample_haar(&mut r).unwrap());
        let moved = f.translate(&y);
        let yx = y.inverse().mul(&x);
        prop_assert!(moved.value(&x).sub(&f.value(&yx)).norm() < 1e-12);
        let dir = g.sample_algebra(&mut r);
        let lhs = moved.deriv(&x, &dir).unwrap();
        let rhs = f.deriv(&yx, &dir).unwrap();
        prop_assert!(lhs.sub(&rhs).norm() < 1e-11);
    }

    /// K-averaging yields equivariant sections and fixes equivariant ones.
    #[test]
    fn equivariant_projection(seed in any::<u64>()) {
        let g = su2();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let raw = Section::constant(&g, Value::Tangent(DVector::from_fn(2, |_, _| r.gen_range(-1.0..1.0))))
            .mul(&random_function(&g, 2, true, &mut r).unwrap())
            .unwrap();
        let avg = raw.equivariant_project(KAction::Adjoint).unwrap();
        let xs: Vec<_> = (0..3).map(|_| g.sample_haar(&mut r).unwrap()).collect();
        let ss: Vec<_> = (0..3).map(|_| g.sample_k(&mut r)).collect();
        prop_assert!(equivariance_residual(&avg, &KAction::Adjoint, &xs, &ss) < 1e-10);
        let again = avg.equivariant_project(KAction::Adjoint).unwrap();
        for x in &xs {
            prop_assert!(again.value(x).sub(&avg.value(x)).norm() < 1e-10);
        }
    }

    /// A-valued inner product: conjugate-linear in the first slot.
    #[test]
    fn a_inner_is_sesquilinear(seed in any::<u64>(), re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let g = su2();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let rep = Representation::spin(&g, Spin(2)).unwrap();
        let (u, v) = (cvec(&mut r, 3), cvec(&mut r, 3));
        let s = Section::rep_vector(&rep, nalgebra::DMatrix::identity(3, 3), u, false).unwrap();
        let t = Section::rep_vector(&rep, nalgebra::DMatrix::identity(3, 3), v, false).unwrap();
        let c = C64::new(re, im);
        let cs = s.mul(&Section::constant(&g, Value::Complex(c))).unwrap();
        let x = g.sample_haar(&mut r).unwrap();
        let lhs = cs.a_inner(&t).unwrap().value(&x).as_complex().unwrap();
        let rhs = c.conj() * s.a_inner(&t).unwrap().value(&x).as_complex().unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-11);
    }
}

/// ∫ conj⟨u, ρv⟩⟨u', ρv'⟩ = ⟨u', u⟩⟨v, v'⟩ / dim ρ.
#[test]
fn l2_inner_of_coefficients() {
    let g = su2();
    let rule = haar_rule(&g, 4, None).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(5);
    for twice in 1..=4u32 {
        let rep = Representation::spin(&g, Spin(twice)).unwrap();
        let n = rep.dim();
        let (u, v, u2, v2) = (cvec(&mut r, n), cvec(&mut r, n), cvec(&mut r, n), cvec(&mut r, n));
        let f = Section::matrix_coefficient(&rep, u.clone(), v.clone()).unwrap();
        let f2 = Section::matrix_coefficient(&rep, u2.clone(), v2.clone()).unwrap();
        let got = l2_inner_complex(&f, &f2, &rule).unwrap();
        let want = u2.dotc(&u) * v.dotc(&v2) / n as f64;
        assert!((got - want).norm() < 1e-12, "spin {twice}/2: {got} vs {want}");
        // different spins are orthogonal
        let other = Representation::spin(&g, Spin(twice - 1)).unwrap();
        let m = other.dim();
        let h = Section::matrix_coefficient(&other, cvec(&mut r, m), cvec(&mut r, m)).unwrap();
        assert!(l2_inner_complex(&f, &h, &rule).unwrap().norm() < 1e-12);
    }
    // ∫ 1 = 1
    let one = integrate(&Section::real(&g, 1.0), &rule).unwrap();
    assert!((one - C64::new(1.0, 0.0)).norm() < 1e-14);
}

#[test]
fn codomain_errors_are_reported() {
    let g = su2();
    let t = Section::constant(&g, Value::Tangent(DVector::zeros(2)));
    let c = Section::real(&g, 1.0).to_clifford().unwrap();
    assert!(t.add(&c).is_err());
    assert!(integrate(&t, &haar_rule(&g, 1, None).unwrap()).is_err());
    let x = AlgebraVector::basis(3, 0);
    assert!(Section::real(&g, 2.0)
        .deriv(&homog_dirac::lie::GroupElement::identity(2), &x)
        .is_ok());
}
