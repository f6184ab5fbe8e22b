use std::sync::Arc;

use homog_dirac::geometry::*;
use homog_dirac::lie::{GroupElement, GroupModel};
use homog_dirac::section::{Section, Value};
use homog_dirac::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere() -> Arc<GroupModel> {
    GroupModel::catalog("su2", 1.0).unwrap()
}

fn s3() -> Arc<GroupModel> {
    GroupModel::catalog("su2-trivial-k", 1.0).unwrap()
}

fn random_matrices(r: &mut ChaCha8Rng, p: usize) -> Vec<DMatrix<f64>> {
    (0..p)
        .map(|_| DMatrix::from_fn(p, p, |_, _| r.gen_range(-1.0..1.0)))
        .collect()
}

fn max_diff(a: &Section, b: &Section, xs: &[GroupElement]) -> f64 {
    xs.iter()
        .map(|x| a.value(x).sub(&b.value(x)).norm())
        .fold(0.0, f64::max)
}

fn tangent(v: &Value) -> DVector<f64> {
    v.as_tangent().unwrap().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// On S³ every γ is invariant. For constant fields a, b:
    /// T(a, b) = −γ(a)b + γ(b)a − [a, b].
    #[test]
    fn torsion_of_constant_fields(seed in any::<u64>()) {
        let g = s3();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let gamma = random_matrices(&mut r, 3);
        let conn = Connection::tangent(&g, gamma.clone()).unwrap();
        let frame = Arc::new(Frame::standard(&g));
        let a = DVector::from_fn(3, |_, _| r.gen_range(-1.0..1.0));
        let b = DVector::from_fn(3, |_, _| r.gen_range(-1.0..1.0));
        let ga = |v: &DVector<f64>| -> DMatrix<f64> {
            gamma.iter().zip(v.iter()).fold(DMatrix::zeros(3, 3), |acc, (m, c)| acc + m * *c)
        };
        let mb = g.m_basis();
        let bracket = mb.transpose() * g.bracket_coords(&(mb * &a), &(mb * &b));
        let want = -ga(&a) * &b + ga(&b) * &a - bracket;
        let (va, vb) = (
            Section::constant(&g, Value::Tangent(a)),
            Section::constant(&g, Value::Tangent(b)),
        );
        let t = torsion(&conn, &frame, &va, &vb).unwrap();
        let x = g.sample_haar(&mut r).unwrap();
        prop_assert!((tangent(&t.value(&x)) - want).norm() < 1e-9);
    }

    /// Σ_j L_{W_j}W_j = −Σ_i γ(e_i)e_i pointwise, in any orthonormal frame.
    #[test]
    fn self_action_is_minus_the_criterion_vector(seed in any::<u64>()) {
        let g = s3();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let gamma = random_matrices(&mut r, 3);
        let v: DVector<f64> = gamma.iter().enumerate().fold(DVector::zeros(3), |acc, (i, m)| acc + m.column(i));
        let conn = Connection::tangent(&g, gamma).unwrap();
        prop_assert!((conn.criterion_vector() - &v).norm() < 1e-14);
        let frame = Arc::new(Frame::random(&g, &mut r));
        let s = frame_self_action(&conn, &frame).unwrap();
        for _ in 0..3 {
            let x = g.sample_haar(&mut r).unwrap();
            prop_assert!((tangent(&s.value(&x)) + &v).norm() < 1e-10);
        }
    }

    /// Compatible connections satisfy W⟨ξ, η⟩ = ⟨∇ξ, η⟩ + ⟨ξ, ∇η⟩.
    #[test]
    fn compatible_connections_are_leibniz(seed in any::<u64>(), on_sphere in any::<bool>()) {
        let g = if on_sphere { sphere() } else { s3() };
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let conn = random_balanced_gamma(&g, &mut r).unwrap();
        prop_assert!(conn.is_compatible());
        let (w, xi, eta) = (
            random_tangent_section(&g, 2, &mut r).unwrap(),
            random_tangent_section(&g, 2, &mut r).unwrap(),
            random_tangent_section(&g, 2, &mut r).unwrap(),
        );
        let lhs = canonical_derivative(&w, &xi.a_inner(&eta).unwrap()).unwrap();
        let rhs = apply_connection(&conn, &w, &xi).unwrap().a_inner(&eta).unwrap()
            .add(&xi.a_inner(&apply_connection(&conn, &w, &eta).unwrap()).unwrap())
            .unwrap();
        let xs: Vec<_> = (0..4).map(|_| g.sample_haar(&mut r).unwrap()).collect();
        prop_assert!(max_diff(&lhs, &rhs, &xs) < 1e-9);
    }
}

#[test]
fn non_skew_gamma_breaks_leibniz() {
    let g = s3();
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let mut gamma = vec![DMatrix::zeros(3, 3); 3];
    gamma[0] = DMatrix::identity(3, 3);
    let conn = Connection::tangent(&g, gamma).unwrap();
    assert!(!conn.is_compatible());
    let w = Section::constant(&g, Value::Tangent(DVector::from_vec(vec![1.0, 0.0, 0.0])));
    let xi = random_tangent_section(&g, 2, &mut r).unwrap();
    let lhs = canonical_derivative(&w, &xi.a_inner(&xi).unwrap()).unwrap();
    let d = apply_connection(&conn, &w, &xi).unwrap().a_inner(&xi).unwrap();
    let rhs = d.add(&d).unwrap();
    let x = g.sample_haar(&mut r).unwrap();
    // ∇_w ξ = ∇⁰_w ξ − ξ, so the defect is 2|ξ|²
    let gap = lhs.value(&x).sub(&rhs.value(&x)).norm();
    let want = 2.0 * xi.value(&x).norm().powi(2);
    assert!((gap - want).abs() < 1e-9, "{gap} vs {want}");
    // and it cannot act on Clifford sections
    let c = Section::real(&g, 1.0).to_clifford().unwrap();
    assert!(apply_connection(&conn, &w, &c).is_err());
}

#[test]
fn levi_civita_is_torsion_free_and_canonical_is_not() {
    let mut r = ChaCha8Rng::seed_from_u64(21);
    for g in [sphere(), s3()] {
        let frame = Arc::new(Frame::standard(&g));
        let fields = tangent_frame(&g, &frame).unwrap();
        let xs: Vec<_> = (0..4).map(|_| g.sample_haar(&mut r).unwrap()).collect();
        let lc = Connection::levi_civita(&g);
        let can = Connection::canonical(&g);
        let (mut lc_t, mut can_t) = (0.0f64, 0.0f64);
        for a in &fields {
            for b in &fields {
                let t = torsion(&lc, &frame, a, b).unwrap();
                lc_t = lc_t.max(xs.iter().map(|x| t.value(x).norm()).fold(0.0, f64::max));
                let t = torsion(&can, &frame, a, b).unwrap();
                can_t = can_t.max(xs.iter().map(|x| t.value(x).norm()).fold(0.0, f64::max));
            }
        }
        assert!(lc_t < 1e-9, "{}: {lc_t}", g.name());
        let (symmetric, _) = symmetric_space_check(&g);
        if symmetric {
            assert!(can_t < 1e-9, "{}: {can_t}", g.name());
        } else {
            assert!(can_t > 0.5, "{}: {can_t}", g.name());
        }
    }
}

/// [X₁, X₂] = X₃: S² is symmetric, and S³ = SU(2)/{e} has ‖P[e₁, e₂]‖ = 1.
#[test]
fn symmetric_space_detection() {
    let (sym, res) = symmetric_space_check(&sphere());
    assert!(sym && res < 1e-14);
    let (sym, res) = symmetric_space_check(&s3());
    assert!(!sym);
    assert!((res - 1.0).abs() < 1e-12, "{res}");
}

#[test]
fn crafted_gamma_has_criterion_e2() {
    for g in [sphere(), s3()] {
        match crafted_violating_gamma(&g) {
            Ok(c) => {
                let v = c.criterion_vector();
                let mut e2 = DVector::zeros(g.dim_m());
                e2[1] = 1.0;
                assert!((v - e2).norm() < 1e-15);
            }
            // the (e₁, e₂) rotation is not U(1)-equivariant on S²
            Err(e) => assert!(matches!(e, Error::NotEquivariant(_)), "{e}"),
        }
    }
    assert!(crafted_violating_gamma(&s3()).is_ok());
}

#[test]
fn invariance_constraints_on_the_sphere() {
    let g = sphere();
    let mut r = ChaCha8Rng::seed_from_u64(4);
    // a generic γ is not U(1)-equivariant
    let err = Connection::tangent(&g, random_matrices(&mut r, 2)).unwrap_err();
    assert!(matches!(err, Error::NotEquivariant(_)));
    assert!(matches!(
        Connection::tangent(&g, random_matrices(&mut r, 3)),
        Err(Error::DimensionMismatch { .. })
    ));
    // no K-fixed tangent vector, so no violating γ and balanced ones vanish
    assert!(random_violating_gamma(&g, &mut r).is_err());
    let bal = random_balanced_gamma(&g, &mut r).unwrap();
    assert!(bal.criterion_vector().norm() < 1e-12);
    assert!(tangent_equivariance_residual(&g, &levi_civita_gamma(&g)) < 1e-12);
    // on S³ a violating γ has a unit criterion vector
    let v = random_violating_gamma(&s3(), &mut r).unwrap().criterion_vector();
    assert!((v.norm() - 1.0).abs() < 1e-12);
}
