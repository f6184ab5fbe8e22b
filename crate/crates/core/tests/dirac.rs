use std::sync::Arc;

use homog_dirac::dirac::*;
use homog_dirac::geometry::*;
use homog_dirac::lie::{GroupElement, GroupModel};
use homog_dirac::quadrature::{coset_rule, haar_rule, QuadratureRule};
use homog_dirac::section::{random_function, KAction, Section};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rule_for(g: &Arc<GroupModel>, b: u32) -> QuadratureRule {
    if g.dim_m() == g.dim() {
        haar_rule(g, b, None).unwrap()
    } else {
        coset_rule(g, b, None).unwrap()
    }
}

fn spaces() -> Vec<Arc<GroupModel>> {
    vec![
        GroupModel::catalog("su2", 1.0).unwrap(),
        GroupModel::catalog("su2-trivial-k", 1.0).unwrap(),
    ]
}

#[test]
fn commutator_identity_on_both_spaces() {
    for g in spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let frame = Arc::new(Frame::standard(&g));
        let integer = g.dim_m() < g.dim();
        let xs: Vec<_> = (0..6).map(|_| g.sample_haar(&mut rng).unwrap()).collect();
        for conn in [Connection::canonical(&g), Connection::levi_civita(&g)] {
            let f = random_function(&g, 2, integer, &mut rng)
                .unwrap()
                .equivariant_project(KAction::Invariant)
                .unwrap();
            let phi = random_spinor(&g, 2, &mut rng).unwrap();
            let d = commutator_defect(&conn, &frame, &f, &phi, &xs).unwrap();
            assert!(d < 1e-9, "{} {}: {d}", g.name(), conn.label());
        }
    }
}

#[test]
fn dirac_is_frame_independent() {
    for g in spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = Arc::new(Frame::standard(&g));
        let b = Arc::new(Frame::random(&g, &mut rng));
        let conn = Connection::levi_civita(&g);
        let phi = random_spinor(&g, 2, &mut rng).unwrap();
        let da = hodge_dirac(&conn, &a, &phi).unwrap();
        let db = hodge_dirac(&conn, &b, &phi).unwrap();
        for _ in 0..5 {
            let x = g.sample_haar(&mut rng).unwrap();
            assert!(da.value(&x).sub(&db.value(&x)).norm() < 1e-10);
        }
    }
}

#[test]
fn dirac_commutes_with_left_translation() {
    for g in spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let frame = Arc::new(Frame::standard(&g));
        let conn = Connection::levi_civita(&g);
        let phi = random_spinor(&g, 2, &mut rng).unwrap();
        let y = g.sample_haar(&mut rng).unwrap();
        let lhs = hodge_dirac(&conn, &frame, &phi.translate(&y)).unwrap();
        let rhs = hodge_dirac(&conn, &frame, &phi).unwrap().translate(&y);
        for _ in 0..5 {
            let x = g.sample_haar(&mut rng).unwrap();
            assert!(lhs.value(&x).sub(&rhs.value(&x)).norm() < 1e-9);
        }
    }
}

#[test]
fn self_adjointness_tracks_the_criterion() {
    for g in spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let frame = Arc::new(Frame::standard(&g));
        let rule = rule_for(&g, 6);
        let pairs = spinor_test_pairs(&g, 6, 2, &mut rng).unwrap();
        let xs: Vec<GroupElement> = (0..4).map(|_| g.sample_haar(&mut rng).unwrap()).collect();
        let mut conns = vec![Connection::canonical(&g), Connection::levi_civita(&g)];
        conns.push(random_balanced_gamma(&g, &mut rng).unwrap());
        if let Ok(c) = random_violating_gamma(&g, &mut rng) {
            conns.push(c);
        }
        for conn in conns {
            let defect = selfadjoint_defect(&conn, &frame, &pairs, &rule).unwrap();
            let report = criterion_check(&conn, &frame, &xs, 1e-8).unwrap();
            assert_eq!(
                defect <= 1e-8,
                report.verdict,
                "{} {}: {defect}",
                g.name(),
                conn.label()
            );
        }
    }
}

#[test]
fn gradient_pairs_with_fundamental_fields() {
    let g = GroupModel::catalog("su2", 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let frame = Arc::new(Frame::standard(&g));
    let f = random_function(&g, 2, true, &mut rng)
        .unwrap()
        .equivariant_project(KAction::Invariant)
        .unwrap();
    let grad = gradient(&frame, &f).unwrap();
    let x_hat = fundamental_field(&g, &g.sample_algebra(&mut rng)).unwrap();
    let lhs = grad.a_inner(&x_hat).unwrap();
    for _ in 0..5 {
        let x = g.sample_haar(&mut rng).unwrap();
        let w = x_hat.value(&x);
        let y = g.from_m(w.as_tangent().unwrap());
        let df = f.deriv(&x, &homog_dirac::lie::AlgebraVector::new(y)).unwrap();
        assert!(lhs.value(&x).sub(&df).norm() < 1e-10);
    }
    let constant = gradient(&frame, &Section::real(&g, 3.0)).unwrap();
    assert!(constant.value(&GroupElement::identity(2)).norm() == 0.0);
}
