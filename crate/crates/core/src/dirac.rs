//! The Hodge–Dirac operator on Clif(𝒯(G/K)) and its self-adjointness
//! criterion.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::clifford::CliffordElement;
use crate::error::{Error, Result};
use crate::geometry::{frame_self_action, fundamental_field, torsion_trace, Connection, Frame};
use crate::lie::{AlgebraVector, GroupElement, GroupModel};
use crate::quadrature::QuadratureRule;
use crate::section::{l2_inner, random_function, KAction, Section, Value};

/// Dφ = Σ_j (∇_{W_j}φ)·W_j.
pub fn hodge_dirac(conn: &Arc<Connection>, frame: &Arc<Frame>, phi: &Section) -> Result<Section> {
    Section::dirac(conn, frame, phi)
}

/// grad f = Σ_j W_j δ_{W_j} f.
pub fn gradient(frame: &Arc<Frame>, f: &Section) -> Result<Section> {
    Section::gradient(frame, f)
}

/// max over `xs` of ‖D(φf) − (Dφ)f − φ·grad f‖_c.
pub fn commutator_defect(
    conn: &Arc<Connection>,
    frame: &Arc<Frame>,
    f: &Section,
    phi: &Section,
    xs: &[GroupElement],
) -> Result<f64> {
    let d_phi_f = hodge_dirac(conn, frame, &phi.mul(f)?)?;
    let d_phi = hodge_dirac(conn, frame, phi)?;
    let grad = gradient(frame, f)?.to_clifford()?;
    let rhs = d_phi.mul(f)?.add(&phi.mul(&grad)?)?;
    let diff = d_phi_f.sub(&rhs)?;
    Ok(xs.iter().map(|x| diff.value(x).norm()).fold(0.0, f64::max))
}

/// max over pairs of |⟨Dφ, ψ⟩ − ⟨φ, Dψ⟩|.
pub fn selfadjoint_defect(
    conn: &Arc<Connection>,
    frame: &Arc<Frame>,
    tests: &[(Section, Section)],
    rule: &QuadratureRule,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (phi, psi) in tests {
        let lhs = l2_inner(&hodge_dirac(conn, frame, phi)?, psi, rule)?;
        let rhs = l2_inner(phi, &hodge_dirac(conn, frame, psi)?, rule)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    /// max over samples and U = X̂_j of |trace(T^U)|.
    pub torsion_trace_max: f64,
    /// max over samples of ‖Σ_j L_{W_j}W_j‖.
    pub self_action_residual: f64,
    pub tolerance: f64,
    pub torsion_trace_pass: bool,
    pub self_action_pass: bool,
    /// Both parts agree and pass.
    pub verdict: bool,
}

/// Evaluates both forms of the self-adjointness criterion at `xs`.
pub fn criterion_check(
    conn: &Arc<Connection>,
    frame: &Arc<Frame>,
    xs: &[GroupElement],
    tolerance: f64,
) -> Result<CriterionReport> {
    if !conn.is_compatible() {
        return Err(Error::NotSkew(f64::NAN));
    }
    let g = conn.group();
    let traces: Vec<Section> = frame
        .vectors()
        .iter()
        .map(|v| torsion_trace(conn, frame, &fundamental_field(g, &AlgebraVector::new(v.clone()))?))
        .collect::<Result<_>>()?;
    let self_action = frame_self_action(conn, frame)?;
    let mut tt: f64 = 0.0;
    let mut sa: f64 = 0.0;
    for x in xs {
        for t in &traces {
            tt = tt.max(t.value(x).norm());
        }
        sa = sa.max(self_action.value(x).norm());
    }
    let (tp, sp) = (tt <= tolerance, sa <= tolerance);
    Ok(CriterionReport {
        torsion_trace_max: tt,
        self_action_residual: sa,
        tolerance,
        torsion_trace_pass: tp,
        self_action_pass: sp,
        verdict: tp && sp,
    })
}

/// A random equivariant spinor: the K-average of Σ_S f_S e_S over all
/// blades with random band-limited coefficients f_S.
pub fn random_spinor<R: Rng + ?Sized>(group: &Arc<GroupModel>, twice_bw: u32, rng: &mut R) -> Result<Section> {
    let p = group.dim_m();
    let integer_only = !matches!(group.subgroup(), crate::lie::Subgroup::Trivial);
    let terms: Vec<Section> = (0..1usize << p)
        .map(|mask| {
            let f = random_function(group, twice_bw, integer_only, rng)?;
            let blade = Section::constant(group, Value::Clifford(CliffordElement::blade(p, mask)));
            f.mul(&blade)
        })
        .collect::<Result<_>>()?;
    Section::sum(&terms)?.equivariant_project(KAction::Clifford)
}

/// Spinors built from the frame: 1, X̂_j and X̂_j·X̂_k.
pub fn frame_spinors(group: &Arc<GroupModel>, frame: &Frame) -> Result<Vec<Section>> {
    let fields: Vec<Section> = frame
        .vectors()
        .iter()
        .map(|v| fundamental_field(group, &AlgebraVector::new(v.clone()))?.to_clifford())
        .collect::<Result<_>>()?;
    let mut out = vec![Section::real(group, 1.0).to_clifford()?];
    out.extend(fields.iter().cloned());
    for j in 0..fields.len() {
        for k in j + 1..fields.len() {
            out.push(fields[j].mul(&fields[k])?);
        }
    }
    Ok(out)
}

/// K-averaged constant blades e_S, S ≠ ∅, dropping those that average to 0.
pub fn constant_spinors(group: &Arc<GroupModel>) -> Result<Vec<Section>> {
    let p = group.dim_m();
    let e = GroupElement::identity(group.matrix_dim());
    let mut out = Vec::new();
    for mask in 1..1usize << p {
        let s = Section::constant(group, Value::Clifford(CliffordElement::blade(p, mask)))
            .equivariant_project(KAction::Clifford)?;
        if s.value(&e).norm() > 1e-12 {
            out.push(s);
        }
    }
    Ok(out)
}

/// `count` pairs for the self-adjointness test: the constant spinors paired
/// with the unit (these detect a nonzero criterion vector), then random pairs.
pub fn spinor_test_pairs<R: Rng + ?Sized>(
    group: &Arc<GroupModel>,
    count: usize,
    twice_bw: u32,
    rng: &mut R,
) -> Result<Vec<(Section, Section)>> {
    let one = Section::real(group, 1.0).to_clifford()?;
    let mut pairs: Vec<(Section, Section)> = constant_spinors(group)?
        .into_iter()
        .map(|s| (s, one.clone()))
        .take(count)
        .collect();
    while pairs.len() < count {
        pairs.push((
            random_spinor(group, twice_bw, rng)?,
            random_spinor(group, twice_bw, rng)?,
        ));
    }
    Ok(pairs)
}
