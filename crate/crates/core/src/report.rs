//! Machine-readable verification reports.

use serde::Serialize;

/// (check name, anchor, default tolerance).
pub const CHECKS: &[(&str, &str, f64)] = &[
    (
        "algebra.k_closure",
        "𝔨 is a subalgebra and 𝔪 its orthogonal complement",
        1e-10,
    ),
    (
        "bundle.restriction",
        "π̃ restricted to K preserves H and equals π there",
        1e-12,
    ),
    ("bundle.frame_equivariance", "η_j(xs) = π_s⁻¹ η_j(x)", 1e-10),
    ("bundle.reproducing_formula", "Σ_j η_j⟨η_j, ξ⟩_A = ξ", 1e-10),
    (
        "bundle.projection_idempotent",
        "p(x) = π̃_x P π̃_x* is an orthogonal projection",
        1e-11,
    ),
    ("bundle.projection_trace", "tr p(x) = dim H", 1e-10),
    (
        "bundle.gram_idempotent",
        "the frame Gram matrix {⟨η_j, η_k⟩_A} is a projection",
        1e-11,
    ),
    ("bundle.endomorphism_reconstruction", "T = Σ_j ⟨Tη_j, η_j⟩_E", 1e-10),
    ("tangent.fundamental_field", "X̂(x) = −P Ad_x⁻¹ X", 1e-10),
    ("tangent.frame_identity", "W = Σ_j X̂_j⟨X̂_j, W⟩_A", 1e-10),
    ("tangent.frame_trace", "Σ_j ⟨X̂_j, X̂_j⟩_A = dim 𝔪", 1e-10),
    ("tangent.bracket", "[X̂, Ŷ] = ([X, Y])^", 1e-10),
    ("connection.gamma_equivariance", "γ(Ad_s X) = Ad_s γ(X) Ad_s⁻¹", 1e-10),
    ("connection.metric_compatibility", "γ takes skew values", 1e-12),
    ("connection.leibniz", "δ_W⟨ξ, η⟩_A = ⟨∇_W ξ, η⟩_A + ⟨ξ, ∇_W η⟩_A", 1e-9),
    ("connection.invariance", "∇ commutes with left translations", 1e-9),
    (
        "connection.torsion_formula",
        "T(V, W) = −γ(V)W + γ(W)V − P[V, W] pointwise",
        1e-10,
    ),
    (
        "connection.torsion_free",
        "the Levi-Civita connection is torsion-free",
        1e-10,
    ),
    (
        "dirac.commutator_identity",
        "[D, M_f] is Clifford multiplication by grad f",
        1e-9,
    ),
    (
        "dirac.frame_independence",
        "D does not depend on the standard frame",
        1e-10,
    ),
    (
        "dirac.translation_commutation",
        "D commutes with left translations",
        1e-9,
    ),
    (
        "dirac.criterion",
        "trace of torsion and Σ_j ∇_{W_j}W_j − ∇⁰_{W_j}W_j vanish",
        1e-8,
    ),
    (
        "dirac.selfadjoint_defect",
        "⟨Dφ, ψ⟩ = ⟨φ, Dψ⟩ on band-limited spinors",
        1e-8,
    ),
];

pub fn anchor(check: &str) -> &'static str {
    CHECKS.iter().find(|c| c.0 == check).map(|c| c.1).unwrap_or("")
}

pub fn default_tolerance(check: &str) -> f64 {
    CHECKS.iter().find(|c| c.0 == check).map(|c| c.2).unwrap_or(1e-10)
}

/// One check. Field order is the JSON key order.
#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub check: String,
    pub anchor: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub pass: bool,
}

impl Entry {
    pub fn new(check: &str, max_residual: f64, tolerance: f64, samples: usize) -> Entry {
        Entry {
            check: check.to_string(),
            anchor: anchor(check).to_string(),
            max_residual,
            tolerance,
            samples,
            // NaN residuals fail
            pass: max_residual <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub group: String,
    pub bundle: String,
    pub connection: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Entry>,
}

impl Report {
    pub fn push(&mut self, entry: Entry) {
        log::info!(
            "{}: {:.3e} (tol {:.1e}) {}",
            entry.check,
            entry.max_residual,
            entry.tolerance,
            if entry.pass { "pass" } else { "FAIL" }
        );
        self.pass &= entry.pass;
        self.checks.push(entry);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.checks.iter().filter(|e| !e.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
