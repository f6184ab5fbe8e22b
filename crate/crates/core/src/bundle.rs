//! Induced bundles Ξ_π over G/K, their standard frames and projections.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::lie::{GroupModel, Subgroup, C64};
use crate::rep::{KRepresentation, Representation, Spin};
use crate::section::{KAction, Section};

/// Sections ξ: G → H with ξ(xs) = π_s⁻¹ ξ(x), where π is the restriction
/// of a G-representation π̃ on H̃ to a K-invariant subspace H.
#[derive(Clone, Debug)]
pub struct InducedBundle {
    pi: Arc<KRepresentation>,
    frame: Vec<Section>,
}

impl InducedBundle {
    pub fn new(pi: Arc<KRepresentation>) -> Result<InducedBundle> {
        let frame = build_frame(&pi)?;
        Ok(InducedBundle { pi, frame })
    }

    pub fn group(&self) -> &Arc<GroupModel> {
        self.pi.ambient().group()
    }

    pub fn pi(&self) -> &Arc<KRepresentation> {
        &self.pi
    }

    pub fn pi_tilde(&self) -> &Arc<Representation> {
        self.pi.ambient()
    }

    /// dim H.
    pub fn rank(&self) -> usize {
        self.pi.dim()
    }

    /// The standard frame η_1, …, η_n with n = dim H̃.
    pub fn frame(&self) -> &[Section] {
        &self.frame
    }

    pub fn action(&self) -> KAction {
        KAction::Rep(self.pi.clone())
    }

    pub fn endomorphism_action(&self) -> KAction {
        KAction::Conjugation(self.pi.clone())
    }

    /// p(x) = π̃_x P_H π̃_x*, a right-K-invariant projection in L(H̃).
    pub fn projection_section(&self) -> Result<Section> {
        Section::rep_conjugation(self.pi_tilde(), self.pi.projection())?.with_equivariance(KAction::Invariant)
    }

    /// {⟨η_j, η_k⟩_A}_{jk}.
    pub fn frame_gram(&self) -> Result<Section> {
        Section::gram(&self.frame)
    }

    /// ξ = Σ_j η_j f_j with random K-invariant complex coefficients f_j of
    /// band limit `twice_bw` (even values only contribute).
    pub fn random_section<R: Rng + ?Sized>(&self, twice_bw: u32, rng: &mut R) -> Result<Section> {
        let group = self.group();
        let terms: Vec<Section> = self
            .frame
            .iter()
            .map(|eta| eta.mul(&random_invariant_function(group, twice_bw, rng)?))
            .collect::<Result<_>>()?;
        Section::sum(&terms)?.with_equivariance(self.action())
    }
}

/// η_j(x) = P_H π̃_x⁻¹ e_j, written in H-coordinates as B*π̃(x)*e_j.
pub fn build_frame(pi: &Arc<KRepresentation>) -> Result<Vec<Section>> {
    let rep = pi.ambient();
    let n = rep.dim();
    (0..n)
        .map(|j| {
            let mut e = DVector::<C64>::zeros(n);
            e[j] = C64::new(1.0, 0.0);
            Section::rep_vector(rep, pi.isometry().adjoint(), e, true)?.with_equivariance(KAction::Rep(pi.clone()))
        })
        .collect()
}

/// ξ ↦ ζ⟨η, ξ⟩_A.
pub fn rank_one_endo(zeta: &Section, eta: &Section) -> Result<Section> {
    Section::rank_one(zeta, eta)
}

/// The line bundle of charge n over S² = SU(2)/U(1): H is the weight-n/2
/// line inside the spin-ℓ representation, ℓ defaulting to |n|/2.
pub fn monopole_bundle(group: &Arc<GroupModel>, charge: i32, level: Option<Spin>) -> Result<InducedBundle> {
    if !matches!(group.subgroup(), Subgroup::Circle { .. }) {
        return Err(Error::UnsupportedGroup(format!(
            "monopole bundles need a circle subgroup, got {}",
            group.name()
        )));
    }
    let spin = level.unwrap_or(Spin(charge.unsigned_abs()));
    let rep = Representation::spin(group, spin)?;
    let idx = rep.weight_index(charge).ok_or(Error::InvalidCharge {
        charge,
        level: spin.to_string(),
    })?;
    let mut iso = DMatrix::<C64>::zeros(rep.dim(), 1);
    iso[(idx, 0)] = C64::new(1.0, 0.0);
    InducedBundle::new(KRepresentation::new(rep, iso)?)
}

/// 𝒯(G/K) as the induced bundle of Ad on 𝔪 ⊆ 𝔤 (complexified).
pub fn tangent_bundle(group: &Arc<GroupModel>) -> Result<InducedBundle> {
    let rep = Representation::adjoint(group);
    let iso = group.m_basis().map(|v| C64::new(v, 0.0));
    InducedBundle::new(KRepresentation::new(rep, iso)?)
}

/// The trivial line bundle.
pub fn trivial_bundle(group: &Arc<GroupModel>) -> Result<InducedBundle> {
    let rep = Representation::trivial(group);
    InducedBundle::new(KRepresentation::restrict(rep))
}

/// A random right-K-invariant complex function Σ_ℓ ⟨u_ℓ, ρ^ℓ(x)v_ℓ⟩ with
/// v_ℓ in the K-fixed subspace; falls back to a constant off SU(2).
pub fn random_invariant_function<R: Rng + ?Sized>(
    group: &Arc<GroupModel>,
    twice_bw: u32,
    rng: &mut R,
) -> Result<Section> {
    let mut normal = || {
        C64::new(
            rng.sample(rand_distr::StandardNormal),
            rng.sample(rand_distr::StandardNormal),
        )
    };
    let mut terms = vec![Section::constant(group, crate::section::Value::Complex(normal()))];
    if group.kind() == crate::lie::GroupKind::Su2 {
        for t in (2..=twice_bw).step_by(2) {
            let rep = Representation::spin(group, Spin(t))?;
            let v = fixed_vector(group, &rep);
            if v.norm() < 1e-12 {
                continue;
            }
            let u = DVector::from_fn(rep.dim(), |_, _| normal());
            terms.push(Section::matrix_coefficient(&rep, u, v)?);
        }
    }
    Section::sum(&terms)?.with_equivariance(KAction::Invariant)
}

/// A unit vector fixed by ρ(K), or zero if none exists.
fn fixed_vector(group: &GroupModel, rep: &Representation) -> DVector<C64> {
    match group.subgroup() {
        Subgroup::Trivial => {
            let mut v = DVector::zeros(rep.dim());
            v[0] = C64::new(1.0, 0.0);
            v
        }
        Subgroup::Circle { .. } => match rep.weight_index(0) {
            Some(i) => {
                let mut v = DVector::zeros(rep.dim());
                v[i] = C64::new(1.0, 0.0);
                v
            }
            None => DVector::zeros(rep.dim()),
        },
    }
}
