//! Tangent sections, fundamental fields, invariant connections and torsion.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::clifford::derivation_matrix;
use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupModel, C64};
use crate::rep::KRepresentation;
use crate::section::{random_function, Codomain, KAction, Section, Value};

const EQUIVARIANCE_TOL: f64 = 1e-10;
const SKEW_TOL: f64 = 1e-12;

/// An orthonormal basis {X_j} of 𝔤 in 𝔤-coordinates; the fundamental
/// fields X̂_j form a standard module frame of the tangent module.
#[derive(Clone, Debug)]
pub struct Frame {
    vectors: Vec<DVector<f64>>,
}

impl Frame {
    /// The declared orthonormal basis, in order.
    pub fn standard(group: &GroupModel) -> Frame {
        let d = group.dim();
        Frame {
            vectors: (0..d).map(|i| AlgebraVector::basis(d, i).coords).collect(),
        }
    }

    /// X'_j = Σ_i O_{ij} X_i for an orthogonal O.
    pub fn rotated(group: &GroupModel, o: &DMatrix<f64>) -> Result<Frame> {
        let d = group.dim();
        if o.nrows() != d || o.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: o.nrows(),
            });
        }
        let defect = (o.transpose() * o - DMatrix::identity(d, d)).norm();
        if defect > 1e-10 {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Frame {
            vectors: (0..d).map(|j| o.column(j).into_owned()).collect(),
        })
    }

    /// A Haar-random rotation of the standard basis.
    pub fn random<R: Rng + ?Sized>(group: &GroupModel, rng: &mut R) -> Frame {
        let d = group.dim();
        let a = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let qr = a.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..d {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        Frame {
            vectors: (0..d).map(|j| q.column(j).into_owned()).collect(),
        }
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// X̂(x) = −P Ad_x⁻¹(X).
pub fn fundamental_field(group: &Arc<GroupModel>, x: &AlgebraVector) -> Result<Section> {
    Ok(Section::ad_inverse(group, x)?.project_m()?.scale(-1.0))
}

/// {X̂_j} for the frame's basis vectors.
pub fn tangent_frame(group: &Arc<GroupModel>, frame: &Frame) -> Result<Vec<Section>> {
    frame
        .vectors()
        .iter()
        .map(|v| fundamental_field(group, &AlgebraVector::new(v.clone())))
        .collect()
}

/// The bundle a connection differentiates.
#[derive(Clone, Debug)]
pub enum Target {
    /// γ = 0 on every bundle.
    Universal,
    /// H = 𝔪 with π = Ad; extends to Clif(𝔪) by derivations.
    Tangent,
    /// An induced bundle with complex fibre.
    Bundle(Arc<KRepresentation>),
}

#[derive(Clone, Debug)]
enum Gamma {
    Zero,
    Real(Vec<DMatrix<f64>>),
    Complex(Vec<DMatrix<C64>>),
}

/// A G-invariant connection ∇ = ∇⁰ + L parameterized by a K-equivariant
/// linear map γ: 𝔪 → L(H). Then L_W(x) = −γ(W(x)), since the fundamental
/// field is X̂(x) = −P Ad_x⁻¹X.
#[derive(Debug)]
pub struct Connection {
    group: Arc<GroupModel>,
    target: Target,
    gamma: Gamma,
    /// Derivation matrices of γ(e_i) on Clif(𝔪), when γ is real and skew.
    clifford: Option<Vec<DMatrix<f64>>>,
    canonical: bool,
    compatible: bool,
    label: String,
}

impl Connection {
    /// ∇⁰ on every bundle at once.
    pub fn canonical(group: &Arc<GroupModel>) -> Arc<Connection> {
        Arc::new(Connection {
            group: group.clone(),
            target: Target::Universal,
            gamma: Gamma::Zero,
            clifford: None,
            canonical: true,
            compatible: true,
            label: "canonical".into(),
        })
    }

    /// ∇⁰ + L on 𝒯(G/K) (and on Clif(𝒯) when γ is skew), γ given by its
    /// values on the orthonormal 𝔪-basis.
    pub fn tangent(group: &Arc<GroupModel>, gamma: Vec<DMatrix<f64>>) -> Result<Arc<Connection>> {
        Self::tangent_labelled(group, gamma, "gamma")
    }

    fn tangent_labelled(group: &Arc<GroupModel>, gamma: Vec<DMatrix<f64>>, label: &str) -> Result<Arc<Connection>> {
        let p = group.dim_m();
        if gamma.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: gamma.len(),
            });
        }
        for g in &gamma {
            if g.nrows() != p || g.ncols() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: g.nrows().max(g.ncols()),
                });
            }
        }
        let res = tangent_equivariance_residual(group, &gamma);
        if res > EQUIVARIANCE_TOL {
            return Err(Error::NotEquivariant(res));
        }
        let skew = gamma.iter().map(|g| (g + g.transpose()).norm()).fold(0.0, f64::max);
        let compatible = skew <= SKEW_TOL;
        let canonical = gamma.iter().all(|g| g.norm() == 0.0);
        let clifford = compatible.then(|| gamma.iter().map(derivation_matrix).collect());
        Ok(Arc::new(Connection {
            group: group.clone(),
            target: Target::Tangent,
            gamma: Gamma::Real(gamma),
            clifford,
            canonical,
            compatible,
            label: label.into(),
        }))
    }

    /// ∇⁰ + L⁰ with L⁰_V W = ½P[V, W], i.e. γ_X = −½P∘ad_X.
    pub fn levi_civita(group: &Arc<GroupModel>) -> Arc<Connection> {
        Self::tangent_labelled(group, levi_civita_gamma(group), "levi-civita")
            .expect("the Levi-Civita correction is equivariant")
    }

    /// A connection on an induced bundle; γ(e_i) are dim H × dim H.
    pub fn bundle(pi: &Arc<KRepresentation>, gamma: Vec<DMatrix<C64>>) -> Result<Arc<Connection>> {
        let group = pi.ambient().group().clone();
        let (p, n) = (group.dim_m(), pi.dim());
        if gamma.len() != p || gamma.iter().any(|g| g.nrows() != n || g.ncols() != n) {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: gamma.len(),
            });
        }
        let res = bundle_equivariance_residual(&group, pi, &gamma);
        if res > EQUIVARIANCE_TOL {
            return Err(Error::NotEquivariant(res));
        }
        let skew = gamma.iter().map(|g| (g + g.adjoint()).norm()).fold(0.0, f64::max);
        let canonical = gamma.iter().all(|g| g.norm() == 0.0);
        Ok(Arc::new(Connection {
            group,
            target: Target::Bundle(pi.clone()),
            gamma: Gamma::Complex(gamma),
            clifford: None,
            canonical,
            compatible: skew <= SKEW_TOL,
            label: "bundle".into(),
        }))
    }

    pub fn group(&self) -> &Arc<GroupModel> {
        &self.group
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// γ takes skew(-Hermitian) values.
    pub fn is_compatible(&self) -> bool {
        self.compatible
    }

    /// γ(e_i) on the tangent bundle; zero matrices for the canonical one.
    pub fn tangent_gamma(&self) -> Vec<DMatrix<f64>> {
        let p = self.group.dim_m();
        match &self.gamma {
            Gamma::Real(g) => g.clone(),
            _ => vec![DMatrix::zeros(p, p); p],
        }
    }

    /// v = Σ_i γ(e_i)e_i in 𝔪-coordinates. Pointwise Σ_j L_{W_j}W_j = −v
    /// for any standard frame, so v = 0 is the self-adjointness criterion.
    pub fn criterion_vector(&self) -> DVector<f64> {
        let g = self.tangent_gamma();
        let p = self.group.dim_m();
        let mut v = DVector::zeros(p);
        for (i, gi) in g.iter().enumerate() {
            v += gi.column(i);
        }
        v
    }

    pub(crate) fn check_target(&self, codomain: Codomain) -> Result<()> {
        let ok = match (&self.target, codomain) {
            (Target::Universal, _) => true,
            (Target::Tangent, Codomain::Tangent | Codomain::Real | Codomain::Complex) => true,
            (Target::Tangent, Codomain::Clifford) => {
                if !self.compatible {
                    return Err(Error::NotSkew(
                        self.tangent_gamma()
                            .iter()
                            .map(|g| (g + g.transpose()).norm())
                            .fold(0.0, f64::max),
                    ));
                }
                true
            }
            (Target::Bundle(pi), Codomain::Vector(n)) => pi.dim() == n,
            (Target::Bundle(_), Codomain::Real | Codomain::Complex) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Codomain(format!(
                "{} connection cannot act on {codomain}",
                self.label
            )))
        }
    }

    /// L_W(x)ξ(x) = −γ(W(x))ξ(x), with W given in 𝔪-coordinates.
    pub fn l_apply(&self, w: &DVector<f64>, v: &Value) -> Value {
        match (&self.gamma, v) {
            (Gamma::Zero, v) | (_, v @ (Value::Real(_) | Value::Complex(_))) => Value::zero(v.codomain(), &self.group),
            (Gamma::Real(g), Value::Tangent(t)) => {
                let mut out = DVector::zeros(t.len());
                for (c, gi) in w.iter().zip(g) {
                    if *c != 0.0 {
                        out -= gi * t * *c;
                    }
                }
                Value::Tangent(out)
            }
            (Gamma::Real(_), Value::Clifford(a)) => {
                let mats = self.clifford.as_ref().expect("target checked at construction");
                let x = a.to_dvector();
                let mut out = DVector::zeros(x.len());
                for (c, m) in w.iter().zip(mats) {
                    if *c != 0.0 {
                        out -= m * &x * *c;
                    }
                }
                Value::Clifford(crate::clifford::CliffordElement::from_dvector(a.p(), &out))
            }
            (Gamma::Complex(g), Value::Vector(x)) => {
                let mut out = DVector::zeros(x.len());
                for (c, gi) in w.iter().zip(g) {
                    if *c != 0.0 {
                        out -= gi * x * C64::new(*c, 0.0);
                    }
                }
                Value::Vector(out)
            }
            (_, v) => panic!("connection target mismatch for {}", v.codomain()),
        }
    }
}

/// γ_{e_i} = −½ P∘ad_{e_i} on 𝔪.
pub fn levi_civita_gamma(group: &GroupModel) -> Vec<DMatrix<f64>> {
    let mb = group.m_basis();
    (0..group.dim_m())
        .map(|i| mb.transpose() * group.ad_of(&mb.column(i).into_owned()) * mb * -0.5)
        .collect()
}

/// max over K-nodes and 𝔪-basis vectors of ‖γ(Ad_s e_i) − Ad_s γ(e_i) Ad_s⁻¹‖.
pub fn tangent_equivariance_residual(group: &GroupModel, gamma: &[DMatrix<f64>]) -> f64 {
    let rule = group.k_rule(9);
    let mut worst: f64 = 0.0;
    for a in &rule.ad_m {
        for (i, gi) in gamma.iter().enumerate() {
            let col = a.column(i);
            let mut lhs = DMatrix::zeros(gi.nrows(), gi.ncols());
            for (j, gj) in gamma.iter().enumerate() {
                lhs += gj * col[j];
            }
            let rhs = a * gi * a.transpose();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

fn bundle_equivariance_residual(group: &GroupModel, pi: &KRepresentation, gamma: &[DMatrix<C64>]) -> f64 {
    let rule = group.k_rule(2 * pi.ambient().bandwidth_twice() as usize + 5);
    let mut worst: f64 = 0.0;
    for (s, a) in rule.nodes.iter().zip(&rule.ad_m) {
        let ps = pi.matrix(s);
        for (i, gi) in gamma.iter().enumerate() {
            let mut lhs = DMatrix::<C64>::zeros(gi.nrows(), gi.ncols());
            for (j, gj) in gamma.iter().enumerate() {
                lhs += gj * C64::new(a[(j, i)], 0.0);
            }
            let rhs = &ps * gi * ps.adjoint();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

/// The K-average of γ: X ↦ ∫ Ad_s⁻¹ γ(Ad_s X) Ad_s ds.
fn average_gamma(group: &GroupModel, gamma: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    let rule = group.k_rule(9);
    let p = group.dim_m();
    let mut out = vec![DMatrix::zeros(p, p); p];
    for (a, w) in rule.ad_m.iter().zip(&rule.weights) {
        for (i, oi) in out.iter_mut().enumerate() {
            let col = a.column(i);
            let mut g = DMatrix::zeros(p, p);
            for (j, gj) in gamma.iter().enumerate() {
                g += gj * col[j];
            }
            *oi += a.transpose() * g * a * *w;
        }
    }
    out
}

/// γ(X) = u Xᵀ − X uᵀ, which shifts the criterion vector by (p − 1)u.
fn shift_gamma(gamma: &mut [DMatrix<f64>], u: &DVector<f64>) {
    let p = gamma.len();
    for (i, gi) in gamma.iter_mut().enumerate() {
        let e = DVector::from_fn(p, |k, _| if k == i { 1.0 } else { 0.0 });
        *gi += u * e.transpose() - &e * u.transpose();
    }
}

fn random_skew_equivariant<R: Rng + ?Sized>(group: &GroupModel, rng: &mut R) -> Vec<DMatrix<f64>> {
    let p = group.dim_m();
    let raw: Vec<DMatrix<f64>> = (0..p)
        .map(|_| {
            let a = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
            (&a - a.transpose()) * 0.5
        })
        .collect();
    average_gamma(group, &raw)
}

/// A random compatible invariant γ with Σ_i γ(e_i)e_i = 0.
pub fn random_balanced_gamma<R: Rng + ?Sized>(group: &Arc<GroupModel>, rng: &mut R) -> Result<Arc<Connection>> {
    let p = group.dim_m();
    if p < 2 {
        return Connection::tangent(group, vec![DMatrix::zeros(p, p); p]);
    }
    let mut gamma = random_skew_equivariant(group, rng);
    let v = criterion_of(&gamma);
    shift_gamma(&mut gamma, &(-v / (p as f64 - 1.0)));
    Connection::tangent_labelled(group, gamma, "random-balanced")
}

/// A random compatible invariant γ whose criterion vector has unit norm.
/// Fails when 𝔪 has no nonzero K-fixed vector, in which case every
/// invariant compatible γ is balanced.
pub fn random_violating_gamma<R: Rng + ?Sized>(group: &Arc<GroupModel>, rng: &mut R) -> Result<Arc<Connection>> {
    let p = group.dim_m();
    let rule = group.k_rule(9);
    let raw = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    let mut fixed = DVector::zeros(p);
    for (a, w) in rule.ad_m.iter().zip(&rule.weights) {
        fixed += a * &raw * *w;
    }
    if p < 2 || fixed.norm() < 1e-8 * raw.norm() {
        return Err(Error::UnsupportedGroup(format!(
            "{} has no K-invariant connection violating the criterion",
            group.name()
        )));
    }
    let mut gamma = random_skew_equivariant(group, rng);
    let v = criterion_of(&gamma);
    let target = fixed.normalize();
    shift_gamma(&mut gamma, &((target - v) / (p as f64 - 1.0)));
    Connection::tangent_labelled(group, gamma, "random-violating")
}

/// γ(e₁) = rotation of the (e₁, e₂)-plane taking e₁ to e₂; other values 0.
/// The criterion vector is e₂.
pub fn crafted_violating_gamma(group: &Arc<GroupModel>) -> Result<Arc<Connection>> {
    let p = group.dim_m();
    if p < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: p });
    }
    let mut gamma = vec![DMatrix::zeros(p, p); p];
    gamma[0][(1, 0)] = 1.0;
    gamma[0][(0, 1)] = -1.0;
    Connection::tangent_labelled(group, gamma, "crafted")
}

fn criterion_of(gamma: &[DMatrix<f64>]) -> DVector<f64> {
    let p = gamma.len();
    let mut v = DVector::zeros(p);
    for (i, gi) in gamma.iter().enumerate() {
        v += gi.column(i);
    }
    v
}

/// (∇⁰_W ξ)(x) = D₀ᵗ ξ(x·exp(tW(x))).
pub fn canonical_derivative(w: &Section, xi: &Section) -> Result<Section> {
    Section::apply_connection(&Connection::canonical(w.group()), w, xi)
}

pub fn apply_connection(conn: &Arc<Connection>, w: &Section, xi: &Section) -> Result<Section> {
    Section::apply_connection(conn, w, xi)
}

pub fn torsion(conn: &Arc<Connection>, frame: &Arc<Frame>, v: &Section, w: &Section) -> Result<Section> {
    Section::torsion(conn, frame, v, w)
}

/// trace(T^U) = Σ_j ⟨T(U, W_j), W_j⟩_A over the frame {W_j = X̂_j}.
pub fn torsion_trace(conn: &Arc<Connection>, frame: &Arc<Frame>, u: &Section) -> Result<Section> {
    let fields = tangent_frame(u.group(), frame)?;
    let terms: Vec<Section> = fields
        .iter()
        .map(|wj| Section::torsion(conn, frame, u, wj)?.a_inner(wj))
        .collect::<Result<_>>()?;
    Section::sum(&terms)
}

/// Σ_j L_{W_j}W_j as an 𝔪-valued section.
pub fn frame_self_action(conn: &Arc<Connection>, frame: &Arc<Frame>) -> Result<Section> {
    let g = conn.group().clone();
    let fields = tangent_frame(&g, frame)?;
    let terms: Vec<Section> = fields
        .iter()
        .map(|wj| {
            let full = Section::apply_connection(conn, wj, wj)?;
            let canon = canonical_derivative(wj, wj)?;
            full.sub(&canon)
        })
        .collect::<Result<_>>()?;
    Section::sum(&terms)
}

/// (is symmetric, max ‖P[Y_a, Y_b]‖ over 𝔪-basis pairs).
pub fn symmetric_space_check(group: &GroupModel) -> (bool, f64) {
    let mb = group.m_basis();
    let mut worst: f64 = 0.0;
    for a in 0..mb.ncols() {
        for b in 0..mb.ncols() {
            let br = group.bracket_coords(&mb.column(a).into_owned(), &mb.column(b).into_owned());
            worst = worst.max(group.to_m(&br).norm());
        }
    }
    (worst <= 1e-12, worst)
}

/// A random tangent section: the K-average of Σ_a f_a e_a with random
/// real coefficients of band limit `twice_bw`.
pub fn random_tangent_section<R: Rng + ?Sized>(group: &Arc<GroupModel>, twice_bw: u32, rng: &mut R) -> Result<Section> {
    let p = group.dim_m();
    let integer_only = p < group.dim();
    let terms: Vec<Section> = (0..p)
        .map(|a| {
            let e = DVector::from_fn(p, |k, _| if k == a { 1.0 } else { 0.0 });
            random_function(group, twice_bw, integer_only, rng)?.mul(&Section::constant(group, Value::Tangent(e)))
        })
        .collect::<Result<_>>()?;
    Section::sum(&terms)?.equivariant_project(KAction::Adjoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::GroupElement;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn levi_civita_vanishes_on_sphere() {
        let g = GroupModel::catalog("su2", 1.0).unwrap();
        assert!(levi_civita_gamma(&g).iter().all(|m| m.norm() < 1e-14));
        assert!(symmetric_space_check(&g).0);
    }

    #[test]
    fn levi_civita_on_group() {
        let g = GroupModel::catalog("su2-trivial-k", 1.0).unwrap();
        let gamma = levi_civita_gamma(&g);
        // −γ_{X₁}(X₂) = ½[X₁, X₂] = ½X₃
        let br = g.bracket_coords(&AlgebraVector::basis(3, 0).coords, &AlgebraVector::basis(3, 1).coords);
        let lhs = -(&gamma[0] * AlgebraVector::basis(3, 1).coords);
        assert!((lhs - br * 0.5).norm() < 1e-14);
        assert!(!symmetric_space_check(&g).0);
    }

    #[test]
    fn fundamental_field_of_k_vanishes_at_identity() {
        let g = GroupModel::catalog("su2", 1.0).unwrap();
        let z = AlgebraVector::new(g.k_basis().column(0).into_owned());
        let f = fundamental_field(&g, &z).unwrap();
        assert!(f.value(&GroupElement::identity(2)).norm() < 1e-15);
    }

    #[test]
    fn non_equivariant_gamma_rejected() {
        let g = GroupModel::catalog("su2", 1.0).unwrap();
        let mut gamma = vec![DMatrix::zeros(2, 2); 2];
        gamma[0][(0, 1)] = 1.0;
        gamma[0][(1, 0)] = -1.0;
        assert!(matches!(Connection::tangent(&g, gamma), Err(Error::NotEquivariant(_))));
    }

    #[test]
    fn generated_gammas_hit_their_criterion() {
        let g = GroupModel::catalog("su2-trivial-k", 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random_balanced_gamma(&g, &mut rng).unwrap();
        assert!(b.criterion_vector().norm() < 1e-12 && b.is_compatible());
        let v = random_violating_gamma(&g, &mut rng).unwrap();
        assert!((v.criterion_vector().norm() - 1.0).abs() < 1e-12 && v.is_compatible());
        let c = crafted_violating_gamma(&g).unwrap();
        assert!((c.criterion_vector() - DVector::from_vec(vec![0.0, 1.0, 0.0])).norm() < 1e-15);
        let s2 = GroupModel::catalog("su2", 1.0).unwrap();
        assert!(random_violating_gamma(&s2, &mut rng).is_err());
    }
}
