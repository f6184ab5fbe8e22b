//! Sections as expression graphs on G.
//!
//! Every node knows its value at x and, when its derivative order is 1,
//! the exact right-directional derivative D₀ᵗ s(x·exp(tY)). Applying a
//! connection, the Dirac operator, a gradient or a torsion consumes that
//! single derivative, so those nodes have order 0.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::clifford::{automorphism_matrix, CliffordElement};
use crate::error::{Error, Result};
use crate::geometry::{Connection, Frame};
use crate::lie::{AlgebraVector, GroupElement, GroupModel, KRule, C64};
use crate::quadrature::QuadratureRule;
use crate::rep::{KRepresentation, Representation};

/// A pointwise value of a section.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Complex(C64),
    /// 𝔤-coordinates.
    Lie(DVector<f64>),
    /// 𝔪-coordinates.
    Tangent(DVector<f64>),
    Clifford(CliffordElement),
    /// An element of a representation space H.
    Vector(DVector<C64>),
    /// A linear operator on H.
    Operator(DMatrix<C64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Codomain {
    Real,
    Complex,
    Lie,
    Tangent,
    Clifford,
    Vector(usize),
    Operator(usize),
}

impl fmt::Display for Codomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Codomain::Real => write!(f, "real"),
            Codomain::Complex => write!(f, "complex"),
            Codomain::Lie => write!(f, "𝔤"),
            Codomain::Tangent => write!(f, "𝔪"),
            Codomain::Clifford => write!(f, "Clif(𝔪)"),
            Codomain::Vector(n) => write!(f, "H(dim {n})"),
            Codomain::Operator(n) => write!(f, "L(H)(dim {n})"),
        }
    }
}

impl Value {
    pub fn zero(codomain: Codomain, group: &GroupModel) -> Value {
        match codomain {
            Codomain::Real => Value::Real(0.0),
            Codomain::Complex => Value::Complex(C64::new(0.0, 0.0)),
            Codomain::Lie => Value::Lie(DVector::zeros(group.dim())),
            Codomain::Tangent => Value::Tangent(DVector::zeros(group.dim_m())),
            Codomain::Clifford => Value::Clifford(CliffordElement::zero(group.dim_m())),
            Codomain::Vector(n) => Value::Vector(DVector::zeros(n)),
            Codomain::Operator(n) => Value::Operator(DMatrix::zeros(n, n)),
        }
    }

    pub fn codomain(&self) -> Codomain {
        match self {
            Value::Real(_) => Codomain::Real,
            Value::Complex(_) => Codomain::Complex,
            Value::Lie(_) => Codomain::Lie,
            Value::Tangent(_) => Codomain::Tangent,
            Value::Clifford(_) => Codomain::Clifford,
            Value::Vector(v) => Codomain::Vector(v.len()),
            Value::Operator(m) => Codomain::Operator(m.nrows()),
        }
    }

    /// self += c·other; both sides must share a codomain.
    pub fn axpy(&mut self, c: f64, other: &Value) {
        match (self, other) {
            (Value::Real(a), Value::Real(b)) => *a += c * b,
            (Value::Complex(a), Value::Complex(b)) => *a += b * c,
            (Value::Lie(a), Value::Lie(b)) | (Value::Tangent(a), Value::Tangent(b)) => a.axpy(c, b, 1.0),
            (Value::Clifford(a), Value::Clifford(b)) => a.axpy(c, b),
            (Value::Vector(a), Value::Vector(b)) => a.axpy(C64::new(c, 0.0), b, C64::new(1.0, 0.0)),
            (Value::Operator(a), Value::Operator(b)) => *a += b * C64::new(c, 0.0),
            (a, b) => panic!("axpy across codomains {} and {}", a.codomain(), b.codomain()),
        }
    }

    pub fn scale(&self, c: f64) -> Value {
        let mut out = Value::zero_like(self);
        out.axpy(c, self);
        out
    }

    fn zero_like(v: &Value) -> Value {
        match v {
            Value::Real(_) => Value::Real(0.0),
            Value::Complex(_) => Value::Complex(C64::new(0.0, 0.0)),
            Value::Lie(a) => Value::Lie(DVector::zeros(a.len())),
            Value::Tangent(a) => Value::Tangent(DVector::zeros(a.len())),
            Value::Clifford(a) => Value::Clifford(CliffordElement::zero(a.p())),
            Value::Vector(a) => Value::Vector(DVector::zeros(a.len())),
            Value::Operator(a) => Value::Operator(DMatrix::zeros(a.nrows(), a.ncols())),
        }
    }

    pub fn sub(&self, other: &Value) -> Value {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Euclidean / Frobenius / ⟨·,·⟩_c norm.
    pub fn norm(&self) -> f64 {
        match self {
            Value::Real(a) => a.abs(),
            Value::Complex(a) => a.norm(),
            Value::Lie(a) | Value::Tangent(a) => a.norm(),
            Value::Clifford(a) => a.norm(),
            Value::Vector(a) => a.norm(),
            Value::Operator(a) => a.norm(),
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(a) => Some(*a),
            _ => None,
        }
    }

    pub fn as_complex(&self) -> Option<C64> {
        match self {
            Value::Complex(a) => Some(*a),
            Value::Real(a) => Some(C64::new(*a, 0.0)),
            _ => None,
        }
    }

    pub fn as_tangent(&self) -> Option<&DVector<f64>> {
        match self {
            Value::Tangent(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_lie(&self) -> Option<&DVector<f64>> {
        match self {
            Value::Lie(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_clifford(&self) -> Option<&CliffordElement> {
        match self {
            Value::Clifford(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&DVector<C64>> {
        match self {
            Value::Vector(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_operator(&self) -> Option<&DMatrix<C64>> {
        match self {
            Value::Operator(a) => Some(a),
            _ => None,
        }
    }
}

/// Pointwise product; the pair of codomains was validated at construction.
fn mul_values(a: &Value, b: &Value) -> Value {
    match (a, b) {
        (Value::Real(s), v) | (v, Value::Real(s)) => v.scale(*s),
        (Value::Complex(s), Value::Complex(t)) => Value::Complex(s * t),
        (Value::Complex(s), Value::Vector(v)) | (Value::Vector(v), Value::Complex(s)) => Value::Vector(v * *s),
        (Value::Complex(s), Value::Operator(m)) | (Value::Operator(m), Value::Complex(s)) => Value::Operator(m * *s),
        (Value::Clifford(x), Value::Clifford(y)) => Value::Clifford(x.mul_unchecked(y)),
        (Value::Operator(m), Value::Vector(v)) => Value::Vector(m * v),
        (Value::Operator(m), Value::Operator(n)) => Value::Operator(m * n),
        _ => unreachable!("product codomains are validated at construction"),
    }
}

fn product_codomain(a: Codomain, b: Codomain) -> Option<Codomain> {
    use Codomain::*;
    match (a, b) {
        (Real, x) | (x, Real) => Some(x),
        (Complex, Complex) => Some(Complex),
        (Complex, Vector(n)) | (Vector(n), Complex) => Some(Vector(n)),
        (Complex, Operator(n)) | (Operator(n), Complex) => Some(Operator(n)),
        (Clifford, Clifford) => Some(Clifford),
        (Operator(n), Vector(m)) if n == m => Some(Vector(n)),
        (Operator(n), Operator(m)) if n == m => Some(Operator(n)),
        _ => None,
    }
}

/// ⟨a, b⟩ pointwise: real for real codomains, conjugate-linear in `a`
/// for complex ones.
fn inner_values(a: &Value, b: &Value) -> Value {
    match (a, b) {
        (Value::Real(x), Value::Real(y)) => Value::Real(x * y),
        (Value::Lie(x), Value::Lie(y)) | (Value::Tangent(x), Value::Tangent(y)) => Value::Real(x.dot(y)),
        (Value::Clifford(x), Value::Clifford(y)) => Value::Real(x.inner_unchecked(y)),
        (Value::Complex(x), Value::Complex(y)) => Value::Complex(x.conj() * y),
        (Value::Vector(x), Value::Vector(y)) => Value::Complex(x.dotc(y)),
        (Value::Operator(x), Value::Operator(y)) => Value::Complex(x.dotc(y)),
        _ => unreachable!("inner-product codomains are validated at construction"),
    }
}

fn inner_codomain(a: Codomain) -> Codomain {
    match a {
        Codomain::Complex | Codomain::Vector(_) | Codomain::Operator(_) => Codomain::Complex,
        _ => Codomain::Real,
    }
}

/// How K acts on a codomain; it also serves as the equivariance tag
/// s(xs) = π_s⁻¹ s(x) of a section.
#[derive(Clone, Debug)]
pub enum KAction {
    /// s(xs) = s(x).
    Invariant,
    /// Ad_K on 𝔤.
    AdjointLie,
    /// Ad_K on 𝔪.
    Adjoint,
    /// Ad_K extended to Clif(𝔪) as an algebra automorphism.
    Clifford,
    /// π on H.
    Rep(Arc<KRepresentation>),
    /// T ↦ π_s T π_s⁻¹ on L(H).
    Conjugation(Arc<KRepresentation>),
}

impl KAction {
    fn compatible(&self, codomain: Codomain) -> bool {
        match (self, codomain) {
            (KAction::Invariant, _) => true,
            (KAction::AdjointLie, Codomain::Lie) => true,
            (KAction::Adjoint, Codomain::Tangent) => true,
            (KAction::Clifford, Codomain::Clifford) => true,
            (KAction::Rep(p), Codomain::Vector(n)) => p.dim() == n,
            (KAction::Conjugation(p), Codomain::Operator(n)) => p.dim() == n,
            _ => false,
        }
    }

    /// π_s(v) for s ∈ K.
    pub fn act(&self, group: &GroupModel, s: &GroupElement, v: &Value) -> Value {
        match (self, v) {
            (KAction::Invariant, v) => v.clone(),
            (KAction::AdjointLie, Value::Lie(a)) => Value::Lie(group.ad_matrix(s) * a),
            (KAction::Adjoint, Value::Tangent(a)) => Value::Tangent(group.ad_m_matrix(s) * a),
            (KAction::Clifford, Value::Clifford(a)) => {
                let m = automorphism_matrix(&group.ad_m_matrix(s));
                Value::Clifford(CliffordElement::from_dvector(a.p(), &(m * a.to_dvector())))
            }
            (KAction::Rep(p), Value::Vector(a)) => Value::Vector(p.matrix(s) * a),
            (KAction::Conjugation(p), Value::Operator(a)) => {
                let m = p.matrix(s);
                Value::Operator(&m * a * m.adjoint())
            }
            (a, v) => panic!("K-action {a:?} does not act on {}", v.codomain()),
        }
    }
}

/// Precomputed π_{s_k} for the nodes of a K-rule.
enum ActionMats {
    Identity,
    Real(Vec<DMatrix<f64>>),
    Complex(Vec<DMatrix<C64>>),
    Conjugation(Vec<DMatrix<C64>>),
}

impl ActionMats {
    fn build(action: &KAction, rule: &KRule) -> ActionMats {
        match action {
            KAction::Invariant => ActionMats::Identity,
            KAction::AdjointLie => ActionMats::Real(rule.ad_g.clone()),
            KAction::Adjoint => ActionMats::Real(rule.ad_m.clone()),
            KAction::Clifford => ActionMats::Real(rule.ad_m.iter().map(automorphism_matrix).collect()),
            KAction::Rep(p) => ActionMats::Complex(rule.nodes.iter().map(|s| p.matrix(s)).collect()),
            KAction::Conjugation(p) => ActionMats::Conjugation(rule.nodes.iter().map(|s| p.matrix(s)).collect()),
        }
    }

    fn apply(&self, k: usize, v: &Value) -> Value {
        match (self, v) {
            (ActionMats::Identity, v) => v.clone(),
            (ActionMats::Real(ms), Value::Lie(a)) => Value::Lie(&ms[k] * a),
            (ActionMats::Real(ms), Value::Tangent(a)) => Value::Tangent(&ms[k] * a),
            (ActionMats::Real(ms), Value::Clifford(a)) => {
                Value::Clifford(CliffordElement::from_dvector(a.p(), &(&ms[k] * a.to_dvector())))
            }
            (ActionMats::Complex(ms), Value::Vector(a)) => Value::Vector(&ms[k] * a),
            (ActionMats::Conjugation(ms), Value::Operator(a)) => Value::Operator(&ms[k] * a * ms[k].adjoint()),
            _ => unreachable!("projection action validated at construction"),
        }
    }
}

/// An evaluation point x ∈ G with per-point caches (Ad_x⁻¹, ρ(x),
/// ρ(x)dρ(X_k) and the right-translates x·s_k used by K-averaging).
pub struct Point {
    x: GroupElement,
    cache: RefCell<Cache>,
}

#[derive(Default)]
struct Cache {
    ad_inv: Option<Rc<DMatrix<f64>>>,
    rho: HashMap<u64, Rc<DMatrix<C64>>>,
    rho_d: HashMap<u64, Rc<Vec<DMatrix<C64>>>>,
    children: HashMap<u64, Rc<Vec<Point>>>,
}

impl Point {
    pub fn new(x: GroupElement) -> Self {
        Point {
            x,
            cache: RefCell::new(Cache::default()),
        }
    }

    pub fn x(&self) -> &GroupElement {
        &self.x
    }

    /// Ad_{x⁻¹} on 𝔤.
    pub fn ad_inv(&self, group: &GroupModel) -> Rc<DMatrix<f64>> {
        if let Some(m) = &self.cache.borrow().ad_inv {
            return m.clone();
        }
        let m = Rc::new(group.ad_matrix(&self.x).transpose());
        self.cache.borrow_mut().ad_inv = Some(m.clone());
        m
    }

    fn rho(&self, rep: &Representation) -> Rc<DMatrix<C64>> {
        if let Some(m) = self.cache.borrow().rho.get(&rep.id) {
            return m.clone();
        }
        let m = Rc::new(rep.matrix(&self.x));
        self.cache.borrow_mut().rho.insert(rep.id, m.clone());
        m
    }

    /// ρ(x)·dρ(X_k) for every orthonormal basis vector X_k.
    fn rho_d(&self, rep: &Representation) -> Rc<Vec<DMatrix<C64>>> {
        if let Some(m) = self.cache.borrow().rho_d.get(&rep.id) {
            return m.clone();
        }
        let rho = self.rho(rep);
        let d = rep.group().dim();
        let v: Vec<DMatrix<C64>> = (0..d).map(|k| &*rho * rep.generator(k)).collect();
        let v = Rc::new(v);
        self.cache.borrow_mut().rho_d.insert(rep.id, v.clone());
        v
    }

    fn children(&self, rule: &KRule) -> Rc<Vec<Point>> {
        if let Some(c) = self.cache.borrow().children.get(&rule.id) {
            return c.clone();
        }
        let c: Vec<Point> = rule.nodes.iter().map(|s| Point::new(self.x.mul(s))).collect();
        let c = Rc::new(c);
        self.cache.borrow_mut().children.insert(rule.id, c.clone());
        c
    }
}

fn combine_rho_d(rd: &[DMatrix<C64>], y: &DVector<f64>) -> DMatrix<C64> {
    let n = rd[0].nrows();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (c, m) in y.iter().zip(rd) {
        if *c != 0.0 {
            out += m * C64::new(*c, 0.0);
        }
    }
    out
}

enum Kind {
    Constant(Value),
    MatrixCoefficient {
        rep: Arc<Representation>,
        u: DVector<C64>,
        v: DVector<C64>,
    },
    RepVector {
        rep: Arc<Representation>,
        left: DMatrix<C64>,
        vec: DVector<C64>,
        inverse: bool,
    },
    RepConjugation {
        rep: Arc<Representation>,
        proj: DMatrix<C64>,
    },
    AdInverse(DVector<f64>),
    ProjectM(Section),
    Sum(Vec<Section>),
    Scale(f64, Section),
    Product(Section, Section),
    Inner(Section, Section),
    RealPart(Section),
    ImagPart(Section),
    ToClifford(Section),
    Star(Section),
    RankOne(Section, Section),
    Gram(Vec<Section>),
    Translate {
        inner: Section,
        y_inv: GroupElement,
    },
    Project {
        inner: Section,
        rule: Arc<KRule>,
        mats: ActionMats,
    },
    Connection {
        conn: Arc<Connection>,
        w: Section,
        xi: Section,
    },
    Dirac {
        conn: Arc<Connection>,
        frame: Arc<Frame>,
        phi: Section,
    },
    Gradient {
        frame: Arc<Frame>,
        f: Section,
    },
    Torsion {
        conn: Arc<Connection>,
        frame: Arc<Frame>,
        v: Section,
        w: Section,
    },
}

struct Node {
    kind: Kind,
    group: Arc<GroupModel>,
    codomain: Codomain,
    order: u8,
    /// Conservative band limit in units of twice the spin.
    bandwidth: u32,
    equivariance: Option<KAction>,
    label: &'static str,
}

/// An immutable, shareable section of some bundle over G/K.
#[derive(Clone)]
pub struct Section(Arc<Node>);

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Section")
            .field("node", &self.0.label)
            .field("codomain", &self.0.codomain)
            .field("order", &self.0.order)
            .field("bandwidth", &self.0.bandwidth)
            .finish()
    }
}

fn mismatch(msg: impl Into<String>) -> Error {
    Error::Codomain(msg.into())
}

impl Section {
    fn make(
        kind: Kind,
        group: Arc<GroupModel>,
        codomain: Codomain,
        order: u8,
        bandwidth: u32,
        equivariance: Option<KAction>,
        label: &'static str,
    ) -> Section {
        Section(Arc::new(Node {
            kind,
            group,
            codomain,
            order,
            bandwidth,
            equivariance,
            label,
        }))
    }

    fn same_group(&self, other: &Section) -> Result<()> {
        if !Arc::ptr_eq(&self.0.group, &other.0.group) {
            return Err(mismatch("sections live on different groups"));
        }
        Ok(())
    }

    pub fn group(&self) -> &Arc<GroupModel> {
        &self.0.group
    }

    pub fn codomain(&self) -> Codomain {
        self.0.codomain
    }

    /// Number of exact directional derivatives supported (0 or 1).
    pub fn order(&self) -> u8 {
        self.0.order
    }

    pub fn bandwidth_twice(&self) -> u32 {
        self.0.bandwidth
    }

    pub fn equivariance(&self) -> Option<&KAction> {
        self.0.equivariance.as_ref()
    }

    /// Declares an equivariance property without checking it; use
    /// [`equivariance_residual`] to verify.
    pub fn with_equivariance(self, action: KAction) -> Result<Section> {
        if !action.compatible(self.0.codomain) {
            return Err(mismatch(format!(
                "action {action:?} does not act on {}",
                self.0.codomain
            )));
        }
        let n = &self.0;
        let kind = Kind::Sum(vec![self.clone()]);
        Ok(Section::make(
            kind,
            n.group.clone(),
            n.codomain,
            n.order,
            n.bandwidth,
            Some(action),
            n.label,
        ))
    }

    // ----- generators -----

    pub fn constant(group: &Arc<GroupModel>, value: Value) -> Section {
        let codomain = value.codomain();
        let eq = match codomain {
            Codomain::Real | Codomain::Complex => Some(KAction::Invariant),
            _ => None,
        };
        Section::make(Kind::Constant(value), group.clone(), codomain, 1, 0, eq, "constant")
    }

    pub fn real(group: &Arc<GroupModel>, c: f64) -> Section {
        Section::constant(group, Value::Real(c))
    }

    /// x ↦ ⟨u, ρ(x)v⟩.
    pub fn matrix_coefficient(rep: &Arc<Representation>, u: DVector<C64>, v: DVector<C64>) -> Result<Section> {
        for w in [&u, &v] {
            if w.len() != rep.dim() {
                return Err(Error::DimensionMismatch {
                    expected: rep.dim(),
                    got: w.len(),
                });
            }
        }
        Ok(Section::make(
            Kind::MatrixCoefficient { rep: rep.clone(), u, v },
            rep.group().clone(),
            Codomain::Complex,
            1,
            rep.bandwidth_twice(),
            None,
            "matrix-coefficient",
        ))
    }

    /// x ↦ L·ρ(x)^{±1}·e, valued in a space of dimension rows(L).
    pub fn rep_vector(
        rep: &Arc<Representation>,
        left: DMatrix<C64>,
        vec: DVector<C64>,
        inverse: bool,
    ) -> Result<Section> {
        if left.ncols() != rep.dim() || vec.len() != rep.dim() {
            return Err(Error::DimensionMismatch {
                expected: rep.dim(),
                got: left.ncols().max(vec.len()),
            });
        }
        let out = left.nrows();
        Ok(Section::make(
            Kind::RepVector {
                rep: rep.clone(),
                left,
                vec,
                inverse,
            },
            rep.group().clone(),
            Codomain::Vector(out),
            1,
            rep.bandwidth_twice(),
            None,
            "rep-vector",
        ))
    }

    /// x ↦ ρ(x)·P·ρ(x)*. Right-K-invariant when P commutes with ρ(K).
    pub fn rep_conjugation(rep: &Arc<Representation>, proj: DMatrix<C64>) -> Result<Section> {
        if proj.nrows() != rep.dim() || proj.ncols() != rep.dim() {
            return Err(Error::DimensionMismatch {
                expected: rep.dim(),
                got: proj.nrows(),
            });
        }
        Ok(Section::make(
            Kind::RepConjugation { rep: rep.clone(), proj },
            rep.group().clone(),
            Codomain::Operator(rep.dim()),
            1,
            2 * rep.bandwidth_twice(),
            None,
            "rep-conjugation",
        ))
    }

    /// x ↦ Ad_x⁻¹(X), 𝔤-valued.
    pub fn ad_inverse(group: &Arc<GroupModel>, x: &AlgebraVector) -> Result<Section> {
        if x.dim() != group.dim() {
            return Err(Error::DimensionMismatch {
                expected: group.dim(),
                got: x.dim(),
            });
        }
        Ok(Section::make(
            Kind::AdInverse(x.coords.clone()),
            group.clone(),
            Codomain::Lie,
            1,
            2,
            Some(KAction::AdjointLie),
            "ad-inverse",
        ))
    }

    // ----- combinators -----

    /// P applied pointwise: 𝔤-valued → 𝔪-valued.
    pub fn project_m(&self) -> Result<Section> {
        if self.codomain() != Codomain::Lie {
            return Err(mismatch(format!("apply-P needs 𝔤 values, got {}", self.codomain())));
        }
        let eq = match self.equivariance() {
            Some(KAction::AdjointLie) => Some(KAction::Adjoint),
            Some(KAction::Invariant) => Some(KAction::Invariant),
            _ => None,
        };
        Ok(Section::make(
            Kind::ProjectM(self.clone()),
            self.group().clone(),
            Codomain::Tangent,
            self.order(),
            self.bandwidth_twice(),
            eq,
            "apply-P",
        ))
    }

    pub fn sum(terms: &[Section]) -> Result<Section> {
        let first = terms.first().ok_or(Error::EmptyFamily)?;
        for t in terms {
            first.same_group(t)?;
            if t.codomain() != first.codomain() {
                return Err(mismatch(format!(
                    "cannot add {} and {}",
                    first.codomain(),
                    t.codomain()
                )));
            }
        }
        let order = terms.iter().map(|t| t.order()).min().unwrap_or(0);
        let bw = terms.iter().map(|t| t.bandwidth_twice()).max().unwrap_or(0);
        let eq = common_equivariance(terms.iter().map(|t| t.equivariance()));
        Ok(Section::make(
            Kind::Sum(terms.to_vec()),
            first.group().clone(),
            first.codomain(),
            order,
            bw,
            eq,
            "sum",
        ))
    }

    pub fn add(&self, other: &Section) -> Result<Section> {
        Section::sum(&[self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &Section) -> Result<Section> {
        Section::sum(&[self.clone(), other.scale(-1.0)])
    }

    pub fn scale(&self, c: f64) -> Section {
        Section::make(
            Kind::Scale(c, self.clone()),
            self.group().clone(),
            self.codomain(),
            self.order(),
            self.bandwidth_twice(),
            self.0.equivariance.clone(),
            "scale",
        )
    }

    /// Σ c_i s_i.
    pub fn linear_combination(coeffs: &[f64], terms: &[Section]) -> Result<Section> {
        if coeffs.len() != terms.len() {
            return Err(Error::DimensionMismatch {
                expected: terms.len(),
                got: coeffs.len(),
            });
        }
        let scaled: Vec<Section> = coeffs
            .iter()
            .zip(terms)
            .filter(|(c, _)| **c != 0.0)
            .map(|(c, t)| t.scale(*c))
            .collect();
        if scaled.is_empty() {
            let first = terms.first().ok_or(Error::EmptyFamily)?;
            return Ok(Section::constant(
                first.group(),
                Value::zero(first.codomain(), first.group()),
            ));
        }
        Section::sum(&scaled)
    }

    /// Pointwise product: scalar·anything, Clifford·Clifford, operator·vector,
    /// operator·operator.
    pub fn mul(&self, other: &Section) -> Result<Section> {
        self.same_group(other)?;
        let codomain = product_codomain(self.codomain(), other.codomain())
            .ok_or_else(|| mismatch(format!("no product of {} and {}", self.codomain(), other.codomain())))?;
        let eq = match (self.equivariance(), other.equivariance()) {
            (Some(KAction::Invariant), Some(e)) | (Some(e), Some(KAction::Invariant)) => Some(e.clone()),
            (Some(KAction::Clifford), Some(KAction::Clifford)) => Some(KAction::Clifford),
            _ => None,
        };
        Ok(Section::make(
            Kind::Product(self.clone(), other.clone()),
            self.group().clone(),
            codomain,
            self.order().min(other.order()),
            self.bandwidth_twice() + other.bandwidth_twice(),
            eq,
            "product",
        ))
    }

    /// ⟨s, t⟩_A(x) = ⟨s(x), t(x)⟩; uses ⟨·,·⟩_c on Clifford values.
    pub fn a_inner(&self, other: &Section) -> Result<Section> {
        self.same_group(other)?;
        if self.codomain() != other.codomain() {
            return Err(mismatch(format!(
                "inner product of {} with {}",
                self.codomain(),
                other.codomain()
            )));
        }
        let eq = match (self.equivariance(), other.equivariance()) {
            (Some(a), Some(b)) if same_action(a, b) => Some(KAction::Invariant),
            _ => None,
        };
        Ok(Section::make(
            Kind::Inner(self.clone(), other.clone()),
            self.group().clone(),
            inner_codomain(self.codomain()),
            self.order().min(other.order()),
            self.bandwidth_twice() + other.bandwidth_twice(),
            eq,
            "a-inner",
        ))
    }

    pub fn real_part(&self) -> Result<Section> {
        self.complex_part(true)
    }

    pub fn imag_part(&self) -> Result<Section> {
        self.complex_part(false)
    }

    fn complex_part(&self, re: bool) -> Result<Section> {
        if self.codomain() != Codomain::Complex {
            return Err(mismatch(format!("real/imag part of {}", self.codomain())));
        }
        let kind = if re {
            Kind::RealPart(self.clone())
        } else {
            Kind::ImagPart(self.clone())
        };
        Ok(Section::make(
            kind,
            self.group().clone(),
            Codomain::Real,
            self.order(),
            self.bandwidth_twice(),
            self.0.equivariance.clone(),
            if re { "real-part" } else { "imag-part" },
        ))
    }

    /// Embeds real or 𝔪-valued sections into Clif(𝔪).
    pub fn to_clifford(&self) -> Result<Section> {
        let eq = match (self.codomain(), self.equivariance()) {
            (Codomain::Real, Some(KAction::Invariant)) => Some(KAction::Clifford),
            (Codomain::Tangent, Some(KAction::Adjoint)) => Some(KAction::Clifford),
            (Codomain::Real, _) | (Codomain::Tangent, _) => None,
            (c, _) => return Err(mismatch(format!("cannot embed {c} into Clif(𝔪)"))),
        };
        Ok(Section::make(
            Kind::ToClifford(self.clone()),
            self.group().clone(),
            Codomain::Clifford,
            self.order(),
            self.bandwidth_twice(),
            eq,
            "to-clifford",
        ))
    }

    /// The involution * applied pointwise.
    pub fn star(&self) -> Result<Section> {
        if self.codomain() != Codomain::Clifford {
            return Err(mismatch(format!("star of {}", self.codomain())));
        }
        Ok(Section::make(
            Kind::Star(self.clone()),
            self.group().clone(),
            Codomain::Clifford,
            self.order(),
            self.bandwidth_twice(),
            self.0.equivariance.clone(),
            "star",
        ))
    }

    /// x ↦ ζ(x)η(x)*, i.e. ξ ↦ ζ⟨η, ξ⟩_A.
    pub fn rank_one(zeta: &Section, eta: &Section) -> Result<Section> {
        zeta.same_group(eta)?;
        let n = match (zeta.codomain(), eta.codomain()) {
            (Codomain::Vector(a), Codomain::Vector(b)) if a == b => a,
            (a, b) => return Err(mismatch(format!("rank-one endomorphism from {a} and {b}"))),
        };
        let eq = match (zeta.equivariance(), eta.equivariance()) {
            (Some(KAction::Rep(a)), Some(KAction::Rep(b))) if a.id == b.id => Some(KAction::Conjugation(a.clone())),
            _ => None,
        };
        Ok(Section::make(
            Kind::RankOne(zeta.clone(), eta.clone()),
            zeta.group().clone(),
            Codomain::Operator(n),
            zeta.order().min(eta.order()),
            zeta.bandwidth_twice() + eta.bandwidth_twice(),
            eq,
            "rank-one",
        ))
    }

    /// x ↦ {⟨η_j(x), η_k(x)⟩}_{jk}.
    pub fn gram(frame: &[Section]) -> Result<Section> {
        let first = frame.first().ok_or(Error::EmptyFamily)?;
        for f in frame {
            first.same_group(f)?;
            if f.codomain() != first.codomain() || !matches!(f.codomain(), Codomain::Vector(_)) {
                return Err(mismatch("Gram matrix needs H-valued sections of one space"));
            }
        }
        let bw = 2 * frame.iter().map(|f| f.bandwidth_twice()).max().unwrap_or(0);
        let order = frame.iter().map(|f| f.order()).min().unwrap_or(0);
        let eq = common_equivariance(frame.iter().map(|f| f.equivariance())).map(|_| KAction::Invariant);
        Ok(Section::make(
            Kind::Gram(frame.to_vec()),
            first.group().clone(),
            Codomain::Operator(frame.len()),
            order,
            bw,
            eq,
            "gram",
        ))
    }

    /// λ_y s: x ↦ s(y⁻¹x).
    pub fn translate(&self, y: &GroupElement) -> Section {
        Section::make(
            Kind::Translate {
                inner: self.clone(),
                y_inv: y.inverse(),
            },
            self.group().clone(),
            self.codomain(),
            self.order(),
            self.bandwidth_twice(),
            self.0.equivariance.clone(),
            "translate",
        )
    }

    /// Averages over K: x ↦ ∫_K π_s s(xs) ds, which satisfies
    /// s(xs) = π_s⁻¹ s(x).
    pub fn equivariant_project(&self, action: KAction) -> Result<Section> {
        if !action.compatible(self.codomain()) {
            return Err(mismatch(format!(
                "action {action:?} does not act on {}",
                self.codomain()
            )));
        }
        let group = self.group().clone();
        if matches!(group.subgroup(), crate::lie::Subgroup::Trivial) {
            return self.clone().with_equivariance(action);
        }
        let n = self.bandwidth_twice() as usize + action_weight(&action, &group) + 1;
        let rule = group.k_rule(n);
        let mats = ActionMats::build(&action, &rule);
        Ok(Section::make(
            Kind::Project {
                inner: self.clone(),
                rule,
                mats,
            },
            group,
            self.codomain(),
            self.order(),
            self.bandwidth_twice(),
            Some(action),
            "equivariant-project",
        ))
    }

    /// ∇_W ξ = D₀ᵗ ξ(x·exp(tW(x))) + L_W(x)ξ(x).
    pub fn apply_connection(conn: &Arc<Connection>, w: &Section, xi: &Section) -> Result<Section> {
        w.same_group(xi)?;
        if w.codomain() != Codomain::Tangent {
            return Err(mismatch(format!("direction must be 𝔪-valued, got {}", w.codomain())));
        }
        if xi.order() < 1 {
            return Err(Error::OrderExhausted("apply-connection"));
        }
        conn.check_target(xi.codomain())?;
        Ok(Section::make(
            Kind::Connection {
                conn: conn.clone(),
                w: w.clone(),
                xi: xi.clone(),
            },
            xi.group().clone(),
            xi.codomain(),
            0,
            xi.bandwidth_twice() + w.bandwidth_twice(),
            xi.0.equivariance.clone(),
            "apply-connection",
        ))
    }

    /// Dφ = Σ_j (∇_{W_j}φ)·W_j over the fundamental-field frame W_j = X̂_j.
    pub fn dirac(conn: &Arc<Connection>, frame: &Arc<Frame>, phi: &Section) -> Result<Section> {
        if phi.codomain() != Codomain::Clifford {
            return Err(mismatch(format!(
                "Dirac operator acts on Clif(𝔪), got {}",
                phi.codomain()
            )));
        }
        if phi.order() < 1 {
            return Err(Error::OrderExhausted("dirac"));
        }
        conn.check_target(Codomain::Clifford)?;
        Ok(Section::make(
            Kind::Dirac {
                conn: conn.clone(),
                frame: frame.clone(),
                phi: phi.clone(),
            },
            phi.group().clone(),
            Codomain::Clifford,
            0,
            phi.bandwidth_twice() + 4,
            phi.0.equivariance.clone(),
            "dirac",
        ))
    }

    /// grad f = Σ_j W_j·δ_{W_j} f.
    pub fn gradient(frame: &Arc<Frame>, f: &Section) -> Result<Section> {
        if f.codomain() != Codomain::Real {
            return Err(mismatch(format!("gradient of {}", f.codomain())));
        }
        if f.order() < 1 {
            return Err(Error::OrderExhausted("gradient"));
        }
        let eq = match f.equivariance() {
            Some(KAction::Invariant) => Some(KAction::Adjoint),
            _ => None,
        };
        Ok(Section::make(
            Kind::Gradient {
                frame: frame.clone(),
                f: f.clone(),
            },
            f.group().clone(),
            Codomain::Tangent,
            0,
            f.bandwidth_twice() + 4,
            eq,
            "gradient",
        ))
    }

    /// T_∇(V, W), expanded A-bilinearly over fundamental-field pairs.
    pub fn torsion(conn: &Arc<Connection>, frame: &Arc<Frame>, v: &Section, w: &Section) -> Result<Section> {
        v.same_group(w)?;
        for s in [v, w] {
            if s.codomain() != Codomain::Tangent {
                return Err(mismatch(format!("torsion of {}", s.codomain())));
            }
        }
        conn.check_target(Codomain::Tangent)?;
        let eq = match (v.equivariance(), w.equivariance()) {
            (Some(KAction::Adjoint), Some(KAction::Adjoint)) => Some(KAction::Adjoint),
            _ => None,
        };
        Ok(Section::make(
            Kind::Torsion {
                conn: conn.clone(),
                frame: frame.clone(),
                v: v.clone(),
                w: w.clone(),
            },
            v.group().clone(),
            Codomain::Tangent,
            0,
            v.bandwidth_twice() + w.bandwidth_twice() + 4,
            eq,
            "torsion",
        ))
    }

    // ----- evaluation -----

    pub fn value(&self, x: &GroupElement) -> Value {
        self.value_at(&Point::new(x.clone()))
    }

    pub fn value_at(&self, pt: &Point) -> Value {
        self.0.eval(pt)
    }

    /// D₀ᵗ s(x·exp(tY)).
    pub fn deriv(&self, x: &GroupElement, y: &AlgebraVector) -> Result<Value> {
        self.deriv_at(&Point::new(x.clone()), &y.coords)
    }

    pub fn deriv_at(&self, pt: &Point, y: &DVector<f64>) -> Result<Value> {
        if self.0.order < 1 {
            return Err(Error::OrderExhausted(self.0.label));
        }
        if y.len() != self.0.group.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.0.group.dim(),
                got: y.len(),
            });
        }
        Ok(self.0.deriv(pt, y))
    }
}

fn same_action(a: &KAction, b: &KAction) -> bool {
    match (a, b) {
        (KAction::Invariant, KAction::Invariant)
        | (KAction::AdjointLie, KAction::AdjointLie)
        | (KAction::Adjoint, KAction::Adjoint)
        | (KAction::Clifford, KAction::Clifford) => true,
        (KAction::Rep(x), KAction::Rep(y)) | (KAction::Conjugation(x), KAction::Conjugation(y)) => x.id == y.id,
        _ => false,
    }
}

fn common_equivariance<'a>(mut tags: impl Iterator<Item = Option<&'a KAction>>) -> Option<KAction> {
    let first = tags.next()??.clone();
    for t in tags {
        match t {
            Some(a) if same_action(a, &first) => {}
            _ => return None,
        }
    }
    Some(first)
}

/// Extra K-weight (in units of twice the spin) an action can contribute.
fn action_weight(action: &KAction, group: &GroupModel) -> usize {
    match action {
        KAction::Invariant => 0,
        KAction::AdjointLie | KAction::Adjoint => 2,
        KAction::Clifford => 2 * group.dim_m(),
        KAction::Rep(p) => p.ambient().bandwidth_twice() as usize,
        KAction::Conjugation(p) => 2 * p.ambient().bandwidth_twice() as usize,
    }
}

impl Node {
    fn eval(&self, pt: &Point) -> Value {
        let g = &*self.group;
        match &self.kind {
            Kind::Constant(v) => v.clone(),
            Kind::MatrixCoefficient { rep, u, v } => {
                let rho = pt.rho(rep);
                Value::Complex(u.dotc(&(&*rho * v)))
            }
            Kind::RepVector {
                rep,
                left,
                vec,
                inverse,
            } => {
                let rho = pt.rho(rep);
                let inner = if *inverse { rho.ad_mul(vec) } else { &*rho * vec };
                Value::Vector(left * inner)
            }
            Kind::RepConjugation { rep, proj } => {
                let rho = pt.rho(rep);
                Value::Operator(&*rho * proj * rho.adjoint())
            }
            Kind::AdInverse(x) => Value::Lie(&*pt.ad_inv(g) * x),
            Kind::ProjectM(s) => match s.0.eval(pt) {
                Value::Lie(v) => Value::Tangent(g.to_m(&v)),
                _ => unreachable!(),
            },
            Kind::Sum(terms) => {
                let mut acc = terms[0].0.eval(pt);
                for t in &terms[1..] {
                    acc.axpy(1.0, &t.0.eval(pt));
                }
                acc
            }
            Kind::Scale(c, s) => s.0.eval(pt).scale(*c),
            Kind::Product(a, b) => mul_values(&a.0.eval(pt), &b.0.eval(pt)),
            Kind::Inner(a, b) => inner_values(&a.0.eval(pt), &b.0.eval(pt)),
            Kind::RealPart(s) => Value::Real(s.0.eval(pt).as_complex().unwrap().re),
            Kind::ImagPart(s) => Value::Real(s.0.eval(pt).as_complex().unwrap().im),
            Kind::ToClifford(s) => embed_clifford(g, s.0.eval(pt)),
            Kind::Star(s) => match s.0.eval(pt) {
                Value::Clifford(c) => Value::Clifford(c.star()),
                _ => unreachable!(),
            },
            Kind::RankOne(z, e) => {
                let (zv, ev) = (z.0.eval(pt), e.0.eval(pt));
                Value::Operator(zv.as_vector().unwrap() * ev.as_vector().unwrap().adjoint())
            }
            Kind::Gram(frame) => {
                let vals: Vec<DVector<C64>> = frame
                    .iter()
                    .map(|f| f.0.eval(pt).as_vector().unwrap().clone())
                    .collect();
                gram_of(&vals)
            }
            Kind::Translate { inner, y_inv } => inner.0.eval(&Point::new(y_inv.mul(pt.x()))),
            Kind::Project { inner, rule, mats } => {
                let kids = pt.children(rule);
                let mut acc = Value::zero(self.codomain, g);
                for (k, (child, w)) in kids.iter().zip(&rule.weights).enumerate() {
                    acc.axpy(*w, &mats.apply(k, &inner.0.eval(child)));
                }
                acc
            }
            Kind::Connection { conn, w, xi } => {
                let wm = w.0.eval(pt);
                let wm = wm.as_tangent().unwrap();
                let mut out = xi.0.deriv(pt, &g.from_m(wm));
                out.axpy(1.0, &conn.l_apply(wm, &xi.0.eval(pt)));
                out
            }
            Kind::Dirac { conn, frame, phi } => {
                let ad_inv = pt.ad_inv(g);
                let phi_x = phi.0.eval(pt);
                let mut acc = CliffordElement::zero(g.dim_m());
                for xj in frame.vectors() {
                    let wj = -g.to_m(&(&*ad_inv * xj));
                    let mut nabla = phi.0.deriv(pt, &g.from_m(&wj));
                    nabla.axpy(1.0, &conn.l_apply(&wj, &phi_x));
                    let cw = CliffordElement::from_vector(&wj);
                    acc.axpy(1.0, &nabla.as_clifford().unwrap().mul_unchecked(&cw));
                }
                Value::Clifford(acc)
            }
            Kind::Gradient { frame, f } => {
                let ad_inv = pt.ad_inv(g);
                let mut acc = DVector::zeros(g.dim_m());
                for xj in frame.vectors() {
                    let wj = -g.to_m(&(&*ad_inv * xj));
                    let df = f.0.deriv(pt, &g.from_m(&wj)).as_real().unwrap();
                    acc.axpy(df, &wj, 1.0);
                }
                Value::Tangent(acc)
            }
            Kind::Torsion { conn, frame, v, w } => {
                let vx = v.0.eval(pt);
                let wx = w.0.eval(pt);
                Value::Tangent(torsion_at(
                    g,
                    conn,
                    frame,
                    &pt.ad_inv(g),
                    vx.as_tangent().unwrap(),
                    wx.as_tangent().unwrap(),
                ))
            }
        }
    }

    fn deriv(&self, pt: &Point, y: &DVector<f64>) -> Value {
        let g = &*self.group;
        match &self.kind {
            Kind::Constant(v) => Value::zero_like(v),
            Kind::MatrixCoefficient { rep, u, v } => {
                let rd = pt.rho_d(rep);
                let m = combine_rho_d(&rd, y);
                Value::Complex(u.dotc(&(m * v)))
            }
            Kind::RepVector {
                rep,
                left,
                vec,
                inverse,
            } => {
                if *inverse {
                    // ρ(x·exp(tY))⁻¹ = exp(−t dρ(Y))ρ(x)*
                    let rho = pt.rho(rep);
                    let dy = rep.differential(y);
                    Value::Vector(-(left * (dy * rho.ad_mul(vec))))
                } else {
                    let rd = pt.rho_d(rep);
                    Value::Vector(left * (combine_rho_d(&rd, y) * vec))
                }
            }
            Kind::RepConjugation { rep, proj } => {
                let rho = pt.rho(rep);
                let dy = rep.differential(y);
                let comm = &dy * proj - proj * &dy;
                Value::Operator(&*rho * comm * rho.adjoint())
            }
            Kind::AdInverse(x) => {
                // Ad_{exp(−tY)}Ad_x⁻¹X differentiates to −[Y, Ad_x⁻¹X].
                let a = &*pt.ad_inv(g) * x;
                Value::Lie(-g.bracket_coords(y, &a))
            }
            Kind::ProjectM(s) => match s.0.deriv(pt, y) {
                Value::Lie(v) => Value::Tangent(g.to_m(&v)),
                _ => unreachable!(),
            },
            Kind::Sum(terms) => {
                let mut acc = terms[0].0.deriv(pt, y);
                for t in &terms[1..] {
                    acc.axpy(1.0, &t.0.deriv(pt, y));
                }
                acc
            }
            Kind::Scale(c, s) => s.0.deriv(pt, y).scale(*c),
            Kind::Product(a, b) => {
                let mut out = mul_values(&a.0.deriv(pt, y), &b.0.eval(pt));
                out.axpy(1.0, &mul_values(&a.0.eval(pt), &b.0.deriv(pt, y)));
                out
            }
            Kind::Inner(a, b) => {
                let mut out = inner_values(&a.0.deriv(pt, y), &b.0.eval(pt));
                out.axpy(1.0, &inner_values(&a.0.eval(pt), &b.0.deriv(pt, y)));
                out
            }
            Kind::RealPart(s) => Value::Real(s.0.deriv(pt, y).as_complex().unwrap().re),
            Kind::ImagPart(s) => Value::Real(s.0.deriv(pt, y).as_complex().unwrap().im),
            Kind::ToClifford(s) => embed_clifford(g, s.0.deriv(pt, y)),
            Kind::Star(s) => match s.0.deriv(pt, y) {
                Value::Clifford(c) => Value::Clifford(c.star()),
                _ => unreachable!(),
            },
            Kind::RankOne(z, e) => {
                let (zv, ev) = (z.0.eval(pt), e.0.eval(pt));
                let (zd, ed) = (z.0.deriv(pt, y), e.0.deriv(pt, y));
                let (zv, ev, zd, ed) = (
                    zv.as_vector().unwrap(),
                    ev.as_vector().unwrap(),
                    zd.as_vector().unwrap(),
                    ed.as_vector().unwrap(),
                );
                Value::Operator(zd * ev.adjoint() + zv * ed.adjoint())
            }
            Kind::Gram(frame) => {
                let vals: Vec<DVector<C64>> = frame
                    .iter()
                    .map(|f| f.0.eval(pt).as_vector().unwrap().clone())
                    .collect();
                let ders: Vec<DVector<C64>> = frame
                    .iter()
                    .map(|f| f.0.deriv(pt, y).as_vector().unwrap().clone())
                    .collect();
                let n = vals.len();
                Value::Operator(DMatrix::from_fn(n, n, |j, k| {
                    ders[j].dotc(&vals[k]) + vals[j].dotc(&ders[k])
                }))
            }
            Kind::Translate { inner, y_inv } => inner.0.deriv(&Point::new(y_inv.mul(pt.x())), y),
            Kind::Project { inner, rule, mats } => {
                // x·exp(tY)·s = x·s·exp(t·Ad_{s⁻¹}Y)
                let kids = pt.children(rule);
                let mut acc = Value::zero(self.codomain, g);
                for (k, (child, w)) in kids.iter().zip(&rule.weights).enumerate() {
                    let ys = rule.ad_g[k].tr_mul(y);
                    acc.axpy(*w, &mats.apply(k, &inner.0.deriv(child, &ys)));
                }
                acc
            }
            Kind::Connection { .. } | Kind::Dirac { .. } | Kind::Gradient { .. } | Kind::Torsion { .. } => {
                unreachable!("order-0 nodes are never differentiated")
            }
        }
    }
}

fn embed_clifford(g: &GroupModel, v: Value) -> Value {
    match v {
        Value::Real(c) => Value::Clifford(CliffordElement::scalar(g.dim_m(), c)),
        Value::Tangent(t) => Value::Clifford(CliffordElement::from_vector(&t)),
        _ => unreachable!(),
    }
}

fn gram_of(vals: &[DVector<C64>]) -> Value {
    let n = vals.len();
    Value::Operator(DMatrix::from_fn(n, n, |j, k| vals[j].dotc(&vals[k])))
}

/// T(V, W)(x) = Σ_{jk} v_j w_k T(X̂_j, X̂_k)(x) with v_j = ⟨X̂_j, V⟩_A(x) and
/// T(X̂_j, X̂_k) = ∇_{X̂_j}X̂_k − ∇_{X̂_k}X̂_j − ([X_j, X_k])^.
fn torsion_at(
    g: &GroupModel,
    conn: &Connection,
    frame: &Frame,
    ad_inv: &DMatrix<f64>,
    v: &DVector<f64>,
    w: &DVector<f64>,
) -> DVector<f64> {
    let xs = frame.vectors();
    let fields: Vec<DVector<f64>> = xs.iter().map(|x| -g.to_m(&(ad_inv * x))).collect();
    let vc: Vec<f64> = fields.iter().map(|f| f.dot(v)).collect();
    let wc: Vec<f64> = fields.iter().map(|f| f.dot(w)).collect();
    // ∇_{X̂_a}X̂_b(x) = P[X̂_a(x), Ad_x⁻¹X_b] + L_{X̂_a}(x)X̂_b(x)
    let nabla = |a: usize, b: usize| -> DVector<f64> {
        let dir = g.from_m(&fields[a]);
        let mut out = g.to_m(&g.bracket_coords(&dir, &(ad_inv * &xs[b])));
        if let Value::Tangent(l) = conn.l_apply(&fields[a], &Value::Tangent(fields[b].clone())) {
            out += l;
        }
        out
    };
    let mut acc = DVector::zeros(g.dim_m());
    for a in 0..xs.len() {
        if vc[a] == 0.0 {
            continue;
        }
        for b in 0..xs.len() {
            if wc[b] == 0.0 || a == b {
                continue;
            }
            let br = g.bracket_coords(&xs[a], &xs[b]);
            let hat = -g.to_m(&(ad_inv * br));
            let t = nabla(a, b) - nabla(b, a) - hat;
            acc.axpy(vc[a] * wc[b], &t, 1.0);
        }
    }
    acc
}

/// max over samples of ‖π_s s(xs) − s(x)‖.
pub fn equivariance_residual(section: &Section, action: &KAction, xs: &[GroupElement], ss: &[GroupElement]) -> f64 {
    let g = section.group();
    let mut worst: f64 = 0.0;
    for x in xs {
        let base = section.value(x);
        for s in ss {
            let moved = action.act(g, s, &section.value(&x.mul(s)));
            worst = worst.max(moved.sub(&base).norm());
        }
    }
    worst
}

/// Values of several sections at every node of a rule, in node order.
pub fn tabulate(sections: &[Section], rule: &QuadratureRule) -> Vec<Vec<Value>> {
    rule.nodes
        .par_iter()
        .map(|x| {
            let pt = Point::new(x.clone());
            sections.iter().map(|s| s.value_at(&pt)).collect()
        })
        .collect()
}

fn warn_bandwidth(bw_twice: u32, rule: &QuadratureRule) {
    if rule.is_exact() && bw_twice > 2 * rule.bandwidth {
        log::warn!(
            "integrand band limit {} exceeds quadrature exactness {}",
            bw_twice as f64 / 2.0,
            rule.bandwidth
        );
    }
}

/// ⟨s, t⟩ = ∫ ⟨s, t⟩_A against the rule (real part for complex codomains).
pub fn l2_inner(s: &Section, t: &Section, rule: &QuadratureRule) -> Result<f64> {
    Ok(l2_inner_complex(s, t, rule)?.re)
}

pub fn l2_inner_complex(s: &Section, t: &Section, rule: &QuadratureRule) -> Result<C64> {
    let integrand = s.a_inner(t)?;
    warn_bandwidth(integrand.bandwidth_twice(), rule);
    integrate(&integrand, rule)
}

/// ∫ f against the rule for a real or complex scalar section.
pub fn integrate(f: &Section, rule: &QuadratureRule) -> Result<C64> {
    if !matches!(f.codomain(), Codomain::Real | Codomain::Complex) {
        return Err(mismatch(format!("cannot integrate {}", f.codomain())));
    }
    Ok(rule.integrate_complex(|x| f.value(x).as_complex().unwrap()))
}

/// A real function Re⟨u, ρ(x)v⟩ + c summed over spins 1/2 … twice_bw/2
/// (integer spins only when `integer_only`), with Gaussian coefficients.
pub fn random_function<R: Rng + ?Sized>(
    group: &Arc<GroupModel>,
    twice_bw: u32,
    integer_only: bool,
    rng: &mut R,
) -> Result<Section> {
    let mut normal = || {
        C64::new(
            rng.sample(rand_distr::StandardNormal),
            rng.sample(rand_distr::StandardNormal),
        )
    };
    let mut terms = vec![Section::real(group, normal().re)];
    for t in 1..=twice_bw {
        if integer_only && t % 2 == 1 {
            continue;
        }
        let rep = Representation::spin(group, crate::rep::Spin(t))?;
        let u = DVector::from_fn(rep.dim(), |_, _| normal());
        let v = DVector::from_fn(rep.dim(), |_, _| normal());
        terms.push(Section::matrix_coefficient(&rep, u, v)?.real_part()?);
    }
    Section::sum(&terms)
}
