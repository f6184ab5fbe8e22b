//! Compact matrix Lie groups: the algebra 𝔤 with an Ad-invariant inner
//! product, the splitting 𝔤 = 𝔨 ⊕ 𝔪, the exponential map, Ad and ad.
//!
//! Algebra elements are carried as coordinate vectors in an orthonormal
//! basis of 𝔤, so the inner product is the Euclidean dot product on
//! coordinates and Ad_x is an orthogonal matrix.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Pivot tolerance for Gram–Schmidt on a user basis.
pub const PIVOT_TOL: f64 = 1e-10;
/// Residual above which an expansion in the algebra basis is rejected.
pub const EXPANSION_TOL: f64 = 1e-10;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// A unitary (or orthogonal) matrix in the defining representation.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    matrix: DMatrix<C64>,
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    /// Wraps a matrix after checking ‖M M* − I‖ ≤ 1e−10.
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let g = Self { matrix };
        let defect = g.unitarity_defect();
        if defect > 1e-10 {
            return Err(Error::NotUnitary(defect));
        }
        Ok(g)
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// Frobenius norm of M M* − I.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        (&self.matrix * self.matrix.adjoint() - DMatrix::<C64>::identity(n, n)).norm()
    }
}

/// Which part of 𝔤 = 𝔨 ⊕ 𝔪 a vector is declared to live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraPart {
    Whole,
    M,
    K,
}

/// Coordinates of an element of 𝔤 in the orthonormal algebra basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraVector {
    pub coords: DVector<f64>,
    pub part: AlgebraPart,
}

impl AlgebraVector {
    pub fn new(coords: DVector<f64>) -> Self {
        Self {
            coords,
            part: AlgebraPart::Whole,
        }
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut coords = DVector::zeros(d);
        coords[i] = 1.0;
        Self::new(coords)
    }

    pub fn zeros(d: usize) -> Self {
        Self::new(DVector::zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            coords: &self.coords * c,
            part: self.part,
        }
    }
}

impl fmt::Display for AlgebraVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| format!("{c:.6}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// The closed subgroup K. Only K = {e} and one-parameter circles are
/// supported, which is what the quadrature over K needs.
#[derive(Clone, Debug)]
pub enum Subgroup {
    Trivial,
    /// K = {exp(t·X) : t ∈ [0, period)} for a unit vector X ∈ 𝔨.
    Circle {
        generator: DVector<f64>,
        period: f64,
    },
}

/// What is known about G beyond its algebra; drives Haar sampling and
/// the representation catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// SU(2) in its 2×2 defining representation.
    Su2,
    SpecialUnitary(usize),
    Unitary(usize),
    SpecialOrthogonal(usize),
    Other,
}

/// Quadrature over K: nodes s_k with weights, plus Ad_{s_k} restricted to 𝔪.
#[derive(Debug)]
pub struct KRule {
    pub(crate) id: u64,
    pub nodes: Vec<GroupElement>,
    pub weights: Vec<f64>,
    /// Ad_{s_k} on 𝔪 in the orthonormal 𝔪-basis.
    pub ad_m: Vec<DMatrix<f64>>,
    /// Ad_{s_k} on 𝔤 in the orthonormal 𝔤-basis.
    pub ad_g: Vec<DMatrix<f64>>,
}

impl KRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// A compact matrix Lie group G with subgroup K.
pub struct GroupModel {
    name: String,
    kind: GroupKind,
    matrix_dim: usize,
    /// Orthonormal basis of 𝔤 (skew-Hermitian matrices).
    basis: Vec<DMatrix<C64>>,
    /// ⟨A, B⟩ = −form_scale · Re tr(AB).
    form_scale: f64,
    inner_product_scale: f64,
    /// Columns: orthonormal basis of 𝔪 in 𝔤-coordinates (d × p).
    m_basis: DMatrix<f64>,
    /// Columns: orthonormal basis of 𝔨 in 𝔤-coordinates (d × (d − p)).
    k_basis: DMatrix<f64>,
    /// ad_i with (ad_i)_{kj} = ⟨X_k, [X_i, X_j]⟩.
    structure: Vec<DMatrix<f64>>,
    subgroup: Subgroup,
    k_rules: Mutex<HashMap<usize, Arc<KRule>>>,
}

impl fmt::Debug for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupModel")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("dim", &self.dim())
            .field("dim_m", &self.dim_m())
            .finish()
    }
}

/// Pauli matrices σ₁, σ₂, σ₃.
pub fn pauli() -> [DMatrix<C64>; 3] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// The su(2) basis X_j = −(i/2)σ_j.
pub fn su2_basis() -> Vec<DMatrix<C64>> {
    pauli().into_iter().map(|s| s * C64::new(0.0, -0.5)).collect()
}

fn trace_form(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    // Re tr(AB) without forming the product.
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Specification of a group for [`GroupModel::build`].
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub name: String,
    pub basis: Vec<DMatrix<C64>>,
    /// Indices into `basis` spanning 𝔨.
    pub subgroup: Vec<usize>,
    /// Period T with exp(T·X) = e for the declared 𝔨 generator (1-dim 𝔨 only).
    pub subgroup_period: Option<f64>,
    pub inner_product_scale: f64,
}

impl GroupModel {
    /// Catalog lookup: "su2" (K = U(1), G/K ≅ S²) or "su2-trivial-k" (K = {e}).
    pub fn catalog(name: &str, inner_product_scale: f64) -> Result<Arc<GroupModel>> {
        let (subgroup, period) = match name {
            "su2" | "su2-u1" => (vec![2], Some(4.0 * std::f64::consts::PI)),
            "su2-trivial-k" => (vec![], None),
            other => return Err(Error::UnsupportedGroup(other.to_string())),
        };
        Self::build(GroupSpec {
            name: name.to_string(),
            basis: su2_basis(),
            subgroup,
            subgroup_period: period,
            inner_product_scale,
        })
    }

    /// Builds a model from basis matrices. The inner product is
    /// −c·tr(XY) with c fixed by the first basis vector, times the scale.
    pub fn build(spec: GroupSpec) -> Result<Arc<GroupModel>> {
        let GroupSpec {
            name,
            basis: raw,
            subgroup,
            subgroup_period,
            inner_product_scale,
        } = spec;
        if raw.is_empty() {
            return Err(Error::Config("empty algebra basis".into()));
        }
        if inner_product_scale.is_nan() || inner_product_scale <= 0.0 {
            return Err(Error::Config("inner_product_scale must be positive".into()));
        }
        let n = raw[0].nrows();
        for m in &raw {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.nrows().max(m.ncols()),
                });
            }
            let skew = (m + m.adjoint()).norm();
            if skew > 1e-10 {
                return Err(Error::NotSkew(skew));
            }
        }
        let first = -trace_form(&raw[0], &raw[0]);
        if first <= PIVOT_TOL {
            return Err(Error::Config("first basis matrix has zero norm".into()));
        }
        let form_scale = inner_product_scale / first;
        let form = |a: &DMatrix<C64>, b: &DMatrix<C64>| -form_scale * trace_form(a, b);

        // Gram–Schmidt in declared order.
        let mut basis: Vec<DMatrix<C64>> = Vec::with_capacity(raw.len());
        for m in &raw {
            let mut v = m.clone();
            for b in &basis {
                let c = form(b, &v);
                v -= b * C64::new(c, 0.0);
            }
            let nrm = form(&v, &v).max(0.0).sqrt();
            if nrm < PIVOT_TOL {
                return Err(Error::Config("algebra basis is linearly dependent".into()));
            }
            basis.push(v / C64::new(nrm, 0.0));
        }
        let d = basis.len();
        let coords_of =
            |m: &DMatrix<C64>| -> DVector<f64> { DVector::from_iterator(d, basis.iter().map(|b| form(b, m))) };

        // 𝔨 from declared indices, 𝔪 its orthogonal complement.
        for &i in &subgroup {
            if i >= d {
                return Err(Error::Config(format!("subgroup index {i} out of range")));
            }
        }
        let mut k_cols: Vec<DVector<f64>> = Vec::new();
        for &i in &subgroup {
            let mut v = coords_of(&raw[i]);
            for b in &k_cols {
                let c = b.dot(&v);
                v -= b * c;
            }
            let nrm = v.norm();
            if nrm < PIVOT_TOL {
                return Err(Error::Config("subgroup basis is linearly dependent".into()));
            }
            k_cols.push(v / nrm);
        }
        let mut m_cols: Vec<DVector<f64>> = Vec::new();
        for i in 0..d {
            let mut v = DVector::zeros(d);
            v[i] = 1.0;
            for b in k_cols.iter().chain(m_cols.iter()) {
                let c = b.dot(&v);
                v -= b * c;
            }
            let nrm = v.norm();
            if nrm > 1e-8 {
                m_cols.push(v / nrm);
            }
        }
        let m_basis = if m_cols.is_empty() {
            DMatrix::zeros(d, 0)
        } else {
            DMatrix::from_columns(&m_cols)
        };
        let k_basis = if k_cols.is_empty() {
            DMatrix::zeros(d, 0)
        } else {
            DMatrix::from_columns(&k_cols)
        };

        // Structure constants, with a closure check on every bracket.
        let mut structure = Vec::with_capacity(d);
        for i in 0..d {
            let mut ad = DMatrix::zeros(d, d);
            for j in 0..d {
                let br = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                let c = coords_of(&br);
                let mut recon = DMatrix::<C64>::zeros(n, n);
                for (k, b) in basis.iter().enumerate() {
                    recon += b * C64::new(c[k], 0.0);
                }
                let res = (recon - &br).norm();
                if res > EXPANSION_TOL * (1.0 + br.norm()) {
                    return Err(Error::BasisClosure(res));
                }
                ad.set_column(j, &c);
            }
            structure.push(ad);
        }

        let sub = match k_cols.len() {
            0 => Subgroup::Trivial,
            1 => {
                let period = subgroup_period
                    .ok_or_else(|| Error::Config("a one-dimensional subgroup needs subgroup_period".into()))?;
                // The declared generator X_decl has period T; the unit generator
                // X = X_decl/|X_decl| has period T·|X_decl|.
                let decl = coords_of(&raw[subgroup[0]]);
                let len = decl.norm();
                Subgroup::Circle {
                    generator: decl / len,
                    period: period * len,
                }
            }
            _ => {
                return Err(Error::UnsupportedGroup(
                    "subgroups of dimension > 1 have no quadrature".into(),
                ))
            }
        };

        let real_field = basis.iter().all(|b| b.iter().all(|z| z.im.abs() < 1e-14));
        let kind = if n == 2 && d == 3 && !real_field {
            GroupKind::Su2
        } else if !real_field && d == n * n {
            GroupKind::Unitary(n)
        } else if !real_field && d + 1 == n * n {
            GroupKind::SpecialUnitary(n)
        } else if real_field && 2 * d == n * (n - 1) {
            GroupKind::SpecialOrthogonal(n)
        } else {
            GroupKind::Other
        };

        let model = GroupModel {
            name,
            kind,
            matrix_dim: n,
            basis,
            form_scale,
            inner_product_scale,
            m_basis,
            k_basis,
            structure,
            subgroup: sub,
            k_rules: Mutex::new(HashMap::new()),
        };
        let closure = model.k_closure_residual();
        if closure > 1e-10 {
            return Err(Error::Config(format!(
                "declared subgroup algebra is not closed under the bracket (residual {closure:.3e})"
            )));
        }
        Ok(Arc::new(model))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrix_dim
    }

    /// dim 𝔤.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// dim 𝔪.
    pub fn dim_m(&self) -> usize {
        self.m_basis.ncols()
    }

    pub fn inner_product_scale(&self) -> f64 {
        self.inner_product_scale
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn basis_matrix(&self, i: usize) -> &DMatrix<C64> {
        &self.basis[i]
    }

    pub fn basis_matrices(&self) -> &[DMatrix<C64>] {
        &self.basis
    }

    /// d × p matrix whose columns are the 𝔪-basis in 𝔤-coordinates.
    pub fn m_basis(&self) -> &DMatrix<f64> {
        &self.m_basis
    }

    pub fn k_basis(&self) -> &DMatrix<f64> {
        &self.k_basis
    }

    /// Gram matrix of the inner product in the stored basis (identity).
    pub fn gram(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.matrix_inner(&self.basis[i], &self.basis[j]))
    }

    /// ⟨A, B⟩ on matrices of 𝔤.
    pub fn matrix_inner(&self, a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        -self.form_scale * trace_form(a, b)
    }

    /// Σ c_i X_i.
    pub fn to_matrix(&self, coords: &DVector<f64>) -> DMatrix<C64> {
        let n = self.matrix_dim;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for (c, b) in coords.iter().zip(&self.basis) {
            if *c != 0.0 {
                m += b * C64::new(*c, 0.0);
            }
        }
        m
    }

    /// Coordinates of a matrix of 𝔤; fails if the matrix is not in the span.
    pub fn expand(&self, m: &DMatrix<C64>) -> Result<DVector<f64>> {
        let c = self.coords_unchecked(m);
        let res = (self.to_matrix(&c) - m).norm();
        if res > EXPANSION_TOL * (1.0 + m.norm()) {
            return Err(Error::BasisClosure(res));
        }
        Ok(c)
    }

    pub(crate) fn coords_unchecked(&self, m: &DMatrix<C64>) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.basis.iter().map(|b| self.matrix_inner(b, m)))
    }

    pub fn inner(&self, a: &AlgebraVector, b: &AlgebraVector) -> f64 {
        a.coords.dot(&b.coords)
    }

    /// exp(tX) in the defining representation.
    pub fn exp_map(&self, x: &AlgebraVector, t: f64) -> GroupElement {
        self.exp_coords(&x.coords, t)
    }

    pub(crate) fn exp_coords(&self, coords: &DVector<f64>, t: f64) -> GroupElement {
        let m = self.to_matrix(coords) * C64::new(t, 0.0);
        GroupElement::from_matrix_unchecked(expm_skew(&m))
    }

    /// Ad_x(X) = x X x⁻¹, expanded in the orthonormal basis.
    pub fn adjoint(&self, x: &GroupElement, v: &AlgebraVector) -> Result<AlgebraVector> {
        let m = x.matrix() * self.to_matrix(&v.coords) * x.matrix().adjoint();
        let coords = self.expand(&m)?;
        Ok(AlgebraVector {
            coords,
            part: AlgebraPart::Whole,
        })
    }

    /// Matrix of Ad_x on 𝔤 in the orthonormal basis (orthogonal).
    pub fn ad_matrix(&self, x: &GroupElement) -> DMatrix<f64> {
        let d = self.dim();
        let xm = x.matrix();
        let xi = xm.adjoint();
        let mut out = DMatrix::zeros(d, d);
        for j in 0..d {
            let img = xm * &self.basis[j] * &xi;
            out.set_column(j, &self.coords_unchecked(&img));
        }
        out
    }

    /// [X, Y] via the structure constants.
    pub fn bracket(&self, x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
        AlgebraVector::new(self.bracket_coords(&x.coords, &y.coords))
    }

    pub fn bracket_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.ad_of(x) * y
    }

    /// Matrix of ad_X on 𝔤.
    pub fn ad_of(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for (i, c) in x.iter().enumerate() {
            if *c != 0.0 {
                m += &self.structure[i] * *c;
            }
        }
        m
    }

    /// [X, Y] computed from matrices, for cross-checking structure constants.
    pub fn bracket_via_matrices(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        let a = self.to_matrix(&x.coords);
        let b = self.to_matrix(&y.coords);
        Ok(AlgebraVector::new(self.expand(&(&a * &b - &b * &a))?))
    }

    /// P: orthogonal projection of 𝔤 onto 𝔪 (result in 𝔤-coordinates).
    pub fn project_m(&self, x: &AlgebraVector) -> AlgebraVector {
        AlgebraVector {
            coords: self.project_m_coords(&x.coords),
            part: AlgebraPart::M,
        }
    }

    pub fn project_m_coords(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.m_basis * (self.m_basis.transpose() * x)
    }

    /// Q = I − P.
    pub fn project_k(&self, x: &AlgebraVector) -> AlgebraVector {
        AlgebraVector {
            coords: &self.k_basis * (self.k_basis.transpose() * &x.coords),
            part: AlgebraPart::K,
        }
    }

    /// 𝔤-coordinates → 𝔪-coordinates (P followed by the basis change).
    pub fn to_m(&self, x: &DVector<f64>) -> DVector<f64> {
        self.m_basis.transpose() * x
    }

    /// 𝔪-coordinates → 𝔤-coordinates.
    pub fn from_m(&self, m: &DVector<f64>) -> DVector<f64> {
        &self.m_basis * m
    }

    /// max ‖P[Z₁, Z₂]‖ over 𝔨-basis pairs.
    pub fn k_closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.k_basis.ncols() {
            for b in 0..self.k_basis.ncols() {
                let br = self.bracket_coords(
                    &self.k_basis.column(a).into_owned(),
                    &self.k_basis.column(b).into_owned(),
                );
                worst = worst.max(self.project_m_coords(&br).norm());
            }
        }
        worst
    }

    /// Ad_x restricted to 𝔪 (p × p), valid for x ∈ K.
    pub fn ad_m_matrix(&self, x: &GroupElement) -> DMatrix<f64> {
        self.m_basis.transpose() * self.ad_matrix(x) * &self.m_basis
    }

    /// Uniform quadrature with `n` nodes over K (a single node when K = {e}).
    pub fn k_rule(&self, n: usize) -> Arc<KRule> {
        let n = match self.subgroup {
            Subgroup::Trivial => 1,
            Subgroup::Circle { .. } => n.max(1),
        };
        let mut cache = self.k_rules.lock().expect("k-rule cache poisoned");
        if let Some(rule) = cache.get(&n) {
            return rule.clone();
        }
        let nodes: Vec<GroupElement> = match &self.subgroup {
            Subgroup::Trivial => vec![GroupElement::identity(self.matrix_dim)],
            Subgroup::Circle { generator, period } => (0..n)
                .map(|k| self.exp_coords(generator, period * k as f64 / n as f64))
                .collect(),
        };
        let ad_g: Vec<DMatrix<f64>> = nodes.iter().map(|s| self.ad_matrix(s)).collect();
        let ad_m = ad_g
            .iter()
            .map(|a| self.m_basis.transpose() * a * &self.m_basis)
            .collect();
        let rule = Arc::new(KRule {
            id: fresh_id(),
            weights: vec![1.0 / nodes.len() as f64; nodes.len()],
            nodes,
            ad_m,
            ad_g,
        });
        cache.insert(n, rule.clone());
        rule
    }

    /// A K-sample drawn uniformly (Haar on K).
    pub fn sample_k<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        match &self.subgroup {
            Subgroup::Trivial => GroupElement::identity(self.matrix_dim),
            Subgroup::Circle { generator, period } => {
                let t: f64 = rng.gen::<f64>() * period;
                self.exp_coords(generator, t)
            }
        }
    }

    /// Haar-distributed element via QR of a Gaussian matrix with phase
    /// normalization.
    pub fn sample_haar<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GroupElement> {
        let n = self.matrix_dim;
        match self.kind {
            GroupKind::Su2 | GroupKind::SpecialUnitary(_) | GroupKind::Unitary(_) => {
                let z = DMatrix::<C64>::from_fn(n, n, |_, _| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    C64::new(re, im)
                });
                let qr = z.qr();
                let (mut q, r) = (qr.q(), qr.r());
                for j in 0..n {
                    let d = r[(j, j)];
                    let phase = if d.norm() > 0.0 {
                        d / d.norm()
                    } else {
                        C64::new(1.0, 0.0)
                    };
                    let mut col = q.column_mut(j);
                    col *= phase;
                }
                if self.kind != GroupKind::Unitary(n) {
                    let det = q.determinant();
                    let root = det.powf(1.0 / n as f64);
                    q /= root;
                }
                Ok(GroupElement::from_matrix_unchecked(q))
            }
            GroupKind::SpecialOrthogonal(_) => {
                let z = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
                let qr = z.qr();
                let (mut q, r) = (qr.q(), qr.r());
                for j in 0..n {
                    if r[(j, j)] < 0.0 {
                        let mut col = q.column_mut(j);
                        col *= -1.0;
                    }
                }
                if q.determinant() < 0.0 {
                    let mut col = q.column_mut(0);
                    col *= -1.0;
                }
                Ok(GroupElement::from_matrix_unchecked(q.map(|v| C64::new(v, 0.0))))
            }
            GroupKind::Other => Err(Error::UnsupportedGroup(format!("no Haar sampler for {}", self.name))),
        }
    }

    /// Random algebra vector with standard Gaussian coordinates.
    pub fn sample_algebra<R: Rng + ?Sized>(&self, rng: &mut R) -> AlgebraVector {
        AlgebraVector::new(DVector::from_fn(self.dim(), |_, _| rng.sample(StandardNormal)))
    }

    /// Gaussian vector of 𝔪 (in 𝔤-coordinates).
    pub fn sample_m<R: Rng + ?Sized>(&self, rng: &mut R) -> AlgebraVector {
        let v = self.sample_algebra(rng);
        self.project_m(&v)
    }
}

/// exp of a skew-Hermitian matrix through the Hermitian eigendecomposition
/// of iA: exp(A) = V diag(e^{−iλ}) V*.
pub fn expm_skew(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let h = a * C64::new(0.0, 1.0);
    // symmetrize against rounding so the solver sees an exactly Hermitian input
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut d = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = C64::new(0.0, -eig.eigenvalues[i]).exp();
    }
    v * d * v.adjoint()
}
