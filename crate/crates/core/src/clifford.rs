//! Real Clifford algebra Clif(𝔪) with relation X·Y + Y·X = −2⟨X,Y⟩.
//!
//! Elements are coefficient vectors over the subset basis e_S, with S a
//! bitmask over an orthonormal basis e_1..e_p of 𝔪 (bit i ↔ e_{i+1}).
//! The grade-1 embedding of 𝔪 occupies the singleton masks.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Skewness tolerance accepted by [`derivation_extend`].
pub const SKEW_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CliffordElement {
    p: usize,
    coeffs: Vec<f64>,
}

/// Sign of e_A · e_B = sign · e_{A xor B} for e_i² = −1.
pub fn blade_sign(a: usize, b: usize) -> f64 {
    // transpositions needed to sort the concatenated word
    let mut swaps = 0u32;
    let mut x = a >> 1;
    while x != 0 {
        swaps += (x & b).count_ones();
        x >>= 1;
    }
    // each repeated generator contributes e_i² = −1
    swaps += (a & b).count_ones();
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn grade(mask: usize) -> u32 {
    mask.count_ones()
}

impl CliffordElement {
    pub fn zero(p: usize) -> Self {
        Self {
            p,
            coeffs: vec![0.0; 1 << p],
        }
    }

    pub fn one(p: usize) -> Self {
        Self::scalar(p, 1.0)
    }

    pub fn scalar(p: usize, c: f64) -> Self {
        let mut e = Self::zero(p);
        e.coeffs[0] = c;
        e
    }

    /// The basis element e_S.
    pub fn blade(p: usize, mask: usize) -> Self {
        let mut e = Self::zero(p);
        e.coeffs[mask] = 1.0;
        e
    }

    /// Embeds X ∈ 𝔪 (orthonormal 𝔪-coordinates) at grade 1.
    pub fn from_vector(x: &DVector<f64>) -> Self {
        let p = x.len();
        let mut e = Self::zero(p);
        for (i, v) in x.iter().enumerate() {
            e.coeffs[1 << i] = *v;
        }
        e
    }

    pub fn from_coeffs(p: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != 1 << p {
            return Err(Error::DimensionMismatch {
                expected: 1 << p,
                got: coeffs.len(),
            });
        }
        Ok(Self { p, coeffs })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coeffs)
    }

    pub fn from_dvector(p: usize, v: &DVector<f64>) -> Self {
        Self {
            p,
            coeffs: v.iter().copied().collect(),
        }
    }

    /// Grade-1 part as a vector of 𝔪.
    pub fn vector_part(&self) -> DVector<f64> {
        DVector::from_fn(self.p, |i, _| self.coeffs[1 << i])
    }

    /// Projection onto grade k.
    pub fn grade_part(&self, k: u32) -> Self {
        let mut out = self.clone();
        for (mask, c) in out.coeffs.iter_mut().enumerate() {
            if grade(mask) != k {
                *c = 0.0;
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            p: self.p,
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: other.p,
            });
        }
        Ok(())
    }

    /// Clifford product a·b.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.p);
        for (a, ca) in self.coeffs.iter().enumerate() {
            if *ca == 0.0 {
                continue;
            }
            for (b, cb) in other.coeffs.iter().enumerate() {
                if *cb == 0.0 {
                    continue;
                }
                out.coeffs[a ^ b] += blade_sign(a, b) * ca * cb;
            }
        }
        out
    }

    /// Canonical trace τ: the coefficient of 1.
    pub fn trace(&self) -> f64 {
        self.coeffs[0]
    }

    /// The anti-automorphism * with X* = −X: (−1)^{k(k+1)/2} on grade k.
    pub fn star(&self) -> Self {
        let mut out = self.clone();
        for (mask, c) in out.coeffs.iter_mut().enumerate() {
            let k = grade(mask);
            if (k * (k + 1) / 2) % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }

    /// Reversal anti-automorphism.
    pub fn reverse(&self) -> Self {
        let mut out = self.clone();
        for (mask, c) in out.coeffs.iter_mut().enumerate() {
            let k = grade(mask);
            if (k * k.saturating_sub(1) / 2) % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }

    /// Grade involution X ↦ −X.
    pub fn grade_involution(&self) -> Self {
        let mut out = self.clone();
        for (mask, c) in out.coeffs.iter_mut().enumerate() {
            if grade(mask) % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }

    /// ⟨a, b⟩_c = τ(a*·b); the subset basis is orthonormal for it.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub(crate) fn axpy(&mut self, c: f64, other: &Self) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
    }
}

impl Add for &CliffordElement {
    type Output = CliffordElement;
    fn add(self, rhs: &CliffordElement) -> CliffordElement {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &CliffordElement {
    type Output = CliffordElement;
    fn sub(self, rhs: &CliffordElement) -> CliffordElement {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &CliffordElement {
    type Output = CliffordElement;
    fn neg(self) -> CliffordElement {
        self.scale(-1.0)
    }
}

impl Mul for &CliffordElement {
    type Output = CliffordElement;
    fn mul(self, rhs: &CliffordElement) -> CliffordElement {
        assert_eq!(self.p, rhs.p, "Clifford dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

/// A skew operator R on 𝔪 (Rᵀ = −R).
#[derive(Clone, Debug, PartialEq)]
pub struct SkewOperator {
    matrix: DMatrix<f64>,
}

impl SkewOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let asym = (&matrix + matrix.transpose()).norm();
        if asym > SKEW_TOL {
            return Err(Error::NotSkew(asym));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Extends a skew R on 𝔪 to the derivation of Clif(𝔪) agreeing with R on
/// grade 1: e_{i₁}⋯e_{i_k} ↦ Σ_r e_{i₁}⋯(R e_{i_r})⋯e_{i_k}.
pub fn derivation_extend(r: &SkewOperator, a: &CliffordElement) -> Result<CliffordElement> {
    if r.dim() != a.p() {
        return Err(Error::DimensionMismatch {
            expected: a.p(),
            got: r.dim(),
        });
    }
    let m = derivation_matrix(r.matrix());
    Ok(CliffordElement::from_dvector(a.p(), &(m * a.to_dvector())))
}

fn blade_generators(mask: usize, p: usize) -> Vec<usize> {
    (0..p).filter(|i| mask & (1 << i) != 0).collect()
}

/// Matrix of the derivation extending `r` (any p × p matrix, not checked).
pub fn derivation_matrix(r: &DMatrix<f64>) -> DMatrix<f64> {
    let p = r.nrows();
    let n = 1 << p;
    let images: Vec<CliffordElement> = (0..p)
        .map(|i| CliffordElement::from_vector(&r.column(i).into_owned()))
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for mask in 0..n {
        let gens = blade_generators(mask, p);
        let mut total = CliffordElement::zero(p);
        for slot in 0..gens.len() {
            let mut prod = CliffordElement::one(p);
            for (k, &g) in gens.iter().enumerate() {
                let factor = if k == slot {
                    images[g].clone()
                } else {
                    CliffordElement::blade(p, 1 << g)
                };
                prod = prod.mul_unchecked(&factor);
            }
            total.axpy(1.0, &prod);
        }
        out.set_column(mask, &total.to_dvector());
    }
    out
}

/// Matrix of the algebra automorphism extending an orthogonal O on 𝔪:
/// e_{i₁}⋯e_{i_k} ↦ (O e_{i₁})⋯(O e_{i_k}).
pub fn automorphism_matrix(o: &DMatrix<f64>) -> DMatrix<f64> {
    let p = o.nrows();
    let n = 1 << p;
    let images: Vec<CliffordElement> = (0..p)
        .map(|i| CliffordElement::from_vector(&o.column(i).into_owned()))
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for mask in 0..n {
        let mut prod = CliffordElement::one(p);
        for g in blade_generators(mask, p) {
            prod = prod.mul_unchecked(&images[g]);
        }
        out.set_column(mask, &prod.to_dvector());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Matrix of b ↦ a·b (left) or b ↦ b·a (right) in the subset basis.
pub fn regular_rep_matrix(a: &CliffordElement, side: Side) -> DMatrix<f64> {
    let n = a.len();
    let mut out = DMatrix::zeros(n, n);
    for mask in 0..n {
        let b = CliffordElement::blade(a.p(), mask);
        let img = match side {
            Side::Left => a.mul_unchecked(&b),
            Side::Right => b.mul_unchecked(a),
        };
        out.set_column(mask, &img.to_dvector());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: usize, i: usize) -> CliffordElement {
        CliffordElement::blade(p, 1 << i)
    }

    #[test]
    fn generators_square_to_minus_one() {
        let prod = &e(3, 0) * &e(3, 0);
        assert_eq!(prod, CliffordElement::scalar(3, -1.0));
    }

    #[test]
    fn clifford_relation_on_all_pairs() {
        let p = 3;
        for i in 0..p {
            for j in 0..p {
                let s = &(&e(p, i) * &e(p, j)) + &(&e(p, j) * &e(p, i));
                let delta = if i == j { -2.0 } else { 0.0 };
                assert_eq!(s, CliffordElement::scalar(p, delta));
            }
        }
    }

    #[test]
    fn bivector_squares_to_minus_one() {
        let b = &e(2, 0) * &e(2, 1);
        assert_eq!(&b * &b, CliffordElement::scalar(2, -1.0));
    }

    #[test]
    fn unit_is_neutral() {
        let a = CliffordElement::from_coeffs(2, vec![0.3, -1.0, 2.0, 0.5]).unwrap();
        assert_eq!(&CliffordElement::one(2) * &a, a);
        assert_eq!(&a * &CliffordElement::one(2), a);
    }

    #[test]
    fn trace_values() {
        assert_eq!(CliffordElement::one(2).trace(), 1.0);
        assert_eq!((&e(2, 0) * &e(2, 1)).trace(), 0.0);
        let x = CliffordElement::from_vector(&DVector::from_vec(vec![1.0, 2.0, -1.0]));
        let y = CliffordElement::from_vector(&DVector::from_vec(vec![0.5, -1.0, 3.0]));
        let dot = 0.5 - 2.0 - 3.0;
        assert!(((&x * &y).trace() + dot).abs() < 1e-15);
    }

    #[test]
    fn star_values() {
        let x = e(2, 1);
        assert_eq!(x.star(), -&x);
        assert_eq!(CliffordElement::one(2).star(), CliffordElement::one(2));
        let b = &e(2, 0) * &e(2, 1);
        assert_eq!(b.star(), -&b);
        // composition of reversal and grade involution
        let a = CliffordElement::from_coeffs(3, (0..8).map(|k| k as f64 - 2.5).collect()).unwrap();
        assert_eq!(a.star(), a.reverse().grade_involution());
    }

    #[test]
    fn subset_basis_is_orthonormal() {
        let p = 3;
        for s in 0..8 {
            for t in 0..8 {
                let ip = CliffordElement::blade(p, s)
                    .inner(&CliffordElement::blade(p, t))
                    .unwrap();
                // τ(e_S*·e_T) computed from the definition
                let direct = (&CliffordElement::blade(p, s).star() * &CliffordElement::blade(p, t)).trace();
                assert_eq!(ip, direct);
                assert_eq!(ip, if s == t { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn derivation_on_unit_vector_and_bivector() {
        let r = SkewOperator::new(DMatrix::from_row_slice(
            3,
            3,
            &[0.0, -1.0, 0.5, 1.0, 0.0, -2.0, -0.5, 2.0, 0.0],
        ))
        .unwrap();
        let one = CliffordElement::one(3);
        assert_eq!(derivation_extend(&r, &one).unwrap(), CliffordElement::zero(3));
        let x = DVector::from_vec(vec![0.2, -1.0, 0.7]);
        let dx = derivation_extend(&r, &CliffordElement::from_vector(&x)).unwrap();
        assert!((dx.vector_part() - r.matrix() * &x).norm() < 1e-15);
        let e12 = &e(3, 0) * &e(3, 1);
        let lhs = derivation_extend(&r, &e12).unwrap();
        let re1 = CliffordElement::from_vector(&r.matrix().column(0).into_owned());
        let re2 = CliffordElement::from_vector(&r.matrix().column(1).into_owned());
        let rhs = &(&re1 * &e(3, 1)) + &(&e(3, 0) * &re2);
        assert!((&lhs - &rhs).norm() < 1e-15);
    }

    #[test]
    fn non_skew_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(SkewOperator::new(m), Err(Error::NotSkew(_))));
    }

    #[test]
    fn regular_rep_of_unit_and_vectors() {
        let one = CliffordElement::one(2);
        assert_eq!(regular_rep_matrix(&one, Side::Left), DMatrix::identity(4, 4));
        let x = CliffordElement::from_vector(&DVector::from_vec(vec![0.3, -0.8]));
        for side in [Side::Left, Side::Right] {
            let m = regular_rep_matrix(&x, side);
            assert!((&m + m.transpose()).norm() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch() {
        assert!(CliffordElement::one(2).mul(&CliffordElement::one(3)).is_err());
    }
}
