//! Finite-dimensional unitary representations of G.
//!
//! Spin-j irreps of SU(2) act on homogeneous polynomials of degree 2j in
//! (z₁, z₂) through (ρ(U)f)(z) = f(Uᵀz). The orthonormal basis is
//! φ_i = z₁^{2j−i} z₂^{i} / √((2j−i)! i!), i = 0..2j, carrying weight
//! m = j − i: ρ(exp(tX₃))φ_i = e^{−imt}φ_i for X₃ = −(i/2)σ₃.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{fresh_id, GroupElement, GroupKind, GroupModel, C64};

/// A spin label stored as 2j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spin(pub u32);

impl Spin {
    pub fn from_f64(j: f64) -> Option<Spin> {
        let t = (2.0 * j).round();
        if t < 0.0 || (2.0 * j - t).abs() > 1e-9 {
            return None;
        }
        Some(Spin(t as u32))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    pub fn is_integer(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// Casimir eigenvalue j(j+1).
    pub fn casimir(self) -> f64 {
        let j = self.value();
        j * (j + 1.0)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepKind {
    Spin(Spin),
    Defining,
    Adjoint,
    Trivial,
}

/// ρ: G → U(n), with generator images dρ(X_i) for the orthonormal basis.
pub struct Representation {
    pub(crate) id: u64,
    kind: RepKind,
    dim: usize,
    group: Arc<GroupModel>,
    generators: Vec<DMatrix<C64>>,
}

impl fmt::Debug for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Representation")
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .finish()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Spin-j matrix of a 2×2 matrix U under the polynomial model.
pub fn spin_matrix(spin: Spin, u: &DMatrix<C64>) -> DMatrix<C64> {
    let n2j = spin.twice() as usize;
    let dim = n2j + 1;
    let (a, b, c, d) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let norm: Vec<f64> = (0..dim).map(|i| (factorial(n2j - i) * factorial(i)).sqrt()).collect();
    let pow = |z: C64, k: usize| -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for _ in 0..k {
            acc *= z;
        }
        acc
    };
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for col in 0..dim {
        let p = n2j - col;
        let q = col;
        // (a z₁ + c z₂)^p (b z₁ + d z₂)^q
        for r in 0..=p {
            let left = pow(a, r) * pow(c, p - r) * binomial(p, r);
            for s in 0..=q {
                let right = pow(b, s) * pow(d, q - s) * binomial(q, s);
                let p_out = r + s;
                let row = n2j - p_out;
                out[(row, col)] += left * right * (norm[row] / norm[col]);
            }
        }
    }
    out
}

/// dρ(X) for the spin-j polynomial model, X a 2×2 matrix.
pub fn spin_differential(spin: Spin, x: &DMatrix<C64>) -> DMatrix<C64> {
    let n2j = spin.twice() as usize;
    let dim = n2j + 1;
    let norm: Vec<f64> = (0..dim).map(|i| (factorial(n2j - i) * factorial(i)).sqrt()).collect();
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for col in 0..dim {
        let p = n2j - col;
        let q = col;
        let pf = p as f64;
        let qf = q as f64;
        // p X₀₀ + q X₁₁ on the diagonal
        out[(col, col)] += x[(0, 0)] * pf + x[(1, 1)] * qf;
        if p > 0 {
            // p X₁₀ z₁^{p−1} z₂^{q+1}
            let row = col + 1;
            out[(row, col)] += x[(1, 0)] * pf * (norm[row] / norm[col]);
        }
        if q > 0 {
            // q X₀₁ z₁^{p+1} z₂^{q−1}
            let row = col - 1;
            out[(row, col)] += x[(0, 1)] * qf * (norm[row] / norm[col]);
        }
    }
    out
}

impl Representation {
    /// Spin-j irrep; requires G = SU(2) in its defining representation.
    pub fn spin(group: &Arc<GroupModel>, spin: Spin) -> Result<Arc<Representation>> {
        if group.kind() != GroupKind::Su2 {
            return Err(Error::UnsupportedGroup(format!(
                "spin representations need SU(2), got {}",
                group.name()
            )));
        }
        let generators = group
            .basis_matrices()
            .iter()
            .map(|x| spin_differential(spin, x))
            .collect();
        Ok(Arc::new(Representation {
            id: fresh_id(),
            kind: RepKind::Spin(spin),
            dim: spin.dim(),
            group: group.clone(),
            generators,
        }))
    }

    pub fn defining(group: &Arc<GroupModel>) -> Arc<Representation> {
        Arc::new(Representation {
            id: fresh_id(),
            kind: RepKind::Defining,
            dim: group.matrix_dim(),
            group: group.clone(),
            generators: group.basis_matrices().to_vec(),
        })
    }

    /// Ad on 𝔤 (complexified), in the orthonormal basis.
    pub fn adjoint(group: &Arc<GroupModel>) -> Arc<Representation> {
        let d = group.dim();
        let generators = (0..d)
            .map(|i| {
                let mut e = DVector::zeros(d);
                e[i] = 1.0;
                group.ad_of(&e).map(|v| C64::new(v, 0.0))
            })
            .collect();
        Arc::new(Representation {
            id: fresh_id(),
            kind: RepKind::Adjoint,
            dim: d,
            group: group.clone(),
            generators,
        })
    }

    pub fn trivial(group: &Arc<GroupModel>) -> Arc<Representation> {
        Arc::new(Representation {
            id: fresh_id(),
            kind: RepKind::Trivial,
            dim: 1,
            group: group.clone(),
            generators: vec![DMatrix::zeros(1, 1); group.dim()],
        })
    }

    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn group(&self) -> &Arc<GroupModel> {
        &self.group
    }

    /// ρ(x).
    pub fn matrix(&self, x: &GroupElement) -> DMatrix<C64> {
        match self.kind {
            RepKind::Spin(s) => spin_matrix(s, x.matrix()),
            RepKind::Defining => x.matrix().clone(),
            RepKind::Adjoint => self.group.ad_matrix(x).map(|v| C64::new(v, 0.0)),
            RepKind::Trivial => DMatrix::from_element(1, 1, C64::new(1.0, 0.0)),
        }
    }

    /// dρ(X_i) for the i-th orthonormal basis vector.
    pub fn generator(&self, i: usize) -> &DMatrix<C64> {
        &self.generators[i]
    }

    /// dρ(Y) = Σ y_i dρ(X_i).
    pub fn differential(&self, y: &DVector<f64>) -> DMatrix<C64> {
        let mut out = DMatrix::<C64>::zeros(self.dim, self.dim);
        for (c, g) in y.iter().zip(&self.generators) {
            if *c != 0.0 {
                out += g * C64::new(*c, 0.0);
            }
        }
        out
    }

    /// Conservative band limit of matrix coefficients, in units of 2j.
    pub fn bandwidth_twice(&self) -> u32 {
        match self.kind {
            RepKind::Spin(s) => s.twice(),
            RepKind::Defining => 1,
            RepKind::Adjoint => 2,
            RepKind::Trivial => 0,
        }
    }

    /// Index of the weight-m basis vector (m = j − i) of a spin rep.
    pub fn weight_index(&self, twice_m: i32) -> Option<usize> {
        match self.kind {
            RepKind::Spin(s) => {
                let tj = s.twice() as i32;
                if twice_m.abs() > tj || (tj - twice_m) % 2 != 0 {
                    return None;
                }
                Some(((tj - twice_m) / 2) as usize)
            }
            _ => None,
        }
    }
}

/// The charge-conjugation matrix J with J·conj(ρ(x))·J* = ρ(x) for spin j:
/// J_{i, 2j−i} = (−1)^i.
pub fn spin_conjugation(spin: Spin) -> DMatrix<C64> {
    let dim = spin.dim();
    let mut j = DMatrix::<C64>::zeros(dim, dim);
    for i in 0..dim {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        j[(i, dim - 1 - i)] = C64::new(sign, 0.0);
    }
    j
}

/// A unitary representation π of K obtained by restricting a G-representation
/// ρ̃ to a K-invariant subspace H ⊆ H̃: π_s = B*ρ̃(s)B, with B: H → H̃ an isometry.
pub struct KRepresentation {
    pub(crate) id: u64,
    rep: Arc<Representation>,
    iso: DMatrix<C64>,
}

impl fmt::Debug for KRepresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KRepresentation")
            .field("ambient", &self.rep)
            .field("dim", &self.iso.ncols())
            .finish()
    }
}

impl KRepresentation {
    /// Checks that B has orthonormal columns and that BB* commutes with ρ̃
    /// on the K-quadrature nodes.
    pub fn new(rep: Arc<Representation>, iso: DMatrix<C64>) -> Result<Arc<KRepresentation>> {
        if iso.nrows() != rep.dim() {
            return Err(Error::DimensionMismatch {
                expected: rep.dim(),
                got: iso.nrows(),
            });
        }
        let m = iso.ncols();
        let defect = (iso.adjoint() * &iso - DMatrix::<C64>::identity(m, m)).norm();
        if defect > 1e-10 {
            return Err(Error::NotUnitary(defect));
        }
        let out = KRepresentation {
            id: fresh_id(),
            rep,
            iso,
        };
        let res = out.restriction_residual();
        if res > 1e-10 {
            return Err(Error::NotEquivariant(res));
        }
        Ok(Arc::new(out))
    }

    /// π = ρ̃ restricted to K on all of H̃.
    pub fn restrict(rep: Arc<Representation>) -> Arc<KRepresentation> {
        let n = rep.dim();
        Arc::new(KRepresentation {
            id: fresh_id(),
            rep,
            iso: DMatrix::identity(n, n),
        })
    }

    pub fn dim(&self) -> usize {
        self.iso.ncols()
    }

    pub fn ambient(&self) -> &Arc<Representation> {
        &self.rep
    }

    /// The isometry B: H → H̃.
    pub fn isometry(&self) -> &DMatrix<C64> {
        &self.iso
    }

    /// Orthogonal projection P_H = BB* on H̃.
    pub fn projection(&self) -> DMatrix<C64> {
        &self.iso * self.iso.adjoint()
    }

    /// π_s for s ∈ K.
    pub fn matrix(&self, s: &GroupElement) -> DMatrix<C64> {
        self.iso.adjoint() * self.rep.matrix(s) * &self.iso
    }

    /// max over K-quadrature nodes of ‖ρ̃_s P_H − P_H ρ̃_s‖.
    pub fn restriction_residual(&self) -> f64 {
        let group = self.rep.group();
        let rule = group.k_rule(2 * self.rep.bandwidth_twice() as usize + 3);
        let p = self.projection();
        rule.nodes
            .iter()
            .map(|s| {
                let r = self.rep.matrix(s);
                (&r * &p - &p * &r).norm()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::AlgebraVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn su2() -> Arc<GroupModel> {
        GroupModel::catalog("su2", 1.0).unwrap()
    }

    #[test]
    fn spin_half_is_defining() {
        let g = su2();
        let r = Representation::spin(&g, Spin(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = g.sample_haar(&mut rng).unwrap();
        assert!((r.matrix(&x) - x.matrix()).norm() < 1e-14);
    }

    #[test]
    fn spin_reps_are_unitary_homomorphisms() {
        let g = su2();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for tj in 0..=6 {
            let r = Representation::spin(&g, Spin(tj)).unwrap();
            let x = g.sample_haar(&mut rng).unwrap();
            let y = g.sample_haar(&mut rng).unwrap();
            let rx = r.matrix(&x);
            let ry = r.matrix(&y);
            let rxy = r.matrix(&x.mul(&y));
            assert!((&rx * &ry - rxy).norm() < 1e-12, "spin {tj}");
            let n = r.dim();
            assert!((&rx * rx.adjoint() - DMatrix::<C64>::identity(n, n)).norm() < 1e-12);
        }
    }

    #[test]
    fn differential_matches_central_difference() {
        let g = su2();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for tj in 1..=4 {
            let r = Representation::spin(&g, Spin(tj)).unwrap();
            let y = g.sample_algebra(&mut rng);
            let h = 1e-5;
            let plus = r.matrix(&g.exp_map(&y, h));
            let minus = r.matrix(&g.exp_map(&y, -h));
            let fd = (plus - minus) / C64::new(2.0 * h, 0.0);
            assert!((fd - r.differential(&y.coords)).norm() < 1e-8);
            // skew-Hermitian generators
            let d = r.differential(&y.coords);
            assert!((&d + d.adjoint()).norm() < 1e-13);
        }
    }

    #[test]
    fn weights_of_the_circle() {
        let g = su2();
        let r = Representation::spin(&g, Spin(2)).unwrap();
        let t = 0.7;
        let s = g.exp_map(&AlgebraVector::basis(3, 2), t);
        let m = r.matrix(&s);
        for i in 0..3 {
            let weight = 1.0 - i as f64;
            let expect = C64::from_polar(1.0, -weight * t);
            assert!((m[(i, i)] - expect).norm() < 1e-13);
        }
        assert_eq!(r.weight_index(2), Some(0));
        assert_eq!(r.weight_index(-2), Some(2));
        assert_eq!(r.weight_index(1), None);
    }

    #[test]
    fn conjugation_matrix_intertwines() {
        let g = su2();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for tj in 0..=4 {
            let s = Spin(tj);
            let r = Representation::spin(&g, s).unwrap();
            let x = g.sample_haar(&mut rng).unwrap();
            let m = r.matrix(&x);
            let j = spin_conjugation(s);
            let back = &j * m.map(|z| z.conj()) * j.adjoint();
            assert!((back - m).norm() < 1e-12, "spin {s}");
        }
    }

    #[test]
    fn adjoint_rep_generators_match_structure() {
        let g = su2();
        let r = Representation::adjoint(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let y = g.sample_algebra(&mut rng);
        let h = 1e-5;
        let fd = (r.matrix(&g.exp_map(&y, h)) - r.matrix(&g.exp_map(&y, -h))) / C64::new(2.0 * h, 0.0);
        assert!((fd - r.differential(&y.coords)).norm() < 1e-8);
    }

    #[test]
    fn spin_display() {
        assert_eq!(Spin(3).to_string(), "3/2");
        assert_eq!(Spin(4).to_string(), "2");
        assert_eq!(Spin::from_f64(1.5), Some(Spin(3)));
        assert_eq!(Spin::from_f64(0.3), None);
    }
}
