//! Galerkin blocks of the Hodge–Dirac operator on left-isotypic components.
//!
//! D commutes with left translation, so the spinors whose coefficients are
//! spin-ℓ matrix coefficients form an invariant finite-dimensional block.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::clifford::{grade, CliffordElement};
use crate::dirac::hodge_dirac;
use crate::error::{Error, Result};
use crate::geometry::{Connection, Frame};
use crate::lie::{GroupKind, C64};
use crate::quadrature::QuadratureRule;
use crate::rep::{Representation, Spin};
use crate::section::{KAction, Point, Section, Value};

/// Relative eigenvalue floor for Gram matrices.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SpectralBlock {
    pub level: Spin,
    /// Orthonormal block basis.
    pub basis: Vec<Section>,
    /// Clifford grade of each basis vector.
    pub grades: Vec<u32>,
    /// M_{ab} = ⟨ξ_a, Dξ_b⟩.
    pub matrix: DMatrix<f64>,
    /// Eigenvalues of (M + Mᵀ)/2, ascending.
    pub eigenvalues: Vec<f64>,
    /// ‖M − Mᵀ‖_F.
    pub asymmetry: f64,
    /// max_b ‖Dξ_b − Σ_a ξ_a M_{ab}‖_{L²}: the weight D sends outside the block.
    pub closure_residual: f64,
    /// ‖Gram − I‖ of the final basis.
    pub orthonormality_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenRow {
    pub level: String,
    pub index: usize,
    pub eigenvalue: f64,
    pub asymmetry_norm: f64,
    pub closure_residual: f64,
}

impl SpectralBlock {
    pub fn rows(&self) -> Vec<EigenRow> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, e)| EigenRow {
                level: self.level.to_string(),
                index: i,
                eigenvalue: *e,
                asymmetry_norm: self.asymmetry,
                closure_residual: self.closure_residual,
            })
            .collect()
    }

    pub fn kernel_dimension(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|e| e.abs() <= tol).count()
    }

    /// Eigenvalues of M² compressed to the basis vectors of one grade.
    pub fn squared_on_grade(&self, k: u32) -> Vec<f64> {
        let idx: Vec<usize> = (0..self.grades.len()).filter(|&i| self.grades[i] == k).collect();
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        let sq = &sym * &sym;
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| sq[(idx[a], idx[b])]);
        sorted_eigenvalues(sub)
    }
}

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Values of every section at every node, node-major.
fn tabulate_clifford(sections: &[Section], rule: &QuadratureRule) -> Vec<Vec<DVector<f64>>> {
    rule.nodes
        .par_iter()
        .map(|x| {
            let pt = Point::new(x.clone());
            sections
                .iter()
                .map(|s| match s.value_at(&pt) {
                    Value::Clifford(c) => c.to_dvector(),
                    _ => unreachable!("spinor sections are Clifford-valued"),
                })
                .collect()
        })
        .collect()
}

/// ∫⟨a_i, b_j⟩_c as a matrix.
fn cross_gram(
    a: &[Vec<DVector<f64>>],
    ia: usize,
    b: &[Vec<DVector<f64>>],
    ib: usize,
    rule: &QuadratureRule,
) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(ia, ib);
    for ((va, vb), w) in a.iter().zip(b).zip(&rule.weights) {
        let ma = DMatrix::from_columns(va);
        let mb = DMatrix::from_columns(vb);
        out += ma.transpose() * mb * *w;
    }
    out
}

/// Equivariant spinors Re/Im ρ^ℓ_{ab}·e_S, K-averaged, zero ones dropped.
fn generators(conn: &Connection, level: Spin) -> Result<Vec<(Section, u32)>> {
    let g = conn.group();
    if g.kind() != GroupKind::Su2 {
        return Err(Error::UnsupportedGroup(format!(
            "spectral blocks need SU(2), got {}",
            g.name()
        )));
    }
    let rep = Representation::spin(g, level)?;
    let p = g.dim_m();
    let n = rep.dim();
    let probes: Vec<_> = {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        (0..3).map(|_| g.sample_haar(&mut rng)).collect::<Result<_>>()?
    };
    let mut out = Vec::new();
    for mask in 0..1usize << p {
        let blade = Section::constant(g, Value::Clifford(CliffordElement::blade(p, mask)));
        for a in 0..n {
            for b in 0..n {
                let mut u = DVector::<C64>::zeros(n);
                let mut v = DVector::<C64>::zeros(n);
                u[a] = C64::new(1.0, 0.0);
                v[b] = C64::new(1.0, 0.0);
                let coeff = Section::matrix_coefficient(&rep, u, v)?;
                for part in [coeff.real_part()?, coeff.imag_part()?] {
                    let s = part.mul(&blade)?.equivariant_project(KAction::Clifford)?;
                    if probes.iter().any(|x| s.value(x).norm() > 1e-12) {
                        out.push((s, grade(mask)));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Orthonormal combinations of the columns of a Gram matrix: returns C with
/// CᵀGC = I, spanning the numerical range.
fn orthonormalize(gram: &DMatrix<f64>) -> DMatrix<f64> {
    let n = gram.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new((gram + gram.transpose()) * 0.5);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > RANK_TOL * top).collect();
    DMatrix::from_fn(n, keep.len(), |r, c| {
        let k = keep[c];
        eig.eigenvectors[(r, k)] / eig.eigenvalues[k].sqrt()
    })
}

/// The D-block on the spin-`level` isotypic component.
pub fn spectral_block(
    conn: &Arc<Connection>,
    frame: &Arc<Frame>,
    level: Spin,
    rule: &QuadratureRule,
) -> Result<SpectralBlock> {
    if rule.is_exact() && (level.twice() + 4) > 2 * rule.bandwidth {
        log::warn!(
            "quadrature bandwidth {} is below the {} needed at level {level}",
            rule.bandwidth,
            (level.twice() + 4).div_ceil(2)
        );
    }
    let gens = generators(conn, level)?;
    let max_grade = gens.iter().map(|(_, k)| *k).max().unwrap_or(0);
    let sections: Vec<Section> = gens.iter().map(|(s, _)| s.clone()).collect();
    let values = tabulate_clifford(&sections, rule);
    let gram = cross_gram(&values, sections.len(), &values, sections.len(), rule);

    // grades are pointwise orthogonal, so orthonormalize grade by grade
    let mut coeff_cols: Vec<DVector<f64>> = Vec::new();
    let mut grades = Vec::new();
    for k in 0..=max_grade {
        let idx: Vec<usize> = (0..gens.len()).filter(|&i| gens[i].1 == k).collect();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |a, b| gram[(idx[a], idx[b])]);
        let c = orthonormalize(&sub);
        for col in c.column_iter() {
            let mut full = DVector::zeros(gens.len());
            for (a, &i) in idx.iter().enumerate() {
                full[i] = col[a];
            }
            coeff_cols.push(full);
            grades.push(k);
        }
    }
    let c = DMatrix::from_columns(&coeff_cols);
    let basis: Vec<Section> = c
        .column_iter()
        .map(|col| Section::linear_combination(col.as_slice(), &sections))
        .collect::<Result<_>>()?;

    let d_sections: Vec<Section> = sections
        .iter()
        .map(|s| hodge_dirac(conn, frame, s))
        .collect::<Result<_>>()?;
    let d_values = tabulate_clifford(&d_sections, rule);
    let a = cross_gram(&values, sections.len(), &d_values, sections.len(), rule);

    let orth = c.transpose() * &gram * &c;
    let dim = orth.nrows();
    let orthonormality_residual = (orth - DMatrix::identity(dim, dim)).norm();
    let m = c.transpose() * a * &c;
    // ∫|Dξ_b − Σ_a ξ_a M_ab|², evaluated pointwise to avoid cancellation
    let mut outside = DVector::<f64>::zeros(dim);
    for ((v, dv), w) in values.iter().zip(&d_values).zip(&rule.weights) {
        let vc = DMatrix::from_columns(v) * &c;
        let dvc = DMatrix::from_columns(dv) * &c;
        let r = dvc - vc * &m;
        for b in 0..dim {
            outside[b] += w * r.column(b).norm_squared();
        }
    }
    let closure_residual = outside.iter().map(|o| o.max(0.0).sqrt()).fold(0.0, f64::max);
    let asymmetry = (&m - m.transpose()).norm();
    let eigenvalues = sorted_eigenvalues((&m + m.transpose()) * 0.5);
    Ok(SpectralBlock {
        level,
        basis,
        grades,
        matrix: m,
        eigenvalues,
        asymmetry,
        closure_residual,
        orthonormality_residual,
    })
}

/// Blocks for spins 0, 1, …, `max_level` (integer spins only when K ≠ {e},
/// where half-integer levels carry no equivariant spinors).
pub fn spectrum(
    conn: &Arc<Connection>,
    frame: &Arc<Frame>,
    max_level: u32,
    rule: &QuadratureRule,
) -> Result<Vec<SpectralBlock>> {
    let step = if conn.group().dim_m() < conn.group().dim() {
        2
    } else {
        1
    };
    (0..=2 * max_level)
        .step_by(step)
        .map(|t| spectral_block(conn, frame, Spin(t), rule))
        .collect()
}

/// The CSV table `level,index,eigenvalue,asymmetry_norm,closure_residual`.
pub fn spectrum_csv(blocks: &[SpectralBlock]) -> String {
    let mut out = String::from("level,index,eigenvalue,asymmetry_norm,closure_residual\n");
    for b in blocks {
        for r in b.rows() {
            out.push_str(&format!(
                "{},{},{:.12e},{:.6e},{:.6e}\n",
                r.level, r.index, r.eigenvalue, r.asymmetry_norm, r.closure_residual
            ));
        }
    }
    out
}
