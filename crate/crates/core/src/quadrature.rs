//! Quadrature over G and G/K against the normalized Haar measure.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lie::{GroupElement, GroupKind, GroupModel, Subgroup, C64};

/// How a rule was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RuleKind {
    /// Exact for integrands of total spin ≤ bandwidth.
    Exact,
    /// Exact for right-K-invariant integrands of total spin ≤ bandwidth.
    Coset,
    /// Sampled; `sigma` is the per-node standard-error scale 1/√N.
    MonteCarlo { sigma: f64 },
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub nodes: Vec<GroupElement>,
    pub weights: Vec<f64>,
    /// Declared exactness level B (total spin).
    pub bandwidth: u32,
    pub kind: RuleKind,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, RuleKind::MonteCarlo { .. })
    }

    /// Σ w_k f(x_k), evaluated in parallel and reduced in node order.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&GroupElement) -> f64 + Sync,
    {
        let vals: Vec<f64> = self.nodes.par_iter().map(&f).collect();
        vals.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn integrate_complex<F>(&self, f: F) -> C64
    where
        F: Fn(&GroupElement) -> C64 + Sync,
    {
        let vals: Vec<C64> = self.nodes.par_iter().map(&f).collect();
        vals.iter()
            .zip(&self.weights)
            .fold(C64::new(0.0, 0.0), |acc, (v, w)| acc + v * *w)
    }
}

/// Options for groups without an exact rule.
#[derive(Clone, Copy, Debug)]
pub struct MonteCarloFallback {
    pub samples: usize,
    pub seed: u64,
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 0 {
                break;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            } else {
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
            }
            // p1 = P_n(z), p0 = P_{n−1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// exp(αZ)·exp(βY)·exp(γZ) with Z = −(i/2)σ₃, Y = −(i/2)σ₂.
pub fn su2_euler(alpha: f64, beta: f64, gamma: f64) -> GroupElement {
    let ez = |t: f64| {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::from_polar(1.0, -t / 2.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::from_polar(1.0, t / 2.0),
            ],
        )
    };
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let ey = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
    );
    GroupElement::from_matrix_unchecked(ez(alpha) * ey * ez(gamma))
}

fn su2_product_rule(bandwidth: u32, with_gamma: bool) -> QuadratureRule {
    let b = bandwidth as usize;
    let n_circle = 2 * b + 1;
    let n_beta = b / 2 + 1;
    let n_gamma = if with_gamma { n_circle } else { 1 };
    let (xs, ws) = gauss_legendre(n_beta);
    let mut nodes = Vec::with_capacity(n_circle * n_beta * n_gamma);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for ia in 0..n_circle {
        let alpha = 4.0 * PI * ia as f64 / n_circle as f64;
        for (x, w) in xs.iter().zip(&ws) {
            let beta = x.clamp(-1.0, 1.0).acos();
            for ig in 0..n_gamma {
                let gamma = 4.0 * PI * ig as f64 / n_gamma as f64;
                nodes.push(su2_euler(alpha, beta, gamma));
                weights.push(w / 2.0 / (n_circle * n_gamma) as f64);
            }
        }
    }
    QuadratureRule {
        nodes,
        weights,
        bandwidth,
        kind: if with_gamma { RuleKind::Exact } else { RuleKind::Coset },
    }
}

/// Haar quadrature on G. SU(2) gets the Euler-angle product rule (uniform
/// grids in the circle angles, Gauss–Legendre in cos β); other groups need
/// the Monte Carlo fallback.
pub fn haar_rule(group: &GroupModel, bandwidth: u32, fallback: Option<MonteCarloFallback>) -> Result<QuadratureRule> {
    if bandwidth < 1 {
        return Err(Error::Config("quadrature bandwidth must be ≥ 1".into()));
    }
    match group.kind() {
        GroupKind::Su2 => Ok(su2_product_rule(bandwidth, true)),
        _ => monte_carlo_rule(group, bandwidth, fallback),
    }
}

fn monte_carlo_rule(
    group: &GroupModel,
    bandwidth: u32,
    fallback: Option<MonteCarloFallback>,
) -> Result<QuadratureRule> {
    let fb = fallback.ok_or_else(|| {
        Error::UnsupportedGroup(format!(
            "no exact Haar rule for {} and Monte Carlo fallback is disabled",
            group.name()
        ))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(fb.seed);
    let nodes = (0..fb.samples)
        .map(|_| group.sample_haar(&mut rng))
        .collect::<Result<Vec<_>>>()?;
    let n = nodes.len().max(1);
    Ok(QuadratureRule {
        weights: vec![1.0 / n as f64; nodes.len()],
        nodes,
        bandwidth,
        kind: RuleKind::MonteCarlo {
            sigma: 1.0 / (n as f64).sqrt(),
        },
    })
}

/// Quadrature for integrals over G/K of right-K-invariant integrands.
/// For SU(2)/U(1) with K generated by σ₃ the γ-angle is dropped.
pub fn coset_rule(group: &GroupModel, bandwidth: u32, fallback: Option<MonteCarloFallback>) -> Result<QuadratureRule> {
    if bandwidth < 1 {
        return Err(Error::Config("quadrature bandwidth must be ≥ 1".into()));
    }
    if group.kind() == GroupKind::Su2 {
        if let Subgroup::Circle { generator, .. } = group.subgroup() {
            let z = group.to_matrix(generator);
            let sigma3_line = z[(0, 1)].norm() < 1e-14 && z[(1, 0)].norm() < 1e-14;
            if sigma3_line {
                return Ok(su2_product_rule(bandwidth, false));
            }
        }
        return Ok(su2_product_rule(bandwidth, true));
    }
    monte_carlo_rule(group, bandwidth, fallback)
}

/// The coset rule when K is a circle, the Haar rule when K = {e}.
pub fn space_rule(group: &GroupModel, bandwidth: u32, fallback: Option<MonteCarloFallback>) -> Result<QuadratureRule> {
    match group.subgroup() {
        Subgroup::Trivial => haar_rule(group, bandwidth, fallback),
        Subgroup::Circle { .. } => coset_rule(group, bandwidth, fallback),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        // ∫ x^8 = 2/9, degree 8 ≤ 2·5 − 1
        let m8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((m8 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_one() {
        let g = GroupModel::catalog("su2", 1.0).unwrap();
        for b in [1, 4, 7] {
            let r = haar_rule(&g, b, None).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            assert!(r.weights.iter().all(|w| *w > 0.0));
            assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn coset_rule_drops_gamma_for_sphere() {
        let g = GroupModel::catalog("su2", 1.0).unwrap();
        let r = coset_rule(&g, 4, None).unwrap();
        assert_eq!(r.kind, RuleKind::Coset);
        assert_eq!(r.len(), 9 * 3);
        let t = GroupModel::catalog("su2-trivial-k", 1.0).unwrap();
        assert_eq!(coset_rule(&t, 4, None).unwrap().kind, RuleKind::Exact);
    }

    #[test]
    fn bandwidth_zero_rejected() {
        let g = GroupModel::catalog("su2", 1.0).unwrap();
        assert!(haar_rule(&g, 0, None).is_err());
    }

    #[test]
    fn euler_angles_hit_su2() {
        let x = su2_euler(0.3, 1.1, 2.0);
        assert!(x.unitarity_defect() < 1e-14);
        assert!((x.matrix().determinant() - C64::new(1.0, 0.0)).norm() < 1e-14);
    }
}
