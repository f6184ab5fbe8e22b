//! Lower bounds for the spectral distance sup{|f(p) − f(q)| : ‖[D, M_f]‖ ≤ 1}.
//!
//! ‖[D, M_f]‖ = ‖grad f‖_∞, estimated as a maximum over quadrature nodes
//! followed by a local ascent from the best nodes.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Frame;
use crate::lie::{GroupElement, GroupModel, C64};
use crate::quadrature::QuadratureRule;
use crate::rep::{Representation, Spin};
use crate::section::Section;

/// How many of the largest-gradient nodes seed the local ascent.
const ASCENT_SEEDS: usize = 4;
const ASCENT_STEPS: [f64; 5] = [0.2, 0.05, 0.0125, 3e-3, 8e-4];

fn grad_norm(grad: &Section, x: &GroupElement) -> f64 {
    grad.value(x).norm()
}

/// ‖grad f‖_∞ over the nodes of `rule`, refined by coordinate ascent along
/// right translations x·exp(±h·Y_a) for Y_a in the 𝔪-basis.
pub fn sup_gradient(frame: &Arc<Frame>, f: &Section, rule: &QuadratureRule) -> Result<f64> {
    let g = f.group().clone();
    let grad = Section::gradient(frame, f)?;
    let mut scored: Vec<(f64, usize)> = rule
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, x)| (grad_norm(&grad, x), i))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best = scored.first().map(|s| s.0).unwrap_or(0.0);
    let dirs: Vec<DVector<f64>> = (0..g.dim_m()).map(|a| g.m_basis().column(a).into_owned()).collect();
    for &(val, i) in scored.iter().take(ASCENT_SEEDS) {
        let mut x = rule.nodes[i].clone();
        let mut cur = val;
        for h in ASCENT_STEPS {
            let mut improved = true;
            while improved {
                improved = false;
                for d in &dirs {
                    for sign in [1.0, -1.0] {
                        let y = x.mul(&g.exp_map(&crate::lie::AlgebraVector::new(d.clone()), sign * h));
                        let v = grad_norm(&grad, &y);
                        if v > cur {
                            cur = v;
                            x = y;
                            improved = true;
                        }
                    }
                }
            }
        }
        best = best.max(cur);
    }
    Ok(best)
}

/// max over the family of |f(p) − f(q)| / ‖grad f‖_∞.
pub fn metric_estimate(
    frame: &Arc<Frame>,
    p: &GroupElement,
    q: &GroupElement,
    family: &[Section],
    rule: &QuadratureRule,
) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut best: f64 = 0.0;
    for f in family {
        let diff = f.value(p).sub(&f.value(q)).norm();
        if diff == 0.0 {
            continue;
        }
        let sup = sup_gradient(frame, f, rule)?;
        if sup > 0.0 {
            best = best.max(diff / sup);
        }
    }
    Ok(best)
}

/// Geodesic distance between xK and yK on the round sphere of radius √s:
/// √s · arccos(n_x · n_y), with n_x = Ad_x(X₃) the image of the pole.
pub fn sphere_geodesic(group: &GroupModel, x: &GroupElement, y: &GroupElement) -> f64 {
    let pole = group.k_basis().column(0).into_owned();
    let nx = group.ad_matrix(x) * &pole;
    let ny = group.ad_matrix(y) * &pole;
    let c = nx.dot(&ny).clamp(-1.0, 1.0);
    group.inner_product_scale().sqrt() * c.acos()
}

/// Zonal test functions for the pair (p, q) up to spin `max_spin`:
/// z_ℓ(x) = Re⟨ρ^ℓ(p)v₀ − ρ^ℓ(q)v₀, ρ^ℓ(x)v₀⟩ with v₀ the K-fixed weight
/// vector, the real and imaginary parts of ρ^ℓ(x)v₀, and `mixtures`
/// normalized combinations cos t·z₁/‖z₁‖ + sin t·z₂/‖z₂‖.
pub fn zonal_family(
    group: &Arc<GroupModel>,
    p: &GroupElement,
    q: &GroupElement,
    max_spin: u32,
    mixtures: usize,
) -> Result<Vec<Section>> {
    let mut out = Vec::new();
    let mut zonal = Vec::new();
    for l in 1..=max_spin {
        let rep = Representation::spin(group, Spin(2 * l))?;
        let i0 = rep.weight_index(0).expect("integer spins have weight 0");
        let mut v0 = DVector::<C64>::zeros(rep.dim());
        v0[i0] = C64::new(1.0, 0.0);
        let u = rep.matrix(p) * &v0 - rep.matrix(q) * &v0;
        let z = Section::matrix_coefficient(&rep, u.clone(), v0.clone())?.real_part()?;
        let scale = u.norm();
        if scale > 1e-14 {
            zonal.push(z.scale(1.0 / scale));
        }
        for a in 0..rep.dim() {
            let mut e = DVector::<C64>::zeros(rep.dim());
            e[a] = C64::new(1.0, 0.0);
            let c = Section::matrix_coefficient(&rep, e, v0.clone())?;
            out.push(c.real_part()?);
            out.push(c.imag_part()?);
        }
    }
    if zonal.len() >= 2 {
        for k in 0..mixtures {
            let t = std::f64::consts::PI * k as f64 / mixtures as f64;
            out.push(zonal[0].scale(t.cos()).add(&zonal[1].scale(t.sin()))?);
        }
    }
    out.extend(zonal);
    Ok(out)
}
