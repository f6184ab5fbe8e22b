//! Configuration-driven runs: the verification suites, spectra and
//! monopole projection samples.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{monopole_bundle, rank_one_endo, tangent_bundle, InducedBundle};
use crate::config::{load_gamma_file, real_blocks, BundleChoice, ConnectionChoice, RunConfig};
use crate::dirac::{
    commutator_defect, criterion_check, hodge_dirac, random_spinor, selfadjoint_defect, spinor_test_pairs,
};
use crate::error::{Error, Result};
use crate::geometry::{
    apply_connection, canonical_derivative, fundamental_field, random_tangent_section, tangent_equivariance_residual,
    tangent_frame, torsion, Connection, Frame,
};
use crate::lie::{AlgebraVector, GroupElement, GroupKind, GroupModel, Subgroup, C64};
use crate::quadrature::{space_rule, su2_euler};
use crate::rep::{Representation, Spin};
use crate::report::{default_tolerance, Entry, Report};
use crate::section::{equivariance_residual, random_function, KAction, Section};
use crate::spectral::{spectrum, spectrum_csv, SpectralBlock};

/// Dirac and torsion checks evaluate at most this many points.
const HEAVY_SAMPLES: usize = 10;
/// Size of the band-limited spinor test set.
const SPINOR_PAIRS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Geometry,
    Dirac,
    All,
}

/// Everything a run resolves from its configuration.
pub struct Setup {
    pub cfg: RunConfig,
    pub group: Arc<GroupModel>,
    /// Acts on tangent fields and spinors.
    pub tangent: Arc<Connection>,
    /// Acts on sections of the configured bundle, when the gamma file
    /// targets it.
    pub bundle_connection: Option<Arc<Connection>>,
    pub bundle: InducedBundle,
    rng: ChaCha8Rng,
}

impl Setup {
    pub fn new(cfg: &RunConfig) -> Result<Setup> {
        cfg.validate()?;
        let group = cfg.build_group()?;
        let bundle = match &cfg.bundle {
            BundleChoice::Monopole { charge, level } => monopole_bundle(&group, *charge, *level)?,
            BundleChoice::Tangent | BundleChoice::Clifford => tangent_bundle(&group)?,
        };
        let p = group.dim_m();
        let (tangent, bundle_connection) = match &cfg.connection {
            ConnectionChoice::Canonical => (Connection::canonical(&group), None),
            ConnectionChoice::LeviCivita => (Connection::levi_civita(&group), None),
            ConnectionChoice::GammaFile(path) => match cfg.bundle {
                BundleChoice::Monopole { .. } => {
                    let blocks = load_gamma_file(path, p, bundle.rank())?;
                    (
                        Connection::canonical(&group),
                        Some(Connection::bundle(bundle.pi(), blocks)?),
                    )
                }
                _ => {
                    let blocks = real_blocks(&load_gamma_file(path, p, p)?)?;
                    (Connection::tangent(&group, blocks)?, None)
                }
            },
        };
        Ok(Setup {
            cfg: cfg.clone(),
            group,
            tangent,
            bundle_connection,
            bundle,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        })
    }

    fn tol(&self, check: &str) -> f64 {
        self.cfg.tolerance(check, default_tolerance(check))
    }

    fn entry(&self, check: &str, residual: f64, samples: usize) -> Entry {
        Entry::new(check, residual, self.tol(check), samples)
    }

    fn samples(&mut self, n: usize) -> Result<Vec<GroupElement>> {
        (0..n).map(|_| self.group.sample_haar(&mut self.rng)).collect()
    }

    fn k_samples(&mut self, n: usize) -> Vec<GroupElement> {
        (0..n).map(|_| self.group.sample_k(&mut self.rng)).collect()
    }

    fn integer_only(&self) -> bool {
        !matches!(self.group.subgroup(), Subgroup::Trivial)
    }

    fn band(&self) -> u32 {
        if self.group.kind() == GroupKind::Su2 {
            2
        } else {
            0
        }
    }
}

fn max_diff(a: &Section, b: &Section, xs: &[GroupElement]) -> f64 {
    xs.iter()
        .map(|x| a.value(x).sub(&b.value(x)).norm())
        .fold(0.0, f64::max)
}

fn max_norm(a: &Section, xs: &[GroupElement]) -> f64 {
    xs.iter().map(|x| a.value(x).norm()).fold(0.0, f64::max)
}

/// Σ_j η_j⟨η_j, ξ⟩_A.
fn reproduce(frame: &[Section], xi: &Section) -> Result<Section> {
    let terms: Vec<Section> = frame
        .iter()
        .map(|eta| eta.mul(&eta.a_inner(xi)?))
        .collect::<Result<_>>()?;
    Section::sum(&terms)
}

/// δ_W⟨a, b⟩_A − ⟨∇_W a, b⟩_A − ⟨a, ∇_W b⟩_A.
fn leibniz_defect(conn: &Arc<Connection>, w: &Section, a: &Section, b: &Section, xs: &[GroupElement]) -> Result<f64> {
    let lhs = canonical_derivative(w, &a.a_inner(b)?)?;
    let rhs = apply_connection(conn, w, a)?
        .a_inner(b)?
        .add(&a.a_inner(&apply_connection(conn, w, b)?)?)?;
    Ok(max_diff(&lhs, &rhs, xs))
}

/// X̂(x) against −P of the matrix x⁻¹Xx.
pub fn fundamental_field_residual<R: Rng + ?Sized>(
    group: &Arc<GroupModel>,
    xs: &[GroupElement],
    rng: &mut R,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let y = group.sample_algebra(rng);
        let field = fundamental_field(group, &y)?;
        let ym = group.to_matrix(&y.coords);
        for x in xs {
            let conj = x.matrix().adjoint() * &ym * x.matrix();
            let want = -group.to_m(&group.expand(&conj)?);
            let got = field.value(x);
            let got = got.as_tangent().expect("fundamental fields are tangent");
            worst = worst.max((got - want).norm());
        }
    }
    Ok(worst)
}

/// [X̂, Ŷ]f − ([X, Y])^f on matrix coefficients f = ⟨u, ρ(x)v⟩, using
/// δ_Ŷ f = ⟨dρ(Y)u, ρ(x)v⟩ for the inner derivative.
pub fn bracket_residual<R: Rng + ?Sized>(group: &Arc<GroupModel>, xs: &[GroupElement], rng: &mut R) -> Result<f64> {
    if group.kind() != GroupKind::Su2 {
        return Err(Error::UnsupportedGroup("bracket check needs the spin catalog".into()));
    }
    let circle = !matches!(group.subgroup(), Subgroup::Trivial);
    let spins: &[u32] = if circle { &[2] } else { &[1, 2] };
    let mut worst: f64 = 0.0;
    for _ in 0..2 {
        let xa = group.sample_algebra(rng);
        let ya = group.sample_algebra(rng);
        let za = group.bracket(&xa, &ya);
        let fields = [&xa, &ya, &za].map(|v| fundamental_field(group, v));
        let [xh, yh, zh] = fields;
        let (xh, yh, zh) = (xh?, yh?, zh?);
        for &t in spins {
            let rep = Representation::spin(group, Spin(t))?;
            let n = rep.dim();
            let mut v = DVector::<C64>::zeros(n);
            if circle {
                v[rep.weight_index(0).expect("integer spin")] = C64::new(1.0, 0.0);
            } else {
                v[0] = C64::new(1.0, 0.0);
            }
            let u = DVector::from_fn(n, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let f = Section::matrix_coefficient(&rep, u.clone(), v.clone())?;
            let fx = Section::matrix_coefficient(&rep, rep.differential(&xa.coords) * &u, v.clone())?;
            let fy = Section::matrix_coefficient(&rep, rep.differential(&ya.coords) * &u, v.clone())?;
            for x in xs {
                let dir = |s: &Section| {
                    let w = s.value(x);
                    AlgebraVector::new(group.from_m(w.as_tangent().expect("tangent field")))
                };
                let comm = fy.deriv(x, &dir(&xh))?.sub(&fx.deriv(x, &dir(&yh))?);
                let want = f.deriv(x, &dir(&zh))?;
                worst = worst.max(comm.sub(&want).norm());
            }
        }
    }
    Ok(worst)
}

/// Pointwise −γ(V)W + γ(W)V − P[V, W] in 𝔪-coordinates.
fn torsion_oracle(group: &GroupModel, gamma: &[DMatrix<f64>], v: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    let apply = |a: &DVector<f64>, b: &DVector<f64>| {
        let mut out = DVector::zeros(b.len());
        for (c, g) in a.iter().zip(gamma) {
            out += g * b * *c;
        }
        out
    };
    let br = group.to_m(&group.bracket_coords(&group.from_m(v), &group.from_m(w)));
    -apply(v, w) + apply(w, v) - br
}

fn geometry_suite(s: &mut Setup, report: &mut Report) -> Result<()> {
    let g = s.group.clone();
    let n = s.cfg.sample_count;
    let xs = s.samples(n)?;
    let heavy = n.min(HEAVY_SAMPLES);
    let ks = s.k_samples(4);
    let band = s.band();

    report.push(s.entry("algebra.k_closure", g.k_closure_residual(), 1));

    let b = s.bundle.clone();
    report.push(s.entry("bundle.restriction", b.pi().restriction_residual(), 1));
    let action = b.action();
    let eq = b
        .frame()
        .iter()
        .map(|eta| equivariance_residual(eta, &action, &xs[..heavy], &ks))
        .fold(0.0, f64::max);
    report.push(s.entry("bundle.frame_equivariance", eq, heavy * ks.len()));
    let xi = b.random_section(band, &mut s.rng)?;
    let repro = max_diff(&reproduce(b.frame(), &xi)?, &xi, &xs);
    report.push(s.entry("bundle.reproducing_formula", repro, n));

    let proj = b.projection_section()?;
    let gram = b.frame_gram()?;
    let (mut idem, mut trace, mut gram_idem) = (0.0f64, 0.0f64, 0.0f64);
    for x in &xs {
        let pv = proj.value(x);
        let pm = pv.as_operator().expect("projection is operator-valued");
        idem = idem.max((pm * pm - pm).norm()).max((pm - pm.adjoint()).norm());
        trace = trace.max((pm.trace() - C64::new(b.rank() as f64, 0.0)).norm());
        let gv = gram.value(x);
        let gm = gv.as_operator().expect("Gram is operator-valued");
        gram_idem = gram_idem.max((gm * gm - gm).norm()).max((gm - gm.adjoint()).norm());
    }
    report.push(s.entry("bundle.projection_idempotent", idem, n));
    report.push(s.entry("bundle.projection_trace", trace, n));
    report.push(s.entry("bundle.gram_idempotent", gram_idem, n));

    let terms: Vec<Section> = (0..2)
        .map(|_| {
            rank_one_endo(
                &b.random_section(band, &mut s.rng)?,
                &b.random_section(band, &mut s.rng)?,
            )
        })
        .collect::<Result<_>>()?;
    let t = Section::sum(&terms)?;
    let recon: Vec<Section> = b
        .frame()
        .iter()
        .map(|eta| rank_one_endo(&t.mul(eta)?, eta))
        .collect::<Result<_>>()?;
    let recon = max_diff(&Section::sum(&recon)?, &t, &xs[..heavy]);
    report.push(s.entry("bundle.endomorphism_reconstruction", recon, heavy));

    // tangent module
    let frame = Arc::new(Frame::standard(&g));
    let fields = tangent_frame(&g, &frame)?;
    let ff = fundamental_field_residual(&g, &xs, &mut s.rng)?;
    report.push(s.entry("tangent.fundamental_field", ff, 3 * n));
    let w = random_tangent_section(&g, band, &mut s.rng)?;
    report.push(s.entry("tangent.frame_identity", max_diff(&reproduce(&fields, &w)?, &w, &xs), n));
    let norms: Vec<Section> = fields.iter().map(|f| f.a_inner(f)).collect::<Result<_>>()?;
    let total = Section::sum(&norms)?;
    let tr = xs
        .iter()
        .map(|x| (total.value(x).as_real().unwrap_or(f64::NAN) - g.dim_m() as f64).abs())
        .fold(0.0, f64::max);
    report.push(s.entry("tangent.frame_trace", tr, n));
    if g.kind() == GroupKind::Su2 {
        let br = bracket_residual(&g, &xs[..heavy], &mut s.rng)?;
        report.push(s.entry("tangent.bracket", br, heavy));
    }

    // connections
    let conn = s.tangent.clone();
    let gamma = conn.tangent_gamma();
    report.push(s.entry(
        "connection.gamma_equivariance",
        tangent_equivariance_residual(&g, &gamma),
        1,
    ));
    let skew = gamma.iter().map(|m| (m + m.transpose()).norm()).fold(0.0, f64::max);
    report.push(s.entry("connection.metric_compatibility", skew, 1));

    let v = random_tangent_section(&g, band, &mut s.rng)?;
    let a = random_tangent_section(&g, band, &mut s.rng)?;
    let c = random_tangent_section(&g, band, &mut s.rng)?;
    let hx = &xs[..heavy];
    let mut leibniz = leibniz_defect(&conn, &v, &a, &c, hx)?;
    if conn.is_compatible() {
        let phi = random_spinor(&g, band, &mut s.rng)?;
        let psi = random_spinor(&g, band, &mut s.rng)?;
        leibniz = leibniz.max(leibniz_defect(&conn, &v, &phi, &psi, hx)?);
    }
    let bconn = s.bundle_connection.clone().unwrap_or_else(|| Connection::canonical(&g));
    let (e1, e2) = (b.random_section(band, &mut s.rng)?, b.random_section(band, &mut s.rng)?);
    leibniz = leibniz.max(leibniz_defect(&bconn, &v, &e1, &e2, hx)?);
    report.push(s.entry("connection.leibniz", leibniz, heavy));

    let y = g.sample_haar(&mut s.rng)?;
    let mut inv: f64 = 0.0;
    for (cn, target) in [(&conn, &a), (&bconn, &e1)] {
        let lhs = apply_connection(cn, &v, target)?.translate(&y);
        let rhs = apply_connection(cn, &v.translate(&y), &target.translate(&y))?;
        inv = inv.max(max_diff(&lhs, &rhs, hx));
    }
    report.push(s.entry("connection.invariance", inv, heavy));

    let tor = torsion(&conn, &frame, &a, &c)?;
    let mut formula: f64 = 0.0;
    for x in hx {
        let (av, cv) = (a.value(x), c.value(x));
        let want = torsion_oracle(
            &g,
            &gamma,
            av.as_tangent().expect("tangent"),
            cv.as_tangent().expect("tangent"),
        );
        let got = tor.value(x);
        formula = formula.max((got.as_tangent().expect("torsion is tangent") - want).norm());
    }
    report.push(s.entry("connection.torsion_formula", formula, heavy));
    if s.cfg.connection == ConnectionChoice::LeviCivita {
        let mut free = max_norm(&tor, hx);
        for f1 in &fields {
            for f2 in &fields {
                free = free.max(max_norm(&torsion(&conn, &frame, f1, f2)?, hx));
            }
        }
        report.push(s.entry("connection.torsion_free", free, heavy));
    }
    Ok(())
}

fn dirac_suite(s: &mut Setup, report: &mut Report) -> Result<()> {
    let g = s.group.clone();
    let conn = s.tangent.clone();
    if s.bundle_connection.is_some() {
        log::warn!("the gamma file targets the bundle; the Dirac suite uses the canonical connection");
    }
    if !conn.is_compatible() {
        log::warn!("connection is not metric; Dirac checks skipped");
        let skew = conn
            .tangent_gamma()
            .iter()
            .map(|m| (m + m.transpose()).norm())
            .fold(0.0, f64::max);
        report.push(s.entry("connection.metric_compatibility", skew, 1));
        return Ok(());
    }
    let heavy = s.cfg.sample_count.min(HEAVY_SAMPLES);
    let xs = s.samples(heavy)?;
    let band = s.band();
    let integer = s.integer_only();
    let frame = Arc::new(Frame::standard(&g));

    let mut prop: f64 = 0.0;
    for _ in 0..3 {
        let f = random_function(&g, band, integer, &mut s.rng)?.equivariant_project(KAction::Invariant)?;
        let phi = random_spinor(&g, band, &mut s.rng)?;
        prop = prop.max(commutator_defect(&conn, &frame, &f, &phi, &xs)?);
    }
    report.push(s.entry("dirac.commutator_identity", prop, 3 * heavy));

    let other = Arc::new(Frame::random(&g, &mut s.rng));
    let y = g.sample_haar(&mut s.rng)?;
    let (mut fi, mut tc) = (0.0f64, 0.0f64);
    for _ in 0..4 {
        let phi = random_spinor(&g, band, &mut s.rng)?;
        let d = hodge_dirac(&conn, &frame, &phi)?;
        fi = fi.max(max_diff(&d, &hodge_dirac(&conn, &other, &phi)?, &xs));
        let moved = hodge_dirac(&conn, &frame, &phi.translate(&y))?;
        tc = tc.max(max_diff(&moved, &d.translate(&y), &xs));
    }
    report.push(s.entry("dirac.frame_independence", fi, 4 * heavy));
    report.push(s.entry("dirac.translation_commutation", tc, 4 * heavy));

    let crit_tol = s.tol("dirac.criterion");
    let crit = criterion_check(&conn, &frame, &xs, crit_tol)?;
    let mut entry = s.entry(
        "dirac.criterion",
        crit.torsion_trace_max.max(crit.self_action_residual),
        heavy,
    );
    entry.pass = crit.verdict;
    report.push(entry);

    if g.kind() == GroupKind::Su2 {
        let rule = space_rule(&g, s.cfg.quadrature_bandwidth, None)?;
        let pairs = spinor_test_pairs(&g, SPINOR_PAIRS, band, &mut s.rng)?;
        let defect = selfadjoint_defect(&conn, &frame, &pairs, &rule)?;
        report.push(s.entry("dirac.selfadjoint_defect", defect, pairs.len()));
    } else {
        log::warn!("no exact quadrature for {}; self-adjointness defect skipped", g.name());
    }
    Ok(())
}

fn empty_report(command: &str, cfg: &RunConfig, group: &GroupModel) -> Report {
    Report {
        command: command.to_string(),
        group: group.name().to_string(),
        bundle: cfg.bundle.to_string(),
        connection: cfg.connection.to_string(),
        seed: cfg.seed,
        pass: true,
        checks: Vec::new(),
    }
}

/// Runs the requested suites.
pub fn run_verify(cfg: &RunConfig, suite: Suite) -> Result<Report> {
    let mut s = Setup::new(cfg)?;
    let command = match suite {
        Suite::Geometry => "verify geometry",
        Suite::Dirac => "verify dirac",
        Suite::All => "verify all",
    };
    let mut report = empty_report(command, cfg, &s.group);
    if matches!(suite, Suite::Geometry | Suite::All) {
        geometry_suite(&mut s, &mut report)?;
    }
    if matches!(suite, Suite::Dirac | Suite::All) {
        dirac_suite(&mut s, &mut report)?;
    }
    Ok(report)
}

/// Spectral blocks for spins up to `cfg.levels`.
pub fn run_spectrum(cfg: &RunConfig) -> Result<(String, Vec<SpectralBlock>)> {
    let s = Setup::new(cfg)?;
    if s.group.kind() != GroupKind::Su2 {
        return Err(Error::UnsupportedGroup(format!(
            "spectra need the SU(2) catalog, got {}",
            s.group.name()
        )));
    }
    let frame = Arc::new(Frame::standard(&s.group));
    let rule = space_rule(&s.group, cfg.quadrature_bandwidth, None)?;
    let blocks = spectrum(&s.tangent, &frame, cfg.levels, &rule)?;
    Ok((spectrum_csv(&blocks), blocks))
}

fn push_matrix(row: &mut Vec<String>, m: &DMatrix<C64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            row.push(format!("{:.15e}", m[(i, j)].re));
            row.push(format!("{:.15e}", m[(i, j)].im));
        }
    }
}

/// One CSV row per sample: Euler angles, then p(x) and the frame Gram
/// matrix, row-major with real and imaginary parts interleaved.
pub fn run_monopole(cfg: &RunConfig) -> Result<String> {
    let mut s = Setup::new(cfg)?;
    if !matches!(cfg.bundle, BundleChoice::Monopole { .. }) || s.group.kind() != GroupKind::Su2 {
        return Err(Error::Config("monopole needs bundle = monopole(n) over su2".into()));
    }
    let proj = s.bundle.projection_section()?;
    let gram = s.bundle.frame_gram()?;
    let n = s.bundle.pi_tilde().dim();
    let mut header = vec!["alpha".to_string(), "beta".into(), "gamma".into()];
    for name in ["p", "gram"] {
        for i in 0..n {
            for j in 0..n {
                header.push(format!("{name}_{i}_{j}_re"));
                header.push(format!("{name}_{i}_{j}_im"));
            }
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    let tau = std::f64::consts::TAU;
    for _ in 0..cfg.sample_count {
        let alpha = s.rng.gen::<f64>() * tau;
        let beta = (1.0 - 2.0 * s.rng.gen::<f64>()).acos();
        let gamma = s.rng.gen::<f64>() * 2.0 * tau;
        let x = su2_euler(alpha, beta, gamma);
        let mut row = vec![format!("{alpha:.15e}"), format!("{beta:.15e}"), format!("{gamma:.15e}")];
        push_matrix(&mut row, proj.value(&x).as_operator().expect("operator"));
        push_matrix(&mut row, gram.value(&x).as_operator().expect("operator"));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    #[test]
    fn sphere_canonical_passes_everything() {
        let r = run_verify(&cfg("connection = canonical\nsample_count = 12\n"), Suite::All).unwrap();
        let failed: Vec<_> = r.failures().map(|e| e.check.clone()).collect();
        assert!(r.pass, "{failed:?}");
        assert!(r.checks.len() > 15);
    }

    #[test]
    fn monopole_rows() {
        let csv = run_monopole(&cfg("bundle = monopole(1)\nsample_count = 3\n")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        // 3 angles + two 2×2 complex matrices
        assert_eq!(lines[1].split(',').count(), 3 + 2 * 8);
    }
}
