//! Quadratic eigenvalue solve and eigenvalue-against-enclosure
//! verification.
//!
//! Eigenvalues come from the 2n x 2n energy block; its spectrum equals the
//! spectrum of the quadratic pencil lambda^2 + lambda D + A0. Verification
//! treats violations as data: a verdict records how far the worst
//! eigenvalue sits outside each region, and gap findings record whether
//! any eigenvalue real part lands inside a predicted spectral-free strip.

use num_complex::Complex64;

use crate::enclosures::EnclosureRegion;
use crate::linalg::{self, DenseMatrix};
use crate::model::ModelPair;
use crate::Result;

/// Verification outcome for one region.
#[derive(Debug, Clone)]
pub struct RegionVerdict {
    pub label: String,
    pub violations: usize,
    /// Smallest membership slack that admits the worst eigenvalue.
    pub worst_slack: f64,
    pub worst_eigenvalue: Option<Complex64>,
    pub passed: bool,
}

/// Whether a predicted spectral-free strip is actually clean.
#[derive(Debug, Clone)]
pub struct GapFinding {
    pub label: String,
    pub interval: Option<(f64, f64)>,
    pub clean: bool,
}

/// Eigenvalues of one model plus everything computed about them.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    /// Relative QEP residuals, present when eigenvectors were computed.
    pub residuals: Option<Vec<f64>>,
    /// maxabs of the energy block; all tolerances scale with it.
    pub scale: f64,
    pub verdicts: Vec<RegionVerdict>,
    pub gap_findings: Vec<GapFinding>,
}

/// A region plus the name it is reported under, so the same kind can be
/// verified once with computed constants and once with analytic ones.
#[derive(Debug, Clone)]
pub struct LabeledRegion {
    pub label: String,
    pub region: EnclosureRegion,
}

fn energy_eig(model: &ModelPair, want_vectors: bool) -> Result<(Vec<Complex64>, Option<DenseMatrix>, f64)> {
    let energy = model.to_energy();
    let scale = energy.matrix().max_abs();
    let eig = linalg::general_eig(energy.matrix(), want_vectors)?;
    if cfg!(debug_assertions) {
        companion_cross_check(model, &eig.values, scale)?;
    }
    Ok((eig.values, eig.vectors, scale))
}

/// Debug guard: the companion linearization must produce the same
/// eigenvalue multiset as the energy block. Matching is by nearest
/// neighbor with removal; sorted-index pairing would flap for conjugate
/// partners whose real parts agree to roundoff.
fn companion_cross_check(model: &ModelPair, values: &[Complex64], scale: f64) -> Result<()> {
    let companion = model.companion_block();
    let alt = linalg::general_eig(companion.matrix(), false)?;
    let tol = 1e-8 * scale.max(1.0);
    let mut pool = alt.values;
    for a in values {
        let best = pool
            .iter()
            .enumerate()
            .min_by(|(_, x), (_, y)| (a - *x).norm().total_cmp(&(a - *y).norm()))
            .map(|(j, b)| (j, (a - b).norm()));
        let Some((j, dist)) = best else {
            debug_assert!(false, "companion linearization ran out of eigenvalues");
            break;
        };
        debug_assert!(
            dist <= tol,
            "companion linearization disagrees at {a}: nearest match off by {dist:.3e} (tol {tol:.3e})"
        );
        pool.swap_remove(j);
    }
    Ok(())
}

/// Eigenvalues of the quadratic pencil, sorted by ascending (Re, Im).
pub fn solve_qep(model: &ModelPair) -> Result<SpectrumReport> {
    let (values, _, scale) = energy_eig(model, false)?;
    Ok(SpectrumReport {
        eigenvalues: values,
        residuals: None,
        scale,
        verdicts: Vec::new(),
        gap_findings: Vec::new(),
    })
}

/// Eigenvalues plus energy-coordinate eigenvectors (as matrix columns) and
/// per-eigenvalue QEP residuals.
pub fn solve_qep_with_vectors(model: &ModelPair) -> Result<(SpectrumReport, DenseMatrix)> {
    let (values, vectors, scale) = energy_eig(model, true)?;
    let vectors = vectors.expect("vectors requested");
    let n = model.dim();
    let a0_norm = model.a0().frobenius();
    let d_norm = model.damping().frobenius();
    let mut residuals = Vec::with_capacity(values.len());
    for (j, &lambda) in values.iter().enumerate() {
        let col = vectors.col(j);
        let z = model.sqrt_a0_inv().matvec(&col[..n]);
        let zn = linalg::norm2(&z);
        if zn <= 0.0 {
            residuals.push(f64::INFINITY);
            continue;
        }
        let dz = model.damping().matvec(&z);
        let az = model.a0().matvec(&z);
        let mut acc = 0.0f64;
        for i in 0..n {
            let r = lambda * lambda * z[i] + lambda * dz[i] + az[i];
            acc += r.norm_sqr();
        }
        let denom = zn * (lambda.norm_sqr() + lambda.norm() * d_norm + a0_norm);
        residuals.push(acc.sqrt() / denom.max(f64::MIN_POSITIVE));
    }
    let report = SpectrumReport {
        eigenvalues: values,
        residuals: Some(residuals),
        scale,
        verdicts: Vec::new(),
        gap_findings: Vec::new(),
    };
    Ok((report, vectors))
}

/// Smallest slack that makes the region accept lambda, by bisection; the
/// membership predicate is monotone in its slack.
fn needed_slack(region: &EnclosureRegion, lambda: Complex64, scale: f64) -> f64 {
    if region.membership(lambda) {
        return 0.0;
    }
    let mut lo = 0.0f64;
    let mut hi = 10.0 * (scale + lambda.norm() + 1.0);
    if !region.contains_with_tol(lambda, hi) {
        return hi;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if region.contains_with_tol(lambda, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Checks every eigenvalue against every region. Membership tolerance is
/// tol_rel times the energy-block maxabs, floored at 1e-12. Gap findings
/// are attached for every region that carries a spectral-free strip; the
/// wide strip does not qualify, eigenvalues may sit under its curved
/// bound.
pub fn verify_enclosures(
    model: &ModelPair,
    regions: &[LabeledRegion],
    tol_rel: f64,
) -> Result<SpectrumReport> {
    let mut report = solve_qep(model)?;
    let tol_abs = (tol_rel * report.scale).max(1e-12);
    for labeled in regions {
        let mut violations = 0usize;
        let mut worst_slack = 0.0f64;
        let mut worst_eigenvalue = None;
        for &lambda in &report.eigenvalues {
            let slack = needed_slack(&labeled.region, lambda, report.scale);
            if slack > worst_slack {
                worst_slack = slack;
                worst_eigenvalue = Some(lambda);
            }
            if !labeled.region.contains_with_tol(lambda, tol_abs) {
                violations += 1;
            }
        }
        report.verdicts.push(RegionVerdict {
            label: labeled.label.clone(),
            violations,
            worst_slack,
            worst_eigenvalue,
            passed: violations == 0,
        });
        if let Some(interval) = labeled.region.derived().i0 {
            let clean = gap_check(&report, Some(interval));
            report.gap_findings.push(GapFinding {
                label: format!("{}:i0", labeled.label),
                interval: Some(interval),
                clean,
            });
        }
    }
    Ok(report)
}

/// True iff no eigenvalue's |Re| lies strictly inside the open interval.
/// Endpoints are shrunk slightly so eigenvalues sitting exactly on them do
/// not flap.
pub fn gap_check(report: &SpectrumReport, interval: Option<(f64, f64)>) -> bool {
    let Some((a, b)) = interval else {
        return true;
    };
    if !(a < b) {
        return true;
    }
    let shrink = |endpoint: f64| (1e-9 * endpoint.abs()).max(1e-10 * report.scale);
    let lo = a + shrink(a);
    let hi = b - shrink(b);
    report.eigenvalues.iter().all(|lambda| {
        let t = lambda.re.abs();
        !(t > lo && t < hi)
    })
}

/// True iff the eigenvalue multiset is symmetric under conjugation: greedy
/// pairing, each pair within tol, near-real eigenvalues may self-match.
pub fn symmetry_check(report: &SpectrumReport, tol: f64) -> bool {
    let mut pool: Vec<Complex64> = report.eigenvalues.clone();
    while let Some(v) = pool.pop() {
        let target = v.conj();
        let mut best: Option<(usize, f64)> = None;
        for (j, w) in pool.iter().enumerate() {
            let d = (w - target).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, d)) if d <= tol => {
                pool.swap_remove(j);
            }
            _ if v.im.abs() <= tol => {}
            _ => return false,
        }
    }
    true
}

/// Flags, per coarse eigenvalue, whether some fine eigenvalue sits within
/// tol. Used to report which modes have stabilized under refinement.
pub fn stabilized_against(coarse: &[Complex64], fine: &[Complex64], tol: f64) -> Vec<bool> {
    coarse
        .iter()
        .map(|c| fine.iter().any(|f| (f - c).norm() <= tol))
        .collect()
}

/// Distance from an eigenvalue to the nearest root of the 2x2 compression
/// seeded by its own eigenvector blocks (f = S^{-1} u, g = w), after a
/// short local polish. Small distance certifies the eigenvalue as a
/// quadratic-numerical-range point.
pub fn qnr_recovery_distance(
    model: &ModelPair,
    lambda: Complex64,
    eigenvector: &[Complex64],
) -> Result<f64> {
    let n = model.dim();
    let f = model.sqrt_a0_inv().matvec(&eigenvector[..n]);
    let g = eigenvector[n..].to_vec();
    let distance = |x: &[f64]| -> f64 {
        let fc: Vec<Complex64> = (0..n).map(|i| Complex64::new(x[2 * i], x[2 * i + 1])).collect();
        let gc: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(x[2 * n + 2 * i], x[2 * n + 2 * i + 1])).collect();
        match crate::ranges::qnr_roots(model, &fc, &gc) {
            Ok((l1, l2)) => (l1 - lambda).norm().min((l2 - lambda).norm()),
            Err(_) => f64::INFINITY,
        }
    };
    let mut x0 = Vec::with_capacity(4 * n);
    for z in f.iter().chain(g.iter()) {
        x0.push(z.re);
        x0.push(z.im);
    }
    let start = distance(&x0);
    if !start.is_finite() {
        return Ok(start);
    }
    let polished = crate::ranges::nelder_mead(|x| distance(x), &x0, 1e-3, 200, 1e-12);
    Ok(distance(&polished).min(start))
}
