//! Numerical range and quadratic numerical range sampling.
//!
//! The numerical range of the energy block is handled through its support
//! function on an angle grid, which turns membership into finitely many
//! half-plane tests. The quadratic numerical range is sampled through the
//! 2x2 compressions
//!
//!   A_{f,g} = [ 0,                <Sg,Sf>/(|Sf| |g|) ;
//!              -<Sf,Sg>/(|Sf| |g|), -<Dg,g>/|g|^2     ]
//!
//! whose eigenvalues solve the quadratic lambda^2 + b lambda + c = 0 with
//! b = <Dg,g>/|g|^2 and c = |<Sf,Sg>|^2/(|Sf|^2 |g|^2). Sampling
//! strategies: random Gaussian pairs, deterministic axis pairs (basis
//! vectors, orthogonal partners, and eigenvectors of the Hermitian damping
//! part), and boundary pushing by direction-wise optimization.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::linalg::{self, DenseMatrix};
use crate::model::ModelPair;
use crate::{Error, Result};

const SALT_RANDOM: u64 = 0x5157_4E52_5341_4D50;
const SALT_BOUNDARY: u64 = 0x424E_4452_5059_4F50;

const BOUNDARY_DIRECTIONS: usize = 64;
const BOUNDARY_RESTARTS: usize = 20;
const BOUNDARY_ITERS: usize = 500;
const BOUNDARY_TOL: f64 = 1e-9;

/// SplitMix64 generator; deterministic, cheap to seed per sample index so
/// parallel draws stay order-independent.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    cached_gaussian: Option<f64>,
}

/// SplitMix64 finalizer, used on its own to derive decorrelated stream
/// seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed, cached_gaussian: None }
    }

    /// Independent stream for sample `index` under a fixed base seed.
    pub fn stream(seed: u64, index: u64, salt: u64) -> Self {
        Self::new(mix64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller; generates two at a time.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(g) = self.cached_gaussian.take() {
            return g;
        }
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * u2;
        self.cached_gaussian = Some(r * phi.sin());
        r * phi.cos()
    }
}

/// One QNR sample: the normalized vector pair and the two labeled roots.
/// `lambda1` has the larger real part, ties broken by larger imaginary
/// part.
#[derive(Debug, Clone)]
pub struct QnrSample {
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
}

impl QnrSample {
    pub fn roots(&self) -> [Complex64; 2] {
        [self.lambda1, self.lambda2]
    }
}

/// How sample_qnr picks its vector pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleStrategy {
    Random,
    Axis,
    Boundary,
}

impl std::str::FromStr for SampleStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "axis" => Ok(Self::Axis),
            "boundary" => Ok(Self::Boundary),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy {other:?}, expected random, axis, or boundary"
            ))),
        }
    }
}

impl std::fmt::Display for SampleStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Self::Random => "random",
            Self::Axis => "axis",
            Self::Boundary => "boundary",
        };
        f.write_str(name)
    }
}

/// Support function of the energy-block numerical range on an ascending
/// angle grid over [0, 2pi).
#[derive(Debug, Clone)]
pub struct SupportFunction {
    angles: Vec<f64>,
    values: Vec<f64>,
}

impl SupportFunction {
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

fn scaled_norms(model: &ModelPair, f: &[Complex64], g: &[Complex64]) -> Result<(f64, f64)> {
    let n = model.dim();
    if f.len() != n || g.len() != n {
        return Err(Error::InvalidParameter(format!(
            "vector length mismatch: model dimension {n}, got {} and {}",
            f.len(),
            g.len()
        )));
    }
    let sf = model.sqrt_a0().matvec(f);
    let nf = linalg::norm2(&sf);
    let ng = linalg::norm2(g);
    if nf <= 0.0 || ng <= 0.0 || !nf.is_finite() || !ng.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok((nf, ng))
}

/// The 2x2 compression A_{f,g}. Rejects zero vectors; any nonzero scaling
/// of f or g yields the same matrix.
pub fn qnr_matrix(model: &ModelPair, f: &[Complex64], g: &[Complex64]) -> Result<DenseMatrix> {
    let (nf, ng) = scaled_norms(model, f, g)?;
    let s = model.sqrt_a0();
    let sf = s.matvec(f);
    let sg = s.matvec(g);
    let dg = model.damping().matvec(g);
    let top = linalg::dot(&sg, &sf) / (nf * ng);
    let bottom_left = -linalg::dot(&sf, &sg) / (nf * ng);
    let diag = -linalg::dot(&dg, g) / (ng * ng);
    DenseMatrix::from_rows(&[vec![Complex64::new(0.0, 0.0), top], vec![bottom_left, diag]])
}

fn quadratic_roots(b: Complex64, c: f64) -> (Complex64, Complex64) {
    let disc = (b * b - 4.0 * c).sqrt();
    let disc = if (b.conj() * disc).re < 0.0 { -disc } else { disc };
    let q = -(b + disc) / 2.0;
    let r1 = q;
    let r2 = if q.norm() > 0.0 { Complex64::new(c, 0.0) / q } else { Complex64::new(0.0, 0.0) };
    order_roots(r1, r2)
}

fn order_roots(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    if (a.re, a.im) >= (b.re, b.im) {
        (a, b)
    } else {
        (b, a)
    }
}

/// The two eigenvalues of A_{f,g}, from the quadratic
/// lambda^2 + lambda <Dg,g>/|g|^2 + |<Sf,Sg>|^2/(|Sf|^2 |g|^2) = 0, using
/// the numerically stable branch (larger root first, partner from the root
/// product).
pub fn qnr_roots(model: &ModelPair, f: &[Complex64], g: &[Complex64]) -> Result<(Complex64, Complex64)> {
    let (nf, ng) = scaled_norms(model, f, g)?;
    let s = model.sqrt_a0();
    let sf = s.matvec(f);
    let sg = s.matvec(g);
    let dg = model.damping().matvec(g);
    let b = linalg::dot(&dg, g) / (ng * ng);
    let coupling = linalg::dot(&sf, &sg).norm() / (nf * ng);
    Ok(quadratic_roots(b, coupling * coupling))
}

/// Worst residual of the sample's roots in its own quadratic, relative to
/// (1 + |lambda|^2) times the input magnitude.
pub fn qnr_residual(model: &ModelPair, sample: &QnrSample) -> Result<f64> {
    let (nf, ng) = scaled_norms(model, &sample.f, &sample.g)?;
    let s = model.sqrt_a0();
    let sf = s.matvec(&sample.f);
    let sg = s.matvec(&sample.g);
    let dg = model.damping().matvec(&sample.g);
    let b = linalg::dot(&dg, &sample.g) / (ng * ng);
    let coupling = linalg::dot(&sf, &sg).norm() / (nf * ng);
    let c = coupling * coupling;
    let scale = model.a0().max_abs().max(model.damping().max_abs()).max(1.0);
    let mut worst = 0.0f64;
    for lambda in sample.roots() {
        let delta = lambda * lambda + b * lambda + c;
        worst = worst.max(delta.norm() / ((1.0 + lambda.norm_sqr()) * scale));
    }
    Ok(worst)
}

fn make_sample(model: &ModelPair, f: Vec<Complex64>, g: Vec<Complex64>) -> Result<QnrSample> {
    let (nf, ng) = scaled_norms(model, &f, &g)?;
    let f: Vec<Complex64> = f.into_iter().map(|z| z / nf).collect();
    let g: Vec<Complex64> = g.into_iter().map(|z| z / ng).collect();
    let (lambda1, lambda2) = qnr_roots(model, &f, &g)?;
    Ok(QnrSample { f, g, lambda1, lambda2 })
}

fn gaussian_vector(n: usize, rng: &mut SplitMix64) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.next_gaussian(), rng.next_gaussian())).collect()
}

fn random_pair(model: &ModelPair, rng: &mut SplitMix64) -> Result<QnrSample> {
    let n = model.dim();
    loop {
        let f = gaussian_vector(n, rng);
        let g = gaussian_vector(n, rng);
        match make_sample(model, f, g) {
            Ok(sample) => return Ok(sample),
            Err(Error::ZeroVector) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// First basis vector orthogonalized against `v` in the H_{1/2} inner
/// product; `None` when the space is one-dimensional.
fn orthogonal_partner(model: &ModelPair, v: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = model.dim();
    if n < 2 {
        return None;
    }
    let s = model.sqrt_a0();
    let sv = s.matvec(v);
    let denom = linalg::dot(&sv, &sv).re;
    for m in 0..n {
        let mut e: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
        e[m] = Complex64::new(1.0, 0.0);
        let se = s.matvec(&e);
        let coeff = linalg::dot(&se, &sv) / denom;
        for (ei, vi) in e.iter_mut().zip(v.iter()) {
            *ei -= coeff * vi;
        }
        if linalg::norm2(&e) > 1e-8 {
            return Some(e);
        }
    }
    None
}

fn axis_samples(model: &ModelPair) -> Result<Vec<QnrSample>> {
    let n = model.dim();
    let basis = |j: usize| {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        e
    };
    let mut samples = Vec::new();
    for j in 0..n {
        for k in 0..n {
            samples.push(make_sample(model, basis(j), basis(k))?);
        }
    }
    for j in 0..n {
        if let Some(f) = orthogonal_partner(model, &basis(j)) {
            samples.push(make_sample(model, f, basis(j))?);
        }
    }
    let r = model.damping().hermitian_part();
    let eig = linalg::hermitian_eig(&r, true)?;
    let vectors = eig.vectors.expect("vectors requested");
    for j in 0..n {
        let v = vectors.col(j);
        samples.push(make_sample(model, v.clone(), v.clone())?);
        if let Some(f) = orthogonal_partner(model, &v) {
            samples.push(make_sample(model, f, v)?);
        }
    }
    Ok(samples)
}

struct DirectionObjective<'a> {
    model: &'a ModelPair,
    direction: Complex64,
}

impl DirectionObjective<'_> {
    /// Negated support of the sample roots along the direction; large
    /// penalty for degenerate vectors keeps the optimizer on the sphere.
    fn eval(&self, x: &[f64]) -> f64 {
        let n = self.model.dim();
        let f: Vec<Complex64> = (0..n).map(|i| Complex64::new(x[2 * i], x[2 * i + 1])).collect();
        let g: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(x[2 * n + 2 * i], x[2 * n + 2 * i + 1])).collect();
        match qnr_roots(self.model, &f, &g) {
            Ok((l1, l2)) => {
                let v1 = (self.direction * l1).re;
                let v2 = (self.direction * l2).re;
                -v1.max(v2)
            }
            Err(_) => 1e30,
        }
    }
}

/// Derivative-free simplex minimizer; returns the best vertex found.
pub(crate) fn nelder_mead(
    objective: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> Vec<f64> {
    let d = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    simplex.push(x0.to_vec());
    for i in 0..d {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| objective(v)).collect();
    for _ in 0..max_iters {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let best = order[0];
        let worst = order[d];
        let second_worst = order[d - 1];
        if (values[worst] - values[best]).abs() <= tol * (1.0 + values[best].abs()) {
            break;
        }
        let mut centroid = vec![0.0; d];
        for &i in order.iter().take(d) {
            for (c, x) in centroid.iter_mut().zip(simplex[i].iter()) {
                *c += x / d as f64;
            }
        }
        let point = |factor: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(simplex[worst].iter())
                .map(|(&c, &w)| c + factor * (c - w))
                .collect()
        };
        let reflected = point(1.0);
        let fr = objective(&reflected);
        if fr < values[best] {
            let expanded = point(2.0);
            let fe = objective(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = point(-0.5);
            let fc = objective(&contracted);
            if fc < values[worst] {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                let best_point = simplex[best].clone();
                for i in 0..=d {
                    if i == best {
                        continue;
                    }
                    for (x, b) in simplex[i].iter_mut().zip(best_point.iter()) {
                        *x = b + 0.5 * (*x - b);
                    }
                    values[i] = objective(&simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }
    simplex.swap_remove(best)
}

fn boundary_samples(model: &ModelPair, seed: u64) -> Result<Vec<QnrSample>> {
    let n = model.dim();
    (0..BOUNDARY_DIRECTIONS)
        .into_par_iter()
        .map(|dir| -> Result<QnrSample> {
            let theta = 2.0 * std::f64::consts::PI * dir as f64 / BOUNDARY_DIRECTIONS as f64;
            let direction = Complex64::new(0.0, -theta).exp();
            let objective = DirectionObjective { model, direction };
            let mut best_value = f64::INFINITY;
            let mut best_x: Option<Vec<f64>> = None;
            for restart in 0..BOUNDARY_RESTARTS {
                let mut rng = SplitMix64::stream(
                    seed,
                    (dir * BOUNDARY_RESTARTS + restart) as u64,
                    SALT_BOUNDARY,
                );
                let x0: Vec<f64> = (0..4 * n).map(|_| rng.next_gaussian()).collect();
                let x = nelder_mead(|x| objective.eval(x), &x0, 0.5, BOUNDARY_ITERS, BOUNDARY_TOL);
                let value = objective.eval(&x);
                if value < best_value {
                    best_value = value;
                    best_x = Some(x);
                }
            }
            let x = best_x.expect("at least one restart");
            let f: Vec<Complex64> =
                (0..n).map(|i| Complex64::new(x[2 * i], x[2 * i + 1])).collect();
            let g: Vec<Complex64> =
                (0..n).map(|i| Complex64::new(x[2 * n + 2 * i], x[2 * n + 2 * i + 1])).collect();
            make_sample(model, f, g)
        })
        .collect()
}

/// Draws QNR samples. `count` controls the random strategy; the axis and
/// boundary strategies emit their fixed deterministic sets (basis and
/// eigenvector pairs, one optimized sample per boundary direction) and
/// ignore it. All strategies are deterministic in `seed`.
pub fn sample_qnr(
    model: &ModelPair,
    strategy: SampleStrategy,
    count: usize,
    seed: u64,
) -> Result<Vec<QnrSample>> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    match strategy {
        SampleStrategy::Random => (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = SplitMix64::stream(seed, i as u64, SALT_RANDOM);
                random_pair(model, &mut rng)
            })
            .collect(),
        SampleStrategy::Axis => axis_samples(model),
        SampleStrategy::Boundary => boundary_samples(model, seed),
    }
}

/// Support function s(theta) = lambda_max of the Hermitian part of
/// e^{-i theta} times the energy block, on `grid_size` equispaced angles.
pub fn nr_support(model: &ModelPair, grid_size: usize) -> Result<SupportFunction> {
    if grid_size < 8 {
        return Err(Error::InvalidParameter(format!(
            "support grid needs at least 8 angles, got {grid_size}"
        )));
    }
    let energy = model.to_energy();
    let a = energy.matrix();
    let h_r = a.hermitian_part();
    let h_i = a.skew_part_rotated().scale(Complex64::new(-1.0, 0.0));
    let angles: Vec<f64> =
        (0..grid_size).map(|i| 2.0 * std::f64::consts::PI * i as f64 / grid_size as f64).collect();
    let values: Vec<f64> = angles
        .par_iter()
        .map(|&theta| -> Result<f64> {
            let h = h_r
                .scale(Complex64::new(theta.cos(), 0.0))
                .add(&h_i.scale(Complex64::new(theta.sin(), 0.0)))?;
            let eig = linalg::hermitian_eig(&h, false)?;
            Ok(eig.real_values().last().copied().unwrap_or(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SupportFunction { angles, values })
}

/// Convex membership test: lambda is in the numerical range iff its support
/// along every grid angle stays below s(theta), inflated by `tol`.
pub fn nr_contains(support: &SupportFunction, lambda: Complex64, tol: f64) -> bool {
    support
        .angles
        .iter()
        .zip(support.values.iter())
        .all(|(&theta, &s)| (Complex64::new(0.0, -theta).exp() * lambda).re <= s + tol)
}

/// CSV dump of sample roots, columns re1,im1,re2,im2, 17 significant
/// digits.
pub fn samples_csv(samples: &[QnrSample]) -> String {
    let mut out = String::from("re1,im1,re2,im2\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            crate::fmt_f64(s.lambda1.re),
            crate::fmt_f64(s.lambda1.im),
            crate::fmt_f64(s.lambda2.re),
            crate::fmt_f64(s.lambda2.im),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis(n: usize, j: usize) -> Vec<Complex64> {
        let mut e = vec![c64(0.0, 0.0); n];
        e[j] = c64(1.0, 0.0);
        e
    }

    #[test]
    fn splitmix_reference_sequence() {
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn gaussian_moments_plausible() {
        let mut rng = SplitMix64::new(7);
        let n = 20_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let g = rng.next_gaussian();
            sum += g;
            sum2 += g * g;
        }
        assert!((sum / n as f64).abs() < 0.03);
        assert!((sum2 / n as f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn qnr_matrix_hand_example() {
        let m = ModelPair::new(
            DenseMatrix::diag_real(&[1.0, 4.0]),
            DenseMatrix::identity(2),
        )
        .unwrap();
        let a = qnr_matrix(&m, &basis(2, 0), &basis(2, 1)).unwrap();
        assert!(a[(0, 0)].norm() < 1e-14);
        assert!(a[(0, 1)].norm() < 1e-14);
        assert!(a[(1, 0)].norm() < 1e-14);
        assert!((a[(1, 1)] - c64(-1.0, 0.0)).norm() < 1e-14);
        let (l1, l2) = qnr_roots(&m, &basis(2, 0), &basis(2, 1)).unwrap();
        assert!(l1.norm() < 1e-14);
        assert!((l2 - c64(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn qnr_rejects_zero_vectors() {
        let m = model::build_diag_example(2).unwrap();
        let zero = vec![c64(0.0, 0.0); 2];
        assert!(matches!(qnr_matrix(&m, &zero, &basis(2, 0)), Err(Error::ZeroVector)));
        assert!(matches!(qnr_roots(&m, &basis(2, 0), &zero), Err(Error::ZeroVector)));
    }

    #[test]
    fn qnr_roots_double_and_imaginary() {
        let m = ModelPair::new(
            DenseMatrix::identity(2),
            DenseMatrix::identity(2).scale(c64(2.0, 0.0)),
        )
        .unwrap();
        let (l1, l2) = qnr_roots(&m, &basis(2, 0), &basis(2, 0)).unwrap();
        assert!((l1 - c64(-1.0, 0.0)).norm() < 1e-12);
        assert!((l2 - c64(-1.0, 0.0)).norm() < 1e-12);

        let undamped =
            ModelPair::new(DenseMatrix::identity(2), DenseMatrix::zeros(2, 2)).unwrap();
        let (l1, l2) = qnr_roots(&undamped, &basis(2, 0), &basis(2, 0)).unwrap();
        assert!((l1 - c64(0.0, 1.0)).norm() < 1e-14);
        assert!((l2 - c64(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn qnr_roots_match_compression_eigenvalues() {
        let m = model::build_pipe(4, 25.0, 1.0, 14.0).unwrap();
        for i in 0..1000u64 {
            let mut rng = SplitMix64::stream(11, i, SALT_RANDOM);
            let f = gaussian_vector(4, &mut rng);
            let g = gaussian_vector(4, &mut rng);
            let (l1, l2) = qnr_roots(&m, &f, &g).unwrap();
            let a = qnr_matrix(&m, &f, &g).unwrap();
            let eig = linalg::general_eig(&a, false).unwrap();
            let scale = a.max_abs().max(1.0);
            let d1 = (eig.values[0] - l1).norm().min((eig.values[0] - l2).norm());
            let d2 = (eig.values[1] - l1).norm().min((eig.values[1] - l2).norm());
            assert!(d1.max(d2) < 1e-10 * scale, "sample {i}: {d1} {d2}");
        }
    }

    #[test]
    fn axis_strategy_contains_diagonal_pairs() {
        let m = model::build_pipe(4, 25.0, 1.0, 14.0).unwrap();
        let samples = sample_qnr(&m, SampleStrategy::Axis, 1, 1).unwrap();
        let d = m.damping();
        for j in 0..4 {
            let want = -d[(j, j)];
            let hit = samples.iter().any(|s| {
                s.lambda1.norm() < 1e-10 * d.max_abs()
                    && (s.lambda2 - want).norm() < 1e-10 * d.max_abs()
            });
            assert!(hit, "no diagonal-inclusion sample for mode {j}");
        }
    }

    #[test]
    fn axis_strategy_reaches_minus_gamma() {
        let m = model::build_pipe(4, 25.0, 1.0, 14.0).unwrap();
        let r = m.damping().hermitian_part();
        let gamma_n = linalg::hermitian_eig(&r, false)
            .unwrap()
            .real_values()
            .last()
            .copied()
            .unwrap();
        let samples = sample_qnr(&m, SampleStrategy::Axis, 1, 1).unwrap();
        let min_re = samples
            .iter()
            .flat_map(|s| s.roots())
            .map(|l| l.re)
            .fold(f64::INFINITY, f64::min);
        assert!((min_re + gamma_n).abs() < 1e-8 * gamma_n.max(1.0));
        for s in &samples {
            for l in s.roots() {
                assert!(l.re >= -gamma_n - 1e-8 * gamma_n.max(1.0));
            }
        }
    }

    #[test]
    fn random_samples_deterministic_and_left() {
        let m = model::build_diag_example(2).unwrap();
        let a = sample_qnr(&m, SampleStrategy::Random, 1000, 42).unwrap();
        let b = sample_qnr(&m, SampleStrategy::Random, 1000, 42).unwrap();
        let c = sample_qnr(&m, SampleStrategy::Random, 1000, 43).unwrap();
        assert_eq!(a.len(), 1000);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.lambda1, y.lambda1);
            assert_eq!(x.lambda2, y.lambda2);
        }
        assert!(a.iter().zip(c.iter()).any(|(x, y)| x.lambda1 != y.lambda1));
        for s in &a {
            assert!(s.lambda1.re <= 1e-9);
            assert!(s.lambda2.re <= 1e-9);
        }
    }

    #[test]
    fn random_sample_residuals_small() {
        let m = model::build_pipe(4, 25.0, 1.0, 14.0).unwrap();
        let samples = sample_qnr(&m, SampleStrategy::Random, 500, 5).unwrap();
        for s in &samples {
            assert!(qnr_residual(&m, s).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn boundary_strategy_deterministic_valid() {
        let m = model::build_pipe(2, 25.0, 1.0, 14.0).unwrap();
        let a = sample_qnr(&m, SampleStrategy::Boundary, 1, 9).unwrap();
        let b = sample_qnr(&m, SampleStrategy::Boundary, 1, 9).unwrap();
        assert_eq!(a.len(), BOUNDARY_DIRECTIONS);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.lambda1, y.lambda1);
        }
        for s in &a {
            assert!(qnr_residual(&m, s).unwrap() <= 1e-10);
            assert!(s.lambda1.re <= 1e-9);
        }
    }

    #[test]
    fn support_function_undamped_identity() {
        let m = ModelPair::new(DenseMatrix::identity(3), DenseMatrix::zeros(3, 3)).unwrap();
        let support = nr_support(&m, 16).unwrap();
        for (theta, s) in support.angles().iter().zip(support.values()) {
            assert!((s - theta.sin().abs()).abs() < 1e-9, "s({theta}) = {s}");
        }
    }

    #[test]
    fn support_function_extremes() {
        let m = model::build_pipe(3, 25.0, 2.0, 14.0).unwrap();
        let support = nr_support(&m, 8).unwrap();
        assert!(support.values()[0] <= 1e-9);
        let r = m.damping().hermitian_part();
        let gamma_n = linalg::hermitian_eig(&r, false)
            .unwrap()
            .real_values()
            .last()
            .copied()
            .unwrap();
        let s_pi = support.values()[4];
        assert!((s_pi - gamma_n).abs() < 1e-8 * gamma_n.max(1.0));
    }

    #[test]
    fn diag_example_range_grows_like_sqrt_n() {
        for m_half in [1usize, 2, 3] {
            let n = 2 * m_half + 1;
            let model = model::build_diag_example(n).unwrap();
            let support = nr_support(&model, 8).unwrap();
            let s_half_pi = support.values()[2];
            assert!(s_half_pi >= (n as f64).sqrt() - 1e-6);
        }
    }

    #[test]
    fn nr_contains_basic_points() {
        let m = model::build_pipe(3, 25.0, 1.0, 14.0).unwrap();
        let support = nr_support(&m, 64).unwrap();
        assert!(nr_contains(&support, c64(0.0, 0.0), 1e-8));
        assert!(!nr_contains(&support, c64(1.0, 0.0), 1e-8));
    }

    #[test]
    fn qnr_samples_inside_numerical_range() {
        let m = model::build_pipe(8, 25.0, 1.0, 14.0).unwrap();
        let support = nr_support(&m, 180).unwrap();
        let tol = 1e-8 * m.to_energy().matrix().max_abs();
        let samples = sample_qnr(&m, SampleStrategy::Random, 500, 3).unwrap();
        for s in &samples {
            for l in s.roots() {
                assert!(nr_contains(&support, l, tol), "{l} escaped the numerical range");
            }
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let m = model::build_diag_example(2).unwrap();
        let samples = sample_qnr(&m, SampleStrategy::Random, 3, 1).unwrap();
        let csv = samples_csv(&samples);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "re1,im1,re2,im2");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1].split(',').count(), 4);
    }
}
