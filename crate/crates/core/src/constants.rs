//! Damping constants of a model pair (A0, D): with R the Hermitian part of
//! D and S = A0^{1/2},
//!
//! * beta  = lambda_min(R)
//! * gamma = lambda_max(R), or the infinity marker for the continuum pipe
//! * delta = lambda_min(S^{-1} R S^{-1})
//! * mu    = min over unit z of (z^H R z) / (|z| |Sz|)
//! * a0    = sqrt(lambda_min(A0))
//! * k     = max |lambda| of the pencil N x = lambda R x with N the rotated
//!   skew part of D; 0 when N vanishes, infinite when R is singular while N
//!   is not
//!
//! Every enclosure region downstream is parameterized by these six numbers.

use num_complex::Complex64;

use crate::linalg::{self, DenseMatrix};
use crate::model::ModelPair;
use crate::ranges::SplitMix64;
use crate::{Error, Extended, Result};

/// Base seed for the multistart minimizer when the caller does not thread a
/// configured seed through.
pub const DEFAULT_SEED: u64 = 42;

const MU_RANDOM_STARTS: usize = 32;
const MU_MAX_ITERS: usize = 500;
const MU_F_TOL: f64 = 1e-11;

/// The six damping constants. `gamma` and `k` carry an infinity marker:
/// computed constants of a matrix model always have finite `gamma`, while
/// the analytic pipe constants do not; `k` is infinite when the Hermitian
/// part of the damping is singular but its skew part is not.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingConstants {
    pub beta: f64,
    pub gamma: Extended,
    pub delta: f64,
    pub mu: f64,
    pub a0: f64,
    pub k: Extended,
}

fn chain_tol(a: f64, b: f64) -> f64 {
    1e-9 * a.abs().max(b.abs()).max(1.0)
}

impl DampingConstants {
    /// Checks nonnegativity and the inequality chain
    /// mu^2 >= beta*delta, gamma >= beta >= a0*mu, mu >= a0*delta,
    /// each up to a relative slack.
    pub fn validate(&self) -> Result<()> {
        let finite_fields = [
            ("beta", self.beta),
            ("delta", self.delta),
            ("mu", self.mu),
            ("a0", self.a0),
        ];
        for (name, v) in finite_fields {
            if !(v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} is negative")));
            }
        }
        if !(self.a0 > 0.0) {
            return Err(Error::InvalidParameter(format!("a0 = {} must be positive", self.a0)));
        }
        let mu2 = self.mu * self.mu;
        let bd = self.beta * self.delta;
        if mu2 < bd - chain_tol(mu2, bd) {
            return Err(Error::InvalidParameter(format!("mu^2 = {mu2} < beta*delta = {bd}")));
        }
        if let Extended::Finite(g) = self.gamma {
            if g < self.beta - chain_tol(g, self.beta) {
                return Err(Error::InvalidParameter(format!(
                    "gamma = {g} < beta = {}",
                    self.beta
                )));
            }
        }
        let am = self.a0 * self.mu;
        if self.beta < am - chain_tol(self.beta, am) {
            return Err(Error::InvalidParameter(format!(
                "beta = {} < a0*mu = {am}",
                self.beta
            )));
        }
        let ad = self.a0 * self.delta;
        if self.mu < ad - chain_tol(self.mu, ad) {
            return Err(Error::InvalidParameter(format!("mu = {} < a0*delta = {ad}", self.mu)));
        }
        Ok(())
    }

    /// True when the Hermitian damping part is uniformly positive in the
    /// scale of the damping itself.
    pub fn beta_positive(&self, damping_scale: f64) -> bool {
        self.beta > 1e-10 * damping_scale
    }
}

impl std::fmt::Display for DampingConstants {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "beta={} gamma={} delta={} mu={} a0={} k={}",
            self.beta, self.gamma, self.delta, self.mu, self.a0, self.k
        )
    }
}

fn lambda_extremes(m: &DenseMatrix) -> Result<(f64, f64)> {
    let eig = linalg::hermitian_eig(m, false)?;
    let vals = eig.real_values();
    Ok((vals[0], vals[vals.len() - 1]))
}

struct MuObjective<'a> {
    r: &'a DenseMatrix,
    a0: &'a DenseMatrix,
}

impl MuObjective<'_> {
    /// f(z) = (z^H R z) / sqrt(z^H z * z^H A0 z) on nonzero z.
    fn eval(&self, z: &[Complex64]) -> f64 {
        let rz = self.r.matvec(z);
        let az = self.a0.matvec(z);
        let qr = linalg::dot(&rz, z).re;
        let qi: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        let qa = linalg::dot(&az, z).re;
        qr / (qi * qa).sqrt()
    }

    /// Euclidean gradient of f with respect to conj(z), doubled; descent
    /// direction for the real-valued objective over complex vectors.
    fn gradient(&self, z: &[Complex64]) -> Vec<Complex64> {
        let rz = self.r.matvec(z);
        let az = self.a0.matvec(z);
        let qr = linalg::dot(&rz, z).re;
        let qi: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        let qa = linalg::dot(&az, z).re;
        let root = (qi * qa).sqrt();
        let c1 = 1.0 / root;
        let c2 = 0.5 * qr / (root * qi * qa);
        (0..z.len())
            .map(|i| 2.0 * (c1 * rz[i] - c2 * (qa * z[i] + qi * az[i])))
            .collect()
    }

    /// Projected gradient descent with Armijo backtracking from one start.
    fn descend(&self, start: &[Complex64]) -> f64 {
        let mut z = normalize(start.to_vec());
        if z.is_empty() {
            return f64::INFINITY;
        }
        let mut f = self.eval(&z);
        for _ in 0..MU_MAX_ITERS {
            let g = self.gradient(&z);
            let gn2: f64 = g.iter().map(|w| w.norm_sqr()).sum();
            if gn2.sqrt() <= 1e-13 * (1.0 + f.abs()) {
                break;
            }
            let mut alpha = 0.1;
            let mut advanced = false;
            for _ in 0..40 {
                let trial: Vec<Complex64> =
                    z.iter().zip(g.iter()).map(|(&zi, &gi)| zi - alpha * gi).collect();
                let trial = normalize(trial);
                if trial.is_empty() {
                    alpha *= 0.5;
                    continue;
                }
                let ft = self.eval(&trial);
                if ft <= f - 1e-4 * alpha * gn2 {
                    let improvement = f - ft;
                    z = trial;
                    f = ft;
                    advanced = improvement > MU_F_TOL * (1.0 + f.abs());
                    break;
                }
                alpha *= 0.5;
            }
            if !advanced {
                break;
            }
        }
        f
    }
}

fn normalize(mut z: Vec<Complex64>) -> Vec<Complex64> {
    let n = linalg::norm2(&z);
    if n == 0.0 || !n.is_finite() {
        return Vec::new();
    }
    for w in z.iter_mut() {
        *w /= n;
    }
    z
}

fn random_unit(n: usize, rng: &mut SplitMix64) -> Vec<Complex64> {
    loop {
        let z: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.next_gaussian(), rng.next_gaussian()))
            .collect();
        let z = normalize(z);
        if !z.is_empty() {
            return z;
        }
    }
}

/// Multistart minimizer for mu: 32 seeded random unit starts plus every
/// eigenvector of R and of A0. The descent never reports less than the true
/// minimum beyond roundoff, and an eigenvector start attains the analytic
/// value for models whose extremal vector is a basis eigenvector.
fn minimize_mu(r: &DenseMatrix, a0: &DenseMatrix, seed: u64) -> Result<f64> {
    let n = r.rows();
    let objective = MuObjective { r, a0 };
    let mut best = f64::INFINITY;
    let mut rng = SplitMix64::new(seed);
    for _ in 0..MU_RANDOM_STARTS {
        let start = random_unit(n, &mut rng);
        best = best.min(objective.descend(&start));
    }
    for m in [r, a0] {
        let eig = linalg::hermitian_eig(m, true)?;
        let vecs = eig.vectors.expect("vectors requested");
        for j in 0..n {
            best = best.min(objective.descend(&vecs.col(j)));
        }
    }
    Ok(best.max(0.0))
}

/// Computes all six constants with the default minimizer seed.
pub fn compute_constants(model: &ModelPair) -> Result<DampingConstants> {
    compute_constants_seeded(model, DEFAULT_SEED)
}

/// Computes all six constants; `seed` drives the random starts of the mu
/// minimizer so runs are reproducible.
pub fn compute_constants_seeded(model: &ModelPair, seed: u64) -> Result<DampingConstants> {
    let d = model.damping();
    let r = d.hermitian_part();
    let n_mat = d.skew_part_rotated();
    let (beta_raw, gamma) = lambda_extremes(&r)?;
    let beta = beta_raw.max(0.0);

    let s_inv = model.sqrt_a0_inv();
    let scaled = s_inv.mul(&r)?.mul(s_inv)?.hermitian_part();
    let (delta_raw, _) = lambda_extremes(&scaled)?;
    let delta = delta_raw.max(0.0);

    let mu = minimize_mu(&r, model.a0(), seed)?;

    let (a0_min, _) = lambda_extremes(model.a0())?;
    if !(a0_min > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let a0 = a0_min.sqrt();

    let d_scale = d.max_abs();
    let k = if n_mat.max_abs() <= 1e-14 * d_scale.max(1.0) {
        Extended::Finite(0.0)
    } else if beta <= 1e-10 * d_scale {
        Extended::Infinite
    } else {
        Extended::Finite(linalg::pencil_max_abs(&n_mat, &r)?)
    };

    let constants = DampingConstants { beta, gamma: Extended::Finite(gamma.max(0.0)), delta, mu, a0, k };
    constants.validate()?;
    Ok(constants)
}

/// Analytic constants of the cantilever pipe continuum: beta = C pi^4,
/// gamma infinite, delta = C/E, mu = C pi^2 / sqrt(E), a0 = sqrt(E) pi^2,
/// k = K / (C pi^3).
pub fn pipe_constants(e: f64, cc: f64, k: f64) -> Result<DampingConstants> {
    if !(e > 0.0) || !(cc > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pipe constants need E > 0 and C > 0, got E={e}, C={cc}"
        )));
    }
    if !(k >= 0.0) {
        return Err(Error::InvalidParameter(format!("pipe constants need K >= 0, got K={k}")));
    }
    let pi = std::f64::consts::PI;
    Ok(DampingConstants {
        beta: cc * pi.powi(4),
        gamma: Extended::Infinite,
        delta: cc / e,
        mu: cc * pi * pi / e.sqrt(),
        a0: e.sqrt() * pi * pi,
        k: Extended::Finite(k / (cc * pi.powi(3))),
    })
}
