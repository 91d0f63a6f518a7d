//! Problem models: the stiffness and damping pair (A0, D), the first-order
//! block companion form, and the energy-coordinate block form built from the
//! stiffness square root.
//!
//! A model holds Hermitian A0 > 0 and accretive D (Re <z, Dz> >= 0). The
//! companion block acts on (z, dz/dt); the energy block acts on (S z, dz/dt)
//! with S = A0^{1/2} and is the form every range and spectrum routine uses.

use num_complex::Complex64;
use std::path::Path;

use crate::linalg::{self, DenseMatrix};
use crate::{Error, Result};

/// Stiffness and damping pair with cached square-root data.
#[derive(Debug, Clone)]
pub struct ModelPair {
    a0: DenseMatrix,
    d: DenseMatrix,
    s: DenseMatrix,
    s_inv: DenseMatrix,
}

/// First-order block operator on doubled coordinates.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    matrix: DenseMatrix,
}

impl BlockOperator {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn half_dim(&self) -> usize {
        self.matrix.rows() / 2
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl ModelPair {
    /// Validates A0 (Hermitian positive definite) and D (Hermitian violation
    /// only as far as accretivity allows) and caches S = A0^{1/2} and its
    /// inverse.
    pub fn new(a0: DenseMatrix, d: DenseMatrix) -> Result<Self> {
        if !a0.is_square() || !d.is_square() || a0.rows() != d.rows() || a0.rows() == 0 {
            return Err(Error::InvalidParameter(
                "model needs square A0 and D of equal nonzero dimension".into(),
            ));
        }
        if !a0.is_hermitian() {
            return Err(Error::NonHermitianInput);
        }
        let (s, s_inv) = linalg::sqrt_pd_with_inverse(&a0)?;
        // Accretivity: the Hermitian part of D must be positive
        // semidefinite up to roundoff in its own scale.
        let re_d = d.hermitian_part();
        let eig = linalg::hermitian_eig(&re_d, false)?;
        let min = eig.real_values().first().copied().unwrap_or(0.0);
        let tol = 1e-12 * d.max_abs().max(1.0);
        if min < -tol {
            return Err(Error::NotAccretive(format!(
                "min eigenvalue of Re D is {min:.3e}"
            )));
        }
        Ok(Self { a0, d, s, s_inv })
    }

    pub fn dim(&self) -> usize {
        self.a0.rows()
    }

    pub fn a0(&self) -> &DenseMatrix {
        &self.a0
    }

    pub fn damping(&self) -> &DenseMatrix {
        &self.d
    }

    /// Stiffness square root S = A0^{1/2}.
    pub fn sqrt_a0(&self) -> &DenseMatrix {
        &self.s
    }

    pub fn sqrt_a0_inv(&self) -> &DenseMatrix {
        &self.s_inv
    }

    /// Companion block [[0, I], [-A0, -D]] acting on (z, dz/dt).
    pub fn companion_block(&self) -> BlockOperator {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            m[(i, n + i)] = c(1.0, 0.0);
        }
        for i in 0..n {
            for j in 0..n {
                m[(n + i, j)] = -self.a0[(i, j)];
                m[(n + i, n + j)] = -self.d[(i, j)];
            }
        }
        BlockOperator { matrix: m }
    }

    /// Energy block [[0, S], [-S, -D]] acting on (S z, dz/dt).
    pub fn to_energy(&self) -> BlockOperator {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                m[(i, n + j)] = self.s[(i, j)];
                m[(n + i, j)] = -self.s[(i, j)];
                m[(n + i, n + j)] = -self.d[(i, j)];
            }
        }
        BlockOperator { matrix: m }
    }

    /// Residual of S^{-1} as a two-sided inverse of S, relative to the
    /// product of the factor magnitudes.
    pub fn inverse_check(&self) -> Result<f64> {
        let eye = DenseMatrix::identity(self.dim());
        let left = self.s.mul(&self.s_inv)?.sub(&eye)?.max_abs();
        let right = self.s_inv.mul(&self.s)?.sub(&eye)?.max_abs();
        Ok(left.max(right))
    }
}

/// Cantilever pipe discretization on sine modes: A0 = diag(E j^4 pi^4),
/// D = (C/E) A0 + K G with G_jk = 4jk/(j^2-k^2) for odd j+k, else 0.
pub fn build_pipe(n: usize, e: f64, cc: f64, k: f64) -> Result<ModelPair> {
    if n == 0 {
        return Err(Error::InvalidParameter("pipe needs at least one mode".into()));
    }
    if !(e > 0.0) || !(cc > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pipe needs E > 0 and C > 0, got E={e}, C={cc}"
        )));
    }
    if !(k >= 0.0) {
        return Err(Error::InvalidParameter(format!("pipe needs K >= 0, got K={k}")));
    }
    let pi4 = std::f64::consts::PI.powi(4);
    let stiff: Vec<f64> = (1..=n).map(|j| e * (j as f64).powi(4) * pi4).collect();
    let a0 = DenseMatrix::diag_real(&stiff);
    let mut d = DenseMatrix::zeros(n, n);
    for j in 0..n {
        d[(j, j)] = c(cc / e * stiff[j], 0.0);
    }
    if k > 0.0 {
        for row in 0..n {
            for col in 0..n {
                let j = (row + 1) as f64;
                let kk = (col + 1) as f64;
                if (row + col) % 2 == 1 {
                    d[(row, col)] += c(k * 4.0 * j * kk / (j * j - kk * kk), 0.0);
                }
            }
        }
    }
    ModelPair::new(a0, d)
}

/// Diagonal sequence model: A0 = diag(1..n), D = diag((1 + (-1)^j) j), so
/// odd-indexed modes are undamped and even-indexed ones have damping 2j.
pub fn build_diag_example(n: usize) -> Result<ModelPair> {
    if n == 0 {
        return Err(Error::InvalidParameter("diagonal model needs n >= 1".into()));
    }
    let stiff: Vec<f64> = (1..=n).map(|j| j as f64).collect();
    let damp: Vec<f64> = (1..=n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            (1.0 + sign) * j as f64
        })
        .collect();
    ModelPair::new(DenseMatrix::diag_real(&stiff), DenseMatrix::diag_real(&damp))
}

fn parse_complex_entry(v: &serde_json::Value, what: &str) -> Result<Complex64> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::Parse(format!("{what}: each entry must be a [re, im] pair")))?;
    let re = arr[0]
        .as_f64()
        .ok_or_else(|| Error::Parse(format!("{what}: non-numeric real part")))?;
    let im = arr[1]
        .as_f64()
        .ok_or_else(|| Error::Parse(format!("{what}: non-numeric imaginary part")))?;
    Ok(c(re, im))
}

fn parse_matrix(v: &serde_json::Value, n: usize, what: &str) -> Result<DenseMatrix> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Parse(format!("{what}: expected an array of {} entries", n * n)))?;
    if arr.len() != n * n {
        return Err(Error::Parse(format!(
            "{what}: expected {} row-major entries, got {}",
            n * n,
            arr.len()
        )));
    }
    let entries = arr
        .iter()
        .map(|e| parse_complex_entry(e, what))
        .collect::<Result<Vec<_>>>()?;
    DenseMatrix::new(n, n, entries)
}

/// Reads a custom model from JSON holding the dimension and the two matrices
/// as row-major [re, im] pair lists.
pub fn load_custom(path: &Path) -> Result<ModelPair> {
    let text = std::fs::read_to_string(path)?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let n = doc
        .get("n")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Parse("model file: missing positive integer field \"n\"".into()))?
        as usize;
    if n == 0 {
        return Err(Error::Parse("model file: \"n\" must be at least 1".into()));
    }
    let a0 = parse_matrix(
        doc.get("a0")
            .ok_or_else(|| Error::Parse("model file: missing field \"a0\"".into()))?,
        n,
        "a0",
    )?;
    let d = parse_matrix(
        doc.get("d")
            .ok_or_else(|| Error::Parse("model file: missing field \"d\"".into()))?,
        n,
        "d",
    )?;
    ModelPair::new(a0, d)
}
