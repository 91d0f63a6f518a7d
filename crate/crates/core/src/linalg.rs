//! Self-contained dense complex linear algebra: Hermitian and general
//! eigensolvers, Cholesky factorization, principal square root of a
//! positive-definite matrix, and the Hermitian pencil extremum.
//!
//! Conventions used throughout the crate:
//! * matrices are row-major, indexed as `m[(row, col)]`
//! * the inner product is linear in the first argument,
//!   `dot(x, y) = sum_j x_j * conj(y_j)`
//! * eigenvalues of Hermitian input are returned ascending with zero
//!   imaginary part; general eigenvalues are sorted by (Re, Im)

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

use crate::{Error, Result};

/// Relative tolerance for the Hermitian symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_SWEEP_CAP: usize = 100;
const QR_SWEEPS_PER_DIM: usize = 30;

/// Dense complex matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::InvalidParameter(format!(
                "matrix shape {}x{} needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let vals: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::diag(&vals)
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidParameter("ragged rows".into()));
        }
        let entries: Vec<Complex64> = rows.iter().flatten().copied().collect();
        Self::new(r, c, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.rows && j < self.cols);
        i * self.cols + j
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let entries = self.entries.iter().map(|z| z * factor).collect();
        Self { rows: self.rows, cols: self.cols, entries }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidParameter("matrix dimension mismatch".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self { rows: self.rows, cols: self.cols, entries })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::InvalidParameter("matrix product dimension mismatch".into()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len());
        self.entries
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x.iter()).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Largest deviation from Hermitian symmetry, max |m_jk - conj(m_kj)|.
    pub fn hermitian_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols.min(self.rows) {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_square() && self.hermitian_violation() <= HERMITIAN_TOL * self.max_abs()
    }

    /// (M + M^H)/2.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        self.add(&adj).expect("square matrix").scale(Complex64::new(0.5, 0.0))
    }

    /// (M - M^H)/(2i), Hermitian whenever M is square.
    pub fn skew_part_rotated(&self) -> Self {
        let adj = self.adjoint();
        self.sub(&adj).expect("square matrix").scale(Complex64::new(0.0, -0.5))
    }

    /// Forces exact Hermitian symmetry by averaging mirrored entries.
    fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for i in 0..out.rows {
            out[(i, i)] = Complex64::new(out[(i, i)].re, 0.0);
            for j in (i + 1)..out.cols {
                let avg = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = avg;
                out[(j, i)] = avg.conj();
            }
        }
        out
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[self.idx(i, j)]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        let k = self.idx(i, j);
        &mut self.entries[k]
    }
}

/// Inner product linear in the first argument, sum_j x_j * conj(y_j).
pub fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y.iter()).map(|(&a, &b)| a * b.conj()).sum()
}

pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues, optional eigenvectors (as columns), and the worst residual
/// ratio observed at convergence.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<Complex64>,
    pub vectors: Option<DenseMatrix>,
    pub backward_error: f64,
}

impl EigenResult {
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

fn offdiag_frobenius(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Values come back ascending and exactly real; vectors, when requested, are
/// orthonormal columns in matching order.
pub fn hermitian_eig(m: &DenseMatrix, want_vectors: bool) -> Result<EigenResult> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::InvalidParameter("hermitian_eig needs a square nonempty matrix".into()));
    }
    if !m.is_hermitian() {
        return Err(Error::NonHermitianInput);
    }
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = if want_vectors { Some(DenseMatrix::identity(n)) } else { None };
    let scale = a.frobenius();
    let tol = f64::EPSILON * scale;

    let mut converged = scale == 0.0 || n == 1;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= JACOBI_SWEEP_CAP {
            return Err(Error::DidNotConverge("Jacobi eigensolver"));
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let w = apq / r;
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let tau = (alpha - beta) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sw = s * w;
                let swc = s * w.conj();
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip + swc * aiq;
                    a[(i, q)] = -sw * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = c * apj + sw * aqj;
                    a[(q, j)] = -swc * apj + c * aqj;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                if let Some(vm) = v.as_mut() {
                    for i in 0..n {
                        let vip = vm[(i, p)];
                        let viq = vm[(i, q)];
                        vm[(i, p)] = c * vip + swc * viq;
                        vm[(i, q)] = -sw * vip + c * viq;
                    }
                }
            }
        }
        converged = offdiag_frobenius(&a) <= tol;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<Complex64> = order.iter().map(|&i| Complex64::new(a[(i, i)].re, 0.0)).collect();
    let vectors = v.map(|vm| {
        let mut out = DenseMatrix::zeros(n, n);
        for (new_j, &old_j) in order.iter().enumerate() {
            for i in 0..n {
                out[(i, new_j)] = vm[(i, old_j)];
            }
        }
        out
    });
    let backward_error = match &vectors {
        Some(vm) => eig_residual(m, &values, vm),
        None => {
            if scale == 0.0 {
                0.0
            } else {
                offdiag_frobenius(&a) / scale
            }
        }
    };
    Ok(EigenResult { values, vectors, backward_error })
}

fn eig_residual(m: &DenseMatrix, values: &[Complex64], vectors: &DenseMatrix) -> f64 {
    let scale = m.max_abs().max(1e-300);
    let n = m.rows();
    let mut worst = 0.0f64;
    for (j, &lambda) in values.iter().enumerate() {
        let vj = vectors.col(j);
        let mv = m.matvec(&vj);
        let res: f64 = mv
            .iter()
            .zip(vj.iter())
            .map(|(&a, &b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(res / (scale * (n as f64).sqrt()));
    }
    worst
}

/// Complex Givens rotation G = [[c, conj(s)], [-s, c]] with c real such that
/// G * (a, b)^T has a zero second component.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b / bn);
    }
    let rho = an.hypot(bn);
    let c = an / rho;
    let s = (a / an).conj() * b / rho;
    (c, s)
}

/// Diagonal balancing by exact powers of two; returns the scaling factors d
/// with a replaced by d^{-1} a d. Exact similarity, no rounding introduced.
fn balance(a: &mut DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut d = vec![1.0f64; n];
    let radix = 2.0f64;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].norm();
                    r += a[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 || !c.is_finite() || !r.is_finite() {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / radix {
                c *= radix;
                r /= radix;
                f *= radix;
            }
            while c >= r * radix {
                c /= radix;
                r *= radix;
                f /= radix;
            }
            if f != 1.0 && c + r < 0.95 * s {
                converged = false;
                d[i] *= f;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[(i, j)] *= inv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            return d;
        }
    }
}

/// Reduces a to upper Hessenberg form by Householder reflectors and returns
/// the accumulated unitary.
fn hessenberg(a: &mut DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let mut q = DenseMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let mut x: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xn = norm2(&x);
        if xn == 0.0 {
            continue;
        }
        let x0 = x[0];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xn;
        x[0] -= alpha;
        let vn = norm2(&x);
        if vn == 0.0 {
            continue;
        }
        let v: Vec<Complex64> = x.iter().map(|&z| z / vn).collect();
        let m = n - k - 1;
        // Left update: rows k+1..n of all columns.
        for j in 0..n {
            let mut proj = Complex64::new(0.0, 0.0);
            for i in 0..m {
                proj += v[i].conj() * a[(k + 1 + i, j)];
            }
            proj *= 2.0;
            for i in 0..m {
                let val = proj * v[i];
                a[(k + 1 + i, j)] -= val;
            }
        }
        // Right update: columns k+1..n of all rows.
        for i in 0..n {
            let mut proj = Complex64::new(0.0, 0.0);
            for j in 0..m {
                proj += a[(i, k + 1 + j)] * v[j];
            }
            proj *= 2.0;
            for j in 0..m {
                let val = proj * v[j].conj();
                a[(i, k + 1 + j)] -= val;
            }
        }
        for i in 0..n {
            let mut proj = Complex64::new(0.0, 0.0);
            for j in 0..m {
                proj += q[(i, k + 1 + j)] * v[j];
            }
            proj *= 2.0;
            for j in 0..m {
                let val = proj * v[j].conj();
                q[(i, k + 1 + j)] -= val;
            }
        }
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    q
}

fn wilkinson_shift(h: &DenseMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let r1 = (tr + disc) * 0.5;
    let r2 = (tr - disc) * 0.5;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// One implicit single-shift QR step on the active window, with the bulge
/// chased by Givens rotations applied across the full matrix and accumulated
/// into z.
fn qr_step(h: &mut DenseMatrix, z: &mut Option<DenseMatrix>, lo: usize, hi: usize, shift: Complex64) {
    let n = h.rows();
    let mut x = h[(lo, lo)] - shift;
    let mut y = h[(lo + 1, lo)];
    for k in lo..hi {
        let (c, s) = givens(x, y);
        let sc = s.conj();
        for j in 0..n {
            let hk = h[(k, j)];
            let hk1 = h[(k + 1, j)];
            h[(k, j)] = c * hk + sc * hk1;
            h[(k + 1, j)] = -s * hk + c * hk1;
        }
        for i in 0..n {
            let hk = h[(i, k)];
            let hk1 = h[(i, k + 1)];
            h[(i, k)] = c * hk + s * hk1;
            h[(i, k + 1)] = -sc * hk + c * hk1;
        }
        if let Some(zm) = z.as_mut() {
            for i in 0..n {
                let zk = zm[(i, k)];
                let zk1 = zm[(i, k + 1)];
                zm[(i, k)] = c * zk + s * zk1;
                zm[(i, k + 1)] = -sc * zk + c * zk1;
            }
        }
        if k + 2 <= hi {
            x = h[(k + 1, k)];
            y = h[(k + 2, k)];
        }
    }
}

/// Eigendecomposition of a general square matrix: balancing, Hessenberg
/// reduction, then single-shift QR with Wilkinson shifts. Eigenvalues are
/// sorted by (Re, Im); eigenvectors, when requested, are computed by
/// back-substitution on the triangular factor.
pub fn general_eig(m: &DenseMatrix, want_vectors: bool) -> Result<EigenResult> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::InvalidParameter("general_eig needs a square nonempty matrix".into()));
    }
    let n = m.rows();
    let mut h = m.clone();
    let d = balance(&mut h);
    let mut z = if want_vectors { Some(hessenberg(&mut h)) } else { { hessenberg(&mut h); None } };

    let sweep_cap = QR_SWEEPS_PER_DIM * n;
    let mut sweeps = 0;
    let mut hi = n - 1;
    let mut iters_at_hi = 0;
    while hi > 0 {
        // Deflation scan from the bottom of the active column.
        let mut lo = 0;
        for k in (1..=hi).rev() {
            let tol = 1e-14 * (h[(k - 1, k - 1)].norm() + h[(k, k)].norm());
            if h[(k, k - 1)].norm() <= tol {
                h[(k, k - 1)] = Complex64::new(0.0, 0.0);
                lo = k;
                break;
            }
        }
        if lo == hi {
            hi -= 1;
            iters_at_hi = 0;
            continue;
        }
        if sweeps >= sweep_cap {
            return Err(Error::DidNotConverge("QR eigensolver"));
        }
        sweeps += 1;
        iters_at_hi += 1;
        let shift = if iters_at_hi % 10 == 0 {
            h[(hi, hi)] + 0.75 * (h[(hi, hi - 1)].norm() + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 })
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_step(&mut h, &mut z, lo, hi, shift);
    }

    let scale = m.max_abs();
    let mut pairs: Vec<(Complex64, usize)> = (0..n).map(|i| (h[(i, i)], i)).collect();
    pairs.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let values: Vec<Complex64> = pairs.iter().map(|&(v, _)| v).collect();

    let vectors = match z {
        Some(zm) => {
            let mut out = DenseMatrix::zeros(n, n);
            let smallnum = f64::EPSILON * h.max_abs().max(1e-300);
            for (col, &(lambda, j)) in pairs.iter().enumerate() {
                // Null vector of (T - lambda I) supported on indices 0..=j.
                let mut y = vec![Complex64::new(0.0, 0.0); n];
                y[j] = Complex64::new(1.0, 0.0);
                for i in (0..j).rev() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in (i + 1)..=j {
                        acc += h[(i, k)] * y[k];
                    }
                    let mut denom = h[(i, i)] - lambda;
                    if denom.norm() < smallnum {
                        denom = Complex64::new(smallnum, 0.0);
                    }
                    y[i] = -acc / denom;
                }
                let mut v: Vec<Complex64> = (0..n)
                    .map(|i| (0..=j).map(|k| zm[(i, k)] * y[k]).sum())
                    .collect();
                // Undo the balancing similarity.
                for i in 0..n {
                    v[i] *= d[i];
                }
                let vn = norm2(&v);
                if vn > 0.0 {
                    for vi in v.iter_mut() {
                        *vi /= vn;
                    }
                }
                for i in 0..n {
                    out[(i, col)] = v[i];
                }
            }
            Some(out)
        }
        None => None,
    };

    let backward_error = match &vectors {
        Some(vm) => eig_residual(m, &values, vm),
        None => {
            let mut sub = 0.0f64;
            for k in 1..n {
                sub += h[(k, k - 1)].norm_sqr();
            }
            if scale == 0.0 {
                0.0
            } else {
                sub.sqrt() / scale
            }
        }
    };
    Ok(EigenResult { values, vectors, backward_error })
}

/// Cholesky factor L with L * L^H = M for Hermitian positive-definite M.
pub fn cholesky(m: &DenseMatrix) -> Result<DenseMatrix> {
    if !m.is_square() {
        return Err(Error::InvalidParameter("cholesky needs a square matrix".into()));
    }
    if !m.is_hermitian() {
        return Err(Error::NonHermitianInput);
    }
    let n = m.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let dj = d.sqrt();
        l[(j, j)] = Complex64::new(dj, 0.0);
        for i in (j + 1)..n {
            let mut acc = m[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / dj;
        }
    }
    Ok(l)
}

/// Solves L X = B for lower-triangular L.
pub fn forward_substitute(l: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if !l.is_square() || l.rows() != b.rows() {
        return Err(Error::InvalidParameter("triangular solve dimension mismatch".into()));
    }
    let n = l.rows();
    let cols = b.cols();
    let mut x = b.clone();
    for j in 0..cols {
        for i in 0..n {
            let mut acc = x[(i, j)];
            for k in 0..i {
                acc -= l[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = acc / l[(i, i)];
        }
    }
    Ok(x)
}

/// Solves L^H X = B for lower-triangular L.
pub fn adjoint_substitute(l: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if !l.is_square() || l.rows() != b.rows() {
        return Err(Error::InvalidParameter("triangular solve dimension mismatch".into()));
    }
    let n = l.rows();
    let cols = b.cols();
    let mut x = b.clone();
    for j in 0..cols {
        for i in (0..n).rev() {
            let mut acc = x[(i, j)];
            for k in (i + 1)..n {
                acc -= l[(k, i)].conj() * x[(k, j)];
            }
            x[(i, j)] = acc / l[(i, i)].conj();
        }
    }
    Ok(x)
}

/// Inverse of a Hermitian positive-definite matrix via its Cholesky factor.
pub fn pd_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let l = cholesky(m)?;
    let eye = DenseMatrix::identity(m.rows());
    let y = forward_substitute(&l, &eye)?;
    adjoint_substitute(&l, &y)
}

/// Principal square root of a Hermitian positive-definite matrix, through the
/// Hermitian eigendecomposition.
pub fn sqrt_pd(m: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(sqrt_pd_with_inverse(m)?.0)
}

/// Principal square root together with its inverse, sharing one
/// eigendecomposition.
pub fn sqrt_pd_with_inverse(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let eig = hermitian_eig(m, true)?;
    let values = eig.real_values();
    if values.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let v = eig.vectors.expect("vectors requested");
    let n = m.rows();
    let mut root = DenseMatrix::zeros(n, n);
    let mut inv_root = DenseMatrix::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        let r = lam.sqrt();
        let ri = 1.0 / r;
        for i in 0..n {
            let vik = v[(i, k)];
            for j in 0..n {
                let w = vik * v[(j, k)].conj();
                root[(i, j)] += r * w;
                inv_root[(i, j)] += ri * w;
            }
        }
    }
    Ok((root.symmetrized(), inv_root.symmetrized()))
}

/// Largest |lambda| over the Hermitian generalized problem N x = lambda P x,
/// via the congruence L^{-1} N L^{-H} with L the Cholesky factor of P.
pub fn pencil_max_abs(n_mat: &DenseMatrix, p: &DenseMatrix) -> Result<f64> {
    if !n_mat.is_hermitian() {
        return Err(Error::NonHermitianInput);
    }
    let l = cholesky(p)?;
    let w = forward_substitute(&l, n_mat)?;
    let m_adj = forward_substitute(&l, &w.adjoint())?;
    let reduced = m_adj.adjoint().symmetrized();
    let eig = hermitian_eig(&reduced, false)?;
    Ok(eig
        .values
        .iter()
        .map(|z| z.re.abs())
        .fold(0.0, f64::max))
}
