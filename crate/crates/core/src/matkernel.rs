//! Small dense complex linear algebra.
//!
//! Everything the metrology layer needs sits on top of three kernels:
//! a Hermitian eigendecomposition (cyclic complex Jacobi), the unitary
//! propagator `exp(-i theta H)` built from it, and the symmetric logarithmic
//! derivative solve `S sigma + sigma S = 2 dsigma` carried out in the
//! eigenbasis of `sigma`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalue-sum cutoff below which an SLD component is treated as lying
/// outside the support of the state.
pub const SUPPORT_EPS: f64 = 1e-10;

/// Tolerance used when accepting an input as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 64;

/// Dense `dim x dim` complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from a flat row-major vector; the length must be a
    /// perfect square.
    pub fn from_vec(data: Vec<Complex64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != data.len() {
            return Err(Error::NotSquare { len: data.len() });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from complex rows. Every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::NotSquare { len: rows.iter().map(Vec::len).sum() });
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(data)
    }

    /// Builds a real matrix from rows of `f64`.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> =
            rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| if i == j { Complex64::new(values[i], 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    /// Outer product `|v><v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::from_fn(n, |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff on mismatched dimensions");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `A B A^H`.
    pub fn sandwich(&self, inner: &Self) -> Self {
        &(self * inner) * &self.adjoint()
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Hermitian and smallest eigenvalue `>= -tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol.max(HERMITIAN_TOL)) {
            return false;
        }
        match herm_eig(self) {
            Ok(eig) => eig.values[0] >= -tol,
            Err(_) => false,
        }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim)) <= tol
    }

    /// Returns `(A + A^H) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5)
    }

    fn check_same_dim(&self, other: &Self) {
        assert_eq!(
            self.dim, other.dim,
            "matrix dimension mismatch: {}x{} vs {}x{}",
            self.dim, self.dim, other.dim, other.dim
        );
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        self.check_same_dim(rhs);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        self.check_same_dim(rhs);
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        self.check_same_dim(rhs);
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("eigendecomposition of a non-empty matrix")
    }

    /// `V f(D) V^H` for a complex-valued spectral function.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let fd: Vec<Complex64> = self.values.iter().map(|&x| f(x)).collect();
        CMatrix::from_fn(n, |i, j| (0..n).map(|k| v.get(i, k) * fd[k] * v.get(j, k).conj()).sum())
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// The input is symmetrized as `(A + A^H)/2` after checking that the
/// Hermiticity defect is within [`HERMITIAN_TOL`] (scaled by the matrix size).
pub fn herm_eig(a: &CMatrix) -> Result<HermEig> {
    let defect = a.hermiticity_defect();
    if defect > HERMITIAN_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale * 1e-2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).re.total_cmp(&m.get(j, j).re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m.get(i, i).re).collect();
    let vectors = CMatrix::from_fn(n, |row, col| v.get(row, order[col]));
    Ok(HermEig { values, vectors })
}

// One Jacobi rotation zeroing the (p, q) entry of the Hermitian matrix `m`.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = m.get(p, q);
    let r = apq.norm();
    if r < f64::MIN_POSITIVE {
        return;
    }
    let phase = apq / r;
    let app = m.get(p, p).re;
    let aqq = m.get(q, q).re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // W = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane.
    let w_pp = Complex64::new(c, 0.0);
    let w_pq = Complex64::new(s, 0.0);
    let w_qp = -phase.conj() * s;
    let w_qq = phase.conj() * c;

    let n = m.dim();
    for k in 0..n {
        let akp = m.get(k, p);
        let akq = m.get(k, q);
        m.set(k, p, akp * w_pp + akq * w_qp);
        m.set(k, q, akp * w_pq + akq * w_qq);
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * w_pp + vkq * w_qp);
        v.set(k, q, vkp * w_pq + vkq * w_qq);
    }
    for k in 0..n {
        let apk = m.get(p, k);
        let aqk = m.get(q, k);
        m.set(p, k, w_pp.conj() * apk + w_qp.conj() * aqk);
        m.set(q, k, w_pq.conj() * apk + w_qq.conj() * aqk);
    }
    let zero = Complex64::new(0.0, 0.0);
    m.set(p, q, zero);
    m.set(q, p, zero);
    m.set(p, p, Complex64::new(m.get(p, p).re, 0.0));
    m.set(q, q, Complex64::new(m.get(q, q).re, 0.0));
}

/// `exp(-i theta H)` for Hermitian `H`.
pub fn propagator(h: &CMatrix, theta: f64) -> Result<CMatrix> {
    let eig = herm_eig(h)?;
    Ok(propagator_from_eig(&eig, theta))
}

/// Propagator from a precomputed eigendecomposition of the generator.
pub fn propagator_from_eig(eig: &HermEig, theta: f64) -> CMatrix {
    eig.apply(|x| Complex64::new(0.0, -theta * x).exp())
}

/// Checks that `sigma` is a density matrix within `tol`: Hermitian, unit
/// trace and no eigenvalue below `-tol`. Returns the eigendecomposition.
pub fn check_density(sigma: &CMatrix, tol: f64) -> Result<HermEig> {
    let defect = sigma.hermiticity_defect();
    if defect > tol {
        return Err(Error::NotDensity(format!("Hermiticity defect {defect:e}")));
    }
    let tr = sigma.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::NotDensity(format!("trace {} {:+}i", tr.re, tr.im)));
    }
    let eig = herm_eig(sigma)?;
    if eig.min() < -tol {
        return Err(Error::NotDensity(format!("negative eigenvalue {:e}", eig.min())));
    }
    Ok(eig)
}

/// Symmetric logarithmic derivative: the Hermitian `S` with
/// `S sigma + sigma S = 2 dsigma` on the support of `sigma`.
///
/// In the eigenbasis of `sigma` (eigenvalues `s_i`) the solution is
/// `S_ij = 2 dsigma_ij / (s_i + s_j)`; components with `s_i + s_j <=`
/// [`SUPPORT_EPS`] are set to zero.
pub fn sld_solve(sigma: &CMatrix, dsigma: &CMatrix) -> Result<CMatrix> {
    if sigma.dim() != dsigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: dsigma.dim() });
    }
    let eig = check_density(sigma, HERMITIAN_TOL)?;
    let defect = dsigma.hermiticity_defect();
    if defect > HERMITIAN_TOL * dsigma.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let tr = dsigma.trace().norm();
    if tr > HERMITIAN_TOL * dsigma.max_abs().max(1.0) {
        return Err(Error::NotDensity(format!("derivative has nonzero trace {tr:e}")));
    }
    Ok(sld_in_eigenbasis(&eig, dsigma))
}

pub(crate) fn sld_in_eigenbasis(eig: &HermEig, dsigma: &CMatrix) -> CMatrix {
    let v = &eig.vectors;
    let rotated = &(&v.adjoint() * dsigma) * v;
    let n = eig.values.len();
    let s_tilde = CMatrix::from_fn(n, |i, j| {
        let denom = eig.values[i] + eig.values[j];
        if denom > SUPPORT_EPS {
            rotated.get(i, j) * (2.0 / denom)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    (&(v * &s_tilde) * &v.adjoint()).hermitian_part()
}
