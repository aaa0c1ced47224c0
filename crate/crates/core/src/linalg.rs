//! Dense complex matrices sized for a handful of qubits.
//!
//! Tensor products use the row-major convention with the leftmost factor most
//! significant: for factors of dimensions `[d0, d1, d2]` the basis vector
//! `|abc>` sits at index `a*d1*d2 + b*d2 + c`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative Frobenius tolerance for Hermiticity checks.
pub const TOL_HERM: f64 = 1e-9;
/// Eigenvalues in `(-TOL_PSD, 0)` are treated as round-off and clamped to zero.
pub const TOL_PSD: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(
                "matrix dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("matrix contains non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    /// Projector `|e_i><e_i|` in dimension `n`.
    pub fn basis_projector(n: usize, i: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, i)] = ONE;
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let i = C64::new(0.0, 1.0);
        Self::from_vec(2, 2, vec![ZERO, -i, i, ZERO]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_vec(2, 2, vec![ONE, ZERO, ZERO, -ONE]).unwrap()
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance `||self - other||_F`. Panics on shape mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Relative Frobenius residual `||m - m^dag|| / ||m||` (0 for the zero matrix).
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += (self[(r, c)] - self[(c, r)].conj()).norm_sqr();
            }
        }
        acc.sqrt() / norm
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= TOL_HERM
    }

    /// `(m + m^dag) / 2`, used to scrub round-off asymmetry.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.data[k * other.cols + c];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    /// `a m a^dag`.
    pub fn conjugate_by(&self, a: &Self) -> Self {
        a.matmul(self).matmul(&a.adjoint())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, " ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Subsystem dimensions of a tensor-product space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorShape {
    dims: Vec<usize>,
}

impl TensorShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Dimension(
                "tensor shape needs at least one factor".into(),
            ));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::Dimension(format!("subsystem dimension {d} < 2")));
        }
        Ok(Self { dims })
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Self {
        Self { dims: vec![2; n] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn check_matrix(&self, m: &CMatrix) -> Result<()> {
        if !m.is_square() || m.rows() != self.dim() {
            return Err(Error::Dimension(format!(
                "shape {:?} (dimension {}) does not match a {}x{} matrix",
                self.dims,
                self.dim(),
                m.rows(),
                m.cols()
            )));
        }
        Ok(())
    }

    fn check_factors(&self, factors: &[usize]) -> Result<()> {
        for (i, &f) in factors.iter().enumerate() {
            if f >= self.dims.len() {
                return Err(Error::Dimension(format!(
                    "factor index {f} out of range for {} factors",
                    self.dims.len()
                )));
            }
            if factors[..i].contains(&f) {
                return Err(Error::Dimension(format!("factor index {f} repeated")));
            }
        }
        Ok(())
    }

    fn split(&self, mut idx: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            digits[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
        digits
    }

    fn join(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&d, &n)| acc * n + d)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    CMatrix::from_fn(rows, cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    })
}

/// Kronecker product of a list of matrices, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::identity(1), |acc, f| tensor(&acc, f))
}

/// Kronecker product of state vectors.
pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Traces out every factor not listed in `keep`. Kept factors appear in the
/// output in ascending index order.
pub fn partial_trace(m: &CMatrix, shape: &TensorShape, keep: &[usize]) -> Result<CMatrix> {
    shape.check_matrix(m)?;
    shape.check_factors(keep)?;
    if keep.is_empty() {
        return Err(Error::Dimension(
            "partial trace must keep at least one factor".into(),
        ));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..shape.len()).filter(|k| !kept.contains(k)).collect();
    let kept_shape = TensorShape {
        dims: kept.iter().map(|&k| shape.dims[k]).collect(),
    };
    let traced_dim: usize = traced.iter().map(|&k| shape.dims[k]).product();
    let traced_shape = TensorShape {
        dims: traced.iter().map(|&k| shape.dims[k]).collect(),
    };
    let n = kept_shape.dim();

    let full_index = |kd: &[usize], td: &[usize]| {
        let mut digits = vec![0; shape.len()];
        for (slot, &k) in kept.iter().enumerate() {
            digits[k] = kd[slot];
        }
        for (slot, &k) in traced.iter().enumerate() {
            digits[k] = td[slot];
        }
        shape.join(&digits)
    };

    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        let rd = kept_shape.split(r);
        for c in 0..n {
            let cd = kept_shape.split(c);
            let mut acc = ZERO;
            for t in 0..traced_dim {
                let td = if traced.is_empty() {
                    Vec::new()
                } else {
                    traced_shape.split(t)
                };
                acc += m[(full_index(&rd, &td), full_index(&cd, &td))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Transposes the listed factors, leaving the others untouched.
pub fn partial_transpose(m: &CMatrix, shape: &TensorShape, flip: &[usize]) -> Result<CMatrix> {
    shape.check_matrix(m)?;
    shape.check_factors(flip)?;
    let n = shape.dim();
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        let rd = shape.split(r);
        for c in 0..n {
            let mut a = rd.clone();
            let mut b = shape.split(c);
            for &k in flip {
                std::mem::swap(&mut a[k], &mut b[k]);
            }
            out[(shape.join(&a), shape.join(&b))] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Reorders tensor factors: factor `k` of the result is factor `perm[k]` of
/// the input. Returns the permuted matrix and its shape.
pub fn permute_factors(
    m: &CMatrix,
    shape: &TensorShape,
    perm: &[usize],
) -> Result<(CMatrix, TensorShape)> {
    shape.check_matrix(m)?;
    if perm.len() != shape.len() {
        return Err(Error::Dimension(
            "permutation length differs from factor count".into(),
        ));
    }
    shape.check_factors(perm)?;
    let new_shape = TensorShape {
        dims: perm.iter().map(|&k| shape.dims[k]).collect(),
    };
    let map = |idx: usize| {
        let old = shape.split(idx);
        let new: Vec<usize> = perm.iter().map(|&k| old[k]).collect();
        new_shape.join(&new)
    };
    let n = shape.dim();
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        let nr = map(r);
        for c in 0..n {
            out[(nr, map(c))] = m[(r, c)];
        }
    }
    Ok((out, new_shape))
}

/// Vector version of [`permute_factors`].
pub fn permute_vec_factors(
    v: &[C64],
    shape: &TensorShape,
    perm: &[usize],
) -> Result<(Vec<C64>, TensorShape)> {
    if v.len() != shape.dim() || perm.len() != shape.len() {
        return Err(Error::Dimension(
            "vector or permutation does not match shape".into(),
        ));
    }
    shape.check_factors(perm)?;
    let new_shape = TensorShape {
        dims: perm.iter().map(|&k| shape.dims[k]).collect(),
    };
    let mut out = vec![ZERO; v.len()];
    for (idx, &z) in v.iter().enumerate() {
        let old = shape.split(idx);
        let new: Vec<usize> = perm.iter().map(|&k| old[k]).collect();
        out[new_shape.join(&new)] = z;
    }
    Ok((out, new_shape))
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: CMatrix,
}

impl HermEig {
    /// `V diag(f(λ)) V^dag`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = self.vectors[(r, k)] * w;
                for c in 0..n {
                    out[(r, c)] += vr * self.vectors[(c, k)].conj();
                }
            }
        }
        out
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
pub fn herm_eig(m: &CMatrix) -> Result<HermEig> {
    if !m.is_square() {
        return Err(Error::Dimension(
            "eigendecomposition needs a square matrix".into(),
        ));
    }
    let residual = m.hermiticity_residual();
    if residual > TOL_HERM {
        return Err(Error::NotHermitian { residual });
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * 1e-2 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermEig { values, vectors })
}

// One Jacobi step zeroing a[p][q]: a <- G^dag a G, v <- v G with
// G = diag(1, e^{-i phi}) * [[c, s], [-s, c]] on the (p, q) plane.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let phase = apq / g;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase_conj = phase.conj();
    // G entries
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = phase_conj * (-s);
    let g_qq = phase_conj * c;
    let n = a.rows();

    for k in 0..n {
        let x = a[(k, p)];
        let y = a[(k, q)];
        a[(k, p)] = x * g_pp + y * g_qp;
        a[(k, q)] = x * g_pq + y * g_qq;
    }
    for k in 0..n {
        let x = a[(p, k)];
        let y = a[(q, k)];
        a[(p, k)] = g_pp.conj() * x + g_qp.conj() * y;
        a[(q, k)] = g_pq.conj() * x + g_qq.conj() * y;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let x = v[(k, p)];
        let y = v[(k, q)];
        v[(k, p)] = x * g_pp + y * g_qp;
        v[(k, q)] = x * g_pq + y * g_qq;
    }
}

/// Principal square root of a Hermitian positive semidefinite matrix.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(m)?;
    check_psd(&eig)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0).sqrt()))
}

pub(crate) fn check_psd(eig: &HermEig) -> Result<()> {
    match eig.values.last() {
        Some(&min) if min < -TOL_PSD => Err(Error::NotPsd { eigenvalue: min }),
        _ => Ok(()),
    }
}
