//! Dense complex matrices of dimension 2 and 4.
//!
//! Everything in the crate lives on one or two qubits, so matrices are stored
//! inline (`[C64; 16]`) and are `Copy`. Basis order for two qubits is
//! `|00>, |01>, |10>, |11>` with the first factor on the left.

use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance used for every Hermiticity and positivity check.
pub const HERM_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Which tensor factor an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    First,
    Second,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::First => Subsystem::Second,
            Subsystem::Second => Subsystem::First,
        }
    }
}

/// Square complex matrix of dimension 2 or 4, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct CMat {
    dim: usize,
    data: [C64; 16],
}

impl core::fmt::Debug for CMat {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "CMat({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for col in 0..self.dim {
                let z = self[(r, col)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "CMat dimension must be 2 or 4");
        CMat { dim, data: [ZERO; 16] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from a row-major slice of `dim * dim` entries.
    pub fn from_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut m = Self::zeros(dim);
        m.data[..dim * dim].copy_from_slice(entries);
        Ok(m)
    }

    /// Builds a matrix from separate real and imaginary row-major parts.
    pub fn from_parts(dim: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::UnsupportedDimension(dim));
        }
        for part in [re, im] {
            if part.len() != dim * dim {
                return Err(Error::DimensionMismatch { expected: dim * dim, found: part.len() });
            }
        }
        let mut buf = [ZERO; 16];
        for (k, (&a, &b)) in re.iter().zip(im).enumerate() {
            buf[k] = c(a, b);
        }
        Self::from_slice(dim, &buf[..dim * dim])
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for col in 0..dim {
                m[(r, col)] = f(r, col);
            }
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = c(v, 0.0);
        }
        m
    }

    /// `|v><v|` for a ket `v`.
    pub fn outer(v: &CVec) -> Self {
        Self::from_fn(v.dim, |r, col| v[r] * v[col].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, col| self[(col, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, col| self[(col, r)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, k: C64) -> Self {
        let mut m = *self;
        m.data.iter_mut().for_each(|z| *z *= k);
        m
    }

    pub fn scale_re(&self, k: f64) -> Self {
        self.scale(c(k, 0.0))
    }

    /// `Re Tr[self * other]`, the Hilbert-Schmidt pairing for Hermitian arguments.
    pub fn trace_product_re(&self, other: &CMat) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = 0.0;
        for r in 0..n {
            for k in 0..n {
                let z = self[(r, k)] * other[(k, r)];
                acc += z.re;
            }
        }
        acc
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |H - H^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(H + H^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_re(0.5)
    }

    /// Equality up to a global phase, for unitaries and kets alike.
    pub fn eq_up_to_phase(&self, other: &CMat, tol: f64) -> bool {
        if self.dim != other.dim {
            return false;
        }
        // Align the phase on the largest entry of `other`.
        let (k, _) = other
            .entries()
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
        let a = self.data[k];
        let b = other.data[k];
        if b.norm() < tol {
            return self.max_abs() <= tol;
        }
        if a.norm() < tol {
            return false;
        }
        let phase = (b / a) / (b / a).norm();
        self.scale(phase).max_abs_diff(other) <= tol
    }

    /// Kronecker product `self ⊗ rhs` of two 2x2 matrices.
    pub fn tensor(&self, rhs: &CMat) -> Result<CMat> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim });
        }
        if rhs.dim != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: rhs.dim });
        }
        Ok(CMat::from_fn(4, |r, col| self[(r / 2, col / 2)] * rhs[(r % 2, col % 2)]))
    }

    /// Traces out `subsystem` of a 4x4 matrix.
    pub fn partial_trace(&self, subsystem: Subsystem) -> Result<CMat> {
        self.expect_dim(4)?;
        Ok(match subsystem {
            Subsystem::Second => {
                CMat::from_fn(2, |i, k| self[(2 * i, 2 * k)] + self[(2 * i + 1, 2 * k + 1)])
            }
            Subsystem::First => CMat::from_fn(2, |j, l| self[(j, l)] + self[(2 + j, 2 + l)]),
        })
    }

    /// Transposes the indices of `subsystem` of a 4x4 matrix.
    pub fn partial_transpose(&self, subsystem: Subsystem) -> Result<CMat> {
        self.expect_dim(4)?;
        Ok(CMat::from_fn(4, |r, col| {
            let (i, j) = (r / 2, r % 2);
            let (k, l) = (col / 2, col % 2);
            match subsystem {
                Subsystem::Second => self[(2 * i + l, 2 * k + j)],
                Subsystem::First => self[(2 * k + j, 2 * i + l)],
            }
        }))
    }

    /// Exchanges the two tensor factors of a 4x4 matrix.
    pub fn swap_factors(&self) -> Result<CMat> {
        self.expect_dim(4)?;
        let s = |r: usize| (r % 2) * 2 + r / 2;
        Ok(CMat::from_fn(4, |r, col| self[(s(r), s(col))]))
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        assert_eq!(self.dim, v.dim);
        let mut out = CVec::zeros(self.dim);
        for r in 0..self.dim {
            out.data[r] = (0..self.dim).map(|k| self[(r, k)] * v[k]).sum();
        }
        out
    }

    /// `<v| self |v>`.
    pub fn expectation(&self, v: &CVec) -> C64 {
        v.dot(&self.apply(v))
    }

    /// `U self U^dagger`.
    pub fn conjugate_by(&self, u: &CMat) -> CMat {
        *u * *self * u.adjoint()
    }

    fn expect_dim(&self, dim: usize) -> Result<()> {
        if self.dim == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: dim, found: self.dim })
        }
    }

    /// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
    pub fn herm_eig(&self) -> Result<HermEig> {
        let defect = self.hermiticity_defect();
        if !(defect <= HERM_TOL) {
            return Err(Error::NotHermitian(defect));
        }
        let n = self.dim;
        let mut a = self.hermitian_part();
        let mut v = CMat::identity(n);
        let scale: f64 = a.entries().iter().map(|z| z.norm_sqr()).sum();
        for _ in 0..64 {
            let off: f64 = (0..n)
                .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
                .map(|(p, q)| a[(p, q)].norm_sqr())
                .sum();
            if off <= 1e-32 * scale || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let g = apq.norm();
                    if g <= 1e-300 {
                        continue;
                    }
                    let phase = apq / g;
                    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * g);
                    let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let cs = 1.0 / libm::sqrt(t * t + 1.0);
                    let sn = t * cs;
                    let mut u = CMat::identity(n);
                    u[(p, p)] = c(cs, 0.0);
                    u[(p, q)] = c(sn, 0.0);
                    u[(q, p)] = -phase.conj() * sn;
                    u[(q, q)] = phase.conj() * cs;
                    a = u.adjoint() * a * u;
                    v = v * u;
                }
            }
        }
        let mut order = [0usize, 1, 2, 3];
        let order = &mut order[..n];
        order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
        let mut values = [0.0; 4];
        let mut vectors = CMat::zeros(n);
        for (dst, &src) in order.iter().enumerate() {
            values[dst] = a[(src, src)].re;
            for r in 0..n {
                vectors[(r, dst)] = v[(r, src)];
            }
        }
        Ok(HermEig { dim: n, values, vectors })
    }

    /// Principal square root of a positive semidefinite matrix.
    pub fn psd_sqrt(&self) -> Result<CMat> {
        let eig = self.herm_eig()?;
        let min = eig.min_value();
        if min < -HERM_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(eig.map_values(|x| libm::sqrt(x.max(0.0))))
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (r, col): (usize, usize)) -> &C64 {
        debug_assert!(r < self.dim && col < self.dim);
        &self.data[r * self.dim + col]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.dim && col < self.dim);
        &mut self.data[r * self.dim + col]
    }
}

impl Mul for CMat {
    type Output = CMat;
    fn mul(self, rhs: CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for col in 0..n {
                    out.data[r * n + col] += a * rhs.data[k * n + col];
                }
            }
        }
        out
    }
}

impl Add for CMat {
    type Output = CMat;
    fn add(self, rhs: CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        let mut out = self;
        out.data.iter_mut().zip(rhs.data.iter()).for_each(|(a, b)| *a += b);
        out
    }
}

impl Sub for CMat {
    type Output = CMat;
    fn sub(self, rhs: CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        let mut out = self;
        out.data.iter_mut().zip(rhs.data.iter()).for_each(|(a, b)| *a -= b);
        out
    }
}

impl Neg for CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.scale_re(-1.0)
    }
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone, Copy)]
pub struct HermEig {
    dim: usize,
    values: [f64; 4],
    vectors: CMat,
}

impl HermEig {
    pub fn values(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> CVec {
        let mut v = CVec::zeros(self.dim);
        for r in 0..self.dim {
            v.data[r] = self.vectors[(r, k)];
        }
        v
    }

    pub fn min_value(&self) -> f64 {
        self.values[0]
    }

    pub fn max_value(&self) -> f64 {
        self.values[self.dim - 1]
    }

    /// `V f(Λ) V^dagger`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.dim;
        CMat::from_fn(n, |r, col| {
            (0..n).map(|k| self.vectors[(r, k)] * self.vectors[(col, k)].conj() * f(self.values[k])).sum()
        })
    }

    pub fn reconstruct(&self) -> CMat {
        self.map_values(|x| x)
    }
}

/// Column vector of dimension 2 or 4.
#[derive(Clone, Copy, PartialEq)]
pub struct CVec {
    dim: usize,
    data: [C64; 4],
}

impl core::fmt::Debug for CVec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_list().entries(&self.data[..self.dim]).finish()
    }
}

impl CVec {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "CVec dimension must be 2 or 4");
        CVec { dim, data: [ZERO; 4] }
    }

    pub fn from_slice(entries: &[C64]) -> Self {
        let mut v = Self::zeros(entries.len());
        v.data[..entries.len()].copy_from_slice(entries);
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        let mut v = Self::zeros(entries.len());
        for (k, &x) in entries.iter().enumerate() {
            v.data[k] = c(x, 0.0);
        }
        v
    }

    /// Computational basis vector `|k>`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[k] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data[..self.dim]
    }

    /// `<self|other>`.
    pub fn dot(&self, other: &CVec) -> C64 {
        assert_eq!(self.dim, other.dim);
        (0..self.dim).map(|k| self.data[k].conj() * other.data[k]).sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.entries().iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        let mut v = *self;
        v.data.iter_mut().for_each(|z| *z /= n);
        v
    }

    pub fn scale(&self, k: C64) -> Self {
        let mut v = *self;
        v.data.iter_mut().for_each(|z| *z *= k);
        v
    }

    pub fn tensor(&self, rhs: &CVec) -> CVec {
        assert!(self.dim == 2 && rhs.dim == 2);
        let mut v = CVec::zeros(4);
        for i in 0..2 {
            for j in 0..2 {
                v.data[2 * i + j] = self.data[i] * rhs.data[j];
            }
        }
        v
    }

    pub fn sub(&self, other: &CVec) -> CVec {
        let mut v = *self;
        v.data.iter_mut().zip(other.data.iter()).for_each(|(a, b)| *a -= b);
        v
    }
}

impl Index<usize> for CVec {
    type Output = C64;
    fn index(&self, k: usize) -> &C64 {
        &self.data[..self.dim][k]
    }
}

impl Add for CVec {
    type Output = CVec;
    fn add(self, rhs: CVec) -> CVec {
        let mut v = self;
        v.data.iter_mut().zip(rhs.data.iter()).for_each(|(a, b)| *a += b);
        v
    }
}

pub fn pauli_x() -> CMat {
    CMat::from_fn(2, |r, col| if r != col { ONE } else { ZERO })
}

pub fn pauli_y() -> CMat {
    let mut m = CMat::zeros(2);
    m[(0, 1)] = -I;
    m[(1, 0)] = I;
    m
}

pub fn pauli_z() -> CMat {
    CMat::diag_real(&[1.0, -1.0])
}

/// `[I, X, Y, Z]`.
pub fn paulis() -> [CMat; 4] {
    [CMat::identity(2), pauli_x(), pauli_y(), pauli_z()]
}

/// `(t I + r·σ) / 2` for real Bloch coordinates.
pub fn bloch_operator(t: f64, r: [f64; 3]) -> CMat {
    let p = paulis();
    (p[0].scale_re(t) + p[1].scale_re(r[0]) + p[2].scale_re(r[1]) + p[3].scale_re(r[2])).scale_re(0.5)
}

/// Inverse of [`bloch_operator`]: `(Tr X, Tr[X σx], Tr[X σy], Tr[X σz])` for Hermitian `X`.
pub fn bloch_coordinates(x: &CMat) -> [f64; 4] {
    let p = paulis();
    [
        x.trace_product_re(&p[0]),
        x.trace_product_re(&p[1]),
        x.trace_product_re(&p[2]),
        x.trace_product_re(&p[3]),
    ]
}
