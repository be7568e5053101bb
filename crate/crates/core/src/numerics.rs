//! Dense complex vectors and matrices with the Hermitian geometry used
//! throughout the crate.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Library-wide comparison tolerance. Distances closer than this are ties.
pub const DEFAULT_TOL: f64 = 1e-9;

pub type C64 = Complex64;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

/// `e^{2 pi i k / r}`.
pub fn root_of_unity(k: i64, r: u32) -> C64 {
    let r = r as i64;
    let k = k.rem_euclid(r);
    // exact values on the axes keep small cases free of rounding noise
    if 4 * k == 0 {
        return c64(1.0, 0.0);
    }
    if 4 * k == r {
        return c64(0.0, 1.0);
    }
    if 2 * k == r {
        return c64(-1.0, 0.0);
    }
    if 4 * k == 3 * r {
        return c64(0.0, -1.0);
    }
    C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / r as f64)
}

#[derive(Clone, PartialEq, Default)]
pub struct CVector(Vec<C64>);

impl CVector {
    pub fn new(entries: Vec<C64>) -> Self {
        CVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        CVector(vec![C64::new(0.0, 0.0); dim])
    }

    pub fn from_real(entries: &[f64]) -> Self {
        CVector(entries.iter().map(|&x| c64(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = c64(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> CVector {
        CVector(self.0.iter().map(|z| z * s).collect())
    }

    /// Returns `self / |self|`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<CVector> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(self.scale(c64(1.0 / n, 0.0)))
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    fn check_dim(&self, other: &CVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for CVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, z) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
        }
        f.write_str("]")
    }
}

impl Index<usize> for CVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl From<Vec<C64>> for CVector {
    fn from(v: Vec<C64>) -> Self {
        CVector(v)
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

// [re, im] pairs
impl Serialize for CVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(CVector(
            pairs.into_iter().map(|[re, im]| c64(re, im)).collect(),
        ))
    }
}

/// `sum_i conj(u_i) v_i`.
pub fn hermitian_inner(u: &CVector, v: &CVector) -> Result<C64> {
    u.check_dim(v)?;
    Ok(inner_unchecked(u.as_slice(), v.as_slice()))
}

#[inline]
pub(crate) fn inner_unchecked(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn distance(u: &CVector, v: &CVector) -> Result<f64> {
    u.check_dim(v)?;
    Ok(dist(u.as_slice(), v.as_slice()))
}

/// Euclidean distance on equal-length slices.
#[inline]
pub fn dist(u: &[C64], v: &[C64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Row-major square or rectangular complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Empty("matrix rows"));
        }
        let c = rows[0].len();
        if c == 0 {
            return Err(Error::Empty("matrix columns"));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(CMatrix {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c64(1.0, 0.0);
        }
        m
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![c64(0.0, 0.0); rows * cols],
        }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
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

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.cols + j] = z;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.cols).map(|r| r.to_vec()).collect()
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &CMatrix, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Fast path for group code: caller guarantees `v.len() == cols`.
    #[inline]
    pub(crate) fn apply_slice(&self, v: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks(self.cols) {
            f.write_str("  ")?;
            for z in row {
                write!(f, "{:>10.6}{:+.6}i ", z.re, z.im)?;
            }
            f.write_str("\n")?;
        }
        f.write_str("]")
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .data
            .chunks(self.cols)
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| c64(re, im)).collect())
            .collect();
        CMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

pub fn apply(m: &CMatrix, v: &CVector) -> Result<CVector> {
    if m.cols != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.cols,
            found: v.dim(),
        });
    }
    let mut out = vec![c64(0.0, 0.0); m.rows];
    m.apply_slice(v.as_slice(), &mut out);
    Ok(CVector(out))
}

pub fn mat_mul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            expected: a.cols,
            found: b.rows,
        });
    }
    let mut out = CMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.get(i, k);
            if aik == c64(0.0, 0.0) {
                continue;
            }
            for j in 0..b.cols {
                out.data[i * b.cols + j] += aik * b.get(k, j);
            }
        }
    }
    Ok(out)
}

pub fn conj_transpose(m: &CMatrix) -> CMatrix {
    m.conj_transpose()
}

/// `max |M M^H - I| <= tol`.
pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    match mat_mul(m, &m.conj_transpose()) {
        Ok(p) => p.approx_eq(&CMatrix::identity(m.rows), tol),
        Err(_) => false,
    }
}
