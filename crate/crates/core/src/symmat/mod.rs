//! Dense symmetric matrices, the Loewner order on them, and the small amount of
//! general dense linear algebra the expression layer needs.
//!
//! A [`SymMat`] stores one copy of each `(i, j)` pair with `i <= j`, so the
//! full matrix it reconstructs is symmetric by construction rather than up to
//! rounding.

mod dense;
mod eigen;
mod order;

pub use dense::Mat;
pub use eigen::{eigen_sym, spectral_map, Spectrum};
pub use order::{
    loewner_leq, order_ball_bound_check, psd_verdict, PsdOutcome, PsdVerdict, DEFAULT_PSD_TOL,
};

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{dim_mismatch, Error, Result};

/// Largest matrix order accepted anywhere in the crate.
pub const MAX_DIM: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct SymMat {
    dim: usize,
    /// Upper triangle, row-major: (0,0), (0,1), .., (0,n-1), (1,1), ..
    data: Vec<f64>,
}

#[inline]
fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "SymMat needs dim >= 1");
        SymMat {
            dim,
            data: vec![0.0; tri_len(dim)],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds a matrix from a function of `(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(tri_len(dim));
        for i in 0..dim {
            for j in i..dim {
                data.push(f(i, j));
            }
        }
        assert!(dim >= 1, "SymMat needs dim >= 1");
        SymMat { dim, data }
    }

    /// Canonical upper-triangle entries in row-major order.
    pub fn from_upper(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("matrix order must be >= 1".into()));
        }
        if data.len() != tri_len(dim) {
            return Err(dim_mismatch("upper-triangle length", tri_len(dim), data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(SymMat { dim, data })
    }

    /// Parses a full square matrix given by rows. The lower triangle must mirror the
    /// upper one to within `1e-12` relative; the upper triangle is kept.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("matrix has no rows".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(dim_mismatch(&format!("row {i} length"), n, r.len()));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("matrix"));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    /// `v vᵀ`
    pub fn outer(v: &[f64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.offset(i, j);
        self.data[k] = v;
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        assert!(j < self.dim, "index ({i},{j}) out of range for order {}", self.dim);
        // row i starts after n + (n-1) + .. + (n-i+1) entries
        i * self.dim - (i * i - i) / 2 + (j - i)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn norm_fro(&self) -> f64 {
        self.frobenius_unchecked(self).max(0.0).sqrt()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn frobenius_unchecked(&self, other: &SymMat) -> f64 {
        let mut s = 0.0;
        let mut k = 0;
        for i in 0..self.dim {
            s += self.data[k] * other.data[k];
            k += 1;
            for _ in (i + 1)..self.dim {
                s += 2.0 * self.data[k] * other.data[k];
                k += 1;
            }
        }
        s
    }

    /// `⟨z, A z⟩`
    pub fn quad_form(&self, z: &[f64]) -> f64 {
        assert_eq!(z.len(), self.dim, "quad_form: vector length");
        let mut s = 0.0;
        let mut k = 0;
        for i in 0..self.dim {
            s += self.data[k] * z[i] * z[i];
            k += 1;
            for j in (i + 1)..self.dim {
                s += 2.0 * self.data[k] * z[i] * z[j];
                k += 1;
            }
        }
        s
    }

    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.dim, "mul_vec: vector length");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * z[j]).sum())
            .collect()
    }

    pub fn scaled(&self, alpha: f64) -> SymMat {
        SymMat {
            dim: self.dim,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &SymMat) {
        assert_eq!(self.dim, other.dim, "axpy: order mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    /// Entrywise (Schur) product.
    pub fn hadamard(&self, other: &SymMat) -> SymMat {
        assert_eq!(self.dim, other.dim, "hadamard: order mismatch");
        SymMat {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn block_diag(a: &SymMat, b: &SymMat) -> SymMat {
        let (n, m) = (a.dim, b.dim);
        SymMat::from_fn(n + m, |i, j| {
            if j < n {
                a.get(i, j)
            } else if i >= n {
                b.get(i - n, j - n)
            } else {
                0.0
            }
        })
    }

    /// `[[A, -A], [-A, A]]`
    pub fn doubled(&self) -> SymMat {
        let n = self.dim;
        SymMat::from_fn(2 * n, |i, j| {
            let v = self.get(i % n, j % n);
            if (i < n) == (j < n) {
                v
            } else {
                -v
            }
        })
    }

    /// Principal submatrix on rows/columns `start..start + len`.
    pub fn block(&self, start: usize, len: usize) -> SymMat {
        SymMat::from_fn(len, |i, j| self.get(start + i, start + j))
    }

    /// `M A Mᵀ` for `M` of shape `m × dim`.
    pub fn congruence(&self, m: &Mat) -> SymMat {
        assert_eq!(m.cols(), self.dim, "congruence: column count");
        let n = self.dim;
        // MA, m × n
        let mut ma = vec![0.0; m.rows() * n];
        for i in 0..m.rows() {
            for k in 0..n {
                let mik = m.get(i, k);
                if mik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    ma[i * n + j] += mik * self.get(k, j);
                }
            }
        }
        SymMat::from_fn(m.rows(), |i, j| {
            (0..n).map(|k| ma[i * n + k] * m.get(j, k)).sum()
        })
    }
}

/// `⟨A, B⟩ = trace(AB)`
pub fn frobenius(a: &SymMat, b: &SymMat) -> Result<f64> {
    if a.dim != b.dim {
        return Err(dim_mismatch("frobenius", a.dim, b.dim));
    }
    Ok(a.frobenius_unchecked(b))
}

impl Serialize for SymMat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim))?;
        for row in self.to_rows() {
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl Add for &SymMat {
    type Output = SymMat;
    fn add(self, rhs: &SymMat) -> SymMat {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SymMat {
    type Output = SymMat;
    fn sub(self, rhs: &SymMat) -> SymMat {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Add for SymMat {
    type Output = SymMat;
    fn add(mut self, rhs: SymMat) -> SymMat {
        self.axpy(1.0, &rhs);
        self
    }
}

impl Sub for SymMat {
    type Output = SymMat;
    fn sub(mut self, rhs: SymMat) -> SymMat {
        self.axpy(-1.0, &rhs);
        self
    }
}

impl AddAssign<&SymMat> for SymMat {
    fn add_assign(&mut self, rhs: &SymMat) {
        self.axpy(1.0, rhs);
    }
}

impl Neg for &SymMat {
    type Output = SymMat;
    fn neg(self) -> SymMat {
        self.scaled(-1.0)
    }
}

impl Mul<&SymMat> for f64 {
    type Output = SymMat;
    fn mul(self, rhs: &SymMat) -> SymMat {
        rhs.scaled(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SymMat {
        SymMat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn storage_layout_is_row_major_upper() {
        let a = SymMat::from_upper(3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(a.to_rows(), vec![vec![1., 2., 3.], vec![2., 4., 5.], vec![3., 5., 6.]]);
        for n in 1..6 {
            let b = SymMat::from_fn(n, |i, j| (10 * i + j) as f64);
            for i in 0..n {
                for j in 0..n {
                    let (lo, hi) = (i.min(j), i.max(j));
                    assert_eq!(b.get(i, j), (10 * lo + hi) as f64);
                }
            }
        }
    }

    #[test]
    fn frobenius_examples() {
        let i2 = SymMat::identity(2);
        assert_eq!(frobenius(&i2, &i2).unwrap(), 2.0);
        let a = m(&[&[1., 1.], &[1., 1.]]);
        let b = m(&[&[1., -1.], &[-1., 1.]]);
        assert_eq!(frobenius(&a, &b).unwrap(), 0.0);
        assert_eq!(frobenius(&SymMat::zeros(2), &b).unwrap(), 0.0);
        assert!(matches!(
            frobenius(&a, &SymMat::zeros(3)),
            Err(Error::DimensionMismatch(_))
        ));
        // frobenius(A, A) = ||A||²
        let c = m(&[&[1., 2.], &[2., -3.]]);
        assert!((frobenius(&c, &c).unwrap() - 18.0).abs() < 1e-15);
        assert!((c.norm_fro() - 18f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric_and_nonfinite_rows() {
        assert!(matches!(
            SymMat::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            SymMat::from_rows(&[vec![f64::NAN]]),
            Err(Error::NonFinite(_))
        ));
        assert!(SymMat::from_rows(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn congruence_matches_dense_product() {
        let a = m(&[&[2., 1.], &[1., 3.]]);
        let mm = Mat::from_rows(&[vec![1., 2.], vec![0., 1.], vec![-1., 1.]]).unwrap();
        let got = a.congruence(&mm);
        // dense M A Mᵀ
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        s += mm.get(i, k) * a.get(k, l) * mm.get(j, l);
                    }
                }
                assert!((got.get(i, j) - s).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn doubling_and_blocks() {
        let a = m(&[&[1., 2.], &[2., 5.]]);
        let d = a.doubled();
        assert_eq!(d.get(0, 3), -2.0);
        assert_eq!(d.get(2, 3), 2.0);
        assert_eq!(d.block(2, 2), a);
        let b = SymMat::block_diag(&a, &SymMat::identity(1));
        assert_eq!(b.get(0, 2), 0.0);
        assert_eq!(b.get(2, 2), 1.0);
        assert_eq!(b.block(0, 2), a);
    }
}
