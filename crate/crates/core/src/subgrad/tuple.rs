use serde::Serialize;

use crate::error::{dim_mismatch, Error, Result};
use crate::symmat::SymMat;

/// A linear operator `ℝᵈ → 𝕊ℓ`, stored as the images `(V⁽¹⁾, …, V⁽ᵈ⁾)` of
/// the canonical basis vectors: `y ↦ Σᵢ yᵢ V⁽ⁱ⁾`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MatTuple(Vec<SymMat>);

impl MatTuple {
    pub fn new(mats: Vec<SymMat>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::DimensionMismatch("matrix tuple with d = 0".into()));
        };
        let ell = first.dim();
        for (i, m) in mats.iter().enumerate() {
            if m.dim() != ell {
                return Err(dim_mismatch(&format!("tuple entry {i} order"), ell, m.dim()));
            }
            if !m.is_finite() {
                return Err(Error::NonFinite("matrix tuple"));
            }
        }
        Ok(MatTuple(mats))
    }

    pub fn zeros(d: usize, ell: usize) -> Self {
        MatTuple(vec![SymMat::zeros(ell); d])
    }

    /// Number of components `d`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Common matrix order `ℓ`.
    pub fn ell(&self) -> usize {
        self.0[0].dim()
    }

    pub fn get(&self, i: usize) -> &SymMat {
        &self.0[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SymMat> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[SymMat] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<SymMat> {
        self.0
    }

    /// `Σᵢ yᵢ V⁽ⁱ⁾`
    pub fn apply(&self, y: &[f64]) -> SymMat {
        assert_eq!(y.len(), self.len(), "MatTuple::apply: vector length");
        let mut out = SymMat::zeros(self.ell());
        for (yi, v) in y.iter().zip(&self.0) {
            if *yi != 0.0 {
                out.axpy(*yi, v);
            }
        }
        out
    }

    /// Applies `f` to every component.
    pub fn map(&self, f: impl Fn(&SymMat) -> SymMat) -> MatTuple {
        MatTuple(self.0.iter().map(f).collect())
    }

    pub fn zip_with(&self, other: &MatTuple, f: impl Fn(&SymMat, &SymMat) -> SymMat) -> MatTuple {
        assert_eq!(self.len(), other.len(), "MatTuple::zip_with: length");
        MatTuple(self.0.iter().zip(&other.0).map(|(a, b)| f(a, b)).collect())
    }

    pub fn scaled(&self, alpha: f64) -> MatTuple {
        self.map(|m| m.scaled(alpha))
    }

    /// `sqrt(Σᵢ ‖V⁽ⁱ⁾‖_F²)`
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|m| m.norm_fro().powi(2)).sum::<f64>().sqrt()
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &MatTuple) -> f64 {
        assert_eq!(self.len(), other.len(), "MatTuple::max_abs_diff: length");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).max_abs())
            .fold(0.0, f64::max)
    }
}

impl From<SymMat> for MatTuple {
    fn from(m: SymMat) -> Self {
        MatTuple(vec![m])
    }
}
