use super::SymMat;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in nondecreasing order with matching orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `basis[k]` is the unit eigenvector of `eigenvalues[k]`.
    pub basis: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps the strict upper triangle in row order, annihilating each
/// off-diagonal entry with a plane rotation, until the off-diagonal mass is at
/// rounding level relative to `‖A‖_F`. The rotation order is fixed, so the
/// result is a deterministic function of the input. Ties between equal
/// eigenvalues keep the order of the diagonal after the last sweep (a diagonal
/// input returns the canonical basis).
pub fn eigen_sym(a: &SymMat) -> Result<Spectrum> {
    if !a.is_finite() {
        return Err(Error::NonFinite("eigen_sym input"));
    }
    let n = a.dim();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = a.get(i, j);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale = a.norm_fro();
    let target = (f64::EPSILON * scale).powi(2);
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let eigenvalues = order.iter().map(|&k| m[k * n + k]).collect();
    let basis = order
        .iter()
        .map(|&k| {
            let col: Vec<f64> = (0..n).map(|i| v[i * n + k]).collect();
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            col.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    Ok(Spectrum { eigenvalues, basis })
}

/// `Q diag(f(λ)) Qᵀ`
pub fn spectral_map(a: &SymMat, f: impl Fn(f64) -> f64) -> Result<SymMat> {
    let spec = eigen_sym(a)?;
    let mut out = SymMat::zeros(a.dim());
    for (lambda, q) in spec.eigenvalues.iter().zip(&spec.basis) {
        out.axpy(f(*lambda), &SymMat::outer(q));
    }
    Ok(out)
}
