use crate::error::{dim_mismatch, Error, Result};

/// Absolute tolerance for deciding that a point sits on a kink: an `AbsCoord`
/// argument within this distance of zero, or a `MaxAffine` piece within this
/// distance of the maximum.
pub const KINK_TOL: f64 = 1e-12;

/// Convex real-valued building block `f: ℝᵈ → ℝ`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarAtom {
    /// `aᵀx + b`
    AffineScalar { a: Vec<f64>, b: f64 },
    /// `|x_index|` on `ℝ^dim` (zero-based index)
    AbsCoord { index: usize, dim: usize },
    /// `max_k (a_kᵀx + b_k)`
    MaxAffine { pieces: Vec<(Vec<f64>, f64)> },
}

impl ScalarAtom {
    pub fn affine(a: Vec<f64>, b: f64) -> Result<Self> {
        let atom = ScalarAtom::AffineScalar { a, b };
        atom.validate()?;
        Ok(atom)
    }

    pub fn abs_coord(index: usize, dim: usize) -> Result<Self> {
        let atom = ScalarAtom::AbsCoord { index, dim };
        atom.validate()?;
        Ok(atom)
    }

    pub fn max_affine(pieces: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let atom = ScalarAtom::MaxAffine { pieces };
        atom.validate()?;
        Ok(atom)
    }

    /// `max{0, c·x}` on `ℝ`, the hinge used by several worked examples.
    pub fn hinge(c: f64) -> Self {
        ScalarAtom::MaxAffine {
            pieces: vec![(vec![0.0], 0.0), (vec![c], 0.0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScalarAtom::AffineScalar { a, b } => {
                if a.is_empty() {
                    return Err(Error::DimensionMismatch("affine atom with d = 0".into()));
                }
                if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("affine atom"));
                }
            }
            ScalarAtom::AbsCoord { index, dim } => {
                if *dim == 0 {
                    return Err(Error::DimensionMismatch("abs atom with d = 0".into()));
                }
                if index >= dim {
                    return Err(Error::DimensionMismatch(format!(
                        "abs atom index {index} out of range for d = {dim}"
                    )));
                }
            }
            ScalarAtom::MaxAffine { pieces } => {
                let Some((a0, _)) = pieces.first() else {
                    return Err(Error::InvalidArgument("max-affine atom with no pieces".into()));
                };
                if a0.is_empty() {
                    return Err(Error::DimensionMismatch("max-affine atom with d = 0".into()));
                }
                for (k, (a, b)) in pieces.iter().enumerate() {
                    if a.len() != a0.len() {
                        return Err(dim_mismatch(&format!("max-affine piece {k}"), a0.len(), a.len()));
                    }
                    if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFinite("max-affine atom"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        match self {
            ScalarAtom::AffineScalar { a, .. } => a.len(),
            ScalarAtom::AbsCoord { dim, .. } => *dim,
            ScalarAtom::MaxAffine { pieces } => pieces[0].0.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarAtom::AffineScalar { a, b } => dot(a, x) + b,
            ScalarAtom::AbsCoord { index, .. } => x[*index].abs(),
            ScalarAtom::MaxAffine { pieces } => pieces
                .iter()
                .map(|(a, b)| dot(a, x) + b)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Exact one-sided directional derivative `f'(x; h)`.
    pub fn dir_deriv(&self, x: &[f64], h: &[f64]) -> f64 {
        match self {
            ScalarAtom::AffineScalar { a, .. } => dot(a, h),
            ScalarAtom::AbsCoord { index, .. } => {
                let (xi, hi) = (x[*index], h[*index]);
                if xi.abs() <= KINK_TOL {
                    hi.abs()
                } else {
                    xi.signum() * hi
                }
            }
            ScalarAtom::MaxAffine { pieces } => {
                let values: Vec<f64> = pieces.iter().map(|(a, b)| dot(a, x) + b).collect();
                let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                pieces
                    .iter()
                    .zip(&values)
                    .filter(|(_, &v)| v >= top - KINK_TOL)
                    .map(|((a, _), _)| dot(a, h))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// One element of `∂f(x)`: zero at an `AbsCoord` kink, the gradient of the
    /// lowest-index active piece for `MaxAffine`.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ScalarAtom::AffineScalar { a, .. } => a.clone(),
            ScalarAtom::AbsCoord { index, dim } => {
                let mut g = vec![0.0; *dim];
                let xi = x[*index];
                if xi.abs() > KINK_TOL {
                    g[*index] = xi.signum();
                }
                g
            }
            ScalarAtom::MaxAffine { pieces } => {
                let values: Vec<f64> = pieces.iter().map(|(a, b)| dot(a, x) + b).collect();
                let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let k = values.iter().position(|&v| v >= top - KINK_TOL).unwrap();
                pieces[k].0.clone()
            }
        }
    }

    /// Distance from `x` to the nearest kink of this atom (infinite for affine atoms).
    pub fn kink_distance(&self, x: &[f64]) -> f64 {
        match self {
            ScalarAtom::AffineScalar { .. } => f64::INFINITY,
            ScalarAtom::AbsCoord { index, .. } => x[*index].abs(),
            ScalarAtom::MaxAffine { pieces } => {
                let values: Vec<f64> = pieces.iter().map(|(a, b)| dot(a, x) + b).collect();
                let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let k = values.iter().position(|&v| v == top).unwrap();
                let mut best = f64::INFINITY;
                for (j, (a, _)) in pieces.iter().enumerate() {
                    let diff: f64 = a
                        .iter()
                        .zip(&pieces[k].0)
                        .map(|(p, q)| (p - q).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    if j == k || diff == 0.0 {
                        // parallel pieces never cross
                        continue;
                    }
                    best = best.min((top - values[j]) / diff);
                }
                best
            }
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_derivatives() {
        let f = ScalarAtom::abs_coord(1, 2).unwrap();
        assert_eq!(f.eval(&[5.0, -3.0]), 3.0);
        assert_eq!(f.dir_deriv(&[0.0, -3.0], &[1.0, 2.0]), -2.0);
        assert_eq!(f.dir_deriv(&[0.0, 0.0], &[1.0, -2.0]), 2.0);
        assert_eq!(f.dir_deriv(&[0.0, 0.0], &[1.0, 2.0]), 2.0);
        assert_eq!(f.subgradient(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(f.subgradient(&[0.0, 4.0]), vec![0.0, 1.0]);
        assert!(ScalarAtom::abs_coord(2, 2).is_err());
        assert!(ScalarAtom::abs_coord(0, 0).is_err());
    }

    #[test]
    fn hinge_at_kink() {
        let f = ScalarAtom::hinge(2.0);
        assert_eq!(f.eval(&[1.0]), 2.0);
        assert_eq!(f.eval(&[-1.0]), 0.0);
        assert_eq!(f.dir_deriv(&[0.0], &[1.0]), 2.0);
        assert_eq!(f.dir_deriv(&[0.0], &[-1.0]), 0.0);
        // lowest active index is the zero piece
        assert_eq!(f.subgradient(&[0.0]), vec![0.0]);
        assert_eq!(f.subgradient(&[1.0]), vec![2.0]);
        assert_eq!(f.kink_distance(&[0.25]), 0.25);
    }

    #[test]
    fn max_affine_validation() {
        assert!(ScalarAtom::max_affine(vec![]).is_err());
        assert!(ScalarAtom::max_affine(vec![(vec![1.0], 0.0), (vec![1.0, 2.0], 0.0)]).is_err());
        assert!(ScalarAtom::max_affine(vec![(vec![f64::NAN], 0.0)]).is_err());
        assert!(ScalarAtom::affine(vec![], 1.0).is_err());
    }

    #[test]
    fn max_affine_directional_derivative_is_max_over_active_set() {
        let f = ScalarAtom::max_affine(vec![
            (vec![1.0, 0.0], 0.0),
            (vec![0.0, 1.0], 0.0),
            (vec![-1.0, -1.0], -5.0),
        ])
        .unwrap();
        let x = [1.0, 1.0];
        assert_eq!(f.dir_deriv(&x, &[1.0, -1.0]), 1.0);
        assert_eq!(f.dir_deriv(&x, &[-1.0, 1.0]), 1.0);
        assert_eq!(f.dir_deriv(&x, &[-1.0, -1.0]), -1.0);
        assert_eq!(f.subgradient(&x), vec![1.0, 0.0]);
        assert_eq!(f.kink_distance(&x), 0.0);
    }
}
