use serde::Serialize;

use super::{affine_image, ConvexMatrixExpr, Node};
use crate::error::{dim_mismatch, Error, Result};
use crate::symmat::{loewner_leq, PsdVerdict, SymMat};

/// One-sided derivatives `(F'₋(x), F'₊(x))` of a univariate function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Interval1D {
    pub left: SymMat,
    pub right: SymMat,
}

impl Interval1D {
    /// Tests `left ⪯ v` and `v ⪯ right`; `v` is in the interval iff both are PSD.
    pub fn membership(&self, v: &SymMat, tol: f64) -> Result<(PsdVerdict, PsdVerdict)> {
        Ok((loewner_leq(&self.left, v, tol)?, loewner_leq(v, &self.right, tol)?))
    }

    pub fn contains(&self, v: &SymMat, tol: f64) -> Result<bool> {
        let (lo, hi) = self.membership(v, tol)?;
        Ok(lo.is_psd() && hi.is_psd())
    }

    /// `right − left`, PSD for every convex function.
    pub fn width(&self) -> SymMat {
        &self.right - &self.left
    }
}

impl ConvexMatrixExpr {
    /// `F'(x; h) = lim_{t↓0} (F(x + th) − F(x)) / t`, computed node by node.
    /// Every node applies a linear map to its children, so the derivative of a
    /// node is the same map applied to the children's derivatives; the atoms
    /// supply exact one-sided derivatives.
    pub fn dir_deriv(&self, x: &[f64], h: &[f64]) -> Result<SymMat> {
        self.check_point(x)?;
        if h.len() != self.input_dim() {
            return Err(dim_mismatch("direction dimension", self.input_dim(), h.len()));
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("direction"));
        }
        if h.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroDirection);
        }
        Ok(self.deriv(x, h))
    }

    /// Same as [`dir_deriv`](Self::dir_deriv) but accepts `h = 0` (giving 0).
    pub(crate) fn deriv(&self, x: &[f64], h: &[f64]) -> SymMat {
        match self.node() {
            Node::Const(a) => SymMat::zeros(a.dim()),
            Node::Affine { coeffs, .. } => coeffs.apply(h),
            Node::Lift { atom, matrix } => matrix.scaled(atom.dir_deriv(x, h)),
            Node::Sum(a, b) => a.deriv(x, h) + b.deriv(x, h),
            Node::Scale { alpha, arg } => arg.deriv(x, h).scaled(*alpha),
            Node::Congruence { factor, arg, .. } => arg.deriv(x, h).congruence(factor),
            Node::Hadamard { mask, arg, .. } => mask.hadamard(&arg.deriv(x, h)),
            Node::Precompose { arg, map, shift } => {
                arg.deriv(&affine_image(map, shift, x), &map.mul_vec(h))
            }
            Node::BlockDiag(a, b) => SymMat::block_diag(&a.deriv(x, h), &b.deriv(x, h)),
            Node::Double(arg) => arg.deriv(x, h).doubled(),
        }
    }

    /// `(F'₋(x), F'₊(x))` with `F'₋(x) = −F'(x; −1)` and `F'₊(x) = F'(x; +1)`.
    pub fn one_sided_1d(&self, x: f64) -> Result<Interval1D> {
        if self.input_dim() != 1 {
            return Err(Error::NotUnivariate(self.input_dim()));
        }
        let right = self.dir_deriv(&[x], &[1.0])?;
        let left = -&self.dir_deriv(&[x], &[-1.0])?;
        Ok(Interval1D { left, right })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarAtom;
    use crate::subgrad::MatTuple;
    use crate::symmat::{psd_verdict, DEFAULT_PSD_TOL};

    fn hinge_diag() -> ConvexMatrixExpr {
        ConvexMatrixExpr::diag(vec![ScalarAtom::hinge(2.0), ScalarAtom::hinge(2.0)]).unwrap()
    }

    #[test]
    fn hinge_one_sided_at_zero() {
        let f = hinge_diag();
        assert_eq!(f.dir_deriv(&[0.0], &[1.0]).unwrap(), SymMat::identity(2).scaled(2.0));
        assert_eq!(f.dir_deriv(&[0.0], &[-1.0]).unwrap(), SymMat::zeros(2));
        let iv = f.one_sided_1d(0.0).unwrap();
        assert_eq!(iv.left, SymMat::zeros(2));
        assert_eq!(iv.right, SymMat::identity(2).scaled(2.0));
        assert!(psd_verdict(&iv.width(), DEFAULT_PSD_TOL).unwrap().is_psd());
    }

    #[test]
    fn half_split_has_rank_one_right_derivative() {
        let h = ConvexMatrixExpr::lift(ScalarAtom::hinge(2.0), SymMat::identity(1)).unwrap();
        let z = ConvexMatrixExpr::constant(1, SymMat::zeros(1)).unwrap();
        let f1 = ConvexMatrixExpr::block_diag(&h, &z).unwrap();
        let iv = f1.one_sided_1d(0.0).unwrap();
        assert_eq!(iv.left, SymMat::zeros(2));
        assert_eq!(iv.right, SymMat::diag(&[2.0, 0.0]));
    }

    #[test]
    fn affine_derivative_is_constant() {
        let v = SymMat::from_rows(&[vec![1.0, 2.0], vec![2.0, -1.0]]).unwrap();
        let f = ConvexMatrixExpr::affine(MatTuple::from(v.clone()), SymMat::identity(2)).unwrap();
        for x in [-3.0, 0.0, 8.5] {
            let iv = f.one_sided_1d(x).unwrap();
            assert_eq!(iv.left, v);
            assert_eq!(iv.right, v);
            assert_eq!(f.dir_deriv(&[x], &[2.0]).unwrap(), v.scaled(2.0));
        }
    }

    #[test]
    fn errors() {
        let f = hinge_diag();
        assert_eq!(f.dir_deriv(&[0.0], &[0.0]).unwrap_err(), Error::ZeroDirection);
        assert!(matches!(f.dir_deriv(&[0.0], &[1.0, 1.0]), Err(Error::DimensionMismatch(_))));
        let g = ConvexMatrixExpr::lift(ScalarAtom::abs_coord(0, 2).unwrap(), SymMat::identity(1))
            .unwrap();
        assert_eq!(g.one_sided_1d(0.0).unwrap_err(), Error::NotUnivariate(2));
    }

    #[test]
    fn precompose_uses_chain_rule() {
        // |y₁ − y₂|·I at y = (1, 1): derivative along (1, 0) is 1 both ways
        let a = ConvexMatrixExpr::lift(ScalarAtom::abs_coord(0, 1).unwrap(), SymMat::identity(2))
            .unwrap();
        let g = ConvexMatrixExpr::precompose(
            &a,
            crate::symmat::Mat::from_rows(&[vec![1.0, -1.0]]).unwrap(),
            vec![0.0],
        )
        .unwrap();
        assert_eq!(g.dir_deriv(&[1.0, 1.0], &[1.0, 0.0]).unwrap(), SymMat::identity(2));
        assert_eq!(g.dir_deriv(&[1.0, 1.0], &[-1.0, 0.0]).unwrap(), SymMat::identity(2));
        assert_eq!(g.dir_deriv(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), SymMat::zeros(2));
        assert_eq!(g.dir_deriv(&[3.0, 1.0], &[0.0, 2.0]).unwrap(), SymMat::identity(2).scaled(-2.0));
    }
}
