//! Matrix-convex expressions.
//!
//! Every constructor of [`ConvexMatrixExpr`] maps convex matrix-valued
//! functions to a convex matrix-valued function, so anything that type-checks
//! here is convex in the Loewner order:
//!
//! | node         | value                            | why it stays convex                  |
//! |--------------|----------------------------------|--------------------------------------|
//! | `Const`      | `A`                              | constant                             |
//! | `Affine`     | `Σᵢ xᵢ V⁽ⁱ⁾ + A₀`                | affine                               |
//! | `Lift`       | `f(x)·P`, `f` convex, `P ⪰ 0`    | `F_z = f·⟨z,Pz⟩`                     |
//! | `Sum`        | `F₁ + F₂`                        | sum of convex                        |
//! | `Scale`      | `αF`, `α ≥ 0`                    | nonnegative scaling                  |
//! | `Congruence` | `M F Mᵀ`                         | `F_z` becomes `F_{Mᵀz}`              |
//! | `Hadamard`   | `M ∘ F`, `M ⪰ 0`                 | Schur product theorem                |
//! | `Precompose` | `F(Ax + b)`                      | affine change of variables           |
//! | `BlockDiag`  | `diag(F₁, F₂)`                   | `F_z = (F₁)_{z₁} + (F₂)_{z₂}`        |
//! | `Double`     | `[[F, −F], [−F, F]]`             | `G_z = F_{z₁−z₂}`                    |
//!
//! Lifting by an arbitrary PSD matrix generalizes the `f·[[1,−1],[−1,1]]`
//! construction; its convexity follows from the scalarization column above.

mod atom;
mod deriv;

pub use atom::{ScalarAtom, KINK_TOL};
pub use deriv::Interval1D;

use std::sync::Arc;

use crate::error::{dim_mismatch, Error, Result};
use crate::subgrad::MatTuple;
use crate::symmat::{psd_verdict, Mat, SymMat, DEFAULT_PSD_TOL, MAX_DIM};

/// Largest input dimension accepted.
pub const MAX_INPUT_DIM: usize = 16;

#[derive(Debug, PartialEq)]
pub enum Node {
    Const(SymMat),
    Affine {
        coeffs: MatTuple,
        offset: SymMat,
    },
    Lift {
        atom: ScalarAtom,
        matrix: SymMat,
    },
    Sum(ConvexMatrixExpr, ConvexMatrixExpr),
    Scale {
        alpha: f64,
        arg: ConvexMatrixExpr,
    },
    Congruence {
        factor: Mat,
        arg: ConvexMatrixExpr,
        /// `factor` is square with `|det| > 1e-12`.
        invertible: bool,
    },
    Hadamard {
        mask: SymMat,
        arg: ConvexMatrixExpr,
        /// The entrywise reciprocal of `mask` exists and is PSD.
        reciprocal_psd: bool,
    },
    Precompose {
        arg: ConvexMatrixExpr,
        map: Mat,
        shift: Vec<f64>,
    },
    BlockDiag(ConvexMatrixExpr, ConvexMatrixExpr),
    Double(ConvexMatrixExpr),
}

/// Immutable, cheaply clonable handle to a convex matrix-valued function `ℝᵈ → 𝕊ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexMatrixExpr {
    node: Arc<Node>,
    input_dim: usize,
    output_dim: usize,
}

fn check_dims(d: usize, ell: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::DimensionMismatch("input dimension must be >= 1".into()));
    }
    if d > MAX_INPUT_DIM {
        return Err(Error::DimensionLimit(format!("input dimension {d} > {MAX_INPUT_DIM}")));
    }
    if ell > MAX_DIM {
        return Err(Error::DimensionLimit(format!("output order {ell} > {MAX_DIM}")));
    }
    Ok(())
}

fn require_psd(m: &SymMat) -> Result<()> {
    let v = psd_verdict(m, DEFAULT_PSD_TOL)?;
    match v.witness {
        None => Ok(()),
        Some(witness) => Err(Error::NotPsd {
            min_eigenvalue: v.min_eigenvalue,
            witness,
        }),
    }
}

impl ConvexMatrixExpr {
    fn wrap(node: Node, input_dim: usize, output_dim: usize) -> Result<Self> {
        check_dims(input_dim, output_dim)?;
        Ok(ConvexMatrixExpr {
            node: Arc::new(node),
            input_dim,
            output_dim,
        })
    }

    /// The constant function `x ↦ A` on `ℝᵈ`.
    pub fn constant(d: usize, a: SymMat) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::NonFinite("constant"));
        }
        let ell = a.dim();
        Self::wrap(Node::Const(a), d, ell)
    }

    /// `x ↦ Σᵢ xᵢ V⁽ⁱ⁾ + A₀`
    pub fn affine(coeffs: MatTuple, offset: SymMat) -> Result<Self> {
        if coeffs.ell() != offset.dim() {
            return Err(dim_mismatch("affine offset order", coeffs.ell(), offset.dim()));
        }
        if !offset.is_finite() {
            return Err(Error::NonFinite("affine offset"));
        }
        let (d, ell) = (coeffs.len(), offset.dim());
        Self::wrap(Node::Affine { coeffs, offset }, d, ell)
    }

    /// `x ↦ f(x)·P` for a convex scalar atom `f` and `P ⪰ 0`.
    pub fn lift(atom: ScalarAtom, matrix: SymMat) -> Result<Self> {
        atom.validate()?;
        require_psd(&matrix)?;
        let (d, ell) = (atom.input_dim(), matrix.dim());
        Self::wrap(Node::Lift { atom, matrix }, d, ell)
    }

    /// `diag(f₁(x), …, f_ℓ(x))` as nested block-diagonals of `1 × 1` lifts.
    pub fn diag(atoms: Vec<ScalarAtom>) -> Result<Self> {
        let mut it = atoms.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::DimensionMismatch("diag of no atoms".into()))?;
        let mut acc = Self::lift(first, SymMat::identity(1))?;
        for atom in it {
            acc = Self::block_diag(&acc, &Self::lift(atom, SymMat::identity(1))?)?;
        }
        Ok(acc)
    }

    pub fn sum(f1: &Self, f2: &Self) -> Result<Self> {
        if f1.input_dim != f2.input_dim {
            return Err(dim_mismatch("sum input dimension", f1.input_dim, f2.input_dim));
        }
        if f1.output_dim != f2.output_dim {
            return Err(dim_mismatch("sum output order", f1.output_dim, f2.output_dim));
        }
        Self::wrap(Node::Sum(f1.clone(), f2.clone()), f1.input_dim, f1.output_dim)
    }

    pub fn scale(alpha: f64, f: &Self) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFinite("scale factor"));
        }
        if alpha < 0.0 {
            return Err(Error::NegativeScale(alpha));
        }
        Self::wrap(Node::Scale { alpha, arg: f.clone() }, f.input_dim, f.output_dim)
    }

    /// `x ↦ M F(x) Mᵀ` for `M` of shape `m × ℓ`.
    pub fn congruence(factor: Mat, f: &Self) -> Result<Self> {
        if factor.cols() != f.output_dim {
            return Err(dim_mismatch("congruence factor columns", f.output_dim, factor.cols()));
        }
        let invertible = factor.is_invertible();
        let m = factor.rows();
        Self::wrap(
            Node::Congruence {
                factor,
                arg: f.clone(),
                invertible,
            },
            f.input_dim,
            m,
        )
    }

    /// `x ↦ M ∘ F(x)` for `M ⪰ 0`.
    pub fn hadamard(mask: SymMat, f: &Self) -> Result<Self> {
        if mask.dim() != f.output_dim {
            return Err(dim_mismatch("hadamard mask order", f.output_dim, mask.dim()));
        }
        require_psd(&mask)?;
        let reciprocal_psd = mask.entries().iter().all(|&v| v != 0.0) && {
            let n = SymMat::from_upper(
                mask.dim(),
                mask.entries().iter().map(|v| 1.0 / v).collect(),
            )?;
            psd_verdict(&n, DEFAULT_PSD_TOL)?.is_psd()
        };
        Self::wrap(
            Node::Hadamard {
                mask,
                arg: f.clone(),
                reciprocal_psd,
            },
            f.input_dim,
            f.output_dim,
        )
    }

    /// `y ↦ F(Ay + b)` where `A` has `F.input_dim()` rows.
    pub fn precompose(f: &Self, map: Mat, shift: Vec<f64>) -> Result<Self> {
        if map.rows() != f.input_dim {
            return Err(dim_mismatch("precompose map rows", f.input_dim, map.rows()));
        }
        if shift.len() != f.input_dim {
            return Err(dim_mismatch("precompose shift length", f.input_dim, shift.len()));
        }
        if shift.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("precompose shift"));
        }
        let m = map.cols();
        Self::wrap(
            Node::Precompose {
                arg: f.clone(),
                map,
                shift,
            },
            m,
            f.output_dim,
        )
    }

    pub fn block_diag(f1: &Self, f2: &Self) -> Result<Self> {
        if f1.input_dim != f2.input_dim {
            return Err(dim_mismatch("block_diag input dimension", f1.input_dim, f2.input_dim));
        }
        Self::wrap(
            Node::BlockDiag(f1.clone(), f2.clone()),
            f1.input_dim,
            f1.output_dim + f2.output_dim,
        )
    }

    /// `x ↦ [[F(x), −F(x)], [−F(x), F(x)]]`
    pub fn double(f: &Self) -> Result<Self> {
        Self::wrap(Node::Double(f.clone()), f.input_dim, 2 * f.output_dim)
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    #[inline]
    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    #[inline]
    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn children(&self) -> Vec<&ConvexMatrixExpr> {
        match self.node() {
            Node::Const(_) | Node::Affine { .. } | Node::Lift { .. } => vec![],
            Node::Sum(a, b) | Node::BlockDiag(a, b) => vec![a, b],
            Node::Scale { arg, .. }
            | Node::Congruence { arg, .. }
            | Node::Hadamard { arg, .. }
            | Node::Precompose { arg, .. }
            | Node::Double(arg) => vec![arg],
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(dim_mismatch("point dimension", self.input_dim, x.len()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        Ok(())
    }

    /// `F(x)`
    pub fn evaluate(&self, x: &[f64]) -> Result<SymMat> {
        self.check_point(x)?;
        Ok(self.eval(x))
    }

    pub(crate) fn eval(&self, x: &[f64]) -> SymMat {
        match self.node() {
            Node::Const(a) => a.clone(),
            Node::Affine { coeffs, offset } => {
                let mut out = coeffs.apply(x);
                out += offset;
                out
            }
            Node::Lift { atom, matrix } => matrix.scaled(atom.eval(x)),
            Node::Sum(a, b) => a.eval(x) + b.eval(x),
            Node::Scale { alpha, arg } => arg.eval(x).scaled(*alpha),
            Node::Congruence { factor, arg, .. } => arg.eval(x).congruence(factor),
            Node::Hadamard { mask, arg, .. } => mask.hadamard(&arg.eval(x)),
            Node::Precompose { arg, map, shift } => arg.eval(&affine_image(map, shift, x)),
            Node::BlockDiag(a, b) => SymMat::block_diag(&a.eval(x), &b.eval(x)),
            Node::Double(arg) => arg.eval(x).doubled(),
        }
    }

    /// `F_z(x) = ⟨z, F(x) z⟩`
    pub fn scalarize_eval(&self, z: &[f64], x: &[f64]) -> Result<f64> {
        if z.len() != self.output_dim {
            return Err(dim_mismatch("scalarization vector", self.output_dim, z.len()));
        }
        Ok(self.evaluate(x)?.quad_form(z))
    }

    /// Lower bound on the distance from `x` to the nearest kink of any atom.
    /// Through `F(Ax + b)` the inner distance is divided by `‖A‖_F ≥ ‖A‖₂`.
    pub fn kink_distance(&self, x: &[f64]) -> f64 {
        match self.node() {
            Node::Const(_) | Node::Affine { .. } => f64::INFINITY,
            Node::Lift { atom, .. } => atom.kink_distance(x),
            Node::Precompose { arg, map, shift } => {
                let inner = arg.kink_distance(&affine_image(map, shift, x));
                let norm = map.norm_fro();
                if norm == 0.0 {
                    f64::INFINITY
                } else {
                    inner / norm
                }
            }
            _ => self
                .children()
                .iter()
                .map(|c| c.kink_distance(x))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

pub(crate) fn affine_image(map: &Mat, shift: &[f64], x: &[f64]) -> Vec<f64> {
    let mut u = map.mul_vec(x);
    for (ui, bi) in u.iter_mut().zip(shift) {
        *ui += bi;
    }
    u
}
