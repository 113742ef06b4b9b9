//! Forward subdifferential calculus.
//!
//! [`subgradient`] walks an expression and combines one subgradient per node
//! using the inclusion direction of each calculus rule, so the result is always
//! an element of `∂F(x)` even where the rule is a strict inclusion:
//!
//! * constants and affine maps contribute their own coefficients;
//! * `f·P` contributes `(g₁P, …, g_dP)` for a scalar subgradient `g ∈ ∂f(x)`;
//! * sums add, `αF` scales, `MFMᵀ` and `M∘F` push the children's tuples
//!   through the same map;
//! * `F(Ay + b)` gives `Wⱼ = Σᵢ Aᵢⱼ V⁽ⁱ⁾` from `V ∈ ∂F(Ay + b)`;
//! * block-diagonal and doubled nodes assemble the same block pattern.
//!
//! For univariate functions [`subdiff_interval_1d`] returns the exact
//! subdifferential as a Loewner interval between the one-sided derivatives.

mod tuple;

pub use tuple::MatTuple;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{dim_mismatch, Error, Result};
use crate::expr::{affine_image, ConvexMatrixExpr, Interval1D, Node};
use crate::symmat::SymMat;

/// Default threshold on `‖F'(x; −eᵢ) + F'(x; eᵢ)‖_F` below which a coordinate counts as smooth.
pub const DEFAULT_DIFF_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    AffineExact,
    Lift,
    SumRule,
    Scale,
    Congruence,
    Hadamard,
    Precompose,
    BlockDiag,
    Double,
    #[serde(rename = "right-derivative-1d")]
    RightDerivative1d,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::AffineExact => "affine-exact",
            Rule::Lift => "lift",
            Rule::SumRule => "sum-rule",
            Rule::Scale => "scale",
            Rule::Congruence => "congruence",
            Rule::Hadamard => "hadamard",
            Rule::Precompose => "precompose",
            Rule::BlockDiag => "block-diag",
            Rule::Double => "double",
            Rule::RightDerivative1d => "right-derivative-1d",
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which rule produced each part of a subgradient; mirrors the expression tree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub rule: Rule,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Provenance>,
}

impl Provenance {
    fn leaf(rule: Rule) -> Self {
        Provenance { rule, children: vec![] }
    }

    /// Same tree shape as `expr`.
    pub fn matches_shape(&self, expr: &ConvexMatrixExpr) -> bool {
        let kids = expr.children();
        self.children.len() == kids.len()
            && self.children.iter().zip(kids).all(|(p, e)| p.matches_shape(e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgradientCert {
    pub value: MatTuple,
    pub provenance: Provenance,
}

/// An element of `∂F(x)` assembled from the calculus rules.
pub fn subgradient(f: &ConvexMatrixExpr, x: &[f64]) -> Result<SubgradientCert> {
    f.check_point(x)?;
    let (value, provenance) = forward(f, x);
    Ok(SubgradientCert { value, provenance })
}

fn forward(f: &ConvexMatrixExpr, x: &[f64]) -> (MatTuple, Provenance) {
    match f.node() {
        Node::Const(a) => (
            MatTuple::zeros(f.input_dim(), a.dim()),
            Provenance::leaf(Rule::AffineExact),
        ),
        Node::Affine { coeffs, .. } => (coeffs.clone(), Provenance::leaf(Rule::AffineExact)),
        Node::Lift { atom, matrix } => {
            let g = atom.subgradient(x);
            let value = MatTuple::new(g.iter().map(|gi| matrix.scaled(*gi)).collect())
                .expect("lift tuple");
            (value, Provenance::leaf(Rule::Lift))
        }
        Node::Sum(a, b) => {
            let (va, pa) = forward(a, x);
            let (vb, pb) = forward(b, x);
            (va.zip_with(&vb, |p, q| p + q), node(Rule::SumRule, vec![pa, pb]))
        }
        Node::Scale { alpha, arg } => {
            let (v, p) = forward(arg, x);
            (v.scaled(*alpha), node(Rule::Scale, vec![p]))
        }
        Node::Congruence { factor, arg, .. } => {
            let (v, p) = forward(arg, x);
            (v.map(|m| m.congruence(factor)), node(Rule::Congruence, vec![p]))
        }
        Node::Hadamard { mask, arg, .. } => {
            let (v, p) = forward(arg, x);
            (v.map(|m| mask.hadamard(m)), node(Rule::Hadamard, vec![p]))
        }
        Node::Precompose { arg, map, shift } => {
            let (v, p) = forward(arg, &affine_image(map, shift, x));
            let ell = v.ell();
            let w = (0..map.cols())
                .map(|j| {
                    let mut acc = SymMat::zeros(ell);
                    for (i, vi) in v.iter().enumerate() {
                        let aij = map.get(i, j);
                        if aij != 0.0 {
                            acc.axpy(aij, vi);
                        }
                    }
                    acc
                })
                .collect();
            (MatTuple::new(w).expect("precompose tuple"), node(Rule::Precompose, vec![p]))
        }
        Node::BlockDiag(a, b) => {
            let (va, pa) = forward(a, x);
            let (vb, pb) = forward(b, x);
            (
                va.zip_with(&vb, SymMat::block_diag),
                node(Rule::BlockDiag, vec![pa, pb]),
            )
        }
        Node::Double(arg) => {
            let (v, p) = forward(arg, x);
            (v.map(SymMat::doubled), node(Rule::Double, vec![p]))
        }
    }
}

fn node(rule: Rule, children: Vec<Provenance>) -> Provenance {
    Provenance { rule, children }
}

/// The exact subdifferential of a univariate convex function:
/// `∂F(x) = {V : F'₋(x) ⪯ V ⪯ F'₊(x)}`.
pub fn subdiff_interval_1d(f: &ConvexMatrixExpr, x: f64) -> Result<Interval1D> {
    f.one_sided_1d(x)
}

/// The right derivative `F'₊(x)`, which is itself a subgradient of a univariate `F`.
pub fn subgradient_right_1d(f: &ConvexMatrixExpr, x: f64) -> Result<SubgradientCert> {
    let iv = f.one_sided_1d(x)?;
    Ok(SubgradientCert {
        value: MatTuple::from(iv.right),
        provenance: Provenance::leaf(Rule::RightDerivative1d),
    })
}

/// `(F'(x; e₁), …, F'(x; e_d))` when every coordinate is two-sided smooth, in
/// which case the subdifferential is this single tuple.
pub fn gradient_if_smooth(f: &ConvexMatrixExpr, x: &[f64], tol: f64) -> Result<MatTuple> {
    f.check_point(x)?;
    let d = f.input_dim();
    let mut grads = Vec::with_capacity(d);
    let mut e = vec![0.0; d];
    for i in 0..d {
        e[i] = 1.0;
        let forward = f.deriv(x, &e);
        e[i] = -1.0;
        let backward = f.deriv(x, &e);
        e[i] = 0.0;
        if (&forward + &backward).norm_fro() > tol {
            return Err(Error::NotDifferentiable(i));
        }
        grads.push(forward);
    }
    MatTuple::new(grads)
}

/// Gradients sampled at smooth points near `x`; their convex hull approximates
/// the Clarke generalized Jacobian at `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClarkeSample {
    pub generators: Vec<MatTuple>,
    /// Points drawn from the ball.
    pub drawn: usize,
    /// Points rejected as nonsmooth.
    pub nonsmooth: usize,
}

impl ClarkeSample {
    /// Largest tuple norm among the generators, a finite Lipschitz estimate.
    pub fn lipschitz_estimate(&self) -> f64 {
        self.generators.iter().map(MatTuple::norm).fold(0.0, f64::max)
    }

    /// Generators with exact duplicates merged, in first-seen order, with counts.
    pub fn distinct(&self) -> Vec<(MatTuple, usize)> {
        let mut out: Vec<(MatTuple, usize)> = Vec::new();
        for g in &self.generators {
            match out.iter_mut().find(|(h, _)| h == g) {
                Some((_, n)) => *n += 1,
                None => out.push((g.clone(), 1)),
            }
        }
        out
    }
}

/// Draws `n` points uniformly from the Euclidean ball `B(x, radius)` and keeps
/// the gradients at the smooth ones.
pub fn clarke_sample(
    f: &ConvexMatrixExpr,
    x: &[f64],
    n: usize,
    radius: f64,
    seed: u64,
) -> Result<ClarkeSample> {
    f.check_point(x)?;
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius must be > 0, got {radius}")));
    }
    let d = f.input_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut generators = Vec::new();
    let mut nonsmooth = 0;
    for _ in 0..n {
        let p = uniform_in_ball(&mut rng, x, radius);
        match gradient_if_smooth(f, &p, DEFAULT_DIFF_TOL) {
            Ok(g) => generators.push(g),
            Err(Error::NotDifferentiable(_)) => nonsmooth += 1,
            Err(e) => return Err(e),
        }
    }
    if generators.is_empty() {
        return Err(Error::NoSmoothSamples(n));
    }
    debug_assert_eq!(generators[0].len(), d);
    Ok(ClarkeSample {
        generators,
        drawn: n,
        nonsmooth,
    })
}

pub(crate) fn uniform_in_ball(rng: &mut impl Rng, center: &[f64], radius: f64) -> Vec<f64> {
    let d = center.len();
    let dir = unit_vector(rng, d);
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    center.iter().zip(dir).map(|(c, u)| c + r * u).collect()
}

/// Uniform on the unit sphere in `ℝⁿ`.
pub(crate) fn unit_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub(crate) fn check_tuple(f: &ConvexMatrixExpr, v: &MatTuple) -> Result<()> {
    if v.len() != f.input_dim() {
        return Err(dim_mismatch("tuple length", f.input_dim(), v.len()));
    }
    if v.ell() != f.output_dim() {
        return Err(dim_mismatch("tuple matrix order", f.output_dim(), v.ell()));
    }
    Ok(())
}
