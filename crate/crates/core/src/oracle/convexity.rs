use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::ConvexMatrixExpr;
use crate::symmat::{psd_verdict, SymMat};

/// Anything that maps `ℝᵈ` into `𝕊ℓ`, convex or not.
pub trait MatrixFunction {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> SymMat;
}

impl MatrixFunction for ConvexMatrixExpr {
    fn input_dim(&self) -> usize {
        ConvexMatrixExpr::input_dim(self)
    }

    fn output_dim(&self) -> usize {
        ConvexMatrixExpr::output_dim(self)
    }

    fn value(&self, x: &[f64]) -> SymMat {
        self.eval(x)
    }
}

/// Wraps a closure as a [`MatrixFunction`].
pub struct FnMatrix<F> {
    pub input_dim: usize,
    pub output_dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> SymMat> MatrixFunction for FnMatrix<F> {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn value(&self, x: &[f64]) -> SymMat {
        (self.f)(x)
    }
}

/// `⟨z, (αF(x₁) + (1 − α)F(x₂) − F(αx₁ + (1 − α)x₂)) z⟩ = margin < −threshold`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityWitness {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub alpha: f64,
    pub z: Vec<f64>,
    pub margin: f64,
    pub threshold: f64,
}

const SCALES: [f64; 4] = [1e-3, 0.1, 1.0, 10.0];

/// Searches for a violation of midpoint-type convexity. Symmetric pairs
/// `±e_i` (at several scales) come first, then `budget` random triples with
/// points drawn from cubes of random scale. `Ok(None)` means nothing was found.
pub fn falsify_convexity(
    f: &impl MatrixFunction,
    budget: usize,
    seed: u64,
    psd_tol: f64,
) -> Result<Option<ConvexityWitness>> {
    if budget == 0 {
        return Err(Error::BudgetZero);
    }
    let d = f.input_dim();
    let test = |x1: Vec<f64>, x2: Vec<f64>, alpha: f64| -> Result<Option<ConvexityWitness>> {
        let mid: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
        let mut gap = f.value(&x1).scaled(alpha);
        gap.axpy(1.0 - alpha, &f.value(&x2));
        gap.axpy(-1.0, &f.value(&mid));
        if !gap.is_finite() {
            return Err(Error::NonFinite("function value"));
        }
        let verdict = psd_verdict(&gap, psd_tol)?;
        Ok(verdict.witness.map(|z| ConvexityWitness {
            x1,
            x2,
            alpha,
            z,
            margin: verdict.min_eigenvalue,
            threshold: verdict.tolerance_used,
        }))
    };
    for s in [1.0, 0.1, 10.0] {
        for i in 0..d {
            let mut x1 = vec![0.0; d];
            let mut x2 = vec![0.0; d];
            x1[i] = -s;
            x2[i] = s;
            if let Some(w) = test(x1, x2, 0.5)? {
                return Ok(Some(w));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..budget {
        let s = SCALES[k % SCALES.len()];
        let x1: Vec<f64> = (0..d).map(|_| rng.random_range(-s..=s)).collect();
        let x2: Vec<f64> = (0..d).map(|_| rng.random_range(-s..=s)).collect();
        let alpha = rng.random_range(0.0..=1.0);
        if let Some(w) = test(x1, x2, alpha)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}
