//! Random matrices and random convex expressions for property tests and for
//! the acceptance suite.

use rand::Rng;

use crate::expr::{ConvexMatrixExpr, Interval1D, ScalarAtom};
use crate::subgrad::MatTuple;
use crate::symmat::{eigen_sym, spectral_map, Mat, SymMat};

/// Symmetric matrix with entries uniform in `[−scale, scale]`.
pub fn random_sym(rng: &mut impl Rng, n: usize, scale: f64) -> SymMat {
    SymMat::from_fn(n, |_, _| rng.random_range(-scale..=scale))
}

/// `Σ_{k<rank} v_k v_kᵀ` with `v_k` entries uniform in `[−1, 1]`.
pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> SymMat {
    let mut out = SymMat::zeros(n);
    for _ in 0..rank {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        out.axpy(1.0, &SymMat::outer(&v));
    }
    out
}

pub fn random_mat(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> Mat {
    let data = (0..rows * cols).map(|_| rng.random_range(-scale..=scale)).collect();
    Mat::new(rows, cols, data).expect("sizes agree")
}

pub fn random_point(rng: &mut impl Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-scale..=scale)).collect()
}

pub fn random_tuple(rng: &mut impl Rng, d: usize, ell: usize, scale: f64) -> MatTuple {
    MatTuple::new((0..d).map(|_| random_sym(rng, ell, scale)).collect()).expect("nonempty")
}

/// `A^{1/2}` of the PSD part of `a`.
pub fn psd_sqrt(a: &SymMat) -> SymMat {
    spectral_map(a, |l| l.max(0.0).sqrt()).expect("finite")
}

/// A random element `L + R^{1/2} Θ R^{1/2}` of `[L, L + R]`, `R = right − left`,
/// with `Θ = Q diag(u) Qᵀ`, `u ∈ [0, 1]`, so that `0 ⪯ Θ ⪯ I`.
pub fn sample_in_interval(rng: &mut impl Rng, iv: &Interval1D) -> SymMat {
    let n = iv.left.dim();
    let root = psd_sqrt(&iv.width());
    let q = eigen_sym(&random_sym(rng, n, 1.0)).expect("finite").basis;
    let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let theta = SymMat::from_fn(n, |i, j| (0..n).map(|k| q[k][i] * u[k] * q[k][j]).sum());
    let inner = theta.congruence(&Mat::from_rows(&root.to_rows()).expect("square"));
    &iv.left + &inner
}

pub fn random_atom(rng: &mut impl Rng, d: usize, centered: bool) -> ScalarAtom {
    match rng.random_range(0..4) {
        0 => ScalarAtom::affine(random_point(rng, d, 2.0), rng.random_range(-1.0..=1.0))
            .expect("valid"),
        1 => ScalarAtom::abs_coord(rng.random_range(0..d), d).expect("valid"),
        _ => {
            let k = rng.random_range(2..=3);
            let pieces = (0..k)
                .map(|_| {
                    let b = if centered { 0.0 } else { rng.random_range(-1.0..=1.0) };
                    (random_point(rng, d, 2.0), b)
                })
                .collect();
            ScalarAtom::max_affine(pieces).expect("valid")
        }
    }
}

/// Random expression trees built only from the convexity-preserving constructors.
#[derive(Clone, Copy, Debug)]
pub struct ExprGen {
    pub max_depth: usize,
    pub max_d: usize,
    pub max_ell: usize,
    /// All precompositions have zero shift and all max-affine atoms zero
    /// offsets, so every atom has a kink at the origin.
    pub centered: bool,
}

impl Default for ExprGen {
    fn default() -> Self {
        ExprGen {
            max_depth: 4,
            max_d: 3,
            max_ell: 4,
            centered: false,
        }
    }
}

impl ExprGen {
    /// Random `d ∈ 1..=max_d`, `ℓ ∈ 1..=max_ell`.
    pub fn any(&self, rng: &mut impl Rng) -> ConvexMatrixExpr {
        let d = rng.random_range(1..=self.max_d);
        let ell = rng.random_range(1..=self.max_ell);
        self.sample(rng, d, ell, self.max_depth)
    }

    pub fn sample(&self, rng: &mut impl Rng, d: usize, ell: usize, depth: usize) -> ConvexMatrixExpr {
        if depth <= 1 || rng.random_bool(0.25) {
            return self.leaf(rng, d, ell);
        }
        let next = depth - 1;
        loop {
            match rng.random_range(0..7) {
                0 => {
                    let a = self.sample(rng, d, ell, next);
                    let b = self.sample(rng, d, ell, next);
                    return ConvexMatrixExpr::sum(&a, &b).expect("valid");
                }
                1 => {
                    let a = self.sample(rng, d, ell, next);
                    return ConvexMatrixExpr::scale(rng.random_range(0.0..=3.0), &a).expect("valid");
                }
                2 => {
                    let m = rng.random_range(1..=4);
                    let a = self.sample(rng, d, m, next);
                    return ConvexMatrixExpr::congruence(random_mat(rng, ell, m, 1.5), &a)
                        .expect("valid");
                }
                3 => {
                    let a = self.sample(rng, d, ell, next);
                    let mask = random_psd(rng, ell, ell);
                    return ConvexMatrixExpr::hadamard(mask, &a).expect("valid");
                }
                4 => {
                    let inner = rng.random_range(1..=3);
                    let a = self.sample(rng, inner, ell, next);
                    let shift = if self.centered {
                        vec![0.0; inner]
                    } else {
                        random_point(rng, inner, 1.0)
                    };
                    return ConvexMatrixExpr::precompose(&a, random_mat(rng, inner, d, 1.5), shift)
                        .expect("valid");
                }
                5 if ell >= 2 => {
                    let split = rng.random_range(1..ell);
                    let a = self.sample(rng, d, split, next);
                    let b = self.sample(rng, d, ell - split, next);
                    return ConvexMatrixExpr::block_diag(&a, &b).expect("valid");
                }
                6 if ell % 2 == 0 => {
                    let a = self.sample(rng, d, ell / 2, next);
                    return ConvexMatrixExpr::double(&a).expect("valid");
                }
                _ => continue,
            }
        }
    }

    fn leaf(&self, rng: &mut impl Rng, d: usize, ell: usize) -> ConvexMatrixExpr {
        match rng.random_range(0..5) {
            0 => ConvexMatrixExpr::constant(d, random_sym(rng, ell, 2.0)).expect("valid"),
            1 => ConvexMatrixExpr::affine(random_tuple(rng, d, ell, 2.0), random_sym(rng, ell, 2.0))
                .expect("valid"),
            _ => {
                let rank = rng.random_range(1..=ell);
                let p = random_psd(rng, ell, rank);
                ConvexMatrixExpr::lift(random_atom(rng, d, self.centered), p).expect("valid")
            }
        }
    }
}
