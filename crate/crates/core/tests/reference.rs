//! Comparisons against deliberately naive re-implementations: dense nested-loop
//! evaluation of expression trees, closed-form small eigenproblems, random-probe
//! PSD tests and finite differences.

use matsubdiff::expr::{Node, ScalarAtom};
use matsubdiff::oracle::check_subgradient;
use matsubdiff::subgrad::{subdiff_interval_1d, subgradient};
use matsubdiff::symmat::{eigen_sym, psd_verdict, DEFAULT_PSD_TOL};
use matsubdiff::testing::{random_point, random_sym, ExprGen};
use matsubdiff::{ConvexMatrixExpr, SymMat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Dense = Vec<Vec<f64>>;

fn atom_ref(atom: &ScalarAtom, x: &[f64]) -> f64 {
    match atom {
        ScalarAtom::AffineScalar { a, b } => a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b,
        ScalarAtom::AbsCoord { index, .. } => x[*index].abs(),
        ScalarAtom::MaxAffine { pieces } => pieces
            .iter()
            .map(|(a, b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + b)
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

fn dense(m: &SymMat) -> Dense {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect()).collect()
}

fn eval_ref(f: &ConvexMatrixExpr, x: &[f64]) -> Dense {
    match f.node() {
        Node::Const(a) => dense(a),
        Node::Affine { coeffs, offset } => {
            let mut out = dense(offset);
            for (xi, v) in x.iter().zip(coeffs.iter()) {
                for (i, row) in out.iter_mut().enumerate() {
                    for (j, e) in row.iter_mut().enumerate() {
                        *e += xi * v.get(i, j);
                    }
                }
            }
            out
        }
        Node::Lift { atom, matrix } => {
            let s = atom_ref(atom, x);
            dense(matrix).into_iter().map(|r| r.into_iter().map(|e| s * e).collect()).collect()
        }
        Node::Sum(a, b) => {
            let (p, q) = (eval_ref(a, x), eval_ref(b, x));
            p.iter().zip(&q).map(|(r, s)| r.iter().zip(s).map(|(u, v)| u + v).collect()).collect()
        }
        Node::Scale { alpha, arg } => eval_ref(arg, x)
            .into_iter()
            .map(|r| r.into_iter().map(|e| alpha * e).collect())
            .collect(),
        Node::Congruence { factor, arg, .. } => {
            let inner = eval_ref(arg, x);
            let (rows, k) = (factor.rows(), factor.cols());
            let mut out = vec![vec![0.0; rows]; rows];
            for i in 0..rows {
                for j in 0..rows {
                    for p in 0..k {
                        for q in 0..k {
                            out[i][j] += factor.get(i, p) * inner[p][q] * factor.get(j, q);
                        }
                    }
                }
            }
            out
        }
        Node::Hadamard { mask, arg, .. } => {
            let inner = eval_ref(arg, x);
            (0..mask.dim())
                .map(|i| (0..mask.dim()).map(|j| mask.get(i, j) * inner[i][j]).collect())
                .collect()
        }
        Node::Precompose { arg, map, shift } => {
            let u: Vec<f64> = (0..map.rows())
                .map(|i| (0..map.cols()).map(|j| map.get(i, j) * x[j]).sum::<f64>() + shift[i])
                .collect();
            eval_ref(arg, &u)
        }
        Node::BlockDiag(a, b) => {
            let (p, q) = (eval_ref(a, x), eval_ref(b, x));
            let (n1, n) = (p.len(), p.len() + q.len());
            let mut out = vec![vec![0.0; n]; n];
            for i in 0..n1 {
                out[i][..n1].copy_from_slice(&p[i]);
            }
            for i in 0..q.len() {
                out[n1 + i][n1..].copy_from_slice(&q[i]);
            }
            out
        }
        Node::Double(arg) => {
            let p = eval_ref(arg, x);
            let n = p.len();
            let mut out = vec![vec![0.0; 2 * n]; 2 * n];
            for i in 0..n {
                for j in 0..n {
                    out[i][j] = p[i][j];
                    out[n + i][n + j] = p[i][j];
                    out[i][n + j] = -p[i][j];
                    out[n + i][j] = -p[i][j];
                }
            }
            out
        }
    }
}

/// Smallest `⟨z, A z⟩` over many random unit vectors plus the coordinate axes.
fn probe_min(a: &SymMat, rng: &mut ChaCha8Rng, probes: usize) -> f64 {
    let n = a.dim();
    let mut best = (0..n).map(|i| a.get(i, i)).fold(f64::INFINITY, f64::min);
    for _ in 0..probes {
        let z = random_point(rng, n, 1.0);
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let z: Vec<f64> = z.iter().map(|v| v / norm).collect();
        best = best.min(a.quad_form(&z));
    }
    best
}

#[test]
fn evaluation_matches_naive_dense_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in 0..300 {
        let f = ExprGen { centered: k % 2 == 0, ..ExprGen::default() }.any(&mut rng);
        let x = random_point(&mut rng, f.input_dim(), 3.0);
        let got = f.evaluate(&x).unwrap();
        let want = eval_ref(&f, &x);
        let scale = 1.0 + want.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..got.dim() {
            for j in 0..got.dim() {
                assert!((got.get(i, j) - want[i][j]).abs() <= 1e-12 * scale, "expr {k} entry ({i},{j})");
            }
        }
    }
}

#[test]
fn two_by_two_eigenvalues_match_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..1000 {
        let a = random_sym(&mut rng, 2, 5.0);
        let (p, q, r) = (a.get(0, 0), a.get(0, 1), a.get(1, 1));
        let mean = 0.5 * (p + r);
        let rad = (0.25 * (p - r).powi(2) + q * q).sqrt();
        let s = eigen_sym(&a).unwrap();
        assert!((s.eigenvalues[0] - (mean - rad)).abs() <= 1e-13 * (1.0 + rad + mean.abs()));
        assert!((s.eigenvalues[1] - (mean + rad)).abs() <= 1e-13 * (1.0 + rad + mean.abs()));
    }
    // eigenvalues of the two lifted matrices are 0 and 2
    for m in [[[1.0, -1.0], [-1.0, 1.0]], [[1.0, 1.0], [1.0, 1.0]]] {
        let a = SymMat::from_rows(&[m[0].to_vec(), m[1].to_vec()]).unwrap();
        let s = eigen_sym(&a).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-15 && (s.eigenvalues[1] - 2.0).abs() < 1e-15);
    }
}

#[test]
fn trace_and_determinant_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..300 {
        let a = random_sym(&mut rng, 3, 3.0);
        let s = eigen_sym(&a).unwrap();
        let e = &s.eigenvalues;
        let g = |i, j| a.get(i, j);
        let det = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
            + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
        assert!((e.iter().sum::<f64>() - a.trace()).abs() <= 1e-12);
        assert!((e.iter().product::<f64>() - det).abs() <= 1e-11);
    }
}

#[test]
fn psd_verdict_agrees_with_random_probes() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..300 {
        let n = rng.random_range(1..=4);
        let a = random_sym(&mut rng, n, 1.0);
        let v = psd_verdict(&a, DEFAULT_PSD_TOL).unwrap();
        let probed = probe_min(&a, &mut rng, 2000);
        // probing can only overestimate the minimum
        assert!(probed >= v.min_eigenvalue - 1e-12);
        if probed < -v.tolerance_used {
            assert!(!v.is_psd());
        }
    }
}

#[test]
fn forward_subgradients_pass_a_dense_probe_of_the_defining_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for k in 0..60 {
        let f = ExprGen { centered: true, max_d: 2, ..ExprGen::default() }.any(&mut rng);
        let d = f.input_dim();
        let x = if k % 2 == 0 { vec![0.0; d] } else { random_point(&mut rng, d, 1.0) };
        let v = subgradient(&f, &x).unwrap().value;
        let fx = eval_ref(&f, &x);
        for _ in 0..200 {
            let y = random_point(&mut rng, d, 3.0);
            let fy = eval_ref(&f, &y);
            let step: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            let lin = v.apply(&step);
            let n = fx.len();
            let gap = SymMat::from_fn(n, |i, j| fy[i][j] - fx[i][j] - lin.get(i, j));
            let scale = 1.0 + gap.norm_fro();
            assert!(probe_min(&gap, &mut rng, 50) >= -1e-9 * scale, "expr {k}");
        }
    }
}

#[test]
fn one_sided_derivatives_match_difference_quotients() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..200 {
        let gen = ExprGen { max_d: 1, centered: true, ..ExprGen::default() };
        let ell = rng.random_range(1..=4);
        let f = gen.sample(&mut rng, 1, ell, 4);
        // homogeneous pieces: kinks only at 0, so quotients are exact on each side
        let iv = subdiff_interval_1d(&f, 0.0).unwrap();
        let f0 = eval_ref(&f, &[0.0]);
        for (t, want) in [(0.5, &iv.right), (-0.5, &iv.left)] {
            let ft = eval_ref(&f, &[t]);
            for i in 0..ell {
                for j in 0..ell {
                    let q = (ft[i][j] - f0[i][j]) / t;
                    assert!((q - want.get(i, j)).abs() <= 1e-12 * (1.0 + q.abs()));
                }
            }
        }
    }
}

#[test]
fn candidates_off_the_interval_are_rejected_by_the_oracle() {
    // |x|·P at 0 has subdifferential {sP : s ∈ [−1, 1]} when P has rank one
    let p = SymMat::outer(&[1.0, 2.0]);
    let f = ConvexMatrixExpr::lift(ScalarAtom::abs_coord(0, 1).unwrap(), p.clone()).unwrap();
    for k in 0..=40 {
        let s = -2.0 + 0.1 * k as f64;
        let v = matsubdiff::MatTuple::from(p.scaled(s));
        let inside = s.abs() <= 1.0 + 1e-12;
        assert_eq!(!check_subgradient(&f, &[0.0], &v, 1, 0).unwrap().is_falsified(), inside, "s = {s}");
    }
}
