//! Named worked examples, each with a list of executable facts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{ConvexMatrixExpr, ScalarAtom};
use crate::oracle::{falsify_convexity, FnMatrix, Oracle, Outcome};
use crate::subgrad::{clarke_sample, gradient_if_smooth, subdiff_interval_1d, subgradient, MatTuple, DEFAULT_DIFF_TOL};
use crate::symmat::{SymMat, DEFAULT_PSD_TOL};

pub const EXAMPLE_NAMES: [&str; 4] = ["abs-sum-2x2", "diag-max-2x", "sum-strict", "double-abs"];

type Check = Box<dyn Fn(&ConvexMatrixExpr) -> std::result::Result<(), String> + Send + Sync>;

pub struct Fact {
    pub description: &'static str,
    pub check: Check,
}

pub struct WorkedExample {
    pub name: &'static str,
    pub expression: ConvexMatrixExpr,
    pub facts: Vec<Fact>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactOutcome {
    pub description: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl WorkedExample {
    pub fn run(&self) -> Vec<FactOutcome> {
        self.facts
            .iter()
            .map(|fact| {
                let r = (fact.check)(&self.expression);
                FactOutcome {
                    description: fact.description,
                    passed: r.is_ok(),
                    detail: r.err(),
                }
            })
            .collect()
    }
}

fn fact(
    description: &'static str,
    check: impl Fn(&ConvexMatrixExpr) -> std::result::Result<(), String> + Send + Sync + 'static,
) -> Fact {
    Fact {
        description,
        check: Box::new(check),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn s<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn m(rows: &[[f64; 2]; 2]) -> SymMat {
    SymMat::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).expect("symmetric")
}

pub fn ones2() -> SymMat {
    m(&[[1.0, 1.0], [1.0, 1.0]])
}

pub fn alt2() -> SymMat {
    m(&[[1.0, -1.0], [-1.0, 1.0]])
}

/// `|x⁽¹⁾|·[[1,1],[1,1]] + |x⁽²⁾|·[[1,−1],[−1,1]]`
pub fn abs_sum_2x2() -> ConvexMatrixExpr {
    let f1 = ConvexMatrixExpr::lift(ScalarAtom::abs_coord(0, 2).expect("valid"), ones2()).expect("psd");
    let f2 = ConvexMatrixExpr::lift(ScalarAtom::abs_coord(1, 2).expect("valid"), alt2()).expect("psd");
    ConvexMatrixExpr::sum(&f1, &f2).expect("same shape")
}

/// `diag(max{0, 2x}, max{0, 2x})`
pub fn diag_max_2x() -> ConvexMatrixExpr {
    ConvexMatrixExpr::diag(vec![ScalarAtom::hinge(2.0), ScalarAtom::hinge(2.0)]).expect("valid")
}

/// `(diag(max{0, 2x}, 0), diag(0, max{0, 2x}))`, summing to [`diag_max_2x`].
pub fn hinge_split() -> (ConvexMatrixExpr, ConvexMatrixExpr) {
    let h = ConvexMatrixExpr::lift(ScalarAtom::hinge(2.0), SymMat::identity(1)).expect("psd");
    let z = ConvexMatrixExpr::constant(1, SymMat::zeros(1)).expect("valid");
    (
        ConvexMatrixExpr::block_diag(&h, &z).expect("valid"),
        ConvexMatrixExpr::block_diag(&z, &h).expect("valid"),
    )
}

/// `[[|x|, −|x|], [−|x|, |x|]]`
pub fn double_abs() -> ConvexMatrixExpr {
    let a = ConvexMatrixExpr::lift(ScalarAtom::abs_coord(0, 1).expect("valid"), SymMat::identity(1))
        .expect("psd");
    ConvexMatrixExpr::double(&a).expect("valid")
}

/// `V₀ = [[1,1],[1,1]]`
pub fn v0() -> MatTuple {
    MatTuple::from(ones2())
}

/// Distance in Frobenius norm from `v` to the segment `{tI : t ∈ [lo, hi]}`.
pub fn distance_to_identity_segment(v: &SymMat, lo: f64, hi: f64) -> f64 {
    let n = v.dim() as f64;
    let t = (v.trace() / n).clamp(lo, hi);
    (v - &SymMat::identity(v.dim()).scaled(t)).norm_fro()
}

pub fn build_example(name: &str) -> Result<WorkedExample> {
    match name {
        "abs-sum-2x2" => Ok(WorkedExample {
            name: "abs-sum-2x2",
            expression: abs_sum_2x2(),
            facts: abs_sum_facts(),
        }),
        "diag-max-2x" => Ok(WorkedExample {
            name: "diag-max-2x",
            expression: diag_max_2x(),
            facts: diag_max_facts(),
        }),
        "sum-strict" => Ok(WorkedExample {
            name: "sum-strict",
            expression: diag_max_2x(),
            facts: sum_strict_facts(),
        }),
        "double-abs" => Ok(WorkedExample {
            name: "double-abs",
            expression: double_abs(),
            facts: double_abs_facts(),
        }),
        other => Err(Error::UnknownExample(other.to_string())),
    }
}

fn abs_sum_facts() -> Vec<Fact> {
    vec![
        fact("F(1, -2) = [[3, -1], [-1, 3]]", |f| {
            let v = s(f.evaluate(&[1.0, -2.0]))?;
            ensure(v == m(&[[3.0, -1.0], [-1.0, 3.0]]), || format!("got {:?}", v.to_rows()))
        }),
        fact(
            "F_z(x) = |x1|(z1 + z2)^2 + |x2|(z1 - z2)^2 at 100 random (x, z), error <= 1e-12",
            |f| {
                let mut rng = ChaCha8Rng::seed_from_u64(2024);
                for _ in 0..100 {
                    let x: Vec<f64> = (0..2).map(|_| rng.random_range(-10.0..=10.0)).collect();
                    let z: Vec<f64> = (0..2).map(|_| rng.random_range(-10.0..=10.0)).collect();
                    let lhs = s(f.scalarize_eval(&z, &x))?;
                    let rhs = x[0].abs() * (z[0] + z[1]).powi(2) + x[1].abs() * (z[0] - z[1]).powi(2);
                    ensure((lhs - rhs).abs() <= 1e-12, || format!("x={x:?} z={z:?}: {lhs} vs {rhs}"))?;
                }
                Ok(())
            },
        ),
        fact("no convexity violation in 10^4 samples", |f| {
            let w = s(falsify_convexity(f, 10_000, 7, DEFAULT_PSD_TOL))?;
            ensure(w.is_none(), || format!("witness {w:?}"))
        }),
        fact("the off-diagonal entry |x1| - |x2| is not convex", |f| {
            let f = f.clone();
            let entry = FnMatrix {
                input_dim: 2,
                output_dim: 1,
                f: move |x: &[f64]| SymMat::diag(&[f.eval(x).get(0, 1)]),
            };
            let w = s(falsify_convexity(&entry, 100, 7, DEFAULT_PSD_TOL))?;
            ensure(w.is_some(), || "no witness".into())
        }),
        fact(
            "forward subgradient at 0 is (t[[1,1],[1,1]], s[[1,-1],[-1,1]]) with t, s in [-1, 1] and is not falsified",
            |f| {
                let cert = s(subgradient(f, &[0.0, 0.0]))?;
                let (a, b) = (cert.value.get(0), cert.value.get(1));
                let t = a.get(0, 0);
                let u = b.get(0, 0);
                ensure(
                    a == &ones2().scaled(t) && b == &alt2().scaled(u) && t.abs() <= 1.0 && u.abs() <= 1.0,
                    || format!("got {:?}", cert.value),
                )?;
                let v = s(Oracle::default().check_subgradient(f, &[0.0, 0.0], &cert.value, 1000, 7))?;
                ensure(!v.is_falsified(), || format!("{v:?}"))
            },
        ),
    ]
}

fn diag_max_facts() -> Vec<Fact> {
    vec![
        fact("F'+(0) = 2I and F'-(0) = 0", |f| {
            let iv = s(subdiff_interval_1d(f, 0.0))?;
            ensure(
                (&iv.right - &SymMat::identity(2).scaled(2.0)).max_abs() <= 1e-12 && iv.left.max_abs() <= 1e-12,
                || format!("got {iv:?}"),
            )
        }),
        fact("V0 = [[1,1],[1,1]] is verified as a subgradient at 0", |f| {
            let v = s(Oracle::default().check_subgradient(f, &[0.0], &v0(), 1, 7))?;
            ensure(v.outcome == Outcome::VerifiedExact, || format!("{v:?}"))
        }),
        fact("Clarke samples near 0 are all 0 or 2I", |f| {
            let c = s(clarke_sample(f, &[0.0], 1000, 1e-3, 7))?;
            let two = SymMat::identity(2).scaled(2.0);
            for g in &c.generators {
                let g = g.get(0);
                ensure(g.max_abs() <= 1e-9 || (g - &two).max_abs() <= 1e-9, || format!("generator {g:?}"))?;
            }
            Ok(())
        }),
        fact("V0 is at distance sqrt(2) from {tI : t in [0, 2]}, so the Clarke set is strictly smaller", |_| {
            let dist = distance_to_identity_segment(&ones2(), 0.0, 2.0);
            ensure((dist - 2f64.sqrt()).abs() <= 1e-12, || format!("distance {dist}"))
        }),
        fact("F is not differentiable at 0", |f| match gradient_if_smooth(f, &[0.0], DEFAULT_DIFF_TOL) {
            Err(Error::NotDifferentiable(0)) => Ok(()),
            other => Err(format!("{other:?}")),
        }),
    ]
}

fn sum_strict_facts() -> Vec<Fact> {
    vec![
        fact("F = F1 + F2 with F1 = diag(max{0,2x}, 0), F2 = diag(0, max{0,2x})", |f| {
            let (f1, f2) = hinge_split();
            let g = s(ConvexMatrixExpr::sum(&f1, &f2))?;
            for x in [-1.5, 0.0, 0.5, 3.0] {
                ensure(s(g.evaluate(&[x]))? == s(f.evaluate(&[x]))?, || format!("differ at {x}"))?;
            }
            Ok(())
        }),
        fact("dF1(0) = [0, diag(2, 0)] and dF2(0) = [0, diag(0, 2)]", |_| {
            let (f1, f2) = hinge_split();
            let i1 = s(subdiff_interval_1d(&f1, 0.0))?;
            let i2 = s(subdiff_interval_1d(&f2, 0.0))?;
            ensure(
                i1.left.max_abs() == 0.0
                    && i1.right == SymMat::diag(&[2.0, 0.0])
                    && i2.left.max_abs() == 0.0
                    && i2.right == SymMat::diag(&[0.0, 2.0]),
                || format!("{i1:?} {i2:?}"),
            )
        }),
        fact("V0 is in dF(0)", |f| {
            let v = s(Oracle::default().check_subgradient(f, &[0.0], &v0(), 1, 7))?;
            ensure(v.outcome == Outcome::VerifiedExact, || format!("{v:?}"))
        }),
        fact(
            "both summands reject every candidate with a nonzero off-diagonal entry, so dF1(0) + dF2(0) is diagonal and misses V0",
            |_| {
                let (f1, f2) = hinge_split();
                let o = Oracle::default();
                let mut rng = ChaCha8Rng::seed_from_u64(11);
                for _ in 0..200 {
                    let mut off: f64 = rng.random_range(-2.0..=2.0);
                    if off.abs() <= 1e-6 {
                        off = 1.0;
                    }
                    let v = SymMat::from_rows(&[
                        vec![rng.random_range(-2.0..=2.0), off],
                        vec![off, rng.random_range(-2.0..=2.0)],
                    ])
                    .expect("symmetric");
                    for g in [&f1, &f2] {
                        let verdict = s(o.check_subgradient(g, &[0.0], &MatTuple::from(v.clone()), 1, 7))?;
                        ensure(verdict.is_falsified(), || format!("accepted {v:?}"))?;
                    }
                }
                let r = s(o.check_subgradient(&f1, &[0.0], &v0(), 1, 7))?;
                ensure(r.is_falsified(), || "V0 accepted for F1".into())?;
                ensure(ones2().get(0, 1) != 0.0, || "V0 is diagonal".into())
            },
        ),
    ]
}

fn double_abs_facts() -> Vec<Fact> {
    vec![
        fact("G(-3) = 3[[1,-1],[-1,1]]", |f| {
            let v = s(f.evaluate(&[-3.0]))?;
            ensure(v == alt2().scaled(3.0), || format!("got {:?}", v.to_rows()))
        }),
        fact("G_z = |x|(z1 - z2)^2, so z = (1, 1) gives 0", |f| {
            for x in [-2.0, -0.5, 0.0, 1.0, 4.0] {
                let a = s(f.scalarize_eval(&[1.0, 1.0], &[x]))?;
                ensure(a == 0.0, || format!("G_z({x}) = {a}"))?;
                let b = s(f.scalarize_eval(&[0.3, -1.2], &[x]))?;
                ensure((b - x.abs() * 1.5f64.powi(2)).abs() <= 1e-12, || format!("G_z({x}) = {b}"))?;
            }
            Ok(())
        }),
        fact("dG(0) = [-A, A] with A = [[1,-1],[-1,1]]", |f| {
            let iv = s(subdiff_interval_1d(f, 0.0))?;
            ensure(iv.left == -&alt2() && iv.right == alt2(), || format!("{iv:?}"))
        }),
        fact("no convexity violation in 10^4 samples", |f| {
            let w = s(falsify_convexity(f, 10_000, 7, DEFAULT_PSD_TOL))?;
            ensure(w.is_none(), || format!("witness {w:?}"))
        }),
    ]
}
