//! Verification and falsification of subgradient candidates and convexity claims.
//!
//! For `d = 1` membership is decided exactly: `V ∈ ∂F(x)` iff
//! `F'₋(x) ⪯ V ⪯ F'₊(x)`. For `d ≥ 2` the oracle can only refute. A tuple `V`
//! is a subgradient iff for every direction `h` the matrix `W_h = Σᵢ hᵢV⁽ⁱ⁾`
//! lies in the subdifferential of the line restriction `t ↦ F(x + th)` at 0, so
//! each sampled direction gets the exact univariate test, followed by a direct
//! check of `F(y) − F(x) − Σ(y − x)ᵢV⁽ⁱ⁾ ⪰ 0` on a radial grid along it.

mod convexity;

pub use convexity::{falsify_convexity, ConvexityWitness, FnMatrix, MatrixFunction};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{dim_mismatch, Error, Result};
use crate::expr::ConvexMatrixExpr;
use crate::subgrad::{check_tuple, unit_vector, MatTuple};
use crate::symmat::{loewner_leq, psd_verdict, PsdVerdict, SymMat, DEFAULT_PSD_TOL};

/// Step lengths tried along each ray, in order: unit step first, then finer, then coarser.
pub const RADIAL_GRID: [f64; 4] = [1.0, 1e-1, 1e-3, 10.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    /// `⟨z, (F(y) − F(x) − Σ(y − x)ᵢV⁽ⁱ⁾) z⟩ < 0` at the reported `y`.
    Raw,
    /// A one-sided derivative bound fails along `direction`: the margin is
    /// `⟨z, (F'(x; h) − W_h) z⟩` or `⟨z, (W_h + F'(x; −h)) z⟩`.
    OneSided,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    /// `y` for raw witnesses, `x` for one-sided ones.
    pub point: Vec<f64>,
    /// Unit direction of the line the violation was found on.
    pub direction: Vec<f64>,
    /// `t` with `y = x + t·direction` (zero for one-sided witnesses).
    pub step: f64,
    /// Unit vector.
    pub z: Vec<f64>,
    pub margin: f64,
    /// `τ_eff`; always `margin < −threshold`.
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    /// Exact membership proof (univariate functions only).
    VerifiedExact,
    /// No violation found in `samples` sampled directions; not a proof.
    NotFalsified { samples: usize },
    Falsified { witness: Witness },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub outcome: Outcome,
    pub seed: u64,
}

impl Verdict {
    pub fn is_falsified(&self) -> bool {
        matches!(self.outcome, Outcome::Falsified { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.outcome {
            Outcome::Falsified { witness } => Some(witness),
            _ => None,
        }
    }

    /// Combines verdicts of independent shards: a falsification wins, an exact
    /// verification beats sampling, and sample counts add up.
    pub fn merge(self, other: Verdict) -> Verdict {
        let seed = self.seed;
        let outcome = match (self.outcome, other.outcome) {
            (f @ Outcome::Falsified { .. }, _) | (_, f @ Outcome::Falsified { .. }) => f,
            (Outcome::VerifiedExact, _) | (_, Outcome::VerifiedExact) => Outcome::VerifiedExact,
            (Outcome::NotFalsified { samples: a }, Outcome::NotFalsified { samples: b }) => {
                Outcome::NotFalsified { samples: a + b }
            }
        };
        Verdict { outcome, seed }
    }
}

/// Sampling oracle with a fixed relative PSD tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Oracle {
    pub psd_tol: f64,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            psd_tol: DEFAULT_PSD_TOL,
        }
    }
}

/// `F(y) − F(x) − Σ(y − x)ᵢV⁽ⁱ⁾`
fn gap_matrix(f: &ConvexMatrixExpr, fx: &SymMat, v: &MatTuple, x: &[f64], y: &[f64]) -> SymMat {
    let step: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let mut d = f.eval(y);
    d.axpy(-1.0, fx);
    d.axpy(-1.0, &v.apply(&step));
    d
}

fn along(x: &[f64], h: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(h).map(|(a, b)| a + t * b).collect()
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter().map(|a| a / n).collect()
}

/// Coordinate directions and the normalized all-ones direction, then `budget` random unit vectors.
fn directions(rng: &mut ChaCha8Rng, d: usize, budget: usize) -> impl Iterator<Item = Vec<f64>> + '_ {
    let fixed: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .chain((d > 1).then(|| unit(&vec![1.0; d])))
        .collect();
    fixed
        .into_iter()
        .chain((0..budget).map(move |_| unit_vector(rng, d)))
}

impl Oracle {
    pub fn new(psd_tol: f64) -> Self {
        Oracle { psd_tol }
    }

    fn check_inputs(&self, f: &ConvexMatrixExpr, x: &[f64], v: &MatTuple, budget: usize) -> Result<()> {
        f.check_point(x)?;
        check_tuple(f, v)?;
        if budget == 0 {
            return Err(Error::BudgetZero);
        }
        Ok(())
    }

    /// Decides (`d = 1`) or tries to refute (`d ≥ 2`) `V ∈ ∂F(x)`.
    pub fn check_subgradient(
        &self,
        f: &ConvexMatrixExpr,
        x: &[f64],
        v: &MatTuple,
        budget: usize,
        seed: u64,
    ) -> Result<Verdict> {
        self.check_inputs(f, x, v, budget)?;
        self.check_stream(f, x, v, budget, seed, 0)
    }

    /// [`check_subgradient`](Self::check_subgradient) split over `shards` threads, each
    /// drawing from its own stream of the seeded generator; results are merged with
    /// [`Verdict::merge`].
    pub fn check_subgradient_sharded(
        &self,
        f: &ConvexMatrixExpr,
        x: &[f64],
        v: &MatTuple,
        budget: usize,
        seed: u64,
        shards: usize,
    ) -> Result<Verdict> {
        self.check_inputs(f, x, v, budget)?;
        let shards = shards.clamp(1, budget);
        if shards == 1 || f.input_dim() == 1 {
            return self.check_stream(f, x, v, budget, seed, 0);
        }
        let results: Vec<Result<Verdict>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..shards)
                .map(|k| {
                    let share = budget / shards + usize::from(k < budget % shards);
                    s.spawn(move || self.check_stream(f, x, v, share, seed, k as u64))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("shard panicked")).collect()
        });
        let mut merged: Option<Verdict> = None;
        for r in results {
            let r = r?;
            merged = Some(match merged {
                None => r,
                Some(m) => m.merge(r),
            });
        }
        Ok(merged.unwrap())
    }

    fn check_stream(
        &self,
        f: &ConvexMatrixExpr,
        x: &[f64],
        v: &MatTuple,
        budget: usize,
        seed: u64,
        stream: u64,
    ) -> Result<Verdict> {
        let fx = f.eval(x);
        let d = f.input_dim();
        if d == 1 {
            let outcome = match self.line_test(f, x, &fx, v, &[1.0])? {
                Some(witness) => Outcome::Falsified { witness },
                None => Outcome::VerifiedExact,
            };
            return Ok(Verdict { outcome, seed });
        }
        let mut rng = rng_for(seed, stream);
        for h in directions(&mut rng, d, budget) {
            if let Some(witness) = self.line_test(f, x, &fx, v, &h)? {
                return Ok(Verdict {
                    outcome: Outcome::Falsified { witness },
                    seed,
                });
            }
            for t in RADIAL_GRID {
                for s in [t, -t] {
                    if let Some(witness) = self.raw_at(f, x, &fx, v, &h, s)? {
                        return Ok(Verdict {
                            outcome: Outcome::Falsified { witness },
                            seed,
                        });
                    }
                }
            }
        }
        Ok(Verdict {
            outcome: Outcome::NotFalsified { samples: budget },
            seed,
        })
    }

    /// Exact test of `W_h ∈ ∂G_h(0)` for `G_h(t) = F(x + th)`.
    fn line_test(
        &self,
        f: &ConvexMatrixExpr,
        x: &[f64],
        fx: &SymMat,
        v: &MatTuple,
        h: &[f64],
    ) -> Result<Option<Witness>> {
        let w = v.apply(h);
        let right = f.deriv(x, h);
        let neg: Vec<f64> = h.iter().map(|a| -a).collect();
        let left = -&f.deriv(x, &neg);
        let upper = loewner_leq(&w, &right, self.psd_tol)?;
        if !upper.is_psd() {
            return Ok(Some(self.localize(f, x, fx, v, h, 1.0, upper)));
        }
        let lower = loewner_leq(&left, &w, self.psd_tol)?;
        if !lower.is_psd() {
            return Ok(Some(self.localize(f, x, fx, v, h, -1.0, lower)));
        }
        Ok(None)
    }

    /// Turns a failed one-sided bound into a point witness along the ray `x + sign·t·h`,
    /// keeping the derivative-level witness if no grid step shows a violation.
    #[allow(clippy::too_many_arguments)]
    fn localize(
        &self,
        f: &ConvexMatrixExpr,
        x: &[f64],
        fx: &SymMat,
        v: &MatTuple,
        h: &[f64],
        sign: f64,
        failed: PsdVerdict,
    ) -> Witness {
        let z = failed.witness.expect("indefinite verdict carries a witness");
        for t in RADIAL_GRID {
            let y = along(x, h, sign * t);
            let gap = gap_matrix(f, fx, v, x, &y);
            let margin = gap.quad_form(&z);
            let threshold = self.psd_tol * (1.0 + gap.norm_fro());
            if margin < -threshold {
                return Witness {
                    kind: WitnessKind::Raw,
                    point: y,
                    direction: h.to_vec(),
                    step: sign * t,
                    z,
                    margin,
                    threshold,
                };
            }
        }
        Witness {
            kind: WitnessKind::OneSided,
            point: x.to_vec(),
            direction: h.iter().map(|a| sign * a).collect(),
            step: 0.0,
            z,
            margin: failed.min_eigenvalue,
            threshold: failed.tolerance_used,
        }
    }

    fn raw_at(
        &self,
        f: &ConvexMatrixExpr,
        x: &[f64],
        fx: &SymMat,
        v: &MatTuple,
        h: &[f64],
        t: f64,
    ) -> Result<Option<Witness>> {
        let y = along(x, h, t);
        let gap = gap_matrix(f, fx, v, x, &y);
        let verdict = psd_verdict(&gap, self.psd_tol)?;
        Ok(verdict.witness.map(|z| Witness {
            kind: WitnessKind::Raw,
            point: y,
            direction: h.to_vec(),
            step: t,
            z,
            margin: verdict.min_eigenvalue,
            threshold: verdict.tolerance_used,
        }))
    }

    /// Only the defining inequality, at the radial grid along the coordinate
    /// directions and then at `budget` random points `x + t·h` with `h` a random
    /// unit vector and `log₁₀ t` uniform on `[−4, 1]`. Never returns `VerifiedExact`.
    pub fn check_raw(
        &self,
        f: &ConvexMatrixExpr,
        x: &[f64],
        v: &MatTuple,
        budget: usize,
        seed: u64,
    ) -> Result<Verdict> {
        self.check_inputs(f, x, v, budget)?;
        let fx = f.eval(x);
        let d = f.input_dim();
        let mut rng = rng_for(seed, 0);
        let fixed: Vec<Vec<f64>> = directions(&mut rng, d, 0).collect();
        for h in &fixed {
            for t in RADIAL_GRID {
                for s in [t, -t] {
                    if let Some(witness) = self.raw_at(f, x, &fx, v, h, s)? {
                        return Ok(Verdict {
                            outcome: Outcome::Falsified { witness },
                            seed,
                        });
                    }
                }
            }
        }
        for _ in 0..budget {
            let h = unit_vector(&mut rng, d);
            let t = 10f64.powf(rng.random_range(-4.0..=1.0));
            if let Some(witness) = self.raw_at(f, x, &fx, v, &h, t)? {
                return Ok(Verdict {
                    outcome: Outcome::Falsified { witness },
                    seed,
                });
            }
        }
        Ok(Verdict {
            outcome: Outcome::NotFalsified { samples: budget },
            seed,
        })
    }

    /// Tests the scalar subgradient inequality
    /// `F_z(y) − F_z(x) ≥ Σᵢ ⟨z, V⁽ⁱ⁾z⟩ (y − x)ᵢ` for the fixed (normalized) `z`
    /// on the radial grid along sampled directions. A falsification is also a
    /// witness against `V ∈ ∂F(x)` with the same `y` and `z`.
    pub fn check_scalarized(
        &self,
        f: &ConvexMatrixExpr,
        x: &[f64],
        v: &MatTuple,
        z: &[f64],
        budget: usize,
        seed: u64,
    ) -> Result<Verdict> {
        self.check_inputs(f, x, v, budget)?;
        if z.len() != f.output_dim() {
            return Err(dim_mismatch("scalarization vector", f.output_dim(), z.len()));
        }
        if z.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("scalarization vector"));
        }
        let not_falsified = Verdict {
            outcome: Outcome::NotFalsified { samples: budget },
            seed,
        };
        if z.iter().all(|&a| a == 0.0) {
            return Ok(not_falsified);
        }
        let z = unit(z);
        let fx = f.eval(x);
        let mut rng = rng_for(seed, 0);
        for h in directions(&mut rng, f.input_dim(), budget) {
            for t in RADIAL_GRID {
                for s in [t, -t] {
                    let y = along(x, &h, s);
                    let gap = gap_matrix(f, &fx, v, x, &y);
                    let margin = gap.quad_form(&z);
                    let threshold = self.psd_tol * (1.0 + gap.norm_fro());
                    if margin < -threshold {
                        return Ok(Verdict {
                            outcome: Outcome::Falsified {
                                witness: Witness {
                                    kind: WitnessKind::Raw,
                                    point: y,
                                    direction: h,
                                    step: s,
                                    z,
                                    margin,
                                    threshold,
                                },
                            },
                            seed,
                        });
                    }
                }
            }
        }
        Ok(not_falsified)
    }
}

/// [`Oracle::check_subgradient`] with the default tolerance.
pub fn check_subgradient(
    f: &ConvexMatrixExpr,
    x: &[f64],
    v: &MatTuple,
    budget: usize,
    seed: u64,
) -> Result<Verdict> {
    Oracle::default().check_subgradient(f, x, v, budget, seed)
}

/// [`Oracle::check_scalarized`] with the default tolerance.
pub fn check_scalarized(
    f: &ConvexMatrixExpr,
    x: &[f64],
    v: &MatTuple,
    z: &[f64],
    budget: usize,
    seed: u64,
) -> Result<Verdict> {
    Oracle::default().check_scalarized(f, x, v, z, budget, seed)
}
