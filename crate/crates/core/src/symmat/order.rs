use serde::Serialize;

use super::{eigen_sym, SymMat};
use crate::error::{dim_mismatch, Error, Result};

/// Relative PSD tolerance used when callers do not pick one.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PsdOutcome {
    Psd,
    Indefinite,
}

/// Result of testing `⟨z, A z⟩ ≥ 0` for all `z`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsdVerdict {
    pub outcome: PsdOutcome,
    pub min_eigenvalue: f64,
    /// Unit eigenvector of the smallest eigenvalue; present only when indefinite.
    pub witness: Option<Vec<f64>>,
    /// Absolute threshold `tol · (1 + ‖A‖_F)` the smallest eigenvalue was compared to.
    pub tolerance_used: f64,
}

impl PsdVerdict {
    pub fn is_psd(&self) -> bool {
        self.outcome == PsdOutcome::Psd
    }
}

/// PSD iff `λ_min(A) ≥ −tol · (1 + ‖A‖_F)`. The boundary itself counts as PSD.
pub fn psd_verdict(a: &SymMat, tol: f64) -> Result<PsdVerdict> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be >= 0, got {tol}")));
    }
    let spec = eigen_sym(a)?;
    let tolerance_used = tol * (1.0 + a.norm_fro());
    let min_eigenvalue = spec.min();
    if min_eigenvalue >= -tolerance_used {
        Ok(PsdVerdict {
            outcome: PsdOutcome::Psd,
            min_eigenvalue,
            witness: None,
            tolerance_used,
        })
    } else {
        let z = spec.basis.into_iter().next().unwrap();
        Ok(PsdVerdict {
            outcome: PsdOutcome::Indefinite,
            min_eigenvalue,
            witness: Some(z),
            tolerance_used,
        })
    }
}

/// Tests `A ⪯ B`, i.e. `psd_verdict(B − A, tol)`.
pub fn loewner_leq(a: &SymMat, b: &SymMat, tol: f64) -> Result<PsdVerdict> {
    if a.dim() != b.dim() {
        return Err(dim_mismatch("loewner_leq", a.dim(), b.dim()));
    }
    psd_verdict(&(b - a), tol)
}

/// Checks the order-ball bound: for `X = X1 + Y = X2 + Z` with `‖X1‖_F, ‖X2‖_F ≤ C`,
/// `Y ⪰ 0` and `Z ⪯ 0`, the matrix `X` satisfies `‖X‖_F ≤ 3C`.
///
/// Returns whether the bound holds (up to `1e-9`); inputs outside the hypotheses are
/// rejected with every failed precondition listed.
pub fn order_ball_bound_check(
    c: f64,
    x1: &SymMat,
    x2: &SymMat,
    y: &SymMat,
    z: &SymMat,
) -> Result<bool> {
    let n = x1.dim();
    for (name, m) in [("X2", x2), ("Y", y), ("Z", z)] {
        if m.dim() != n {
            return Err(dim_mismatch(&format!("order ball {name}"), n, m.dim()));
        }
    }
    let mut failed = Vec::new();
    if !(c >= 0.0) || !c.is_finite() {
        failed.push(format!("C must be finite and >= 0, got {c}"));
    }
    let slack = 1e-9;
    if x1.norm_fro() > c + slack {
        failed.push(format!("||X1||_F = {} exceeds C", x1.norm_fro()));
    }
    if x2.norm_fro() > c + slack {
        failed.push(format!("||X2||_F = {} exceeds C", x2.norm_fro()));
    }
    let yv = psd_verdict(y, DEFAULT_PSD_TOL)?;
    if !yv.is_psd() {
        failed.push(format!("Y is not PSD (min eigenvalue {:e})", yv.min_eigenvalue));
    }
    let zv = psd_verdict(&-z, DEFAULT_PSD_TOL)?;
    if !zv.is_psd() {
        failed.push(format!("Z is not NSD (max eigenvalue {:e})", -zv.min_eigenvalue));
    }
    let lhs = x1 + y;
    let gap = (&lhs - &(x2 + z)).norm_fro();
    if gap > slack * (1.0 + lhs.norm_fro()) {
        failed.push(format!("X1 + Y != X2 + Z (gap {gap:e})"));
    }
    if !failed.is_empty() {
        return Err(Error::PreconditionViolated(failed));
    }
    Ok(lhs.norm_fro() <= 3.0 * c + slack)
}
