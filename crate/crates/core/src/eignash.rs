//! Eigenvector iteration toward symmetric equilibria.
//!
//! An interior equilibrium `X` of a nonnegative game satisfies
//! `Δ(X) C X = λ X` with `λ = X . CX`. The iteration replaces `X^k` by the
//! dominant eigenvector of `Δ(X^k) C`, rescaled onto the simplex. Nothing
//! guarantees convergence.

use crate::error::{check_len, Error, Result};
use crate::games::{approx_error, Strategy};
use crate::linops::Matrix;
use crate::power::{power_iterate, PowerConfig};

pub const INNER_TOL: f64 = 1e-12;
pub const INNER_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EigNashRecord {
    /// Outer step, starting at 1.
    pub k: usize,
    pub x: Strategy,
    /// Dominant eigenvalue of `Δ(X^{k-1}) C`.
    pub lambda: f64,
    /// `||Δ(X^k) C X^k - lambda X^k||_inf`.
    pub residual: f64,
    pub approx_error: f64,
    /// False when the inner power iteration hit its cap; the best estimate
    /// was used anyway.
    pub inner_converged: bool,
}

fn check_nonnegative(c: &Matrix) -> Result<()> {
    match c.first_negative() {
        Some((row, col, value)) => Err(Error::NegativeEntry { row, col, value }),
        None => Ok(()),
    }
}

/// `||Δ(X) C X - lambda X||_inf`.
pub fn eignash_residual(c: &Matrix, x: &Strategy, lambda: f64) -> Result<f64> {
    check_len(c.n(), x.len())?;
    check_nonnegative(c)?;
    let cx = c.matvec(x.as_slice())?;
    Ok(x.as_slice()
        .iter()
        .zip(&cx)
        .map(|(xi, ci)| (xi * ci - lambda * xi).abs())
        .fold(0.0, f64::max))
}

/// Runs `iters` outer steps from the interior `x0`.
pub fn eignash_iterate(c: &Matrix, x0: &Strategy, iters: usize) -> Result<Vec<EigNashRecord>> {
    check_len(c.n(), x0.len())?;
    check_nonnegative(c)?;
    if !x0.is_interior() {
        return Err(Error::InvalidParameter("X^0 must be interior".into()));
    }
    let cfg = PowerConfig {
        tol: INNER_TOL,
        max_iters: INNER_MAX_ITERS,
        stagnation_window: 0,
        ..PowerConfig::default()
    };
    let mut x = x0.clone();
    let mut out = Vec::with_capacity(iters);
    for k in 1..=iters {
        let op = c.scale_rows(x.as_slice())?;
        let outcome = power_iterate(&op, x.as_slice(), &cfg)?;
        let v = &outcome.vector;
        let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        let clamped: Vec<f64> = v.iter().map(|&e| (sign * e).max(0.0)).collect();
        if !(clamped.iter().sum::<f64>() > 0.0) {
            return Err(Error::NumericalRange(format!("dominant eigenvector of step {k} has no positive part")));
        }
        let next = Strategy::from_weights(&clamped)?;
        // Eigenvalue from the simplex-normalized vector: sum(M v) / sum(v).
        let lambda = op.matvec(next.as_slice())?.iter().sum::<f64>();
        out.push(EigNashRecord {
            k,
            residual: eignash_residual(c, &next, lambda)?,
            approx_error: approx_error(c, &next)?,
            lambda,
            x: next.clone(),
            inner_converged: outcome.converged(),
        });
        x = next;
    }
    Ok(out)
}
