//! Clairvoyant averaging for general symmetric bimatrix games.
//!
//! At iteration `K` the algorithm picks a rate `alpha_K <= alpha_bar`, sets
//! `A_K = A_{K-1} + alpha_K`, and finds `Z^K` with
//!
//! ```text
//! Z(i) = X^K(i) + A_K X^K(i) ((CZ)_i - X^K . CZ)
//! ```
//!
//! which is linear in `Z`. The next iterate is the weighted average
//! `X^{K+1} = (A_{K-1} X^K + alpha_K Z^K) / A_K = (1/A_K) sum_k alpha_k Z^k`.
//! A rate is accepted when `Z^K` is interior and `X^{K+1}` satisfies the lower
//! constraints `X(i) (1 + A_K ((C E_j)_i - X . C E_j)) > 0` for every `i, j`;
//! otherwise it is halved, starting again from `alpha_bar` each iteration.
//!
//! Payoffs must lie in `[0, 1]`; callers pass the normalized matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::games::{approx_error, Strategy};
use crate::linops::{dot, Matrix};

/// Rates below this abort the run.
pub const HALVING_FLOOR: f64 = 1e-12;
/// Minimum component for a solution to count as interior.
pub const INTERIOR_EPS: f64 = 1e-12;
/// Systems whose 1-norm condition estimate exceeds this are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Constant multiplying `alpha_bar^2` in [`error_bound`].
pub const BOUND_C2: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Interior(Strategy),
    /// Solution exists but has a component at or below [`INTERIOR_EPS`].
    NotInterior(Vec<f64>),
    /// `M` is singular or too ill-conditioned to trust.
    Singular,
}

/// Solves `M Z = X` with `M = I - A Δ(X) C + A X (C^T X)^T`.
pub fn feasibility_solve(c: &Matrix, x: &Strategy, a: f64) -> Result<Feasibility> {
    check_len(c.n(), x.len())?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("A must be positive, got {a}")));
    }
    if !x.is_interior() {
        return Err(Error::InvalidParameter("X must be interior".into()));
    }
    let n = c.n();
    let dense = c.to_dense_vec();
    let ctx = c.matvec_transpose(x.as_slice())?;
    let xs = x.as_slice();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - a * xs[i] * dense[i * n + j] + a * xs[i] * ctx[j]
    });
    let lu = m.clone().lu();
    let inv = match lu.try_inverse() {
        Some(inv) => inv,
        None => return Ok(Feasibility::Singular),
    };
    let cond = col_norm1(&m) * col_norm1(&inv);
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Ok(Feasibility::Singular);
    }
    let z = m.lu().solve(&DVector::from_column_slice(xs)).ok_or(Error::NonFinite("linear solve".into()))?;
    let z: Vec<f64> = z.iter().copied().collect();
    if z.iter().any(|v| !v.is_finite()) {
        return Ok(Feasibility::Singular);
    }
    if z.iter().all(|&v| v > INTERIOR_EPS) {
        Ok(Feasibility::Interior(Strategy::from_weights(&z)?))
    } else {
        Ok(Feasibility::NotInterior(z))
    }
}

/// Maximum absolute column sum.
fn col_norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|col| col.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Residual of the defining equation, `max_i |Z(i) - X(i) - A X(i)((CZ)_i - X.CZ)|`.
pub fn feasibility_residual(c: &Matrix, x: &Strategy, z: &[f64], a: f64) -> Result<f64> {
    let cz = c.matvec(z)?;
    let mean = dot(x.as_slice(), &cz);
    Ok((0..z.len())
        .map(|i| (z[i] - x[i] - a * x[i] * (cz[i] - mean)).abs())
        .fold(0.0, f64::max))
}

/// Checks `X(i)(1 + A((C E_j)_i - X . C E_j)) > 0` for all `i, j`; the
/// minimum over the simplex of this linear function sits at a vertex.
pub fn lower_constraints_hold(c: &Matrix, x: &Strategy, a: f64) -> Result<bool> {
    check_len(c.n(), x.len())?;
    let n = c.n();
    let dense = c.to_dense_vec();
    let xs = x.as_slice();
    let col_means = c.matvec_transpose(xs)?;
    for (j, &mean) in col_means.iter().enumerate() {
        for i in 0..n {
            if !(xs[i] * (1.0 + a * (dense[i * n + j] - mean)) > 0.0) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct ClairvoyantState {
    /// Iterations completed.
    pub k: usize,
    /// Current iterate `X^K`, equal to the weighted multiplier average
    /// `Z̄^{K-1}` once `K >= 1`.
    pub x: Strategy,
    /// Accumulated rate `A_{K-1}` (zero before the first step).
    pub a_sum: f64,
    pub alpha_bar: f64,
    pub last_alpha: f64,
    pub last_halvings: usize,
    /// `(alpha_k, Z^k)` for every accepted step, when requested.
    pub history: Option<Vec<(f64, Strategy)>>,
}

impl ClairvoyantState {
    pub fn new(x0: Strategy, alpha_bar: f64, keep_history: bool) -> Result<Self> {
        if !(alpha_bar > 0.0) || !alpha_bar.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha_bar must be positive, got {alpha_bar}")));
        }
        if !x0.is_interior() || x0.min() <= INTERIOR_EPS {
            return Err(Error::InvalidParameter("X^0 must be interior".into()));
        }
        Ok(Self {
            k: 0,
            x: x0,
            a_sum: 0.0,
            alpha_bar,
            last_alpha: 0.0,
            last_halvings: 0,
            history: keep_history.then(Vec::new),
        })
    }
}

/// One iteration with the halving schedule. On a stall the state is left
/// unchanged.
pub fn clairvoyant_iterate(c: &Matrix, state: &mut ClairvoyantState) -> Result<()> {
    check_len(c.n(), state.x.len())?;
    let mut alpha = state.alpha_bar;
    let mut halvings = 0;
    loop {
        if alpha < HALVING_FLOOR {
            return Err(Error::Stall {
                iteration: state.k,
                floor: HALVING_FLOOR,
                state: format!(
                    "A = {:.12e}, halvings = {}, X = [{}], approx_error = {:.6e}",
                    state.a_sum,
                    halvings,
                    state.x,
                    approx_error(c, &state.x)?
                ),
            });
        }
        let a_new = state.a_sum + alpha;
        if let Feasibility::Interior(z) = feasibility_solve(c, &state.x, a_new)? {
            let w: Vec<f64> = state
                .x
                .as_slice()
                .iter()
                .zip(z.as_slice())
                .map(|(p, q)| (state.a_sum * p + alpha * q) / a_new)
                .collect();
            let next = Strategy::from_weights(&w)?;
            if next.min() > INTERIOR_EPS && lower_constraints_hold(c, &next, a_new)? {
                if let Some(h) = state.history.as_mut() {
                    h.push((alpha, z));
                }
                state.x = next;
                state.a_sum = a_new;
                state.last_alpha = alpha;
                state.last_halvings = halvings;
                state.k += 1;
                return Ok(());
            }
        }
        alpha *= 0.5;
        halvings += 1;
    }
}

/// `alpha_bar + c2 alpha_bar^2 + (ln(max X0 / min X0) + ln n) / A_K`.
pub fn error_bound(state: &ClairvoyantState, x0: &Strategy, n: usize) -> Result<f64> {
    if !(state.a_sum > 0.0) {
        return Err(Error::InvalidParameter("bound needs A_K > 0".into()));
    }
    let hi = x0.as_slice().iter().copied().fold(0.0, f64::max);
    let lo = x0.min();
    let ab = state.alpha_bar;
    Ok(ab + BOUND_C2 * ab * ab + ((hi / lo).ln() + (n as f64).ln()) / state.a_sum)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClairvoyantRow {
    /// Index of the accepted step (0-based).
    pub k: usize,
    pub alpha: f64,
    pub a_sum: f64,
    pub halvings: usize,
    /// Error of `X^{K+1}` on the payoffs given to the run.
    pub approx_error: f64,
    pub bound: f64,
}

#[derive(Debug)]
pub struct ClairvoyantRun {
    pub rows: Vec<ClairvoyantRow>,
    pub state: ClairvoyantState,
    /// Set when the halving floor stopped the run early.
    pub stall: Option<Error>,
}

/// Runs up to `iters` iterations from `x0` on `c` (entries in `[0, 1]`).
pub fn run_clairvoyant(c: &Matrix, x0: &Strategy, alpha_bar: f64, iters: usize, keep_history: bool) -> Result<ClairvoyantRun> {
    check_len(c.n(), x0.len())?;
    let (lo, hi) = c.min_max();
    if lo < 0.0 || hi > 1.0 {
        return Err(Error::InvalidParameter(format!("payoffs must lie in [0, 1], found [{lo}, {hi}]")));
    }
    let mut state = ClairvoyantState::new(x0.clone(), alpha_bar, keep_history)?;
    let mut rows = Vec::with_capacity(iters);
    let mut stall = None;
    for _ in 0..iters {
        match clairvoyant_iterate(c, &mut state) {
            Ok(()) => rows.push(ClairvoyantRow {
                k: state.k - 1,
                alpha: state.last_alpha,
                a_sum: state.a_sum,
                halvings: state.last_halvings,
                approx_error: approx_error(c, &state.x)?,
                bound: error_bound(&state, x0, c.n())?,
            }),
            Err(e @ Error::Stall { .. }) => {
                stall = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ClairvoyantRun { rows, state, stall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{builtin, normalize_payoffs};
    use approx::assert_abs_diff_eq;

    fn nrps() -> Matrix {
        normalize_payoffs(&builtin::rps()).unwrap().normalized
    }

    fn nshapley() -> Matrix {
        normalize_payoffs(&builtin::shapley6()).unwrap().normalized
    }

    fn perturbed_uniform() -> Strategy {
        let mut w = vec![1.0 / 6.0; 6];
        w[0] += 0.01;
        Strategy::from_weights(&w).unwrap()
    }

    #[test]
    fn equilibrium_is_always_feasible() {
        for a in [0.1, 1.0, 1.9] {
            match feasibility_solve(&builtin::rps(), &Strategy::uniform(3), a).unwrap() {
                Feasibility::Interior(z) => {
                    for i in 0..3 {
                        assert_abs_diff_eq!(z[i], 1.0 / 3.0, epsilon = 1e-14);
                    }
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn small_a_returns_x() {
        let x = perturbed_uniform();
        match feasibility_solve(&nshapley(), &x, 1e-10).unwrap() {
            Feasibility::Interior(z) => {
                for i in 0..6 {
                    assert_abs_diff_eq!(z[i], x[i], epsilon = 1e-10);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shapley_solution_satisfies_constraint_and_tangency() {
        let x = perturbed_uniform();
        let c = nshapley();
        match feasibility_solve(&c, &x, 0.05).unwrap() {
            Feasibility::Interior(z) => {
                assert!((z.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-10);
                assert!(feasibility_residual(&c, &x, z.as_slice(), 0.05).unwrap() <= 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lower_constraint_examples() {
        let u = Strategy::uniform(3);
        assert!(lower_constraints_hold(&builtin::rps(), &u, 1e-9).unwrap());
        assert!(lower_constraints_hold(&builtin::rps(), &u, 0.5).unwrap());
        assert!(!lower_constraints_hold(&builtin::rps(), &u, 1.5).unwrap());
    }

    #[test]
    fn rps_from_uniform_stays_at_equilibrium() {
        let run = run_clairvoyant(&nrps(), &Strategy::uniform(3), 0.01, 150, false).unwrap();
        assert!(run.stall.is_none());
        assert_eq!(run.rows.len(), 150);
        assert!(run.rows.iter().all(|r| r.approx_error < 1e-15));
    }

    #[test]
    fn averaging_identity_holds() {
        let c = nshapley();
        let run = run_clairvoyant(&c, &perturbed_uniform(), 0.01, 40, true).unwrap();
        let hist = run.state.history.as_ref().unwrap();
        let a: f64 = hist.iter().map(|(al, _)| al).sum();
        assert!((a - run.state.a_sum).abs() < 1e-12);
        for i in 0..6 {
            let avg: f64 = hist.iter().map(|(al, z)| al * z[i]).sum::<f64>() / a;
            assert!((avg - run.state.x[i]).abs() < 1e-10);
        }
        for w in run.rows.windows(2) {
            assert!(w[1].a_sum > w[0].a_sum);
        }
        assert!(run.rows.iter().all(|r| r.alpha <= 0.01));
    }

    #[test]
    fn huge_alpha_bar_engages_halving() {
        let run = run_clairvoyant(&nrps(), &Strategy::new(vec![0.4, 0.3, 0.3]).unwrap(), 1e6, 5, false).unwrap();
        assert!(run.rows[0].halvings > 0);
        assert!(run.rows[0].alpha < 1e6);
    }

    #[test]
    fn bound_from_uniform_start() {
        let mut st = ClairvoyantState::new(Strategy::uniform(4), 0.01, false).unwrap();
        st.a_sum = 2.0;
        let b = error_bound(&st, &Strategy::uniform(4), 4).unwrap();
        assert_abs_diff_eq!(b, 0.01 + 2.0 * 1e-4 + 4f64.ln() / 2.0, epsilon = 1e-15);
        st.a_sum = 1e300;
        assert_abs_diff_eq!(error_bound(&st, &Strategy::uniform(4), 4).unwrap(), 0.0102, epsilon = 1e-15);
    }

    #[test]
    fn rejects_out_of_range_payoffs() {
        assert!(run_clairvoyant(&builtin::rps(), &Strategy::uniform(3), 0.01, 1, false).is_err());
    }
}
