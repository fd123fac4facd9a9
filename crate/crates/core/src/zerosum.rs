//! Averaged Hedge for symmetric zero-sum games.
//!
//! Starting from the uniform strategy with the fixed rate `alpha = ln(1 + eps/2)`,
//! the uniform average of the first `K + 1` Hedge iterates is an
//! `eps`-approximate symmetric equilibrium of the normalized game once
//! `K = floor(ln n / ((eps/2) ln(1 + eps/2)))`. The same holds for the average
//! of best-response multipliers when each step uses `T(X | E_j)` with `E_j`
//! the opponent's pure best response; those steps only ever need the `n`
//! precomputed column exponentials.
//!
//! Un-averaged Hedge, by contrast, drifts away from an interior equilibrium:
//! see [`divergence_monitor`].

use crate::error::{Error, Result};
use crate::games::{
    approx_error, hedge_step, relative_entropy, ExpColumnTable, HedgeMode, HedgeParams, RunningAverage, Strategy,
    SymmetricGame,
};

/// `ln(1 + eps/2)`.
pub fn learning_rate(epsilon: f64) -> f64 {
    (epsilon / 2.0).ln_1p()
}

/// `floor(ln n / ((eps/2) ln(1 + eps/2)))`.
pub fn iteration_bound(n: usize, epsilon: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let k = (n as f64).ln() / ((epsilon / 2.0) * learning_rate(epsilon));
    Ok(k.floor() as usize)
}

/// One trace row; errors refer to the average the solver certifies.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub approx_error_normalized: f64,
    pub approx_error_raw: f64,
    pub re_to_target: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AveragedRun {
    /// `(1/(K+1)) sum_{k<=K} X^k`.
    pub iterate_avg: Strategy,
    /// `(1/(K+1)) sum_{k<=K} Z^k`, present for the pure-multiplier solver.
    pub multiplier_avg: Option<Strategy>,
    /// Column index of each multiplier `Z^k = E_j`.
    pub multipliers: Vec<usize>,
    pub trace: Vec<TraceRow>,
    pub alpha: f64,
    pub epsilon: f64,
    pub theta: f64,
    pub k_target: usize,
    /// Error of the certified average on the normalized payoffs.
    pub final_error: f64,
}

impl AveragedRun {
    /// `(e^alpha - 1) + theta`, which equals `epsilon` for the solver's choice
    /// of rate.
    pub fn certified_bound(&self) -> f64 {
        self.alpha.exp_m1() + self.theta
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Strategy to report relative entropy against (`RE(target, average)`,
    /// infinite while the average misses part of the target's carrier).
    pub target: Option<Strategy>,
    /// Run on payoffs that fail the antisymmetry check. The certificate
    /// no longer applies.
    pub skip_antisymmetry_check: bool,
}

fn check_inputs(game: &SymmetricGame, epsilon: f64, opts: &SolveOptions) -> Result<()> {
    if !opts.skip_antisymmetry_check && !game.is_antisymmetric() {
        return Err(Error::NotAntisymmetric(game.antisymmetry_defect));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1] (errors on [0,1] payoffs never exceed 1), got {epsilon}"
        )));
    }
    if let Some(t) = &opts.target {
        crate::error::check_len(game.n(), t.len())?;
    }
    Ok(())
}

fn row(game: &SymmetricGame, iter: usize, avg: &Strategy, target: Option<&Strategy>) -> Result<TraceRow> {
    let e = approx_error(&game.normalized, avg)?;
    let re = match target {
        // Early multiplier averages can miss part of the target's carrier.
        Some(t) => Some(match relative_entropy(t, avg) {
            Err(Error::InfiniteDivergence { .. }) => f64::INFINITY,
            other => other?,
        }),
        None => None,
    };
    Ok(TraceRow {
        iter,
        approx_error_normalized: e,
        approx_error_raw: game.to_raw_units(e),
        re_to_target: re,
    })
}

/// Averaged Hedge on the normalized payoffs, run for exactly
/// [`iteration_bound`] steps. The trace holds one row per step.
pub fn solve_hedge_average(game: &SymmetricGame, epsilon: f64, mode: HedgeMode, opts: &SolveOptions) -> Result<AveragedRun> {
    check_inputs(game, epsilon, opts)?;
    let n = game.n();
    let alpha = learning_rate(epsilon);
    let k_target = iteration_bound(n, epsilon)?;
    let params = HedgeParams::new(alpha, mode)?;
    let mut x = Strategy::uniform(n);
    let mut avg = RunningAverage::new(x.as_slice());
    let mut trace = Vec::with_capacity(k_target);
    for k in 1..=k_target {
        x = hedge_step(&game.normalized, &x, params).map_err(|e| match e {
            Error::NumericalRange(msg) if mode == HedgeMode::Naive => {
                Error::NumericalRange(format!("{msg} at iteration {k}; the log-domain mode avoids this"))
            }
            other => other,
        })?;
        avg.push(x.as_slice());
        trace.push(row(game, k, &avg.strategy(), opts.target.as_ref())?);
    }
    let iterate_avg = avg.strategy();
    let final_error = approx_error(&game.normalized, &iterate_avg)?;
    Ok(AveragedRun {
        iterate_avg,
        multiplier_avg: None,
        multipliers: Vec::new(),
        trace,
        alpha,
        epsilon,
        theta: epsilon / 2.0,
        k_target,
        final_error,
    })
}

/// Index of the opponent's pure best response to `x`: the smallest `j`
/// minimizing `x . C E_j`. For antisymmetric payoffs this is the smallest
/// `argmax_j (C x)_j` on the raw matrix.
pub fn best_response_multiplier(game: &SymmetricGame, x: &Strategy) -> Result<usize> {
    let scores = if game.is_antisymmetric() {
        game.raw.matvec(x.as_slice())?
    } else {
        game.raw.matvec_transpose(x.as_slice())?.into_iter().map(|v| -v).collect()
    };
    let mut best = 0;
    for (j, &v) in scores.iter().enumerate() {
        if v > scores[best] {
            best = j;
        }
    }
    Ok(best)
}

/// Hedge driven by pure best-response multipliers, certifying the multiplier
/// average `Z̄^K`. Exponentials come from a table built once per run.
pub fn solve_stable_average(game: &SymmetricGame, epsilon: f64, opts: &SolveOptions) -> Result<AveragedRun> {
    check_inputs(game, epsilon, opts)?;
    let n = game.n();
    let alpha = learning_rate(epsilon);
    let k_target = iteration_bound(n, epsilon)?;
    let table = ExpColumnTable::new(&game.normalized, alpha)?;
    let mut x = Strategy::uniform(n);
    let mut j = best_response_multiplier(game, &x)?;
    let mut multipliers = vec![j];
    let mut x_avg = RunningAverage::new(x.as_slice());
    let mut z_avg = RunningAverage::new(Strategy::pure(n, j).as_slice());
    let mut trace = Vec::with_capacity(k_target);
    for k in 1..=k_target {
        x = table.step(&x, j)?;
        j = best_response_multiplier(game, &x)?;
        multipliers.push(j);
        x_avg.push(x.as_slice());
        z_avg.push(Strategy::pure(n, j).as_slice());
        trace.push(row(game, k, &z_avg.strategy(), opts.target.as_ref())?);
    }
    let multiplier_avg = z_avg.strategy();
    let final_error = approx_error(&game.normalized, &multiplier_avg)?;
    Ok(AveragedRun {
        iterate_avg: x_avg.strategy(),
        multiplier_avg: Some(multiplier_avg),
        multipliers,
        trace,
        alpha,
        epsilon,
        theta: epsilon / 2.0,
        k_target,
        final_error,
    })
}

#[derive(Debug, Clone)]
pub struct DivergenceTrace {
    /// `RE(X*, X^k)` for `k = 0..`.
    pub relative_entropy: Vec<f64>,
    /// Step at which naive evaluation left the floating-point range.
    pub overflow_at: Option<usize>,
}

impl DivergenceTrace {
    pub fn strictly_increasing(&self) -> bool {
        self.relative_entropy.windows(2).all(|w| w[1] > w[0])
    }
}

/// Iterates un-averaged Hedge on the raw payoffs and records the relative
/// entropy to the caller-supplied interior equilibrium `x_star`.
pub fn divergence_monitor(
    game: &SymmetricGame,
    x0: &Strategy,
    x_star: &Strategy,
    params: HedgeParams,
    iters: usize,
) -> Result<DivergenceTrace> {
    if !game.is_antisymmetric() {
        return Err(Error::NotAntisymmetric(game.antisymmetry_defect));
    }
    crate::error::check_len(game.n(), x0.len())?;
    crate::error::check_len(game.n(), x_star.len())?;
    if !x0.is_interior() || !x_star.is_interior() {
        return Err(Error::InvalidParameter("start and equilibrium must be interior".into()));
    }
    if x0 == x_star {
        return Err(Error::InvalidParameter("start coincides with the equilibrium".into()));
    }
    let mut x = x0.clone();
    let mut re = vec![relative_entropy(x_star, &x)?];
    let mut overflow_at = None;
    for k in 1..=iters {
        match hedge_step(&game.raw, &x, params).and_then(|next| relative_entropy(x_star, &next).map(|r| (next, r))) {
            Ok((next, r)) => {
                x = next;
                re.push(r);
            }
            Err(Error::NumericalRange(_)) | Err(Error::InfiniteDivergence { .. }) => {
                overflow_at = Some(k);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(DivergenceTrace {
        relative_entropy: re,
        overflow_at,
    })
}
