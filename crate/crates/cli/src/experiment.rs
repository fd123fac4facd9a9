//! Naive versus log-domain Hedge on the symmetrized Shapley game.
//!
//! The naive run keeps probabilities and exponentiates directly, so at large
//! rates components underflow to zero and never return. The log-domain run
//! keeps log-probabilities. Both record `RE(uniform, running average)`.

use fpboost::games::{hedge_step, relative_entropy, HedgeMode, HedgeParams, LogHedge, RunningAverage};
use fpboost::linops::norm_inf_diff;
use fpboost::{Error, Matrix, Result, Strategy};

pub const DEFAULT_ALPHA: f64 = 10.0;
pub const DEFAULT_ITERS: usize = 10_000;
pub const DEFAULT_X0: [f64; 6] = [0.1, 0.2, 0.3, 0.2, 0.1, 0.1];
pub const SEPARATION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub iter: usize,
    pub re_uniform_avg: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ShapleyExperiment {
    pub naive: Vec<ExperimentRow>,
    pub stable: Vec<ExperimentRow>,
    /// Step at which the naive update left the floating-point range; the
    /// naive trace ends just before it.
    pub naive_failed_at: Option<usize>,
    /// `max_k ||X_naive^k - X_stable^k||_inf` over steps both runs reached.
    pub max_divergence: f64,
    pub first_separation: Option<usize>,
    /// `max_k |RE_naive - RE_stable|`.
    pub max_re_gap: f64,
}

pub fn run_experiment(c: &Matrix, alpha: f64, iters: usize, x0: &Strategy) -> Result<ShapleyExperiment> {
    if c.n() != x0.len() {
        return Err(Error::DimensionMismatch { expected: c.n(), got: x0.len() });
    }
    let uniform = Strategy::uniform(c.n());
    let params = HedgeParams::new(alpha, HedgeMode::Naive)?;
    let row = |iter: usize, avg: &RunningAverage, x: &Strategy| -> Result<ExperimentRow> {
        Ok(ExperimentRow {
            iter,
            re_uniform_avg: relative_entropy(&uniform, &avg.strategy())?,
            x: x.as_slice().to_vec(),
        })
    };

    let mut naive_x = x0.clone();
    let mut naive_avg = RunningAverage::new(x0.as_slice());
    let mut naive = vec![row(0, &naive_avg, &naive_x)?];
    let mut naive_failed_at = None;
    let mut log = LogHedge::new(x0);
    let mut stable_avg = RunningAverage::new(x0.as_slice());
    let mut stable = vec![row(0, &stable_avg, x0)?];

    for k in 1..=iters {
        if naive_failed_at.is_none() {
            match hedge_step(c, &naive_x, params) {
                Ok(next) => {
                    naive_x = next;
                    naive_avg.push(naive_x.as_slice());
                    naive.push(row(k, &naive_avg, &naive_x)?);
                }
                Err(Error::NumericalRange(_)) | Err(Error::InvalidStrategy(_)) => naive_failed_at = Some(k),
                Err(e) => return Err(e),
            }
        }
        log.step(c, alpha)?;
        let x = log.strategy();
        stable_avg.push(x.as_slice());
        stable.push(row(k, &stable_avg, &x)?);
    }

    let mut max_divergence = 0.0f64;
    let mut max_re_gap = 0.0f64;
    let mut first_separation = None;
    for (a, b) in naive.iter().zip(&stable) {
        let d = norm_inf_diff(&a.x, &b.x);
        if d > SEPARATION && first_separation.is_none() {
            first_separation = Some(a.iter);
        }
        max_divergence = max_divergence.max(d);
        max_re_gap = max_re_gap.max((a.re_uniform_avg - b.re_uniform_avg).abs());
    }
    Ok(ShapleyExperiment {
        naive,
        stable,
        naive_failed_at,
        max_divergence,
        first_separation,
        max_re_gap,
    })
}
