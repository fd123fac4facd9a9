//! Simple, exponentiated and truncated-exponential power iterations.
//!
//! The exponentiated method iterates `x <- E x / ||E x||` with `E` either the
//! exponential series of `alpha A` truncated at a fixed order, or the series
//! summed until its terms drop below `1e-14` relative to the partial sum
//! ("exact" mode). Convergence is geometric with ratio
//! `exp(alpha (lambda2 - lambda1))` in exact mode and
//! `sum_k (alpha lambda2)^k / k! / sum_k (alpha lambda1)^k / k!` when
//! truncated, for real positive spectra.

use crate::error::{Error, Result};
use crate::linops::{dot, exp_apply_adaptive, norm2, truncated_exp_apply, Matrix};

/// Relative tolerance used to sum the series in exact mode.
pub const EXACT_SERIES_TOL: f64 = 1e-14;
const EXACT_SERIES_MAX_ORDER: usize = 10_000;

/// Which operator the exponentiated iteration applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Series truncated after `m` terms past the identity. `Order(0)` means
    /// the simple power method on `A` itself.
    Order(usize),
    /// Series summed adaptively to [`EXACT_SERIES_TOL`].
    Exact,
}

#[derive(Debug, Clone)]
pub struct PowerConfig {
    /// Learning rate; ignored by the simple method.
    pub alpha: f64,
    pub truncation: Truncation,
    pub max_iters: usize,
    /// Stop once `||x_k - s x_{k-1}|| < tol` (`s` aligns signs).
    pub tol: f64,
    /// Reference eigenvector for the sin-angle series.
    pub reference: Option<Vec<f64>>,
    /// User-supplied `|lambda2|`, carried into the estimate.
    pub lambda2_modulus: Option<f64>,
    /// Abort after this many consecutive non-decreasing steps of the
    /// monitored series (sin-angle if a reference is given, step change otherwise).
    pub stagnation_window: usize,
    /// Keep every `k`-th iterate in the trace (`0` keeps none).
    pub keep_every: usize,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            truncation: Truncation::Order(0),
            max_iters: 1000,
            tol: 1e-10,
            reference: None,
            lambda2_modulus: None,
            stagnation_window: 50,
            keep_every: 0,
        }
    }
}

impl PowerConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(r) = &self.reference {
            crate::error::check_len(n, r.len())?;
            if norm2(r) == 0.0 {
                return Err(Error::InvalidParameter("reference eigenvector is zero".into()));
            }
        }
        if let Some(l2) = self.lambda2_modulus {
            if !(l2 >= 0.0) {
                return Err(Error::InvalidParameter(format!("|lambda2| must be nonnegative, got {l2}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    /// Rayleigh quotient of the final iterate.
    pub lambda1: f64,
    pub lambda2_modulus: Option<f64>,
    /// Fitted geometric ratio of the sin-angle series, when available.
    pub rate: Option<f64>,
    pub rate_constant_c: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct PowerTrace {
    /// `(k, x_k)` for the kept iterates.
    pub iterates: Vec<(usize, Vec<f64>)>,
    /// `sin(angle(x_k, reference))`, empty without a reference.
    pub sin_angle: Vec<f64>,
    /// `x_k^T A x_k / x_k^T x_k`.
    pub rayleigh: Vec<f64>,
    /// `||x_k - s x_{k-1}||`.
    pub step_change: Vec<f64>,
    /// Series order used per step in exact mode.
    pub series_order: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIters,
    /// The monitored series failed to decrease for `stagnation_window` steps,
    /// e.g. when the start vector has no component along the dominant
    /// eigenvector.
    Stagnated,
}

#[derive(Debug, Clone)]
pub struct PowerOutcome {
    /// Final unit-norm iterate.
    pub vector: Vec<f64>,
    pub estimate: SpectralEstimate,
    pub trace: PowerTrace,
    pub iterations: usize,
    pub stop: StopReason,
}

impl PowerOutcome {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }
}

/// Sine of the angle between `x` and `u`, computed from the residual of the
/// projection so that small angles keep full relative accuracy.
pub fn sin_angle(x: &[f64], u: &[f64]) -> f64 {
    let uu = dot(u, u);
    let xn = norm2(x);
    if xn == 0.0 || uu == 0.0 {
        return 1.0;
    }
    let c = dot(x, u) / uu;
    let resid: f64 = x.iter().zip(u).map(|(a, b)| (a - c * b).powi(2)).sum::<f64>().sqrt();
    (resid / xn).clamp(0.0, 1.0)
}

fn normalized(x: &[f64], step: usize) -> Result<Vec<f64>> {
    let nrm = norm2(x);
    if !nrm.is_finite() {
        return Err(Error::NonFinite(format!("iterate at step {step}")));
    }
    if nrm == 0.0 {
        return Err(Error::NullMap { step });
    }
    Ok(x.iter().map(|v| v / nrm).collect())
}

/// Simple power method `x_{k+1} = A x_k / ||A x_k||`. `cfg.alpha` and
/// `cfg.truncation` are ignored.
pub fn power_iterate(a: &Matrix, x0: &[f64], cfg: &PowerConfig) -> Result<PowerOutcome> {
    let mut cfg = cfg.clone();
    cfg.truncation = Truncation::Order(0);
    run(a, x0, &cfg)
}

/// Exponentiated power method with the operator selected by `cfg.truncation`.
/// The series is applied to the iterate each step; it is never materialized.
/// The rate guarantee assumes a real positive dominant eigenvalue, which is
/// not checked.
pub fn exp_power_iterate(a: &Matrix, x0: &[f64], cfg: &PowerConfig) -> Result<PowerOutcome> {
    run(a, x0, cfg)
}

fn run(a: &Matrix, x0: &[f64], cfg: &PowerConfig) -> Result<PowerOutcome> {
    crate::error::check_len(a.n(), x0.len())?;
    cfg.validate(a.n())?;
    if norm2(x0) == 0.0 {
        return Err(Error::InvalidParameter("x0 must be nonzero".into()));
    }
    let mut x = normalized(x0, 0)?;
    let mut trace = PowerTrace::default();
    if cfg.keep_every > 0 {
        trace.iterates.push((0, x.clone()));
    }
    // A x for the current iterate, reused by the simple method.
    let mut ax = a.matvec(&x)?;
    let mut stop = StopReason::MaxIters;
    let mut run_len = 0usize;
    let mut iterations = 0;
    for k in 1..=cfg.max_iters {
        let y = match cfg.truncation {
            Truncation::Order(0) => ax.clone(),
            Truncation::Order(m) => truncated_exp_apply(a, cfg.alpha, m, &x)?,
            Truncation::Exact => {
                let s = exp_apply_adaptive(a, cfg.alpha, &x, EXACT_SERIES_TOL, EXACT_SERIES_MAX_ORDER)?;
                trace.series_order.push(s.order);
                s.value
            }
        };
        let next = normalized(&y, k)?;
        let sign = if dot(&next, &x) < 0.0 { -1.0 } else { 1.0 };
        let change = next.iter().zip(&x).map(|(p, q)| (p - sign * q).powi(2)).sum::<f64>().sqrt();
        x = next;
        iterations = k;
        ax = a.matvec(&x)?;
        trace.rayleigh.push(dot(&x, &ax));
        trace.step_change.push(change);
        if let Some(u) = &cfg.reference {
            trace.sin_angle.push(sin_angle(&x, u));
        }
        if cfg.keep_every > 0 && k % cfg.keep_every == 0 {
            trace.iterates.push((k, x.clone()));
        }
        if change < cfg.tol {
            stop = StopReason::Converged;
            break;
        }
        let monitored = if cfg.reference.is_some() { &trace.sin_angle } else { &trace.step_change };
        let len = monitored.len();
        if len >= 2 && monitored[len - 1] >= monitored[len - 2] {
            run_len += 1;
        } else {
            run_len = 0;
        }
        if cfg.stagnation_window > 0 && run_len >= cfg.stagnation_window {
            stop = StopReason::Stagnated;
            break;
        }
    }
    let lambda1 = dot(&x, &ax);
    if !lambda1.is_finite() {
        return Err(Error::NonFinite("Rayleigh quotient".into()));
    }
    let fit = if trace.sin_angle.is_empty() { None } else { fit_geometric_rate(&trace.sin_angle).ok() };
    Ok(PowerOutcome {
        vector: x,
        estimate: SpectralEstimate {
            lambda1,
            lambda2_modulus: cfg.lambda2_modulus,
            rate: fit.map(|f| f.ratio),
            rate_constant_c: fit.map(|f| f.constant),
        },
        trace,
        iterations,
        stop,
    })
}

/// Least-squares fit `s_k ~ c r^k` (k = position in the series).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricFit {
    pub ratio: f64,
    pub constant: f64,
}

/// Entries at or below this level are treated as rounding noise.
pub const FIT_FLOOR: f64 = 1e-13;
/// Minimum number of tail entries for a fit.
pub const FIT_MIN_TAIL: usize = 8;

/// Fits `c r^k` to the tail of a positive series by linear least squares on
/// `ln s_k`. The usable part is the leading run of entries above
/// [`FIT_FLOOR`]; its first third is discarded as transient. A zero entry
/// means the iteration hit the eigenvector exactly and yields `r = 0`.
pub fn fit_geometric_rate(series: &[f64]) -> Result<GeometricFit> {
    if series.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidParameter("series must be finite and nonnegative".into()));
    }
    let usable = series.iter().take_while(|&&s| s > FIT_FLOOR).count();
    if usable < series.len() && series[usable] == 0.0 && usable < FIT_MIN_TAIL + FIT_MIN_TAIL / 2 {
        return Ok(GeometricFit {
            ratio: 0.0,
            constant: series.first().copied().unwrap_or(0.0),
        });
    }
    let start = usable / 3;
    let tail = usable - start;
    if tail < FIT_MIN_TAIL {
        return Err(Error::SeriesTooShort {
            usable: tail,
            needed: FIT_MIN_TAIL,
        });
    }
    let pts: Vec<(f64, f64)> = (start..usable).map(|k| (k as f64, series[k].ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(GeometricFit {
        ratio: slope.exp(),
        constant: intercept.exp(),
    })
}

/// Predicted per-step ratio of the truncated iteration on a spectrum with
/// real `lambda1 > lambda2 >= 0`: ratio of the partial exponential sums.
pub fn truncated_rate(alpha: f64, m: usize, lambda1: f64, lambda2: f64) -> f64 {
    let partial = |x: f64| {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=m {
            term *= x / k as f64;
            sum += term;
        }
        sum
    };
    partial(alpha * lambda2.abs()) / partial(alpha * lambda1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::google_matrix;
    use approx::assert_abs_diff_eq;

    fn diag(a: f64, b: f64) -> Matrix {
        Matrix::diag(&[a, b]).unwrap()
    }

    fn cfg_with_ref(truncation: Truncation, alpha: f64) -> PowerConfig {
        PowerConfig {
            alpha,
            truncation,
            tol: 1e-12,
            reference: Some(vec![1.0, 0.0]),
            ..PowerConfig::default()
        }
    }

    #[test]
    fn simple_power_on_diagonal() {
        let out = power_iterate(&diag(2.0, 1.0), &[1.0, 1.0], &PowerConfig::default()).unwrap();
        assert!(out.converged());
        assert_abs_diff_eq!(out.vector[0].abs(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out.vector[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out.estimate.lambda1, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn identity_converges_in_one_step() {
        let x0 = [3.0, 4.0];
        for cfg in [
            PowerConfig::default(),
            PowerConfig { truncation: Truncation::Exact, alpha: 0.7, ..PowerConfig::default() },
            PowerConfig { truncation: Truncation::Order(3), alpha: 5.0, ..PowerConfig::default() },
        ] {
            let out = exp_power_iterate(&Matrix::identity(2), &x0, &cfg).unwrap();
            assert_eq!(out.iterations, 1);
            assert_abs_diff_eq!(out.vector[0], 0.6, epsilon = 1e-15);
            assert_abs_diff_eq!(out.vector[1], 0.8, epsilon = 1e-15);
            assert_abs_diff_eq!(out.estimate.lambda1, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn google_two_cycle() {
        let g = google_matrix(&[(0, 1), (1, 0)], 2, 0.85).unwrap();
        let out = power_iterate(&g, &[1.0, 0.0], &PowerConfig { max_iters: 10_000, ..PowerConfig::default() }).unwrap();
        assert!(out.converged());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(out.vector[0].abs(), h, epsilon = 1e-9);
        assert_abs_diff_eq!(out.vector[1].abs(), h, epsilon = 1e-9);
        assert_abs_diff_eq!(out.estimate.lambda1, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn exact_mode_rate() {
        let out = exp_power_iterate(&diag(1.0, 0.5), &[1.0, 1.0], &cfg_with_ref(Truncation::Exact, 2.0)).unwrap();
        assert!(out.converged());
        assert_abs_diff_eq!(out.vector[0].abs(), 1.0, epsilon = 1e-12);
        let r = out.estimate.rate.unwrap();
        assert!((r - (-1f64).exp()).abs() < 1e-3, "{r}");
        let simple = exp_power_iterate(&diag(1.0, 0.5), &[1.0, 1.0], &cfg_with_ref(Truncation::Order(0), 2.0)).unwrap();
        assert!((simple.estimate.rate.unwrap() - 0.5).abs() < 1e-3);
        assert!(out.iterations < simple.iterations);
    }

    #[test]
    fn truncated_rate_example() {
        let out = exp_power_iterate(&diag(1.0, 0.5), &[1.0, 1.0], &cfg_with_ref(Truncation::Order(2), 2.0)).unwrap();
        let want = 2.5 / 5.0;
        assert_abs_diff_eq!(truncated_rate(2.0, 2, 1.0, 0.5), want, epsilon = 1e-15);
        assert!((out.estimate.rate.unwrap() - want).abs() < 1e-3);
    }

    #[test]
    fn unit_norm_iterates() {
        let cfg = PowerConfig { keep_every: 1, ..cfg_with_ref(Truncation::Order(3), 1.0) };
        let out = exp_power_iterate(&diag(1.0, 0.5), &[0.2, 5.0], &cfg).unwrap();
        for (_, x) in &out.trace.iterates {
            assert!((norm2(x) - 1.0).abs() < 1e-12);
        }
        assert_eq!(out.trace.rayleigh.len(), out.iterations);
        assert_eq!(out.trace.sin_angle.len(), out.iterations);
        assert!(out.trace.sin_angle.iter().all(|s| (0.0..=1.0).contains(s)));
    }

    #[test]
    fn negative_dominant_eigenvalue_converges_with_sign_alignment() {
        let out = power_iterate(&diag(-3.0, 1.0), &[1.0, 1.0], &PowerConfig::default()).unwrap();
        assert!(out.converged());
        assert_abs_diff_eq!(out.estimate.lambda1, -3.0, epsilon = 1e-9);
    }

    #[test]
    fn stagnation_detected_when_start_misses_dominant_direction() {
        // complex pair of equal modulus: the iterate rotates forever
        let rot = Matrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let out = power_iterate(&rot, &[1.0, 0.3], &PowerConfig::default()).unwrap();
        assert_eq!(out.stop, StopReason::Stagnated);
    }

    #[test]
    fn nullspace_start_is_an_error() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(power_iterate(&a, &[0.0, 1.0], &PowerConfig::default()), Err(Error::NullMap { step: 1 })));
        assert!(power_iterate(&a, &[0.0, 0.0], &PowerConfig::default()).is_err());
    }

    #[test]
    fn fit_exact_geometric() {
        let s: Vec<f64> = (0..20).map(|k| 0.5f64.powi(k)).collect();
        let f = fit_geometric_rate(&s).unwrap();
        assert_abs_diff_eq!(f.ratio, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.constant, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn fit_zero_and_short_series() {
        assert_eq!(fit_geometric_rate(&[0.3, 0.0]).unwrap().ratio, 0.0);
        assert!(matches!(fit_geometric_rate(&[0.5, 0.25, 0.125]), Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn sin_angle_small_angles_accurate() {
        let x = [1.0, 1e-12];
        assert!((sin_angle(&x, &[1.0, 0.0]) - 1e-12).abs() < 1e-24);
        assert_eq!(sin_angle(&[0.0, 1.0], &[1.0, 0.0]), 1.0);
    }
}
