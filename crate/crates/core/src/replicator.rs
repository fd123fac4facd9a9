//! Replicator dynamic `dX_i/dt = X_i ((CX)_i - X . CX)`.
//!
//! Orbits are integrated with fixed-step classic RK4, followed by clamping
//! negative components to zero and renormalizing. The long-run average
//! `(1/t) ∫ X dt` is accumulated with the trapezoid rule over every step.
//! Hedge with rate `alpha` is a first-order integrator of this flow; Euler
//! is another, and the two agree to second order per step.

use crate::error::{check_len, Error, Result};
use crate::games::{relative_entropy, Strategy};
use crate::linops::{dot, norm_inf_diff, Matrix};

/// Tangent vector of the flow at `x`; its components sum to zero.
pub fn replicator_rhs(c: &Matrix, x: &Strategy) -> Result<Vec<f64>> {
    rhs(c, x.as_slice())
}

fn rhs(c: &Matrix, x: &[f64]) -> Result<Vec<f64>> {
    let cx = c.matvec(x)?;
    let mean = dot(x, &cx);
    Ok(x.iter().zip(&cx).map(|(p, f)| p * (f - mean)).collect())
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One RK4 step without projection.
fn rk4(c: &Matrix, x: &[f64], dt: f64) -> Result<Vec<f64>> {
    let k1 = rhs(c, x)?;
    let k2 = rhs(c, &axpy(x, 0.5 * dt, &k1))?;
    let k3 = rhs(c, &axpy(x, 0.5 * dt, &k2))?;
    let k4 = rhs(c, &axpy(x, dt, &k3))?;
    Ok((0..x.len())
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Clamps negatives to zero and renormalizes; returns how many were clamped.
fn project(x: &mut [f64]) -> usize {
    let mut clamped = 0;
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            clamped += 1;
        }
    }
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    clamped
}

#[derive(Debug, Clone)]
pub struct OrbitConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Record every `k`-th step (the start and the final state are always kept).
    pub record_every: usize,
    /// Interior point to measure `RE(target, X_t)` against.
    pub target: Option<Strategy>,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            dt: 0.01,
            record_every: 1,
            target: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrbitPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub avg: Vec<f64>,
    pub re_to_target: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OrbitAverage {
    /// Time actually reached.
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    /// `(1/t) ∫_0^t X dt`.
    pub average: Strategy,
    /// `max_t |RE(target, X_t) - RE(target, X_0)|`.
    pub conserved_re_drift: Option<f64>,
    /// Number of components clamped to zero over the run.
    pub clamp_count: usize,
}

#[derive(Debug, Clone)]
pub struct Orbit {
    pub summary: OrbitAverage,
    pub points: Vec<OrbitPoint>,
    /// Time at which a non-finite state stopped the integration.
    pub aborted_at: Option<f64>,
    pub final_state: Strategy,
}

/// Integrates the orbit from an interior `x0`.
pub fn integrate_orbit(c: &Matrix, x0: &Strategy, cfg: &OrbitConfig) -> Result<Orbit> {
    check_len(c.n(), x0.len())?;
    if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {}", cfg.dt)));
    }
    if !(cfg.t_end >= 0.0) || !cfg.t_end.is_finite() {
        return Err(Error::InvalidParameter(format!("t_end must be nonnegative, got {}", cfg.t_end)));
    }
    if !x0.is_interior() {
        return Err(Error::InvalidParameter("start must be interior".into()));
    }
    if let Some(t) = &cfg.target {
        check_len(c.n(), t.len())?;
    }
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let n = c.n();
    let re_of = |x: &[f64]| -> Result<Option<f64>> {
        match &cfg.target {
            Some(t) => Ok(Some(relative_entropy(t, &Strategy::from_weights(x)?)?)),
            None => Ok(None),
        }
    };
    let mut x = x0.as_slice().to_vec();
    let mut integral = vec![0.0; n];
    let re0 = re_of(&x)?;
    let mut drift: Option<f64> = re0.map(|_| 0.0);
    let mut points = vec![OrbitPoint {
        t: 0.0,
        x: x.clone(),
        avg: x.clone(),
        re_to_target: re0,
    }];
    let mut clamp_count = 0;
    let mut aborted_at = None;
    let mut done = 0;
    for k in 1..=steps {
        let mut next = rk4(c, &x, cfg.dt)?;
        if next.iter().any(|v| !v.is_finite()) {
            aborted_at = Some((k - 1) as f64 * cfg.dt);
            break;
        }
        clamp_count += project(&mut next);
        for ((acc, a), b) in integral.iter_mut().zip(&x).zip(&next) {
            *acc += 0.5 * cfg.dt * (a + b);
        }
        x = next;
        done = k;
        let t = k as f64 * cfg.dt;
        let re = re_of(&x)?;
        if let (Some(d), Some(r), Some(r0)) = (drift.as_mut(), re, re0) {
            *d = d.max((r - r0).abs());
        }
        if (cfg.record_every > 0 && k % cfg.record_every == 0) || k == steps {
            points.push(OrbitPoint {
                t,
                x: x.clone(),
                avg: integral.iter().map(|v| v / t).collect(),
                re_to_target: re,
            });
        }
    }
    let average = if done == 0 {
        x0.clone()
    } else {
        let t = done as f64 * cfg.dt;
        Strategy::from_weights(&integral.iter().map(|v| v / t).collect::<Vec<_>>())?
    };
    Ok(Orbit {
        summary: OrbitAverage {
            t_end: done as f64 * cfg.dt,
            dt: cfg.dt,
            steps: done,
            average,
            conserved_re_drift: drift,
            clamp_count,
        },
        points,
        aborted_at,
        final_state: Strategy::from_weights(&x)?,
    })
}

/// Per-rate comparison of Hedge and Euler against a fine RK4 reference.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorErrorRow {
    pub alpha: f64,
    pub steps: usize,
    /// `||Hedge^K(x0) - X(t_end)||_inf`.
    pub hedge_error: f64,
    pub euler_error: f64,
    /// `||Hedge^K(x0) - Euler^K(x0)||_inf` at `t_end`.
    pub hedge_euler_gap: f64,
    /// Largest one-step gap `||T(X) - Euler(X, X)||_inf` over the Hedge orbit.
    pub local_gap: f64,
    /// First Euler step that produced a negative component.
    pub euler_left_simplex: Option<usize>,
}

/// Runs Hedge and Euler with each step size in `alphas` up to `t_end` and
/// compares with an RK4 reference at step `min(alphas) / 20`.
pub fn hedge_integrator_error(c: &Matrix, x0: &Strategy, t_end: f64, alphas: &[f64]) -> Result<Vec<IntegratorErrorRow>> {
    check_len(c.n(), x0.len())?;
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::InvalidParameter("step sizes must be positive".into()));
    }
    let mut counts = Vec::with_capacity(alphas.len());
    for &a in alphas {
        let k = (t_end / a).round();
        if (k * a - t_end).abs() > 1e-9 * t_end.max(1.0) {
            return Err(Error::InvalidParameter(format!("t_end = {t_end} is not a multiple of step {a}")));
        }
        counts.push(k as usize);
    }
    let dt_ref = alphas.iter().copied().fold(f64::INFINITY, f64::min) / 20.0;
    let reference = integrate_orbit(
        c,
        x0,
        &OrbitConfig {
            t_end,
            dt: dt_ref,
            record_every: 0,
            target: None,
        },
    )?
    .final_state;

    let mut rows = Vec::with_capacity(alphas.len());
    for (&alpha, &steps) in alphas.iter().zip(&counts) {
        let mut h = x0.as_slice().to_vec();
        let mut e = x0.as_slice().to_vec();
        let mut local_gap: f64 = 0.0;
        let mut left = None;
        for k in 1..=steps {
            let cx = c.matvec(&h)?;
            let mean = dot(&h, &cx);
            let w: Vec<f64> = h.iter().zip(&cx).map(|(p, f)| p * (alpha * (f - mean)).exp()).collect();
            let s: f64 = w.iter().sum();
            let hedge: Vec<f64> = w.iter().map(|v| v / s).collect();
            let euler_here: Vec<f64> = h.iter().zip(&cx).map(|(p, f)| p * (1.0 + alpha * (f - mean))).collect();
            local_gap = local_gap.max(norm_inf_diff(&hedge, &euler_here));
            h = hedge;

            let ce = c.matvec(&e)?;
            let me = dot(&e, &ce);
            e = e.iter().zip(&ce).map(|(p, f)| p * (1.0 + alpha * (f - me))).collect();
            if left.is_none() && e.iter().any(|v| *v < 0.0) {
                left = Some(k);
            }
        }
        rows.push(IntegratorErrorRow {
            alpha,
            steps,
            hedge_error: norm_inf_diff(&h, reference.as_slice()),
            euler_error: norm_inf_diff(&e, reference.as_slice()),
            hedge_euler_gap: norm_inf_diff(&h, &e),
            local_gap,
            euler_left_simplex: left,
        });
    }
    Ok(rows)
}
