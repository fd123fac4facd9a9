//! Strategies, payoff normalization, relative entropy and the Hedge family of
//! maps on symmetric bimatrix games `(C, C^T)`.
//!
//! Hedge is `T_i(X) = X(i) exp(alpha (CX)_i) / sum_j X(j) exp(alpha (CX)_j)`;
//! the multiplier form `T(X | Z)` uses `CZ` in the exponent. Two evaluation
//! modes are provided: `Naive` exponentiates the raw exponents and sums
//! sequentially, `LogDomain` subtracts the largest exponent on the carrier
//! before exponentiating and sums with compensation. They agree to rounding
//! whenever the naive form stays in range.

use std::fmt;

use crate::error::{check_len, Error, Result};
use crate::linops::{dot, Matrix};

/// Probabilities below this are treated as zero.
pub const CARRIER_EPS: f64 = 1e-300;
/// Allowed deviation of a strategy's sum from 1.
pub const SUM_TOL: f64 = 1e-12;

/// A probability vector on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy(Vec<f64>);

impl Strategy {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidStrategy("empty".into()));
        }
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidStrategy(format!("component {i} is {v}")));
        }
        let s = compensated_sum(&p);
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidStrategy(format!("components sum to {s}")));
        }
        Ok(Self(p))
    }

    /// Normalizes nonnegative weights with a positive sum.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        if w.is_empty() || w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidStrategy("weights must be finite and nonnegative".into()));
        }
        let s = compensated_sum(w);
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NumericalRange(format!("weights sum to {s}")));
        }
        Ok(Self(w.iter().map(|v| v / s).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// Vertex `E_i` (0-based).
    pub fn pure(n: usize, i: usize) -> Self {
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        Self(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn carrier(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.in_carrier(i)).collect()
    }

    pub fn in_carrier(&self, i: usize) -> bool {
        self.0[i] >= CARRIER_EPS
    }

    pub fn is_interior(&self) -> bool {
        (0..self.0.len()).all(|i| self.in_carrier(i))
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl std::ops::Index<usize> for Strategy {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::io::format_vector_csv(&self.0))
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(v: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &x in v {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Running uniform average `avg_k = avg_{k-1} + (x_k - avg_{k-1}) / (k + 1)`.
#[derive(Debug, Clone)]
pub struct RunningAverage {
    mean: Vec<f64>,
    count: usize,
}

impl RunningAverage {
    pub fn new(first: &[f64]) -> Self {
        Self { mean: first.to_vec(), count: 1 }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let w = 1.0 / self.count as f64;
        for (m, v) in self.mean.iter_mut().zip(x) {
            *m += (v - *m) * w;
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// The mean as a strategy, renormalized against accumulated rounding.
    pub fn strategy(&self) -> Strategy {
        Strategy::from_weights(&self.mean).expect("average of strategies is a strategy")
    }
}

/// Carrier-restricted Kullback-Leibler divergence `sum_{P(i)>0} P(i) ln(P(i)/Q(i))`.
pub fn relative_entropy(p: &Strategy, q: &Strategy) -> Result<f64> {
    check_len(p.len(), q.len())?;
    let mut terms = Vec::with_capacity(p.len());
    for i in p.carrier() {
        if !q.in_carrier(i) {
            return Err(Error::InfiniteDivergence { index: i });
        }
        terms.push(p[i] * (p[i].ln() - q[i].ln()));
    }
    Ok(compensated_sum(&terms).max(0.0))
}

/// Payoff matrix together with its affine normalization into `[0, 1]`.
#[derive(Debug, Clone)]
pub struct SymmetricGame {
    pub raw: Matrix,
    /// `(raw - offset) / scale`.
    pub normalized: Matrix,
    pub scale: f64,
    pub offset: f64,
    /// `max |raw + raw^T|`.
    pub antisymmetry_defect: f64,
}

/// Tolerance on `max |C + C^T|` for a raw matrix to count as antisymmetric.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

impl SymmetricGame {
    pub fn n(&self) -> usize {
        self.raw.n()
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.antisymmetry_defect < ANTISYMMETRY_TOL
    }

    /// Converts an error measured on the normalized matrix to raw units.
    pub fn to_raw_units(&self, normalized_error: f64) -> f64 {
        normalized_error * self.scale
    }
}

/// Min/max affine map of `raw` into `[0, 1]` (`scale = 1` for constant matrices).
pub fn normalize_payoffs(raw: &Matrix) -> Result<SymmetricGame> {
    let (lo, hi) = raw.min_max();
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::NonFinite("payoff matrix".into()));
    }
    let spread = hi - lo;
    let scale = if spread > 0.0 { spread } else { 1.0 };
    let normalized = raw.map(|v| ((v - lo) / scale).clamp(0.0, 1.0))?;
    Ok(SymmetricGame {
        raw: raw.clone(),
        normalized,
        scale,
        offset: lo,
        antisymmetry_defect: raw.antisymmetry_defect(),
    })
}

/// `max_i (CX)_i - X . CX`, the symmetric-equilibrium gap.
pub fn approx_error(c: &Matrix, x: &Strategy) -> Result<f64> {
    let cx = c.matvec(x.as_slice())?;
    let best = cx.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((best - dot(x.as_slice(), &cx)).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HedgeMode {
    Naive,
    LogDomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeParams {
    pub alpha: f64,
    pub mode: HedgeMode,
}

impl HedgeParams {
    pub fn new(alpha: f64, mode: HedgeMode) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("learning rate must be positive, got {alpha}")));
        }
        Ok(Self { alpha, mode })
    }
}

/// Reweights `x` by `exp(alpha * payoff)` and renormalizes.
pub fn reweight(x: &Strategy, payoff: &[f64], params: HedgeParams) -> Result<Strategy> {
    check_len(x.len(), payoff.len())?;
    let alpha = params.alpha;
    let w: Vec<f64> = match params.mode {
        HedgeMode::Naive => {
            let mut w = Vec::with_capacity(x.len());
            for (i, (&p, &f)) in x.as_slice().iter().zip(payoff).enumerate() {
                let e = (alpha * f).exp();
                if !e.is_finite() {
                    return Err(Error::NumericalRange(format!("exp({}) overflowed at component {i}", alpha * f)));
                }
                w.push(p * e);
            }
            let s: f64 = w.iter().sum();
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::NumericalRange(format!("Hedge normalizer is {s}")));
            }
            return Ok(Strategy(w.into_iter().map(|v| v / s).collect()));
        }
        HedgeMode::LogDomain => {
            let top = (0..x.len())
                .filter(|&i| x.in_carrier(i))
                .map(|i| alpha * payoff[i])
                .fold(f64::NEG_INFINITY, f64::max);
            if !top.is_finite() {
                return Err(Error::NumericalRange("no finite exponent on the carrier".into()));
            }
            (0..x.len())
                .map(|i| if x.in_carrier(i) { x[i] * (alpha * payoff[i] - top).exp() } else { 0.0 })
                .collect()
        }
    };
    Strategy::from_weights(&w)
}

/// One Hedge step `T(X)`.
pub fn hedge_step(c: &Matrix, x: &Strategy, params: HedgeParams) -> Result<Strategy> {
    let cx = c.matvec(x.as_slice())?;
    reweight(x, &cx, params)
}

/// The multiplier form `T(X | Z)`.
pub fn hedge_step_multiplier(c: &Matrix, x: &Strategy, z: &Strategy, params: HedgeParams) -> Result<Strategy> {
    check_len(x.len(), z.len())?;
    let cz = c.matvec(z.as_slice())?;
    reweight(x, &cz, params)
}

/// Euler step `X(i) (1 + alpha ((CZ)_i - X . CZ))`. The result sums to one in
/// exact arithmetic but may have negative components.
pub fn euler_step(c: &Matrix, x: &Strategy, z: &Strategy, alpha: f64) -> Result<Vec<f64>> {
    check_len(x.len(), z.len())?;
    let cz = c.matvec(z.as_slice())?;
    let mean = dot(x.as_slice(), &cz);
    Ok(x.as_slice().iter().zip(&cz).map(|(p, f)| p * (1.0 + alpha * (f - mean))).collect())
}

/// Precomputed `exp(alpha (C_ij - max_i C_ij))` for every column `j`, so a
/// pure multiplier `E_j` costs one elementwise product.
#[derive(Debug, Clone)]
pub struct ExpColumnTable {
    alpha: f64,
    /// `columns[j][i]`.
    columns: Vec<Vec<f64>>,
}

impl ExpColumnTable {
    pub fn new(c: &Matrix, alpha: f64) -> Result<Self> {
        HedgeParams::new(alpha, HedgeMode::LogDomain)?;
        let columns = (0..c.n())
            .map(|j| {
                let col = c.column(j);
                let top = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                col.iter().map(|v| (alpha * (v - top)).exp()).collect()
            })
            .collect();
        Ok(Self { alpha, columns })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// `T(X | E_j)`.
    pub fn step(&self, x: &Strategy, j: usize) -> Result<Strategy> {
        check_len(self.columns.len(), x.len())?;
        let w: Vec<f64> = x.as_slice().iter().zip(&self.columns[j]).map(|(p, e)| p * e).collect();
        Strategy::from_weights(&w)
    }
}

/// Hedge iterated with log-probabilities as the state, so components far
/// below the smallest positive double stay representable and can recover.
#[derive(Debug, Clone)]
pub struct LogHedge {
    logp: Vec<f64>,
}

impl LogHedge {
    pub fn new(x: &Strategy) -> Self {
        Self {
            logp: x.as_slice().iter().map(|p| p.ln()).collect(),
        }
    }

    pub fn log_probabilities(&self) -> &[f64] {
        &self.logp
    }

    pub fn strategy(&self) -> Strategy {
        let top = self.logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.logp.iter().map(|l| (l - top).exp()).collect();
        Strategy::from_weights(&w).expect("log weights have a finite maximum")
    }

    pub fn step(&mut self, c: &Matrix, alpha: f64) -> Result<()> {
        let x = self.strategy();
        let cx = c.matvec(x.as_slice())?;
        for (l, f) in self.logp.iter_mut().zip(&cx) {
            *l += alpha * f;
        }
        let top = self.logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(Error::NumericalRange("log weights diverged".into()));
        }
        let terms: Vec<f64> = self.logp.iter().map(|l| (l - top).exp()).collect();
        let lse = top + compensated_sum(&terms).ln();
        self.logp.iter_mut().for_each(|l| *l -= lse);
        Ok(())
    }
}

/// Built-in payoff matrices addressable by name.
pub mod builtin {
    use crate::linops::Matrix;

    /// Rock-paper-scissors: row `i` beats row `i - 1` (mod 3).
    pub fn rps() -> Matrix {
        Matrix::from_rows(&[vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]]).expect("static")
    }

    pub fn pennies() -> Matrix {
        Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).expect("static")
    }

    /// Shapley's 3x3 game.
    pub fn shapley3() -> Matrix {
        Matrix::from_rows(&[vec![0.0, 1.0, 2.0], vec![2.0, 0.0, 1.0], vec![1.0, 2.0, 0.0]]).expect("static")
    }

    /// Symmetrization of Shapley's game; the uniform strategy is its unique
    /// Nash equilibrium.
    pub fn shapley6() -> Matrix {
        Matrix::from_rows(&[
            vec![0.0, 0.0, 0.0, 0.0, 1.0, 2.0],
            vec![0.0, 0.0, 0.0, 2.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0, 1.0, 2.0, 0.0],
            vec![0.0, 1.0, 2.0, 0.0, 0.0, 0.0],
            vec![2.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            vec![1.0, 2.0, 0.0, 0.0, 0.0, 0.0],
        ])
        .expect("static")
    }

    pub const NAMES: [&str; 4] = ["rps", "pennies", "shapley3", "shapley6"];

    pub fn by_name(name: &str) -> Option<Matrix> {
        match name {
            "rps" => Some(rps()),
            "pennies" => Some(pennies()),
            "shapley3" => Some(shapley3()),
            "shapley6" => Some(shapley6()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::builtin::*;
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s(v: &[f64]) -> Strategy {
        Strategy::new(v.to_vec()).unwrap()
    }

    fn log_mode(alpha: f64) -> HedgeParams {
        HedgeParams::new(alpha, HedgeMode::LogDomain).unwrap()
    }

    #[test]
    fn strategy_validation() {
        assert!(Strategy::new(vec![0.5, 0.6]).is_err());
        assert!(Strategy::new(vec![-0.1, 1.1]).is_err());
        assert!(Strategy::new(vec![]).is_err());
        let x = s(&[1.0, 0.0]);
        assert_eq!(x.carrier(), vec![0]);
        assert!(!x.is_interior());
        assert!(Strategy::from_weights(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn relative_entropy_examples() {
        let half = s(&[0.5, 0.5]);
        assert_eq!(relative_entropy(&half, &half).unwrap(), 0.0);
        let q = s(&[0.25, 0.75]);
        let want = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(relative_entropy(&half, &q).unwrap(), want, epsilon = 1e-15);
        assert_abs_diff_eq!(want, 0.143841, epsilon = 1e-6);
        assert_abs_diff_eq!(relative_entropy(&s(&[1.0, 0.0]), &half).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert!(matches!(
            relative_entropy(&half, &s(&[1.0, 0.0])),
            Err(Error::InfiniteDivergence { index: 1 })
        ));
    }

    #[test]
    fn normalization_examples() {
        let g = normalize_payoffs(&rps()).unwrap();
        assert_eq!((g.offset, g.scale), (-1.0, 2.0));
        assert!(g.is_antisymmetric());
        for v in g.normalized.to_dense_vec() {
            assert!([0.0, 0.5, 1.0].contains(&v));
        }
        let g = normalize_payoffs(&shapley6()).unwrap();
        assert_eq!((g.offset, g.scale), (0.0, 2.0));
        assert!(!g.is_antisymmetric());
        let z = normalize_payoffs(&Matrix::dense(2, vec![0.0; 4]).unwrap()).unwrap();
        assert_eq!(z.scale, 1.0);
        assert!(z.normalized.to_dense_vec().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn approx_error_examples() {
        assert_abs_diff_eq!(approx_error(&rps(), &Strategy::uniform(3)).unwrap(), 0.0, epsilon = 1e-15);
        assert_eq!(approx_error(&rps(), &Strategy::pure(3, 0)).unwrap(), 1.0);
        let constant = Matrix::dense(2, vec![3.0; 4]).unwrap();
        assert_eq!(approx_error(&constant, &Strategy::pure(2, 1)).unwrap(), 0.0);
    }

    #[test]
    fn approx_error_scales_with_normalization() {
        let g = normalize_payoffs(&shapley6()).unwrap();
        let x = s(&[0.1, 0.2, 0.3, 0.2, 0.1, 0.1]);
        let raw = approx_error(&g.raw, &x).unwrap();
        let norm = approx_error(&g.normalized, &x).unwrap();
        assert_abs_diff_eq!(g.to_raw_units(norm), raw, epsilon = 1e-14);
    }

    #[test]
    fn hedge_examples() {
        let u = Strategy::uniform(3);
        for alpha in [0.1, 1.0, 50.0] {
            let t = hedge_step(&rps(), &u, log_mode(alpha)).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(t[i], 1.0 / 3.0, epsilon = 1e-15);
            }
        }
        // oracle: weights (0.5, 0.25 e^{1/4}, 0.25 e^{-1/4})
        let x = s(&[0.5, 0.25, 0.25]);
        let w = [0.5, 0.25 * 0.25f64.exp(), 0.25 * (-0.25f64).exp()];
        let tot: f64 = w.iter().sum();
        for mode in [HedgeMode::Naive, HedgeMode::LogDomain] {
            let t = hedge_step(&rps(), &x, HedgeParams::new(1.0, mode).unwrap()).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(t[i], w[i] / tot, epsilon = 1e-15);
            }
            assert_abs_diff_eq!(t[0], 0.49227, epsilon = 1e-5);
            assert_abs_diff_eq!(t[1], 0.31604, epsilon = 1e-5);
            assert_abs_diff_eq!(t[2], 0.19169, epsilon = 1e-5);
        }
        let t = hedge_step(&shapley6(), &s(&[0.1, 0.2, 0.3, 0.2, 0.1, 0.1]), log_mode(1e-12)).unwrap();
        assert_abs_diff_eq!(t[2], 0.3, epsilon = 1e-11);
    }

    #[test]
    fn naive_overflow_is_reported() {
        let x = s(&[0.5, 0.5]);
        let big = HedgeParams::new(1000.0, HedgeMode::Naive).unwrap();
        assert!(matches!(hedge_step(&shapley3(), &Strategy::uniform(3), big), Err(Error::NumericalRange(_))));
        let t = hedge_step(&pennies(), &x, HedgeParams::new(1000.0, HedgeMode::LogDomain).unwrap()).unwrap();
        assert!(t[0] > 0.99);
    }

    #[test]
    fn multiplier_examples() {
        let x = s(&[0.5, 0.25, 0.25]);
        let p = log_mode(0.8);
        assert_eq!(hedge_step_multiplier(&rps(), &x, &x, p).unwrap(), hedge_step(&rps(), &x, p).unwrap());
        let u = Strategy::uniform(3);
        let t = hedge_step_multiplier(&rps(), &u, &Strategy::pure(3, 1), log_mode(1.0)).unwrap();
        let e = 1f64.exp();
        let tot = 1.0 / e + 1.0 + e;
        for (i, w) in [1.0 / e, 1.0, e].iter().enumerate() {
            assert_abs_diff_eq!(t[i], w / tot, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(t[0], 0.090031, epsilon = 1e-6);
        assert_abs_diff_eq!(t[2], 0.665241, epsilon = 1e-6);
        let table = ExpColumnTable::new(&rps(), 1.0).unwrap();
        let tt = table.step(&u, 1).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(tt[i], t[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn euler_examples() {
        let u = Strategy::uniform(3);
        let e = euler_step(&rps(), &u, &Strategy::pure(3, 1), 0.1).unwrap();
        assert_abs_diff_eq!(e[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(e[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[2], 0.11 / 0.3, epsilon = 1e-15);
        let constant = Matrix::dense(3, vec![2.0; 9]).unwrap();
        let x = s(&[0.2, 0.3, 0.5]);
        assert_eq!(euler_step(&constant, &x, &u, 0.7).unwrap(), x.as_slice().to_vec());
        assert_eq!(euler_step(&rps(), &x, &u, 0.0).unwrap(), x.as_slice().to_vec());
    }

    #[test]
    fn log_hedge_tracks_hedge() {
        let c = normalize_payoffs(&shapley6()).unwrap().normalized;
        let mut lh = LogHedge::new(&s(&[0.1, 0.2, 0.3, 0.2, 0.1, 0.1]));
        let mut x = s(&[0.1, 0.2, 0.3, 0.2, 0.1, 0.1]);
        for _ in 0..50 {
            lh.step(&c, 0.3).unwrap();
            x = hedge_step(&c, &x, log_mode(0.3)).unwrap();
        }
        let y = lh.strategy();
        for i in 0..6 {
            assert_abs_diff_eq!(x[i], y[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn running_average() {
        let mut avg = RunningAverage::new(&[1.0, 0.0]);
        avg.push(&[0.0, 1.0]);
        avg.push(&[0.0, 1.0]);
        assert_abs_diff_eq!(avg.mean()[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(avg.count(), 3);
    }

    #[test]
    fn builtins_by_name() {
        for name in NAMES {
            assert!(by_name(name).is_some());
        }
        assert!(by_name("chess").is_none());
    }
}
