//! Closed-form evaluation of the concentration and regret bounds.
//!
//! These are the scalar inequalities the Monte Carlo experiments are checked
//! against: the one-sided Hoeffding tail, the piecewise-linear envelope `g`
//! and its sum inequality, the regret chain bound and its threshold
//! calibration, the survival-function grid sum, the dependence-free risk
//! aggregation value `E`, and the large-deviation lower-bound floors.
//!
//! All functions here are pure; the only numerics beyond arithmetic are an
//! adaptive Simpson quadrature, a golden-section minimizer, and the Gaussian
//! survival function via `erfc` (relative error well under 1e-12 over the
//! ranges used).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("ramp width alpha={alpha} must lie in (0, {limit})")]
    AlphaOutOfRange { alpha: f64, limit: f64 },
    #[error("epsilon={eps} outside the admissible interval ({lo}, {hi})")]
    EpsilonOutOfRange { eps: f64, lo: f64, hi: f64 },
    #[error("gamma={0} must lie in (0,1)")]
    GammaOutOfRange(f64),
    #[error("parameter {name}={value} must be positive")]
    NonPositive { name: &'static str, value: f64 },
    #[error("integration cut t={t} must satisfy t < C/K = {limit}")]
    CutTooLarge { t: f64, limit: f64 },
    #[error("survival function must be nonincreasing with values in [0,1] (violated at u={0})")]
    BadSurvival(f64),
    #[error("sqrt(N/K) = {0} must be an even integer")]
    RootNotEvenInteger(f64),
    #[error("sqrt(ln(1/eps)) = {0} must be an integer")]
    RootLogNotInteger(f64),
}

/// Survival function of the standard Gaussian distribution.
pub fn gaussian_survival(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Parameter bundle for the regret-bound chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub gamma: f64,
    /// Regret threshold; defaults to `2 sqrt(K N ln(1/eps))` when absent.
    #[serde(default)]
    pub c: Option<f64>,
    /// Envelope ramp width; defaults to `(1 - gamma) C / K` when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Per-class tail threshold for the Hoeffding bound.
    #[serde(default)]
    pub u: Option<f64>,
}

impl BoundParams {
    pub fn q(&self) -> usize {
        self.n / self.k
    }

    pub fn c(&self) -> f64 {
        self.c
            .unwrap_or_else(|| 2.0 * (self.k as f64 * self.n as f64 * (1.0 / self.epsilon).ln()).sqrt())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
            .unwrap_or_else(|| (1.0 - self.gamma) * self.c() / self.k as f64)
    }

    pub fn validate(&self) -> Result<(), BoundError> {
        if self.k == 0 || self.n == 0 {
            return Err(BoundError::NonPositive {
                name: "N,K",
                value: 0.0,
            });
        }
        if !(0.0 < self.gamma && self.gamma < 1.0) {
            return Err(BoundError::GammaOutOfRange(self.gamma));
        }
        if !(0.0 < self.epsilon && self.epsilon < 1.0) {
            return Err(BoundError::EpsilonOutOfRange {
                eps: self.epsilon,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let c = self.c();
        if c <= 0.0 {
            return Err(BoundError::NonPositive { name: "C", value: c });
        }
        let alpha = self.alpha();
        if !(alpha > 0.0 && alpha < c / self.k as f64) {
            return Err(BoundError::AlphaOutOfRange {
                alpha,
                limit: c / self.k as f64,
            });
        }
        if let Some(u) = self.u {
            if u < 0.0 {
                return Err(BoundError::NonPositive { name: "U", value: u });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// The envelope g and its sum inequality
// ---------------------------------------------------------------------------

/// Piecewise-linear envelope: 0 below `C/K - alpha`, slope `1/(K alpha)`
/// on the ramp, 1 above `C/K + (K-1) alpha`.
pub fn g_eval(x: f64, c: f64, k: usize, alpha: f64) -> Result<f64, BoundError> {
    let kf = k as f64;
    if !(alpha > 0.0 && alpha < c / kf) {
        return Err(BoundError::AlphaOutOfRange {
            alpha,
            limit: c / kf,
        });
    }
    let lo = c / kf - alpha;
    let hi = c / kf + (kf - 1.0) * alpha;
    Ok(if x < lo {
        0.0
    } else if x > hi {
        1.0
    } else {
        (x - lo) / (kf * alpha)
    })
}

/// Whether `sum_k g(x_k) >= 1_{sum_k x_k >= C}` holds for the given sample.
/// The inequality is a theorem, so this should never return `false`; it is
/// exposed so the fuzz suites can hammer it.
pub fn lemma_ep_check(xs: &[f64], c: f64, alpha: f64) -> Result<bool, BoundError> {
    let k = xs.len();
    let total: f64 = xs.iter().sum();
    let mut lhs = 0.0;
    for &x in xs {
        lhs += g_eval(x, c, k, alpha)?;
    }
    let rhs = if total >= c { 1.0 } else { 0.0 };
    Ok(lhs >= rhs)
}

// ---------------------------------------------------------------------------
// Hoeffding tail and the regret chain
// ---------------------------------------------------------------------------

/// One-sided Hoeffding tail for a supermartingale with increments in [-1,1]
/// over `Q` blocks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HoeffdingTail {
    /// `exp(-U^2 / (2Q))`
    pub tight: f64,
    /// `exp(-U^2 K / (2N))`, the form used in the chain (Q >= N/K makes it
    /// the looser of the two only when QK <= N; both are reported).
    pub coarse: f64,
}

pub fn hoeffding_bound(u: f64, q: usize, k: usize, n: usize) -> HoeffdingTail {
    let tight = (-u * u / (2.0 * q as f64)).exp();
    let coarse = (-u * u * k as f64 / (2.0 * n as f64)).exp();
    HoeffdingTail { tight, coarse }
}

/// The tail bound `KN / (gamma (1-gamma) C^2) * exp(-gamma^2 C^2 / (2KN))`
/// on the regret exceeding `C`.
pub fn regret_chain_bound(c: f64, k: usize, n: usize, gamma: f64) -> Result<f64, BoundError> {
    if !(0.0 < gamma && gamma < 1.0) {
        return Err(BoundError::GammaOutOfRange(gamma));
    }
    if c <= 0.0 {
        return Err(BoundError::NonPositive {
            name: "C",
            value: c,
        });
    }
    let kn = k as f64 * n as f64;
    Ok(kn / (gamma * (1.0 - gamma) * c * c) * (-gamma * gamma * c * c / (2.0 * kn)).exp())
}

/// Regret threshold `2 sqrt(K N ln(1/eps))`, admissible for `eps` in (0, 0.3).
pub fn regret_threshold(k: usize, n: usize, eps: f64) -> Result<f64, BoundError> {
    if !(0.0 < eps && eps < 0.3) {
        return Err(BoundError::EpsilonOutOfRange {
            eps,
            lo: 0.0,
            hi: 0.3,
        });
    }
    Ok(2.0 * (k as f64 * n as f64 * (1.0 / eps).ln()).sqrt())
}

/// Unrestricted-range tail coefficient `5K/(delta^2 N) exp(-delta^2 N / (4K))`
/// on the normalized regret exceeding `delta`.
pub fn no_restriction_bound(delta: f64, k: usize, n: usize) -> Result<f64, BoundError> {
    if delta <= 0.0 {
        return Err(BoundError::NonPositive {
            name: "delta",
            value: delta,
        });
    }
    let kf = k as f64;
    let nf = n as f64;
    Ok(5.0 * kf / (delta * delta * nf) * (-delta * delta * nf / (4.0 * kf)).exp())
}

/// Lower-bound companion threshold `sqrt(K N)`.
pub fn lower_bound_companion(k: usize, n: usize) -> f64 {
    (k as f64 * n as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Survival-function grid sum
// ---------------------------------------------------------------------------

/// Grid over-approximation `sum_{j=0}^{ceil(C/eps)} eps (f(j eps) + eps)` of
/// `int_0^C f(u) du` for a nonincreasing survival function `f` on `[0, C]`.
pub fn representation_bound(
    f: impl Fn(f64) -> f64,
    c: f64,
    eps: f64,
) -> Result<f64, BoundError> {
    if c <= 0.0 {
        return Err(BoundError::NonPositive {
            name: "C",
            value: c,
        });
    }
    if eps <= 0.0 {
        return Err(BoundError::NonPositive {
            name: "eps",
            value: eps,
        });
    }
    let steps = (c / eps).ceil() as usize;
    let mut total = 0.0;
    let mut prev = f64::INFINITY;
    for j in 0..=steps {
        let u = j as f64 * eps;
        let v = f(u);
        if !(0.0..=1.0).contains(&v) || v > prev + 1e-12 {
            return Err(BoundError::BadSurvival(u));
        }
        prev = v;
        total += eps * (v + eps);
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Robust risk aggregation
// ---------------------------------------------------------------------------

/// The aggregation value
/// `E(t) = K int_t^{C-(K-1)t} exp(-a x^2) dx / (C - K t)` for `t < C/K`.
pub fn risk_aggregation_e(a: f64, c: f64, k: usize, t: f64) -> Result<f64, BoundError> {
    if a <= 0.0 {
        return Err(BoundError::NonPositive {
            name: "a",
            value: a,
        });
    }
    if c <= 0.0 {
        return Err(BoundError::NonPositive {
            name: "C",
            value: c,
        });
    }
    let kf = k as f64;
    if t >= c / kf {
        return Err(BoundError::CutTooLarge { t, limit: c / kf });
    }
    let upper = c - (kf - 1.0) * t;
    let integral = adaptive_simpson(|x| (-a * x * x).exp(), t, upper, 1e-8);
    Ok(kf * integral / (c - kf * t))
}

/// Closed-form upper bound `(4KN/C^2) exp(-C^2/(8KN))` for the midpoint cut
/// `t = C/(2K)` with rate `a = K/(2N)`.
pub fn feller_bound(c: f64, k: usize, n: usize) -> f64 {
    let kn = k as f64 * n as f64;
    4.0 * kn / (c * c) * (-c * c / (8.0 * kn)).exp()
}

/// Infimum of [`risk_aggregation_e`] over the cut `t in (0, C/K)` via
/// golden-section search; also evaluates the midpoint so the reported value
/// never exceeds it.
pub fn risk_aggregation_inf(a: f64, c: f64, k: usize) -> Result<(f64, f64), BoundError> {
    let kf = k as f64;
    let hi = c / kf;
    let eval = |t: f64| risk_aggregation_e(a, c, k, t).unwrap_or(f64::INFINITY);
    let (mut best_t, mut best_v) = golden_section_min(eval, 1e-9 * hi, (1.0 - 1e-9) * hi, 1e-6);
    let mid = hi / 2.0;
    let mid_v = eval(mid);
    if mid_v < best_v {
        best_t = mid;
        best_v = mid_v;
    }
    Ok((best_t, best_v))
}

/// Threshold `4 sqrt(K N ln(1/eps))` of the K-step-lookback law of large
/// numbers; admissible for `eps` in (0, 0.7).
pub fn lln_threshold(k: usize, n: usize, eps: f64) -> Result<f64, BoundError> {
    if !(0.0 < eps && eps < 0.7) {
        return Err(BoundError::EpsilonOutOfRange {
            eps,
            lo: 0.0,
            hi: 0.7,
        });
    }
    Ok(4.0 * (k as f64 * n as f64 * (1.0 / eps).ln()).sqrt())
}

// ---------------------------------------------------------------------------
// Large-deviation lower bound
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LowerBoundEval {
    /// `sqrt(K N ln(1/eps))`
    pub threshold: f64,
    /// `eps^4 / 15`
    pub floor: f64,
    /// improved variant `eps^3 / 5`
    pub floor_improved: f64,
    /// whether the side condition `threshold <= N/4` holds
    pub condition_ok: bool,
}

/// Threshold and probability floor of the large-deviation lower bound.
///
/// Hypotheses: `sqrt(N/K)` an even integer and `sqrt(ln(1/eps))` an integer;
/// both are checked exactly up to 1e-9. The side condition
/// `threshold <= N/4` is reported, not enforced.
pub fn lower_bound_eval(k: usize, n: usize, eps: f64) -> Result<LowerBoundEval, BoundError> {
    if !(0.0 < eps && eps < 1.0) {
        return Err(BoundError::EpsilonOutOfRange {
            eps,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let ratio_root = (n as f64 / k as f64).sqrt();
    let rounded = ratio_root.round();
    if (ratio_root - rounded).abs() > 1e-9 || (rounded as i64) % 2 != 0 {
        return Err(BoundError::RootNotEvenInteger(ratio_root));
    }
    let log_root = (1.0 / eps).ln().sqrt();
    if (log_root - log_root.round()).abs() > 1e-9 {
        return Err(BoundError::RootLogNotInteger(log_root));
    }
    let threshold = (k as f64 * n as f64 * (1.0 / eps).ln()).sqrt();
    Ok(LowerBoundEval {
        threshold,
        floor: eps.powi(4) / 15.0,
        floor_improved: eps.powi(3) / 5.0,
        condition_ok: threshold <= n as f64 / 4.0,
    })
}

// ---------------------------------------------------------------------------
// Numerics
// ---------------------------------------------------------------------------

/// Adaptive Simpson quadrature with the given relative tolerance.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, b - a);
    let tol = rel_tol * whole.abs().max(1e-300);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
/// Returns `(argmin, min)` once the bracket is shorter than `tol * (b - a)`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let span = b - a;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol * span {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn g_at_mean_is_one_over_k() {
        for k in 1..=8usize {
            let c = 3.0;
            let alpha = 0.5 * c / k as f64;
            let v = g_eval(c / k as f64, c, k, alpha).unwrap();
            assert!((v - 1.0 / k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn g_piecewise_values() {
        // C=10, K=2, alpha=1: ramp from 4 to 6 with slope 1/2
        assert_eq!(g_eval(3.9, 10.0, 2, 1.0).unwrap(), 0.0);
        assert!((g_eval(4.0, 10.0, 2, 1.0).unwrap()).abs() < 1e-15);
        assert!((g_eval(5.0, 10.0, 2, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(g_eval(7.0, 10.0, 2, 1.0).unwrap(), 1.0);
        assert!(g_eval(1.0, 10.0, 2, 6.0).is_err());
    }

    #[test]
    fn g_is_monotone_and_clamped() {
        let c = 4.0;
        let k = 3;
        let alpha = 0.3;
        let mut prev = -1.0;
        for i in 0..400 {
            let x = -2.0 + i as f64 * 0.02;
            let v = g_eval(x, c, k, alpha).unwrap();
            assert!(v >= prev - 1e-15);
            assert!((0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn lemma_ep_boundary_cases() {
        // all x_k = C/K: LHS = K * (1/K) = 1 = RHS
        let c = 6.0;
        let k = 3;
        let alpha = 0.5;
        let xs = vec![c / k as f64; k];
        assert!(lemma_ep_check(&xs, c, alpha).unwrap());
        // sum below C: RHS = 0, trivially true
        assert!(lemma_ep_check(&[0.0, 0.0, 0.0], c, alpha).unwrap());
    }

    #[test]
    fn lemma_ep_fuzz() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let k = rng.gen_range(1..=8usize);
            let c = rng.gen_range(0.1..20.0);
            let alpha = rng.gen_range(1e-6..1.0) * c / k as f64;
            let xs: Vec<f64> = (0..k).map(|_| rng.gen_range(-10.0..30.0)).collect();
            assert!(lemma_ep_check(&xs, c, alpha).unwrap());
        }
    }

    #[test]
    fn hoeffding_values() {
        assert_eq!(hoeffding_bound(0.0, 10, 7, 700).coarse, 1.0);
        assert_eq!(hoeffding_bound(0.0, 10, 7, 700).tight, 1.0);
        // U = sqrt(2N/K) makes the coarse exponent exactly -1
        let u = (2.0 * 700.0 / 7.0_f64).sqrt();
        assert!((hoeffding_bound(u, 100, 7, 700).coarse - (-1.0f64).exp()).abs() < 1e-12);
        // K=7, N=700, U=20: exp(-400*7/1400) = exp(-2)
        let t = hoeffding_bound(20.0, 100, 7, 700);
        assert!((t.coarse - (-2.0f64).exp()).abs() < 1e-12);
        assert!((t.tight - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn chain_bound_arithmetic() {
        // K=1, N=100, gamma=0.8, C=60: (100/576) exp(-11.52)
        let v = regret_chain_bound(60.0, 1, 100, 0.8).unwrap();
        let expect = 100.0 / 576.0 * (-11.52f64).exp();
        assert!((v - expect).abs() / expect < 1e-12);
        assert!((v - 1.72e-6).abs() < 0.02e-6);
        // boundary gammas blow up
        let near0 = regret_chain_bound(60.0, 1, 100, 1e-6).unwrap();
        let near1 = regret_chain_bound(60.0, 1, 100, 1.0 - 1e-9).unwrap();
        assert!(near0 > v && near1 > v);
        assert!(regret_chain_bound(60.0, 1, 100, 1.0).is_err());
    }

    #[test]
    fn chain_bound_dominates_survival_integral() {
        // the closed form majorizes the exact Gaussian-tail expression
        // K * int_0^inf exp(-(gC/K + (1-g)Cu)^2 K/(2N)) du
        for &(k, n, gamma, c) in &[
            (1usize, 100usize, 0.8, 60.0),
            (7, 1000, 0.8, 253.92),
            (3, 500, 0.6, 100.0),
        ] {
            let kf = k as f64;
            let nf = n as f64;
            let integrand =
                |u: f64| (-(gamma * c / kf + (1.0 - gamma) * c * u).powi(2) * kf / (2.0 * nf)).exp();
            // integrate far enough that the tail is negligible
            let direct = kf * adaptive_simpson(integrand, 0.0, 50.0, 1e-10);
            let exact = (kf * nf).sqrt() / ((1.0 - gamma) * c)
                * (2.0 * std::f64::consts::PI).sqrt()
                * gaussian_survival(gamma * c / (kf * nf).sqrt());
            assert!((direct - exact).abs() < 1e-8 * exact.max(1e-12));
            let closed = regret_chain_bound(c, k, n, gamma).unwrap();
            assert!(closed >= exact);
        }
    }

    #[test]
    fn threshold_calibration_makes_chain_small() {
        // with C = 2 sqrt(KN ln(1/eps)) and gamma = 0.8 the chain bound is <= eps
        for &eps in &[0.01, 0.05, 0.1, 0.2, 0.29] {
            for &(k, n) in &[(1usize, 100usize), (7, 1000), (10, 10_000), (100, 10_000)] {
                let c = regret_threshold(k, n, eps).unwrap();
                let bound = regret_chain_bound(c, k, n, 0.8).unwrap();
                assert!(bound <= eps, "eps={eps} K={k} N={n}: bound={bound}");
            }
        }
    }

    #[test]
    fn threshold_values() {
        let t = regret_threshold(7, 1000, 0.1).unwrap();
        assert!((t - 253.92).abs() < 0.01);
        assert!(regret_threshold(7, 1000, 0.3).is_err());
        assert!(regret_threshold(7, 1000, 0.0).is_err());
        assert!((lower_bound_companion(10, 1000) - 100.0).abs() < 1e-12);
        let nr = no_restriction_bound(0.5, 7, 1000).unwrap();
        let expect = 5.0 * 7.0 / (0.25 * 1000.0) * (-0.25 * 1000.0 / 28.0f64).exp();
        assert!((nr - expect).abs() < 1e-15);
    }

    #[test]
    fn representation_grid_values() {
        // f == 0: sum = (ceil(C/eps)+1) * eps^2
        let v = representation_bound(|_| 0.0, 1.0, 0.01).unwrap();
        assert!((v - 101.0 * 0.0001).abs() < 1e-12);
        // f == 1: tends to C
        let v = representation_bound(|_| 1.0, 2.0, 1e-4).unwrap();
        assert!((v - 2.0).abs() < 1e-2);
        // f(u) = 1 - u/C at C=1, eps=0.01: about 0.515
        let v = representation_bound(|u| (1.0 - u).max(0.0), 1.0, 0.01).unwrap();
        assert!((v - 0.5151).abs() < 1e-10);
        assert!(v >= 0.5);
    }

    #[test]
    fn representation_over_approximates_and_converges() {
        let f = |u: f64| (-u).exp().min(1.0);
        let exact = 1.0 - (-3.0f64).exp();
        let mut prev_err = f64::INFINITY;
        for &eps in &[0.1, 0.05, 0.025, 0.0125] {
            let v = representation_bound(f, 3.0, eps).unwrap();
            let trapezoid = {
                let n = 3000;
                let h = 3.0 / n as f64;
                let mut s = 0.5 * (f(0.0) + f(3.0));
                for i in 1..n {
                    s += f(i as f64 * h);
                }
                s * h
            };
            assert!(v >= trapezoid);
            let err = v - exact;
            assert!(err > 0.0);
            assert!(err < prev_err);
            prev_err = err;
        }
        // O(eps) convergence: error comfortably within a constant times eps
        assert!(prev_err < 8.0 * 0.0125);
    }

    #[test]
    fn representation_rejects_increasing() {
        assert!(representation_bound(|u| (u / 4.0).min(1.0), 1.0, 0.1).is_err());
    }

    #[test]
    fn risk_aggregation_midpoint_below_feller() {
        // K=4, N=400, C=160, a = K/2N, t = C/2K: value below 0.25 exp(-2)
        let a = 4.0 / 800.0;
        let v = risk_aggregation_e(a, 160.0, 4, 20.0).unwrap();
        let feller = feller_bound(160.0, 4, 400);
        assert!((feller - 0.25 * (-2.0f64).exp()).abs() < 1e-12);
        assert!(v <= feller);
        assert!(risk_aggregation_e(a, 160.0, 4, 40.0).is_err());
    }

    #[test]
    fn risk_aggregation_collapses_for_k1() {
        // K=1, t -> 0: E -> int_0^C exp(-a x^2) dx / C
        let a = 0.7;
        let c = 2.0;
        let v = risk_aggregation_e(a, c, 1, 1e-12).unwrap();
        let direct = adaptive_simpson(|x| (-a * x * x).exp(), 0.0, c, 1e-10) / c;
        assert!((v - direct).abs() < 1e-8);
    }

    #[test]
    fn risk_aggregation_inf_no_worse_than_midpoint() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let k = rng.gen_range(1..=8usize);
            let n = rng.gen_range(10..=2000usize);
            let c = rng.gen_range(1.0..200.0);
            let a = k as f64 / (2.0 * n as f64);
            let mid = risk_aggregation_e(a, c, k, c / (2.0 * k as f64)).unwrap();
            let (_, inf) = risk_aggregation_inf(a, c, k).unwrap();
            assert!(inf <= mid + 1e-12);
        }
    }

    #[test]
    fn lln_threshold_value() {
        let t = lln_threshold(4, 400, 0.1).unwrap();
        assert!((t - 242.7886).abs() < 1e-3);
        assert!(lln_threshold(4, 400, 0.7).is_err());
    }

    #[test]
    fn lower_bound_eval_cases() {
        // eps = e^{-1}, K=1, N=4: threshold sqrt(4) = 2, floor e^{-4}/15
        let e = lower_bound_eval(1, 4, (-1.0f64).exp()).unwrap();
        assert!((e.threshold - 2.0).abs() < 1e-9);
        assert!((e.floor - (-4.0f64).exp() / 15.0).abs() < 1e-15);
        assert!(!e.condition_ok); // 2 > 4/4
        assert!(e.floor_improved > e.floor);
        // hypothesis violations
        assert!(lower_bound_eval(1, 2, (-1.0f64).exp()).is_err()); // sqrt(2) not integer
        assert!(lower_bound_eval(1, 4, 0.1).is_err()); // sqrt(ln 10) not integer
        // a case where the side condition holds
        let e = lower_bound_eval(1, 16, (-1.0f64).exp()).unwrap();
        assert!(e.condition_ok); // sqrt(16) = 4 <= 4
    }

    #[test]
    fn gaussian_survival_reference_values() {
        // classical table values
        assert!((gaussian_survival(0.0) - 0.5).abs() < 1e-15);
        assert!((gaussian_survival(1.0) - 0.158_655_253_931_457_07).abs() < 1e-14);
        assert!((gaussian_survival(2.0) - 0.022_750_131_948_179_21).abs() < 1e-14);
        assert!((gaussian_survival(-1.0) - 0.841_344_746_068_542_9).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn lemma_ep_property(
            k in 1usize..8,
            c in 0.1f64..10.0,
            frac in 0.01f64..0.99,
            xs in proptest::collection::vec(-5.0f64..15.0, 8),
        ) {
            let alpha = frac * c / k as f64;
            prop_assert!(lemma_ep_check(&xs[..k], c, alpha).unwrap());
        }

        #[test]
        fn feller_dominates_quadrature(
            k in 1usize..8,
            n in 10usize..2000,
            c in 1.0f64..300.0,
        ) {
            let a = k as f64 / (2.0 * n as f64);
            let mid = risk_aggregation_e(a, c, k, c / (2.0 * k as f64)).unwrap();
            prop_assert!(mid <= feller_bound(c, k, n) * (1.0 + 1e-8));
        }
    }
}
