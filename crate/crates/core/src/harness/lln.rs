//! Law-of-large-numbers experiments for K-step-lookback centered sums:
//! `sum_{n=K}^N (Y_n - E[Y_n | F_{n-K}])` against the `4 sqrt(KN ln(1/eps))`
//! threshold, plus the block construction showing `sqrt(KN)` is the right
//! scale.

use super::{HarnessError, McSummary};
use crate::bounds::{lln_threshold, lower_bound_companion};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LlnKind {
    /// Iid fair signs: the conditional expectations vanish.
    IidSigns,
    /// Two-state Markov chain on {-1, +1} with flip probability `flip`;
    /// `E[Y_n | F_{n-K}] = Y_{n-K} (1 - 2 flip)^K` is genuinely adapted.
    Markov,
    /// Constant-in-block signs: the adversarial construction
    /// whose centered sum reaches `sqrt(KN)` with constant probability.
    Blocks,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LlnConfig {
    pub n_steps: usize,
    pub k: usize,
    /// Significance for the threshold; unused by `Blocks`.
    pub eps: f64,
    pub kind: LlnKind,
    #[serde(default)]
    pub markov_flip: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlnReport {
    pub kind: LlnKind,
    pub threshold: f64,
    pub exceed: McSummary,
}

fn centered_sum(cfg: &LlnConfig, rng: &mut ChaCha8Rng) -> f64 {
    let n = cfg.n_steps;
    let k = cfg.k;
    match cfg.kind {
        LlnKind::IidSigns => {
            let mut total = 0.0;
            for _ in k..=n {
                total += if rng.gen::<bool>() { 1.0 } else { -1.0 };
            }
            total
        }
        LlnKind::Markov => {
            let flip = cfg.markov_flip.unwrap_or(0.3);
            let decay = (1.0 - 2.0 * flip).powi(k as i32);
            let mut y = vec![0.0f64; n + 1];
            y[1] = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            for i in 2..=n {
                let stay: f64 = rng.gen();
                y[i] = if stay < flip { -y[i - 1] } else { y[i - 1] };
            }
            let mut total = 0.0;
            for i in k..=n {
                let cond = if i > k { y[i - k] * decay } else { 0.0 };
                total += y[i] - cond;
            }
            total
        }
        LlnKind::Blocks => {
            // Y_n = X_{ceil(n/K)} with iid fair signs per block; the
            // K-step-back conditional expectation is zero throughout
            let blocks = n.div_ceil(k);
            let xs: Vec<f64> = (0..blocks)
                .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let mut total = 0.0;
            for i in k..=n {
                total += xs[(i - 1) / k];
            }
            total
        }
    }
}

/// Monte Carlo frequency of the centered lookback sum crossing its
/// threshold: `4 sqrt(KN ln(1/eps))` (two-sided) for the adapted kinds,
/// `sqrt(KN)` (one-sided) for the block construction.
pub fn run_lln(cfg: &LlnConfig, seed: u64, reps: usize) -> Result<LlnReport, HarnessError> {
    if cfg.k == 0 || cfg.k > cfg.n_steps {
        return Err(HarnessError::BadConfig(format!(
            "need 1 <= K <= N, got K={} N={}",
            cfg.k, cfg.n_steps
        )));
    }
    let threshold = match cfg.kind {
        LlnKind::Blocks => lower_bound_companion(cfg.k, cfg.n_steps),
        _ => lln_threshold(cfg.k, cfg.n_steps, cfg.eps)?,
    };
    let hits: Vec<bool> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep);
            let s = centered_sum(cfg, &mut rng);
            match cfg.kind {
                LlnKind::Blocks => s >= threshold,
                _ => s.abs() >= threshold,
            }
        })
        .collect();
    Ok(LlnReport {
        kind: cfg.kind,
        threshold,
        exceed: McSummary::new(hits.iter().filter(|&&h| h).count(), reps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_case_never_comes_close() {
        let cfg = LlnConfig {
            n_steps: 400,
            k: 1,
            eps: 0.1,
            kind: LlnKind::IidSigns,
            markov_flip: None,
        };
        let r = run_lln(&cfg, 2, 500).unwrap();
        assert_eq!(r.exceed.hits, 0);
    }

    #[test]
    fn markov_case_stays_below_threshold() {
        let cfg = LlnConfig {
            n_steps: 500,
            k: 4,
            eps: 0.2,
            kind: LlnKind::Markov,
            markov_flip: Some(0.3),
        };
        let r = run_lln(&cfg, 9, 500).unwrap();
        assert!(r.exceed.wilson.upper <= 0.2);
    }

    #[test]
    fn blocks_exceed_with_constant_probability() {
        let cfg = LlnConfig {
            n_steps: 256,
            k: 8,
            eps: 0.1,
            kind: LlnKind::Blocks,
            markov_flip: None,
        };
        let r = run_lln(&cfg, 4, 800).unwrap();
        // about P(Z >= 1): well above 5%
        assert!(r.exceed.frequency > 0.05, "freq {}", r.exceed.frequency);
    }

    #[test]
    fn eps_domain_enforced() {
        let cfg = LlnConfig {
            n_steps: 100,
            k: 2,
            eps: 0.7,
            kind: LlnKind::IidSigns,
            markov_flip: None,
        };
        assert!(run_lln(&cfg, 1, 10).is_err());
    }
}
