//! Experiment driver: exact enumeration oracles, Monte Carlo reproduction
//! of the regret and lower-bound results, lookback law-of-large-numbers
//! experiments, and report emission.
//!
//! Determinism contract: every experiment takes a 64-bit seed and gives
//! replication `r` its own counter-based RNG stream (`ChaCha8` with stream
//! id `r`), so reports are byte-identical across runs and across thread
//! counts; replication results are reduced in index order.

mod enumerate;
mod lln;
mod lower;
mod theorem;

pub use enumerate::{
    enumerate_decision_martingale, enumerate_joint_martingale, EnumerateReport,
};
pub use lln::{run_lln, LlnConfig, LlnKind, LlnReport};
pub use lower::{
    run_counter_example_exact, run_lower_bound_blocks, CounterExampleReport, LowerBoundConfig,
    LowerBoundReport,
};
pub use theorem::{
    run_theorem_optimal, verify_certificates, DmKind, ForecasterKind, ScepticKind,
    TheoremOptimalConfig, TheoremOptimalReport, ViolatingRun,
};

use crate::engine::EngineError;
use crate::measures::MeasureError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exhaustive enumeration refuses state spaces beyond this many paths.
pub const ENUMERATION_LIMIT: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("state space of {0} paths exceeds the enumeration limit of {ENUMERATION_LIMIT}")]
    StateSpaceTooLarge(usize),
    #[error("bad experiment configuration: {0}")]
    BadConfig(String),
    #[error("play halted unexpectedly at replication {0}")]
    UnexpectedHalt(u64),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Strategy(#[from] crate::strategies::StrategyError),
    #[error(transparent)]
    Bound(#[from] crate::bounds::BoundError),
}

/// 95% Wilson score interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wilson {
    pub lower: f64,
    pub upper: f64,
}

pub fn wilson_interval(successes: usize, n: usize) -> Wilson {
    let z = 1.959_963_984_540_054_f64;
    if n == 0 {
        return Wilson {
            lower: 0.0,
            upper: 1.0,
        };
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    Wilson {
        lower: (center - half).max(0.0),
        upper: (center + half).min(1.0),
    }
}

/// Count summary of one Monte Carlo event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub reps: usize,
    pub hits: usize,
    pub frequency: f64,
    pub wilson: Wilson,
}

impl McSummary {
    pub fn new(hits: usize, reps: usize) -> Self {
        Self {
            reps,
            hits,
            frequency: if reps == 0 {
                0.0
            } else {
                hits as f64 / reps as f64
            },
            wilson: wilson_interval(hits, reps),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_the_point_estimate() {
        let w = wilson_interval(10, 100);
        assert!(w.lower < 0.1 && 0.1 < w.upper);
        assert!(w.lower > 0.04 && w.upper < 0.19);
    }

    #[test]
    fn wilson_extremes_stay_in_unit_interval() {
        let w = wilson_interval(0, 50);
        assert!(w.lower.abs() < 1e-12);
        assert!(w.upper > 0.0 && w.upper < 0.15);
        let w = wilson_interval(50, 50);
        assert!((w.upper - 1.0).abs() < 1e-12);
        assert!(w.lower > 0.9);
    }

    #[test]
    fn wilson_known_value() {
        // textbook case: 8/10 -> approximately (0.49, 0.94)
        let w = wilson_interval(8, 10);
        assert!((w.lower - 0.49).abs() < 0.01);
        assert!((w.upper - 0.943).abs() < 0.01);
    }
}
