//! Exact enumeration of conditional ledger-increment expectations.
//!
//! For a fixed base measure, honest conditioning forecaster, and
//! deterministic (predictable) strategies, every play is enumerated, the
//! ledger of each play is computed by the real protocol drivers, and the
//! conditional expectation of every increment given the visible past is
//! accumulated exactly. A martingale protocol must show zero everywhere;
//! capital processes realized with cash retention are martingales too, so
//! nonpositivity is reported as the signed maximum.

use super::{HarnessError, ENUMERATION_LIMIT};
use crate::engine::script::{ScriptedDmReality, ScriptedReality};
use crate::engine::{
    run_decision, run_joint_test, DecisionMaker, PlayStatus, Sceptic,
};
use crate::measures::{LossFn, ObsSpace, ProbMeasure, SeqIndex};
use crate::strategies::ConditioningForecaster;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumerateReport {
    pub paths: usize,
    pub checkpoints: usize,
    /// max |E[dK | past]| over all checkpoints
    pub max_abs_deviation: f64,
    /// max E[dK | past]: nonpositive (within tolerance) for supermartingales
    pub max_signed_deviation: f64,
}

/// Conditional-expectation accumulation shared by the protocol variants.
///
/// `ledgers[path]` holds the K-checkpoint values of the play along `path`;
/// increment `n` (1-based, `1..=n_steps`) must be a function of the first
/// `visible(n)` outcomes, and its conditional expectation given one fewer
/// outcome is accumulated under the base measure.
fn conditional_deviations(
    space: &ObsSpace,
    base: &ProbMeasure,
    n_steps: usize,
    ledgers: &[Vec<f64>],
) -> EnumerateReport {
    let mut increments: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n_steps];
    for (code, ledger) in ledgers.iter().enumerate() {
        let path = SeqIndex {
            len: n_steps,
            code,
        };
        for n in 1..=n_steps {
            // increment K_n - K_{n-1} is settled once y_1..y_n are known
            let prefix = path.prefix(space, n);
            increments[n - 1].insert(prefix.code, ledger[n] - ledger[n - 1]);
        }
    }
    let mut max_abs: f64 = 0.0;
    let mut max_signed = f64::NEG_INFINITY;
    let mut checkpoints = 0usize;
    for n in 1..=n_steps {
        for past_code in 0..space.seq_count(n - 1) {
            let past = SeqIndex {
                len: n - 1,
                code: past_code,
            };
            let mut expect = 0.0;
            for y in 0..space.size() {
                let next = past.concat(space, SeqIndex { len: 1, code: y });
                let cond = base
                    .conditional(past, SeqIndex { len: 1, code: y })
                    .expect("within horizon");
                expect += cond * increments[n - 1][&next.code];
            }
            checkpoints += 1;
            max_abs = max_abs.max(expect.abs());
            max_signed = max_signed.max(expect);
        }
    }
    EnumerateReport {
        paths: ledgers.len(),
        checkpoints,
        max_abs_deviation: max_abs,
        max_signed_deviation: max_signed,
    }
}

/// Enumerate the full-horizon ticket protocol under honest conditioning
/// from `base` with a fresh sceptic per play.
pub fn enumerate_joint_martingale(
    base: &ProbMeasure,
    mut sceptic_factory: impl FnMut() -> Box<dyn Sceptic>,
) -> Result<EnumerateReport, HarnessError> {
    let space = base.space().clone();
    let n_steps = base.horizon();
    let paths = space.seq_count(n_steps);
    if paths > ENUMERATION_LIMIT {
        return Err(HarnessError::StateSpaceTooLarge(paths));
    }
    let mut ledgers = Vec::with_capacity(paths);
    for code in 0..paths {
        let outcomes = SeqIndex {
            len: n_steps,
            code,
        }
        .to_outcomes(&space);
        let t = run_joint_test(
            space.clone(),
            n_steps,
            &mut ConditioningForecaster::new(base.clone()),
            sceptic_factory().as_mut(),
            &mut ScriptedReality::new(outcomes),
        )?;
        if t.status != PlayStatus::Completed {
            return Err(HarnessError::UnexpectedHalt(code as u64));
        }
        ledgers.push(t.ledger().k_values());
    }
    Ok(conditional_deviations(&space, base, n_steps, &ledgers))
}

/// Enumerate the decision protocol: honest conditioning forecaster over
/// `base`, a fixed per-step loss schedule, and fresh deterministic decision
/// maker and sceptic per play.
#[allow(clippy::too_many_arguments)]
pub fn enumerate_decision_martingale(
    base: &ProbMeasure,
    k: usize,
    num_decisions: usize,
    losses: &[LossFn],
    mut dm_factory: impl FnMut() -> Box<dyn DecisionMaker>,
    mut sceptic_factory: impl FnMut() -> Box<dyn Sceptic>,
) -> Result<EnumerateReport, HarnessError> {
    let space = base.space().clone();
    let n_steps = base.horizon();
    let paths = space.seq_count(n_steps);
    if paths > ENUMERATION_LIMIT {
        return Err(HarnessError::StateSpaceTooLarge(paths));
    }
    if losses.len() != n_steps {
        return Err(HarnessError::BadConfig(
            "need one loss table per step".into(),
        ));
    }
    let mut ledgers = Vec::with_capacity(paths);
    for code in 0..paths {
        let outcomes = SeqIndex {
            len: n_steps,
            code,
        }
        .to_outcomes(&space);
        let t = run_decision(
            space.clone(),
            n_steps,
            k,
            num_decisions,
            &mut ScriptedDmReality::new(outcomes, losses.to_vec()),
            &mut ConditioningForecaster::new(base.clone()),
            dm_factory().as_mut(),
            sceptic_factory().as_mut(),
        )?;
        if t.status != PlayStatus::Completed {
            return Err(HarnessError::UnexpectedHalt(code as u64));
        }
        ledgers.push(t.ledger().k_values());
    }
    Ok(conditional_deviations(&space, base, n_steps, &ledgers))
}
