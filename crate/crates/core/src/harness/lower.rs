//! Lower-bound experiments: the exact full-horizon counterexample and the
//! block-construction Monte Carlo estimate.

use super::{HarnessError, McSummary};
use crate::bounds::lower_bound_companion;
use crate::engine::script::ScriptedReality;
use crate::engine::{
    run_decision_mode, total_loss, DecisionMaker, LossMode, PlayState, PlayStatus,
};
use crate::strategies::bayes_decision;
use crate::measures::{ObsSpace, ProbMeasure, SeqIndex};
use crate::strategies::{
    AnchorDmReality, AnchorRule, ConditioningForecaster, ConstantDecisionMaker, IidForecaster,
    IidReality,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Decision maker that also records the expected-loss minimizer's choice at
/// every step, sparing a replay.
struct TrackBest<D> {
    inner: D,
    best: Vec<usize>,
}

impl<D: DecisionMaker> DecisionMaker for TrackBest<D> {
    fn decide(&mut self, play: &PlayState) -> usize {
        let loss = play.losses.last().expect("loss precedes decision");
        let p = play.forecasts.last().expect("forecast precedes decision");
        self.best.push(bayes_decision(loss, p));
        self.inner.decide(play)
    }
}

/// Exact distribution of the normalized loss gap in the full-horizon
/// counterexample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterExampleReport {
    pub n_steps: usize,
    /// `(value, probability)` pairs of `(Loss(A) - Loss(B)) / N`, sorted by
    /// value.
    pub distribution: Vec<(f64, f64)>,
}

/// Full-horizon decision protocol where every step scores against the final
/// observation, under a product measure with `P(y_N = 1) = p_last`. The
/// expected-loss minimizer picks 0 at every step while the complement picks
/// 1, so the normalized gap is +1 exactly when `y_N = 1` and -1 otherwise.
///
/// The distribution is computed by exhaustive enumeration of the plays; the
/// per-value probabilities come out exact because each group consists of
/// equiprobable paths counted in one multiplication.
pub fn run_counter_example_exact(
    n_steps: usize,
    p_last: f64,
) -> Result<CounterExampleReport, HarnessError> {
    let space = ObsSpace::binary();
    let paths = space.seq_count(n_steps);
    if paths > super::ENUMERATION_LIMIT {
        return Err(HarnessError::StateSpaceTooLarge(paths));
    }
    // uniform on the first N-1 coordinates, (1 - p, p) on the last
    let mut weights = Vec::with_capacity(paths);
    let scale = 1.0 / space.seq_count(n_steps - 1) as f64;
    for code in 0..paths {
        let last = code % 2;
        weights.push(if last == 1 {
            p_last * scale
        } else {
            (1.0 - p_last) * scale
        });
    }
    let base = ProbMeasure::new(space.clone(), n_steps, weights)?;

    // count equiprobable paths per gap value; prob = count * path weight
    let mut groups: Vec<(u64, u64, f64)> = Vec::new(); // (value bits, count, path prob)
    for code in 0..paths {
        let idx = SeqIndex {
            len: n_steps,
            code,
        };
        let outcomes = idx.to_outcomes(&space);
        let prob = if outcomes[n_steps - 1] == 1 {
            p_last * scale
        } else {
            (1.0 - p_last) * scale
        };
        let mut reality = AnchorDmReality::new(
            ScriptedReality::new(outcomes),
            AnchorRule::Final,
            n_steps,
            n_steps,
        )?;
        let mut tracker = TrackBest {
            inner: ConstantDecisionMaker(1),
            best: Vec::with_capacity(n_steps),
        };
        let t = run_decision_mode(
            space.clone(),
            n_steps,
            n_steps,
            2,
            LossMode::AllSteps,
            &mut reality,
            &mut ConditioningForecaster::new(base.clone()),
            &mut tracker,
            &mut crate::strategies::ZeroSceptic,
        )?;
        let gap =
            (total_loss(&t, &tracker.best)? - total_loss(&t, &t.state.decisions)?) / n_steps as f64;
        match groups.iter_mut().find(|(bits, _, p)| {
            *bits == gap.to_bits() && p.to_bits() == prob.to_bits()
        }) {
            Some(g) => g.1 += 1,
            None => groups.push((gap.to_bits(), 1, prob)),
        }
    }
    let mut distribution: Vec<(f64, f64)> = groups
        .into_iter()
        .map(|(bits, count, prob)| (f64::from_bits(bits), count as f64 * prob))
        .collect();
    distribution.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // merge groups that share a value (different path probabilities)
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (v, p) in distribution {
        match merged.last_mut() {
            Some((lv, lp)) if *lv == v => *lp += p,
            _ => merged.push((v, p)),
        }
    }
    Ok(CounterExampleReport {
        n_steps,
        distribution: merged,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LowerBoundConfig {
    pub n_steps: usize,
    pub k: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundReport {
    /// `sqrt(K N)`
    pub threshold: f64,
    pub exceed: McSummary,
}

/// Block construction: fair-coin Reality scores every step in a block of
/// `K` against the block's final observation; the honest forecaster ties
/// every decision, the expected-loss minimizer therefore plays 0, and the
/// actual decision maker plays 1. Reports how often the minimizer falls
/// behind by at least `sqrt(K N)`.
pub fn run_lower_bound_blocks(
    cfg: &LowerBoundConfig,
    seed: u64,
    reps: usize,
) -> Result<LowerBoundReport, HarnessError> {
    let threshold = lower_bound_companion(cfg.k, cfg.n_steps);
    let hits: Result<Vec<bool>, HarnessError> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let space = ObsSpace::binary();
            let mut reality = AnchorDmReality::new(
                IidReality::with_stream(vec![0.5, 0.5], seed, rep),
                AnchorRule::Block,
                cfg.n_steps,
                cfg.k,
            )?;
            let mut tracker = TrackBest {
                inner: ConstantDecisionMaker(1),
                best: Vec::with_capacity(cfg.n_steps),
            };
            let t = run_decision_mode(
                space.clone(),
                cfg.n_steps,
                cfg.k,
                2,
                LossMode::Truncated,
                &mut reality,
                &mut IidForecaster::new(space, vec![0.5, 0.5]),
                &mut tracker,
                &mut crate::strategies::ZeroSceptic,
            )?;
            if t.status != PlayStatus::Completed {
                return Err(HarnessError::UnexpectedHalt(rep));
            }
            let gap = total_loss(&t, &tracker.best)? - total_loss(&t, &t.state.decisions)?;
            Ok(gap >= threshold)
        })
        .collect();
    let hits = hits?;
    Ok(LowerBoundReport {
        threshold,
        exceed: McSummary::new(hits.iter().filter(|&&h| h).count(), reps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_example_two_point_distribution_is_exact() {
        let r = run_counter_example_exact(3, 0.4).unwrap();
        assert_eq!(r.distribution.len(), 2);
        assert_eq!(r.distribution[0], (-1.0, 0.6));
        assert_eq!(r.distribution[1], (1.0, 0.4));
    }

    #[test]
    fn counter_example_other_bias() {
        let r = run_counter_example_exact(4, 0.25).unwrap();
        assert_eq!(r.distribution, vec![(-1.0, 0.75), (1.0, 0.25)]);
    }

    #[test]
    fn block_construction_exceeds_threshold_often() {
        // small instance: N=50, K=5 -> threshold sqrt(250) ~ 15.8 with the
        // gap a sum of ten +-5 block values; exceedance is a clt-scale event
        let cfg = LowerBoundConfig { n_steps: 50, k: 5 };
        let r = run_lower_bound_blocks(&cfg, 3, 400).unwrap();
        assert!(
            r.exceed.frequency > 0.02,
            "frequency {} too small",
            r.exceed.frequency
        );
        // boundary: K = N/5 accepted, K > N/5 rejected
        assert!(run_lower_bound_blocks(&LowerBoundConfig { n_steps: 50, k: 10 }, 3, 5).is_ok());
        assert!(run_lower_bound_blocks(&LowerBoundConfig { n_steps: 50, k: 11 }, 3, 5).is_err());
    }
}
