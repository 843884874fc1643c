//! Decision strategies and the expected-loss minimizer.

use crate::engine::{DecisionMaker, PlayState};
use crate::measures::{LossFn, ProbMeasure};

/// First minimizer of `sum_x loss(d, x) P(x)` in the decision order.
///
/// Ties break to the smallest decision index; the comparison is a strict
/// `<`, so exactly equal expected losses keep the earlier decision.
pub fn bayes_decision(loss: &LossFn, p: &ProbMeasure) -> usize {
    debug_assert_eq!(loss.horizon(), p.horizon());
    let mut best = 0usize;
    let mut best_value = f64::INFINITY;
    for d in 0..loss.num_decisions() {
        let value: f64 = loss
            .row(d)
            .iter()
            .zip(p.weights())
            .map(|(&l, &w)| l * w)
            .sum();
        if value < best_value {
            best_value = value;
            best = d;
        }
    }
    best
}

/// Plays the expected-loss minimizer against the current forecast.
#[derive(Debug, Clone, Default)]
pub struct BayesDecisionMaker;

impl DecisionMaker for BayesDecisionMaker {
    fn decide(&mut self, play: &PlayState) -> usize {
        let loss = play.losses.last().expect("loss announced before decision");
        let p = play.forecasts.last().expect("forecast precedes decision");
        bayes_decision(loss, p)
    }
}

/// Always plays the same decision.
#[derive(Debug, Clone)]
pub struct ConstantDecisionMaker(pub usize);

impl DecisionMaker for ConstantDecisionMaker {
    fn decide(&mut self, _play: &PlayState) -> usize {
        self.0
    }
}

/// Plays `(bayes + 1) mod |D|`: in a binary decision space, the exact
/// opposite of the expected-loss minimizer.
#[derive(Debug, Clone, Default)]
pub struct ComplementDecisionMaker;

impl DecisionMaker for ComplementDecisionMaker {
    fn decide(&mut self, play: &PlayState) -> usize {
        let loss = play.losses.last().expect("loss announced before decision");
        let p = play.forecasts.last().expect("forecast precedes decision");
        (bayes_decision(loss, p) + 1) % loss.num_decisions()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{LossFn, ObsSpace, ProbMeasure};

    #[test]
    fn bayes_picks_smaller_expected_loss() {
        let space = ObsSpace::binary();
        // D = {0,1}, K = 1, mismatch loss, P = (0.3, 0.7): expected losses
        // are 0.7 for d=0 and 0.3 for d=1
        let loss = LossFn::from_fn(&space, 1, 2, |d, x| if d == x[0] { 0.0 } else { 1.0 }).unwrap();
        let p = ProbMeasure::new(space, 1, vec![0.3, 0.7]).unwrap();
        assert_eq!(bayes_decision(&loss, &p), 1);
    }

    #[test]
    fn bayes_tie_breaks_to_first() {
        let space = ObsSpace::binary();
        // loss independent of d: every decision ties, first one wins
        let loss = LossFn::from_fn(&space, 2, 3, |_, x| x[0] as f64).unwrap();
        let p = ProbMeasure::uniform(space, 2);
        assert_eq!(bayes_decision(&loss, &p), 0);
    }

    #[test]
    fn bayes_prefers_zero_when_one_is_less_likely() {
        // mismatch loss against the final observation with P(y=1) = 0.4
        let space = ObsSpace::binary();
        let loss = LossFn::from_fn(&space, 1, 2, |d, x| if d == x[0] { 0.0 } else { 1.0 }).unwrap();
        let p = ProbMeasure::new(space, 1, vec![0.6, 0.4]).unwrap();
        assert_eq!(bayes_decision(&loss, &p), 0);
    }

    #[test]
    fn bayes_invariances() {
        let space = ObsSpace::binary();
        let p = ProbMeasure::new(space.clone(), 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let base = LossFn::from_fn(&space, 2, 2, |d, x| {
            if d == x[1] {
                0.1
            } else {
                0.9
            }
        })
        .unwrap();
        let pick = bayes_decision(&base, &p);
        // adding a d-independent function of x
        let shifted = LossFn::from_fn(&space, 2, 2, |d, x| {
            let add = 0.05 * x[0] as f64;
            (if d == x[1] { 0.1 } else { 0.9 }) + add
        })
        .unwrap();
        assert_eq!(bayes_decision(&shifted, &p), pick);
        // positive scaling
        let scaled = LossFn::from_fn(&space, 2, 2, |d, x| {
            0.5 * (if d == x[1] { 0.1 } else { 0.9 })
        })
        .unwrap();
        assert_eq!(bayes_decision(&scaled, &p), pick);
    }
}
