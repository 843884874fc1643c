//! Forecaster strategies.

use crate::engine::{Forecaster, PlayState};
use crate::measures::{ObsSpace, ProbMeasure, SeqIndex};
use rand::Rng;
use rand::SeedableRng;

/// Honest Bayesian updating from a fixed base measure: at each step the
/// emitted forecast is the base conditioned on every observation so far,
/// marginalized to the requested horizon.
#[derive(Debug, Clone)]
pub struct ConditioningForecaster {
    base: ProbMeasure,
}

impl ConditioningForecaster {
    pub fn new(base: ProbMeasure) -> Self {
        Self { base }
    }
}

impl Forecaster for ConditioningForecaster {
    fn forecast(&mut self, play: &PlayState, horizon: usize) -> ProbMeasure {
        let mut cur = self.base.clone();
        for &y in &play.outcomes {
            cur = cur.condition_on(y).expect("base horizon covers the play");
        }
        cur.marginal_measure(horizon).expect("horizon within range")
    }
}

/// Honest forecaster for an iid truth: the window forecast is always the
/// product of the single-step distribution. Conditioning is trivial because
/// past outcomes carry no information. Window measures are memoized per
/// horizon since the experiments request the same few shapes millions of
/// times.
#[derive(Debug, Clone)]
pub struct IidForecaster {
    space: ObsSpace,
    step: Vec<f64>,
    cache: std::collections::HashMap<usize, ProbMeasure>,
}

impl IidForecaster {
    pub fn new(space: ObsSpace, step: Vec<f64>) -> Self {
        Self {
            space,
            step,
            cache: std::collections::HashMap::new(),
        }
    }
}

impl Forecaster for IidForecaster {
    fn forecast(&mut self, _play: &PlayState, horizon: usize) -> ProbMeasure {
        self.cache
            .entry(horizon)
            .or_insert_with(|| {
                ProbMeasure::iid_product(self.space.clone(), &self.step, horizon)
                    .expect("step distribution validated at construction")
            })
            .clone()
    }
}

/// Forecaster that drifts away from Bayesian conditioning: each emitted
/// measure is a convex mix of the conditioned previous forecast and a fixed
/// product measure, with per-step mixing weight `weight`.
#[derive(Debug, Clone)]
pub struct DriftingForecaster {
    space: ObsSpace,
    base: ProbMeasure,
    pull_step: Vec<f64>,
    weight: f64,
    last: Option<ProbMeasure>,
    pull_cache: std::collections::HashMap<usize, ProbMeasure>,
}

impl DriftingForecaster {
    pub fn new(base: ProbMeasure, pull_step: Vec<f64>, weight: f64) -> Self {
        Self {
            space: base.space().clone(),
            base,
            pull_step,
            weight,
            last: None,
            pull_cache: std::collections::HashMap::new(),
        }
    }

    fn pull_product(&mut self, horizon: usize) -> ProbMeasure {
        let space = &self.space;
        let step = &self.pull_step;
        self.pull_cache
            .entry(horizon)
            .or_insert_with(|| {
                ProbMeasure::iid_product(space.clone(), step, horizon).expect("valid step")
            })
            .clone()
    }
}

impl Forecaster for DriftingForecaster {
    fn forecast(&mut self, play: &PlayState, horizon: usize) -> ProbMeasure {
        let honest = match (&self.last, play.outcomes.last()) {
            (Some(prev), Some(&y)) if prev.horizon() > 1 => prev
                .condition_on(y)
                .expect("positive measure")
                .marginal_measure(horizon.min(prev.horizon() - 1))
                .expect("within range"),
            _ => self
                .base
                .marginal_measure(horizon.min(self.base.horizon()))
                .expect("within range"),
        };
        // pad the honest part back out with the pull product when the
        // previous window was shorter than the requested one
        let honest = if honest.horizon() < horizon {
            let tail = self.pull_product(horizon - honest.horizon());
            let block = tail.weights().len();
            let mut w = Vec::with_capacity(honest.weights().len() * block);
            for &a in honest.weights() {
                for &b in tail.weights() {
                    w.push(a * b);
                }
            }
            ProbMeasure::new(self.space.clone(), horizon, w).expect("product of positives")
        } else {
            honest
        };
        let pull = self.pull_product(horizon);
        let out = honest.mix(&pull, self.weight).expect("same horizon");
        self.last = Some(out.clone());
        out
    }
}

/// Arbitrary (non-conditioning) forecaster: a fresh positive measure each
/// step, derived deterministically from the seed and the visible history.
#[derive(Debug, Clone)]
pub struct RandomForecaster {
    space: ObsSpace,
    seed: u64,
}

impl RandomForecaster {
    pub fn new(space: ObsSpace, seed: u64) -> Self {
        Self { space, seed }
    }
}

impl Forecaster for RandomForecaster {
    fn forecast(&mut self, play: &PlayState, horizon: usize) -> ProbMeasure {
        let prefix = SeqIndex::from_outcomes(&self.space, &play.outcomes).expect("valid outcomes");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
            self.seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add((prefix.code as u64) << 16)
                .wrapping_add(prefix.len as u64)
                .wrapping_add((play.step() as u64) << 40),
        );
        let n = self.space.seq_count(horizon);
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        ProbMeasure::new(self.space.clone(), horizon, weights).expect("positive weights")
    }
}
