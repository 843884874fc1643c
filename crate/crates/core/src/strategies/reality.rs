//! Reality strategies: outcome sources and loss schedules.

use super::StrategyError;
use crate::engine::{window_len, DmReality, PlayState, Reality};
use crate::measures::LossFn;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Iid sampler over outcome indices, reproducible from its seed.
#[derive(Debug, Clone)]
pub struct IidReality {
    probs: Vec<f64>,
    rng: ChaCha8Rng,
}

impl IidReality {
    pub fn new(probs: Vec<f64>, seed: u64) -> Self {
        Self {
            probs,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Same sampler on a dedicated stream, for parallel replications.
    pub fn with_stream(probs: Vec<f64>, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { probs, rng }
    }

    fn draw(&mut self) -> usize {
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

impl Reality for IidReality {
    fn outcome(&mut self, _play: &PlayState) -> usize {
        self.draw()
    }
}

/// Which future observation a loss table keys on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorRule {
    /// Step `n` scores against observation `ceil(n/K) * K`: every step in a
    /// block of `K` is scored against the block's final observation.
    Block,
    /// Every step scores against the final observation `y_N`.
    Final,
}

/// Decision-protocol Reality emitting mismatch losses
/// `loss(d, window) = 1 if d != anchored observation` over an outcome source.
///
/// With `AnchorRule::Block` this is the block construction behind the
/// lower-bound experiments; it requires `K <= N/5`. With `AnchorRule::Final`
/// it is the everything-hinges-on-the-last-step schedule of the
/// full-horizon counterexample.
pub struct AnchorDmReality<R: Reality> {
    outcomes: R,
    rule: AnchorRule,
    table_cache: std::collections::HashMap<(usize, usize), LossFn>,
}

impl<R: Reality> AnchorDmReality<R> {
    pub fn new(outcomes: R, rule: AnchorRule, n_steps: usize, k: usize) -> Result<Self, StrategyError> {
        if rule == AnchorRule::Block && 5 * k > n_steps {
            return Err(StrategyError::InvalidArgument(format!(
                "block anchor requires K <= N/5, got K={k}, N={n_steps}"
            )));
        }
        Ok(Self {
            outcomes,
            rule,
            table_cache: std::collections::HashMap::new(),
        })
    }

    /// Global index (1-based) of the anchored observation for step `n`.
    pub fn anchor(&self, n: usize, n_steps: usize, k: usize) -> usize {
        match self.rule {
            AnchorRule::Block => (n.div_ceil(k) * k).min(n_steps),
            AnchorRule::Final => n_steps,
        }
    }
}

impl<R: Reality> Reality for AnchorDmReality<R> {
    fn outcome(&mut self, play: &PlayState) -> usize {
        self.outcomes.outcome(play)
    }
}

impl<R: Reality> DmReality for AnchorDmReality<R> {
    fn announce_loss(&mut self, play: &PlayState, horizon: usize) -> LossFn {
        let space = &play.config.space;
        let n = play.step();
        let n_steps = play.config.n_steps;
        let k = play.config.k.unwrap_or(n_steps);
        debug_assert_eq!(horizon, window_len(k, n_steps, n));
        let anchor = self.anchor(n, n_steps, k);
        // position of the anchored observation inside the window y_n..y_{n+w-1}
        let pos = anchor - n;
        debug_assert!(pos < horizon);
        let d_count = play.config.num_decisions.unwrap_or(space.size());
        self.table_cache
            .entry((horizon, pos))
            .or_insert_with(|| {
                LossFn::from_fn(space, horizon, d_count, |d, x| {
                    if d == x[pos] {
                        0.0
                    } else {
                        1.0
                    }
                })
                .expect("indicator losses are in [0,1]")
            })
            .clone()
    }
}

/// Convenience alias for the final-observation schedule used by the
/// full-horizon counterexample.
pub type LastObsDmReality<R> = AnchorDmReality<R>;
