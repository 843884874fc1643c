//! Basic sceptic strategies: zero, buy-and-hold, and hashed random bets.

use crate::engine::{PlayState, Sceptic, TicketPortfolio};
use crate::measures::SeqIndex;
use rand::Rng;
use rand::SeedableRng;

/// Never bets; capital stays at 1 in every protocol.
#[derive(Debug, Clone, Default)]
pub struct ZeroSceptic;

impl Sceptic for ZeroSceptic {
    fn tickets(&mut self, play: &PlayState, len: usize) -> TicketPortfolio {
        TicketPortfolio::zero(&play.config.space, len)
    }
}

/// Buys `quantity` tickets on one target sequence at the first step and
/// keeps holding the remaining claim while the play follows the target;
/// drops to zero once the path diverges.
#[derive(Debug, Clone)]
pub struct TicketHoldSceptic {
    pub target: Vec<usize>,
    pub quantity: f64,
}

impl Sceptic for TicketHoldSceptic {
    fn tickets(&mut self, play: &PlayState, len: usize) -> TicketPortfolio {
        let space = &play.config.space;
        let seen = play.outcomes.len();
        let mut f = TicketPortfolio::zero(space, len);
        if seen + len == self.target.len() && play.outcomes[..] == self.target[..seen] {
            let tail = SeqIndex::from_outcomes(space, &self.target[seen..]).expect("valid target");
            f.values[tail.code] = self.quantity;
        }
        f
    }
}

/// Random but predictable bets: the ticket vector is a pure function of the
/// seed and the visible history (step, realized outcomes), so every play
/// that shares a prefix sees the same move. Values are uniform in
/// `[-magnitude, magnitude]`.
#[derive(Debug, Clone)]
pub struct RandomSceptic {
    pub seed: u64,
    pub magnitude: f64,
}

impl RandomSceptic {
    pub fn new(seed: u64, magnitude: f64) -> Self {
        Self { seed, magnitude }
    }
}

impl Sceptic for RandomSceptic {
    fn tickets(&mut self, play: &PlayState, len: usize) -> TicketPortfolio {
        let space = &play.config.space;
        let prefix = SeqIndex::from_outcomes(space, &play.outcomes).expect("valid outcomes");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
            self.seed
                .wrapping_mul(0x2545_f491_4f6c_dd1d)
                .wrapping_add((prefix.code as u64) << 20)
                .wrapping_add((prefix.len as u64) << 8)
                .wrapping_add(play.step() as u64),
        );
        let mut f = TicketPortfolio::zero(space, len);
        for v in &mut f.values {
            *v = rng.gen_range(-self.magnitude..=self.magnitude);
        }
        f
    }
}
