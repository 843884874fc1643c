//! Strategy libraries for the four protocol players.
//!
//! Forecasters range from honest conditioning to deliberate drift; Reality
//! covers seeded iid sampling, scripts, and the block-anchored adversarial
//! loss schedule; Sceptics include the zero bet, hashed random bets
//! (predictable: a pure function of the visible history), buy-and-hold
//! tickets, and the mixture-of-exponential-supermartingales strategy that
//! backs the regret guarantee.

mod decision;
mod forecaster;
mod hoeffding;
mod reality;
mod sceptic;

pub use decision::{
    bayes_decision, BayesDecisionMaker, ComplementDecisionMaker, ConstantDecisionMaker,
};
pub use forecaster::{ConditioningForecaster, DriftingForecaster, IidForecaster, RandomForecaster};
pub use hoeffding::{HoeffdingSceptic, HoeffdingSide};
pub use reality::{AnchorRule, AnchorDmReality, IidReality, LastObsDmReality};
pub use sceptic::{RandomSceptic, TicketHoldSceptic, ZeroSceptic};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
