//! Simulation and verification workbench for sequential forecast-betting
//! protocols.
//!
//! The moving parts, bottom up:
//!
//! - [`measures`]: positive probability measures on finite sequence spaces,
//!   with marginals, conditionals, and prefix-cylinder extensions;
//! - [`engine`]: the betting protocols themselves: drivers that collect
//!   player moves, enforce legality, and keep the capital ledger;
//! - [`strategies`]: forecaster, reality, sceptic, and decision-maker
//!   implementations, from scripted moves to the exponential-mixture
//!   sceptic certifying the regret bound;
//! - [`bounds`]: the closed-form inequalities the experiments are checked
//!   against;
//! - [`duality`]: LP verification that betting-side and measure-side test
//!   supermartingales coincide, plus the positive-space witness for
//!   arbitrary forecast sequences;
//! - [`market`]: an order book with price-time priority and an adapter
//!   reconciling routed ticket trades against the protocol ledger;
//! - [`harness`]: exact enumeration oracles, Monte Carlo experiments, and
//!   deterministic report emission.
//!
//! Capital convention: every play starts at 1, never goes negative, and a
//! large final value discredits the forecasts it bet against.

pub mod bounds;
pub mod duality;
pub mod engine;
pub mod harness;
pub mod market;
pub mod measures;
pub mod strategies;
