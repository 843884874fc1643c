//! Protocol state machines with capital accounting.
//!
//! Each betting protocol is a driver loop that collects moves from player
//! strategies, validates move legality, and applies the protocol's capital
//! update equations to a tagged ledger. A completed play is frozen into a
//! [`PlayTranscript`]; replaying a transcript through the same driver with
//! scripted players must reproduce the ledger bit for bit.
//!
//! Capital rules: the ledger starts at 1 and is never allowed to go negative.
//! An update landing below `-`[`BANKRUPTCY_TOL`] stops the play with status
//! [`PlayStatus::ScepticBankrupt`] and a final clamped-to-zero entry; values
//! in `[-BANKRUPTCY_TOL, 0)` are treated as rounding noise and clamped.

mod futures;
mod joint;
mod k_ahead;
mod radical;
pub mod script;


pub use futures::{normalize_o, run_general_futures, sweep_to_final};
pub use joint::{run_conditioning_variants, run_joint_test, run_merged, run_protocol4};
pub use k_ahead::{run_decision, run_decision_mode, run_k_ahead, run_one_step};
pub use radical::{run_radical, RadicalMode};

use crate::measures::{CylinderMeasure, LossFn, MeasureError, ObsSpace, ProbMeasure, SeqIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Negative capital below this magnitude halts the play; above it, the value
/// is clamped to zero and play continues.
pub const BANKRUPTCY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("protocol violation at step {step}: {what}")]
    ProtocolViolation { step: usize, what: String },
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

impl EngineError {
    pub fn violation(step: usize, what: impl Into<String>) -> Self {
        EngineError::ProtocolViolation {
            step,
            what: what.into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Portfolios
// ---------------------------------------------------------------------------

/// Ticket vector over `Y^len`: entry `code` is the number of tickets held on
/// the sequence with that lexicographic rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TicketPortfolio {
    pub len: usize,
    pub values: Vec<f64>,
}

impl TicketPortfolio {
    pub fn zero(space: &ObsSpace, len: usize) -> Self {
        Self {
            len,
            values: vec![0.0; space.seq_count(len)],
        }
    }

    pub fn new(space: &ObsSpace, len: usize, values: Vec<f64>) -> Result<Self, EngineError> {
        if values.len() != space.seq_count(len) {
            return Err(EngineError::BadConfig(format!(
                "portfolio over Y^{len} needs {} values, got {}",
                space.seq_count(len),
                values.len()
            )));
        }
        Ok(Self { len, values })
    }

    pub fn value(&self, idx: SeqIndex) -> f64 {
        debug_assert_eq!(idx.len, self.len);
        self.values[idx.code]
    }
}

/// Tickets on all nonempty lengths up to `max_len` (`Y^{1:max_len}`), the
/// move space of the general futures protocol. `tiers[l-1]` holds length `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderPortfolio {
    pub tiers: Vec<TicketPortfolio>,
}

impl LadderPortfolio {
    pub fn zero(space: &ObsSpace, max_len: usize) -> Self {
        Self {
            tiers: (1..=max_len)
                .map(|l| TicketPortfolio::zero(space, l))
                .collect(),
        }
    }

    pub fn max_len(&self) -> usize {
        self.tiers.len()
    }

    pub fn tier(&self, len: usize) -> &TicketPortfolio {
        &self.tiers[len - 1]
    }

    pub fn tier_mut(&mut self, len: usize) -> &mut TicketPortfolio {
        &mut self.tiers[len - 1]
    }
}

// ---------------------------------------------------------------------------
// Ledger
// ---------------------------------------------------------------------------

/// Ledger entry tag: `K(n)` for end-of-resolution capital, `KPrime(n)` for
/// the maturity cash-out stage of the general futures protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepTag {
    K(usize),
    KPrime(usize),
}

impl std::fmt::Display for StepTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepTag::K(n) => write!(f, "K_{n}"),
            StepTag::KPrime(n) => write!(f, "K'_{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlayStatus {
    Completed,
    ScepticBankrupt,
}

/// Capital trajectory with nonnegativity enforcement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CapitalLedger {
    pub entries: Vec<(StepTag, f64)>,
}

impl CapitalLedger {
    fn start() -> Self {
        Self {
            entries: vec![(StepTag::K(0), 1.0)],
        }
    }

    /// Record a capital value. Returns `false` when the play must halt.
    fn push(&mut self, tag: StepTag, value: f64) -> bool {
        if value < -BANKRUPTCY_TOL {
            self.entries.push((tag, 0.0));
            false
        } else {
            self.entries.push((tag, value.max(0.0)));
            true
        }
    }

    pub fn last_value(&self) -> f64 {
        self.entries.last().map(|&(_, v)| v).unwrap_or(1.0)
    }

    pub fn final_capital(&self) -> f64 {
        self.last_value()
    }

    pub fn min_capital(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::INFINITY, f64::min)
    }

    /// Values of the `K(n)` entries in order (skipping `KPrime`).
    pub fn k_values(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter_map(|&(t, v)| match t {
                StepTag::K(_) => Some(v),
                StepTag::KPrime(_) => None,
            })
            .collect()
    }

    pub fn value_at(&self, tag: StepTag) -> Option<f64> {
        self.entries.iter().find(|&&(t, _)| t == tag).map(|&(_, v)| v)
    }
}

// ---------------------------------------------------------------------------
// Play state and transcript
// ---------------------------------------------------------------------------

/// How total loss is accumulated in decision protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum LossMode {
    /// Sum over steps `1..=N-K+1` (full windows only).
    #[default]
    Truncated,
    /// Sum over all `N` steps, late windows shortened to fit the horizon.
    AllSteps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayConfig {
    pub space: ObsSpace,
    /// Number of protocol steps N.
    pub n_steps: usize,
    /// Prediction horizon K for the K-ahead and decision protocols.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    /// Decision space size for decision protocols.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub num_decisions: Option<usize>,
    /// Horizon of the measures in merged/radical protocols.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub full_horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub loss_mode: Option<LossMode>,
}

impl PlayConfig {
    pub fn plain(space: ObsSpace, n_steps: usize) -> Self {
        Self {
            space,
            n_steps,
            k: None,
            num_decisions: None,
            full_horizon: None,
            loss_mode: None,
        }
    }
}

/// Visible history of a play in progress. Strategies receive a shared
/// reference; the driver owns and mutates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayState {
    pub config: PlayConfig,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub forecasts: Vec<ProbMeasure>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub merged_forecasts: Vec<CylinderMeasure>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub outcomes: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub tickets: Vec<TicketPortfolio>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub ladders: Vec<LadderPortfolio>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub losses: Vec<LossFn>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub decisions: Vec<usize>,
    pub ledger: CapitalLedger,
}

impl PlayState {
    pub fn new(config: PlayConfig) -> Self {
        Self {
            config,
            forecasts: Vec::new(),
            merged_forecasts: Vec::new(),
            outcomes: Vec::new(),
            tickets: Vec::new(),
            ladders: Vec::new(),
            losses: Vec::new(),
            decisions: Vec::new(),
            ledger: CapitalLedger::start(),
        }
    }

    /// 1-based step currently being played (number of outcomes seen plus one).
    pub fn step(&self) -> usize {
        self.outcomes.len() + 1
    }

    /// Realized observation prefix as a sequence index.
    pub fn outcome_prefix(&self) -> SeqIndex {
        SeqIndex::from_outcomes(&self.config.space, &self.outcomes).expect("outcomes validated")
    }

    pub fn last_forecast(&self) -> Option<&ProbMeasure> {
        self.forecasts.last()
    }
}

/// Frozen record of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayTranscript {
    pub protocol: String,
    pub status: PlayStatus,
    #[serde(flatten)]
    pub state: PlayState,
}

impl PlayTranscript {
    pub fn ledger(&self) -> &CapitalLedger {
        &self.state.ledger
    }

    pub fn final_capital(&self) -> f64 {
        self.state.ledger.final_capital()
    }

    /// Re-run the recorded moves through the original driver and return the
    /// recomputed transcript. Determinism demands a bit-identical ledger.
    pub fn replay(&self) -> Result<PlayTranscript, EngineError> {
        let s = &self.state;
        let cfg = &s.config;
        match self.protocol.as_str() {
            "joint-test" => run_joint_test(
                cfg.space.clone(),
                cfg.n_steps,
                &mut script::ScriptedForecaster::new(s.forecasts.clone()),
                &mut script::ScriptedSceptic::new(s.tickets.clone()),
                &mut script::ScriptedReality::new(s.outcomes.clone()),
            ),
            "conditioning-difference" => run_protocol4(
                cfg.space.clone(),
                cfg.n_steps,
                &mut script::ScriptedForecaster::new(s.forecasts.clone()),
                &mut script::ScriptedSceptic::new(s.tickets.clone()),
                &mut script::ScriptedReality::new(s.outcomes.clone()),
            ),
            "merged" => run_merged(
                cfg.space.clone(),
                cfg.n_steps,
                &mut script::ScriptedMergedForecaster::new(s.merged_forecasts.clone()),
                &mut script::ScriptedSceptic::new(s.tickets.clone()),
            ),
            "k-ahead" => run_k_ahead(
                cfg.space.clone(),
                cfg.n_steps,
                cfg.k.ok_or_else(|| EngineError::BadConfig("missing K".into()))?,
                &mut script::ScriptedForecaster::new(s.forecasts.clone()),
                &mut script::ScriptedSceptic::new(s.tickets.clone()),
                &mut script::ScriptedReality::new(s.outcomes.clone()),
            ),
            "decision" => run_decision(
                cfg.space.clone(),
                cfg.n_steps,
                cfg.k.ok_or_else(|| EngineError::BadConfig("missing K".into()))?,
                cfg.num_decisions
                    .ok_or_else(|| EngineError::BadConfig("missing decision count".into()))?,
                &mut script::ScriptedDmReality::new(s.outcomes.clone(), s.losses.clone()),
                &mut script::ScriptedForecaster::new(s.forecasts.clone()),
                &mut script::ScriptedDecisionMaker::new(s.decisions.clone()),
                &mut script::ScriptedSceptic::new(s.tickets.clone()),
            ),
            "general-futures" => run_general_futures(
                cfg.space.clone(),
                cfg.n_steps,
                &mut script::ScriptedForecaster::new(s.forecasts.clone()),
                &mut script::ScriptedLadderSceptic::new(s.ladders.clone()),
                &mut script::ScriptedReality::new(s.outcomes.clone()),
            ),
            "radical-additive" => run_radical(
                cfg.space.clone(),
                cfg.full_horizon
                    .ok_or_else(|| EngineError::BadConfig("missing horizon".into()))?,
                cfg.n_steps,
                &mut script::ScriptedForecaster::new(s.forecasts.clone()),
                &mut script::ScriptedSceptic::new(s.tickets.clone()),
                RadicalMode::Additive,
            ),
            "radical-multiplicative" => run_radical(
                cfg.space.clone(),
                cfg.full_horizon
                    .ok_or_else(|| EngineError::BadConfig("missing horizon".into()))?,
                cfg.n_steps,
                &mut script::ScriptedForecaster::new(s.forecasts.clone()),
                &mut script::ScriptedSceptic::new(s.tickets.clone()),
                RadicalMode::Multiplicative,
            ),
            other => Err(EngineError::BadConfig(format!("unknown protocol {other}"))),
        }
    }

    /// Compact CSV ledger (step, tag, capital).
    pub fn write_ledger_csv<W: std::io::Write>(&self, w: W) -> Result<(), std::io::Error> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["step", "tag", "capital"])
            .map_err(std::io::Error::other)?;
        for (i, (tag, v)) in self.state.ledger.entries.iter().enumerate() {
            wtr.write_record([i.to_string(), tag.to_string(), format!("{v:.17e}")])
                .map_err(std::io::Error::other)?;
        }
        wtr.flush()
    }
}

// ---------------------------------------------------------------------------
// Player traits
// ---------------------------------------------------------------------------

pub trait Forecaster {
    /// Measure over the next `horizon` observations given the visible history.
    fn forecast(&mut self, play: &PlayState, horizon: usize) -> ProbMeasure;
}

pub trait MergedForecaster {
    /// Step-`n` move of the merged protocol: a measure on the full sequence
    /// space concentrated on some `(n-1)`-prefix cylinder.
    fn forecast(&mut self, play: &PlayState, step: usize) -> CylinderMeasure;
}

pub trait Sceptic {
    fn tickets(&mut self, play: &PlayState, len: usize) -> TicketPortfolio;
}

pub trait LadderSceptic {
    fn tickets(&mut self, play: &PlayState, max_len: usize) -> LadderPortfolio;
}

pub trait Reality {
    fn outcome(&mut self, play: &PlayState) -> usize;
}

/// Reality in the decision protocols additionally announces loss functions.
pub trait DmReality: Reality {
    fn announce_loss(&mut self, play: &PlayState, horizon: usize) -> LossFn;
}

pub trait DecisionMaker {
    fn decide(&mut self, play: &PlayState) -> usize;
}

// ---------------------------------------------------------------------------
// Loss accounting
// ---------------------------------------------------------------------------

/// Window length at step `n` (1-based) of a K-ahead protocol over `N` steps.
pub fn window_len(k: usize, n_steps: usize, n: usize) -> usize {
    k.min(n_steps - n + 1)
}

/// Total loss of the given per-step decisions against a decision transcript.
pub fn total_loss(transcript: &PlayTranscript, decisions: &[usize]) -> Result<f64, EngineError> {
    let s = &transcript.state;
    let k = s
        .config
        .k
        .ok_or_else(|| EngineError::BadConfig("loss accounting needs K".into()))?;
    let n_steps = s.config.n_steps;
    let mode = s.config.loss_mode.unwrap_or_default();
    let last = match mode {
        LossMode::Truncated => n_steps.saturating_sub(k) + 1,
        LossMode::AllSteps => n_steps,
    };
    let mut loss = 0.0;
    for n in 1..=last.min(s.losses.len()).min(decisions.len()) {
        let w = window_len(k, n_steps, n);
        if s.outcomes.len() < n - 1 + w {
            break;
        }
        let window = SeqIndex::from_outcomes(&s.config.space, &s.outcomes[n - 1..n - 1 + w])?;
        loss += s.losses[n - 1].value(decisions[n - 1], window);
    }
    Ok(loss)
}

/// Replay a decision strategy against the recorded moves of a transcript,
/// returning the decisions it would have made with the same visible history.
pub fn replay_decisions(
    transcript: &PlayTranscript,
    strategy: &mut dyn DecisionMaker,
) -> Vec<usize> {
    let s = &transcript.state;
    let mut shadow = PlayState::new(s.config.clone());
    let steps = s.losses.len();
    let mut out = Vec::with_capacity(steps);
    for n in 0..steps {
        shadow.losses.push(s.losses[n].clone());
        if n < s.forecasts.len() {
            shadow.forecasts.push(s.forecasts[n].clone());
        }
        out.push(strategy.decide(&shadow));
        shadow.decisions.push(s.decisions.get(n).copied().unwrap_or(0));
        if n < s.tickets.len() {
            shadow.tickets.push(s.tickets[n].clone());
        }
        if n < s.outcomes.len() {
            shadow.outcomes.push(s.outcomes[n]);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Shared update arithmetic
// ---------------------------------------------------------------------------

/// Marginal `P(x)` of a (possibly shorter) prefix under `p`; plain weight
/// when the lengths match.
pub(crate) fn measure_value(p: &ProbMeasure, x: SeqIndex) -> f64 {
    if x.len == p.horizon() {
        p.weight(x)
    } else {
        p.marginal(x).expect("length checked by caller")
    }
}

/// Repricing credit: `sum_{x in Y^credit_len} f_prev(y_prev x) P_n(x)`.
pub(crate) fn reprice_credit(
    space: &ObsSpace,
    f_prev: &TicketPortfolio,
    y_prev: usize,
    p_new: &ProbMeasure,
    credit_len: usize,
) -> f64 {
    let block = space.seq_count(credit_len);
    let base = y_prev * block;
    let mut total = 0.0;
    for code in 0..block {
        let w = measure_value(
            p_new,
            SeqIndex {
                len: credit_len,
                code,
            },
        );
        total += f_prev.values[base + code] * w;
    }
    total
}

/// Cost of a full portfolio at the prices of `p`: `sum_x f(x) P(x)`.
pub(crate) fn portfolio_cost(f: &TicketPortfolio, p: &ProbMeasure) -> f64 {
    let mut total = 0.0;
    for (code, &v) in f.values.iter().enumerate() {
        total += v * measure_value(p, SeqIndex { len: f.len, code });
    }
    total
}

/// Final-step cash-out increment: `f(y) - sum_y f(y) P(y)` over length-1
/// tickets.
pub(crate) fn cashout_increment(f: &TicketPortfolio, p: &ProbMeasure, y: usize) -> f64 {
    debug_assert_eq!(f.len, 1);
    let mut cost = 0.0;
    for (code, &v) in f.values.iter().enumerate() {
        cost += v * measure_value(p, SeqIndex { len: 1, code });
    }
    f.values[y] - cost
}

pub(crate) fn check_forecast(
    p: &ProbMeasure,
    space: &ObsSpace,
    horizon: usize,
    step: usize,
) -> Result<(), EngineError> {
    if p.space() != space {
        return Err(EngineError::violation(step, "forecast on wrong space"));
    }
    if p.horizon() != horizon {
        return Err(EngineError::violation(
            step,
            format!(
                "forecast horizon {} but protocol requires {horizon}",
                p.horizon()
            ),
        ));
    }
    Ok(())
}

pub(crate) fn check_tickets(
    f: &TicketPortfolio,
    space: &ObsSpace,
    len: usize,
    step: usize,
) -> Result<(), EngineError> {
    if f.len != len || f.values.len() != space.seq_count(len) {
        return Err(EngineError::violation(
            step,
            format!("ticket domain Y^{} but protocol requires Y^{len}", f.len),
        ));
    }
    if f.values.iter().any(|v| !v.is_finite()) {
        return Err(EngineError::violation(step, "non-finite ticket value"));
    }
    Ok(())
}

pub(crate) fn check_outcome(y: usize, space: &ObsSpace, step: usize) -> Result<(), EngineError> {
    if y >= space.size() {
        return Err(EngineError::violation(step, format!("outcome {y} out of range")));
    }
    Ok(())
}
