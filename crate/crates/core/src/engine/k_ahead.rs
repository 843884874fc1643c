//! K-steps-ahead protocols: the truncated ticket protocol, the one-step
//! special case, and the decision protocol that adds losses and a decision
//! maker.

use super::{
    cashout_increment, check_forecast, check_outcome, check_tickets, portfolio_cost,
    reprice_credit, window_len, DecisionMaker, DmReality, EngineError, Forecaster, LossMode,
    PlayConfig, PlayState, PlayStatus, PlayTranscript, Reality, Sceptic, StepTag,
};
use crate::measures::ObsSpace;

/// Ticket protocol with bets at most `K` steps ahead.
///
/// Sceptic's move at step `n` lives on `Y^{K ∧ (N-n+1)}`; the repricing
/// credit runs over `Y^{(K-1) ∧ (N-n+1)}` and the debit over
/// `Y^{K ∧ (N-n+2)}`. With `K = N` the exponents collapse to the
/// full-horizon protocol's.
pub fn run_k_ahead(
    space: ObsSpace,
    n_steps: usize,
    k: usize,
    forecaster: &mut dyn Forecaster,
    sceptic: &mut dyn Sceptic,
    reality: &mut dyn Reality,
) -> Result<PlayTranscript, EngineError> {
    if n_steps < 2 || k == 0 || k > n_steps {
        return Err(EngineError::BadConfig(format!(
            "need N >= 2 and 1 <= K <= N, got N={n_steps} K={k}"
        )));
    }
    let mut config = PlayConfig::plain(space.clone(), n_steps);
    config.k = Some(k);
    let mut state = PlayState::new(config);
    let mut status = PlayStatus::Completed;

    'play: for n in 1..=n_steps {
        let w = window_len(k, n_steps, n);
        let p = forecaster.forecast(&state, w);
        check_forecast(&p, &space, w, n)?;
        if n > 1 {
            let credit_len = (k - 1).min(n_steps - n + 1);
            let f_prev = &state.tickets[n - 2];
            let y_prev = state.outcomes[n - 2];
            let credit = reprice_credit(&space, f_prev, y_prev, &p, credit_len);
            let debit = portfolio_cost(f_prev, &state.forecasts[n - 2]);
            let v = state.ledger.last_value() + credit - debit;
            if !state.ledger.push(StepTag::K(n - 1), v) {
                state.forecasts.push(p);
                status = PlayStatus::ScepticBankrupt;
                break 'play;
            }
        }
        state.forecasts.push(p);

        let f = sceptic.tickets(&state, w);
        check_tickets(&f, &space, w, n)?;
        state.tickets.push(f);

        let y = reality.outcome(&state);
        check_outcome(y, &space, n)?;
        state.outcomes.push(y);

        if n == n_steps {
            let inc = cashout_increment(&state.tickets[n - 1], &state.forecasts[n - 1], y);
            let v = state.ledger.last_value() + inc;
            if !state.ledger.push(StepTag::K(n), v) {
                status = PlayStatus::ScepticBankrupt;
            }
        }
    }

    Ok(PlayTranscript {
        protocol: "k-ahead".into(),
        status,
        state,
    })
}

/// One-step-ahead betting: each ticket settles at the very next outcome.
/// This is the reference the `K = 1` reduction is tested against.
pub fn run_one_step(
    space: ObsSpace,
    n_steps: usize,
    forecaster: &mut dyn Forecaster,
    sceptic: &mut dyn Sceptic,
    reality: &mut dyn Reality,
) -> Result<PlayTranscript, EngineError> {
    let mut config = PlayConfig::plain(space.clone(), n_steps);
    config.k = Some(1);
    let mut state = PlayState::new(config);
    let mut status = PlayStatus::Completed;

    for n in 1..=n_steps {
        let p = forecaster.forecast(&state, 1);
        check_forecast(&p, &space, 1, n)?;
        state.forecasts.push(p);

        let f = sceptic.tickets(&state, 1);
        check_tickets(&f, &space, 1, n)?;
        state.tickets.push(f);

        let y = reality.outcome(&state);
        check_outcome(y, &space, n)?;
        state.outcomes.push(y);

        let inc = cashout_increment(&state.tickets[n - 1], &state.forecasts[n - 1], y);
        let v = state.ledger.last_value() + inc;
        if !state.ledger.push(StepTag::K(n), v) {
            status = PlayStatus::ScepticBankrupt;
            break;
        }
    }

    Ok(PlayTranscript {
        protocol: "one-step".into(),
        status,
        state,
    })
}

/// Decision protocol on a `K`-step window.
///
/// Move order per step: Reality announces a loss table, Forecaster a window
/// measure, capital is repriced, Decision Maker picks a decision, Sceptic
/// bets, Reality reveals the outcome. Loss tables and forecasts live on
/// `Y^{K ∧ (N-n+1)}` so late windows shrink with the remaining horizon.
#[allow(clippy::too_many_arguments)]
pub fn run_decision(
    space: ObsSpace,
    n_steps: usize,
    k: usize,
    num_decisions: usize,
    reality: &mut dyn DmReality,
    forecaster: &mut dyn Forecaster,
    decision_maker: &mut dyn DecisionMaker,
    sceptic: &mut dyn Sceptic,
) -> Result<PlayTranscript, EngineError> {
    run_decision_mode(
        space,
        n_steps,
        k,
        num_decisions,
        LossMode::Truncated,
        reality,
        forecaster,
        decision_maker,
        sceptic,
    )
}

/// [`run_decision`] with an explicit loss accumulation mode recorded in the
/// transcript config.
#[allow(clippy::too_many_arguments)]
pub fn run_decision_mode(
    space: ObsSpace,
    n_steps: usize,
    k: usize,
    num_decisions: usize,
    loss_mode: LossMode,
    reality: &mut dyn DmReality,
    forecaster: &mut dyn Forecaster,
    decision_maker: &mut dyn DecisionMaker,
    sceptic: &mut dyn Sceptic,
) -> Result<PlayTranscript, EngineError> {
    if n_steps < 2 || k == 0 || k > n_steps {
        return Err(EngineError::BadConfig(format!(
            "need N >= 2 and 1 <= K <= N, got N={n_steps} K={k}"
        )));
    }
    if num_decisions == 0 {
        return Err(EngineError::BadConfig("empty decision space".into()));
    }
    let mut config = PlayConfig::plain(space.clone(), n_steps);
    config.k = Some(k);
    config.num_decisions = Some(num_decisions);
    config.loss_mode = Some(loss_mode);
    let mut state = PlayState::new(config);
    let mut status = PlayStatus::Completed;

    'play: for n in 1..=n_steps {
        let w = window_len(k, n_steps, n);

        let loss = reality.announce_loss(&state, w);
        if loss.horizon() != w || loss.num_decisions() != num_decisions {
            return Err(EngineError::violation(
                n,
                format!(
                    "loss table shape ({}, {}) but protocol requires ({num_decisions}, Y^{w})",
                    loss.num_decisions(),
                    loss.horizon()
                ),
            ));
        }
        state.losses.push(loss);

        let p = forecaster.forecast(&state, w);
        check_forecast(&p, &space, w, n)?;
        if n > 1 {
            let credit_len = (k - 1).min(n_steps - n + 1);
            let f_prev = &state.tickets[n - 2];
            let y_prev = state.outcomes[n - 2];
            let credit = reprice_credit(&space, f_prev, y_prev, &p, credit_len);
            let debit = portfolio_cost(f_prev, &state.forecasts[n - 2]);
            let v = state.ledger.last_value() + credit - debit;
            if !state.ledger.push(StepTag::K(n - 1), v) {
                state.forecasts.push(p);
                status = PlayStatus::ScepticBankrupt;
                break 'play;
            }
        }
        state.forecasts.push(p);

        let d = decision_maker.decide(&state);
        if d >= num_decisions {
            return Err(EngineError::violation(n, format!("decision {d} out of range")));
        }
        state.decisions.push(d);

        let f = sceptic.tickets(&state, w);
        check_tickets(&f, &space, w, n)?;
        state.tickets.push(f);

        let y = reality.outcome(&state);
        check_outcome(y, &space, n)?;
        state.outcomes.push(y);

        if n == n_steps {
            let inc = cashout_increment(&state.tickets[n - 1], &state.forecasts[n - 1], y);
            let v = state.ledger.last_value() + inc;
            if !state.ledger.push(StepTag::K(n), v) {
                status = PlayStatus::ScepticBankrupt;
            }
        }
    }

    Ok(PlayTranscript {
        protocol: "decision".into(),
        status,
        state,
    })
}
