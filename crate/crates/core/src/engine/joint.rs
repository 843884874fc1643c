//! Full-horizon testing protocols: the ticket protocol, its
//! conditioning-difference restatement, and the merged-opponents form.

use super::script::{ScriptedForecaster, ScriptedReality, ScriptedSceptic};
use super::{
    cashout_increment, check_forecast, check_outcome, check_tickets, portfolio_cost,
    reprice_credit, EngineError, Forecaster, MergedForecaster, PlayConfig, PlayState, PlayStatus,
    PlayTranscript, Reality, Sceptic, StepTag,
};
use crate::measures::{ObsSpace, SeqIndex};

/// Full-horizon ticket protocol.
///
/// At step `n` the forecaster prices every remaining sequence in
/// `Y^{N-n+1}`; the sceptic takes ticket positions at those prices; capital
/// is repriced when the next forecast arrives and the winning ticket is
/// cashed at the last step.
pub fn run_joint_test(
    space: ObsSpace,
    n_steps: usize,
    forecaster: &mut dyn Forecaster,
    sceptic: &mut dyn Sceptic,
    reality: &mut dyn Reality,
) -> Result<PlayTranscript, EngineError> {
    if n_steps < 2 {
        return Err(EngineError::BadConfig("need at least 2 steps".into()));
    }
    let mut state = PlayState::new(PlayConfig::plain(space.clone(), n_steps));
    let mut status = PlayStatus::Completed;

    'play: for n in 1..=n_steps {
        let horizon = n_steps - n + 1;
        let p = forecaster.forecast(&state, horizon);
        check_forecast(&p, &space, horizon, n)?;
        if n > 1 {
            let f_prev = &state.tickets[n - 2];
            let y_prev = state.outcomes[n - 2];
            let credit = reprice_credit(&space, f_prev, y_prev, &p, horizon);
            let debit = portfolio_cost(f_prev, &state.forecasts[n - 2]);
            let v = state.ledger.last_value() + credit - debit;
            if !state.ledger.push(StepTag::K(n - 1), v) {
                state.forecasts.push(p);
                status = PlayStatus::ScepticBankrupt;
                break 'play;
            }
        }
        state.forecasts.push(p);

        let f = sceptic.tickets(&state, horizon);
        check_tickets(&f, &space, horizon, n)?;
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
        protocol: "joint-test".into(),
        status,
        state,
    })
}

/// Conditioning-difference restatement of the ticket protocol.
///
/// Capital is settled one step early through the reduced one-step tickets
/// `f'_n(y) = sum_x f_n(y x) P_n(x | y)`, and when the next forecast arrives
/// the sceptic is additionally paid on the gap between it and the Bayesian
/// conditional of the previous forecast. The recorded ledger carries the
/// settled values, which coincide with [`run_joint_test`] on the same moves.
pub fn run_protocol4(
    space: ObsSpace,
    n_steps: usize,
    forecaster: &mut dyn Forecaster,
    sceptic: &mut dyn Sceptic,
    reality: &mut dyn Reality,
) -> Result<PlayTranscript, EngineError> {
    if n_steps < 2 {
        return Err(EngineError::BadConfig("need at least 2 steps".into()));
    }
    let mut state = PlayState::new(PlayConfig::plain(space.clone(), n_steps));
    let mut status = PlayStatus::Completed;
    // K_{n-1} as provisionally set at the end of step n-1, before the
    // difference-term correction lands at step n.
    let mut provisional = 1.0;

    'play: for n in 1..=n_steps {
        let horizon = n_steps - n + 1;
        let p = forecaster.forecast(&state, horizon);
        check_forecast(&p, &space, horizon, n)?;

        let base = if n > 1 {
            let f_prev = &state.tickets[n - 2];
            let p_prev = &state.forecasts[n - 2];
            let y_prev = state.outcomes[n - 2];
            let prev_marginal = p_prev.marginal(SeqIndex { len: 1, code: y_prev })?;
            let block = space.seq_count(horizon);
            let mut corr = 0.0;
            for code in 0..block {
                let cond = p_prev.weights()[y_prev * block + code] / prev_marginal;
                corr += f_prev.values[y_prev * block + code] * (p.weights()[code] - cond);
            }
            let v = provisional + corr;
            if !state.ledger.push(StepTag::K(n - 1), v) {
                state.forecasts.push(p);
                status = PlayStatus::ScepticBankrupt;
                break 'play;
            }
            state.ledger.last_value()
        } else {
            1.0
        };
        state.forecasts.push(p);

        let f = sceptic.tickets(&state, horizon);
        check_tickets(&f, &space, horizon, n)?;
        state.tickets.push(f);

        let y = reality.outcome(&state);
        check_outcome(y, &space, n)?;
        state.outcomes.push(y);

        // one-step reduction f'_n over Y
        let p_n = &state.forecasts[n - 1];
        let f_n = &state.tickets[n - 1];
        let tail_block = space.seq_count(horizon - 1);
        let mut reduced = vec![0.0; space.size()];
        let mut cost = 0.0;
        for (y0, slot) in reduced.iter_mut().enumerate() {
            let m = p_n.marginal(SeqIndex { len: 1, code: y0 })?;
            let mut acc = 0.0;
            for tail in 0..tail_block {
                acc += f_n.values[y0 * tail_block + tail] * p_n.weights()[y0 * tail_block + tail];
            }
            // acc = sum_x f(y0 x) P(y0 x); f'(y0) = acc / P(y0)
            *slot = acc / m;
            cost += acc;
        }
        provisional = base + reduced[y] - cost;

        if n == n_steps && !state.ledger.push(StepTag::K(n), provisional) {
            status = PlayStatus::ScepticBankrupt;
        }
    }

    Ok(PlayTranscript {
        protocol: "conditioning-difference".into(),
        status,
        state,
    })
}

/// Run the live players through the ticket protocol, then push the same
/// recorded moves through the conditioning-difference protocol. The two
/// ledgers agree entry for entry regardless of how the forecaster updates.
pub fn run_conditioning_variants(
    space: ObsSpace,
    n_steps: usize,
    forecaster: &mut dyn Forecaster,
    sceptic: &mut dyn Sceptic,
    reality: &mut dyn Reality,
) -> Result<(PlayTranscript, PlayTranscript), EngineError> {
    let t2 = run_joint_test(space.clone(), n_steps, forecaster, sceptic, reality)?;
    let s = &t2.state;
    let t4 = run_protocol4(
        space,
        n_steps,
        &mut ScriptedForecaster::new(s.forecasts.clone()),
        &mut ScriptedSceptic::new(s.tickets.clone()),
        &mut ScriptedReality::new(s.outcomes.clone()),
    )?;
    Ok((t2, t4))
}

/// Merged-opponents protocol: one player announces measures on the full
/// sequence space, each concentrated on a growing prefix cylinder; the
/// sceptic holds positions on full sequences and is paid on price changes.
///
/// The loop runs `N+1` steps so the last capital value is defined; the final
/// sceptic move is collected but never settles. The step-`N+1` measure must
/// be a point mass.
pub fn run_merged(
    space: ObsSpace,
    n_steps: usize,
    forecaster: &mut dyn MergedForecaster,
    sceptic: &mut dyn Sceptic,
) -> Result<PlayTranscript, EngineError> {
    if n_steps < 1 {
        return Err(EngineError::BadConfig("need at least 1 step".into()));
    }
    let mut config = PlayConfig::plain(space.clone(), n_steps);
    config.full_horizon = Some(n_steps);
    let mut state = PlayState::new(config);
    let mut status = PlayStatus::Completed;

    for n in 1..=n_steps + 1 {
        let q = forecaster.forecast(&state, n);
        if q.space() != &space || q.horizon() != n_steps {
            return Err(EngineError::violation(n, "merged forecast on wrong space"));
        }
        if q.concentrated_on_prefix(n - 1).is_none() {
            return Err(EngineError::violation(
                n,
                format!("measure not concentrated on a {}-prefix", n - 1),
            ));
        }
        if n > 1 {
            let f_prev = &state.tickets[n - 2];
            let q_prev = &state.merged_forecasts[n - 2];
            let delta: f64 = f_prev
                .values
                .iter()
                .zip(q.weights().iter().zip(q_prev.weights()))
                .map(|(&f, (&a, &b))| f * (a - b))
                .sum();
            let v = state.ledger.last_value() + delta;
            if !state.ledger.push(StepTag::K(n - 1), v) {
                state.merged_forecasts.push(q);
                status = PlayStatus::ScepticBankrupt;
                break;
            }
        }
        state.merged_forecasts.push(q);

        let f = sceptic.tickets(&state, n_steps);
        check_tickets(&f, &space, n_steps, n)?;
        state.tickets.push(f);
    }

    Ok(PlayTranscript {
        protocol: "merged".into(),
        status,
        state,
    })
}
