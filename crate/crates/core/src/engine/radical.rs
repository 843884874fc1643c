//! Belief-revision protocols without certain observations: the forecaster
//! re-announces a positive measure on the full sequence space every step and
//! the sceptic is paid additively on price changes or multiplicatively on
//! price relatives.

use super::{
    check_tickets, EngineError, Forecaster, PlayConfig, PlayState, PlayStatus, PlayTranscript,
    Sceptic, StepTag,
};
use crate::measures::ObsSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadicalMode {
    /// `K_{n-1} = K_{n-2} + sum_x F_{n-1}(x) (Q_n(x) - Q_{n-1}(x))`
    Additive,
    /// `K_{n-1} = K_{n-2} * sum_x (Q_n(x)/Q_{n-1}(x)) G_{n-1}(x)`
    Multiplicative,
}

/// Run `steps` announcements of the revision protocol over measures on
/// `Y^horizon`. The underlying loop is unbounded; the step budget is a
/// configuration choice. Once capital hits zero it stays there.
pub fn run_radical(
    space: ObsSpace,
    horizon: usize,
    steps: usize,
    forecaster: &mut dyn Forecaster,
    sceptic: &mut dyn Sceptic,
    mode: RadicalMode,
) -> Result<PlayTranscript, EngineError> {
    if steps < 1 || horizon < 1 {
        return Err(EngineError::BadConfig(
            "need at least 1 step and horizon >= 1".into(),
        ));
    }
    let mut config = PlayConfig::plain(space.clone(), steps);
    config.full_horizon = Some(horizon);
    let mut state = PlayState::new(config);
    let mut status = PlayStatus::Completed;

    for n in 1..=steps {
        // positivity is enforced by the ProbMeasure type, which is exactly
        // what the multiplicative update needs in its denominators
        let q = forecaster.forecast(&state, horizon);
        if q.space() != &space || q.horizon() != horizon {
            return Err(EngineError::violation(n, "revision measure on wrong space"));
        }
        if n > 1 {
            let f_prev = &state.tickets[n - 2];
            let q_prev = &state.forecasts[n - 2];
            let prev_capital = state.ledger.last_value();
            let v = match mode {
                RadicalMode::Additive => {
                    let delta: f64 = f_prev
                        .values
                        .iter()
                        .zip(q.weights().iter().zip(q_prev.weights()))
                        .map(|(&f, (&a, &b))| f * (a - b))
                        .sum();
                    prev_capital + delta
                }
                RadicalMode::Multiplicative => {
                    let factor: f64 = f_prev
                        .values
                        .iter()
                        .zip(q.weights().iter().zip(q_prev.weights()))
                        .map(|(&g, (&a, &b))| g * (a / b))
                        .sum();
                    prev_capital * factor
                }
            };
            if !state.ledger.push(StepTag::K(n - 1), v) {
                state.forecasts.push(q);
                status = PlayStatus::ScepticBankrupt;
                break;
            }
        }
        state.forecasts.push(q);

        let f = sceptic.tickets(&state, horizon);
        check_tickets(&f, &space, horizon, n)?;
        state.tickets.push(f);
    }

    Ok(PlayTranscript {
        protocol: match mode {
            RadicalMode::Additive => "radical-additive".into(),
            RadicalMode::Multiplicative => "radical-multiplicative".into(),
        },
        status,
        state,
    })
}
