//! General futures protocol: tickets of every maturity, settled as their
//! length expires, plus the length-normalization that reduces it to the
//! full-horizon ticket protocol.

use super::{
    check_forecast, check_outcome, EngineError, Forecaster, LadderPortfolio, LadderSceptic,
    PlayConfig, PlayState, PlayStatus, PlayTranscript, Reality, StepTag,
};
use crate::measures::{ObsSpace, ProbMeasure, SeqIndex};

fn check_ladder(
    f: &LadderPortfolio,
    space: &ObsSpace,
    max_len: usize,
    step: usize,
) -> Result<(), EngineError> {
    if f.max_len() != max_len {
        return Err(EngineError::violation(
            step,
            format!(
                "ladder covers lengths 1..={} but protocol requires 1..={max_len}",
                f.max_len()
            ),
        ));
    }
    for (i, tier) in f.tiers.iter().enumerate() {
        let len = i + 1;
        if tier.len != len || tier.values.len() != space.seq_count(len) {
            return Err(EngineError::violation(step, "malformed ladder tier"));
        }
        if tier.values.iter().any(|v| !v.is_finite()) {
            return Err(EngineError::violation(step, "non-finite ticket value"));
        }
    }
    Ok(())
}

/// Cost of every tier of length >= 2 at the prices of `p` (marginals for
/// short sequences).
fn ladder_cost_from_len2(f: &LadderPortfolio, p: &ProbMeasure) -> f64 {
    let mut total = 0.0;
    for tier in f.tiers.iter().skip(1) {
        for (code, &v) in tier.values.iter().enumerate() {
            if v != 0.0 {
                total += v
                    * p.marginal(SeqIndex {
                        len: tier.len,
                        code,
                    })
                    .expect("tier length within horizon");
            }
        }
    }
    total
}

/// Repricing credit over all live tickets: `sum_{x in Y^{1:(N-n+1)}}
/// f_{n-1}(y_{n-1} x) P_n(x)`.
fn ladder_credit(
    space: &ObsSpace,
    f: &LadderPortfolio,
    y_prev: usize,
    p_new: &ProbMeasure,
) -> f64 {
    let mut total = 0.0;
    for tier in f.tiers.iter().skip(1) {
        let tail_len = tier.len - 1;
        let block = space.seq_count(tail_len);
        let base = y_prev * block;
        for code in 0..block {
            let v = tier.values[base + code];
            if v != 0.0 {
                total += v
                    * p_new
                        .marginal(SeqIndex {
                            len: tail_len,
                            code,
                        })
                        .expect("tail within horizon");
            }
        }
    }
    total
}

/// Maturity cash-out of the length-1 tier: `f(y) - sum_y f(y) P(y)`.
fn maturity_increment(f: &LadderPortfolio, p: &ProbMeasure, y: usize) -> f64 {
    let tier = f.tier(1);
    let mut cost = 0.0;
    for (code, &v) in tier.values.iter().enumerate() {
        cost += v * p.marginal(SeqIndex { len: 1, code }).expect("len 1");
    }
    tier.values[y] - cost
}

/// General futures protocol: at step `n` the sceptic may hold tickets on all
/// of `Y^{1:(N-n+1)}`. Length-1 tickets settle against the realized outcome
/// (`K'_n` entries); longer tickets are repriced when the next forecast
/// arrives (`K_n` entries). The final capital aliases the last cash-out.
pub fn run_general_futures(
    space: ObsSpace,
    n_steps: usize,
    forecaster: &mut dyn Forecaster,
    sceptic: &mut dyn LadderSceptic,
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
            let f_prev = &state.ladders[n - 2];
            let y_prev = state.outcomes[n - 2];
            let credit = ladder_credit(&space, f_prev, y_prev, &p);
            let debit = ladder_cost_from_len2(f_prev, &state.forecasts[n - 2]);
            let v = state.ledger.last_value() + credit - debit;
            if !state.ledger.push(StepTag::K(n - 1), v) {
                state.forecasts.push(p);
                status = PlayStatus::ScepticBankrupt;
                break 'play;
            }
        }
        state.forecasts.push(p);

        let f = sceptic.tickets(&state, horizon);
        check_ladder(&f, &space, horizon, n)?;
        state.ladders.push(f);

        let y = reality.outcome(&state);
        check_outcome(y, &space, n)?;
        state.outcomes.push(y);

        let inc = maturity_increment(&state.ladders[n - 1], &state.forecasts[n - 1], y);
        let v = state.ledger.last_value() + inc;
        if !state.ledger.push(StepTag::KPrime(n), v) {
            status = PlayStatus::ScepticBankrupt;
            break 'play;
        }
        if n == n_steps {
            // K_N := K'_N
            state.ledger.push(StepTag::K(n), state.ledger.last_value());
        }
    }

    Ok(PlayTranscript {
        protocol: "general-futures".into(),
        status,
        state,
    })
}

/// The length-normalization move: add `c` to the ticket count on `x` and
/// subtract `c` from the count on every one-step extension `x y`. Capital
/// increments between `K` checkpoints are unchanged.
pub fn normalize_o(
    space: &ObsSpace,
    portfolio: &LadderPortfolio,
    x: SeqIndex,
    c: f64,
) -> Result<LadderPortfolio, EngineError> {
    if x.len == 0 || x.len >= portfolio.max_len() {
        return Err(EngineError::BadConfig(format!(
            "normalization needs 1 <= |x| < {}, got {}",
            portfolio.max_len(),
            x.len
        )));
    }
    let mut out = portfolio.clone();
    out.tier_mut(x.len).values[x.code] += c;
    let base = x.code * space.size();
    for y in 0..space.size() {
        out.tier_mut(x.len + 1).values[base + y] -= c;
    }
    Ok(out)
}

/// Sweep [`normalize_o`] over all short sequences in order of increasing
/// length, emptying every tier below the top one. The result holds only
/// full-length tickets and plays identically at the `K` checkpoints.
pub fn sweep_to_final(
    space: &ObsSpace,
    portfolio: &LadderPortfolio,
) -> Result<LadderPortfolio, EngineError> {
    let mut out = portfolio.clone();
    let top = out.max_len();
    for len in 1..top {
        for code in 0..space.seq_count(len) {
            let c = out.tier(len).values[code];
            if c != 0.0 {
                out = normalize_o(space, &out, SeqIndex { len, code }, -c)?;
            }
        }
    }
    Ok(out)
}
