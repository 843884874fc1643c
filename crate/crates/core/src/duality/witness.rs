//! Construction of a positive finite probability space on which an
//! arbitrary forecast sequence is realized by honest conditioning.
//!
//! Given forecasts `P_1, ..., P_N` (each over the remaining horizon) and
//! outcomes `y_1, ..., y_N`, the sample space starts as `Y^N` under `P_1`
//! and is refined level by level: at level `n` the points continuing the
//! realized path split into a kept branch carrying conditional future law
//! `P_{n+1}` (mass fraction `eps_n`) and a discarded branch absorbing the
//! remainder, chosen so the combined conditional matches what `P_n`
//! prescribed. On the kept chain the conditional law given the past is
//! exactly the announced forecast at every step, and the chain keeps
//! positive probability, so the realized play is an honest-conditioning
//! event of positive measure.

use crate::measures::{MeasureError, ObsSpace, ProbMeasure, SeqIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("need one forecast per step and matching outcome count")]
    ShapeMismatch,
    #[error("forecast at step {step} has horizon {got}, expected {expected}")]
    BadHorizon {
        step: usize,
        got: usize,
        expected: usize,
    },
    #[error("no admissible split fraction at step {0}")]
    NoSplit(usize),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// How a sample point leaves the kept chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitKind {
    /// Observed something other than the realized outcome at the exit level.
    OffPath,
    /// Followed the realized outcome but took the discarded split branch.
    Discarded,
    /// Never left: reached the final level on the kept chain.
    Stayed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessAtom {
    pub weight: f64,
    /// Realized observation values `Y_1..Y_N` on this atom.
    pub outcomes: Vec<usize>,
    /// Level at which the atom left the kept chain (`N+1` when it stayed).
    pub exit_level: usize,
    pub exit_kind: ExitKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoherenceWitness {
    pub space: ObsSpace,
    pub n_steps: usize,
    pub atoms: Vec<WitnessAtom>,
    /// Split fraction chosen at each level `1..N-1`.
    pub epsilons: Vec<f64>,
}

impl CoherenceWitness {
    /// Probability of the event "honest conditioning held at every step and
    /// the realized outcomes occurred": the kept-chain atom of the path.
    pub fn realized_event_probability(&self, outcomes: &[usize]) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.exit_kind == ExitKind::Stayed && a.outcomes == outcomes)
            .map(|a| a.weight)
            .sum()
    }
}

/// Largest dyadic split fraction `2^-i` keeping the discarded branch
/// strictly positive: `eps * next(s) < cond(s)` for every suffix `s`.
fn pick_epsilon(cond: &[f64], next: &[f64], step: usize) -> Result<f64, WitnessError> {
    let mut eps = 0.5;
    for _ in 0..60 {
        if cond.iter().zip(next).all(|(&c, &q)| eps * q < c) {
            return Ok(eps);
        }
        eps *= 0.5;
    }
    Err(WitnessError::NoSplit(step))
}

/// Build the positive space realizing the forecasts along the outcomes.
/// `forecasts[n-1]` must live on `Y^{N-n+1}`.
pub fn coherence_witness(
    space: &ObsSpace,
    forecasts: &[ProbMeasure],
    outcomes: &[usize],
) -> Result<CoherenceWitness, WitnessError> {
    let n_steps = outcomes.len();
    if forecasts.len() != n_steps || n_steps == 0 {
        return Err(WitnessError::ShapeMismatch);
    }
    for (i, p) in forecasts.iter().enumerate() {
        if p.horizon() != n_steps - i {
            return Err(WitnessError::BadHorizon {
                step: i + 1,
                got: p.horizon(),
                expected: n_steps - i,
            });
        }
    }

    let mut atoms = Vec::new();
    let mut epsilons = Vec::new();
    let mut mass = 1.0; // probability of the kept chain so far
    let mut prefix: Vec<usize> = Vec::new();

    for n in 1..=n_steps {
        let cur = &forecasts[n - 1]; // conditional future law on the chain
        let horizon = n_steps - n + 1;
        let tail_count = space.seq_count(horizon - 1);
        let y_n = outcomes[n - 1];

        // points leaving the path at this level
        for z in 0..space.size() {
            if z == y_n {
                continue;
            }
            for tail in 0..tail_count {
                let idx = SeqIndex {
                    len: horizon,
                    code: z * tail_count + tail,
                };
                let mut outs = prefix.clone();
                outs.extend(idx.to_outcomes(space));
                atoms.push(WitnessAtom {
                    weight: mass * cur.weight(idx),
                    outcomes: outs,
                    exit_level: n,
                    exit_kind: ExitKind::OffPath,
                });
            }
        }

        if n == n_steps {
            // last level: the path point itself stays
            let idx = SeqIndex {
                len: 1,
                code: y_n,
            };
            let mut outs = prefix.clone();
            outs.push(y_n);
            atoms.push(WitnessAtom {
                weight: mass * cur.weight(idx),
                outcomes: outs,
                exit_level: n_steps + 1,
                exit_kind: ExitKind::Stayed,
            });
            break;
        }

        let marg = cur.marginal(SeqIndex { len: 1, code: y_n })?;
        let next = &forecasts[n]; // P_{n+1}, over Y^{N-n}
        let cond: Vec<f64> = (0..tail_count)
            .map(|tail| cur.weights()[y_n * tail_count + tail] / marg)
            .collect();
        let eps = pick_epsilon(&cond, next.weights(), n)?;
        epsilons.push(eps);

        // the discarded branch absorbs whatever conditional mass the kept
        // branch (which carries P_{n+1}) does not account for
        for tail in 0..tail_count {
            let weight =
                mass * (cur.weights()[y_n * tail_count + tail] - eps * marg * next.weights()[tail]);
            let mut outs = prefix.clone();
            outs.push(y_n);
            outs.extend(
                SeqIndex {
                    len: horizon - 1,
                    code: tail,
                }
                .to_outcomes(space),
            );
            atoms.push(WitnessAtom {
                weight,
                outcomes: outs,
                exit_level: n,
                exit_kind: ExitKind::Discarded,
            });
        }

        mass *= marg * eps;
        prefix.push(y_n);
    }

    Ok(CoherenceWitness {
        space: space.clone(),
        n_steps,
        atoms,
        epsilons,
    })
}

/// Exhaustively recheck the witness: all atoms positive, total mass one,
/// and on the kept chain the conditional law of the remaining observations
/// equals the announced forecast at every step. Returns the largest
/// conditional deviation.
pub fn verify_witness(
    witness: &CoherenceWitness,
    forecasts: &[ProbMeasure],
    outcomes: &[usize],
) -> Result<f64, WitnessError> {
    let space = &witness.space;
    let n_steps = witness.n_steps;
    if witness.atoms.iter().any(|a| a.weight <= 0.0) {
        return Err(WitnessError::NoSplit(0));
    }
    let total: f64 = witness.atoms.iter().map(|a| a.weight).sum();
    let mut worst = (total - 1.0).abs();

    for n in 1..=n_steps {
        // the chain atom of the filtration at the start of step n contains
        // exactly the points that had not exited before level n
        let members: Vec<&WitnessAtom> = witness
            .atoms
            .iter()
            .filter(|a| a.exit_level >= n && a.outcomes[..n - 1] == outcomes[..n - 1])
            .collect();
        let chain_mass: f64 = members.iter().map(|a| a.weight).sum();
        let horizon = n_steps - n + 1;
        let mut dist = vec![0.0; space.seq_count(horizon)];
        for a in &members {
            let idx = SeqIndex::from_outcomes(space, &a.outcomes[n - 1..])?;
            dist[idx.code] += a.weight / chain_mass;
        }
        for (code, &got) in dist.iter().enumerate() {
            let want = forecasts[n - 1].weights()[code];
            worst = worst.max((got - want).abs());
        }
    }

    if witness.realized_event_probability(outcomes) <= 0.0 {
        return Err(WitnessError::NoSplit(n_steps));
    }
    Ok(worst)
}
