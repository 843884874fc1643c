//! LP verification of the equivalence between betting-side and
//! measure-side test supermartingales, one conditioning step at a time.
//!
//! An instance fixes the first forecast `P` on `Y^N`, a finite menu of
//! candidate next forecasts `Q_r` per first observation `y`, and target
//! first values `S_{y,r} >= 0`. The measure-side problem maximizes the
//! `P`-expectation of `S` over conditional branch probabilities `X_{y,r}`
//! consistent with `P`; the betting-side problem finds ticket counts
//! `Z_{y,x}` whose portfolio value dominates `S` at total price
//! `sum P(yx) Z_{y,x}`. Strong LP duality makes the two optima meet, and
//! the dual solution is itself the sceptic move realizing `S`.

mod simplex;
mod witness;

pub use simplex::{solve_max, solve_max_checked, LpScalar, LpSolution, LpStatus};
pub use witness::{coherence_witness, verify_witness, CoherenceWitness, ExitKind, WitnessAtom};

use crate::measures::{MeasureError, ObsSpace, ProbMeasure, SeqIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DualityError {
    #[error("instance needs one branch list per outcome, got {got} for |Y| = {expected}")]
    BranchCount { got: usize, expected: usize },
    #[error("branch {y} has no candidate measures")]
    EmptyBranch { y: usize },
    #[error("branch {y} candidates must be distinct")]
    DuplicateCandidate { y: usize },
    #[error("candidate measure in branch {y} has horizon {got}, expected {expected}")]
    BadCandidateHorizon { y: usize, got: usize, expected: usize },
    #[error("target values must be nonnegative and match the branch shape")]
    BadTargets,
    #[error("branch {y}: {status:?} (first-observation conditional not representable)")]
    BranchNotSolvable { y: usize, status: LpStatus },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// One conditioning step of the duality check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityInstance {
    pub space: ObsSpace,
    /// First forecast, over `Y^N` with `N >= 2`.
    pub p: ProbMeasure,
    /// `branches[y]` lists the candidate next forecasts over `Y^{N-1}`.
    pub branches: Vec<Vec<ProbMeasure>>,
    /// `s[y][r] >= 0`: target first values.
    pub s: Vec<Vec<f64>>,
}

impl DualityInstance {
    pub fn validate(&self) -> Result<(), DualityError> {
        let y_count = self.space.size();
        if self.branches.len() != y_count || self.s.len() != y_count {
            return Err(DualityError::BranchCount {
                got: self.branches.len(),
                expected: y_count,
            });
        }
        let tail = self.p.horizon() - 1;
        for (y, list) in self.branches.iter().enumerate() {
            if list.is_empty() {
                return Err(DualityError::EmptyBranch { y });
            }
            for (i, q) in list.iter().enumerate() {
                if q.horizon() != tail {
                    return Err(DualityError::BadCandidateHorizon {
                        y,
                        got: q.horizon(),
                        expected: tail,
                    });
                }
                for other in &list[i + 1..] {
                    if q == other {
                        return Err(DualityError::DuplicateCandidate { y });
                    }
                }
            }
            if self.s[y].len() != list.len() || self.s[y].iter().any(|&v| v < 0.0 || !v.is_finite())
            {
                return Err(DualityError::BadTargets);
            }
        }
        Ok(())
    }

    fn tail_count(&self) -> usize {
        self.space.seq_count(self.p.horizon() - 1)
    }

    /// `P(x | y)` for every tail `x`, one row per `y`.
    fn conditional_rows(&self) -> Vec<Vec<f64>> {
        let tail = self.tail_count();
        (0..self.space.size())
            .map(|y| {
                let marg = self
                    .p
                    .marginal(SeqIndex { len: 1, code: y })
                    .expect("length 1");
                self.p.weights()[y * tail..(y + 1) * tail]
                    .iter()
                    .map(|&w| w / marg)
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl From<LpStatus> for SolveStatus {
    fn from(s: LpStatus) -> Self {
        match s {
            LpStatus::Optimal => SolveStatus::Optimal,
            LpStatus::Infeasible => SolveStatus::Infeasible,
            LpStatus::Unbounded => SolveStatus::Unbounded,
        }
    }
}

/// Measure-side solution: branch probabilities and the maximized
/// `P`-expectation of the first values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimalSolution {
    pub status: SolveStatus,
    /// `x[y][r]`: conditional probability of branch `r` after observing `y`.
    pub x: Vec<Vec<f64>>,
    pub objective: f64,
}

/// Betting-side solution: ticket counts `z[y][x]` (the sceptic move
/// `f_1(y x) = z[y][x]`) and the minimized total ticket price.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualSolution {
    pub status: SolveStatus,
    pub z: Vec<Vec<f64>>,
    pub objective: f64,
}

/// Maximize `sum_y P(y) sum_r S_{y,r} X_{y,r}` over branch probabilities
/// `X_{y,r} >= 0` with `sum_r X_{y,r} = 1` and
/// `sum_r X_{y,r} Q_r(x|y) = P(x|y)` for every tail `x`.
///
/// The per-branch subproblems are independent; infeasibility of any branch
/// means `P(.|y)` is not a mixture of that branch's candidates.
pub fn solve_primal(inst: &DualityInstance) -> Result<PrimalSolution, DualityError> {
    inst.validate()?;
    let tail = inst.tail_count();
    let cond = inst.conditional_rows();
    let mut xs = Vec::with_capacity(inst.space.size());
    let mut objective = 0.0;
    for (y, cond_row) in cond.iter().enumerate() {
        let r_count = inst.branches[y].len();
        // variables: X_r
        let c: Vec<f64> = inst.s[y].clone();
        let mut a: Vec<Vec<f64>> = Vec::with_capacity(tail + 1);
        let mut b: Vec<f64> = Vec::with_capacity(tail + 1);
        a.push(vec![1.0; r_count]);
        b.push(1.0);
        for (code, &cv) in cond_row.iter().enumerate() {
            a.push(
                inst.branches[y]
                    .iter()
                    .map(|q| q.weights()[code])
                    .collect(),
            );
            b.push(cv);
        }
        let sol = solve_max_checked(&c, &a, &b);
        if sol.status != LpStatus::Optimal {
            return Ok(PrimalSolution {
                status: sol.status.into(),
                x: Vec::new(),
                objective: 0.0,
            });
        }
        let py = inst.p.marginal(SeqIndex { len: 1, code: y })?;
        objective += py * sol.objective;
        xs.push(sol.x);
    }
    Ok(PrimalSolution {
        status: SolveStatus::Optimal,
        x: xs,
        objective,
    })
}

/// Minimize `sum_{y,x} P(yx) Z_{y,x}` subject to
/// `sum_x Q_r(x|y) Z_{y,x} >= S_{y,r}` for every `y, r`; the minimizer is
/// the ticket portfolio whose value after `(y, Q_r)` is at least `S_{y,r}`.
pub fn solve_dual(inst: &DualityInstance) -> Result<DualSolution, DualityError> {
    inst.validate()?;
    let tail = inst.tail_count();
    let mut zs = Vec::with_capacity(inst.space.size());
    let mut objective = 0.0;
    for y in 0..inst.space.size() {
        let r_count = inst.branches[y].len();
        // variables: Z_x split into positive/negative parts, plus one
        // surplus per branch constraint
        let vars = 2 * tail + r_count;
        let mut c = vec![0.0; vars];
        for code in 0..tail {
            let pyx = inst.p.weights()[y * tail + code];
            c[code] = -pyx; // minimize => maximize the negation
            c[tail + code] = pyx;
        }
        let mut a = Vec::with_capacity(r_count);
        let mut b = Vec::with_capacity(r_count);
        for (r, q) in inst.branches[y].iter().enumerate() {
            let mut row = vec![0.0; vars];
            for code in 0..tail {
                row[code] = q.weights()[code];
                row[tail + code] = -q.weights()[code];
            }
            row[2 * tail + r] = -1.0; // surplus
            a.push(row);
            b.push(inst.s[y][r]);
        }
        let sol = solve_max_checked(&c, &a, &b);
        if sol.status != LpStatus::Optimal {
            return Ok(DualSolution {
                status: sol.status.into(),
                z: Vec::new(),
                objective: 0.0,
            });
        }
        let z: Vec<f64> = (0..tail).map(|code| sol.x[code] - sol.x[tail + code]).collect();
        objective -= sol.objective;
        zs.push(z);
    }
    Ok(DualSolution {
        status: SolveStatus::Optimal,
        z: zs,
        objective,
    })
}

/// Replace each target by the value the dual tickets actually deliver:
/// `S'_{y,r} = sum_x Q_r(x|y) Z_{y,x} >= S_{y,r}`. The `P`-expectation of
/// `S'` equals the dual objective for every feasible branch-probability
/// choice, making `S'` the first value of a measure-side test martingale
/// up to scaling.
pub fn dominate_supermartingale(inst: &DualityInstance, z: &[Vec<f64>]) -> Vec<Vec<f64>> {
    inst.branches
        .iter()
        .enumerate()
        .map(|(y, list)| {
            list.iter()
                .map(|q| {
                    q.weights()
                        .iter()
                        .zip(&z[y])
                        .map(|(&qx, &zx)| qx * zx)
                        .sum()
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn binary() -> ObsSpace {
        ObsSpace::binary()
    }

    /// Instance whose conditionals are exact mixtures of the candidates,
    /// so the primal is feasible by construction.
    fn mixture_instance(seed: u64, branch_sizes: &[usize]) -> (DualityInstance, Vec<Vec<f64>>) {
        let space = binary();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let tail = 2usize; // N = 2: candidates over Y^1
        let mut branches = Vec::new();
        let mut weights_full = vec![0.0; 4];
        let mut mixes = Vec::new();
        let py = [rng.gen_range(0.2..0.8), 0.0];
        let py = [py[0], 1.0 - py[0]];
        for y in 0..2 {
            let count = branch_sizes[y % branch_sizes.len()];
            let mut list = Vec::new();
            for _ in 0..count {
                let w: Vec<f64> = (0..tail).map(|_| rng.gen_range(0.05..1.0)).collect();
                list.push(ProbMeasure::new(space.clone(), 1, w).unwrap());
            }
            let mut mix: Vec<f64> = (0..count).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = mix.iter().sum();
            mix.iter_mut().for_each(|v| *v /= total);
            for code in 0..tail {
                let cond: f64 = list
                    .iter()
                    .zip(&mix)
                    .map(|(q, &m)| m * q.weights()[code])
                    .sum();
                weights_full[y * tail + code] = py[y] * cond;
            }
            branches.push(list);
            mixes.push(mix);
        }
        let p = ProbMeasure::new(space.clone(), 2, weights_full).unwrap();
        let s: Vec<Vec<f64>> = branches
            .iter()
            .map(|list| list.iter().map(|_| rng.gen_range(0.0..2.0)).collect())
            .collect();
        (
            DualityInstance {
                space,
                p,
                branches,
                s,
            },
            mixes,
        )
    }

    #[test]
    fn single_candidate_forces_unit_probability() {
        let space = binary();
        let p = ProbMeasure::new(space.clone(), 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let branches = vec![
            vec![p.condition_on(0).unwrap()],
            vec![p.condition_on(1).unwrap()],
        ];
        let inst = DualityInstance {
            space,
            p,
            branches,
            s: vec![vec![1.0], vec![1.0]],
        };
        let sol = solve_primal(&inst).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!((sol.x[0][0] - 1.0).abs() < 1e-9);
        assert!((sol.x[1][0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_targets_give_zero_objectives() {
        let (mut inst, _) = mixture_instance(5, &[2, 3]);
        for row in &mut inst.s {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
        let p = solve_primal(&inst).unwrap();
        let d = solve_dual(&inst).unwrap();
        assert!(p.objective.abs() < 1e-9);
        assert!(d.objective.abs() < 1e-9);
    }

    #[test]
    fn constant_one_targets_solved_by_unit_tickets() {
        let (mut inst, _) = mixture_instance(6, &[2]);
        for row in &mut inst.s {
            row.iter_mut().for_each(|v| *v = 1.0);
        }
        let d = solve_dual(&inst).unwrap();
        assert_eq!(d.status, SolveStatus::Optimal);
        assert!((d.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_candidate_midpoint_averages_targets() {
        // P(.|y) the midpoint of two candidates: X = (1/2, 1/2) is the only
        // feasible point, so the optimum is the plain average of the targets
        let space = binary();
        let q0 = ProbMeasure::new(space.clone(), 1, vec![0.2, 0.8]).unwrap();
        let q1 = ProbMeasure::new(space.clone(), 1, vec![0.6, 0.4]).unwrap();
        let mid: Vec<f64> = q0
            .weights()
            .iter()
            .zip(q1.weights())
            .map(|(&a, &b)| 0.5 * (a + b))
            .collect();
        let mut weights = vec![0.0; 4];
        for y in 0..2 {
            for code in 0..2 {
                weights[y * 2 + code] = 0.5 * mid[code];
            }
        }
        let p = ProbMeasure::new(space.clone(), 2, weights).unwrap();
        let inst = DualityInstance {
            space,
            p,
            branches: vec![vec![q0.clone(), q1.clone()], vec![q0, q1]],
            s: vec![vec![0.0, 2.0], vec![0.0, 2.0]],
        };
        let sol = solve_primal(&inst).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn strong_duality_on_random_instances() {
        for seed in 0..60u64 {
            let (inst, _) = mixture_instance(seed, &[2, 3, 1]);
            let p = solve_primal(&inst).unwrap();
            let d = solve_dual(&inst).unwrap();
            assert_eq!(p.status, SolveStatus::Optimal);
            assert_eq!(d.status, SolveStatus::Optimal);
            assert!(
                (p.objective - d.objective).abs() < 1e-9,
                "gap {} at seed {seed}",
                p.objective - d.objective
            );
            // weak duality holds with slack for any feasible pair
            assert!(d.objective >= p.objective - 1e-9);
        }
    }

    #[test]
    fn dominated_targets_have_constant_expectation() {
        for seed in 0..20u64 {
            let (inst, mixes) = mixture_instance(seed ^ 0xd00d, &[2, 3]);
            let d = solve_dual(&inst).unwrap();
            let dominated = dominate_supermartingale(&inst, &d.z);
            for (drow, srow) in dominated.iter().zip(&inst.s) {
                for (dv, sv) in drow.iter().zip(srow) {
                    assert!(dv >= &(sv - 1e-9));
                }
            }
            // P-expectation under the generating mixture equals the dual
            // objective: it does not depend on the branch probabilities
            let mut expect = 0.0;
            for y in 0..2 {
                let py = inst.p.marginal(SeqIndex { len: 1, code: y }).unwrap();
                for (r, &m) in mixes[y].iter().enumerate() {
                    expect += py * m * dominated[y][r];
                }
            }
            assert!((expect - d.objective).abs() < 1e-9);
        }
    }

    #[test]
    fn infeasible_when_conditional_outside_hull() {
        let space = binary();
        // candidates put at most 0.3 on outcome 0, but P(0|y) = 0.5
        let q = ProbMeasure::new(space.clone(), 1, vec![0.3, 0.7]).unwrap();
        let p = ProbMeasure::uniform(space.clone(), 2);
        let inst = DualityInstance {
            space,
            p,
            branches: vec![vec![q.clone()], vec![q]],
            s: vec![vec![1.0], vec![1.0]],
        };
        let sol = solve_primal(&inst).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }
}
