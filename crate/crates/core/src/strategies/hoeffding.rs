//! The regret-certifying sceptic for the decision protocol.
//!
//! Construction: the steps `1..=N-K+1` split into `K` residue classes; in
//! class `k` the running sum of realized loss differences
//! `loss(best-response, window) - loss(actual, window)` over blocks
//! `k, k+K, ...` is a supermartingale with increments in `[-1, 1]` whenever
//! the actual decision prices the announced forecast no worse than the
//! expected-loss minimizer. Wrapping each class sum in exponential
//! supermartingales `exp(kappa X - kappa^2 q / 2)` at a grid of thresholds
//! `U_j = gamma C / K + (1 - gamma) C j dx` and mixing them with weights
//! `dx pi_j`, `pi_j = exp(-U_j^2 K / (2N))`, yields a capital process that
//! starts at 1, never goes negative, and reaches at least `1/W >= 1/eps`
//! on every play whose total regret meets the threshold
//! `C = 2 sqrt(K N ln(1/eps))`.
//!
//! The sum inequality over the piecewise-linear envelope `g` guarantees the
//! dichotomy: regret at least `C` forces `sum_k g(X_k) >= 1`, and each grid
//! cell below `g(X_k)` contributes a paid-out component. The grid width is
//! sized so the total initial stake `W` stays at or below `eps`; the looser
//! the chain bound at these parameters, the finer the grid.

use super::{bayes_decision, StrategyError};
use crate::bounds::regret_chain_bound;
use crate::engine::{PlayState, Sceptic, TicketPortfolio};
use crate::measures::SeqIndex;

/// Which exponential wrapper the class processes use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoeffdingSide {
    /// Raw loss differences: increments in `[-1, 1]` with nonpositive
    /// conditional mean; factor `exp(kappa v - kappa^2 / 2)`. Certifies
    /// the threshold `2 sqrt(K N ln(1/eps))`.
    OneSided,
    /// Compensated differences: increments in `[-2, 2]` with zero
    /// conditional mean; factor `exp(kappa z - 2 kappa^2)`. The rate is
    /// four times weaker in the exponent, so the certified threshold
    /// doubles to `4 sqrt(K N ln(1/eps))`.
    TwoSided,
}

struct OpenBlock {
    start: usize,
    /// index into the distinct-increment tables for every full-window code
    v_of_code: Vec<u32>,
    /// `exp_cols[vi][j]` = exponential factor of component `j` at value `vi`
    exp_cols: Vec<std::sync::Arc<Vec<f64>>>,
    /// `E[factor_j]` under the forecast at the block start
    e_of_j: Vec<f64>,
    /// aggregated ticket value per distinct increment value
    claim_by_v: Vec<f64>,
}

struct ClassState {
    factors: Vec<f64>,
    blocks_done: usize,
    open: Option<OpenBlock>,
}

/// See the module docs. One instance drives one play.
pub struct HoeffdingSceptic {
    k: usize,
    n_steps: usize,
    side: HoeffdingSide,
    threshold: f64,
    kappas: Vec<f64>,
    stakes: Vec<f64>,
    total_stake: f64,
    classes: Vec<ClassState>,
    blocks_per_class: usize,
    /// exponential factors of all components at one increment value, keyed
    /// by the value's bits; realized losses revisit few distinct values
    exp_cache: std::collections::HashMap<u64, std::sync::Arc<Vec<f64>>>,
}

impl HoeffdingSceptic {
    /// Default chain parameter `gamma = 0.8`, which admits every
    /// `eps` in (0, 0.32) on the one-sided rate.
    pub fn new(k: usize, n_steps: usize, eps: f64, side: HoeffdingSide) -> Result<Self, StrategyError> {
        Self::with_gamma(k, n_steps, eps, 0.8, side)
    }

    pub fn with_gamma(
        k: usize,
        n_steps: usize,
        eps: f64,
        gamma: f64,
        side: HoeffdingSide,
    ) -> Result<Self, StrategyError> {
        if !(0.0 < eps && eps < 0.32) {
            return Err(StrategyError::InvalidArgument(format!(
                "eps={eps} outside (0, 0.32)"
            )));
        }
        if !(0.0 < gamma && gamma < 1.0) {
            return Err(StrategyError::InvalidArgument(format!(
                "gamma={gamma} outside (0, 1)"
            )));
        }
        if k == 0 || k > n_steps {
            return Err(StrategyError::InvalidArgument(format!(
                "need 1 <= K <= N, got K={k}, N={n_steps}"
            )));
        }
        let kf = k as f64;
        let nf = n_steps as f64;
        // per-side regret threshold: the two-sided exponent is four times
        // weaker, and doubling C makes its stake budget match exactly
        let c = match side {
            HoeffdingSide::OneSided => 2.0 * (kf * nf * (1.0 / eps).ln()).sqrt(),
            HoeffdingSide::TwoSided => 4.0 * (kf * nf * (1.0 / eps).ln()).sqrt(),
        };
        // initial-stake budget estimate used to size the threshold grid
        let chain = match side {
            HoeffdingSide::OneSided => regret_chain_bound(c, k, n_steps, gamma)
                .map_err(|e| StrategyError::InvalidArgument(e.to_string()))?,
            HoeffdingSide::TwoSided => {
                4.0 * kf * nf / (gamma * (1.0 - gamma) * c * c)
                    * (-gamma * gamma * c * c / (8.0 * kf * nf)).exp()
            }
        };
        if chain >= eps {
            return Err(StrategyError::InvalidArgument(format!(
                "chain bound {chain} at eps={eps} leaves no stake budget; \
                 eps is outside this side's admissible range"
            )));
        }
        let dx = (eps - chain) / (2.0 * kf);
        let grid_count = (1.0 / dx).floor() as usize;
        let mut kappas = Vec::with_capacity(grid_count);
        let mut prices = Vec::with_capacity(grid_count);
        for j in 1..=grid_count {
            let u = gamma * c / kf + (1.0 - gamma) * c * (j as f64) * dx;
            let (kappa, price) = match side {
                HoeffdingSide::OneSided => (u * kf / nf, (-u * u * kf / (2.0 * nf)).exp()),
                HoeffdingSide::TwoSided => (u * kf / (4.0 * nf), (-u * u * kf / (8.0 * nf)).exp()),
            };
            kappas.push(kappa);
            prices.push(price);
        }
        // W = K dx (1 + sum_j pi_j); the cash cell j=0 pays the g >= 0 floor
        let total_stake = kf * dx * (1.0 + prices.iter().sum::<f64>());
        debug_assert!(total_stake <= eps + 1e-12);
        let stakes: Vec<f64> = prices.iter().map(|p| dx * p / total_stake).collect();
        let classes = (0..k)
            .map(|_| ClassState {
                factors: vec![1.0; grid_count],
                blocks_done: 0,
                open: None,
            })
            .collect();
        Ok(Self {
            k,
            n_steps,
            side,
            threshold: c,
            kappas,
            stakes,
            total_stake,
            classes,
            blocks_per_class: n_steps / k,
            exp_cache: std::collections::HashMap::new(),
        })
    }

    fn exp_column(&mut self, v: f64) -> std::sync::Arc<Vec<f64>> {
        let side = self.side;
        let kappas = &self.kappas;
        self.exp_cache
            .entry(v.to_bits())
            .or_insert_with(|| {
                std::sync::Arc::new(
                    kappas
                        .iter()
                        .map(|&kappa| {
                            let offset = match side {
                                HoeffdingSide::OneSided => kappa * kappa / 2.0,
                                HoeffdingSide::TwoSided => 2.0 * kappa * kappa,
                            };
                            (kappa * v - offset).exp()
                        })
                        .collect(),
                )
            })
            .clone()
    }

    /// Capital level certified on threshold-violating plays: `1/W >= 1/eps`.
    pub fn certificate_level(&self) -> f64 {
        1.0 / self.total_stake
    }

    /// Regret level at which the certificate is guaranteed to pay.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn close_finished_blocks(&mut self, play: &PlayState, n: usize) {
        let space = &play.config.space;
        for class in &mut self.classes {
            let finished = class
                .open
                .as_ref()
                .is_some_and(|ob| ob.start + self.k <= n);
            if finished {
                let ob = class.open.take().expect("checked above");
                let window =
                    SeqIndex::from_outcomes(space, &play.outcomes[ob.start - 1..ob.start - 1 + self.k])
                        .expect("window realized");
                let vi = ob.v_of_code[window.code] as usize;
                let col = &ob.exp_cols[vi];
                for (j, f) in class.factors.iter_mut().enumerate() {
                    // invest the whole component, keep the unspent cash:
                    // factor *= 1 + h(realized) - E[h]
                    *f *= 1.0 + col[j] - ob.e_of_j[j];
                }
                class.blocks_done += 1;
            }
        }
    }

    fn open_block(&mut self, play: &PlayState, n: usize) {
        let class_idx = (n - 1) % self.k;
        if n > self.n_steps - self.k + 1 {
            return; // window would not fit; class freezes at its last value
        }
        if self.classes[class_idx].blocks_done >= self.blocks_per_class {
            return;
        }
        debug_assert!(self.classes[class_idx].open.is_none());

        let space = &play.config.space;
        let loss = play.losses.last().expect("loss precedes sceptic move");
        let p = play.forecasts.last().expect("forecast precedes sceptic move");
        let d_actual = *play.decisions.last().expect("decision precedes sceptic move");
        let d_best = bayes_decision(loss, p);
        debug_assert_eq!(loss.horizon(), self.k);

        let count = space.seq_count(self.k);
        let best_row = loss.row(d_best);
        let actual_row = loss.row(d_actual);
        let center = match self.side {
            HoeffdingSide::OneSided => 0.0,
            HoeffdingSide::TwoSided => best_row
                .iter()
                .zip(actual_row)
                .zip(p.weights())
                .map(|((&b, &a), &w)| (b - a) * w)
                .sum(),
        };

        // deduplicate increment values and accumulate their forecast mass
        let mut v_values: Vec<f64> = Vec::new();
        let mut v_mass: Vec<f64> = Vec::new();
        let mut v_of_code = Vec::with_capacity(count);
        for code in 0..count {
            let v = best_row[code] - actual_row[code] - center;
            let idx = match v_values.iter().position(|&x| x.to_bits() == v.to_bits()) {
                Some(i) => i,
                None => {
                    v_values.push(v);
                    v_mass.push(0.0);
                    v_values.len() - 1
                }
            };
            v_mass[idx] += p.weights()[code];
            v_of_code.push(idx as u32);
        }

        let grid_count = self.kappas.len();
        let exp_cols: Vec<std::sync::Arc<Vec<f64>>> =
            v_values.iter().map(|&v| self.exp_column(v)).collect();
        let mut e_of_j = vec![0.0; grid_count];
        for (col, &m) in exp_cols.iter().zip(&v_mass) {
            for (e, &h) in e_of_j.iter_mut().zip(col.iter()) {
                *e += h * m;
            }
        }

        let class = &self.classes[class_idx];
        let claim_by_v: Vec<f64> = exp_cols
            .iter()
            .map(|col| {
                (0..grid_count)
                    .map(|j| self.stakes[j] * class.factors[j] * col[j])
                    .sum()
            })
            .collect();

        self.classes[class_idx].open = Some(OpenBlock {
            start: n,
            v_of_code,
            exp_cols,
            e_of_j,
            claim_by_v,
        });
    }
}

impl Sceptic for HoeffdingSceptic {
    fn tickets(&mut self, play: &PlayState, len: usize) -> TicketPortfolio {
        let space = &play.config.space;
        let n = play.step();
        self.close_finished_blocks(play, n);
        self.open_block(play, n);

        let mut f = TicketPortfolio::zero(space, len);
        for class in &self.classes {
            let Some(ob) = &class.open else { continue };
            let rem = ob.start + self.k - n; // unresolved window coordinates
            debug_assert!(rem >= 1 && rem <= len);
            let pad = space.seq_count(len - rem);
            let prefix =
                SeqIndex::from_outcomes(space, &play.outcomes[ob.start - 1..n - 1])
                    .expect("observed block prefix");
            let head_count = space.seq_count(rem);
            let base = prefix.code * head_count;
            for head in 0..head_count {
                let val = ob.claim_by_v[ob.v_of_code[base + head] as usize];
                if val != 0.0 {
                    let lo = head * pad;
                    for slot in &mut f.values[lo..lo + pad] {
                        *slot += val;
                    }
                }
            }
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_domain_checks() {
        assert!(HoeffdingSceptic::new(7, 1000, 0.1, HoeffdingSide::OneSided).is_ok());
        assert!(HoeffdingSceptic::new(7, 1000, 0.32, HoeffdingSide::OneSided).is_err());
        assert!(HoeffdingSceptic::new(7, 1000, 0.0, HoeffdingSide::OneSided).is_err());
        assert!(HoeffdingSceptic::new(0, 1000, 0.1, HoeffdingSide::OneSided).is_err());
        assert!(HoeffdingSceptic::with_gamma(7, 1000, 0.1, 1.0, HoeffdingSide::OneSided).is_err());
    }

    #[test]
    fn certificate_level_covers_one_over_eps() {
        for &eps in &[0.01, 0.05, 0.1, 0.2, 0.31] {
            let s = HoeffdingSceptic::new(5, 500, eps, HoeffdingSide::OneSided).unwrap();
            assert!(s.certificate_level() >= 1.0 / eps);
        }
        // the two-sided rate admits small eps only
        let s = HoeffdingSceptic::new(3, 500, 0.01, HoeffdingSide::TwoSided).unwrap();
        assert!(s.certificate_level() >= 100.0);
    }

    #[test]
    fn exponential_factor_has_subunit_expectation() {
        // one-step check over a grid of two-point increment distributions
        // with nonpositive mean and values in [-1, 1]: the capital factor
        // exp(kappa X - kappa^2/2) prices at no more than 1
        let mut worst: f64 = 0.0;
        for ai in 0..10 {
            for bi in 0..10 {
                let a = -1.0 + ai as f64 / 9.0; // in [-1, 0]
                let b = bi as f64 / 9.0; // in [0, 1]
                for pi in 1..10 {
                    let p = pi as f64 / 10.0; // P(X = b)
                    let mean = (1.0 - p) * a + p * b;
                    if mean > 0.0 {
                        continue;
                    }
                    for ki in 1..=10 {
                        let kappa = ki as f64 * 0.3;
                        let e = (1.0 - p) * (kappa * a - kappa * kappa / 2.0).exp()
                            + p * (kappa * b - kappa * kappa / 2.0).exp();
                        worst = worst.max(e);
                    }
                }
            }
        }
        assert!(worst <= 1.0 + 1e-12, "worst expectation {worst}");
    }
}
