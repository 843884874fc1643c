//! Contracts, positions, bundles, and settlement around the order books.

use super::{Fill, MarketError, OrderBook, Side, TICKS_PER_UNIT};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

pub type ParticipantId = u32;

/// The participant credited with bundle issuance and the matching short
/// positions; settlement nets out against it.
pub const ISSUER: ParticipantId = 0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractSpec {
    pub id: String,
    /// Step at which the final price is announced.
    pub expiration_step: u64,
}

/// Books, integer positions, and integer cash (in ticks) per participant.
#[derive(Debug, Default)]
pub struct MarketSession {
    contracts: BTreeMap<String, ContractSpec>,
    books: BTreeMap<String, OrderBook>,
    /// bundles: id -> member contracts whose payoffs sum to one
    bundles: BTreeMap<String, Vec<String>>,
    positions: BTreeMap<(ParticipantId, String), i64>,
    cash: BTreeMap<ParticipantId, i128>,
    settled: HashSet<String>,
}

impl MarketSession {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_contract(&mut self, spec: ContractSpec) {
        self.books.insert(spec.id.clone(), OrderBook::new());
        self.contracts.insert(spec.id.clone(), spec);
    }

    pub fn define_bundle(&mut self, id: &str, members: Vec<String>) {
        self.bundles.insert(id.to_string(), members);
    }

    pub fn book_mut(&mut self, contract: &str) -> Result<&mut OrderBook, MarketError> {
        self.books
            .get_mut(contract)
            .ok_or_else(|| MarketError::UnknownContract(contract.to_string()))
    }

    pub fn book(&self, contract: &str) -> Result<&OrderBook, MarketError> {
        self.books
            .get(contract)
            .ok_or_else(|| MarketError::UnknownContract(contract.to_string()))
    }

    pub fn position(&self, who: ParticipantId, contract: &str) -> i64 {
        *self
            .positions
            .get(&(who, contract.to_string()))
            .unwrap_or(&0)
    }

    pub fn cash_ticks(&self, who: ParticipantId) -> i128 {
        *self.cash.get(&who).unwrap_or(&0)
    }

    pub fn deposit(&mut self, who: ParticipantId, ticks: i128) {
        *self.cash.entry(who).or_insert(0) += ticks;
    }

    fn shift_position(&mut self, who: ParticipantId, contract: &str, delta: i64) {
        *self
            .positions
            .entry((who, contract.to_string()))
            .or_insert(0) += delta;
    }

    /// Book a matched trade: the taker exchanges cash for position against
    /// each maker fill.
    pub fn apply_fills(
        &mut self,
        contract: &str,
        taker: ParticipantId,
        taker_side: Side,
        fills: &[Fill],
    ) {
        for f in fills {
            let qty = f.qty as i64;
            let value = f.qty as i128 * f.price_ticks as i128;
            match taker_side {
                Side::Buy => {
                    self.shift_position(taker, contract, qty);
                    self.shift_position(f.maker_owner, contract, -qty);
                    *self.cash.entry(taker).or_insert(0) -= value;
                    *self.cash.entry(f.maker_owner).or_insert(0) += value;
                }
                Side::Sell => {
                    self.shift_position(taker, contract, -qty);
                    self.shift_position(f.maker_owner, contract, qty);
                    *self.cash.entry(taker).or_insert(0) += value;
                    *self.cash.entry(f.maker_owner).or_insert(0) -= value;
                }
            }
        }
    }

    /// Buy `count` fixed-price bundles: one tick-unit dollar per bundle
    /// buys one of each member contract; the issuer takes the short side.
    pub fn issue_bundle(
        &mut self,
        bundle: &str,
        buyer: ParticipantId,
        count: u64,
    ) -> Result<(), MarketError> {
        let members = self
            .bundles
            .get(bundle)
            .cloned()
            .ok_or_else(|| MarketError::UnknownBundle(bundle.to_string()))?;
        if count == 0 {
            return Ok(());
        }
        let price = count as i128 * TICKS_PER_UNIT as i128;
        *self.cash.entry(buyer).or_insert(0) -= price;
        *self.cash.entry(ISSUER).or_insert(0) += price;
        for m in members {
            self.shift_position(buyer, &m, count as i64);
            self.shift_position(ISSUER, &m, -(count as i64));
        }
        Ok(())
    }

    /// Announce the final price `F in {0, 1}` and pay every position out;
    /// positions in the contract are zeroed.
    pub fn settle(&mut self, contract: &str, payoff_one: bool) -> Result<(), MarketError> {
        if !self.contracts.contains_key(contract) {
            return Err(MarketError::UnknownContract(contract.to_string()));
        }
        if !self.settled.insert(contract.to_string()) {
            return Err(MarketError::AlreadySettled(contract.to_string()));
        }
        let holders: Vec<(ParticipantId, i64)> = self
            .positions
            .iter()
            .filter(|((_, c), _)| c == contract)
            .map(|(&(who, _), &p)| (who, p))
            .collect();
        for (who, p) in holders {
            if payoff_one {
                *self.cash.entry(who).or_insert(0) += p as i128 * TICKS_PER_UNIT as i128;
            }
            self.positions.insert((who, contract.to_string()), 0);
        }
        Ok(())
    }

    /// Net position across all participants; zero for every contract under
    /// conservation.
    pub fn net_position(&self, contract: &str) -> i64 {
        self.positions
            .iter()
            .filter(|((_, c), _)| c == contract)
            .map(|(_, &p)| p)
            .sum()
    }

    /// Total cash across participants; constant (zero if nobody deposited).
    pub fn net_cash(&self) -> i128 {
        self.cash.values().sum()
    }

    pub fn contracts(&self) -> impl Iterator<Item = &ContractSpec> {
        self.contracts.values()
    }
}
