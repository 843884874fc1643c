//! The order book: bid and ask price levels with FIFO queues.

use super::{MarketError, TICKS_PER_UNIT};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub type OrderId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Buy,
    Sell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestingOrder {
    pub id: OrderId,
    pub qty: u64,
    /// Logical submission counter; within a level older orders fill first.
    pub timestamp: u64,
    /// Inclusive expiry: the order is removed once `now >= expiry`... the
    /// removal rule is `expiry <= now`.
    pub expiry: Option<u64>,
    pub owner: u32,
}

/// One fill produced by matching a market order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fill {
    pub maker_id: OrderId,
    pub maker_owner: u32,
    pub price_ticks: u32,
    pub qty: u64,
    pub maker_timestamp: u64,
}

/// Price levels with FIFO queues on both sides. Level ordering is the map
/// key order; the strict-ordering invariant is structural, the positive
/// bid/ask spread is enforced at insertion.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OrderBook {
    bids: BTreeMap<u32, Vec<RestingOrder>>,
    asks: BTreeMap<u32, Vec<RestingOrder>>,
    next_id: OrderId,
    clock: u64,
}

impl OrderBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn best_bid(&self) -> Option<u32> {
        self.bids.keys().next_back().copied()
    }

    pub fn best_ask(&self) -> Option<u32> {
        self.asks.keys().next().copied()
    }

    /// Resting orders `(id, qty, timestamp)` at a level, oldest first.
    pub fn level_orders(&self, side: Side, price: u32) -> Vec<(OrderId, u64, u64)> {
        let level = match side {
            Side::Buy => self.bids.get(&price),
            Side::Sell => self.asks.get(&price),
        };
        level
            .map(|q| q.iter().map(|o| (o.id, o.qty, o.timestamp)).collect())
            .unwrap_or_default()
    }

    /// Total resting quantity at a price level.
    pub fn level_quantity(&self, side: Side, price: u32) -> u64 {
        let level = match side {
            Side::Buy => self.bids.get(&price),
            Side::Sell => self.asks.get(&price),
        };
        level.map_or(0, |q| q.iter().map(|o| o.qty).sum())
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty() && self.asks.is_empty()
    }

    /// Add a limit order. Prices must sit strictly inside the opposite
    /// best: a crossing limit is rejected and should be re-sent as a
    /// market order.
    pub fn submit_limit(
        &mut self,
        side: Side,
        price: u32,
        qty: u64,
        expiry: Option<u64>,
        owner: u32,
    ) -> Result<OrderId, MarketError> {
        if price == 0 || price >= TICKS_PER_UNIT {
            return Err(MarketError::PriceOutOfRange(price));
        }
        if qty == 0 {
            return Err(MarketError::ZeroQuantity);
        }
        match side {
            Side::Buy => {
                if let Some(best) = self.best_ask() {
                    if price >= best {
                        return Err(MarketError::CrossingLimit { side, price, best });
                    }
                }
            }
            Side::Sell => {
                if let Some(best) = self.best_bid() {
                    if price <= best {
                        return Err(MarketError::CrossingLimit { side, price, best });
                    }
                }
            }
        }
        let id = self.next_id;
        self.next_id += 1;
        let ts = self.clock;
        self.clock += 1;
        let order = RestingOrder {
            id,
            qty,
            timestamp: ts,
            expiry,
            owner,
        };
        match side {
            Side::Buy => self.bids.entry(price).or_default().push(order),
            Side::Sell => self.asks.entry(price).or_default().push(order),
        }
        Ok(id)
    }

    /// Match a market order against the opposite queue, best price first,
    /// oldest order first within a level; the marginal order may fill
    /// partially. When the book runs out, the remainder lapses.
    pub fn submit_market(&mut self, side: Side, qty: u64) -> Result<Vec<Fill>, MarketError> {
        if qty == 0 {
            return Err(MarketError::ZeroQuantity);
        }
        let mut remaining = qty;
        let mut fills = Vec::new();
        // a market buy consumes asks from the bottom, a sell consumes bids
        // from the top
        loop {
            if remaining == 0 {
                break;
            }
            let price = match side {
                Side::Buy => self.best_ask(),
                Side::Sell => self.best_bid(),
            };
            let Some(price) = price else { break };
            let queue = match side {
                Side::Buy => self.asks.get_mut(&price).expect("level exists"),
                Side::Sell => self.bids.get_mut(&price).expect("level exists"),
            };
            while remaining > 0 && !queue.is_empty() {
                let take = remaining.min(queue[0].qty);
                fills.push(Fill {
                    maker_id: queue[0].id,
                    maker_owner: queue[0].owner,
                    price_ticks: price,
                    qty: take,
                    maker_timestamp: queue[0].timestamp,
                });
                queue[0].qty -= take;
                remaining -= take;
                if queue[0].qty == 0 {
                    queue.remove(0);
                }
            }
            if queue.is_empty() {
                match side {
                    Side::Buy => self.asks.remove(&price),
                    Side::Sell => self.bids.remove(&price),
                };
            }
        }
        Ok(fills)
    }

    /// Remove all orders with `expiry <= now`; empty levels disappear.
    pub fn expire_orders(&mut self, now: u64) -> Vec<OrderId> {
        let mut removed = Vec::new();
        for table in [&mut self.bids, &mut self.asks] {
            let mut empty_levels = Vec::new();
            for (&price, queue) in table.iter_mut() {
                queue.retain(|o| {
                    let dead = o.expiry.is_some_and(|e| e <= now);
                    if dead {
                        removed.push(o.id);
                    }
                    !dead
                });
                if queue.is_empty() {
                    empty_levels.push(price);
                }
            }
            for price in empty_levels {
                table.remove(&price);
            }
        }
        removed.sort_unstable();
        removed
    }

    /// Cancel one resting order by id.
    pub fn cancel(&mut self, id: OrderId) -> bool {
        for table in [&mut self.bids, &mut self.asks] {
            let mut hit_level = None;
            for (&price, queue) in table.iter_mut() {
                if let Some(pos) = queue.iter().position(|o| o.id == id) {
                    queue.remove(pos);
                    if queue.is_empty() {
                        hit_level = Some(price);
                    }
                    if let Some(p) = hit_level {
                        table.remove(&p);
                    }
                    return true;
                }
            }
        }
        false
    }

    /// Structural validity: no empty levels, FIFO timestamps within each
    /// level, positive spread when both sides are populated.
    pub fn check_invariants(&self) -> Result<(), MarketError> {
        for (label, table) in [("bid", &self.bids), ("ask", &self.asks)] {
            for (price, queue) in table {
                if queue.is_empty() {
                    return Err(MarketError::InvariantBroken(format!(
                        "empty {label} level {price}"
                    )));
                }
                for pair in queue.windows(2) {
                    if pair[0].timestamp >= pair[1].timestamp {
                        return Err(MarketError::InvariantBroken(format!(
                            "{label} level {price} out of FIFO order"
                        )));
                    }
                }
            }
        }
        if let (Some(b), Some(a)) = (self.best_bid(), self.best_ask()) {
            if b >= a {
                return Err(MarketError::InvariantBroken(format!(
                    "best bid {b} >= best ask {a}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn market_sell_walks_bid_levels_fifo() {
        // sell 5 against bids {0.6: 3, 0.5: 4}: 3 @ 0.6 then 2 @ 0.5,
        // and level 0.5 keeps 2
        let mut book = OrderBook::new();
        book.submit_limit(Side::Buy, 6000, 3, None, 1).unwrap();
        book.submit_limit(Side::Buy, 5000, 4, None, 2).unwrap();
        let fills = book.submit_market(Side::Sell, 5).unwrap();
        assert_eq!(fills.len(), 2);
        assert_eq!((fills[0].price_ticks, fills[0].qty), (6000, 3));
        assert_eq!((fills[1].price_ticks, fills[1].qty), (5000, 2));
        assert_eq!(book.level_quantity(Side::Buy, 5000), 2);
        book.check_invariants().unwrap();
    }

    #[test]
    fn market_order_lapses_when_book_runs_out() {
        let mut book = OrderBook::new();
        book.submit_limit(Side::Buy, 6000, 3, None, 1).unwrap();
        book.submit_limit(Side::Buy, 5500, 4, None, 1).unwrap();
        let fills = book.submit_market(Side::Sell, 10).unwrap();
        let filled: u64 = fills.iter().map(|f| f.qty).sum();
        assert_eq!(filled, 7);
        assert!(book.is_empty());
    }

    #[test]
    fn empty_book_yields_zero_fills() {
        let mut book = OrderBook::new();
        let fills = book.submit_market(Side::Sell, 5).unwrap();
        assert!(fills.is_empty());
        assert!(book.is_empty());
    }

    #[test]
    fn zero_quantity_rejected() {
        let mut book = OrderBook::new();
        assert!(book.submit_market(Side::Sell, 0).is_err());
        assert!(book.submit_limit(Side::Buy, 4000, 0, None, 1).is_err());
    }

    #[test]
    fn fifo_within_level() {
        let mut book = OrderBook::new();
        let first = book.submit_limit(Side::Buy, 4000, 2, None, 1).unwrap();
        let second = book.submit_limit(Side::Buy, 4000, 2, None, 2).unwrap();
        let fills = book.submit_market(Side::Sell, 3).unwrap();
        assert_eq!(fills[0].maker_id, first);
        assert_eq!(fills[0].qty, 2);
        assert_eq!(fills[1].maker_id, second);
        assert_eq!(fills[1].qty, 1);
    }

    #[test]
    fn crossing_limits_rejected() {
        let mut book = OrderBook::new();
        book.submit_limit(Side::Sell, 5000, 1, None, 1).unwrap();
        // at or above the best ask
        assert!(matches!(
            book.submit_limit(Side::Buy, 5000, 1, None, 2),
            Err(MarketError::CrossingLimit { .. })
        ));
        assert!(matches!(
            book.submit_limit(Side::Buy, 5500, 1, None, 2),
            Err(MarketError::CrossingLimit { .. })
        ));
        book.submit_limit(Side::Buy, 4900, 1, None, 2).unwrap();
        book.check_invariants().unwrap();
    }

    #[test]
    fn expiry_is_inclusive_and_promotes_next_level() {
        let mut book = OrderBook::new();
        let a = book.submit_limit(Side::Buy, 6000, 1, Some(5), 1).unwrap();
        book.submit_limit(Side::Buy, 5000, 1, None, 1).unwrap();
        assert_eq!(book.expire_orders(4), Vec::<OrderId>::new());
        assert_eq!(book.expire_orders(5), vec![a]);
        assert_eq!(book.best_bid(), Some(5000));
        book.check_invariants().unwrap();
    }
}
