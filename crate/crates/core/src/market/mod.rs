//! Binary-futures market microstructure: a price-time priority order book,
//! fixed-price bundles, settlement, and an adapter that routes a sceptic's
//! ideal ticket trades through books.
//!
//! Prices are quantized to 1e-4 ticks and all cash is integer tick-units
//! (1 unit = one ten-thousandth of the payoff currency), so conservation
//! checks are exact integer identities.

mod adapter;
mod book;
mod session;

pub use adapter::{replay_ideal_trades, AdapterReport};
pub use book::{Fill, OrderBook, OrderId, RestingOrder, Side};
pub use session::{ContractSpec, MarketSession, ParticipantId};

use thiserror::Error;

/// Ticks per unit payoff: prices live on the open interval (0, 1) in steps
/// of 1e-4, i.e. tick values 1..=9999.
pub const TICKS_PER_UNIT: u32 = 10_000;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("price {0} ticks outside the open interval (0, {TICKS_PER_UNIT})")]
    PriceOutOfRange(u32),
    #[error("quantity must be positive")]
    ZeroQuantity,
    #[error("limit {side:?} at {price} ticks crosses the book (best opposite {best}); use a market order")]
    CrossingLimit { side: Side, price: u32, best: u32 },
    #[error("unknown contract {0}")]
    UnknownContract(String),
    #[error("unknown bundle {0}")]
    UnknownBundle(String),
    #[error("contract {0} already settled")]
    AlreadySettled(String),
    #[error("book invariant violated: {0}")]
    InvariantBroken(String),
    #[error("value {0} is not representable on the tick grid")]
    NotOnGrid(f64),
    #[error("adapter requires integral ticket quantities, got {0}")]
    FractionalQuantity(f64),
    #[error("adapter supports completed full-horizon plays, got {0}")]
    UnsupportedTranscript(String),
}

/// Quantize a price in (0,1) to ticks; errors when it is off-grid.
pub fn price_to_ticks(price: f64) -> Result<u32, MarketError> {
    let scaled = price * TICKS_PER_UNIT as f64;
    let ticks = scaled.round();
    if (scaled - ticks).abs() > 1e-6 {
        return Err(MarketError::NotOnGrid(price));
    }
    let t = ticks as i64;
    if t <= 0 || t >= TICKS_PER_UNIT as i64 {
        return Err(MarketError::PriceOutOfRange(t.max(0) as u32));
    }
    Ok(t as u32)
}
