//! C ABI for the gtsim workbench.
//!
//! Conventions:
//! - every fallible call returns a [`GtsimStatus`] code and writes results
//!   through out-pointers;
//! - heap objects cross the boundary as opaque handles with paired
//!   `_new`/`_free` functions;
//! - strings returned by the library are NUL-terminated, UTF-8, and must be
//!   released with [`gtsim_string_free`];
//! - the most recent error message is retrievable per thread via
//!   [`gtsim_last_error`].

use gtsim::bounds;
use gtsim::harness::{run_counter_example_exact, run_theorem_optimal, TheoremOptimalConfig};
use gtsim::market::{OrderBook, Side};
use gtsim::measures::{ObsSpace, ProbMeasure, SeqIndex};
use libc::{c_char, c_double, c_int, size_t};
use std::cell::RefCell;
use std::ffi::{CStr, CString};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtsimStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Utf8 = 3,
    ParseError = 4,
    RunFailed = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into()).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: GtsimStatus, msg: impl Into<String>) -> GtsimStatus {
    set_error(msg);
    status
}

/// Message of the most recent error on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn gtsim_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |c| c.as_ptr())
    })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn gtsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string allocated by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a gtsim function that
/// documents [`gtsim_string_free`] ownership, and must not be used after.
#[no_mangle]
pub unsafe extern "C" fn gtsim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

/// Regret threshold `2 sqrt(K N ln(1/eps))`, `eps` in (0, 0.3).
///
/// # Safety
/// `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn gtsim_regret_threshold(
    k: size_t,
    n: size_t,
    eps: c_double,
    out: *mut c_double,
) -> GtsimStatus {
    if out.is_null() {
        return fail(GtsimStatus::NullPointer, "out is null");
    }
    match bounds::regret_threshold(k, n, eps) {
        Ok(v) => {
            *out = v;
            GtsimStatus::Ok
        }
        Err(e) => fail(GtsimStatus::InvalidArgument, e.to_string()),
    }
}

/// Chain tail bound on the regret exceeding `c`.
///
/// # Safety
/// `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn gtsim_chain_bound(
    c: c_double,
    k: size_t,
    n: size_t,
    gamma: c_double,
    out: *mut c_double,
) -> GtsimStatus {
    if out.is_null() {
        return fail(GtsimStatus::NullPointer, "out is null");
    }
    match bounds::regret_chain_bound(c, k, n, gamma) {
        Ok(v) => {
            *out = v;
            GtsimStatus::Ok
        }
        Err(e) => fail(GtsimStatus::InvalidArgument, e.to_string()),
    }
}

/// One-sided Hoeffding tails `exp(-u^2/(2q))` and `exp(-u^2 k/(2n))`.
///
/// # Safety
/// `out_tight` and `out_coarse` must point to writable f64s.
#[no_mangle]
pub unsafe extern "C" fn gtsim_hoeffding_bound(
    u: c_double,
    q: size_t,
    k: size_t,
    n: size_t,
    out_tight: *mut c_double,
    out_coarse: *mut c_double,
) -> GtsimStatus {
    if out_tight.is_null() || out_coarse.is_null() {
        return fail(GtsimStatus::NullPointer, "out is null");
    }
    let t = bounds::hoeffding_bound(u, q, k, n);
    *out_tight = t.tight;
    *out_coarse = t.coarse;
    GtsimStatus::Ok
}

/// Closed-form aggregation bound `(4KN/C^2) exp(-C^2/(8KN))`.
///
/// # Safety
/// `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn gtsim_feller_bound(
    c: c_double,
    k: size_t,
    n: size_t,
    out: *mut c_double,
) -> GtsimStatus {
    if out.is_null() {
        return fail(GtsimStatus::NullPointer, "out is null");
    }
    *out = bounds::feller_bound(c, k, n);
    GtsimStatus::Ok
}

/// Piecewise-linear envelope value `g(x)` with threshold `c`, classes `k`,
/// ramp width `alpha`.
///
/// # Safety
/// `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn gtsim_g_eval(
    x: c_double,
    c: c_double,
    k: size_t,
    alpha: c_double,
    out: *mut c_double,
) -> GtsimStatus {
    if out.is_null() {
        return fail(GtsimStatus::NullPointer, "out is null");
    }
    match bounds::g_eval(x, c, k, alpha) {
        Ok(v) => {
            *out = v;
            GtsimStatus::Ok
        }
        Err(e) => fail(GtsimStatus::InvalidArgument, e.to_string()),
    }
}

/// Lookback LLN threshold `4 sqrt(K N ln(1/eps))`, `eps` in (0, 0.7).
///
/// # Safety
/// `out` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn gtsim_lln_threshold(
    k: size_t,
    n: size_t,
    eps: c_double,
    out: *mut c_double,
) -> GtsimStatus {
    if out.is_null() {
        return fail(GtsimStatus::NullPointer, "out is null");
    }
    match bounds::lln_threshold(k, n, eps) {
        Ok(v) => {
            *out = v;
            GtsimStatus::Ok
        }
        Err(e) => fail(GtsimStatus::InvalidArgument, e.to_string()),
    }
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

/// Opaque positive probability measure on sequences over a finite alphabet.
pub struct GtsimMeasure {
    inner: ProbMeasure,
}

/// Build a measure on `Y^horizon` for an alphabet of `outcomes` symbols
/// (labelled "0", "1", ...). `weights` must hold `outcomes^horizon` strictly
/// positive entries in lexicographic order; they are renormalized to total
/// mass one. Returns NULL on error (see [`gtsim_last_error`]).
///
/// # Safety
/// `weights` must point to `weights_len` readable f64s.
#[no_mangle]
pub unsafe extern "C" fn gtsim_measure_new(
    outcomes: size_t,
    horizon: size_t,
    weights: *const c_double,
    weights_len: size_t,
) -> *mut GtsimMeasure {
    if weights.is_null() {
        set_error("weights is null");
        return std::ptr::null_mut();
    }
    let labels: Vec<String> = (0..outcomes).map(|i| i.to_string()).collect();
    let space = match ObsSpace::new(labels) {
        Ok(s) => s,
        Err(e) => {
            set_error(e.to_string());
            return std::ptr::null_mut();
        }
    };
    let w = std::slice::from_raw_parts(weights, weights_len).to_vec();
    match ProbMeasure::new(space, horizon, w) {
        Ok(m) => Box::into_raw(Box::new(GtsimMeasure { inner: m })),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `m` must be a pointer from [`gtsim_measure_new`] or
/// [`gtsim_measure_condition`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gtsim_measure_free(m: *mut GtsimMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Marginal probability of an observation prefix.
///
/// # Safety
/// `m` must be a live measure handle; `prefix` must point to `prefix_len`
/// readable usizes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gtsim_measure_marginal(
    m: *const GtsimMeasure,
    prefix: *const size_t,
    prefix_len: size_t,
    out: *mut c_double,
) -> GtsimStatus {
    if m.is_null() || out.is_null() || (prefix.is_null() && prefix_len > 0) {
        return fail(GtsimStatus::NullPointer, "null pointer argument");
    }
    let measure = &(*m).inner;
    let outcomes = if prefix_len == 0 {
        &[][..]
    } else {
        std::slice::from_raw_parts(prefix, prefix_len)
    };
    let idx = match SeqIndex::from_outcomes(measure.space(), outcomes) {
        Ok(i) => i,
        Err(e) => return fail(GtsimStatus::InvalidArgument, e.to_string()),
    };
    match measure.marginal(idx) {
        Ok(v) => {
            *out = v;
            GtsimStatus::Ok
        }
        Err(e) => fail(GtsimStatus::InvalidArgument, e.to_string()),
    }
}

/// Bayesian conditioning on the first observation; returns a new handle or
/// NULL on error.
///
/// # Safety
/// `m` must be a live measure handle.
#[no_mangle]
pub unsafe extern "C" fn gtsim_measure_condition(
    m: *const GtsimMeasure,
    outcome: size_t,
) -> *mut GtsimMeasure {
    if m.is_null() {
        set_error("measure is null");
        return std::ptr::null_mut();
    }
    match (*m).inner.condition_on(outcome) {
        Ok(next) => Box::into_raw(Box::new(GtsimMeasure { inner: next })),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Number of weights carried by the measure.
///
/// # Safety
/// `m` must be a live measure handle.
#[no_mangle]
pub unsafe extern "C" fn gtsim_measure_len(m: *const GtsimMeasure) -> size_t {
    if m.is_null() {
        return 0;
    }
    (*m).inner.weights().len()
}

/// Copy the measure's weights into `buf` (capacity `buf_len`).
///
/// # Safety
/// `m` must be a live measure handle; `buf` must point to `buf_len`
/// writable f64s.
#[no_mangle]
pub unsafe extern "C" fn gtsim_measure_weights(
    m: *const GtsimMeasure,
    buf: *mut c_double,
    buf_len: size_t,
) -> GtsimStatus {
    if m.is_null() || buf.is_null() {
        return fail(GtsimStatus::NullPointer, "null pointer argument");
    }
    let w = (*m).inner.weights();
    if buf_len < w.len() {
        return fail(GtsimStatus::InvalidArgument, "buffer too small");
    }
    std::ptr::copy_nonoverlapping(w.as_ptr(), buf, w.len());
    GtsimStatus::Ok
}

// ---------------------------------------------------------------------------
// Order book
// ---------------------------------------------------------------------------

/// Opaque price-time-priority order book with 1e-4 price ticks.
pub struct GtsimOrderBook {
    inner: OrderBook,
}

/// One fill of a market order, as seen by C callers.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GtsimFill {
    pub maker_id: u64,
    pub price_ticks: u32,
    pub qty: u64,
}

#[no_mangle]
pub extern "C" fn gtsim_book_new() -> *mut GtsimOrderBook {
    Box::into_raw(Box::new(GtsimOrderBook {
        inner: OrderBook::new(),
    }))
}

/// # Safety
/// `b` must be a pointer from [`gtsim_book_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gtsim_book_free(b: *mut GtsimOrderBook) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Rest a limit order; `side` is 0 for buy, 1 for sell; `expiry < 0` means
/// no expiry. Writes the order id into `out_id`.
///
/// # Safety
/// `b` must be a live book handle; `out_id` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gtsim_book_submit_limit(
    b: *mut GtsimOrderBook,
    side: c_int,
    price_ticks: u32,
    qty: u64,
    expiry: i64,
    out_id: *mut u64,
) -> GtsimStatus {
    if b.is_null() || out_id.is_null() {
        return fail(GtsimStatus::NullPointer, "null pointer argument");
    }
    let side = if side == 0 { Side::Buy } else { Side::Sell };
    let expiry = if expiry < 0 { None } else { Some(expiry as u64) };
    match (*b).inner.submit_limit(side, price_ticks, qty, expiry, 0) {
        Ok(id) => {
            *out_id = id;
            GtsimStatus::Ok
        }
        Err(e) => fail(GtsimStatus::InvalidArgument, e.to_string()),
    }
}

/// Match a market order; fills are written into `fills` (capacity
/// `fills_cap`) and their count into `out_count`. Unfilled remainder lapses.
///
/// # Safety
/// `b` must be a live book handle; `fills` must point to `fills_cap`
/// writable [`GtsimFill`]s; `out_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gtsim_book_submit_market(
    b: *mut GtsimOrderBook,
    side: c_int,
    qty: u64,
    fills: *mut GtsimFill,
    fills_cap: size_t,
    out_count: *mut size_t,
) -> GtsimStatus {
    if b.is_null() || out_count.is_null() || (fills.is_null() && fills_cap > 0) {
        return fail(GtsimStatus::NullPointer, "null pointer argument");
    }
    let side = if side == 0 { Side::Buy } else { Side::Sell };
    match (*b).inner.submit_market(side, qty) {
        Ok(list) => {
            if list.len() > fills_cap {
                return fail(
                    GtsimStatus::InvalidArgument,
                    format!("fill buffer too small: need {}", list.len()),
                );
            }
            for (i, f) in list.iter().enumerate() {
                *fills.add(i) = GtsimFill {
                    maker_id: f.maker_id,
                    price_ticks: f.price_ticks,
                    qty: f.qty,
                };
            }
            *out_count = list.len();
            GtsimStatus::Ok
        }
        Err(e) => fail(GtsimStatus::InvalidArgument, e.to_string()),
    }
}

/// Best bid in ticks, or 0 when the bid side is empty.
///
/// # Safety
/// `b` must be a live book handle.
#[no_mangle]
pub unsafe extern "C" fn gtsim_book_best_bid(b: *const GtsimOrderBook) -> u32 {
    if b.is_null() {
        return 0;
    }
    (*b).inner.best_bid().unwrap_or(0)
}

/// Best ask in ticks, or 0 when the ask side is empty.
///
/// # Safety
/// `b` must be a live book handle.
#[no_mangle]
pub unsafe extern "C" fn gtsim_book_best_ask(b: *const GtsimOrderBook) -> u32 {
    if b.is_null() {
        return 0;
    }
    (*b).inner.best_ask().unwrap_or(0)
}

/// Remove every order with `expiry <= now`; returns the number removed.
///
/// # Safety
/// `b` must be a live book handle.
#[no_mangle]
pub unsafe extern "C" fn gtsim_book_expire(b: *mut GtsimOrderBook, now: u64) -> size_t {
    if b.is_null() {
        return 0;
    }
    (*b).inner.expire_orders(now).len()
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// Exact two-point distribution of the full-horizon counterexample: writes
/// P(gap = +1) and P(gap = -1).
///
/// # Safety
/// `out_plus` and `out_minus` must point to writable f64s.
#[no_mangle]
pub unsafe extern "C" fn gtsim_counter_example(
    n_steps: size_t,
    p_last: c_double,
    out_plus: *mut c_double,
    out_minus: *mut c_double,
) -> GtsimStatus {
    if out_plus.is_null() || out_minus.is_null() {
        return fail(GtsimStatus::NullPointer, "out is null");
    }
    match run_counter_example_exact(n_steps, p_last) {
        Ok(r) => {
            let mut plus = 0.0;
            let mut minus = 0.0;
            for &(v, p) in &r.distribution {
                if v > 0.0 {
                    plus += p;
                } else {
                    minus += p;
                }
            }
            *out_plus = plus;
            *out_minus = minus;
            GtsimStatus::Ok
        }
        Err(e) => fail(GtsimStatus::RunFailed, e.to_string()),
    }
}

/// Run the regret experiment from a TOML configuration (same schema as the
/// CLI `simulate` command without the `experiment` key) and return the JSON
/// report. Free the result with [`gtsim_string_free`]; NULL on error.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gtsim_theorem_optimal_json(
    config_toml: *const c_char,
    seed: u64,
    reps: size_t,
) -> *mut c_char {
    if config_toml.is_null() {
        set_error("config is null");
        return std::ptr::null_mut();
    }
    let text = match CStr::from_ptr(config_toml).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("config is not UTF-8");
            return std::ptr::null_mut();
        }
    };
    let cfg: TheoremOptimalConfig = match toml::from_str(text) {
        Ok(c) => c,
        Err(e) => {
            set_error(format!("config parse: {e}"));
            return std::ptr::null_mut();
        }
    };
    let report = match run_theorem_optimal(&cfg, seed, reps) {
        Ok(r) => r,
        Err(e) => {
            set_error(e.to_string());
            return std::ptr::null_mut();
        }
    };
    let json = match serde_json::to_string(&report) {
        Ok(j) => j,
        Err(e) => {
            set_error(e.to_string());
            return std::ptr::null_mut();
        }
    };
    CString::new(json)
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_round_trip_through_abi() {
        let mut v = 0.0;
        let st = unsafe { gtsim_regret_threshold(7, 1000, 0.1, &mut v) };
        assert_eq!(st, GtsimStatus::Ok);
        assert!((v - 253.92).abs() < 0.01);
        let st = unsafe { gtsim_regret_threshold(7, 1000, 0.5, &mut v) };
        assert_eq!(st, GtsimStatus::InvalidArgument);
        let msg = unsafe { CStr::from_ptr(gtsim_last_error()) };
        assert!(msg.to_str().unwrap().contains("eps"));
    }

    #[test]
    fn measure_handles() {
        let w = [0.1, 0.2, 0.3, 0.4];
        let m = unsafe { gtsim_measure_new(2, 2, w.as_ptr(), 4) };
        assert!(!m.is_null());
        let prefix = [1usize];
        let mut out = 0.0;
        let st = unsafe { gtsim_measure_marginal(m, prefix.as_ptr(), 1, &mut out) };
        assert_eq!(st, GtsimStatus::Ok);
        assert!((out - 0.7).abs() < 1e-12);
        let cond = unsafe { gtsim_measure_condition(m, 1) };
        assert!(!cond.is_null());
        assert_eq!(unsafe { gtsim_measure_len(cond) }, 2);
        let mut buf = [0.0; 2];
        let st = unsafe { gtsim_measure_weights(cond, buf.as_mut_ptr(), 2) };
        assert_eq!(st, GtsimStatus::Ok);
        assert!((buf[0] - 3.0 / 7.0).abs() < 1e-12);
        unsafe {
            gtsim_measure_free(cond);
            gtsim_measure_free(m);
        }
        // degenerate weights are rejected with a message
        let bad = [1.0, 0.0, 0.0, 0.0];
        let m = unsafe { gtsim_measure_new(2, 2, bad.as_ptr(), 4) };
        assert!(m.is_null());
    }

    #[test]
    fn book_handles() {
        let b = gtsim_book_new();
        let mut id = 0u64;
        let st = unsafe { gtsim_book_submit_limit(b, 0, 6000, 3, -1, &mut id) };
        assert_eq!(st, GtsimStatus::Ok);
        unsafe {
            gtsim_book_submit_limit(b, 0, 5000, 4, -1, &mut id);
        }
        assert_eq!(unsafe { gtsim_book_best_bid(b) }, 6000);
        let mut fills = [GtsimFill {
            maker_id: 0,
            price_ticks: 0,
            qty: 0,
        }; 8];
        let mut count = 0usize;
        let st = unsafe { gtsim_book_submit_market(b, 1, 5, fills.as_mut_ptr(), 8, &mut count) };
        assert_eq!(st, GtsimStatus::Ok);
        assert_eq!(count, 2);
        assert_eq!(fills[0].price_ticks, 6000);
        assert_eq!(fills[0].qty, 3);
        assert_eq!(fills[1].price_ticks, 5000);
        assert_eq!(fills[1].qty, 2);
        unsafe { gtsim_book_free(b) };
    }

    #[test]
    fn counter_example_through_abi() {
        let mut plus = 0.0;
        let mut minus = 0.0;
        let st = unsafe { gtsim_counter_example(3, 0.4, &mut plus, &mut minus) };
        assert_eq!(st, GtsimStatus::Ok);
        assert_eq!(plus, 0.4);
        assert_eq!(minus, 0.6);
    }

    #[test]
    fn theorem_report_json() {
        let cfg = CString::new(
            r#"
            n-steps = 40
            k = 2
            eps = 0.1
            forecaster = "honest"
            reality-step = [0.5, 0.5]
            decision-maker = "bayes"
            sceptic = "zero"
            "#,
        )
        .unwrap();
        let out = unsafe { gtsim_theorem_optimal_json(cfg.as_ptr(), 1, 5) };
        assert!(!out.is_null());
        let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
        assert!(text.contains("violation"));
        unsafe { gtsim_string_free(out) };
    }
}
