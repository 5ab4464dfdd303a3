//! C ABI for the spectrum leasing simulator.
//!
//! The engine is exposed through an opaque handle plus status codes; every
//! function returns [`SpectrumStatus`] and the last failure detail is
//! available from [`spectrum_last_error_message`]. Structured inputs and
//! outputs (calls, receipts, scenarios, reports) travel as JSON strings so
//! bindings stay thin. Strings returned through out-pointers are allocated
//! by this library and must be released with [`spectrum_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};
use serde::Deserialize;

use spectrum_sim::scenario::run_scenario;
use spectrum_sim::{Address, Call, CallReturn, Engine, GasSchedule, Timestamp, TxOutcome, Wei};

/// Opaque engine handle.
pub struct SpectrumEngine(Engine);

/// Status codes returned by every API function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumStatus {
    /// Success.
    SpectrumOk = 0,
    /// A required pointer argument was null.
    SpectrumNullArgument = -1,
    /// An input string was not valid UTF-8.
    SpectrumInvalidUtf8 = -2,
    /// JSON or value parsing failed.
    SpectrumParseError = -3,
    /// The transaction was applied and reverted; a receipt is still returned.
    SpectrumReverted = -4,
    /// Engine rejected the request (unknown account, token, and so on).
    SpectrumEngineError = -5,
    /// The caller-provided buffer is too small.
    SpectrumBufferTooSmall = -6,
    /// Internal panic; state of the handle is unspecified.
    SpectrumInternalError = -7,
}

use SpectrumStatus::*;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_last_error(message: impl Into<String>) {
    let message = message.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message.replace('\0', " ")).unwrap_or_default();
    });
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next API call from the same thread.
#[no_mangle]
pub extern "C" fn spectrum_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates an engine with the default gas schedule. Never null.
#[no_mangle]
pub extern "C" fn spectrum_engine_new() -> *mut SpectrumEngine {
    Box::into_raw(Box::new(SpectrumEngine(Engine::new())))
}

/// Releases an engine handle. A null pointer is ignored.
///
/// # Safety
/// `engine` must come from [`spectrum_engine_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn spectrum_engine_free(engine: *mut SpectrumEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

unsafe fn engine_mut<'a>(engine: *mut SpectrumEngine) -> Result<&'a mut Engine, SpectrumStatus> {
    match engine.as_mut() {
        Some(handle) => Ok(&mut handle.0),
        None => {
            set_last_error("engine handle is null");
            Err(SpectrumNullArgument)
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, SpectrumStatus> {
    if ptr.is_null() {
        set_last_error(format!("{what} is null"));
        return Err(SpectrumNullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error(format!("{what} is not valid UTF-8"));
        SpectrumInvalidUtf8
    })
}

unsafe fn write_to_buf(s: &str, out: *mut c_char, out_len: size_t) -> SpectrumStatus {
    if out.is_null() {
        set_last_error("output buffer is null");
        return SpectrumNullArgument;
    }
    let bytes = s.as_bytes();
    if bytes.len() + 1 > out_len {
        set_last_error(format!(
            "need {} bytes, buffer holds {out_len}",
            bytes.len() + 1
        ));
        return SpectrumBufferTooSmall;
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), out.cast(), bytes.len());
    *out.add(bytes.len()) = 0;
    SpectrumOk
}

unsafe fn write_owned(s: String, out: *mut *mut c_char) -> SpectrumStatus {
    if out.is_null() {
        set_last_error("output pointer is null");
        return SpectrumNullArgument;
    }
    match CString::new(s.replace('\0', " ")) {
        Ok(c) => {
            *out = c.into_raw();
            SpectrumOk
        }
        Err(_) => {
            set_last_error("output contained an interior NUL");
            SpectrumInternalError
        }
    }
}

/// Frees a string allocated by this library. A null pointer is ignored.
///
/// # Safety
/// `s` must have been returned through one of this library's out-pointers
/// and not freed before.
#[no_mangle]
pub unsafe extern "C" fn spectrum_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a funded account. Writes the 0x-prefixed address (42 chars plus
/// NUL) into `out_address`.
///
/// # Safety
/// Pointer arguments must satisfy the usual C contract: `engine` is a live
/// handle, `balance_wei` a NUL-terminated string, `out_address` writable
/// for `out_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn spectrum_engine_create_account(
    engine: *mut SpectrumEngine,
    balance_wei: *const c_char,
    out_address: *mut c_char,
    out_len: size_t,
) -> SpectrumStatus {
    let engine = match engine_mut(engine) {
        Ok(e) => e,
        Err(s) => return s,
    };
    let balance = match read_str(balance_wei, "balance_wei") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let balance: Wei = match balance.parse() {
        Ok(w) => w,
        Err(e) => {
            set_last_error(e);
            return SpectrumParseError;
        }
    };
    let addr = engine.create_account(balance);
    write_to_buf(&addr.to_string(), out_address, out_len)
}

/// Creates an account at a pinned address.
///
/// # Safety
/// See [`spectrum_engine_create_account`].
#[no_mangle]
pub unsafe extern "C" fn spectrum_engine_create_account_at(
    engine: *mut SpectrumEngine,
    address: *const c_char,
    balance_wei: *const c_char,
) -> SpectrumStatus {
    let engine = match engine_mut(engine) {
        Ok(e) => e,
        Err(s) => return s,
    };
    let (addr, balance) = match (|| -> Result<(Address, Wei), SpectrumStatus> {
        let addr = read_str(address, "address")?
            .parse::<Address>()
            .map_err(|e| {
                set_last_error(e);
                SpectrumParseError
            })?;
        let balance = read_str(balance_wei, "balance_wei")?
            .parse::<Wei>()
            .map_err(|e| {
                set_last_error(e);
                SpectrumParseError
            })?;
        Ok((addr, balance))
    })() {
        Ok(v) => v,
        Err(status) => return status,
    };
    match engine.create_account_at(addr, balance) {
        Ok(()) => SpectrumOk,
        Err(e) => {
            set_last_error(e.to_string());
            SpectrumEngineError
        }
    }
}

/// Advances the logical clock by `delta_seconds`; writes the new time.
///
/// # Safety
/// `engine` must be a live handle; `out_now` may be null when the new value
/// is not needed.
#[no_mangle]
pub unsafe extern "C" fn spectrum_engine_advance_time(
    engine: *mut SpectrumEngine,
    delta_seconds: u64,
    out_now: *mut u64,
) -> SpectrumStatus {
    let engine = match engine_mut(engine) {
        Ok(e) => e,
        Err(s) => return s,
    };
    let now = engine.advance_time(delta_seconds);
    if !out_now.is_null() {
        *out_now = now.0;
    }
    SpectrumOk
}

/// Writes an account balance as a decimal wei string.
///
/// # Safety
/// See [`spectrum_engine_create_account`].
#[no_mangle]
pub unsafe extern "C" fn spectrum_engine_balance(
    engine: *mut SpectrumEngine,
    address: *const c_char,
    out_wei: *mut c_char,
    out_len: size_t,
) -> SpectrumStatus {
    let engine = match engine_mut(engine) {
        Ok(e) => e,
        Err(s) => return s,
    };
    let addr: Address = match read_str(address, "address").and_then(|s| {
        s.parse().map_err(|e: String| {
            set_last_error(e);
            SpectrumParseError
        })
    }) {
        Ok(a) => a,
        Err(status) => return status,
    };
    match engine.get_balance(addr) {
        Ok(balance) => write_to_buf(&balance.to_string(), out_wei, out_len),
        Err(e) => {
            set_last_error(e.to_string());
            SpectrumEngineError
        }
    }
}

/// Writes the 0x-prefixed address holding the token at `at` (the zero
/// address when unassigned).
///
/// # Safety
/// See [`spectrum_engine_create_account`].
#[no_mangle]
pub unsafe extern "C" fn spectrum_engine_user_of(
    engine: *mut SpectrumEngine,
    token_id: u64,
    at: u64,
    out_address: *mut c_char,
    out_len: size_t,
) -> SpectrumStatus {
    let engine = match engine_mut(engine) {
        Ok(e) => e,
        Err(s) => return s,
    };
    match engine.user_of(token_id, Timestamp(at)) {
        Ok(addr) => write_to_buf(&addr.to_string(), out_address, out_len),
        Err(e) => {
            set_last_error(e.to_string());
            SpectrumEngineError
        }
    }
}

/// Writes the hex digest of the full engine state.
///
/// # Safety
/// See [`spectrum_engine_create_account`].
#[no_mangle]
pub unsafe extern "C" fn spectrum_engine_state_digest(
    engine: *mut SpectrumEngine,
    out_digest: *mut c_char,
    out_len: size_t,
) -> SpectrumStatus {
    let engine = match engine_mut(engine) {
        Ok(e) => e,
        Err(s) => return s,
    };
    let digest = engine.state_digest();
    write_to_buf(&digest, out_digest, out_len)
}

/// JSON shape of a protocol call, mirroring the scenario step operations
/// but with concrete 0x addresses instead of labels.
#[derive(Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
enum CallSpec {
    Mint {
        start_freq: String,
        end_freq: String,
        location: String,
    },
    SetIdle {
        token: u64,
        starts: Vec<u64>,
        ends: Vec<u64>,
    },
    ApproveOperator {
        token: u64,
        operator: Address,
    },
    SetUser {
        token: u64,
        user: Address,
        expires: u64,
    },
    BatchSetUser {
        token: u64,
        users: Vec<Address>,
        starts: Vec<u64>,
        ends: Vec<u64>,
    },
    StartAuction {
        token: u64,
        duration: u64,
        slot_count: usize,
        bottom_price_wei: Wei,
    },
    Bid {
        token: u64,
        slot: usize,
    },
    EndAuction {
        token: u64,
    },
}

impl From<CallSpec> for Call {
    fn from(spec: CallSpec) -> Call {
        let ts = |v: Vec<u64>| v.into_iter().map(Timestamp).collect();
        match spec {
            CallSpec::Mint {
                start_freq,
                end_freq,
                location,
            } => Call::Mint {
                start_freq,
                end_freq,
                location,
            },
            CallSpec::SetIdle {
                token,
                starts,
                ends,
            } => Call::SetSpectrumIdleTime {
                token_id: token,
                idle_starts: ts(starts),
                idle_ends: ts(ends),
            },
            CallSpec::ApproveOperator { token, operator } => Call::ApproveOperator {
                token_id: token,
                operator,
            },
            CallSpec::SetUser {
                token,
                user,
                expires,
            } => Call::SetUser {
                token_id: token,
                user,
                expires: Timestamp(expires),
            },
            CallSpec::BatchSetUser {
                token,
                users,
                starts,
                ends,
            } => Call::BatchSetUser {
                token_id: token,
                users,
                start_times: ts(starts),
                end_times: ts(ends),
            },
            CallSpec::StartAuction {
                token,
                duration,
                slot_count,
                bottom_price_wei,
            } => Call::StartAuction {
                token_id: token,
                auction_duration: duration,
                time_slot_count: slot_count,
                bottom_price: bottom_price_wei,
            },
            CallSpec::Bid { token, slot } => Call::Bid {
                token_id: token,
                time_slot_id: slot,
            },
            CallSpec::EndAuction { token } => Call::EndAuction { token_id: token },
        }
    }
}

fn outcome_json(outcome: &TxOutcome) -> String {
    let mut obj = outcome
        .receipt
        .to_json()
        .as_object()
        .expect("receipt object")
        .clone();
    let returned = match &outcome.returned {
        CallReturn::Unit => serde_json::Value::Null,
        CallReturn::Bool(b) => serde_json::Value::Bool(*b),
        CallReturn::TokenId(id) => serde_json::Value::from(*id),
        CallReturn::Winners(winners) => serde_json::Value::Array(
            winners
                .iter()
                .map(|w| serde_json::Value::String(w.checksummed()))
                .collect(),
        ),
    };
    obj.insert("returned".to_string(), returned);
    serde_json::to_string(&serde_json::Value::Object(obj)).expect("receipt json")
}

/// Applies one transaction. `call_json` uses the documented call shapes,
/// `value_wei` is the attached currency (bids). On success or revert a
/// receipt JSON is written to `out_receipt_json`; a revert also returns
/// [`SpectrumReverted`].
///
/// # Safety
/// See [`spectrum_engine_create_account`]; `out_receipt_json` must be a
/// valid pointer to receive an owned string.
#[no_mangle]
pub unsafe extern "C" fn spectrum_engine_execute_call_json(
    engine: *mut SpectrumEngine,
    caller: *const c_char,
    value_wei: *const c_char,
    call_json: *const c_char,
    out_receipt_json: *mut *mut c_char,
) -> SpectrumStatus {
    let engine = match engine_mut(engine) {
        Ok(e) => e,
        Err(s) => return s,
    };
    let parsed = (|| -> Result<(Address, Wei, CallSpec), SpectrumStatus> {
        let caller = read_str(caller, "caller")?
            .parse::<Address>()
            .map_err(|e| {
                set_last_error(e);
                SpectrumParseError
            })?;
        let value = read_str(value_wei, "value_wei")?
            .parse::<Wei>()
            .map_err(|e| {
                set_last_error(e);
                SpectrumParseError
            })?;
        let call = serde_json::from_str(read_str(call_json, "call_json")?).map_err(|e| {
            set_last_error(format!("call_json: {e}"));
            SpectrumParseError
        })?;
        Ok((caller, value, call))
    })();
    let (caller, value, spec) = match parsed {
        Ok(v) => v,
        Err(status) => return status,
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        engine.execute_tx(caller, value, spec.into())
    }));
    match result {
        Ok(outcome) => {
            let reverted = !outcome.receipt.succeeded();
            if reverted {
                set_last_error(outcome.receipt.revert_reason.clone().unwrap_or_default());
            }
            let status = write_owned(outcome_json(&outcome), out_receipt_json);
            if status != SpectrumOk {
                return status;
            }
            if reverted {
                SpectrumReverted
            } else {
                SpectrumOk
            }
        }
        Err(_) => {
            set_last_error("internal panic during transaction execution");
            SpectrumInternalError
        }
    }
}

/// Parses, validates and runs a scenario document. Writes a JSON report
/// with pass/fail lines, transaction counts and the full event log.
///
/// # Safety
/// `scenario_json` must be a NUL-terminated string and `out_report_json` a
/// valid pointer to receive an owned string.
#[no_mangle]
pub unsafe extern "C" fn spectrum_run_scenario_json(
    scenario_json: *const c_char,
    out_report_json: *mut *mut c_char,
) -> SpectrumStatus {
    let text = match read_str(scenario_json, "scenario_json") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let scenario = match spectrum_sim::scenario::parse_scenario("scenario", text) {
        Ok(s) => s,
        Err(e) => {
            set_last_error(e.to_string());
            return SpectrumParseError;
        }
    };
    let outcome = match catch_unwind(AssertUnwindSafe(|| run_scenario(&scenario))) {
        Ok(o) => o,
        Err(_) => {
            set_last_error("internal panic during scenario execution");
            return SpectrumInternalError;
        }
    };
    let mut obj = serde_json::Map::new();
    obj.insert("name".into(), outcome.name.clone().into());
    obj.insert("all_passed".into(), outcome.all_passed.into());
    obj.insert(
        "aborted".into(),
        match &outcome.aborted {
            Some(r) => r.clone().into(),
            None => serde_json::Value::Null,
        },
    );
    obj.insert("tx_count".into(), outcome.tx_count.into());
    obj.insert("gas_total".into(), outcome.gas_total.into());
    obj.insert(
        "report".into(),
        serde_json::Value::Array(
            outcome
                .report_lines
                .iter()
                .cloned()
                .map(Into::into)
                .collect(),
        ),
    );
    obj.insert(
        "events".into(),
        serde_json::from_str(&outcome.events_json()).expect("events json"),
    );
    let body = serde_json::to_string(&serde_json::Value::Object(obj)).expect("report json");
    let status = write_owned(body, out_report_json);
    if status != SpectrumOk {
        return status;
    }
    if outcome.aborted.is_some() {
        set_last_error(outcome.aborted.unwrap_or_default());
        SpectrumEngineError
    } else {
        SpectrumOk
    }
}

/// Tabulates both authorization flows for 1..=max_slots as RFC 4180 CSV.
/// `schedule_json` may be null for the default schedule or carry partial
/// overrides.
///
/// # Safety
/// `out_csv` must be a valid pointer to receive an owned string;
/// `schedule_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn spectrum_gas_sweep_csv(
    max_slots: u64,
    schedule_json: *const c_char,
    out_csv: *mut *mut c_char,
) -> SpectrumStatus {
    let schedule = if schedule_json.is_null() {
        GasSchedule::default()
    } else {
        let text = match read_str(schedule_json, "schedule_json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => {
                set_last_error(format!("schedule_json: {e}"));
                return SpectrumParseError;
            }
        }
    };
    match spectrum_sim::scenario::gas_sweep(max_slots, &schedule) {
        Ok(sweep) => write_owned(sweep.csv, out_csv),
        Err(e) => {
            set_last_error(e.to_string());
            SpectrumEngineError
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    unsafe fn take_string(p: *mut c_char) -> String {
        assert!(!p.is_null());
        let s = CStr::from_ptr(p).to_str().unwrap().to_string();
        spectrum_string_free(p);
        s
    }

    #[test]
    fn lifecycle_and_null_handling() {
        unsafe {
            let engine = spectrum_engine_new();
            assert!(!engine.is_null());
            let mut now = 0u64;
            assert_eq!(
                spectrum_engine_advance_time(engine, 42, &mut now),
                SpectrumOk
            );
            assert_eq!(now, 42);
            assert_eq!(
                spectrum_engine_advance_time(ptr::null_mut(), 1, &mut now),
                SpectrumNullArgument
            );
            spectrum_engine_free(engine);
            spectrum_engine_free(ptr::null_mut());
        }
    }

    #[test]
    fn account_creation_and_balance_round_trip() {
        unsafe {
            let engine = spectrum_engine_new();
            let mut addr = [0 as c_char; 64];
            let status = spectrum_engine_create_account(
                engine,
                cstr("7000000000000000000").as_ptr(),
                addr.as_mut_ptr(),
                addr.len(),
            );
            assert_eq!(status, SpectrumOk);
            let addr_str = CStr::from_ptr(addr.as_ptr()).to_str().unwrap().to_string();
            assert!(addr_str.starts_with("0x"));
            assert_eq!(addr_str.len(), 42);

            let mut balance = [0 as c_char; 80];
            assert_eq!(
                spectrum_engine_balance(
                    engine,
                    cstr(&addr_str).as_ptr(),
                    balance.as_mut_ptr(),
                    balance.len()
                ),
                SpectrumOk
            );
            assert_eq!(
                CStr::from_ptr(balance.as_ptr()).to_str().unwrap(),
                "7000000000000000000"
            );

            // Tiny buffer reports its requirement instead of truncating.
            let mut tiny = [0 as c_char; 4];
            assert_eq!(
                spectrum_engine_balance(
                    engine,
                    cstr(&addr_str).as_ptr(),
                    tiny.as_mut_ptr(),
                    tiny.len()
                ),
                SpectrumBufferTooSmall
            );
            spectrum_engine_free(engine);
        }
    }

    #[test]
    fn execute_call_json_drives_a_full_auction() {
        unsafe {
            let engine = spectrum_engine_new();
            let mut owner = [0 as c_char; 64];
            let mut bidder = [0 as c_char; 64];
            spectrum_engine_create_account(
                engine,
                cstr("100000000000000000000").as_ptr(),
                owner.as_mut_ptr(),
                owner.len(),
            );
            spectrum_engine_create_account(
                engine,
                cstr("100000000000000000000").as_ptr(),
                bidder.as_mut_ptr(),
                bidder.len(),
            );
            let owner = CStr::from_ptr(owner.as_ptr()).to_str().unwrap().to_string();
            let bidder = CStr::from_ptr(bidder.as_ptr())
                .to_str()
                .unwrap()
                .to_string();

            let exec = |caller: &str, value: &str, call: &str| -> (SpectrumStatus, String) {
                let mut out: *mut c_char = ptr::null_mut();
                let status = spectrum_engine_execute_call_json(
                    engine,
                    cstr(caller).as_ptr(),
                    cstr(value).as_ptr(),
                    cstr(call).as_ptr(),
                    &mut out,
                );
                (status, take_string(out))
            };

            let (status, receipt) = exec(
                &owner,
                "0",
                r#"{"op":"mint","start_freq":"600MHz","end_freq":"800MHz","location":"CityA"}"#,
            );
            assert_eq!(status, SpectrumOk);
            assert!(receipt.contains("\"SpectrumTokenization\""));
            assert!(receipt.contains("\"returned\":1"));

            let (status, _) = exec(
                &owner,
                "0",
                r#"{"op":"set_idle","token":1,"starts":[1000,2000],"ends":[1500,2500]}"#,
            );
            assert_eq!(status, SpectrumOk);
            let (status, receipt) = exec(
                &owner,
                "0",
                r#"{"op":"start_auction","token":1,"duration":100,"slot_count":2,"bottom_price_wei":"1000000000000000000"}"#,
            );
            assert_eq!(status, SpectrumOk);
            assert!(receipt.contains("\"returned\":true"));

            let (status, _) = exec(
                &bidder,
                "2000000000000000000",
                r#"{"op":"bid","token":1,"slot":0}"#,
            );
            assert_eq!(status, SpectrumOk);

            // A rebid by the standing leader reverts, with the receipt and
            // reason both surfaced.
            let (status, receipt) = exec(
                &bidder,
                "3000000000000000000",
                r#"{"op":"bid","token":1,"slot":0}"#,
            );
            assert_eq!(status, SpectrumReverted);
            assert!(receipt.contains("\"status\":\"reverted\""));
            let last = CStr::from_ptr(spectrum_last_error_message())
                .to_str()
                .unwrap()
                .to_string();
            assert_eq!(last, "caller is already the highest bidder");

            spectrum_engine_advance_time(engine, 101, ptr::null_mut());
            let (status, receipt) = exec(&owner, "0", r#"{"op":"end_auction","token":1}"#);
            assert_eq!(status, SpectrumOk);
            assert!(receipt.contains("\"UpdateUser\""));
            assert!(receipt.contains("\"returned\":["));

            let mut user = [0 as c_char; 64];
            assert_eq!(
                spectrum_engine_user_of(engine, 1, 1200, user.as_mut_ptr(), user.len()),
                SpectrumOk
            );
            assert_eq!(CStr::from_ptr(user.as_ptr()).to_str().unwrap(), bidder);

            spectrum_engine_free(engine);
        }
    }

    #[test]
    fn scenario_json_round_trip() {
        unsafe {
            let scenario = r#"{
                "name": "ffi",
                "accounts": [
                    { "label": "owner", "initial_balance_wei": "1000" }
                ],
                "steps": [
                    { "op": "mint", "caller": "owner", "start_freq": "1", "end_freq": "2", "location": "x" }
                ],
                "expectations": [ { "kind": "tx_count", "expected": 1 } ]
            }"#;
            let mut out: *mut c_char = ptr::null_mut();
            let status = spectrum_run_scenario_json(cstr(scenario).as_ptr(), &mut out);
            assert_eq!(status, SpectrumOk);
            let report = take_string(out);
            assert!(report.contains("\"all_passed\":true"));
            assert!(report.contains("SpectrumTokenization"));

            let mut out: *mut c_char = ptr::null_mut();
            let status = spectrum_run_scenario_json(cstr("{ nope").as_ptr(), &mut out);
            assert_eq!(status, SpectrumParseError);
            assert!(out.is_null());
        }
    }

    #[test]
    fn gas_sweep_csv_has_expected_shape() {
        unsafe {
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(spectrum_gas_sweep_csv(5, ptr::null(), &mut out), SpectrumOk);
            let csv = take_string(out);
            assert!(csv.starts_with("slot_count,"));
            assert_eq!(csv.matches("\r\n").count(), 6);

            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(
                spectrum_gas_sweep_csv(0, ptr::null(), &mut out),
                SpectrumEngineError
            );
        }
    }

    #[test]
    fn invalid_utf8_is_rejected() {
        unsafe {
            let engine = spectrum_engine_new();
            let bad = CString::new(vec![0xffu8, 0xfe]).unwrap();
            let mut out = [0 as c_char; 64];
            assert_eq!(
                spectrum_engine_balance(engine, bad.as_ptr(), out.as_mut_ptr(), out.len()),
                SpectrumInvalidUtf8
            );
            spectrum_engine_free(engine);
        }
    }
}
