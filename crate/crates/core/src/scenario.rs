//! Declarative scenario files and the drivers behind the CLI: step
//! execution, expectation checking, JSON event/receipt logs, the built-in
//! demo and the gas sweep.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::gas::{
    calibrate, gas_for_erc4907_flow, gas_for_m_erc4907_flow, total_gas_crossover, CalibrationFit,
    CalibrationTargets, GasSchedule,
};
use crate::ledger::TokenId;
use crate::sim::{
    Address, Call, Engine, EngineError, Event, EventValue, Timestamp, TxReceipt, Wei,
};

// ---------------------------------------------------------------------------
// Scenario file model
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountDecl {
    pub label: String,
    pub initial_balance_wei: Wei,
    /// Pins the account to a concrete address; fresh addresses are
    /// engine-assigned otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<Address>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// One scenario step. Every step maps to exactly one engine transaction or
/// read. `expect_revert` inverts the success requirement for transaction
/// steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    Mint {
        caller: String,
        start_freq: String,
        end_freq: String,
        location: String,
        #[serde(default, skip_serializing_if = "is_false")]
        expect_revert: bool,
    },
    SetIdle {
        caller: String,
        token: TokenId,
        starts: Vec<u64>,
        ends: Vec<u64>,
        #[serde(default, skip_serializing_if = "is_false")]
        expect_revert: bool,
    },
    StartAuction {
        caller: String,
        token: TokenId,
        duration: u64,
        slot_count: usize,
        bottom_price_wei: Wei,
        #[serde(default, skip_serializing_if = "is_false")]
        expect_revert: bool,
    },
    Bid {
        caller: String,
        token: TokenId,
        slot: usize,
        value_wei: Wei,
        #[serde(default, skip_serializing_if = "is_false")]
        expect_revert: bool,
    },
    AdvanceTime {
        delta: u64,
    },
    EndAuction {
        caller: String,
        token: TokenId,
        #[serde(default, skip_serializing_if = "is_false")]
        expect_revert: bool,
    },
    SetUser {
        caller: String,
        token: TokenId,
        user: String,
        expires: u64,
        #[serde(default, skip_serializing_if = "is_false")]
        expect_revert: bool,
    },
    QueryUser {
        token: TokenId,
        at: u64,
    },
}

impl Step {
    fn op_name(&self) -> &'static str {
        match self {
            Step::Mint { .. } => "mint",
            Step::SetIdle { .. } => "set_idle",
            Step::StartAuction { .. } => "start_auction",
            Step::Bid { .. } => "bid",
            Step::AdvanceTime { .. } => "advance_time",
            Step::EndAuction { .. } => "end_auction",
            Step::SetUser { .. } => "set_user",
            Step::QueryUser { .. } => "query_user",
        }
    }
}

/// Post-run check. Account-valued `expected` fields accept a declared
/// label, a 0x-prefixed address, or the literal `zero`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expectation {
    Winner {
        token: TokenId,
        slot: usize,
        expected: String,
    },
    /// Final minus initial balance, as a signed decimal wei string.
    BalanceDelta {
        account: String,
        expected_wei: String,
    },
    /// Field of the nth emitted event with the given name.
    EventField {
        event: String,
        #[serde(default)]
        occurrence: usize,
        field: String,
        expected: serde_json::Value,
    },
    UserAtTime {
        token: TokenId,
        at: u64,
        expected: String,
    },
    TxCount {
        expected: u64,
    },
    GasTotal {
        expected: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub accounts: Vec<AccountDecl>,
    /// Partial gas schedule; omitted entries keep the default schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_overrides: Option<GasSchedule>,
    pub steps: Vec<Step>,
    #[serde(default)]
    pub expectations: Vec<Expectation>,
}

// ---------------------------------------------------------------------------
// Loading and validation
// ---------------------------------------------------------------------------

/// Parse or validation failure, anchored to the offending location where
/// the parser provides one.
#[derive(Debug, thiserror::Error)]
pub struct ScenarioLoadError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ScenarioLoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{}:{}: {}", self.path, l, c, self.message),
            _ => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

pub fn parse_scenario(path: &str, text: &str) -> Result<Scenario, ScenarioLoadError> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioLoadError {
        path: path.to_string(),
        line: Some(e.line()),
        column: Some(e.column()),
        message: e.to_string(),
    })?;
    validate_scenario(&scenario).map_err(|message| ScenarioLoadError {
        path: path.to_string(),
        line: None,
        column: None,
        message,
    })?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioLoadError> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| ScenarioLoadError {
        path: display.clone(),
        line: None,
        column: None,
        message: e.to_string(),
    })?;
    parse_scenario(&display, &text)
}

fn validate_scenario(scenario: &Scenario) -> Result<(), String> {
    let mut labels = BTreeMap::new();
    for decl in &scenario.accounts {
        if decl.label == "zero" {
            return Err("the label \"zero\" is reserved for the zero address".into());
        }
        if labels.insert(decl.label.clone(), ()).is_some() {
            return Err(format!("duplicate account label {:?}", decl.label));
        }
        if let Some(addr) = decl.address {
            if addr.is_zero() {
                return Err(format!("account {:?} pins the zero address", decl.label));
            }
        }
    }
    let known = |label: &str| labels.contains_key(label);
    let check_ref = |step: usize, role: &str, label: &str| -> Result<(), String> {
        if known(label) {
            Ok(())
        } else {
            Err(format!(
                "step {step}: {role} references undeclared label {label:?}"
            ))
        }
    };
    for (i, step) in scenario.steps.iter().enumerate() {
        match step {
            Step::Mint { caller, .. }
            | Step::SetIdle { caller, .. }
            | Step::StartAuction { caller, .. }
            | Step::Bid { caller, .. }
            | Step::EndAuction { caller, .. } => check_ref(i, "caller", caller)?,
            Step::SetUser { caller, user, .. } => {
                check_ref(i, "caller", caller)?;
                if user != "zero" && !user.starts_with("0x") {
                    check_ref(i, "user", user)?;
                }
            }
            Step::AdvanceTime { .. } | Step::QueryUser { .. } => {}
        }
    }
    for (i, expectation) in scenario.expectations.iter().enumerate() {
        let check_account = |value: &str| -> Result<(), String> {
            if value == "zero" || known(value) {
                return Ok(());
            }
            if value.starts_with("0x") || value.starts_with("0X") {
                return value
                    .parse::<Address>()
                    .map(|_| ())
                    .map_err(|e| format!("expectation {i}: {e}"));
            }
            Err(format!("expectation {i}: unknown account {value:?}"))
        };
        match expectation {
            Expectation::Winner { expected, .. } => check_account(expected)?,
            Expectation::BalanceDelta {
                account,
                expected_wei,
            } => {
                if !known(account) {
                    return Err(format!("expectation {i}: unknown account {account:?}"));
                }
                parse_signed_wei(expected_wei).map_err(|e| format!("expectation {i}: {e}"))?;
            }
            Expectation::UserAtTime { expected, .. } => check_account(expected)?,
            Expectation::EventField { expected, .. } => {
                if !expected.is_string() && !expected.is_array() {
                    return Err(format!(
                        "expectation {i}: expected value must be a string or array of strings"
                    ));
                }
            }
            Expectation::TxCount { .. } | Expectation::GasTotal { .. } => {}
        }
    }
    Ok(())
}

fn parse_signed_wei(s: &str) -> Result<(bool, Wei), String> {
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let wei: Wei = digits.parse()?;
    Ok((negative && !wei.is_zero(), wei))
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

/// Per-step record for receipts.json.
#[derive(Clone, Debug)]
pub enum StepRecord {
    Tx {
        step: usize,
        op: &'static str,
        receipt: TxReceipt,
    },
    Clock {
        step: usize,
        now: u64,
    },
    Query {
        step: usize,
        token: TokenId,
        at: u64,
        user: Address,
    },
}

impl StepRecord {
    fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        match self {
            StepRecord::Tx { step, op, receipt } => {
                obj.insert("step".into(), (*step).into());
                obj.insert("op".into(), (*op).into());
                for (k, v) in receipt.to_json().as_object().expect("receipt object") {
                    obj.insert(k.clone(), v.clone());
                }
            }
            StepRecord::Clock { step, now } => {
                obj.insert("step".into(), (*step).into());
                obj.insert("op".into(), "advance_time".into());
                obj.insert("now".into(), (*now).into());
            }
            StepRecord::Query {
                step,
                token,
                at,
                user,
            } => {
                obj.insert("step".into(), (*step).into());
                obj.insert("op".into(), "query_user".into());
                obj.insert("token".into(), (*token).into());
                obj.insert("at".into(), (*at).into());
                obj.insert("user".into(), user.checksummed().into());
            }
        }
        serde_json::Value::Object(obj)
    }
}

pub struct ScenarioOutcome {
    pub name: String,
    pub labels: BTreeMap<String, Address>,
    pub initial_balances: BTreeMap<String, Wei>,
    pub records: Vec<StepRecord>,
    /// Events from successful transactions, in emission order.
    pub events: Vec<Event>,
    pub report_lines: Vec<String>,
    pub all_passed: bool,
    /// Set when a step reverted without `expect_revert`; execution stops.
    pub aborted: Option<String>,
    pub tx_count: u64,
    pub gas_total: u64,
    pub engine: Engine,
}

impl ScenarioOutcome {
    pub fn events_json(&self) -> String {
        let arr = serde_json::Value::Array(self.events.iter().map(Event::to_json).collect());
        let mut s = serde_json::to_string_pretty(&arr).expect("events serialize");
        s.push('\n');
        s
    }

    pub fn receipts_json(&self) -> String {
        let arr = serde_json::Value::Array(self.records.iter().map(StepRecord::to_json).collect());
        let mut s = serde_json::to_string_pretty(&arr).expect("receipts serialize");
        s.push('\n');
        s
    }

    pub fn report_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("scenario: {}\n", self.name));
        if let Some(reason) = &self.aborted {
            out.push_str(&format!("aborted: {reason}\n"));
        }
        for line in &self.report_lines {
            out.push_str(line);
            out.push('\n');
        }
        let passed = self
            .report_lines
            .iter()
            .filter(|l| l.starts_with("PASS"))
            .count();
        let failed = self.report_lines.len() - passed;
        out.push_str(&format!("result: {passed} passed, {failed} failed\n"));
        out
    }

    pub fn exit_code(&self) -> i32 {
        if self.aborted.is_some() || !self.all_passed {
            1
        } else {
            0
        }
    }

    /// Writes events.json, receipts.json and report.txt under `dir`.
    pub fn write_outputs(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("events.json"), self.events_json())?;
        fs::write(dir.join("receipts.json"), self.receipts_json())?;
        fs::write(dir.join("report.txt"), self.report_text())?;
        Ok(())
    }
}

fn resolve_account(value: &str, labels: &BTreeMap<String, Address>) -> Result<Address, String> {
    if value == "zero" {
        return Ok(Address::ZERO);
    }
    if value.starts_with("0x") || value.starts_with("0X") {
        return value
            .parse()
            .map_err(|e| format!("bad address literal {value:?}: {e}"));
    }
    labels
        .get(value)
        .copied()
        .ok_or_else(|| format!("unknown account label {value:?}"))
}

/// Executes a validated scenario on a fresh engine.
pub fn run_scenario(scenario: &Scenario) -> ScenarioOutcome {
    let schedule = scenario.schedule_overrides.clone().unwrap_or_default();
    let mut engine = Engine::with_schedule(schedule);

    let mut labels = BTreeMap::new();
    let mut initial_balances: BTreeMap<String, Wei> = BTreeMap::new();
    for decl in &scenario.accounts {
        let addr = match decl.address {
            Some(addr) => {
                engine
                    .create_account_at(addr, decl.initial_balance_wei.clone())
                    .expect("validated pinned address");
                addr
            }
            None => engine.create_account(decl.initial_balance_wei.clone()),
        };
        labels.insert(decl.label.clone(), addr);
        initial_balances.insert(decl.label.clone(), decl.initial_balance_wei.clone());
    }

    let mut records = Vec::new();
    let mut events = Vec::new();
    let mut tx_count = 0u64;
    let mut gas_total = 0u64;
    let mut aborted = None;

    for (i, step) in scenario.steps.iter().enumerate() {
        let (caller, call, expect_revert) = match step {
            Step::AdvanceTime { delta } => {
                let now = engine.advance_time(*delta);
                records.push(StepRecord::Clock {
                    step: i,
                    now: now.0,
                });
                continue;
            }
            Step::QueryUser { token, at } => match engine.user_of(*token, Timestamp(*at)) {
                Ok(user) => {
                    records.push(StepRecord::Query {
                        step: i,
                        token: *token,
                        at: *at,
                        user,
                    });
                    continue;
                }
                Err(e) => {
                    aborted = Some(format!("step {i} (query_user): {e}"));
                    break;
                }
            },
            Step::Mint {
                caller,
                start_freq,
                end_freq,
                location,
                expect_revert,
            } => (
                caller,
                Call::Mint {
                    start_freq: start_freq.clone(),
                    end_freq: end_freq.clone(),
                    location: location.clone(),
                },
                *expect_revert,
            ),
            Step::SetIdle {
                caller,
                token,
                starts,
                ends,
                expect_revert,
            } => (
                caller,
                Call::SetSpectrumIdleTime {
                    token_id: *token,
                    idle_starts: starts.iter().copied().map(Timestamp).collect(),
                    idle_ends: ends.iter().copied().map(Timestamp).collect(),
                },
                *expect_revert,
            ),
            Step::StartAuction {
                caller,
                token,
                duration,
                slot_count,
                bottom_price_wei,
                expect_revert,
            } => (
                caller,
                Call::StartAuction {
                    token_id: *token,
                    auction_duration: *duration,
                    time_slot_count: *slot_count,
                    bottom_price: bottom_price_wei.clone(),
                },
                *expect_revert,
            ),
            Step::Bid {
                caller,
                token,
                slot,
                value_wei: _,
                expect_revert,
            } => (
                caller,
                Call::Bid {
                    token_id: *token,
                    time_slot_id: *slot,
                },
                *expect_revert,
            ),
            Step::EndAuction {
                caller,
                token,
                expect_revert,
            } => (
                caller,
                Call::EndAuction { token_id: *token },
                *expect_revert,
            ),
            Step::SetUser {
                caller,
                token,
                user,
                expires,
                expect_revert,
            } => {
                let user_addr = match resolve_account(user, &labels) {
                    Ok(a) => a,
                    Err(e) => {
                        aborted = Some(format!("step {i} (set_user): {e}"));
                        break;
                    }
                };
                (
                    caller,
                    Call::SetUser {
                        token_id: *token,
                        user: user_addr,
                        expires: Timestamp(*expires),
                    },
                    *expect_revert,
                )
            }
        };

        let caller_addr = match resolve_account(caller, &labels) {
            Ok(a) => a,
            Err(e) => {
                aborted = Some(format!("step {i}: {e}"));
                break;
            }
        };
        let value = match step {
            Step::Bid { value_wei, .. } => value_wei.clone(),
            _ => Wei::zero(),
        };
        let outcome = engine.execute_tx(caller_addr, value, call);
        tx_count += 1;
        gas_total += outcome.receipt.gas_used;
        events.extend(outcome.receipt.events.iter().cloned());
        let reverted = !outcome.receipt.succeeded();
        let reason = outcome.receipt.revert_reason.clone();
        records.push(StepRecord::Tx {
            step: i,
            op: step.op_name(),
            receipt: outcome.receipt,
        });
        if reverted && !expect_revert {
            aborted = Some(format!(
                "step {i} ({}) reverted: {}",
                step.op_name(),
                reason.unwrap_or_default()
            ));
            break;
        }
        if !reverted && expect_revert {
            aborted = Some(format!(
                "step {i} ({}) succeeded but expect_revert was set",
                step.op_name()
            ));
            break;
        }
    }

    let mut report_lines = Vec::new();
    let mut all_passed = aborted.is_none();
    for (i, expectation) in scenario.expectations.iter().enumerate() {
        let line = evaluate_expectation(
            i,
            expectation,
            &engine,
            &labels,
            &initial_balances,
            &events,
            tx_count,
            gas_total,
        );
        if !line.starts_with("PASS") {
            all_passed = false;
        }
        report_lines.push(line);
    }

    ScenarioOutcome {
        name: scenario.name.clone(),
        labels,
        initial_balances,
        records,
        events,
        report_lines,
        all_passed,
        aborted,
        tx_count,
        gas_total,
        engine,
    }
}

fn describe_address(addr: Address, labels: &BTreeMap<String, Address>) -> String {
    if addr.is_zero() {
        return "zero".to_string();
    }
    for (label, a) in labels {
        if *a == addr {
            return format!("{} ({})", addr.checksummed(), label);
        }
    }
    addr.checksummed()
}

#[allow(clippy::too_many_arguments)]
fn evaluate_expectation(
    index: usize,
    expectation: &Expectation,
    engine: &Engine,
    labels: &BTreeMap<String, Address>,
    initial_balances: &BTreeMap<String, Wei>,
    events: &[Event],
    tx_count: u64,
    gas_total: u64,
) -> String {
    let verdict = |pass: bool, desc: String| {
        format!("{} {index}: {desc}", if pass { "PASS" } else { "FAIL" })
    };
    match expectation {
        Expectation::Winner {
            token,
            slot,
            expected,
        } => {
            let expected_addr = match resolve_account(expected, labels) {
                Ok(a) => a,
                Err(e) => return verdict(false, format!("winner: {e}")),
            };
            let actual = engine
                .auction(*token)
                .and_then(|a| a.slot(*slot))
                .map(|s| s.highest_bidder);
            match actual {
                Some(actual) => verdict(
                    actual == expected_addr,
                    format!(
                        "winner token={token} slot={slot} expected={} actual={}",
                        describe_address(expected_addr, labels),
                        describe_address(actual, labels)
                    ),
                ),
                None => verdict(
                    false,
                    format!("winner token={token} slot={slot}: no such auction slot"),
                ),
            }
        }
        Expectation::BalanceDelta {
            account,
            expected_wei,
        } => {
            let (neg, magnitude) = parse_signed_wei(expected_wei).expect("validated");
            let addr = labels[account];
            let initial = &initial_balances[account];
            let current = match engine.get_balance(addr) {
                Ok(b) => b,
                Err(e) => return verdict(false, format!("balance_delta {account}: {e}")),
            };
            let (actual_neg, actual_magnitude) = match current.checked_sub(initial) {
                Some(gain) => (false, gain),
                None => (true, initial.checked_sub(&current).expect("ordered")),
            };
            let actual_neg = actual_neg && !actual_magnitude.is_zero();
            let pass = actual_neg == neg && actual_magnitude == magnitude;
            let fmt_signed = |neg: bool, w: &Wei| format!("{}{w}", if neg { "-" } else { "" });
            verdict(
                pass,
                format!(
                    "balance_delta {account} expected={} actual={}",
                    fmt_signed(neg, &magnitude),
                    fmt_signed(actual_neg, &actual_magnitude)
                ),
            )
        }
        Expectation::EventField {
            event,
            occurrence,
            field,
            expected,
        } => {
            let found = events.iter().filter(|e| &e.name == event).nth(*occurrence);
            let Some(found) = found else {
                return verdict(
                    false,
                    format!("event_field: no occurrence {occurrence} of event {event:?}"),
                );
            };
            let Some(actual) = found.field(field) else {
                return verdict(
                    false,
                    format!("event_field: {event:?} has no field {field:?}"),
                );
            };
            let pass = match (expected, actual) {
                (serde_json::Value::String(s), EventValue::Str(a)) => s == a,
                (serde_json::Value::Array(items), EventValue::List(a)) => {
                    items.len() == a.len()
                        && items
                            .iter()
                            .zip(a)
                            .all(|(e, v)| e.as_str() == Some(v.as_str()))
                }
                _ => false,
            };
            verdict(
                pass,
                format!(
                    "event_field {event}[{occurrence}].{field} expected={expected} actual={}",
                    serde_json::to_string(&actual.to_json_value()).expect("json")
                ),
            )
        }
        Expectation::UserAtTime {
            token,
            at,
            expected,
        } => {
            let expected_addr = match resolve_account(expected, labels) {
                Ok(a) => a,
                Err(e) => return verdict(false, format!("user_at_time: {e}")),
            };
            match engine.user_of(*token, Timestamp(*at)) {
                Ok(actual) => verdict(
                    actual == expected_addr,
                    format!(
                        "user_at_time token={token} at={at} expected={} actual={}",
                        describe_address(expected_addr, labels),
                        describe_address(actual, labels)
                    ),
                ),
                Err(e) => verdict(false, format!("user_at_time token={token}: {e}")),
            }
        }
        Expectation::TxCount { expected } => verdict(
            tx_count == *expected,
            format!("tx_count expected={expected} actual={tx_count}"),
        ),
        Expectation::GasTotal { expected } => verdict(
            gas_total == *expected,
            format!("gas_total expected={expected} actual={gas_total}"),
        ),
    }
}

impl EventValue {
    fn to_json_value(&self) -> serde_json::Value {
        match self {
            EventValue::Str(s) => serde_json::Value::String(s.clone()),
            EventValue::List(v) => {
                serde_json::Value::Array(v.iter().cloned().map(serde_json::Value::String).collect())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Built-in demo
// ---------------------------------------------------------------------------

/// The pinned identities used by the built-in demo (a well-known development
/// account set), so runs reproduce the reference event logs exactly.
pub mod demo_accounts {
    pub const PU: &str = "0xdD870fA1b7C4700F2BD7f44238821C26f7392148";
    pub const SU1: &str = "0x5B38Da6a701c568545dCfcB03FcB875f56beddC4";
    pub const SU2: &str = "0xAb8483F64d9C6d1EcF9b849Ae677dD3315835cb2";
    pub const SU3: &str = "0x4B20993Bc481177ec7E8f571ceCaE8A9e22C02db";
    pub const SU4: &str = "0x78731D3Ca6b7E34aC0F824c42a7cC18A495cabaB";
    pub const SU5: &str = "0x617F2E2fD72FD9D5503197092aC168c91465E7f2";
    pub const SU6: &str = "0x17F6AD8Ef982297579C203069C1DbfFE4348c372";
}

const DEMO_START_CLOCK: u64 = 1_749_476_000;
pub const DEMO_SLOT_STARTS: [u64; 3] = [1_749_476_800, 1_749_477_000, 1_749_477_200];
pub const DEMO_SLOT_ENDS: [u64; 3] = [1_749_476_900, 1_749_477_100, 1_749_477_300];

fn eth(n: u64) -> Wei {
    Wei::from_eth(n)
}

/// Built-in demo: one owner tokenizes a 600-800 MHz band, configures three
/// idle slots, auctions them (180 s, 10 ETH floor), eight bids arrive across
/// the slots, and the auction settles with batch authorization.
pub fn demo_scenario() -> Scenario {
    use demo_accounts::*;
    let account = |label: &str, addr: &str| AccountDecl {
        label: label.to_string(),
        initial_balance_wei: eth(100),
        address: Some(addr.parse().expect("pinned address")),
    };
    let bid = |caller: &str, slot: usize, amount: u64| Step::Bid {
        caller: caller.to_string(),
        token: 1,
        slot,
        value_wei: eth(amount),
        expect_revert: false,
    };
    let strings = |values: &[String]| {
        serde_json::Value::Array(
            values
                .iter()
                .cloned()
                .map(serde_json::Value::String)
                .collect(),
        )
    };

    Scenario {
        name: "demo".to_string(),
        accounts: vec![
            account("PU", PU),
            account("SU1", SU1),
            account("SU2", SU2),
            account("SU3", SU3),
            account("SU4", SU4),
            account("SU5", SU5),
            account("SU6", SU6),
        ],
        schedule_overrides: None,
        steps: vec![
            Step::AdvanceTime {
                delta: DEMO_START_CLOCK,
            },
            Step::Mint {
                caller: "PU".to_string(),
                start_freq: "600MHz".to_string(),
                end_freq: "800MHz".to_string(),
                location: "CityA".to_string(),
                expect_revert: false,
            },
            Step::SetIdle {
                caller: "PU".to_string(),
                token: 1,
                starts: DEMO_SLOT_STARTS.to_vec(),
                ends: DEMO_SLOT_ENDS.to_vec(),
                expect_revert: false,
            },
            Step::StartAuction {
                caller: "PU".to_string(),
                token: 1,
                duration: 180,
                slot_count: 3,
                bottom_price_wei: eth(10),
                expect_revert: false,
            },
            bid("SU1", 0, 11),
            bid("SU2", 0, 12),
            bid("SU3", 0, 13),
            bid("SU1", 0, 5),
            bid("SU4", 1, 11),
            bid("SU5", 1, 12),
            bid("SU4", 1, 3),
            bid("SU6", 2, 11),
            Step::AdvanceTime { delta: 200 },
            Step::EndAuction {
                caller: "PU".to_string(),
                token: 1,
                expect_revert: false,
            },
            Step::QueryUser {
                token: 1,
                at: 1_749_476_850,
            },
            Step::QueryUser {
                token: 1,
                at: 1_749_477_050,
            },
            Step::QueryUser {
                token: 1,
                at: 1_749_477_250,
            },
        ],
        expectations: vec![
            Expectation::Winner {
                token: 1,
                slot: 0,
                expected: "SU1".into(),
            },
            Expectation::Winner {
                token: 1,
                slot: 1,
                expected: "SU4".into(),
            },
            Expectation::Winner {
                token: 1,
                slot: 2,
                expected: "SU6".into(),
            },
            Expectation::BalanceDelta {
                account: "PU".into(),
                expected_wei: eth(41).to_string(),
            },
            Expectation::BalanceDelta {
                account: "SU1".into(),
                expected_wei: format!("-{}", eth(16)),
            },
            Expectation::BalanceDelta {
                account: "SU2".into(),
                expected_wei: "0".into(),
            },
            Expectation::BalanceDelta {
                account: "SU3".into(),
                expected_wei: "0".into(),
            },
            Expectation::BalanceDelta {
                account: "SU4".into(),
                expected_wei: format!("-{}", eth(14)),
            },
            Expectation::BalanceDelta {
                account: "SU5".into(),
                expected_wei: "0".into(),
            },
            Expectation::BalanceDelta {
                account: "SU6".into(),
                expected_wei: format!("-{}", eth(11)),
            },
            Expectation::EventField {
                event: "UpdateUser".into(),
                occurrence: 0,
                field: "users".into(),
                expected: strings(&[SU1.to_string(), SU4.to_string(), SU6.to_string()]),
            },
            Expectation::EventField {
                event: "UpdateUser".into(),
                occurrence: 0,
                field: "startUseTimes".into(),
                expected: strings(&DEMO_SLOT_STARTS.map(|t| t.to_string())),
            },
            Expectation::EventField {
                event: "UpdateUser".into(),
                occurrence: 0,
                field: "endUseTimes".into(),
                expected: strings(&DEMO_SLOT_ENDS.map(|t| t.to_string())),
            },
            Expectation::EventField {
                event: "Refund".into(),
                occurrence: 0,
                field: "amountWei".into(),
                expected: serde_json::Value::String(eth(12).to_string()),
            },
            Expectation::EventField {
                event: "Refund".into(),
                occurrence: 1,
                field: "amountWei".into(),
                expected: serde_json::Value::String(eth(13).to_string()),
            },
            Expectation::EventField {
                event: "Refund".into(),
                occurrence: 2,
                field: "amountWei".into(),
                expected: serde_json::Value::String(eth(12).to_string()),
            },
            Expectation::UserAtTime {
                token: 1,
                at: 1_749_476_850,
                expected: "SU1".into(),
            },
            Expectation::UserAtTime {
                token: 1,
                at: 1_749_476_950,
                expected: "zero".into(),
            },
            Expectation::UserAtTime {
                token: 1,
                at: 1_749_477_050,
                expected: "SU4".into(),
            },
            Expectation::UserAtTime {
                token: 1,
                at: 1_749_477_250,
                expected: "SU6".into(),
            },
            Expectation::UserAtTime {
                token: 1,
                at: 1_749_477_300,
                expected: "zero".into(),
            },
            Expectation::TxCount { expected: 12 },
        ],
    }
}

/// Human-readable settlement summary printed by the `demo` subcommand.
pub fn demo_summary(outcome: &ScenarioOutcome) -> String {
    let mut out = String::new();
    out.push_str("winners:\n");
    if let (Some(auction), Some(token)) = (outcome.engine.auction(1), outcome.engine.token(1)) {
        for (i, slot) in auction.slots.iter().enumerate() {
            out.push_str(&format!(
                "  slot {i} [{}, {}): {}\n",
                token.idle_start_timestamps[i],
                token.idle_end_timestamps[i],
                describe_address(slot.highest_bidder, &outcome.labels)
            ));
        }
    }
    let seller = outcome.labels["PU"];
    let seller_initial = &outcome.initial_balances["PU"];
    let payout = outcome
        .engine
        .get_balance(seller)
        .ok()
        .and_then(|b| b.checked_sub(seller_initial))
        .unwrap_or_else(Wei::zero);
    out.push_str(&format!("seller payout: {payout} wei\n"));
    out.push_str("refunds:\n");
    for event in outcome.events.iter().filter(|e| e.name == "Refund") {
        let bidder = event
            .field("bidder")
            .and_then(EventValue::as_str)
            .unwrap_or("?");
        let amount = event
            .field("amountWei")
            .and_then(EventValue::as_str)
            .unwrap_or("?");
        let addr: Address = bidder.parse().unwrap_or(Address::ZERO);
        out.push_str(&format!(
            "  {}: {amount} wei\n",
            describe_address(addr, &outcome.labels)
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Gas sweep
// ---------------------------------------------------------------------------

pub struct GasSweep {
    pub csv: String,
    pub summary: String,
    pub crossover: Option<u64>,
    pub fit: CalibrationFit,
}

/// Tabulates both flows for 1..=max_slots and fits the calibration targets.
/// CSV rows use CRLF line endings (RFC 4180).
pub fn gas_sweep(max_slots: u64, schedule: &GasSchedule) -> Result<GasSweep, EngineError> {
    let seq = gas_for_erc4907_flow(max_slots, schedule)?;
    let batch = gas_for_m_erc4907_flow(max_slots, schedule)?;
    let mut csv = String::from("slot_count,erc4907_gas,m_erc4907_gas,erc4907_tx,m_erc4907_tx\r\n");
    for k in 1..=max_slots {
        let i = (k - 1) as usize;
        csv.push_str(&format!(
            "{k},{},{},{k},1\r\n",
            seq.per_point_gas[i], batch.per_point_gas[i]
        ));
    }
    let crossover = total_gas_crossover(max_slots, schedule)?;
    let fit = calibrate(schedule, &CalibrationTargets::default())?;
    let targets = CalibrationTargets::default();
    let mut summary = String::new();
    summary.push_str(&format!(
        "sequential marginal: {} gas per slot (one transaction each)\n",
        seq.marginal_gas.first().copied().unwrap_or(seq.total_gas)
    ));
    summary.push_str(&format!(
        "batch average marginal: {:.1} gas per slot (single transaction)\n",
        batch.average_marginal()
    ));
    summary.push_str(&match crossover {
        Some(n) => format!("batch total overtakes sequential total at slot_count = {n}\n"),
        None => format!("no total-gas crossover within {max_slots} slots\n"),
    });
    summary.push_str(&format!(
        "calibrated marginals: sequential {:.1} (target {}, residual {:.4}%), batch {:.1} (target {}, residual {:.4}%)\n",
        fit.fitted_erc4907_marginal,
        targets.erc4907_marginal,
        fit.erc4907_residual * 100.0,
        fit.fitted_m_erc4907_marginal,
        targets.m_erc4907_marginal,
        fit.m_erc4907_residual * 100.0,
    ));
    summary.push_str(&format!(
        "calibration deltas: tx_base {:+}, slot writes {:+}\n",
        fit.tx_base_delta, fit.slot_write_delta
    ));
    Ok(GasSweep {
        csv,
        summary,
        crossover,
        fit,
    })
}
