//! Deterministic engine and scenario simulator for multi-slot spectrum
//! leasing over rentable non-fungible spectrum tokens.
//!
//! The crate models four cooperating pieces:
//!
//! * [`sim`]: accounts, exact wei balances, a logical clock, and atomic
//!   transaction application with revert-on-error semantics.
//! * [`ledger`]: the spectrum token registry, idle-slot schedules, the
//!   single-user baseline authorization and the batch multi-user extension
//!   with time-windowed expiry.
//! * [`auction`]: a synchronous multi-slot English auction with refund
//!   stacking, seller payout and batch winner authorization.
//! * [`gas`]: an analytical gas model comparing sequential and batch
//!   authorization flows, including 32-byte storage-slot packing.
//! * [`scenario`]: declarative JSON scenarios, golden event logs, gas
//!   sweeps and the built-in demo driven by the `spectrum-sim` binary.

pub mod auction;
pub mod gas;
pub mod ledger;
pub mod scenario;
pub mod sim;

pub use auction::{AuctionState, TimeSlotAuction};
pub use gas::{
    calibrate, gas_for_erc4907_flow, gas_for_m_erc4907_flow, packed_slots, CalibrationFit,
    CalibrationTargets, FlowMethod, GasReport, GasSchedule, StorageFootprint,
};
pub use ledger::{Nfst, SlotUserRecord, TokenId};
pub use scenario::{run_scenario, Scenario, ScenarioOutcome, Step};
pub use sim::{
    Address, Call, CallReturn, Engine, EngineError, Event, EventValue, Timestamp, TxOutcome,
    TxReceipt, TxStatus, Wei,
};
