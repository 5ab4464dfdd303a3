//! Deterministic execution environment: identities, wei balances, a logical
//! clock, and atomic transaction application with revert-on-error semantics.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use sha3::{Digest, Keccak256};

use crate::auction::AuctionState;
use crate::gas::{attach_gas, GasSchedule, StorageFootprint};
use crate::ledger::{Nfst, TokenId};

/// Default per-transaction gas cap (post-London mainnet block limit).
pub const DEFAULT_BLOCK_GAS_LIMIT: u64 = 30_000_000;

// ---------------------------------------------------------------------------
// Address
// ---------------------------------------------------------------------------

/// 20-byte account identifier.
///
/// `Display` is the canonical 0x-prefixed lowercase hex form. Event logs use
/// the mixed-case [`Address::checksummed`] rendering instead.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(pub [u8; 20]);

impl Address {
    /// The all-zero sentinel. Never a valid caller or account.
    pub const ZERO: Address = Address([0u8; 20]);

    pub fn is_zero(&self) -> bool {
        self.0 == [0u8; 20]
    }

    /// Mixed-case checksum rendering (EIP-55 style): a hex letter is
    /// uppercased when the matching nibble of keccak256(lowercase hex) >= 8.
    pub fn checksummed(&self) -> String {
        let hex = lower_hex(&self.0);
        let hash = Keccak256::digest(hex.as_bytes());
        let mut out = String::with_capacity(42);
        out.push_str("0x");
        for (i, c) in hex.chars().enumerate() {
            let nibble = if i % 2 == 0 {
                hash[i / 2] >> 4
            } else {
                hash[i / 2] & 0x0f
            };
            if c.is_ascii_alphabetic() && nibble >= 8 {
                out.push(c.to_ascii_uppercase());
            } else {
                out.push(c);
            }
        }
        out
    }
}

fn lower_hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push(char::from_digit((b >> 4) as u32, 16).unwrap());
        s.push(char::from_digit((b & 0x0f) as u32, 16).unwrap());
    }
    s
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", lower_hex(&self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({self})")
    }
}

impl FromStr for Address {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .unwrap_or(s);
        if hex.len() != 40 {
            return Err(format!("address must be 40 hex digits, got {}", hex.len()));
        }
        let mut bytes = [0u8; 20];
        for (i, chunk) in hex.as_bytes().chunks(2).enumerate() {
            let hi = (chunk[0] as char).to_digit(16).ok_or("invalid hex digit")?;
            let lo = (chunk[1] as char).to_digit(16).ok_or("invalid hex digit")?;
            bytes[i] = ((hi << 4) | lo) as u8;
        }
        Ok(Address(bytes))
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Wei
// ---------------------------------------------------------------------------

/// Exact non-negative currency amount in wei (10^18 wei = 1 ETH).
///
/// All arithmetic is arbitrary-precision integer arithmetic. Subtraction
/// below zero is an error, never saturation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Wei(BigUint);

impl Wei {
    pub fn zero() -> Wei {
        Wei(BigUint::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Whole-ETH convenience constructor.
    pub fn from_eth(eth: u64) -> Wei {
        Wei(BigUint::from(eth) * BigUint::from(10u64).pow(18))
    }

    pub fn checked_sub(&self, other: &Wei) -> Option<Wei> {
        if self.0 >= other.0 {
            Some(Wei(&self.0 - &other.0))
        } else {
            None
        }
    }
}

impl From<u64> for Wei {
    fn from(v: u64) -> Wei {
        Wei(BigUint::from(v))
    }
}

impl From<u128> for Wei {
    fn from(v: u128) -> Wei {
        Wei(BigUint::from(v))
    }
}

impl std::ops::Add<&Wei> for &Wei {
    type Output = Wei;
    fn add(self, rhs: &Wei) -> Wei {
        Wei(&self.0 + &rhs.0)
    }
}

impl std::ops::AddAssign<&Wei> for Wei {
    fn add_assign(&mut self, rhs: &Wei) {
        self.0 += &rhs.0;
    }
}

impl<'a> std::iter::Sum<&'a Wei> for Wei {
    fn sum<I: Iterator<Item = &'a Wei>>(iter: I) -> Wei {
        let mut acc = Wei::zero();
        for w in iter {
            acc += w;
        }
        acc
    }
}

impl fmt::Display for Wei {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Wei {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Wei({})", self.0)
    }
}

impl FromStr for Wei {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!(
                "wei amount must be a decimal digit string, got {s:?}"
            ));
        }
        Ok(Wei(BigUint::from_str(s).map_err(|e| e.to_string())?))
    }
}

impl Serialize for Wei {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Wei {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Timestamp
// ---------------------------------------------------------------------------

/// Unix epoch seconds. The engine clock only moves forward.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn plus(&self, seconds: u64) -> Timestamp {
        Timestamp(self.0.checked_add(seconds).expect("clock overflow"))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Timestamp({})", self.0)
    }
}

// ---------------------------------------------------------------------------
// Events and receipts
// ---------------------------------------------------------------------------

/// A single event argument value as it appears in the JSON log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventValue {
    Str(String),
    List(Vec<String>),
}

impl EventValue {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            EventValue::Str(s) => Some(s),
            EventValue::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[String]> {
        match self {
            EventValue::Str(_) => None,
            EventValue::List(v) => Some(v.as_slice()),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            EventValue::Str(s) => serde_json::Value::String(s.clone()),
            EventValue::List(v) => {
                serde_json::Value::Array(v.iter().cloned().map(serde_json::Value::String).collect())
            }
        }
    }
}

/// A protocol event: name plus ordered name/value argument pairs.
///
/// Field order is part of the log contract, so arguments are kept as an
/// ordered list rather than a map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub name: String,
    pub fields: Vec<(String, EventValue)>,
}

impl Event {
    pub fn new(name: &str) -> Event {
        Event {
            name: name.to_string(),
            fields: Vec::new(),
        }
    }

    pub fn with_str(mut self, key: &str, value: impl Into<String>) -> Event {
        self.fields
            .push((key.to_string(), EventValue::Str(value.into())));
        self
    }

    pub fn with_list(mut self, key: &str, value: Vec<String>) -> Event {
        self.fields.push((key.to_string(), EventValue::List(value)));
        self
    }

    pub fn field(&self, key: &str) -> Option<&EventValue> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Log form: `{"event": <name>, "args": {..ordered fields..}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut args = serde_json::Map::new();
        for (k, v) in &self.fields {
            args.insert(k.clone(), v.to_json());
        }
        let mut obj = serde_json::Map::new();
        obj.insert(
            "event".to_string(),
            serde_json::Value::String(self.name.clone()),
        );
        obj.insert("args".to_string(), serde_json::Value::Object(args));
        serde_json::Value::Object(obj)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TxStatus {
    Success,
    Reverted,
}

/// Outcome of one applied transaction.
///
/// A reverted receipt carries zero events and the world state is left
/// byte-identical to the pre-state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxReceipt {
    pub status: TxStatus,
    pub gas_used: u64,
    pub events: Vec<Event>,
    pub revert_reason: Option<String>,
}

impl TxReceipt {
    pub fn succeeded(&self) -> bool {
        self.status == TxStatus::Success
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert(
            "status".to_string(),
            serde_json::Value::String(
                match self.status {
                    TxStatus::Success => "success",
                    TxStatus::Reverted => "reverted",
                }
                .to_string(),
            ),
        );
        obj.insert(
            "gas_used".to_string(),
            serde_json::Value::from(self.gas_used),
        );
        obj.insert(
            "events".to_string(),
            serde_json::Value::Array(self.events.iter().map(Event::to_json).collect()),
        );
        obj.insert(
            "revert_reason".to_string(),
            match &self.revert_reason {
                Some(r) => serde_json::Value::String(r.clone()),
                None => serde_json::Value::Null,
            },
        );
        serde_json::Value::Object(obj)
    }
}

// ---------------------------------------------------------------------------
// Calls
// ---------------------------------------------------------------------------

/// Protocol-call descriptor dispatched by [`Engine::execute_tx`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Call {
    Mint {
        start_freq: String,
        end_freq: String,
        location: String,
    },
    SetSpectrumIdleTime {
        token_id: TokenId,
        idle_starts: Vec<Timestamp>,
        idle_ends: Vec<Timestamp>,
    },
    ApproveOperator {
        token_id: TokenId,
        operator: Address,
    },
    /// Single-user baseline authorization (one user, one lease window).
    SetUser {
        token_id: TokenId,
        user: Address,
        expires: Timestamp,
    },
    /// Batch multi-user authorization across all idle slots at once.
    BatchSetUser {
        token_id: TokenId,
        users: Vec<Address>,
        start_times: Vec<Timestamp>,
        end_times: Vec<Timestamp>,
    },
    StartAuction {
        token_id: TokenId,
        auction_duration: u64,
        time_slot_count: usize,
        bottom_price: Wei,
    },
    /// The bid amount is the value attached to the transaction.
    Bid {
        token_id: TokenId,
        time_slot_id: usize,
    },
    EndAuction {
        token_id: TokenId,
    },
}

impl Call {
    fn is_payable(&self) -> bool {
        matches!(self, Call::Bid { .. })
    }
}

/// Value returned by a successful call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CallReturn {
    Unit,
    Bool(bool),
    TokenId(TokenId),
    Winners(Vec<Address>),
}

/// Internal result of a call handler before gas pricing.
pub(crate) struct CallEffect {
    pub ret: CallReturn,
    pub events: Vec<Event>,
    pub footprint: StorageFootprint,
}

impl CallEffect {
    pub(crate) fn returning(ret: CallReturn) -> CallEffect {
        CallEffect {
            ret,
            events: Vec::new(),
            footprint: StorageFootprint::default(),
        }
    }
}

/// Receipt plus the call's return value.
#[derive(Clone, Debug)]
pub struct TxOutcome {
    pub receipt: TxReceipt,
    pub returned: CallReturn,
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("zero address is not a valid caller")]
    ZeroAddressCaller,
    #[error("unknown account {0}")]
    UnknownAccount(Address),
    #[error("account {0} already exists")]
    AccountExists(Address),
    #[error("insufficient balance")]
    InsufficientBalance,
    #[error("call is not payable")]
    NotPayable,
    #[error("transaction gas {used} exceeds block gas limit {limit}")]
    GasLimitExceeded { used: u64, limit: u64 },
    #[error("unknown token {0}")]
    UnknownToken(TokenId),
    #[error("caller is not authorized")]
    NotAuthorized,
    #[error("caller is not the token owner")]
    NotOwner,
    #[error("invalid idle slot schedule: {0}")]
    InvalidSlotSchedule(String),
    #[error("an auction is active on token {0}")]
    AuctionActive(TokenId),
    #[error("no auction exists for token {0}")]
    NoAuction(TokenId),
    #[error("auction already ended")]
    AuctionAlreadyEnded,
    #[error("auction still running")]
    AuctionStillRunning,
    #[error("time slot {0} is out of range")]
    InvalidTimeSlot(usize),
    #[error("token owner and operators may not bid")]
    SelfDealingBid,
    #[error("caller is already the highest bidder")]
    AlreadyHighestBidder,
    #[error("bidding period is over")]
    BiddingClosed,
    #[error("bid does not exceed the current highest bid")]
    BidTooLow,
    #[error("bid is below the bottom price")]
    BidBelowBottomPrice,
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("slot interval mismatch at index {0}")]
    IntervalMismatch(usize),
    #[error("zero address is not a valid argument")]
    ZeroAddressArgument,
    #[error("escrow accounting underflow")]
    EscrowUnderflow,
    #[error("gas model error: {0}")]
    Gas(String),
}

// ---------------------------------------------------------------------------
// World state and engine
// ---------------------------------------------------------------------------

/// Complete mutable protocol state. Cloned wholesale to implement revert.
#[derive(Clone)]
pub(crate) struct World {
    pub clock: Timestamp,
    pub accounts: BTreeMap<Address, Wei>,
    /// Currency held by live auctions (standing bids plus refund ledger).
    pub escrow: Wei,
    pub next_account: u64,
    pub tokens: BTreeMap<TokenId, Nfst>,
    pub next_token_id: TokenId,
    pub auctions: BTreeMap<TokenId, AuctionState>,
    /// Escrowed outbid amounts keyed by (token, slot, bidder).
    pub refunds: BTreeMap<(TokenId, usize, Address), Wei>,
}

impl World {
    fn new() -> World {
        World {
            clock: Timestamp(0),
            accounts: BTreeMap::new(),
            escrow: Wei::zero(),
            next_account: 0,
            tokens: BTreeMap::new(),
            next_token_id: 1,
            auctions: BTreeMap::new(),
            refunds: BTreeMap::new(),
        }
    }

    pub(crate) fn credit(&mut self, addr: Address, amount: &Wei) {
        let balance = self.accounts.entry(addr).or_insert_with(Wei::zero);
        *balance += amount;
    }

    pub(crate) fn refund_balance(&self, token_id: TokenId, slot: usize, bidder: Address) -> Wei {
        self.refunds
            .get(&(token_id, slot, bidder))
            .cloned()
            .unwrap_or_else(Wei::zero)
    }
}

/// Single-threaded deterministic execution engine.
///
/// The engine may be moved between threads but is never mutated
/// concurrently; parallel tests use independent instances.
pub struct Engine {
    world: World,
    schedule: GasSchedule,
    block_gas_limit: u64,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

impl Engine {
    pub fn new() -> Engine {
        Engine::with_schedule(GasSchedule::default())
    }

    pub fn with_schedule(schedule: GasSchedule) -> Engine {
        Engine {
            world: World::new(),
            schedule,
            block_gas_limit: DEFAULT_BLOCK_GAS_LIMIT,
        }
    }

    pub fn schedule(&self) -> &GasSchedule {
        &self.schedule
    }

    pub fn block_gas_limit(&self) -> u64 {
        self.block_gas_limit
    }

    pub fn set_block_gas_limit(&mut self, limit: u64) {
        self.block_gas_limit = limit;
    }

    pub fn now(&self) -> Timestamp {
        self.world.clock
    }

    /// Creates a fresh account with a deterministic, unique non-zero address.
    pub fn create_account(&mut self, initial_balance: Wei) -> Address {
        loop {
            self.world.next_account += 1;
            let mut bytes = [0u8; 20];
            bytes[12..20].copy_from_slice(&self.world.next_account.to_be_bytes());
            if let std::collections::btree_map::Entry::Vacant(entry) =
                self.world.accounts.entry(Address(bytes))
            {
                let addr = *entry.key();
                entry.insert(initial_balance);
                return addr;
            }
        }
    }

    /// Creates an account at a caller-chosen address (used to pin well-known
    /// identities in scenarios).
    pub fn create_account_at(
        &mut self,
        addr: Address,
        initial_balance: Wei,
    ) -> Result<(), EngineError> {
        if addr.is_zero() {
            return Err(EngineError::ZeroAddressCaller);
        }
        if self.world.accounts.contains_key(&addr) {
            return Err(EngineError::AccountExists(addr));
        }
        self.world.accounts.insert(addr, initial_balance);
        Ok(())
    }

    /// Advances the logical clock and returns the new value.
    pub fn advance_time(&mut self, delta_seconds: u64) -> Timestamp {
        self.world.clock = self.world.clock.plus(delta_seconds);
        self.world.clock
    }

    pub fn get_balance(&self, addr: Address) -> Result<Wei, EngineError> {
        if addr.is_zero() {
            return Err(EngineError::UnknownAccount(addr));
        }
        self.world
            .accounts
            .get(&addr)
            .cloned()
            .ok_or(EngineError::UnknownAccount(addr))
    }

    pub fn account_exists(&self, addr: Address) -> bool {
        self.world.accounts.contains_key(&addr)
    }

    /// Sum of all balances plus engine-held escrow. Constant across any
    /// transaction sequence once accounts are funded.
    pub fn total_supply(&self) -> Wei {
        let mut total: Wei = self.world.accounts.values().sum();
        total += &self.world.escrow;
        total
    }

    pub fn escrow_total(&self) -> Wei {
        self.world.escrow.clone()
    }

    pub fn token(&self, token_id: TokenId) -> Option<&Nfst> {
        self.world.tokens.get(&token_id)
    }

    pub fn auction(&self, token_id: TokenId) -> Option<&AuctionState> {
        self.world.auctions.get(&token_id)
    }

    pub fn refund_balance(&self, bidder: Address, token_id: TokenId, slot: usize) -> Wei {
        self.world.refund_balance(token_id, slot, bidder)
    }

    pub fn user_of(&self, token_id: TokenId, at: Timestamp) -> Result<Address, EngineError> {
        let token = self
            .world
            .tokens
            .get(&token_id)
            .ok_or(EngineError::UnknownToken(token_id))?;
        Ok(token.user_of(at))
    }

    pub fn current_user_of(&self, token_id: TokenId) -> Result<Address, EngineError> {
        self.user_of(token_id, self.world.clock)
    }

    pub fn is_authorized(&self, token_id: TokenId, addr: Address) -> Result<bool, EngineError> {
        let token = self
            .world
            .tokens
            .get(&token_id)
            .ok_or(EngineError::UnknownToken(token_id))?;
        Ok(token.is_authorized(addr))
    }

    /// Applies one transaction atomically. Any error from the call rolls
    /// back every state mutation including the value transfer.
    pub fn execute_tx(&mut self, caller: Address, value: Wei, call: Call) -> TxOutcome {
        let base_gas = self.schedule.tx_base;
        if caller.is_zero() {
            return revert(EngineError::ZeroAddressCaller, base_gas);
        }
        let Some(balance) = self.world.accounts.get(&caller) else {
            return revert(EngineError::UnknownAccount(caller), base_gas);
        };
        if *balance < value {
            return revert(EngineError::InsufficientBalance, base_gas);
        }
        if !value.is_zero() && !call.is_payable() {
            return revert(EngineError::NotPayable, base_gas);
        }

        let snapshot = self.world.clone();

        if !value.is_zero() {
            let balance = self.world.accounts.get_mut(&caller).expect("checked above");
            *balance = balance.checked_sub(&value).expect("checked above");
            self.world.escrow += &value;
        }

        match dispatch(&mut self.world, caller, &value, call, &self.schedule) {
            Ok(effect) => {
                let gas_used = attach_gas(true, &effect.footprint, &self.schedule);
                if gas_used > self.block_gas_limit {
                    self.world = snapshot;
                    return revert(
                        EngineError::GasLimitExceeded {
                            used: gas_used,
                            limit: self.block_gas_limit,
                        },
                        base_gas,
                    );
                }
                TxOutcome {
                    receipt: TxReceipt {
                        status: TxStatus::Success,
                        gas_used,
                        events: effect.events,
                        revert_reason: None,
                    },
                    returned: effect.ret,
                }
            }
            Err(err) => {
                self.world = snapshot;
                revert(err, base_gas)
            }
        }
    }

    /// Keccak digest of the serialized world state, for atomicity and
    /// determinism checks.
    pub fn state_digest(&self) -> String {
        let mut h = Keccak256::new();
        let w = &self.world;
        h.update(w.clock.0.to_be_bytes());
        h.update((w.accounts.len() as u64).to_be_bytes());
        for (addr, bal) in &w.accounts {
            h.update(addr.0);
            digest_wei(&mut h, bal);
        }
        digest_wei(&mut h, &w.escrow);
        h.update(w.next_account.to_be_bytes());
        h.update(w.next_token_id.to_be_bytes());
        h.update((w.tokens.len() as u64).to_be_bytes());
        for token in w.tokens.values() {
            token.digest_into(&mut h);
        }
        h.update((w.auctions.len() as u64).to_be_bytes());
        for auction in w.auctions.values() {
            auction.digest_into(&mut h);
        }
        h.update((w.refunds.len() as u64).to_be_bytes());
        for ((token_id, slot, bidder), amount) in &w.refunds {
            h.update(token_id.to_be_bytes());
            h.update((*slot as u64).to_be_bytes());
            h.update(bidder.0);
            digest_wei(&mut h, amount);
        }
        lower_hex(&h.finalize())
    }
}

pub(crate) fn digest_wei(h: &mut Keccak256, w: &Wei) {
    let s = w.to_string();
    h.update((s.len() as u64).to_be_bytes());
    h.update(s.as_bytes());
}

pub(crate) fn digest_str(h: &mut Keccak256, s: &str) {
    h.update((s.len() as u64).to_be_bytes());
    h.update(s.as_bytes());
}

fn revert(err: EngineError, gas_used: u64) -> TxOutcome {
    TxOutcome {
        receipt: TxReceipt {
            status: TxStatus::Reverted,
            gas_used,
            events: Vec::new(),
            revert_reason: Some(err.to_string()),
        },
        returned: CallReturn::Unit,
    }
}

fn dispatch(
    world: &mut World,
    caller: Address,
    value: &Wei,
    call: Call,
    schedule: &GasSchedule,
) -> Result<CallEffect, EngineError> {
    match call {
        Call::Mint {
            start_freq,
            end_freq,
            location,
        } => world.mint(caller, start_freq, end_freq, location, schedule),
        Call::SetSpectrumIdleTime {
            token_id,
            idle_starts,
            idle_ends,
        } => world.set_spectrum_idle_time(caller, token_id, idle_starts, idle_ends, schedule),
        Call::ApproveOperator { token_id, operator } => {
            world.approve_operator(caller, token_id, operator, schedule)
        }
        Call::SetUser {
            token_id,
            user,
            expires,
        } => world.set_user(caller, token_id, user, expires, schedule),
        Call::BatchSetUser {
            token_id,
            users,
            start_times,
            end_times,
        } => world.batch_set_user(caller, token_id, users, start_times, end_times, schedule),
        Call::StartAuction {
            token_id,
            auction_duration,
            time_slot_count,
            bottom_price,
        } => world.start_auction(
            caller,
            token_id,
            auction_duration,
            time_slot_count,
            bottom_price,
            schedule,
        ),
        Call::Bid {
            token_id,
            time_slot_id,
        } => world.bid(caller, value, token_id, time_slot_id, schedule),
        Call::EndAuction { token_id } => world.end_auction(caller, token_id, schedule),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_address_renders_all_zeroes() {
        assert_eq!(
            Address::ZERO.to_string(),
            "0x0000000000000000000000000000000000000000"
        );
        assert!(Address::ZERO.is_zero());
    }

    #[test]
    fn checksummed_rendering_matches_known_accounts() {
        let known = [
            "0xdD870fA1b7C4700F2BD7f44238821C26f7392148",
            "0x5B38Da6a701c568545dCfcB03FcB875f56beddC4",
            "0xAb8483F64d9C6d1EcF9b849Ae677dD3315835cb2",
            "0x4B20993Bc481177ec7E8f571ceCaE8A9e22C02db",
            "0x78731D3Ca6b7E34aC0F824c42a7cC18A495cabaB",
            "0x617F2E2fD72FD9D5503197092aC168c91465E7f2",
            "0x17F6AD8Ef982297579C203069C1DbfFE4348c372",
        ];
        for s in known {
            let addr: Address = s.parse().unwrap();
            assert_eq!(addr.checksummed(), s);
            assert_eq!(addr.to_string(), s.to_lowercase());
        }
    }

    #[test]
    fn address_parse_rejects_bad_input() {
        assert!("0x1234".parse::<Address>().is_err());
        assert!("0xzz870fA1b7C4700F2BD7f44238821C26f7392148"
            .parse::<Address>()
            .is_err());
        assert!(
            "0x78731D3Ca6b7E34aC0F824c42a7c18A495cabaB"
                .parse::<Address>()
                .is_err(),
            "39 hex digits is not a valid address"
        );
    }

    #[test]
    fn wei_arithmetic_is_exact_and_never_negative() {
        let ten_eth = Wei::from_eth(10);
        assert_eq!(ten_eth.to_string(), "10000000000000000000");
        let three = Wei::from(3u64);
        let five = Wei::from(5u64);
        assert_eq!(three.checked_sub(&five), None);
        assert_eq!(five.checked_sub(&three), Some(Wei::from(2u64)));
        let huge: Wei = "340282366920938463463374607431768211456".parse().unwrap();
        assert_eq!(
            &huge + &Wei::from(1u64),
            "340282366920938463463374607431768211457".parse().unwrap()
        );
    }

    #[test]
    fn wei_parse_rejects_non_decimal() {
        assert!("".parse::<Wei>().is_err());
        assert!("-5".parse::<Wei>().is_err());
        assert!("1.5".parse::<Wei>().is_err());
        assert!("0x10".parse::<Wei>().is_err());
    }

    #[test]
    fn create_account_returns_distinct_funded_addresses() {
        let mut engine = Engine::new();
        let a = engine.create_account(Wei::zero());
        let b = engine.create_account(Wei::from_eth(100));
        let c = engine.create_account(Wei::from(7u64));
        assert_ne!(a, b);
        assert!(!a.is_zero());
        assert_eq!(engine.get_balance(a).unwrap(), Wei::zero());
        assert_eq!(engine.get_balance(b).unwrap(), Wei::from_eth(100));
        assert_eq!(engine.get_balance(c).unwrap(), Wei::from(7u64));
    }

    #[test]
    fn balance_of_zero_address_is_an_error() {
        let engine = Engine::new();
        assert_eq!(
            engine.get_balance(Address::ZERO),
            Err(EngineError::UnknownAccount(Address::ZERO))
        );
    }

    #[test]
    fn unknown_caller_reverts_before_dispatch() {
        let mut engine = Engine::new();
        let ghost: Address = "0x00000000000000000000000000000000000000aa"
            .parse()
            .unwrap();
        let out = engine.execute_tx(
            ghost,
            Wei::zero(),
            Call::Mint {
                start_freq: "600MHz".into(),
                end_freq: "800MHz".into(),
                location: "CityA".into(),
            },
        );
        assert_eq!(out.receipt.status, TxStatus::Reverted);
        assert_eq!(
            out.receipt.revert_reason.as_deref(),
            Some("unknown account 0x00000000000000000000000000000000000000aa")
        );
    }

    #[test]
    fn advance_time_examples() {
        let mut engine = Engine::new();
        assert_eq!(engine.advance_time(180), Timestamp(180));
        assert_eq!(engine.advance_time(0), Timestamp(180));
        let mut engine = Engine::new();
        engine.advance_time(1_749_476_800);
        assert_eq!(engine.advance_time(200), Timestamp(1_749_477_000));
    }

    #[test]
    fn insufficient_balance_reverts_before_dispatch() {
        let mut engine = Engine::new();
        let poor = engine.create_account(Wei::from_eth(3));
        let before = engine.state_digest();
        let out = engine.execute_tx(
            poor,
            Wei::from_eth(5),
            Call::Bid {
                token_id: 1,
                time_slot_id: 0,
            },
        );
        assert_eq!(out.receipt.status, TxStatus::Reverted);
        assert_eq!(out.receipt.gas_used, engine.schedule().tx_base);
        assert!(out.receipt.events.is_empty());
        assert_eq!(engine.state_digest(), before);
        assert_eq!(engine.get_balance(poor).unwrap(), Wei::from_eth(3));
    }

    #[test]
    fn zero_caller_reverts() {
        let mut engine = Engine::new();
        let out = engine.execute_tx(
            Address::ZERO,
            Wei::zero(),
            Call::Mint {
                start_freq: "600MHz".into(),
                end_freq: "800MHz".into(),
                location: "CityA".into(),
            },
        );
        assert_eq!(out.receipt.status, TxStatus::Reverted);
        assert_eq!(
            out.receipt.revert_reason.as_deref(),
            Some("zero address is not a valid caller")
        );
    }

    #[test]
    fn value_on_non_payable_call_reverts() {
        let mut engine = Engine::new();
        let caller = engine.create_account(Wei::from_eth(1));
        let before = engine.state_digest();
        let out = engine.execute_tx(
            caller,
            Wei::from(1u64),
            Call::Mint {
                start_freq: "600MHz".into(),
                end_freq: "800MHz".into(),
                location: "CityA".into(),
            },
        );
        assert_eq!(out.receipt.status, TxStatus::Reverted);
        assert_eq!(engine.state_digest(), before);
    }

    #[test]
    fn state_digest_is_stable_across_reads() {
        let mut engine = Engine::new();
        let a = engine.create_account(Wei::from_eth(7));
        let d1 = engine.state_digest();
        let _ = engine.get_balance(a);
        let _ = engine.total_supply();
        assert_eq!(engine.state_digest(), d1);
    }
}
