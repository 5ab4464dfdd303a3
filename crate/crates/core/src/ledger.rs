//! Non-fungible spectrum token registry: minting, ownership and operator
//! authorization, idle-slot schedules, the single-user baseline
//! authorization, and batch multi-user authorization with time-derived
//! expiry.

use std::collections::BTreeSet;

use sha3::Keccak256;

use crate::gas::{
    batch_user_storage_footprint, event_data_bytes, event_string_bytes, single_user_footprint,
    CalldataBuilder, GasSchedule, StorageFootprint,
};
use crate::sim::{
    digest_str, Address, CallEffect, CallReturn, EngineError, Event, Timestamp, World,
};

pub type TokenId = u64;

/// Per-slot authorized user. A zero user means the slot is unassigned.
/// An assigned record's window always equals the token's idle slot interval
/// at the same index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotUserRecord {
    pub user: Address,
    pub start_time: Timestamp,
    pub end_time: Timestamp,
}

/// Single-user baseline record (one user, one lease window).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaselineUser {
    pub user: Address,
    pub start_time: Timestamp,
    pub expires: Timestamp,
}

/// Spectrum token record: owner, frequency band, location and the idle-slot
/// schedule. Frequencies and location are opaque strings.
#[derive(Clone, Debug)]
pub struct Nfst {
    pub token_id: TokenId,
    pub owner: Address,
    pub start_freq: String,
    pub end_freq: String,
    pub location: String,
    pub idle_start_timestamps: Vec<Timestamp>,
    pub idle_end_timestamps: Vec<Timestamp>,
    pub(crate) operators: BTreeSet<Address>,
    pub(crate) slot_users: Vec<SlotUserRecord>,
    pub(crate) baseline_user: Option<BaselineUser>,
}

impl Nfst {
    pub fn idle_time_slot_num(&self) -> usize {
        self.idle_start_timestamps.len()
    }

    /// Owner plus explicitly approved operators.
    pub fn is_authorized(&self, addr: Address) -> bool {
        addr == self.owner || self.operators.contains(&addr)
    }

    pub fn slot_user(&self, slot: usize) -> Option<&SlotUserRecord> {
        self.slot_users.get(slot)
    }

    pub fn slot_users(&self) -> &[SlotUserRecord] {
        &self.slot_users
    }

    /// The user holding the token at `at`, or the zero address. Windows are
    /// half-open `[start, end)`; expiry needs no transaction.
    pub fn user_of(&self, at: Timestamp) -> Address {
        for rec in &self.slot_users {
            if !rec.user.is_zero() && rec.start_time <= at && at < rec.end_time {
                return rec.user;
            }
        }
        if let Some(b) = &self.baseline_user {
            if !b.user.is_zero() && b.start_time <= at && at < b.expires {
                return b.user;
            }
        }
        Address::ZERO
    }

    pub(crate) fn digest_into(&self, h: &mut Keccak256) {
        use sha3::Digest;
        h.update(self.token_id.to_be_bytes());
        h.update(self.owner.0);
        digest_str(h, &self.start_freq);
        digest_str(h, &self.end_freq);
        digest_str(h, &self.location);
        h.update((self.idle_start_timestamps.len() as u64).to_be_bytes());
        for (s, e) in self
            .idle_start_timestamps
            .iter()
            .zip(&self.idle_end_timestamps)
        {
            h.update(s.0.to_be_bytes());
            h.update(e.0.to_be_bytes());
        }
        h.update((self.operators.len() as u64).to_be_bytes());
        for op in &self.operators {
            h.update(op.0);
        }
        for rec in &self.slot_users {
            h.update(rec.user.0);
            h.update(rec.start_time.0.to_be_bytes());
            h.update(rec.end_time.0.to_be_bytes());
        }
        match &self.baseline_user {
            Some(b) => {
                h.update([1u8]);
                h.update(b.user.0);
                h.update(b.start_time.0.to_be_bytes());
                h.update(b.expires.0.to_be_bytes());
            }
            None => h.update([0u8]),
        }
    }
}

fn validate_slot_schedule(starts: &[Timestamp], ends: &[Timestamp]) -> Result<(), EngineError> {
    if starts.len() != ends.len() {
        return Err(EngineError::InvalidSlotSchedule(format!(
            "{} start timestamps but {} end timestamps",
            starts.len(),
            ends.len()
        )));
    }
    if starts.is_empty() {
        return Err(EngineError::InvalidSlotSchedule(
            "slot lists are empty".into(),
        ));
    }
    for i in 0..starts.len() {
        if starts[i] >= ends[i] {
            return Err(EngineError::InvalidSlotSchedule(format!(
                "slot {i} start {} is not before end {}",
                starts[i], ends[i]
            )));
        }
        if i + 1 < starts.len() && ends[i] > starts[i + 1] {
            return Err(EngineError::InvalidSlotSchedule(format!(
                "slot {i} end {} overlaps slot {} start {}",
                ends[i],
                i + 1,
                starts[i + 1]
            )));
        }
    }
    Ok(())
}

fn string_slots(s: &str) -> u64 {
    (s.len() as u64).div_ceil(32)
}

fn timestamps_to_strings(ts: &[Timestamp]) -> Vec<String> {
    ts.iter().map(Timestamp::to_string).collect()
}

impl World {
    fn token(&self, token_id: TokenId) -> Result<&Nfst, EngineError> {
        self.tokens
            .get(&token_id)
            .ok_or(EngineError::UnknownToken(token_id))
    }

    fn token_mut(&mut self, token_id: TokenId) -> Result<&mut Nfst, EngineError> {
        self.tokens
            .get_mut(&token_id)
            .ok_or(EngineError::UnknownToken(token_id))
    }

    fn live_auction_exists(&self, token_id: TokenId) -> bool {
        self.auctions.get(&token_id).is_some_and(|a| !a.has_ended)
    }

    /// Mints a new token owned by the caller, with the next sequential id
    /// and an empty slot schedule.
    pub(crate) fn mint(
        &mut self,
        caller: Address,
        start_freq: String,
        end_freq: String,
        location: String,
        _schedule: &GasSchedule,
    ) -> Result<CallEffect, EngineError> {
        let token_id = self.next_token_id;
        self.next_token_id += 1;

        let event = Event::new("SpectrumTokenization")
            .with_str("0", token_id.to_string())
            .with_str("1", caller.checksummed())
            .with_str("2", start_freq.clone())
            .with_str("3", end_freq.clone())
            .with_str("4", location.clone())
            .with_str("tokenId", token_id.to_string())
            .with_str("owner", caller.checksummed())
            .with_str("startFreq", start_freq.clone())
            .with_str("endFreq", end_freq.clone())
            .with_str("location", location.clone());

        // Owner and slot count pack into one slot; each metadata string
        // takes ceil(len/32) slots.
        let mut fp = StorageFootprint {
            new_slots: 1
                + string_slots(&start_freq)
                + string_slots(&end_freq)
                + string_slots(&location),
            ..StorageFootprint::default()
        };
        fp.add_event(
            event_data_bytes(2, &[])
                + event_string_bytes(&start_freq)
                + event_string_bytes(&end_freq)
                + event_string_bytes(&location),
        );
        let mut cd = CalldataBuilder::new();
        cd.dyn_string(&start_freq)
            .dyn_string(&end_freq)
            .dyn_string(&location);
        cd.apply(&mut fp);

        self.tokens.insert(
            token_id,
            Nfst {
                token_id,
                owner: caller,
                start_freq,
                end_freq,
                location,
                idle_start_timestamps: Vec::new(),
                idle_end_timestamps: Vec::new(),
                operators: BTreeSet::new(),
                slot_users: Vec::new(),
                baseline_user: None,
            },
        );

        Ok(CallEffect {
            ret: CallReturn::TokenId(token_id),
            events: vec![event],
            footprint: fp,
        })
    }

    /// Replaces the idle-slot schedule wholesale and clears every slot-user
    /// record. Returns false (without reverting) for unauthorized callers.
    pub(crate) fn set_spectrum_idle_time(
        &mut self,
        caller: Address,
        token_id: TokenId,
        idle_starts: Vec<Timestamp>,
        idle_ends: Vec<Timestamp>,
        schedule: &GasSchedule,
    ) -> Result<CallEffect, EngineError> {
        self.token(token_id)?;
        validate_slot_schedule(&idle_starts, &idle_ends)?;
        if self.live_auction_exists(token_id) {
            return Err(EngineError::AuctionActive(token_id));
        }
        let token = self.token_mut(token_id)?;
        if !token.is_authorized(caller) {
            return Ok(CallEffect::returning(CallReturn::Bool(false)));
        }

        let n = idle_starts.len();
        token.idle_start_timestamps = idle_starts.clone();
        token.idle_end_timestamps = idle_ends.clone();
        token.slot_users = (0..n)
            .map(|i| SlotUserRecord {
                user: Address::ZERO,
                start_time: idle_starts[i],
                end_time: idle_ends[i],
            })
            .collect();

        let event = Event::new("SetNFSTIdleTime")
            .with_str("0", token_id.to_string())
            .with_list("1", timestamps_to_strings(&idle_starts))
            .with_list("2", timestamps_to_strings(&idle_ends))
            .with_str("3", n.to_string())
            .with_str("tokenId", token_id.to_string())
            .with_list(
                "newSpectrumIdleStartTimes",
                timestamps_to_strings(&idle_starts),
            )
            .with_list("newSpectrumIdleEndTimes", timestamps_to_strings(&idle_ends))
            .with_str("idleTimeSlot", n.to_string());

        // Two timestamp arrays (fresh length slot plus packed data slots
        // each) and the slot-count field in the packed owner slot.
        let data_slots = crate::gas::packed_slots(schedule.timestamp_bytes, n as u64)?;
        let mut fp = StorageFootprint {
            new_slots: 2,
            updated_slots: 2 * data_slots + 1,
            ..StorageFootprint::default()
        };
        fp.add_event(event_data_bytes(2, &[n as u64, n as u64]));
        let mut cd = CalldataBuilder::new();
        cd.uint()
            .dyn_array(n as u64, schedule.timestamp_bytes)
            .dyn_array(n as u64, schedule.timestamp_bytes);
        cd.apply(&mut fp);

        Ok(CallEffect {
            ret: CallReturn::Bool(true),
            events: vec![event],
            footprint: fp,
        })
    }

    /// Adds an operator to the token's authorization set. Owner only.
    pub(crate) fn approve_operator(
        &mut self,
        caller: Address,
        token_id: TokenId,
        operator: Address,
        schedule: &GasSchedule,
    ) -> Result<CallEffect, EngineError> {
        if operator.is_zero() {
            return Err(EngineError::ZeroAddressArgument);
        }
        let token = self.token_mut(token_id)?;
        if caller != token.owner {
            return Err(EngineError::NotOwner);
        }
        token.operators.insert(operator);

        let mut fp = StorageFootprint {
            new_slots: 1,
            ..StorageFootprint::default()
        };
        let mut cd = CalldataBuilder::new();
        cd.uint().word(schedule.address_bytes);
        cd.apply(&mut fp);

        Ok(CallEffect {
            ret: CallReturn::Unit,
            events: Vec::new(),
            footprint: fp,
        })
    }

    /// Single-user baseline authorization: the token's one user record
    /// becomes (user, now, expires).
    pub(crate) fn set_user(
        &mut self,
        caller: Address,
        token_id: TokenId,
        user: Address,
        expires: Timestamp,
        schedule: &GasSchedule,
    ) -> Result<CallEffect, EngineError> {
        let now = self.clock;
        let token = self.token_mut(token_id)?;
        if !token.is_authorized(caller) {
            return Err(EngineError::NotAuthorized);
        }
        token.baseline_user = Some(BaselineUser {
            user,
            start_time: now,
            expires,
        });

        let event = Event::new("UpdateUser")
            .with_str("0", token_id.to_string())
            .with_str("1", user.checksummed())
            .with_str("2", expires.to_string())
            .with_str("tokenId", token_id.to_string())
            .with_str("user", user.checksummed())
            .with_str("expires", expires.to_string());

        Ok(CallEffect {
            ret: CallReturn::Unit,
            events: vec![event],
            footprint: single_user_footprint(schedule),
        })
    }

    /// Authorized direct entry point for batch authorization.
    pub(crate) fn batch_set_user(
        &mut self,
        caller: Address,
        token_id: TokenId,
        users: Vec<Address>,
        start_times: Vec<Timestamp>,
        end_times: Vec<Timestamp>,
        schedule: &GasSchedule,
    ) -> Result<CallEffect, EngineError> {
        let token = self.token(token_id)?;
        if !token.is_authorized(caller) {
            return Err(EngineError::NotAuthorized);
        }
        let n = users.len() as u64;
        let mut effect =
            self.batch_set_user_inner(token_id, users, start_times, end_times, schedule)?;
        let mut cd = CalldataBuilder::new();
        cd.uint()
            .dyn_array(n, schedule.address_bytes)
            .dyn_array(n, schedule.timestamp_bytes)
            .dyn_array(n, schedule.timestamp_bytes);
        cd.apply(&mut effect.footprint);
        Ok(effect)
    }

    /// Maps every user to its slot in one operation. A zero address in
    /// `users` leaves that slot unassigned. Also invoked internally when an
    /// auction ends.
    pub(crate) fn batch_set_user_inner(
        &mut self,
        token_id: TokenId,
        users: Vec<Address>,
        start_times: Vec<Timestamp>,
        end_times: Vec<Timestamp>,
        schedule: &GasSchedule,
    ) -> Result<CallEffect, EngineError> {
        let token = self.token_mut(token_id)?;
        let n = token.idle_time_slot_num();
        if users.len() != n || start_times.len() != n || end_times.len() != n {
            return Err(EngineError::LengthMismatch(format!(
                "token has {n} slots but got {} users, {} start times, {} end times",
                users.len(),
                start_times.len(),
                end_times.len()
            )));
        }
        for i in 0..n {
            if start_times[i] != token.idle_start_timestamps[i]
                || end_times[i] != token.idle_end_timestamps[i]
            {
                return Err(EngineError::IntervalMismatch(i));
            }
        }
        token.slot_users = (0..n)
            .map(|i| SlotUserRecord {
                user: users[i],
                start_time: start_times[i],
                end_time: end_times[i],
            })
            .collect();

        let event = Event::new("UpdateUser")
            .with_str("0", token_id.to_string())
            .with_list("1", users.iter().map(Address::checksummed).collect())
            .with_list("2", timestamps_to_strings(&start_times))
            .with_list("3", timestamps_to_strings(&end_times))
            .with_str("tokenId", token_id.to_string())
            .with_list("users", users.iter().map(Address::checksummed).collect())
            .with_list("startUseTimes", timestamps_to_strings(&start_times))
            .with_list("endUseTimes", timestamps_to_strings(&end_times));

        Ok(CallEffect {
            ret: CallReturn::Unit,
            events: vec![event],
            footprint: batch_user_storage_footprint(schedule, n as u64)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Call, Engine, TxStatus, Wei};

    fn engine_with_owner() -> (Engine, Address) {
        let mut engine = Engine::new();
        let owner = engine.create_account(Wei::from_eth(100));
        (engine, owner)
    }

    fn mint(engine: &mut Engine, owner: Address) -> TokenId {
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::Mint {
                start_freq: "600MHz".into(),
                end_freq: "800MHz".into(),
                location: "CityA".into(),
            },
        );
        assert!(out.receipt.succeeded(), "{:?}", out.receipt.revert_reason);
        match out.returned {
            CallReturn::TokenId(id) => id,
            other => panic!("unexpected return {other:?}"),
        }
    }

    fn set_three_slots(engine: &mut Engine, owner: Address, token: TokenId) {
        let starts = vec![
            Timestamp(1_749_476_800),
            Timestamp(1_749_477_000),
            Timestamp(1_749_477_200),
        ];
        let ends = vec![
            Timestamp(1_749_476_900),
            Timestamp(1_749_477_100),
            Timestamp(1_749_477_300),
        ];
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::SetSpectrumIdleTime {
                token_id: token,
                idle_starts: starts,
                idle_ends: ends,
            },
        );
        assert!(out.receipt.succeeded());
        assert_eq!(out.returned, CallReturn::Bool(true));
    }

    #[test]
    fn mint_emits_tokenization_event_with_exact_field_order() {
        let mut engine = Engine::new();
        let owner: Address = "0xdD870fA1b7C4700F2BD7f44238821C26f7392148"
            .parse()
            .unwrap();
        engine.create_account_at(owner, Wei::from_eth(100)).unwrap();
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::Mint {
                start_freq: "600MHz".into(),
                end_freq: "800MHz".into(),
                location: "CityA".into(),
            },
        );
        assert!(out.receipt.succeeded());
        let event = &out.receipt.events[0];
        let json = serde_json::to_string(&event.to_json()).unwrap();
        assert_eq!(
            json,
            r#"{"event":"SpectrumTokenization","args":{"0":"1","1":"0xdD870fA1b7C4700F2BD7f44238821C26f7392148","2":"600MHz","3":"800MHz","4":"CityA","tokenId":"1","owner":"0xdD870fA1b7C4700F2BD7f44238821C26f7392148","startFreq":"600MHz","endFreq":"800MHz","location":"CityA"}}"#
        );
    }

    #[test]
    fn mint_assigns_sequential_ids_and_ownership() {
        let (mut engine, owner) = engine_with_owner();
        let t1 = mint(&mut engine, owner);
        let t2 = mint(&mut engine, owner);
        assert_eq!(t1, 1);
        assert_eq!(t2, 2);
        assert_eq!(engine.token(t1).unwrap().owner, owner);
        assert!(engine.token(t1).unwrap().slot_users().is_empty());
    }

    #[test]
    fn mint_gas_counts_metadata_slots_and_event() {
        let (mut engine, owner) = engine_with_owner();
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::Mint {
                start_freq: "600MHz".into(),
                end_freq: "800MHz".into(),
                location: "CityA".into(),
            },
        );
        let s = engine.schedule();
        // Four fresh slots (owner+count, three short strings), one event of
        // 2 scalar words plus three 96-byte strings, calldata of three
        // dynamic strings (6+6+5 significant bytes).
        let event_bytes = 64 + 3 * 96;
        let cd_nonzero = 4 + 6 * 8 + 6 + 6 + 5;
        let cd_zero = 6 * 24 + (32 - 6) + (32 - 6) + (32 - 5);
        let expected = s.tx_base
            + 4 * s.sstore_set
            + s.log_base
            + s.log_topic
            + event_bytes * s.log_data_byte
            + cd_nonzero * s.calldata_nonzero_byte
            + cd_zero * s.calldata_zero_byte;
        assert_eq!(out.receipt.gas_used, expected);
    }

    #[test]
    fn set_idle_time_emits_event_matching_configured_slots() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::SetSpectrumIdleTime {
                token_id: token,
                idle_starts: vec![
                    Timestamp(1_749_476_800),
                    Timestamp(1_749_477_000),
                    Timestamp(1_749_477_200),
                ],
                idle_ends: vec![
                    Timestamp(1_749_476_900),
                    Timestamp(1_749_477_100),
                    Timestamp(1_749_477_300),
                ],
            },
        );
        assert!(out.receipt.succeeded());
        assert_eq!(out.returned, CallReturn::Bool(true));
        let event = &out.receipt.events[0];
        assert_eq!(event.name, "SetNFSTIdleTime");
        let keys: Vec<&str> = event.fields.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(
            keys,
            vec![
                "0",
                "1",
                "2",
                "3",
                "tokenId",
                "newSpectrumIdleStartTimes",
                "newSpectrumIdleEndTimes",
                "idleTimeSlot"
            ]
        );
        assert_eq!(event.field("idleTimeSlot").unwrap().as_str(), Some("3"));
        assert_eq!(
            event
                .field("newSpectrumIdleStartTimes")
                .unwrap()
                .as_list()
                .unwrap(),
            ["1749476800", "1749477000", "1749477200"]
        );
        assert_eq!(engine.token(token).unwrap().idle_time_slot_num(), 3);
    }

    #[test]
    fn set_idle_time_by_unauthorized_caller_returns_false_without_revert() {
        let (mut engine, owner) = engine_with_owner();
        let stranger = engine.create_account(Wei::from_eth(1));
        let token = mint(&mut engine, owner);
        set_three_slots(&mut engine, owner, token);
        let out = engine.execute_tx(
            stranger,
            Wei::zero(),
            Call::SetSpectrumIdleTime {
                token_id: token,
                idle_starts: vec![Timestamp(1), Timestamp(10)],
                idle_ends: vec![Timestamp(5), Timestamp(20)],
            },
        );
        assert!(out.receipt.succeeded());
        assert_eq!(out.returned, CallReturn::Bool(false));
        assert!(out.receipt.events.is_empty());
        assert_eq!(engine.token(token).unwrap().idle_time_slot_num(), 3);
    }

    #[test]
    fn overlapping_or_malformed_slots_revert() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        let cases = [
            (vec![100, 150], vec![160, 200]), // 160 > 150 overlap
            (vec![100], vec![100]),           // start == end
            (vec![100, 200], vec![150]),      // length mismatch
            (vec![], vec![]),                 // empty
            (vec![200, 100], vec![250, 150]), // unsorted
        ];
        for (starts, ends) in cases {
            let out = engine.execute_tx(
                owner,
                Wei::zero(),
                Call::SetSpectrumIdleTime {
                    token_id: token,
                    idle_starts: starts.into_iter().map(Timestamp).collect(),
                    idle_ends: ends.into_iter().map(Timestamp).collect(),
                },
            );
            assert_eq!(out.receipt.status, TxStatus::Reverted);
        }
    }

    #[test]
    fn adjacent_slots_are_allowed() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::SetSpectrumIdleTime {
                token_id: token,
                idle_starts: vec![Timestamp(100), Timestamp(200)],
                idle_ends: vec![Timestamp(200), Timestamp(300)],
            },
        );
        assert!(out.receipt.succeeded());
    }

    #[test]
    fn reconfiguring_slots_clears_user_records() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        set_three_slots(&mut engine, owner, token);
        let user = engine.create_account(Wei::zero());
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::BatchSetUser {
                token_id: token,
                users: vec![user, user, user],
                start_times: vec![
                    Timestamp(1_749_476_800),
                    Timestamp(1_749_477_000),
                    Timestamp(1_749_477_200),
                ],
                end_times: vec![
                    Timestamp(1_749_476_900),
                    Timestamp(1_749_477_100),
                    Timestamp(1_749_477_300),
                ],
            },
        );
        assert!(out.receipt.succeeded());
        assert_eq!(
            engine.user_of(token, Timestamp(1_749_476_850)).unwrap(),
            user
        );
        set_three_slots(&mut engine, owner, token);
        assert_eq!(
            engine.user_of(token, Timestamp(1_749_476_850)).unwrap(),
            Address::ZERO
        );
    }

    #[test]
    fn set_idle_time_is_idempotent() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        set_three_slots(&mut engine, owner, token);
        let digest_once = engine.state_digest();
        set_three_slots(&mut engine, owner, token);
        assert_eq!(engine.state_digest(), digest_once);
    }

    #[test]
    fn baseline_set_user_window_is_half_open_from_now() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        let user = engine.create_account(Wei::zero());
        let t0 = engine.advance_time(1_000);
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::SetUser {
                token_id: token,
                user,
                expires: t0.plus(100),
            },
        );
        assert!(out.receipt.succeeded());
        assert_eq!(engine.user_of(token, Timestamp(t0.0 + 50)).unwrap(), user);
        assert_eq!(
            engine.user_of(token, Timestamp(t0.0 + 100)).unwrap(),
            Address::ZERO
        );
        assert_eq!(
            engine.user_of(token, Timestamp(t0.0 + 101)).unwrap(),
            Address::ZERO
        );
        assert_eq!(engine.current_user_of(token).unwrap(), user);
    }

    #[test]
    fn baseline_set_user_rejects_unauthorized_caller() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        let stranger = engine.create_account(Wei::zero());
        let out = engine.execute_tx(
            stranger,
            Wei::zero(),
            Call::SetUser {
                token_id: token,
                user: stranger,
                expires: Timestamp(10),
            },
        );
        assert_eq!(out.receipt.status, TxStatus::Reverted);
        assert_eq!(
            out.receipt.revert_reason.as_deref(),
            Some("caller is not authorized")
        );
    }

    #[test]
    fn baseline_set_user_gas_matches_single_flow_transaction() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        let user = engine.create_account(Wei::zero());
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::SetUser {
                token_id: token,
                user,
                expires: Timestamp(100),
            },
        );
        let flow = crate::gas::gas_for_erc4907_flow(1, engine.schedule()).unwrap();
        assert_eq!(out.receipt.gas_used, flow.total_gas);
    }

    #[test]
    fn batch_set_user_with_zero_address_leaves_slot_unassigned() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        set_three_slots(&mut engine, owner, token);
        let user = engine.create_account(Wei::zero());
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::BatchSetUser {
                token_id: token,
                users: vec![user, Address::ZERO, user],
                start_times: vec![
                    Timestamp(1_749_476_800),
                    Timestamp(1_749_477_000),
                    Timestamp(1_749_477_200),
                ],
                end_times: vec![
                    Timestamp(1_749_476_900),
                    Timestamp(1_749_477_100),
                    Timestamp(1_749_477_300),
                ],
            },
        );
        assert!(out.receipt.succeeded());
        assert_eq!(
            engine.user_of(token, Timestamp(1_749_477_050)).unwrap(),
            Address::ZERO
        );
        assert_eq!(
            engine.user_of(token, Timestamp(1_749_477_250)).unwrap(),
            user
        );
    }

    #[test]
    fn batch_set_user_validates_lengths_and_intervals() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        set_three_slots(&mut engine, owner, token);
        let user = engine.create_account(Wei::zero());
        let short = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::BatchSetUser {
                token_id: token,
                users: vec![user, user],
                start_times: vec![Timestamp(1_749_476_800), Timestamp(1_749_477_000)],
                end_times: vec![Timestamp(1_749_476_900), Timestamp(1_749_477_100)],
            },
        );
        assert_eq!(short.receipt.status, TxStatus::Reverted);
        let wrong_window = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::BatchSetUser {
                token_id: token,
                users: vec![user, user, user],
                start_times: vec![
                    Timestamp(1_749_476_800),
                    Timestamp(1_749_477_001),
                    Timestamp(1_749_477_200),
                ],
                end_times: vec![
                    Timestamp(1_749_476_900),
                    Timestamp(1_749_477_100),
                    Timestamp(1_749_477_300),
                ],
            },
        );
        assert_eq!(wrong_window.receipt.status, TxStatus::Reverted);
        assert_eq!(
            wrong_window.receipt.revert_reason.as_deref(),
            Some("slot interval mismatch at index 1")
        );
    }

    #[test]
    fn batch_set_user_rejects_unauthorized_direct_calls() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        set_three_slots(&mut engine, owner, token);
        let stranger = engine.create_account(Wei::zero());
        let out = engine.execute_tx(
            stranger,
            Wei::zero(),
            Call::BatchSetUser {
                token_id: token,
                users: vec![stranger, stranger, stranger],
                start_times: vec![
                    Timestamp(1_749_476_800),
                    Timestamp(1_749_477_000),
                    Timestamp(1_749_477_200),
                ],
                end_times: vec![
                    Timestamp(1_749_476_900),
                    Timestamp(1_749_477_100),
                    Timestamp(1_749_477_300),
                ],
            },
        );
        assert_eq!(out.receipt.status, TxStatus::Reverted);
    }

    #[test]
    fn batch_set_user_gas_matches_batch_flow_transaction() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        set_three_slots(&mut engine, owner, token);
        let user = engine.create_account(Wei::zero());
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::BatchSetUser {
                token_id: token,
                users: vec![user, user, user],
                start_times: vec![
                    Timestamp(1_749_476_800),
                    Timestamp(1_749_477_000),
                    Timestamp(1_749_477_200),
                ],
                end_times: vec![
                    Timestamp(1_749_476_900),
                    Timestamp(1_749_477_100),
                    Timestamp(1_749_477_300),
                ],
            },
        );
        let flow = crate::gas::gas_for_m_erc4907_flow(3, engine.schedule()).unwrap();
        assert_eq!(out.receipt.gas_used, flow.total_gas);
    }

    #[test]
    fn user_of_unknown_token_is_an_error() {
        let engine = Engine::new();
        assert_eq!(
            engine.user_of(42, Timestamp(0)),
            Err(EngineError::UnknownToken(42))
        );
    }

    #[test]
    fn operator_approval_grants_authorization() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        let operator = engine.create_account(Wei::zero());
        assert!(!engine.is_authorized(token, operator).unwrap());
        assert!(engine.is_authorized(token, owner).unwrap());
        let out = engine.execute_tx(
            owner,
            Wei::zero(),
            Call::ApproveOperator {
                token_id: token,
                operator,
            },
        );
        assert!(out.receipt.succeeded());
        assert!(engine.is_authorized(token, operator).unwrap());
    }

    #[test]
    fn non_owner_cannot_approve_operators() {
        let (mut engine, owner) = engine_with_owner();
        let token = mint(&mut engine, owner);
        let operator = engine.create_account(Wei::zero());
        let stranger = engine.create_account(Wei::zero());
        let out = engine.execute_tx(
            stranger,
            Wei::zero(),
            Call::ApproveOperator {
                token_id: token,
                operator,
            },
        );
        assert_eq!(out.receipt.status, TxStatus::Reverted);
        assert!(!engine.is_authorized(token, operator).unwrap());
    }
}
