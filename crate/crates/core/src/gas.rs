//! Analytical EVM-style gas accounting for the sequential (single-user) and
//! batch (multi-user) authorization flows.
//!
//! The model counts 32-byte storage-slot writes, log costs and calldata
//! bytes rather than interpreting bytecode. Array writes inside one batch
//! transaction are priced with one fresh allocation (`sstore_set`) for the
//! array's first storage touch (its length slot, which is written first) and
//! `sstore_update` for every data slot the same write then spills into.
//! Zero-valued initializations are not charged.

use serde::{Deserialize, Serialize};

use crate::sim::EngineError;

/// Calldata width of a uint argument (ids, counts, durations, offsets).
const UINT_BYTES: u64 = 8;
/// Calldata width of a currency amount.
const WEI_BYTES: u64 = 16;

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

/// Per-operation gas prices plus the storage packing widths.
///
/// Defaults are the Ethereum London schedule. Every entry can be overridden
/// from configuration; missing fields keep their defaults.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasSchedule {
    /// Flat cost of any transaction.
    pub tx_base: u64,
    /// Zero to nonzero 32-byte slot write, including the cold access charge
    /// (20000 + 2100).
    pub sstore_set: u64,
    /// Nonzero to nonzero slot write, including the cold access charge
    /// (2900 + 2100).
    pub sstore_update: u64,
    pub log_base: u64,
    /// Per log topic. Every event here carries exactly one topic (the
    /// signature), so this also prices the event count.
    pub log_topic: u64,
    pub log_data_byte: u64,
    pub calldata_nonzero_byte: u64,
    pub calldata_zero_byte: u64,
    /// Storage width of an address array element.
    pub address_bytes: u64,
    /// Storage width of a timestamp array element.
    pub timestamp_bytes: u64,
}

impl Default for GasSchedule {
    fn default() -> Self {
        GasSchedule {
            tx_base: 21_000,
            sstore_set: 22_100,
            sstore_update: 5_000,
            log_base: 375,
            log_topic: 375,
            log_data_byte: 8,
            calldata_nonzero_byte: 16,
            calldata_zero_byte: 4,
            address_bytes: 20,
            timestamp_bytes: 8,
        }
    }
}

// ---------------------------------------------------------------------------
// Footprints
// ---------------------------------------------------------------------------

/// Storage, log and calldata counts for one transaction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StorageFootprint {
    /// Zero to nonzero 32-byte slot writes.
    pub new_slots: u64,
    /// Nonzero to nonzero (or clearing) slot writes.
    pub updated_slots: u64,
    /// One per event; every event carries a single signature topic.
    pub event_topics: u64,
    pub event_data_bytes: u64,
    pub calldata_zero_bytes: u64,
    pub calldata_nonzero_bytes: u64,
}

impl StorageFootprint {
    /// Gas for the footprint alone, without the transaction base cost.
    pub fn price(&self, s: &GasSchedule) -> u64 {
        self.new_slots * s.sstore_set
            + self.updated_slots * s.sstore_update
            + self.event_topics * (s.log_base + s.log_topic)
            + self.event_data_bytes * s.log_data_byte
            + self.calldata_zero_bytes * s.calldata_zero_byte
            + self.calldata_nonzero_bytes * s.calldata_nonzero_byte
    }

    pub(crate) fn add_event(&mut self, data_bytes: u64) {
        self.event_topics += 1;
        self.event_data_bytes += data_bytes;
    }

    pub(crate) fn merge(&mut self, other: &StorageFootprint) {
        self.new_slots += other.new_slots;
        self.updated_slots += other.updated_slots;
        self.event_topics += other.event_topics;
        self.event_data_bytes += other.event_data_bytes;
        self.calldata_zero_bytes += other.calldata_zero_bytes;
        self.calldata_nonzero_bytes += other.calldata_nonzero_bytes;
    }

    pub(crate) fn slot_writes(&self) -> u64 {
        self.new_slots + self.updated_slots
    }
}

/// Prices a transaction: base cost plus the footprint. Reverted transactions
/// are priced at the base cost only.
pub fn attach_gas(success: bool, footprint: &StorageFootprint, schedule: &GasSchedule) -> u64 {
    if !success {
        return schedule.tx_base;
    }
    schedule.tx_base + footprint.price(schedule)
}

/// Number of 32-byte storage slots occupied by `element_count` packed
/// elements of the given byte width.
pub fn packed_slots(element_width_bytes: u64, element_count: u64) -> Result<u64, EngineError> {
    if element_width_bytes == 0 || element_width_bytes > 32 {
        return Err(EngineError::Gas(format!(
            "element width must be 1..=32 bytes, got {element_width_bytes}"
        )));
    }
    let per_slot = 32 / element_width_bytes;
    Ok(element_count.div_ceil(per_slot))
}

// ---------------------------------------------------------------------------
// Calldata and event data helpers
// ---------------------------------------------------------------------------

/// Accumulates ABI-shaped calldata byte counts. Each static value occupies a
/// 32-byte word with `width` significant (nonzero) bytes; a dynamic argument
/// adds an offset word and a length word.
pub(crate) struct CalldataBuilder {
    nonzero: u64,
    zero: u64,
}

impl CalldataBuilder {
    pub fn new() -> CalldataBuilder {
        // 4-byte function selector.
        CalldataBuilder {
            nonzero: 4,
            zero: 0,
        }
    }

    pub fn word(&mut self, significant_bytes: u64) -> &mut Self {
        let sig = significant_bytes.min(32);
        self.nonzero += sig;
        self.zero += 32 - sig;
        self
    }

    pub fn uint(&mut self) -> &mut Self {
        self.word(UINT_BYTES)
    }

    pub fn wei(&mut self) -> &mut Self {
        self.word(WEI_BYTES)
    }

    pub fn dyn_array(&mut self, len: u64, elem_width: u64) -> &mut Self {
        self.uint(); // offset
        self.uint(); // length
        for _ in 0..len {
            self.word(elem_width);
        }
        self
    }

    pub fn dyn_string(&mut self, s: &str) -> &mut Self {
        self.uint(); // offset
        self.uint(); // length
        let len = s.len() as u64;
        let padded = len.div_ceil(32) * 32;
        self.nonzero += len;
        self.zero += padded - len;
        self
    }

    pub fn apply(&self, fp: &mut StorageFootprint) {
        fp.calldata_nonzero_bytes += self.nonzero;
        fp.calldata_zero_bytes += self.zero;
    }
}

/// ABI-encoded byte length of event data: one word per scalar argument plus
/// offset, length and element words for each dynamic argument.
pub(crate) fn event_data_bytes(scalars: u64, array_lens: &[u64]) -> u64 {
    32 * scalars + array_lens.iter().map(|n| 64 + 32 * n).sum::<u64>()
}

pub(crate) fn event_string_bytes(s: &str) -> u64 {
    64 + 32 * (s.len() as u64).div_ceil(32)
}

// ---------------------------------------------------------------------------
// Authorization flow footprints
// ---------------------------------------------------------------------------

/// Footprint of one single-user authorization transaction: one packed
/// UserInfo slot (address plus expiry fit a single 32-byte slot), one
/// user-update event, and the call's calldata.
pub(crate) fn single_user_footprint(s: &GasSchedule) -> StorageFootprint {
    let mut fp = StorageFootprint {
        new_slots: 1,
        ..StorageFootprint::default()
    };
    fp.add_event(event_data_bytes(3, &[])); // tokenId, user, expires
    let mut cd = CalldataBuilder::new();
    cd.uint().word(s.address_bytes).word(s.timestamp_bytes);
    cd.apply(&mut fp);
    fp
}

/// Storage and event part of one batch authorization over `n` slots: three
/// dynamic arrays (users, start times, end times), each costing one fresh
/// length-slot allocation plus packed data-slot writes, and one user-update
/// event whose data grows with `n`. Calldata is added separately so that
/// internal invocations are not charged for it.
pub(crate) fn batch_user_storage_footprint(
    s: &GasSchedule,
    n: u64,
) -> Result<StorageFootprint, EngineError> {
    let user_slots = packed_slots(s.address_bytes, n)?;
    let time_slots = packed_slots(s.timestamp_bytes, n)?;
    let mut fp = StorageFootprint {
        new_slots: 3,
        updated_slots: user_slots + 2 * time_slots,
        ..StorageFootprint::default()
    };
    fp.add_event(event_data_bytes(1, &[n, n, n]));
    Ok(fp)
}

/// Footprint of one directly-called batch authorization transaction,
/// including its calldata (which also grows with `n`).
pub(crate) fn batch_user_footprint(
    s: &GasSchedule,
    n: u64,
) -> Result<StorageFootprint, EngineError> {
    let mut fp = batch_user_storage_footprint(s, n)?;
    let mut cd = CalldataBuilder::new();
    cd.uint()
        .dyn_array(n, s.address_bytes)
        .dyn_array(n, s.timestamp_bytes)
        .dyn_array(n, s.timestamp_bytes);
    cd.apply(&mut fp);
    Ok(fp)
}

// ---------------------------------------------------------------------------
// Flow reports
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMethod {
    Erc4907Sequential,
    MErc4907Batch,
}

/// Gas totals for an authorization flow over `1..=slot_count` slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GasReport {
    pub method: FlowMethod,
    pub slot_count: u64,
    pub tx_count: u64,
    pub total_gas: u64,
    /// Cumulative gas after authorizing the first k slots, k = 1..=n.
    pub per_point_gas: Vec<u64>,
    /// First differences of `per_point_gas`.
    pub marginal_gas: Vec<u64>,
}

impl GasReport {
    pub fn average_marginal(&self) -> f64 {
        if self.marginal_gas.is_empty() {
            return 0.0;
        }
        let sum: u64 = self.marginal_gas.iter().sum();
        sum as f64 / self.marginal_gas.len() as f64
    }
}

fn first_differences(points: &[u64]) -> Vec<u64> {
    points.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Sequential flow: each slot is authorized by an independent transaction,
/// so the total is exactly affine in the slot count.
pub fn gas_for_erc4907_flow(n: u64, schedule: &GasSchedule) -> Result<GasReport, EngineError> {
    if n == 0 {
        return Err(EngineError::Gas("slot count must be at least 1".into()));
    }
    let per_tx = attach_gas(true, &single_user_footprint(schedule), schedule);
    let per_point_gas: Vec<u64> = (1..=n).map(|k| k * per_tx).collect();
    let marginal_gas = first_differences(&per_point_gas);
    Ok(GasReport {
        method: FlowMethod::Erc4907Sequential,
        slot_count: n,
        tx_count: n,
        total_gas: per_tx * n,
        per_point_gas,
        marginal_gas,
    })
}

/// Batch flow: one transaction authorizes every slot. `per_point_gas[k-1]`
/// is the cost of a hypothetical batch of size k.
pub fn gas_for_m_erc4907_flow(n: u64, schedule: &GasSchedule) -> Result<GasReport, EngineError> {
    if n == 0 {
        return Err(EngineError::Gas("slot count must be at least 1".into()));
    }
    let mut per_point_gas = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let fp = batch_user_footprint(schedule, k)?;
        per_point_gas.push(attach_gas(true, &fp, schedule));
    }
    let marginal_gas = first_differences(&per_point_gas);
    Ok(GasReport {
        method: FlowMethod::MErc4907Batch,
        slot_count: n,
        tx_count: 1,
        total_gas: *per_point_gas.last().expect("n >= 1"),
        per_point_gas,
        marginal_gas,
    })
}

/// Smallest slot count at which the batch flow's total gas drops below the
/// sequential flow's total, if it happens within `max_slots`.
pub fn total_gas_crossover(
    max_slots: u64,
    schedule: &GasSchedule,
) -> Result<Option<u64>, EngineError> {
    let seq = gas_for_erc4907_flow(max_slots, schedule)?;
    let batch = gas_for_m_erc4907_flow(max_slots, schedule)?;
    for (i, (b, e)) in batch
        .per_point_gas
        .iter()
        .zip(&seq.per_point_gas)
        .enumerate()
    {
        if b < e {
            return Ok(Some(i as u64 + 1));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

/// Marginal-gas targets for calibration. The defaults are the measured
/// London-testnet reference marginals this model is tuned against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    /// Per-slot marginal of the sequential flow.
    pub erc4907_marginal: f64,
    /// Average per-slot marginal of the batch flow over slots 1..=10.
    pub m_erc4907_marginal: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        CalibrationTargets {
            erc4907_marginal: 26_270.0,
            m_erc4907_marginal: 5_409.0,
        }
    }
}

/// Result of fitting the two free calibration parameters.
#[derive(Clone, Debug)]
pub struct CalibrationFit {
    pub schedule: GasSchedule,
    /// Signed adjustment applied to `tx_base`.
    pub tx_base_delta: i64,
    /// Signed adjustment applied to each slot write (both sstore prices).
    pub slot_write_delta: i64,
    pub fitted_erc4907_marginal: f64,
    pub fitted_m_erc4907_marginal: f64,
    /// Relative residuals against the two targets.
    pub erc4907_residual: f64,
    pub m_erc4907_residual: f64,
}

const CALIBRATION_SPAN: u64 = 10;

fn average_batch_marginal(schedule: &GasSchedule) -> Result<f64, EngineError> {
    Ok(gas_for_m_erc4907_flow(CALIBRATION_SPAN, schedule)?.average_marginal())
}

fn apply_delta(value: u64, delta: i64) -> Result<u64, EngineError> {
    let adjusted = value as i128 + delta as i128;
    u64::try_from(adjusted).map_err(|_| {
        EngineError::Gas(format!(
            "calibration would drive a schedule entry negative ({value} {delta:+})"
        ))
    })
}

/// Least-squares fit of two free scalars against the two marginal targets: a
/// per-transaction overhead delta (on `tx_base`) and a per-slot-write
/// overhead delta (on both sstore prices). All other entries are untouched.
/// With two parameters and two targets the system solves exactly, so the
/// residuals are rounding error only.
pub fn calibrate(
    schedule: &GasSchedule,
    targets: &CalibrationTargets,
) -> Result<CalibrationFit, EngineError> {
    if !targets.erc4907_marginal.is_finite()
        || !targets.m_erc4907_marginal.is_finite()
        || targets.erc4907_marginal <= 0.0
        || targets.m_erc4907_marginal <= 0.0
    {
        return Err(EngineError::Gas(
            "calibration targets must be positive".into(),
        ));
    }

    let base_seq = attach_gas(true, &single_user_footprint(schedule), schedule) as f64;
    let base_batch_avg = average_batch_marginal(schedule)?;

    // Slot-write growth per marginal step of the batch flow. The sequential
    // marginal always contains exactly one slot write.
    let writes_first = batch_user_footprint(schedule, 1)?.slot_writes();
    let writes_last = batch_user_footprint(schedule, CALIBRATION_SPAN)?.slot_writes();
    let write_coef = (writes_last - writes_first) as f64 / (CALIBRATION_SPAN - 1) as f64;
    if write_coef == 0.0 {
        return Err(EngineError::Gas(
            "degenerate configuration: batch slot writes do not grow".into(),
        ));
    }

    let slot_write_delta = (targets.m_erc4907_marginal - base_batch_avg) / write_coef;
    let tx_base_delta = targets.erc4907_marginal - base_seq - slot_write_delta;

    let tx_base_delta = tx_base_delta.round() as i64;
    let slot_write_delta = slot_write_delta.round() as i64;

    let mut fitted = schedule.clone();
    fitted.tx_base = apply_delta(schedule.tx_base, tx_base_delta)?;
    fitted.sstore_set = apply_delta(schedule.sstore_set, slot_write_delta)?;
    fitted.sstore_update = apply_delta(schedule.sstore_update, slot_write_delta)?;

    let fitted_erc4907_marginal = attach_gas(true, &single_user_footprint(&fitted), &fitted) as f64;
    let fitted_m_erc4907_marginal = average_batch_marginal(&fitted)?;

    // The batch flow's fixed setup cost must stay above the sequential
    // single-slot cost, otherwise the fit is unusable.
    let seq_one = gas_for_erc4907_flow(1, &fitted)?.total_gas;
    let batch_one = gas_for_m_erc4907_flow(1, &fitted)?.total_gas;
    if batch_one <= seq_one {
        return Err(EngineError::Gas(
            "degenerate targets: calibrated batch single-slot cost no longer exceeds the sequential cost".into(),
        ));
    }

    Ok(CalibrationFit {
        schedule: fitted,
        tx_base_delta,
        slot_write_delta,
        fitted_erc4907_marginal,
        fitted_m_erc4907_marginal,
        erc4907_residual: (fitted_erc4907_marginal - targets.erc4907_marginal).abs()
            / targets.erc4907_marginal,
        m_erc4907_residual: (fitted_m_erc4907_marginal - targets.m_erc4907_marginal).abs()
            / targets.m_erc4907_marginal,
    })
}
