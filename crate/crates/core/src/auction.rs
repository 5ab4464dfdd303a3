//! Multi-slot synchronous English auction: initialization, ascending bids
//! with refund stacking, and termination with seller payout, loser refunds
//! and batch winner authorization.

use sha3::Keccak256;

use crate::gas::{
    event_data_bytes, event_string_bytes, CalldataBuilder, GasSchedule, StorageFootprint,
};
use crate::ledger::TokenId;
use crate::sim::{
    digest_wei, Address, CallEffect, CallReturn, EngineError, Event, Timestamp, Wei, World,
};

/// Per-slot auction state.
#[derive(Clone, Debug)]
pub struct TimeSlotAuction {
    /// Zero address until the first accepted bid.
    pub highest_bidder: Address,
    /// Standing bid, zeroed when the auction settles. Zero iff no bidder.
    pub highest_bid: Wei,
    /// Reserve price below which no bid is accepted.
    pub bottom_price: Wei,
    pub is_finalized: bool,
    /// Append-only, duplicates allowed.
    pub bidders: Vec<Address>,
}

/// One auction per token at a time.
#[derive(Clone, Debug)]
pub struct AuctionState {
    pub token_id: TokenId,
    pub seller: Address,
    pub auction_end_time: Timestamp,
    pub time_slot_count: usize,
    pub has_ended: bool,
    pub slots: Vec<TimeSlotAuction>,
}

impl AuctionState {
    pub fn slot(&self, i: usize) -> Option<&TimeSlotAuction> {
        self.slots.get(i)
    }

    pub(crate) fn digest_into(&self, h: &mut Keccak256) {
        use sha3::Digest;
        h.update(self.token_id.to_be_bytes());
        h.update(self.seller.0);
        h.update(self.auction_end_time.0.to_be_bytes());
        h.update((self.time_slot_count as u64).to_be_bytes());
        h.update([self.has_ended as u8]);
        for slot in &self.slots {
            h.update(slot.highest_bidder.0);
            digest_wei(h, &slot.highest_bid);
            digest_wei(h, &slot.bottom_price);
            h.update([slot.is_finalized as u8]);
            h.update((slot.bidders.len() as u64).to_be_bytes());
            for b in &slot.bidders {
                h.update(b.0);
            }
        }
    }
}

const AUCTION_IN_PROGRESS: &str = "Auction in progress";

impl World {
    /// Opens a synchronous English auction over every idle slot of a token.
    /// Returns false (without reverting) when the caller is unauthorized or
    /// some lease is currently active.
    pub(crate) fn start_auction(
        &mut self,
        caller: Address,
        token_id: TokenId,
        auction_duration: u64,
        time_slot_count: usize,
        bottom_price: Wei,
        _schedule: &GasSchedule,
    ) -> Result<CallEffect, EngineError> {
        let now = self.clock;
        let token = self
            .tokens
            .get(&token_id)
            .ok_or(EngineError::UnknownToken(token_id))?;
        if time_slot_count != token.idle_time_slot_num() {
            return Err(EngineError::LengthMismatch(format!(
                "time_slot_count {} does not match the token's {} idle slots",
                time_slot_count,
                token.idle_time_slot_num()
            )));
        }
        if self.auctions.get(&token_id).is_some_and(|a| !a.has_ended) {
            return Err(EngineError::AuctionActive(token_id));
        }
        if !token.is_authorized(caller) || !token.user_of(now).is_zero() {
            return Ok(CallEffect::returning(CallReturn::Bool(false)));
        }

        let seller = token.owner;
        self.auctions.insert(
            token_id,
            AuctionState {
                token_id,
                seller,
                auction_end_time: now.plus(auction_duration),
                time_slot_count,
                has_ended: false,
                slots: vec![
                    TimeSlotAuction {
                        highest_bidder: Address::ZERO,
                        highest_bid: Wei::zero(),
                        bottom_price: bottom_price.clone(),
                        is_finalized: false,
                        bidders: Vec::new(),
                    };
                    time_slot_count
                ],
            },
        );

        let event = Event::new("auctionStart")
            .with_str("0", token_id.to_string())
            .with_str("1", auction_duration.to_string())
            .with_str("2", time_slot_count.to_string())
            .with_str("3", bottom_price.to_string())
            .with_str("4", AUCTION_IN_PROGRESS)
            .with_str("tokenId", token_id.to_string())
            .with_str("auctionDuration", auction_duration.to_string())
            .with_str("timeSlotCount", time_slot_count.to_string())
            .with_str("timeSlotBottomPrice", bottom_price.to_string())
            .with_str("auctionStatus", AUCTION_IN_PROGRESS);

        // Auction core takes two slots; each time slot stores its nonzero
        // bottom price (zero-valued bidder/bid/flag initializations are not
        // charged).
        let mut fp = StorageFootprint {
            new_slots: 2 + time_slot_count as u64,
            ..StorageFootprint::default()
        };
        fp.add_event(event_data_bytes(4, &[]) + event_string_bytes(AUCTION_IN_PROGRESS));
        let mut cd = CalldataBuilder::new();
        cd.uint().uint().uint().wei();
        cd.apply(&mut fp);

        Ok(CallEffect {
            ret: CallReturn::Bool(true),
            events: vec![event],
            footprint: fp,
        })
    }

    /// Places an ascending bid on one slot. The attached transaction value
    /// is the bid; an outbid bidder's escrow counts toward their next bid on
    /// the same slot. Every rejection reverts so the attached value is
    /// always returned.
    pub(crate) fn bid(
        &mut self,
        caller: Address,
        value: &Wei,
        token_id: TokenId,
        time_slot_id: usize,
        _schedule: &GasSchedule,
    ) -> Result<CallEffect, EngineError> {
        let now = self.clock;
        let auction = self
            .auctions
            .get(&token_id)
            .ok_or(EngineError::NoAuction(token_id))?;
        if auction.has_ended {
            return Err(EngineError::AuctionAlreadyEnded);
        }
        if time_slot_id >= auction.time_slot_count {
            return Err(EngineError::InvalidTimeSlot(time_slot_id));
        }
        let token = self
            .tokens
            .get(&token_id)
            .ok_or(EngineError::UnknownToken(token_id))?;
        if token.is_authorized(caller) {
            return Err(EngineError::SelfDealingBid);
        }
        let slot = &auction.slots[time_slot_id];
        if caller == slot.highest_bidder {
            return Err(EngineError::AlreadyHighestBidder);
        }
        if now >= auction.auction_end_time {
            return Err(EngineError::BiddingClosed);
        }

        let stacked_refund = self.refund_balance(token_id, time_slot_id, caller);
        let effective = value + &stacked_refund;
        if effective <= slot.highest_bid {
            return Err(EngineError::BidTooLow);
        }
        if effective < slot.bottom_price {
            return Err(EngineError::BidBelowBottomPrice);
        }

        let auction = self.auctions.get_mut(&token_id).expect("checked above");
        let slot = &mut auction.slots[time_slot_id];
        let first_bid = slot.highest_bidder.is_zero();
        if !first_bid {
            // Fold the displaced bidder's standing bid into the refund
            // ledger; their entry is zero while they hold the slot.
            let displaced = slot.highest_bidder;
            let standing = std::mem::take(&mut slot.highest_bid);
            self.refunds
                .insert((token_id, time_slot_id, displaced), standing);
        }
        slot.highest_bid = effective;
        slot.highest_bidder = caller;
        slot.bidders.push(caller);
        let cleared_refund = self
            .refunds
            .remove(&(token_id, time_slot_id, caller))
            .is_some();

        let mut fp = if first_bid {
            // Bidder word, bidders array element and length slot are fresh;
            // the bid word shares the nonzero bottom-price slot.
            StorageFootprint {
                new_slots: 3,
                updated_slots: 1,
                ..StorageFootprint::default()
            }
        } else {
            // Fresh array element and displaced bidder's ledger entry; the
            // bidder word, bid word and array length are overwrites.
            StorageFootprint {
                new_slots: 2,
                updated_slots: 3 + u64::from(cleared_refund),
                ..StorageFootprint::default()
            }
        };
        let mut cd = CalldataBuilder::new();
        cd.uint().uint();
        cd.apply(&mut fp);

        Ok(CallEffect {
            ret: CallReturn::Bool(true),
            events: Vec::new(),
            footprint: fp,
        })
    }

    /// Settles an ended auction: pays each slot's standing bid to the
    /// seller, refunds every outbid deposit, batch-authorizes the winners
    /// (bidless slots carry the zero address) and marks the auction ended.
    pub(crate) fn end_auction(
        &mut self,
        caller: Address,
        token_id: TokenId,
        schedule: &GasSchedule,
    ) -> Result<CallEffect, EngineError> {
        let now = self.clock;
        let auction = self
            .auctions
            .get(&token_id)
            .ok_or(EngineError::NoAuction(token_id))?;
        if auction.has_ended {
            return Err(EngineError::AuctionAlreadyEnded);
        }
        let token = self
            .tokens
            .get(&token_id)
            .ok_or(EngineError::UnknownToken(token_id))?;
        if !token.is_authorized(caller) {
            return Err(EngineError::NotAuthorized);
        }
        if now <= auction.auction_end_time {
            return Err(EngineError::AuctionStillRunning);
        }

        let seller = auction.seller;
        let slot_count = auction.time_slot_count;
        let starts = token.idle_start_timestamps.clone();
        let ends = token.idle_end_timestamps.clone();

        // Settle standing bids into the seller's balance.
        let mut winners = Vec::with_capacity(slot_count);
        let mut payouts: Vec<Wei> = Vec::new();
        {
            let auction = self.auctions.get_mut(&token_id).expect("checked above");
            for slot in &mut auction.slots {
                winners.push(slot.highest_bidder);
                let amount = std::mem::take(&mut slot.highest_bid);
                slot.is_finalized = true;
                if !slot.highest_bidder.is_zero() && !amount.is_zero() {
                    payouts.push(amount);
                }
            }
        }
        for amount in &payouts {
            self.credit(seller, amount);
            self.escrow = self
                .escrow
                .checked_sub(amount)
                .ok_or(EngineError::EscrowUnderflow)?;
        }

        // Refund every non-winning bidder, in slot order and bid order.
        let mut events = Vec::new();
        let mut refunded = 0u64;
        for slot_id in 0..slot_count {
            let (bidders, winner) = {
                let auction = self.auctions.get(&token_id).expect("checked above");
                (
                    auction.slots[slot_id].bidders.clone(),
                    auction.slots[slot_id].highest_bidder,
                )
            };
            for bidder in bidders {
                if bidder == winner {
                    continue;
                }
                let Some(amount) = self.refunds.remove(&(token_id, slot_id, bidder)) else {
                    continue;
                };
                if amount.is_zero() {
                    continue;
                }
                self.credit(bidder, &amount);
                self.escrow = self
                    .escrow
                    .checked_sub(&amount)
                    .ok_or(EngineError::EscrowUnderflow)?;
                refunded += 1;
                events.push(
                    Event::new("Refund")
                        .with_str("amountWei", amount.to_string())
                        .with_str("bidder", bidder.checksummed())
                        .with_str("timeSlotId", slot_id.to_string())
                        .with_str("tokenId", token_id.to_string()),
                );
            }
        }

        let batch = self.batch_set_user_inner(token_id, winners.clone(), starts, ends, schedule)?;
        events.extend(batch.events);

        let auction = self.auctions.get_mut(&token_id).expect("checked above");
        auction.has_ended = true;

        // Per-slot finalization writes, cleared refund entries, the ended
        // flag, plus the internal batch authorization's storage and event.
        let mut fp = StorageFootprint {
            updated_slots: slot_count as u64 + refunded + 1,
            ..StorageFootprint::default()
        };
        fp.event_data_bytes += refunded * event_data_bytes(4, &[]);
        fp.event_topics += refunded;
        fp.merge(&batch.footprint);
        let mut cd = CalldataBuilder::new();
        cd.uint();
        cd.apply(&mut fp);

        Ok(CallEffect {
            ret: CallReturn::Winners(winners),
            events,
            footprint: fp,
        })
    }
}
