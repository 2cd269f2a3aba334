#pragma once

#include <span>

#include "macg/domain.hpp"

namespace macg {

// A bidding policy fills one bid per participant, aligned with
// event.participants. Implementations set bids for smart-bidding
// participants only; the replay engine overrides self-bidding entries with
// the profile's self_bid regardless of what a policy wrote there.
//
// Policies are immutable after construction and must be deterministic in
// (event, log, own state), which makes them safe to share across
// concurrently running replays.
class BidPolicy {
public:
    virtual ~BidPolicy() = default;
    virtual void bid_for_auction(const AuctionEvent& event, const EpisodeLog& log,
                                 std::span<double> bids) const = 0;
};

}  // namespace macg
