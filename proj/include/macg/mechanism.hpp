#pragma once

#include <optional>
#include <span>
#include <vector>

#include "macg/bid_policy.hpp"
#include "macg/domain.hpp"

namespace macg {

// Result of one single-slot GSP auction.
struct AuctionOutcome {
    std::uint64_t auction_id = 0;
    std::optional<AdId> winner;
    int winner_slot = -1;          // index into event.participants, -1 if no winner
    double winning_ecpm = 0.0;     // CTR * bid of the winner
    double price_per_click = 0.0;  // expected_cost / CTR
    double expected_cost = 0.0;    // runner-up eCPM (GSP second price)
    double objective_contribution = 0.0;  // winner's g_k value for this impression

    bool operator==(const AuctionOutcome&) const = default;
};

struct AdAccumulators {
    double cost = 0.0;       // sum of expected costs w
    double clicks = 0.0;     // sum of CTR over wins
    double gmv = 0.0;        // sum of CTR*CVR*IP over wins
    double cart = 0.0;       // sum of CTR*WCVR over wins
    double objective = 0.0;  // sum of g_k over wins

    bool operator==(const AdAccumulators&) const = default;
};

struct EpisodeResult {
    std::vector<AuctionOutcome> outcomes;
    // Aligned with log.ads.
    std::vector<AdAccumulators> per_ad;
    std::vector<std::optional<Timestamp>> exhausted_at;
};

// Single-slot GSP resolution: rank eligible participants by eCPM = CTR * bid,
// highest wins, pays the runner-up's eCPM. Ties break toward the lower ad id.
// With exactly one eligible participant the reserve price stands in for the
// runner-up; a lone ad below the reserve does not win, so the charged price
// can never exceed the winner's own eCPM.
inline AuctionOutcome resolve_auction(const EpisodeLog& log, const AuctionEvent& event,
                                      std::span<const double> bids,
                                      std::span<const char> eligible, double reserve = 0.0) {
    if (bids.size() != event.participants.size() || eligible.size() != event.participants.size())
        throw DataError("auction " + std::to_string(event.id) +
                        ": bid/eligibility size does not match participants");

    AuctionOutcome out;
    out.auction_id = event.id;

    int best = -1, second = -1;
    double best_ecpm = 0.0, second_ecpm = 0.0;
    int eligible_count = 0;
    for (std::size_t s = 0; s < event.participants.size(); ++s) {
        const double bid = bids[s];
        if (!std::isfinite(bid) || bid < 0.0)
            throw DataError("auction " + std::to_string(event.id) + ": bad bid for ad " +
                            std::to_string(event.participants[s].ad));
        if (!eligible[s]) continue;
        ++eligible_count;
        const double ecpm = event.participants[s].features.ctr * bid;
        const AdId ad = event.participants[s].ad;
        const bool beats_best =
            best < 0 || ecpm > best_ecpm || (ecpm == best_ecpm && ad < event.participants[best].ad);
        if (beats_best) {
            second = best;
            second_ecpm = best_ecpm;
            best = static_cast<int>(s);
            best_ecpm = ecpm;
        } else if (second < 0 || ecpm > second_ecpm ||
                   (ecpm == second_ecpm && ad < event.participants[second].ad)) {
            second = static_cast<int>(s);
            second_ecpm = ecpm;
        }
    }

    if (eligible_count == 0) return out;
    if (eligible_count == 1 && best_ecpm < reserve) return out;  // lone ad below reserve

    const Participant& w = event.participants[best];
    out.winner = w.ad;
    out.winner_slot = best;
    out.winning_ecpm = best_ecpm;
    out.expected_cost = second >= 0 ? second_ecpm : reserve;
    out.price_per_click = w.features.ctr > 0.0 ? out.expected_cost / w.features.ctr : 0.0;
    out.objective_contribution = objective_value(log.profile(w.ad).kind, w.features);
    return out;
}

// Budget-aware sequential replay of one episode under a bidding policy.
//
// Auctions run in timestamp order. Before each auction every participant is
// checked against its remaining budget: an ad quits once its budget is used
// up (remaining <= 0) and sits out any auction whose bid exceeds what is
// left (remaining < bid). Since the charged price never exceeds CTR * bid
// <= bid, accumulated cost can never exceed B_i. Self-bidding participants
// always bid their profile's self_bid.
inline EpisodeResult replay_episode(const EpisodeLog& log, const BidPolicy& policy,
                                    double reserve = 0.0) {
    EpisodeResult result;
    result.outcomes.reserve(log.auctions.size());
    result.per_ad.resize(log.ads.size());
    result.exhausted_at.resize(log.ads.size());

    std::vector<double> remaining(log.ads.size());
    for (std::size_t s = 0; s < log.ads.size(); ++s) remaining[s] = log.ads[s].budget;

    std::vector<double> bids;
    std::vector<char> eligible;
    std::vector<std::size_t> slots;

    for (const AuctionEvent& event : log.auctions) {
        const std::size_t n = event.participants.size();
        bids.assign(n, 0.0);
        eligible.assign(n, 0);
        slots.resize(n);

        policy.bid_for_auction(event, log, bids);

        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t slot = log.slot_of(event.participants[s].ad);
            if (slot == EpisodeLog::npos)
                throw DataError("auction " + std::to_string(event.id) + ": unknown ad " +
                                std::to_string(event.participants[s].ad));
            slots[s] = slot;
            const AdProfile& ad = log.ads[slot];
            if (ad.kind == ObjectiveKind::SelfBidding) bids[s] = ad.self_bid;
            const bool has_budget = remaining[slot] > 0.0 && remaining[slot] >= bids[s];
            eligible[s] = has_budget ? 1 : 0;
            if (!has_budget && !result.exhausted_at[slot])
                result.exhausted_at[slot] = event.timestamp;
        }

        AuctionOutcome outcome = resolve_auction(log, event, bids, eligible, reserve);
        if (outcome.winner) {
            const std::size_t slot = slots[outcome.winner_slot];
            const FeatureVector& f = event.participants[outcome.winner_slot].features;
            AdAccumulators& acc = result.per_ad[slot];
            acc.cost += outcome.expected_cost;
            acc.clicks += f.ctr;
            acc.gmv += gmv_value(f);
            acc.cart += f.ctr * f.wcvr;
            acc.objective += outcome.objective_contribution;
            remaining[slot] -= outcome.expected_cost;
        }
        result.outcomes.push_back(std::move(outcome));
    }
    return result;
}

}  // namespace macg
