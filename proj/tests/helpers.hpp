#pragma once

#include <functional>
#include <vector>

#include "macg/bid_policy.hpp"
#include "macg/domain.hpp"
#include "macg/rng.hpp"

namespace macg::test {

inline AdProfile make_ad(AdId id, ObjectiveKind kind, double budget = kInfinity,
                         double base_bid = 1.0, double self_bid = 1.0) {
    AdProfile ad;
    ad.id = id;
    ad.kind = kind;
    ad.budget = budget;
    ad.base_bid = base_bid;
    ad.tk = 0.1;
    ad.hist_cvr = 0.05;
    if (kind == ObjectiveKind::SelfBidding) ad.self_bid = self_bid;
    return ad;
}

inline FeatureVector make_features(double ctr, double cvr = 0.05, double ip = 50.0,
                                   double wcvr = 0.2, double tk = 0.1) {
    FeatureVector f;
    f.ctr = ctr;
    f.cvr = cvr;
    f.item_price = ip;
    f.wcvr = wcvr;
    f.hist_gmv = 10.0;
    f.hist_cost = 1.0;
    f.hist_ppc = 0.5;
    f.tk = tk;
    return f;
}

inline EpisodeLog make_log(std::vector<AdProfile> ads, std::vector<AuctionEvent> auctions) {
    EpisodeLog log;
    log.ads = std::move(ads);
    log.auctions = std::move(auctions);
    log.build_index();
    return log;
}

// Deterministic pseudo-random valid feature vector.
inline FeatureVector random_features(Rng& rng) {
    FeatureVector f;
    f.ctr = rng.uniform(0.001, 0.9);
    f.cvr = rng.uniform(0.001, 0.9);
    f.item_price = rng.uniform(0.1, 300.0);
    f.wcvr = rng.uniform(0.001, 0.9);
    f.hist_gmv = rng.uniform(0.0, 100.0);
    f.hist_cost = rng.uniform(0.0, 20.0);
    f.hist_ppc = rng.uniform(0.0, 5.0);
    f.tk = rng.uniform(0.01, 2.0);
    return f;
}

// Bids derived from a fixed hash of (auction, ad): deterministic, coarse
// enough to produce ties, with occasional zeros.
class HashBidPolicy : public BidPolicy {
public:
    explicit HashBidPolicy(std::uint64_t salt = 0) : salt_(salt) {}

    void bid_for_auction(const AuctionEvent& event, const EpisodeLog& log,
                         std::span<double> bids) const override {
        for (std::size_t s = 0; s < event.participants.size(); ++s) {
            Rng h = Rng(salt_).substream(event.id * 1000003 + event.participants[s].ad);
            bids[s] = static_cast<double>(h.below(13)) / 4.0;
        }
        (void)log;
    }

private:
    std::uint64_t salt_;
};

struct FixedBidPolicy : BidPolicy {
    std::function<double(const AuctionEvent&, AdId)> fn;

    explicit FixedBidPolicy(std::function<double(const AuctionEvent&, AdId)> f)
        : fn(std::move(f)) {}

    void bid_for_auction(const AuctionEvent& event, const EpisodeLog&,
                         std::span<double> bids) const override {
        for (std::size_t s = 0; s < event.participants.size(); ++s)
            bids[s] = fn(event, event.participants[s].ad);
    }
};

}  // namespace macg::test
