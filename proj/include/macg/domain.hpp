#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace macg {

// Malformed external input: log files, checkpoints, degenerate benchmarks.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration supplied by the user.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using AdId = std::uint32_t;
using Timestamp = std::uint64_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Smart-bidding ads carry exactly one of Click/Gmv/Cart and bid through the
// policy net; self-bidding ads always bid their own static price.
enum class ObjectiveKind : std::uint8_t { Click, Gmv, Cart, SelfBidding };

inline bool is_smart(ObjectiveKind k) { return k != ObjectiveKind::SelfBidding; }

// Objective group index: 1 = click, 2 = GMV, 3 = cart. Group 0 (everyone,
// including self-bidding ads) is handled by the scoring accumulators.
inline int objective_group(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::Click: return 1;
        case ObjectiveKind::Gmv: return 2;
        case ObjectiveKind::Cart: return 3;
        case ObjectiveKind::SelfBidding: return 0;
    }
    return 0;
}

inline constexpr int kFeatureDim = 8;

// Per-(ad, auction) predicted features. Field order is fixed; files and the
// policy-net input layer both rely on it.
struct FeatureVector {
    double ctr = 0.0;         // predicted click-through rate, [0,1]
    double cvr = 0.0;         // predicted conversion rate, [0,1]
    double item_price = 0.0;  // item price, >= 0
    double wcvr = 0.0;        // predicted weak conversion (cart/favorite), [0,1]
    double hist_gmv = 0.0;    // accumulated historical GMV of the ad
    double hist_cost = 0.0;   // accumulated historical cost of the ad
    double hist_ppc = 0.0;    // historical pay-per-click of the ad
    double tk = 0.0;          // historical cost/GMV (reciprocal ROI), > 0

    std::array<double, kFeatureDim> as_array() const {
        return {ctr, cvr, item_price, wcvr, hist_gmv, hist_cost, hist_ppc, tk};
    }

    static FeatureVector from_array(const std::array<double, kFeatureDim>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
    }

    bool operator==(const FeatureVector&) const = default;
};

// Componentwise mean of the participants' feature vectors of one auction.
struct SummaryVector {
    std::array<double, kFeatureDim> mean{};

    bool operator==(const SummaryVector&) const = default;
};

struct AdProfile {
    AdId id = 0;
    ObjectiveKind kind = ObjectiveKind::Gmv;
    double budget = kInfinity;   // B_i, total spend cap over one episode
    double ppc_cap = kInfinity;  // C_i, pay-per-click cap (diagnostic)
    double floor = 0.0;          // F_i, lower bound on the realized objective (diagnostic)
    double tk = 0.1;             // historical cost/GMV, > 0
    double base_bid = 1.0;       // static per-ad bid scale, > 0
    double self_bid = 0.0;       // fixed bid, > 0 for self-bidding ads
    double hist_cvr = 0.0;       // historical mean CVR, OCPC reference point
    std::map<int, double> keyword_bids;  // MKB table, keyword -> fixed bid

    bool operator==(const AdProfile&) const = default;
};

struct Participant {
    AdId ad = 0;
    FeatureVector features;

    bool operator==(const Participant&) const = default;
};

struct AuctionEvent {
    std::uint64_t id = 0;
    Timestamp timestamp = 0;  // monotone sequence index within an episode
    int keyword = 0;
    std::vector<Participant> participants;

    bool operator==(const AuctionEvent&) const = default;
};

// One day's worth of auctions over a fixed ad population.
struct EpisodeLog {
    std::vector<AdProfile> ads;
    std::vector<AuctionEvent> auctions;

    bool operator==(const EpisodeLog& other) const {
        return ads == other.ads && auctions == other.auctions;
    }

    void build_index() {
        index_.clear();
        index_.reserve(ads.size());
        for (std::size_t s = 0; s < ads.size(); ++s) index_.emplace(ads[s].id, s);
    }

    // Dense slot of an ad id, or npos when unknown.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t slot_of(AdId id) const {
        auto it = index_.find(id);
        return it == index_.end() ? npos : it->second;
    }

    const AdProfile& profile(AdId id) const {
        const std::size_t s = slot_of(id);
        if (s == npos) throw DataError("unknown ad id " + std::to_string(id));
        return ads[s];
    }

private:
    std::unordered_map<AdId, std::size_t> index_;
};

// Objective value g_k(i, j) of one impression.
inline double objective_value(ObjectiveKind kind, const FeatureVector& f) {
    switch (kind) {
        case ObjectiveKind::Click: return f.ctr;
        case ObjectiveKind::Cart: return f.ctr * f.wcvr;
        case ObjectiveKind::Gmv:
        case ObjectiveKind::SelfBidding: return f.ctr * f.cvr * f.item_price;
    }
    return 0.0;
}

// Global objective g_0(i, j): GMV of the impression, identical for all kinds.
inline double gmv_value(const FeatureVector& f) { return f.ctr * f.cvr * f.item_price; }

inline SummaryVector summarize(const AuctionEvent& event) {
    SummaryVector s;
    if (event.participants.empty()) return s;
    for (const Participant& p : event.participants) {
        const auto a = p.features.as_array();
        for (int d = 0; d < kFeatureDim; ++d) s.mean[d] += a[d];
    }
    const double inv = 1.0 / static_cast<double>(event.participants.size());
    for (int d = 0; d < kFeatureDim; ++d) s.mean[d] *= inv;
    return s;
}

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw DataError(what);
}

inline bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace detail

inline void validate(const FeatureVector& f, const std::string& where) {
    using detail::require;
    const auto a = f.as_array();
    for (double v : a) require(std::isfinite(v) && v >= 0.0, where + ": feature not finite non-negative");
    require(f.ctr <= 1.0 && f.cvr <= 1.0 && f.wcvr <= 1.0, where + ": probability feature > 1");
    require(f.tk > 0.0, where + ": feature tk must be > 0");
}

inline void validate(const AdProfile& ad) {
    using detail::require;
    const std::string where = "ad " + std::to_string(ad.id);
    require(std::isfinite(ad.budget) || ad.budget == kInfinity, where + ": bad budget");
    require(ad.budget >= 0.0, where + ": negative budget");
    require((std::isfinite(ad.ppc_cap) && ad.ppc_cap >= 0.0) || ad.ppc_cap == kInfinity,
            where + ": bad ppc cap");
    require(detail::finite_nonneg(ad.floor), where + ": bad floor");
    require(std::isfinite(ad.tk) && ad.tk > 0.0, where + ": tk must be > 0");
    require(std::isfinite(ad.base_bid) && ad.base_bid > 0.0, where + ": base_bid must be > 0");
    if (ad.kind == ObjectiveKind::SelfBidding)
        require(std::isfinite(ad.self_bid) && ad.self_bid > 0.0, where + ": self_bid must be > 0");
    require(detail::finite_nonneg(ad.hist_cvr), where + ": bad hist_cvr");
    for (const auto& [kw, bid] : ad.keyword_bids)
        require(detail::finite_nonneg(bid), where + ": bad keyword bid");
}

inline void validate(const EpisodeLog& log) {
    using detail::require;
    for (const AdProfile& ad : log.ads) validate(ad);
    bool first = true;
    Timestamp prev = 0;
    for (const AuctionEvent& ev : log.auctions) {
        const std::string where = "auction " + std::to_string(ev.id);
        require(!ev.participants.empty(), where + ": no participants");
        require(first || ev.timestamp > prev, where + ": timestamps not strictly increasing");
        first = false;
        prev = ev.timestamp;
        for (std::size_t a = 0; a < ev.participants.size(); ++a) {
            const Participant& p = ev.participants[a];
            require(log.slot_of(p.ad) != EpisodeLog::npos,
                    where + ": unknown ad " + std::to_string(p.ad));
            for (std::size_t b = a + 1; b < ev.participants.size(); ++b)
                require(ev.participants[b].ad != p.ad,
                        where + ": duplicate ad " + std::to_string(p.ad));
            validate(p.features, where);
        }
    }
}

}  // namespace macg
