#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "macg/bid_policy.hpp"
#include "macg/domain.hpp"

namespace macg {

// All five sub-networks share the same [8, 4, 1] shape: logistic hidden
// layer, linear output. The output x is squashed later, either into the
// multiplicative band [1-range, 1+range] (agent/shared nets) or into (0,1)
// (allocation net).
inline constexpr int kHiddenDim = 4;
inline constexpr int kNetParamCount =
    kFeatureDim * kHiddenDim + kHiddenDim + kHiddenDim + 1;  // 41
inline constexpr int kNetCount = 5;
inline constexpr int kPolicyParamCount = kNetCount * kNetParamCount;  // 205

// Flat parameter vector of the whole policy net. Layout: the three agent
// nets in objective order (click, gmv, cart), then the shared net, then the
// allocation net; within each net row-major W1, then b1, w2, b2.
using PolicyParams = std::vector<double>;

enum class NetSlot : int { AgentClick = 0, AgentGmv = 1, AgentCart = 2, Shared = 3, Allocation = 4 };

inline NetSlot agent_slot(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::Click: return NetSlot::AgentClick;
        case ObjectiveKind::Gmv: return NetSlot::AgentGmv;
        case ObjectiveKind::Cart: return NetSlot::AgentCart;
        case ObjectiveKind::SelfBidding: break;
    }
    throw std::logic_error("self-bidding ads have no agent net");
}

inline std::span<const double> net_params(std::span<const double> params, NetSlot slot) {
    return params.subspan(static_cast<int>(slot) * kNetParamCount, kNetParamCount);
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Forward pass of one [8,4,1] sub-network; returns the pre-transform output.
inline double mlp_forward(std::span<const double> p, const std::array<double, kFeatureDim>& x) {
    double out = p[kNetParamCount - 1];  // b2
    const double* w1 = p.data();
    const double* b1 = p.data() + kFeatureDim * kHiddenDim;
    const double* w2 = b1 + kHiddenDim;
    for (int h = 0; h < kHiddenDim; ++h) {
        double z = b1[h];
        for (int i = 0; i < kFeatureDim; ++i) z += w1[h * kFeatureDim + i] * x[i];
        out += w2[h] * sigmoid(z);
    }
    return out;
}

// Squash a raw net output into the multiplicative correction band
// [1-range, 1+range]; zero maps to the neutral factor 1.
inline double range_transform(double x, double range) {
    return 1.0 + range * (2.0 * sigmoid(x) - 1.0);
}

// Per-feature z-score statistics, frozen from the training log. Raw item
// prices and historical aggregates span orders of magnitude and would
// saturate the logistic units otherwise.
struct FeatureStats {
    std::array<double, kFeatureDim> mean{};
    std::array<double, kFeatureDim> std{};

    FeatureStats() { std.fill(1.0); }

    std::array<double, kFeatureDim> normalize(const std::array<double, kFeatureDim>& x) const {
        std::array<double, kFeatureDim> z;
        for (int d = 0; d < kFeatureDim; ++d) z[d] = (x[d] - mean[d]) / std[d];
        return z;
    }

    bool operator==(const FeatureStats&) const = default;
};

inline FeatureStats compute_feature_stats(const EpisodeLog& log) {
    FeatureStats stats;
    std::array<double, kFeatureDim> sum{};
    std::array<double, kFeatureDim> sum_sq{};
    std::size_t n = 0;
    for (const AuctionEvent& ev : log.auctions)
        for (const Participant& p : ev.participants) {
            const auto a = p.features.as_array();
            for (int d = 0; d < kFeatureDim; ++d) {
                sum[d] += a[d];
                sum_sq[d] += a[d] * a[d];
            }
            ++n;
        }
    if (n == 0) return stats;
    for (int d = 0; d < kFeatureDim; ++d) {
        stats.mean[d] = sum[d] / static_cast<double>(n);
        const double var = std::max(0.0, sum_sq[d] / static_cast<double>(n) -
                                             stats.mean[d] * stats.mean[d]);
        const double sd = std::sqrt(var);
        stats.std[d] = sd < 1e-12 ? 1.0 : sd;
    }
    return stats;
}

// Ablation switches: NoShared keeps only the agent nets (a_j = 1), NoAgents
// keeps only the shared net (a_j = 0), StaticAlloc replaces the allocation
// net with a fixed scalar.
enum class MacgVariant : std::uint8_t { Full, NoShared, NoAgents, StaticAlloc };

// Literal uses the bare g_k/CTR benchmark bid; Calibrated additionally
// multiplies the click and cart benchmarks by the ad's base_bid so the
// correction band works around a per-ad price scale rather than a
// dimensionless constant.
enum class BidMode : std::uint8_t { Literal, Calibrated };

struct MacgConfig {
    double range = 0.3;
    FeatureStats stats;
    MacgVariant variant = MacgVariant::Full;
    BidMode bid_mode = BidMode::Calibrated;
    double static_alloc = 0.5;  // a for the StaticAlloc variant

    void validate() const {
        if (!(range > 0.0 && range < 1.0)) throw ConfigError("macg range must be in (0,1)");
        if (!(static_alloc > 0.0 && static_alloc < 1.0))
            throw ConfigError("static allocation weight must be in (0,1)");
        for (double s : stats.std)
            if (!(s > 0.0)) throw ConfigError("feature std must be > 0");
    }

    bool operator==(const MacgConfig&) const = default;
};

// Selfish bid of one ad: benchmark bid times the agent net's correction
// factor y_k in [1-range, 1+range].
inline double agent_bid(ObjectiveKind kind, const AdProfile& profile, const FeatureVector& f,
                        std::span<const double> params, const MacgConfig& cfg) {
    const std::span<const double> net = net_params(params, agent_slot(kind));
    const double y = range_transform(mlp_forward(net, cfg.stats.normalize(f.as_array())), cfg.range);
    // Benchmark g_k/CTR: click -> 1, gmv -> cvr*ip, cart -> wcvr.
    double base = 1.0;
    switch (kind) {
        case ObjectiveKind::Click: base = 1.0; break;
        case ObjectiveKind::Gmv: base = f.cvr * f.item_price; break;
        case ObjectiveKind::Cart: base = f.wcvr; break;
        case ObjectiveKind::SelfBidding: throw std::logic_error("self-bidding ad in agent_bid");
    }
    if (cfg.bid_mode == BidMode::Calibrated && kind != ObjectiveKind::Gmv)
        base *= profile.base_bid;
    return base * y;
}

// Cooperative bid from the global-GMV perspective, common to every
// participant up to its own cvr*ip value.
inline double shared_bid(const FeatureVector& f, const SummaryVector& summary, double tk_bar,
                         std::span<const double> params, const MacgConfig& cfg) {
    const std::span<const double> net = net_params(params, NetSlot::Shared);
    const double y = range_transform(mlp_forward(net, cfg.stats.normalize(summary.mean)), cfg.range);
    return f.cvr * f.item_price * tk_bar * y;
}

// Interpolation weight a_j between the selfish and cooperative bids.
inline double allocation_weight(const SummaryVector& summary, std::span<const double> params,
                                const MacgConfig& cfg) {
    switch (cfg.variant) {
        case MacgVariant::NoShared: return 1.0;
        case MacgVariant::NoAgents: return 0.0;
        case MacgVariant::StaticAlloc: return cfg.static_alloc;
        case MacgVariant::Full: break;
    }
    const std::span<const double> net = net_params(params, NetSlot::Allocation);
    return sigmoid(mlp_forward(net, cfg.stats.normalize(summary.mean)));
}

// Final policy-net bids for the smart-bidding participants of one auction:
// b = a_j * b_agent + (1 - a_j) * b_shared. Entries for self-bidding
// participants are left untouched.
inline void macg_bid(const AuctionEvent& event, const EpisodeLog& log,
                     std::span<const double> params, const MacgConfig& cfg,
                     std::span<double> bids) {
    if (params.size() != static_cast<std::size_t>(kPolicyParamCount))
        throw DataError("policy parameter vector must have length " +
                        std::to_string(kPolicyParamCount) + ", got " +
                        std::to_string(params.size()));
    const SummaryVector summary = summarize(event);
    double tk_sum = 0.0;
    for (const Participant& p : event.participants) tk_sum += log.profile(p.ad).tk;
    const double tk_bar = tk_sum / static_cast<double>(event.participants.size());
    const double a = allocation_weight(summary, params, cfg);

    for (std::size_t s = 0; s < event.participants.size(); ++s) {
        const Participant& p = event.participants[s];
        const AdProfile& profile = log.profile(p.ad);
        if (!is_smart(profile.kind)) continue;
        const double b_agent = agent_bid(profile.kind, profile, p.features, params, cfg);
        const double b_shared = shared_bid(p.features, summary, tk_bar, params, cfg);
        bids[s] = a * b_agent + (1.0 - a) * b_shared;
    }
}

class MacgPolicy : public BidPolicy {
public:
    MacgPolicy(PolicyParams params, MacgConfig cfg)
        : params_(std::move(params)), cfg_(std::move(cfg)) {
        if (params_.size() != static_cast<std::size_t>(kPolicyParamCount))
            throw DataError("policy parameter vector must have length " +
                            std::to_string(kPolicyParamCount) + ", got " +
                            std::to_string(params_.size()));
        cfg_.validate();
    }

    void bid_for_auction(const AuctionEvent& event, const EpisodeLog& log,
                         std::span<double> bids) const override {
        macg_bid(event, log, params_, cfg_, bids);
    }

    const PolicyParams& params() const { return params_; }
    const MacgConfig& config() const { return cfg_; }

private:
    PolicyParams params_;
    MacgConfig cfg_;
};

// Benchmark policy: scale the static base bid by predicted-vs-historical
// conversion quality, clamped to the band [1-range, 1+range].
class OcpcPolicy : public BidPolicy {
public:
    explicit OcpcPolicy(double range = 0.3) : range_(range) {
        if (!(range > 0.0 && range < 1.0)) throw ConfigError("ocpc range must be in (0,1)");
    }

    void bid_for_auction(const AuctionEvent& event, const EpisodeLog& log,
                         std::span<double> bids) const override {
        for (std::size_t s = 0; s < event.participants.size(); ++s) {
            const Participant& p = event.participants[s];
            const AdProfile& profile = log.profile(p.ad);
            if (!is_smart(profile.kind)) continue;
            const double ratio =
                profile.hist_cvr > 0.0 ? p.features.cvr / profile.hist_cvr : 1.0;
            bids[s] = profile.base_bid * std::clamp(ratio, 1.0 - range_, 1.0 + range_);
        }
    }

private:
    double range_;
};

// Manual keyword-level bidding: one fixed bid per (ad, keyword), base_bid
// when the keyword is not in the table.
class MkbPolicy : public BidPolicy {
public:
    void bid_for_auction(const AuctionEvent& event, const EpisodeLog& log,
                         std::span<double> bids) const override {
        for (std::size_t s = 0; s < event.participants.size(); ++s) {
            const AdProfile& profile = log.profile(event.participants[s].ad);
            if (!is_smart(profile.kind)) continue;
            auto it = profile.keyword_bids.find(event.keyword);
            bids[s] = it != profile.keyword_bids.end() ? it->second : profile.base_bid;
        }
    }
};

// Multiplies another policy's smart bids by a constant factor. Used to probe
// collusion-style uniform underbidding.
class ScaledPolicy : public BidPolicy {
public:
    ScaledPolicy(const BidPolicy& inner, double factor) : inner_(inner), factor_(factor) {}

    void bid_for_auction(const AuctionEvent& event, const EpisodeLog& log,
                         std::span<double> bids) const override {
        inner_.bid_for_auction(event, log, bids);
        for (double& b : bids) b *= factor_;
    }

private:
    const BidPolicy& inner_;
    double factor_;
};

// Every smart ad bids its static base bid; used for warm-up replays.
class BaseBidPolicy : public BidPolicy {
public:
    void bid_for_auction(const AuctionEvent& event, const EpisodeLog& log,
                         std::span<double> bids) const override {
        for (std::size_t s = 0; s < event.participants.size(); ++s)
            bids[s] = log.profile(event.participants[s].ad).base_bid;
    }
};

}  // namespace macg
