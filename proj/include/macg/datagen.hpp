#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "macg/domain.hpp"
#include "macg/mechanism.hpp"
#include "macg/policies.hpp"
#include "macg/rng.hpp"
#include "macg/scoring.hpp"

namespace macg {

struct GenConfig {
    int n_ads = 200;
    int n_auctions = 10000;  // per log; train and test are drawn independently
    // Objective mix of the smart-bidding population. The defaults quote
    // reported shares that add up to 101% after rounding; the generator
    // normalizes them, and validation only rejects mixes off by more than
    // two points.
    double gmv_frac = 0.52;
    double cart_frac = 0.11;
    double click_frac = 0.38;
    double self_bidding_frac = 0.4;
    int min_participants = 4;
    int max_participants = 12;
    int n_keywords = 20;
    std::uint64_t seed = 42;
    int max_redraws = 8;
    double ocpc_range = 0.3;     // band of the benchmark used for floors and guarantees
    double reserve_price = 0.0;

    void validate() const {
        if (n_ads < 1) throw ConfigError("n_ads must be >= 1");
        if (n_auctions < 1) throw ConfigError("n_auctions must be >= 1");
        for (double f : {gmv_frac, cart_frac, click_frac, self_bidding_frac})
            if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("population fractions must be in [0,1]");
        const double sum = gmv_frac + cart_frac + click_frac;
        if (std::abs(sum - 1.0) > 0.02)
            throw ConfigError("objective fractions must sum to 1 (within 0.02)");
        if (self_bidding_frac >= 1.0) throw ConfigError("self_bidding_frac must be < 1");
        const int n_smart = n_ads - static_cast<int>(std::lround(self_bidding_frac * n_ads));
        if (n_smart < 3) throw ConfigError("need at least 3 smart-bidding ads (one per objective)");
        if (min_participants < 1 || max_participants < min_participants)
            throw ConfigError("bad participants-per-auction range");
        if (max_participants > n_ads) throw ConfigError("max_participants exceeds n_ads");
        if (n_keywords < 1) throw ConfigError("n_keywords must be >= 1");
        if (max_redraws < 1) throw ConfigError("max_redraws must be >= 1");
    }
};

struct LogPair {
    EpisodeLog train;
    EpisodeLog test;
};

namespace detail {

// Largest-remainder quota so group counts track the configured mix exactly
// rather than fluctuating with the seed.
inline std::vector<ObjectiveKind> assign_kinds(const GenConfig& cfg, Rng& rng) {
    const int n_self = static_cast<int>(std::lround(cfg.self_bidding_frac * cfg.n_ads));
    const int n_smart = cfg.n_ads - n_self;
    const double sum = cfg.gmv_frac + cfg.cart_frac + cfg.click_frac;
    const std::array<double, 3> frac = {cfg.click_frac / sum, cfg.gmv_frac / sum,
                                        cfg.cart_frac / sum};
    std::array<int, 3> count{};
    std::array<double, 3> remainder{};
    int assigned = 0;
    for (int k = 0; k < 3; ++k) {
        const double exact = frac[k] * n_smart;
        count[k] = static_cast<int>(exact);
        remainder[k] = exact - count[k];
        assigned += count[k];
    }
    while (assigned < n_smart) {
        const int k = static_cast<int>(std::max_element(remainder.begin(), remainder.end()) -
                                       remainder.begin());
        ++count[k];
        remainder[k] = -1.0;
        ++assigned;
    }
    // Every objective group must exist for the benchmark scores to be defined.
    for (int k = 0; k < 3; ++k)
        if (count[k] == 0) {
            const int donor = static_cast<int>(std::max_element(count.begin(), count.end()) -
                                               count.begin());
            --count[donor];
            ++count[k];
        }

    std::vector<ObjectiveKind> kinds;
    kinds.reserve(cfg.n_ads);
    kinds.insert(kinds.end(), count[0], ObjectiveKind::Click);
    kinds.insert(kinds.end(), count[1], ObjectiveKind::Gmv);
    kinds.insert(kinds.end(), count[2], ObjectiveKind::Cart);
    kinds.insert(kinds.end(), n_self, ObjectiveKind::SelfBidding);
    for (std::size_t i = kinds.size(); i > 1; --i)
        std::swap(kinds[i - 1], kinds[rng.below(i)]);
    return kinds;
}

struct AdLatents {
    double ctr_base = 0.0;
    double cvr_base = 0.0;
    double wcvr_base = 0.0;
    double ip_base = 0.0;
    std::vector<int> affinities;
};

inline double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace detail

// Synthetic auction logs: a shared ad population with per-ad latent quality,
// and two independently drawn auction streams over it. Historical fields
// (tk, hist_*, hist_cvr) come from a warm-up replay where every ad bids its
// static base bid, so they are self-consistent with the market the log
// describes. Budgets and floors are anchored to that warm-up as well.
inline LogPair generate(const GenConfig& cfg) {
    cfg.validate();

    auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

    for (int attempt = 0; attempt < cfg.max_redraws; ++attempt) {
        const Rng master = Rng(cfg.seed).substream(0xD47A * 131 + attempt);
        Rng ad_rng = master.substream(1);

        const std::vector<ObjectiveKind> kinds = detail::assign_kinds(cfg, ad_rng);
        std::vector<AdProfile> ads(cfg.n_ads);
        std::vector<detail::AdLatents> latents(cfg.n_ads);
        std::vector<std::vector<AdId>> keyword_pool(cfg.n_keywords);

        for (int i = 0; i < cfg.n_ads; ++i) {
            AdProfile& ad = ads[i];
            detail::AdLatents& lat = latents[i];
            ad.id = static_cast<AdId>(i);
            ad.kind = kinds[i];

            const double q = ad_rng.normal();
            lat.ctr_base = detail::clamp(sigmoid(-3.0 + 0.35 * q + 0.2 * ad_rng.normal()), 0.002, 0.6);
            lat.cvr_base = detail::clamp(sigmoid(-3.2 + 0.5 * q + 0.3 * ad_rng.normal()), 0.001, 0.6);
            lat.wcvr_base = detail::clamp(sigmoid(0.2 + 0.5 * q + 0.5 * ad_rng.normal()), 0.02, 0.95);
            lat.ip_base = std::exp(3.3 + 0.4 * ad_rng.normal());

            // Bids anchor to the ad's value per click with a mild per-ad
            // miscalibration factor.
            const double value_per_click = lat.cvr_base * lat.ip_base;
            ad.base_bid = 0.72 * value_per_click * ad_rng.lognormal(0.0, 0.2);
            ad.tk = 0.1;           // refined after the warm-up replay
            ad.self_bid = ad.kind == ObjectiveKind::SelfBidding ? ad.base_bid : 0.0;
        }

        // Keywords model product categories: each ad's primary keyword is its
        // value tier, so an auction gathers ads of comparable stakes, plus one
        // random keyword for cross-tier traffic. Keeping rivals close in
        // value keeps the second price close to the first.
        {
            std::vector<int> order(cfg.n_ads);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                const double va = latents[a].ctr_base * latents[a].cvr_base * latents[a].ip_base;
                const double vb = latents[b].ctr_base * latents[b].cvr_base * latents[b].ip_base;
                return va < vb || (va == vb && a < b);
            });
            for (int rank = 0; rank < cfg.n_ads; ++rank) {
                const int i = order[rank];
                const int tier = static_cast<int>(
                    static_cast<std::int64_t>(rank) * cfg.n_keywords / cfg.n_ads);
                const int random_kw = static_cast<int>(ad_rng.below(cfg.n_keywords));
                for (int kw : {tier, random_kw}) {
                    if (std::find(latents[i].affinities.begin(), latents[i].affinities.end(), kw) !=
                        latents[i].affinities.end())
                        continue;
                    latents[i].affinities.push_back(kw);
                    keyword_pool[kw].push_back(ads[i].id);
                    // Manual keyword bids are sticky: noisier than the live
                    // policies and tilted high, the way hand-tuned bids
                    // drift once the market moves under them.
                    ads[i].keyword_bids[kw] = ads[i].base_bid * ad_rng.lognormal(0.10, 0.35);
                }
            }
        }

        auto draw_auctions = [&](Rng rng) {
            std::vector<AuctionEvent> auctions(cfg.n_auctions);
            std::vector<AdId> picked;
            for (int j = 0; j < cfg.n_auctions; ++j) {
                AuctionEvent& ev = auctions[j];
                ev.id = static_cast<std::uint64_t>(j);
                ev.timestamp = static_cast<Timestamp>(j);
                ev.keyword = static_cast<int>(rng.below(cfg.n_keywords));

                const int span = cfg.max_participants - cfg.min_participants + 1;
                const int m = cfg.min_participants + static_cast<int>(rng.below(span));
                picked.clear();

                // Participants come from the keyword's affinity pool; the
                // whole population only backfills when the pool is too thin.
                const std::vector<AdId>& pool = keyword_pool[ev.keyword];
                if (!pool.empty())
                    for (int t = 0; t < 4 * m && static_cast<int>(picked.size()) < m; ++t) {
                        const AdId c = pool[rng.below(pool.size())];
                        if (std::find(picked.begin(), picked.end(), c) == picked.end())
                            picked.push_back(c);
                    }
                int guard = 0;
                while (static_cast<int>(picked.size()) < m && guard++ < 1000) {
                    const AdId c = static_cast<AdId>(rng.below(cfg.n_ads));
                    if (std::find(picked.begin(), picked.end(), c) == picked.end())
                        picked.push_back(c);
                }

                ev.participants.reserve(picked.size());
                // Low keyword tiers move commodity items whose GMV is much
                // alike across rivals; high tiers carry big-ticket queries
                // where per-impression GMV swings widely. A bid correction
                // that tracks the swing matters most where it is wide, and
                // the auction summary exposes which regime an auction is in.
                const double tier_frac =
                    cfg.n_keywords > 1
                        ? static_cast<double>(ev.keyword) / (cfg.n_keywords - 1)
                        : 0.0;
                const double ip_sigma = 0.15 + 0.55 * tier_frac;

                for (AdId id : picked) {
                    const detail::AdLatents& lat = latents[id];
                    // A common shock z correlates CTR, CVR and WCVR within
                    // one impression; the -sigma^2/2 terms keep the means at
                    // the ad's base rates.
                    const double z = rng.normal();
                    FeatureVector f;
                    f.ctr = detail::clamp(
                        lat.ctr_base * std::exp(0.20 * z + 0.15 * rng.normal() - 0.03125), 1e-5, 0.95);
                    f.cvr = detail::clamp(
                        lat.cvr_base * std::exp(0.35 * z + 0.25 * rng.normal() - 0.0925), 1e-5, 0.95);
                    f.wcvr = detail::clamp(
                        lat.wcvr_base * std::exp(0.20 * z + 0.20 * rng.normal() - 0.04), 1e-4, 0.95);
                    f.item_price =
                        lat.ip_base * std::exp(ip_sigma * rng.normal() - 0.5 * ip_sigma * ip_sigma);
                    f.tk = 0.1;  // refined below
                    ev.participants.push_back({id, f});
                }
            }
            return auctions;
        };

        LogPair logs;
        logs.train.ads = ads;
        logs.train.auctions = draw_auctions(master.substream(2));
        logs.train.build_index();
        logs.test.ads = ads;
        logs.test.auctions = draw_auctions(master.substream(3));
        logs.test.build_index();

        // Warm-up replay with base bids and unlimited budgets yields the
        // historical aggregates: tk = cost/GMV, hist_ppc, hist_cost/gmv.
        const EpisodeResult warmup = replay_episode(logs.train, BaseBidPolicy{}, cfg.reserve_price);

        std::vector<double> win_tk;
        std::vector<double> win_cost;
        for (const AdAccumulators& a : warmup.per_ad)
            if (a.cost > 0.0 && a.gmv > 0.0) {
                win_tk.push_back(a.cost / a.gmv);
                win_cost.push_back(a.cost);
            }
        auto median = [](std::vector<double> v, double fallback) {
            if (v.empty()) return fallback;
            std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
            return v[v.size() / 2];
        };
        const double med_tk = median(win_tk, 0.1);
        const double med_cost = median(win_cost, 1.0);

        // Mean realized CVR per ad over the training stream, the OCPC
        // reference point.
        std::vector<double> cvr_sum(cfg.n_ads, 0.0);
        std::vector<int> cvr_n(cfg.n_ads, 0);
        for (const AuctionEvent& ev : logs.train.auctions)
            for (const Participant& p : ev.participants) {
                cvr_sum[p.ad] += p.features.cvr;
                ++cvr_n[p.ad];
            }

        Rng budget_rng = master.substream(4);
        std::vector<double> hist_ppc(cfg.n_ads, 0.0);
        for (int i = 0; i < cfg.n_ads; ++i) {
            AdProfile& ad = logs.train.ads[i];
            const AdAccumulators& w = warmup.per_ad[i];

            ad.tk = w.gmv > 0.0 && w.cost > 0.0 ? detail::clamp(w.cost / w.gmv, 1e-4, 10.0) : med_tk;
            hist_ppc[i] = w.clicks > 0.0 ? w.cost / w.clicks : 0.0;
            ad.hist_cvr = cvr_n[i] > 0 ? cvr_sum[i] / cvr_n[i] : latents[i].cvr_base;

            const double spend = w.cost > 0.0 ? w.cost : med_cost;
            ad.budget = spend * budget_rng.uniform(2.0, 6.0);
            ad.ppc_cap = is_smart(ad.kind) && hist_ppc[i] > 0.0 && budget_rng.uniform01() < 0.5
                             ? hist_ppc[i] * budget_rng.uniform(1.5, 3.0)
                             : kInfinity;
            // Self-bidders are uncontrolled but rational: they bid around
            // their value per click scaled by their take rate, and together
            // they hold the price floor a colluding smart population would
            // otherwise push through.
            if (ad.kind == ObjectiveKind::SelfBidding)
                ad.self_bid = std::max(latents[i].cvr_base * latents[i].ip_base * ad.tk *
                                           budget_rng.lognormal(0.50, 0.15),
                                       1e-6);
        }
        for (EpisodeLog* log : {&logs.train, &logs.test})
            for (AuctionEvent& ev : log->auctions)
                for (Participant& p : ev.participants) {
                    const AdAccumulators& w = warmup.per_ad[p.ad];
                    p.features.hist_gmv = w.gmv;
                    p.features.hist_cost = w.cost;
                    p.features.hist_ppc = hist_ppc[p.ad];
                    p.features.tk = logs.train.ads[p.ad].tk;
                }

        // Floors default to what the benchmark actually achieves per ad.
        const OcpcPolicy bench(cfg.ocpc_range);
        const EpisodeResult train_bench = replay_episode(logs.train, bench, cfg.reserve_price);
        for (int i = 0; i < cfg.n_ads; ++i)
            logs.train.ads[i].floor =
                is_smart(logs.train.ads[i].kind) ? train_bench.per_ad[i].objective : 0.0;
        logs.test.ads = logs.train.ads;

        // Feasibility guarantee: every objective group must win auctions
        // (positive value and cost) under the benchmark in both logs, or
        // the relative scores are undefined. Redraw on failure.
        auto feasible = [&](const EpisodeLog& log) {
            const Accumulators acc =
                accumulate(replay_episode(log, bench, cfg.reserve_price), log);
            for (int k = 0; k < 4; ++k)
                if (!(acc.group[k].value > 0.0 && acc.group[k].cost > 0.0)) return false;
            return acc.group[0].gmv > 0.0;
        };
        if (feasible(logs.train) && feasible(logs.test)) return logs;
    }
    throw DataError("log generation failed: no feasible draw after " +
                    std::to_string(cfg.max_redraws) + " attempts (objective groups too sparse)");
}

}  // namespace macg
