#pragma once

#include <algorithm>
#include <array>
#include <string>

#include "macg/domain.hpp"
#include "macg/mechanism.hpp"

namespace macg {

struct GroupAccumulators {
    double clicks = 0.0;  // sum e * CTR
    double cost = 0.0;    // sum e * w
    double gmv = 0.0;
    double cart = 0.0;
    double value = 0.0;  // the group's own objective quantity

    bool operator==(const GroupAccumulators&) const = default;
};

// Accumulating function over winning impressions. Index 0 aggregates every
// ad including self-bidding ones (the global group); 1..3 aggregate the
// click/GMV/cart objective groups.
struct Accumulators {
    std::array<GroupAccumulators, 4> group{};

    bool operator==(const Accumulators&) const = default;
};

inline Accumulators accumulate(const EpisodeResult& result, const EpisodeLog& log) {
    if (result.per_ad.size() != log.ads.size())
        throw DataError("episode result does not match log: " + std::to_string(result.per_ad.size()) +
                        " ad accumulators for " + std::to_string(log.ads.size()) + " ads");
    Accumulators acc;
    for (std::size_t s = 0; s < log.ads.size(); ++s) {
        const AdAccumulators& a = result.per_ad[s];
        GroupAccumulators& all = acc.group[0];
        all.clicks += a.clicks;
        all.cost += a.cost;
        all.gmv += a.gmv;
        all.cart += a.cart;
        all.value += a.gmv;  // the global objective is GMV
        const int k = objective_group(log.ads[s].kind);
        if (k == 0) continue;
        GroupAccumulators& g = acc.group[k];
        g.clicks += a.clicks;
        g.cost += a.cost;
        g.gmv += a.gmv;
        g.cart += a.cart;
        switch (k) {
            case 1: g.value += a.clicks; break;
            case 2: g.value += a.gmv; break;
            case 3: g.value += a.cart; break;
        }
    }
    return acc;
}

namespace detail {

inline void require_benchmark(bool ok, const std::string& what) {
    if (!ok) throw DataError("degenerate benchmark: " + what);
}

}  // namespace detail

// Click score: click-volume ratio minus pay-per-click ratio. A candidate
// that wins no click-objective auction has an undefined PPC ratio; it gets
// the configured penalty instead (and the caller may flag it).
inline double score_m1(const Accumulators& cand, const Accumulators& bench,
                       double zero_click_penalty = -1.0, bool* degenerate = nullptr) {
    const GroupAccumulators& c = cand.group[1];
    const GroupAccumulators& b = bench.group[1];
    detail::require_benchmark(b.clicks > 0.0, "benchmark click group has no clicks");
    detail::require_benchmark(b.cost > 0.0, "benchmark click group has zero cost");
    if (degenerate) *degenerate = false;
    if (c.clicks <= 0.0) {
        if (degenerate) *degenerate = true;
        return zero_click_penalty;
    }
    const double volume_ratio = c.clicks / b.clicks;
    const double ppc_ratio = (c.cost / c.clicks) / (b.cost / b.clicks);
    return volume_ratio - ppc_ratio;
}

// GMV score: value ratio minus cost ratio over the GMV objective group.
inline double score_m2(const Accumulators& cand, const Accumulators& bench) {
    const GroupAccumulators& c = cand.group[2];
    const GroupAccumulators& b = bench.group[2];
    detail::require_benchmark(b.value > 0.0, "benchmark gmv group has zero value");
    detail::require_benchmark(b.cost > 0.0, "benchmark gmv group has zero cost");
    return c.value / b.value - c.cost / b.cost;
}

// Cart score: value ratio minus cost ratio over the cart objective group.
inline double score_m3(const Accumulators& cand, const Accumulators& bench) {
    const GroupAccumulators& c = cand.group[3];
    const GroupAccumulators& b = bench.group[3];
    detail::require_benchmark(b.value > 0.0, "benchmark cart group has zero value");
    detail::require_benchmark(b.cost > 0.0, "benchmark cart group has zero cost");
    return c.value / b.value - c.cost / b.cost;
}

// Global score: GMV ratio minus one, minus the absolute deviation of the
// cost ratio from one. Moving platform revenue off the benchmark in either
// direction is penalized, so collusive underbidding cannot help.
inline double score_m0(const Accumulators& cand, const Accumulators& bench) {
    const GroupAccumulators& c = cand.group[0];
    const GroupAccumulators& b = bench.group[0];
    detail::require_benchmark(b.gmv > 0.0, "benchmark global gmv is zero");
    detail::require_benchmark(b.cost > 0.0, "benchmark global cost is zero");
    return c.gmv / b.gmv - 1.0 - std::abs(c.cost / b.cost - 1.0);
}

// m_ad focuses each iteration on the worst objective; m_all folds it into
// the global score with weight lambda_m.
inline std::pair<double, double> combine(double m0, double m1, double m2, double m3,
                                         double lambda_m) {
    const double m_ad = std::min(m1, std::min(m2, m3));
    return {m_ad, m0 + lambda_m * m_ad};
}

struct ConstraintDiagnostics {
    double rpm_ratio = 0.0;  // total cost / total GMV across all ads
    bool rpm_satisfied = true;
    double floor_satisfaction = 1.0;  // fraction of smart ads at or above F_i

    bool operator==(const ConstraintDiagnostics&) const = default;
};

// Post-hoc constraint report. Reported, never enforced: the cost band inside
// the global score is what training actually reacts to.
inline ConstraintDiagnostics constraint_report(const EpisodeResult& result, const EpisodeLog& log,
                                               double eta) {
    if (result.per_ad.size() != log.ads.size())
        throw DataError("episode result does not match log");
    ConstraintDiagnostics diag;
    double cost = 0.0, gmv = 0.0;
    std::size_t smart = 0, satisfied = 0;
    for (std::size_t s = 0; s < log.ads.size(); ++s) {
        cost += result.per_ad[s].cost;
        gmv += result.per_ad[s].gmv;
        if (!is_smart(log.ads[s].kind)) continue;
        ++smart;
        if (result.per_ad[s].objective >= log.ads[s].floor) ++satisfied;
    }
    diag.rpm_ratio = gmv > 0.0 ? cost / gmv : 0.0;
    diag.rpm_satisfied = cost >= eta * gmv;
    diag.floor_satisfaction =
        smart == 0 ? 1.0 : static_cast<double>(satisfied) / static_cast<double>(smart);
    return diag;
}

struct ScoringConfig {
    double lambda_m = 1.2;
    double eta = 0.05;
    double zero_click_penalty = -1.0;

    bool operator==(const ScoringConfig&) const = default;
};

struct ScoreReport {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0;
    double m_ad = 0.0, m_all = 0.0;
    double lambda_m = 1.2;
    bool m1_degenerate = false;  // candidate won no click-objective auction
    Accumulators accumulators;
    ConstraintDiagnostics constraints;
};

inline ScoreReport score_episode(const EpisodeResult& cand_result, const EpisodeLog& log,
                                 const Accumulators& bench, const ScoringConfig& cfg = {}) {
    ScoreReport r;
    r.lambda_m = cfg.lambda_m;
    r.accumulators = accumulate(cand_result, log);
    r.m0 = score_m0(r.accumulators, bench);
    r.m1 = score_m1(r.accumulators, bench, cfg.zero_click_penalty, &r.m1_degenerate);
    r.m2 = score_m2(r.accumulators, bench);
    r.m3 = score_m3(r.accumulators, bench);
    std::tie(r.m_ad, r.m_all) = combine(r.m0, r.m1, r.m2, r.m3, cfg.lambda_m);
    r.constraints = constraint_report(cand_result, log, cfg.eta);
    return r;
}

}  // namespace macg
