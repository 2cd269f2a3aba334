#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "macg/domain.hpp"
#include "macg/mechanism.hpp"
#include "macg/policies.hpp"
#include "macg/rng.hpp"
#include "macg/scoring.hpp"

namespace macg {

// Filtered multi-objective evolution strategy: Gaussian perturbation around
// W seed vectors, parallel black-box evaluation by episode replay, and a
// non-degradation filter that only admits candidates whose global and
// worst-objective scores both reach the best survivor of the previous
// iteration.
struct EsConfig {
    int population = 64;       // H, candidates per iteration
    int seeds = 8;             // W, survivors kept as perturbation centers
    double noise_std = 0.05;   // delta
    int max_iterations = 30;   // P
    std::uint64_t seed = 42;
    int workers = 1;
    ScoringConfig scoring;
    double plateau_rel_tol = 1e-3;  // stop once best m_all stalls...
    int plateau_window = 5;         // ...over this many consecutive iterations
    double reserve_price = 0.0;

    void validate() const {
        if (population < 1) throw ConfigError("population must be >= 1");
        if (seeds < 1 || seeds > population) throw ConfigError("seeds must satisfy 1 <= W <= H");
        if (!(noise_std > 0.0)) throw ConfigError("noise std must be > 0");
        if (max_iterations < 1) throw ConfigError("max iterations must be >= 1");
        if (workers < 1) throw ConfigError("workers must be >= 1");
        if (plateau_window < 1) throw ConfigError("plateau window must be >= 1");
    }
};

struct EvalOutcome {
    ScoreReport report;
    bool failed = false;
    std::string error;
};

struct IterationRecord {
    int iteration = 0;  // 1-based
    std::vector<EvalOutcome> outcomes;
    std::vector<int> selected;  // candidate indices chosen as seeds, rank order
    int carried_over = 0;       // previous seeds kept to fill a survivor shortfall
    double m0_star = 0.0;       // thresholds after this iteration
    double m_ad_star = 0.0;
    double iter_best_m_all = 0.0;
    double best_m_all = 0.0;  // best-ever, non-decreasing by construction
    ScoreReport iter_best;    // report of this iteration's top survivor (or best candidate)
};

struct TrainResult {
    PolicyParams best_params;
    ScoreReport best_report;
    std::vector<IterationRecord> history;
    bool converged = false;
    int iterations_run = 0;
};

// Substream ids: iteration 0 is the initial population, iteration p >= 1
// perturbs the seeds selected at iteration p. Candidate draws never depend
// on scheduling, so any worker count reproduces the same trajectory.
inline std::uint64_t candidate_stream(int iteration, int candidate) {
    return (static_cast<std::uint64_t>(iteration) << 32) | static_cast<std::uint64_t>(candidate);
}

inline std::vector<PolicyParams> init_population(const EsConfig& cfg) {
    cfg.validate();
    const Rng master(cfg.seed);
    std::vector<PolicyParams> pop(cfg.population);
    for (int h = 0; h < cfg.population; ++h) {
        Rng stream = master.substream(candidate_stream(0, h));
        pop[h].resize(kPolicyParamCount);
        for (double& v : pop[h]) v = stream.normal();
    }
    return pop;
}

// Each seed spawns floor(H/W) children theta = seed + delta * eps; the
// remainder when W does not divide H is dealt round-robin from seed 0.
// Accepts delta = 0 (children identical to seeds), unlike the training
// config contract.
inline std::vector<PolicyParams> perturb(const std::vector<PolicyParams>& seeds,
                                         const EsConfig& cfg, int iteration) {
    if (cfg.population < 1) throw ConfigError("population must be >= 1");
    if (!(cfg.noise_std >= 0.0)) throw ConfigError("noise std must be >= 0");
    if (seeds.empty()) throw ConfigError("perturb requires at least one seed");
    const int w = static_cast<int>(seeds.size());
    const int base = cfg.population / w;
    const int extra = cfg.population % w;
    const Rng master(cfg.seed);
    std::vector<PolicyParams> pop;
    pop.reserve(cfg.population);
    int h = 0;
    for (int s = 0; s < w; ++s) {
        const int children = base + (s < extra ? 1 : 0);
        for (int c = 0; c < children; ++c, ++h) {
            Rng stream = master.substream(candidate_stream(iteration, h));
            PolicyParams child = seeds[s];
            for (double& v : child) v += cfg.noise_std * stream.normal();
            pop.push_back(std::move(child));
        }
    }
    return pop;
}

// Evaluate every candidate on the training log against the precomputed
// benchmark accumulators. Candidates are independent; a failing one is
// recorded with score -inf instead of aborting the iteration.
inline std::vector<EvalOutcome> evaluate(const std::vector<PolicyParams>& candidates,
                                         const EpisodeLog& train_log, const Accumulators& bench,
                                         const MacgConfig& macg_cfg, const EsConfig& cfg) {
    std::vector<EvalOutcome> outcomes(candidates.size());
    auto eval_one = [&](std::size_t idx) {
        EvalOutcome& out = outcomes[idx];
        try {
            MacgPolicy policy(candidates[idx], macg_cfg);
            const EpisodeResult result = replay_episode(train_log, policy, cfg.reserve_price);
            out.report = score_episode(result, train_log, bench, cfg.scoring);
        } catch (const std::exception& e) {
            out.failed = true;
            out.error = e.what();
            out.report.m_all = -std::numeric_limits<double>::infinity();
            out.report.m_ad = -std::numeric_limits<double>::infinity();
            out.report.m0 = -std::numeric_limits<double>::infinity();
        }
    };

    const int workers = std::min<int>(cfg.workers, static_cast<int>(candidates.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < candidates.size(); ++i) eval_one(i);
        return outcomes;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < candidates.size(); i = next.fetch_add(1))
                eval_one(i);
        });
    for (std::thread& t : pool) t.join();
    return outcomes;
}

struct Selection {
    std::vector<int> candidate_indices;  // survivors by m_all rank, best first
    int carry_from_previous = 0;         // previous seeds appended to reach W
    double m0_star = 0.0;
    double m_ad_star = 0.0;
    bool thresholds_updated = false;
};

// Keep candidates that do not degrade either the global score or the worst
// objective score relative to the previous iteration's top survivor, rank
// them by m_all, and take the top W. The first iteration applies no filter.
inline Selection select(const std::vector<EvalOutcome>& outcomes, double m0_star,
                        double m_ad_star, const EsConfig& cfg, bool first_iteration) {
    if (outcomes.empty()) throw ConfigError("select requires at least one evaluated candidate");
    Selection sel;
    sel.m0_star = m0_star;
    sel.m_ad_star = m_ad_star;

    std::vector<int> survivors;
    survivors.reserve(outcomes.size());
    for (int i = 0; i < static_cast<int>(outcomes.size()); ++i) {
        const EvalOutcome& o = outcomes[i];
        if (o.failed) continue;
        if (!first_iteration && !(o.report.m0 >= m0_star && o.report.m_ad >= m_ad_star)) continue;
        survivors.push_back(i);
    }
    std::stable_sort(survivors.begin(), survivors.end(), [&](int a, int b) {
        return outcomes[a].report.m_all > outcomes[b].report.m_all;
    });
    if (static_cast<int>(survivors.size()) > cfg.seeds) survivors.resize(cfg.seeds);
    sel.candidate_indices = survivors;
    sel.carry_from_previous = cfg.seeds - static_cast<int>(survivors.size());
    if (!survivors.empty()) {
        sel.m0_star = outcomes[survivors.front()].report.m0;
        sel.m_ad_star = outcomes[survivors.front()].report.m_ad;
        sel.thresholds_updated = true;
    }
    return sel;
}

using IterationCallback = std::function<void(const IterationRecord&, const PolicyParams& best)>;

// Full training loop: init -> evaluate -> select -> perturb, until the
// iteration budget is spent or the best m_all plateaus. Returns the best
// candidate ever evaluated and the per-iteration history. Scores are taken
// against the given benchmark policy (the standard conversion-optimized
// bidder when none is supplied).
inline TrainResult train(const EpisodeLog& train_log, const MacgConfig& macg_cfg,
                         const EsConfig& cfg, const IterationCallback& on_iteration = {},
                         const BidPolicy* benchmark = nullptr) {
    cfg.validate();
    macg_cfg.validate();

    const OcpcPolicy default_bench;
    const BidPolicy& bench_policy = benchmark ? *benchmark : default_bench;
    const EpisodeResult bench_result = replay_episode(train_log, bench_policy, cfg.reserve_price);
    const Accumulators bench = accumulate(bench_result, train_log);
    // Fails fast on a log where some objective group never wins under the
    // benchmark; scores would be undefined for every candidate.
    score_episode(bench_result, train_log, bench, cfg.scoring);

    TrainResult result;
    result.best_report.m_all = -std::numeric_limits<double>::infinity();

    std::vector<PolicyParams> population = init_population(cfg);
    std::vector<PolicyParams> seeds;
    double m0_star = 0.0, m_ad_star = 0.0;
    double best_m_all = -std::numeric_limits<double>::infinity();

    for (int p = 1; p <= cfg.max_iterations; ++p) {
        IterationRecord rec;
        rec.iteration = p;
        rec.outcomes = evaluate(population, train_log, bench, macg_cfg, cfg);

        const Selection sel = select(rec.outcomes, m0_star, m_ad_star, cfg, p == 1);
        m0_star = sel.m0_star;
        m_ad_star = sel.m_ad_star;
        rec.selected = sel.candidate_indices;
        rec.carried_over = sel.carry_from_previous;
        rec.m0_star = m0_star;
        rec.m_ad_star = m_ad_star;

        int iter_best = -1;
        for (int i = 0; i < static_cast<int>(rec.outcomes.size()); ++i) {
            if (rec.outcomes[i].failed) continue;
            if (iter_best < 0 || rec.outcomes[i].report.m_all > rec.outcomes[iter_best].report.m_all)
                iter_best = i;
        }
        if (iter_best < 0) throw DataError("every candidate failed evaluation");
        rec.iter_best_m_all = rec.outcomes[iter_best].report.m_all;
        const int rec_best =
            sel.candidate_indices.empty() ? iter_best : sel.candidate_indices.front();
        rec.iter_best = rec.outcomes[rec_best].report;

        if (rec.outcomes[iter_best].report.m_all > best_m_all) {
            best_m_all = rec.outcomes[iter_best].report.m_all;
            result.best_params = population[iter_best];
            result.best_report = rec.outcomes[iter_best].report;
        }
        rec.best_m_all = best_m_all;

        // Assemble the next seed set: survivors first, then previous seeds.
        std::vector<PolicyParams> next_seeds;
        next_seeds.reserve(cfg.seeds);
        for (int idx : sel.candidate_indices) next_seeds.push_back(population[idx]);
        for (int c = 0; c < sel.carry_from_previous && c < static_cast<int>(seeds.size()); ++c)
            next_seeds.push_back(seeds[c]);
        if (next_seeds.empty()) next_seeds.push_back(population[iter_best]);
        seeds = std::move(next_seeds);

        if (on_iteration) on_iteration(rec, result.best_params);
        result.history.push_back(std::move(rec));
        result.iterations_run = p;

        // Plateau: relative best-m_all improvement over the trailing window.
        if (p > cfg.plateau_window) {
            const double prev = result.history[p - 1 - cfg.plateau_window].best_m_all;
            const double cur = result.history[p - 1].best_m_all;
            const double rel = (cur - prev) / std::max(std::abs(prev), 1e-12);
            if (std::isfinite(prev) && rel < cfg.plateau_rel_tol) {
                result.converged = true;
                break;
            }
        }
        if (p < cfg.max_iterations) population = perturb(seeds, cfg, p);
    }
    return result;
}

}  // namespace macg
