#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "macg/es.hpp"
#include "macg/policies.hpp"
#include "macg/scoring.hpp"

namespace macg {

inline constexpr int kCheckpointSchemaVersion = 1;
inline constexpr const char* kCheckpointSchemaName = "macg-checkpoint";

// Fixed shortest-round-trip formatting so identical runs produce
// byte-identical report files regardless of worker count.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string to_string(MacgVariant v) {
    switch (v) {
        case MacgVariant::Full: return "full";
        case MacgVariant::NoShared: return "no-shared";
        case MacgVariant::NoAgents: return "no-agents";
        case MacgVariant::StaticAlloc: return "static-alloc";
    }
    return "full";
}

inline MacgVariant variant_from_string(const std::string& s) {
    if (s == "full") return MacgVariant::Full;
    if (s == "no-shared") return MacgVariant::NoShared;
    if (s == "no-agents") return MacgVariant::NoAgents;
    if (s == "static-alloc") return MacgVariant::StaticAlloc;
    throw ConfigError("unknown variant '" + s + "' (use full|no-shared|no-agents|static-alloc)");
}

inline std::string to_string(BidMode m) {
    return m == BidMode::Literal ? "literal" : "calibrated";
}

inline BidMode bid_mode_from_string(const std::string& s) {
    if (s == "literal") return BidMode::Literal;
    if (s == "calibrated") return BidMode::Calibrated;
    throw ConfigError("unknown bid mode '" + s + "' (use calibrated|literal)");
}

inline void to_json(nlohmann::json& j, const GroupAccumulators& g) {
    j = nlohmann::json{{"clicks", g.clicks},
                       {"cost", g.cost},
                       {"gmv", g.gmv},
                       {"cart", g.cart},
                       {"value", g.value}};
}

inline void from_json(const nlohmann::json& j, GroupAccumulators& g) {
    j.at("clicks").get_to(g.clicks);
    j.at("cost").get_to(g.cost);
    j.at("gmv").get_to(g.gmv);
    j.at("cart").get_to(g.cart);
    j.at("value").get_to(g.value);
}

inline void to_json(nlohmann::json& j, const ScoreReport& r) {
    j = nlohmann::json{{"m0", r.m0},
                       {"m1", r.m1},
                       {"m2", r.m2},
                       {"m3", r.m3},
                       {"m_ad", r.m_ad},
                       {"m_all", r.m_all},
                       {"lambda_m", r.lambda_m},
                       {"m1_degenerate", r.m1_degenerate},
                       {"groups", r.accumulators.group},
                       {"rpm_ratio", r.constraints.rpm_ratio},
                       {"rpm_satisfied", r.constraints.rpm_satisfied},
                       {"floor_satisfaction", r.constraints.floor_satisfaction}};
}

inline void from_json(const nlohmann::json& j, ScoreReport& r) {
    j.at("m0").get_to(r.m0);
    j.at("m1").get_to(r.m1);
    j.at("m2").get_to(r.m2);
    j.at("m3").get_to(r.m3);
    j.at("m_ad").get_to(r.m_ad);
    j.at("m_all").get_to(r.m_all);
    j.at("lambda_m").get_to(r.lambda_m);
    j.at("m1_degenerate").get_to(r.m1_degenerate);
    j.at("groups").get_to(r.accumulators.group);
    j.at("rpm_ratio").get_to(r.constraints.rpm_ratio);
    j.at("rpm_satisfied").get_to(r.constraints.rpm_satisfied);
    j.at("floor_satisfaction").get_to(r.constraints.floor_satisfaction);
}

inline void to_json(nlohmann::json& j, const FeatureStats& s) {
    j = nlohmann::json{{"mean", s.mean}, {"std", s.std}};
}

inline void from_json(const nlohmann::json& j, FeatureStats& s) {
    j.at("mean").get_to(s.mean);
    j.at("std").get_to(s.std);
}

inline void to_json(nlohmann::json& j, const MacgConfig& c) {
    j = nlohmann::json{{"range", c.range},
                       {"variant", to_string(c.variant)},
                       {"bid_mode", to_string(c.bid_mode)},
                       {"static_alloc", c.static_alloc},
                       {"stats", c.stats}};
}

inline void from_json(const nlohmann::json& j, MacgConfig& c) {
    c.range = j.value("range", c.range);
    c.variant = variant_from_string(j.value("variant", to_string(c.variant)));
    c.bid_mode = bid_mode_from_string(j.value("bid_mode", to_string(c.bid_mode)));
    c.static_alloc = j.value("static_alloc", c.static_alloc);
    if (j.contains("stats")) j.at("stats").get_to(c.stats);
}

struct Checkpoint {
    int iteration = 0;
    PolicyParams params;
    ScoreReport score;
    MacgConfig macg;
    std::uint64_t rng_seed = 0;

    // Stateless substreams make (seed, iteration) the complete RNG state.
};

inline void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    nlohmann::json j{{"schema", kCheckpointSchemaName},
                     {"version", kCheckpointSchemaVersion},
                     {"iteration", ckpt.iteration},
                     {"params", ckpt.params},
                     {"score", ckpt.score},
                     {"macg", ckpt.macg},
                     {"rng", {{"seed", ckpt.rng_seed}, {"iteration", ckpt.iteration}}}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": malformed checkpoint: " + e.what());
    }
    if (j.value("schema", "") != kCheckpointSchemaName)
        throw DataError(path.string() + ": not a checkpoint file");
    if (j.value("version", -1) != kCheckpointSchemaVersion)
        throw DataError(path.string() + ": unsupported checkpoint version");
    Checkpoint ckpt;
    try {
        ckpt.iteration = j.at("iteration").get<int>();
        j.at("params").get_to(ckpt.params);
        j.at("score").get_to(ckpt.score);
        j.at("macg").get_to(ckpt.macg);
        ckpt.rng_seed = j.at("rng").at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": bad checkpoint: " + e.what());
    }
    if (ckpt.params.size() != static_cast<std::size_t>(kPolicyParamCount))
        throw DataError(path.string() + ": checkpoint parameter vector has length " +
                        std::to_string(ckpt.params.size()) + ", expected " +
                        std::to_string(kPolicyParamCount));
    return ckpt;
}

inline constexpr const char* kHistoryCsvHeader =
    "iteration,m0,m1,m2,m3,m_ad,m_all,best_m_all,m0_star,m_ad_star,survivors,carried_over,"
    "rpm_ratio,floor_satisfaction\n";

inline std::string history_csv_row(const IterationRecord& rec) {
    const ScoreReport& r = rec.iter_best;
    std::string row = std::to_string(rec.iteration);
    for (double v : {r.m0, r.m1, r.m2, r.m3, r.m_ad, r.m_all, rec.best_m_all, rec.m0_star,
                     rec.m_ad_star})
        row += "," + format_double(v);
    row += "," + std::to_string(rec.selected.size());
    row += "," + std::to_string(rec.carried_over);
    row += "," + format_double(r.constraints.rpm_ratio);
    row += "," + format_double(r.constraints.floor_satisfaction);
    row += "\n";
    return row;
}

inline std::string history_jsonl_row(const IterationRecord& rec) {
    nlohmann::json j{{"iteration", rec.iteration},
                     {"best", rec.iter_best},
                     {"best_m_all", rec.best_m_all},
                     {"iter_best_m_all", rec.iter_best_m_all},
                     {"m0_star", rec.m0_star},
                     {"m_ad_star", rec.m_ad_star},
                     {"selected", rec.selected},
                     {"carried_over", rec.carried_over}};
    return j.dump() + "\n";
}

// Streams per-iteration history rows to history.csv / history.jsonl and a
// checkpoint of the best-so-far candidate to checkpoint_NNNN.json.
class HistoryWriter {
public:
    HistoryWriter(const std::filesystem::path& out_dir, MacgConfig macg_cfg,
                  std::uint64_t rng_seed, bool per_iteration_checkpoints = true)
        : out_dir_(out_dir),
          macg_cfg_(std::move(macg_cfg)),
          rng_seed_(rng_seed),
          per_iteration_checkpoints_(per_iteration_checkpoints),
          csv_(out_dir / "history.csv"),
          jsonl_(out_dir / "history.jsonl") {
        if (!csv_ || !jsonl_) throw DataError("cannot open history files in '" + out_dir.string() + "'");
        csv_ << kHistoryCsvHeader;
    }

    void operator()(const IterationRecord& rec, const PolicyParams& best_params) {
        csv_ << history_csv_row(rec);
        csv_.flush();
        jsonl_ << history_jsonl_row(rec);
        jsonl_.flush();
        if (per_iteration_checkpoints_) {
            char name[32];
            std::snprintf(name, sizeof(name), "checkpoint_%04d.json", rec.iteration);
            Checkpoint ckpt;
            ckpt.iteration = rec.iteration;
            ckpt.params = best_params;
            ckpt.score = rec.iter_best;
            ckpt.macg = macg_cfg_;
            ckpt.rng_seed = rng_seed_;
            save_checkpoint(ckpt, out_dir_ / name);
        }
    }

private:
    std::filesystem::path out_dir_;
    MacgConfig macg_cfg_;
    std::uint64_t rng_seed_;
    bool per_iteration_checkpoints_;
    std::ofstream csv_;
    std::ofstream jsonl_;
};

// One row of the evaluation table: raw scores plus the ratio-style
// percentage display (1 + score) * 100, under which the benchmark reads
// 100% on every column by construction.
struct EvalRow {
    std::string policy;
    ScoreReport score;
};

inline std::string eval_table_csv(const std::vector<EvalRow>& rows) {
    std::string out =
        "policy,m0,m1,m2,m3,m_ad,m_all,pct_m0,pct_m1,pct_m2,pct_m3,rpm_ratio,"
        "floor_satisfaction\n";
    for (const EvalRow& row : rows) {
        out += row.policy;
        const ScoreReport& r = row.score;
        for (double v : {r.m0, r.m1, r.m2, r.m3, r.m_ad, r.m_all}) out += "," + format_double(v);
        for (double v : {r.m0, r.m1, r.m2, r.m3}) out += "," + format_double((1.0 + v) * 100.0);
        out += "," + format_double(r.constraints.rpm_ratio);
        out += "," + format_double(r.constraints.floor_satisfaction);
        out += "\n";
    }
    return out;
}

}  // namespace macg
