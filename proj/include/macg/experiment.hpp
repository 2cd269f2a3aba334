#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "macg/datagen.hpp"
#include "macg/es.hpp"
#include "macg/log_io.hpp"
#include "macg/reports.hpp"

namespace macg {

// One config file drives every subcommand; print-default-config emits the
// full set of defaults so any run can be reproduced from a single artifact.
struct ExperimentConfig {
    std::string train_log = "train_log.jsonl";  // relative paths resolve against out_dir
    std::string test_log = "test_log.jsonl";
    std::string out_dir = "out";
    GenConfig gen;
    EsConfig es;
    MacgConfig macg;  // stats are computed from the training log, not the file
    double ocpc_range = 0.3;
    std::string baseline = "ocpc";  // benchmark policy scores are taken against
    bool per_iteration_checkpoints = true;

    std::filesystem::path resolve(const std::string& p) const {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : std::filesystem::path(out_dir) / path;
    }

    void validate() const {
        gen.validate();
        es.validate();
        macg.validate();
        if (!(ocpc_range > 0.0 && ocpc_range < 1.0))
            throw ConfigError("ocpc_range must be in (0,1)");
        if (baseline != "ocpc" && baseline != "mkb")
            throw ConfigError("baseline must be 'ocpc' or 'mkb', got '" + baseline + "'");
    }

    std::unique_ptr<BidPolicy> make_baseline() const {
        if (baseline == "mkb") return std::make_unique<MkbPolicy>();
        return std::make_unique<OcpcPolicy>(ocpc_range);
    }
};

inline void to_json(nlohmann::json& j, const EsConfig& cfg) {
    j = nlohmann::json{{"population", cfg.population},
                       {"seeds", cfg.seeds},
                       {"noise_std", cfg.noise_std},
                       {"max_iterations", cfg.max_iterations},
                       {"seed", cfg.seed},
                       {"workers", cfg.workers},
                       {"plateau_rel_tol", cfg.plateau_rel_tol},
                       {"plateau_window", cfg.plateau_window},
                       {"reserve_price", cfg.reserve_price},
                       {"lambda_m", cfg.scoring.lambda_m},
                       {"eta", cfg.scoring.eta},
                       {"zero_click_penalty", cfg.scoring.zero_click_penalty}};
}

inline void from_json(const nlohmann::json& j, EsConfig& cfg) {
    cfg.population = j.value("population", cfg.population);
    cfg.seeds = j.value("seeds", cfg.seeds);
    cfg.noise_std = j.value("noise_std", cfg.noise_std);
    cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.plateau_rel_tol = j.value("plateau_rel_tol", cfg.plateau_rel_tol);
    cfg.plateau_window = j.value("plateau_window", cfg.plateau_window);
    cfg.reserve_price = j.value("reserve_price", cfg.reserve_price);
    cfg.scoring.lambda_m = j.value("lambda_m", cfg.scoring.lambda_m);
    cfg.scoring.eta = j.value("eta", cfg.scoring.eta);
    cfg.scoring.zero_click_penalty = j.value("zero_click_penalty", cfg.scoring.zero_click_penalty);
}

inline void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
    j = nlohmann::json{
        {"paths",
         {{"train_log", cfg.train_log}, {"test_log", cfg.test_log}, {"out_dir", cfg.out_dir}}},
        {"gen", cfg.gen},
        {"es", cfg.es},
        {"macg",
         {{"range", cfg.macg.range},
          {"variant", to_string(cfg.macg.variant)},
          {"bid_mode", to_string(cfg.macg.bid_mode)},
          {"static_alloc", cfg.macg.static_alloc}}},
        {"ocpc_range", cfg.ocpc_range},
        {"baseline", cfg.baseline},
        {"per_iteration_checkpoints", cfg.per_iteration_checkpoints}};
}

inline void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        cfg.train_log = p.value("train_log", cfg.train_log);
        cfg.test_log = p.value("test_log", cfg.test_log);
        cfg.out_dir = p.value("out_dir", cfg.out_dir);
    }
    if (j.contains("gen")) j.at("gen").get_to(cfg.gen);
    if (j.contains("es")) j.at("es").get_to(cfg.es);
    if (j.contains("macg")) j.at("macg").get_to(cfg.macg);
    cfg.ocpc_range = j.value("ocpc_range", cfg.ocpc_range);
    cfg.baseline = j.value("baseline", cfg.baseline);
    cfg.per_iteration_checkpoints =
        j.value("per_iteration_checkpoints", cfg.per_iteration_checkpoints);
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": malformed config: " + e.what());
    }
    ExperimentConfig cfg;
    try {
        j.get_to(cfg);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": bad config field: " + e.what());
    }
    return cfg;
}

inline std::string default_config_json() {
    nlohmann::json j = ExperimentConfig{};
    return j.dump(2) + "\n";
}

struct GenSummary {
    std::filesystem::path train_path;
    std::filesystem::path test_path;
    std::size_t n_ads = 0;
    std::size_t n_click = 0, n_gmv = 0, n_cart = 0, n_self = 0;
    std::size_t n_train_auctions = 0, n_test_auctions = 0;
};

inline GenSummary run_gen(const ExperimentConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    const LogPair logs = generate(cfg.gen);

    GenSummary s;
    s.train_path = cfg.resolve(cfg.train_log);
    s.test_path = cfg.resolve(cfg.test_log);
    write_log(logs.train, s.train_path, &cfg.gen);
    write_log(logs.test, s.test_path, &cfg.gen);

    s.n_ads = logs.train.ads.size();
    for (const AdProfile& ad : logs.train.ads) switch (ad.kind) {
            case ObjectiveKind::Click: ++s.n_click; break;
            case ObjectiveKind::Gmv: ++s.n_gmv; break;
            case ObjectiveKind::Cart: ++s.n_cart; break;
            case ObjectiveKind::SelfBidding: ++s.n_self; break;
        }
    s.n_train_auctions = logs.train.auctions.size();
    s.n_test_auctions = logs.test.auctions.size();
    return s;
}

struct TrainSummary {
    TrainResult result;
    std::filesystem::path checkpoint_path;
    std::filesystem::path history_csv;
    std::filesystem::path history_jsonl;
};

inline TrainSummary run_train(const ExperimentConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    const EpisodeLog train_log = read_log(cfg.resolve(cfg.train_log));

    MacgConfig macg_cfg = cfg.macg;
    macg_cfg.stats = compute_feature_stats(train_log);

    const std::unique_ptr<BidPolicy> benchmark = cfg.make_baseline();
    HistoryWriter writer(cfg.out_dir, macg_cfg, cfg.es.seed, cfg.per_iteration_checkpoints);
    TrainSummary s;
    s.result = train(train_log, macg_cfg, cfg.es, std::ref(writer), benchmark.get());
    s.history_csv = std::filesystem::path(cfg.out_dir) / "history.csv";
    s.history_jsonl = std::filesystem::path(cfg.out_dir) / "history.jsonl";

    Checkpoint ckpt;
    ckpt.iteration = s.result.iterations_run;
    ckpt.params = s.result.best_params;
    ckpt.score = s.result.best_report;
    ckpt.macg = macg_cfg;
    ckpt.rng_seed = cfg.es.seed;
    s.checkpoint_path = std::filesystem::path(cfg.out_dir) / "checkpoint.json";
    save_checkpoint(ckpt, s.checkpoint_path);
    return s;
}

struct EvalSummary {
    std::vector<EvalRow> rows;
    std::filesystem::path table_path;
};

// Replays the test log under MKB, OCPC, the trained policy and any requested
// ablation variants, and scores every row against the configured benchmark.
inline EvalSummary run_eval(const ExperimentConfig& cfg, const std::filesystem::path& checkpoint,
                            const std::vector<MacgVariant>& extra_variants = {}) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    const EpisodeLog test_log = read_log(cfg.resolve(cfg.test_log));
    const Checkpoint ckpt = load_checkpoint(checkpoint);

    const std::unique_ptr<BidPolicy> bench_policy = cfg.make_baseline();
    const Accumulators bench =
        accumulate(replay_episode(test_log, *bench_policy, cfg.es.reserve_price), test_log);

    EvalSummary s;
    auto add_row = [&](const std::string& name, const BidPolicy& policy) {
        const EpisodeResult result = replay_episode(test_log, policy, cfg.es.reserve_price);
        s.rows.push_back({name, score_episode(result, test_log, bench, cfg.es.scoring)});
    };

    add_row("mkb", MkbPolicy{});
    add_row("ocpc", OcpcPolicy(cfg.ocpc_range));
    add_row("macg", MacgPolicy(ckpt.params, ckpt.macg));
    for (MacgVariant v : extra_variants) {
        MacgConfig variant_cfg = ckpt.macg;
        variant_cfg.variant = v;
        add_row("macg-" + to_string(v), MacgPolicy(ckpt.params, variant_cfg));
    }

    s.table_path = std::filesystem::path(cfg.out_dir) / "eval_table.csv";
    std::ofstream out(s.table_path);
    if (!out) throw DataError("cannot open '" + s.table_path.string() + "' for writing");
    out << eval_table_csv(s.rows);
    return s;
}

}  // namespace macg
