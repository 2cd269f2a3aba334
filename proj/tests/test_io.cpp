#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "helpers.hpp"
#include "macg/experiment.hpp"

using namespace macg;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "macg-io-tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

LogPair sample_logs() {
    GenConfig cfg;
    cfg.n_ads = 30;
    cfg.n_auctions = 120;
    cfg.seed = 2024;
    return generate(cfg);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("episode logs round-trip bit-exactly") {
    const LogPair logs = sample_logs();
    const auto path = temp_file("roundtrip.jsonl");

    GenConfig echo_in;
    echo_in.n_ads = 30;
    echo_in.n_auctions = 120;
    echo_in.seed = 2024;
    write_log(logs.train, path, &echo_in);

    GenConfig echo_out;
    const EpisodeLog rt = read_log(path, &echo_out);
    CHECK(rt == logs.train);
    CHECK(echo_out.seed == 2024);
    CHECK(echo_out.n_ads == 30);

    // Infinite caps survive the trip (stored as null).
    bool saw_infinite_cap = false;
    for (const AdProfile& ad : rt.ads) saw_infinite_cap |= ad.ppc_cap == kInfinity;
    CHECK(saw_infinite_cap);
}

TEST_CASE("a log with zero auctions is valid on disk") {
    EpisodeLog log;
    log.ads = {test::make_ad(0, ObjectiveKind::Gmv)};
    log.build_index();
    const auto path = temp_file("empty_auctions.jsonl");
    write_log(log, path);
    const EpisodeLog rt = read_log(path);
    CHECK(rt.ads.size() == 1);
    CHECK(rt.auctions.empty());
}

TEST_CASE("truncated files fail with the offending position") {
    const LogPair logs = sample_logs();
    const auto path = temp_file("truncated.jsonl");
    write_log(logs.train, path);

    // Cut the file mid-way through its last line.
    std::string text = slurp(path);
    text.resize(text.size() * 3 / 4);
    std::ofstream(path) << text;

    try {
        read_log(path);
        FAIL("expected a parse error");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find("truncated.jsonl:") != std::string::npos);
    }
}

TEST_CASE("header count mismatches are reported as truncation") {
    EpisodeLog log;
    log.ads = {test::make_ad(0, ObjectiveKind::Gmv)};
    log.build_index();
    const auto path = temp_file("missing_records.jsonl");
    write_log(log, path);

    // Drop the ad record but keep the header promising one.
    std::string text = slurp(path);
    text = text.substr(0, text.find('\n') + 1);
    std::ofstream(path) << text;

    try {
        read_log(path);
        FAIL("expected a truncation error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }
}

TEST_CASE("schema and version mismatches are rejected") {
    const auto path = temp_file("bad_header.jsonl");

    SUBCASE("wrong schema") {
        std::ofstream(path) << R"({"schema":"something-else","version":1})" << "\n";
        CHECK_THROWS_AS(read_log(path), DataError);
    }
    SUBCASE("wrong version") {
        std::ofstream(path) << R"({"schema":"macg-log","version":99,"n_ads":0,"n_auctions":0})"
                            << "\n";
        CHECK_THROWS_AS(read_log(path), DataError);
    }
    SUBCASE("junk line inside the body names its line number") {
        const LogPair logs = sample_logs();
        write_log(logs.train, path);
        std::ofstream out(path, std::ios::app);
        out << "{ not json\n";
        out.close();
        try {
            read_log(path);
            FAIL("expected a parse error");
        } catch (const DataError& e) {
            const std::string what = e.what();
            CHECK(what.find(":" + std::to_string(1 + logs.train.ads.size() +
                                                  logs.train.auctions.size() + 1)) !=
                  std::string::npos);
        }
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(read_log(temp_file("nope.jsonl")), DataError); }
}

TEST_CASE("checkpoints round-trip parameters, score and config") {
    Checkpoint ckpt;
    ckpt.iteration = 7;
    ckpt.params.resize(kPolicyParamCount);
    Rng rng(3);
    for (double& v : ckpt.params) v = rng.normal();
    ckpt.score.m0 = 0.25;
    ckpt.score.m_all = 0.5;
    ckpt.score.constraints.rpm_ratio = 0.07;
    ckpt.macg.range = 0.25;
    ckpt.macg.variant = MacgVariant::StaticAlloc;
    ckpt.macg.bid_mode = BidMode::Literal;
    ckpt.macg.static_alloc = 0.4;
    ckpt.macg.stats.mean[2] = 40.0;
    ckpt.macg.stats.std[2] = 12.0;
    ckpt.rng_seed = 99;

    const auto path = temp_file("checkpoint.json");
    save_checkpoint(ckpt, path);
    const Checkpoint rt = load_checkpoint(path);

    CHECK(rt.iteration == 7);
    CHECK(rt.params == ckpt.params);
    CHECK(rt.score.m0 == 0.25);
    CHECK(rt.score.m_all == 0.5);
    CHECK(rt.score.constraints.rpm_ratio == 0.07);
    CHECK(rt.macg == ckpt.macg);
    CHECK(rt.rng_seed == 99);
}

TEST_CASE("checkpoint loading rejects malformed files") {
    const auto path = temp_file("bad_ckpt.json");

    SUBCASE("not a checkpoint") {
        std::ofstream(path) << R"({"schema":"macg-log","version":1})";
        CHECK_THROWS_AS(load_checkpoint(path), DataError);
    }
    SUBCASE("wrong parameter count") {
        nlohmann::json j{{"schema", kCheckpointSchemaName},
                         {"version", kCheckpointSchemaVersion},
                         {"iteration", 1},
                         {"params", std::vector<double>(7, 0.0)},
                         {"score", ScoreReport{}},
                         {"macg", MacgConfig{}},
                         {"rng", {{"seed", 1}, {"iteration", 1}}}};
        std::ofstream(path) << j.dump();
        CHECK_THROWS_AS(load_checkpoint(path), DataError);
    }
}

TEST_CASE("default experiment config round-trips through json") {
    const std::string text = default_config_json();
    const nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    j.get_to(cfg);
    CHECK(cfg.gen.n_ads == GenConfig{}.n_ads);
    CHECK(cfg.es.population == EsConfig{}.population);
    CHECK(cfg.es.scoring.lambda_m == 1.2);
    CHECK(cfg.macg.range == 0.3);
    CHECK(cfg.macg.variant == MacgVariant::Full);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("experiment config errors are config errors") {
    CHECK_THROWS_AS(load_experiment_config(temp_file("missing.json")), ConfigError);

    const auto path = temp_file("bad_config.json");
    std::ofstream(path) << "{ nope";
    CHECK_THROWS_AS(load_experiment_config(path), ConfigError);

    std::ofstream(path, std::ios::trunc) << R"({"macg":{"variant":"bogus"}})";
    CHECK_THROWS_AS(load_experiment_config(path), ConfigError);
}

TEST_CASE("variant and bid-mode names round-trip") {
    for (MacgVariant v : {MacgVariant::Full, MacgVariant::NoShared, MacgVariant::NoAgents,
                          MacgVariant::StaticAlloc})
        CHECK(variant_from_string(to_string(v)) == v);
    for (BidMode m : {BidMode::Calibrated, BidMode::Literal})
        CHECK(bid_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(variant_from_string("nope"), ConfigError);
    CHECK_THROWS_AS(bid_mode_from_string("nope"), ConfigError);
}

TEST_CASE("history rows carry the fields the convergence checks need") {
    IterationRecord rec;
    rec.iteration = 3;
    rec.iter_best.m0 = 0.1;
    rec.iter_best.m_all = 0.4;
    rec.best_m_all = 0.45;
    rec.m0_star = 0.05;
    rec.m_ad_star = 0.2;
    rec.selected = {1, 2};
    rec.carried_over = 1;

    const std::string csv = history_csv_row(rec);
    CHECK(csv.find("3,") == 0);
    CHECK(csv.find("0.45000000000000001") != std::string::npos);  // %.17g of 0.45

    const nlohmann::json j = nlohmann::json::parse(history_jsonl_row(rec));
    CHECK(j["iteration"] == 3);
    CHECK(j["best_m_all"] == 0.45);
    CHECK(j["m0_star"] == 0.05);
    CHECK(j["selected"].size() == 2);
}

TEST_CASE("baseline selection is validated and serialized") {
    ExperimentConfig cfg;
    CHECK(cfg.baseline == "ocpc");
    cfg.baseline = "mkb";
    CHECK_NOTHROW(cfg.validate());
    cfg.baseline = "bogus";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    const nlohmann::json j = ExperimentConfig{};
    CHECK(j.at("baseline") == "ocpc");
}
