// macglab: generate synthetic GSP auction logs, train the cooperative
// bidding policy net with the filtered multi-objective evolution strategy,
// and evaluate policies against the OCPC benchmark.

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "macg/experiment.hpp"

namespace {

// Exit codes: 0 ok, 2 configuration error, 3 data error, 4 internal error.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> variant;
    std::optional<std::string> out_dir;
};

macg::ExperimentConfig load_config(const CommonFlags& flags) {
    macg::ExperimentConfig cfg;
    if (!flags.config_path.empty()) cfg = macg::load_experiment_config(flags.config_path);
    if (flags.out_dir) cfg.out_dir = *flags.out_dir;
    if (flags.workers) cfg.es.workers = *flags.workers;
    if (flags.variant) cfg.macg.variant = macg::variant_from_string(*flags.variant);
    return cfg;
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Experiment config file (JSON)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.seed, "Override the command's RNG seed");
    cmd->add_option("--workers", flags.workers, "Parallel evaluation workers");
    cmd->add_option("--out", flags.out_dir, "Output directory");
}

void print_eval_table(const std::vector<macg::EvalRow>& rows) {
    // Percentages follow the ratio convention (1 + score) * 100, so the
    // benchmark row reads 100% in every column.
    std::printf("%-18s %9s %9s %9s %9s %9s %9s | %8s %8s %8s %8s\n", "policy", "m0", "m1", "m2",
                "m3", "m_ad", "m_all", "m0%", "m1%", "m2%", "m3%");
    for (const macg::EvalRow& row : rows) {
        const macg::ScoreReport& r = row.score;
        std::printf("%-18s %9.4f %9.4f %9.4f %9.4f %9.4f %9.4f | %7.1f%% %7.1f%% %7.1f%% %7.1f%%\n",
                    row.policy.c_str(), r.m0, r.m1, r.m2, r.m3, r.m_ad, r.m_all,
                    (1.0 + r.m0) * 100.0, (1.0 + r.m1) * 100.0, (1.0 + r.m2) * 100.0,
                    (1.0 + r.m3) * 100.0);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale lab for cooperative bid optimization in GSP auctions"};
    app.require_subcommand(1);

    CommonFlags gen_flags, train_flags, eval_flags;
    std::string dump_path;
    std::string checkpoint_path;
    std::vector<std::string> eval_variants;

    CLI::App* gen = app.add_subcommand("gen", "Generate synthetic train/test auction logs");
    add_common_flags(gen, gen_flags);

    CLI::App* train = app.add_subcommand("train", "Train the policy net on the training log");
    add_common_flags(train, train_flags);
    train->add_option("--variant", train_flags.variant,
                      "Policy variant: full|no-shared|no-agents|static-alloc");

    CLI::App* eval = app.add_subcommand("eval", "Evaluate policies on the test log");
    add_common_flags(eval, eval_flags);
    eval->add_option("--checkpoint", checkpoint_path, "Trained checkpoint file")->required();
    eval->add_option("--variant", eval_variants,
                     "Extra ablation rows evaluated from the same checkpoint (repeatable)");

    CLI::App* dump = app.add_subcommand("print-default-config",
                                        "Print the full default experiment config");
    dump->add_option("--out", dump_path, "Write to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            macg::ExperimentConfig cfg = load_config(gen_flags);
            if (gen_flags.seed) cfg.gen.seed = *gen_flags.seed;
            const macg::GenSummary s = macg::run_gen(cfg);
            std::printf("wrote %s (%zu auctions) and %s (%zu auctions)\n",
                        s.train_path.string().c_str(), s.n_train_auctions,
                        s.test_path.string().c_str(), s.n_test_auctions);
            std::printf("ads: %zu total | click %zu, gmv %zu, cart %zu, self-bidding %zu\n",
                        s.n_ads, s.n_click, s.n_gmv, s.n_cart, s.n_self);
        } else if (train->parsed()) {
            macg::ExperimentConfig cfg = load_config(train_flags);
            if (train_flags.seed) cfg.es.seed = *train_flags.seed;
            const macg::TrainSummary s = macg::run_train(cfg);
            const macg::ScoreReport& best = s.result.best_report;
            std::printf("trained %d iterations (%s); best m_all %.6f (m0 %.6f, m_ad %.6f)\n",
                        s.result.iterations_run, s.result.converged ? "converged" : "budget spent",
                        best.m_all, best.m0, best.m_ad);
            std::printf("checkpoint: %s\nhistory: %s, %s\n", s.checkpoint_path.string().c_str(),
                        s.history_csv.string().c_str(), s.history_jsonl.string().c_str());
        } else if (eval->parsed()) {
            macg::ExperimentConfig cfg = load_config(eval_flags);
            std::vector<macg::MacgVariant> variants;
            for (const std::string& v : eval_variants)
                variants.push_back(macg::variant_from_string(v));
            const macg::EvalSummary s = macg::run_eval(cfg, checkpoint_path, variants);
            print_eval_table(s.rows);
            std::printf("table: %s\n", s.table_path.string().c_str());
        } else if (dump->parsed()) {
            const std::string text = macg::default_config_json();
            if (dump_path.empty()) {
                std::fputs(text.c_str(), stdout);
            } else {
                std::ofstream out(dump_path);
                if (!out) throw macg::DataError("cannot open '" + dump_path + "' for writing");
                out << text;
            }
        }
    } catch (const macg::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const macg::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    }
    return kExitOk;
}
