#include "easybo/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

int cmd_run(const std::string& config_path, const easybo::ExperimentConfig& overrides,
            const std::vector<std::string>& set_flags) {
    easybo::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = easybo::load_config(config_path);

    auto is_set = [&](const std::string& flag) {
        return std::find(set_flags.begin(), set_flags.end(), flag) != set_flags.end();
    };
    if (is_set("problem")) cfg.problem = overrides.problem;
    if (is_set("variant")) cfg.variant = overrides.variant;
    if (is_set("regime")) cfg.regime = overrides.regime;
    if (is_set("batch")) cfg.batch = overrides.batch;
    if (is_set("budget")) cfg.budget = overrides.budget;
    if (is_set("n_init")) cfg.n_init = overrides.n_init;
    if (is_set("repeats")) cfg.repeats = overrides.repeats;
    if (is_set("seed")) cfg.base_seed = overrides.base_seed;
    if (is_set("out")) cfg.out_dir = overrides.out_dir;
    if (is_set("threads")) cfg.threads = overrides.threads;
    if (is_set("refit_every")) cfg.refit_every = overrides.refit_every;
    cfg.validate();

    const easybo::ExperimentResult result = easybo::run_experiment(cfg);
    int failures = 0;
    for (const easybo::RunOutcome& r : result.runs) {
        if (!r.ok) {
            ++failures;
            std::cerr << "run with seed " << r.seed << " failed: " << r.error << "\n";
        }
    }
    std::cout << easybo::summary_to_csv(cfg, result);
    std::cout << "wrote " << cfg.out_dir << "/summary.{json,csv} and " << cfg.repeats
              << " run records\n";
    return failures == 0 ? 0 : 1;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& csv_out) {
    std::vector<nlohmann::json> summaries;
    for (const std::string& dir : dirs) {
        std::ifstream in(std::filesystem::path(dir) / "summary.json");
        if (!in) {
            std::cerr << "no summary.json under " << dir << "\n";
            return 1;
        }
        nlohmann::json j;
        in >> j;
        summaries.push_back(std::move(j));
    }
    const easybo::ComparisonReport report = easybo::compare_report(summaries);
    std::cout << report.to_text();
    if (!csv_out.empty()) {
        std::ofstream out(csv_out);
        out << report.to_csv();
        std::cout << "wrote " << csv_out << "\n";
    }
    return 0;
}

int cmd_problems() {
    for (const easybo::Problem& p : easybo::builtin_problems()) {
        std::cout << p.name << "  d=" << p.domain.dim();
        if (p.known_optimum.has_value()) std::cout << "  known_optimum=" << *p.known_optimum;
        std::cout << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asynchronous batch Bayesian optimization benchmark harness"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run a repeated optimization experiment");
    std::string config_path;
    easybo::ExperimentConfig ov;
    std::string variant_str = "EASYBO", regime_str = "async";
    run->add_option("--config", config_path, "JSON config file");
    auto* o_problem = run->add_option("--problem", ov.problem, "Built-in problem name");
    auto* o_variant = run->add_option("--variant", variant_str,
                                      "EI|LCB|PBO|PHCBO|EASYBO|EASYBO_S|EASYBO_A|EASYBO_SP");
    auto* o_regime = run->add_option("--regime", regime_str, "sequential|sync|async");
    auto* o_batch = run->add_option("-B,--batch", ov.batch, "Batch size");
    auto* o_budget = run->add_option("--budget", ov.budget, "Total evaluation budget");
    auto* o_ninit = run->add_option("--n-init", ov.n_init, "Initial design size");
    auto* o_repeats = run->add_option("--repeats", ov.repeats, "Independent repeats");
    auto* o_seed = run->add_option("--seed", ov.base_seed, "Base seed");
    auto* o_out = run->add_option("--out", ov.out_dir, "Output directory");
    auto* o_threads = run->add_option("--threads", ov.threads, "Worker threads (0 = all cores)");
    auto* o_refit = run->add_option("--refit-every", ov.refit_every,
                                    "Full hyperparameter refit interval (completions)");

    // compare
    auto* compare = app.add_subcommand("compare", "Compare summary files across experiments");
    std::vector<std::string> dirs;
    std::string csv_out;
    compare->add_option("dirs", dirs, "Experiment output directories")->required();
    compare->add_option("--csv", csv_out, "Also write the comparison as CSV");

    // problems
    auto* problems = app.add_subcommand("problems", "List built-in problems");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            std::vector<std::string> set_flags;
            if (*o_problem) set_flags.push_back("problem");
            if (*o_variant) {
                ov.variant = easybo::variant_from_name(variant_str);
                set_flags.push_back("variant");
            }
            if (*o_regime) {
                ov.regime = easybo::regime_from_name(regime_str);
                set_flags.push_back("regime");
            }
            if (*o_batch) set_flags.push_back("batch");
            if (*o_budget) set_flags.push_back("budget");
            if (*o_ninit) set_flags.push_back("n_init");
            if (*o_repeats) set_flags.push_back("repeats");
            if (*o_seed) set_flags.push_back("seed");
            if (*o_out) set_flags.push_back("out");
            if (*o_threads) set_flags.push_back("threads");
            if (*o_refit) set_flags.push_back("refit_every");
            return cmd_run(config_path, ov, set_flags);
        }
        if (compare->parsed()) return cmd_compare(dirs, csv_out);
        if (problems->parsed()) return cmd_problems();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
