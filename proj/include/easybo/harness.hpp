#ifndef EASYBO_HARNESS_HPP
#define EASYBO_HARNESS_HPP

#include "easybo/benchmarks.hpp"
#include "easybo/scheduler.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace easybo {

enum class Regime { Sequential, Sync, Async };

std::string regime_name(Regime r);
Regime regime_from_name(const std::string& name);

/// Duration-model override, settable from the config file.
struct DurationSpec {
    std::string model = "lognormal";  // constant | lognormal | coordinate
    double seconds = 10.0;            // constant
    double median = 10.0;             // lognormal / coordinate
    double sigma_log = 0.5;           // lognormal
    int coordinate = 0;               // coordinate

    std::shared_ptr<const DurationModel> build() const;
};

/// Custom weighted-FOM problem assembled from named metric surrogates.
struct FomProblemSpec {
    std::string name = "custom_fom";
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::pair<std::string, double>> components;

    Problem build() const;
};

struct ExperimentConfig {
    std::string problem = "branin";
    Regime regime = Regime::Async;
    Variant variant = Variant::EasyBo;
    int batch = 5;
    int budget = 150;
    int n_init = 20;
    int repeats = 20;
    std::uint64_t base_seed = 0;
    std::string out_dir = "results";

    AcquisitionSpec acq;
    InnerOptConfig inner;
    GpFitOptions fit_options;
    std::optional<DurationSpec> duration;
    std::optional<FomProblemSpec> custom_fom;
    int refit_every = 1;
    InitDesign init_design = InitDesign::Sobol;
    int threads = 0;  // 0 = hardware concurrency

    /// "sim" (default) runs the deterministic simulated clock; "threads" runs
    /// the real worker-thread demonstration executor (async regime only, with
    /// durations slept out at executor_time_scale wall seconds per simulated
    /// second; not byte-reproducible).
    std::string executor = "sim";
    double executor_time_scale = 1e-3;

    /// Rejects variant/regime combinations the engines cannot run.
    void validate() const;
    Problem resolve_problem() const;
    RunConfig run_config(std::uint64_t seed) const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Per-run seed: base_seed XOR splitmix64(i).
std::uint64_t run_seed(std::uint64_t base_seed, int run_index);

struct SummaryStats {
    double best = 0.0;
    double worst = 0.0;
    double mean = 0.0;
    double std_dev = 0.0;
    double mean_sim_time = 0.0;
    double total_sim_time = 0.0;
};

struct RunOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double final_value = 0.0;
    double total_sim_time = 0.0;
};

struct ExperimentResult {
    SummaryStats stats;
    std::vector<RunOutcome> runs;
    bool all_succeeded = false;
};

SummaryStats summarize(const std::vector<RunOutcome>& runs);

/// Execute `repeats` seeded runs (concurrently when threads > 1), persist one
/// JSONL record and one best-so-far curve per run plus summary.{json,csv}.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// RunRecord persistence: one meta line followed by one JSON object per event.
void save_run_record(const RunRecord& record, const std::filesystem::path& path);
RunRecord load_run_record(const std::filesystem::path& path);
void save_curve_csv(const RunRecord& record, const std::filesystem::path& path);

nlohmann::json summary_to_json(const ExperimentConfig& cfg, const ExperimentResult& result);
std::string summary_to_csv(const ExperimentConfig& cfg, const ExperimentResult& result);

struct ComparisonRow {
    std::string label;
    double mean_final = 0.0;
    double best = 0.0;
    double worst = 0.0;
    double std_dev = 0.0;
    double mean_time = 0.0;
};

struct ComparisonReport {
    std::string problem;
    int budget = 0;
    std::vector<ComparisonRow> rows;
    /// ratios(i, j) = mean_time_i / mean_time_j
    Eigen::MatrixXd time_ratios;

    std::string to_text() const;
    std::string to_csv() const;
};

/// Side-by-side view of summary files that share a problem and budget.
ComparisonReport compare_report(const std::vector<nlohmann::json>& summaries);

} // namespace easybo

#endif
