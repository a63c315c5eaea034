// Acceptance suite: one check per criterion, each printing a single
// "criterion N PASS|FAIL" line. Run all with no arguments or a single
// criterion with --only N. Exit code is the number of failed criteria.

#include "easybo/acq_optimizer.hpp"
#include "easybo/acquisition.hpp"
#include "easybo/benchmarks.hpp"
#include "easybo/gp.hpp"
#include "easybo/harness.hpp"
#include "easybo/rng.hpp"
#include "easybo/scheduler.hpp"
#include "easybo/sobol.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

using namespace easybo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string details;
};

void report(int n, const std::string& what, const Outcome& o) {
    std::cout << "criterion " << n << (o.pass ? " PASS" : " FAIL") << ": " << what;
    if (!o.details.empty()) std::cout << " (" << o.details << ")";
    std::cout << std::endl;
}

Dataset random_dataset(Rng& rng, int n, int d) {
    Dataset data(d);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd u(d);
        for (int j = 0; j < d; ++j) u[j] = rng.uniform01();
        data.add(DesignPoint(u),
                 std::sin(3.0 * u[0]) + 0.5 * u.squaredNorm() + 0.1 * rng.normal01());
    }
    return data;
}

// ---------------------------------------------------------------------------
// 1. GP oracle equivalence over 200 random datasets (N <= 50, d <= 6)
Outcome criterion_gp_oracle() {
    Rng rng(20240601);
    double worst_rel = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + static_cast<int>(rng.below(6));
        const int n = 2 + static_cast<int>(rng.below(49));
        Dataset data = random_dataset(rng, n, d);
        KernelHyperparams h;
        h.length_scales.resize(d);
        for (int j = 0; j < d; ++j) h.length_scales[j] = rng.uniform(0.1, 2.0);
        h.signal_variance = rng.uniform(0.2, 3.0);
        h.noise_variance = rng.uniform(1e-4, 1e-2);

        const GpModel model = GpModel::make(data, h);

        // dense-inverse evaluation of the posterior equations
        const Eigen::VectorXd y = data.observations_vector();
        const double shift = y.mean();
        const double scale = std::max(std::sqrt((y.array() - shift).square().mean()), 1e-12);
        const Eigen::VectorXd y_std = (y.array() - shift) / scale;
        Eigen::MatrixXd k = kernel_matrix(data.inputs(), data.inputs(), h);
        k.diagonal().array() += h.noise_variance;
        const Eigen::MatrixXd kinv = k.inverse();

        for (int t = 0; t < 3; ++t) {
            Eigen::VectorXd u(d);
            for (int j = 0; j < d; ++j) u[j] = rng.uniform01();
            const DesignPoint q(u);
            Eigen::VectorXd kq(n);
            for (int i = 0; i < n; ++i) kq[i] = kernel_se(q, data.point(i), h);
            const double mean_ref = shift + scale * kq.dot(kinv * y_std);
            const double var_ref =
                scale * scale * std::max(h.signal_variance - kq.dot(kinv * kq), 0.0);

            const Posterior p = model.posterior(q);
            const double var = p.stddev * p.stddev;
            const double rel_m = std::abs(p.mean - mean_ref) / std::max(1.0, std::abs(mean_ref));
            const double rel_v = std::abs(var - var_ref) / std::max(1.0, std::abs(var_ref));
            worst_rel = std::max({worst_rel, rel_m, rel_v});
        }
    }
    std::ostringstream d;
    d << "max relative deviation " << worst_rel << " over 200 datasets, tolerance 1e-10";
    return {worst_rel <= 1e-10, d.str()};
}

// ---------------------------------------------------------------------------
// 2. Hallucination contract over 50 random configurations
Outcome criterion_hallucination() {
    Rng rng(20240602);
    double worst_excess = -1e300;
    double worst_pending = -1e300;
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + static_cast<int>(rng.below(4));
        const int n = 5 + static_cast<int>(rng.below(26));
        Dataset data = random_dataset(rng, n, d);
        KernelHyperparams h;
        h.length_scales = Eigen::VectorXd::Constant(d, rng.uniform(0.15, 1.0));
        h.signal_variance = rng.uniform(0.3, 2.0);
        h.noise_variance = rng.uniform(1e-6, 1e-2);
        const GpModel model = GpModel::make(data, h);

        std::vector<DesignPoint> pending;
        const int m = 1 + static_cast<int>(rng.below(3));
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd u(d);
            for (int j = 0; j < d; ++j) u[j] = rng.uniform01();
            pending.push_back(DesignPoint(u));
        }
        const GpModel hal = hallucinate(model, pending);

        for (int g = 0; g < 100; ++g) {
            Eigen::VectorXd u(d);
            for (int j = 0; j < d; ++j) u[j] = rng.uniform01();
            const DesignPoint q(u);
            const double before = model.posterior(q).stddev;
            const double after = hal.posterior(q).stddev;
            worst_excess = std::max(worst_excess, after - before);
        }
        for (const DesignPoint& p : pending) {
            const double sd = hal.posterior(p).stddev;
            worst_pending = std::max(worst_pending, sd - model.noise_stddev());
        }
    }
    std::ostringstream d;
    d << "max stddev excess " << worst_excess << " (<= 1e-10), max pending stddev above noise "
      << worst_pending << " (<= 1e-8)";
    return {worst_excess <= 1e-10 && worst_pending <= 1e-8, d.str()};
}

// ---------------------------------------------------------------------------
// 3. Weight-density law: KS distance of 1e6 draws vs F(w) = w/(lambda(1-w))
Outcome criterion_weight_density() {
    const double lambda = 6.0;
    const int n = 1'000'000;
    Rng rng(20240603);
    std::vector<double> ws(n);
    for (int i = 0; i < n; ++i) ws[static_cast<std::size_t>(i)] = sample_weight(lambda, rng);
    std::sort(ws.begin(), ws.end());
    const auto cdf = [lambda](double w) { return w / (lambda * (1.0 - w)); };
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = cdf(ws[static_cast<std::size_t>(i)]);
        ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    }
    std::ostringstream d;
    d << "KS statistic " << ks << " over 1e6 draws, threshold 0.002";
    return {ks < 0.002, d.str()};
}

// ---------------------------------------------------------------------------
// helpers for criteria 4-7: pinned experiment configs
ExperimentConfig base_experiment(const std::string& problem, Regime regime, Variant variant,
                                 int batch, const std::string& out) {
    ExperimentConfig cfg;
    cfg.problem = problem;
    cfg.regime = regime;
    cfg.variant = variant;
    cfg.batch = batch;
    cfg.budget = 150;
    cfg.n_init = 20;
    cfg.repeats = 20;
    cfg.base_seed = 90210;
    cfg.out_dir = out;
    cfg.duration = DurationSpec{"lognormal", 10.0, 10.0, 0.5, 0};
    return cfg;
}

void speed_settings(ExperimentConfig& cfg, int refit_every, int n_random, int starts, int iters,
                    int fit_starts, int fit_iters) {
    cfg.refit_every = refit_every;
    cfg.inner.n_random = n_random;
    cfg.inner.n_local_starts = starts;
    cfg.inner.local_max_iters = iters;
    cfg.fit_options.n_starts = fit_starts;
    cfg.fit_options.max_iterations = fit_iters;
}

// 4. Straggler dominance and the batch-size trend of the time reduction
Outcome criterion_straggler() {
    const fs::path root = "acceptance_out/criterion4";
    fs::remove_all(root);
    int violations = 0;
    std::vector<double> reduction_b5(20), reduction_b15(20);
    for (int b : {5, 10, 15}) {
        ExperimentConfig sync_cfg =
            base_experiment("branin", Regime::Sync, Variant::EasyBoS, b,
                            (root / ("sync_b" + std::to_string(b))).string());
        ExperimentConfig async_cfg =
            base_experiment("branin", Regime::Async, Variant::EasyBo, b,
                            (root / ("async_b" + std::to_string(b))).string());
        speed_settings(sync_cfg, 10, 512, 4, 20, 4, 25);
        speed_settings(async_cfg, 10, 512, 4, 20, 4, 25);
        const ExperimentResult sync_res = run_experiment(sync_cfg);
        const ExperimentResult async_res = run_experiment(async_cfg);
        if (!sync_res.all_succeeded || !async_res.all_succeeded)
            return {false, "a run failed in batch " + std::to_string(b)};
        for (int i = 0; i < 20; ++i) {
            const double ts = sync_res.runs[static_cast<std::size_t>(i)].total_sim_time;
            const double ta = async_res.runs[static_cast<std::size_t>(i)].total_sim_time;
            if (ta > ts) ++violations;
            const double red = (ts - ta) / ts;
            if (b == 5) reduction_b5[static_cast<std::size_t>(i)] = red;
            if (b == 15) reduction_b15[static_cast<std::size_t>(i)] = red;
        }
    }
    int trend = 0;
    for (int i = 0; i < 20; ++i)
        if (reduction_b15[static_cast<std::size_t>(i)] > reduction_b5[static_cast<std::size_t>(i)])
            ++trend;
    std::ostringstream d;
    d << violations << " async>sync violations (0 allowed); reduction(B=15) > reduction(B=5) in "
      << trend << "/20 paired seeds (need >= 15)";
    return {violations == 0 && trend >= 15, d.str()};
}

// 5. Quality parity across batch sizes on branin and hartmann6
Outcome criterion_quality_parity() {
    const fs::path root = "acceptance_out/criterion5";
    fs::remove_all(root);
    std::ostringstream d;
    bool pass = true;
    for (const std::string problem : {"branin", "hartmann6"}) {
        ExperimentConfig seq = base_experiment(problem, Regime::Sequential, Variant::EasyBo, 1,
                                               (root / (problem + "_seq")).string());
        ExperimentConfig b5 = base_experiment(problem, Regime::Async, Variant::EasyBo, 5,
                                              (root / (problem + "_b5")).string());
        ExperimentConfig b15 = base_experiment(problem, Regime::Async, Variant::EasyBo, 15,
                                               (root / (problem + "_b15")).string());
        ExperimentConfig s15 = base_experiment(problem, Regime::Sync, Variant::EasyBoS, 15,
                                               (root / (problem + "_s15")).string());
        for (ExperimentConfig* cfg : {&seq, &b5, &b15, &s15})
            speed_settings(*cfg, 5, 1024, 8, 40, 5, 35);

        const double mean_seq = run_experiment(seq).stats.mean;
        const double mean_b5 = run_experiment(b5).stats.mean;
        const double mean_b15 = run_experiment(b15).stats.mean;
        const double mean_s15 = run_experiment(s15).stats.mean;

        const bool parity = std::abs(mean_b5 - mean_seq) <= 0.01 * std::abs(mean_seq);
        const double degradation_easybo = mean_seq - mean_b15;
        const double degradation_sync = mean_seq - mean_s15;
        const bool stability = degradation_easybo < degradation_sync;
        pass = pass && parity && stability;
        d << problem << ": seq " << mean_seq << ", B5 " << mean_b5 << ", B15 " << mean_b15
          << ", S15 " << mean_s15 << "; parity " << (parity ? "ok" : "VIOLATED") << ", stability "
          << (stability ? "ok" : "VIOLATED") << "; ";
    }
    return {pass, d.str()};
}

// 6. Penalization diversity: hallucination spreads the in-flight set
double median_min_inflight_distance(const fs::path& dir, int repeats) {
    std::vector<double> dists;
    for (int i = 0; i < repeats; ++i) {
        const RunRecord rec = load_run_record(dir / ("run_" + std::to_string(i) + ".jsonl"));
        for (const RunEvent& e : rec.events) {
            if (!e.weight.has_value()) continue; // model-driven issues only
            double dmin = std::numeric_limits<double>::infinity();
            for (const RunEvent& other : rec.events) {
                if (&other == &e) continue;
                if (other.issue_time <= e.issue_time && other.complete_time > e.issue_time) {
                    dmin = std::min(dmin, (e.point.u - other.point.u).norm());
                }
            }
            if (std::isfinite(dmin)) dists.push_back(dmin);
        }
    }
    std::sort(dists.begin(), dists.end());
    return dists.empty() ? 0.0 : dists[dists.size() / 2];
}

Outcome criterion_diversity() {
    // needs a space the model cannot saturate within the budget, so the
    // uncertainty term still differentiates the variants at batch size 10
    const fs::path root = "acceptance_out/criterion6";
    fs::remove_all(root);
    ExperimentConfig with = base_experiment("hartmann6", Regime::Async, Variant::EasyBo, 10,
                                            (root / "easybo").string());
    ExperimentConfig without = base_experiment("hartmann6", Regime::Async, Variant::EasyBoA, 10,
                                               (root / "easybo_a").string());
    speed_settings(with, 5, 512, 6, 25, 4, 30);
    speed_settings(without, 5, 512, 6, 25, 4, 30);
    if (!run_experiment(with).all_succeeded || !run_experiment(without).all_succeeded)
        return {false, "a run failed"};
    const double med_with = median_min_inflight_distance(root / "easybo", 20);
    const double med_without = median_min_inflight_distance(root / "easybo_a", 20);
    std::ostringstream d;
    d << "median min in-flight distance: EASYBO " << med_with << " vs EASYBO_A " << med_without;
    return {med_with > med_without, d.str()};
}

// 7. Determinism: identical configs produce byte-identical summary files
std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion_determinism() {
    const fs::path dir = "acceptance_out/criterion7";
    fs::remove_all(dir);
    ExperimentConfig cfg =
        base_experiment("branin", Regime::Async, Variant::EasyBo, 4, dir.string());
    cfg.budget = 36;
    cfg.n_init = 12;
    cfg.repeats = 4;
    speed_settings(cfg, 4, 256, 4, 15, 4, 20);
    run_experiment(cfg);
    const std::string summary1 = slurp(dir / "summary.json");
    const std::string csv1 = slurp(dir / "summary.csv");
    const std::string run1 = slurp(dir / "run_0.jsonl");
    run_experiment(cfg);
    const bool same = summary1 == slurp(dir / "summary.json") &&
                      csv1 == slurp(dir / "summary.csv") && run1 == slurp(dir / "run_0.jsonl");
    return {same && !summary1.empty(),
            same ? "summary.json, summary.csv and run records byte-identical" : "files differ"};
}

// 8. Baseline sanity: pBO slot weights and the pHCBO repeat-point penalty
Outcome criterion_baselines() {
    // pBO with B=5 must use exactly (0, 0.25, 0.5, 0.75, 1)
    Problem p = find_problem("branin");
    p.duration = std::make_shared<ConstantDuration>(1.0);
    RunConfig rc;
    rc.variant = Variant::Pbo;
    rc.budget = 30;
    rc.n_init = 20;
    rc.batch = 5;
    rc.seed = 5150;
    rc.inner.n_random = 256;
    rc.inner.n_local_starts = 4;
    rc.inner.local_max_iters = 15;
    rc.fit_options.n_starts = 4;
    rc.fit_options.max_iterations = 25;
    rc.refit_every = 5;
    const RunRecord rec = run_sync_batch(p, rc);
    bool weights_ok = rec.events.size() == 30;
    const double expected[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int round = 0; round < 2 && weights_ok; ++round) {
        std::vector<double> ws;
        for (int i = 0; i < 5; ++i) {
            const RunEvent& e = rec.events[static_cast<std::size_t>(20 + round * 5 + i)];
            if (e.weight.has_value()) ws.push_back(*e.weight);
        }
        std::sort(ws.begin(), ws.end());
        if (ws.size() != 5) {
            weights_ok = false;
        } else {
            for (int i = 0; i < 5; ++i)
                weights_ok = weights_ok && (ws[static_cast<std::size_t>(i)] == expected[i]);
        }
    }

    // pHCBO: an exact repeat point must rank below every unpenalized candidate
    Rng rng(20240608);
    Dataset data = random_dataset(rng, 20, 2);
    KernelHyperparams h;
    h.length_scales = Eigen::VectorXd::Constant(2, 0.4);
    h.signal_variance = 1.0;
    h.noise_variance = 1e-4;
    const GpModel model = GpModel::make(data, h);
    AcquisitionSpec spec;
    spec.kind = AcqKind::Phcbo;
    spec.hc_distance = default_hc_distance(2);
    spec.hc_scale = default_hc_scale(-1.0, 1.0);
    const DesignPoint repeat = data.point(7);
    const std::vector<DesignPoint> history{repeat};
    const double penalized = acq_phcbo(model, repeat, 0.5, history, spec);
    SobolSequence screen(2, 424242);
    double min_unpenalized = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
        const DesignPoint c(screen.next());
        min_unpenalized = std::min(min_unpenalized, acq_pbo(model, c, 0.5));
    }
    const bool rank_ok = penalized < min_unpenalized;

    std::ostringstream d;
    d << "pBO-5 slot weights " << (weights_ok ? "exact" : "WRONG") << "; repeat-point pHCBO value "
      << penalized << " < min unpenalized " << min_unpenalized << " over 1000 candidates: "
      << (rank_ok ? "yes" : "no");
    return {weights_ok && rank_ok, d.str()};
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
    }

    struct Entry {
        int id;
        const char* what;
        Outcome (*fn)();
    };
    const Entry entries[] = {
        {1, "GP posterior matches the dense-inverse oracle to 1e-10", criterion_gp_oracle},
        {2, "hallucinated stddev bounded by base stddev and noise floor", criterion_hallucination},
        {3, "sampled weight density matches 1/(lambda(1-w)^2)", criterion_weight_density},
        {4, "async never slower than sync; time reduction grows with batch", criterion_straggler},
        {5, "batch quality parity and cross-batch stability", criterion_quality_parity},
        {6, "hallucination penalization spreads in-flight points", criterion_diversity},
        {7, "experiments are byte-identical across invocations", criterion_determinism},
        {8, "pBO slot weights exact; pHCBO repeat point ranks last", criterion_baselines},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        if (only != 0 && e.id != only) continue;
        const Outcome o = e.fn();
        report(e.id, e.what, o);
        if (!o.pass) ++failures;
    }
    return failures;
}
