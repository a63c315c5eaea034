#include "easybo/harness.hpp"
#include "easybo/rng.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace easybo {

namespace {

std::string format_double(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return v;
}

} // namespace

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Sequential: return "sequential";
        case Regime::Sync: return "sync";
        case Regime::Async: return "async";
    }
    throw std::logic_error("regime_name: unreachable");
}

Regime regime_from_name(const std::string& name) {
    if (name == "sequential") return Regime::Sequential;
    if (name == "sync") return Regime::Sync;
    if (name == "async") return Regime::Async;
    throw std::invalid_argument("unknown regime: " + name);
}

std::shared_ptr<const DurationModel> DurationSpec::build() const {
    if (model == "constant") return std::make_shared<ConstantDuration>(seconds);
    if (model == "lognormal") return std::make_shared<LogNormalDuration>(median, sigma_log);
    if (model == "coordinate") return std::make_shared<CoordinateDuration>(median, coordinate);
    throw std::invalid_argument("unknown duration model: " + model);
}

Problem FomProblemSpec::build() const {
    if (lower.empty() || lower.size() != upper.size())
        throw std::invalid_argument("FomProblemSpec: bad domain bounds");
    Eigen::VectorXd lo = Eigen::Map<const Eigen::VectorXd>(lower.data(), static_cast<Eigen::Index>(lower.size()));
    Eigen::VectorXd hi = Eigen::Map<const Eigen::VectorXd>(upper.data(), static_cast<Eigen::Index>(upper.size()));
    return make_fom_problem(name, BoxDomain(lo, hi), components);
}

void ExperimentConfig::validate() const {
    if (repeats < 1) throw std::invalid_argument("config: repeats must be >= 1");
    if (budget < n_init) throw std::invalid_argument("config: budget must be >= n_init");
    acq.validate();
    inner.validate();

    const bool seq_ok = variant == Variant::Ei || variant == Variant::Lcb ||
                        variant == Variant::EasyBo;
    const bool sync_ok = variant == Variant::Pbo || variant == Variant::Phcbo ||
                         variant == Variant::EasyBoS || variant == Variant::EasyBoSp;
    if (executor != "sim" && executor != "threads")
        throw std::invalid_argument("config: executor must be 'sim' or 'threads'");
    if (executor == "threads" && regime != Regime::Async)
        throw std::invalid_argument("config: the threaded executor only runs the async regime");
    if (executor_time_scale <= 0.0)
        throw std::invalid_argument("config: executor_time_scale must be positive");

    const bool async_ok = variant == Variant::EasyBo || variant == Variant::EasyBoA;
    switch (regime) {
        case Regime::Sequential:
            if (!seq_ok)
                throw std::invalid_argument("sequential regime supports EI, LCB, EASYBO");
            break;
        case Regime::Sync:
            if (!sync_ok)
                throw std::invalid_argument("sync regime supports PBO, PHCBO, EASYBO_S, EASYBO_SP");
            if (batch < 2) throw std::invalid_argument("sync regime needs batch >= 2");
            break;
        case Regime::Async:
            if (!async_ok)
                throw std::invalid_argument("async regime supports EASYBO, EASYBO_A");
            if (batch < 1) throw std::invalid_argument("async regime needs batch >= 1");
            if (n_init < batch) throw std::invalid_argument("async regime needs n_init >= batch");
            break;
    }
}

Problem ExperimentConfig::resolve_problem() const {
    Problem p = custom_fom.has_value() ? custom_fom->build() : find_problem(problem);
    if (duration.has_value()) p.duration = duration->build();
    return p;
}

RunConfig ExperimentConfig::run_config(std::uint64_t seed) const {
    RunConfig rc;
    rc.budget = budget;
    rc.n_init = n_init;
    rc.batch = regime == Regime::Sequential ? 1 : batch;
    rc.variant = variant;
    rc.acq = acq;
    rc.inner = inner;
    rc.fit_options = fit_options;
    rc.refit_every = refit_every;
    rc.init_design = init_design;
    rc.seed = seed;
    return rc;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("problem")) cfg.problem = j.at("problem").get<std::string>();
    if (j.contains("regime")) cfg.regime = regime_from_name(j.at("regime").get<std::string>());
    if (j.contains("variant")) cfg.variant = variant_from_name(j.at("variant").get<std::string>());
    if (j.contains("batch")) cfg.batch = j.at("batch").get<int>();
    if (j.contains("budget")) cfg.budget = j.at("budget").get<int>();
    if (j.contains("n_init")) cfg.n_init = j.at("n_init").get<int>();
    if (j.contains("repeats")) cfg.repeats = j.at("repeats").get<int>();
    if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("refit_every")) cfg.refit_every = j.at("refit_every").get<int>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("executor")) cfg.executor = j.at("executor").get<std::string>();
    if (j.contains("executor_time_scale"))
        cfg.executor_time_scale = j.at("executor_time_scale").get<double>();
    if (j.contains("init_design")) {
        const std::string kind = j.at("init_design").get<std::string>();
        if (kind == "sobol") cfg.init_design = InitDesign::Sobol;
        else if (kind == "uniform") cfg.init_design = InitDesign::Uniform;
        else throw std::invalid_argument("unknown init_design: " + kind);
    }
    if (j.contains("acquisition")) {
        const nlohmann::json& a = j.at("acquisition");
        if (a.contains("lambda")) cfg.acq.lambda = a.at("lambda").get<double>();
        if (a.contains("kappa")) cfg.acq.kappa = a.at("kappa").get<double>();
        if (a.contains("hc_distance")) cfg.acq.hc_distance = a.at("hc_distance").get<double>();
        if (a.contains("hc_scale")) cfg.acq.hc_scale = a.at("hc_scale").get<double>();
        if (a.contains("history_window")) cfg.acq.history_window = a.at("history_window").get<int>();
    }
    if (j.contains("inner_opt")) {
        const nlohmann::json& io = j.at("inner_opt");
        if (io.contains("n_random")) cfg.inner.n_random = io.at("n_random").get<int>();
        if (io.contains("n_local_starts")) cfg.inner.n_local_starts = io.at("n_local_starts").get<int>();
        if (io.contains("local_max_iters")) cfg.inner.local_max_iters = io.at("local_max_iters").get<int>();
    }
    if (j.contains("fit")) {
        const nlohmann::json& f = j.at("fit");
        if (f.contains("n_starts")) cfg.fit_options.n_starts = f.at("n_starts").get<int>();
        if (f.contains("max_iterations"))
            cfg.fit_options.max_iterations = f.at("max_iterations").get<int>();
    }
    if (j.contains("duration")) {
        const nlohmann::json& d = j.at("duration");
        DurationSpec ds;
        if (d.contains("model")) ds.model = d.at("model").get<std::string>();
        if (d.contains("seconds")) ds.seconds = d.at("seconds").get<double>();
        if (d.contains("median")) ds.median = d.at("median").get<double>();
        if (d.contains("sigma_log")) ds.sigma_log = d.at("sigma_log").get<double>();
        if (d.contains("coordinate")) ds.coordinate = d.at("coordinate").get<int>();
        cfg.duration = ds;
    }
    if (j.contains("fom")) {
        const nlohmann::json& f = j.at("fom");
        FomProblemSpec fs;
        if (f.contains("name")) fs.name = f.at("name").get<std::string>();
        fs.lower = f.at("domain").at("lower").get<std::vector<double>>();
        fs.upper = f.at("domain").at("upper").get<std::vector<double>>();
        for (const nlohmann::json& c : f.at("components"))
            fs.components.emplace_back(c.at("metric").get<std::string>(), c.at("weight").get<double>());
        cfg.custom_fom = fs;
    }
    cfg.validate();
    return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["problem"] = cfg.problem;
    j["regime"] = regime_name(cfg.regime);
    j["variant"] = variant_name(cfg.variant);
    j["batch"] = cfg.batch;
    j["budget"] = cfg.budget;
    j["n_init"] = cfg.n_init;
    j["repeats"] = cfg.repeats;
    j["base_seed"] = cfg.base_seed;
    j["out"] = cfg.out_dir;
    j["refit_every"] = cfg.refit_every;
    j["init_design"] = cfg.init_design == InitDesign::Sobol ? "sobol" : "uniform";
    j["executor"] = cfg.executor;
    j["executor_time_scale"] = cfg.executor_time_scale;
    j["acquisition"] = {{"lambda", cfg.acq.lambda},
                        {"kappa", cfg.acq.kappa},
                        {"hc_distance", cfg.acq.hc_distance},
                        {"hc_scale", cfg.acq.hc_scale},
                        {"history_window", cfg.acq.history_window}};
    j["inner_opt"] = {{"n_random", cfg.inner.n_random},
                      {"n_local_starts", cfg.inner.n_local_starts},
                      {"local_max_iters", cfg.inner.local_max_iters}};
    j["fit"] = {{"n_starts", cfg.fit_options.n_starts},
                {"max_iterations", cfg.fit_options.max_iterations}};
    if (cfg.duration.has_value()) {
        j["duration"] = {{"model", cfg.duration->model},
                         {"seconds", cfg.duration->seconds},
                         {"median", cfg.duration->median},
                         {"sigma_log", cfg.duration->sigma_log},
                         {"coordinate", cfg.duration->coordinate}};
    }
    if (cfg.custom_fom.has_value()) {
        nlohmann::json comps = nlohmann::json::array();
        for (const auto& [metric, weight] : cfg.custom_fom->components)
            comps.push_back({{"metric", metric}, {"weight", weight}});
        j["fom"] = {{"name", cfg.custom_fom->name},
                    {"domain", {{"lower", cfg.custom_fom->lower}, {"upper", cfg.custom_fom->upper}}},
                    {"components", comps}};
    }
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path.string());
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

std::uint64_t run_seed(std::uint64_t base_seed, int run_index) {
    return base_seed ^ splitmix64(static_cast<std::uint64_t>(run_index));
}

SummaryStats summarize(const std::vector<RunOutcome>& runs) {
    SummaryStats s;
    int n = 0;
    double sum = 0.0;
    double time_sum = 0.0;
    s.best = -std::numeric_limits<double>::infinity();
    s.worst = std::numeric_limits<double>::infinity();
    for (const RunOutcome& r : runs) {
        if (!r.ok) continue;
        ++n;
        sum += r.final_value;
        time_sum += r.total_sim_time;
        s.best = std::max(s.best, r.final_value);
        s.worst = std::min(s.worst, r.final_value);
    }
    if (n == 0) return SummaryStats{};
    s.mean = sum / n;
    double sq = 0.0;
    for (const RunOutcome& r : runs) {
        if (r.ok) sq += (r.final_value - s.mean) * (r.final_value - s.mean);
    }
    s.std_dev = std::sqrt(sq / n);
    s.mean_sim_time = time_sum / n;
    s.total_sim_time = time_sum;
    return s;
}

namespace {

RunRecord execute_one(const ExperimentConfig& cfg, const Problem& problem, std::uint64_t seed) {
    const RunConfig rc = cfg.run_config(seed);
    switch (cfg.regime) {
        case Regime::Sequential: return run_sequential(problem, rc);
        case Regime::Sync: return run_sync_batch(problem, rc);
        case Regime::Async:
            return cfg.executor == "threads"
                       ? run_async_threads(problem, rc, cfg.executor_time_scale)
                       : run_async(problem, rc);
    }
    throw std::logic_error("execute_one: unreachable");
}

} // namespace

void save_run_record(const RunRecord& record, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    nlohmann::json meta;
    meta["type"] = "meta";
    meta["seed"] = record.seed;
    meta["regime"] = record.regime;
    meta["variant"] = record.variant;
    meta["batch"] = record.batch;
    meta["total_sim_time"] = record.total_sim_time;
    out << meta.dump() << "\n";
    for (const RunEvent& e : record.events) {
        nlohmann::json j;
        j["type"] = "event";
        j["issue_time"] = e.issue_time;
        j["complete_time"] = e.complete_time;
        j["worker"] = e.worker;
        j["point"] = vector_to_json(e.point_raw);
        j["point_unit"] = vector_to_json(e.point.u);
        j["observation"] = e.observation;
        j["regime"] = e.regime;
        if (e.weight.has_value()) j["weight"] = *e.weight;
        else j["weight"] = nullptr;
        out << j.dump() << "\n";
    }
}

RunRecord load_run_record(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    RunRecord rec;
    std::string line;
    double best = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        const std::string type = j.at("type").get<std::string>();
        if (type == "meta") {
            rec.seed = j.at("seed").get<std::uint64_t>();
            rec.regime = j.at("regime").get<std::string>();
            rec.variant = j.at("variant").get<std::string>();
            rec.batch = j.at("batch").get<int>();
            rec.total_sim_time = j.at("total_sim_time").get<double>();
        } else if (type == "event") {
            RunEvent e;
            e.issue_time = j.at("issue_time").get<double>();
            e.complete_time = j.at("complete_time").get<double>();
            e.worker = j.at("worker").get<int>();
            e.point_raw = vector_from_json(j.at("point"));
            e.point = DesignPoint(vector_from_json(j.at("point_unit")));
            e.observation = j.at("observation").get<double>();
            e.regime = j.at("regime").get<std::string>();
            if (!j.at("weight").is_null()) e.weight = j.at("weight").get<double>();
            best = std::max(best, e.observation);
            rec.best_curve.emplace_back(e.complete_time, best);
            rec.events.push_back(std::move(e));
        }
    }
    return rec;
}

void save_curve_csv(const RunRecord& record, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "time,value\n";
    for (const auto& [t, v] : record.best_curve)
        out << format_double(t) << "," << format_double(v) << "\n";
}

nlohmann::json summary_to_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
    nlohmann::json j;
    j["config"] = config_to_json(cfg);
    j["problem"] = cfg.custom_fom.has_value() ? cfg.custom_fom->name : cfg.problem;
    j["regime"] = regime_name(cfg.regime);
    j["variant"] = variant_name(cfg.variant);
    j["batch"] = cfg.regime == Regime::Sequential ? 1 : cfg.batch;
    j["budget"] = cfg.budget;
    nlohmann::json runs = nlohmann::json::array();
    for (const RunOutcome& r : result.runs) {
        nlohmann::json rj;
        rj["seed"] = r.seed;
        rj["status"] = r.ok ? "ok" : "failed";
        if (r.ok) {
            rj["final_value"] = r.final_value;
            rj["total_sim_time"] = r.total_sim_time;
        } else {
            rj["error"] = r.error;
        }
        runs.push_back(std::move(rj));
    }
    j["runs"] = std::move(runs);
    j["stats"] = {{"best", result.stats.best},
                  {"worst", result.stats.worst},
                  {"mean", result.stats.mean},
                  {"std", result.stats.std_dev},
                  {"mean_sim_time", result.stats.mean_sim_time},
                  {"total_sim_time", result.stats.total_sim_time}};
    return j;
}

std::string summary_to_csv(const ExperimentConfig& cfg, const ExperimentResult& result) {
    std::ostringstream out;
    out << "problem,variant,regime,batch,budget,repeats,best,worst,mean,std,"
           "mean_sim_time,total_sim_time\n";
    out << (cfg.custom_fom.has_value() ? cfg.custom_fom->name : cfg.problem) << ","
        << variant_name(cfg.variant) << "," << regime_name(cfg.regime) << ","
        << (cfg.regime == Regime::Sequential ? 1 : cfg.batch) << "," << cfg.budget << ","
        << cfg.repeats << "," << format_double(result.stats.best) << ","
        << format_double(result.stats.worst) << "," << format_double(result.stats.mean) << ","
        << format_double(result.stats.std_dev) << ","
        << format_double(result.stats.mean_sim_time) << ","
        << format_double(result.stats.total_sim_time) << "\n";
    return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Problem problem = cfg.resolve_problem();
    std::filesystem::create_directories(cfg.out_dir);

    std::vector<RunOutcome> outcomes(static_cast<std::size_t>(cfg.repeats));
    std::vector<std::optional<RunRecord>> records(static_cast<std::size_t>(cfg.repeats));

    int n_threads = cfg.threads > 0 ? cfg.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, cfg.repeats));
    // the threaded executor already fans out one thread per worker
    if (cfg.executor == "threads") n_threads = 1;

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= cfg.repeats) return;
            RunOutcome& out = outcomes[static_cast<std::size_t>(i)];
            out.seed = run_seed(cfg.base_seed, i);
            try {
                RunRecord rec = execute_one(cfg, problem, out.seed);
                out.ok = true;
                out.final_value = rec.best_value();
                out.total_sim_time = rec.total_sim_time;
                records[static_cast<std::size_t>(i)] = std::move(rec);
            } catch (const std::exception& e) {
                out.ok = false;
                out.error = e.what();
            }
        }
    };

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    ExperimentResult result;
    result.runs = std::move(outcomes);
    result.stats = summarize(result.runs);
    result.all_succeeded = true;
    for (const RunOutcome& r : result.runs) result.all_succeeded &= r.ok;

    const std::filesystem::path dir(cfg.out_dir);
    for (int i = 0; i < cfg.repeats; ++i) {
        const auto& rec = records[static_cast<std::size_t>(i)];
        if (!rec.has_value()) continue;
        save_run_record(*rec, dir / ("run_" + std::to_string(i) + ".jsonl"));
        save_curve_csv(*rec, dir / ("curve_" + std::to_string(i) + ".csv"));
    }
    {
        std::ofstream out(dir / "summary.json");
        out << summary_to_json(cfg, result).dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "summary.csv");
        out << summary_to_csv(cfg, result);
    }
    return result;
}

std::string ComparisonReport::to_text() const {
    std::ostringstream out;
    out << "problem: " << problem << "  budget: " << budget << "\n";
    out << std::left << std::setw(22) << "label" << std::right << std::setw(14) << "mean"
        << std::setw(14) << "best" << std::setw(14) << "worst" << std::setw(12) << "std"
        << std::setw(14) << "mean_time" << "\n";
    for (const ComparisonRow& r : rows) {
        out << std::left << std::setw(22) << r.label << std::right << std::fixed
            << std::setprecision(4) << std::setw(14) << r.mean_final << std::setw(14) << r.best
            << std::setw(14) << r.worst << std::setw(12) << r.std_dev << std::setw(14)
            << r.mean_time << "\n";
    }
    out << "\ntime ratios (row/column):\n";
    out << std::left << std::setw(22) << "";
    for (const ComparisonRow& r : rows) out << std::right << std::setw(14) << r.label;
    out << "\n";
    for (Eigen::Index i = 0; i < time_ratios.rows(); ++i) {
        out << std::left << std::setw(22) << rows[static_cast<std::size_t>(i)].label;
        for (Eigen::Index j = 0; j < time_ratios.cols(); ++j)
            out << std::right << std::fixed << std::setprecision(4) << std::setw(14)
                << time_ratios(i, j);
        out << "\n";
    }
    return out.str();
}

std::string ComparisonReport::to_csv() const {
    std::ostringstream out;
    out << "label,mean,best,worst,std,mean_time";
    for (const ComparisonRow& r : rows) out << ",ratio_vs_" << r.label;
    out << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ComparisonRow& r = rows[i];
        out << r.label << "," << format_double(r.mean_final) << "," << format_double(r.best)
            << "," << format_double(r.worst) << "," << format_double(r.std_dev) << ","
            << format_double(r.mean_time);
        for (std::size_t j = 0; j < rows.size(); ++j)
            out << "," << format_double(time_ratios(static_cast<Eigen::Index>(i),
                                                    static_cast<Eigen::Index>(j)));
        out << "\n";
    }
    return out.str();
}

ComparisonReport compare_report(const std::vector<nlohmann::json>& summaries) {
    if (summaries.empty()) throw std::invalid_argument("compare_report: no summaries");
    ComparisonReport rep;
    rep.problem = summaries.front().at("problem").get<std::string>();
    rep.budget = summaries.front().at("budget").get<int>();
    for (const nlohmann::json& s : summaries) {
        if (s.at("problem").get<std::string>() != rep.problem ||
            s.at("budget").get<int>() != rep.budget)
            throw std::invalid_argument("compare_report: summaries must share problem and budget");
        ComparisonRow row;
        row.label = s.at("variant").get<std::string>() + "-" +
                    s.at("regime").get<std::string>() + "-B" +
                    std::to_string(s.at("batch").get<int>());
        const nlohmann::json& st = s.at("stats");
        row.mean_final = st.at("mean").get<double>();
        row.best = st.at("best").get<double>();
        row.worst = st.at("worst").get<double>();
        row.std_dev = st.at("std").get<double>();
        row.mean_time = st.at("mean_sim_time").get<double>();
        rep.rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rep.rows.size());
    rep.time_ratios.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            rep.time_ratios(i, j) = rep.rows[static_cast<std::size_t>(i)].mean_time /
                                    rep.rows[static_cast<std::size_t>(j)].mean_time;
    return rep;
}

} // namespace easybo
