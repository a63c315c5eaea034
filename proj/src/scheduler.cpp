#include "easybo/scheduler.hpp"
#include "easybo/rng.hpp"
#include "easybo/sobol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace easybo {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Ei: return "EI";
        case Variant::Lcb: return "LCB";
        case Variant::Pbo: return "PBO";
        case Variant::Phcbo: return "PHCBO";
        case Variant::EasyBo: return "EASYBO";
        case Variant::EasyBoS: return "EASYBO_S";
        case Variant::EasyBoA: return "EASYBO_A";
        case Variant::EasyBoSp: return "EASYBO_SP";
    }
    throw std::logic_error("variant_name: unreachable");
}

Variant variant_from_name(const std::string& name) {
    if (name == "EI") return Variant::Ei;
    if (name == "LCB") return Variant::Lcb;
    if (name == "PBO") return Variant::Pbo;
    if (name == "PHCBO") return Variant::Phcbo;
    if (name == "EASYBO") return Variant::EasyBo;
    if (name == "EASYBO_S") return Variant::EasyBoS;
    if (name == "EASYBO_A") return Variant::EasyBoA;
    if (name == "EASYBO_SP") return Variant::EasyBoSp;
    throw std::invalid_argument("unknown variant: " + name);
}

double RunRecord::best_value() const {
    double best = -std::numeric_limits<double>::infinity();
    for (const RunEvent& e : events) best = std::max(best, e.observation);
    return best;
}

namespace {

/// Streams the initial design; falls back to further low-discrepancy points
/// if the model cannot be built yet (degenerate warm-up with n_init == B).
class InitStream {
public:
    InitStream(int dim, InitDesign kind, std::uint64_t seed)
        : kind_(kind), sobol_(dim, seed), rng_(derive_seed(seed, "uniform-init")), dim_(dim) {}

    DesignPoint next() {
        if (kind_ == InitDesign::Sobol) return DesignPoint(sobol_.next());
        Eigen::VectorXd u(dim_);
        for (int i = 0; i < dim_; ++i) u[i] = rng_.uniform01();
        return DesignPoint(u);
    }

private:
    InitDesign kind_;
    SobolSequence sobol_;
    Rng rng_;
    int dim_;
};

/// Shared model state: full refits on a schedule, cheap reconditioning on
/// every new observation in between.
class SurrogateState {
public:
    SurrogateState(const BoxDomain& domain, const RunConfig& cfg)
        : domain_(domain), cfg_(cfg) {}

    const GpModel& update(const Dataset& data) {
        if (!model_.has_value() || completions_since_fit_ >= cfg_.refit_every) {
            GpFitOptions options = cfg_.fit_options;
            if (last_fit_.has_value()) options.warm_start = last_fit_;
            model_ = fit(data, domain_, derive_seed(cfg_.seed, "gp-fit-round", fit_counter_++),
                         options);
            last_fit_ = model_->hyperparams();
            completions_since_fit_ = 0;
        } else {
            model_ = GpModel::make(data, *last_fit_);
        }
        return *model_;
    }

    void on_completions(int count) { completions_since_fit_ += count; }

private:
    const BoxDomain& domain_;
    const RunConfig& cfg_;
    std::optional<GpModel> model_;
    std::optional<KernelHyperparams> last_fit_;
    int completions_since_fit_ = 0;
    std::uint64_t fit_counter_ = 0;
};

struct Suggestion {
    DesignPoint point;
    std::optional<double> weight;
};

AcquisitionSpec resolve_acq(const AcquisitionSpec& base, int dim, const Dataset& data) {
    AcquisitionSpec spec = base;
    if (spec.hc_distance <= 0.0) spec.hc_distance = default_hc_distance(dim);
    if (spec.hc_scale <= 0.0) {
        const auto y = data.observations_vector();
        spec.hc_scale = default_hc_scale(y.minCoeff(), y.maxCoeff());
    }
    return spec;
}

class Engine {
public:
    Engine(const Problem& problem, const RunConfig& cfg, std::string regime)
        : problem_(problem), cfg_(cfg), regime_(std::move(regime)),
          init_(problem.domain.dim(), cfg.init_design, derive_seed(cfg.seed, "init-design")),
          weight_rng_(derive_seed(cfg.seed, "weights")),
          duration_seed_(derive_seed(cfg.seed, "durations")),
          surrogate_(problem.domain, cfg) {
        record_.seed = cfg.seed;
        record_.regime = regime_;
        record_.variant = variant_name(cfg.variant);
        record_.batch = cfg.batch;
    }

    RunRecord record() && { return std::move(record_); }

protected:
    struct Job {
        DesignPoint point;
        Eigen::VectorXd raw;
        double observation = 0.0;
        double issue_time = 0.0;
        double complete_time = 0.0;
        int worker = 0;
        std::optional<double> weight;
    };

    Job make_job(const DesignPoint& x, std::optional<double> weight, double now, int worker) {
        Job job;
        job.point = x;
        job.raw = denormalize(problem_.domain, x);
        job.observation = problem_.objective(job.raw);
        job.issue_time = now;
        job.complete_time = now + problem_.duration_of(issue_index_, x, duration_seed_);
        job.worker = worker;
        job.weight = weight;
        ++issue_index_;
        return job;
    }

    void complete(const Job& job) {
        data_.add(job.point, job.observation);
        surrogate_.on_completions(1);
        RunEvent e;
        e.issue_time = job.issue_time;
        e.complete_time = job.complete_time;
        e.worker = job.worker;
        e.point = job.point;
        e.point_raw = job.raw;
        e.observation = job.observation;
        e.regime = regime_;
        e.weight = job.weight;
        record_.events.push_back(std::move(e));
        best_so_far_ = std::max(best_so_far_, job.observation);
        record_.best_curve.emplace_back(job.complete_time, best_so_far_);
        record_.total_sim_time = std::max(record_.total_sim_time, job.complete_time);
    }

    double sample_w() { return sample_weight(cfg_.acq.lambda, weight_rng_); }

    InnerOptConfig inner_config() {
        InnerOptConfig io = cfg_.inner;
        io.seed = derive_seed(cfg_.seed, "acq-opt", suggest_counter_++);
        return io;
    }

    const Problem& problem_;
    const RunConfig& cfg_;
    std::string regime_;
    InitStream init_;
    Rng weight_rng_;
    std::uint64_t duration_seed_;
    SurrogateState surrogate_;
    Dataset data_;
    RunRecord record_;
    std::size_t issue_index_ = 0;
    std::uint64_t suggest_counter_ = 0;
    double best_so_far_ = -std::numeric_limits<double>::infinity();
};

class AsyncEngine : public Engine {
public:
    using Engine::Engine;

    void run() {
        const int b = cfg_.batch;
        WorkerPool<Job> pool(b);
        SimClock clock;
        int issued = 0;
        int completed = 0;
        int init_left = cfg_.n_init;

        for (int w = 0; w < b && issued < cfg_.budget; ++w) {
            pool.issue(w, make_job(init_.next(), std::nullopt, 0.0, w));
            --init_left;
            ++issued;
        }

        while (completed < cfg_.budget) {
            const int w = pool.earliest();
            if (w < 0) throw std::logic_error("async engine: no job in flight");
            const Job job = pool.take(w);
            clock.advance_to(job.complete_time);
            complete(job);
            ++completed;

            if (issued < cfg_.budget) {
                Suggestion s = next_point(pool, init_left);
                pool.issue(w, make_job(s.point, s.weight, clock.now(), w));
                ++issued;
                if (pool.in_flight() != std::min(b, cfg_.budget - completed))
                    throw std::logic_error("async engine: pool not full while budget remains");
            }
        }
    }

private:
    Suggestion next_point(const WorkerPool<Job>& pool, int& init_left) {
        if (init_left > 0) {
            --init_left;
            return {init_.next(), std::nullopt};
        }
        if (data_.size() < 2) return {init_.next(), std::nullopt}; // degenerate warm-up

        const GpModel& model = surrogate_.update(data_);
        PendingSet pending;
        pool.for_each([&](const Job& j) { pending.push_back(j.point); });

        switch (cfg_.variant) {
            case Variant::Ei: {
                const double best = data_.observations_vector().maxCoeff();
                EiAcquisition f(model, best);
                return {maximize_acq(f, problem_.domain, inner_config()).point, std::nullopt};
            }
            case Variant::Lcb: {
                // Confidence-bound baseline: optimistic bound under the
                // maximization convention.
                UcbAcquisition f(model, cfg_.acq.kappa);
                return {maximize_acq(f, problem_.domain, inner_config()).point, std::nullopt};
            }
            case Variant::EasyBo: {
                const double w = sample_w();
                EasyBoAcquisition f(model, pending, w);
                return {maximize_acq(f, problem_.domain, inner_config()).point, w};
            }
            case Variant::EasyBoA: {
                const double w = sample_w();
                PboAcquisition f(model, w); // pending intentionally ignored
                return {maximize_acq(f, problem_.domain, inner_config()).point, w};
            }
            default:
                throw std::invalid_argument("variant not valid for asynchronous runs");
        }
    }
};

class SyncEngine : public Engine {
public:
    using Engine::Engine;

    void run() {
        const int b = cfg_.batch;
        slot_history_.resize(static_cast<std::size_t>(b));
        SimClock clock;
        int completed = 0;

        while (completed < cfg_.n_init) {
            const int k = std::min(b, cfg_.n_init - completed);
            std::vector<DesignPoint> picks;
            picks.reserve(static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i) picks.push_back(init_.next());
            clock.advance_to(
                run_round(picks, std::vector<std::optional<double>>(picks.size()), clock.now()));
            completed += k;
        }

        while (completed < cfg_.budget) {
            const int k = std::min(b, cfg_.budget - completed);
            const GpModel& model = surrogate_.update(data_);
            std::vector<DesignPoint> picks;
            std::vector<std::optional<double>> weights;
            select_batch(model, k, picks, weights);
            clock.advance_to(run_round(picks, weights, clock.now()));
            completed += k;
        }
    }

private:
    void select_batch(const GpModel& model, int k, std::vector<DesignPoint>& picks,
                      std::vector<std::optional<double>>& weights) {
        const int b = cfg_.batch;
        const AcquisitionSpec spec = resolve_acq(cfg_.acq, problem_.domain.dim(), data_);
        switch (cfg_.variant) {
            case Variant::Pbo: {
                for (int i = 0; i < k; ++i) {
                    const double w = static_cast<double>(i) / static_cast<double>(b - 1);
                    PboAcquisition f(model, w);
                    picks.push_back(maximize_acq(f, problem_.domain, inner_config()).point);
                    weights.emplace_back(w);
                }
                break;
            }
            case Variant::Phcbo: {
                for (int i = 0; i < k; ++i) {
                    const double w = static_cast<double>(i) / static_cast<double>(b - 1);
                    auto& hist = spec.hc_shared_history
                                     ? slot_history_.front()
                                     : slot_history_[static_cast<std::size_t>(i)];
                    PhcboAcquisition f(model, w, {hist.begin(), hist.end()},
                                       spec.hc_distance, spec.hc_scale);
                    DesignPoint p = maximize_acq(f, problem_.domain, inner_config()).point;
                    hist.push_back(p);
                    while (static_cast<int>(hist.size()) > spec.history_window) hist.pop_front();
                    picks.push_back(std::move(p));
                    weights.emplace_back(w);
                }
                break;
            }
            case Variant::EasyBoS: {
                // In-round picks share the posterior; only w varies.
                for (int i = 0; i < k; ++i) {
                    const double w = sample_w();
                    PboAcquisition f(model, w);
                    picks.push_back(maximize_acq(f, problem_.domain, inner_config()).point);
                    weights.emplace_back(w);
                }
                break;
            }
            case Variant::EasyBoSp: {
                // Kriging-believer between in-round picks.
                for (int i = 0; i < k; ++i) {
                    const double w = sample_w();
                    EasyBoAcquisition f(model, picks, w);
                    picks.push_back(maximize_acq(f, problem_.domain, inner_config()).point);
                    weights.emplace_back(w);
                }
                break;
            }
            default:
                throw std::invalid_argument("variant not valid for synchronous runs");
        }
    }

    /// Issue all picks at `now`; the round ends at the straggler's completion.
    double run_round(const std::vector<DesignPoint>& picks,
                     const std::vector<std::optional<double>>& weights, double now) {
        std::vector<Job> jobs;
        jobs.reserve(picks.size());
        for (std::size_t i = 0; i < picks.size(); ++i)
            jobs.push_back(make_job(picks[i], weights[i], now, static_cast<int>(i)));
        std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
            if (a.complete_time != b.complete_time) return a.complete_time < b.complete_time;
            return a.worker < b.worker;
        });
        for (const Job& j : jobs) complete(j);
        return jobs.back().complete_time;
    }

    std::vector<std::deque<DesignPoint>> slot_history_;
};

void validate_common(const Problem& problem, const RunConfig& cfg) {
    if (cfg.budget < cfg.n_init)
        throw std::invalid_argument("run: budget must be >= n_init");
    if (cfg.n_init < 1) throw std::invalid_argument("run: n_init must be >= 1");
    if (cfg.budget > cfg.n_init && cfg.n_init < 2)
        throw std::invalid_argument("run: model-driven runs need n_init >= 2");
    if (cfg.refit_every < 1) throw std::invalid_argument("run: refit_every must be >= 1");
    cfg.acq.validate();
    cfg.inner.validate();
    (void)problem;
}

} // namespace

RunRecord run_sequential(const Problem& problem, const RunConfig& cfg) {
    validate_common(problem, cfg);
    if (cfg.variant != Variant::Ei && cfg.variant != Variant::Lcb &&
        cfg.variant != Variant::EasyBo)
        throw std::invalid_argument("sequential regime supports EI, LCB and EASYBO");
    RunConfig c = cfg;
    c.batch = 1;
    AsyncEngine engine(problem, c, "sequential");
    engine.run();
    return std::move(engine).record();
}

RunRecord run_sync_batch(const Problem& problem, const RunConfig& cfg) {
    validate_common(problem, cfg);
    if (cfg.batch < 2) throw std::invalid_argument("sync regime needs batch >= 2");
    if (cfg.variant != Variant::Pbo && cfg.variant != Variant::Phcbo &&
        cfg.variant != Variant::EasyBoS && cfg.variant != Variant::EasyBoSp)
        throw std::invalid_argument("sync regime supports PBO, PHCBO, EASYBO_S and EASYBO_SP");
    SyncEngine engine(problem, cfg, "sync");
    engine.run();
    return std::move(engine).record();
}

RunRecord run_async(const Problem& problem, const RunConfig& cfg) {
    validate_common(problem, cfg);
    if (cfg.batch < 1) throw std::invalid_argument("async regime needs batch >= 1");
    if (cfg.n_init < cfg.batch)
        throw std::invalid_argument("async regime needs n_init >= batch to fill the pool");
    if (cfg.variant != Variant::EasyBo && cfg.variant != Variant::EasyBoA)
        throw std::invalid_argument("async regime supports EASYBO and EASYBO_A");
    AsyncEngine engine(problem, cfg, "async");
    engine.run();
    return std::move(engine).record();
}

namespace {

/// Real-thread demonstration executor. Workers evaluate concurrently and
/// sleep out their simulated duration; the driver consumes a serial completion
/// channel, so dataset updates, fits and suggestions stay single-threaded.
class ThreadedAsyncEngine : public Engine {
public:
    ThreadedAsyncEngine(const Problem& problem, const RunConfig& cfg, double scale)
        : Engine(problem, cfg, "async"), scale_(scale) {}

    void run() {
        const int b = cfg_.batch;
        mailboxes_ = std::vector<Mailbox>(static_cast<std::size_t>(b));
        pending_.assign(static_cast<std::size_t>(b), std::nullopt);
        start_ = std::chrono::steady_clock::now();

        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(b));
        for (int w = 0; w < b; ++w) threads.emplace_back([this, w] { worker_loop(w); });

        int issued = 0;
        int completed = 0;
        int init_left = cfg_.n_init;
        for (int w = 0; w < b && issued < cfg_.budget; ++w) {
            assign(w, init_.next(), std::nullopt);
            --init_left;
            ++issued;
        }
        while (completed < cfg_.budget) {
            const Completion c = wait_completion();
            const PendingMeta meta = *pending_[static_cast<std::size_t>(c.worker)];
            pending_[static_cast<std::size_t>(c.worker)] = std::nullopt;

            data_.add(meta.point, c.observation);
            surrogate_.on_completions(1);
            RunEvent e;
            e.issue_time = meta.issue_sim;
            e.complete_time = c.complete_sim;
            e.worker = c.worker;
            e.point = meta.point;
            e.point_raw = denormalize(problem_.domain, meta.point);
            e.observation = c.observation;
            e.regime = regime_;
            e.weight = meta.weight;
            record_.events.push_back(std::move(e));
            best_so_far_ = std::max(best_so_far_, c.observation);
            record_.best_curve.emplace_back(c.complete_sim, best_so_far_);
            record_.total_sim_time = std::max(record_.total_sim_time, c.complete_sim);
            ++completed;

            if (issued < cfg_.budget) {
                DesignPoint next;
                std::optional<double> weight;
                if (init_left > 0) {
                    --init_left;
                    next = init_.next();
                } else if (data_.size() < 2) {
                    next = init_.next();
                } else {
                    const GpModel& model = surrogate_.update(data_);
                    PendingSet busy;
                    for (const auto& p : pending_)
                        if (p) busy.push_back(p->point);
                    if (cfg_.variant == Variant::EasyBo) {
                        const double w = sample_w();
                        EasyBoAcquisition f(model, busy, w);
                        next = maximize_acq(f, problem_.domain, inner_config()).point;
                        weight = w;
                    } else {
                        const double w = sample_w();
                        PboAcquisition f(model, w);
                        next = maximize_acq(f, problem_.domain, inner_config()).point;
                        weight = w;
                    }
                }
                assign(c.worker, next, weight);
                ++issued;
            }
        }
        for (auto& m : mailboxes_) {
            std::lock_guard<std::mutex> lk(m.mutex);
            m.stop = true;
            m.cv.notify_one();
        }
        for (std::thread& t : threads) t.join();
    }

private:
    struct Assignment {
        DesignPoint point;
        Eigen::VectorXd raw;
        double duration_sim = 0.0;
    };
    struct Mailbox {
        std::mutex mutex;
        std::condition_variable cv;
        std::optional<Assignment> box;
        bool stop = false;
    };
    struct Completion {
        int worker = 0;
        double observation = 0.0;
        double complete_sim = 0.0;
    };
    struct PendingMeta {
        DesignPoint point;
        double issue_sim = 0.0;
        std::optional<double> weight;
    };

    double sim_now() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count() /
               scale_;
    }

    void assign(int worker, const DesignPoint& x, std::optional<double> weight) {
        Assignment a;
        a.point = x;
        a.raw = denormalize(problem_.domain, x);
        a.duration_sim = problem_.duration_of(issue_index_, x, duration_seed_);
        ++issue_index_;
        pending_[static_cast<std::size_t>(worker)] = PendingMeta{x, sim_now(), weight};
        Mailbox& m = mailboxes_[static_cast<std::size_t>(worker)];
        {
            std::lock_guard<std::mutex> lk(m.mutex);
            m.box = std::move(a);
        }
        m.cv.notify_one();
    }

    Completion wait_completion() {
        std::unique_lock<std::mutex> lk(channel_mutex_);
        channel_cv_.wait(lk, [this] { return !channel_.empty(); });
        Completion c = channel_.front();
        channel_.pop_front();
        return c;
    }

    void worker_loop(int worker) {
        Mailbox& m = mailboxes_[static_cast<std::size_t>(worker)];
        for (;;) {
            Assignment a;
            {
                std::unique_lock<std::mutex> lk(m.mutex);
                m.cv.wait(lk, [&m] { return m.box.has_value() || m.stop; });
                if (m.stop && !m.box.has_value()) return;
                a = std::move(*m.box);
                m.box.reset();
            }
            const double y = problem_.objective(a.raw);
            std::this_thread::sleep_for(std::chrono::duration<double>(a.duration_sim * scale_));
            {
                std::lock_guard<std::mutex> lk(channel_mutex_);
                channel_.push_back(Completion{worker, y, sim_now()});
            }
            channel_cv_.notify_one();
        }
    }

    double scale_;
    std::chrono::steady_clock::time_point start_;
    std::vector<Mailbox> mailboxes_;
    std::vector<std::optional<PendingMeta>> pending_;
    std::mutex channel_mutex_;
    std::condition_variable channel_cv_;
    std::deque<Completion> channel_;
};

} // namespace

RunRecord run_async_threads(const Problem& problem, const RunConfig& cfg,
                            double seconds_per_sim_second) {
    validate_common(problem, cfg);
    if (seconds_per_sim_second <= 0.0)
        throw std::invalid_argument("run_async_threads: time scale must be positive");
    if (cfg.batch < 1) throw std::invalid_argument("async regime needs batch >= 1");
    if (cfg.n_init < cfg.batch)
        throw std::invalid_argument("async regime needs n_init >= batch to fill the pool");
    if (cfg.variant != Variant::EasyBo && cfg.variant != Variant::EasyBoA)
        throw std::invalid_argument("async regime supports EASYBO and EASYBO_A");
    ThreadedAsyncEngine engine(problem, cfg, seconds_per_sim_second);
    engine.run();
    return std::move(engine).record();
}

} // namespace easybo
