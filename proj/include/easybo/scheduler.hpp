#ifndef EASYBO_SCHEDULER_HPP
#define EASYBO_SCHEDULER_HPP

#include "easybo/acq_optimizer.hpp"
#include "easybo/acquisition.hpp"
#include "easybo/benchmarks.hpp"
#include "easybo/gp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace easybo {

enum class Variant { Ei, Lcb, Pbo, Phcbo, EasyBo, EasyBoS, EasyBoA, EasyBoSp };
enum class InitDesign { Sobol, Uniform };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

/// Monotone nondecreasing simulated time.
class SimClock {
public:
    double now() const { return now_; }
    void advance_to(double t) {
        if (t < now_) throw std::logic_error("SimClock: time went backwards");
        now_ = t;
    }

private:
    double now_ = 0.0;
};

/// Fixed pool of simulated workers, at most one job in flight per worker.
/// JobT must expose a `complete_time` field.
template <typename JobT>
class WorkerPool {
public:
    explicit WorkerPool(int size) : slots_(static_cast<std::size_t>(size)) {}

    int size() const { return static_cast<int>(slots_.size()); }

    int in_flight() const {
        int n = 0;
        for (const auto& s : slots_) n += s.has_value() ? 1 : 0;
        return n;
    }

    bool busy(int worker) const { return slots_[static_cast<std::size_t>(worker)].has_value(); }

    void issue(int worker, JobT job) {
        auto& slot = slots_[static_cast<std::size_t>(worker)];
        if (slot.has_value()) throw std::logic_error("WorkerPool: worker already busy");
        slot = std::move(job);
    }

    /// Worker whose job completes first; ties broken by lowest id. -1 if idle.
    int earliest() const {
        int w = -1;
        for (int i = 0; i < size(); ++i) {
            const auto& s = slots_[static_cast<std::size_t>(i)];
            if (!s) continue;
            if (w < 0 || s->complete_time < slots_[static_cast<std::size_t>(w)]->complete_time)
                w = i;
        }
        return w;
    }

    JobT take(int worker) {
        auto& slot = slots_[static_cast<std::size_t>(worker)];
        if (!slot.has_value()) throw std::logic_error("WorkerPool: worker is idle");
        JobT job = std::move(*slot);
        slot.reset();
        return job;
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& s : slots_)
            if (s) fn(*s);
    }

private:
    std::vector<std::optional<JobT>> slots_;
};

struct RunConfig {
    int budget = 150;
    int n_init = 20;
    int batch = 1;
    Variant variant = Variant::EasyBo;
    AcquisitionSpec acq;
    InnerOptConfig inner;
    GpFitOptions fit_options;
    /// Full hyperparameter refits happen every `refit_every` completions;
    /// in between, the posterior still conditions on all data.
    int refit_every = 1;
    InitDesign init_design = InitDesign::Sobol;
    std::uint64_t seed = 0;
};

struct RunEvent {
    double issue_time = 0.0;
    double complete_time = 0.0;
    int worker = 0;
    DesignPoint point;             // unit-cube coordinates
    Eigen::VectorXd point_raw;     // original units
    double observation = 0.0;
    std::string regime;
    std::optional<double> weight;  // absent for initial-design points and EI/LCB
};

/// Full trace of one optimization run on the simulated clock.
struct RunRecord {
    std::vector<RunEvent> events;  // completion order
    std::vector<std::pair<double, double>> best_curve;  // (sim time, best so far)
    double total_sim_time = 0.0;
    std::uint64_t seed = 0;
    std::string regime;
    std::string variant;
    int batch = 1;

    double best_value() const;
};

/// One evaluation at a time; the pool never holds more than one job.
RunRecord run_sequential(const Problem& problem, const RunConfig& cfg);

/// Batches of B with a barrier: a round costs the max of its durations.
RunRecord run_sync_batch(const Problem& problem, const RunConfig& cfg);

/// Issue-on-idle: whenever a worker completes, refit on the observed data,
/// hallucinate the still-pending points (variant-dependent), maximize the
/// acquisition and hand the new point to the idle worker.
RunRecord run_async(const Problem& problem, const RunConfig& cfg);

/// Same algorithm on real worker threads, for demonstration: durations are
/// realized as sleeps of duration * seconds_per_sim_second and event times are
/// measured wall clock mapped back to simulated seconds. Completions funnel
/// through a serial channel, so model updates never run concurrently.
/// Timing-dependent, hence not byte-reproducible like the simulated engine.
RunRecord run_async_threads(const Problem& problem, const RunConfig& cfg,
                            double seconds_per_sim_second = 1e-3);

} // namespace easybo

#endif
