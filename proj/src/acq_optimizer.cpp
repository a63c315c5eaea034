#include "easybo/acq_optimizer.hpp"
#include "easybo/errors.hpp"
#include "easybo/rng.hpp"
#include "easybo/sobol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace easybo {

void InnerOptConfig::validate() const {
    if (n_random < 1 || n_local_starts < 1 || local_max_iters < 1)
        throw std::invalid_argument("InnerOptConfig: all counts must be >= 1");
}

namespace {

/// Greedy compass search on the unit cube: one probe per coordinate per sweep,
/// with per-coordinate direction memory and step halving on stalled sweeps.
InnerOptResult refine(const AcquisitionFunction& f, Eigen::VectorXd x, double fx,
                      int max_sweeps) {
    const int d = static_cast<int>(x.size());
    Eigen::VectorXd sign = Eigen::VectorXd::Ones(d);
    double step = 0.1;
    for (int sweep = 0; sweep < max_sweeps && step >= 1e-8; ++sweep) {
        bool improved = false;
        for (int i = 0; i < d; ++i) {
            Eigen::VectorXd cand = x;
            cand[i] = std::clamp(cand[i] + sign[i] * step, 0.0, 1.0);
            const double fc = f.value(DesignPoint(cand));
            if (std::isfinite(fc) && fc > fx) {
                x = std::move(cand);
                fx = fc;
                improved = true;
            } else {
                sign[i] = -sign[i];
            }
        }
        if (!improved) step *= 0.5;
    }
    return {DesignPoint(std::move(x)), fx};
}

} // namespace

InnerOptResult maximize_acq(const AcquisitionFunction& f, const BoxDomain& domain,
                            const InnerOptConfig& cfg) {
    cfg.validate();
    const int d = domain.dim();

    SobolSequence sobol(d, derive_seed(cfg.seed, "acq-screen"));
    Eigen::MatrixXd candidates(cfg.n_random, d);
    for (int i = 0; i < cfg.n_random; ++i)
        candidates.row(i) = sobol.point(static_cast<std::uint64_t>(i)).transpose();

    Eigen::VectorXd vals;
    f.values(candidates, vals);

    std::vector<int> order(static_cast<std::size_t>(cfg.n_random));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double va = std::isfinite(vals[a]) ? vals[a] : -std::numeric_limits<double>::infinity();
        const double vb = std::isfinite(vals[b]) ? vals[b] : -std::numeric_limits<double>::infinity();
        if (va != vb) return va > vb;
        return a < b;
    });
    if (!std::isfinite(vals[order[0]]))
        throw OptimizationError("maximize_acq: no finite acquisition value in screening set");

    InnerOptResult best{DesignPoint(candidates.row(order[0]).transpose()), vals[order[0]]};
    const int starts = std::min(cfg.n_local_starts, cfg.n_random);
    for (int s = 0; s < starts; ++s) {
        const int idx = order[static_cast<std::size_t>(s)];
        if (!std::isfinite(vals[idx])) break;
        InnerOptResult r = refine(f, candidates.row(idx).transpose(), vals[idx],
                                  cfg.local_max_iters);
        if (r.value > best.value) best = std::move(r);
    }
    return best;
}

} // namespace easybo
