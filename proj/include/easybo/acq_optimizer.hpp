#ifndef EASYBO_ACQ_OPTIMIZER_HPP
#define EASYBO_ACQ_OPTIMIZER_HPP

#include "easybo/acquisition.hpp"
#include "easybo/domain.hpp"

#include <cstdint>

namespace easybo {

/// Budget for one inner maximization: Sobol screening followed by
/// derivative-free local refinement from the best screening points.
struct InnerOptConfig {
    int n_random = 2048;
    int n_local_starts = 10;
    int local_max_iters = 50;
    std::uint64_t seed = 0;

    void validate() const;
};

struct InnerOptResult {
    DesignPoint point;
    double value = 0.0;
};

/// Maximize an acquisition over the domain. Deterministic given the seed;
/// the result value is never below the best screening value, and the point is
/// clamped into the domain. Throws OptimizationError when every screening
/// evaluation is non-finite.
InnerOptResult maximize_acq(const AcquisitionFunction& f, const BoxDomain& domain,
                            const InnerOptConfig& cfg);

} // namespace easybo

#endif
