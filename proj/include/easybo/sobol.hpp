#ifndef EASYBO_SOBOL_HPP
#define EASYBO_SOBOL_HPP

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace easybo {

/// Sobol low-discrepancy sequence (direction numbers for up to 16 dimensions)
/// with a seeded digital shift so different seeds give different, equally
/// well-spread point sets. Used for initial designs and acquisition screening.
class SobolSequence {
public:
    static constexpr int kMaxDim = 16;

    SobolSequence(int dim, std::uint64_t seed);

    /// Point with the given index (0-based) in [0,1)^dim. Stateless in the
    /// index so callers can draw deterministically out of order.
    Eigen::VectorXd point(std::uint64_t index) const;

    /// Next point of the stream (index advances by one per call).
    Eigen::VectorXd next() { return point(counter_++); }

    int dim() const { return dim_; }

private:
    int dim_;
    std::uint64_t counter_ = 0;
    std::vector<std::uint32_t> shift_;                 // per-dimension digital shift
    std::vector<std::vector<std::uint32_t>> dirs_;     // per-dimension direction vectors
};

} // namespace easybo

#endif
