#ifndef EASYBO_ERRORS_HPP
#define EASYBO_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace easybo {

/// Covariance factorization failed even after jitter escalation.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::vector<double> jitters)
        : std::runtime_error(what), attempted_jitters(std::move(jitters)) {}

    std::vector<double> attempted_jitters;
};

/// The inner acquisition maximization saw no finite value anywhere.
class OptimizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace easybo

#endif
