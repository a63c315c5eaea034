#ifndef EASYBO_GP_HPP
#define EASYBO_GP_HPP

#include "easybo/domain.hpp"
#include "easybo/errors.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

namespace easybo {

/// SE-ARD kernel parameters plus observation noise, all on the normalized
/// scale (inputs in the unit cube, outputs standardized).
struct KernelHyperparams {
    Eigen::VectorXd length_scales;
    double signal_variance = 1.0;
    double noise_variance = 1e-8;
};

/// k(a, b) = signal_variance * exp(-1/2 * sum_i (a_i - b_i)^2 / l_i^2)
double kernel_se(const DesignPoint& a, const DesignPoint& b, const KernelHyperparams& h);

/// Cross-kernel matrix between row-wise point sets A (n x d) and B (m x d).
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const KernelHyperparams& h);

/// Lower Cholesky factor of a symmetric matrix, escalating diagonal jitter on
/// failure (start 1e-10, x10 per retry, 6 retries). Throws NumericalError with
/// the attempted jitter levels if all retries fail.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& k, double* jitter_used = nullptr);

struct Posterior {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Exact GP regressor. Immutable once constructed; safe to share across
/// threads. Inputs are unit-cube coordinates, observations are standardized
/// internally and posteriors are mapped back to the original output scale.
class GpModel {
public:
    /// Condition on `data` with fixed hyperparameters, standardizing outputs
    /// against the current observations.
    static GpModel make(Dataset data, KernelHyperparams h);

    /// Same, but with externally fixed output standardization. Used when a
    /// derived model must agree exactly with its parent's posterior geometry
    /// (see hallucinate()).
    static GpModel make_with_scale(Dataset data, KernelHyperparams h,
                                   double output_shift, double output_scale);

    Posterior posterior(const DesignPoint& q) const;

    /// Vectorized posterior over query rows (m x d), for screening phases.
    void posterior_batch(const Eigen::MatrixXd& queries,
                         Eigen::VectorXd& mean, Eigen::VectorXd& stddev) const;

    const KernelHyperparams& hyperparams() const { return h_; }
    const Dataset& training() const { return data_; }
    const Eigen::MatrixXd& chol_factor() const { return chol_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    double output_shift() const { return shift_; }
    double output_scale() const { return scale_; }
    /// Observation-noise standard deviation on the original output scale.
    double noise_stddev() const { return std::sqrt(h_.noise_variance) * scale_; }
    int size() const { return data_.size(); }
    int dim() const { return data_.dim(); }

private:
    GpModel() = default;

    Dataset data_;
    KernelHyperparams h_;
    double shift_ = 0.0;
    double scale_ = 1.0;
    Eigen::MatrixXd chol_;   // lower factor of K = k(X,X) + noise*I (+jitter)
    Eigen::VectorXd alpha_;  // K^{-1} y_standardized
};

struct GpFitOptions {
    int n_starts = 8;
    int max_iterations = 50;
    double grad_tolerance = 1e-4;
    /// Optional previous hyperparameters; replaces one random start.
    std::optional<KernelHyperparams> warm_start;

    // Search box, log-uniform sampled (unit-cube / standardized units).
    double length_scale_min = 1e-2;
    double length_scale_max = 10.0;
    double signal_variance_min = 1e-2;
    double signal_variance_max = 1e2;
    double noise_variance_min = 1e-8;  // noise floor
    double noise_variance_max = 1e-1;
};

/// Maximize the log marginal likelihood with multi-start projected L-BFGS.
/// Deterministic given (data, seed, options). Requires at least two points.
GpModel fit(const Dataset& data, const BoxDomain& domain, std::uint64_t seed,
            const GpFitOptions& options = {});

/// Kriging-believer augmentation: condition on the pending points with their
/// current posterior means as pseudo-observations. Hyperparameters and output
/// standardization are reused, not refit, so the returned model's mean equals
/// the input's everywhere and its variance never exceeds it.
GpModel hallucinate(const GpModel& model, std::span<const DesignPoint> pending);

/// Log marginal likelihood of standardized observations, and its gradient with
/// respect to (log l_1..l_d, log signal_variance, log noise_variance).
struct LogMarginal {
    double value = 0.0;
    Eigen::VectorXd grad_log;
    bool ok = false;
};

LogMarginal log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y_std,
                                    const KernelHyperparams& h, bool with_gradient = true);

} // namespace easybo

#endif
