#ifndef EASYBO_ACQUISITION_HPP
#define EASYBO_ACQUISITION_HPP

#include "easybo/gp.hpp"
#include "easybo/rng.hpp"

#include <memory>
#include <span>
#include <vector>

namespace easybo {

enum class AcqKind { Ucb, Lcb, Ei, Pbo, Phcbo, EasyBo };

/// In-flight query points awaiting evaluation; the schedulers keep at most
/// B-1 of them at any suggestion.
using PendingSet = std::vector<DesignPoint>;

/// Which acquisition to use and its parameters. hc_distance/hc_scale equal to
/// zero mean "use the data-driven default" (see default_hc_* below).
struct AcquisitionSpec {
    AcqKind kind = AcqKind::EasyBo;
    double kappa = 2.0;        // UCB/LCB
    double weight = 0.0;       // pBO/pHCBO slot weight, in [0,1]
    double lambda = 6.0;       // EasyBo: w = kappa/(kappa+1), kappa ~ U[0, lambda]
    double hc_distance = 0.0;  // pHCBO neighborhood radius d
    double hc_scale = 0.0;     // pHCBO penalty magnitude N_HC
    int history_window = 5;    // pHCBO history length
    /// pHCBO keeps one history per weight slot by default (the subscripting of
    /// the original formulation); set to share one history across slots.
    bool hc_shared_history = false;

    void validate() const;
};

double acq_ucb(const GpModel& model, const DesignPoint& q, double kappa);
double acq_lcb(const GpModel& model, const DesignPoint& q, double kappa);

/// Expected improvement over `best` (the current maximum observation).
double acq_ei(const GpModel& model, const DesignPoint& q, double best);

/// (1-w) * mean + w * stddev
double acq_pbo(const GpModel& model, const DesignPoint& q, double w);

/// High-coverage penalty around recent per-slot queries:
///   n_hc * (prod_j exp[(d / ||q - history_j||)^10])^(1/5)
/// Empty history carries no penalty (returns 0). A zero distance, or an
/// exponent large enough to overflow, yields the ordering-safe sentinel 1e300.
double penalty_hc(const DesignPoint& q, std::span<const DesignPoint> history,
                  double d, double n_hc);

double acq_phcbo(const GpModel& model, const DesignPoint& q, double w,
                 std::span<const DesignPoint> history, const AcquisitionSpec& spec);

/// Draw kappa ~ U[0, lambda] and return w = kappa/(kappa+1). The induced
/// density 1/(lambda (1-w)^2) concentrates near the exploratory end.
double sample_weight(double lambda, Rng& rng);

/// (1-w) * mean(model) + w * stddev(hallucinate(model, pending)).
/// Builds the hallucinated model internally; inner-loop callers should use
/// EasyBoAcquisition, which builds it once per suggestion.
double acq_easybo(const GpModel& model, std::span<const DesignPoint> pending,
                  const DesignPoint& q, double w);

/// Defaults for the pHCBO parameters the original description leaves open:
/// 5% of the unit-cube diagonal, and a penalty tied to the observation range.
double default_hc_distance(int dim);
double default_hc_scale(double obs_min, double obs_max);

/// Evaluator interface handed to the inner maximizer. values() exists so the
/// screening phase can run on the vectorized posterior path.
class AcquisitionFunction {
public:
    virtual ~AcquisitionFunction() = default;
    virtual double value(const DesignPoint& q) const = 0;
    virtual void values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const;
};

class UcbAcquisition final : public AcquisitionFunction {
public:
    UcbAcquisition(const GpModel& model, double kappa) : model_(model), kappa_(kappa) {}
    double value(const DesignPoint& q) const override;
    void values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const override;

private:
    const GpModel& model_;
    double kappa_;
};

class EiAcquisition final : public AcquisitionFunction {
public:
    EiAcquisition(const GpModel& model, double best) : model_(model), best_(best) {}
    double value(const DesignPoint& q) const override;
    void values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const override;

private:
    const GpModel& model_;
    double best_;
};

class PboAcquisition final : public AcquisitionFunction {
public:
    PboAcquisition(const GpModel& model, double w) : model_(model), w_(w) {}
    double value(const DesignPoint& q) const override;
    void values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const override;

private:
    const GpModel& model_;
    double w_;
};

class PhcboAcquisition final : public AcquisitionFunction {
public:
    PhcboAcquisition(const GpModel& model, double w, std::vector<DesignPoint> history,
                     double hc_distance, double hc_scale)
        : model_(model), w_(w), history_(std::move(history)),
          hc_distance_(hc_distance), hc_scale_(hc_scale) {}
    double value(const DesignPoint& q) const override;
    void values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const override;

private:
    const GpModel& model_;
    double w_;
    std::vector<DesignPoint> history_;
    double hc_distance_;
    double hc_scale_;
};

/// Mean from the observed-data model, uncertainty from the hallucinated one.
/// The hallucinated model is built once at construction and shared across all
/// evaluations of one suggestion's inner maximization.
class EasyBoAcquisition final : public AcquisitionFunction {
public:
    EasyBoAcquisition(const GpModel& model, std::span<const DesignPoint> pending, double w);
    double value(const DesignPoint& q) const override;
    void values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const override;

private:
    const GpModel& model_;
    GpModel hallucinated_;
    double w_;
};

} // namespace easybo

#endif
