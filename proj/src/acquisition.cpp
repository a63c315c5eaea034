#include "easybo/acquisition.hpp"

#include <cmath>

namespace easybo {

namespace {

constexpr double kSentinel = 1e300;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.7071067811865475244); }

} // namespace

void AcquisitionSpec::validate() const {
    if (lambda <= 0.0) throw std::invalid_argument("AcquisitionSpec: lambda must be positive");
    if (weight < 0.0 || weight > 1.0)
        throw std::invalid_argument("AcquisitionSpec: weight must be in [0,1]");
    if (kind == AcqKind::Phcbo) {
        if (hc_distance < 0.0 || hc_scale < 0.0)
            throw std::invalid_argument("AcquisitionSpec: hc parameters must be nonnegative");
        if (history_window < 1)
            throw std::invalid_argument("AcquisitionSpec: history window must be positive");
    }
    if ((kind == AcqKind::Ucb || kind == AcqKind::Lcb) && kappa < 0.0)
        throw std::invalid_argument("AcquisitionSpec: kappa must be nonnegative");
}

double acq_ucb(const GpModel& model, const DesignPoint& q, double kappa) {
    const Posterior p = model.posterior(q);
    return p.mean + kappa * p.stddev;
}

double acq_lcb(const GpModel& model, const DesignPoint& q, double kappa) {
    const Posterior p = model.posterior(q);
    return p.mean - kappa * p.stddev;
}

double acq_ei(const GpModel& model, const DesignPoint& q, double best) {
    const Posterior p = model.posterior(q);
    if (p.stddev <= 0.0) return std::max(p.mean - best, 0.0);
    const double z = (p.mean - best) / p.stddev;
    return std::max((p.mean - best) * normal_cdf(z) + p.stddev * normal_pdf(z), 0.0);
}

double acq_pbo(const GpModel& model, const DesignPoint& q, double w) {
    const Posterior p = model.posterior(q);
    return (1.0 - w) * p.mean + w * p.stddev;
}

double penalty_hc(const DesignPoint& q, std::span<const DesignPoint> history,
                  double d, double n_hc) {
    if (d <= 0.0 || n_hc <= 0.0)
        throw std::invalid_argument("penalty_hc: d and n_hc must be positive");
    if (history.empty()) return 0.0;
    double sum = 0.0;
    for (const DesignPoint& h : history) {
        const double dist = (q.u - h.u).norm();
        if (dist == 0.0) return kSentinel;
        sum += std::pow(d / dist, 10.0);
    }
    const double exponent = sum / 5.0;
    if (exponent > 600.0) return kSentinel;
    return std::min(n_hc * std::exp(exponent), kSentinel);
}

double acq_phcbo(const GpModel& model, const DesignPoint& q, double w,
                 std::span<const DesignPoint> history, const AcquisitionSpec& spec) {
    const double base = acq_pbo(model, q, w);
    if (history.empty()) return base;
    return base - penalty_hc(q, history, spec.hc_distance, spec.hc_scale);
}

double sample_weight(double lambda, Rng& rng) {
    if (lambda <= 0.0) throw std::invalid_argument("sample_weight: lambda must be positive");
    const double kappa = rng.uniform(0.0, lambda);
    return kappa / (kappa + 1.0);
}

double acq_easybo(const GpModel& model, std::span<const DesignPoint> pending,
                  const DesignPoint& q, double w) {
    if (pending.empty()) return acq_pbo(model, q, w);
    const GpModel hal = hallucinate(model, pending);
    return (1.0 - w) * model.posterior(q).mean + w * hal.posterior(q).stddev;
}

double default_hc_distance(int dim) { return 0.05 * std::sqrt(static_cast<double>(dim)); }

double default_hc_scale(double obs_min, double obs_max) {
    return 10.0 * std::max(obs_max - obs_min, 1.0);
}

void AcquisitionFunction::values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const {
    out.resize(queries.rows());
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        out[i] = value(DesignPoint(queries.row(i).transpose()));
    }
}

double UcbAcquisition::value(const DesignPoint& q) const { return acq_ucb(model_, q, kappa_); }

void UcbAcquisition::values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const {
    Eigen::VectorXd mean, sd;
    model_.posterior_batch(queries, mean, sd);
    out = mean + kappa_ * sd;
}

double EiAcquisition::value(const DesignPoint& q) const { return acq_ei(model_, q, best_); }

void EiAcquisition::values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const {
    Eigen::VectorXd mean, sd;
    model_.posterior_batch(queries, mean, sd);
    out.resize(queries.rows());
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        if (sd[i] <= 0.0) {
            out[i] = std::max(mean[i] - best_, 0.0);
        } else {
            const double z = (mean[i] - best_) / sd[i];
            out[i] = std::max((mean[i] - best_) * normal_cdf(z) + sd[i] * normal_pdf(z), 0.0);
        }
    }
}

double PboAcquisition::value(const DesignPoint& q) const { return acq_pbo(model_, q, w_); }

void PboAcquisition::values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const {
    Eigen::VectorXd mean, sd;
    model_.posterior_batch(queries, mean, sd);
    out = (1.0 - w_) * mean + w_ * sd;
}

double PhcboAcquisition::value(const DesignPoint& q) const {
    const double base = acq_pbo(model_, q, w_);
    if (history_.empty()) return base;
    return base - penalty_hc(q, history_, hc_distance_, hc_scale_);
}

void PhcboAcquisition::values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const {
    Eigen::VectorXd mean, sd;
    model_.posterior_batch(queries, mean, sd);
    out.resize(queries.rows());
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        out[i] = (1.0 - w_) * mean[i] + w_ * sd[i];
        if (!history_.empty()) {
            out[i] -= penalty_hc(DesignPoint(queries.row(i).transpose()), history_,
                                 hc_distance_, hc_scale_);
        }
    }
}

EasyBoAcquisition::EasyBoAcquisition(const GpModel& model, std::span<const DesignPoint> pending,
                                     double w)
    : model_(model), hallucinated_(hallucinate(model, pending)), w_(w) {}

double EasyBoAcquisition::value(const DesignPoint& q) const {
    return (1.0 - w_) * model_.posterior(q).mean + w_ * hallucinated_.posterior(q).stddev;
}

void EasyBoAcquisition::values(const Eigen::MatrixXd& queries, Eigen::VectorXd& out) const {
    Eigen::VectorXd mean, sd_base, mean_hal, sd;
    model_.posterior_batch(queries, mean, sd_base);
    hallucinated_.posterior_batch(queries, mean_hal, sd);
    out = (1.0 - w_) * mean + w_ * sd;
}

} // namespace easybo
