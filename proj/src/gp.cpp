#include "easybo/gp.hpp"
#include "easybo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace easybo {

namespace {

constexpr double kTwoPi = 6.283185307179586477;

void check_hyperparams(const KernelHyperparams& h) {
    if (h.length_scales.size() < 1 || (h.length_scales.array() <= 0.0).any())
        throw std::invalid_argument("KernelHyperparams: length scales must be positive");
    if (h.signal_variance <= 0.0)
        throw std::invalid_argument("KernelHyperparams: signal variance must be positive");
    if (h.noise_variance < 0.0)
        throw std::invalid_argument("KernelHyperparams: noise variance must be nonnegative");
}

/// mean and population stddev (floored) of the raw observations
std::pair<double, double> output_moments(const Eigen::VectorXd& y) {
    const double mean = y.size() > 0 ? y.mean() : 0.0;
    double var = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) var += (y[i] - mean) * (y[i] - mean);
    if (y.size() > 0) var /= static_cast<double>(y.size());
    return {mean, std::max(std::sqrt(var), 1e-12)};
}

} // namespace

double kernel_se(const DesignPoint& a, const DesignPoint& b, const KernelHyperparams& h) {
    check_hyperparams(h);
    if (a.dim() != b.dim() || a.dim() != h.length_scales.size())
        throw std::invalid_argument("kernel_se: dimension mismatch");
    const double r2 = ((a.u - b.u).cwiseQuotient(h.length_scales)).squaredNorm();
    return h.signal_variance * std::exp(-0.5 * r2);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const KernelHyperparams& h) {
    const Eigen::VectorXd inv_l = h.length_scales.cwiseInverse();
    const Eigen::MatrixXd as = a * inv_l.asDiagonal();
    const Eigen::MatrixXd bs = b * inv_l.asDiagonal();
    const Eigen::VectorXd ra = as.rowwise().squaredNorm();
    const Eigen::VectorXd rb = bs.rowwise().squaredNorm();
    Eigen::MatrixXd r2 = (-2.0 * as * bs.transpose());
    r2.colwise() += ra;
    r2.rowwise() += rb.transpose();
    return h.signal_variance * (-0.5 * r2.cwiseMax(0.0)).array().exp().matrix();
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& k, double* jitter_used) {
    std::vector<double> attempted;
    double jitter = 0.0;
    for (int attempt = 0; attempt <= 6; ++attempt) {
        Eigen::MatrixXd kj = k;
        if (jitter > 0.0) kj.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(kj);
        if (llt.info() == Eigen::Success) {
            if (jitter_used) *jitter_used = jitter;
            return llt.matrixL();
        }
        attempted.push_back(jitter);
        jitter = (jitter == 0.0) ? 1e-10 : jitter * 10.0;
    }
    std::ostringstream msg;
    msg << "covariance factorization failed; attempted jitters:";
    for (double j : attempted) msg << " " << j;
    throw NumericalError(msg.str(), std::move(attempted));
}

GpModel GpModel::make(Dataset data, KernelHyperparams h) {
    auto [shift, scale] = output_moments(data.observations_vector());
    return make_with_scale(std::move(data), std::move(h), shift, scale);
}

GpModel GpModel::make_with_scale(Dataset data, KernelHyperparams h,
                                 double output_shift, double output_scale) {
    check_hyperparams(h);
    if (data.size() < 1)
        throw std::invalid_argument("GpModel: needs at least one observation");
    if (h.length_scales.size() != data.dim())
        throw std::invalid_argument("GpModel: hyperparameter dimension mismatch");

    GpModel m;
    m.data_ = std::move(data);
    m.h_ = std::move(h);
    m.shift_ = output_shift;
    m.scale_ = output_scale;

    Eigen::MatrixXd k = kernel_matrix(m.data_.inputs(), m.data_.inputs(), m.h_);
    k.diagonal().array() += m.h_.noise_variance;
    m.chol_ = cholesky_with_jitter(k);

    const Eigen::VectorXd y_std = (m.data_.observations_vector().array() - m.shift_) / m.scale_;
    m.alpha_ = m.chol_.triangularView<Eigen::Lower>().solve(y_std);
    m.chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(m.alpha_);
    return m;
}

Posterior GpModel::posterior(const DesignPoint& q) const {
    if (q.dim() != dim())
        throw std::invalid_argument("GpModel::posterior: dimension mismatch");
    const Eigen::MatrixXd qrow = q.u.transpose();
    const Eigen::VectorXd kq = kernel_matrix(data_.inputs(), qrow, h_).col(0);
    const double mean_std = kq.dot(alpha_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kq);
    const double var_std = std::max(h_.signal_variance - v.squaredNorm(), 0.0);
    return {shift_ + scale_ * mean_std, scale_ * std::sqrt(var_std)};
}

void GpModel::posterior_batch(const Eigen::MatrixXd& queries,
                              Eigen::VectorXd& mean, Eigen::VectorXd& stddev) const {
    const Eigen::MatrixXd kq = kernel_matrix(data_.inputs(), queries, h_); // N x M
    mean = (shift_ + (scale_ * (kq.transpose() * alpha_)).array()).matrix();
    Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(kq);
    stddev = (h_.signal_variance - v.colwise().squaredNorm().transpose().array())
                 .max(0.0)
                 .sqrt() *
             scale_;
}

GpModel hallucinate(const GpModel& model, std::span<const DesignPoint> pending) {
    if (pending.empty()) return model;
    Dataset augmented = model.training();
    for (const DesignPoint& p : pending) {
        augmented.add(p, model.posterior(p).mean);
    }
    return GpModel::make_with_scale(std::move(augmented), model.hyperparams(),
                                    model.output_shift(), model.output_scale());
}

LogMarginal log_marginal_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y_std,
                                    const KernelHyperparams& h, bool with_gradient) {
    LogMarginal out;
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();

    Eigen::MatrixXd kf = kernel_matrix(x, x, h); // noiseless part
    Eigen::MatrixXd k = kf;
    k.diagonal().array() += h.noise_variance;

    Eigen::MatrixXd chol;
    try {
        chol = cholesky_with_jitter(k);
    } catch (const NumericalError&) {
        return out; // ok = false; caller treats as -inf
    }

    Eigen::VectorXd alpha = chol.triangularView<Eigen::Lower>().solve(y_std);
    const double quad = alpha.squaredNorm(); // y^T K^{-1} y
    chol.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha);

    const double log_det = 2.0 * chol.diagonal().array().log().sum();
    out.value = -0.5 * quad - 0.5 * log_det - 0.5 * static_cast<double>(n) * std::log(kTwoPi);
    out.ok = std::isfinite(out.value);
    if (!with_gradient || !out.ok) return out;

    // dL/dtheta_j = 1/2 tr((alpha alpha^T - K^{-1}) dK/dtheta_j)
    Eigen::MatrixXd kinv = Eigen::MatrixXd::Identity(n, n);
    chol.triangularView<Eigen::Lower>().solveInPlace(kinv);
    chol.triangularView<Eigen::Lower>().transpose().solveInPlace(kinv);
    const Eigen::MatrixXd w = alpha * alpha.transpose() - kinv;
    const Eigen::MatrixXd g = w.cwiseProduct(kf);

    out.grad_log.resize(d + 2);
    const Eigen::VectorXd row_sums = g.rowwise().sum();
    for (Eigen::Index i = 0; i < d; ++i) {
        const Eigen::VectorXd xi = x.col(i);
        const double s = xi.cwiseAbs2().dot(row_sums) - xi.dot(g * xi);
        out.grad_log[i] = s / (h.length_scales[i] * h.length_scales[i]);
    }
    out.grad_log[d] = 0.5 * g.sum();
    out.grad_log[d + 1] = 0.5 * h.noise_variance * w.trace();
    return out;
}

namespace {

struct FitBox {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

FitBox fit_box(int d, const GpFitOptions& o) {
    FitBox b;
    b.lo.resize(d + 2);
    b.hi.resize(d + 2);
    for (int i = 0; i < d; ++i) {
        b.lo[i] = std::log(o.length_scale_min);
        b.hi[i] = std::log(o.length_scale_max);
    }
    b.lo[d] = std::log(o.signal_variance_min);
    b.hi[d] = std::log(o.signal_variance_max);
    b.lo[d + 1] = std::log(o.noise_variance_min);
    b.hi[d + 1] = std::log(o.noise_variance_max);
    return b;
}

KernelHyperparams unpack(const Eigen::VectorXd& theta) {
    const Eigen::Index d = theta.size() - 2;
    KernelHyperparams h;
    h.length_scales = theta.head(d).array().exp();
    h.signal_variance = std::exp(theta[d]);
    h.noise_variance = std::exp(theta[d + 1]);
    return h;
}

Eigen::VectorXd clamp_to(const Eigen::VectorXd& v, const FitBox& b) {
    return v.cwiseMax(b.lo).cwiseMin(b.hi);
}

struct LocalResult {
    Eigen::VectorXd theta;
    double value = -std::numeric_limits<double>::infinity();
};

/// Projected L-BFGS ascent on the log marginal likelihood in log-parameter
/// space. Line searches evaluate the value only; the gradient is computed once
/// per accepted point. History is dropped whenever the box projection bends a
/// step.
LocalResult maximize_lml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y_std,
                         Eigen::VectorXd theta, const FitBox& box, const GpFitOptions& o) {
    constexpr int kHistory = 8;
    const auto eval_value = [&](const Eigen::VectorXd& t) {
        return log_marginal_likelihood(x, y_std, unpack(t), false);
    };
    const auto eval_grad = [&](const Eigen::VectorXd& t) {
        return log_marginal_likelihood(x, y_std, unpack(t), true);
    };

    theta = clamp_to(theta, box);
    LogMarginal cur = eval_grad(theta);
    if (!cur.ok) return {theta, -std::numeric_limits<double>::infinity()};

    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history; // (s, y) pairs
    int stalled = 0;
    for (int iter = 0; iter < o.max_iterations; ++iter) {
        // projected gradient for the stopping test
        Eigen::VectorXd pg = cur.grad_log;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            if ((theta[i] <= box.lo[i] && pg[i] < 0.0) || (theta[i] >= box.hi[i] && pg[i] > 0.0))
                pg[i] = 0.0;
        }
        if (pg.lpNorm<Eigen::Infinity>() < o.grad_tolerance) break;

        // two-loop recursion on the ascent direction
        Eigen::VectorXd dir = pg;
        std::vector<double> a(history.size());
        for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
            const auto& [s, y] = history[static_cast<std::size_t>(i)];
            const double rho = 1.0 / y.dot(s);
            a[static_cast<std::size_t>(i)] = rho * s.dot(dir);
            dir -= a[static_cast<std::size_t>(i)] * y;
        }
        if (!history.empty()) {
            const auto& [s, y] = history.back();
            dir *= s.dot(y) / y.squaredNorm();
        }
        for (std::size_t i = 0; i < history.size(); ++i) {
            const auto& [s, y] = history[i];
            const double rho = 1.0 / y.dot(s);
            const double b = rho * y.dot(dir);
            dir += (a[i] - b) * s;
        }
        if (dir.dot(pg) <= 0.0) dir = pg;
        // keep the raw-gradient first step from overshooting in log space
        if (history.empty()) {
            const double norm = dir.lpNorm<Eigen::Infinity>();
            if (norm > 1.0) dir /= norm;
        }

        // backtracking line search with box projection; the unit step usually
        // passes, so it is evaluated with its gradient up front
        double step = 1.0;
        bool moved = false;
        bool have_grad = false;
        Eigen::VectorXd theta_new;
        LogMarginal next;
        for (int ls = 0; ls < 15; ++ls) {
            theta_new = clamp_to(theta + step * dir, box);
            have_grad = (ls == 0);
            next = have_grad ? eval_grad(theta_new) : eval_value(theta_new);
            if (next.ok && next.value >= cur.value + 1e-4 * pg.dot(theta_new - theta)) {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved || (theta_new - theta).lpNorm<Eigen::Infinity>() < 1e-14) break;

        if (!have_grad) next = eval_grad(theta_new);
        if (!next.ok) break;
        if (next.value - cur.value < 1e-7 * (1.0 + std::abs(cur.value))) {
            if (++stalled >= 2) {
                theta = theta_new;
                cur = next;
                break;
            }
        } else {
            stalled = 0;
        }
        const Eigen::VectorXd s = theta_new - theta;
        const Eigen::VectorXd yv = cur.grad_log - next.grad_log; // ascent convention
        const bool projected = ((theta + step * dir) - theta_new).lpNorm<Eigen::Infinity>() > 0.0;
        if (projected) {
            history.clear();
        } else if (s.dot(yv) > 1e-12) {
            history.emplace_back(s, yv);
            if (history.size() > kHistory) history.pop_front();
        }
        theta = theta_new;
        cur = next;
    }
    return {theta, cur.value};
}

} // namespace

GpModel fit(const Dataset& data, const BoxDomain& domain, std::uint64_t seed,
            const GpFitOptions& options) {
    if (data.size() < 2)
        throw std::invalid_argument("fit: needs at least two observations");
    if (data.dim() != domain.dim())
        throw std::invalid_argument("fit: dataset/domain dimension mismatch");

    const int d = data.dim();
    const FitBox box = fit_box(d, options);
    auto [shift, scale] = output_moments(data.observations_vector());
    const Eigen::VectorXd y_std = (data.observations_vector().array() - shift) / scale;

    Rng rng(derive_seed(seed, "gp-fit"));
    std::vector<Eigen::VectorXd> starts;
    starts.reserve(static_cast<std::size_t>(options.n_starts));
    if (options.warm_start.has_value()) {
        const KernelHyperparams& w = *options.warm_start;
        Eigen::VectorXd t(d + 2);
        t.head(d) = w.length_scales.array().log();
        t[d] = std::log(w.signal_variance);
        t[d + 1] = std::log(w.noise_variance);
        starts.push_back(clamp_to(t, box));
    }
    while (static_cast<int>(starts.size()) < options.n_starts) {
        Eigen::VectorXd t(d + 2);
        for (int i = 0; i < d + 2; ++i) t[i] = rng.uniform(box.lo[i], box.hi[i]);
        starts.push_back(std::move(t));
    }

    LocalResult best;
    for (const Eigen::VectorXd& start : starts) {
        LocalResult r = maximize_lml(data.inputs(), y_std, start, box, options);
        if (r.value > best.value) best = std::move(r);
    }
    if (!std::isfinite(best.value))
        throw NumericalError("fit: all restarts failed to factorize", {});

    return GpModel::make_with_scale(data, unpack(best.theta), shift, scale);
}

} // namespace easybo
