#include "easybo/benchmarks.hpp"
#include "easybo/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace easybo {

namespace {

constexpr double kPi = 3.14159265358979323846;

double branin_value(double x1, double x2) {
    const double b = 5.1 / (4.0 * kPi * kPi);
    const double c = 5.0 / kPi;
    const double t = 1.0 / (8.0 * kPi);
    const double inner = x2 - b * x1 * x1 + c * x1 - 6.0;
    return inner * inner + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

double hartmann6_value(const Eigen::VectorXd& x) {
    static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
    static const double a[4][6] = {
        {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
        {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
        {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
        {17.0, 8.0, 0.05, 10.0, 0.1, 14.0},
    };
    static const double p[4][6] = {
        {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
        {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
        {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
        {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381},
    };
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (int j = 0; j < 6; ++j) {
            const double diff = x[j] - p[i][j];
            inner += a[i][j] * diff * diff;
        }
        sum += alpha[i] * std::exp(-inner);
    }
    return -sum;
}

double gaussian_bump(const Eigen::VectorXd& u, const double* center, const int* idx,
                     int count, double sharpness) {
    double s = 0.0;
    const int d = static_cast<int>(u.size());
    for (int j = 0; j < count; ++j) {
        const double diff = u[idx[j] % d] - center[j];
        s += diff * diff;
    }
    return std::exp(-sharpness * s);
}

// Smooth stand-ins for amplifier performance metrics; multimodal with
// interacting coordinate groups, ranges chosen so the weighted composite has
// meaningful dynamic range.
double gain_surrogate(const Eigen::VectorXd& u) {
    static const int idx[3] = {0, 1, 2};
    static const double c[3] = {0.7, 0.3, 0.55};
    const int d = static_cast<int>(u.size());
    return 45.0 + 25.0 * gaussian_bump(u, c, idx, 3, 3.0) +
           4.0 * std::cos(3.0 * kPi * u[0 % d]) * std::sin(2.0 * kPi * u[1 % d]);
}

double ugf_surrogate(const Eigen::VectorXd& u) {
    static const int idx[3] = {3, 4, 5};
    static const double c[3] = {0.25, 0.6, 0.45};
    const int d = static_cast<int>(u.size());
    return 0.4 + 2.4 * gaussian_bump(u, c, idx, 3, 4.0) *
                     (0.55 + 0.45 * std::sin(3.0 * kPi * u[4 % d] + 1.0));
}

double pm_surrogate(const Eigen::VectorXd& u) {
    static const int idx[3] = {6, 7, 8};
    static const double c[3] = {0.5, 0.65, 0.35};
    const int d = static_cast<int>(u.size());
    const double tilt = u[9 % d] * u[9 % d] * (1.0 - 0.5 * u[3 % d]);
    return 25.0 + 60.0 * gaussian_bump(u, c, idx, 3, 3.5) - 8.0 * tilt;
}

double neg_sphere(const Eigen::VectorXd& u) {
    return -(u.array() - 0.5).matrix().squaredNorm();
}

} // namespace

ConstantDuration::ConstantDuration(double seconds) : seconds_(seconds) {
    if (seconds <= 0.0) throw std::invalid_argument("ConstantDuration: must be positive");
}

double ConstantDuration::sample(std::size_t, const DesignPoint&, std::uint64_t) const {
    return seconds_;
}

LogNormalDuration::LogNormalDuration(double median, double sigma_log)
    : median_(median), sigma_(sigma_log) {
    if (median <= 0.0 || sigma_log < 0.0)
        throw std::invalid_argument("LogNormalDuration: median must be positive, sigma >= 0");
}

double LogNormalDuration::sample(std::size_t issue_index, const DesignPoint&,
                                 std::uint64_t seed) const {
    if (sigma_ == 0.0) return median_;
    Rng rng(derive_seed(seed, "duration-draw", issue_index));
    return median_ * std::exp(sigma_ * rng.normal01());
}

CoordinateDuration::CoordinateDuration(double median, int coordinate)
    : median_(median), coordinate_(coordinate) {
    if (median <= 0.0 || coordinate < 0)
        throw std::invalid_argument("CoordinateDuration: bad parameters");
}

double CoordinateDuration::sample(std::size_t, const DesignPoint& x, std::uint64_t) const {
    const int k = coordinate_ % x.dim();
    return median_ * (0.25 + 1.75 * x.u[k]);
}

TableDuration::TableDuration(std::vector<double> table) : table_(std::move(table)) {
    if (table_.empty()) throw std::invalid_argument("TableDuration: table must be non-empty");
    for (double t : table_)
        if (t <= 0.0) throw std::invalid_argument("TableDuration: durations must be positive");
}

double TableDuration::sample(std::size_t issue_index, const DesignPoint&, std::uint64_t) const {
    return table_[issue_index % table_.size()];
}

double fom_evaluate(const FomSpec& spec, const Eigen::VectorXd& raw) {
    if (spec.metrics.size() != spec.weights.size())
        throw std::invalid_argument("fom_evaluate: metrics/weights size mismatch");
    double fom = 0.0;
    for (std::size_t i = 0; i < spec.metrics.size(); ++i)
        fom += spec.weights[i] * spec.metrics[i](raw);
    return fom;
}

ObjectiveFn make_metric(std::string_view name, const BoxDomain& domain) {
    double (*fn)(const Eigen::VectorXd&) = nullptr;
    if (name == "gain_surrogate") fn = gain_surrogate;
    else if (name == "ugf_surrogate") fn = ugf_surrogate;
    else if (name == "pm_surrogate") fn = pm_surrogate;
    else if (name == "neg_sphere") fn = neg_sphere;
    else throw std::invalid_argument("unknown metric: " + std::string(name));
    return [fn, domain](const Eigen::VectorXd& raw) { return fn(domain.to_unit(raw)); };
}

std::vector<std::string> metric_names() {
    return {"gain_surrogate", "ugf_surrogate", "pm_surrogate", "neg_sphere"};
}

Problem make_fom_problem(std::string name, BoxDomain domain,
                         const std::vector<std::pair<std::string, double>>& components) {
    if (components.empty())
        throw std::invalid_argument("make_fom_problem: needs at least one component");
    FomSpec spec;
    for (const auto& [metric, weight] : components) {
        spec.metrics.push_back(make_metric(metric, domain));
        spec.weights.push_back(weight);
    }
    ObjectiveFn obj = [spec](const Eigen::VectorXd& raw) { return fom_evaluate(spec, raw); };
    return Problem{std::move(name), std::move(domain), std::move(obj),
                   std::make_shared<LogNormalDuration>(10.0, 0.5), std::nullopt};
}

std::vector<Problem> builtin_problems() {
    std::vector<Problem> out;

    {
        Eigen::VectorXd lo(2), hi(2);
        lo << -5.0, 0.0;
        hi << 10.0, 15.0;
        out.push_back(Problem{
            "branin", BoxDomain(lo, hi),
            [](const Eigen::VectorXd& x) { return -branin_value(x[0], x[1]); },
            std::make_shared<LogNormalDuration>(10.0, 0.5),
            -0.397887});
    }
    {
        out.push_back(Problem{
            "hartmann6", BoxDomain::unit_cube(6),
            [](const Eigen::VectorXd& x) { return -hartmann6_value(x); },
            std::make_shared<LogNormalDuration>(10.0, 0.5),
            3.32237});
    }
    {
        // Amplifier-style 10-variable composite: widths/lengths (um), bias
        // current (uA), compensation R (kOhm) and C (pF) stand-ins.
        Eigen::VectorXd lo(10), hi(10);
        lo << 0.5, 0.5, 0.5, 0.5, 0.18, 0.18, 10.0, 1.0, 0.1, 0.5;
        hi << 64.0, 64.0, 64.0, 64.0, 2.0, 2.0, 500.0, 50.0, 10.0, 64.0;
        Problem p = make_fom_problem("opamp_fom", BoxDomain(lo, hi),
                                     {{"gain_surrogate", 1.2},
                                      {"ugf_surrogate", 10.0},
                                      {"pm_surrogate", 1.6}});
        out.push_back(std::move(p));
    }
    return out;
}

Problem find_problem(std::string_view name) {
    for (Problem& p : builtin_problems()) {
        if (p.name == name) return std::move(p);
    }
    throw std::invalid_argument("unknown problem: " + std::string(name));
}

} // namespace easybo
