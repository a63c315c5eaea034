#ifndef EASYBO_BENCHMARKS_HPP
#define EASYBO_BENCHMARKS_HPP

#include "easybo/domain.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace easybo {

/// Objective in original domain units; all objectives are maximized.
using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

/// Per-evaluation simulated duration. Draws are addressed by issue index so
/// reruns (and regime comparisons) see identical sequences under one seed.
class DurationModel {
public:
    virtual ~DurationModel() = default;
    virtual double sample(std::size_t issue_index, const DesignPoint& x,
                          std::uint64_t seed) const = 0;
    virtual std::string name() const = 0;
};

class ConstantDuration final : public DurationModel {
public:
    explicit ConstantDuration(double seconds);
    double sample(std::size_t, const DesignPoint&, std::uint64_t) const override;
    std::string name() const override { return "constant"; }

private:
    double seconds_;
};

class LogNormalDuration final : public DurationModel {
public:
    LogNormalDuration(double median, double sigma_log);
    double sample(std::size_t issue_index, const DesignPoint&, std::uint64_t seed) const override;
    std::string name() const override { return "lognormal"; }
    double median() const { return median_; }
    double sigma_log() const { return sigma_; }

private:
    double median_;
    double sigma_;
};

/// Deterministic duration that grows with one designated (normalized)
/// coordinate: median * (0.25 + 1.75 * u_k).
class CoordinateDuration final : public DurationModel {
public:
    CoordinateDuration(double median, int coordinate);
    double sample(std::size_t, const DesignPoint& x, std::uint64_t) const override;
    std::string name() const override { return "coordinate"; }

private:
    double median_;
    int coordinate_;
};

/// Fixed duration table addressed by issue index (cycling); for tests.
class TableDuration final : public DurationModel {
public:
    explicit TableDuration(std::vector<double> table);
    double sample(std::size_t issue_index, const DesignPoint&, std::uint64_t) const override;
    std::string name() const override { return "table"; }

private:
    std::vector<double> table_;
};

/// A synthetic expensive black-box problem.
struct Problem {
    std::string name;
    BoxDomain domain;
    ObjectiveFn objective;
    std::shared_ptr<const DurationModel> duration;
    std::optional<double> known_optimum;

    double evaluate(const DesignPoint& p) const { return objective(domain.from_unit(p.u)); }
    double duration_of(std::size_t issue_index, const DesignPoint& p, std::uint64_t seed) const {
        return duration->sample(issue_index, p, seed);
    }
};

/// Weighted figure-of-merit composite: FOM(x) = sum_i alpha_i * f_i(x).
struct FomSpec {
    std::vector<ObjectiveFn> metrics;
    std::vector<double> weights;
};

double fom_evaluate(const FomSpec& spec, const Eigen::VectorXd& raw);

/// Named performance-metric surrogates usable as FOM components; evaluated on
/// the normalized coordinates of the supplied domain.
ObjectiveFn make_metric(std::string_view name, const BoxDomain& domain);
std::vector<std::string> metric_names();

/// Compose a named problem from (metric, weight) pairs over a domain.
Problem make_fom_problem(std::string name, BoxDomain domain,
                         const std::vector<std::pair<std::string, double>>& components);

/// Built-in problems: negated Branin (d=2), negated Hartmann-6 (d=6), and a
/// 10-d amplifier-style FOM composite. Default duration model is log-normal
/// with median 10 s and sigma_log 0.5.
std::vector<Problem> builtin_problems();
Problem find_problem(std::string_view name);

} // namespace easybo

#endif
