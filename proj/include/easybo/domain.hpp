#ifndef EASYBO_DOMAIN_HPP
#define EASYBO_DOMAIN_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace easybo {

/// Axis-aligned box of valid design variables in original units.
class BoxDomain {
public:
    BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.size() != upper_.size() || lower_.size() < 1)
            throw std::invalid_argument("BoxDomain: bounds must be non-empty and of equal size");
        for (Eigen::Index i = 0; i < lower_.size(); ++i) {
            if (!(lower_[i] < upper_[i]))
                throw std::invalid_argument("BoxDomain: lower[i] must be < upper[i]");
        }
    }

    static BoxDomain unit_cube(int dim) {
        return BoxDomain(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
    }

    int dim() const { return static_cast<int>(lower_.size()); }
    const Eigen::VectorXd& lower() const { return lower_; }
    const Eigen::VectorXd& upper() const { return upper_; }

    /// Affine map from original units into the unit cube, clamped to [0,1].
    Eigen::VectorXd to_unit(const Eigen::VectorXd& raw) const {
        if (raw.size() != lower_.size())
            throw std::invalid_argument("BoxDomain::to_unit: dimension mismatch");
        Eigen::VectorXd u = (raw - lower_).cwiseQuotient(upper_ - lower_);
        return u.cwiseMax(0.0).cwiseMin(1.0);
    }

    Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const {
        if (u.size() != lower_.size())
            throw std::invalid_argument("BoxDomain::from_unit: dimension mismatch");
        return lower_ + u.cwiseProduct(upper_ - lower_);
    }

private:
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
};

/// A query location stored in unit-cube coordinates. All kernel and distance
/// computations operate on these normalized coordinates.
struct DesignPoint {
    Eigen::VectorXd u;

    DesignPoint() = default;
    explicit DesignPoint(Eigen::VectorXd unit_coords) : u(std::move(unit_coords)) {}

    int dim() const { return static_cast<int>(u.size()); }
};

inline DesignPoint normalize(const BoxDomain& domain, const Eigen::VectorXd& raw) {
    return DesignPoint(domain.to_unit(raw));
}

inline Eigen::VectorXd denormalize(const BoxDomain& domain, const DesignPoint& p) {
    return domain.from_unit(p.u);
}

/// Inputs (rows, unit coordinates) paired with scalar observations.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(int dim) : x_(0, dim) {}

    void add(const DesignPoint& p, double y) {
        if (!std::isfinite(y))
            throw std::invalid_argument("Dataset::add: observation must be finite");
        if (x_.cols() != 0 && p.dim() != x_.cols() && x_.rows() > 0)
            throw std::invalid_argument("Dataset::add: dimension mismatch");
        if (x_.rows() == 0) x_.resize(0, p.dim());
        x_.conservativeResize(x_.rows() + 1, Eigen::NoChange);
        x_.row(x_.rows() - 1) = p.u.transpose();
        y_.push_back(y);
    }

    int size() const { return static_cast<int>(y_.size()); }
    int dim() const { return static_cast<int>(x_.cols()); }

    const Eigen::MatrixXd& inputs() const { return x_; }
    DesignPoint point(int i) const { return DesignPoint(x_.row(i).transpose()); }
    const std::vector<double>& observations() const { return y_; }
    Eigen::VectorXd observations_vector() const {
        return Eigen::Map<const Eigen::VectorXd>(y_.data(), static_cast<Eigen::Index>(y_.size()));
    }

private:
    Eigen::MatrixXd x_;
    std::vector<double> y_;
};

} // namespace easybo

#endif
