#include "mkc/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mkc/error.hpp"
#include "mkc/random.hpp"

namespace mkc {

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> points, std::vector<double> weights)
    : dim_(dim), points_(std::move(points)), weights_(std::move(weights))
{
    require(dim_ >= 1, ErrorKind::DimensionMismatch, "measure dimension must be at least 1");
    require(points_.size() == dim_ * weights_.size(), ErrorKind::DimensionMismatch,
            "point array does not match weights x dimension");
    for (double w : weights_) {
        require(w >= 0.0 && std::isfinite(w), ErrorKind::InvalidParameter, "weights must be finite and nonnegative");
    }
}

EmpiricalMeasure EmpiricalMeasure::equal_weights(std::size_t dim, std::vector<double> points)
{
    require(dim >= 1 && points.size() % dim == 0, ErrorKind::DimensionMismatch,
            "point array is not a multiple of the dimension");
    const std::size_t n = points.size() / dim;
    require(n >= 1, ErrorKind::InvalidParameter, "empty point cloud");
    return EmpiricalMeasure(dim, std::move(points), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

EmpiricalMeasure EmpiricalMeasure::from_1d(std::vector<double> points, std::vector<double> weights)
{
    return EmpiricalMeasure(1, std::move(points), std::move(weights));
}

double EmpiricalMeasure::total_mass() const noexcept
{
    return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

bool EmpiricalMeasure::is_normalized(double tolerance) const noexcept
{
    return std::fabs(total_mass() - 1.0) <= tolerance;
}

GridDensity::GridDensity(std::vector<double> origin, std::vector<double> spacing, std::vector<std::size_t> shape,
                         std::vector<double> values)
    : origin_(std::move(origin)), spacing_(std::move(spacing)), shape_(std::move(shape)), values_(std::move(values))
{
    require(!shape_.empty() && shape_.size() <= 2, ErrorKind::DimensionMismatch, "grid must be 1D or 2D");
    require(origin_.size() == shape_.size() && spacing_.size() == shape_.size(), ErrorKind::DimensionMismatch,
            "origin/spacing/shape rank mismatch");
    std::size_t count = 1;
    for (std::size_t axis = 0; axis < shape_.size(); ++axis) {
        require(spacing_[axis] > 0.0, ErrorKind::InvalidParameter, "grid spacing must be positive");
        require(shape_[axis] >= 1, ErrorKind::InvalidParameter, "grid axis must have at least one cell");
        count *= shape_[axis];
    }
    require(values_.size() == count, ErrorKind::DimensionMismatch, "grid values do not match shape");
}

GridDensity GridDensity::from_profile(const std::function<double(std::span<const double>)>& profile,
                                      std::vector<double> origin, std::vector<double> spacing,
                                      std::vector<std::size_t> shape)
{
    static constexpr double kNodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr double kWeights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    std::size_t count = 1;
    for (auto s : shape) {
        count *= s;
    }
    std::vector<double> values(count, 0.0);
    if (shape.size() == 1) {
        for (std::size_t i = 0; i < shape[0]; ++i) {
            double acc = 0.0;
            for (int a = 0; a < 3; ++a) {
                const double x = origin[0] + (i + 0.5 + 0.5 * kNodes[a]) * spacing[0];
                acc += kWeights[a] * profile(std::span<const double>(&x, 1));
            }
            values[i] = acc;
        }
    } else {
        require(shape.size() == 2, ErrorKind::DimensionMismatch, "grid must be 1D or 2D");
        for (std::size_t i = 0; i < shape[0]; ++i) {
            for (std::size_t j = 0; j < shape[1]; ++j) {
                double acc = 0.0;
                for (int a = 0; a < 3; ++a) {
                    for (int b = 0; b < 3; ++b) {
                        const double xy[2] = {origin[0] + (i + 0.5 + 0.5 * kNodes[a]) * spacing[0],
                                              origin[1] + (j + 0.5 + 0.5 * kNodes[b]) * spacing[1]};
                        acc += kWeights[a] * kWeights[b] * profile(std::span<const double>(xy, 2));
                    }
                }
                values[i * shape[1] + j] = acc;
            }
        }
    }
    return GridDensity(std::move(origin), std::move(spacing), std::move(shape), std::move(values));
}

GridDensity GridDensity::from_profile_1d(const std::function<double(double)>& profile, double origin,
                                         double spacing, std::size_t cells)
{
    return from_profile([&](std::span<const double> x) { return profile(x[0]); }, {origin}, {spacing}, {cells});
}

double GridDensity::cell_volume() const noexcept
{
    double v = 1.0;
    for (double h : spacing_) {
        v *= h;
    }
    return v;
}

double GridDensity::mass() const noexcept
{
    return std::accumulate(values_.begin(), values_.end(), 0.0) * cell_volume();
}

double GridDensity::min_value() const noexcept
{
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

EmpiricalMeasure GridDensity::to_measure(bool drop_empty) const
{
    const double vol = cell_volume();
    std::vector<double> points;
    std::vector<double> weights;
    points.reserve(values_.size() * dim());
    weights.reserve(values_.size());
    if (dim() == 1) {
        for (std::size_t i = 0; i < shape_[0]; ++i) {
            const double w = std::max(values_[i], 0.0) * vol;
            if (drop_empty && w <= 0.0) {
                continue;
            }
            points.push_back(center(0, i));
            weights.push_back(w);
        }
    } else {
        for (std::size_t i = 0; i < shape_[0]; ++i) {
            for (std::size_t j = 0; j < shape_[1]; ++j) {
                const double w = std::max(at(i, j), 0.0) * vol;
                if (drop_empty && w <= 0.0) {
                    continue;
                }
                points.push_back(center(0, i));
                points.push_back(center(1, j));
                weights.push_back(w);
            }
        }
    }
    return EmpiricalMeasure(dim(), std::move(points), std::move(weights));
}

EmpiricalMeasure normalize(const EmpiricalMeasure& m)
{
    const double mass = m.total_mass();
    require(mass > 0.0, ErrorKind::ZeroMass, "cannot normalize a measure with zero total mass");
    std::vector<double> weights = m.weights();
    for (double& w : weights) {
        w /= mass;
    }
    return EmpiricalMeasure(m.dim(), m.points(), std::move(weights));
}

GridDensity normalize(const GridDensity& g)
{
    const double mass = g.mass();
    require(mass > 0.0, ErrorKind::ZeroMass, "cannot normalize a grid density with zero total mass");
    std::vector<double> values = g.values();
    for (double& v : values) {
        v /= mass;
    }
    return GridDensity(g.origin(), g.spacing(), g.shape(), std::move(values));
}

double moment(const EmpiricalMeasure& m, double p)
{
    require(p >= 0.0, ErrorKind::InvalidParameter, "moment order must be nonnegative");
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto x = m.point(i);
        double norm2 = 0.0;
        for (double c : x) {
            norm2 += c * c;
        }
        const double r = std::sqrt(norm2);
        total += m.weight(i) * (p == 0.0 ? 1.0 : std::pow(r, p));
    }
    return total;
}

SortedMeasure1D::SortedMeasure1D(const EmpiricalMeasure& m)
{
    require(m.dim() == 1, ErrorKind::DimensionMismatch, "quantiles need a one-dimensional measure");
    require(m.size() > 0, ErrorKind::ZeroMass, "empty measure");
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return m.point(a)[0] < m.point(b)[0]; });
    points_.reserve(m.size());
    weights_.reserve(m.size());
    cumulative_.reserve(m.size());
    double acc = 0.0;
    for (std::size_t idx : order) {
        points_.push_back(m.point(idx)[0]);
        weights_.push_back(m.weight(idx));
        acc += m.weight(idx);
        cumulative_.push_back(acc);
    }
}

double SortedMeasure1D::quantile(double q) const
{
    require(q >= 0.0 && q <= 1.0, ErrorKind::InvalidParameter, "quantile level must lie in [0, 1]");
    const double total = cumulative_.back();
    const double target = q * total - 1e-13 * total;
    // First index whose cumulative weight reaches q; skip zero-weight atoms at the front.
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t idx = it == cumulative_.end() ? cumulative_.size() - 1
                                              : static_cast<std::size_t>(it - cumulative_.begin());
    while (idx + 1 < points_.size() && weights_[idx] == 0.0 && cumulative_[idx] <= target) {
        ++idx;
    }
    if (q > 0.0) {
        while (idx < points_.size() && weights_[idx] == 0.0 && idx + 1 < points_.size()) {
            ++idx;
        }
    }
    return points_[idx];
}

double SortedMeasure1D::cdf(double x) const
{
    auto it = std::upper_bound(points_.begin(), points_.end(), x);
    if (it == points_.begin()) {
        return 0.0;
    }
    return cumulative_[static_cast<std::size_t>(it - points_.begin()) - 1];
}

double quantile(const EmpiricalMeasure& m, double q)
{
    return SortedMeasure1D(m).quantile(q);
}

std::size_t family_dimension(const DensityFamily& family)
{
    return std::visit(
        [](const auto& f) -> std::size_t {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, family::Gaussian>) {
                return f.mean.size();
            } else if constexpr (std::is_same_v<T, family::Uniform>) {
                return f.lower.size();
            } else if constexpr (std::is_same_v<T, family::Dirac>) {
                return f.location.size();
            } else {
                return 1;
            }
        },
        family);
}

void validate_family(const DensityFamily& family)
{
    std::visit(
        [](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, family::Gaussian>) {
                require(!f.mean.empty(), ErrorKind::InvalidParameter, "gaussian mean must be non-empty");
                require(f.variance > 0.0, ErrorKind::InvalidParameter, "gaussian variance must be positive");
            } else if constexpr (std::is_same_v<T, family::Uniform>) {
                require(!f.lower.empty() && f.lower.size() == f.upper.size(), ErrorKind::InvalidParameter,
                        "uniform bounds must be non-empty and of equal length");
                for (std::size_t k = 0; k < f.lower.size(); ++k) {
                    require(f.lower[k] < f.upper[k], ErrorKind::InvalidParameter, "uniform requires a < b");
                }
            } else if constexpr (std::is_same_v<T, family::Dirac>) {
                require(!f.location.empty(), ErrorKind::InvalidParameter, "dirac location must be non-empty");
            } else {
                require(f.m > 1.0, ErrorKind::InvalidParameter, "barenblatt exponent must exceed 1");
                require(f.t0 > 0.0, ErrorKind::InvalidParameter, "barenblatt time must be positive");
            }
        },
        family);
}

namespace barenblatt {

namespace {

struct Constants {
    double exponent;  // support shape exponent 1/(m-1)
    double a;         // time exponent 1/(m+1)
    double k;
    double c;
};

Constants constants(double m)
{
    const double q = 1.0 / (m - 1.0);
    const double a = 1.0 / (m + 1.0);
    const double k = a * (m - 1.0) / (2.0 * m);
    const double shape_integral = std::sqrt(std::numbers::pi) * std::tgamma(q + 1.0) / std::tgamma(q + 1.5);
    const double c = std::pow(std::sqrt(k) / shape_integral, 1.0 / (q + 0.5));
    return {q, a, k, c};
}

// Internal time of du/dtau = (u^m)_xx equivalent to t for the (m-1)/m scaling.
double tau(double m, double t)
{
    return t * (m - 1.0) / m;
}

} // namespace

double support_radius(double m, double t)
{
    const Constants c = constants(m);
    return std::pow(tau(m, t), c.a) * std::sqrt(c.c / c.k);
}

double density(double m, double t, double center, double x)
{
    const Constants c = constants(m);
    const double s = tau(m, t);
    const double y = x - center;
    const double base = c.c - c.k * y * y * std::pow(s, -2.0 * c.a);
    if (base <= 0.0) {
        return 0.0;
    }
    return std::pow(s, -c.a) * std::pow(base, c.exponent);
}

double cdf(double m, double t, double center, double x)
{
    const double r = support_radius(m, t);
    const double y = (x - center) / r;
    if (y <= -1.0) {
        return 0.0;
    }
    if (y >= 1.0) {
        return 1.0;
    }
    const double q = 1.0 / (m - 1.0);
    return boost::math::ibeta(q + 1.0, q + 1.0, 0.5 * (1.0 + y));
}

double quantile(double m, double t, double center, double q)
{
    const double r = support_radius(m, t);
    const double e = 1.0 / (m - 1.0);
    if (q <= 0.0) {
        return center - r;
    }
    if (q >= 1.0) {
        return center + r;
    }
    return center + r * (2.0 * boost::math::ibeta_inv(e + 1.0, e + 1.0, q) - 1.0);
}

} // namespace barenblatt

EmpiricalMeasure sample(const DensityFamily& fam, std::size_t n, std::uint64_t seed, std::uint64_t stream)
{
    require(n >= 1, ErrorKind::InvalidParameter, "sample size must be at least 1");
    validate_family(fam);
    const std::size_t dim = family_dimension(fam);
    RandomStream rng(seed, stream);
    std::vector<double> points(n * dim);
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            for (std::size_t i = 0; i < n; ++i) {
                double* x = points.data() + i * dim;
                if constexpr (std::is_same_v<T, family::Gaussian>) {
                    const double sd = std::sqrt(f.variance);
                    for (std::size_t k = 0; k < dim; ++k) {
                        x[k] = f.mean[k] + sd * rng.normal();
                    }
                } else if constexpr (std::is_same_v<T, family::Uniform>) {
                    for (std::size_t k = 0; k < dim; ++k) {
                        x[k] = rng.uniform(f.lower[k], f.upper[k]);
                    }
                } else if constexpr (std::is_same_v<T, family::Dirac>) {
                    for (std::size_t k = 0; k < dim; ++k) {
                        x[k] = f.location[k];
                    }
                } else {
                    const double shape = 1.0 / (f.m - 1.0) + 1.0;
                    const double y = 2.0 * rng.beta(shape, shape) - 1.0;
                    x[0] = f.center + barenblatt::support_radius(f.m, f.t0) * y;
                }
            }
        },
        fam);
    return EmpiricalMeasure::equal_weights(dim, std::move(points));
}

double family_density(const DensityFamily& fam, double x)
{
    require(family_dimension(fam) == 1, ErrorKind::DimensionMismatch, "density evaluation needs a 1D family");
    return std::visit(
        [x](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, family::Gaussian>) {
                const double z = x - f.mean[0];
                return std::exp(-0.5 * z * z / f.variance) / std::sqrt(2.0 * std::numbers::pi * f.variance);
            } else if constexpr (std::is_same_v<T, family::Uniform>) {
                return (x >= f.lower[0] && x <= f.upper[0]) ? 1.0 / (f.upper[0] - f.lower[0]) : 0.0;
            } else if constexpr (std::is_same_v<T, family::Dirac>) {
                fail(ErrorKind::InvalidParameter, "a dirac mass has no density");
            } else {
                return barenblatt::density(f.m, f.t0, f.center, x);
            }
        },
        fam);
}

} // namespace mkc
