#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace mkc {

// Weighted particle cloud in R^d. Points are stored row-major (N x d).
// Weights are nonnegative; most consumers additionally require them to sum
// to one (see is_normalized / normalize).
class EmpiricalMeasure {
public:
    EmpiricalMeasure() = default;
    EmpiricalMeasure(std::size_t dim, std::vector<double> points, std::vector<double> weights);

    static EmpiricalMeasure equal_weights(std::size_t dim, std::vector<double> points);
    static EmpiricalMeasure from_1d(std::vector<double> points, std::vector<double> weights);

    std::size_t size() const noexcept { return weights_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> point(std::size_t i) const noexcept { return {points_.data() + i * dim_, dim_}; }
    double weight(std::size_t i) const noexcept { return weights_[i]; }
    const std::vector<double>& points() const noexcept { return points_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    double total_mass() const noexcept;
    bool is_normalized(double tolerance = 1e-12) const noexcept;

private:
    std::size_t dim_ = 1;
    std::vector<double> points_;
    std::vector<double> weights_;
};

// Cell-average representation of a density on a uniform 1D or 2D grid.
// values are row-major with the last axis fastest: value(i, j) = values[i * n1 + j].
class GridDensity {
public:
    GridDensity() = default;
    GridDensity(std::vector<double> origin, std::vector<double> spacing, std::vector<std::size_t> shape,
                std::vector<double> values);

    // Cell averages of `profile` (3-point Gauss per axis), not normalized.
    static GridDensity from_profile(const std::function<double(std::span<const double>)>& profile,
                                    std::vector<double> origin, std::vector<double> spacing,
                                    std::vector<std::size_t> shape);
    static GridDensity from_profile_1d(const std::function<double(double)>& profile, double origin, double spacing,
                                       std::size_t cells);

    std::size_t dim() const noexcept { return shape_.size(); }
    const std::vector<double>& origin() const noexcept { return origin_; }
    const std::vector<double>& spacing() const noexcept { return spacing_; }
    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    double cell_volume() const noexcept;
    double mass() const noexcept;
    double min_value() const noexcept;
    // Coordinate of the centre of cell `index` along `axis`.
    double center(std::size_t axis, std::size_t index) const noexcept
    {
        return origin_[axis] + (static_cast<double>(index) + 0.5) * spacing_[axis];
    }
    double& at(std::size_t i, std::size_t j) noexcept { return values_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const noexcept { return values_[i * shape_[1] + j]; }

    // Each cell becomes an atom at its centre with weight value * cell volume.
    EmpiricalMeasure to_measure(bool drop_empty = false) const;

private:
    std::vector<double> origin_;
    std::vector<double> spacing_;
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
};

EmpiricalMeasure normalize(const EmpiricalMeasure& m);
GridDensity normalize(const GridDensity& g);

// Sum_i w_i |x_i|^p.
double moment(const EmpiricalMeasure& m, double p);

// Generalized inverse CDF inf{x : F(x) >= q} of a 1D measure.
double quantile(const EmpiricalMeasure& m, double q);

// Sorted 1D view with cumulative weights for repeated quantile queries.
class SortedMeasure1D {
public:
    explicit SortedMeasure1D(const EmpiricalMeasure& m);
    double quantile(double q) const;
    double cdf(double x) const;
    const std::vector<double>& points() const noexcept { return points_; }
    const std::vector<double>& cumulative() const noexcept { return cumulative_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    std::vector<double> points_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

namespace family {
struct Gaussian {
    std::vector<double> mean;  // dimension = mean.size()
    double variance = 1.0;
};
struct Uniform {
    std::vector<double> lower;
    std::vector<double> upper;
};
struct Dirac {
    std::vector<double> location;
};
// Unit-mass Barenblatt solution of du/dt = d2/dx2 [ (m-1)/m u^m ] at time t0.
struct Barenblatt {
    double m = 2.0;
    double t0 = 1.0;
    double center = 0.0;
};
} // namespace family

using DensityFamily = std::variant<family::Gaussian, family::Uniform, family::Dirac, family::Barenblatt>;

std::size_t family_dimension(const DensityFamily& family);
void validate_family(const DensityFamily& family);

// N equal-weight draws, deterministic in (family, N, seed, stream).
EmpiricalMeasure sample(const DensityFamily& family, std::size_t n, std::uint64_t seed,
                        std::uint64_t stream = 0);

// Density of the family (1D families only, Dirac excluded).
double family_density(const DensityFamily& family, double x);

namespace barenblatt {
double support_radius(double m, double t);
double density(double m, double t, double center, double x);
// CDF of the unit-mass profile, used as an analytic quantile oracle.
double cdf(double m, double t, double center, double x);
double quantile(double m, double t, double center, double q);
} // namespace barenblatt

} // namespace mkc
