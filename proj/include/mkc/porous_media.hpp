#pragma once

#include <functional>
#include <vector>

#include "mkc/costs.hpp"
#include "mkc/measures.hpp"
#include "mkc/series.hpp"

namespace mkc {

// Nonlinearity of du/dt = div(u grad A'(u)), with B(r) = int_0^r w A''(w) dw.
class NonlinearityA {
public:
    NonlinearityA(ScalarField A, ScalarField A2, double dimension = 1.0);
    // A(u) = u^m / m; B(r) = (m - 1) r^m / m in closed form.
    static NonlinearityA power(double m, double dimension = 1.0);

    double A(double r) const { return A_(r); }
    double A2(double r) const { return A2_(r); }
    double B(double r) const;
    double B_prime(double r) const { return r == 0.0 ? 0.0 : r * A2_(r); }
    double dimension() const { return dimension_; }

    // Tabulate B on [0, r_max] (Hermite cubic between nodes).
    void cache(double r_max, std::size_t nodes = 4096);

private:
    double B_quadrature(double r) const;

    ScalarField A_;
    ScalarField A2_;
    ScalarField B_closed_;
    double dimension_ = 1.0;
    double cache_max_ = 0.0;
    std::vector<double> cache_B_;
};

struct Admissibility {
    bool b_nonneg = false;
    bool monotone = false;
    bool ok() const { return b_nonneg && monotone; }
};

Admissibility check_admissible(const NonlinearityA& A, const std::vector<double>& r_grid);
// Geometric grid on [1e-6, r_max].
std::vector<double> default_r_grid(double r_max = 10.0, std::size_t points = 400);

struct PmeSolution {
    std::vector<double> times;
    std::vector<GridDensity> snapshots;
    std::size_t steps = 0;
};

// du/dt = d2/dx2 B(u) with no-flux ends; explicit steps of
// cfl * dx^2 / max B'(u), re-evaluated every step, or the fixed `dt`.
PmeSolution solve_pme_1d(const NonlinearityA& A, const GridDensity& u0, double T, std::size_t checkpoints,
                         double cfl = 0.45, double dt = 0.0);

// Cell-wise uniform density seen through its CDF.
class PiecewiseCdf {
public:
    explicit PiecewiseCdf(const GridDensity& u);
    double cdf(double x) const;
    double quantile(double q) const;
    // CDF values at cell edges (normalized, last = 1).
    const std::vector<double>& cumulative() const { return cum_; }
    const std::vector<double>& edges() const { return edges_; }
    double mass() const { return mass_; }

private:
    std::vector<double> edges_;
    std::vector<double> cum_;
    double mass_ = 0.0;
};

struct BrenierMap {
    std::vector<double> x;  // cell centres of u1
    std::vector<double> y;  // T(x) = F2^{-1}(F1(x))
};

BrenierMap brenier_map_1d(const GridDensity& u1, const GridDensity& u2);

// (1/p) int_0^1 |F1^{-1} - F2^{-1}|^p dq, exact on the merged quantile partition.
double quantile_distance(const GridDensity& u1, const GridDensity& u2, double p = 2.0);
// (1/2) int |x - T(x)|^2 u1(x) dx, exact on the partition of x by u1 cells and T-preimages of u2 edges.
double transport_cost_d2(const GridDensity& u1, const GridDensity& u2);

struct Dissipation {
    double D1 = 0.0;
    double D2 = 0.0;
    double bound = 0.0;  // integrated one-dimensional upper bound for I'(0)
};

// One-dimensional terms on the common grid, densities floored at 1e-12.
Dissipation dissipation_terms(const GridDensity& u1, const GridDensity& u2, const NonlinearityA& A);

DistanceSeries pme_contraction_experiment(const NonlinearityA& A, const GridDensity& u1_0, const GridDensity& u2_0,
                                          double T, std::size_t checkpoints, double cfl = 0.45);

} // namespace mkc
