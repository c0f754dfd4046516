#pragma once

#include <functional>
#include <vector>

namespace mkc {

struct GaussRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule (Newton iteration on P_n), cached per n.
const GaussRule& gauss_legendre(int n);

// Composite Gauss-Legendre over `panels` equal sub-intervals of [a, b].
double integrate_gauss(const std::function<double(double)>& f, double a, double b, int panels = 16, int order = 10);

struct TanhSinhResult {
    double value = 0.0;
    double error = 0.0;
    double l1_norm = 0.0;
    std::size_t levels = 0;
};

// Double-exponential quadrature on a finite interval; tolerates integrable
// endpoint singularities. Raises QuadratureFailure on a non-finite result.
TanhSinhResult integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                                   double tolerance = 1e-14, std::size_t max_levels = 15);

} // namespace mkc
