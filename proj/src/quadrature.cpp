#include "mkc/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

// The bundled tanh_sinh carries a debug-only endpoint assertion that misfires
// for left-endpoint nodes; it is harmless with assertions off.
#define BOOST_DISABLE_ASSERTS
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mkc/error.hpp"

namespace mkc {

namespace {

GaussRule build_rule(int n)
{
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -z;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

} // namespace

const GaussRule& gauss_legendre(int n)
{
    require(n >= 1, ErrorKind::InvalidParameter, "Gauss-Legendre order must be positive");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, build_rule(n)).first;
    }
    return it->second;
}

double integrate_gauss(const std::function<double(double)>& f, double a, double b, int panels, int order)
{
    const GaussRule& rule = gauss_legendre(order);
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double mid = lo + 0.5 * width;
        double panel = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            panel += rule.weights[k] * f(mid + 0.5 * width * rule.nodes[k]);
        }
        total += 0.5 * width * panel;
    }
    return total;
}

TanhSinhResult integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b, double tolerance,
                                   std::size_t max_levels)
{
    boost::math::quadrature::tanh_sinh<double> integrator(max_levels);
    TanhSinhResult result;
    result.value = integrator.integrate(f, a, b, tolerance, &result.error, &result.l1_norm, &result.levels);
    require(std::isfinite(result.value), ErrorKind::QuadratureFailure,
            "tanh-sinh quadrature produced a non-finite value");
    return result;
}

} // namespace mkc
