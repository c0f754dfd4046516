#pragma once

#include <functional>
#include <optional>
#include <span>
#include <variant>

#include <Eigen/Dense>

namespace mkc {

// Second-derivative blocks of a cost rho(x, y).
struct CostHessian {
    Eigen::MatrixXd xx;
    Eigen::MatrixXd yy;
    Eigen::MatrixXd xy;
};

using ScalarField = std::function<double(double)>;
using PointFn = std::function<double(std::span<const double>, std::span<const double>)>;
using HessianFn = std::function<CostHessian(std::span<const double>, std::span<const double>)>;

namespace cost {

// |x - y|^p / p
struct Power {
    double p = 2.0;
};

// a |x - y| + |v - w| on phase space points (x, v), split in two equal halves.
struct KineticSum {
    double a = 1.0;
};

// |d(x)^p - d(y)^p| for scalar x, y.
struct DFunction {
    std::function<double(double)> d;
    double p = 1.0;
};

// omega(|x - y|) with either regularizer below.
struct RegularizedAbs {
    enum class Kind { Quadratic, Yamada };
    double eps = 0.1;
    Kind kind = Kind::Quadratic;
};

struct Custom {
    PointFn f;
    HessianFn hessian;  // optional; finite differences otherwise
};

} // namespace cost

using CostSpec = std::variant<cost::Power, cost::KineticSum, cost::DFunction, cost::RegularizedAbs, cost::Custom>;

double eval_cost(const CostSpec& c, std::span<const double> x, std::span<const double> y);
inline double eval_cost(const CostSpec& c, double x, double y)
{
    return eval_cost(c, std::span<const double>(&x, 1), std::span<const double>(&y, 1));
}

// Value with first and second derivative in r.
struct Smooth {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

// r^2/(2 eps) below eps, r - eps/2 above.
Smooth omega_eps(double r, double eps);

// Two-scale regularization: zero up to eps^{3/2}, omega'' = 2/(r |ln eps|)
// up to eps, slope one beyond. Pinned by omega(eps^{3/2}) = 0 and C^1 matching.
Smooth yamada(double r, double eps);

Smooth regularizer(const cost::RegularizedAbs& spec, double r);

// Analytic blocks where available, central differences otherwise
// (step max(1e-5, 1e-5 |x - y|)). Only meaningful off the diagonal.
CostHessian cost_hessian(const CostSpec& c, std::span<const double> x, std::span<const double> y);

using MatrixField = std::function<Eigen::MatrixXd(std::span<const double>)>;

// sum a_ij(x) d2rho/dxi dxj + sum a_ij(y) d2rho/dyi dyj + 2 sum sigma_ik(x) sigma_jk(y) d2rho/dxi dyj.
// Throws InconsistentCoefficients when a != sigma sigma^T at x or y (1e-10).
double weight_pde_residual(const MatrixField& a, const MatrixField& sigma, const CostSpec& rho,
                           std::span<const double> x, std::span<const double> y);

// Source law b of the jump equation: a single atom or a density on [lower, upper].
struct SourceLaw {
    std::optional<double> atom;
    std::function<double(double)> density;
    double lower = 0.0;
    double upper = 1.0;

    static SourceLaw dirac(double z) { return {z, {}, z, z}; }
    static SourceLaw on_interval(std::function<double(double)> b, double lo, double hi)
    {
        return {std::nullopt, std::move(b), lo, hi};
    }
};

struct TttResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// rho(x,y) max(d(x),d(y)) >= int [rho(z,y) (d(x)-d(y))_+ + rho(x,z) (d(y)-d(x))_+] b(z) dz
TttResult ttt_check(const CostSpec& rho, const SourceLaw& b, const std::function<double(double)>& d, double x,
                    double y, int quadrature_panels = 64);

// Moment int z^p b(z) dz of a source law.
double source_moment(const SourceLaw& b, double p, int quadrature_panels = 64);

// int_R [ |1+h|^{a-1} - 1 - (a-1) h ] |h|^{-1-a} dh over [-R, R], plus the exact
// contribution of |h| > R when tail_correction is set.
double stable_identity_residual(double alpha, double truncation = 1e4, bool tail_correction = true);

// C_alpha = int (1 - cos h) |h|^{-1-alpha} dh, by quadrature.
double stable_constant(double alpha);
// -2 Gamma(-alpha) cos(pi alpha / 2)
double stable_constant_closed_form(double alpha);

} // namespace mkc
