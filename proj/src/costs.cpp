#include "mkc/costs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mkc/error.hpp"
#include "mkc/quadrature.hpp"

namespace mkc {

namespace {

double distance(std::span<const double> x, std::span<const double> y)
{
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - y[k];
        s += d * d;
    }
    return std::sqrt(s);
}

// Hessian of phi(|z|) in z at z = x - y, for a radial profile phi.
Eigen::MatrixXd radial_hessian(std::span<const double> x, std::span<const double> y, double d1, double d2, double r)
{
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::VectorXd u(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        u[k] = (x[static_cast<std::size_t>(k)] - y[static_cast<std::size_t>(k)]) / r;
    }
    const Eigen::MatrixXd uu = u * u.transpose();
    return d2 * uu + (d1 / r) * (Eigen::MatrixXd::Identity(n, n) - uu);
}

CostHessian translation_invariant(Eigen::MatrixXd h)
{
    return {h, h, -h};
}

CostHessian finite_difference_hessian(const CostSpec& c, std::span<const double> x, std::span<const double> y)
{
    const std::size_t d = x.size();
    const double step = std::max(1e-5, 1e-5 * distance(x, y));
    std::vector<double> z(2 * d);
    std::copy(x.begin(), x.end(), z.begin());
    std::copy(y.begin(), y.end(), z.begin() + static_cast<std::ptrdiff_t>(d));
    auto f = [&](const std::vector<double>& p) {
        return eval_cost(c, std::span<const double>(p.data(), d), std::span<const double>(p.data() + d, d));
    };
    const auto n = static_cast<Eigen::Index>(2 * d);
    Eigen::MatrixXd full(n, n);
    const double f0 = f(z);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a; b < n; ++b) {
            std::vector<double> p = z;
            double value = 0.0;
            if (a == b) {
                p[a] = z[a] + step;
                const double fp = f(p);
                p[a] = z[a] - step;
                const double fm = f(p);
                value = (fp - 2.0 * f0 + fm) / (step * step);
            } else {
                double acc = 0.0;
                for (int sa : {1, -1}) {
                    for (int sb : {1, -1}) {
                        p = z;
                        p[a] += sa * step;
                        p[b] += sb * step;
                        acc += sa * sb * f(p);
                    }
                }
                value = acc / (4.0 * step * step);
            }
            full(a, b) = value;
            full(b, a) = value;
        }
    }
    const auto dd = static_cast<Eigen::Index>(d);
    return {full.topLeftCorner(dd, dd), full.bottomRightCorner(dd, dd), full.topRightCorner(dd, dd)};
}

} // namespace

double eval_cost(const CostSpec& c, std::span<const double> x, std::span<const double> y)
{
    require(x.size() == y.size() && !x.empty(), ErrorKind::DimensionMismatch, "cost arguments differ in dimension");
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, cost::Power>) {
                const double r = distance(x, y);
                if (s.p == 2.0) {
                    return 0.5 * r * r;
                }
                if (s.p == 1.0) {
                    return r;
                }
                return std::pow(r, s.p) / s.p;
            } else if constexpr (std::is_same_v<T, cost::KineticSum>) {
                require(x.size() % 2 == 0, ErrorKind::DimensionMismatch, "kinetic cost needs (position, velocity)");
                const std::size_t h = x.size() / 2;
                return s.a * distance(x.first(h), y.first(h)) + distance(x.subspan(h), y.subspan(h));
            } else if constexpr (std::is_same_v<T, cost::DFunction>) {
                require(x.size() == 1, ErrorKind::DimensionMismatch, "d-function cost is scalar");
                return std::fabs(std::pow(s.d(x[0]), s.p) - std::pow(s.d(y[0]), s.p));
            } else if constexpr (std::is_same_v<T, cost::RegularizedAbs>) {
                return regularizer(s, distance(x, y)).value;
            } else {
                return s.f(x, y);
            }
        },
        c);
}

Smooth omega_eps(double r, double eps)
{
    require(eps > 0.0, ErrorKind::InvalidParameter, "omega_eps needs eps > 0");
    require(r >= 0.0, ErrorKind::InvalidParameter, "omega_eps needs r >= 0");
    if (r <= eps) {
        return {r * r / (2.0 * eps), r / eps, 1.0 / eps};
    }
    return {r - 0.5 * eps, 1.0, 0.0};
}

Smooth yamada(double r, double eps)
{
    require(eps > 0.0 && eps < 1.0, ErrorKind::InvalidParameter, "yamada needs eps in (0, 1)");
    require(r >= 0.0, ErrorKind::InvalidParameter, "yamada needs r >= 0");
    const double lo = std::pow(eps, 1.5);
    const double scale = 2.0 / std::fabs(std::log(eps));
    if (r <= lo) {
        return {0.0, 0.0, 0.0};
    }
    auto middle = [&](double s) { return scale * (s * std::log(s / lo) - s + lo); };
    if (r <= eps) {
        return {middle(r), scale * std::log(r / lo), scale / r};
    }
    return {middle(eps) + (r - eps), 1.0, 0.0};
}

Smooth regularizer(const cost::RegularizedAbs& spec, double r)
{
    return spec.kind == cost::RegularizedAbs::Kind::Quadratic ? omega_eps(r, spec.eps) : yamada(r, spec.eps);
}

CostHessian cost_hessian(const CostSpec& c, std::span<const double> x, std::span<const double> y)
{
    require(x.size() == y.size() && !x.empty(), ErrorKind::DimensionMismatch, "cost arguments differ in dimension");
    if (const auto* s = std::get_if<cost::Power>(&c)) {
        const double r = distance(x, y);
        require(r > 0.0, ErrorKind::InvalidParameter, "cost Hessian requested on the diagonal");
        const double d1 = std::pow(r, s->p - 1.0);
        const double d2 = (s->p - 1.0) * std::pow(r, s->p - 2.0);
        return translation_invariant(radial_hessian(x, y, d1, d2, r));
    }
    if (const auto* s = std::get_if<cost::RegularizedAbs>(&c)) {
        const double r = distance(x, y);
        require(r > 0.0, ErrorKind::InvalidParameter, "cost Hessian requested on the diagonal");
        const Smooth w = regularizer(*s, r);
        return translation_invariant(radial_hessian(x, y, w.d1, w.d2, r));
    }
    if (const auto* s = std::get_if<cost::KineticSum>(&c)) {
        require(x.size() % 2 == 0, ErrorKind::DimensionMismatch, "kinetic cost needs (position, velocity)");
        const std::size_t h = x.size() / 2;
        const auto hh = static_cast<Eigen::Index>(h);
        const double rq = distance(x.first(h), y.first(h));
        const double rv = distance(x.subspan(h), y.subspan(h));
        require(rq > 0.0 && rv > 0.0, ErrorKind::InvalidParameter, "kinetic cost is not smooth here");
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * hh, 2 * hh);
        m.topLeftCorner(hh, hh) = s->a * radial_hessian(x.first(h), y.first(h), 1.0, 0.0, rq);
        m.bottomRightCorner(hh, hh) = radial_hessian(x.subspan(h), y.subspan(h), 1.0, 0.0, rv);
        return translation_invariant(m);
    }
    if (const auto* s = std::get_if<cost::Custom>(&c); s != nullptr && s->hessian) {
        return s->hessian(x, y);
    }
    return finite_difference_hessian(c, x, y);
}

double weight_pde_residual(const MatrixField& a, const MatrixField& sigma, const CostSpec& rho,
                           std::span<const double> x, std::span<const double> y)
{
    require(x.size() == y.size(), ErrorKind::DimensionMismatch, "residual points differ in dimension");
    const Eigen::MatrixXd ax = a(x);
    const Eigen::MatrixXd ay = a(y);
    const Eigen::MatrixXd sx = sigma(x);
    const Eigen::MatrixXd sy = sigma(y);
    const auto d = static_cast<Eigen::Index>(x.size());
    require(ax.rows() == d && ax.cols() == d && ay.rows() == d && ay.cols() == d && sx.rows() == d
                && sy.rows() == d && sx.cols() == sy.cols(),
            ErrorKind::DimensionMismatch, "coefficient fields have the wrong shape");
    auto consistent = [](const Eigen::MatrixXd& am, const Eigen::MatrixXd& sm) {
        const double scale = std::max(1.0, am.cwiseAbs().maxCoeff());
        return (am - sm * sm.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale;
    };
    require(consistent(ax, sx) && consistent(ay, sy), ErrorKind::InconsistentCoefficients,
            "diffusion matrix differs from sigma sigma^T");
    const CostHessian h = cost_hessian(rho, x, y);
    const Eigen::MatrixXd cross = sx * sy.transpose();
    return (ax.cwiseProduct(h.xx)).sum() + (ay.cwiseProduct(h.yy)).sum() + 2.0 * (cross.cwiseProduct(h.xy)).sum();
}

namespace {

// Composite Gauss over [lo, hi] with extra breakpoints where the integrand kinks.
double integrate_source(const std::function<double(double)>& f, double lo, double hi, std::vector<double> breaks,
                        int panels)
{
    breaks.push_back(lo);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double a = std::max(lo, breaks[k]);
        const double b = std::min(hi, breaks[k + 1]);
        if (b <= a) {
            continue;
        }
        const int n = std::max(4, static_cast<int>(std::ceil(panels * (b - a) / (hi - lo))));
        total += integrate_gauss(f, a, b, n, 10);
    }
    return total;
}

void check_source_mass(const SourceLaw& b, int panels)
{
    if (b.atom) {
        return;
    }
    require(static_cast<bool>(b.density) && b.upper > b.lower, ErrorKind::InvalidParameter,
            "source law needs an atom or a density on a proper interval");
    const double mass = integrate_source(b.density, b.lower, b.upper, {}, panels);
    require(std::fabs(mass - 1.0) <= 1e-6, ErrorKind::QuadratureFailure,
            "source density does not integrate to one (mass " + std::to_string(mass) + ")");
}

} // namespace

TttResult ttt_check(const CostSpec& rho, const SourceLaw& b, const std::function<double(double)>& d, double x,
                    double y, int quadrature_panels)
{
    check_source_mass(b, quadrature_panels);
    const double dx = d(x);
    const double dy = d(y);
    const double up = std::max(dx - dy, 0.0);
    const double down = std::max(dy - dx, 0.0);
    TttResult out;
    out.lhs = eval_cost(rho, x, y) * std::max(dx, dy);
    auto integrand = [&](double z) { return eval_cost(rho, z, y) * up + eval_cost(rho, x, z) * down; };
    if (b.atom) {
        out.rhs = integrand(*b.atom);
    } else {
        out.rhs = integrate_source([&](double z) { return integrand(z) * b.density(z); }, b.lower, b.upper, {x, y},
                                   quadrature_panels);
    }
    out.holds = out.lhs >= out.rhs - 1e-9;
    return out;
}

double source_moment(const SourceLaw& b, double p, int quadrature_panels)
{
    if (b.atom) {
        return std::pow(*b.atom, p);
    }
    check_source_mass(b, quadrature_panels);
    return integrate_source([&](double z) { return std::pow(z, p) * b.density(z); }, b.lower, b.upper, {},
                            quadrature_panels);
}

namespace {

// [(1+h)^e - 1 - e h] / h^2 by its binomial series, for small |h|.
double binomial_quotient(double e, double h)
{
    double coeff = e * (e - 1.0) / 2.0;
    double power = 1.0;
    double total = 0.0;
    for (int k = 2; k < 80; ++k) {
        const double term = coeff * power;
        total += term;
        if (std::fabs(term) < 1e-18 * std::fabs(total)) {
            break;
        }
        coeff *= (e - k) / (k + 1.0);
        power *= h;
    }
    return total;
}

} // namespace

double stable_identity_residual(double alpha, double truncation, bool tail_correction)
{
    require(alpha > 1.0 && alpha < 2.0, ErrorKind::InvalidParameter, "stable identity needs alpha in (1, 2)");
    require(truncation > 1.0, ErrorKind::InvalidParameter, "truncation radius must exceed 1");
    const double e = alpha - 1.0;
    auto integrand = [=](double h) {
        const double ah = std::fabs(h);
        if (ah == 0.0) {
            return 0.0;
        }
        if (ah < 0.2) {
            return binomial_quotient(e, h) * std::pow(ah, 1.0 - alpha);
        }
        return (std::pow(std::fabs(1.0 + h), e) - 1.0 - e * h) * std::pow(ah, -1.0 - alpha);
    };
    const double pieces[5] = {-truncation, -1.0, 0.0, 1.0, truncation};
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
        total += integrate_tanh_sinh(integrand, pieces[k], pieces[k + 1], 1e-13, 15).value;
    }
    if (tail_correction) {
        const double s = 1.0 / truncation;
        total += (std::expm1(alpha * std::log1p(s)) - std::expm1(alpha * std::log1p(-s))) / alpha
                 - 2.0 * std::pow(truncation, -alpha) / alpha;
    }
    return total;
}

double stable_constant(double alpha)
{
    require(alpha > 0.0 && alpha < 2.0, ErrorKind::InvalidParameter, "stable constant needs alpha in (0, 2)");
    auto near = [=](double h) {
        if (h == 0.0) {
            return 0.0;
        }
        const double s = std::sin(0.5 * h) / h;
        return 2.0 * s * s * std::pow(h, 1.0 - alpha);
    };
    double half = integrate_tanh_sinh(near, 0.0, 1.0, 1e-14, 15).value;
    // Whole periods of cos past 1, then the algebraic tail in closed form.
    constexpr int kPeriods = 400;
    const double two_pi = 2.0 * std::numbers::pi;
    auto osc = [=](double h) { return (1.0 - std::cos(h)) * std::pow(h, -1.0 - alpha); };
    half += integrate_gauss(osc, 1.0, two_pi, 4, 20);
    for (int k = 1; k < kPeriods; ++k) {
        half += integrate_gauss(osc, k * two_pi, (k + 1) * two_pi, 2, 20);
    }
    const double H = kPeriods * two_pi;
    const double beta = 1.0 + alpha;
    // int_H^inf h^{-beta} dh minus the leading term of int_H^inf cos(h) h^{-beta} dh.
    half += std::pow(H, -alpha) / alpha - beta * std::pow(H, -beta - 1.0);
    return 2.0 * half;
}

double stable_constant_closed_form(double alpha)
{
    require(alpha > 0.0 && alpha < 2.0, ErrorKind::InvalidParameter, "closed form needs alpha in (0, 2)");
    if (alpha == 1.0) {
        return std::numbers::pi;
    }
    return -2.0 * std::tgamma(-alpha) * std::cos(0.5 * std::numbers::pi * alpha);
}

} // namespace mkc
