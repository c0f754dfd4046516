#include "mkc/porous_media.hpp"

#include <algorithm>
#include <cmath>

#include "mkc/error.hpp"
#include "mkc/quadrature.hpp"

namespace mkc {

NonlinearityA::NonlinearityA(ScalarField A, ScalarField A2, double dimension)
    : A_(std::move(A)), A2_(std::move(A2)), dimension_(dimension)
{
    require(static_cast<bool>(A2_), ErrorKind::InvalidParameter, "A'' must be provided");
    require(dimension_ >= 1.0, ErrorKind::InvalidParameter, "dimension must be at least 1");
}

NonlinearityA NonlinearityA::power(double m, double dimension)
{
    require(m > 0.0, ErrorKind::InvalidParameter, "exponent must be positive");
    NonlinearityA a(
        [m](double u) { return std::pow(u, m) / m; },
        [m](double u) { return m == 1.0 ? 0.0 : (m - 1.0) * std::pow(u, m - 2.0); }, dimension);
    a.B_closed_ = [m](double r) { return (m - 1.0) / m * std::pow(r, m); };
    return a;
}

double NonlinearityA::B_quadrature(double r) const
{
    if (r == 0.0) {
        return 0.0;
    }
    return integrate_tanh_sinh([this](double w) { return w * A2_(w); }, 0.0, r, 1e-13).value;
}

double NonlinearityA::B(double r) const
{
    require(r >= 0.0, ErrorKind::InvalidParameter, "B is evaluated on densities (r >= 0)");
    if (B_closed_) {
        return B_closed_(r);
    }
    if (!cache_B_.empty() && r <= cache_max_) {
        const std::size_t n = cache_B_.size();
        const double h = cache_max_ / static_cast<double>(n - 1);
        const auto k = std::min(static_cast<std::size_t>(r / h), n - 2);
        const double r0 = static_cast<double>(k) * h;
        const double s = (r - r0) / h;
        const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        const double h10 = s * (1.0 - s) * (1.0 - s);
        const double h01 = s * s * (3.0 - 2.0 * s);
        const double h11 = s * s * (s - 1.0);
        return h00 * cache_B_[k] + h10 * h * B_prime(r0) + h01 * cache_B_[k + 1] + h11 * h * B_prime(r0 + h);
    }
    return B_quadrature(r);
}

void NonlinearityA::cache(double r_max, std::size_t nodes)
{
    if (B_closed_ || r_max <= 0.0) {
        return;
    }
    require(nodes >= 2, ErrorKind::InvalidParameter, "cache needs at least two nodes");
    cache_B_.assign(nodes, 0.0);
    const double h = r_max / static_cast<double>(nodes - 1);
    for (std::size_t k = 1; k < nodes; ++k) {
        const double a = static_cast<double>(k - 1) * h;
        const double b = static_cast<double>(k) * h;
        cache_B_[k] = cache_B_[k - 1] +
                      integrate_tanh_sinh([this](double w) { return w * A2_(w); }, a, b, 1e-13).value;
    }
    cache_max_ = r_max;
}

Admissibility check_admissible(const NonlinearityA& A, const std::vector<double>& r_grid)
{
    require(!r_grid.empty(), ErrorKind::InvalidParameter, "empty r grid");
    Admissibility out{true, true};
    const double e = 1.0 / A.dimension() - 1.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < r_grid.size(); ++k) {
        const double r = r_grid[k];
        require(r > 0.0 && (k == 0 || r > r_grid[k - 1]), ErrorKind::InvalidParameter,
                "r grid must be positive and increasing");
        const double b = A.B(r);
        require(std::isfinite(b), ErrorKind::QuadratureFailure, "B is not finite");
        if (b < -1e-14 * std::max(1.0, std::fabs(b))) {
            out.b_nonneg = false;
        }
        const double g = std::pow(r, e) * b;
        if (k > 0 && g < prev - 1e-12 * std::max(std::fabs(g), std::fabs(prev))) {
            out.monotone = false;
        }
        prev = g;
    }
    return out;
}

std::vector<double> default_r_grid(double r_max, std::size_t points)
{
    std::vector<double> r(points);
    const double lo = std::log(1e-6);
    const double hi = std::log(r_max);
    for (std::size_t k = 0; k < points; ++k) {
        r[k] = std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1));
    }
    return r;
}

PmeSolution solve_pme_1d(const NonlinearityA& A0, const GridDensity& u0, double T, std::size_t checkpoints,
                         double cfl, double dt)
{
    require(u0.dim() == 1 && u0.size() >= 3, ErrorKind::DimensionMismatch, "1D grid with at least 3 cells expected");
    require(T > 0.0 && checkpoints >= 2, ErrorKind::InvalidParameter, "need T > 0 and at least two checkpoints");
    require(cfl > 0.0 && cfl <= 0.5, ErrorKind::CFLViolation, "explicit scheme needs cfl in (0, 1/2]");
    const std::size_t n = u0.size();
    const double dx = u0.spacing()[0];
    double umax = 0.0;
    for (double v : u0.values()) {
        require(v >= 0.0 && std::isfinite(v), ErrorKind::PositivityViolated, "initial density must be >= 0");
        umax = std::max(umax, v);
    }
    NonlinearityA A = A0;
    A.cache(umax * (1.0 + 1e-9));

    PmeSolution sol;
    GridDensity u = u0;
    auto& f = u.values();
    std::vector<double> b(n);
    sol.times.push_back(0.0);
    sol.snapshots.push_back(u);
    double t = 0.0;
    for (std::size_t c = 1; c < checkpoints; ++c) {
        const double target = T * static_cast<double>(c) / static_cast<double>(checkpoints - 1);
        while (t < target) {
            double bmax = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                b[k] = A.B(f[k]);
                const double slope = A.B_prime(f[k]);
                require(slope >= -1e-14, ErrorKind::InvalidParameter, "B must be non-decreasing for this scheme");
                bmax = std::max(bmax, slope);
            }
            if (bmax == 0.0) {
                t = target;
                break;
            }
            const double limit = cfl * dx * dx / bmax;
            double tau = limit;
            if (dt > 0.0) {
                require(dt <= 0.5 * dx * dx / bmax, ErrorKind::CFLViolation, "fixed step exceeds dx^2 / (2 max B')");
                tau = dt;
            }
            bool last = false;
            if (t + tau >= target) {
                tau = target - t;
                last = true;
            }
            const double r = tau / (dx * dx);
            double left = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double right = k + 1 < n ? b[k + 1] - b[k] : 0.0;
                f[k] += r * (right - left);
                left = right;
            }
            ++sol.steps;
            t = last ? target : t + tau;
        }
        sol.times.push_back(target);
        sol.snapshots.push_back(u);
    }
    sol.times.back() = T;
    return sol;
}

PiecewiseCdf::PiecewiseCdf(const GridDensity& u)
{
    require(u.dim() == 1, ErrorKind::DimensionMismatch, "1D density expected");
    const std::size_t n = u.size();
    const double dx = u.spacing()[0];
    edges_.resize(n + 1);
    cum_.assign(n + 1, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
        edges_[k] = u.origin()[0] + static_cast<double>(k) * dx;
    }
    for (std::size_t k = 0; k < n; ++k) {
        require(u.values()[k] >= 0.0, ErrorKind::PositivityViolated, "density must be nonnegative");
        cum_[k + 1] = cum_[k] + u.values()[k] * dx;
    }
    mass_ = cum_.back();
    require(mass_ > 0.0 && std::isfinite(mass_), ErrorKind::DegenerateCDF, "density has zero total mass");
    for (double& c : cum_) {
        c /= mass_;
    }
    cum_.back() = 1.0;
}

double PiecewiseCdf::cdf(double x) const
{
    if (x <= edges_.front()) return 0.0;
    if (x >= edges_.back()) return 1.0;
    const double dx = edges_[1] - edges_[0];
    const auto k = std::min(static_cast<std::size_t>((x - edges_.front()) / dx), edges_.size() - 2);
    const double s = (x - edges_[k]) / dx;
    return cum_[k] + s * (cum_[k + 1] - cum_[k]);
}

double PiecewiseCdf::quantile(double q) const
{
    if (q <= 0.0) {
        auto it = std::upper_bound(cum_.begin(), cum_.end(), 0.0);
        return edges_[static_cast<std::size_t>(it - cum_.begin()) - 1];
    }
    if (q >= 1.0) {
        auto it = std::lower_bound(cum_.begin(), cum_.end(), 1.0);
        return edges_[static_cast<std::size_t>(it - cum_.begin())];
    }
    auto it = std::lower_bound(cum_.begin() + 1, cum_.end(), q);
    const auto k = static_cast<std::size_t>(it - cum_.begin()) - 1;
    const double span = cum_[k + 1] - cum_[k];
    const double s = span > 0.0 ? (q - cum_[k]) / span : 0.0;
    return edges_[k] + s * (edges_[k + 1] - edges_[k]);
}

BrenierMap brenier_map_1d(const GridDensity& u1, const GridDensity& u2)
{
    const PiecewiseCdf F1(u1);
    const PiecewiseCdf F2(u2);
    BrenierMap map;
    map.x.resize(u1.size());
    map.y.resize(u1.size());
    for (std::size_t k = 0; k < u1.size(); ++k) {
        map.x[k] = u1.center(0, k);
        map.y[k] = F2.quantile(F1.cdf(map.x[k]));
        require(k == 0 || map.y[k] >= map.y[k - 1], ErrorKind::ConstraintViolated, "transport map is not monotone");
    }
    return map;
}

namespace {

std::vector<double> merged(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> m;
    m.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(m));
    m.erase(std::unique(m.begin(), m.end()), m.end());
    return m;
}

} // namespace

double quantile_distance(const GridDensity& u1, const GridDensity& u2, double p)
{
    require(p >= 1.0, ErrorKind::InvalidParameter, "p must be at least 1");
    const PiecewiseCdf F1(u1);
    const PiecewiseCdf F2(u2);
    const std::vector<double> qs = merged(F1.cumulative(), F2.cumulative());
    const GaussRule& rule = gauss_legendre(8);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < qs.size(); ++k) {
        const double a = qs[k];
        const double b = qs[k + 1];
        if (b <= a) continue;
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            const double q = mid + half * rule.nodes[g];
            s += rule.weights[g] * std::pow(std::fabs(F1.quantile(q) - F2.quantile(q)), p);
        }
        acc += s * half;
    }
    return acc / p;
}

double transport_cost_d2(const GridDensity& u1, const GridDensity& u2)
{
    const PiecewiseCdf F1(u1);
    const PiecewiseCdf F2(u2);
    std::vector<double> preimages;
    for (double q : F2.cumulative()) {
        if (q > 0.0 && q < 1.0) {
            preimages.push_back(F1.quantile(q));
        }
    }
    std::sort(preimages.begin(), preimages.end());
    const std::vector<double> xs = merged(F1.edges(), preimages);
    const GaussRule& rule = gauss_legendre(3);
    const double dx = u1.spacing()[0];
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const double a = xs[k];
        const double b = xs[k + 1];
        if (b <= a) continue;
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        const auto cell = std::min(static_cast<std::size_t>((mid - F1.edges().front()) / dx), u1.size() - 1);
        const double density = u1.values()[cell] / F1.mass();
        if (density == 0.0) continue;
        double s = 0.0;
        for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
            const double x = mid + half * rule.nodes[g];
            const double d = x - F2.quantile(F1.cdf(x));
            s += rule.weights[g] * d * d;
        }
        acc += 0.5 * density * s * half;
    }
    return acc;
}

namespace {

GridDensity floored(const GridDensity& u, double floor)
{
    GridDensity g = u;
    for (double& v : g.values()) {
        require(v >= 0.0 && std::isfinite(v), ErrorKind::PositivityViolated, "density must be finite and >= 0");
        v = std::max(v, floor);
    }
    return normalize(g);
}

double interpolate_centres(const GridDensity& u, double x)
{
    const double dx = u.spacing()[0];
    const double s = (x - u.origin()[0]) / dx - 0.5;
    if (s <= 0.0) return u.values().front();
    const auto k = static_cast<std::size_t>(s);
    if (k + 1 >= u.size()) return u.values().back();
    const double w = s - static_cast<double>(k);
    return (1.0 - w) * u.values()[k] + w * u.values()[k + 1];
}

// -sum d/dx[B(u)] (x - map(x)) dx
double transport_dissipation(const GridDensity& u, const BrenierMap& map, const NonlinearityA& A)
{
    const std::size_t n = u.size();
    const double dx = u.spacing()[0];
    std::vector<double> b(n);
    for (std::size_t k = 0; k < n; ++k) {
        b[k] = A.B(u.values()[k]);
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double grad = 0.0;
        if (k == 0) {
            grad = (b[1] - b[0]) / dx;
        } else if (k + 1 == n) {
            grad = (b[n - 1] - b[n - 2]) / dx;
        } else {
            grad = (b[k + 1] - b[k - 1]) / (2.0 * dx);
        }
        acc -= grad * (map.x[k] - map.y[k]);
    }
    return acc * dx;
}

} // namespace

Dissipation dissipation_terms(const GridDensity& u1_in, const GridDensity& u2_in, const NonlinearityA& A)
{
    require(A.dimension() == 1.0, ErrorKind::InvalidParameter, "dissipation terms are one-dimensional");
    require(u1_in.dim() == 1 && u1_in.shape() == u2_in.shape() && u1_in.origin() == u2_in.origin() &&
                u1_in.spacing() == u2_in.spacing(),
            ErrorKind::DimensionMismatch, "densities must share one 1D grid");
    constexpr double kFloor = 1e-12;
    const GridDensity u1 = floored(u1_in, kFloor);
    const GridDensity u2 = floored(u2_in, kFloor);
    const BrenierMap forward = brenier_map_1d(u1, u2);
    const BrenierMap backward = brenier_map_1d(u2, u1);

    Dissipation out;
    out.D1 = transport_dissipation(u1, forward, A);
    out.D2 = transport_dissipation(u2, backward, A);

    const double dx = u1.spacing()[0];
    double max_u = 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < u1.size(); ++k) {
        const double a = u1.values()[k];
        const double b = std::max(interpolate_centres(u2, forward.y[k]), kFloor);
        max_u = std::max({max_u, a, b});
        acc += a * (A.B(a) - A.B(b)) * (1.0 / a - 1.0 / b);
    }
    out.bound = acc * dx;
    if (check_admissible(A, default_r_grid(std::max(max_u, 1e-3))).ok()) {
        require(out.bound <= 1e-6, ErrorKind::ConstraintViolated, "dissipation bound is positive for admissible A");
    }
    return out;
}

DistanceSeries pme_contraction_experiment(const NonlinearityA& A, const GridDensity& u1_0, const GridDensity& u2_0,
                                          double T, std::size_t checkpoints, double cfl)
{
    double umax = 0.0;
    for (const auto* u : {&u1_0, &u2_0}) {
        for (double v : u->values()) umax = std::max(umax, v);
    }
    require(check_admissible(A, default_r_grid(std::max(umax, 1e-3))).ok(), ErrorKind::ConstraintViolated,
            "nonlinearity fails the admissibility test");
    const PmeSolution s1 = solve_pme_1d(A, u1_0, T, checkpoints, cfl);
    const PmeSolution s2 = solve_pme_1d(A, u2_0, T, checkpoints, cfl);
    DistanceSeries series;
    series.cost = "power:2";
    for (std::size_t c = 0; c < s1.times.size(); ++c) {
        const double d = quantile_distance(s1.snapshots[c], s2.snapshots[c], 2.0);
        series.push(s1.times[c], d, d, d, d, 0.0);
    }
    return series;
}

} // namespace mkc
