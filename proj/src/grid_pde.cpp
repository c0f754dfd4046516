#include "mkc/grid_pde.hpp"

#include <algorithm>
#include <cmath>

#include "mkc/error.hpp"
#include "mkc/ot.hpp"

namespace mkc {

namespace {

struct Square {
    std::size_t n = 0;
    double dx = 0.0;
};

Square check_square(const GridDensity& v)
{
    require(v.dim() == 2, ErrorKind::DimensionMismatch, "coupling density must be two-dimensional");
    require(v.shape()[0] == v.shape()[1] && v.shape()[0] >= 3, ErrorKind::DimensionMismatch,
            "coupling grid must be square with at least 3 cells per axis");
    require(std::fabs(v.spacing()[0] - v.spacing()[1]) <= 1e-14 * v.spacing()[0], ErrorKind::DimensionMismatch,
            "coupling grid must use one spacing on both axes");
    return {v.shape()[0], v.spacing()[0]};
}

using Field = std::vector<double>;
using Operator = std::function<void(const Field&, Field&)>;

// Diagonal second difference w(i+1,j+1) + w(i-1,j-1) - 2 w(i,j); missing
// neighbours take the centre value, which makes every term conservative.
void diagonal_2d(const Field& w, Field& out, std::size_t n, double inv)
{
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double c = w[i * n + j];
            const double up = (i + 1 < n && j + 1 < n) ? w[(i + 1) * n + j + 1] : c;
            const double down = (i > 0 && j > 0) ? w[(i - 1) * n + j - 1] : c;
            out[i * n + j] = (up + down - 2.0 * c) * inv;
        }
    }
}

// Same operator, one 1D no-flux Laplacian per diagonal j - i = const.
void diagonal_rotated(const Field& w, Field& out, std::size_t n, double inv)
{
    std::vector<double> a(n);
    const auto m = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t d = -(m - 1); d <= m - 1; ++d) {
        const std::size_t i0 = d < 0 ? static_cast<std::size_t>(-d) : 0;
        const std::size_t j0 = d > 0 ? static_cast<std::size_t>(d) : 0;
        const std::size_t len = n - std::max(i0, j0);
        for (std::size_t k = 0; k < len; ++k) {
            a[k] = w[(i0 + k) * n + j0 + k];
        }
        for (std::size_t k = 0; k < len; ++k) {
            const double c = a[k];
            const double up = k + 1 < len ? a[k + 1] : c;
            const double down = k > 0 ? a[k - 1] : c;
            out[(i0 + k) * n + j0 + k] = (up + down - 2.0 * c) * inv;
        }
    }
}

double at_or(const Field& w, std::size_t n, std::ptrdiff_t i, std::ptrdiff_t j, double fallback)
{
    const auto m = static_cast<std::ptrdiff_t>(n);
    if (i < 0 || j < 0 || i >= m || j >= m) {
        return fallback;
    }
    return w[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)];
}

// d_xx + d_yy + 2 d_xy with the 7-point mixed stencil
// w(++) - w(+0) - w(0+) + 2w - w(-0) - w(0-) + w(--).
void seven_point(const Field& w, Field& out, std::size_t n, double inv)
{
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto a = static_cast<std::ptrdiff_t>(i);
            const auto b = static_cast<std::ptrdiff_t>(j);
            const double c = w[i * n + j];
            const double e = at_or(w, n, a + 1, b, c);
            const double wv = at_or(w, n, a - 1, b, c);
            const double nn = at_or(w, n, a, b + 1, c);
            const double s = at_or(w, n, a, b - 1, c);
            const double ne = at_or(w, n, a + 1, b + 1, c);
            const double sw = at_or(w, n, a - 1, b - 1, c);
            const double xx = e + wv - 2.0 * c;
            const double yy = nn + s - 2.0 * c;
            const double xy = ne - e - nn + 2.0 * c - wv - s + sw;
            out[i * n + j] = (xx + yy + xy) * inv;
        }
    }
}

// Second difference along one axis with the same ghost rule.
void axis_laplacian_add(const Field& w, Field& out, std::size_t n, double inv, int axis)
{
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double c = w[i * n + j];
            double up = c;
            double down = c;
            if (axis == 0) {
                if (i + 1 < n) up = w[(i + 1) * n + j];
                if (i > 0) down = w[(i - 1) * n + j];
            } else {
                if (j + 1 < n) up = w[i * n + j + 1];
                if (j > 0) down = w[i * n + j - 1];
            }
            out[i * n + j] += (up + down - 2.0 * c) * inv;
        }
    }
}

// Monotonized central slope.
double limited_slope(double a, double b)
{
    if (a * b <= 0.0) {
        return 0.0;
    }
    const double m = std::min({2.0 * std::fabs(a), 2.0 * std::fabs(b), 0.5 * std::fabs(a + b)});
    return a > 0.0 ? m : -m;
}

// Limited upwind face values for a line of cells; flux[k] sits between k and k+1.
void line_fluxes(const double* u, std::size_t stride, std::size_t n, const std::vector<double>& face_velocity,
                 std::vector<double>& flux)
{
    auto val = [&](std::size_t k) { return u[k * stride]; };
    auto slope = [&](std::size_t k) {
        if (k == 0 || k + 1 == n) {
            return 0.0;
        }
        return limited_slope(val(k) - val(k - 1), val(k + 1) - val(k));
    };
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double a = face_velocity[k];
        if (a >= 0.0) {
            flux[k] = a * (val(k) + 0.5 * slope(k));
        } else {
            flux[k] = a * (val(k + 1) - 0.5 * slope(k + 1));
        }
    }
}

void ssp_rk2(Field& v, double dt, const Operator& L, Field& k1, Field& stage)
{
    L(v, k1);
    for (std::size_t q = 0; q < v.size(); ++q) {
        stage[q] = v[q] + dt * k1[q];
    }
    L(stage, k1);
    for (std::size_t q = 0; q < v.size(); ++q) {
        v[q] = 0.5 * v[q] + 0.5 * (stage[q] + dt * k1[q]);
    }
}

struct Schedule {
    std::size_t steps = 0;
    double dt = 0.0;
    std::vector<std::size_t> marks;
};

Schedule make_schedule(double T, double dt_max, std::size_t checkpoints)
{
    require(T > 0.0, ErrorKind::InvalidParameter, "horizon must be positive");
    require(checkpoints >= 2, ErrorKind::InvalidParameter, "need at least two checkpoints");
    const std::size_t intervals = checkpoints - 1;
    const auto per = static_cast<std::size_t>(std::ceil(T / (static_cast<double>(intervals) * dt_max) - 1e-9));
    Schedule s;
    s.steps = intervals * std::max<std::size_t>(per, 1);
    s.dt = T / static_cast<double>(s.steps);
    for (std::size_t k = 0; k <= intervals; ++k) {
        s.marks.push_back(k * (s.steps / intervals));
    }
    return s;
}

double resolve_dt(double requested, double limit)
{
    if (requested <= 0.0) {
        return limit;
    }
    require(requested <= limit * (1.0 + 1e-12), ErrorKind::CFLViolation, "time step exceeds the stability limit");
    return requested;
}

CouplingGridRun run_coupling(const GridDensity& v0, const GridRunOptions& options, double dt_limit, const Operator& L)
{
    const Square sq = check_square(v0);
    const double dt_max = resolve_dt(options.dt, dt_limit);
    const Schedule sched = make_schedule(options.T, dt_max, options.checkpoints);
    const std::size_t n = sq.n;

    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            cost[i * n + j] = eval_cost(options.cost, v0.center(0, i), v0.center(1, j));
        }
    }
    const double cell = sq.dx * sq.dx;

    CouplingGridRun run;
    run.v = v0;
    run.dx = sq.dx;
    run.dt = sched.dt;
    auto monitor = [&](double t) {
        GridMonitor m;
        m.t = t;
        const auto& f = run.v.values();
        double mass = 0.0;
        double acc = 0.0;
        for (std::size_t q = 0; q < f.size(); ++q) {
            mass += f[q];
            acc += f[q] * cost[q];
        }
        m.mass = mass * cell;
        m.cost_integral = acc * cell;
        m.min_value = run.v.min_value();
        run.monitors.push_back(m);
    };

    Field k1(n * n), stage(n * n);
    std::size_t step = 0;
    for (std::size_t mark : sched.marks) {
        while (step < mark) {
            ssp_rk2(run.v.values(), sched.dt, L, k1, stage);
            ++step;
        }
        run.time = static_cast<double>(step) * sched.dt;
        monitor(run.time);
    }
    run.time = options.T;
    run.monitors.back().t = options.T;
    run.u1 = marginal(run.v, 0);
    run.u2 = marginal(run.v, 1);
    return run;
}

double max_abs_on_faces(const std::vector<double>& a)
{
    double m = 0.0;
    for (double x : a) {
        m = std::max(m, std::fabs(x));
    }
    return m;
}

std::vector<double> face_velocities(const ScalarField& V, double origin, double dx, std::size_t n)
{
    std::vector<double> a(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        a[k] = V(origin + static_cast<double>(k + 1) * dx);
        require(std::isfinite(a[k]), ErrorKind::InvalidParameter, "velocity is not finite on the grid");
    }
    return a;
}

void tridiagonal_solve(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper,
                       std::vector<double>& rhs)
{
    const std::size_t n = diag.size();
    for (std::size_t k = 1; k < n; ++k) {
        const double w = lower[k] / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) {
        rhs[k] = (rhs[k] - upper[k] * rhs[k + 1]) / diag[k];
    }
}

} // namespace

GridDensity marginal(const GridDensity& v, std::size_t axis)
{
    require(v.dim() == 2 && axis < 2, ErrorKind::DimensionMismatch, "marginals are taken of 2D densities");
    const std::size_t n0 = v.shape()[0];
    const std::size_t n1 = v.shape()[1];
    const std::size_t len = axis == 0 ? n0 : n1;
    const double other = v.spacing()[1 - axis];
    std::vector<double> m(len, 0.0);
    for (std::size_t i = 0; i < n0; ++i) {
        for (std::size_t j = 0; j < n1; ++j) {
            m[axis == 0 ? i : j] += v.at(i, j);
        }
    }
    for (double& x : m) {
        x *= other;
    }
    return GridDensity({v.origin()[axis]}, {v.spacing()[axis]}, {len}, std::move(m));
}

double l1_distance(const GridDensity& a, const GridDensity& b)
{
    require(a.shape() == b.shape(), ErrorKind::DimensionMismatch, "grids differ in shape");
    double s = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) {
        s += std::fabs(a.values()[q] - b.values()[q]);
    }
    return s * a.cell_volume();
}

CouplingGridRun solve_coupling_heat(const GridDensity& v0, const GridRunOptions& options)
{
    const Square sq = check_square(v0);
    const double inv = 1.0 / (sq.dx * sq.dx);
    const std::size_t n = sq.n;
    return run_coupling(v0, options, sq.dx * sq.dx / 8.0,
                        [n, inv](const Field& w, Field& out) { diagonal_rotated(w, out, n, inv); });
}

CouplingGridRun solve_coupling_heat_direct(const GridDensity& v0, const GridRunOptions& options)
{
    const Square sq = check_square(v0);
    const double inv = 1.0 / (sq.dx * sq.dx);
    const std::size_t n = sq.n;
    return run_coupling(v0, options, sq.dx * sq.dx / 8.0,
                        [n, inv](const Field& w, Field& out) { seven_point(w, out, n, inv); });
}

CouplingGridRun solve_coupling_fp(const GridDensity& v0, const ScalarField& V, const GridRunOptions& options)
{
    const Square sq = check_square(v0);
    const std::size_t n = sq.n;
    const double dx = sq.dx;
    const double inv = 1.0 / (dx * dx);
    const auto ax = face_velocities(V, v0.origin()[0], dx, n);
    const auto ay = face_velocities(V, v0.origin()[1], dx, n);
    const double vmax = std::max(max_abs_on_faces(ax), max_abs_on_faces(ay));
    double limit = dx * dx / 8.0;
    if (vmax > 0.0) {
        limit = std::min(limit, 0.25 * dx / vmax);
    }
    auto L = [=](const Field& w, Field& out) {
        diagonal_2d(w, out, n, inv);
        std::vector<double> flux(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            line_fluxes(w.data() + j, n, n, ax, flux);
            for (std::size_t i = 0; i < n; ++i) {
                const double right = i + 1 < n ? flux[i] : 0.0;
                const double left = i > 0 ? flux[i - 1] : 0.0;
                out[i * n + j] -= (right - left) / dx;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            line_fluxes(w.data() + i * n, 1, n, ay, flux);
            for (std::size_t j = 0; j < n; ++j) {
                const double right = j + 1 < n ? flux[j] : 0.0;
                const double left = j > 0 ? flux[j - 1] : 0.0;
                out[i * n + j] -= (right - left) / dx;
            }
        }
    };
    return run_coupling(v0, options, limit, L);
}

CouplingGridRun solve_coupling_varcoef(const GridDensity& v0, const ScalarField& sigma, const GridRunOptions& options)
{
    const Square sq = check_square(v0);
    const std::size_t n = sq.n;
    const double inv = 1.0 / (sq.dx * sq.dx);
    std::vector<double> sx(n), sy(n);
    double smax = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sx[k] = sigma(v0.center(0, k));
        sy[k] = sigma(v0.center(1, k));
        require(std::isfinite(sx[k]) && std::isfinite(sy[k]), ErrorKind::InvalidParameter,
                "sigma is not finite on the grid");
        smax = std::max({smax, std::fabs(sx[k]), std::fabs(sy[k])});
    }
    require(smax > 0.0, ErrorKind::InvalidParameter, "sigma vanishes on the whole grid");
    // sigma(x)^2 d_xx + sigma(y)^2 d_yy + 2 sigma(x) sigma(y) d_xy
    //   = (d_x + d_y)^2 [s s] + d_xx [s(x)(s(x) - s(y))] + d_yy [s(y)(s(y) - s(x))]
    std::vector<double> cs(n * n), cx(n * n), cy(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            cs[i * n + j] = sx[i] * sy[j];
            cx[i * n + j] = sx[i] * (sx[i] - sy[j]);
            cy[i * n + j] = sy[j] * (sy[j] - sx[i]);
        }
    }
    auto L = [=](const Field& w, Field& out) {
        Field tmp(w.size());
        for (std::size_t q = 0; q < w.size(); ++q) {
            tmp[q] = cs[q] * w[q];
        }
        diagonal_2d(tmp, out, n, inv);
        for (std::size_t q = 0; q < w.size(); ++q) {
            tmp[q] = cx[q] * w[q];
        }
        axis_laplacian_add(tmp, out, n, inv, 0);
        for (std::size_t q = 0; q < w.size(); ++q) {
            tmp[q] = cy[q] * w[q];
        }
        axis_laplacian_add(tmp, out, n, inv, 1);
    };
    return run_coupling(v0, options, sq.dx * sq.dx / (8.0 * smax * smax), L);
}

GridDensity solve_heat_1d(const GridDensity& u0, double T, double dt)
{
    require(u0.dim() == 1 && u0.size() >= 2, ErrorKind::DimensionMismatch, "1D grid expected");
    require(T > 0.0 && dt > 0.0, ErrorKind::InvalidParameter, "horizon and step must be positive");
    const std::size_t n = u0.size();
    const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    const double tau = T / static_cast<double>(steps);
    const double r = 0.5 * tau / (u0.spacing()[0] * u0.spacing()[0]);
    std::vector<double> lower(n, -r), upper(n, -r), diag(n, 1.0 + 2.0 * r);
    diag.front() = diag.back() = 1.0 + r;
    lower.front() = upper.back() = 0.0;
    GridDensity u = u0;
    auto& f = u.values();
    std::vector<double> rhs(n);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t k = 0; k < n; ++k) {
            const double up = k + 1 < n ? f[k + 1] : f[k];
            const double down = k > 0 ? f[k - 1] : f[k];
            rhs[k] = f[k] + r * (up + down - 2.0 * f[k]);
        }
        tridiagonal_solve(lower, diag, upper, rhs);
        f = rhs;
    }
    return u;
}

GridDensity solve_fp_1d(const GridDensity& u0, const ScalarField& V, double T, double dt)
{
    require(u0.dim() == 1 && u0.size() >= 3, ErrorKind::DimensionMismatch, "1D grid expected");
    const std::size_t n = u0.size();
    const double dx = u0.spacing()[0];
    const double inv = 1.0 / (dx * dx);
    const auto a = face_velocities(V, u0.origin()[0], dx, n);
    double limit = dx * dx / 4.0;
    const double vmax = max_abs_on_faces(a);
    if (vmax > 0.0) {
        limit = std::min(limit, 0.25 * dx / vmax);
    }
    const double step = resolve_dt(dt, limit);
    const Schedule sched = make_schedule(T, step, 2);
    auto L = [&](const Field& w, Field& out) {
        std::vector<double> flux(n - 1);
        line_fluxes(w.data(), 1, n, a, flux);
        for (std::size_t k = 0; k < n; ++k) {
            const double c = w[k];
            const double up = k + 1 < n ? w[k + 1] : c;
            const double down = k > 0 ? w[k - 1] : c;
            const double right = k + 1 < n ? flux[k] : 0.0;
            const double left = k > 0 ? flux[k - 1] : 0.0;
            out[k] = (up + down - 2.0 * c) * inv - (right - left) / dx;
        }
    };
    GridDensity u = u0;
    Field k1(n), stage(n);
    for (std::size_t s = 0; s < sched.steps; ++s) {
        ssp_rk2(u.values(), sched.dt, L, k1, stage);
    }
    return u;
}

std::size_t Lattice::sites() const
{
    return static_cast<std::size_t>(std::llround(2.0 * R / h)) + 1;
}

double Lattice::site(std::size_t k) const
{
    return -R + static_cast<double>(k) * h;
}

std::vector<double> lattice_atom(const Lattice& lattice, double x)
{
    std::vector<double> u(lattice.sites(), 0.0);
    const long k = std::lround((x + lattice.R) / lattice.h);
    require(k >= 0 && static_cast<std::size_t>(k) < u.size(), ErrorKind::InvalidParameter, "atom outside lattice");
    u[static_cast<std::size_t>(k)] = 1.0 / lattice.h;
    return u;
}

LatticeSolution solve_discrete_heat(const Lattice& lattice, std::vector<double> u0, double T, std::size_t checkpoints,
                                    double dt)
{
    require(lattice.h > 0.0 && lattice.R > 0.0, ErrorKind::InvalidParameter, "lattice needs h > 0 and R > 0");
    const std::size_t n = lattice.sites();
    require(u0.size() == n, ErrorKind::DimensionMismatch, "initial data does not match the lattice");
    const double inv = 1.0 / (lattice.h * lattice.h);
    const double step = resolve_dt(dt, 0.25 * lattice.h * lattice.h);
    const Schedule sched = make_schedule(T, step, checkpoints);

    auto L = [&](const std::vector<double>& u, std::vector<double>& out) {
        for (std::size_t k = 0; k < n; ++k) {
            const double c = u[k];
            const double up = k + 1 < n ? u[k + 1] : c;
            const double down = k > 0 ? u[k - 1] : c;
            out[k] = (up + down - 2.0 * c) * inv;
        }
    };

    LatticeSolution sol;
    sol.lattice = lattice;
    std::vector<double> u = std::move(u0);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    const double tau = sched.dt;
    std::size_t s = 0;
    for (std::size_t mark : sched.marks) {
        while (s < mark) {
            L(u, k1);
            for (std::size_t k = 0; k < n; ++k) tmp[k] = u[k] + 0.5 * tau * k1[k];
            L(tmp, k2);
            for (std::size_t k = 0; k < n; ++k) tmp[k] = u[k] + 0.5 * tau * k2[k];
            L(tmp, k3);
            for (std::size_t k = 0; k < n; ++k) tmp[k] = u[k] + tau * k3[k];
            L(tmp, k4);
            for (std::size_t k = 0; k < n; ++k) {
                u[k] += tau / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
            }
            ++s;
        }
        sol.times.push_back(static_cast<double>(s) * tau);
        sol.values.push_back(u);
    }
    sol.times.back() = T;
    return sol;
}

DualityExperiment discrete_duality_experiment(const Lattice& lattice, const std::vector<double>& u1_0,
                                              const std::vector<double>& u2_0, double p, double T,
                                              std::size_t checkpoints)
{
    require(p >= 1.0, ErrorKind::InvalidParameter, "p must be at least 1");
    const std::size_t n = lattice.sites();
    for (const auto* u : {&u1_0, &u2_0}) {
        require(u->size() == n, ErrorKind::DimensionMismatch, "initial data does not match the lattice");
        double mass = 0.0;
        for (double x : *u) {
            require(x >= 0.0, ErrorKind::InvalidParameter, "lattice densities must be nonnegative");
            mass += x * lattice.h;
        }
        require(std::fabs(mass - 1.0) <= 1e-10, ErrorKind::ZeroMass, "lattice measures must be normalized");
    }
    const LatticeSolution s1 = solve_discrete_heat(lattice, u1_0, T, checkpoints);
    const LatticeSolution s2 = solve_discrete_heat(lattice, u2_0, T, checkpoints);

    std::vector<double> xs(n);
    for (std::size_t k = 0; k < n; ++k) {
        xs[k] = lattice.site(k);
    }
    std::vector<double> cpow(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            cpow[i * n + j] = std::pow(std::fabs(xs[i] - xs[j]), p);
        }
    }

    DualityExperiment out;
    out.series.cost = "power:" + std::to_string(p);
    for (std::size_t c = 0; c < s1.times.size(); ++c) {
        std::vector<double> w1(n), w2(n);
        for (std::size_t k = 0; k < n; ++k) {
            w1[k] = s1.values[c][k] * lattice.h;
            w2[k] = s2.values[c][k] * lattice.h;
        }
        const TransportPlan plan = wasserstein_lp(EmpiricalMeasure::from_1d(xs, std::move(w1)),
                                                  EmpiricalMeasure::from_1d(xs, std::move(w2)), cost::Power{p});
        DualityCheckpoint cp;
        cp.t = s1.times[c];
        cp.distance = plan.cost_value;
        cp.dual_value = plan.dual_value();
        cp.duality_gap = std::fabs(cp.distance - cp.dual_value);

        // Q_p elements are p (phi, psi) for the cost |x - y|^p.
        auto violation = [&](int shift) {
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                const auto si = static_cast<std::ptrdiff_t>(i) + shift;
                if (si < 0 || si >= static_cast<std::ptrdiff_t>(n)) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    const auto sj = static_cast<std::ptrdiff_t>(j) + shift;
                    if (sj < 0 || sj >= static_cast<std::ptrdiff_t>(n)) continue;
                    const double lhs = p * (plan.dual_row[static_cast<std::size_t>(si)] +
                                            plan.dual_col[static_cast<std::size_t>(sj)]);
                    worst = std::max(worst, lhs - cpow[i * n + j]);
                }
            }
            return worst;
        };
        cp.dual_violation = violation(0);
        cp.shifted_violation = std::max(violation(1), violation(-1));
        std::vector<double> phi(n), psi(n);
        for (std::size_t k = 0; k < n; ++k) {
            phi[k] = p * plan.dual_row[k];
            psi[k] = p * plan.dual_col[k];
        }
        cp.in_qp = dual_feasibility(phi, psi, p, xs, xs) && cp.shifted_violation <= 1e-9;
        out.checkpoints.push_back(cp);
        out.series.push(cp.t, cp.distance, cp.distance, cp.distance, cp.distance, 0.0);
    }
    const double d0 = out.checkpoints.front().distance;
    for (const auto& cp : out.checkpoints) {
        require(cp.distance <= d0 + 1e-9 * std::max(1.0, d0), ErrorKind::ConstraintViolated,
                "lattice distance increased above its initial value");
    }
    return out;
}

} // namespace mkc
