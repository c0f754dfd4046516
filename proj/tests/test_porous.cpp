#include <doctest.h>

#include <cmath>

#include "mkc/error.hpp"
#include "mkc/ot.hpp"
#include "mkc/porous_media.hpp"
#include "mkc/random.hpp"

using namespace mkc;

namespace {

GridDensity profile(const std::function<double(double)>& f, double origin = -5.0, double dx = 0.01,
                    std::size_t cells = 1000)
{
    return normalize(GridDensity::from_profile_1d(f, origin, dx, cells));
}

GridDensity barenblatt_grid(double m, double t0, double center, double dx = 0.01)
{
    return profile([=](double x) { return barenblatt::density(m, t0, center, x); }, -5.0, dx,
                   static_cast<std::size_t>(std::lround(10.0 / dx)));
}

GridDensity bump(double center, double width)
{
    return profile([=](double x) { return std::exp(-(x - center) * (x - center) / (2 * width * width)); });
}

} // namespace

TEST_CASE("admissibility")
{
    const auto grid = default_r_grid();
    for (double m : {1.0, 2.0, 3.0}) CHECK(check_admissible(NonlinearityA::power(m), grid).ok());
    const NonlinearityA linear([](double u) { return u; }, [](double) { return 0.0; });
    CHECK(check_admissible(linear, grid).ok());
    const NonlinearityA bad([](double u) { return -u * u; }, [](double) { return -2.0; });
    const auto r = check_admissible(bad, grid);
    CHECK_FALSE(r.b_nonneg);
    CHECK_FALSE(r.ok());
    // B by quadrature matches the closed form
    const NonlinearityA cube([](double u) { return u * u * u / 3; }, [](double u) { return 2 * u; });
    for (double x : {0.1, 1.0, 3.0}) CHECK(cube.B(x) == doctest::Approx(NonlinearityA::power(3.0).B(x)).epsilon(1e-12));
}

TEST_CASE("porous medium solver")
{
    const auto A = NonlinearityA::power(2.0);
    auto err_at = [&](double dx) {
        const auto u0 = barenblatt_grid(2.0, 1.0, 0.0, dx);
        const auto sol = solve_pme_1d(A, u0, 1.0, 3);
        const auto exact = barenblatt_grid(2.0, 2.0, 0.0, dx);
        for (const auto& snap : sol.snapshots) CHECK(snap.mass() == doctest::Approx(u0.mass()).epsilon(1e-8));
        for (const auto& snap : sol.snapshots) CHECK(snap.min_value() >= 0.0);
        double err = 0.0;
        for (std::size_t k = 0; k < exact.size(); ++k) {
            err += std::fabs(sol.snapshots.back().values()[k] - exact.values()[k]) * dx;
        }
        return err;
    };
    const double coarse = err_at(0.04), fine = err_at(0.02);
    CHECK(fine < 0.02);
    CHECK(fine < coarse);

    const GridDensity flat({0.0}, {0.1}, {50}, std::vector<double>(50, 0.2));
    const auto same = solve_pme_1d(A, flat, 1.0, 2);
    for (double v : same.snapshots.back().values()) CHECK(v == doctest::Approx(0.2).epsilon(1e-14));

    try {
        solve_pme_1d(A, barenblatt_grid(2.0, 1.0, 0.0), 0.1, 2, 0.45, 1.0);
        FAIL("expected CFLViolation");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CFLViolation);
    }
}

TEST_CASE("Brenier maps")
{
    const double dx = 0.01;
    const auto g = bump(0.0, 0.5);
    const auto id = brenier_map_1d(g, g);
    for (std::size_t k = 0; k < id.x.size(); k += 10) {
        if (g.values()[k] > 1e-6) CHECK(std::fabs(id.y[k] - id.x[k]) <= dx);
    }
    const auto shifted = brenier_map_1d(g, bump(0.7, 0.5));
    for (std::size_t k = 0; k < shifted.x.size(); ++k) {
        if (g.values()[k] > 1e-6) CHECK(std::fabs(shifted.y[k] - shifted.x[k] - 0.7) <= dx);
    }
    const auto g1 = bump(0.0, 0.5), g2 = bump(0.0, 1.0);
    const auto two = brenier_map_1d(g1, g2);
    for (std::size_t k = 0; k < two.x.size(); ++k) {
        if (std::fabs(two.x[k]) < 1.0) CHECK(two.y[k] == doctest::Approx(2.0 * two.x[k]).epsilon(0.02).scale(0.01));
        if (k > 0) CHECK(two.y[k] >= two.y[k - 1]);
    }
    // pushforward against test functions
    RandomStream rng(3, StreamPurpose::Validation, 30);
    for (int j = 0; j < 20; ++j) {
        const double w = rng.uniform(0.5, 3.0), s = rng.uniform(0.0, 6.28);
        auto phi = [=](double y) { return std::sin(w * y + s); };
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t k = 0; k < g1.size(); ++k) {
            lhs += phi(two.y[k]) * g1.values()[k] * dx;
            rhs += phi(g2.center(0, k)) * g2.values()[k] * dx;
        }
        CHECK(std::fabs(lhs - rhs) < 5 * dx);
    }
    CHECK(std::fabs(transport_cost_d2(g1, g2) - quantile_distance(g1, g2, 2.0)) < 1e-6);
    const GridDensity empty({0.0}, {0.1}, {10}, std::vector<double>(10, 0.0));
    try {
        brenier_map_1d(empty, g1);
        FAIL("expected DegenerateCDF");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateCDF);
    }
}

TEST_CASE("quantile distance against the LP")
{
    const auto a = profile([](double x) { return std::exp(-x * x); }, -3.0, 0.2, 30);
    const auto b = profile([](double x) { return std::exp(-(x - 1) * (x - 1) / 0.5); }, -3.0, 0.2, 30);
    // the LP sees cell-centre atoms; refine each cell into uniform sub-atoms to match the piecewise-constant CDF
    auto atoms = [](const GridDensity& g) {
        std::vector<double> pts, w;
        const int sub = 10;
        for (std::size_t k = 0; k < g.size(); ++k) {
            for (int j = 0; j < sub; ++j) {
                pts.push_back(g.origin()[0] + (static_cast<double>(k) + (j + 0.5) / sub) * g.spacing()[0]);
                w.push_back(g.values()[k] * g.spacing()[0] / sub);
            }
        }
        return normalize(EmpiricalMeasure::from_1d(pts, w));
    };
    const double lp = wasserstein_lp(atoms(a), atoms(b), cost::Power{2.0}).cost_value;
    CHECK(std::fabs(lp - quantile_distance(a, b, 2.0)) < 1e-4);
}

TEST_CASE("dissipation terms")
{
    const auto A = NonlinearityA::power(2.0);
    const auto g = bump(0.0, 0.6);
    const auto zero = dissipation_terms(g, g, A);
    CHECK(std::fabs(zero.D1 + zero.D2) < 1e-8);
    CHECK(std::fabs(zero.bound) < 1e-8);
    const auto shifted = dissipation_terms(g, bump(0.5, 0.6), A);
    CHECK(shifted.bound <= 0.0);

    RandomStream rng(5, StreamPurpose::Validation, 31);
    for (int k = 0; k < 20; ++k) {
        const double c1 = rng.uniform(-1, 1), c2 = rng.uniform(-1, 1);
        const double w1 = rng.uniform(0.4, 1.0), w2 = rng.uniform(0.4, 1.0);
        const auto d = dissipation_terms(bump(c1, w1), bump(c2, w2), A);
        CHECK(d.bound <= 1e-6);
    }

    // the derivative of d2 along two short solver runs stays below the bound
    const auto u1 = bump(-0.3, 0.6), u2 = bump(0.4, 0.8);
    const auto dt = 1e-3;
    const auto s1 = solve_pme_1d(A, u1, dt, 2), s2 = solve_pme_1d(A, u2, dt, 2);
    const double slope = (quantile_distance(s1.snapshots.back(), s2.snapshots.back()) - quantile_distance(u1, u2)) / dt;
    const auto terms = dissipation_terms(u1, u2, A);
    CHECK(slope <= terms.bound + 0.01 + dt);
}

TEST_CASE("contraction experiment")
{
    const auto A = NonlinearityA::power(2.0);
    const auto trans = pme_contraction_experiment(A, barenblatt_grid(2.0, 1.0, 0.0), barenblatt_grid(2.0, 1.0, 1.0), 1.0, 6);
    for (double c : trans.coupled_cost) CHECK(c == doctest::Approx(0.5).epsilon(0.01));

    const auto g = barenblatt_grid(2.0, 1.0, 0.0);
    const auto same = pme_contraction_experiment(A, g, g, 0.5, 3);
    for (double c : same.coupled_cost) CHECK(c == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));

    const auto spread = pme_contraction_experiment(A, g, barenblatt_grid(2.0, 2.0, 0.0), 1.0, 11);
    CHECK(spread.coupled_cost[1] < spread.coupled_cost[0]);
    for (std::size_t k = 1; k < spread.size(); ++k) CHECK(spread.coupled_cost[k] <= spread.coupled_cost[k - 1] + 1e-9);

    for (double m : {1.5, 2.0, 3.0}) {
        RandomStream rng(9, StreamPurpose::Validation, static_cast<std::uint64_t>(m * 10));
        for (int k = 0; k < 20; ++k) {
            const auto a = bump(rng.uniform(-1, 1), rng.uniform(0.3, 0.8));
            const auto b = bump(rng.uniform(-1, 1), rng.uniform(0.3, 0.8));
            const auto s = pme_contraction_experiment(NonlinearityA::power(m), a, b, 0.5, 6);
            for (std::size_t j = 1; j < s.size(); ++j) CHECK(s.coupled_cost[j] <= s.coupled_cost[j - 1] + 1e-6);
        }
    }

    const NonlinearityA bad([](double u) { return -u * u; }, [](double) { return -2.0; });
    CHECK_THROWS_AS(pme_contraction_experiment(bad, g, g, 0.1, 2), Error);
}
