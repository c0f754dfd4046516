#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "mkc/diffusion.hpp"
#include "mkc/error.hpp"
#include "mkc/ot.hpp"
#include "mkc/pairing.hpp"

using namespace mkc;

namespace {

CoupledEnsemble pair01(std::size_t n, std::uint64_t seed)
{
    CoupledEnsemble e(1, std::vector<double>(n, 0.0), std::vector<double>(n, 1.0));
    e.seed_streams(seed);
    return e;
}

double variance(const std::vector<double>& v)
{
    double m = 0.0, s = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

diffusion::FokkerPlanck linear_drift(double slope, double alpha)
{
    diffusion::FokkerPlanck fp;
    fp.drift = [slope](std::span<const double> x, double, std::span<double> out) {
        for (std::size_t k = 0; k < x.size(); ++k) out[k] = slope * x[k];
    };
    fp.alpha = alpha;
    return fp;
}

} // namespace

TEST_CASE("synchronous heat keeps differences")
{
    auto e = pair01(100000, 1);
    for (int k = 0; k < 100; ++k) step_heat(e, 0.01);
    for (double g : e.gaps()) REQUIRE(g == 1.0);
    CHECK(variance(e.xs()) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(coupled_cost(e, cost::Power{3.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("Fokker-Planck steps")
{
    auto a = pair01(1000, 2), b = pair01(1000, 2);
    for (int k = 0; k < 10; ++k) {
        step_heat(a, 0.01);
        step_fokker_planck(b, linear_drift(0.0, 0.0), 0.01);
    }
    CHECK(a.xs() == b.xs());
    CHECK(a.gaps() == b.gaps());

    auto c = pair01(10, 3);
    step_fokker_planck(c, linear_drift(-1.0, -1.0), 0.01);
    for (double g : c.gaps()) CHECK(g == doctest::Approx(0.99).epsilon(1e-15));
    for (int k = 1; k < 1000; ++k) step_fokker_planck(c, linear_drift(-1.0, -1.0), 0.001);
    CHECK(c.gaps()[0] == doctest::Approx(std::exp(-1.0 - 0.009)).epsilon(2e-3));
}

TEST_CASE("constant sigma reduces to heat")
{
    auto a = pair01(500, 4), b = pair01(500, 4), c = pair01(500, 4);
    diffusion::VarCoef vc{[](double) { return 1.0; }, 0.0};
    for (int k = 0; k < 20; ++k) {
        step_heat(a, 0.01);
        step_varcoef(b, vc, 0.01);
    }
    CHECK(a.xs() == b.xs());
    for (double g : b.gaps()) CHECK(g == 1.0);
    diffusion::Fractional fr{[](double) { return 1.0; }, 1.5};
    for (int k = 0; k < 20; ++k) step_fractional(c, fr, fractional_scale(1.5, 0.01));
    for (double g : c.gaps()) CHECK(g == 1.0);
}

TEST_CASE("regularized distance drift is controlled by the Lipschitz constant")
{
    const double L = 0.5;
    diffusion::VarCoef vc{[](double x) { return 1.0 + 0.5 * std::sin(x); }, L};
    const double dt = 1e-4;
    for (double eps : {0.05, 0.1, 0.2}) {
        const std::size_t n = 200000;
        std::vector<double> x(n), y(n);
        RandomStream rng(9, StreamPurpose::Validation, static_cast<std::uint64_t>(eps * 1000));
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.uniform(-3.0, 3.0);
            y[i] = x[i] + rng.uniform(-2 * eps, 2 * eps);
        }
        CoupledEnsemble e(1, x, y);
        e.seed_streams(11);
        std::vector<double> before(n);
        for (std::size_t i = 0; i < n; ++i) before[i] = omega_eps(std::fabs(e.gap(i)[0]), eps).value;
        step_varcoef(e, vc, dt);
        double mean = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double inc = (omega_eps(std::fabs(e.gap(i)[0]), eps).value - before[i]) / dt;
            mean += inc;
            sq += inc * inc;
        }
        mean /= static_cast<double>(n);
        const double se = std::sqrt((sq / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
        // the generator gives (sigma(y)-sigma(x))^2 omega'' <= L^2 eps on |x - y| < eps
        CHECK(mean <= L * L * eps + 3 * se);
    }
}

TEST_CASE("stable increments")
{
    const double alpha = 1.5;
    diffusion::Fractional fr{[](double) { return 1.0; }, alpha};
    auto e = pair01(100000, 5);
    for (int k = 0; k < 20; ++k) step_fractional(e, fr, fractional_scale(alpha, 0.05));
    std::vector<double> a = e.xs();
    for (auto& v : a) v = std::fabs(v);
    std::sort(a.begin(), a.end());
    auto tail = [&](double R) {
        return static_cast<double>(a.end() - std::upper_bound(a.begin(), a.end(), R)) / static_cast<double>(a.size());
    };
    const double slope = std::log(tail(40.0) / tail(8.0)) / std::log(5.0);
    CHECK(slope == doctest::Approx(-alpha).epsilon(0.15));

    // two steps of dt against one step of 2 dt
    auto two = pair01(100000, 6), one = pair01(100000, 7);
    step_fractional(two, fr, fractional_scale(alpha, 0.1));
    step_fractional(two, fr, fractional_scale(alpha, 0.1));
    step_fractional(one, fr, fractional_scale(alpha, 0.2));
    std::vector<double> p = two.xs(), q = one.xs();
    std::sort(p.begin(), p.end());
    std::sort(q.begin(), q.end());
    double worst = 0.0;
    for (int k = 5; k <= 95; k += 5) {
        const std::size_t i = p.size() * static_cast<std::size_t>(k) / 100;
        worst = std::max(worst, std::fabs(p[i] - q[i]));
    }
    CHECK(worst < 0.05);
}

TEST_CASE("coupled and uncoupled heat share the marginal law")
{
    const auto g = family::Gaussian{{0.0}, 1.0};
    auto coupled = pair_up(g, family::Gaussian{{3.0}, 1.0}, 50000, 21, Pairing::Independent, cost::Power{2.0});
    coupled.seed_streams(21);
    auto alone = pair_up(g, g, 50000, 22, Pairing::Common, cost::Power{2.0});
    alone.seed_streams(23);
    for (int k = 0; k < 50; ++k) {
        step_heat(coupled, 0.01);
        step_heat(alone, 0.01);
    }
    auto stats = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        return std::make_pair(m / static_cast<double>(v.size()), variance(v));
    };
    const auto [m1, v1] = stats(coupled.xs());
    const auto [m2, v2] = stats(alone.xs());
    const double n = 50000.0;
    CHECK(std::fabs(m1 - m2) <= 3.0 * std::sqrt(2.0 * 2.0 / n));
    CHECK(std::fabs(v1 - v2) <= 3.0 * std::sqrt(2.0 * 2.0 * 2.0 * 2.0 / n) * 2.0);
}

TEST_CASE("nonlinear transport")
{
    diffusion::NonlinearTransport s;
    s.velocity = [](double x, double) { return -x; };
    s.psi = [](double) { return 0.0; };
    s.alpha = 1.0;
    s.beta = 0.0;
    const auto at = EmpiricalMeasure::equal_weights(1, std::vector<double>(50, 0.7));
    const auto flat = simulate_nltr(s, at, 0.7, 1.0, 1e-3, 5);
    for (double c : flat.coupled_cost) CHECK(c == 0.0);

    const auto u0 = sample(family::Gaussian{{1.0}, 0.5}, 2000, 3);
    const auto lin = simulate_nltr(s, u0, 0.0, 1.0, 1e-3, 11);
    for (std::size_t k = 0; k < lin.size(); ++k) {
        CHECK(lin.coupled_cost[k] / lin.coupled_cost[0] == doctest::Approx(std::exp(-2.0 * lin.times[k])).epsilon(0.02));
    }

    s.velocity = [](double x, double I) { return -x + 0.1 * std::sin(I); };
    s.psi = [](double x) { return std::tanh(x); };
    s.beta = 0.1;
    const auto nl = simulate_nltr(s, u0, 0.0, 2.0, 1e-3, 21);
    for (std::size_t k = 0; k < nl.size(); ++k) {
        CHECK(nl.coupled_cost[k] <= 1.05 * std::exp(-1.8 * nl.times[k]) * nl.coupled_cost[0]);
    }

    s.beta = 1.5;
    try {
        simulate_nltr(s, u0, 0.0, 1.0, 1e-3, 3);
        FAIL("expected ConstraintViolated");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConstraintViolated);
    }
}

TEST_CASE("drift constant is spot-checked")
{
    const auto e = pair_up(family::Gaussian{{0.0}, 1.0}, family::Gaussian{{1.0}, 1.0}, 2000, 1, Pairing::Independent,
                           cost::Power{2.0});
    CHECK_NOTHROW(validate_scenario(linear_drift(-1.0, -1.0), e, 1));
    CHECK_THROWS_AS(validate_scenario(linear_drift(-1.0, -2.0), e, 1), Error);
}

TEST_CASE("run_diffusion series")
{
    RunOptions o;
    o.T = 1.0;
    o.dt = 0.01;
    o.checkpoints = 6;
    o.seed = 3;
    o.cost = cost::Power{1.0};
    const auto g = family::Gaussian{{0.0}, 1.0};
    const auto same = run_diffusion(diffusion::Heat{}, pair_up(g, g, 5000, 3, Pairing::Common, o.cost), o);
    for (std::size_t k = 0; k < same.size(); ++k) {
        CHECK(same.coupled_cost[k] == 0.0);
        CHECK(same.lp_distance[k] == 0.0);
    }
    const auto unit = run_diffusion(
        diffusion::Heat{}, pair_up(family::Dirac{{0.0}}, family::Dirac{{1.0}}, 5000, 3, Pairing::Independent, o.cost),
        o);
    for (double c : unit.coupled_cost) CHECK(c == 1.0);

    o.cost = cost::Power{2.0};
    o.dt = 1e-3;
    const auto fp = run_diffusion(
        linear_drift(-1.0, -1.0),
        pair_up(g, family::Gaussian{{2.0}, 1.0}, 20000, 3, Pairing::Independent, o.cost), o);
    for (std::size_t k = 0; k < fp.size(); ++k) {
        CHECK(fp.lp_distance[k] == doctest::Approx(2.0 * std::exp(-2.0 * fp.times[k])).epsilon(0.1));
    }
    const auto fit = fit_decay_rate(fp, 0.0, 1.0);
    CHECK(fit.rate == doctest::Approx(-2.0).epsilon(0.05));
}

TEST_CASE("results do not depend on the worker count")
{
    RunOptions o;
    o.T = 0.2;
    o.dt = 0.01;
    o.checkpoints = 3;
    o.seed = 8;
    o.cost = cost::Power{1.0};
    diffusion::VarCoef vc{[](double x) { return 1.0 + 0.5 * std::sin(x); }, 0.5};
    const auto init = pair_up(family::Gaussian{{0.0}, 1.0}, family::Uniform{{1.0}, {3.0}}, 20000, 8,
                              Pairing::Independent, o.cost);
    setenv("MKC_WORKERS", "1", 1);
    const auto a = run_diffusion(vc, init, o);
    setenv("MKC_WORKERS", "3", 1);
    const auto b = run_diffusion(vc, init, o);
    unsetenv("MKC_WORKERS");
    CHECK(a.coupled_cost == b.coupled_cost);
    CHECK(a.ci_low == b.ci_low);
}
