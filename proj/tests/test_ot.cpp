#include <doctest.h>

#include <cmath>

#include "mkc/ensemble.hpp"
#include "mkc/error.hpp"
#include "mkc/ot.hpp"
#include "mkc/random.hpp"

using namespace mkc;

namespace {

EmpiricalMeasure random_cloud(RandomStream& rng, std::size_t n, bool weighted)
{
    std::vector<double> pts(n), w(n, 1.0);
    for (auto& x : pts) x = 3.0 * rng.normal();
    if (weighted) {
        for (auto& v : w) v = rng.uniform(0.1, 1.0);
    }
    return normalize(EmpiricalMeasure::from_1d(std::move(pts), std::move(w)));
}

} // namespace

TEST_CASE("one-dimensional distances")
{
    const auto d0 = EmpiricalMeasure::from_1d({0.0}, {1.0});
    CHECK(wasserstein_1d(d0, EmpiricalMeasure::from_1d({1.0}, {1.0}), cost::Power{1.0}) == 1.0);
    CHECK(wasserstein_1d(d0, EmpiricalMeasure::from_1d({2.0}, {1.0}), cost::Power{2.0}) == 2.0);
    const auto a = EmpiricalMeasure::equal_weights(1, {0.0, 1.0});
    const auto b = EmpiricalMeasure::equal_weights(1, {0.5, 1.5});
    CHECK(wasserstein_1d(a, b, cost::Power{1.0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(wasserstein_lp(a, b, cost::Power{1.0}).cost_value == doctest::Approx(0.5).epsilon(1e-15));
    const auto plane = EmpiricalMeasure::equal_weights(2, {0.0, 0.0});
    CHECK_THROWS_AS(wasserstein_1d(plane, plane, cost::Power{1.0}), Error);
}

TEST_CASE("identical measures cost nothing")
{
    RandomStream rng(1, StreamPurpose::Validation, 10);
    const auto m = random_cloud(rng, 12, true);
    const auto plan = wasserstein_lp(m, m, cost::Power{2.0});
    CHECK(plan.cost_value == doctest::Approx(0.0).epsilon(1e-15));
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(plan.plan(i, i) == doctest::Approx(m.weight(i)).epsilon(1e-12));
}

TEST_CASE("size guard")
{
    const auto big = EmpiricalMeasure::equal_weights(1, std::vector<double>(1001, 0.0));
    try {
        wasserstein_lp(big, big, cost::Power{1.0});
        FAIL("expected SizeExceeded");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SizeExceeded);
    }
}

TEST_CASE("LP agrees with the quantile formula and certifies optimality")
{
    RandomStream rng(2, StreamPurpose::Validation, 11);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = 1 + rng.below(100), m = 1 + rng.below(100);
        const bool weighted = trial % 2 == 1;
        const auto u1 = random_cloud(rng, n, weighted), u2 = random_cloud(rng, m, weighted);
        const double p = trial % 3 == 0 ? 1.0 : (trial % 3 == 1 ? 2.0 : 1.5);
        const CostSpec c = cost::Power{p};
        const auto plan = wasserstein_lp(u1, u2, c);
        const double exact = wasserstein_1d(u1, u2, c);
        CHECK(std::fabs(plan.cost_value - exact) <= 1e-9 * std::max(1.0, exact));
        CHECK(plan.max_row_marginal_error() <= 1e-10);
        CHECK(plan.max_col_marginal_error() <= 1e-10);
        CHECK(plan.max_slackness_violation(1e-14) <= 1e-8 * std::max(1.0, plan.cost.maxCoeff()));
        CHECK(plan.max_dual_violation() <= 1e-10 * std::max(1.0, plan.cost.maxCoeff()));
        CHECK(std::fabs(plan.dual_value() - plan.cost_value) <= 1e-8 * std::max(1.0, exact));
        CHECK((plan.plan.array() >= 0.0).all());
        // symmetry
        CHECK(wasserstein_lp(u2, u1, c).cost_value == doctest::Approx(plan.cost_value).epsilon(1e-9));
        // convex costs: no crossing pairs
        if (p > 1.0) {
            bool crossing = false;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    if (plan.plan(i, j) <= 1e-12) continue;
                    for (std::size_t k = 0; k < n; ++k)
                        for (std::size_t l = 0; l < m; ++l) {
                            if (plan.plan(k, l) <= 1e-12) continue;
                            if (u1.point(i)[0] < u1.point(k)[0] && u2.point(j)[0] > u2.point(l)[0]) crossing = true;
                        }
                }
            CHECK_FALSE(crossing);
        }
    }
}

TEST_CASE("LP in two dimensions")
{
    RandomStream rng(3, StreamPurpose::Validation, 12);
    std::vector<double> a(40), b(40);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal() + 1.0;
    const auto u1 = EmpiricalMeasure::equal_weights(2, a), u2 = EmpiricalMeasure::equal_weights(2, b);
    const auto plan = wasserstein_lp(u1, u2, cost::Power{2.0});
    CHECK(plan.max_row_marginal_error() <= 1e-10);
    CHECK(std::fabs(plan.dual_value() - plan.cost_value) <= 1e-8);
    // equal-size equal-weight instances have permutation optima
    const auto perm = optimal_assignment(u1, u2, cost::Power{2.0});
    double total = 0.0;
    for (std::size_t i = 0; i < 20; ++i) total += eval_cost(cost::Power{2.0}, u1.point(i), u2.point(perm[i])) / 20.0;
    CHECK(total == doctest::Approx(plan.cost_value).epsilon(1e-10));
}

TEST_CASE("coupled cost bounds the distance")
{
    const CoupledEnsemble same(1, {0.3, 1.2}, {0.3, 1.2});
    CHECK(coupled_cost(same, cost::Power{2.0}) == 0.0);
    const CoupledEnsemble two(1, {0.0, 2.0}, {1.0, 3.0});
    CHECK(coupled_cost(two, cost::Power{1.0}) == 1.0);

    RandomStream rng(4, StreamPurpose::Validation, 13);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(50), y(50);
        for (auto& v : x) v = rng.normal();
        for (auto& v : y) v = rng.normal() + 0.5;
        const CoupledEnsemble e(1, x, y);
        const double lp = wasserstein_lp(e.first_marginal(), e.second_marginal(), cost::Power{2.0}).cost_value;
        CHECK(coupled_cost(e, cost::Power{2.0}) >= lp - 1e-12);
    }
}

TEST_CASE("dual feasibility")
{
    const double xs[] = {0.0, 1.0}, ys[] = {0.0, 1.0};
    auto zero = [](double) { return 0.0; };
    CHECK(dual_feasibility(zero, zero, 1.0, xs, ys));
    CHECK(dual_feasibility([](double x) { return x; }, [](double y) { return -y; }, 1.0, xs, ys));
    CHECK_FALSE(dual_feasibility([](double x) { return 2 * x; }, [](double y) { return -2 * y; }, 1.0, xs, ys));
}
