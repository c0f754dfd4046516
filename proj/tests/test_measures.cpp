#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mkc/error.hpp"
#include "mkc/measures.hpp"
#include "mkc/random.hpp"

using namespace mkc;

TEST_CASE("normalize rescales weights")
{
    auto a = normalize(EmpiricalMeasure::from_1d({0.0, 1.0}, {2.0, 2.0}));
    CHECK(a.weight(0) == 0.5);
    CHECK(a.weight(1) == 0.5);
    auto b = normalize(EmpiricalMeasure::from_1d({0.0, 1.0, 2.0}, {1.0, 0.0, 3.0}));
    CHECK(b.weight(0) == 0.25);
    CHECK(b.weight(1) == 0.0);
    CHECK(b.weight(2) == 0.75);
    CHECK(b.is_normalized());
}

TEST_CASE("normalize rejects zero mass")
{
    GridDensity g({0.0}, {0.1}, {5}, std::vector<double>(5, 0.0));
    try {
        normalize(g);
        FAIL("expected ZeroMass");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ZeroMass);
    }
    CHECK_THROWS_AS(normalize(EmpiricalMeasure::from_1d({1.0}, {0.0})), Error);
}

TEST_CASE("grid normalization keeps proportions")
{
    GridDensity g({0.0}, {0.5}, {3}, {1.0, 2.0, 5.0});
    const auto n = normalize(g);
    CHECK(n.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n.values()[2] / n.values()[0] == doctest::Approx(5.0));
}

TEST_CASE("moments")
{
    CHECK(moment(EmpiricalMeasure::from_1d({0.0}, {1.0}), 2.0) == 0.0);
    CHECK(moment(EmpiricalMeasure::from_1d({-1.0, 1.0}, {0.5, 0.5}), 2.0) == 1.0);
    CHECK(moment(EmpiricalMeasure::from_1d({0.0, 2.0}, {0.25, 0.75}), 1.0) == 1.5);
}

TEST_CASE("quantile uses the left-continuous inverse")
{
    CHECK(quantile(EmpiricalMeasure::from_1d({3.0}, {1.0}), 0.5) == 3.0);
    const auto two = EmpiricalMeasure::from_1d({1.0, 0.0}, {0.5, 0.5});
    CHECK(quantile(two, 0.5) == 0.0);
    CHECK(quantile(two, 0.75) == 1.0);
    const auto plane = EmpiricalMeasure::equal_weights(2, {0.0, 0.0, 1.0, 1.0});
    try {
        quantile(plane, 0.5);
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DimensionMismatch);
    }
}

TEST_CASE("quantile properties on random clouds")
{
    RandomStream rng(17, StreamPurpose::Validation, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(40);
        std::vector<double> pts(n);
        for (auto& x : pts) x = rng.normal();
        const auto m = EmpiricalMeasure::equal_weights(1, pts);
        std::sort(pts.begin(), pts.end());
        double prev = -INFINITY;
        for (int k = 1; k <= 50; ++k) {
            const double q = k / 50.0;
            const double v = quantile(m, q);
            CHECK(v >= prev);
            prev = v;
            // ceil(qN)-th point; guard q*N landing a rounding error above an integer
            const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
            CHECK(v == pts[std::max<std::size_t>(idx, 1) - 1]);
        }
    }
}

TEST_CASE("sampling families")
{
    const auto d = sample(family::Dirac{{0.0}}, 4, 1);
    REQUIRE(d.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(d.point(i)[0] == 0.0);

    const auto g = sample(family::Gaussian{{0.0}, 1.0}, 10000, 5);
    double mean = 0.0, var = 0.0;
    for (double x : g.points()) mean += x;
    mean /= 10000.0;
    for (double x : g.points()) var += (x - mean) * (x - mean);
    var /= 9999.0;
    CHECK(std::fabs(var - 1.0) < 0.05);

    const double r = barenblatt::support_radius(2.0, 1.0);
    for (double x : sample(family::Barenblatt{2.0, 1.0, 0.0}, 5000, 9).points()) CHECK(std::fabs(x) <= r);

    const auto again = sample(family::Gaussian{{0.0}, 1.0}, 10000, 5);
    CHECK(again.points() == g.points());
    const auto renormalized = normalize(g);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(renormalized.weight(i) == doctest::Approx(g.weight(i)).epsilon(1e-12));
    CHECK(moment(g, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("family parameters are validated")
{
    CHECK_THROWS_AS(validate_family(family::Gaussian{{0.0}, -1.0}), Error);
    CHECK_THROWS_AS(validate_family(family::Uniform{{1.0}, {0.0}}), Error);
    CHECK_THROWS_AS(validate_family(family::Barenblatt{1.0, 1.0, 0.0}), Error);
    CHECK_THROWS_AS(validate_family(family::Barenblatt{2.0, 0.0, 0.0}), Error);
}

TEST_CASE("barenblatt cdf and quantile agree")
{
    for (double q : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        const double x = barenblatt::quantile(2.0, 1.5, 0.3, q);
        CHECK(barenblatt::cdf(2.0, 1.5, 0.3, x) == doctest::Approx(q).epsilon(1e-10));
    }
    const double mass = GridDensity::from_profile_1d(
                            [](double x) { return barenblatt::density(3.0, 1.0, 0.0, x); }, -4.0, 0.001, 8000)
                            .mass();
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("philox known answer")
{
    // Random123 kat_vectors: philox4x32_10 with zero counter and key.
    const auto z = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    CHECK(z[0] == 0x6627e8d5u);
    CHECK(z[1] == 0xe169c58du);
    CHECK(z[2] == 0xbc57ac4cu);
    CHECK(z[3] == 0x9b00dbd8u);
    const auto f = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(f[0] == 0x408f276du);
    CHECK(f[1] == 0x41c83b0eu);
    CHECK(f[2] == 0xa20bc7c6u);
    CHECK(f[3] == 0x6d5451fdu);
    const auto pi = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(pi[0] == 0xd16cfe09u);
    CHECK(pi[1] == 0x94fdccebu);
    CHECK(pi[2] == 0x5001e420u);
    CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("streams are reproducible and disjoint")
{
    RandomStream a(3, StreamPurpose::Dynamics, 7), b(3, StreamPurpose::Dynamics, 7), c(3, StreamPurpose::Dynamics, 8);
    int same = 0;
    for (int k = 0; k < 100; ++k) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x > 0.0);
        CHECK(x < 1.0);
        same += x == c.uniform();
    }
    CHECK(same == 0);
}
