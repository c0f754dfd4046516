#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mkc/config.hpp"
#include "mkc/error.hpp"
#include "mkc/harness.hpp"
#include "mkc/io.hpp"

using namespace mkc;
namespace fs = std::filesystem;

namespace {

const char* kHeat = R"yaml(
id: heat_small
kind: diffusion
seeds: [1, 2]
horizon: 0.5
checkpoints: 6
particles: 2000
dt: 0.01
cost: {kind: power, p: 1}
pairing: independent
initial:
  first: {family: gaussian, mean: [0.0], variance: 1.0}
  second: {family: uniform, lower: [1.0], upper: [2.0]}
model:
  equation: varcoef
  sigma: "1 + 0.5*sin(x)"
  lipschitz: 0.5
expect:
  monotone: {stderr_multiplier: 2}
)yaml";

std::string config_error(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
        return e.what();
    }
    FAIL("config was accepted");
    return {};
}

std::string replace(std::string text, const std::string& from, const std::string& to)
{
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
}

std::string csv_of(const ScenarioResult& r)
{
    std::ostringstream out;
    std::vector<DistanceSeries> all = r.per_seed;
    all.push_back(r.pooled);
    write_series_csv(out, all);
    return out.str();
}

fs::path temp_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("mkc_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("configs parse and reject bad input with field paths")
{
    const auto cfg = parse_config(kHeat);
    CHECK(cfg.id == "heat_small");
    CHECK(cfg.seeds.size() == 2);
    CHECK(cfg.expect.monotone.has_value());

    CHECK(config_error(replace(kHeat, "dt: 0.01", "dt: 0.01\ncolour: red")).find("colour") != std::string::npos);
    CHECK(config_error(replace(kHeat, "seeds: [1, 2]", "seeds: [1, 1]")).find("seeds") != std::string::npos);
    CHECK(config_error(replace(kHeat, "seeds: [1, 2]", "seeds: []")).find("seeds") != std::string::npos);
    CHECK(config_error(replace(kHeat, "variance: 1.0", "variance: -1.0")).find("initial.first") != std::string::npos);
    CHECK(config_error(replace(kHeat, "equation: varcoef", "equation: wave")).find("model.equation") !=
          std::string::npos);
    CHECK(config_error(replace(kHeat, "sigma: \"1 + 0.5*sin(x)\"", "sigma: \"1 + sin(\"")).find("model.sigma") !=
          std::string::npos);
    config_error("id: [unclosed");

    const std::string nltr = R"yaml(
id: nltr_bad
kind: nltr
seeds: [1]
initial:
  first: {family: gaussian, mean: [1.0], variance: 0.5}
model:
  velocity: "-x + 0.1*sin(I)"
  psi: "tanh(x)"
  alpha: 1.0
  beta: 1.0
)yaml";
    CHECK(config_error(nltr).find("model.beta") != std::string::npos);
}

TEST_CASE("every shipped config parses")
{
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(MKC_CONFIG_DIR)) {
        if (entry.path().extension() != ".yaml") continue;
        CHECK_NOTHROW(load_config(entry.path().string()));
        ++n;
    }
    CHECK(n >= 14);
}

TEST_CASE("setup checks fail before any run")
{
    // the jump map contracts by 1/2, so L = 0.3 is a false hypothesis
    const std::string text = R"yaml(
id: scat_bad
kind: scattering
seeds: [1]
particles: 1000
cost: {kind: power, p: 1}
initial:
  first: {family: gaussian, mean: [0.0], variance: 1.0}
  second: {family: gaussian, mean: [3.0], variance: 1.0}
model:
  map: "x/2 + h"
  atoms: [0.0]
  masses: [1.0]
  L: 0.3
)yaml";
    try {
        run_scenario(parse_config(text));
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
    }
}

TEST_CASE("runs are deterministic and pooled")
{
    const auto cfg = parse_config(kHeat);
    const auto a = run_scenario(cfg), b = run_scenario(cfg);
    CHECK(csv_of(a) == csv_of(b));
    CHECK(a.per_seed.size() == 2);
    CHECK(a.pooled.seed == "pooled");
    for (std::size_t k = 0; k < a.pooled.size(); ++k) {
        const double mean = 0.5 * (a.per_seed[0].coupled_cost[k] + a.per_seed[1].coupled_cost[k]);
        CHECK(a.pooled.coupled_cost[k] == doctest::Approx(mean).epsilon(1e-12));
        CHECK(a.pooled.ci_low[k] <= a.pooled.coupled_cost[k]);
        CHECK(a.pooled.ci_high[k] >= a.pooled.coupled_cost[k]);
    }
    CHECK(a.verdict.pass);

    auto same = parse_config(replace(kHeat, "second: {family: uniform, lower: [1.0], upper: [2.0]}",
                                     "second: {family: gaussian, mean: [0.0], variance: 1.0}"));
    same.pairing = Pairing::Common;
    const auto zero = run_scenario(same);
    for (double c : zero.pooled.coupled_cost) CHECK(c == 0.0);
}

TEST_CASE("outputs round-trip")
{
    const auto dir = temp_dir("outputs");
    const auto r = run_scenario(parse_config(kHeat));
    write_outputs(r, dir.string());
    std::ifstream in(dir / "heat_small.csv");
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str().rfind("scenario_id,seed,t,coupled_cost,lp_distance,ci_low,ci_high\n", 0) == 0);
    std::istringstream again(text.str());
    const auto back = read_series_csv(again);
    REQUIRE(back.size() == 3);
    CHECK(back[2].seed == "pooled");
    CHECK(back[0].coupled_cost == r.per_seed[0].coupled_cost);
    CHECK(back[1].lp_distance == r.per_seed[1].lp_distance);

    const auto v = read_verdict((dir / "heat_small.json").string());
    CHECK(v.scenario_id == "heat_small");
    CHECK(v.pass == r.verdict.pass);
    CHECK(v.monotone == r.verdict.monotone);
    CHECK_FALSE(v.fitted_rate.has_value());
}

TEST_CASE("series with missing OT column")
{
    DistanceSeries s;
    s.scenario_id = "x";
    s.seed = "3";
    s.push(0.0, 1.0);
    s.push(0.5, 0.5);
    std::ostringstream out;
    write_series_csv(out, {s});
    CHECK(out.str().find(",nan,") != std::string::npos);
    std::istringstream in(out.str());
    CHECK(std::isnan(read_series_csv(in)[0].lp_distance[1]));
}

TEST_CASE("clouds and snapshots round-trip")
{
    const auto dir = temp_dir("files");
    const auto m = normalize(EmpiricalMeasure(2, {0.1, 0.2, -1.0, 3.5, 1e-300, 7.0}, {1.0, 2.0, 1.0}));
    write_cloud_csv((dir / "c.csv").string(), m);
    const auto back = read_cloud_csv((dir / "c.csv").string());
    CHECK(back.points() == m.points());
    CHECK(back.weights() == m.weights());

    std::ofstream(dir / "bad.csv") << "weight,x1\n0.5,1\n0.5,2,3\n";
    CHECK_THROWS_AS(read_cloud_csv((dir / "bad.csv").string()), Error);

    GridDensity g({-1.0, 0.5}, {0.1, 0.2}, {3, 2}, {1, 2, 3, 4, 5, 6});
    write_snapshot((dir / "g.bin").string(), g);
    const auto h = read_snapshot((dir / "g.bin").string());
    CHECK(h.shape() == g.shape());
    CHECK(h.origin() == g.origin());
    CHECK(h.spacing() == g.spacing());
    CHECK(h.values() == g.values());
    CHECK(fs::file_size(dir / "g.bin") == 8 + 4 + 2 * 8 + 2 * 8 + 2 * 8 + 6 * 8);
    CHECK(fs::exists(dir / "g.bin.txt"));
}

TEST_CASE("decay fits and monotonicity verdicts")
{
    DistanceSeries e;
    for (int k = 0; k < 10; ++k) e.push(0.1 * k, std::exp(-0.2 * k));
    CHECK(fit_decay_rate(e, 0.0, 1.0).rate == doctest::Approx(-2.0).epsilon(1e-12));
    DistanceSeries c;
    for (int k = 0; k < 5; ++k) c.push(k, 3.0);
    CHECK(fit_decay_rate(c, 0.0, 5.0).rate == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    DistanceSeries z = c;
    z.coupled_cost[2] = 0.0;
    try {
        fit_decay_rate(z, 0.0, 5.0);
        FAIL("expected NonPositiveValues");
    } catch (const Error& err) {
        CHECK(err.kind() == ErrorKind::NonPositiveValues);
    }

    const double down[] = {3, 2, 1}, zeros[] = {0, 0, 0};
    const auto v = monotonicity_verdict(down, zeros, MonotoneBudget{});
    CHECK(v.monotone);
    CHECK(v.worst_violation == 0.0);
    const double up[] = {1.0, 1.3, 1.2}, se[] = {0.05, 0.05, 0.05};
    const auto bad = monotonicity_verdict(up, se, MonotoneBudget{2.0, 0.0});
    CHECK_FALSE(bad.monotone);
    CHECK(bad.worst_violation == doctest::Approx(0.2));
    const double noisy[] = {1.0, 1.04, 1.0, 1.03};
    CHECK(monotonicity_verdict(noisy, se, MonotoneBudget{2.0, 0.0}).monotone);
}
