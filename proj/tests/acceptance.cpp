// Runs the fourteen acceptance criteria at their stated tolerances and prints
// one PASS/FAIL line per criterion. Exit status is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "mkc/config.hpp"
#include "mkc/costs.hpp"
#include "mkc/error.hpp"
#include "mkc/grid_pde.hpp"
#include "mkc/harness.hpp"
#include "mkc/jumps.hpp"
#include "mkc/ot.hpp"
#include "mkc/porous_media.hpp"
#include "mkc/random.hpp"

using namespace mkc;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream note;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            note << "[failed: " << what << "] ";
        }
    }
};

ScenarioResult scenario(const std::string& name, Outcome& out)
{
    const auto r = run_scenario(load_config(std::string(MKC_CONFIG_DIR) + "/" + name + ".yaml"));
    out.note << name << ": " << r.verdict.detail;
    out.require(r.verdict.pass, name + " verdict");
    return r;
}

double max_relative_drift(const DistanceSeries& s)
{
    double worst = 0.0;
    for (double v : s.coupled_cost) worst = std::max(worst, std::fabs(v - s.coupled_cost.front()));
    return worst / std::fabs(s.coupled_cost.front());
}

Vec3 random_vec(RandomStream& rng)
{
    return {rng.normal(), rng.normal(), rng.normal()};
}

void ac1(Outcome& o)
{
    for (int p = 1; p <= 3; ++p) {
        const auto r = scenario("heat_sync_p" + std::to_string(p), o);
        double worst = 0.0;
        for (const auto& s : r.per_seed)
            for (double v : s.coupled_cost) worst = std::max(worst, std::fabs(v - s.coupled_cost.front()));
        o.require(worst <= 1e-12, "p=" + std::to_string(p) + " drift " + std::to_string(worst));
    }
}

void ac2(Outcome& o)
{
    const auto r = scenario("fp_rate", o);
    o.require(r.verdict.fitted_rate && *r.verdict.fitted_rate >= -2.1 && *r.verdict.fitted_rate <= -1.9, "rate band");
}

void ac3(Outcome& o)
{
    const auto r = scenario("nltr_bound", o);
    const auto& s = r.pooled;
    for (std::size_t k = 0; k < s.size(); ++k) {
        o.require(s.coupled_cost[k] <= 1.05 * std::exp(-1.8 * s.times[k]) * s.coupled_cost[0],
                  "bound at t=" + std::to_string(s.times[k]));
    }
}

void ac4(Outcome& o)
{
    const auto r = scenario("varcoef_d1", o);
    o.require(r.per_seed.size() == 10, "ten seeds");
    o.require(monotonicity_verdict(r.pooled, MonotoneBudget{2.0, 0.0}).monotone, "monotone");
}

void ac5(Outcome& o)
{
    const auto r = scenario("fractional_d", o);
    o.require(r.per_seed.size() == 10, "ten seeds");
    o.require(monotonicity_verdict(r.pooled, MonotoneBudget{2.0, 0.0}).monotone, "monotone");
    o.note << " | ";
    const auto c = scenario("fractional_control", o);
    o.require(max_relative_drift(c.pooled) * std::fabs(c.pooled.coupled_cost.front()) <= 1e-12, "control constant");
}

void ac6(Outcome& o)
{
    for (double alpha : {1.2, 1.5, 1.8}) {
        const double r = stable_identity_residual(alpha);
        o.note << "alpha=" << alpha << " residual=" << r << "; ";
        o.require(std::fabs(r) < 1e-6, "alpha " + std::to_string(alpha));
    }
}

void ac7(Outcome& o)
{
    const auto r = scenario("scattering_rate", o);
    o.require(r.verdict.fitted_rate && *r.verdict.fitted_rate >= -0.55 && *r.verdict.fitted_rate <= -0.45, "rate");
}

void ac8(Outcome& o)
{
    const auto r = scenario("kinetic_scattering", o);
    o.require(r.per_seed.size() == 10, "ten seeds");
}

void ac9(Outcome& o)
{
    scenario("neuron_a", o);
    o.note << " | ";
    scenario("neuron_b", o);
    const CostSpec abs = cost::Power{1.0};
    const auto delta = SourceLaw::dirac(0.0);
    const auto uniform = SourceLaw::on_interval([](double) { return 1.0; }, 0.0, 1.0);
    RandomStream rng(2024, StreamPurpose::Validation, 9);
    int held = 0;
    for (int k = 0; k < 1000; ++k) {
        const double x = rng.uniform(0.0, 5.0), y = rng.uniform(0.0, 5.0);
        held += ttt_check(abs, delta, [](double z) { return z; }, x, y).holds;
        held += ttt_check(abs, uniform, [](double z) { return z + 1.0; }, x, y).holds;
    }
    o.note << " | ttt held on " << held << "/2000";
    o.require(held == 2000, "ttt");
}

void ac10(Outcome& o)
{
    const auto start = std::chrono::steady_clock::now();
    RandomStream rng(10, StreamPurpose::Validation, 10);
    double worst_p = 0.0, worst_e = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const Vec3 v = random_vec(rng), vs = random_vec(rng), w = random_vec(rng), ws = random_vec(rng);
        const auto c = tanaka_collision(v, vs, w, ws, rng.uniform(0.0, M_PI), rng.uniform(0.0, 2 * M_PI));
        worst_p = std::max({worst_p, (c.v + c.v_star - v - vs).norm(), (c.w + c.w_star - w - ws).norm()});
        worst_e = std::max({worst_e,
                            std::fabs(c.v.squaredNorm() + c.v_star.squaredNorm() - v.squaredNorm() - vs.squaredNorm()),
                            std::fabs(c.w.squaredNorm() + c.w_star.squaredNorm() - w.squaredNorm() - ws.squaredNorm())});
    }
    o.note << "momentum " << worst_p << ", energy " << worst_e << "; ";
    o.require(worst_p < 1e-12 && worst_e < 1e-12, "conservation");

    double worst_avg = 0.0, largest = -INFINITY;
    for (int k = 0; k < 1000; ++k) {
        const Vec3 v = random_vec(rng), vs = random_vec(rng), w = random_vec(rng), ws = random_vec(rng);
        const double theta = rng.uniform(0.0, M_PI);
        const double before = (v - w).squaredNorm() + (vs - ws).squaredNorm();
        double sum = 0.0;
        for (int j = 0; j < 256; ++j) {
            const auto c = tanaka_collision(v, vs, w, ws, theta, 2 * M_PI * (j + 0.5) / 256);
            sum += (c.v - c.w).squaredNorm() + (c.v_star - c.w_star).squaredNorm() - before;
        }
        const double closed = tanaka_average_dissipation(v, vs, w, ws, theta);
        worst_avg = std::max(worst_avg, std::fabs(sum / 256 - closed));
        largest = std::max(largest, closed);
    }
    o.note << "phi-average error " << worst_avg << ", largest " << largest << "; ";
    o.require(worst_avg <= 1e-10, "phi average");
    o.require(largest <= 1e-10, "dissipation sign");
    scenario("kac_tanaka", o);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.note << "; " << secs << " s";
    o.require(secs <= 600.0, "runtime");
}

void ac11(Outcome& o)
{
    const auto r = scenario("pme_barenblatt", o);
    const double drift = max_relative_drift(r.pooled);
    o.note << " relative drift " << drift << "; ";
    o.require(drift <= 0.01, "translated Barenblatt");
    const auto grid = default_r_grid();
    for (double m : {1.0, 2.0, 3.0}) o.require(check_admissible(NonlinearityA::power(m), grid).ok(), "m admissible");
    const NonlinearityA bad([](double u) { return -u * u; }, [](double) { return -2.0; });
    o.require(!check_admissible(bad, grid).ok(), "-u^2 rejected");
    RandomStream rng(11, StreamPurpose::Validation, 11);
    double worst = -INFINITY;
    for (int k = 0; k < 20; ++k) {
        const double c1 = rng.uniform(-1, 1), c2 = rng.uniform(-1, 1);
        const double w1 = rng.uniform(0.4, 1.0), w2 = rng.uniform(0.4, 1.0);
        auto bump = [](double c, double w) {
            return normalize(GridDensity::from_profile_1d(
                [=](double x) { return std::exp(-(x - c) * (x - c) / (2 * w * w)); }, -5.0, 0.01, 1000));
        };
        const double m = rng.uniform(1.0, 3.0);
        worst = std::max(worst, dissipation_terms(bump(c1, w1), bump(c2, w2), NonlinearityA::power(m)).bound);
    }
    o.note << "largest dissipation bound " << worst;
    o.require(worst <= 1e-6, "dissipation bound");
}

void ac12(Outcome& o)
{
    const Lattice lat{0.1, 5.0};
    for (double p : {1.0, 2.0}) {
        const auto e = discrete_duality_experiment(lat, lattice_atom(lat, 0.0), lattice_atom(lat, 1.0), p, 1.0, 11);
        double gap = 0.0, prev = INFINITY;
        bool down = true, qp = true;
        for (const auto& cp : e.checkpoints) {
            gap = std::max(gap, cp.duality_gap);
            down = down && cp.distance <= prev;
            qp = qp && cp.in_qp;
            prev = cp.distance;
        }
        o.note << "p=" << p << " final " << e.checkpoints.back().distance << " max gap " << gap << "; ";
        o.require(down, "non-increasing");
        o.require(gap < 1e-8, "duality gap");
        o.require(qp, "shifted potentials in Q_p");
    }
}

void ac13(Outcome& o)
{
    RandomStream rng(13, StreamPurpose::Validation, 13);
    double diff = 0.0, marg = 0.0, slack = 0.0;
    for (int k = 0; k < 100; ++k) {
        auto cloud = [&] {
            const auto n = 1 + rng.below(100);
            std::vector<double> x(n), w(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = 2.0 * rng.normal();
                w[i] = rng.uniform(0.05, 1.0);
            }
            return normalize(EmpiricalMeasure::from_1d(x, w));
        };
        const auto a = cloud(), b = cloud();
        const CostSpec c = cost::Power{k % 2 == 0 ? 1.0 : 2.0};
        const auto plan = wasserstein_lp(a, b, c);
        diff = std::max(diff, std::fabs(plan.cost_value - wasserstein_1d(a, b, c)));
        marg = std::max({marg, plan.max_row_marginal_error(), plan.max_col_marginal_error()});
        slack = std::max(slack, plan.max_slackness_violation());
    }
    o.note << "max |lp - 1d| " << diff << ", marginals " << marg << ", slackness " << slack;
    o.require(diff <= 1e-9, "agreement");
    o.require(marg <= 1e-10, "marginals");
    o.require(slack <= 1e-8, "complementary slackness");
}

void ac14(Outcome& o)
{
    RandomStream rng(14, StreamPurpose::Validation, 14);
    double worst2 = 0.0, worst1 = 0.0;
    for (int d = 1; d <= 3; ++d) {
        Eigen::MatrixXd s(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) s(i, j) = rng.normal();
        const Eigen::MatrixXd a = s * s.transpose();
        const MatrixField af = [a](std::span<const double>) { return a; };
        const MatrixField sf = [s](std::span<const double>) { return s; };
        for (int k = 0; k < 1000; ++k) {
            std::vector<double> x(d), y(d);
            for (auto& v : x) v = rng.normal();
            for (auto& v : y) v = rng.normal();
            worst2 = std::max(worst2, std::fabs(weight_pde_residual(af, sf, cost::Power{2.0}, x, y)));
            if (d == 1) worst1 = std::max(worst1, std::fabs(weight_pde_residual(af, sf, cost::Power{1.0}, x, y)));
        }
    }
    o.note << "Power(2) max residual " << worst2 << ", Power(1) d=1 max residual " << worst1;
    o.require(worst2 <= 1e-10, "Power(2)");
    o.require(worst1 <= 1e-10, "Power(1)");
}

} // namespace

int main()
{
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
        {"heat invariance", ac1},        {"Fokker-Planck rate", ac2},     {"NLTR bound", ac3},
        {"variable-coefficient d1", ac4}, {"fractional d_(alpha-1)", ac5}, {"stable identity", ac6},
        {"scattering rate", ac7},        {"kinetic scattering", ac8},     {"neuron IIE", ac9},
        {"Boltzmann/Tanaka", ac10},      {"porous media", ac11},          {"discrete duality", ac12},
        {"OT cross-validation", ac13},   {"weight-PDE residual", ac14},
    };
    int failed = 0;
    int index = 1;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            check(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.note << "[error: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("AC%02d %s  %s (%.1f s)  %s\n", index++, o.pass ? "PASS" : "FAIL", name, secs, o.note.str().c_str());
        failed += !o.pass;
    }
    std::printf("%d of 14 criteria passed\n", 14 - failed);
    return failed == 0 ? 0 : 1;
}
