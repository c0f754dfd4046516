#include "mkc/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mkc/diffusion.hpp"
#include "mkc/error.hpp"
#include "mkc/grid_pde.hpp"
#include "mkc/jumps.hpp"
#include "mkc/pairing.hpp"
#include "mkc/porous_media.hpp"

namespace mkc {

namespace {

GridDensity profile_1d(const DensityFamily& f, double origin, double spacing, std::size_t cells)
{
    return normalize(GridDensity::from_profile_1d([&f](double x) { return family_density(f, x); }, origin, spacing,
                                                  cells));
}

DistanceSeries grid_series(const CouplingGridRun& run, const std::string& cost)
{
    DistanceSeries s;
    s.cost = cost;
    for (const auto& m : run.monitors) {
        s.push(m.t, m.cost_integral, std::nan(""), m.cost_integral, m.cost_integral, 0.0);
    }
    return s;
}

struct SeedRunner {
    const ScenarioConfig& cfg;
    std::uint64_t seed;

    CoupledEnsemble initial() const
    {
        return pair_up(*cfg.first, *cfg.second, cfg.particles, seed, cfg.pairing, cfg.cost);
    }

    JumpRunOptions jump_options() const
    {
        JumpRunOptions o;
        o.T = cfg.horizon;
        o.checkpoints = cfg.checkpoints;
        o.seed = seed;
        o.cost = cfg.cost;
        o.monitor.lp_subsample = cfg.lp_subsample;
        o.monitor.seed = seed;
        return o;
    }

    DistanceSeries operator()(const model::Diffusion& m) const
    {
        RunOptions o;
        o.T = cfg.horizon;
        o.dt = cfg.dt;
        o.checkpoints = cfg.checkpoints;
        o.seed = seed;
        o.cost = cfg.cost;
        o.monitor.lp_subsample = cfg.lp_subsample;
        o.monitor.seed = seed;
        return run_diffusion(m.scenario, initial(), o);
    }
    DistanceSeries operator()(const model::Nltr& m) const
    {
        const EmpiricalMeasure u0 = sample(*cfg.first, cfg.particles, seed, stream_id(StreamPurpose::InitialFirst, 0));
        diffusion::NonlinearTransport s = m.scenario;
        validate_scenario(s, CoupledEnsemble(1, u0.points(), u0.points()), seed);
        return simulate_nltr(s, u0, m.x0, cfg.horizon, cfg.dt, cfg.checkpoints);
    }
    DistanceSeries operator()(const model::Scattering& m) const
    {
        return scattering_run(m.scenario, initial(), jump_options());
    }
    DistanceSeries operator()(const model::Kinetic& m) const
    {
        return kinetic_run(m.scenario, initial(), jump_options());
    }
    DistanceSeries operator()(const model::Neuron& m) const
    {
        return neuron_run(m.scenario, initial(), jump_options());
    }
    DistanceSeries operator()(const model::Kac& m) const
    {
        return kac_run(m.scenario, *cfg.first, *cfg.second, cfg.pairing, cfg.horizon, cfg.checkpoints, seed,
                       m.lp_replicas)
            .series;
    }
    DistanceSeries operator()(const model::Pme& m) const
    {
        const GridDensity u1 = profile_1d(*cfg.first, m.origin, m.spacing, m.cells);
        const GridDensity u2 = profile_1d(*cfg.second, m.origin, m.spacing, m.cells);
        return pme_contraction_experiment(m.A, u1, u2, cfg.horizon, cfg.checkpoints, m.cfl);
    }
    DistanceSeries operator()(const model::DiscreteDuality& m) const
    {
        const double a = std::get<family::Dirac>(*cfg.first).location.at(0);
        const double b = std::get<family::Dirac>(*cfg.second).location.at(0);
        auto exp = discrete_duality_experiment(m.lattice, lattice_atom(m.lattice, a), lattice_atom(m.lattice, b), m.p,
                                               cfg.horizon, cfg.checkpoints);
        for (const auto& cp : exp.checkpoints) {
            require(cp.duality_gap < 1e-8 && cp.in_qp, ErrorKind::ConstraintViolated,
                    "dual certificate failed at t = " + std::to_string(cp.t));
        }
        return exp.series;
    }
    DistanceSeries operator()(const model::GridCoupling& m) const
    {
        const GridDensity a = profile_1d(*cfg.first, m.origin, m.spacing, m.cells);
        const GridDensity b = profile_1d(*cfg.second, m.origin, m.spacing, m.cells);
        std::vector<double> v(m.cells * m.cells);
        for (std::size_t i = 0; i < m.cells; ++i) {
            for (std::size_t j = 0; j < m.cells; ++j) {
                v[i * m.cells + j] = a.values()[i] * b.values()[j];
            }
        }
        const GridDensity v0({m.origin, m.origin}, {m.spacing, m.spacing}, {m.cells, m.cells}, std::move(v));
        GridRunOptions o;
        o.T = cfg.horizon;
        o.checkpoints = cfg.checkpoints;
        o.cost = cfg.cost;
        switch (m.equation) {
        case model::GridCoupling::Equation::Heat:
            return grid_series(solve_coupling_heat(v0, o), cfg.cost_name);
        case model::GridCoupling::Equation::FokkerPlanck:
            return grid_series(solve_coupling_fp(v0, m.field, o), cfg.cost_name);
        case model::GridCoupling::Equation::VarCoef:
            return grid_series(solve_coupling_varcoef(v0, m.field, o), cfg.cost_name);
        }
        fail(ErrorKind::InvalidParameter, "unknown grid equation");
    }
};

bool deterministic(const ModelSpec& m)
{
    return std::holds_alternative<model::Pme>(m) || std::holds_alternative<model::DiscreteDuality>(m) ||
           std::holds_alternative<model::GridCoupling>(m);
}

// Setup checks that depend on the sampled initial data.
void precheck(const ScenarioConfig& cfg)
{
    try {
        const std::uint64_t seed = cfg.seeds.front();
        if (const auto* d = std::get_if<model::Diffusion>(&cfg.model)) {
            validate_scenario(d->scenario, pair_up(*cfg.first, *cfg.second, std::min<std::size_t>(cfg.particles, 2000),
                                                   seed, cfg.pairing, cfg.cost),
                              seed);
        } else if (const auto* s = std::get_if<model::Scattering>(&cfg.model)) {
            check_scattering(s->scenario,
                             pair_up(*cfg.first, *cfg.second, std::min<std::size_t>(cfg.particles, 2000), seed,
                                     cfg.pairing, cfg.cost),
                             seed);
        } else if (const auto* p = std::get_if<model::Pme>(&cfg.model)) {
            require(check_admissible(p->A, default_r_grid()).ok(), ErrorKind::ConstraintViolated,
                    "nonlinearity fails the admissibility test");
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConfigError) throw;
        fail(ErrorKind::ConfigError, "model: " + std::string(e.what()));
    }
}

} // namespace

DistanceSeries pool_series(const std::vector<DistanceSeries>& series, std::uint64_t seed)
{
    require(!series.empty(), ErrorKind::InvalidParameter, "nothing to pool");
    const std::size_t C = series.front().size();
    bool sampled = true;
    for (const auto& s : series) {
        require(s.size() == C, ErrorKind::InvalidParameter, "series differ in checkpoint count");
        sampled = sampled && s.samples.size() == C;
    }
    DistanceSeries pooled;
    pooled.scenario_id = series.front().scenario_id;
    pooled.seed = "pooled";
    pooled.cost = series.front().cost;
    for (std::size_t k = 0; k < C; ++k) {
        double lp = 0.0;
        for (const auto& s : series) lp += s.lp_distance[k];
        lp /= static_cast<double>(series.size());
        if (sampled && series.size() > 1) {
            std::vector<double> all;
            for (const auto& s : series) all.insert(all.end(), s.samples[k].begin(), s.samples[k].end());
            const BootstrapSummary b = bootstrap_mean(all, seed, k);
            pooled.push(series.front().times[k], b.mean, lp, b.low, b.high, b.stderr_);
            pooled.samples.push_back(std::move(all));
        } else if (series.size() == 1) {
            const auto& s = series.front();
            pooled.push(s.times[k], s.coupled_cost[k], s.lp_distance[k], s.ci_low[k], s.ci_high[k], s.stderr_[k]);
        } else {
            double mean = 0.0;
            for (const auto& s : series) mean += s.coupled_cost[k];
            mean /= static_cast<double>(series.size());
            pooled.push(series.front().times[k], mean, lp, mean, mean, 0.0);
        }
    }
    return pooled;
}

Verdict evaluate(const ScenarioConfig& cfg, const std::vector<DistanceSeries>& per_seed, const DistanceSeries& pooled)
{
    Verdict v;
    v.scenario_id = cfg.id;
    v.pass = true;
    std::ostringstream detail;
    const auto& e = cfg.expect;

    for (double x : pooled.coupled_cost) {
        if (!std::isfinite(x)) {
            v.pass = false;
            detail << "non-finite value; ";
            break;
        }
    }

    const MonotoneVerdict mv = monotonicity_verdict(pooled, e.monotone.value_or(MonotoneBudget{}));
    v.monotone = mv.monotone;
    if (e.monotone) {
        detail << "monotone=" << mv.monotone << " (largest increase " << mv.largest_increase << ", excess "
               << mv.worst_violation << "); ";
        v.pass = v.pass && mv.monotone;
    }

    if (e.rate || e.rate_band) {
        const double t1 = e.window_end.value_or(cfg.horizon);
        try {
            const DecayFit fit = fit_decay_rate(pooled, e.window_start, t1);
            v.fitted_rate = fit.rate;
            std::pair<double, double> band;
            if (e.rate_band) {
                band = *e.rate_band;
            } else {
                const double r = *e.rate;
                band = {r - 0.1 * std::fabs(r), r + 0.1 * std::fabs(r)};
            }
            const bool ok = fit.rate >= band.first && fit.rate <= band.second;
            detail << "rate=" << fit.rate << " +- " << fit.stderr_ << " in [" << band.first << ", " << band.second
                   << "]: " << ok << "; ";
            v.pass = v.pass && ok;
        } catch (const Error& err) {
            detail << "rate fit failed: " << err.what() << "; ";
            v.pass = false;
        }
        if (e.rate) v.expected_rate = *e.rate;
    }

    if (e.bound) {
        const auto [factor, rate] = *e.bound;
        const double c0 = pooled.coupled_cost.front();
        double worst = 0.0;
        for (std::size_t k = 0; k < pooled.size(); ++k) {
            worst = std::max(worst, pooled.coupled_cost[k] / (factor * std::exp(rate * pooled.times[k]) * c0));
        }
        const bool ok = worst <= 1.0;
        detail << "bound ratio max=" << worst << ": " << ok << "; ";
        v.pass = v.pass && ok;
        if (!v.expected_rate) v.expected_rate = rate;
    }

    if (e.constant) {
        double worst = 0.0;
        for (const auto& s : per_seed) {
            const double c0 = s.coupled_cost.front();
            for (double x : s.coupled_cost) {
                worst = std::max(worst, std::fabs(x - c0) / std::max(1.0, std::fabs(c0)));
            }
        }
        const bool ok = worst <= *e.constant;
        detail << "max relative drift=" << worst << ": " << ok << "; ";
        v.pass = v.pass && ok;
    }
    v.detail = detail.str();
    return v;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg)
{
    precheck(cfg);
    ScenarioResult result;
    const bool once = deterministic(cfg.model);
    for (std::uint64_t seed : cfg.seeds) {
        DistanceSeries s;
        try {
            s = std::visit(SeedRunner{cfg, seed}, cfg.model);
        } catch (const Error& e) {
            throw Error(e.kind(), "scenario '" + cfg.id + "', seed " + std::to_string(seed) + ": " + e.what());
        }
        s.scenario_id = cfg.id;
        s.seed = std::to_string(seed);
        if (s.cost.empty()) s.cost = cfg.cost_name;
        s.validate();
        result.per_seed.push_back(std::move(s));
        if (once) break;
    }
    result.pooled = pool_series(result.per_seed, cfg.seeds.front());
    result.verdict = evaluate(cfg, result.per_seed, result.pooled);
    return result;
}

void write_outputs(const ScenarioResult& result, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    const std::string base = dir + "/" + result.verdict.scenario_id;
    std::ofstream csv(base + ".csv");
    require(static_cast<bool>(csv), ErrorKind::IoError, "cannot write '" + base + ".csv'");
    std::vector<DistanceSeries> all = result.per_seed;
    all.push_back(result.pooled);
    write_series_csv(csv, all);
    write_verdict(base + ".json", result.verdict);
}

} // namespace mkc
