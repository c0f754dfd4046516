#include "mkc/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "mkc/error.hpp"
#include "mkc/parallel.hpp"
#include "mkc/random.hpp"

namespace mkc {

void step_heat(CoupledEnsemble& e, double dt)
{
    require(dt > 0.0, ErrorKind::InvalidParameter, "time step must be positive");
    require(e.has_streams(), ErrorKind::InvalidParameter, "ensemble streams are not seeded");
    const double amp = std::sqrt(2.0 * dt);
    const std::size_t d = e.dim();
    parallel_for(e.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            auto x = e.x(i);
            RandomStream& rng = e.stream(i);
            for (std::size_t k = 0; k < d; ++k) {
                x[k] += amp * rng.normal();
            }
        }
    });
    e.time += dt;
}

void step_fokker_planck(CoupledEnsemble& e, const diffusion::FokkerPlanck& s, double dt)
{
    require(dt > 0.0, ErrorKind::InvalidParameter, "time step must be positive");
    require(e.has_streams(), ErrorKind::InvalidParameter, "ensemble streams are not seeded");
    const double amp = std::sqrt(2.0 * dt);
    const std::size_t d = e.dim();
    const double t = e.time;
    parallel_for(e.size(), [&](std::size_t lo, std::size_t hi) {
        std::vector<double> y(d), vx(d), vy(d);
        for (std::size_t i = lo; i < hi; ++i) {
            auto x = e.x(i);
            auto gap = e.gap(i);
            for (std::size_t k = 0; k < d; ++k) {
                y[k] = x[k] + gap[k];
            }
            s.drift(x, t, vx);
            s.drift(y, t, vy);
            RandomStream& rng = e.stream(i);
            for (std::size_t k = 0; k < d; ++k) {
                x[k] += vx[k] * dt + amp * rng.normal();
                gap[k] += (vy[k] - vx[k]) * dt;
            }
        }
    });
    e.time += dt;
}

void step_varcoef(CoupledEnsemble& e, const diffusion::VarCoef& s, double dt)
{
    require(dt > 0.0, ErrorKind::InvalidParameter, "time step must be positive");
    require(e.dim() == 1, ErrorKind::DimensionMismatch, "variable-coefficient heat is one-dimensional");
    require(e.has_streams(), ErrorKind::InvalidParameter, "ensemble streams are not seeded");
    const double amp = std::sqrt(2.0 * dt);
    auto& xs = e.xs();
    auto& gaps = e.gaps();
    parallel_for(e.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double sx = s.sigma(xs[i]);
            const double sy = s.sigma(xs[i] + gaps[i]);
            const double g = amp * e.stream(i).normal();
            xs[i] += sx * g;
            gaps[i] += (sy - sx) * g;
        }
    });
    e.time += dt;
}

void step_fractional(CoupledEnsemble& e, const diffusion::Fractional& s, double scale)
{
    require(e.dim() == 1, ErrorKind::DimensionMismatch, "fractional coupling is one-dimensional");
    require(e.has_streams(), ErrorKind::InvalidParameter, "ensemble streams are not seeded");
    auto& xs = e.xs();
    auto& gaps = e.gaps();
    const double alpha = s.alpha;
    parallel_for(e.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const double sx = s.sigma(xs[i]);
            const double sy = s.sigma(xs[i] + gaps[i]);
            const double jump = scale * e.stream(i).symmetric_stable(alpha);
            xs[i] += sx * jump;
            gaps[i] += (sy - sx) * jump;
        }
    });
}

double fractional_scale(double alpha, double dt)
{
    require(alpha > 1.0 && alpha < 2.0, ErrorKind::InvalidParameter, "fractional order must lie in (1, 2)");
    require(dt > 0.0, ErrorKind::InvalidParameter, "time step must be positive");
    static std::mutex mutex;
    static std::map<double, double> cache;
    double c = 0.0;
    {
        std::lock_guard lock(mutex);
        auto it = cache.find(alpha);
        if (it == cache.end()) {
            it = cache.emplace(alpha, stable_constant(alpha)).first;
        }
        c = it->second;
    }
    return std::pow(c * dt, 1.0 / alpha);
}

void validate_scenario(const DiffusionScenario& s, const CoupledEnsemble& initial, std::uint64_t seed)
{
    RandomStream rng(seed, StreamPurpose::Validation, 0);
    const std::size_t n = initial.size();
    const std::size_t d = initial.dim();
    if (const auto* fp = std::get_if<diffusion::FokkerPlanck>(&s)) {
        require(static_cast<bool>(fp->drift), ErrorKind::InvalidParameter, "drift is not set");
        std::vector<double> x(d), y(d), vx(d), vy(d);
        for (int trial = 0; trial < 1000 && n > 0; ++trial) {
            const std::size_t i = rng.below(n);
            const std::size_t j = rng.below(n);
            double r2 = 0.0;
            double inner = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                x[k] = initial.x(i)[k] + rng.normal();
                y[k] = initial.y(j, k) + rng.normal();
            }
            fp->drift(x, 0.0, vx);
            fp->drift(y, 0.0, vy);
            for (std::size_t k = 0; k < d; ++k) {
                inner += (vx[k] - vy[k]) * (x[k] - y[k]);
                r2 += (x[k] - y[k]) * (x[k] - y[k]);
            }
            require(inner <= fp->alpha * r2 + 1e-9 * (1.0 + r2), ErrorKind::ConstraintViolated,
                    "drift violates (V(x)-V(y)).(x-y) <= alpha |x-y|^2 on a sampled pair");
        }
    } else if (const auto* nl = std::get_if<diffusion::NonlinearTransport>(&s)) {
        require(nl->beta < nl->alpha, ErrorKind::ConstraintViolated, "nonlinear transport needs beta < alpha");
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = nl->psi(initial.x(i)[0]);
            lo = i == 0 ? v : std::min(lo, v);
            hi = i == 0 ? v : std::max(hi, v);
        }
        for (int trial = 0; trial < 1000 && n > 0; ++trial) {
            const double x = initial.x(rng.below(n))[0] + rng.normal();
            const double y = initial.x(rng.below(n))[0] + rng.normal();
            const double I = rng.uniform(lo, hi + 1e-12);
            const double inner = (x - y) * (nl->velocity(x, I) - nl->velocity(y, I));
            require(inner <= -nl->alpha * (x - y) * (x - y) + 1e-9, ErrorKind::ConstraintViolated,
                    "velocity violates (x-y)(V(x,I)-V(y,I)) <= -alpha |x-y|^2 on a sampled pair");
        }
    } else if (const auto* fr = std::get_if<diffusion::Fractional>(&s)) {
        require(fr->alpha > 1.0 && fr->alpha < 2.0, ErrorKind::InvalidParameter,
                "fractional order must lie in (1, 2)");
    }
}

std::vector<std::size_t> checkpoint_steps(double T, double dt, std::size_t checkpoints)
{
    require(T > 0.0 && dt > 0.0, ErrorKind::InvalidParameter, "horizon and step must be positive");
    require(checkpoints >= 2, ErrorKind::InvalidParameter, "need at least two checkpoints");
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    require(steps >= checkpoints - 1, ErrorKind::InvalidParameter, "fewer steps than checkpoint intervals");
    std::vector<std::size_t> out(checkpoints);
    for (std::size_t k = 0; k < checkpoints; ++k) {
        out[k] = (k * steps + (checkpoints - 1) / 2) / (checkpoints - 1);
    }
    out.back() = steps;
    return out;
}

DistanceSeries run_diffusion(const DiffusionScenario& s, CoupledEnsemble e, const RunOptions& options)
{
    require(e.size() > 0, ErrorKind::InvalidParameter, "empty ensemble");
    validate_scenario(s, e, options.seed);
    const std::vector<std::size_t> marks = checkpoint_steps(options.T, options.dt, options.checkpoints);
    e.seed_streams(options.seed, StreamPurpose::Dynamics);
    e.time = 0.0;

    MonitorOptions mo = options.monitor;
    mo.seed = options.seed;
    CheckpointMonitor monitor(options.cost, e.size(), mo);
    DistanceSeries series;
    series.seed = std::to_string(options.seed);

    double scale = 0.0;
    if (const auto* fr = std::get_if<diffusion::Fractional>(&s)) {
        scale = fractional_scale(fr->alpha, options.dt);
    }
    if (std::holds_alternative<diffusion::NonlinearTransport>(s)) {
        fail(ErrorKind::InvalidParameter, "nonlinear transport runs through simulate_nltr");
    }

    std::size_t step = 0;
    for (std::size_t mark : marks) {
        while (step < mark) {
            std::visit(
                [&](const auto& sc) {
                    using T = std::decay_t<decltype(sc)>;
                    if constexpr (std::is_same_v<T, diffusion::Heat>) {
                        step_heat(e, options.dt);
                    } else if constexpr (std::is_same_v<T, diffusion::FokkerPlanck>) {
                        step_fokker_planck(e, sc, options.dt);
                    } else if constexpr (std::is_same_v<T, diffusion::VarCoef>) {
                        step_varcoef(e, sc, options.dt);
                    } else if constexpr (std::is_same_v<T, diffusion::Fractional>) {
                        step_fractional(e, sc, scale);
                    }
                },
                s);
            ++step;
            e.time = static_cast<double>(step) * options.dt;
        }
        monitor.record(series, e);
    }
    return series;
}

DistanceSeries simulate_nltr(const diffusion::NonlinearTransport& s, const EmpiricalMeasure& u0, double x0, double T,
                             double dt, std::size_t checkpoints)
{
    require(s.beta < s.alpha, ErrorKind::ConstraintViolated, "nonlinear transport needs beta < alpha");
    require(u0.dim() == 1, ErrorKind::DimensionMismatch, "nonlinear transport is one-dimensional");
    const std::vector<std::size_t> marks = checkpoint_steps(T, dt, checkpoints);
    const std::size_t n = u0.size();
    std::vector<double> w(n);
    const double mass = u0.total_mass();
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = u0.weight(i) / mass;
    }
    // State: n particles followed by the comparison point.
    std::vector<double> state(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        state[i] = u0.point(i)[0];
    }
    state[n] = x0;

    std::vector<double> tmp(n);
    auto rhs = [&](const std::vector<double>& z, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            tmp[i] = w[i] * s.psi(z[i]);
        }
        const double I = pairwise_sum(tmp);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = s.velocity(z[i], I);
        }
        out[n] = s.velocity(z[n], s.psi(z[n]));
    };
    auto cost = [&](const std::vector<double>& z) {
        for (std::size_t i = 0; i < n; ++i) {
            const double r = z[i] - z[n];
            tmp[i] = w[i] * 0.5 * r * r;
        }
        return pairwise_sum(tmp);
    };

    DistanceSeries series;
    series.seed = "0";
    series.cost = "power:2";
    std::vector<double> k1(n + 1), k2(n + 1), k3(n + 1), k4(n + 1), stage(n + 1);
    std::size_t step = 0;
    for (std::size_t mark : marks) {
        while (step < mark) {
            rhs(state, k1);
            for (std::size_t i = 0; i <= n; ++i) {
                stage[i] = state[i] + 0.5 * dt * k1[i];
            }
            rhs(stage, k2);
            for (std::size_t i = 0; i <= n; ++i) {
                stage[i] = state[i] + 0.5 * dt * k2[i];
            }
            rhs(stage, k3);
            for (std::size_t i = 0; i <= n; ++i) {
                stage[i] = state[i] + dt * k3[i];
            }
            rhs(stage, k4);
            for (std::size_t i = 0; i <= n; ++i) {
                state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            ++step;
        }
        const double c = cost(state);
        series.push(static_cast<double>(step) * dt, c, c, c, c, 0.0);
        series.samples.push_back({c});
    }
    return series;
}

} // namespace mkc
