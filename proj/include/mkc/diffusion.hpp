#pragma once

#include <functional>
#include <span>
#include <variant>

#include "mkc/costs.hpp"
#include "mkc/ensemble.hpp"
#include "mkc/measures.hpp"
#include "mkc/monitor.hpp"
#include "mkc/series.hpp"

namespace mkc {

using VectorField = std::function<void(std::span<const double> x, double t, std::span<double> out)>;

// Generator convention: du/dt = Laplacian u is driven by sqrt(2) dB, and
// du/dt = d^2(sigma^2 u) by sqrt(2) sigma(x) dB.
namespace diffusion {

struct Heat {};

// du/dt + div(V u) = Laplacian u, with (V(x)-V(y)).(x-y) <= alpha |x-y|^2.
struct FokkerPlanck {
    VectorField drift;
    double alpha = 0.0;
};

// One-dimensional du/dt = d^2(sigma^2 u); `lipschitz` bounds |sigma'|.
struct VarCoef {
    ScalarField sigma;
    double lipschitz = 1.0;
};

// One-dimensional fractional equation of order alpha in (1, 2) with
// jump amplitude sigma(x).
struct Fractional {
    ScalarField sigma;
    double alpha = 1.5;
};

// du/dt + d/dx(V(x, I) u) = 0 with I = int psi u.
struct NonlinearTransport {
    std::function<double(double x, double I)> velocity;
    ScalarField psi;
    double alpha = 1.0;  // one-sided Lipschitz constant of V in x
    double beta = 0.0;   // sup|dV/dI| sup|psi'|
};

} // namespace diffusion

using DiffusionScenario = std::variant<diffusion::Heat, diffusion::FokkerPlanck, diffusion::VarCoef,
                                       diffusion::Fractional, diffusion::NonlinearTransport>;

// All steppers draw from the per-pair streams of the ensemble.
void step_heat(CoupledEnsemble& e, double dt);
void step_fokker_planck(CoupledEnsemble& e, const diffusion::FokkerPlanck& s, double dt);
void step_varcoef(CoupledEnsemble& e, const diffusion::VarCoef& s, double dt);
// `scale` = (C_alpha dt)^{1/alpha}, see fractional_scale.
void step_fractional(CoupledEnsemble& e, const diffusion::Fractional& s, double scale);

// Scale of the increment over dt of the pure-jump process with Levy measure |h|^{-1-alpha} dh.
double fractional_scale(double alpha, double dt);

// Setup checks: drift constant on 1e3 sampled pairs, NLTR constants.
// ConstraintViolated on failure.
void validate_scenario(const DiffusionScenario& s, const CoupledEnsemble& initial, std::uint64_t seed);

struct RunOptions {
    double T = 1.0;
    double dt = 1e-3;
    std::size_t checkpoints = 11;  // including t = 0 and t = T
    std::uint64_t seed = 0;
    CostSpec cost = cost::Power{2.0};
    MonitorOptions monitor;
};

// Step indices at which checkpoints fall, evenly spread over round(T/dt) steps.
std::vector<std::size_t> checkpoint_steps(double T, double dt, std::size_t checkpoints);

DistanceSeries run_diffusion(const DiffusionScenario& s, CoupledEnsemble initial, const RunOptions& options);

// Interacting particles for u against the single trajectory dX/dt = V(X, psi(X)),
// integrated with RK4. Series of the Power(2) cost between u(t) and delta_X(t).
DistanceSeries simulate_nltr(const diffusion::NonlinearTransport& s, const EmpiricalMeasure& u0, double x0, double T,
                             double dt, std::size_t checkpoints);

} // namespace mkc
