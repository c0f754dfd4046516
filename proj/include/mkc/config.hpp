#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mkc/costs.hpp"
#include "mkc/diffusion.hpp"
#include "mkc/grid_pde.hpp"
#include "mkc/jumps.hpp"
#include "mkc/measures.hpp"
#include "mkc/pairing.hpp"
#include "mkc/porous_media.hpp"
#include "mkc/series.hpp"

namespace mkc {

namespace model {

struct Diffusion {
    DiffusionScenario scenario;
};

struct Nltr {
    diffusion::NonlinearTransport scenario;
    double x0 = 0.0;
};

struct Scattering {
    jumps::Scattering scenario;
};

struct Kinetic {
    jumps::KineticScattering scenario;
};

struct Neuron {
    jumps::NeuronIIE scenario;
};

struct Kac {
    jumps::BoltzmannKac scenario;
    std::size_t lp_replicas = 0;
};

struct Pme {
    NonlinearityA A = NonlinearityA::power(2.0);
    double origin = -5.0;
    double spacing = 0.01;
    std::size_t cells = 1000;
    double cfl = 0.45;
};

struct DiscreteDuality {
    Lattice lattice;
    double p = 1.0;
};

struct GridCoupling {
    enum class Equation { Heat, FokkerPlanck, VarCoef } equation = Equation::Heat;
    ScalarField field;  // drift V or sigma
    double origin = -5.0;
    double spacing = 0.05;
    std::size_t cells = 200;
};

} // namespace model

using ModelSpec = std::variant<model::Diffusion, model::Nltr, model::Scattering, model::Kinetic, model::Neuron,
                               model::Kac, model::Pme, model::DiscreteDuality, model::GridCoupling>;

// What a run must show to pass.
struct Expectations {
    std::optional<MonotoneBudget> monotone;
    std::optional<double> rate;                // expected decay rate
    std::optional<std::pair<double, double>> rate_band;
    double window_start = 0.0;                 // fit window; end defaults to the horizon
    std::optional<double> window_end;
    std::optional<std::pair<double, double>> bound;  // value(t) <= factor e^{rate t} value(0)
    std::optional<double> constant;            // max |value(t) - value(0)| / max(1, value(0))
};

struct ScenarioConfig {
    std::string id;
    std::string kind;
    std::vector<std::uint64_t> seeds;
    double horizon = 1.0;
    std::size_t checkpoints = 11;
    std::size_t particles = 10000;
    double dt = 1e-3;
    CostSpec cost = cost::Power{2.0};
    std::string cost_name = "power:2";
    Pairing pairing = Pairing::Independent;
    std::optional<DensityFamily> first;
    std::optional<DensityFamily> second;
    std::size_t lp_subsample = 300;
    ModelSpec model;
    Expectations expect;
    std::string output_dir = "results";
};

// YAML text to a validated configuration. Unknown keys and bad values raise
// ConfigError naming the offending field (e.g. "model.alpha").
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

// "power:2", "kinetic:1", "regularized:0.1", "yamada:0.1".
CostSpec parse_cost(const std::string& text);

} // namespace mkc
