#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "mkc/costs.hpp"
#include "mkc/ensemble.hpp"
#include "mkc/measures.hpp"
#include "mkc/monitor.hpp"
#include "mkc/pairing.hpp"
#include "mkc/random.hpp"
#include "mkc/series.hpp"

namespace mkc {

// Finite jump measure mu on parameters h: either weighted atoms or a
// sampler of mu/K together with the total mass K.
struct JumpLaw {
    std::vector<double> atoms;
    std::vector<double> masses;
    std::function<double(RandomStream&)> sampler;
    double sampler_mass = 0.0;

    static JumpLaw atom_list(std::vector<double> atoms, std::vector<double> masses);
    double total() const;
    double draw(RandomStream& rng) const;
};

// Inverse-CDF sampler for a SourceLaw (atom, or density tabulated on its interval).
class SourceSampler {
public:
    explicit SourceSampler(const SourceLaw& law, std::size_t cells = 4096);
    double draw(RandomStream& rng) const;

private:
    std::optional<double> atom_;
    double lower_ = 0.0;
    double width_ = 0.0;
    std::vector<double> cdf_;
};

namespace jumps {

// Jumps at rate K to Phi^{-1}(x, h), h ~ mu/K; (jumpas3) with constant L.
struct Scattering {
    std::function<double(double x, double h)> phi_inv;
    JumpLaw mu;
    double L = 1.0;
    double p = 1.0;
};

// Phase-space version: positions move ballistically, velocities jump.
struct KineticScattering {
    std::function<double(double v, double h)> phi_inv;
    JumpLaw mu;
    double L = 1.0;
    double a = 1.0;
};

// du/dt + d(x) u = b(x) int d u. Case 'a': d(0) = 0, d increasing, b = delta_0.
// Case 'b': d(x) = alpha x^p + beta with beta >= alpha int z^p b.
struct NeuronIIE {
    ScalarField d;
    SourceLaw b;
    char regime = 'a';
    double p = 1.0;
    double alpha = 1.0;
    double beta = 0.0;
};

// Kac system of N velocities in R^3; theta ~ B on (0, pi).
struct BoltzmannKac {
    std::function<double(RandomStream&)> theta_sampler;
    std::size_t particles = 64;
    std::size_t replicas = 200;
};

} // namespace jumps

struct JumpRunOptions {
    double T = 1.0;
    std::size_t checkpoints = 11;
    std::uint64_t seed = 0;
    CostSpec cost = cost::Power{1.0};
    MonitorOptions monitor;
    // Line-delimited JSON, one record per event of the first `log_pairs` pairs.
    std::ostream* event_log = nullptr;
    std::size_t log_pairs = 0;
    // Receives the ensemble at T when set.
    CoupledEnsemble* final_state = nullptr;
};

std::vector<double> checkpoint_times(double T, std::size_t checkpoints);

// (jumpas3) spot check on 1e3 sampled (x, y) pairs; ConstraintViolated if it fails.
void check_scattering(const jumps::Scattering& s, const CoupledEnsemble& initial, std::uint64_t seed);
void check_kinetic(const jumps::KineticScattering& s);
void check_neuron(const jumps::NeuronIIE& s);

DistanceSeries scattering_run(const jumps::Scattering& s, CoupledEnsemble initial, const JumpRunOptions& options);
// Ensemble coordinates are (x, v); the run cost is KineticSum(a).
DistanceSeries kinetic_run(const jumps::KineticScattering& s, CoupledEnsemble initial, const JumpRunOptions& options);
DistanceSeries neuron_run(const jumps::NeuronIIE& s, CoupledEnsemble initial, const JumpRunOptions& options);

// Uncoupled simulation of a single solution of the jump equation, returning
// the cloud at time T. Used as the marginal oracle.
EmpiricalMeasure neuron_marginal(const jumps::NeuronIIE& s, const EmpiricalMeasure& u0, double T, std::uint64_t seed);
EmpiricalMeasure scattering_marginal(const jumps::Scattering& s, const EmpiricalMeasure& u0, double T,
                                     std::uint64_t seed);

using Vec3 = Eigen::Vector3d;

struct CollisionPair {
    Vec3 v;
    Vec3 v_star;
    Vec3 w;
    Vec3 w_star;
};

struct CollisionFrame {
    Vec3 sigma;
    Vec3 omega;
};

// Coupled Maxwell collision sharing (theta, phi) and the common axis
// I = (v - v*) x (w - w*) / |...|, with direct bases (u, I, I1) and (u_w, I, I2).
CollisionPair tanaka_collision(const Vec3& v, const Vec3& v_star, const Vec3& w, const Vec3& w_star, double theta,
                               double phi, CollisionFrame* frame = nullptr);

// Phi-average of the change of |v-w|^2 + |v*-w*|^2 over one coupled collision.
double tanaka_average_dissipation(const Vec3& v, const Vec3& v_star, const Vec3& w, const Vec3& w_star, double theta);

struct KacResult {
    DistanceSeries series;
    double max_momentum_drift = 0.0;
    double max_energy_drift = 0.0;
    std::size_t collisions = 0;
};

// Replicated coupled Kac systems; each unordered pair collides at rate 2/N.
// The series is the replica mean of sum |v_i - w_i|^2 / (2N), bootstrapped over replicas.
KacResult kac_run(const jumps::BoltzmannKac& s, const DensityFamily& f1, const DensityFamily& f2, Pairing pairing,
                  double T, std::size_t checkpoints, std::uint64_t seed, std::size_t lp_replicas = 0);

// theta ~ density B on (0, pi), tabulated; throws InvalidParameter if int B != 1.
std::function<double(RandomStream&)> angle_sampler(const std::function<double(double)>& B);

} // namespace mkc
