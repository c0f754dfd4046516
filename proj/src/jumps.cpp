#include "mkc/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "mkc/error.hpp"
#include "mkc/ot.hpp"
#include "mkc/parallel.hpp"

namespace mkc {

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

// Piecewise-linear CDF table of a density on [lo, hi] (3-point Gauss per cell).
std::vector<double> tabulate_cdf(const std::function<double(double)>& f, double lo, double hi, std::size_t cells,
                                 double& mass)
{
    static constexpr double kNodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr double kWeights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    const double h = (hi - lo) / static_cast<double>(cells);
    std::vector<double> cdf(cells + 1, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double z = lo + (static_cast<double>(c) + 0.5 + 0.5 * kNodes[k]) * h;
            const double v = f(z);
            require(v >= 0.0 && std::isfinite(v), ErrorKind::InvalidParameter, "density must be finite and >= 0");
            acc += kWeights[k] * v;
        }
        cdf[c + 1] = cdf[c] + acc * h;
    }
    mass = cdf.back();
    return cdf;
}

double invert_cdf(const std::vector<double>& cdf, double lo, double width, double u)
{
    const double target = u * cdf.back();
    auto it = std::lower_bound(cdf.begin() + 1, cdf.end(), target);
    if (it == cdf.end()) {
        --it;
    }
    const auto c = static_cast<std::size_t>(it - cdf.begin()) - 1;
    const double span = cdf[c + 1] - cdf[c];
    const double frac = span > 0.0 ? (target - cdf[c]) / span : 0.5;
    const double h = width / static_cast<double>(cdf.size() - 1);
    return lo + (static_cast<double>(c) + frac) * h;
}

struct EventRecord {
    double t;
    std::size_t pair;
    std::string body;
};

// Exact event loop shared by the pair-wise jump processes: per pair, jumps
// arrive at the current pair rate, drift moves the pair between events.
template <class Rate, class Jump, class Drift>
void advance_pairs(CoupledEnsemble& e, std::vector<double>& next, std::vector<double>& last, double target,
                   const Rate& rate, const Jump& jump, const Drift& drift)
{
    parallel_for(e.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            RandomStream& rng = e.stream(i);
            while (next[i] <= target) {
                drift(i, next[i] - last[i]);
                last[i] = next[i];
                jump(i, next[i], rng);
                const double r = rate(i);
                next[i] = r > 0.0 ? next[i] + rng.exponential() / r : kNever;
            }
            drift(i, target - last[i]);
            last[i] = target;
        }
    });
}

template <class Rate>
void start_clocks(CoupledEnsemble& e, std::vector<double>& next, std::vector<double>& last, const Rate& rate)
{
    next.assign(e.size(), kNever);
    last.assign(e.size(), 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double r = rate(i);
        if (r > 0.0) {
            next[i] = e.stream(i).exponential() / r;
        }
    }
}

double pow_abs(double r, double p)
{
    return p == 1.0 ? std::fabs(r) : std::pow(std::fabs(r), p);
}

} // namespace

JumpLaw JumpLaw::atom_list(std::vector<double> atoms, std::vector<double> masses)
{
    require(!atoms.empty() && atoms.size() == masses.size(), ErrorKind::InvalidParameter,
            "jump law needs matching atoms and masses");
    for (double m : masses) {
        require(m >= 0.0, ErrorKind::InvalidParameter, "jump masses must be nonnegative");
    }
    JumpLaw law;
    law.atoms = std::move(atoms);
    law.masses = std::move(masses);
    return law;
}

double JumpLaw::total() const
{
    if (!atoms.empty()) {
        double s = 0.0;
        for (double m : masses) {
            s += m;
        }
        return s;
    }
    return sampler_mass;
}

double JumpLaw::draw(RandomStream& rng) const
{
    if (atoms.empty()) {
        return sampler(rng);
    }
    if (atoms.size() == 1) {
        return atoms[0];
    }
    double u = rng.uniform() * total();
    for (std::size_t k = 0; k + 1 < atoms.size(); ++k) {
        u -= masses[k];
        if (u < 0.0) {
            return atoms[k];
        }
    }
    return atoms.back();
}

SourceSampler::SourceSampler(const SourceLaw& law, std::size_t cells)
{
    if (law.atom) {
        atom_ = law.atom;
        return;
    }
    require(static_cast<bool>(law.density) && law.upper > law.lower, ErrorKind::InvalidParameter,
            "source law needs an atom or a density on a proper interval");
    double mass = 0.0;
    cdf_ = tabulate_cdf(law.density, law.lower, law.upper, cells, mass);
    require(std::fabs(mass - 1.0) <= 1e-6, ErrorKind::QuadratureFailure, "source density does not integrate to one");
    lower_ = law.lower;
    width_ = law.upper - law.lower;
}

double SourceSampler::draw(RandomStream& rng) const
{
    if (atom_) {
        return *atom_;
    }
    return invert_cdf(cdf_, lower_, width_, rng.uniform());
}

std::function<double(RandomStream&)> angle_sampler(const std::function<double(double)>& B)
{
    double mass = 0.0;
    auto cdf = std::make_shared<std::vector<double>>(tabulate_cdf(B, 0.0, std::numbers::pi, 4096, mass));
    require(std::fabs(mass - 1.0) <= 1e-6, ErrorKind::InvalidParameter,
            "angular kernel must integrate to one over (0, pi)");
    return [cdf](RandomStream& rng) { return invert_cdf(*cdf, 0.0, std::numbers::pi, rng.uniform()); };
}

std::vector<double> checkpoint_times(double T, std::size_t checkpoints)
{
    require(T > 0.0, ErrorKind::InvalidParameter, "horizon must be positive");
    require(checkpoints >= 2, ErrorKind::InvalidParameter, "need at least two checkpoints");
    std::vector<double> t(checkpoints);
    for (std::size_t k = 0; k < checkpoints; ++k) {
        t[k] = T * static_cast<double>(k) / static_cast<double>(checkpoints - 1);
    }
    t.back() = T;
    return t;
}

void check_scattering(const jumps::Scattering& s, const CoupledEnsemble& initial, std::uint64_t seed)
{
    require(static_cast<bool>(s.phi_inv), ErrorKind::InvalidParameter, "scattering map is not set");
    const double K = s.mu.total();
    require(K > 0.0, ErrorKind::InvalidParameter, "jump measure must have positive mass");
    require(initial.dim() == 1, ErrorKind::DimensionMismatch, "scattering is one-dimensional");
    RandomStream rng(seed, StreamPurpose::Validation, 1);
    const std::size_t n = initial.size();
    for (int trial = 0; trial < 1000 && n > 0; ++trial) {
        const double x = initial.x(rng.below(n))[0];
        const double y = initial.y(rng.below(n), 0);
        if (x == y) {
            continue;
        }
        const double bound = s.L * pow_abs(x - y, s.p);
        if (!s.mu.atoms.empty()) {
            double acc = 0.0;
            for (std::size_t k = 0; k < s.mu.atoms.size(); ++k) {
                const double h = s.mu.atoms[k];
                acc += s.mu.masses[k] * pow_abs(s.phi_inv(x, h) - s.phi_inv(y, h), s.p);
            }
            require(acc / K <= bound * (1.0 + 1e-12) + 1e-300, ErrorKind::ConstraintViolated,
                    "jump map violates the declared Lipschitz constant L");
        } else {
            constexpr int kDraws = 64;
            double m1 = 0.0, m2 = 0.0;
            for (int k = 0; k < kDraws; ++k) {
                const double h = s.mu.draw(rng);
                const double v = pow_abs(s.phi_inv(x, h) - s.phi_inv(y, h), s.p);
                m1 += v;
                m2 += v * v;
            }
            m1 /= kDraws;
            const double se = std::sqrt(std::max(0.0, m2 / kDraws - m1 * m1) / kDraws);
            require(m1 <= bound + 3.0 * se + 1e-12 * bound, ErrorKind::ConstraintViolated,
                    "jump map violates the declared Lipschitz constant L");
        }
    }
}

void check_kinetic(const jumps::KineticScattering& s)
{
    require(static_cast<bool>(s.phi_inv), ErrorKind::InvalidParameter, "velocity jump map is not set");
    const double K = s.mu.total();
    require(K > 0.0, ErrorKind::InvalidParameter, "jump measure must have positive mass");
    if (s.a == 1.0) {
        require(K >= K * s.L + 1.0, ErrorKind::ConstraintViolated, "kinetic scattering needs K >= K L + 1");
    } else {
        require(K > s.a + K * s.L, ErrorKind::ConstraintViolated, "weighted kinetic scattering needs K > a + K L");
    }
}

void check_neuron(const jumps::NeuronIIE& s)
{
    require(static_cast<bool>(s.d), ErrorKind::InvalidParameter, "rate function is not set");
    if (s.regime == 'a') {
        require(std::fabs(s.d(0.0)) <= 1e-12, ErrorKind::ConstraintViolated, "case (a) needs d(0) = 0");
        require(s.b.atom && *s.b.atom == 0.0, ErrorKind::ConstraintViolated, "case (a) needs b = delta_0");
        double prev = s.d(0.0);
        for (int k = 1; k <= 2000; ++k) {
            const double v = s.d(0.01 * k);
            require(v >= prev, ErrorKind::ConstraintViolated, "case (a) needs d increasing");
            prev = v;
        }
    } else if (s.regime == 'b') {
        for (int k = 0; k <= 200; ++k) {
            const double x = 0.05 * k;
            const double want = s.alpha * std::pow(x, s.p) + s.beta;
            require(std::fabs(s.d(x) - want) <= 1e-9 * (1.0 + std::fabs(want)), ErrorKind::ConstraintViolated,
                    "case (b) needs d(x) = alpha x^p + beta");
        }
        const double m = source_moment(s.b, s.p);
        require(s.beta >= s.alpha * m, ErrorKind::ConstraintViolated, "case (b) needs beta >= alpha int z^p b");
    } else {
        fail(ErrorKind::InvalidParameter, "neuron case must be 'a' or 'b'");
    }
}

namespace {

void flush_log(std::ostream* out, std::vector<std::vector<EventRecord>>& logs)
{
    if (out == nullptr) {
        return;
    }
    for (auto& per_pair : logs) {
        for (const auto& rec : per_pair) {
            *out << rec.body << '\n';
        }
        per_pair.clear();
    }
}

} // namespace

DistanceSeries scattering_run(const jumps::Scattering& s, CoupledEnsemble e, const JumpRunOptions& options)
{
    check_scattering(s, e, options.seed);
    const double K = s.mu.total();
    e.seed_streams(options.seed, StreamPurpose::Dynamics);
    MonitorOptions mo = options.monitor;
    mo.seed = options.seed;
    CheckpointMonitor monitor(options.cost, e.size(), mo);
    DistanceSeries series;
    series.seed = std::to_string(options.seed);

    const std::size_t logged = options.event_log ? std::min(options.log_pairs, e.size()) : 0;
    std::vector<std::vector<EventRecord>> logs(logged);
    auto& xs = e.xs();
    auto& gaps = e.gaps();
    auto rate = [K](std::size_t) { return K; };
    auto jump = [&](std::size_t i, double t, RandomStream& rng) {
        const double h = s.mu.draw(rng);
        const double x = xs[i];
        const double y = x + gaps[i];
        const double nx = s.phi_inv(x, h);
        const double ny = s.phi_inv(y, h);
        if (i < logged) {
            nlohmann::json j = {{"t", t}, {"pair", i}, {"h", h}, {"x", x}, {"y", y}, {"x_new", nx}, {"y_new", ny}};
            logs[i].push_back({t, i, j.dump()});
        }
        xs[i] = nx;
        gaps[i] = ny - nx;
    };
    auto drift = [](std::size_t, double) {};
    std::vector<double> next, last;
    start_clocks(e, next, last, rate);
    for (double t : checkpoint_times(options.T, options.checkpoints)) {
        advance_pairs(e, next, last, t, rate, jump, drift);
        flush_log(options.event_log, logs);
        e.time = t;
        monitor.record(series, e);
    }
    if (options.final_state != nullptr) *options.final_state = std::move(e);
    return series;
}

DistanceSeries kinetic_run(const jumps::KineticScattering& s, CoupledEnsemble e, const JumpRunOptions& options)
{
    check_kinetic(s);
    require(e.dim() == 2, ErrorKind::DimensionMismatch, "kinetic scattering needs (x, v) pairs");
    const double K = s.mu.total();
    e.seed_streams(options.seed, StreamPurpose::Dynamics);
    MonitorOptions mo = options.monitor;
    mo.seed = options.seed;
    CheckpointMonitor monitor(cost::KineticSum{s.a}, e.size(), mo);
    DistanceSeries series;
    series.seed = std::to_string(options.seed);

    const std::size_t logged = options.event_log ? std::min(options.log_pairs, e.size()) : 0;
    std::vector<std::vector<EventRecord>> logs(logged);
    auto& xs = e.xs();
    auto& gaps = e.gaps();
    auto rate = [K](std::size_t) { return K; };
    auto jump = [&](std::size_t i, double t, RandomStream& rng) {
        const double h = s.mu.draw(rng);
        const double v = xs[2 * i + 1];
        const double w = v + gaps[2 * i + 1];
        const double nv = s.phi_inv(v, h);
        const double nw = s.phi_inv(w, h);
        if (i < logged) {
            nlohmann::json j = {{"t", t},           {"pair", i},      {"h", h},
                                {"dx", gaps[2 * i]}, {"dv_before", w - v}, {"dv_after", nw - nv}};
            logs[i].push_back({t, i, j.dump()});
        }
        xs[2 * i + 1] = nv;
        gaps[2 * i + 1] = nw - nv;
    };
    auto drift = [&](std::size_t i, double tau) {
        if (tau > 0.0) {
            xs[2 * i] += xs[2 * i + 1] * tau;
            gaps[2 * i] += gaps[2 * i + 1] * tau;
        }
    };
    std::vector<double> next, last;
    start_clocks(e, next, last, rate);
    for (double t : checkpoint_times(options.T, options.checkpoints)) {
        advance_pairs(e, next, last, t, rate, jump, drift);
        flush_log(options.event_log, logs);
        e.time = t;
        monitor.record(series, e);
    }
    if (options.final_state != nullptr) *options.final_state = std::move(e);
    return series;
}

DistanceSeries neuron_run(const jumps::NeuronIIE& s, CoupledEnsemble e, const JumpRunOptions& options)
{
    check_neuron(s);
    require(e.dim() == 1, ErrorKind::DimensionMismatch, "the jump equation is one-dimensional");
    const SourceSampler source(s.b);
    e.seed_streams(options.seed, StreamPurpose::Dynamics);
    MonitorOptions mo = options.monitor;
    mo.seed = options.seed;
    CheckpointMonitor monitor(options.cost, e.size(), mo);
    DistanceSeries series;
    series.seed = std::to_string(options.seed);

    const std::size_t logged = options.event_log ? std::min(options.log_pairs, e.size()) : 0;
    std::vector<std::vector<EventRecord>> logs(logged);
    auto& xs = e.xs();
    auto& gaps = e.gaps();
    auto rate = [&](std::size_t i) { return std::max(s.d(xs[i]), s.d(xs[i] + gaps[i])); };
    auto jump = [&](std::size_t i, double t, RandomStream& rng) {
        const double x = xs[i];
        const double y = x + gaps[i];
        const double dx = s.d(x);
        const double dy = s.d(y);
        const double common = std::min(dx, dy);
        const double only_x = std::max(dx - dy, 0.0);
        const double only_y = std::max(dy - dx, 0.0);
        const double top = std::max(dx, dy);
        require(std::fabs(common + only_x + only_y - top) <= 1e-12 * (1.0 + top), ErrorKind::ConstraintViolated,
                "channel rates do not add up to the total rate");
        const double u = rng.uniform() * top;
        const double z = source.draw(rng);
        int channel = 0;
        if (u < common) {
            xs[i] = z;
            gaps[i] = 0.0;
        } else if (u < common + only_x) {
            channel = 1;
            xs[i] = z;
            gaps[i] = y - z;
        } else {
            channel = 2;
            gaps[i] = z - x;
        }
        if (i < logged) {
            nlohmann::json j = {{"t", t}, {"pair", i}, {"channel", channel}, {"z", z}, {"x", x}, {"y", y}};
            logs[i].push_back({t, i, j.dump()});
        }
    };
    auto drift = [](std::size_t, double) {};
    std::vector<double> next, last;
    start_clocks(e, next, last, rate);
    for (double t : checkpoint_times(options.T, options.checkpoints)) {
        advance_pairs(e, next, last, t, rate, jump, drift);
        flush_log(options.event_log, logs);
        e.time = t;
        monitor.record(series, e);
    }
    if (options.final_state != nullptr) *options.final_state = std::move(e);
    return series;
}

EmpiricalMeasure neuron_marginal(const jumps::NeuronIIE& s, const EmpiricalMeasure& u0, double T, std::uint64_t seed)
{
    require(u0.dim() == 1, ErrorKind::DimensionMismatch, "the jump equation is one-dimensional");
    const SourceSampler source(s.b);
    std::vector<double> xs = u0.points();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        RandomStream rng(seed, StreamPurpose::Validation, 1000 + i);
        double t = 0.0;
        for (;;) {
            const double r = s.d(xs[i]);
            if (r <= 0.0) {
                break;
            }
            t += rng.exponential() / r;
            if (t > T) {
                break;
            }
            xs[i] = source.draw(rng);
        }
    }
    return EmpiricalMeasure(1, std::move(xs), u0.weights());
}

EmpiricalMeasure scattering_marginal(const jumps::Scattering& s, const EmpiricalMeasure& u0, double T,
                                     std::uint64_t seed)
{
    require(u0.dim() == 1, ErrorKind::DimensionMismatch, "scattering is one-dimensional");
    const double K = s.mu.total();
    std::vector<double> xs = u0.points();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        RandomStream rng(seed, StreamPurpose::Validation, 1000 + i);
        double t = rng.exponential() / K;
        while (t <= T) {
            xs[i] = s.phi_inv(xs[i], s.mu.draw(rng));
            t += rng.exponential() / K;
        }
    }
    return EmpiricalMeasure(1, std::move(xs), u0.weights());
}

namespace {

// Unit vector orthogonal to u: the first coordinate axis whose component
// orthogonal to u is large, projected and normalized.
Vec3 fallback_axis(const Vec3& u)
{
    for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Unit(k);
        Vec3 p = e - e.dot(u) * u;
        if (p.norm() > 0.5) {
            return p.normalized();
        }
    }
    return Vec3::UnitZ();
}

Vec3 orthogonalize(const Vec3& axis, const Vec3& u)
{
    return (axis - axis.dot(u) * u).normalized();
}

} // namespace

CollisionPair tanaka_collision(const Vec3& v, const Vec3& v_star, const Vec3& w, const Vec3& w_star, double theta,
                               double phi, CollisionFrame* frame)
{
    const Vec3 dv = v - v_star;
    const Vec3 dw = w - w_star;
    const double rv = dv.norm();
    const double rw = dw.norm();
    CollisionPair out{v, v_star, w, w_star};
    if (rv == 0.0 && rw == 0.0) {
        return out;
    }
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);

    Vec3 common;
    if (rv > 0.0 && rw > 0.0) {
        const Vec3 cross = dv.cross(dw);
        if (cross.norm() > 1e-9 * rv * rw) {
            common = cross.normalized();
        } else {
            common = fallback_axis(dv / rv);
        }
    } else {
        common = fallback_axis(rv > 0.0 ? Vec3(dv / rv) : Vec3(dw / rw));
    }

    Vec3 sigma = Vec3::Zero();
    Vec3 omega = Vec3::Zero();
    if (rv > 0.0) {
        const Vec3 u = dv / rv;
        const Vec3 ia = orthogonalize(common, u);
        const Vec3 i1 = u.cross(ia);
        sigma = ct * u + st * (cp * ia + sp * i1);
        const Vec3 mid = 0.5 * (v + v_star);
        out.v = mid + 0.5 * rv * sigma;
        out.v_star = mid - 0.5 * rv * sigma;
    }
    if (rw > 0.0) {
        const Vec3 u = dw / rw;
        const Vec3 ib = orthogonalize(common, u);
        const Vec3 i2 = u.cross(ib);
        omega = ct * u + st * (cp * ib + sp * i2);
        const Vec3 mid = 0.5 * (w + w_star);
        out.w = mid + 0.5 * rw * omega;
        out.w_star = mid - 0.5 * rw * omega;
    }
    if (frame != nullptr) {
        frame->sigma = sigma;
        frame->omega = omega;
    }
    return out;
}

double tanaka_average_dissipation(const Vec3& v, const Vec3& v_star, const Vec3& w, const Vec3& w_star, double theta)
{
    const Vec3 dv = v - v_star;
    const Vec3 dw = w - w_star;
    const double s = std::sin(theta);
    return 0.5 * s * s * (dv.dot(dw) - dv.norm() * dw.norm());
}

KacResult kac_run(const jumps::BoltzmannKac& s, const DensityFamily& f1, const DensityFamily& f2, Pairing pairing,
                  double T, std::size_t checkpoints, std::uint64_t seed, std::size_t lp_replicas)
{
    require(s.particles >= 2, ErrorKind::InvalidParameter, "Kac system needs at least two particles");
    require(s.replicas >= 2, ErrorKind::InvalidParameter, "Kac run needs at least two replicas");
    require(family_dimension(f1) == 3 && family_dimension(f2) == 3, ErrorKind::DimensionMismatch,
            "Kac velocities are three-dimensional");
    require(static_cast<bool>(s.theta_sampler), ErrorKind::InvalidParameter, "angle sampler is not set");
    const std::size_t n = s.particles;
    const std::size_t R = s.replicas;
    const std::vector<double> times = checkpoint_times(T, checkpoints);
    const std::size_t C = times.size();
    lp_replicas = std::min(lp_replicas, R);

    std::vector<double> costs(R * C);
    std::vector<double> lps(R * C, 0.0);
    std::vector<double> mom_drift(R, 0.0), energy_drift(R, 0.0);
    std::vector<std::size_t> events(R, 0);

    parallel_for(
        R,
        [&](std::size_t lo, std::size_t hi) {
            for (std::size_t r = lo; r < hi; ++r) {
                const CoupledEnsemble init = pair_up(f1, f2, n, seed, pairing, cost::Power{2.0}, r);
                std::vector<Vec3> v(n), w(n);
                for (std::size_t i = 0; i < n; ++i) {
                    v[i] = Vec3(init.x(i)[0], init.x(i)[1], init.x(i)[2]);
                    w[i] = Vec3(init.y(i, 0), init.y(i, 1), init.y(i, 2));
                }
                auto totals = [&](const std::vector<Vec3>& a, Vec3& p, double& en) {
                    p.setZero();
                    en = 0.0;
                    for (const auto& x : a) {
                        p += x;
                        en += x.squaredNorm();
                    }
                };
                Vec3 pv0, pw0;
                double ev0 = 0.0, ew0 = 0.0;
                totals(v, pv0, ev0);
                totals(w, pw0, ew0);
                auto cost_now = [&] {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        acc += (v[i] - w[i]).squaredNorm();
                    }
                    return acc / (2.0 * static_cast<double>(n));
                };
                auto lp_now = [&] {
                    std::vector<double> a(3 * n), b(3 * n);
                    for (std::size_t i = 0; i < n; ++i) {
                        for (int k = 0; k < 3; ++k) {
                            a[3 * i + static_cast<std::size_t>(k)] = v[i][k];
                            b[3 * i + static_cast<std::size_t>(k)] = w[i][k];
                        }
                    }
                    return wasserstein_lp(EmpiricalMeasure::equal_weights(3, std::move(a)),
                                          EmpiricalMeasure::equal_weights(3, std::move(b)), cost::Power{2.0})
                        .cost_value;
                };
                RandomStream rng(seed, StreamPurpose::Dynamics, r);
                const double total_rate = static_cast<double>(n - 1);
                double t = rng.exponential() / total_rate;
                for (std::size_t c = 0; c < C; ++c) {
                    while (t <= times[c]) {
                        const std::size_t i = rng.below(n);
                        std::size_t j = rng.below(n - 1);
                        if (j >= i) {
                            ++j;
                        }
                        const double theta = s.theta_sampler(rng);
                        const double phi = 2.0 * std::numbers::pi * rng.uniform();
                        const CollisionPair out = tanaka_collision(v[i], v[j], w[i], w[j], theta, phi);
                        v[i] = out.v;
                        v[j] = out.v_star;
                        w[i] = out.w;
                        w[j] = out.w_star;
                        ++events[r];
                        t += rng.exponential() / total_rate;
                    }
                    costs[r * C + c] = cost_now();
                    if (r < lp_replicas) {
                        lps[r * C + c] = lp_now();
                    }
                }
                Vec3 pv, pw;
                double ev = 0.0, ew = 0.0;
                totals(v, pv, ev);
                totals(w, pw, ew);
                mom_drift[r] = std::max((pv - pv0).cwiseAbs().maxCoeff(), (pw - pw0).cwiseAbs().maxCoeff());
                energy_drift[r] = std::max(std::fabs(ev - ev0), std::fabs(ew - ew0));
            }
        },
        1);

    KacResult result;
    result.series.seed = std::to_string(seed);
    result.series.cost = "power:2";
    std::vector<double> column(R);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t r = 0; r < R; ++r) {
            column[r] = costs[r * C + c];
        }
        const double mean = pairwise_sum(column) / static_cast<double>(R);
        const BootstrapSummary b = bootstrap_mean(column, seed, c);
        double lp = std::numeric_limits<double>::quiet_NaN();
        if (lp_replicas > 0) {
            lp = 0.0;
            for (std::size_t r = 0; r < lp_replicas; ++r) {
                lp += lps[r * C + c];
            }
            lp /= static_cast<double>(lp_replicas);
        }
        result.series.push(times[c], mean, lp, b.low, b.high, b.stderr_);
        result.series.samples.push_back(column);
    }
    result.max_momentum_drift = *std::max_element(mom_drift.begin(), mom_drift.end());
    result.max_energy_drift = *std::max_element(energy_drift.begin(), energy_drift.end());
    for (std::size_t e : events) {
        result.collisions += e;
    }
    return result;
}

} // namespace mkc
