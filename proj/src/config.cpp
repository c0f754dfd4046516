#include "mkc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "mkc/error.hpp"
#include "mkc/expression.hpp"

namespace mkc {

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what)
{
    fail(ErrorKind::ConfigError, field + ": " + what);
}

// A mapping node together with its dotted path; every key must be consumed
// through one of the getters, so leftovers are typos.
class Table {
public:
    Table(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path))
    {
        if (!node_.IsMap()) {
            config_error(path_.empty() ? "<root>" : path_, "expected a mapping");
        }
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

    YAML::Node raw(const std::string& key)
    {
        seen_.insert(key);
        return node_[key];
    }

    template <class T>
    T get(const std::string& key)
    {
        if (!has(key)) {
            config_error(field(key), "missing required key");
        }
        return convert<T>(key);
    }

    template <class T>
    T get(const std::string& key, T fallback)
    {
        if (!has(key)) {
            seen_.insert(key);
            return fallback;
        }
        return convert<T>(key);
    }

    Table sub(const std::string& key)
    {
        if (!has(key)) {
            config_error(field(key), "missing required table");
        }
        return Table(raw(key), field(key));
    }

    void finish() const
    {
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) {
                config_error(field(key), "unknown key");
            }
        }
    }

private:
    template <class T>
    T convert(const std::string& key)
    {
        try {
            return raw(key).template as<T>();
        } catch (const YAML::Exception&) {
            config_error(field(key), "value has the wrong type");
        }
    }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

void positive(double v, const std::string& field)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        config_error(field, "must be a positive number");
    }
}

Expression compile_field(Table& t, const std::string& key, const std::vector<std::string>& vars)
{
    const auto src = t.get<std::string>(key);
    try {
        return Expression::compile(src, vars);
    } catch (const Error& e) {
        config_error(t.field(key), e.what());
    }
}

ScalarField scalar(Table& t, const std::string& key, const std::string& var)
{
    const Expression e = compile_field(t, key, {var});
    return [e](double x) { return e(x); };
}

DensityFamily parse_family(Table t)
{
    const auto name = t.get<std::string>("family");
    DensityFamily f;
    if (name == "gaussian") {
        family::Gaussian g;
        g.mean = t.get<std::vector<double>>("mean");
        g.variance = t.get<double>("variance", 1.0);
        f = g;
    } else if (name == "uniform") {
        f = family::Uniform{t.get<std::vector<double>>("lower"), t.get<std::vector<double>>("upper")};
    } else if (name == "dirac") {
        f = family::Dirac{t.get<std::vector<double>>("location")};
    } else if (name == "barenblatt") {
        f = family::Barenblatt{t.get<double>("m", 2.0), t.get<double>("t0", 1.0), t.get<double>("center", 0.0)};
    } else {
        config_error(t.field("family"), "unknown family '" + name + "'");
    }
    t.finish();
    try {
        validate_family(f);
    } catch (const Error& e) {
        config_error(t.field("family"), e.what());
    }
    return f;
}

CostSpec parse_cost_table(Table t, std::string& name)
{
    const auto kind = t.get<std::string>("kind");
    CostSpec c;
    std::ostringstream label;
    if (kind == "power") {
        const double p = t.get<double>("p", 2.0);
        positive(p, t.field("p"));
        c = cost::Power{p};
        label << "power:" << p;
    } else if (kind == "kinetic") {
        const double a = t.get<double>("a", 1.0);
        positive(a, t.field("a"));
        c = cost::KineticSum{a};
        label << "kinetic:" << a;
    } else if (kind == "dfunction") {
        const ScalarField d = scalar(t, "d", "x");
        const double p = t.get<double>("p", 1.0);
        c = cost::DFunction{d, p};
        label << "dfunction:" << p;
    } else if (kind == "regularized" || kind == "yamada") {
        const double eps = t.get<double>("eps", 0.1);
        positive(eps, t.field("eps"));
        if (kind == "yamada" && eps >= 1.0) config_error(t.field("eps"), "Yamada regularization needs eps < 1");
        c = cost::RegularizedAbs{eps, kind == "yamada" ? cost::RegularizedAbs::Kind::Yamada
                                                       : cost::RegularizedAbs::Kind::Quadratic};
        label << kind << ":" << eps;
    } else {
        config_error(t.field("kind"), "unknown cost '" + kind + "'");
    }
    t.finish();
    name = label.str();
    return c;
}

JumpLaw parse_jump_law(Table& t)
{
    if (t.has("uniform")) {
        const auto range = t.get<std::vector<double>>("uniform");
        if (range.size() != 2 || !(range[1] > range[0])) config_error(t.field("uniform"), "expected [lower, upper]");
        const double mass = t.get<double>("mass");
        positive(mass, t.field("mass"));
        JumpLaw law;
        law.sampler = [lo = range[0], hi = range[1]](RandomStream& rng) { return rng.uniform(lo, hi); };
        law.sampler_mass = mass;
        return law;
    }
    try {
        return JumpLaw::atom_list(t.get<std::vector<double>>("atoms"), t.get<std::vector<double>>("masses"));
    } catch (const Error& e) {
        config_error(t.field("atoms"), e.what());
    }
}

std::size_t family_dim(const std::optional<DensityFamily>& f)
{
    return f ? family_dimension(*f) : 0;
}

model::Diffusion parse_diffusion(Table t, std::size_t dim)
{
    const auto eq = t.get<std::string>("equation");
    model::Diffusion m;
    if (eq == "heat") {
        m.scenario = diffusion::Heat{};
    } else if (eq == "fokker_planck") {
        std::vector<std::string> vars;
        if (dim == 1) {
            vars = {"x", "t"};
        } else {
            for (std::size_t k = 1; k <= dim; ++k) vars.push_back("x" + std::to_string(k));
            vars.push_back("t");
        }
        std::vector<Expression> comps;
        const YAML::Node node = t.raw("drift");
        if (!node) config_error(t.field("drift"), "missing required key");
        try {
            if (node.IsSequence()) {
                for (const auto& c : node) comps.push_back(Expression::compile(c.as<std::string>(), vars));
            } else {
                comps.push_back(Expression::compile(node.as<std::string>(), vars));
            }
        } catch (const std::exception& e) {
            config_error(t.field("drift"), e.what());
        }
        if (comps.size() != dim) config_error(t.field("drift"), "needs one component per dimension");
        diffusion::FokkerPlanck fp;
        fp.alpha = t.get<double>("alpha");
        fp.drift = [comps, dim](std::span<const double> x, double time, std::span<double> out) {
            double args[8];
            for (std::size_t k = 0; k < dim; ++k) args[k] = x[k];
            args[dim] = time;
            for (std::size_t k = 0; k < dim; ++k) out[k] = comps[k](std::span<const double>(args, dim + 1));
        };
        if (dim + 1 > 8) config_error(t.field("drift"), "at most 7 dimensions are supported");
        m.scenario = fp;
    } else if (eq == "varcoef") {
        if (dim != 1) config_error(t.field("equation"), "variable-coefficient heat is one-dimensional");
        diffusion::VarCoef vc;
        vc.sigma = scalar(t, "sigma", "x");
        vc.lipschitz = t.get<double>("lipschitz", 1.0);
        m.scenario = vc;
    } else if (eq == "fractional") {
        if (dim != 1) config_error(t.field("equation"), "fractional equation is one-dimensional");
        diffusion::Fractional fr;
        fr.sigma = scalar(t, "sigma", "x");
        fr.alpha = t.get<double>("order", 1.5);
        if (!(fr.alpha > 1.0 && fr.alpha < 2.0)) config_error(t.field("order"), "must lie in (1, 2)");
        m.scenario = fr;
    } else {
        config_error(t.field("equation"), "unknown equation '" + eq + "'");
    }
    t.finish();
    return m;
}

model::Nltr parse_nltr(Table t)
{
    model::Nltr m;
    const Expression v = compile_field(t, "velocity", {"x", "I"});
    m.scenario.velocity = [v](double x, double I) { return v(x, I); };
    m.scenario.psi = scalar(t, "psi", "x");
    m.scenario.alpha = t.get<double>("alpha");
    m.scenario.beta = t.get<double>("beta");
    m.x0 = t.get<double>("x0", 0.0);
    if (!(m.scenario.beta < m.scenario.alpha)) {
        config_error(t.field("beta"), "the contraction estimate needs beta < alpha");
    }
    t.finish();
    return m;
}

model::Scattering parse_scattering(Table t)
{
    model::Scattering m;
    const Expression f = compile_field(t, "map", {"x", "h"});
    m.scenario.phi_inv = [f](double x, double h) { return f(x, h); };
    m.scenario.mu = parse_jump_law(t);
    m.scenario.L = t.get<double>("L");
    m.scenario.p = t.get<double>("p", 1.0);
    if (!(m.scenario.mu.total() > 0.0)) config_error(t.field("masses"), "jump measure needs positive mass");
    t.finish();
    return m;
}

model::Kinetic parse_kinetic(Table t)
{
    model::Kinetic m;
    const Expression f = compile_field(t, "map", {"v", "h"});
    m.scenario.phi_inv = [f](double v, double h) { return f(v, h); };
    m.scenario.mu = parse_jump_law(t);
    m.scenario.L = t.get<double>("L");
    m.scenario.a = t.get<double>("a", 1.0);
    t.finish();
    try {
        check_kinetic(m.scenario);
    } catch (const Error& e) {
        config_error(t.field("L"), e.what());
    }
    return m;
}

model::Neuron parse_neuron(Table t)
{
    model::Neuron m;
    auto& s = m.scenario;
    s.d = scalar(t, "rate", "x");
    const auto regime = t.get<std::string>("case");
    if (regime != "a" && regime != "b") config_error(t.field("case"), "must be 'a' or 'b'");
    s.regime = regime[0];
    s.p = t.get<double>("p", 1.0);
    s.alpha = t.get<double>("alpha", 1.0);
    s.beta = t.get<double>("beta", 0.0);
    Table src = t.sub("source");
    if (src.has("dirac")) {
        s.b = SourceLaw::dirac(src.get<double>("dirac"));
    } else {
        s.b = SourceLaw::on_interval(scalar(src, "density", "z"), src.get<double>("lower"), src.get<double>("upper"));
    }
    src.finish();
    t.finish();
    try {
        check_neuron(s);
    } catch (const Error& e) {
        config_error(t.field("case"), e.what());
    }
    return m;
}

model::Kac parse_kac(Table t)
{
    model::Kac m;
    const ScalarField B = scalar(t, "kernel", "theta");
    try {
        m.scenario.theta_sampler = angle_sampler(B);
    } catch (const Error& e) {
        config_error(t.field("kernel"), e.what());
    }
    m.scenario.particles = t.get<std::size_t>("particles", 64);
    m.scenario.replicas = t.get<std::size_t>("replicas", 200);
    m.lp_replicas = t.get<std::size_t>("lp_replicas", 0);
    if (m.scenario.particles < 2) config_error(t.field("particles"), "needs at least two particles");
    if (m.scenario.replicas < 2) config_error(t.field("replicas"), "needs at least two replicas");
    t.finish();
    return m;
}

model::Pme parse_pme(Table t)
{
    model::Pme m;
    if (t.has("m")) {
        const double mm = t.get<double>("m");
        positive(mm, t.field("m"));
        m.A = NonlinearityA::power(mm);
    } else {
        m.A = NonlinearityA(scalar(t, "A", "u"), scalar(t, "A2", "u"));
    }
    m.origin = t.get<double>("origin", -5.0);
    m.spacing = t.get<double>("spacing", 0.01);
    m.cells = t.get<std::size_t>("cells", 1000);
    m.cfl = t.get<double>("cfl", 0.45);
    positive(m.spacing, t.field("spacing"));
    if (m.cells < 3) config_error(t.field("cells"), "needs at least 3 cells");
    if (!(m.cfl > 0.0 && m.cfl <= 0.5)) config_error(t.field("cfl"), "must lie in (0, 1/2]");
    t.finish();
    return m;
}

model::DiscreteDuality parse_duality(Table t)
{
    model::DiscreteDuality m;
    m.lattice.h = t.get<double>("h", 0.1);
    m.lattice.R = t.get<double>("R", 5.0);
    m.p = t.get<double>("p", 1.0);
    positive(m.lattice.h, t.field("h"));
    positive(m.lattice.R, t.field("R"));
    if (m.p < 1.0) config_error(t.field("p"), "must be at least 1");
    t.finish();
    return m;
}

model::GridCoupling parse_grid(Table t)
{
    model::GridCoupling m;
    const auto eq = t.get<std::string>("equation");
    if (eq == "heat") {
        m.equation = model::GridCoupling::Equation::Heat;
    } else if (eq == "fokker_planck") {
        m.equation = model::GridCoupling::Equation::FokkerPlanck;
        m.field = scalar(t, "drift", "x");
    } else if (eq == "varcoef") {
        m.equation = model::GridCoupling::Equation::VarCoef;
        m.field = scalar(t, "sigma", "x");
    } else {
        config_error(t.field("equation"), "unknown equation '" + eq + "'");
    }
    m.origin = t.get<double>("origin", -5.0);
    m.spacing = t.get<double>("spacing", 0.05);
    m.cells = t.get<std::size_t>("cells", 200);
    positive(m.spacing, t.field("spacing"));
    if (m.cells < 3) config_error(t.field("cells"), "needs at least 3 cells");
    t.finish();
    return m;
}

Expectations parse_expect(Table t)
{
    Expectations e;
    if (t.has("monotone")) {
        Table m = t.sub("monotone");
        MonotoneBudget b;
        b.stderr_multiplier = m.get<double>("stderr_multiplier", 2.0);
        b.absolute = m.get<double>("absolute", 0.0);
        if (b.stderr_multiplier < 0.0 || b.absolute < 0.0) config_error(m.field("absolute"), "must be >= 0");
        m.finish();
        e.monotone = b;
    }
    if (t.has("rate")) e.rate = t.get<double>("rate");
    if (t.has("rate_band")) {
        const auto band = t.get<std::vector<double>>("rate_band");
        if (band.size() != 2 || band[0] > band[1]) config_error(t.field("rate_band"), "expected [low, high]");
        e.rate_band = std::make_pair(band[0], band[1]);
    }
    e.window_start = t.get<double>("window_start", 0.0);
    if (t.has("window_end")) e.window_end = t.get<double>("window_end");
    if (t.has("bound")) {
        Table b = t.sub("bound");
        e.bound = std::make_pair(b.get<double>("factor"), b.get<double>("rate"));
        b.finish();
    }
    if (t.has("constant")) e.constant = t.get<double>("constant");
    t.finish();
    return e;
}

} // namespace

CostSpec parse_cost(const std::string& text)
{
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    double value = 0.0;
    bool has_value = false;
    if (colon != std::string::npos) {
        try {
            value = std::stod(text.substr(colon + 1));
            has_value = true;
        } catch (const std::exception&) {
            config_error("cost", "bad parameter in '" + text + "'");
        }
    }
    if (kind == "power") return cost::Power{has_value ? value : 2.0};
    if (kind == "kinetic") return cost::KineticSum{has_value ? value : 1.0};
    if (kind == "regularized") return cost::RegularizedAbs{has_value ? value : 0.1};
    if (kind == "yamada") return cost::RegularizedAbs{has_value ? value : 0.1, cost::RegularizedAbs::Kind::Yamada};
    config_error("cost", "unknown cost '" + text + "'");
}

ScenarioConfig parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        fail(ErrorKind::ConfigError, std::string("<root>: ") + e.what());
    }
    Table t(root, "");
    ScenarioConfig cfg;
    cfg.id = t.get<std::string>("id");
    cfg.kind = t.get<std::string>("kind");
    cfg.seeds = t.get<std::vector<std::uint64_t>>("seeds");
    if (cfg.seeds.empty()) config_error("seeds", "must not be empty");
    {
        std::set<std::uint64_t> unique(cfg.seeds.begin(), cfg.seeds.end());
        if (unique.size() != cfg.seeds.size()) config_error("seeds", "must not contain duplicates");
    }
    cfg.horizon = t.get<double>("horizon", 1.0);
    positive(cfg.horizon, "horizon");
    cfg.checkpoints = t.get<std::size_t>("checkpoints", 11);
    if (cfg.checkpoints < 2) config_error("checkpoints", "need at least two");
    cfg.particles = t.get<std::size_t>("particles", 10000);
    cfg.dt = t.get<double>("dt", 1e-3);
    positive(cfg.dt, "dt");
    cfg.lp_subsample = t.get<std::size_t>("lp_subsample", 300);
    if (cfg.lp_subsample > 1000) config_error("lp_subsample", "at most 1000 pairs");
    if (t.has("cost")) cfg.cost = parse_cost_table(t.sub("cost"), cfg.cost_name);
    if (t.has("pairing")) {
        try {
            cfg.pairing = parse_pairing(t.get<std::string>("pairing"));
        } catch (const Error& e) {
            config_error("pairing", e.what());
        }
    }
    if (t.has("initial")) {
        Table init = t.sub("initial");
        cfg.first = parse_family(init.sub("first"));
        if (init.has("second")) cfg.second = parse_family(init.sub("second"));
        init.finish();
        if (cfg.second && family_dimension(*cfg.first) != family_dimension(*cfg.second)) {
            config_error("initial.second", "dimension differs from initial.first");
        }
    }
    cfg.output_dir = t.get<std::string>("output", std::string("results"));

    const std::size_t dim = family_dim(cfg.first);
    auto need_pair = [&](std::size_t want_dim) {
        if (!cfg.first || !cfg.second) config_error("initial", "needs both first and second");
        if (want_dim != 0 && dim != want_dim) {
            config_error("initial.first", "needs dimension " + std::to_string(want_dim));
        }
    };
    Table m = t.sub("model");
    if (cfg.kind == "diffusion") {
        need_pair(0);
        cfg.model = parse_diffusion(m, dim);
    } else if (cfg.kind == "nltr") {
        if (!cfg.first || dim != 1) config_error("initial.first", "needs a one-dimensional family");
        cfg.model = parse_nltr(m);
    } else if (cfg.kind == "scattering") {
        need_pair(1);
        cfg.model = parse_scattering(m);
    } else if (cfg.kind == "kinetic") {
        need_pair(2);
        auto km = parse_kinetic(m);
        cfg.cost = cost::KineticSum{km.scenario.a};
        cfg.cost_name = "kinetic:" + std::to_string(km.scenario.a);
        cfg.model = km;
    } else if (cfg.kind == "neuron") {
        need_pair(1);
        cfg.model = parse_neuron(m);
    } else if (cfg.kind == "kac") {
        need_pair(3);
        cfg.cost = cost::Power{2.0};
        cfg.cost_name = "power:2";
        cfg.model = parse_kac(m);
    } else if (cfg.kind == "pme") {
        need_pair(1);
        cfg.model = parse_pme(m);
    } else if (cfg.kind == "discrete_duality") {
        need_pair(1);
        if (!std::holds_alternative<family::Dirac>(*cfg.first) || !std::holds_alternative<family::Dirac>(*cfg.second)) {
            config_error("initial", "discrete duality starts from two atoms");
        }
        cfg.model = parse_duality(m);
    } else if (cfg.kind == "grid_coupling") {
        need_pair(1);
        cfg.model = parse_grid(m);
    } else {
        config_error("kind", "unknown scenario kind '" + cfg.kind + "'");
    }
    if (t.has("expect")) cfg.expect = parse_expect(t.sub("expect"));
    t.finish();
    return cfg;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::IoError, "cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace mkc
