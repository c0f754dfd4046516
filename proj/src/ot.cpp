#include "mkc/ot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "mkc/error.hpp"

namespace mkc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kMaxDenominator = 1'000'000;

// Best rational approximation n/d of x with d <= kMaxDenominator.
std::pair<std::int64_t, std::int64_t> best_rational(double x)
{
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int iter = 0; iter < 64; ++iter) {
        const double fl = std::floor(r);
        const auto a = static_cast<std::int64_t>(fl);
        const std::int64_t h2 = a * h1 + h0;
        const std::int64_t k2 = a * k1 + k0;
        if (k2 > kMaxDenominator) {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        const double frac = r - fl;
        if (frac < 1e-15 || std::fabs(x - static_cast<double>(h1) / static_cast<double>(k1)) < 1e-15) {
            break;
        }
        r = 1.0 / frac;
    }
    return {h1, k1};
}

// Common denominator L <= 1e6 such that every weight is an integer multiple
// of 1/L (within 1e-13) and the numerators add up to L. Returns 0 if none.
std::int64_t common_denominator(const std::vector<double>& w, double total)
{
    std::int64_t lcm = 1;
    for (double v : w) {
        const double x = v / total;
        const auto [n, d] = best_rational(x);
        if (d == 0 || std::fabs(x - static_cast<double>(n) / static_cast<double>(d)) > 1e-13) {
            return 0;
        }
        lcm = std::lcm(lcm, d);
        if (lcm > kMaxDenominator) {
            return 0;
        }
    }
    return lcm;
}

bool integer_supplies(const std::vector<double>& w, double total, std::int64_t denom, std::vector<double>& out)
{
    out.resize(w.size());
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double scaled = w[i] / total * static_cast<double>(denom);
        const double rounded = std::round(scaled);
        if (std::fabs(scaled - rounded) > 1e-6) {
            return false;
        }
        out[i] = rounded;
        sum += static_cast<std::int64_t>(rounded);
    }
    return sum == denom;
}

struct FlowResult {
    std::vector<double> flow;  // n x m row-major
    std::vector<double> row_potential;
    std::vector<double> col_potential;
};

// Successive shortest paths on the bipartite transportation network. Reduced
// cost of i -> j is c_ij + pr_i - pc_j; the reverse edge j -> i exists while
// flow_ij > 0. Dijkstra starts from every row with remaining supply and stops
// at the first column with remaining demand.
FlowResult min_cost_flow(const std::vector<double>& c, std::size_t n, std::size_t m, std::vector<double> supply,
                         std::vector<double> demand, double eps, double residue)
{
    FlowResult r;
    r.flow.assign(n * m, 0.0);
    r.row_potential.assign(n, 0.0);
    r.col_potential.assign(m, kInf);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            r.col_potential[j] = std::min(r.col_potential[j], c[i * m + j]);
        }
    }
    auto& pr = r.row_potential;
    auto& pc = r.col_potential;
    auto& flow = r.flow;

    std::vector<double> dist_row(n), dist_col(m);
    std::vector<char> done_row(n), done_col(m);
    std::vector<std::size_t> parent_col(m), parent_row(n);
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    for (;;) {
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            dist_row[i] = supply[i] > eps ? 0.0 : kInf;
            any = any || supply[i] > eps;
            done_row[i] = 0;
            parent_row[i] = kNone;
        }
        if (!any) {
            break;
        }
        std::fill(dist_col.begin(), dist_col.end(), kInf);
        std::fill(done_col.begin(), done_col.end(), 0);
        std::size_t target = kNone;
        for (;;) {
            double best = kInf;
            std::size_t node = kNone;
            bool is_row = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (!done_row[i] && dist_row[i] < best) {
                    best = dist_row[i];
                    node = i;
                    is_row = true;
                }
            }
            for (std::size_t j = 0; j < m; ++j) {
                if (!done_col[j] && dist_col[j] < best) {
                    best = dist_col[j];
                    node = j;
                    is_row = false;
                }
            }
            if (node == kNone) {
                break;
            }
            if (is_row) {
                done_row[node] = 1;
                const double base = best + pr[node];
                const double* row = c.data() + node * m;
                for (std::size_t j = 0; j < m; ++j) {
                    if (done_col[j]) {
                        continue;
                    }
                    const double nd = std::max(best, base + row[j] - pc[j]);
                    if (nd < dist_col[j]) {
                        dist_col[j] = nd;
                        parent_col[j] = node;
                    }
                }
            } else {
                done_col[node] = 1;
                if (demand[node] > eps) {
                    target = node;
                    break;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    if (done_row[i] || flow[i * m + node] <= 0.0) {
                        continue;
                    }
                    const double nd = std::max(best, best - c[i * m + node] - pr[i] + pc[node]);
                    if (nd < dist_row[i]) {
                        dist_row[i] = nd;
                        parent_row[i] = node;
                    }
                }
            }
        }
        if (target == kNone) {
            // Only rounding residue can be left once every column is saturated.
            double left = 0.0;
            for (double x : supply) {
                left += x;
            }
            require(left <= residue, ErrorKind::ConstraintViolated, "transport problem is infeasible");
            break;
        }
        const double dt = dist_col[target];
        for (std::size_t i = 0; i < n; ++i) {
            pr[i] += done_row[i] ? std::min(dist_row[i], dt) : dt;
        }
        for (std::size_t j = 0; j < m; ++j) {
            pc[j] += done_col[j] ? std::min(dist_col[j], dt) : dt;
        }

        // Walk back to the source row, collecting the bottleneck.
        double delta = demand[target];
        std::size_t j = target;
        std::size_t source = kNone;
        for (;;) {
            const std::size_t i = parent_col[j];
            if (parent_row[i] == kNone) {
                source = i;
                break;
            }
            const std::size_t jp = parent_row[i];
            delta = std::min(delta, flow[i * m + jp]);
            j = jp;
        }
        delta = std::min(delta, supply[source]);

        j = target;
        for (;;) {
            const std::size_t i = parent_col[j];
            flow[i * m + j] += delta;
            if (parent_row[i] == kNone) {
                break;
            }
            const std::size_t jp = parent_row[i];
            double& back = flow[i * m + jp];
            back -= delta;
            if (back <= eps) {
                back = 0.0;
            }
            j = jp;
        }
        supply[source] -= delta;
        if (supply[source] <= eps) {
            supply[source] = 0.0;
        }
        demand[target] -= delta;
        if (demand[target] <= eps) {
            demand[target] = 0.0;
        }
    }
    return r;
}

} // namespace

double TransportPlan::dual_value() const
{
    double s = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        s += dual_row[i] * rows.weight(i);
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
        s += dual_col[j] * cols.weight(j);
    }
    return s;
}

double TransportPlan::max_dual_violation() const
{
    double worst = -kInf;
    for (Eigen::Index i = 0; i < plan.rows(); ++i) {
        for (Eigen::Index j = 0; j < plan.cols(); ++j) {
            worst = std::max(worst, dual_row[static_cast<std::size_t>(i)] + dual_col[static_cast<std::size_t>(j)]
                                        - cost(i, j));
        }
    }
    return worst;
}

double TransportPlan::max_slackness_violation(double mass_floor) const
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < plan.rows(); ++i) {
        for (Eigen::Index j = 0; j < plan.cols(); ++j) {
            if (plan(i, j) > mass_floor) {
                worst = std::max(worst, std::fabs(dual_row[static_cast<std::size_t>(i)]
                                                  + dual_col[static_cast<std::size_t>(j)] - cost(i, j)));
            }
        }
    }
    return worst;
}

double TransportPlan::max_row_marginal_error() const
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < plan.rows(); ++i) {
        worst = std::max(worst, std::fabs(plan.row(i).sum() - rows.weight(static_cast<std::size_t>(i))));
    }
    return worst;
}

double TransportPlan::max_col_marginal_error() const
{
    double worst = 0.0;
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
        worst = std::max(worst, std::fabs(plan.col(j).sum() - cols.weight(static_cast<std::size_t>(j))));
    }
    return worst;
}

double wasserstein_1d(const SortedMeasure1D& a, const SortedMeasure1D& b, double p)
{
    require(p >= 1.0, ErrorKind::InvalidParameter, "wasserstein_1d needs p >= 1");
    const auto& fa = a.cumulative();
    const auto& fb = b.cumulative();
    const double ta = fa.back();
    const double tb = fb.back();
    require(ta > 0.0 && tb > 0.0, ErrorKind::ZeroMass, "wasserstein_1d needs positive mass");
    const auto& xa = a.points();
    const auto& xb = b.points();
    std::size_t i = 0;
    std::size_t j = 0;
    double q = 0.0;
    double total = 0.0;
    while (i < xa.size() && j < xb.size()) {
        const double qa = i + 1 == xa.size() ? 1.0 : fa[i] / ta;
        const double qb = j + 1 == xb.size() ? 1.0 : fb[j] / tb;
        const double next = std::min(qa, qb);
        if (next > q) {
            const double r = std::fabs(xa[i] - xb[j]);
            const double c = p == 1.0 ? r : (p == 2.0 ? 0.5 * r * r : std::pow(r, p) / p);
            total += (next - q) * c;
            q = next;
        }
        if (qa <= next) {
            ++i;
        }
        if (qb <= next) {
            ++j;
        }
    }
    return total;
}

double wasserstein_1d(const EmpiricalMeasure& u1, const EmpiricalMeasure& u2, const CostSpec& c)
{
    require(u1.dim() == 1 && u2.dim() == 1, ErrorKind::DimensionMismatch, "wasserstein_1d needs 1D measures");
    const auto* power = std::get_if<cost::Power>(&c);
    require(power != nullptr, ErrorKind::InvalidParameter, "wasserstein_1d needs a power cost");
    return wasserstein_1d(SortedMeasure1D(u1), SortedMeasure1D(u2), power->p);
}

TransportPlan wasserstein_lp(const EmpiricalMeasure& u1, const EmpiricalMeasure& u2, const CostSpec& c)
{
    require(u1.dim() == u2.dim(), ErrorKind::DimensionMismatch, "measures live in different dimensions");
    const std::size_t n = u1.size();
    const std::size_t m = u2.size();
    require(n >= 1 && m >= 1, ErrorKind::ZeroMass, "empty measure");
    require(static_cast<double>(n) * static_cast<double>(m) <= 1e6, ErrorKind::SizeExceeded,
            "transport problem exceeds 1e6 cells");
    const double ta = u1.total_mass();
    const double tb = u2.total_mass();
    require(ta > 0.0 && tb > 0.0, ErrorKind::ZeroMass, "measures must carry positive mass");
    require(std::fabs(ta - tb) <= 1e-9 * std::max(ta, tb), ErrorKind::InvalidParameter,
            "measures have different total mass");

    std::vector<double> cost(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            cost[i * m + j] = eval_cost(c, u1.point(i), u2.point(j));
        }
    }

    TransportPlan out;
    out.rows = u1;
    out.cols = u2;
    std::vector<double> supply;
    std::vector<double> demand;
    double scale = 1.0;
    double eps = 0.0;
    const std::int64_t da = common_denominator(u1.weights(), ta);
    const std::int64_t db = da == 0 ? 0 : common_denominator(u2.weights(), tb);
    const std::int64_t denom = (da == 0 || db == 0) ? 0 : std::lcm(da, db);
    if (denom > 0 && denom <= kMaxDenominator && integer_supplies(u1.weights(), ta, denom, supply)
        && integer_supplies(u2.weights(), tb, denom, demand)) {
        out.rational = true;
        scale = ta / static_cast<double>(denom);
        eps = 0.5;
    } else {
        supply = u1.weights();
        demand = u2.weights();
        // Absorb the tiny mass mismatch into the largest column.
        const double diff = ta - tb;
        auto big = std::max_element(demand.begin(), demand.end());
        *big += diff;
        eps = 1e-15 * ta;
    }

    FlowResult flow = min_cost_flow(cost, n, m, std::move(supply), std::move(demand), eps,
                                    out.rational ? 0.0 : 1e-12 * ta);

    out.plan.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    out.cost.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double mass = flow.flow[i * m + j] * scale;
            out.plan(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = mass;
            out.cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cost[i * m + j];
            value += mass * cost[i * m + j];
        }
    }
    out.cost_value = value;
    out.dual_row.resize(n);
    out.dual_col.resize(m);
    for (std::size_t i = 0; i < n; ++i) {
        out.dual_row[i] = -flow.row_potential[i];
    }
    for (std::size_t j = 0; j < m; ++j) {
        out.dual_col[j] = flow.col_potential[j];
    }
    return out;
}

std::vector<std::size_t> optimal_assignment(const EmpiricalMeasure& u1, const EmpiricalMeasure& u2,
                                            const CostSpec& c)
{
    require(u1.size() == u2.size(), ErrorKind::DimensionMismatch, "assignment needs equal-size clouds");
    const std::size_t n = u1.size();
    const EmpiricalMeasure a = EmpiricalMeasure(u1.dim(), u1.points(), std::vector<double>(n, 1.0 / n));
    const EmpiricalMeasure b = EmpiricalMeasure(u2.dim(), u2.points(), std::vector<double>(n, 1.0 / n));
    const TransportPlan plan = wasserstein_lp(a, b, c);
    std::vector<std::size_t> match(n);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::Index best = 0;
        plan.plan.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
        match[i] = static_cast<std::size_t>(best);
    }
    return match;
}

std::vector<double> pair_costs(const CoupledEnsemble& e, const CostSpec& c)
{
    const std::size_t n = e.size();
    const std::size_t d = e.dim();
    std::vector<double> out(n);
    const bool invariant = std::holds_alternative<cost::Power>(c) || std::holds_alternative<cost::KineticSum>(c)
                           || std::holds_alternative<cost::RegularizedAbs>(c);
    std::vector<double> zero(d, 0.0);
    std::vector<double> y(d);
    for (std::size_t i = 0; i < n; ++i) {
        if (invariant) {
            out[i] = eval_cost(c, zero, e.gap(i));
        } else {
            for (std::size_t k = 0; k < d; ++k) {
                y[k] = e.y(i, k);
            }
            out[i] = eval_cost(c, e.x(i), y);
        }
    }
    return out;
}

double coupled_cost(const CoupledEnsemble& e, const CostSpec& c)
{
    require(e.size() > 0, ErrorKind::InvalidParameter, "empty ensemble");
    const std::vector<double> v = pair_costs(e, c);
    return pairwise_sum(v) / static_cast<double>(v.size());
}

bool dual_feasibility(const std::function<double(double)>& phi, const std::function<double(double)>& psi, double p,
                      std::span<const double> xs, std::span<const double> ys)
{
    for (double x : xs) {
        const double fx = phi(x);
        for (double y : ys) {
            if (fx + psi(y) > std::pow(std::fabs(x - y), p) + 1e-10) {
                return false;
            }
        }
    }
    return true;
}

bool dual_feasibility(std::span<const double> phi, std::span<const double> psi, double p, std::span<const double> xs,
                      std::span<const double> ys)
{
    require(phi.size() == xs.size() && psi.size() == ys.size(), ErrorKind::DimensionMismatch,
            "potentials do not match their supports");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ys.size(); ++j) {
            if (phi[i] + psi[j] > std::pow(std::fabs(xs[i] - ys[j]), p) + 1e-10) {
                return false;
            }
        }
    }
    return true;
}

} // namespace mkc
