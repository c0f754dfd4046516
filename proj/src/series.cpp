#include "mkc/series.hpp"

#include <algorithm>
#include <cmath>

#include "mkc/ensemble.hpp"
#include "mkc/error.hpp"
#include "mkc/random.hpp"

namespace mkc {

void DistanceSeries::push(double t, double value, double lp, double lo, double hi, double se)
{
    times.push_back(t);
    coupled_cost.push_back(value);
    lp_distance.push_back(lp);
    ci_low.push_back(std::min(lo, value));
    ci_high.push_back(std::max(hi, value));
    stderr_.push_back(se);
}

void DistanceSeries::validate() const
{
    for (std::size_t k = 1; k < times.size(); ++k) {
        require(times[k] > times[k - 1], ErrorKind::InvalidParameter, "series times must increase strictly");
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
        require(ci_low[k] <= coupled_cost[k] && coupled_cost[k] <= ci_high[k], ErrorKind::InvalidParameter,
                "confidence interval does not contain the estimate");
    }
}

std::vector<double> bootstrap_sample(std::span<const double> values, std::size_t max_blocks)
{
    const std::size_t n = values.size();
    if (n <= max_blocks) {
        return {values.begin(), values.end()};
    }
    std::vector<double> out(max_blocks);
    for (std::size_t b = 0; b < max_blocks; ++b) {
        const std::size_t lo = b * n / max_blocks;
        const std::size_t hi = (b + 1) * n / max_blocks;
        out[b] = pairwise_sum(values.subspan(lo, hi - lo)) / static_cast<double>(hi - lo);
    }
    return out;
}

BootstrapSummary bootstrap_mean(std::span<const double> sample, std::uint64_t seed, std::uint64_t index,
                                int resamples)
{
    require(!sample.empty(), ErrorKind::InvalidParameter, "bootstrap of an empty sample");
    require(resamples >= 2, ErrorKind::InvalidParameter, "bootstrap needs at least two resamples");
    BootstrapSummary s;
    s.mean = pairwise_sum(sample) / static_cast<double>(sample.size());
    RandomStream rng(seed, StreamPurpose::Bootstrap, index);
    std::vector<double> means(static_cast<std::size_t>(resamples));
    const std::size_t n = sample.size();
    for (auto& m : means) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            acc += sample[rng.below(n)];
        }
        m = acc / static_cast<double>(n);
    }
    double mu = 0.0;
    for (double m : means) {
        mu += m;
    }
    mu /= resamples;
    double var = 0.0;
    for (double m : means) {
        var += (m - mu) * (m - mu);
    }
    s.stderr_ = std::sqrt(var / (resamples - 1));
    std::sort(means.begin(), means.end());
    auto pick = [&](double q) {
        const double pos = q * (resamples - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, means.size() - 1);
        return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
    };
    s.low = std::min(pick(0.025), s.mean);
    s.high = std::max(pick(0.975), s.mean);
    return s;
}

DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> v)
{
    require(t.size() == v.size(), ErrorKind::DimensionMismatch, "fit needs matching times and values");
    require(t.size() >= 2, ErrorKind::InvalidParameter, "fit needs at least two points");
    const auto n = static_cast<double>(t.size());
    double st = 0.0, sl = 0.0;
    std::vector<double> logs(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        require(v[k] > 0.0 && std::isfinite(v[k]), ErrorKind::NonPositiveValues,
                "decay fit needs positive values on the window");
        logs[k] = std::log(v[k]);
        st += t[k];
        sl += logs[k];
    }
    const double tm = st / n;
    const double lm = sl / n;
    double stt = 0.0, stl = 0.0, sll = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        stt += (t[k] - tm) * (t[k] - tm);
        stl += (t[k] - tm) * (logs[k] - lm);
        sll += (logs[k] - lm) * (logs[k] - lm);
    }
    require(stt > 0.0, ErrorKind::InvalidParameter, "fit window has a single distinct time");
    DecayFit f;
    f.rate = stl / stt;
    double sse = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double r = logs[k] - lm - f.rate * (t[k] - tm);
        sse += r * r;
    }
    f.r_squared = sll > 0.0 ? 1.0 - sse / sll : 1.0;
    f.stderr_ = t.size() > 2 ? std::sqrt(sse / (n - 2.0) / stt) : 0.0;
    return f;
}

DecayFit fit_decay_rate(const DistanceSeries& s, double t0, double t1, bool use_lp)
{
    std::vector<double> t;
    std::vector<double> v;
    const auto& src = use_lp ? s.lp_distance : s.coupled_cost;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s.times[k] >= t0 - 1e-12 && s.times[k] <= t1 + 1e-12) {
            t.push_back(s.times[k]);
            v.push_back(src[k]);
        }
    }
    return fit_decay_rate(t, v);
}

MonotoneVerdict monotonicity_verdict(std::span<const double> values, std::span<const double> stderrs,
                                     const MonotoneBudget& budget)
{
    MonotoneVerdict out;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        const double increase = values[k + 1] - values[k];
        const double se = stderrs.empty() ? 0.0 : std::max(stderrs[k], stderrs[k + 1]);
        const double allowed = budget.absolute + budget.stderr_multiplier * se;
        out.largest_increase = std::max(out.largest_increase, increase);
        const double excess = increase - allowed;
        if (excess > out.worst_violation) {
            out.worst_violation = excess;
            out.index = k;
        }
    }
    out.monotone = out.worst_violation <= 0.0;
    return out;
}

MonotoneVerdict monotonicity_verdict(const DistanceSeries& s, const MonotoneBudget& budget, bool use_lp)
{
    if (use_lp) {
        return monotonicity_verdict(s.lp_distance, {}, budget);
    }
    return monotonicity_verdict(s.coupled_cost, s.stderr_, budget);
}

} // namespace mkc
