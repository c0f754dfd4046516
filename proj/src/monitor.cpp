#include "mkc/monitor.hpp"

#include <algorithm>
#include <numeric>

#include "mkc/ot.hpp"
#include "mkc/random.hpp"

namespace mkc {

CheckpointMonitor::CheckpointMonitor(CostSpec cost, std::size_t pairs, MonitorOptions options)
    : cost_(std::move(cost)), options_(options)
{
    const std::size_t k = std::min(pairs, options_.lp_subsample);
    if (k == 0) {
        return;
    }
    std::vector<std::size_t> idx(pairs);
    std::iota(idx.begin(), idx.end(), 0);
    if (k < pairs) {
        RandomStream rng(options_.seed, StreamPurpose::Subsample, 0);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + rng.below(pairs - i);
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
    }
    subsample_ = std::move(idx);
}

double marginal_distance(const CoupledEnsemble& e, const std::vector<std::size_t>& indices, const CostSpec& c)
{
    const std::size_t d = e.dim();
    std::vector<double> a;
    std::vector<double> b;
    a.reserve(indices.size() * d);
    b.reserve(indices.size() * d);
    for (std::size_t i : indices) {
        for (std::size_t k = 0; k < d; ++k) {
            a.push_back(e.x(i)[k]);
            b.push_back(e.y(i, k));
        }
    }
    const EmpiricalMeasure u1 = EmpiricalMeasure::equal_weights(d, std::move(a));
    const EmpiricalMeasure u2 = EmpiricalMeasure::equal_weights(d, std::move(b));
    // The sorted coupling is optimal only for convex power costs.
    if (const auto* pw = std::get_if<cost::Power>(&c); d == 1 && pw != nullptr && pw->p >= 1.0) {
        return wasserstein_1d(u1, u2, c);
    }
    return wasserstein_lp(u1, u2, c).cost_value;
}

void CheckpointMonitor::record(DistanceSeries& series, const CoupledEnsemble& e)
{
    const std::vector<double> costs = pair_costs(e, cost_);
    const double mean = pairwise_sum(costs) / static_cast<double>(costs.size());
    std::vector<double> sample = bootstrap_sample(costs);
    const BootstrapSummary b = bootstrap_mean(sample, options_.seed, count_++, options_.resamples);
    const double lp = subsample_.empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : marginal_distance(e, subsample_, cost_);
    series.push(e.time, mean, lp, b.low, b.high, b.stderr_);
    series.samples.push_back(std::move(sample));
}

} // namespace mkc
