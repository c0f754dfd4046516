#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace mkc {

// Time-indexed record of the coupled cost (and, when computed, the exact OT
// distance of the two marginal clouds) with 95% bootstrap intervals.
struct DistanceSeries {
    std::string scenario_id;
    std::string seed;  // decimal seed, or "pooled"
    std::string cost;

    std::vector<double> times;
    std::vector<double> coupled_cost;
    std::vector<double> lp_distance;  // NaN where not computed
    std::vector<double> ci_low;
    std::vector<double> ci_high;
    std::vector<double> stderr_;
    // Bootstrap sample behind each checkpoint, kept so seeds can be pooled.
    std::vector<std::vector<double>> samples;

    std::size_t size() const noexcept { return times.size(); }
    void push(double t, double value, double lp = std::numeric_limits<double>::quiet_NaN(), double lo = 0.0,
              double hi = 0.0, double se = 0.0);
    // Throws InvalidParameter when times are not strictly increasing or a CI misses its value.
    void validate() const;
};

// Values resampled by the bootstrap: raw per-pair values for small
// ensembles, otherwise the means of at most `max_blocks` contiguous blocks.
std::vector<double> bootstrap_sample(std::span<const double> values, std::size_t max_blocks = 1000);

struct BootstrapSummary {
    double mean = 0.0;
    double stderr_ = 0.0;
    double low = 0.0;
    double high = 0.0;
};

// Percentile bootstrap of the mean. Resampling indices come from the
// (seed, index) bootstrap stream, so identical inputs give identical output.
BootstrapSummary bootstrap_mean(std::span<const double> sample, std::uint64_t seed, std::uint64_t index,
                                int resamples = 200);

struct DecayFit {
    double rate = 0.0;
    double stderr_ = 0.0;
    double r_squared = 1.0;
};

// Least-squares slope of log(value) against t over the checkpoints in [t0, t1].
DecayFit fit_decay_rate(const DistanceSeries& s, double t0, double t1, bool use_lp = false);
DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> v);

struct MonotoneBudget {
    double stderr_multiplier = 2.0;
    double absolute = 0.0;
};

struct MonotoneVerdict {
    bool monotone = true;
    double worst_violation = 0.0;  // largest increase beyond the allowance, 0 if none
    double largest_increase = 0.0;
    std::size_t index = 0;         // checkpoint where the worst excess starts
};

// Every consecutive increase must stay within
// absolute + multiplier * max(stderr_k, stderr_{k+1}).
MonotoneVerdict monotonicity_verdict(const DistanceSeries& s, const MonotoneBudget& budget, bool use_lp = false);
MonotoneVerdict monotonicity_verdict(std::span<const double> values, std::span<const double> stderrs,
                                     const MonotoneBudget& budget);

} // namespace mkc
