#pragma once

#include <cstdint>
#include <vector>

#include "mkc/costs.hpp"
#include "mkc/ensemble.hpp"
#include "mkc/series.hpp"

namespace mkc {

struct MonitorOptions {
    std::uint64_t seed = 0;
    std::size_t lp_subsample = 300;  // 0 disables the OT column
    int resamples = 200;
};

// Appends one checkpoint per call: mean coupled cost over all pairs, its
// bootstrap interval, and the exact OT distance between fixed random
// subsamples of the two marginal clouds.
class CheckpointMonitor {
public:
    CheckpointMonitor(CostSpec cost, std::size_t pairs, MonitorOptions options);

    void record(DistanceSeries& series, const CoupledEnsemble& e);

private:
    CostSpec cost_;
    MonitorOptions options_;
    std::vector<std::size_t> subsample_;
    std::uint64_t count_ = 0;
};

// OT distance between the marginals restricted to `indices`
// (1D power costs use the quantile formula, everything else the LP).
double marginal_distance(const CoupledEnsemble& e, const std::vector<std::size_t>& indices, const CostSpec& c);

} // namespace mkc
