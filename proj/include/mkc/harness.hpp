#pragma once

#include <string>
#include <vector>

#include "mkc/config.hpp"
#include "mkc/io.hpp"
#include "mkc/series.hpp"

namespace mkc {

struct ScenarioResult {
    std::vector<DistanceSeries> per_seed;
    DistanceSeries pooled;
    Verdict verdict;
};

// Runs every seed of the scenario in order and pools them. Precondition
// failures found before the first run are reported as ConfigError.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Checkpoint-wise pooling: concatenated bootstrap samples when every series
// carries them, plain averages for deterministic series.
DistanceSeries pool_series(const std::vector<DistanceSeries>& series, std::uint64_t seed);

Verdict evaluate(const ScenarioConfig& cfg, const std::vector<DistanceSeries>& per_seed, const DistanceSeries& pooled);

// <dir>/<id>.csv (per-seed rows, then the pooled rows) and <dir>/<id>.json.
void write_outputs(const ScenarioResult& result, const std::string& dir);

} // namespace mkc
