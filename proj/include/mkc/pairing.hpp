#pragma once

#include <cstdint>
#include <string_view>

#include "mkc/costs.hpp"
#include "mkc/ensemble.hpp"
#include "mkc/measures.hpp"

namespace mkc {

// How the initial clouds of the two solutions are matched into pairs.
//   Common       both clouds from the same draws (e.g. translated copies)
//   Independent  separate streams, matched by index
//   Sorted       both sorted, matched monotonically (1D only)
//   Optimal      optimal assignment for the run's cost
enum class Pairing { Common, Independent, Sorted, Optimal };

Pairing parse_pairing(std::string_view name);
std::string_view to_string(Pairing p);

CoupledEnsemble pair_clouds(const EmpiricalMeasure& first, const EmpiricalMeasure& second, Pairing pairing,
                            const CostSpec& c);

CoupledEnsemble pair_up(const DensityFamily& first, const DensityFamily& second, std::size_t n, std::uint64_t seed,
                        Pairing pairing, const CostSpec& c, std::uint64_t index = 0);

} // namespace mkc
