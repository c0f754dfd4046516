#include "mkc/pairing.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mkc/error.hpp"
#include "mkc/ot.hpp"

namespace mkc {

Pairing parse_pairing(std::string_view name)
{
    if (name == "common") {
        return Pairing::Common;
    }
    if (name == "independent") {
        return Pairing::Independent;
    }
    if (name == "sorted") {
        return Pairing::Sorted;
    }
    if (name == "optimal") {
        return Pairing::Optimal;
    }
    fail(ErrorKind::InvalidParameter, "unknown pairing '" + std::string(name) + "'");
}

std::string_view to_string(Pairing p)
{
    switch (p) {
    case Pairing::Common: return "common";
    case Pairing::Independent: return "independent";
    case Pairing::Sorted: return "sorted";
    case Pairing::Optimal: return "optimal";
    }
    return "?";
}

CoupledEnsemble pair_clouds(const EmpiricalMeasure& first, const EmpiricalMeasure& second, Pairing pairing,
                            const CostSpec& c)
{
    require(first.dim() == second.dim(), ErrorKind::DimensionMismatch, "clouds live in different dimensions");
    require(first.size() == second.size(), ErrorKind::DimensionMismatch, "clouds must have the same size");
    const std::size_t d = first.dim();
    const std::size_t n = first.size();
    std::vector<double> a = first.points();
    std::vector<double> b = second.points();
    if (pairing == Pairing::Sorted) {
        require(d == 1, ErrorKind::DimensionMismatch, "sorted pairing needs 1D clouds");
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
    } else if (pairing == Pairing::Optimal) {
        const std::vector<std::size_t> match = optimal_assignment(first, second, c);
        std::vector<double> reordered(b.size());
        for (std::size_t i = 0; i < n; ++i) {
            std::copy_n(b.begin() + static_cast<std::ptrdiff_t>(match[i] * d), d,
                        reordered.begin() + static_cast<std::ptrdiff_t>(i * d));
        }
        b = std::move(reordered);
    }
    return CoupledEnsemble(d, std::move(a), b);
}

CoupledEnsemble pair_up(const DensityFamily& first, const DensityFamily& second, std::size_t n, std::uint64_t seed,
                        Pairing pairing, const CostSpec& c, std::uint64_t index)
{
    require(family_dimension(first) == family_dimension(second), ErrorKind::DimensionMismatch,
            "initial families differ in dimension");
    const std::uint64_t s1 = stream_id(StreamPurpose::InitialFirst, index);
    const std::uint64_t s2 = pairing == Pairing::Common ? s1 : stream_id(StreamPurpose::InitialSecond, index);
    return pair_clouds(sample(first, n, seed, s1), sample(second, n, seed, s2), pairing, c);
}

} // namespace mkc
