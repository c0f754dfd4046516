#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mkc/measures.hpp"
#include "mkc/random.hpp"

namespace mkc {

// N particle pairs (X_i, Y_i) in R^d. Pairs are kept as the first member X
// and the gap D = Y - X, so dynamics that move both members by the same
// amount leave D bit-for-bit unchanged.
class CoupledEnsemble {
public:
    CoupledEnsemble() = default;
    CoupledEnsemble(std::size_t dim, std::vector<double> first, const std::vector<double>& second);

    static CoupledEnsemble from_gaps(std::size_t dim, std::vector<double> first, std::vector<double> gaps);

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : x_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const double> x(std::size_t i) const noexcept { return {x_.data() + i * dim_, dim_}; }
    std::span<double> x(std::size_t i) noexcept { return {x_.data() + i * dim_, dim_}; }
    std::span<const double> gap(std::size_t i) const noexcept { return {gap_.data() + i * dim_, dim_}; }
    std::span<double> gap(std::size_t i) noexcept { return {gap_.data() + i * dim_, dim_}; }
    double y(std::size_t i, std::size_t k) const noexcept { return x_[i * dim_ + k] + gap_[i * dim_ + k]; }

    std::vector<double>& xs() noexcept { return x_; }
    const std::vector<double>& xs() const noexcept { return x_; }
    std::vector<double>& gaps() noexcept { return gap_; }
    const std::vector<double>& gaps() const noexcept { return gap_; }
    std::vector<double> ys() const;

    EmpiricalMeasure first_marginal() const;
    EmpiricalMeasure second_marginal() const;

    double time = 0.0;

    // One counter-based stream per pair, keyed by (seed, pair index).
    void seed_streams(std::uint64_t seed, StreamPurpose purpose = StreamPurpose::Dynamics);
    RandomStream& stream(std::size_t i) noexcept { return streams_[i]; }
    bool has_streams() const noexcept { return streams_.size() == size() && size() > 0; }

private:
    std::size_t dim_ = 0;
    std::vector<double> x_;
    std::vector<double> gap_;
    std::vector<RandomStream> streams_;
};

// Fixed-order pairwise sum; the result does not depend on how work was split.
double pairwise_sum(std::span<const double> v) noexcept;

} // namespace mkc
