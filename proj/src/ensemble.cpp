#include "mkc/ensemble.hpp"

#include "mkc/error.hpp"

namespace mkc {

CoupledEnsemble::CoupledEnsemble(std::size_t dim, std::vector<double> first, const std::vector<double>& second)
    : dim_(dim), x_(std::move(first))
{
    require(dim_ >= 1, ErrorKind::DimensionMismatch, "ensemble dimension must be at least 1");
    require(x_.size() == second.size() && x_.size() % dim_ == 0, ErrorKind::DimensionMismatch,
            "pair members have mismatched sizes");
    gap_.resize(x_.size());
    for (std::size_t k = 0; k < x_.size(); ++k) {
        gap_[k] = second[k] - x_[k];
    }
}

CoupledEnsemble CoupledEnsemble::from_gaps(std::size_t dim, std::vector<double> first, std::vector<double> gaps)
{
    require(first.size() == gaps.size(), ErrorKind::DimensionMismatch, "gap array does not match positions");
    CoupledEnsemble e;
    e.dim_ = dim;
    e.x_ = std::move(first);
    e.gap_ = std::move(gaps);
    return e;
}

std::vector<double> CoupledEnsemble::ys() const
{
    std::vector<double> out(x_.size());
    for (std::size_t k = 0; k < x_.size(); ++k) {
        out[k] = x_[k] + gap_[k];
    }
    return out;
}

EmpiricalMeasure CoupledEnsemble::first_marginal() const
{
    return EmpiricalMeasure::equal_weights(dim_, x_);
}

EmpiricalMeasure CoupledEnsemble::second_marginal() const
{
    return EmpiricalMeasure::equal_weights(dim_, ys());
}

void CoupledEnsemble::seed_streams(std::uint64_t seed, StreamPurpose purpose)
{
    streams_.clear();
    streams_.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
        streams_.emplace_back(seed, purpose, i);
    }
}

double pairwise_sum(std::span<const double> v) noexcept
{
    if (v.size() <= 32) {
        double s = 0.0;
        for (double a : v) {
            s += a;
        }
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

} // namespace mkc
