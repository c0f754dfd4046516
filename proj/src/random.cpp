#include "mkc/random.hpp"

#include <cmath>
#include <numbers>

namespace mkc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

} // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t index) noexcept
{
    return (static_cast<std::uint64_t>(purpose) << 56) ^ (index & 0x00FFFFFFFFFFFFFFull);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream)
{
}

void RandomStream::refill() noexcept
{
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32),
                                  static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    buffer_ = Philox4x32::block(ctr, key_);
    ++index_;
    used_ = 0;
}

std::uint64_t RandomStream::next_u64() noexcept
{
    if (used_ > 2) {
        refill();
    }
    const std::uint64_t value = (static_cast<std::uint64_t>(buffer_[used_]) << 32) | buffer_[used_ + 1];
    used_ += 2;
    return value;
}

double RandomStream::uniform() noexcept
{
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RandomStream::below(std::uint64_t n) noexcept
{
    // Lemire's multiply-shift with rejection of the biased sliver.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = next_u64();
        const __uint128_t m = static_cast<__uint128_t>(x) * n;
        if (static_cast<std::uint64_t>(m) >= threshold) {
            return static_cast<std::uint64_t>(m >> 64);
        }
    }
}

double RandomStream::normal() noexcept
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

double RandomStream::exponential() noexcept
{
    return -std::log(uniform());
}

double RandomStream::gamma(double shape) noexcept
{
    if (shape < 1.0) {
        return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

double RandomStream::beta(double a, double b) noexcept
{
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
}

double RandomStream::symmetric_stable(double alpha) noexcept
{
    const double u = std::numbers::pi * (uniform() - 0.5);
    if (alpha == 1.0) {
        return std::tan(u);
    }
    const double w = exponential();
    return std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha)
        * std::pow(std::cos((1.0 - alpha) * u) / w, (1.0 - alpha) / alpha);
}

} // namespace mkc
