#pragma once

#include <array>
#include <cstdint>

namespace mkc {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
// A block is a pure function of (counter, key), which is what lets every
// particle pair own an independent, reproducible stream.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter counter, Key key) noexcept;
};

// Purpose tags keep streams drawn for different roles disjoint even when
// they share a master seed and an index.
enum class StreamPurpose : std::uint8_t {
    InitialFirst = 1,
    InitialSecond = 2,
    Dynamics = 3,
    Bootstrap = 4,
    Subsample = 5,
    Pairing = 6,
    Validation = 7,
};

std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t index) noexcept;

class RandomStream {
public:
    RandomStream() = default;
    RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept;
    RandomStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) noexcept
        : RandomStream(seed, stream_id(purpose, index))
    {
    }

    std::uint64_t next_u64() noexcept;

    // Uniform on the open interval (0, 1).
    double uniform() noexcept;
    double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }
    // Index uniform on {0, ..., n-1}.
    std::uint64_t below(std::uint64_t n) noexcept;

    double normal() noexcept;
    double exponential() noexcept;
    double gamma(double shape) noexcept;
    double beta(double a, double b) noexcept;

    // Standard symmetric alpha-stable variate with characteristic function
    // exp(-|xi|^alpha), Chambers-Mallows-Stuck transform.
    double symmetric_stable(double alpha) noexcept;

    std::uint64_t draws() const noexcept { return index_; }

private:
    void refill() noexcept;

    Philox4x32::Key key_{};
    std::uint64_t stream_ = 0;
    std::uint64_t index_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    std::uint8_t used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace mkc
