#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>

namespace lcu {

/// SplitMix64 output function; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives an independent seed from a base seed and up to two labels.
/// Used to give every instance/mask/realization of an experiment its own
/// stream so results do not depend on evaluation order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept
{
    return splitmix64(splitmix64(seed ^ splitmix64(a + 0x632BE59BD9B4E019ULL)) ^
                      splitmix64(b + 0x8CB92BA72F3D8DD7ULL));
}

/// Counter-based generator: draw number c of stream `key` is
/// splitmix64(key + c * golden). The full state is (key, counter), so a draw
/// sequence is a pure function of the seed on every platform.
class CounterRng
{
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(derive_seed(seed, stream, 0x5EED))
    {
    }

    std::uint64_t next_u64() noexcept
    {
        return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * counter_++);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; safe as a log argument.
    double uniform_positive() noexcept
    {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n) noexcept
    {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double gaussian() noexcept
    {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform_positive()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        return radius * std::cos(angle);
    }

    /// Circularly symmetric complex normal with E|z|^2 = 1.
    std::complex<double> complex_gaussian() noexcept
    {
        const double re = gaussian();
        const double im = gaussian();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::optional<double> spare_;
};

}  // namespace lcu
