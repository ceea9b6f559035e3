#pragma once

#include <cstdint>
#include <string_view>

namespace pinning {

/// SplitMix64 (Steele, Lea & Flood 2014). Every random draw in the project goes
/// through this generator so results are identical across standard libraries.
///
/// Stream derivation: a consumer asks for `Rng::stream(seed, tag)`, which seeds
/// a fresh generator with splitmix64(seed XOR tag * golden_gamma). Tags are
/// fixed constants below; independent consumers never share a stream.
class Rng {
public:
    static constexpr std::string_view name = "splitmix64";
    static constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

    enum class Stream : std::uint64_t {
        obstacle_field = 1,
        experiment = 2,
    };

    explicit Rng(std::uint64_t state) : state_(state) {}

    static Rng stream(std::uint64_t seed, Stream tag);

    std::uint64_t next();

    /// Uniform on [0, 1) with 53 random mantissa bits.
    double uniform();

    /// Poisson-distributed count with the given mean (inversion, chunked so
    /// e^{-mean} never underflows).
    std::uint64_t poisson(double mean);

private:
    std::uint64_t state_;
};

}  // namespace pinning
