#include "pinning/rng.hpp"

#include <cmath>

namespace pinning {

namespace {

constexpr double poisson_chunk = 500.0;

std::uint64_t poisson_small(Rng& rng, double mean) {
    if (mean <= 0.0) {
        return 0;
    }
    const double u = rng.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf) {
        ++k;
        p *= mean / static_cast<double>(k);
        if (p == 0.0) {
            break;  // cdf saturated below u through rounding
        }
        cdf += p;
    }
    return k;
}

}  // namespace

Rng Rng::stream(std::uint64_t seed, Stream tag) {
    Rng mixer(seed ^ (static_cast<std::uint64_t>(tag) * golden_gamma));
    return Rng(mixer.next());
}

std::uint64_t Rng::next() {
    std::uint64_t z = (state_ += golden_gamma);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > poisson_chunk) {
        total += poisson_small(*this, poisson_chunk);
        mean -= poisson_chunk;
    }
    return total + poisson_small(*this, mean);
}

}  // namespace pinning
