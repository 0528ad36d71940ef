#include "fairsyn/rng.hpp"

#include <cmath>
#include <numbers>

namespace fairsyn {

namespace {

std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RandomStream::RandomStream(std::uint64_t master_seed, std::string_view label) {
    std::uint64_t key = fnv1a64(label);
    for (int i = 0; i < 8; ++i) {
        key ^= static_cast<std::uint64_t>((master_seed >> (8 * i)) & 0xff);
        key *= 0x100000001b3ULL;
    }
    // One warm-up mix so nearby keys decorrelate.
    state_ = key;
    (void)splitmix64_next(state_);
}

std::uint64_t RandomStream::next_u64() {
    return splitmix64_next(state_);
}

double RandomStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_gaussian(double sigma) {
    if (has_spare_) {
        has_spare_ = false;
        return spare_ * sigma;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta) * sigma;
}

std::uint64_t RandomStream::next_below(std::uint64_t n) {
    // Rejection sampling over the top multiple of n keeps the draw unbiased.
    std::uint64_t limit = n * (~0ULL / n);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

} // namespace fairsyn
