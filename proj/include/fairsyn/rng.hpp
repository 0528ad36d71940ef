#pragma once

#include <cstdint>
#include <string_view>

namespace fairsyn {

// Counter-based random stream. A stream is addressed by (master seed, label);
// distinct labels give statistically independent streams, so measurements and
// replicates can be generated in parallel and still reproduce bit-for-bit.
//
// The core generator is SplitMix64: the state is a counter advanced by a
// fixed odd increment and the output is a bijective mix of the counter, so
// skipping or splitting streams never correlates them.
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::string_view label);

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double next_double();

    // N(0, sigma^2) via Box-Muller; pairs are cached.
    double next_gaussian(double sigma);

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t next_below(std::uint64_t n);

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// 64-bit FNV-1a, used to derive stream keys from labels.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

} // namespace fairsyn
