#pragma once

#include <array>
#include <cstdint>
#include <iterator>
#include <string_view>
#include <utility>

namespace cake {

/// Seedable 64-bit generator (xoshiro256**) seeded through SplitMix64.
///
/// Every random draw in the library goes through this type so that results
/// depend only on the seed, never on the standard library's distribution
/// implementations. Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()();

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via Box-Muller (one spare value is cached).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <class RandomIt>
    void shuffle(RandomIt first, RandomIt last) {
        auto n = static_cast<std::uint64_t>(std::distance(first, last));
        for (std::uint64_t i = n; i > 1; --i) {
            auto j = below(i);
            using std::swap;
            swap(first[i - 1], first[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// One step of the SplitMix64 sequence; also used as a 64-bit mixer.
std::uint64_t splitmix64(std::uint64_t& state);

/// Stable substream seed for (seed, role, index). Identical across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view role, std::uint64_t index = 0);

/// Convenience for two-level substreams such as (R, b) in sub-ensemble draws.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view role, std::uint64_t index,
                          std::uint64_t sub_index);

/// FNV-1a over bytes; used for content hashes in manifests.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace cake
