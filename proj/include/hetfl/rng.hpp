#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace hetfl {

// SplitMix64 step. Used both as the generator core and to mix seed
// components into independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Derives a stream seed from a master seed and a list of tags (client id,
/// round, purpose...). Distinct tag sequences give independent streams, so
/// per-client work can run in any order or in parallel without changing
/// the numbers drawn.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = master;
    for (std::uint64_t t : tags) {
        s ^= splitmix64(t) + 0x9e3779b97f4a7c15ull + (s << 6) + (s >> 2);
        (void)splitmix64(s);
    }
    return s;
}

/// Deterministic PRNG. All randomized behavior in the library goes through
/// this class so that runs are reproducible bit-for-bit from their seeds
/// (std::shuffle and std::uniform_*_distribution are implementation-defined
/// and are deliberately not used).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform index in [0, n). Rejection sampling keeps it unbiased.
    std::size_t next_index(std::size_t n) {
        const std::uint64_t bound = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return static_cast<std::size_t>(x % bound);
    }

    /// Standard normal via Box-Muller; caches the second variate.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so log() is finite.
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = next_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct indices drawn from [0, n), in draw order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + next_index(n - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stream purpose tags for derive_seed.
namespace seed_tag {
inline constexpr std::uint64_t client_stream = 0xC11E57u;
inline constexpr std::uint64_t local_batches = 0xBA7C4u;
inline constexpr std::uint64_t participation = 0xAC71FEu;
inline constexpr std::uint64_t random_mask = 0x3A5Cu;
inline constexpr std::uint64_t smoothness = 0x53007u;
inline constexpr std::uint64_t partition = 0xFA87u;
inline constexpr std::uint64_t dataset = 0xDA7Au;
}  // namespace seed_tag

}  // namespace hetfl
