#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace ace {

// Deterministic PRNG used everywhere randomness is needed. Hand-rolled so
// that results are identical across platforms and standard libraries;
// std::normal_distribution makes no such guarantee.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

    // Derive an independent stream from (seed, key...) without sharing state.
    static Rng keyed(uint64_t seed, uint64_t k1, uint64_t k2 = 0) {
        Rng r(seed);
        r.state_ ^= mix(k1 + 0x5851f42d4c957f2dULL);
        r.next_u64();
        r.state_ ^= mix(k2 + 0x14057b7ef767814fULL);
        r.next_u64();
        return r;
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    uint64_t next_below(uint64_t n) {
        // Multiplicative range reduction; bias is < 2^-64 per draw.
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller. One value per call; the cached twin is
    // discarded so draw count stays predictable.
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 1e-300) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    // First k elements of a random permutation of {0..n-1} (partial
    // Fisher-Yates), i.e. a uniform draw of k indices without replacement.
    std::vector<size_t> sample_without_replacement(size_t n, size_t k) {
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        if (k > n) k = n;
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(next_below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t state_;
};

// Single keyed normal draw; used where noise must be a pure function of its
// key (e.g. one label per candidate per repetition).
inline double keyed_gaussian(uint64_t seed, uint64_t k1, uint64_t k2 = 0) {
    return Rng::keyed(seed, k1, k2).next_gaussian();
}

}  // namespace ace
