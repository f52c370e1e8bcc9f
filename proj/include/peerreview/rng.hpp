#pragma once

#include <cstdint>
#include <vector>

namespace peerreview {

// Deterministic generator used everywhere reproducibility is promised
// (dataset sampling, role assignment, test instance generation).
//
// std::mt19937 is portable but the standard distributions are not: the
// mapping from engine output to a bounded int is implementation-defined.
// So we pin both the engine (splitmix64) and the bounded-int mapping
// (rejection sampling over a power-of-two mask) to get identical streams
// on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, bound). bound must be >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t mask = bound - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        for (;;) {
            std::uint64_t v = next() & mask;
            if (v < bound) return v;
        }
    }

    // Uniform double in [0, 1) with 53 bits of randomness.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Derive an independent stream from a base seed and a stream index.
// Used for per-problem decisions (role draws) so that problem k's draw
// does not depend on how many problems came before it.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mixer(seed ^ (0x6a09e667f3bcc909ULL + stream * 0x3c6ef372fe94f82bULL));
    return SplitMix64(mixer.next());
}

// Fisher-Yates over the first k positions; after the call, out[0..k) is a
// uniform sample without replacement of the input indices.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, SplitMix64& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace peerreview
