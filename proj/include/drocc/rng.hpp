#pragma once

#include <cstdint>
#include <random>

namespace drocc {

// splitmix64 step; used to whiten user seeds and to derive per-replicate
// stream seeds from (master, index) pairs.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(mix64(master) ^ mix64(stream + 0x51ed2701));
}

// Seeded generator with a fixed bits-to-double mapping. The standard
// distributions are implementation-defined, so outputs would not be
// reproducible across standard libraries; this mapping is.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform index in [0, n) by rejection; unbiased and reproducible.
    std::size_t next_index(std::size_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace drocc
