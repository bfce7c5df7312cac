// Deterministic RNG: splitmix64 streams + Box-Muller normals. Hand-rolled so
// reports are byte-identical across standard libraries for a fixed seed.
#pragma once

#include <cmath>
#include <cstdint>

namespace besovlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // warm up so nearby seeds decorrelate
        splitmix64(state_);
        splitmix64(state_);
    }
    // independent stream for (seed, index) pairs
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed;
        splitmix64(s);
        s ^= 0xa0761d6478bd642fULL * (index + 1);
        return Rng(s);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    double uniform() { // [0, 1)
        return double(next_u64() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi_inclusive) {
        const std::uint64_t span = std::uint64_t(hi_inclusive - lo) + 1;
        return lo + std::int64_t(next_u64() % span);
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0, u2 = 0;
        do {
            u1 = uniform();
        } while (u1 <= 0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0;
};

} // namespace besovlab
