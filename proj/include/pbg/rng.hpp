#pragma once

#include <cmath>
#include <cstdint>

#include "complex_math.hpp"

namespace pbg {

// splitmix64: tiny, statistically solid, and trivially splittable, which is
// what makes ensemble results independent of worker scheduling.  Every
// realization gets its own stream derived from (master_seed, index), so the
// draw sequence is a pure function of the realization index.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [0, 2 pi)
    double next_angle() { return 2.0 * pi * next_double(); }

    // standard normal via Box-Muller (fixed algorithm: output must be
    // bit-reproducible across standard library implementations)
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double(), u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 2.0 * pi * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// counter-based stream derivation: hash the (seed, index) pair through one
// splitmix step so neighbouring indices land far apart
inline SplitMix64 substream(std::uint64_t master_seed, std::uint64_t index) {
    SplitMix64 h(master_seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return SplitMix64(h.next_u64());
}

} // namespace pbg
