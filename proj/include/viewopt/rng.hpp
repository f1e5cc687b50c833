#pragma once

#include <cstdint>

namespace viewopt {

// splitmix64 generator. The standard library distributions are not pinned
// across implementations, so all sampling in this project goes through this
// class to keep seeded runs reproducible byte-for-byte.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // unbiased uniform in [0, n)
    std::uint32_t next_below(std::uint32_t n) {
        std::uint64_t m = static_cast<std::uint64_t>(static_cast<std::uint32_t>(next_u64())) * n;
        std::uint32_t lo = static_cast<std::uint32_t>(m);
        if (lo < n) {
            std::uint32_t threshold = -n % n;
            while (lo < threshold) {
                m = static_cast<std::uint64_t>(static_cast<std::uint32_t>(next_u64())) * n;
                lo = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    // inclusive bounds
    int uniform_int(int lo, int hi) { return lo + static_cast<int>(next_below(static_cast<std::uint32_t>(hi - lo + 1))); }

    bool bernoulli(double p) { return next_double() < p; }

    // independent stream derived from (seed, stream); used to give workers
    // their own generators without sharing state
    static Rng fork(std::uint64_t seed, std::uint64_t stream) {
        Rng mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
        mix.next_u64();
        return Rng(mix.next_u64());
    }

  private:
    std::uint64_t state_;
};

}  // namespace viewopt
