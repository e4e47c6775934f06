#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace ifadit {

// Deterministic PRNG: xoshiro256++ seeded through splitmix64. Implemented
// in-repo so that draw sequences are identical across platforms and
// standard-library versions. Identical seed => identical sequence.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller (one draw per pair of uniforms).
    double normal();
    double normal(double mean, double stddev);

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    std::vector<std::uint8_t> bytes(std::size_t n);

    // Independent, reproducible substream named by `stream`. Forks with the
    // same name off the same parent yield identical generators regardless of
    // how much the parent has been consumed.
    Rng fork(std::string_view stream) const;
    Rng fork(std::string_view stream, std::uint64_t index) const;

  private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_;
};

}  // namespace ifadit
