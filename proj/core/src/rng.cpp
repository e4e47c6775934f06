#include "ifadit/rng.hpp"

#include <cmath>
#include <numbers>

#include "ifadit/error.hpp"

namespace ifadit {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    // Top 53 bits give a uniform double in [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    // Box-Muller; u1 shifted away from zero so the log is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw ContractError("Rng::below: n must be positive");
    // Rejection-free multiply-shift; bias is negligible for desk-scale n.
    return next_u64() % n;
}

std::vector<std::uint8_t> Rng::bytes(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    std::size_t i = 0;
    while (i < n) {
        std::uint64_t word = next_u64();
        for (int b = 0; b < 8 && i < n; ++b, ++i) {
            out[i] = static_cast<std::uint8_t>(word & 0xff);
            word >>= 8;
        }
    }
    return out;
}

Rng Rng::fork(std::string_view stream) const {
    std::uint64_t mix = seed_ ^ fnv1a(stream);
    return Rng(splitmix64(mix));
}

Rng Rng::fork(std::string_view stream, std::uint64_t index) const {
    std::uint64_t mix = seed_ ^ fnv1a(stream) ^ (0x632be59bd9b4e019ULL * (index + 1));
    return Rng(splitmix64(mix));
}

}  // namespace ifadit
