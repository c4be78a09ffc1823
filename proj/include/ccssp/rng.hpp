#pragma once

#include <cstdint>

namespace ccssp {

// Counter-based PRNG helpers. Every random draw in the library goes through
// these so results are bit-identical across platforms and independent of any
// worker partitioning (stdlib distributions are implementation-defined).

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(mix(a, b) ^ splitmix64(c + 0x165667b19e3779f9ull));
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                         std::uint64_t d) {
  return splitmix64(mix(a, b, c) ^ splitmix64(d + 0x27220a95fe0e59d1ull));
}

// Uniform double in [0, 1) from 53 random bits.
inline double to_unit(std::uint64_t u) {
  return static_cast<double>(u >> 11) * 0x1.0p-53;
}

// Small sequential generator seeded from a mixed key; used where a run needs
// several draws in order (Monte Carlo rollouts, rounding sweeps).
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return to_unit(next()); }

 private:
  std::uint64_t state_;
};

// Inverse standard normal CDF (Acklam's rational approximation, |err| < 1.2e-9).
double normal_quantile(double p);

}  // namespace ccssp
