#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace ovd {

std::uint64_t splitmix64(std::uint64_t x);

// Seeded random stream. Doubles are produced from the raw 64-bit engine output
// so that sequences are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream keyed by a root seed and a path of indices,
  // e.g. derive(seed, {step, problem, member}).
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Inverse-CDF draw from a probability vector.
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ovd
