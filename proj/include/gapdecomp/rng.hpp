#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace gapdecomp {

/// Portable random stream, version 1.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Stream splitting: the engine seed for (seed, stream) is
/// splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x9E3779B97F4A7C15)).
/// Only raw 64-bit engine output is consumed; every distribution below is
/// implemented here because std:: distributions differ across standard
/// libraries.
class Rng {
 public:
  static constexpr int kVersion = 1;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound), unbiased (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn from a cumulative (unnormalized) weight table.
  std::size_t categorical(std::span<const double> cumulative);

  /// Uniformly random permutation of 0..n-1 (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n);

  /// k distinct indices from 0..n-1, uniformly, returned in ascending order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace gapdecomp
