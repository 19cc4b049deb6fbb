#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace admnorm {

/// Name embedded in every report so streams from different builds can be told apart.
inline constexpr const char* kRngAlgorithm =
    "mt19937_64; stream seed = splitmix64(master ^ splitmix64(fnv1a64(label))); "
    "uniform = top 53 bits; normal = marsaglia-polar";

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Sub-seed for a named stream of a master seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stream_label);

/// Deterministic generator for one labelled stream.
///
/// Identical (master seed, label) pairs replay identical draws within a build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t master_seed, std::string_view label) {
    return Rng(derive_seed(master_seed, label));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform();

  /// Standard normal deviate (Marsaglia polar method).
  double normal();

  std::vector<double> normals(std::size_t count);

  /// Uniform integer in [0, bound).
  std::size_t below(std::size_t bound);

  /// Uniformly random permutation of 0..n-1 (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n);

  /// `count` distinct indices from 0..n-1 in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

}  // namespace admnorm
