#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "autodp/corpus.hpp"
#include "autodp/digest.hpp"

namespace autodp {

/// Invalid or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inclusive interval.
template <typename T>
struct Range {
  T lo{};
  T hi{};

  [[nodiscard]] bool contains(T v) const { return lo <= v && v <= hi; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct MinHashConfig {
  std::size_t shingle_size = 5;  // characters
  std::size_t num_permutations = 128;
  std::size_t bands = 16;
  std::size_t rows_per_band = 8;
  double jaccard_threshold = 0.8;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;

  friend bool operator==(const MinHashConfig&, const MinHashConfig&) = default;
};

struct NgramConfig {
  std::size_t n = 5;
  double max_repetition_ratio = 0.3;

  friend bool operator==(const NgramConfig&, const NgramConfig&) = default;
};

/// Which fields the Optimization team rewrites.
enum class OptimizeMode { Question, Answer, Both };

std::string_view to_string(OptimizeMode m);
OptimizeMode optimize_mode_from_string(std::string_view s);

/// Thresholds and parameters shared by the operators and the heuristic screener.
struct OperatorConfig {
  MinHashConfig minhash;
  Range<double> special_char_range{0.0, 0.25};
  Range<std::size_t> token_range{10, 4096};
  NgramConfig ngram;
  double selection_keep_fraction = 0.5;
  OptimizeMode optimize_mode = OptimizeMode::Both;
  std::size_t generation_shots = 3;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  [[nodiscard]] Json to_json() const;
  /// Missing keys keep their defaults. Validates the result.
  static OperatorConfig from_json(const Json& j);

  /// Digest of the canonical JSON form; part of every cache key.
  [[nodiscard]] Digest digest() const;

  friend bool operator==(const OperatorConfig&, const OperatorConfig&) = default;
};

}  // namespace autodp
