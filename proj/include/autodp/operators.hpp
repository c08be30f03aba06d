#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "autodp/corpus.hpp"
#include "autodp/model_client.hpp"
#include "autodp/operator_config.hpp"
#include "autodp/screener.hpp"
#include "autodp/strategy.hpp"

namespace autodp {

// Meta keys written by the model-backed operators.
inline constexpr const char* kMetaOptimized = "autodp.optimized";
inline constexpr const char* kMetaGenerated = "autodp.generated";
inline constexpr const char* kMetaError = "autodp.error";

/// MinHash signature over character shingles of `text`.
std::vector<std::uint64_t> minhash_signature(std::string_view text, const MinHashConfig& cfg);

/// Pairs (i < j) that share an LSH bucket and whose estimated Jaccard reaches the threshold.
std::vector<std::pair<std::size_t, std::size_t>> minhash_duplicate_pairs(const std::vector<std::string>& texts,
                                                                         const MinHashConfig& cfg);

/// Near-duplicate removal. Samples are compared on their noise-stripped text;
/// each connected duplicate cluster keeps only its earliest sample.
Dataset minhash_dedup(const Dataset& d, const OperatorConfig& cfg);

/// strip_noise applied to question and answer; id and meta untouched.
Sample strip_noise(const Sample& s);

/// dedup -> strip_noise -> drop samples outside the special-char, token or n-gram ranges.
Dataset apply_cleaning(const Dataset& d, const OperatorConfig& cfg);

/// Rewrites the targeted non-empty field(s) with the optimizer's output.
/// Fail-open: on client failure returns the input with kMetaError set.
Sample optimize_sample(const Sample& s, OptimizeMode mode, ModelClient& client, std::uint64_t seed = 0);

/// Fills empty fields, question first and then the answer conditioned on it.
/// No call is made when nothing is missing. Throws std::invalid_argument on empty shots.
Sample generate_missing(const Sample& s, const std::vector<Shot>& shots, ModelClient& client,
                        std::uint64_t seed = 0);

/// Keeps the top ceil(keep_fraction * |d|) samples by score, ties to the earlier
/// position, in original order. A failed score counts as -infinity.
Dataset select_high_quality(const Dataset& d, ModelClient& scorer, double keep_fraction, std::uint64_t seed = 0);

/// Per-team application counters.
struct TeamInvocationCounter {
  std::array<std::atomic<std::size_t>, 4> per_team{};

  void add(Team t) { ++per_team[static_cast<std::size_t>(t)]; }
  [[nodiscard]] std::size_t total() const {
    std::size_t n = 0;
    for (const auto& c : per_team) n += c.load();
    return n;
  }
};

/// Everything apply_team needs besides the dataset.
struct ExecutionContext {
  OperatorConfig cfg;
  std::shared_ptr<ModelClient> optimizer;
  std::shared_ptr<ModelClient> generator;
  std::shared_ptr<ModelClient> scorer;
  std::shared_ptr<Screener> screener;
  std::uint64_t seed = 0;
  std::shared_ptr<TeamInvocationCounter> counter;

  /// Context wired with the deterministic default clients and heuristic screener.
  static ExecutionContext with_defaults(OperatorConfig cfg, std::uint64_t seed = 0);
};

/// Applies one team. Optimization and Generation only touch screener-noisy samples;
/// clean samples pass through byte-identical.
Dataset apply_team(Team team, const Dataset& d, ExecutionContext& ctx);

/// Applies every team of f in order, without any caching.
Dataset apply_strategy(const Strategy& f, const Dataset& d, ExecutionContext& ctx);

}  // namespace autodp
