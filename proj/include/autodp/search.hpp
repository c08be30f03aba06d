#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "autodp/agent.hpp"
#include "autodp/corpus.hpp"
#include "autodp/dps.hpp"
#include "autodp/evaluation.hpp"
#include "autodp/screener.hpp"

namespace autodp {

struct SearchConfig {
  double sampling_rate = 0.20;
  std::size_t initial_group_size = 4;
  std::size_t max_group_size = 6;
  std::size_t max_rounds = 5;
  double temperature = 0.6;
  std::uint64_t seed = 0;
  PromptTemplates templates;
};

struct SearchClients {
  AgentClient* agent = nullptr;
  StrategyEvaluator* evaluator = nullptr;
  Screener* screener = nullptr;
  EmbeddingClient* embedder = nullptr;
  RunLog* log = nullptr;
  /// Cumulative seconds spent screening, if tracked (see TimedScreener). Screening
  /// time is then reported on its own and left out of the other phases.
  std::function<double()> screening_seconds;
};

enum class Termination { BestTeam, NoProcessing, Budget };
std::string_view to_string(Termination t);

/// Wall-clock seconds per phase; excluded from the deterministic report.
struct PhaseTimes {
  double sampling = 0.0;
  double screening = 0.0;
  double agent = 0.0;
  double processing = 0.0;
  double evaluation = 0.0;
};

struct SearchResult {
  Strategy best_strategy;
  double best_score = 0.0;
  double best_relative_score = 0.0;
  double baseline_score = 0.0;
  std::vector<Round> rounds;
  Termination termination = Termination::Budget;
  std::size_t rounds_executed = 0;
  std::size_t parse_retries = 0;
  Dataset sample;
  std::size_t sample_clean = 0;
  std::size_t sample_noisy = 0;
  /// Strategies scored by the evaluator, baseline included.
  std::size_t evaluations = 0;
  PhaseTimes times;
};

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Samples base once, scores the unprocessed sample once, then alternates agent
/// turns and group evaluations until the agent stops or max_rounds turns are used.
/// Strategies already scored are not evaluated again. Throws SearchError when the
/// agent fails to produce a parseable reply twice in a row.
SearchResult run_search(const Dataset& base, const SearchConfig& cfg, const SearchClients& clients);

/// Index into (round, group position) of the highest relative score; the baseline
/// (round 0, score 0) takes part. Ties go to the earliest round, then the lowest position.
struct BestPick {
  Strategy strategy;
  double relative = 0.0;
  double raw = 0.0;
};
BestPick argmax_relative(const std::vector<Round>& rounds, double baseline);

}  // namespace autodp
