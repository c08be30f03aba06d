#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "autodp/corpus.hpp"
#include "autodp/operators.hpp"
#include "autodp/strategy.hpp"
#include "autodp/strategy_cache.hpp"

namespace autodp {

inline constexpr double kFailedScore = -std::numeric_limits<double>::infinity();

enum class EvalMode { Proxy, Trainer };

std::string_view to_string(EvalMode m);
EvalMode eval_mode_from_string(std::string_view s);

/// Weights of the four proxy components, in order: thresholds, completeness,
/// uniqueness, length adequacy.
struct ProxyWeights {
  double thresholds = 0.4;
  double completeness = 0.3;
  double uniqueness = 0.2;
  double adequacy = 0.1;

  friend bool operator==(const ProxyWeights&, const ProxyWeights&) = default;
};

struct TrainerSettings {
  std::string base_model = "base-model";
  std::size_t epochs = 3;
  std::string validation_set;

  friend bool operator==(const TrainerSettings&, const TrainerSettings&) = default;
};

struct EvalConfig {
  EvalMode mode = EvalMode::Proxy;
  TrainerSettings trainer;
  ProxyWeights weights;

  /// Throws ConfigError on negative weights, weights not summing to 1, or epochs < 1.
  void validate() const;
  [[nodiscard]] Json to_json() const;
  static EvalConfig from_json(const Json& j);

  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

struct ProxyComponents {
  double thresholds = 0.0;
  double completeness = 0.0;
  double uniqueness = 0.0;
  double adequacy = 0.0;
};

/// Component values for a non-empty dataset; all four are 1 for an empty one.
///
/// Uniqueness counts a pair as duplicate when both noise-stripped texts are
/// non-empty and one contains the other.
ProxyComponents proxy_components(const Dataset& d, const OperatorConfig& cfg);

/// Weighted component sum in [0,1]; an empty dataset scores 0.
double proxy_score(const Dataset& d, const ProxyWeights& w, const OperatorConfig& cfg = {});

struct TrainerRequest {
  std::string dataset_location;
  std::string base_model;
  std::size_t epochs = 3;
  std::string validation_set;
};

/// Fine-tunes on a processed dataset and returns the validation score in [0,1].
class TrainerClient {
 public:
  virtual ~TrainerClient() = default;
  [[nodiscard]] virtual std::string identity() const = 0;
  /// May throw; a throw or an out-of-range score counts as a failed evaluation.
  virtual double train_and_evaluate(const TrainerRequest& request) = 0;
};

struct EvalOutcome {
  double score = kFailedScore;
  std::string error;
  Digest dataset_fingerprint;
  std::size_t dataset_size = 0;
  bool cache_hit = false;
  std::size_t team_invocations = 0;
  double processing_seconds = 0.0;
  double scoring_seconds = 0.0;

  [[nodiscard]] bool ok() const { return error.empty(); }
};

/// Append-only JSON-lines log shared by the evaluations of a run.
class RunLog {
 public:
  RunLog() = default;
  /// Truncates and writes to path; records are also kept in memory.
  explicit RunLog(const std::filesystem::path& path);

  void append(Json record);
  [[nodiscard]] std::vector<Json> records() const;

 private:
  mutable std::mutex mu_;
  std::ofstream out_;
  std::vector<Json> records_;
};

/// Everything evaluate_strategy needs besides the strategy and base dataset.
struct EvalContext {
  EvalConfig cfg;
  ExecutionContext* exec = nullptr;
  StrategyCache* cache = nullptr;
  std::shared_ptr<TrainerClient> trainer;
  RunLog* log = nullptr;
  /// Where trainer mode writes processed datasets.
  std::filesystem::path work_dir;
};

/// f(base) through the cache, then the proxy or the trainer. Failures come back
/// as kFailedScore with `error` set. Logs one "evaluation" record per call.
EvalOutcome evaluate_strategy(const Strategy& f, const Dataset& base, EvalContext& ctx, std::size_t round = 0);

/// What the search loop scores strategies with.
class StrategyEvaluator {
 public:
  virtual ~StrategyEvaluator() = default;
  virtual EvalOutcome evaluate(const Strategy& f, const Dataset& base, std::size_t round) = 0;
};

class PipelineEvaluator final : public StrategyEvaluator {
 public:
  explicit PipelineEvaluator(EvalContext ctx) : ctx_(std::move(ctx)) {}
  EvalOutcome evaluate(const Strategy& f, const Dataset& base, std::size_t round) override {
    return evaluate_strategy(f, base, ctx_, round);
  }

 private:
  EvalContext ctx_;
};

}  // namespace autodp
