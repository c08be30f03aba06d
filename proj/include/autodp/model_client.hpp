#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "autodp/corpus.hpp"

namespace autodp {

enum class ClientRole { Optimizer, Generator, Scorer };

std::string_view to_string(ClientRole r);
ClientRole client_role_from_string(std::string_view s);

struct Shot {
  std::string question;
  std::string answer;

  friend bool operator==(const Shot&, const Shot&) = default;
};

/// Request sent to a model-backed operator.
///
/// `mode` names the field being produced: "question" or "answer" for the
/// optimizer and generator roles, "score" for the scorer.
struct ModelRequest {
  ClientRole role = ClientRole::Optimizer;
  std::string mode;
  std::string prompt;
  std::string question;
  std::string answer;
  std::vector<Shot> shots;
  std::uint64_t seed = 0;

  friend bool operator==(const ModelRequest&, const ModelRequest&) = default;
};

struct ModelResponse {
  bool ok = false;
  std::string text;
  std::optional<double> score;
  std::string error;

  static ModelResponse text_result(std::string t) { return {true, std::move(t), std::nullopt, {}}; }
  static ModelResponse score_result(double s) { return {true, {}, s, {}}; }
  static ModelResponse failure(std::string why) { return {false, {}, std::nullopt, std::move(why)}; }
};

/// Wire form: {"role","mode","prompt","sample":{"question","answer"},"shots":[...],"seed"}.
Json to_json(const ModelRequest& r);
ModelRequest model_request_from_json(const Json& j);
/// Wire form: {"status":"ok"|"error","text"?,"score"?,"error"?}.
Json to_json(const ModelResponse& r);
ModelResponse model_response_from_json(const Json& j);

/// A model-backed operator endpoint (optimizer, generator or scorer).
///
/// Implementations may throw on transport failures; callers treat a throw the
/// same as a failed response.
class ModelClient {
 public:
  virtual ~ModelClient() = default;
  [[nodiscard]] virtual ClientRole role() const = 0;
  [[nodiscard]] virtual std::string identity() const = 0;
  virtual ModelResponse call(const ModelRequest& request) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{0};
  double backoff_multiplier = 2.0;
  /// Total requests allowed through this client; 0 means unlimited.
  std::size_t request_budget = 0;
};

/// Decorator: retries failed calls with exponential backoff and enforces a request budget.
/// Never throws from call(); exhausted retries come back as a failed response.
class RetryingModelClient final : public ModelClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RetryingModelClient(std::shared_ptr<ModelClient> inner, RetryPolicy policy, Sleeper sleeper = {});

  [[nodiscard]] ClientRole role() const override { return inner_->role(); }
  [[nodiscard]] std::string identity() const override { return inner_->identity(); }
  ModelResponse call(const ModelRequest& request) override;

  [[nodiscard]] std::size_t requests_sent() const { return sent_.load(); }

 private:
  std::shared_ptr<ModelClient> inner_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  std::atomic<std::size_t> sent_{0};
};

/// Client whose behaviour is a caller-supplied function; records every request.
class ScriptedModelClient final : public ModelClient {
 public:
  using Handler = std::function<ModelResponse(const ModelRequest&)>;

  ScriptedModelClient(ClientRole role, Handler handler, std::string name = "scripted");

  [[nodiscard]] ClientRole role() const override { return role_; }
  [[nodiscard]] std::string identity() const override { return name_; }
  ModelResponse call(const ModelRequest& request) override;

  [[nodiscard]] std::vector<ModelRequest> requests() const;
  [[nodiscard]] std::size_t call_count() const;

 private:
  ClientRole role_;
  Handler handler_;
  std::string name_;
  mutable std::mutex mu_;
  std::vector<ModelRequest> log_;
};

// Deterministic defaults used when no endpoint is configured.

/// Rewrites a field: strips noise and collapses immediately repeated word phrases.
class TemplateOptimizerClient final : public ModelClient {
 public:
  [[nodiscard]] ClientRole role() const override { return ClientRole::Optimizer; }
  [[nodiscard]] std::string identity() const override { return "template-optimizer/1"; }
  ModelResponse call(const ModelRequest& request) override;
};

/// Fills a missing field with "QUESTION(<answer>)" or "ANSWER(<question>)".
class TemplateGeneratorClient final : public ModelClient {
 public:
  [[nodiscard]] ClientRole role() const override { return ClientRole::Generator; }
  [[nodiscard]] std::string identity() const override { return "template-generator/1"; }
  ModelResponse call(const ModelRequest& request) override;
};

/// Collapses runs of an immediately repeated word phrase (up to four words long).
std::string collapse_repeated_phrases(std::string_view text);

}  // namespace autodp
