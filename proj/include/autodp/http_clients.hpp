#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include "autodp/agent.hpp"
#include "autodp/dps.hpp"
#include "autodp/evaluation.hpp"
#include "autodp/model_client.hpp"
#include "autodp/screener.hpp"

namespace autodp {

/// A remote JSON-over-HTTP endpoint, e.g. "http://127.0.0.1:8080/v1/screen".
struct Endpoint {
  std::string url;
  /// Sent as "Authorization: Bearer <key>" when non-empty.
  std::string api_key;
  std::chrono::milliseconds timeout{60000};
};

/// POSTs a JSON body and returns the parsed JSON reply. Throws std::runtime_error on
/// transport errors, non-2xx status or an unparseable body.
Json post_json(const Endpoint& ep, const Json& body);

class HttpModelClient final : public ModelClient {
 public:
  HttpModelClient(ClientRole role, Endpoint ep) : role_(role), ep_(std::move(ep)) {}

  [[nodiscard]] ClientRole role() const override { return role_; }
  [[nodiscard]] std::string identity() const override { return "http:" + ep_.url; }
  ModelResponse call(const ModelRequest& request) override;

 private:
  ClientRole role_;
  Endpoint ep_;
};

/// Request {question, answer}; reply {label: 0|1}.
class HttpScreener final : public Screener {
 public:
  explicit HttpScreener(Endpoint ep) : ep_(std::move(ep)) {}

  [[nodiscard]] std::string identity() const override { return "http:" + ep_.url; }
  ScreenerVerdict classify(const Sample& s) override;

 private:
  Endpoint ep_;
};

/// Request {text}; reply {vector: [...]}.
class HttpEmbedder final : public EmbeddingClient {
 public:
  explicit HttpEmbedder(Endpoint ep) : ep_(std::move(ep)) {}

  [[nodiscard]] std::string identity() const override { return "http:" + ep_.url; }
  std::vector<double> embed(std::string_view text) override;

 private:
  Endpoint ep_;
};

/// Request {messages: [{role, content}], temperature, seed}; reply {content}.
class HttpAgentClient final : public AgentClient {
 public:
  explicit HttpAgentClient(Endpoint ep) : ep_(std::move(ep)) {}

  [[nodiscard]] std::string identity() const override { return "http:" + ep_.url; }
  std::string complete(const std::vector<ChatMessage>& messages, double temperature, std::uint64_t seed) override;

 private:
  Endpoint ep_;
};

/// Request {dataset_location, base_model, epochs, validation_set}; reply {score}.
class HttpTrainerClient final : public TrainerClient {
 public:
  explicit HttpTrainerClient(Endpoint ep) : ep_(std::move(ep)) {}

  [[nodiscard]] std::string identity() const override { return "http:" + ep_.url; }
  double train_and_evaluate(const TrainerRequest& request) override;

 private:
  Endpoint ep_;
};

}  // namespace autodp
