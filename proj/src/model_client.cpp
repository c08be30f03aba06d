#include "autodp/model_client.hpp"

#include <algorithm>
#include <thread>

#include "autodp/operator_config.hpp"
#include "autodp/text.hpp"

namespace autodp {

std::string_view to_string(ClientRole r) {
  switch (r) {
    case ClientRole::Optimizer: return "optimizer";
    case ClientRole::Generator: return "generator";
    case ClientRole::Scorer: return "scorer";
  }
  return "optimizer";
}

ClientRole client_role_from_string(std::string_view s) {
  if (s == "optimizer") return ClientRole::Optimizer;
  if (s == "generator") return ClientRole::Generator;
  if (s == "scorer") return ClientRole::Scorer;
  throw ConfigError("unknown client role \"" + std::string(s) + "\"");
}

Json to_json(const ModelRequest& r) {
  Json shots = Json::array();
  for (const auto& s : r.shots) shots.push_back({{"question", s.question}, {"answer", s.answer}});
  return Json{{"role", std::string(to_string(r.role))},
              {"mode", r.mode},
              {"prompt", r.prompt},
              {"sample", {{"question", r.question}, {"answer", r.answer}}},
              {"shots", std::move(shots)},
              {"seed", r.seed}};
}

ModelRequest model_request_from_json(const Json& j) {
  ModelRequest r;
  r.role = client_role_from_string(j.at("role").get<std::string>());
  r.mode = j.value("mode", "");
  r.prompt = j.value("prompt", "");
  if (auto it = j.find("sample"); it != j.end()) {
    r.question = it->value("question", "");
    r.answer = it->value("answer", "");
  }
  if (auto it = j.find("shots"); it != j.end()) {
    for (const auto& s : *it) r.shots.push_back({s.value("question", ""), s.value("answer", "")});
  }
  r.seed = j.value("seed", std::uint64_t{0});
  return r;
}

Json to_json(const ModelResponse& r) {
  Json j{{"status", r.ok ? "ok" : "error"}};
  if (r.ok) {
    if (r.score) j["score"] = *r.score;
    else j["text"] = r.text;
  } else {
    j["error"] = r.error;
  }
  return j;
}

ModelResponse model_response_from_json(const Json& j) {
  const auto status = j.value("status", "error");
  if (status != "ok") return ModelResponse::failure(j.value("error", "remote reported status " + status));
  if (auto it = j.find("score"); it != j.end() && it->is_number()) return ModelResponse::score_result(it->get<double>());
  if (auto it = j.find("text"); it != j.end() && it->is_string()) return ModelResponse::text_result(it->get<std::string>());
  return ModelResponse::failure("response carries neither text nor score");
}

RetryingModelClient::RetryingModelClient(std::shared_ptr<ModelClient> inner, RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)), policy_(policy), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (policy_.max_attempts < 1) policy_.max_attempts = 1;
}

ModelResponse RetryingModelClient::call(const ModelRequest& request) {
  ModelResponse last = ModelResponse::failure("no attempt made");
  auto delay = policy_.base_delay;
  for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
    if (policy_.request_budget != 0 && sent_.load() >= policy_.request_budget) {
      return ModelResponse::failure("request budget exhausted");
    }
    ++sent_;
    try {
      last = inner_->call(request);
    } catch (const std::exception& e) {
      last = ModelResponse::failure(e.what());
    }
    if (last.ok) return last;
    if (attempt < policy_.max_attempts && delay.count() > 0) {
      sleeper_(delay);
      delay = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(delay.count()) *
                                                               policy_.backoff_multiplier));
    }
  }
  return last;
}

ScriptedModelClient::ScriptedModelClient(ClientRole role, Handler handler, std::string name)
    : role_(role), handler_(std::move(handler)), name_(std::move(name)) {}

ModelResponse ScriptedModelClient::call(const ModelRequest& request) {
  {
    std::lock_guard lock(mu_);
    log_.push_back(request);
  }
  return handler_(request);
}

std::vector<ModelRequest> ScriptedModelClient::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t ScriptedModelClient::call_count() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

std::string collapse_repeated_phrases(std::string_view text) {
  std::vector<std::string> words;
  {
    std::string cur;
    for (char c : text) {
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        if (!cur.empty()) words.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
  }
  for (std::size_t n = 4; n > 0; --n) {
    std::vector<std::string> out;
    out.reserve(words.size());
    std::size_t i = 0;
    while (i < words.size()) {
      out.push_back(words[i]);
      ++i;
      // Once a phrase of length n has been emitted, skip verbatim repeats of it.
      if (out.size() >= n) {
        while (i + n <= words.size() &&
               std::equal(words.begin() + static_cast<std::ptrdiff_t>(i),
                          words.begin() + static_cast<std::ptrdiff_t>(i + n),
                          out.end() - static_cast<std::ptrdiff_t>(n))) {
          i += n;
        }
      }
    }
    words = std::move(out);
  }
  std::string joined;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) joined.push_back(' ');
    joined += words[i];
  }
  return joined;
}

ModelResponse TemplateOptimizerClient::call(const ModelRequest& request) {
  const std::string& field = request.mode == "question" ? request.question : request.answer;
  if (request.mode != "question" && request.mode != "answer") {
    return ModelResponse::failure("optimizer mode must be question or answer");
  }
  return ModelResponse::text_result(collapse_repeated_phrases(text::strip_noise(field)));
}

ModelResponse TemplateGeneratorClient::call(const ModelRequest& request) {
  if (request.mode == "question") return ModelResponse::text_result("QUESTION(" + request.answer + ")");
  if (request.mode == "answer") return ModelResponse::text_result("ANSWER(" + request.question + ")");
  return ModelResponse::failure("generator mode must be question or answer");
}

}  // namespace autodp
