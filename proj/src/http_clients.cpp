#include "autodp/http_clients.hpp"

#include <httplib.h>

#include <regex>

namespace autodp {

namespace {

struct ParsedUrl {
  std::string origin;  // http://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  static const std::regex re(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw std::runtime_error("endpoint must be a plain http:// URL (put a TLS proxy in front for https): \"" + url + "\"");
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

}  // namespace

Json post_json(const Endpoint& ep, const Json& body) {
  const auto url = split_url(ep.url);
  httplib::Client cli(url.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(ep.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(ep.timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!ep.api_key.empty()) headers.emplace("Authorization", "Bearer " + ep.api_key);

  auto res = cli.Post(url.path, headers, body.dump(), "application/json");
  if (!res) throw std::runtime_error("POST " + ep.url + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw std::runtime_error("POST " + ep.url + " returned HTTP " + std::to_string(res->status));
  }
  try {
    return Json::parse(res->body);
  } catch (const Json::exception& e) {
    throw std::runtime_error("POST " + ep.url + " returned invalid JSON: " + e.what());
  }
}

ModelResponse HttpModelClient::call(const ModelRequest& request) {
  return model_response_from_json(post_json(ep_, to_json(request)));
}

ScreenerVerdict HttpScreener::classify(const Sample& s) {
  const auto reply = post_json(ep_, Json{{"question", s.question}, {"answer", s.answer}});
  const auto label = reply.at("label").get<int>();
  if (label != 0 && label != 1) throw std::runtime_error("screener label must be 0 or 1");
  ScreenerVerdict v;
  v.label = label == 1 ? Label::Noisy : Label::Clean;
  return v;
}

std::vector<double> HttpEmbedder::embed(std::string_view text) {
  const auto reply = post_json(ep_, Json{{"text", text}});
  return reply.at("vector").get<std::vector<double>>();
}

std::string HttpAgentClient::complete(const std::vector<ChatMessage>& messages, double temperature,
                                      std::uint64_t seed) {
  Json msgs = Json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  const auto reply = post_json(ep_, Json{{"messages", msgs}, {"temperature", temperature}, {"seed", seed}});
  return reply.at("content").get<std::string>();
}

double HttpTrainerClient::train_and_evaluate(const TrainerRequest& request) {
  const auto reply = post_json(ep_, Json{{"dataset_location", request.dataset_location},
                                         {"base_model", request.base_model},
                                         {"epochs", request.epochs},
                                         {"validation_set", request.validation_set}});
  return reply.at("score").get<double>();
}

}  // namespace autodp
