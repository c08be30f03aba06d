#include <doctest.h>
#include <httplib.h>

#include <mutex>
#include <thread>

#include "autodp/http_clients.hpp"
#include "support.hpp"

using namespace autodp;
using namespace autodp::testing;

namespace {

/// Local server on an ephemeral port; records each request body and auth header.
class FakeRemote {
 public:
  FakeRemote() {
    server_.Post("/screen", [this](const httplib::Request& req, httplib::Response& res) {
      const auto j = record(req);
      const bool noisy = j.at("answer").get<std::string>().empty();
      res.set_content(Json{{"label", noisy ? 1 : 0}}.dump(), "application/json");
    });
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      const auto j = record(req);
      const auto n = static_cast<double>(j.at("text").get<std::string>().size());
      res.set_content(Json{{"vector", {n, 1.0}}}.dump(), "application/json");
    });
    server_.Post("/agent", [this](const httplib::Request& req, httplib::Response& res) {
      const auto j = record(req);
      res.set_content(Json{{"content", "turns=" + std::to_string(j.at("messages").size())}}.dump(),
                      "application/json");
    });
    server_.Post("/train", [this](const httplib::Request& req, httplib::Response& res) {
      record(req);
      res.set_content(R"({"score": 0.42})", "application/json");
    });
    server_.Post("/model", [this](const httplib::Request& req, httplib::Response& res) {
      const auto j = record(req);
      res.set_content(Json{{"status", "ok"}, {"text", "ECHO " + j.at("sample").at("question").get<std::string>()}}
                          .dump(),
                      "application/json");
    });
    server_.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
      res.status = 503;
      res.set_content("busy", "text/plain");
    });
    server_.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json", "text/plain");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeRemote() {
    server_.stop();
    thread_.join();
  }

  Endpoint at(const std::string& path, std::string key = {}) const {
    return Endpoint{"http://127.0.0.1:" + std::to_string(port_) + path, std::move(key),
                    std::chrono::milliseconds(5000)};
  }

  std::vector<Json> bodies;
  std::vector<std::string> auth;

 private:
  Json record(const httplib::Request& req) {
    std::lock_guard<std::mutex> lock(mu_);
    auto j = Json::parse(req.body);
    bodies.push_back(j);
    auth.push_back(req.get_header_value("Authorization"));
    return j;
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mu_;
};

}  // namespace

TEST_CASE("screener, embedder, agent and trainer over http") {
  FakeRemote remote;

  HttpScreener screener(remote.at("/screen", "k123"));
  CHECK(screener.classify(sample("a", "q", "")).noisy());
  CHECK_FALSE(screener.classify(sample("b", "q", "fine")).noisy());
  CHECK(remote.auth.back() == "Bearer k123");
  CHECK(remote.bodies.back() == Json{{"question", "q"}, {"answer", "fine"}});

  HttpEmbedder embedder(remote.at("/embed"));
  CHECK(embedder.embed("abcd") == std::vector<double>{4.0, 1.0});
  CHECK(remote.auth.back().empty());

  HttpAgentClient agent(remote.at("/agent"));
  CHECK(agent.complete({{"user", "hi"}, {"assistant", "yo"}, {"user", "again"}}, 0.6, 9) == "turns=3");
  CHECK(remote.bodies.back()["seed"] == 9);
  CHECK(remote.bodies.back()["messages"][1]["role"] == "assistant");

  HttpTrainerClient trainer(remote.at("/train"));
  TrainerRequest req{"/tmp/d.jsonl", "base-7b", 2, "val"};
  CHECK(trainer.train_and_evaluate(req) == 0.42);
  CHECK(remote.bodies.back()["epochs"] == 2);
  CHECK(remote.bodies.back()["base_model"] == "base-7b");
}

TEST_CASE("model client uses the shared wire form") {
  FakeRemote remote;
  HttpModelClient client(ClientRole::Optimizer, remote.at("/model"));
  ModelRequest r;
  r.mode = "rewrite";
  r.question = "why?";
  r.answer = "because";
  const auto out = client.call(r);
  CHECK(out.ok);
  CHECK(out.text == "ECHO why?");
  CHECK(model_request_from_json(remote.bodies.back()) == r);
}

TEST_CASE("transport failures surface as errors") {
  FakeRemote remote;
  CHECK_THROWS_AS(post_json(remote.at("/broken"), Json::object()), std::runtime_error);
  CHECK_THROWS_AS(post_json(remote.at("/garbage"), Json::object()), std::runtime_error);
  CHECK_THROWS_AS(post_json(remote.at("/missing"), Json::object()), std::runtime_error);
  CHECK_THROWS_AS(post_json(Endpoint{"https://example.com/x", {}, {}}, Json::object()), std::runtime_error);
  CHECK_THROWS_AS(post_json(Endpoint{"not a url", {}, {}}, Json::object()), std::runtime_error);

  // A broken remote screener hands over to the heuristic one.
  auto heuristic = std::make_shared<HeuristicScreener>(OperatorConfig{});
  FallbackScreener fb(std::make_shared<HttpScreener>(remote.at("/broken")), heuristic);
  const auto v = fb.classify(sample("a", "What is the capital city of France today?", ""));
  CHECK(v.fallback);
  CHECK(v.noisy());
}
