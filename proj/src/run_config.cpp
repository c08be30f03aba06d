#include "autodp/run_config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "autodp/agent.hpp"

namespace autodp {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kKnownKeys = {
    "dataset",     "run_dir",     "seed",      "sampling_rate", "initial_group_size", "max_group_size",
    "max_rounds",  "temperature", "embedding_dim", "operators",  "evaluation",         "endpoints",
    "cache_root",  "template_dir", "retry"};

const std::set<std::string> kEndpointKeys = {"agent",     "embedder", "screener", "trainer",
                                             "optimizer", "generator", "scorer",  "timeout_ms"};

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    try {
      out = it->get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("config key \"") + key + "\": " + e.what());
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::optional<std::string> endpoint_entry(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ConfigError(std::string("endpoints.") + key + " must be a URL string or null");
  return it->get<std::string>();
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str()); v != nullptr && *v != '\0') return std::string(v);
  return std::nullopt;
}

void RunConfig::validate() const {
  if (dataset.empty()) throw ConfigError("config needs a dataset path");
  if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) throw ConfigError("sampling_rate must lie in (0,1]");
  if (initial_group_size < 1) throw ConfigError("initial_group_size must be at least 1");
  if (max_group_size < initial_group_size) throw ConfigError("max_group_size must be >= initial_group_size");
  if (max_rounds < 1) throw ConfigError("max_rounds must be at least 1");
  if (!std::isfinite(temperature) || temperature < 0.0) throw ConfigError("temperature must be non-negative");
  if (embedding_dim < 2) throw ConfigError("embedding_dim must be at least 2");
  if (retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be at least 1");
  operators.validate();
  eval.validate();
  if (eval.mode == EvalMode::Trainer && !endpoints.trainer) {
    throw ConfigError("evaluation mode \"trainer\" needs endpoints.trainer");
  }
}

Json RunConfig::to_json() const {
  Json ep = Json::object();
  auto put = [&](const char* k, const std::optional<std::string>& v) { ep[k] = v ? Json(*v) : Json(nullptr); };
  put("agent", endpoints.agent);
  put("embedder", endpoints.embedder);
  put("screener", endpoints.screener);
  put("trainer", endpoints.trainer);
  put("optimizer", endpoints.optimizer);
  put("generator", endpoints.generator);
  put("scorer", endpoints.scorer);
  ep["timeout_ms"] = endpoints.timeout_ms;
  return Json{{"dataset", dataset.string()},
              {"run_dir", run_dir.string()},
              {"seed", seed},
              {"sampling_rate", sampling_rate},
              {"initial_group_size", initial_group_size},
              {"max_group_size", max_group_size},
              {"max_rounds", max_rounds},
              {"temperature", temperature},
              {"embedding_dim", embedding_dim},
              {"operators", operators.to_json()},
              {"evaluation", eval.to_json()},
              {"endpoints", ep},
              {"retry",
               {{"max_attempts", retry.max_attempts},
                {"base_delay_ms", retry.base_delay.count()},
                {"backoff_multiplier", retry.backoff_multiplier},
                {"request_budget", retry.request_budget}}},
              {"cache_root", cache_root ? Json(cache_root->string()) : Json(nullptr)},
              {"template_dir", template_dir.string()}};
}

RunConfig run_config_from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!kKnownKeys.contains(k)) throw ConfigError("unknown config key \"" + k + "\"");
  }
  RunConfig c;
  std::string s;
  read(j, "dataset", s);
  if (!s.empty()) c.dataset = resolve(base_dir, s);
  s.clear();
  read(j, "run_dir", s);
  c.run_dir = s.empty() ? base_dir / "runs" / "latest" : resolve(base_dir, s);
  read(j, "seed", c.seed);
  read(j, "sampling_rate", c.sampling_rate);
  read(j, "initial_group_size", c.initial_group_size);
  read(j, "max_group_size", c.max_group_size);
  read(j, "max_rounds", c.max_rounds);
  read(j, "temperature", c.temperature);
  read(j, "embedding_dim", c.embedding_dim);
  if (j.contains("operators")) c.operators = OperatorConfig::from_json(j.at("operators"));
  if (j.contains("evaluation")) c.eval = EvalConfig::from_json(j.at("evaluation"));
  if (auto it = j.find("endpoints"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ConfigError("endpoints must be an object");
    for (const auto& [k, _] : it->items()) {
      if (!kEndpointKeys.contains(k)) throw ConfigError("unknown endpoint \"" + k + "\"");
    }
    c.endpoints.agent = endpoint_entry(*it, "agent");
    c.endpoints.embedder = endpoint_entry(*it, "embedder");
    c.endpoints.screener = endpoint_entry(*it, "screener");
    c.endpoints.trainer = endpoint_entry(*it, "trainer");
    c.endpoints.optimizer = endpoint_entry(*it, "optimizer");
    c.endpoints.generator = endpoint_entry(*it, "generator");
    c.endpoints.scorer = endpoint_entry(*it, "scorer");
    read(*it, "timeout_ms", c.endpoints.timeout_ms);
  }
  if (auto it = j.find("retry"); it != j.end() && !it->is_null()) {
    std::int64_t delay_ms = c.retry.base_delay.count();
    read(*it, "max_attempts", c.retry.max_attempts);
    read(*it, "base_delay_ms", delay_ms);
    read(*it, "backoff_multiplier", c.retry.backoff_multiplier);
    read(*it, "request_budget", c.retry.request_budget);
    c.retry.base_delay = std::chrono::milliseconds(delay_ms);
  }
  s.clear();
  read(j, "cache_root", s);
  if (!s.empty()) c.cache_root = resolve(base_dir, s);
  s.clear();
  read(j, "template_dir", s);
  c.template_dir = s.empty() ? default_template_dir() : resolve(base_dir, s);
  return c;
}

void apply_env_overrides(RunConfig& cfg, const EnvLookup& env) {
  auto over = [&](const char* name, std::optional<std::string>& slot) {
    if (auto v = env(name)) slot = *v;
  };
  over("AUTODP_AGENT_ENDPOINT", cfg.endpoints.agent);
  over("AUTODP_EMBEDDER_ENDPOINT", cfg.endpoints.embedder);
  over("AUTODP_SCREENER_ENDPOINT", cfg.endpoints.screener);
  over("AUTODP_TRAINER_ENDPOINT", cfg.endpoints.trainer);
  over("AUTODP_OPTIMIZER_ENDPOINT", cfg.endpoints.optimizer);
  over("AUTODP_GENERATOR_ENDPOINT", cfg.endpoints.generator);
  over("AUTODP_SCORER_ENDPOINT", cfg.endpoints.scorer);
  if (auto v = env("AUTODP_CACHE_ROOT")) cfg.cache_root = fs::path(*v);
  if (auto v = env("AUTODP_API_KEY")) cfg.endpoints.api_key = *v;
}

RunConfig read_run_config(const fs::path& path, const EnvLookup& env) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  auto cfg = run_config_from_json(j, fs::absolute(path).parent_path());
  apply_env_overrides(cfg, env);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const fs::path& path, const EnvLookup& env) {
  auto cfg = read_run_config(path, env);
  if (!fs::is_regular_file(cfg.dataset)) throw ConfigError("dataset " + cfg.dataset.string() + " does not exist");
  for (const char* name : {"initial_prompt.txt", "iteration_prompt.txt"}) {
    if (!fs::is_regular_file(cfg.template_dir / name)) {
      throw ConfigError("prompt template " + (cfg.template_dir / name).string() + " does not exist");
    }
  }
  return cfg;
}

}  // namespace autodp
