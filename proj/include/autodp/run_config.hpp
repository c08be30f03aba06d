#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "autodp/evaluation.hpp"
#include "autodp/model_client.hpp"
#include "autodp/operator_config.hpp"

namespace autodp {

/// Remote endpoints; an unset entry means the deterministic built-in default.
struct EndpointConfig {
  std::optional<std::string> agent;
  std::optional<std::string> embedder;
  std::optional<std::string> screener;
  std::optional<std::string> trainer;
  std::optional<std::string> optimizer;
  std::optional<std::string> generator;
  std::optional<std::string> scorer;
  std::string api_key;
  std::int64_t timeout_ms = 60000;
};

struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path run_dir;
  std::uint64_t seed = 0;
  double sampling_rate = 0.20;
  std::size_t initial_group_size = 4;
  std::size_t max_group_size = 6;
  std::size_t max_rounds = 5;
  double temperature = 0.6;
  std::size_t embedding_dim = 256;
  OperatorConfig operators;
  EvalConfig eval;
  EndpointConfig endpoints;
  RetryPolicy retry;
  /// Unset: a run-scoped cache under run_dir/cache, cleared at run start.
  std::optional<std::filesystem::path> cache_root;
  std::filesystem::path template_dir;

  /// Range and consistency checks; does not touch the filesystem.
  void validate() const;
  /// Snapshot written to the run directory. Credentials are left out.
  [[nodiscard]] Json to_json() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Parses a config document. Relative paths resolve against base_dir. Unknown keys are
/// rejected. Throws ConfigError.
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir);

/// Applies AUTODP_*_ENDPOINT, AUTODP_CACHE_ROOT and AUTODP_API_KEY overrides.
void apply_env_overrides(RunConfig& cfg, const EnvLookup& env);

/// Reads, parses, applies environment overrides and validates. Throws ConfigError.
RunConfig read_run_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

/// read_run_config, then checks that the dataset and template files exist. Throws ConfigError.
RunConfig load_run_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

}  // namespace autodp
