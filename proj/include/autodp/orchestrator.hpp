#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "autodp/agent.hpp"
#include "autodp/dps.hpp"
#include "autodp/evaluation.hpp"
#include "autodp/operators.hpp"
#include "autodp/run_config.hpp"
#include "autodp/search.hpp"
#include "autodp/strategy_cache.hpp"

namespace autodp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Clients for one run: remote ones where an endpoint is configured, deterministic defaults otherwise.
struct RunClients {
  ExecutionContext exec;
  std::shared_ptr<TimedScreener> screener;
  std::shared_ptr<EmbeddingClient> embedder;
  std::shared_ptr<AgentClient> agent;
  std::shared_ptr<TrainerClient> trainer;

  [[nodiscard]] Json identities() const;
};

RunClients make_clients(const RunConfig& cfg);

/// Run directory artifact names.
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kTimingFile = "timing.json";
inline constexpr const char* kRunLogFile = "run_log.jsonl";
inline constexpr const char* kProcessedFile = "processed.jsonl";
inline constexpr const char* kConfigSnapshotFile = "config.json";

/// Executes a full search and writes the run directory. run_dir overrides the config's.
int cmd_run(const std::filesystem::path& config, const std::optional<std::filesystem::path>& run_dir,
            std::ostream& out, std::ostream& err, const EnvLookup& env = process_env);

int cmd_enumerate(std::ostream& out);

struct ApplyOptions {
  std::string strategy;
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;
  /// Falls back to AUTODP_CACHE_ROOT, then the config's cache_root; without any, no cache is used.
  std::optional<std::filesystem::path> cache_root;
};
int cmd_apply(const ApplyOptions& opts, std::ostream& out, std::ostream& err, const EnvLookup& env = process_env);

struct SampleOptions {
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::optional<double> rate;
  std::optional<std::filesystem::path> config;
};
int cmd_sample(const SampleOptions& opts, std::ostream& out, std::ostream& err, const EnvLookup& env = process_env);

int cmd_cache_stats(const std::filesystem::path& root, std::ostream& out, std::ostream& err);
int cmd_cache_prune(const std::filesystem::path& root, const PruneOptions& opts, std::ostream& out,
                    std::ostream& err);
/// Exit status 1 when any entry mismatches.
int cmd_cache_verify(const std::filesystem::path& root, std::ostream& out, std::ostream& err);

/// Prints a readable summary of a run directory's report.
int cmd_report(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err);

/// The deterministic part of a run's results.
Json build_report(const SearchResult& result, const Dataset& base, const Dataset& processed, const RunConfig& cfg,
                  const RunClients& clients, const CacheStats& cache);

}  // namespace autodp
