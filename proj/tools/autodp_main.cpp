#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "autodp/orchestrator.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  using namespace autodp;

  CLI::App app{"autodp: agent-driven search over data processing strategies"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging on stderr");

  auto* run = app.add_subcommand("run", "Search for the best strategy and process the full dataset");
  fs::path run_config;
  std::optional<fs::path> run_dir;
  run->add_option("config", run_config, "Run config (JSON)")->required();
  run->add_option("--run-dir", run_dir, "Override the config's run directory");

  auto* enumerate = app.add_subcommand("enumerate", "Print every strategy, one per line");

  auto* apply = app.add_subcommand("apply", "Apply one strategy to a dataset");
  ApplyOptions apply_opts;
  apply->add_option("strategy", apply_opts.strategy, "e.g. \"Cleaning -> Selection\" or NONE")->required();
  apply->add_option("dataset", apply_opts.dataset, "Input JSONL")->required()->check(CLI::ExistingFile);
  apply->add_option("-o,--out", apply_opts.out, "Output JSONL")->required();
  apply->add_option("-c,--config", apply_opts.config, "Run config for operator settings and endpoints");
  apply->add_option("--cache-root", apply_opts.cache_root, "Reuse and store prefixes in this cache");

  auto* sample = app.add_subcommand("sample", "Draw the stratified, diversity-aware sample");
  SampleOptions sample_opts;
  sample->add_option("dataset", sample_opts.dataset, "Input JSONL")->required()->check(CLI::ExistingFile);
  sample->add_option("-o,--out", sample_opts.out, "Output JSONL")->required();
  sample->add_option("-r,--rate", sample_opts.rate, "Sampling rate in (0,1]");
  sample->add_option("-c,--config", sample_opts.config, "Run config");

  auto* cache = app.add_subcommand("cache", "Inspect or maintain a strategy cache");
  cache->require_subcommand(1);
  fs::path cache_root;
  PruneOptions prune_opts;
  auto* stats = cache->add_subcommand("stats", "Entry counts and sizes");
  stats->add_option("root", cache_root)->required();
  auto* prune = cache->add_subcommand("prune", "Remove entries, oldest first");
  prune->add_option("root", cache_root)->required();
  prune->add_option("--max-entries", prune_opts.max_entries);
  prune->add_option("--max-age", prune_opts.max_age_seconds, "Seconds");
  prune->add_option("--max-bytes", prune_opts.max_bytes);
  auto* verify = cache->add_subcommand("verify", "Recompute stored fingerprints");
  verify->add_option("root", cache_root)->required();

  auto* report = app.add_subcommand("report", "Summarize a run directory");
  fs::path report_dir;
  report->add_option("run_dir", report_dir)->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }
  spdlog::set_default_logger(spdlog::stderr_color_mt("autodp"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  if (*run) return cmd_run(run_config, run_dir, std::cout, std::cerr);
  if (*enumerate) return cmd_enumerate(std::cout);
  if (*apply) return cmd_apply(apply_opts, std::cout, std::cerr);
  if (*sample) return cmd_sample(sample_opts, std::cout, std::cerr);
  if (*stats) return cmd_cache_stats(cache_root, std::cout, std::cerr);
  if (*prune) return cmd_cache_prune(cache_root, prune_opts, std::cout, std::cerr);
  if (*verify) return cmd_cache_verify(cache_root, std::cout, std::cerr);
  return cmd_report(report_dir, std::cout, std::cerr);
}
