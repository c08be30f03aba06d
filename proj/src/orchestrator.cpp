#include "autodp/orchestrator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include <spdlog/spdlog.h>

#include "autodp/http_clients.hpp"
#include "autodp/quality.hpp"

namespace autodp {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Json score_json(double s) { return std::isfinite(s) ? Json(s) : Json(nullptr); }

void write_json(const fs::path& p, const Json& j) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write error on " + tmp.string());
  }
  fs::rename(tmp, p);
}

Endpoint endpoint(const RunConfig& cfg, const std::string& url) {
  return {url, cfg.endpoints.api_key, std::chrono::milliseconds(cfg.endpoints.timeout_ms)};
}

std::shared_ptr<ModelClient> model_client(const RunConfig& cfg, const std::optional<std::string>& url,
                                          ClientRole role, std::shared_ptr<ModelClient> fallback) {
  if (!url) return fallback;
  return std::make_shared<RetryingModelClient>(std::make_shared<HttpModelClient>(role, endpoint(cfg, *url)),
                                               cfg.retry);
}

/// Config for commands that take --config optionally: defaults plus environment overrides.
RunConfig optional_config(const std::optional<fs::path>& path, const EnvLookup& env) {
  if (path) return read_run_config(*path, env);
  RunConfig cfg;
  cfg.template_dir = default_template_dir();
  apply_env_overrides(cfg, env);
  return cfg;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

Json RunClients::identities() const {
  return Json{{"screener", screener->identity()},
              {"embedder", embedder->identity()},
              {"agent", agent->identity()},
              {"optimizer", exec.optimizer->identity()},
              {"generator", exec.generator->identity()},
              {"scorer", exec.scorer->identity()},
              {"trainer", trainer ? Json(trainer->identity()) : Json(nullptr)}};
}

RunClients make_clients(const RunConfig& cfg) {
  RunClients c;
  c.exec = ExecutionContext::with_defaults(cfg.operators, cfg.seed);
  c.exec.counter = std::make_shared<TeamInvocationCounter>();
  c.exec.optimizer = model_client(cfg, cfg.endpoints.optimizer, ClientRole::Optimizer, c.exec.optimizer);
  c.exec.generator = model_client(cfg, cfg.endpoints.generator, ClientRole::Generator, c.exec.generator);
  c.exec.scorer = model_client(cfg, cfg.endpoints.scorer, ClientRole::Scorer, c.exec.scorer);

  std::shared_ptr<Screener> screener = std::make_shared<HeuristicScreener>(cfg.operators);
  if (cfg.endpoints.screener) {
    screener = std::make_shared<FallbackScreener>(
        std::make_shared<HttpScreener>(endpoint(cfg, *cfg.endpoints.screener)), screener);
  }
  c.screener = std::make_shared<TimedScreener>(std::make_shared<CachingScreener>(screener));
  c.exec.screener = c.screener;

  if (cfg.endpoints.embedder) {
    c.embedder = std::make_shared<HttpEmbedder>(endpoint(cfg, *cfg.endpoints.embedder));
  } else {
    c.embedder = std::make_shared<HashingEmbedder>(cfg.embedding_dim);
  }
  if (cfg.endpoints.agent) {
    c.agent = std::make_shared<HttpAgentClient>(endpoint(cfg, *cfg.endpoints.agent));
  } else {
    c.agent = std::make_shared<HillClimbingAgent>(cfg.initial_group_size);
  }
  if (cfg.endpoints.trainer) c.trainer = std::make_shared<HttpTrainerClient>(endpoint(cfg, *cfg.endpoints.trainer));
  return c;
}

Json build_report(const SearchResult& result, const Dataset& base, const Dataset& processed, const RunConfig& cfg,
                  const RunClients& clients, const CacheStats& cache) {
  Json rounds = Json::array();
  for (const auto& r : result.rounds) {
    Json group = Json::array();
    for (std::size_t k = 0; k < r.strategies.size(); ++k) {
      group.push_back({{"strategy", r.strategies[k].to_string()},
                       {"score", score_json(r.scores[k])},
                       {"relative_score", score_json(r.relative_scores[k])},
                       {"reused", static_cast<bool>(r.reused[k])}});
    }
    rounds.push_back({{"round", r.index}, {"strategies", group}});
  }
  Json per_team = Json::object();
  for (Team t : kAllTeams) {
    per_team[std::string(team_name(t))] = clients.exec.counter->per_team[static_cast<std::size_t>(t)].load();
  }
  return Json{
      {"dataset", {{"fingerprint", base.fingerprint().hex()}, {"size", base.size()}}},
      {"seed", cfg.seed},
      {"operator_config_digest", cfg.operators.digest().hex()},
      {"evaluation_mode", to_string(cfg.eval.mode)},
      {"sample",
       {{"rate", cfg.sampling_rate},
        {"size", result.sample.size()},
        {"clean", result.sample_clean},
        {"noisy", result.sample_noisy},
        {"fingerprint", result.sample.fingerprint().hex()}}},
      {"baseline", {{"strategy", Strategy{}.to_string()}, {"score", result.baseline_score}}},
      {"rounds", rounds},
      {"best",
       {{"strategy", result.best_strategy.to_string()},
        {"score", score_json(result.best_score)},
        {"relative_score", score_json(result.best_relative_score)}}},
      {"termination", to_string(result.termination)},
      {"rounds_executed", result.rounds_executed},
      {"parse_retries", result.parse_retries},
      {"evaluations", result.evaluations},
      {"cache", cache.to_json()},
      {"team_invocations", {{"total", clients.exec.counter->total()}, {"per_team", per_team}}},
      {"processed", {{"fingerprint", processed.fingerprint().hex()}, {"size", processed.size()}}},
      {"clients", clients.identities()},
      {"notes",
       {"Cached prefixes are reused only under the same operator config and seed; reuse assumes every "
        "operator is deterministic for a given seed."}}};
}

int cmd_run(const fs::path& config, const std::optional<fs::path>& run_dir, std::ostream& out, std::ostream& err,
            const EnvLookup& env) {
  return guarded(err, [&] {
    const auto t_start = Clock::now();
    RunConfig cfg = load_run_config(config, env);
    if (run_dir) cfg.run_dir = fs::absolute(*run_dir);
    fs::create_directories(cfg.run_dir);
    write_json(cfg.run_dir / kConfigSnapshotFile, cfg.to_json());

    auto t0 = Clock::now();
    const Dataset base = load_dataset(cfg.dataset);
    const double loading = seconds_since(t0);

    fs::path cache_root = cfg.cache_root.value_or(cfg.run_dir / "cache");
    if (!cfg.cache_root) fs::remove_all(cache_root);

    RunClients clients = make_clients(cfg);
    StrategyCache cache(cache_root, CacheScope::of(clients.exec));
    RunLog log(cfg.run_dir / kRunLogFile);
    PipelineEvaluator evaluator(EvalContext{cfg.eval, &clients.exec, &cache, clients.trainer, &log,
                                            cfg.run_dir / "trainer_data"});

    SearchConfig scfg;
    scfg.sampling_rate = cfg.sampling_rate;
    scfg.initial_group_size = cfg.initial_group_size;
    scfg.max_group_size = cfg.max_group_size;
    scfg.max_rounds = cfg.max_rounds;
    scfg.temperature = cfg.temperature;
    scfg.seed = cfg.seed;
    scfg.templates = PromptTemplates::load(cfg.template_dir);

    SearchClients sc;
    sc.agent = clients.agent.get();
    sc.evaluator = &evaluator;
    sc.screener = clients.screener.get();
    sc.embedder = clients.embedder.get();
    sc.log = &log;
    sc.screening_seconds = [s = clients.screener] { return s->seconds(); };
    const SearchResult result = run_search(base, scfg, sc);

    const double screened_before = clients.screener->seconds();
    t0 = Clock::now();
    const Dataset processed =
        apply_with_reuse(result.best_strategy, base, clients.exec, cache, result.rounds_executed + 1);
    const double final_screening = clients.screener->seconds() - screened_before;
    const double final_processing = seconds_since(t0) - final_screening;
    save_dataset(processed, cfg.run_dir / kProcessedFile);
    log.append({{"event", "final_processing"},
                {"strategy", result.best_strategy.to_string()},
                {"fingerprint", processed.fingerprint().hex()},
                {"size", processed.size()}});

    write_json(cfg.run_dir / kReportFile, build_report(result, base, processed, cfg, clients, cache.stats()));
    const double total = seconds_since(t_start);
    write_json(cfg.run_dir / kTimingFile,
               Json{{"loading", loading},
                    {"sampling", result.times.sampling},
                    {"screening", result.times.screening + final_screening},
                    {"agent", result.times.agent},
                    {"processing", result.times.processing},
                    {"evaluation", result.times.evaluation},
                    {"final_processing", final_processing},
                    {"total", total}});

    out << "best strategy: " << result.best_strategy.to_string() << " (" << to_string(result.termination)
        << " after " << result.rounds_executed << " round" << (result.rounds_executed == 1 ? "" : "s") << ")\n"
        << "report: " << (cfg.run_dir / kReportFile).string() << '\n';
    return kExitOk;
  });
}

int cmd_enumerate(std::ostream& out) {
  for (const auto& f : enumerate_space()) out << f.to_string() << '\n';
  return kExitOk;
}

int cmd_apply(const ApplyOptions& opts, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  return guarded(err, [&] {
    RunConfig cfg = optional_config(opts.config, env);
    const Strategy f = parse_strategy(opts.strategy);
    const Dataset d = load_dataset(opts.dataset);
    if (opts.out.has_parent_path()) fs::create_directories(opts.out.parent_path());

    if (f.empty()) {
      // Copy rather than re-serialize so the output is byte-identical to the input.
      fs::copy_file(opts.dataset, opts.out, fs::copy_options::overwrite_existing);
      out << "NONE: copied " << d.size() << " samples\n";
      return kExitOk;
    }

    RunClients clients = make_clients(cfg);
    const auto root = opts.cache_root ? opts.cache_root : cfg.cache_root;
    Dataset result;
    if (root) {
      StrategyCache cache(*root, CacheScope::of(clients.exec));
      result = apply_with_reuse(f, d, clients.exec, cache);
      const auto s = cache.stats();
      out << "cache: " << (s.hits ? "hit" : "miss") << ", " << s.team_invocations_saved << " team(s) reused\n";
    } else {
      result = apply_strategy(f, d, clients.exec);
    }
    save_dataset(result, opts.out);
    out << f.to_string() << ": " << d.size() << " -> " << result.size() << " samples\n";
    return kExitOk;
  });
}

int cmd_sample(const SampleOptions& opts, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  return guarded(err, [&] {
    RunConfig cfg = optional_config(opts.config, env);
    const double rate = opts.rate.value_or(cfg.sampling_rate);
    if (!(rate > 0.0 && rate <= 1.0)) throw ConfigError("sampling rate must lie in (0,1]");
    const Dataset d = load_dataset(opts.dataset);
    RunClients clients = make_clients(cfg);
    const auto r = stratified_sample(d, rate, *clients.screener, *clients.embedder);
    if (opts.out.has_parent_path()) fs::create_directories(opts.out.parent_path());
    save_dataset(r.sample, opts.out);
    out << "sampled " << r.sample.size() << " of " << d.size() << " samples (" << r.clean_selected << " clean, "
        << r.noisy_selected << " noisy)\n";
    return kExitOk;
  });
}

int cmd_cache_stats(const fs::path& root, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!fs::is_directory(root)) throw std::runtime_error("no cache at " + root.string());
    StrategyCache cache(root, {}, StrategyCache::Mode::ReadOnly);
    std::size_t bytes = 0;
    std::size_t samples = 0;
    std::set<std::string> bases;
    for (const auto& e : cache.entries()) {
      bytes += e.bytes;
      samples += e.samples;
      bases.insert(e.base_fingerprint.hex());
    }
    out << Json{{"root", root.string()},
                {"entries", cache.stats().entries},
                {"bytes", bytes},
                {"samples", samples},
                {"base_datasets", bases.size()}}
                   .dump(2)
        << '\n';
    return kExitOk;
  });
}

int cmd_cache_prune(const fs::path& root, const PruneOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!fs::is_directory(root)) throw std::runtime_error("no cache at " + root.string());
    StrategyCache cache(root, {});
    const auto now =
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
    const auto removed = cache.prune(opts, now);
    out << "removed " << removed << " entr" << (removed == 1 ? "y" : "ies") << ", " << cache.stats().entries
        << " left\n";
    return kExitOk;
  });
}

int cmd_cache_verify(const fs::path& root, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!fs::is_directory(root)) throw std::runtime_error("no cache at " + root.string());
    StrategyCache cache(root, {}, StrategyCache::Mode::ReadOnly);
    const auto report = cache.verify();
    for (const auto& [id, key] : report.mismatches) out << "mismatch " << id << ' ' << key << '\n';
    out << "checked " << report.checked << " entries, " << report.mismatches.size() << " mismatch"
        << (report.mismatches.size() == 1 ? "" : "es") << '\n';
    return report.mismatches.empty() ? kExitOk : kExitFailure;
  });
}

int cmd_report(const fs::path& run_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream in(run_dir / kReportFile, std::ios::binary);
    if (!in) throw std::runtime_error("no report in " + run_dir.string());
    const Json r = Json::parse(in);
    auto fmt_score = [](const Json& s) { return s.is_null() ? std::string("failed") : format_score(s.get<double>()); };

    out << "dataset      " << r["dataset"]["size"] << " samples, fingerprint "
        << r["dataset"]["fingerprint"].get<std::string>().substr(0, 16) << "\n";
    out << "sample       " << r["sample"]["size"] << " samples (" << r["sample"]["clean"] << " clean, "
        << r["sample"]["noisy"] << " noisy)\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", r["baseline"]["score"].get<double>());
    out << "baseline     " << buf << "\n";
    for (const auto& round : r["rounds"]) {
      out << "round " << round["round"] << "\n";
      for (const auto& e : round["strategies"]) {
        std::snprintf(buf, sizeof buf, "  %-52s", e["strategy"].get<std::string>().c_str());
        out << buf << fmt_score(e["relative_score"]) << (e["reused"].get<bool>() ? "  (reused)" : "") << "\n";
      }
    }
    out << "best         " << r["best"]["strategy"].get<std::string>() << " "
        << fmt_score(r["best"]["relative_score"]) << "\n";
    out << "termination  " << r["termination"].get<std::string>() << " after " << r["rounds_executed"]
        << " round(s)\n";
    const auto& c = r["cache"];
    out << "cache        " << c["entries"] << " entries, " << c["hits"] << " hits, " << c["team_invocations_saved"]
        << " team invocations saved, " << c["team_invocations"] << " performed\n";
    return kExitOk;
  });
}

}  // namespace autodp
