#include "autodp/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "autodp/operator_config.hpp"
#include "autodp/quality.hpp"
#include "autodp/text.hpp"

namespace autodp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

std::string_view to_string(EvalMode m) { return m == EvalMode::Proxy ? "proxy" : "trainer"; }

EvalMode eval_mode_from_string(std::string_view s) {
  if (s == "proxy") return EvalMode::Proxy;
  if (s == "trainer") return EvalMode::Trainer;
  throw ConfigError("unknown evaluation mode \"" + std::string(s) + "\"");
}

void EvalConfig::validate() const {
  const double parts[] = {weights.thresholds, weights.completeness, weights.uniqueness, weights.adequacy};
  double sum = 0.0;
  for (double w : parts) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("proxy weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("proxy weights must sum to 1");
  if (trainer.epochs < 1) throw ConfigError("trainer.epochs must be at least 1");
}

Json EvalConfig::to_json() const {
  return Json{{"mode", to_string(mode)},
              {"trainer",
               {{"base_model", trainer.base_model},
                {"epochs", trainer.epochs},
                {"validation_set", trainer.validation_set}}},
              {"proxy_weights",
               {weights.thresholds, weights.completeness, weights.uniqueness, weights.adequacy}}};
}

EvalConfig EvalConfig::from_json(const Json& j) {
  EvalConfig c;
  try {
    if (j.contains("mode")) c.mode = eval_mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("trainer")) {
      const auto& t = j.at("trainer");
      c.trainer.base_model = t.value("base_model", c.trainer.base_model);
      c.trainer.epochs = t.value("epochs", c.trainer.epochs);
      c.trainer.validation_set = t.value("validation_set", c.trainer.validation_set);
    }
    if (j.contains("proxy_weights")) {
      const auto& w = j.at("proxy_weights");
      if (!w.is_array() || w.size() != 4) throw ConfigError("proxy_weights must be an array of four numbers");
      c.weights = {w[0].get<double>(), w[1].get<double>(), w[2].get<double>(), w[3].get<double>()};
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("eval config: ") + e.what());
  }
  c.validate();
  return c;
}

ProxyComponents proxy_components(const Dataset& d, const OperatorConfig& cfg) {
  ProxyComponents c{1.0, 1.0, 1.0, 1.0};
  const std::size_t n = d.size();
  if (n == 0) return c;

  std::size_t passing = 0;
  std::size_t complete = 0;
  double adequacy = 0.0;
  std::vector<std::string> stripped;
  stripped.reserve(n);
  for (const auto& s : d) {
    const auto t = sample_text(s);
    passing += check_thresholds(t, cfg).all();
    complete += !s.question.empty() && !s.answer.empty();
    adequacy += length_adequacy(text::token_count(t), cfg.token_range);
    stripped.push_back(text::strip_noise(t));
  }

  std::size_t dup_pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (stripped[i].empty()) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (stripped[j].empty()) continue;
      const auto& a = stripped[i].size() >= stripped[j].size() ? stripped[i] : stripped[j];
      const auto& b = stripped[i].size() >= stripped[j].size() ? stripped[j] : stripped[i];
      dup_pairs += a.find(b) != std::string::npos;
    }
  }
  const double total_pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;

  const auto dn = static_cast<double>(n);
  c.thresholds = static_cast<double>(passing) / dn;
  c.completeness = static_cast<double>(complete) / dn;
  c.uniqueness = total_pairs > 0 ? 1.0 - static_cast<double>(dup_pairs) / total_pairs : 1.0;
  c.adequacy = adequacy / dn;
  return c;
}

double proxy_score(const Dataset& d, const ProxyWeights& w, const OperatorConfig& cfg) {
  if (d.empty()) return 0.0;
  const auto c = proxy_components(d, cfg);
  const double s = w.thresholds * c.thresholds + w.completeness * c.completeness + w.uniqueness * c.uniqueness +
                   w.adequacy * c.adequacy;
  return std::clamp(s, 0.0, 1.0);
}

RunLog::RunLog(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open run log " + path.string());
}

void RunLog::append(Json record) {
  std::lock_guard lock(mu_);
  if (out_.is_open()) {
    out_ << record.dump() << '\n';
    out_.flush();
  }
  records_.push_back(std::move(record));
}

std::vector<Json> RunLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

EvalOutcome evaluate_strategy(const Strategy& f, const Dataset& base, EvalContext& ctx, std::size_t round) {
  EvalOutcome out;
  std::optional<Dataset> processed;

  auto t0 = Clock::now();
  try {
    if (ctx.exec == nullptr) throw std::invalid_argument("evaluation needs an execution context");
    if (f.empty()) {
      processed = base;
    } else if (ctx.cache != nullptr) {
      const auto before = ctx.cache->stats();
      processed = apply_with_reuse(f, base, *ctx.exec, *ctx.cache, round);
      const auto after = ctx.cache->stats();
      out.cache_hit = after.hits > before.hits;
      out.team_invocations = after.team_invocations - before.team_invocations;
    } else {
      processed = apply_strategy(f, base, *ctx.exec);
      out.team_invocations = f.size();
    }
  } catch (const std::exception& e) {
    out.error = std::string("processing failed: ") + e.what();
  }
  out.processing_seconds = seconds_since(t0);

  if (processed) {
    out.dataset_fingerprint = processed->fingerprint();
    out.dataset_size = processed->size();
    t0 = Clock::now();
    try {
      if (ctx.cfg.mode == EvalMode::Proxy) {
        out.score = proxy_score(*processed, ctx.cfg.weights, ctx.exec->cfg);
      } else {
        if (!ctx.trainer) throw std::runtime_error("trainer mode without a trainer client");
        std::filesystem::create_directories(ctx.work_dir);
        const auto path = ctx.work_dir / (out.dataset_fingerprint.hex() + ".jsonl");
        if (!std::filesystem::exists(path)) save_dataset(*processed, path);
        const double s = ctx.trainer->train_and_evaluate(
            {path.string(), ctx.cfg.trainer.base_model, ctx.cfg.trainer.epochs, ctx.cfg.trainer.validation_set});
        if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
          throw std::runtime_error("trainer returned score " + std::to_string(s) + " outside [0,1]");
        }
        out.score = s;
      }
    } catch (const std::exception& e) {
      out.score = kFailedScore;
      out.error = std::string("scoring failed: ") + e.what();
    }
    out.scoring_seconds = seconds_since(t0);
  }

  if (ctx.log != nullptr) {
    Json rec{{"event", "evaluation"},
             {"round", round},
             {"strategy", f.to_string()},
             {"score", out.ok() ? Json(out.score) : Json(nullptr)},
             {"dataset_fingerprint", processed ? out.dataset_fingerprint.hex() : std::string()},
             {"dataset_size", out.dataset_size},
             {"cache_hit", out.cache_hit},
             {"team_invocations", out.team_invocations},
             {"wall_seconds", out.processing_seconds + out.scoring_seconds}};
    if (!out.ok()) rec["error"] = out.error;
    ctx.log->append(std::move(rec));
  }
  return out;
}

}  // namespace autodp
