#include "autodp/search.hpp"

#include <chrono>
#include <cmath>
#include <map>

#include <spdlog/spdlog.h>

namespace autodp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string_view decision_name(AgentDecision::Kind k) {
  switch (k) {
    case AgentDecision::Kind::ProposeGroup: return "propose";
    case AgentDecision::Kind::BestTeam: return "best_team";
    case AgentDecision::Kind::NoProcessing: return "no_processing";
  }
  return "propose";
}

constexpr const char* kReformatRequest =
    "Your reply did not contain any combination I could read. Answer again using only the "
    "###Combination[n]### block format, one bullet line of comma-separated team names per block.";

}  // namespace

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::BestTeam: return "best_team";
    case Termination::NoProcessing: return "no_processing";
    case Termination::Budget: return "budget";
  }
  return "budget";
}

BestPick argmax_relative(const std::vector<Round>& rounds, double baseline) {
  BestPick best{Strategy{}, 0.0, baseline};
  for (const auto& round : rounds) {
    for (std::size_t k = 0; k < round.strategies.size(); ++k) {
      if (round.relative_scores[k] > best.relative) {
        best = {round.strategies[k], round.relative_scores[k], round.scores[k]};
      }
    }
  }
  return best;
}

SearchResult run_search(const Dataset& base, const SearchConfig& cfg, const SearchClients& clients) {
  if (!clients.agent || !clients.evaluator || !clients.screener || !clients.embedder) {
    throw std::invalid_argument("run_search needs agent, evaluator, screener and embedder");
  }
  if (cfg.max_rounds == 0) throw std::invalid_argument("max_rounds must be positive");
  SearchResult result;
  auto log = [&](Json rec) {
    if (clients.log) clients.log->append(std::move(rec));
  };

  auto screened = [&] { return clients.screening_seconds ? clients.screening_seconds() : 0.0; };
  const double screen_start = screened();
  auto t0 = Clock::now();
  auto sampled = stratified_sample(base, cfg.sampling_rate, *clients.screener, *clients.embedder);
  result.times.sampling = seconds_since(t0) - (screened() - screen_start);
  result.sample = sampled.sample;
  result.sample_clean = sampled.clean_selected;
  result.sample_noisy = sampled.noisy_selected;
  log({{"event", "sample"},
       {"size", result.sample.size()},
       {"clean", result.sample_clean},
       {"noisy", result.sample_noisy},
       {"fingerprint", result.sample.fingerprint().hex()}});

  std::map<Strategy, double> known;
  auto evaluate = [&](const Strategy& f, std::size_t round) {
    const double before = screened();
    auto out = clients.evaluator->evaluate(f, result.sample, round);
    ++result.evaluations;
    result.times.processing += out.processing_seconds - (screened() - before);
    result.times.evaluation += out.scoring_seconds;
    if (!out.ok()) spdlog::warn("evaluation of {} failed: {}", f.to_string(), out.error);
    known[f] = out.score;
    return out.score;
  };

  const double r0 = evaluate(Strategy{}, 0);
  if (!std::isfinite(r0)) throw SearchError("baseline evaluation failed");
  result.baseline_score = r0;

  std::vector<ChatMessage> messages{{"user", build_initial_prompt(cfg.templates, cfg.initial_group_size)}};
  std::optional<AgentDecision> terminal;

  for (std::size_t turn = 1; turn <= cfg.max_rounds; ++turn) {
    t0 = Clock::now();
    std::string reply = clients.agent->complete(messages, cfg.temperature, cfg.seed);
    AgentDecision decision;
    try {
      decision = parse_agent_response(reply, cfg.max_group_size);
    } catch (const AgentParseError& e) {
      spdlog::warn("round {}: {}; asking the agent again", turn, e.what());
      ++result.parse_retries;
      messages.push_back({"assistant", reply});
      messages.push_back({"user", kReformatRequest});
      reply = clients.agent->complete(messages, cfg.temperature, cfg.seed);
      try {
        decision = parse_agent_response(reply, cfg.max_group_size);
      } catch (const AgentParseError& again) {
        throw SearchError("round " + std::to_string(turn) + ": agent reply unparseable after retry: " + again.what());
      }
    }
    result.times.agent += seconds_since(t0);
    messages.push_back({"assistant", reply});
    result.rounds_executed = turn;

    Json group = Json::array();
    for (const auto& f : decision.group) group.push_back(f.to_string());
    log({{"event", "agent_turn"},
         {"round", turn},
         {"decision", decision_name(decision.kind)},
         {"group", group},
         {"best", decision.best.to_string()}});

    if (decision.kind != AgentDecision::Kind::ProposeGroup) {
      terminal = decision;
      break;
    }

    Round round;
    round.index = turn;
    for (const auto& f : decision.group) {
      auto it = known.find(f);
      const bool reused = it != known.end();
      const double raw = reused ? it->second : evaluate(f, turn);
      round.strategies.push_back(f);
      round.scores.push_back(raw);
      round.relative_scores.push_back(std::isfinite(raw) ? compute_feedback(raw, r0) : kFailedScore);
      round.reused.push_back(reused);
    }
    result.rounds.push_back(std::move(round));
    if (turn < cfg.max_rounds) {
      messages.push_back(
          {"user", build_iteration_prompt(cfg.templates, result.rounds, turn, cfg.max_group_size)});
    }
  }

  if (terminal && terminal->kind == AgentDecision::Kind::NoProcessing) {
    result.termination = Termination::NoProcessing;
    result.best_strategy = Strategy{};
  } else if (terminal) {
    result.termination = Termination::BestTeam;
    result.best_strategy = terminal->best;
  } else {
    result.termination = Termination::Budget;
    result.best_strategy = argmax_relative(result.rounds, r0).strategy;
  }

  auto it = known.find(result.best_strategy);
  result.best_score = it != known.end() ? it->second : evaluate(result.best_strategy, result.rounds_executed);
  result.best_relative_score =
      std::isfinite(result.best_score) ? compute_feedback(result.best_score, r0) : kFailedScore;
  result.times.screening = screened() - screen_start;
  log({{"event", "result"},
       {"best", result.best_strategy.to_string()},
       {"termination", to_string(result.termination)},
       {"rounds", result.rounds_executed}});
  return result;
}

}  // namespace autodp
