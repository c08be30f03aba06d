#include "autodp/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#ifndef AUTODP_TEMPLATE_DIR
#define AUTODP_TEMPLATE_DIR "templates"
#endif

namespace autodp {

namespace {

constexpr std::string_view kBlockOpen = "###Combination[";
constexpr std::string_view kBlockClose = "]###";
constexpr std::string_view kScoreLabel = "Feedback score:";

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read prompt template " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Block {
  std::size_t header_pos = 0;
  std::string_view body;  // text after "]###" up to the next "###" heading
};

std::vector<Block> find_blocks(std::string_view text) {
  std::vector<Block> out;
  std::size_t pos = text.find(kBlockOpen);
  while (pos != std::string_view::npos) {
    const auto close = text.find(kBlockClose, pos + kBlockOpen.size());
    if (close == std::string_view::npos) break;
    const auto body_start = close + kBlockClose.size();
    auto body_end = text.find("###", body_start);
    if (body_end == std::string_view::npos) body_end = text.size();
    out.push_back({pos, text.substr(body_start, body_end - body_start)});
    pos = text.find(kBlockOpen, body_start);
  }
  return out;
}

/// First non-empty line of a block body.
std::string_view first_line(std::string_view body) {
  while (!body.empty()) {
    const auto nl = body.find('\n');
    const auto line = trim(body.substr(0, nl));
    if (!line.empty()) return line;
    if (nl == std::string_view::npos) break;
    body.remove_prefix(nl + 1);
  }
  return {};
}

std::optional<Strategy> try_parse(std::string_view line, std::vector<std::string>& warnings) {
  if (line.empty()) {
    warnings.emplace_back("empty combination block");
    return std::nullopt;
  }
  try {
    return parse_strategy(line);
  } catch (const StrategyParseError& e) {
    warnings.emplace_back("unparseable combination \"" + std::string(line) + "\": " + e.what());
    return std::nullopt;
  }
}

}  // namespace

std::filesystem::path default_template_dir() { return AUTODP_TEMPLATE_DIR; }

double compute_feedback(double r_k, double r_0) {
  if (!std::isfinite(r_k) || !std::isfinite(r_0)) throw std::invalid_argument("feedback needs finite scores");
  return r_k - r_0;
}

std::string format_score(double s) {
  if (!std::isfinite(s)) return "N/A (evaluation failed)";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.4f", s);
  // "-0.0000" carries no information beyond "+0.0000".
  if (std::string_view(buf) == "-0.0000") return "+0.0000";
  return buf;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  return {read_text(dir / "initial_prompt.txt"), read_text(dir / "iteration_prompt.txt")};
}

std::string render_template(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto name = tmpl.substr(i + 1, close - i - 1);
        auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == name; });
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string build_initial_prompt(const PromptTemplates& t, std::size_t initial_group_size) {
  return render_template(t.initial, {{"group_size_limit", std::to_string(initial_group_size)}});
}

std::string render_feedback_group(const Round& round) {
  std::string out;
  for (std::size_t k = 0; k < round.strategies.size(); ++k) {
    const auto n = std::to_string(k + 1);
    out += n + "." + std::string(kBlockOpen) + n + std::string(kBlockClose) + "\n";
    out += "• " + round.strategies[k].to_display_string() + "\n";
    out += std::string(kScoreLabel) + " " + format_score(round.relative_scores[k]) + "\n\n";
  }
  return out;
}

std::string build_iteration_prompt(const PromptTemplates& t, const std::vector<Round>& history, std::size_t t_round,
                                   std::size_t group_size_limit) {
  if (history.empty()) throw std::invalid_argument("iteration prompt needs at least one scored round");
  return render_template(t.iteration, {{"round", std::to_string(t_round)},
                                       {"combinations_with_scores", render_feedback_group(history.back())},
                                       {"group_size_limit", std::to_string(group_size_limit)}});
}

AgentDecision parse_agent_response(std::string_view text, std::size_t max_group_size) {
  AgentDecision d;
  d.rationale_text = std::string(text);

  if (text.find(kNoProcessingMarker) != std::string_view::npos) {
    d.kind = AgentDecision::Kind::NoProcessing;
    return d;
  }

  const auto blocks = find_blocks(text);
  if (const auto marker = text.find(kBestTeamMarker); marker != std::string_view::npos) {
    std::optional<Strategy> chosen;
    auto after = std::find_if(blocks.begin(), blocks.end(), [&](const Block& b) { return b.header_pos > marker; });
    if (after != blocks.end()) {
      chosen = try_parse(first_line(after->body), d.warnings);
    } else if (after != blocks.begin()) {
      chosen = try_parse(first_line(std::prev(after)->body), d.warnings);
    } else {
      auto rest = text.substr(marker + kBestTeamMarker.size());
      auto stop = rest.find("###");
      chosen = try_parse(first_line(rest.substr(0, stop)), d.warnings);
    }
    if (!chosen) throw AgentParseError("best-team marker without a parseable combination");
    d.kind = AgentDecision::Kind::BestTeam;
    d.best = *chosen;
    return d;
  }

  for (const auto& b : blocks) {
    auto f = try_parse(first_line(b.body), d.warnings);
    if (!f) continue;
    if (std::find(d.group.begin(), d.group.end(), *f) != d.group.end()) {
      d.warnings.push_back("dropping duplicate combination " + f->to_string());
      continue;
    }
    if (d.group.size() >= max_group_size) {
      d.warnings.push_back("dropping " + f->to_string() + ": group already has " + std::to_string(max_group_size) +
                           " combinations");
      continue;
    }
    d.group.push_back(*f);
  }
  for (const auto& w : d.warnings) spdlog::warn("agent response: {}", w);
  if (d.group.empty()) throw AgentParseError("agent response contains no parseable combination");
  d.kind = AgentDecision::Kind::ProposeGroup;
  return d;
}

std::vector<std::pair<Strategy, std::optional<double>>> parse_feedback_blocks(std::string_view text) {
  std::vector<std::pair<Strategy, std::optional<double>>> out;
  for (const auto& b : find_blocks(text)) {
    const auto label = b.body.find(kScoreLabel);
    if (label == std::string_view::npos) continue;
    std::vector<std::string> ignored;
    auto f = try_parse(first_line(b.body), ignored);
    if (!f) continue;
    auto value = first_line(b.body.substr(label + kScoreLabel.size()));
    std::optional<double> s;
    if (!value.starts_with("N/A")) {
      try {
        s = std::stod(std::string(value));
      } catch (const std::exception&) {
        continue;
      }
    }
    out.emplace_back(*f, s);
  }
  return out;
}

std::vector<Strategy> strategy_neighbours(const Strategy& f) {
  std::vector<Strategy> out;
  const auto& teams = f.teams();
  auto push = [&](std::vector<Team> t) {
    Strategy s(std::move(t));
    if (!s.empty() && s != f && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  };
  if (teams.size() < kMaxStrategyLength) {
    for (Team t : kAllTeams) {
      if (f.contains(t)) continue;
      auto ext = teams;
      ext.push_back(t);
      push(std::move(ext));
    }
    for (std::size_t pos = 0; pos < teams.size(); ++pos) {
      for (Team t : kAllTeams) {
        if (f.contains(t)) continue;
        auto ins = teams;
        ins.insert(ins.begin() + static_cast<std::ptrdiff_t>(pos), t);
        push(std::move(ins));
      }
    }
  }
  for (std::size_t i = 0; i + 1 < teams.size(); ++i) {
    auto sw = teams;
    std::swap(sw[i], sw[i + 1]);
    push(std::move(sw));
  }
  for (std::size_t i = 0; i < teams.size(); ++i) {
    auto rm = teams;
    rm.erase(rm.begin() + static_cast<std::ptrdiff_t>(i));
    push(std::move(rm));
  }
  return out;
}

std::string format_combinations(const std::vector<Strategy>& group) {
  std::string out;
  for (std::size_t k = 0; k < group.size(); ++k) {
    const auto n = std::to_string(k + 1);
    out += std::string(kBlockOpen) + n + std::string(kBlockClose) + "\n• " + group[k].to_display_string() + "\n\n";
  }
  return out;
}

HillClimbingAgent::HillClimbingAgent(std::size_t group_size, double epsilon)
    : group_size_(std::max<std::size_t>(1, group_size)), epsilon_(epsilon) {}

std::string HillClimbingAgent::complete(const std::vector<ChatMessage>& messages, double /*temperature*/,
                                        std::uint64_t /*seed*/) {
  std::vector<std::vector<std::pair<Strategy, std::optional<double>>>> rounds;
  for (const auto& m : messages) {
    if (m.role != "user") continue;
    auto fb = parse_feedback_blocks(m.content);
    if (!fb.empty()) rounds.push_back(std::move(fb));
  }

  if (rounds.empty()) {
    std::vector<Strategy> singles;
    for (Team t : kAllTeams) {
      if (singles.size() < group_size_) singles.push_back(Strategy{t});
    }
    return format_combinations(singles) +
           "###Reasons for Different Combinations###\n• Single teams first, to measure each one alone.\n";
  }

  const auto& latest = rounds.back();
  const bool all_flat = std::all_of(latest.begin(), latest.end(),
                                    [&](const auto& e) { return e.second && std::abs(*e.second) < epsilon_; });
  if (all_flat) {
    return std::string(kNoProcessingMarker) + "\nEvery combination in the last round stayed within " +
           format_score(epsilon_) + " of the unprocessed data.\n";
  }

  std::set<Strategy> seen;
  std::optional<Strategy> best;
  double best_score = 0.0;
  double best_before_latest = 0.0;  // the unprocessed baseline scores 0
  double best_latest = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    for (const auto& [f, s] : rounds[r]) {
      seen.insert(f);
      if (!s) continue;
      if (!best || *s > best_score) {
        best = f;
        best_score = *s;
      }
      if (r + 1 < rounds.size()) {
        best_before_latest = std::max(best_before_latest, *s);
      } else {
        best_latest = std::max(best_latest, *s);
      }
    }
  }

  if (!best || best_score <= 0.0) {
    return std::string(kNoProcessingMarker) + "\nNo combination improved on the unprocessed data.\n";
  }
  auto declare = [&](const char* why) {
    return std::string(kBestTeamMarker) + "\n" + format_combinations({*best}) + why;
  };
  if (best_latest <= best_before_latest) return declare("The last round brought no improvement.\n");

  std::vector<Strategy> next;
  for (auto& n : strategy_neighbours(*best)) {
    if (next.size() >= group_size_) break;
    if (!seen.contains(n)) next.push_back(std::move(n));
  }
  if (next.empty()) return declare("Every neighbouring combination has been scored.\n");
  return format_combinations(next) + "###Reasons for Different Combinations###\n• Variations of " +
         best->to_display_string() + ", the best combination so far.\n";
}

}  // namespace autodp
