#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "autodp/strategy.hpp"

namespace autodp {

/// Placeholder default: the templates/ directory of the source tree.
std::filesystem::path default_template_dir();

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// Strategy-proposing chat model.
class AgentClient {
 public:
  virtual ~AgentClient() = default;
  [[nodiscard]] virtual std::string identity() const = 0;
  virtual std::string complete(const std::vector<ChatMessage>& messages, double temperature, std::uint64_t seed) = 0;
};

/// One search iteration: the proposed group with its raw and relative scores.
struct Round {
  std::size_t index = 0;
  std::vector<Strategy> strategies;
  std::vector<double> scores;
  std::vector<double> relative_scores;
  /// True where the score was echoed from an earlier evaluation.
  std::vector<bool> reused;
};

/// s = r - r0. Throws std::invalid_argument on non-finite input.
double compute_feedback(double r_k, double r_0);

/// "+0.1200" / "-0.0300"; non-finite scores render as "N/A (evaluation failed)".
std::string format_score(double s);

struct PromptTemplates {
  std::string initial;
  std::string iteration;

  /// Reads initial_prompt.txt and iteration_prompt.txt. Throws std::runtime_error if missing.
  static PromptTemplates load(const std::filesystem::path& dir);
};

/// Replaces every "{name}" with its value; unknown placeholders are left as they are.
std::string render_template(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values);

std::string build_initial_prompt(const PromptTemplates& t, std::size_t initial_group_size);

/// Renders the latest round of `history` as the feedback group for round t.
/// Throws std::invalid_argument on empty history.
std::string build_iteration_prompt(const PromptTemplates& t, const std::vector<Round>& history, std::size_t t_round,
                                   std::size_t group_size_limit);

/// "1.###Combination[1]###\n• <teams>\nFeedback score: <s>\n" blocks.
std::string render_feedback_group(const Round& round);

struct AgentDecision {
  enum class Kind { ProposeGroup, BestTeam, NoProcessing };

  Kind kind = Kind::ProposeGroup;
  std::vector<Strategy> group;
  Strategy best;
  std::string rationale_text;
  std::vector<std::string> warnings;
};

class AgentParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Terminal markers win over combination blocks: no-processing first, then best-team,
/// then every "###Combination[n]###" block. Unparseable and duplicate combinations are
/// dropped with a warning; the group is capped at max_group_size.
AgentDecision parse_agent_response(std::string_view text, std::size_t max_group_size = 6);

/// Feedback entries (strategy, relative score or nullopt when failed) found in a prompt.
std::vector<std::pair<Strategy, std::optional<double>>> parse_feedback_blocks(std::string_view text);

inline constexpr std::string_view kBestTeamMarker = "【Best Team】";
inline constexpr std::string_view kNoProcessingMarker = "【No Processing Required for Original Data】";

/// Deterministic agent for tests and offline runs.
///
/// Starts with single teams, then proposes unevaluated neighbours (append, insert,
/// swap, remove) of the best strategy so far. Declares the best strategy once a round
/// brings no improvement or no neighbours are left, and no processing when a full
/// round stays within epsilon of the baseline or nothing beats it.
class HillClimbingAgent final : public AgentClient {
 public:
  explicit HillClimbingAgent(std::size_t group_size = 4, double epsilon = 0.005);

  [[nodiscard]] std::string identity() const override { return "hill-climbing-agent/1"; }
  std::string complete(const std::vector<ChatMessage>& messages, double temperature, std::uint64_t seed) override;

 private:
  std::size_t group_size_;
  double epsilon_;
};

/// Neighbours in proposal order: appends, inserts, adjacent swaps, removals.
std::vector<Strategy> strategy_neighbours(const Strategy& f);

/// Formats a group as the combination blocks parse_agent_response accepts.
std::string format_combinations(const std::vector<Strategy>& group);

}  // namespace autodp
