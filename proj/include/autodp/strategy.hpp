#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autodp/digest.hpp"

namespace autodp {

/// The four processing teams, in operator-taxonomy order.
enum class Team : std::uint8_t { Cleaning = 0, Optimization = 1, Generation = 2, Selection = 3 };

inline constexpr std::array<Team, 4> kAllTeams = {Team::Cleaning, Team::Optimization, Team::Generation,
                                                  Team::Selection};
inline constexpr std::size_t kMaxStrategyLength = 4;

/// Short canonical name: "Cleaning", "Optimization", ...
std::string_view team_name(Team t);
/// Name used in agent prompts: "Data Cleaning Team", ...
std::string_view team_display_name(Team t);
/// Case/whitespace tolerant lookup accepting both name forms.
std::optional<Team> team_from_name(std::string_view name);

/// Ordered, duplicate-free sequence of at most four teams. Empty means "no processing".
class Strategy {
 public:
  Strategy() = default;
  /// Throws std::invalid_argument if a team repeats or there are more than four.
  explicit Strategy(std::vector<Team> teams);
  Strategy(std::initializer_list<Team> teams) : Strategy(std::vector<Team>(teams)) {}

  [[nodiscard]] const std::vector<Team>& teams() const { return teams_; }
  [[nodiscard]] std::size_t size() const { return teams_.size(); }
  [[nodiscard]] bool empty() const { return teams_.empty(); }
  [[nodiscard]] bool contains(Team t) const;

  /// "Cleaning -> Optimization"; the empty strategy prints as "NONE".
  [[nodiscard]] std::string to_string() const;
  /// "Data Cleaning Team, Data Optimization Team" as used in agent output.
  [[nodiscard]] std::string to_display_string() const;

  friend bool operator==(const Strategy&, const Strategy&) = default;
  friend auto operator<=>(const Strategy&, const Strategy&) = default;

 private:
  std::vector<Team> teams_;
};

/// The full search space: the empty strategy first, then every duplicate-free
/// ordered sequence of 1..4 teams, by length and then lexicographically by team order.
std::vector<Strategy> enumerate_space();

/// True iff a equals the first |a| teams of b.
bool is_prefix(const Strategy& a, const Strategy& b);

/// Splits f into its first k teams and the rest. Throws std::out_of_range if k > |f|.
std::pair<Strategy, Strategy> split_at(const Strategy& f, std::size_t k);

/// Concatenation; throws std::invalid_argument if the result violates Strategy invariants.
Strategy concat(const Strategy& prefix, const Strategy& suffix);

class StrategyParseError : public std::runtime_error {
 public:
  enum class Kind { UnknownTeam, DuplicateTeam, TooManyTeams };

  StrategyParseError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Parses a comma (or "->") separated team list. Tolerates bullets, numbering,
/// case and whitespace differences, and both "Data Cleaning Team" and "Cleaning".
/// "NONE" and blank input yield the empty strategy.
Strategy parse_strategy(std::string_view text);

/// Cache identity of a strategy under a given operator configuration and run seed.
struct StrategyKey {
  std::string canonical;  // "<strategy>|<config digest hex>|<seed>"

  static StrategyKey make(const Strategy& f, const Digest& config_digest, std::uint64_t seed);

  friend bool operator==(const StrategyKey&, const StrategyKey&) = default;
  friend auto operator<=>(const StrategyKey&, const StrategyKey&) = default;
};

}  // namespace autodp
