#include "autodp/strategy.hpp"

#include <algorithm>
#include <cctype>

namespace autodp {

namespace {

struct TeamNames {
  Team team;
  std::string_view name;
  std::string_view display;
};

constexpr TeamNames kNames[] = {
    {Team::Cleaning, "Cleaning", "Data Cleaning Team"},
    {Team::Optimization, "Optimization", "Data Optimization Team"},
    {Team::Generation, "Generation", "Data Generation Team"},
    {Team::Selection, "Selection", "Data Selection Team"},
};

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

// Collapses internal whitespace and strips decoration around a single team name.
std::string normalize_name(std::string_view raw) {
  std::string collapsed;
  bool space = false;
  for (char c : raw) {
    if (is_space(c)) {
      space = true;
      continue;
    }
    if (c == '*' || c == '"' || c == '`' || c == '\'') continue;
    if (space && !collapsed.empty()) collapsed.push_back(' ');
    space = false;
    collapsed.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!collapsed.empty() && (collapsed.back() == '.' || collapsed.back() == ':')) collapsed.pop_back();
  return collapsed;
}

// Removes list decoration at the start of a line: bullets, "1.", "(2)", "Combination[3]:".
std::string_view strip_leading_decoration(std::string_view s) {
  for (bool changed = true; changed;) {
    changed = false;
    s = trim(s);
    for (std::string_view bullet : {"•", "·", "- ", "* ", "###"}) {
      if (starts_with(s, bullet)) {
        s.remove_prefix(bullet.size());
        changed = true;
      }
    }
    std::string low = lower_ascii(s.substr(0, 12));
    if (starts_with(low, "combination")) {
      auto close = s.find(']');
      if (close != std::string_view::npos) {
        s.remove_prefix(close + 1);
        while (!s.empty() && (s.front() == '#' || s.front() == ':' || is_space(s.front()))) s.remove_prefix(1);
        changed = true;
      }
    }
    std::size_t digits = 0;
    std::size_t open = (!s.empty() && s.front() == '(') ? 1 : 0;
    while (open + digits < s.size() && std::isdigit(static_cast<unsigned char>(s[open + digits]))) ++digits;
    if (digits > 0 && open + digits < s.size()) {
      char after = s[open + digits];
      if (after == '.' || after == ')') {
        s.remove_prefix(open + digits + 1);
        changed = true;
      }
    }
  }
  return s;
}

std::vector<std::string> split_items(std::string_view s) {
  // Arrows and full-width separators are rewritten to ',' before splitting.
  std::string buf(s);
  for (std::string_view sep : {"-->", "->", "→", "，", "、", ";"}) {
    for (auto pos = buf.find(sep); pos != std::string::npos; pos = buf.find(sep, pos + 1)) {
      buf.replace(pos, sep.size(), ",");
    }
  }
  std::vector<std::string> items;
  std::size_t start = 0;
  for (;;) {
    auto comma = buf.find(',', start);
    auto item = trim(std::string_view(buf).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) items.emplace_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

}  // namespace

std::string_view team_name(Team t) { return kNames[static_cast<std::size_t>(t)].name; }
std::string_view team_display_name(Team t) { return kNames[static_cast<std::size_t>(t)].display; }

std::optional<Team> team_from_name(std::string_view name) {
  std::string n = normalize_name(name);
  if (starts_with(n, "data ")) n.erase(0, 5);
  if (n.size() > 5 && n.ends_with(" team")) n.erase(n.size() - 5);
  for (const auto& e : kNames) {
    if (n == lower_ascii(e.name)) return e.team;
  }
  return std::nullopt;
}

Strategy::Strategy(std::vector<Team> teams) : teams_(std::move(teams)) {
  if (teams_.size() > kMaxStrategyLength) throw std::invalid_argument("a strategy has at most four teams");
  for (std::size_t i = 0; i < teams_.size(); ++i) {
    for (std::size_t j = i + 1; j < teams_.size(); ++j) {
      if (teams_[i] == teams_[j]) throw std::invalid_argument("a strategy may not repeat a team");
    }
  }
}

bool Strategy::contains(Team t) const { return std::find(teams_.begin(), teams_.end(), t) != teams_.end(); }

std::string Strategy::to_string() const {
  if (teams_.empty()) return "NONE";
  std::string out;
  for (std::size_t i = 0; i < teams_.size(); ++i) {
    if (i) out += " -> ";
    out += team_name(teams_[i]);
  }
  return out;
}

std::string Strategy::to_display_string() const {
  if (teams_.empty()) return "NONE";
  std::string out;
  for (std::size_t i = 0; i < teams_.size(); ++i) {
    if (i) out += ", ";
    out += team_display_name(teams_[i]);
  }
  return out;
}

std::vector<Strategy> enumerate_space() {
  std::vector<Strategy> out;
  out.emplace_back();
  // Breadth-first extension keeps length-major, lexicographic order.
  std::vector<std::vector<Team>> frontier{{}};
  for (std::size_t len = 1; len <= kMaxStrategyLength; ++len) {
    std::vector<std::vector<Team>> next;
    for (const auto& seq : frontier) {
      for (Team t : kAllTeams) {
        if (std::find(seq.begin(), seq.end(), t) != seq.end()) continue;
        auto ext = seq;
        ext.push_back(t);
        next.push_back(std::move(ext));
      }
    }
    for (const auto& seq : next) out.emplace_back(seq);
    frontier = std::move(next);
  }
  return out;
}

bool is_prefix(const Strategy& a, const Strategy& b) {
  if (a.size() > b.size()) return false;
  return std::equal(a.teams().begin(), a.teams().end(), b.teams().begin());
}

std::pair<Strategy, Strategy> split_at(const Strategy& f, std::size_t k) {
  if (k > f.size()) throw std::out_of_range("split point beyond strategy length");
  const auto& t = f.teams();
  return {Strategy(std::vector<Team>(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(k))),
          Strategy(std::vector<Team>(t.begin() + static_cast<std::ptrdiff_t>(k), t.end()))};
}

Strategy concat(const Strategy& prefix, const Strategy& suffix) {
  auto teams = prefix.teams();
  teams.insert(teams.end(), suffix.teams().begin(), suffix.teams().end());
  return Strategy(std::move(teams));
}

Strategy parse_strategy(std::string_view text) {
  auto body = strip_leading_decoration(text);
  const std::string low = normalize_name(body);
  if (low.empty() || low == "none" || low == "no processing") return Strategy{};

  const auto items = split_items(body);
  if (items.size() > kMaxStrategyLength) {
    throw StrategyParseError(StrategyParseError::Kind::TooManyTeams,
                             "strategy lists " + std::to_string(items.size()) + " teams; at most four allowed");
  }
  std::vector<Team> teams;
  for (const auto& item : items) {
    auto team = team_from_name(strip_leading_decoration(item));
    if (!team) throw StrategyParseError(StrategyParseError::Kind::UnknownTeam, "unknown team \"" + item + "\"");
    if (std::find(teams.begin(), teams.end(), *team) != teams.end()) {
      throw StrategyParseError(StrategyParseError::Kind::DuplicateTeam,
                               "team \"" + std::string(team_name(*team)) + "\" appears twice");
    }
    teams.push_back(*team);
  }
  return Strategy(std::move(teams));
}

StrategyKey StrategyKey::make(const Strategy& f, const Digest& config_digest, std::uint64_t seed) {
  return StrategyKey{f.to_string() + "|" + config_digest.hex() + "|" + std::to_string(seed)};
}

}  // namespace autodp
