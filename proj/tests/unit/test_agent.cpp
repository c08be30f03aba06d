#include <doctest.h>

#include <cmath>

#include "autodp/agent.hpp"
#include "support.hpp"

using namespace autodp;
using namespace autodp::testing;

namespace {

constexpr Team C = Team::Cleaning;
constexpr Team O = Team::Optimization;
constexpr Team G = Team::Generation;
constexpr Team S = Team::Selection;

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

Round round_of(std::size_t index, std::vector<Strategy> fs, std::vector<double> rel) {
  Round r;
  r.index = index;
  r.strategies = std::move(fs);
  r.relative_scores = rel;
  r.scores = rel;
  r.reused.assign(rel.size(), false);
  return r;
}

std::string agent_reply(HillClimbingAgent& agent, const std::vector<std::string>& user_turns) {
  std::vector<ChatMessage> msgs;
  for (const auto& u : user_turns) msgs.push_back({"user", u});
  return agent.complete(msgs, 0.6, 0);
}

}  // namespace

TEST_CASE("feedback is the plain difference") {
  CHECK(compute_feedback(0.62, 0.50) == 0.62 - 0.50);
  CHECK(compute_feedback(0.62, 0.50) == doctest::Approx(0.12));
  CHECK(compute_feedback(0.5, 0.5) == 0.0);
  CHECK(compute_feedback(0.40, 0.50) == doctest::Approx(-0.10));
  CHECK_THROWS_AS(compute_feedback(NAN, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(compute_feedback(0.5, INFINITY), std::invalid_argument);
}

TEST_CASE("score formatting") {
  CHECK(format_score(0.12) == "+0.1200");
  CHECK(format_score(-0.03) == "-0.0300");
  CHECK(format_score(-0.00001) == "+0.0000");
  CHECK(format_score(-INFINITY) == "N/A (evaluation failed)");
}

TEST_CASE("initial prompt") {
  const auto t = PromptTemplates::load(default_template_dir());
  const auto p = build_initial_prompt(t, 4);
  const auto overview_end = p.find("### Rules");
  REQUIRE(overview_end != std::string::npos);
  const auto overview = p.substr(0, overview_end);
  for (const char* team : {"Data Cleaning Team", "Data Optimization Team", "Data Generation Team",
                           "Data Selection Team"}) {
    CHECK(count_of(overview, team) == 1);
  }
  CHECK(p.find("at most 4 different combinations") != std::string::npos);
  CHECK(build_initial_prompt(t, 2).find("at most 2 different combinations") != std::string::npos);
  CHECK(p.find("###Combination[") != std::string::npos);
  CHECK(p.find('{') == std::string::npos);
}

TEST_CASE("iteration prompt") {
  const auto t = PromptTemplates::load(default_template_dir());
  const std::vector<Round> history = {round_of(1, {Strategy({C}), Strategy({O}), Strategy({G}), Strategy({S})},
                                               {0.12, -0.03, 0.0, 0.05})};
  const auto p = build_iteration_prompt(t, history, 1, 6);
  CHECK(count_of(p, "Feedback score:") == 4);
  CHECK(count_of(p, "###Combination[") == 4);
  CHECK(p.find("Feedback score: -0.0300") != std::string::npos);
  CHECK(p.find("Feedback score: +0.1200") != std::string::npos);
  CHECK(p.find("Round 1") != std::string::npos);
  CHECK(p.find(std::string(kBestTeamMarker)) != std::string::npos);
  CHECK(p.find(std::string(kNoProcessingMarker)) != std::string::npos);
  CHECK(p.find("at most 6 new combinations") != std::string::npos);
  CHECK_THROWS_AS(build_iteration_prompt(t, {}, 1, 6), std::invalid_argument);

  // The agent side reads the same blocks back.
  const auto fb = parse_feedback_blocks(p);
  REQUIRE(fb.size() == 4);
  CHECK(fb[1].first == Strategy({O}));
  CHECK(*fb[1].second == doctest::Approx(-0.03));
}

TEST_CASE("failed evaluations are shown as such") {
  const auto r = round_of(2, {Strategy({C, S})}, {-INFINITY});
  const auto text = render_feedback_group(r);
  CHECK(text.find("N/A (evaluation failed)") != std::string::npos);
  const auto fb = parse_feedback_blocks(text);
  REQUIRE(fb.size() == 1);
  CHECK_FALSE(fb[0].second.has_value());
}

TEST_CASE("render template keeps unknown placeholders") {
  CHECK(render_template("{a} and {b}", {{"a", "x"}}) == "x and {b}");
  CHECK(render_template("{a}{a}", {{"a", "y"}}) == "yy");
}

TEST_CASE("parse agent response") {
  const auto two = parse_agent_response(
      "###Combination[1]###\n• Data Cleaning Team\n\n###Combination[2]###\n• Data Cleaning Team, Data Generation "
      "Team\n\n###Reasons for Different Combinations###\n• because\n");
  CHECK(two.kind == AgentDecision::Kind::ProposeGroup);
  CHECK(two.group == std::vector<Strategy>{Strategy({C}), Strategy({C, G})});

  const auto none = parse_agent_response("###Combination[1]###\n• Data Cleaning Team\n" +
                                         std::string(kNoProcessingMarker));
  CHECK(none.kind == AgentDecision::Kind::NoProcessing);

  const auto best =
      parse_agent_response(std::string(kBestTeamMarker) + " ###Combination[1]### • Data Cleaning Team, Data Selection Team");
  CHECK(best.kind == AgentDecision::Kind::BestTeam);
  CHECK(best.best == Strategy({C, S}));

  const auto restated = parse_agent_response(
      "###Combination[1]###\n• Data Optimization Team\n\n" + std::string(kBestTeamMarker) +
      "\n###Combination[1]###\n• Data Selection Team\n");
  CHECK(restated.best == Strategy({S}));

  const auto inline_best = parse_agent_response(std::string(kBestTeamMarker) + "\nData Generation Team\n");
  CHECK(inline_best.best == Strategy({G}));
}

TEST_CASE("parse agent response drops bad and duplicate blocks") {
  const auto d = parse_agent_response(
      "###Combination[1]###\n• Data Cleaning Team\n###Combination[2]###\n• Data Cooking Team\n"
      "###Combination[3]###\n• Data Cleaning Team\n###Combination[4]###\n• Data Selection Team\n");
  CHECK(d.group == std::vector<Strategy>{Strategy({C}), Strategy({S})});
  CHECK(d.warnings.size() == 2);

  std::string many;
  for (const auto& f : enumerate_space()) {
    if (!f.empty() && f.size() == 1) many += format_combinations({f});
  }
  for (const auto& f : {Strategy({C, O}), Strategy({O, C}), Strategy({G, S})}) many += format_combinations({f});
  CHECK(parse_agent_response(many, 6).group.size() == 6);
  CHECK(parse_agent_response(many, 3).group.size() == 3);

  CHECK_THROWS_AS(parse_agent_response("I think cleaning is good."), AgentParseError);
  CHECK_THROWS_AS(parse_agent_response("###Combination[1]###\n• nonsense\n"), AgentParseError);
}

TEST_CASE("neighbours") {
  const auto n = strategy_neighbours(Strategy({C}));
  CHECK(n.front() == Strategy({C, O}));
  CHECK(std::find(n.begin(), n.end(), Strategy({O, C})) != n.end());
  for (const auto& f : enumerate_space()) {
    for (const auto& g : strategy_neighbours(f)) {
      CHECK_FALSE(g.empty());
      CHECK(g != f);
    }
  }
}

TEST_CASE("hill climbing agent policy") {
  const auto t = PromptTemplates::load(default_template_dir());
  HillClimbingAgent agent(4, 0.005);
  const auto first = parse_agent_response(agent_reply(agent, {build_initial_prompt(t, 4)}));
  CHECK(first.group == std::vector<Strategy>{Strategy({C}), Strategy({O}), Strategy({G}), Strategy({S})});

  const auto r1 = round_of(1, first.group, {0.05, 0.01, -0.02, 0.03});
  const auto p1 = build_iteration_prompt(t, {r1}, 1, 6);
  const auto second = parse_agent_response(agent_reply(agent, {build_initial_prompt(t, 4), p1}));
  REQUIRE(second.kind == AgentDecision::Kind::ProposeGroup);
  CHECK(second.group == std::vector<Strategy>{Strategy({C, O}), Strategy({C, G}), Strategy({C, S}),
                                              Strategy({O, C})});

  // No improvement in round 2: declare the round-1 best.
  const auto r2 = round_of(2, second.group, {0.04, 0.0, 0.05, 0.01});
  const auto p2 = build_iteration_prompt(t, {r1, r2}, 2, 6);
  const auto third = parse_agent_response(agent_reply(agent, {build_initial_prompt(t, 4), p1, p2}));
  CHECK(third.kind == AgentDecision::Kind::BestTeam);
  CHECK(third.best == Strategy({C}));

  const auto flat = round_of(1, first.group, {0.001, -0.002, 0.0, 0.004});
  const auto stop = parse_agent_response(
      agent_reply(agent, {build_initial_prompt(t, 4), build_iteration_prompt(t, {flat}, 1, 6)}));
  CHECK(stop.kind == AgentDecision::Kind::NoProcessing);

  const auto worse = round_of(1, first.group, {-0.1, -0.2, -0.05, -0.3});
  const auto nothing = parse_agent_response(
      agent_reply(agent, {build_initial_prompt(t, 4), build_iteration_prompt(t, {worse}, 1, 6)}));
  CHECK(nothing.kind == AgentDecision::Kind::NoProcessing);
}
