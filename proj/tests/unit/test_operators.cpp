#include <doctest.h>

#include <set>

#include "autodp/operators.hpp"
#include "autodp/quality.hpp"
#include "autodp/text.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace autodp;
using namespace autodp::testing;

namespace {

std::string random_letters(Rng& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('a' + uniform(rng, 0, 25)));
  return s;
}

std::string mutate(Rng& rng, std::string s, std::size_t edits) {
  for (std::size_t e = 0; e < edits; ++e) s[uniform(rng, 0, s.size() - 1)] = static_cast<char>('A' + uniform(rng, 0, 25));
  return s;
}

// A sample with at least ten tokens and no defects.
Sample good(const std::string& id, const std::string& topic) {
  return sample(id, "What is known about " + topic + " today?",
                "Quite a lot is known about " + topic + ", and the details are well documented.");
}

}  // namespace

TEST_CASE("dedup: identical samples keep the first") {
  OperatorConfig cfg;
  Dataset d({good("a", "rivers"), good("b", "rivers"), good("c", "mountains")});
  const auto out = minhash_dedup(d, cfg);
  REQUIRE(out.size() == 2);
  CHECK(out[0].id == "a");
  CHECK(out[1].id == "c");
}

TEST_CASE("dedup: disjoint shingles keep both") {
  Dataset d({sample("a", "aaaaaaaaaa", "bbbbbbbbbb"), sample("b", "cccccccccc", "dddddddddd")});
  CHECK(minhash_dedup(d, OperatorConfig{}).size() == 2);
  CHECK(minhash_dedup(Dataset{}, OperatorConfig{}).size() == 0);
}

TEST_CASE("dedup: LSH agrees with the exact Jaccard oracle outside the threshold band") {
  Rng rng(2024);
  MinHashConfig mh;
  std::size_t considered = 0;
  std::size_t agree = 0;
  for (int pair = 0; pair < 50; ++pair) {
    const auto base = random_letters(rng, 200);
    const auto variant = mutate(rng, base, uniform(rng, 0, 40));
    const double j = exact_jaccard(base, variant, mh.shingle_size);
    if (std::abs(j - mh.jaccard_threshold) <= 0.1) continue;
    ++considered;
    const bool lsh = !minhash_duplicate_pairs({base, variant}, mh).empty();
    agree += lsh == (j >= mh.jaccard_threshold);
  }
  REQUIRE(considered >= 25);
  CHECK(static_cast<double>(agree) >= 0.9 * static_cast<double>(considered));
}

TEST_CASE("minhash signatures are deterministic and seed dependent") {
  MinHashConfig mh;
  CHECK(minhash_signature("some text here", mh) == minhash_signature("some text here", mh));
  CHECK(minhash_signature("some text here", mh).size() == mh.num_permutations);
  MinHashConfig other = mh;
  other.seed = 1;
  CHECK(minhash_signature("some text here", mh) != minhash_signature("some text here", other));
}

TEST_CASE("strip noise on samples") {
  Sample s{"id", "<b>hi</b>", std::string("a\0  b&amp;c", 11), {{"k", 1}}};
  const auto out = strip_noise(s);
  CHECK(out.question == "hi");
  CHECK(out.answer == "a b&c");
  CHECK(out.id == "id");
  CHECK(out.meta == s.meta);
}

TEST_CASE("cleaning: predicted survivors on a mixed corpus") {
  OperatorConfig cfg;
  cfg.token_range = {10, 40};
  std::string long_answer;
  for (int i = 0; i < 50; ++i) long_answer += "w" + std::to_string(i) + " ";
  Dataset d({
      good("keep1", "glaciers"),
      sample("long", "How long can an answer be?", long_answer),
      good("dup", "glaciers"),
      sample("markup", "<p>What is known about deserts today?</p>",
             "<i>Quite a lot is known about deserts</i>, and the details are well documented."),
      good("keep2", "volcanoes"),
  });
  const auto out = apply_cleaning(d, cfg);
  REQUIRE(out.size() == 3);
  CHECK(out[0].id == "keep1");
  CHECK(out[1].id == "markup");
  CHECK(out[1].question == "What is known about deserts today?");
  CHECK(out[2].id == "keep2");
}

TEST_CASE("cleaning: fixpoint and idempotence") {
  OperatorConfig cfg;
  Dataset clean({good("a", "glaciers"), good("b", "volcanoes"), good("c", "tides")});
  CHECK(apply_cleaning(clean, cfg) == clean);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto d = synthetic_corpus(rng, 40, 0.5);
    const auto once = apply_cleaning(d, cfg);
    CHECK(apply_cleaning(once, cfg) == once);
    // Order preservation: output ids are a subsequence of input ids.
    std::size_t pos = 0;
    for (const auto& s : once) {
      while (pos < d.size() && d[pos].id != s.id) ++pos;
      CHECK(pos < d.size());
    }
  }
}

TEST_CASE("optimize sample") {
  auto client = scripted_optimizer();
  auto trimmed = [](const ModelRequest& r) {
    std::string t = r.mode == "question" ? r.question : r.answer;
    t.erase(0, t.find_first_not_of(' '));
    t.erase(t.find_last_not_of(' ') + 1);
    return ModelResponse::text_result(t);
  };
  ScriptedModelClient trim(ClientRole::Optimizer, trimmed);
  auto out = optimize_sample(sample("x", "  q  ", "a"), OptimizeMode::Question, trim);
  CHECK(out.question == "q");
  CHECK(out.answer == "a");
  CHECK(out.id == "x");
  CHECK(out.meta.at(kMetaOptimized) == "question");

  auto ans = optimize_sample(sample("x", "  q  ", " a "), OptimizeMode::Answer, trim);
  CHECK(ans.question == "  q  ");
  CHECK(ans.answer == "a");

  ScriptedModelClient broken(ClientRole::Optimizer, [](const ModelRequest&) -> ModelResponse {
    throw std::runtime_error("down");
  });
  const auto in = sample("x", "q", "a");
  auto failed = optimize_sample(in, OptimizeMode::Both, broken);
  CHECK(failed.question == in.question);
  CHECK(failed.answer == in.answer);
  CHECK(failed.meta.count(kMetaError) == 1);
  failed.meta.erase(kMetaError);
  CHECK(failed == in);

  ScriptedModelClient wrong_role(ClientRole::Scorer, trimmed);
  CHECK_THROWS_AS(optimize_sample(in, OptimizeMode::Both, wrong_role), std::invalid_argument);
}

TEST_CASE("generate missing") {
  auto gen = scripted_generator();
  const std::vector<Shot> shots = {{"sq", "sa"}};
  auto out = generate_missing(sample("x", "q", ""), shots, *gen);
  CHECK(out.question == "q");
  CHECK(out.answer == "ANSWER(q)");

  auto calls = gen->call_count();
  CHECK(generate_missing(sample("x", "q", "a"), shots, *gen) == sample("x", "q", "a"));
  CHECK(gen->call_count() == calls);

  auto both = generate_missing(sample("x", "", ""), shots, *gen);
  CHECK(both.question == "QUESTION()");
  CHECK(both.answer == "ANSWER(QUESTION())");
  const auto reqs = gen->requests();
  CHECK(reqs[reqs.size() - 2].mode == "question");
  CHECK(reqs.back().mode == "answer");
  CHECK(reqs.back().question == "QUESTION()");
  CHECK(reqs.back().shots == shots);

  CHECK_THROWS_AS(generate_missing(sample("x", "q", ""), {}, *gen), std::invalid_argument);

  ScriptedModelClient empty(ClientRole::Generator, [](const ModelRequest&) { return ModelResponse::text_result(""); });
  auto flagged = generate_missing(sample("x", "q", ""), shots, empty);
  CHECK(flagged.answer.empty());
  CHECK(flagged.meta.count(kMetaError) == 1);
}

TEST_CASE("select high quality") {
  const std::map<std::string, double> scores = {{"s0", 0.9}, {"s1", 0.1}, {"s2", 0.5}, {"s3", 0.5}};
  ScriptedModelClient scorer(ClientRole::Scorer, [&](const ModelRequest& r) {
    return ModelResponse::score_result(scores.at(r.question));
  });
  Dataset d({sample("a", "s0", "x"), sample("b", "s1", "x"), sample("c", "s2", "x"), sample("d", "s3", "x")});
  const auto half = select_high_quality(d, scorer, 0.5);
  REQUIRE(half.size() == 2);
  CHECK(half[0].id == "a");
  CHECK(half[1].id == "c");
  CHECK(select_high_quality(d, scorer, 1.0) == d);

  ScriptedModelClient flat(ClientRole::Scorer, [](const ModelRequest&) { return ModelResponse::score_result(0.3); });
  std::vector<Sample> eight;
  for (int i = 0; i < 8; ++i) eight.push_back(sample("i" + std::to_string(i), "q", "a"));
  const auto quarter = select_high_quality(Dataset(eight), flat, 0.25);
  REQUIRE(quarter.size() == 2);
  CHECK(quarter[0].id == "i0");
  CHECK(quarter[1].id == "i1");

  // A failed score ranks below every real score.
  ScriptedModelClient partial(ClientRole::Scorer, [](const ModelRequest& r) {
    if (r.question == "s0") return ModelResponse::failure("no");
    return ModelResponse::score_result(0.0);
  });
  const auto kept = select_high_quality(d, partial, 0.75);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].id == "b");
  CHECK_THROWS_AS(select_high_quality(d, scorer, 0.0), std::invalid_argument);
}

TEST_CASE("apply team: model-backed teams skip clean data") {
  auto ctx = ExecutionContext::with_defaults(OperatorConfig{});
  auto opt = scripted_optimizer();
  ctx.optimizer = opt;
  Dataset clean({good("a", "glaciers"), good("b", "volcanoes")});
  CHECK(apply_team(Team::Optimization, clean, ctx) == clean);
  CHECK(opt->call_count() == 0);
  CHECK(apply_team(Team::Cleaning, Dataset{}, ctx).size() == 0);
}

TEST_CASE("apply team: generation calls once for the single incomplete sample") {
  auto ctx = ExecutionContext::with_defaults(OperatorConfig{});
  auto gen = scripted_generator();
  ctx.generator = gen;
  Dataset d({good("a", "glaciers"), sample("b", "What is known about tides today and why?", ""),
             good("c", "volcanoes")});
  const auto out = apply_team(Team::Generation, d, ctx);
  CHECK(gen->call_count() == 1);
  CHECK(out[1].answer == "ANSWER(What is known about tides today and why?)");
  CHECK(out[0] == d[0]);
  CHECK(out[2] == d[2]);
  // Shots come from the complete clean samples.
  CHECK(gen->requests()[0].shots.size() == 2);
}

TEST_CASE("apply team: clean samples are byte-identical after optimization and generation") {
  Rng rng(77);
  for (int round = 0; round < 20; ++round) {
    auto ctx = ExecutionContext::with_defaults(OperatorConfig{}, 5);
    auto opt = scripted_optimizer();
    auto gen = scripted_generator();
    ctx.optimizer = opt;
    ctx.generator = gen;
    const auto d = synthetic_corpus(rng, 30, 0.4);
    const auto parts = partition(d, *ctx.screener);
    for (Team t : {Team::Optimization, Team::Generation}) {
      const auto out = apply_team(t, d, ctx);
      REQUIRE(out.size() == d.size());
      for (auto p : parts.clean_positions) CHECK(canonical_record(out[p]) == canonical_record(d[p]));
    }
    CHECK(opt->call_count() <= 2 * parts.noisy.size());
    CHECK(gen->call_count() <= 2 * parts.noisy.size());
  }
}

TEST_CASE("apply strategy is deterministic and counts team invocations") {
  Rng rng(8);
  const auto d = synthetic_corpus(rng, 60, 0.5);
  auto run = [&] {
    auto ctx = ExecutionContext::with_defaults(OperatorConfig{}, 3);
    ctx.counter = std::make_shared<TeamInvocationCounter>();
    auto out = apply_strategy(Strategy({Team::Cleaning, Team::Optimization, Team::Selection}), d, ctx);
    CHECK(ctx.counter->total() == 3);
    return out.canonical();
  };
  CHECK(run() == run());
}
