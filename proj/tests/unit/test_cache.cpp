#include <doctest.h>

#include <set>

#include "autodp/strategy_cache.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace autodp;
using namespace autodp::testing;

namespace {

constexpr Team C = Team::Cleaning;
constexpr Team O = Team::Optimization;
constexpr Team G = Team::Generation;
constexpr Team S = Team::Selection;

ExecutionContext scripted_ctx(std::uint64_t seed = 1) {
  auto ctx = ExecutionContext::with_defaults(OperatorConfig{}, seed);
  ctx.optimizer = scripted_optimizer();
  ctx.generator = scripted_generator();
  ctx.scorer = scripted_scorer();
  ctx.counter = std::make_shared<TeamInvocationCounter>();
  return ctx;
}

Dataset tiny(const std::string& tag) {
  return Dataset({sample("a", "question " + tag, "answer " + tag), sample("b", "q2 " + tag, "a2 " + tag)});
}

Strategy random_strategy(Rng& rng) {
  const auto space = enumerate_space();
  return space[uniform(rng, 1, space.size() - 1)];
}

}  // namespace

TEST_CASE("put and load round trip, idempotent put, conflicting put") {
  TempDir dir;
  StrategyCache cache(dir.path(), {Digest::of("cfg"), 1});
  const auto base = tiny("base").fingerprint();
  const auto result = tiny("result");
  const auto e = cache.put(Strategy({C}), base, result);
  CHECK(cache.load(e) == result);
  CHECK(read_file(dir.path() / e.storage_path / "dataset.jsonl") == result.canonical());

  const auto again = cache.put(Strategy({C}), base, result);
  CHECK(again.id == e.id);
  CHECK(cache.stats().entries == 1);
  CHECK_THROWS_AS(cache.put(Strategy({C}), base, tiny("other")), CacheIntegrityError);
}

TEST_CASE("find longest prefix examples") {
  TempDir dir;
  StrategyCache cache(dir.path(), {Digest::of("cfg"), 1});
  const auto base = tiny("base").fingerprint();
  cache.put(Strategy({C}), base, tiny("1"));
  cache.put(Strategy({C, O}), base, tiny("2"));
  cache.put(Strategy({G, C}), base, tiny("3"));

  auto m = cache.find_longest_prefix(Strategy({C, O, S}), base);
  REQUIRE(m);
  CHECK(m->entry.strategy == Strategy({C, O}));
  CHECK(m->suffix == Strategy({S}));
  CHECK_FALSE(cache.find_longest_prefix(Strategy({S}), base));
  auto full = cache.find_longest_prefix(Strategy({C, O}), base);
  REQUIRE(full);
  CHECK(full->suffix.empty());
  CHECK_FALSE(cache.find_longest_prefix(Strategy({C, O}), tiny("elsewhere").fingerprint()));
}

TEST_CASE("find longest prefix agrees with a brute force scan") {
  TempDir dir;
  StrategyCache cache(dir.path(), {Digest::of("cfg"), 1});
  Rng rng(31);
  std::vector<Digest> bases = {tiny("x").fingerprint(), tiny("y").fingerprint()};
  for (int i = 0; i < 40; ++i) {
    const auto f = random_strategy(rng);
    cache.put(f, bases[uniform(rng, 0, 1)], tiny(f.to_string()));
  }
  const auto entries = cache.entries();
  for (const auto& base : bases) {
    for (const auto& f : enumerate_space()) {
      const auto got = cache.find_longest_prefix(f, base);
      const auto want = brute_force_prefix(entries, f, base);
      REQUIRE(got.has_value() == want.has_value());
      if (got) {
        CHECK(got->entry.strategy == *want);
        CHECK(concat(got->entry.strategy, got->suffix) == f);
      }
    }
  }
}

TEST_CASE("scope separates configs and seeds") {
  TempDir dir;
  const auto base = tiny("base").fingerprint();
  {
    StrategyCache cache(dir.path(), {Digest::of("cfg"), 1});
    cache.put(Strategy({C}), base, tiny("1"));
  }
  StrategyCache other_seed(dir.path(), {Digest::of("cfg"), 2});
  CHECK_FALSE(other_seed.find_longest_prefix(Strategy({C}), base));
  CHECK(other_seed.entries().size() == 1);
}

TEST_CASE("index survives reopening and skips torn lines") {
  TempDir dir;
  const CacheScope scope{Digest::of("cfg"), 1};
  const auto base = tiny("base").fingerprint();
  std::string id;
  {
    StrategyCache cache(dir.path(), scope);
    id = cache.put(Strategy({C, O}), base, tiny("2")).id;
    cache.put(Strategy({S}), base, tiny("3"));
    cache.evict(cache.find_longest_prefix(Strategy({S}), base)->entry.id);
  }
  {
    std::ofstream idx(dir.path() / "index.jsonl", std::ios::app);
    idx << "{\"op\":\"put\",\"entry\":{\"id\":";  // crash mid-append
  }
  StrategyCache reopened(dir.path(), scope);
  CHECK(reopened.entries().size() == 1);
  auto m = reopened.find_longest_prefix(Strategy({C, O, G}), base);
  REQUIRE(m);
  CHECK(m->entry.id == id);
  CHECK(reopened.load(m->entry) == tiny("2"));
}

TEST_CASE("a second writer is refused") {
  TempDir dir;
  StrategyCache first(dir.path(), {});
  CHECK_THROWS_AS(StrategyCache(dir.path(), {}), CacheLockedError);
  CHECK_NOTHROW(StrategyCache(dir.path(), {}, StrategyCache::Mode::ReadOnly));
}

TEST_CASE("verify finds exactly the corrupted entry") {
  TempDir dir;
  StrategyCache cache(dir.path(), {Digest::of("cfg"), 1});
  const auto base = tiny("base").fingerprint();
  cache.put(Strategy({C}), base, tiny("1"));
  const auto victim = cache.put(Strategy({C, O}), base, tiny("2"));
  CHECK(cache.verify().mismatches.empty());
  CHECK(cache.verify().checked == 2);

  const auto path = dir.path() / victim.storage_path / "dataset.jsonl";
  auto bytes = read_file(path);
  bytes[10] = bytes[10] == 'x' ? 'y' : 'x';
  write_file(path, bytes);
  const auto report = cache.verify();
  REQUIRE(report.mismatches.size() == 1);
  CHECK(report.mismatches[0].first == victim.id);
  CHECK(report.mismatches[0].second == victim.key.canonical);
  CHECK_THROWS_AS((void)cache.load(victim), CacheIntegrityError);
}

TEST_CASE("prune by count, age and size") {
  TempDir dir;
  StrategyCache cache(dir.path(), {Digest::of("cfg"), 1});
  const auto base = tiny("base").fingerprint();
  for (const auto& f : {Strategy({C}), Strategy({O}), Strategy({G})}) cache.put(f, base, tiny(f.to_string()));
  const auto now = cache.entries().front().created_at;
  CHECK(cache.prune({}, now) == 0);
  CHECK(cache.prune({std::nullopt, 3600, std::nullopt}, now) == 0);
  CHECK(cache.prune({2, std::nullopt, std::nullopt}, now) == 1);
  CHECK(cache.prune({std::nullopt, std::nullopt, 1}, now) == 2);
  CHECK(cache.entries().empty());
  CHECK(cache.stats().evictions == 3);
}

TEST_CASE("apply with reuse: cold path caches every prefix") {
  TempDir dir;
  auto ctx = scripted_ctx();
  StrategyCache cache(dir.path(), CacheScope::of(ctx));
  Rng rng(5);
  const auto base = synthetic_corpus(rng, 30, 0.5);
  const auto out = apply_with_reuse(Strategy({C, O}), base, ctx, cache);
  CHECK(ctx.counter->total() == 2);
  CHECK(cache.find_longest_prefix(Strategy({C}), base.fingerprint())->suffix.empty());
  CHECK(cache.find_longest_prefix(Strategy({C, O}), base.fingerprint())->suffix.empty());
  auto fresh = scripted_ctx();
  CHECK(out == apply_strategy(Strategy({C, O}), base, fresh));
}

TEST_CASE("apply with reuse: suffix only and full hit") {
  TempDir dir;
  auto ctx = scripted_ctx();
  StrategyCache cache(dir.path(), CacheScope::of(ctx));
  Rng rng(6);
  const auto base = synthetic_corpus(rng, 30, 0.5);
  (void)apply_with_reuse(Strategy({C, O}), base, ctx, cache);
  const auto before = cache.stats();
  CHECK(before.hits == 0);
  CHECK(before.team_invocations_saved == 0);

  ctx.counter = std::make_shared<TeamInvocationCounter>();
  (void)apply_with_reuse(Strategy({C, O, S}), base, ctx, cache);
  CHECK(ctx.counter->total() == 1);
  CHECK(ctx.counter->per_team[static_cast<std::size_t>(S)] == 1);
  CHECK(cache.stats().team_invocations_saved == 2);
  CHECK(cache.stats().hits == 1);

  ctx.counter = std::make_shared<TeamInvocationCounter>();
  (void)apply_with_reuse(Strategy({C, O}), base, ctx, cache);
  CHECK(ctx.counter->total() == 0);
  CHECK(cache.stats().hits == 2);
  CHECK(apply_with_reuse(Strategy{}, base, ctx, cache) == base);
}

TEST_CASE("apply with reuse: corrupt entry is evicted and recomputed") {
  TempDir dir;
  auto ctx = scripted_ctx();
  StrategyCache cache(dir.path(), CacheScope::of(ctx));
  Rng rng(7);
  const auto base = synthetic_corpus(rng, 30, 0.5);
  const auto expected = apply_with_reuse(Strategy({C}), base, ctx, cache);
  const auto entry = cache.find_longest_prefix(Strategy({C}), base.fingerprint())->entry;
  write_file(dir.path() / entry.storage_path / "dataset.jsonl", "garbage\n");
  CHECK(apply_with_reuse(Strategy({C}), base, ctx, cache) == expected);
  CHECK(cache.verify().mismatches.empty());
}

TEST_CASE("apply with reuse rejects a mismatched scope") {
  TempDir dir;
  auto ctx = scripted_ctx(1);
  StrategyCache cache(dir.path(), {Digest::of("other"), 1});
  CHECK_THROWS_AS(apply_with_reuse(Strategy({C}), tiny("x"), ctx, cache), std::invalid_argument);
}

TEST_CASE("reuse soundness over overlapping strategy sequences") {
  TempDir dir;
  Rng rng(42);
  const auto base = synthetic_corpus(rng, 60, 0.5);
  auto ctx = scripted_ctx();
  StrategyCache cache(dir.path(), CacheScope::of(ctx));
  Strategy previous;
  for (int i = 0; i < 40; ++i) {
    Strategy f;
    // Half the time extend or re-use the previous strategy to force prefix hits.
    if (!previous.empty() && coin(rng, 0.5)) {
      std::vector<Team> teams = previous.teams();
      for (Team t : kAllTeams) {
        if (!previous.contains(t) && coin(rng, 0.5) && teams.size() < 4) {
          teams.push_back(t);
          break;
        }
      }
      f = Strategy(teams);
    } else {
      f = random_strategy(rng);
    }
    auto fresh = scripted_ctx();
    CHECK(apply_with_reuse(f, base, ctx, cache).canonical() == apply_strategy(f, base, fresh).canonical());
    for (std::size_t k = 1; k <= f.size(); ++k) {
      CHECK(cache.find_longest_prefix(split_at(f, k).first, base.fingerprint())->suffix.empty());
    }
    previous = f;
  }
}
