#include "autodp/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "autodp/quality.hpp"
#include "autodp/text.hpp"

namespace autodp {

namespace {

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mod_mersenne61(unsigned __int128 x) {
  auto lo = static_cast<std::uint64_t>(x & kMersenne61);
  auto hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t r = lo + hi;
  while (r >= kMersenne61) r -= kMersenne61;
  return r;
}

struct Permutation {
  std::uint64_t a;
  std::uint64_t b;
};

std::vector<Permutation> make_permutations(const MinHashConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::uint64_t> dist_a(1, kMersenne61 - 1);
  std::uniform_int_distribution<std::uint64_t> dist_b(0, kMersenne61 - 1);
  std::vector<Permutation> perms(cfg.num_permutations);
  for (auto& p : perms) {
    p.a = dist_a(rng);
    p.b = dist_b(rng);
  }
  return perms;
}

std::vector<std::uint64_t> shingle_hashes(std::string_view text, std::size_t k) {
  const auto cps = text::decode_utf8(text);
  std::vector<std::uint64_t> out;
  if (cps.size() <= k) {
    out.push_back(splitmix64(fnv1a(text::encode_utf8(cps))) % kMersenne61);
    return out;
  }
  out.reserve(cps.size() - k + 1);
  for (std::size_t i = 0; i + k <= cps.size(); ++i) {
    out.push_back(splitmix64(fnv1a(text::encode_utf8(std::u32string_view(cps).substr(i, k)))) % kMersenne61);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::uint64_t> signature_with(std::string_view text, const MinHashConfig& cfg,
                                          const std::vector<Permutation>& perms) {
  const auto shingles = shingle_hashes(text, cfg.shingle_size);
  std::vector<std::uint64_t> sig(perms.size(), std::numeric_limits<std::uint64_t>::max());
  for (std::size_t p = 0; p < perms.size(); ++p) {
    for (std::uint64_t x : shingles) {
      const auto v = mod_mersenne61(static_cast<unsigned __int128>(perms[p].a) * x + perms[p].b);
      sig[p] = std::min(sig[p], v);
    }
  }
  return sig;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

std::string dedup_text(const Sample& s) { return text::strip_noise(sample_text(s)); }

void require_role(const ModelClient& client, ClientRole role) {
  if (client.role() != role) {
    throw std::invalid_argument("client \"" + client.identity() + "\" has role " + std::string(to_string(client.role())) +
                                ", expected " + std::string(to_string(role)));
  }
}

std::string optimize_prompt(std::string_view field) {
  return "Rewrite the " + std::string(field) +
         " of this question-answer pair so it is accurate, fluent and concise. Reply with the rewritten " +
         std::string(field) + " only.";
}

std::string generate_prompt(std::string_view field) {
  return "Following the example pairs, write the missing " + std::string(field) +
         " for this question-answer pair. Reply with the " + std::string(field) + " only.";
}

Sample with_error(Sample s, const std::string& op, const std::string& why) {
  s.meta[kMetaError] = op + ": " + why;
  return s;
}

}  // namespace

std::vector<std::uint64_t> minhash_signature(std::string_view text, const MinHashConfig& cfg) {
  return signature_with(text, cfg, make_permutations(cfg));
}

std::vector<std::pair<std::size_t, std::size_t>> minhash_duplicate_pairs(const std::vector<std::string>& texts,
                                                                         const MinHashConfig& cfg) {
  const auto perms = make_permutations(cfg);
  std::vector<std::vector<std::uint64_t>> sigs;
  sigs.reserve(texts.size());
  for (const auto& t : texts) sigs.push_back(signature_with(t, cfg, perms));

  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t band = 0; band < cfg.bands; ++band) {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < sigs.size(); ++i) {
      std::uint64_t h = splitmix64(band);
      for (std::size_t r = 0; r < cfg.rows_per_band; ++r) {
        h = splitmix64(h ^ sigs[i][band * cfg.rows_per_band + r]);
      }
      buckets[h].push_back(i);
    }
    for (const auto& [_, members] : buckets) {
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) candidates.emplace_back(members[a], members[b]);
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [i, j] : candidates) {
    std::size_t equal = 0;
    for (std::size_t p = 0; p < cfg.num_permutations; ++p) equal += sigs[i][p] == sigs[j][p];
    const double estimate = static_cast<double>(equal) / static_cast<double>(cfg.num_permutations);
    if (estimate >= cfg.jaccard_threshold) out.emplace_back(i, j);
  }
  return out;
}

Dataset minhash_dedup(const Dataset& d, const OperatorConfig& cfg) {
  if (d.size() < 2) return d;
  std::vector<std::string> texts;
  texts.reserve(d.size());
  for (const auto& s : d) texts.push_back(dedup_text(s));

  std::vector<std::size_t> parent(d.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& [i, j] : minhash_duplicate_pairs(texts, cfg.minhash)) {
    auto ri = find_root(parent, i);
    auto rj = find_root(parent, j);
    // The smaller index is the root, so each root is its cluster's earliest sample.
    if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (find_root(parent, i) == i) keep.push_back(i);
  }
  if (keep.size() == d.size()) return d;
  return d.subset(keep);
}

Sample strip_noise(const Sample& s) {
  Sample out = s;
  out.question = text::strip_noise(s.question);
  out.answer = text::strip_noise(s.answer);
  return out;
}

Dataset apply_cleaning(const Dataset& d, const OperatorConfig& cfg) {
  const Dataset deduped = minhash_dedup(d, cfg);
  std::vector<Sample> kept;
  kept.reserve(deduped.size());
  for (const auto& s : deduped) {
    auto stripped = strip_noise(s);
    if (check_thresholds(sample_text(stripped), cfg).all()) kept.push_back(std::move(stripped));
  }
  return Dataset(std::move(kept));
}

Sample optimize_sample(const Sample& s, OptimizeMode mode, ModelClient& client, std::uint64_t seed) {
  require_role(client, ClientRole::Optimizer);
  std::vector<std::string> fields;
  if (mode != OptimizeMode::Answer && !s.question.empty()) fields.emplace_back("question");
  if (mode != OptimizeMode::Question && !s.answer.empty()) fields.emplace_back("answer");
  if (fields.empty()) return s;

  Sample out = s;
  for (const auto& field : fields) {
    ModelRequest req;
    req.role = ClientRole::Optimizer;
    req.mode = field;
    req.prompt = optimize_prompt(field);
    req.question = out.question;
    req.answer = out.answer;
    req.seed = seed;
    ModelResponse resp;
    try {
      resp = client.call(req);
    } catch (const std::exception& e) {
      resp = ModelResponse::failure(e.what());
    }
    if (!resp.ok) return with_error(s, "optimize", resp.error);
    (field == "question" ? out.question : out.answer) = resp.text;
  }
  out.meta[kMetaOptimized] = std::string(to_string(mode));
  return out;
}

Sample generate_missing(const Sample& s, const std::vector<Shot>& shots, ModelClient& client, std::uint64_t seed) {
  require_role(client, ClientRole::Generator);
  if (!s.question.empty() && !s.answer.empty()) return s;
  if (shots.empty()) throw std::invalid_argument("generate_missing needs at least one shot");

  Sample out = s;
  std::string generated;
  for (const char* field : {"question", "answer"}) {
    std::string& target = std::string_view(field) == "question" ? out.question : out.answer;
    if (!target.empty()) continue;
    ModelRequest req;
    req.role = ClientRole::Generator;
    req.mode = field;
    req.prompt = generate_prompt(field);
    req.question = out.question;
    req.answer = out.answer;
    req.shots = shots;
    req.seed = seed;
    ModelResponse resp;
    try {
      resp = client.call(req);
    } catch (const std::exception& e) {
      resp = ModelResponse::failure(e.what());
    }
    if (resp.ok && resp.text.empty()) resp = ModelResponse::failure("empty generation");
    if (!resp.ok) return with_error(s, "generate", resp.error);
    target = resp.text;
    if (!generated.empty()) generated += "+";
    generated += field;
  }
  out.meta[kMetaGenerated] = generated;
  return out;
}

Dataset select_high_quality(const Dataset& d, ModelClient& scorer, double keep_fraction, std::uint64_t seed) {
  require_role(scorer, ClientRole::Scorer);
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw std::invalid_argument("keep_fraction must lie in (0,1]");
  if (d.empty()) return d;

  std::vector<double> scores(d.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < d.size(); ++i) {
    ModelRequest req;
    req.role = ClientRole::Scorer;
    req.mode = "score";
    req.question = d[i].question;
    req.answer = d[i].answer;
    req.seed = seed;
    try {
      auto resp = scorer.call(req);
      if (resp.ok && resp.score && !std::isnan(*resp.score)) scores[i] = *resp.score;
    } catch (const std::exception&) {
      // Scored as -infinity.
    }
  }

  // The epsilon keeps e.g. 0.1 * 30 from rounding up to 4.
  const auto keep = std::min<std::size_t>(
      d.size(), static_cast<std::size_t>(std::ceil(keep_fraction * static_cast<double>(d.size()) - 1e-9)));
  if (keep == d.size()) return d;
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return d.subset(order);
}

ExecutionContext ExecutionContext::with_defaults(OperatorConfig cfg, std::uint64_t seed) {
  ExecutionContext ctx;
  ctx.optimizer = std::make_shared<TemplateOptimizerClient>();
  ctx.generator = std::make_shared<TemplateGeneratorClient>();
  ctx.scorer = std::make_shared<HeuristicScorerClient>(cfg);
  ctx.screener = std::make_shared<CachingScreener>(std::make_shared<HeuristicScreener>(cfg));
  ctx.cfg = std::move(cfg);
  ctx.seed = seed;
  return ctx;
}

namespace {

std::vector<Shot> pick_shots(const Partition& parts, std::size_t wanted) {
  std::vector<Shot> shots;
  for (const Dataset* pool : {&parts.clean, &parts.noisy}) {
    for (const auto& s : *pool) {
      if (shots.size() >= wanted) return shots;
      if (!s.question.empty() && !s.answer.empty()) shots.push_back({s.question, s.answer});
    }
  }
  return shots;
}

}  // namespace

Dataset apply_team(Team team, const Dataset& d, ExecutionContext& ctx) {
  if (ctx.counter) ctx.counter->add(team);
  switch (team) {
    case Team::Cleaning:
      return apply_cleaning(d, ctx.cfg);
    case Team::Selection:
      if (!ctx.scorer) throw std::invalid_argument("Selection team requires a scorer client");
      return select_high_quality(d, *ctx.scorer, ctx.cfg.selection_keep_fraction, ctx.seed);
    case Team::Optimization:
    case Team::Generation:
      break;
  }

  if (!ctx.screener) throw std::invalid_argument("model-backed teams require a screener");
  auto& client = team == Team::Optimization ? ctx.optimizer : ctx.generator;
  if (!client) throw std::invalid_argument(std::string(team_name(team)) + " team requires a client");

  Partition parts = partition(d, *ctx.screener);
  if (parts.noisy.empty()) return d;

  std::vector<Shot> shots;
  if (team == Team::Generation) shots = pick_shots(parts, ctx.cfg.generation_shots);

  std::vector<Sample> merged(d.samples());
  for (std::size_t k = 0; k < parts.noisy.size(); ++k) {
    const Sample& s = parts.noisy[k];
    Sample& slot = merged[parts.noisy_positions[k]];
    if (team == Team::Optimization) {
      slot = optimize_sample(s, ctx.cfg.optimize_mode, *client, ctx.seed);
    } else if (s.question.empty() || s.answer.empty()) {
      slot = shots.empty() ? with_error(s, "generate", "no complete samples available as shots")
                           : generate_missing(s, shots, *client, ctx.seed);
    }
  }
  return Dataset(std::move(merged));
}

Dataset apply_strategy(const Strategy& f, const Dataset& d, ExecutionContext& ctx) {
  Dataset current = d;
  for (Team t : f.teams()) current = apply_team(t, current, ctx);
  return current;
}

}  // namespace autodp
