#include "autodp/operator_config.hpp"

#include <cmath>

namespace autodp {

namespace {

bool is_ratio(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("operator config key \"") + key + "\": " + e.what());
    }
  }
}

template <typename T>
void read_range(const Json& j, const char* key, Range<T>& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_array() || it->size() != 2) {
    throw ConfigError(std::string("operator config key \"") + key + "\" must be a [lo, hi] pair");
  }
  try {
    out.lo = (*it)[0].get<T>();
    out.hi = (*it)[1].get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("operator config key \"") + key + "\": " + e.what());
  }
}

}  // namespace

std::string_view to_string(OptimizeMode m) {
  switch (m) {
    case OptimizeMode::Question: return "question";
    case OptimizeMode::Answer: return "answer";
    case OptimizeMode::Both: return "both";
  }
  return "both";
}

OptimizeMode optimize_mode_from_string(std::string_view s) {
  if (s == "question") return OptimizeMode::Question;
  if (s == "answer") return OptimizeMode::Answer;
  if (s == "both") return OptimizeMode::Both;
  throw ConfigError("unknown optimize mode \"" + std::string(s) + "\"");
}

void OperatorConfig::validate() const {
  const auto& m = minhash;
  if (m.shingle_size == 0) throw ConfigError("minhash.shingle_size must be positive");
  if (m.num_permutations == 0) throw ConfigError("minhash.num_permutations must be positive");
  if (m.bands == 0 || m.rows_per_band == 0) throw ConfigError("minhash bands and rows_per_band must be positive");
  if (m.bands * m.rows_per_band != m.num_permutations) {
    throw ConfigError("minhash.bands * minhash.rows_per_band must equal minhash.num_permutations");
  }
  if (!is_ratio(m.jaccard_threshold)) throw ConfigError("minhash.jaccard_threshold must lie in [0,1]");
  if (!is_ratio(special_char_range.lo) || !is_ratio(special_char_range.hi) ||
      special_char_range.lo > special_char_range.hi) {
    throw ConfigError("special_char_range must be an ordered interval within [0,1]");
  }
  if (token_range.lo > token_range.hi) throw ConfigError("token_range lower bound exceeds upper bound");
  if (ngram.n == 0) throw ConfigError("ngram.n must be at least 1");
  if (!is_ratio(ngram.max_repetition_ratio)) throw ConfigError("ngram.max_repetition_ratio must lie in [0,1]");
  if (!(selection_keep_fraction > 0.0 && selection_keep_fraction <= 1.0)) {
    throw ConfigError("selection_keep_fraction must lie in (0,1]");
  }
  if (generation_shots == 0) throw ConfigError("generation_shots must be positive");
}

Json OperatorConfig::to_json() const {
  return Json{
      {"minhash",
       {{"shingle_size", minhash.shingle_size},
        {"num_permutations", minhash.num_permutations},
        {"bands", minhash.bands},
        {"rows_per_band", minhash.rows_per_band},
        {"jaccard_threshold", minhash.jaccard_threshold},
        {"seed", minhash.seed}}},
      {"special_char_range", {special_char_range.lo, special_char_range.hi}},
      {"token_range", {token_range.lo, token_range.hi}},
      {"ngram", {{"n", ngram.n}, {"max_repetition_ratio", ngram.max_repetition_ratio}}},
      {"selection_keep_fraction", selection_keep_fraction},
      {"optimize_mode", std::string(to_string(optimize_mode))},
      {"generation_shots", generation_shots},
  };
}

OperatorConfig OperatorConfig::from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("operator config must be an object");
  OperatorConfig c;
  if (auto it = j.find("minhash"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("minhash must be an object");
    read(*it, "shingle_size", c.minhash.shingle_size);
    read(*it, "num_permutations", c.minhash.num_permutations);
    read(*it, "bands", c.minhash.bands);
    read(*it, "rows_per_band", c.minhash.rows_per_band);
    read(*it, "jaccard_threshold", c.minhash.jaccard_threshold);
    read(*it, "seed", c.minhash.seed);
  }
  read_range(j, "special_char_range", c.special_char_range);
  read_range(j, "token_range", c.token_range);
  if (auto it = j.find("ngram"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("ngram must be an object");
    read(*it, "n", c.ngram.n);
    read(*it, "max_repetition_ratio", c.ngram.max_repetition_ratio);
  }
  read(j, "selection_keep_fraction", c.selection_keep_fraction);
  if (auto it = j.find("optimize_mode"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("optimize_mode must be a string");
    c.optimize_mode = optimize_mode_from_string(it->get<std::string>());
  }
  read(j, "generation_shots", c.generation_shots);
  c.validate();
  return c;
}

Digest OperatorConfig::digest() const { return Digest::of(to_json().dump()); }

}  // namespace autodp
