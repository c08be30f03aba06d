#pragma once

#include <cmath>
#include <cstdlib>
#include <map>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "autodp/corpus.hpp"
#include "autodp/model_client.hpp"

namespace autodp::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "autodp-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

inline Sample sample(std::string id, std::string q, std::string a) {
  return Sample{std::move(id), std::move(q), std::move(a), {}};
}

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

/// Lowercase pseudo-words; a large vocabulary keeps random sentences distinct.
inline std::string word(Rng& rng) {
  static constexpr const char* kSyll[] = {"ka", "lo", "mi", "ren", "to", "sa", "vel", "qui", "dor", "an",
                                          "pe", "zu", "tir", "mo", "gal", "ny", "os", "fe", "bri", "ux"};
  std::string w;
  const auto n = uniform(rng, 1, 3);
  for (std::size_t i = 0; i < n; ++i) w += kSyll[uniform(rng, 0, std::size(kSyll) - 1)];
  return w;
}

inline std::string sentence(Rng& rng, std::size_t words) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += word(rng);
  }
  return s;
}

/// Kinds of planted defects in synthetic_corpus.
enum class Defect { None, Markup, MissingAnswer, MissingQuestion, TooShort, Repetitive, Symbols, Duplicate };

inline Sample make_defective(Rng& rng, const std::string& id, Defect defect, const std::vector<Sample>& so_far) {
  Sample s = sample(id, sentence(rng, uniform(rng, 5, 9)) + "?", sentence(rng, uniform(rng, 10, 20)) + ".");
  switch (defect) {
    case Defect::None:
      break;
    case Defect::Markup:
      s.question = "<p>" + s.question + "</p>";
      s.answer = "<b>" + s.answer + "</b>&nbsp;";
      break;
    case Defect::MissingAnswer:
      s.answer.clear();
      break;
    case Defect::MissingQuestion:
      s.question.clear();
      break;
    case Defect::TooShort:
      s.question = word(rng) + "?";
      s.answer = word(rng) + ".";
      break;
    case Defect::Repetitive: {
      const auto phrase = sentence(rng, 3);
      s.answer = phrase;
      for (int i = 0; i < 6; ++i) s.answer += " " + phrase;
      break;
    }
    case Defect::Symbols:
      s.answer += " #$%^&*@!#$%^&*@!#$%^&*@!#$%^&*@!#$%^&*@!#$%^&*@!";
      break;
    case Defect::Duplicate:
      if (!so_far.empty()) {
        const auto& src = so_far[uniform(rng, 0, so_far.size() - 1)];
        s.question = src.question;
        s.answer = src.answer;
      }
      break;
  }
  return s;
}

/// n samples; each is defective with probability noise_rate, with the defect drawn uniformly.
inline Dataset synthetic_corpus(Rng& rng, std::size_t n, double noise_rate) {
  static constexpr Defect kDefects[] = {Defect::Markup,    Defect::MissingAnswer, Defect::MissingQuestion,
                                        Defect::TooShort,  Defect::Repetitive,    Defect::Symbols,
                                        Defect::Duplicate};
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Defect d = coin(rng, noise_rate) ? kDefects[uniform(rng, 0, std::size(kDefects) - 1)] : Defect::None;
    out.push_back(make_defective(rng, "s" + std::to_string(i), d, out));
  }
  return Dataset(std::move(out));
}

/// Scripted optimizer: trims whitespace and uppercases the first letter. Deterministic.
inline std::shared_ptr<ScriptedModelClient> scripted_optimizer() {
  return std::make_shared<ScriptedModelClient>(
      ClientRole::Optimizer,
      [](const ModelRequest& r) {
        std::string t = r.mode == "question" ? r.question : r.answer;
        const auto b = t.find_first_not_of(" \t\n");
        const auto e = t.find_last_not_of(" \t\n");
        t = b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
        if (!t.empty() && t[0] >= 'a' && t[0] <= 'z') t[0] = static_cast<char>(t[0] - 'a' + 'A');
        return ModelResponse::text_result(t);
      },
      "scripted-optimizer");
}

/// Scripted generator: "ANSWER(<question>)" / "QUESTION(<answer>)".
inline std::shared_ptr<ScriptedModelClient> scripted_generator() {
  return std::make_shared<ScriptedModelClient>(
      ClientRole::Generator,
      [](const ModelRequest& r) {
        if (r.mode == "question") return ModelResponse::text_result("QUESTION(" + r.answer + ")");
        return ModelResponse::text_result("ANSWER(" + r.question + ")");
      },
      "scripted-generator");
}

/// Scripted scorer: answer length in words, capped at 30, scaled to [0,1].
inline std::shared_ptr<ScriptedModelClient> scripted_scorer() {
  return std::make_shared<ScriptedModelClient>(
      ClientRole::Scorer,
      [](const ModelRequest& r) {
        double words = 0;
        bool in = false;
        for (char c : r.answer) {
          const bool sp = c == ' ';
          if (!sp && !in) ++words;
          in = !sp;
        }
        return ModelResponse::score_result(std::min(words, 30.0) / 30.0);
      },
      "scripted-scorer");
}

}  // namespace autodp::testing

#include "autodp/evaluation.hpp"

namespace autodp::testing {

/// Scores strategies from a table, ignoring the dataset; unknown strategies get `fallback`.
class LandscapeEvaluator final : public StrategyEvaluator {
 public:
  LandscapeEvaluator(std::map<Strategy, double> table, double fallback)
      : table_(std::move(table)), fallback_(fallback) {}
  EvalOutcome evaluate(const Strategy& f, const Dataset& base, std::size_t) override {
    ++calls[f];
    EvalOutcome out;
    auto it = table_.find(f);
    out.score = it != table_.end() ? it->second : fallback_;
    if (!std::isfinite(out.score)) out.error = "scripted failure";
    out.dataset_fingerprint = base.fingerprint();
    out.dataset_size = base.size();
    return out;
  }
  std::map<Strategy, int> calls;

 private:
  std::map<Strategy, double> table_;
  double fallback_;
};

}  // namespace autodp::testing
