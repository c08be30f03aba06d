#pragma once

#include <string>
#include <string_view>

#include "autodp/corpus.hpp"
#include "autodp/model_client.hpp"
#include "autodp/operator_config.hpp"

namespace autodp {

/// Text the per-sample filters look at: question, newline, answer.
std::string sample_text(const Sample& s);

struct ThresholdCheck {
  bool special_chars_ok = true;
  bool token_count_ok = true;
  bool ngram_ok = true;

  [[nodiscard]] bool all() const { return special_chars_ok && token_count_ok && ngram_ok; }
};

/// Evaluates the three cleaning filters (special-char ratio, token count, n-gram repetition).
ThresholdCheck check_thresholds(std::string_view text, const OperatorConfig& cfg);

/// 1 inside the token range, tokens/lo below it, hi/tokens above it.
double length_adequacy(std::size_t tokens, const Range<std::size_t>& range);

/// True when strip_noise would change either field.
bool has_markup_noise(const Sample& s);

/// Default scorer: mean of four per-sample indicators (filters pass, completeness,
/// length adequacy, no markup noise). Stands in for gradient-based selection.
class HeuristicScorerClient final : public ModelClient {
 public:
  explicit HeuristicScorerClient(OperatorConfig cfg) : cfg_(std::move(cfg)) {}

  [[nodiscard]] ClientRole role() const override { return ClientRole::Scorer; }
  [[nodiscard]] std::string identity() const override { return "heuristic-scorer/1"; }
  ModelResponse call(const ModelRequest& request) override;

 private:
  OperatorConfig cfg_;
};

}  // namespace autodp
