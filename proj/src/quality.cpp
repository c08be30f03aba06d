#include "autodp/quality.hpp"

#include "autodp/text.hpp"

namespace autodp {

std::string sample_text(const Sample& s) { return s.question + "\n" + s.answer; }

ThresholdCheck check_thresholds(std::string_view text, const OperatorConfig& cfg) {
  ThresholdCheck c;
  c.special_chars_ok = cfg.special_char_range.contains(text::special_char_ratio(text));
  c.token_count_ok = cfg.token_range.contains(text::token_count(text));
  c.ngram_ok = text::ngram_repetition_ratio(text, cfg.ngram.n) <= cfg.ngram.max_repetition_ratio;
  return c;
}

double length_adequacy(std::size_t tokens, const Range<std::size_t>& range) {
  if (range.contains(tokens)) return 1.0;
  if (tokens < range.lo) return static_cast<double>(tokens) / static_cast<double>(range.lo);
  return static_cast<double>(range.hi) / static_cast<double>(tokens);
}

bool has_markup_noise(const Sample& s) {
  return text::strip_noise(s.question) != s.question || text::strip_noise(s.answer) != s.answer;
}

ModelResponse HeuristicScorerClient::call(const ModelRequest& request) {
  if (request.mode != "score") return ModelResponse::failure("scorer mode must be score");
  Sample s;
  s.question = request.question;
  s.answer = request.answer;
  const auto text = sample_text(s);
  const double passes = check_thresholds(text, cfg_).all() ? 1.0 : 0.0;
  const double complete = (!s.question.empty() && !s.answer.empty()) ? 1.0 : 0.0;
  const double adequacy = length_adequacy(text::token_count(text), cfg_.token_range);
  const double clean = has_markup_noise(s) ? 0.0 : 1.0;
  return ModelResponse::score_result((passes + complete + adequacy + clean) / 4.0);
}

}  // namespace autodp
