#include "autodp/screener.hpp"

#include <chrono>

#include "autodp/quality.hpp"
#include "autodp/text.hpp"

namespace autodp {

HeuristicScreener::HeuristicScreener(OperatorConfig cfg)
    : cfg_(std::move(cfg)), identity_("heuristic/" + cfg_.digest().hex().substr(0, 16)) {}

ScreenerVerdict HeuristicScreener::classify(const Sample& s) {
  ScreenerVerdict v;
  if (s.question.empty()) v.reasons.emplace_back("missing-question");
  if (s.answer.empty()) v.reasons.emplace_back("missing-answer");
  const auto check = check_thresholds(sample_text(s), cfg_);
  if (!check.special_chars_ok) v.reasons.emplace_back("special-chars");
  if (!check.token_count_ok) v.reasons.emplace_back("token-count");
  if (!check.ngram_ok) v.reasons.emplace_back("ngram-repetition");
  if (has_markup_noise(s)) v.reasons.emplace_back("markup");
  v.label = v.reasons.empty() ? Label::Clean : Label::Noisy;
  return v;
}

ScreenerVerdict FallbackScreener::classify(const Sample& s) {
  try {
    return primary_->classify(s);
  } catch (const std::exception&) {
    ++fallbacks_;
    auto v = fallback_->classify(s);
    v.fallback = true;
    v.reasons.emplace_back("screener-fallback");
    return v;
  }
}

ScreenerVerdict CachingScreener::classify(const Sample& s) {
  auto key = std::make_pair(sample_fingerprint(s), inner_->identity());
  {
    std::lock_guard lock(mu_);
    if (auto it = memo_.find(key); it != memo_.end()) {
      ++hits_;
      return it->second;
    }
  }
  ++misses_;
  auto v = inner_->classify(s);
  // Fallback verdicts are not memoized so a recovered remote screener gets asked again.
  if (!v.fallback) {
    std::lock_guard lock(mu_);
    memo_.emplace(std::move(key), v);
  }
  return v;
}

ScreenerVerdict TimedScreener::classify(const Sample& s) {
  const auto t0 = std::chrono::steady_clock::now();
  auto v = inner_->classify(s);
  nanos_ += std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
  return v;
}

Partition partition(const Dataset& d, Screener& screener) {
  Partition p;
  std::vector<Sample> clean;
  std::vector<Sample> noisy;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (screener.classify(d[i]).noisy()) {
      noisy.push_back(d[i]);
      p.noisy_positions.push_back(i);
    } else {
      clean.push_back(d[i]);
      p.clean_positions.push_back(i);
    }
  }
  p.clean = Dataset(std::move(clean));
  p.noisy = Dataset(std::move(noisy));
  return p;
}

}  // namespace autodp
