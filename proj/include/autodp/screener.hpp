#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "autodp/corpus.hpp"
#include "autodp/operator_config.hpp"

namespace autodp {

/// Clean corresponds to F(x)=0, Noisy to F(x)=1.
enum class Label { Clean = 0, Noisy = 1 };

struct ScreenerVerdict {
  Label label = Label::Clean;
  /// Rule identifiers that fired (heuristic screener), e.g. "missing-answer".
  std::vector<std::string> reasons;
  /// Set when a remote screener failed and the heuristic answered instead.
  bool fallback = false;

  [[nodiscard]] bool noisy() const { return label == Label::Noisy; }
};

/// Binary quality classifier.
class Screener {
 public:
  virtual ~Screener() = default;
  [[nodiscard]] virtual std::string identity() const = 0;
  virtual ScreenerVerdict classify(const Sample& s) = 0;
};

/// Rule-based default sharing thresholds with OperatorConfig.
///
/// Marks a sample noisy when a field is empty, any cleaning filter fails on the
/// sample text, or strip_noise would alter a field.
class HeuristicScreener final : public Screener {
 public:
  explicit HeuristicScreener(OperatorConfig cfg);

  [[nodiscard]] std::string identity() const override { return identity_; }
  ScreenerVerdict classify(const Sample& s) override;

 private:
  OperatorConfig cfg_;
  std::string identity_;
};

/// Uses `primary`; when it throws, answers with `fallback` and flags the verdict.
class FallbackScreener final : public Screener {
 public:
  FallbackScreener(std::shared_ptr<Screener> primary, std::shared_ptr<Screener> fallback)
      : primary_(std::move(primary)), fallback_(std::move(fallback)) {}

  [[nodiscard]] std::string identity() const override { return primary_->identity(); }
  ScreenerVerdict classify(const Sample& s) override;

  [[nodiscard]] std::size_t fallbacks() const { return fallbacks_.load(); }

 private:
  std::shared_ptr<Screener> primary_;
  std::shared_ptr<Screener> fallback_;
  std::atomic<std::size_t> fallbacks_{0};
};

/// Memoizes verdicts per (sample fingerprint, screener identity) for the lifetime of a run.
class CachingScreener final : public Screener {
 public:
  explicit CachingScreener(std::shared_ptr<Screener> inner) : inner_(std::move(inner)) {}

  [[nodiscard]] std::string identity() const override { return inner_->identity(); }
  ScreenerVerdict classify(const Sample& s) override;

  [[nodiscard]] std::size_t hits() const { return hits_.load(); }
  [[nodiscard]] std::size_t misses() const { return misses_.load(); }

 private:
  std::shared_ptr<Screener> inner_;
  std::mutex mu_;
  std::map<std::pair<Digest, std::string>, ScreenerVerdict> memo_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

/// Accumulates the wall time spent inside the wrapped screener.
class TimedScreener final : public Screener {
 public:
  explicit TimedScreener(std::shared_ptr<Screener> inner) : inner_(std::move(inner)) {}

  [[nodiscard]] std::string identity() const override { return inner_->identity(); }
  ScreenerVerdict classify(const Sample& s) override;

  [[nodiscard]] double seconds() const { return static_cast<double>(nanos_.load()) * 1e-9; }

 private:
  std::shared_ptr<Screener> inner_;
  std::atomic<std::int64_t> nanos_{0};
};

struct Partition {
  Dataset clean;
  Dataset noisy;
  /// Positions of each part's samples in the input dataset.
  std::vector<std::size_t> clean_positions;
  std::vector<std::size_t> noisy_positions;
};

/// Splits d into disjoint clean/noisy parts, order preserved within each part.
Partition partition(const Dataset& d, Screener& screener);

}  // namespace autodp
