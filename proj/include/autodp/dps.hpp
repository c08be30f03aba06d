#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "autodp/corpus.hpp"
#include "autodp/screener.hpp"

namespace autodp {

/// Finite, non-zero embedding with its Euclidean norm cached.
class EmbeddingVector {
 public:
  /// Throws std::invalid_argument on empty, non-finite or zero-norm input.
  explicit EmbeddingVector(std::vector<double> values);

  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] std::size_t dim() const { return values_.size(); }
  [[nodiscard]] double norm() const { return norm_; }

 private:
  std::vector<double> values_;
  double norm_ = 0.0;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingClient {
 public:
  virtual ~EmbeddingClient() = default;
  [[nodiscard]] virtual std::string identity() const = 0;
  /// Raw vector for one text. May throw.
  virtual std::vector<double> embed(std::string_view text) = 0;
};

/// Deterministic feature-hashing embedder over tokenize() units and their bigrams.
/// Component 0 is a constant bias so no text maps to the zero vector.
class HashingEmbedder final : public EmbeddingClient {
 public:
  explicit HashingEmbedder(std::size_t dim = 256);

  [[nodiscard]] std::string identity() const override;
  std::vector<double> embed(std::string_view text) override;

 private:
  std::size_t dim_;
};

/// One vector per sample (embedding question + "\n" + answer). Any client failure,
/// bad vector or dimension mismatch aborts with std::runtime_error.
std::vector<EmbeddingVector> embed_all(const Dataset& d, EmbeddingClient& client);

/// Greedy coreset selection: each step takes the unselected index whose summed
/// cosine to the other unselected vectors is largest (lowest index on ties).
/// Returns indices in selection order. Throws std::invalid_argument if n > |vectors|.
std::vector<std::size_t> greedy_select(const std::vector<EmbeddingVector>& vectors, std::size_t n);

/// Half-up rounding of rate * n.
std::size_t round_count(double rate, std::size_t n);

/// Per-stratum sample sizes for a clean/noisy split, summing to round(rate * total).
struct StratumCounts {
  std::size_t clean = 0;
  std::size_t noisy = 0;
};
StratumCounts stratum_counts(double rate, std::size_t clean_size, std::size_t noisy_size);

struct SampleResult {
  Dataset sample;
  /// Positions of the sampled rows in the input dataset, ascending.
  std::vector<std::size_t> positions;
  std::size_t clean_selected = 0;
  std::size_t noisy_selected = 0;
};

/// Stratified greedy sampling over the screener's clean/noisy partition.
/// Output keeps the input order. Throws std::invalid_argument unless rate is in (0,1].
SampleResult stratified_sample(const Dataset& d, double rate, Screener& screener, EmbeddingClient& embedder);

}  // namespace autodp
