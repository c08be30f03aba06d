#include "autodp/dps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "autodp/quality.hpp"
#include "autodp/text.hpp"

namespace autodp {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("embedding vector is empty");
  double sq = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("embedding vector has a non-finite entry");
    sq += v * v;
  }
  norm_ = std::sqrt(sq);
  if (!(norm_ > 0.0) || !std::isfinite(norm_)) throw std::invalid_argument("embedding vector has zero norm");
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("cosine of vectors with different dimensions");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values()[i] * b.values()[i];
  return dot / (a.norm() * b.norm());
}

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ < 2) throw std::invalid_argument("HashingEmbedder needs at least 2 dimensions");
}

std::string HashingEmbedder::identity() const { return "hashing-embedder/" + std::to_string(dim_); }

std::vector<double> HashingEmbedder::embed(std::string_view s) {
  std::vector<double> v(dim_, 0.0);
  v[0] = 1.0;
  const auto tokens = text::tokenize(s);
  auto add = [&](std::uint64_t h, double w) {
    const std::size_t slot = 1 + static_cast<std::size_t>(h % (dim_ - 1));
    v[slot] += ((h >> 63) != 0U) ? -w : w;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(fnv1a(tokens[i]), 1.0);
    if (i + 1 < tokens.size()) add(fnv1a(tokens[i + 1], fnv1a(" ", fnv1a(tokens[i]))), 0.5);
  }
  return v;
}

std::vector<EmbeddingVector> embed_all(const Dataset& d, EmbeddingClient& client) {
  std::vector<EmbeddingVector> out;
  out.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::vector<double> raw;
    try {
      raw = client.embed(sample_text(d[i]));
      out.emplace_back(std::move(raw));
    } catch (const std::exception& e) {
      throw std::runtime_error("embedding sample \"" + d[i].id + "\" failed: " + e.what());
    }
    if (out.back().dim() != out.front().dim()) {
      throw std::runtime_error("embedding sample \"" + d[i].id + "\" returned dimension " +
                               std::to_string(out.back().dim()) + ", expected " + std::to_string(out.front().dim()));
    }
  }
  return out;
}

std::vector<std::size_t> greedy_select(const std::vector<EmbeddingVector>& vectors, std::size_t n) {
  if (n > vectors.size()) throw std::invalid_argument("greedy_select: n exceeds the number of vectors");
  const std::size_t m = vectors.size();
  std::vector<std::size_t> picked;
  if (n == 0) return picked;

  // Unit vectors make every cosine a dot product, and the sum over the pool a
  // dot with the pool's vector sum.
  const std::size_t dim = vectors.front().dim();
  std::vector<std::vector<double>> unit(m, std::vector<double>(dim));
  std::vector<double> total(dim, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (vectors[i].dim() != dim) throw std::invalid_argument("greedy_select: mixed dimensions");
    for (std::size_t k = 0; k < dim; ++k) {
      unit[i][k] = vectors[i].values()[k] / vectors[i].norm();
      total[k] += unit[i][k];
    }
  }
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) s += a[k] * b[k];
    return s;
  };

  std::vector<double> sums(m);
  for (std::size_t i = 0; i < m; ++i) sums[i] = dot(unit[i], total) - dot(unit[i], unit[i]);
  std::vector<bool> taken(m, false);
  picked.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (taken[i]) continue;
      if (best == m || sums[i] > sums[best] + 1e-9) best = i;
    }
    taken[best] = true;
    picked.push_back(best);
    for (std::size_t i = 0; i < m; ++i) {
      if (!taken[i]) sums[i] -= dot(unit[i], unit[best]);
    }
  }
  return picked;
}

std::size_t round_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 0.5 + 1e-9));
}

StratumCounts stratum_counts(double rate, std::size_t clean_size, std::size_t noisy_size) {
  StratumCounts c{std::min(clean_size, round_count(rate, clean_size)), std::min(noisy_size, round_count(rate, noisy_size))};
  const std::size_t target = round_count(rate, clean_size + noisy_size);
  const std::size_t got = c.clean + c.noisy;
  std::size_t& larger = clean_size >= noisy_size ? c.clean : c.noisy;
  const std::size_t larger_size = clean_size >= noisy_size ? clean_size : noisy_size;
  if (got + 1 == target && larger < larger_size) {
    ++larger;
  } else if (got == target + 1 && larger > 0) {
    --larger;
  }
  return c;
}

SampleResult stratified_sample(const Dataset& d, double rate, Screener& screener, EmbeddingClient& embedder) {
  if (!(rate > 0.0 && rate <= 1.0)) throw std::invalid_argument("sampling rate must lie in (0,1]");
  const Partition parts = partition(d, screener);
  const StratumCounts counts = stratum_counts(rate, parts.clean.size(), parts.noisy.size());

  SampleResult r;
  auto take = [&](const Dataset& stratum, const std::vector<std::size_t>& positions, std::size_t k) {
    if (k == 0) return;
    if (k == stratum.size()) {
      r.positions.insert(r.positions.end(), positions.begin(), positions.end());
      return;
    }
    const auto vectors = embed_all(stratum, embedder);
    for (std::size_t i : greedy_select(vectors, k)) r.positions.push_back(positions[i]);
  };
  take(parts.clean, parts.clean_positions, counts.clean);
  take(parts.noisy, parts.noisy_positions, counts.noisy);
  std::sort(r.positions.begin(), r.positions.end());
  r.clean_selected = counts.clean;
  r.noisy_selected = counts.noisy;
  r.sample = d.subset(r.positions);
  return r;
}

}  // namespace autodp
