#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "autodp/corpus.hpp"
#include "autodp/digest.hpp"
#include "autodp/operators.hpp"
#include "autodp/strategy.hpp"

namespace autodp {

/// A stored dataset does not match its recorded fingerprint, or a put conflicts with an existing entry.
class CacheIntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Another process holds the cache root's writer lock.
class CacheLockedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operator-config digest and run seed every key of one cache handle is bound to.
struct CacheScope {
  Digest config_digest;
  std::uint64_t seed = 0;

  static CacheScope of(const ExecutionContext& ctx) { return {ctx.cfg.digest(), ctx.seed}; }
  friend bool operator==(const CacheScope&, const CacheScope&) = default;
};

struct CacheEntry {
  /// Directory name under entries/: hex digest of key and base fingerprint.
  std::string id;
  StrategyKey key;
  Strategy strategy;
  CacheScope scope;
  Digest base_fingerprint;
  Digest result_fingerprint;
  /// Relative to the cache root.
  std::filesystem::path storage_path;
  std::int64_t created_at = 0;  // unix seconds
  std::size_t producer_round = 0;
  std::size_t bytes = 0;
  std::size_t samples = 0;

  [[nodiscard]] Json to_json() const;
  static CacheEntry from_json(const Json& j);
};

struct PrefixMatch {
  CacheEntry entry;
  Strategy suffix;
};

struct CacheStats {
  std::size_t entries = 0;
  /// apply_with_reuse calls that started from a cached prefix.
  std::size_t hits = 0;
  std::size_t misses = 0;
  /// Team applications skipped thanks to cached prefixes.
  std::size_t team_invocations_saved = 0;
  /// Team applications actually performed by apply_with_reuse.
  std::size_t team_invocations = 0;
  std::size_t evictions = 0;

  [[nodiscard]] Json to_json() const;
};

struct PruneOptions {
  std::optional<std::size_t> max_entries;
  std::optional<std::int64_t> max_age_seconds;
  std::optional<std::size_t> max_bytes;
};

struct VerifyReport {
  std::size_t checked = 0;
  /// (entry id, key) of every entry whose stored bytes do not hash to its result fingerprint.
  std::vector<std::pair<std::string, std::string>> mismatches;
};

/// On-disk pool of processed datasets keyed by strategy prefix.
///
/// Layout under the root: entries/<id>/dataset.jsonl and entries/<id>/meta.json,
/// plus an append-only index.jsonl of put/evict records. A writable handle holds an
/// exclusive lock on <root>/.lock for its whole lifetime.
class StrategyCache {
 public:
  enum class Mode { ReadWrite, ReadOnly };

  /// Creates the root if needed and replays the index. Throws CacheLockedError when
  /// another writer holds the root.
  StrategyCache(std::filesystem::path root, CacheScope scope, Mode mode = Mode::ReadWrite);
  ~StrategyCache();
  StrategyCache(const StrategyCache&) = delete;
  StrategyCache& operator=(const StrategyCache&) = delete;

  [[nodiscard]] const std::filesystem::path& root() const { return root_; }
  [[nodiscard]] const CacheScope& scope() const { return scope_; }

  /// Persists result as the output of `strategy` applied to the dataset with fingerprint `base`.
  /// Idempotent when an identical result is already stored; throws CacheIntegrityError otherwise.
  CacheEntry put(const Strategy& strategy, const Digest& base, const Dataset& result, std::size_t producer_round = 0);

  /// Longest cached prefix of f for this base and scope, with the remaining suffix.
  [[nodiscard]] std::optional<PrefixMatch> find_longest_prefix(const Strategy& f, const Digest& base) const;

  /// Loads an entry's dataset. Throws CacheIntegrityError if the bytes do not match.
  [[nodiscard]] Dataset load(const CacheEntry& entry) const;

  /// Drops an entry from the index and deletes its files.
  void evict(const std::string& id);

  /// Removes entries (oldest first) until every given bound holds. Returns how many were removed.
  std::size_t prune(const PruneOptions& opts, std::int64_t now);

  [[nodiscard]] VerifyReport verify() const;

  /// All live entries, ordered by id.
  [[nodiscard]] std::vector<CacheEntry> entries() const;
  [[nodiscard]] CacheStats stats() const;

  void record_hit(std::size_t teams_saved);
  void record_miss();
  void record_invocations(std::size_t n);

 private:
  struct TrieNode {
    std::array<std::unique_ptr<TrieNode>, 4> children;
    std::optional<std::string> entry_id;
  };

  void replay_index();
  void append_index(const Json& record);
  void rewrite_index();
  void index_entry(const CacheEntry& e);
  void unindex_entry(const CacheEntry& e);
  void remove_locked(const std::string& id);
  [[nodiscard]] std::string trie_group(const CacheScope& scope, const Digest& base) const;
  void require_writable() const;

  std::filesystem::path root_;
  CacheScope scope_;
  Mode mode_;
  int lock_fd_ = -1;
  mutable std::mutex mu_;
  std::map<std::string, CacheEntry> entries_;
  std::map<std::string, TrieNode> tries_;
  CacheStats counters_;
};

/// Applies f to base, starting from the longest cached prefix and caching every
/// newly computed prefix. A corrupt cached entry is evicted and f is recomputed
/// from base. The cache scope must match ctx.
Dataset apply_with_reuse(const Strategy& f, const Dataset& base, ExecutionContext& ctx, StrategyCache& cache,
                         std::size_t round = 0);

}  // namespace autodp
