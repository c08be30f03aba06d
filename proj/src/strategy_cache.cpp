#include "autodp/strategy_cache.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

namespace autodp {

namespace fs = std::filesystem;

namespace {

constexpr const char* kIndexFile = "index.jsonl";
constexpr const char* kLockFile = ".lock";
constexpr const char* kDatasetFile = "dataset.jsonl";
constexpr const char* kMetaFile = "meta.json";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& p, const std::string& bytes) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << bytes;
    out.flush();
    if (!out) throw std::runtime_error("write error on " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

Json CacheEntry::to_json() const {
  return Json{{"id", id},
              {"key", key.canonical},
              {"strategy", strategy.to_string()},
              {"config_digest", scope.config_digest.hex()},
              {"seed", scope.seed},
              {"base_fingerprint", base_fingerprint.hex()},
              {"result_fingerprint", result_fingerprint.hex()},
              {"storage_path", storage_path.generic_string()},
              {"created_at", created_at},
              {"producer_round", producer_round},
              {"bytes", bytes},
              {"samples", samples}};
}

CacheEntry CacheEntry::from_json(const Json& j) {
  CacheEntry e;
  e.id = j.at("id").get<std::string>();
  e.key.canonical = j.at("key").get<std::string>();
  e.strategy = parse_strategy(j.at("strategy").get<std::string>());
  e.scope.config_digest = Digest::from_hex(j.at("config_digest").get<std::string>());
  e.scope.seed = j.at("seed").get<std::uint64_t>();
  e.base_fingerprint = Digest::from_hex(j.at("base_fingerprint").get<std::string>());
  e.result_fingerprint = Digest::from_hex(j.at("result_fingerprint").get<std::string>());
  e.storage_path = j.at("storage_path").get<std::string>();
  e.created_at = j.at("created_at").get<std::int64_t>();
  e.producer_round = j.at("producer_round").get<std::size_t>();
  e.bytes = j.at("bytes").get<std::size_t>();
  e.samples = j.at("samples").get<std::size_t>();
  return e;
}

Json CacheStats::to_json() const {
  return Json{{"entries", entries},
              {"hits", hits},
              {"misses", misses},
              {"team_invocations_saved", team_invocations_saved},
              {"team_invocations", team_invocations},
              {"evictions", evictions}};
}

StrategyCache::StrategyCache(fs::path root, CacheScope scope, Mode mode)
    : root_(std::move(root)), scope_(scope), mode_(mode) {
  if (mode_ == Mode::ReadWrite) {
    fs::create_directories(root_ / "entries");
    const auto lock_path = root_ / kLockFile;
    lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (lock_fd_ < 0) throw std::runtime_error("cannot open " + lock_path.string() + ": " + std::strerror(errno));
    if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(lock_fd_);
      lock_fd_ = -1;
      throw CacheLockedError("cache root " + root_.string() + " is locked by another process");
    }
  }
  replay_index();
}

StrategyCache::~StrategyCache() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

void StrategyCache::require_writable() const {
  if (mode_ != Mode::ReadWrite) throw std::logic_error("cache handle is read-only");
}

std::string StrategyCache::trie_group(const CacheScope& scope, const Digest& base) const {
  return scope.config_digest.hex() + "|" + std::to_string(scope.seed) + "|" + base.hex();
}

void StrategyCache::index_entry(const CacheEntry& e) {
  TrieNode* node = &tries_[trie_group(e.scope, e.base_fingerprint)];
  for (Team t : e.strategy.teams()) {
    auto& child = node->children[static_cast<std::size_t>(t)];
    if (!child) child = std::make_unique<TrieNode>();
    node = child.get();
  }
  node->entry_id = e.id;
}

void StrategyCache::unindex_entry(const CacheEntry& e) {
  auto it = tries_.find(trie_group(e.scope, e.base_fingerprint));
  if (it == tries_.end()) return;
  TrieNode* node = &it->second;
  for (Team t : e.strategy.teams()) {
    node = node->children[static_cast<std::size_t>(t)].get();
    if (node == nullptr) return;
  }
  if (node->entry_id == e.id) node->entry_id.reset();
}

void StrategyCache::replay_index() {
  const auto index = root_ / kIndexFile;
  if (!fs::exists(index)) return;
  std::ifstream in(index, std::ios::binary);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::exception&) {
      // A torn final append from a crashed writer; everything before it is intact.
      spdlog::warn("cache index {}: skipping unreadable line {}", index.string(), line_no);
      continue;
    }
    const auto op = rec.value("op", "");
    if (op == "put") {
      auto e = CacheEntry::from_json(rec.at("entry"));
      entries_[e.id] = e;
    } else if (op == "evict") {
      entries_.erase(rec.at("id").get<std::string>());
    }
  }
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (!fs::exists(root_ / it->second.storage_path / kDatasetFile)) {
      spdlog::warn("cache entry {} has no stored dataset; ignoring it", it->first);
      it = entries_.erase(it);
    } else {
      index_entry(it->second);
      ++it;
    }
  }
}

void StrategyCache::append_index(const Json& record) {
  const auto index = root_ / kIndexFile;
  const int fd = ::open(index.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw std::runtime_error("cannot open " + index.string() + ": " + std::strerror(errno));
  const std::string line = record.dump() + "\n";
  // One write() per record with O_APPEND keeps each record contiguous.
  const auto n = ::write(fd, line.data(), line.size());
  const int err = errno;
  ::fsync(fd);
  ::close(fd);
  if (n != static_cast<ssize_t>(line.size())) {
    throw std::runtime_error("short write to " + index.string() + ": " + std::strerror(err));
  }
}

void StrategyCache::rewrite_index() {
  std::string out;
  for (const auto& [_, e] : entries_) out += Json{{"op", "put"}, {"entry", e.to_json()}}.dump() + "\n";
  write_file_atomic(root_ / kIndexFile, out);
}

CacheEntry StrategyCache::put(const Strategy& strategy, const Digest& base, const Dataset& result,
                              std::size_t producer_round) {
  require_writable();
  CacheEntry e;
  e.key = StrategyKey::make(strategy, scope_.config_digest, scope_.seed);
  e.id = Digest::of(e.key.canonical + "|" + base.hex()).hex();
  e.strategy = strategy;
  e.scope = scope_;
  e.base_fingerprint = base;
  e.result_fingerprint = result.fingerprint();
  e.storage_path = fs::path("entries") / e.id;
  e.producer_round = producer_round;
  e.samples = result.size();

  std::lock_guard lock(mu_);
  if (auto it = entries_.find(e.id); it != entries_.end()) {
    if (it->second.result_fingerprint == e.result_fingerprint) return it->second;
    throw CacheIntegrityError("cache key " + e.key.canonical + " already holds result " +
                              it->second.result_fingerprint.hex() + ", refusing " + e.result_fingerprint.hex());
  }

  const auto dir = root_ / e.storage_path;
  fs::create_directories(dir);
  const std::string bytes = result.canonical();
  e.bytes = bytes.size();
  e.created_at = unix_now();
  write_file_atomic(dir / kDatasetFile, bytes);
  write_file_atomic(dir / kMetaFile, e.to_json().dump(2) + "\n");
  append_index(Json{{"op", "put"}, {"entry", e.to_json()}});
  entries_[e.id] = e;
  index_entry(e);
  return e;
}

std::optional<PrefixMatch> StrategyCache::find_longest_prefix(const Strategy& f, const Digest& base) const {
  std::lock_guard lock(mu_);
  auto it = tries_.find(trie_group(scope_, base));
  if (it == tries_.end()) return std::nullopt;
  const TrieNode* node = &it->second;
  std::optional<std::string> best = node->entry_id;
  std::size_t best_len = 0;
  const auto& teams = f.teams();
  for (std::size_t i = 0; i < teams.size(); ++i) {
    node = node->children[static_cast<std::size_t>(teams[i])].get();
    if (node == nullptr) break;
    if (node->entry_id) {
      best = node->entry_id;
      best_len = i + 1;
    }
  }
  if (!best) return std::nullopt;
  return PrefixMatch{entries_.at(*best), split_at(f, best_len).second};
}

Dataset StrategyCache::load(const CacheEntry& entry) const {
  const auto path = root_ / entry.storage_path / kDatasetFile;
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const std::exception& e) {
    throw CacheIntegrityError("cache entry " + entry.id + ": " + e.what());
  }
  if (Digest::of(bytes) != entry.result_fingerprint) {
    throw CacheIntegrityError("cache entry " + entry.id + " (" + entry.key.canonical +
                              ") does not match its recorded fingerprint");
  }
  return load_dataset(path);
}

void StrategyCache::remove_locked(const std::string& id) {
  auto it = entries_.find(id);
  if (it == entries_.end()) return;
  unindex_entry(it->second);
  const auto dir = root_ / it->second.storage_path;
  entries_.erase(it);
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (ec) spdlog::warn("cannot delete {}: {}", dir.string(), ec.message());
  ++counters_.evictions;
}

void StrategyCache::evict(const std::string& id) {
  require_writable();
  std::lock_guard lock(mu_);
  if (!entries_.contains(id)) return;
  append_index(Json{{"op", "evict"}, {"id", id}});
  remove_locked(id);
}

std::size_t StrategyCache::prune(const PruneOptions& opts, std::int64_t now) {
  require_writable();
  std::lock_guard lock(mu_);
  std::vector<const CacheEntry*> by_age;
  for (const auto& [_, e] : entries_) by_age.push_back(&e);
  std::stable_sort(by_age.begin(), by_age.end(),
                   [](const CacheEntry* a, const CacheEntry* b) { return a->created_at < b->created_at; });

  std::size_t total_bytes = 0;
  for (const auto* e : by_age) total_bytes += e->bytes;
  std::vector<std::string> doomed;
  std::size_t remaining = by_age.size();
  for (const auto* e : by_age) {
    const bool too_many = opts.max_entries && remaining > *opts.max_entries;
    const bool too_old = opts.max_age_seconds && now - e->created_at > *opts.max_age_seconds;
    const bool too_big = opts.max_bytes && total_bytes > *opts.max_bytes;
    if (!too_many && !too_old && !too_big) continue;
    doomed.push_back(e->id);
    total_bytes -= e->bytes;
    --remaining;
  }
  for (const auto& id : doomed) remove_locked(id);
  if (!doomed.empty()) rewrite_index();
  return doomed.size();
}

VerifyReport StrategyCache::verify() const {
  std::lock_guard lock(mu_);
  VerifyReport r;
  for (const auto& [id, e] : entries_) {
    ++r.checked;
    bool ok = false;
    try {
      ok = Digest::of(read_file(root_ / e.storage_path / kDatasetFile)) == e.result_fingerprint;
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) r.mismatches.emplace_back(id, e.key.canonical);
  }
  return r;
}

std::vector<CacheEntry> StrategyCache::entries() const {
  std::lock_guard lock(mu_);
  std::vector<CacheEntry> out;
  out.reserve(entries_.size());
  for (const auto& [_, e] : entries_) out.push_back(e);
  return out;
}

CacheStats StrategyCache::stats() const {
  std::lock_guard lock(mu_);
  CacheStats s = counters_;
  s.entries = entries_.size();
  return s;
}

void StrategyCache::record_hit(std::size_t teams_saved) {
  std::lock_guard lock(mu_);
  ++counters_.hits;
  counters_.team_invocations_saved += teams_saved;
}

void StrategyCache::record_miss() {
  std::lock_guard lock(mu_);
  ++counters_.misses;
}

void StrategyCache::record_invocations(std::size_t n) {
  std::lock_guard lock(mu_);
  counters_.team_invocations += n;
}

Dataset apply_with_reuse(const Strategy& f, const Dataset& base, ExecutionContext& ctx, StrategyCache& cache,
                         std::size_t round) {
  if (!(CacheScope::of(ctx) == cache.scope())) {
    throw std::invalid_argument("cache scope does not match the execution context's config and seed");
  }
  if (f.empty()) return base;

  Dataset current = base;
  std::size_t start = 0;
  if (auto match = cache.find_longest_prefix(f, base.fingerprint())) {
    try {
      current = cache.load(match->entry);
      start = match->entry.strategy.size();
    } catch (const CacheIntegrityError& e) {
      spdlog::warn("evicting corrupt cache entry and reprocessing {}: {}", f.to_string(), e.what());
      cache.evict(match->entry.id);
      current = base;
      start = 0;
    }
  }
  if (start > 0) {
    cache.record_hit(start);
  } else {
    cache.record_miss();
  }

  const auto& teams = f.teams();
  for (std::size_t i = start; i < teams.size(); ++i) {
    current = apply_team(teams[i], current, ctx);
    cache.record_invocations(1);
    cache.put(split_at(f, i + 1).first, base.fingerprint(), current, round);
  }
  return current;
}

}  // namespace autodp
