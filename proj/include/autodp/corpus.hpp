#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "autodp/digest.hpp"

namespace autodp {

using Json = nlohmann::json;

/// Scalar metadata attached to a sample. Values must be null, boolean, number or string.
using MetaMap = std::map<std::string, Json>;

/// One question/answer record. Empty strings mark missing fields.
struct Sample {
  std::string id;
  std::string question;
  std::string answer;
  MetaMap meta;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Raised for malformed records, duplicate ids and unreadable files.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(line ? "line " + std::to_string(*line) + ": " + what : what), line_(line) {}

  /// 1-based line number of the offending record, when known.
  [[nodiscard]] std::optional<std::size_t> line() const { return line_; }

 private:
  std::optional<std::size_t> line_;
};

/// Canonical one-line serialization of a sample: sorted keys, fixed JSON escaping, no trailing newline.
std::string canonical_record(const Sample& sample);

/// Parses one record line. Missing question/answer/meta default to empty. Throws DataError.
Sample parse_record(std::string_view line);

/// Digest of a single sample's canonical record.
Digest sample_fingerprint(const Sample& sample);

/// Immutable, ordered collection of samples with a content fingerprint.
///
/// Copies are cheap (the sample vector is shared). Construction validates that
/// ids are non-empty and unique and that metadata values are scalars.
class Dataset {
 public:
  using const_iterator = std::vector<Sample>::const_iterator;

  Dataset();
  explicit Dataset(std::vector<Sample> samples);

  [[nodiscard]] const std::vector<Sample>& samples() const { return *samples_; }
  [[nodiscard]] std::size_t size() const { return samples_->size(); }
  [[nodiscard]] bool empty() const { return samples_->empty(); }
  [[nodiscard]] const Sample& operator[](std::size_t i) const { return (*samples_)[i]; }
  [[nodiscard]] const_iterator begin() const { return samples_->begin(); }
  [[nodiscard]] const_iterator end() const { return samples_->end(); }

  [[nodiscard]] const Digest& fingerprint() const { return fingerprint_; }

  /// Canonical bytes: every record followed by '\n'. Exactly what save_dataset writes.
  [[nodiscard]] std::string canonical() const;

  /// Keeps the samples at the given (strictly increasing) positions.
  [[nodiscard]] Dataset subset(const std::vector<std::size_t>& positions) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.fingerprint_ == b.fingerprint_ && a.samples() == b.samples();
  }

 private:
  std::shared_ptr<const std::vector<Sample>> samples_;
  Digest fingerprint_;
};

/// Digest over the canonical serialization of the dataset's samples in order.
inline Digest fingerprint(const Dataset& d) { return d.fingerprint(); }

/// Reads one record per non-blank line. Throws DataError on malformed lines,
/// duplicate ids or unreadable paths.
Dataset load_dataset(const std::filesystem::path& path);

/// Writes the canonical form atomically (temp file + rename). Throws DataError on I/O failure.
void save_dataset(const Dataset& d, const std::filesystem::path& path);

}  // namespace autodp
