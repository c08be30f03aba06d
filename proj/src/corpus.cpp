#include "autodp/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace autodp {

namespace {

constexpr const char* kKnownFields[] = {"id", "question", "answer", "meta"};

bool is_blank(std::string_view line) {
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
  }
  return true;
}

std::string text_field(const Json& record, const char* name) {
  auto it = record.find(name);
  if (it == record.end() || it->is_null()) return {};
  if (!it->is_string()) throw DataError(std::string("field \"") + name + "\" must be a string");
  return it->get<std::string>();
}

void check_meta_value(const std::string& key, const Json& value) {
  if (!(value.is_null() || value.is_boolean() || value.is_number() || value.is_string())) {
    throw DataError("meta value for key \"" + key + "\" is not a scalar");
  }
}

}  // namespace

std::string canonical_record(const Sample& sample) {
  Json record = Json::object();
  record["id"] = sample.id;
  record["question"] = sample.question;
  record["answer"] = sample.answer;
  Json meta = Json::object();
  for (const auto& [key, value] : sample.meta) meta[key] = value;
  record["meta"] = std::move(meta);
  try {
    return record.dump(-1, ' ', false, Json::error_handler_t::strict);
  } catch (const Json::type_error& e) {
    throw DataError("sample \"" + sample.id + "\" is not valid UTF-8: " + e.what());
  }
}

Sample parse_record(std::string_view line) {
  Json record;
  try {
    record = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
  if (!record.is_object()) throw DataError("record is not an object");
  for (const auto& item : record.items()) {
    bool known = false;
    for (const char* field : kKnownFields) known = known || item.key() == field;
    if (!known) throw DataError("unknown field \"" + item.key() + "\"");
  }

  Sample s;
  s.id = text_field(record, "id");
  s.question = text_field(record, "question");
  s.answer = text_field(record, "answer");
  if (auto it = record.find("meta"); it != record.end() && !it->is_null()) {
    if (!it->is_object()) throw DataError("field \"meta\" must be an object");
    for (const auto& item : it->items()) {
      check_meta_value(item.key(), item.value());
      s.meta.emplace(item.key(), item.value());
    }
  }
  return s;
}

Digest sample_fingerprint(const Sample& sample) { return Digest::of(canonical_record(sample)); }

Dataset::Dataset() : samples_(std::make_shared<const std::vector<Sample>>()), fingerprint_(Digest::of("")) {}

Dataset::Dataset(std::vector<Sample> samples) {
  std::unordered_set<std::string_view> ids;
  ids.reserve(samples.size());
  Sha256 hasher;
  for (const auto& s : samples) {
    if (s.id.empty()) throw DataError("sample id must be non-empty");
    for (const auto& [key, value] : s.meta) check_meta_value(key, value);
    hasher.update(canonical_record(s));
    hasher.update("\n");
  }
  fingerprint_ = hasher.finish();
  samples_ = std::make_shared<const std::vector<Sample>>(std::move(samples));
  for (const auto& s : *samples_) {
    if (!ids.insert(s.id).second) throw DataError("duplicate sample id \"" + s.id + "\"");
  }
}

std::string Dataset::canonical() const {
  std::string out;
  for (const auto& s : *samples_) {
    out += canonical_record(s);
    out += '\n';
  }
  return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& positions) const {
  std::vector<Sample> kept;
  kept.reserve(positions.size());
  for (std::size_t p : positions) kept.push_back(samples_->at(p));
  return Dataset(std::move(kept));
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file " + path.string());

  std::vector<Sample> samples;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    Sample s;
    try {
      s = parse_record(line);
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }
    if (s.id.empty()) throw DataError("record has an empty or missing id", line_no);
    if (!ids.insert(s.id).second) throw DataError("duplicate sample id \"" + s.id + "\"", line_no);
    samples.push_back(std::move(s));
  }
  if (in.bad()) throw DataError("read error on " + path.string());
  return Dataset(std::move(samples));
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    for (const auto& s : d) {
      out << canonical_record(s) << '\n';
    }
    out.flush();
    if (!out) throw DataError("write error on " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace autodp
