#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace autodp {

/// 256-bit SHA-256 digest. Used for dataset fingerprints and cache keys.
class Digest {
 public:
  using Bytes = std::array<std::uint8_t, 32>;

  Digest() = default;
  explicit Digest(const Bytes& bytes) : bytes_(bytes) {}

  static Digest of(std::string_view data);
  /// Parses a 64-character lowercase/uppercase hex string. Throws std::invalid_argument.
  static Digest from_hex(std::string_view hex);

  [[nodiscard]] const Bytes& bytes() const { return bytes_; }
  [[nodiscard]] std::string hex() const;

  friend bool operator==(const Digest&, const Digest&) = default;
  friend auto operator<=>(const Digest&, const Digest&) = default;

 private:
  Bytes bytes_{};
};

/// Incremental SHA-256 for large canonical serializations.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  Digest finish();

 private:
  void* ctx_;
  bool finished_ = false;
};

}  // namespace autodp
