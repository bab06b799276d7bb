#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "cloudvault/util.hpp"

namespace cloudvault {

/// Incremental SHA-256 (FIPS 180-4).
class Sha256 {
 public:
  static constexpr std::size_t kDigestSize = 32;
  static constexpr std::size_t kBlockSize = 64;

  Sha256();

  void update(const std::uint8_t* data, std::size_t len);
  void update(const Bytes& data) { update(data.data(), data.size()); }
  std::array<std::uint8_t, kDigestSize> finish();

 private:
  void process_block(const std::uint8_t* block);

  std::array<std::uint32_t, 8> state_;
  std::uint64_t total_len_ = 0;
  std::array<std::uint8_t, kBlockSize> buffer_{};
  std::size_t buffered_ = 0;
};

Bytes sha256(const Bytes& data);
std::string sha256_hex(const Bytes& data);

/// HMAC-SHA-256 (RFC 2104).
Bytes hmac_sha256(const Bytes& key, const Bytes& message);

}  // namespace cloudvault
