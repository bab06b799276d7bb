#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cloudvault {

using Bytes = std::vector<std::uint8_t>;
using Timestamp = std::int64_t;  // UTC seconds
using Seconds = std::int64_t;

// ---------------------------------------------------------------------------
// hex
// ---------------------------------------------------------------------------

std::string to_hex(const std::uint8_t* data, std::size_t len);
std::string to_hex(const Bytes& data);

/// Decodes lowercase or uppercase hex; nullopt on odd length or bad digit.
std::optional<Bytes> from_hex(std::string_view hex);

// ---------------------------------------------------------------------------
// bytes
// ---------------------------------------------------------------------------

Bytes to_bytes(std::string_view s);
std::string to_string(const Bytes& b);

void put_u32_be(Bytes& out, std::uint32_t v);
void put_u64_be(Bytes& out, std::uint64_t v);
std::uint32_t read_u32_be(const std::uint8_t* p);
std::uint64_t read_u64_be(const std::uint8_t* p);

/// Comparison whose running time depends only on the lengths.
bool constant_time_equal(const Bytes& a, const Bytes& b);

/// Fills the buffer from the OS entropy source.
Bytes random_bytes(std::size_t n);

/// Short random identifier with the given prefix, e.g. "a-1f2e3d4c".
std::string random_id(std::string_view prefix);

// ---------------------------------------------------------------------------
// time
// ---------------------------------------------------------------------------

/// Accepts "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS[Z]" and plain integer
/// seconds; all interpreted as UTC.
std::optional<Timestamp> parse_timestamp(std::string_view text);

std::string format_timestamp(Timestamp ts);

Timestamp now_utc();

// ---------------------------------------------------------------------------
// strings
// ---------------------------------------------------------------------------

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delim);

}  // namespace cloudvault
