#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace cloudvault {

/// The four-level sensitivity lattice, totally ordered by ordinal.
enum class SensitivityLevel : std::uint8_t {
  Public = 0,
  Internal = 1,
  Confidential = 2,
  Sensitive = 3,
};

constexpr std::array<SensitivityLevel, 4> kAllLevels = {
    SensitivityLevel::Public, SensitivityLevel::Internal,
    SensitivityLevel::Confidential, SensitivityLevel::Sensitive};

constexpr std::uint8_t ordinal(SensitivityLevel level) {
  return static_cast<std::uint8_t>(level);
}

/// true iff clearance may access data at `level`.
constexpr bool dominates(SensitivityLevel clearance, SensitivityLevel level) {
  return ordinal(clearance) >= ordinal(level);
}

constexpr SensitivityLevel max_level(SensitivityLevel a, SensitivityLevel b) {
  return ordinal(a) >= ordinal(b) ? a : b;
}

std::string_view level_name(SensitivityLevel level);

/// Case-insensitive: public|internal|confidential|sensitive.
std::optional<SensitivityLevel> parse_level(std::string_view name);

std::optional<SensitivityLevel> level_from_ordinal(std::uint8_t value);

}  // namespace cloudvault
