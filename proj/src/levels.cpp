#include "cloudvault/levels.hpp"

#include "cloudvault/util.hpp"

namespace cloudvault {

std::string_view level_name(SensitivityLevel level) {
  switch (level) {
    case SensitivityLevel::Public: return "public";
    case SensitivityLevel::Internal: return "internal";
    case SensitivityLevel::Confidential: return "confidential";
    case SensitivityLevel::Sensitive: return "sensitive";
  }
  return "public";
}

std::optional<SensitivityLevel> parse_level(std::string_view name) {
  const std::string lowered = to_lower(name);
  for (const auto level : kAllLevels) {
    if (lowered == level_name(level)) return level;
  }
  return std::nullopt;
}

std::optional<SensitivityLevel> level_from_ordinal(std::uint8_t value) {
  if (value > 3) return std::nullopt;
  return static_cast<SensitivityLevel>(value);
}

}  // namespace cloudvault
