#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cloudvault/accounts.hpp"
#include "cloudvault/levels.hpp"
#include "cloudvault/monitoring.hpp"
#include "cloudvault/result.hpp"
#include "cloudvault/util.hpp"

namespace cloudvault {

enum class Channel { Network, LocalDisk, Print, RemovableMedia };

constexpr std::array<Channel, 4> kAllChannels = {
    Channel::Network, Channel::LocalDisk, Channel::Print,
    Channel::RemovableMedia};

std::string_view channel_name(Channel channel);
std::optional<Channel> parse_channel(std::string_view name);

enum class RiskDecision { Allow, AllowWithEncryption, Deny };

std::string_view decision_name(RiskDecision decision);

/// A DLP content rule: a literal byte pattern with the sensitivity floor it
/// forces on matching payloads.
struct RiskRule {
  std::string rule_id;
  SensitivityLevel floor = SensitivityLevel::Public;
  Bytes pattern;
};

/// The documented, versioned risk assessment policy.
struct RiskPolicy {
  int version = 1;
  std::vector<RiskRule> rules;
  Timestamp review_due = 0;
  std::map<Channel, int> channel_weights;
  std::map<SensitivityLevel, int> level_weights;
  int deny_threshold = 9;
  int encrypt_threshold = 3;
};

Status validate_policy(const RiskPolicy& policy);

struct RiskVerdict {
  int score = 0;
  RiskDecision decision = RiskDecision::Allow;
  std::optional<std::string> matched_rule;
};

struct DlpFinding {
  std::string pattern_id;
  std::size_t offset = 0;
  SensitivityLevel floor = SensitivityLevel::Public;
};

/// Rule id reported when the unencrypted-media hard rule fires.
inline constexpr std::string_view kMediaHardRuleId = "hard-unencrypted-media";

/// Scores (level weight x channel weight) against the two thresholds.
/// Confidential-or-above data on unencrypted print/removable media is denied
/// outright, independent of the weights. When an audit log is supplied, a
/// Deny verdict is recorded as a high-risk procedure.
RiskVerdict assess_operation(const RiskPolicy& policy, SensitivityLevel level,
                             Channel channel, bool media_encrypted,
                             AuditLog* audit = nullptr,
                             std::string_view actor = "system",
                             Timestamp now = 0);

/// Every match of every configured pattern, ordered by (offset, pattern_id).
std::vector<DlpFinding> scan_content(const RiskPolicy& policy,
                                     const Bytes& payload);

/// Highest floor among the findings; Public for clean content.
SensitivityLevel detector_floor(const RiskPolicy& policy, const Bytes& payload);

/// Replaces the policy. The caller must hold RiskManager and the new version
/// must be exactly old version + 1; review_due is pushed one year out.
Result<RiskPolicy> update_policy(const Identity& caller,
                                 const RiskPolicy& current, RiskPolicy next,
                                 AuditLog& audit, Timestamp now);

// Plain-text policy file: key=value lines plus one
// `rule <id> <floor-level> <hex-encoded-bytes>` line per pattern.
Result<RiskPolicy> parse_policy(const std::string& text);
std::string serialize_policy(const RiskPolicy& policy);

/// The documented default policy written at store initialization.
RiskPolicy default_policy(Timestamp now);

}  // namespace cloudvault
