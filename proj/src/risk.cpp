#include "cloudvault/risk.hpp"

#include <algorithm>
#include <sstream>

namespace cloudvault {

std::string_view channel_name(Channel channel) {
  switch (channel) {
    case Channel::Network: return "network";
    case Channel::LocalDisk: return "local_disk";
    case Channel::Print: return "print";
    case Channel::RemovableMedia: return "removable_media";
  }
  return "network";
}

std::optional<Channel> parse_channel(std::string_view name) {
  const std::string lowered = to_lower(name);
  for (const auto channel : kAllChannels) {
    if (lowered == channel_name(channel)) return channel;
  }
  return std::nullopt;
}

std::string_view decision_name(RiskDecision decision) {
  switch (decision) {
    case RiskDecision::Allow: return "allow";
    case RiskDecision::AllowWithEncryption: return "allow_with_encryption";
    case RiskDecision::Deny: return "deny";
  }
  return "allow";
}

Status validate_policy(const RiskPolicy& policy) {
  if (policy.version < 1) {
    return Status(Errc::BadValue, "policy version must be >= 1");
  }
  if (policy.encrypt_threshold >= policy.deny_threshold) {
    return Status(Errc::BadValue,
                  "encrypt_threshold must be below deny_threshold");
  }
  for (const auto level : kAllLevels) {
    const auto it = policy.level_weights.find(level);
    if (it == policy.level_weights.end() || it->second < 0) {
      return Status(Errc::BadValue, "missing or negative level weight");
    }
  }
  for (const auto channel : kAllChannels) {
    const auto it = policy.channel_weights.find(channel);
    if (it == policy.channel_weights.end() || it->second < 0) {
      return Status(Errc::BadValue, "missing or negative channel weight");
    }
  }
  for (const auto& rule : policy.rules) {
    if (rule.rule_id.empty() || rule.pattern.empty()) {
      return Status(Errc::BadValue, "rules need an id and a non-empty pattern");
    }
  }
  return Status::success();
}

RiskVerdict assess_operation(const RiskPolicy& policy, SensitivityLevel level,
                             Channel channel, bool media_encrypted,
                             AuditLog* audit, std::string_view actor,
                             Timestamp now) {
  RiskVerdict verdict;
  verdict.score = policy.level_weights.at(level) * policy.channel_weights.at(channel);

  const bool removable_or_print =
      channel == Channel::Print || channel == Channel::RemovableMedia;
  if (removable_or_print && !media_encrypted &&
      dominates(level, SensitivityLevel::Confidential)) {
    verdict.decision = RiskDecision::Deny;
    verdict.matched_rule = std::string(kMediaHardRuleId);
  } else if (verdict.score >= policy.deny_threshold) {
    verdict.decision = RiskDecision::Deny;
  } else if (verdict.score >= policy.encrypt_threshold) {
    verdict.decision = RiskDecision::AllowWithEncryption;
  } else {
    verdict.decision = RiskDecision::Allow;
  }

  if (verdict.decision == RiskDecision::Deny && audit != nullptr) {
    std::string detail = "high-risk procedure denied: level ";
    detail += level_name(level);
    detail += " via ";
    detail += channel_name(channel);
    detail += verdict.matched_rule ? " (rule " + *verdict.matched_rule + ")"
                                   : " (score " + std::to_string(verdict.score) + ")";
    audit->append(actor, EventCategory::RiskDeny, detail, now);
  }
  return verdict;
}

std::vector<DlpFinding> scan_content(const RiskPolicy& policy,
                                     const Bytes& payload) {
  std::vector<DlpFinding> findings;
  for (const auto& rule : policy.rules) {
    if (rule.pattern.empty() || rule.pattern.size() > payload.size()) continue;
    for (std::size_t offset = 0;
         offset + rule.pattern.size() <= payload.size(); ++offset) {
      if (std::equal(rule.pattern.begin(), rule.pattern.end(),
                     payload.begin() + static_cast<std::ptrdiff_t>(offset))) {
        findings.push_back({rule.rule_id, offset, rule.floor});
      }
    }
  }
  std::sort(findings.begin(), findings.end(),
            [](const DlpFinding& a, const DlpFinding& b) {
              if (a.offset != b.offset) return a.offset < b.offset;
              return a.pattern_id < b.pattern_id;
            });
  return findings;
}

SensitivityLevel detector_floor(const RiskPolicy& policy, const Bytes& payload) {
  SensitivityLevel floor = SensitivityLevel::Public;
  for (const auto& finding : scan_content(policy, payload)) {
    floor = max_level(floor, finding.floor);
  }
  return floor;
}

Result<RiskPolicy> update_policy(const Identity& caller,
                                 const RiskPolicy& current, RiskPolicy next,
                                 AuditLog& audit, Timestamp now) {
  if (!caller.has_role(Role::RiskManager)) {
    return Error{Errc::NotAuthorized, "caller lacks the risk manager role"};
  }
  if (next.version != current.version + 1) {
    return Error{Errc::BadVersion, "policy version must increment by one"};
  }
  if (auto valid = validate_policy(next); !valid.ok()) {
    return valid.error();
  }
  next.review_due = now + static_cast<Timestamp>(365) * 86400;

  auto event = audit.append(caller.account_id, EventCategory::PolicyChange,
                            "risk policy updated to version " +
                                std::to_string(next.version),
                            now);
  if (!event.ok()) return event.error();
  return next;
}

namespace {

const char* level_weight_key(SensitivityLevel level) {
  switch (level) {
    case SensitivityLevel::Public: return "level_weight_public";
    case SensitivityLevel::Internal: return "level_weight_internal";
    case SensitivityLevel::Confidential: return "level_weight_confidential";
    case SensitivityLevel::Sensitive: return "level_weight_sensitive";
  }
  return "level_weight_public";
}

const char* channel_weight_key(Channel channel) {
  switch (channel) {
    case Channel::Network: return "channel_weight_network";
    case Channel::LocalDisk: return "channel_weight_local_disk";
    case Channel::Print: return "channel_weight_print";
    case Channel::RemovableMedia: return "channel_weight_removable_media";
  }
  return "channel_weight_network";
}

std::optional<long long> parse_int(const std::string& text) {
  if (text.empty() ||
      text.find_first_not_of("-0123456789") != std::string::npos) {
    return std::nullopt;
  }
  try {
    return std::stoll(text);
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace

Result<RiskPolicy> parse_policy(const std::string& text) {
  RiskPolicy policy;
  policy.level_weights.clear();
  policy.channel_weights.clear();
  bool saw_version = false;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line.rfind("rule ", 0) == 0) {
      std::istringstream fields(line);
      std::string keyword, rule_id, floor_text, hex_text;
      fields >> keyword >> rule_id >> floor_text >> hex_text;
      const auto floor = parse_level(floor_text);
      const auto pattern = hex_text.empty() ? std::nullopt : from_hex(hex_text);
      if (rule_id.empty() || !floor || !pattern || pattern->empty()) {
        return Error{Errc::BadValue,
                     "bad rule at policy line " + std::to_string(line_no)};
      }
      policy.rules.push_back({rule_id, *floor, *pattern});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      return Error{Errc::BadValue,
                   "expected key=value at policy line " + std::to_string(line_no)};
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto number = parse_int(value);
    if (!number) {
      return Error{Errc::BadValue, "bad value for policy key " + key};
    }

    if (key == "version") {
      policy.version = static_cast<int>(*number);
      saw_version = true;
    } else if (key == "review_due") {
      policy.review_due = *number;
    } else if (key == "deny_threshold") {
      policy.deny_threshold = static_cast<int>(*number);
    } else if (key == "encrypt_threshold") {
      policy.encrypt_threshold = static_cast<int>(*number);
    } else {
      bool matched = false;
      for (const auto level : kAllLevels) {
        if (key == level_weight_key(level)) {
          policy.level_weights[level] = static_cast<int>(*number);
          matched = true;
          break;
        }
      }
      for (const auto channel : kAllChannels) {
        if (key == channel_weight_key(channel)) {
          policy.channel_weights[channel] = static_cast<int>(*number);
          matched = true;
          break;
        }
      }
      if (!matched) {
        return Error{Errc::BadValue, "unknown policy key " + key};
      }
    }
  }

  if (!saw_version) {
    return Error{Errc::BadValue, "policy file is missing the version"};
  }
  if (auto valid = validate_policy(policy); !valid.ok()) {
    return valid.error();
  }
  return policy;
}

std::string serialize_policy(const RiskPolicy& policy) {
  std::ostringstream out;
  out << "version=" << policy.version << "\n";
  out << "review_due=" << policy.review_due << "\n";
  out << "deny_threshold=" << policy.deny_threshold << "\n";
  out << "encrypt_threshold=" << policy.encrypt_threshold << "\n";
  for (const auto level : kAllLevels) {
    out << level_weight_key(level) << "=" << policy.level_weights.at(level)
        << "\n";
  }
  for (const auto channel : kAllChannels) {
    out << channel_weight_key(channel) << "="
        << policy.channel_weights.at(channel) << "\n";
  }
  for (const auto& rule : policy.rules) {
    out << "rule " << rule.rule_id << " " << level_name(rule.floor) << " "
        << to_hex(rule.pattern) << "\n";
  }
  return out.str();
}

RiskPolicy default_policy(Timestamp now) {
  RiskPolicy policy;
  policy.version = 1;
  policy.review_due = now + static_cast<Timestamp>(365) * 86400;
  policy.deny_threshold = 9;
  policy.encrypt_threshold = 3;
  policy.level_weights = {
      {SensitivityLevel::Public, 0},
      {SensitivityLevel::Internal, 1},
      {SensitivityLevel::Confidential, 2},
      {SensitivityLevel::Sensitive, 3},
  };
  policy.channel_weights = {
      {Channel::Network, 3},
      {Channel::LocalDisk, 1},
      {Channel::Print, 2},
      {Channel::RemovableMedia, 3},
  };
  policy.rules = {
      {"pii-ssn", SensitivityLevel::Confidential, to_bytes("SSN:")},
      {"secret-marker", SensitivityLevel::Sensitive, to_bytes("SECRET::")},
  };
  return policy;
}

}  // namespace cloudvault
