#pragma once

#include <string>
#include <vector>

#include "cloudvault/monitoring.hpp"

namespace cloudvault::testing {

/// Checks the audit slice of one data_security call against the pipeline
/// ordering rules: Login events first, then at most one Classification, then
/// at most one of RiskDeny or Seal, then at most one VerifyFail; no other
/// categories belong to a pipeline call. Returns an empty string when the
/// trace is well-formed, else a description of the violation.
inline std::string check_call_trace(const std::vector<AuditEvent>& events) {
  int rank_seen = 0;
  int logins = 0, classifications = 0, denies = 0, seals = 0, verify_fails = 0;

  for (const auto& event : events) {
    int rank;
    switch (event.category) {
      case EventCategory::Login: rank = 0; ++logins; break;
      case EventCategory::Classification: rank = 1; ++classifications; break;
      case EventCategory::RiskDeny: rank = 2; ++denies; break;
      case EventCategory::Seal: rank = 2; ++seals; break;
      case EventCategory::VerifyFail: rank = 3; ++verify_fails; break;
      default:
        return "unexpected category in pipeline trace: " +
               std::string(category_name(event.category));
    }
    if (rank < rank_seen) {
      return "category " + std::string(category_name(event.category)) +
             " appeared out of order";
    }
    rank_seen = rank;
  }

  if (logins < 1) return "pipeline trace without a Login event";
  if (classifications > 1) return "more than one Classification event";
  if (denies + seals > 1) return "both RiskDeny and Seal (or duplicates)";
  if (verify_fails > 1) return "more than one VerifyFail event";
  if (verify_fails == 1 && denies == 1) return "VerifyFail after RiskDeny";
  return "";
}

}  // namespace cloudvault::testing
