#pragma once

#include <optional>
#include <string>

#include "cloudvault/accounts.hpp"
#include "cloudvault/levels.hpp"
#include "cloudvault/monitoring.hpp"
#include "cloudvault/result.hpp"
#include "cloudvault/risk.hpp"
#include "cloudvault/util.hpp"

namespace cloudvault {

/// A payload awaiting classification. The label is a caller-supplied hint;
/// content inspection may raise it but never lower it.
struct DataItem {
  Bytes payload;
  std::string owner;
  std::optional<SensitivityLevel> label;
};

struct ClassifiedData {
  DataItem item;
  SensitivityLevel level = SensitivityLevel::Public;
  std::string classified_by;
  Timestamp classified_at = 0;
};

/// level = max(label, detector floor). No authorization, no audit trail;
/// used by verification to preview what classify would decide.
SensitivityLevel preview_level(const DataItem& item, const RiskPolicy& policy);

/// Classifies an item. The caller must hold ClassifiedDataManager or own the
/// item; the owner must exist in the account store.
Result<ClassifiedData> classify(const Identity& caller, const DataItem& item,
                                const RiskPolicy& policy,
                                const AccountStore& accounts, AuditLog& audit,
                                Timestamp now);

/// Produces a fresh record at the new level and requests a risk review so
/// standing verdicts get re-evaluated.
Result<ClassifiedData> reclassify(const Identity& caller,
                                  const ClassifiedData& classified,
                                  SensitivityLevel new_level, AuditLog& audit,
                                  Timestamp now);

}  // namespace cloudvault
