#include "cloudvault/classification.hpp"

namespace cloudvault {

SensitivityLevel preview_level(const DataItem& item, const RiskPolicy& policy) {
  const SensitivityLevel label = item.label.value_or(SensitivityLevel::Public);
  return max_level(label, detector_floor(policy, item.payload));
}

Result<ClassifiedData> classify(const Identity& caller, const DataItem& item,
                                const RiskPolicy& policy,
                                const AccountStore& accounts, AuditLog& audit,
                                Timestamp now) {
  if (!caller.has_role(Role::ClassifiedDataManager) &&
      caller.account_id != item.owner) {
    return Error{Errc::NotAuthorized,
                 "caller neither manages classified data nor owns the item"};
  }
  if (!accounts.find(item.owner).has_value()) {
    return Error{Errc::UnknownOwner, "item owner is not a known account"};
  }

  ClassifiedData classified;
  classified.item = item;
  classified.level = preview_level(item, policy);
  classified.classified_by = caller.account_id;
  classified.classified_at = now;

  auto event = audit.append(
      caller.account_id, EventCategory::Classification,
      "data owned by " + item.owner + " classified " +
          std::string(level_name(classified.level)),
      now);
  if (!event.ok()) return event.error();
  return classified;
}

Result<ClassifiedData> reclassify(const Identity& caller,
                                  const ClassifiedData& classified,
                                  SensitivityLevel new_level, AuditLog& audit,
                                  Timestamp now) {
  if (!caller.has_role(Role::ClassifiedDataManager)) {
    return Error{Errc::NotAuthorized,
                 "only a classified data manager may reclassify"};
  }

  ClassifiedData updated = classified;
  updated.level = new_level;
  updated.classified_by = caller.account_id;
  updated.classified_at = now;

  auto event = audit.append(
      caller.account_id, EventCategory::RiskReviewRequested,
      "reclassified " + std::string(level_name(classified.level)) + " -> " +
          std::string(level_name(new_level)) + "; risk review requested",
      now);
  if (!event.ok()) return event.error();
  return updated;
}

}  // namespace cloudvault
