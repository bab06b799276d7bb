#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cloudvault/result.hpp"
#include "cloudvault/util.hpp"

namespace cloudvault {

enum class EventCategory {
  Login,
  AccountChange,
  AccountNotification,
  Classification,
  RiskDeny,
  Seal,
  VerifyFail,
  PolicyChange,
  ControlAssessment,
  RiskReviewRequested,
};

std::string_view category_name(EventCategory category);
std::optional<EventCategory> parse_category(std::string_view name);

/// One hash-chained entry of the append-only audit log.
/// hash = SHA-256(prev_hash || canonical event bytes); event 0 chains from
/// 32 zero bytes.
struct AuditEvent {
  std::uint64_t seq = 0;
  Timestamp timestamp = 0;
  std::string actor;  // account_id or "system"
  EventCategory category = EventCategory::Login;
  std::string detail;
  Bytes prev_hash;
  Bytes hash;
};

/// Unambiguous length-prefixed serialization of the hashed fields.
Bytes canonical_event_bytes(const AuditEvent& event);

Bytes chain_hash(const Bytes& prev_hash, const AuditEvent& event);

struct ChainReport {
  bool ok = true;
  std::optional<std::uint64_t> first_bad_seq;
};

/// Append-only audit log persisted as one JSON object per line. Appends are
/// serialized and fsynced before return; verification re-reads the persisted
/// bytes rather than trusting in-memory state.
class AuditLog {
 public:
  AuditLog() = default;
  AuditLog(const AuditLog&) = delete;
  AuditLog& operator=(const AuditLog&) = delete;

  /// Opens (creating if absent) and replays the file to recover the chain
  /// tip. A log that fails replay does not block opening: the store must stay
  /// diagnosable, so the log is marked damaged instead. Only real I/O
  /// failures are errors.
  Status open(const std::filesystem::path& path);

  /// Success iff the log is open and its replay found an intact chain.
  /// Mutating operations call this before touching any state so a damaged
  /// log halts changes rather than leaving them unaudited.
  Status appendable() const;

  Result<AuditEvent> append(std::string_view actor, EventCategory category,
                            std::string_view detail, Timestamp timestamp);

  /// Recomputes every hash from the persisted bytes.
  ChainReport verify_chain() const;

  Result<std::vector<AuditEvent>> read_all() const;
  std::vector<AuditEvent> tail(std::size_t count) const;

  std::uint64_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::uint64_t next_seq_ = 0;
  Bytes last_hash_;
  bool damaged_ = false;
  mutable std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// control assessment scheduling
// ---------------------------------------------------------------------------

struct SecurityControl {
  std::string control_id;
  std::string description;
  bool critical = false;
  int period_days = 365;  // critical controls must keep this <= 365
  std::optional<Timestamp> last_assessed_at;
};

Status validate_control(const SecurityControl& control);

/// Due iff never assessed or strictly more than the effective period has
/// elapsed. Non-critical controls are assessed once per accreditation cycle.
std::vector<std::string> assessments_due(const std::vector<SecurityControl>& controls,
                                         Timestamp now,
                                         int accreditation_period_days);

struct ImpactReport {
  std::string change_ref;
  std::set<std::string> affected_controls;
  bool requires_reassessment = false;
};

/// Maps changed configuration keys to their controls and clears those
/// controls' last assessment so the scheduler reports them due.
ImpactReport impact_analysis(std::string_view change_ref,
                             const std::set<std::string>& changed_keys,
                             const std::map<std::string, std::vector<std::string>>& control_map,
                             std::vector<SecurityControl>& controls);

}  // namespace cloudvault
