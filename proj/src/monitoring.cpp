#include "cloudvault/monitoring.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "cloudvault/sha256.hpp"

#include <fcntl.h>
#include <unistd.h>

namespace cloudvault {

namespace {

constexpr std::size_t kHashSize = 32;

const Bytes& genesis_hash() {
  static const Bytes zeros(kHashSize, 0x00);
  return zeros;
}

std::string event_to_line(const AuditEvent& event) {
  nlohmann::json j;
  j["seq"] = event.seq;
  j["ts"] = event.timestamp;
  j["actor"] = event.actor;
  j["category"] = std::string(category_name(event.category));
  j["detail"] = event.detail;
  j["prev_hash"] = to_hex(event.prev_hash);
  j["hash"] = to_hex(event.hash);
  return j.dump();
}

// Parses one persisted line. Any structural defect yields nullopt; the chain
// verifier treats that line's index as the first bad sequence.
std::optional<AuditEvent> event_from_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  if (!j.contains("seq") || !j.contains("ts") || !j.contains("actor") ||
      !j.contains("category") || !j.contains("detail") ||
      !j.contains("prev_hash") || !j.contains("hash")) {
    return std::nullopt;
  }
  if (!j["seq"].is_number_unsigned() || !j["ts"].is_number_integer() ||
      !j["actor"].is_string() || !j["category"].is_string() ||
      !j["detail"].is_string() || !j["prev_hash"].is_string() ||
      !j["hash"].is_string()) {
    return std::nullopt;
  }

  AuditEvent event;
  event.seq = j["seq"].get<std::uint64_t>();
  event.timestamp = j["ts"].get<Timestamp>();
  event.actor = j["actor"].get<std::string>();
  const auto category = parse_category(j["category"].get<std::string>());
  if (!category) return std::nullopt;
  event.category = *category;
  event.detail = j["detail"].get<std::string>();

  // Hashes are stored as lowercase hex; anything else is a defect.
  const std::string prev_hex = j["prev_hash"].get<std::string>();
  const std::string hash_hex = j["hash"].get<std::string>();
  if (prev_hex != to_lower(prev_hex) || hash_hex != to_lower(hash_hex)) {
    return std::nullopt;
  }
  auto prev = from_hex(prev_hex);
  auto hash = from_hex(hash_hex);
  if (!prev || prev->size() != kHashSize || !hash || hash->size() != kHashSize) {
    return std::nullopt;
  }
  event.prev_hash = std::move(*prev);
  event.hash = std::move(*hash);
  return event;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

std::string_view category_name(EventCategory category) {
  switch (category) {
    case EventCategory::Login: return "Login";
    case EventCategory::AccountChange: return "AccountChange";
    case EventCategory::AccountNotification: return "AccountNotification";
    case EventCategory::Classification: return "Classification";
    case EventCategory::RiskDeny: return "RiskDeny";
    case EventCategory::Seal: return "Seal";
    case EventCategory::VerifyFail: return "VerifyFail";
    case EventCategory::PolicyChange: return "PolicyChange";
    case EventCategory::ControlAssessment: return "ControlAssessment";
    case EventCategory::RiskReviewRequested: return "RiskReviewRequested";
  }
  return "Login";
}

std::optional<EventCategory> parse_category(std::string_view name) {
  static const EventCategory all[] = {
      EventCategory::Login,          EventCategory::AccountChange,
      EventCategory::AccountNotification, EventCategory::Classification,
      EventCategory::RiskDeny,       EventCategory::Seal,
      EventCategory::VerifyFail,     EventCategory::PolicyChange,
      EventCategory::ControlAssessment, EventCategory::RiskReviewRequested};
  for (const auto category : all) {
    if (name == category_name(category)) return category;
  }
  return std::nullopt;
}

Bytes canonical_event_bytes(const AuditEvent& event) {
  Bytes out;
  put_u64_be(out, event.seq);
  put_u64_be(out, static_cast<std::uint64_t>(event.timestamp));
  const auto put_field = [&out](std::string_view field) {
    put_u32_be(out, static_cast<std::uint32_t>(field.size()));
    out.insert(out.end(), field.begin(), field.end());
  };
  put_field(event.actor);
  put_field(category_name(event.category));
  put_field(event.detail);
  return out;
}

Bytes chain_hash(const Bytes& prev_hash, const AuditEvent& event) {
  Sha256 h;
  h.update(prev_hash);
  h.update(canonical_event_bytes(event));
  const auto digest = h.finish();
  return Bytes(digest.begin(), digest.end());
}

Status AuditLog::open(const std::filesystem::path& path) {
  std::lock_guard lock(mutex_);
  path_ = path;
  next_seq_ = 0;
  last_hash_ = genesis_hash();
  damaged_ = false;

  if (!std::filesystem::exists(path)) {
    std::ofstream touch(path, std::ios::binary | std::ios::app);
    if (!touch) {
      return Status(Errc::StoreUnavailable,
                    "cannot create audit log at " + path.string());
    }
    return Status::success();
  }

  // Full replay: any parse failure or chain break marks the log damaged.
  // The damaged flag only blocks appends; verification and reads still work
  // so the tampering can be reported.
  for (const auto& line : read_lines(path)) {
    auto event = event_from_line(line);
    if (!event || event->seq != next_seq_ || event->prev_hash != last_hash_ ||
        event->hash != chain_hash(event->prev_hash, *event)) {
      damaged_ = true;
      break;
    }
    next_seq_ = event->seq + 1;
    last_hash_ = event->hash;
  }
  return Status::success();
}

Status AuditLog::appendable() const {
  std::lock_guard lock(mutex_);
  if (path_.empty()) {
    return Status(Errc::StoreUnavailable, "audit log not opened");
  }
  if (damaged_) {
    return Status(Errc::StoreUnavailable,
                  "audit log failed verification; refusing unaudited changes");
  }
  return Status::success();
}

Result<AuditEvent> AuditLog::append(std::string_view actor,
                                    EventCategory category,
                                    std::string_view detail,
                                    Timestamp timestamp) {
  std::lock_guard lock(mutex_);
  if (path_.empty()) {
    return Error{Errc::StoreUnavailable, "audit log not opened"};
  }
  if (damaged_) {
    return Error{Errc::StoreUnavailable,
                 "audit log failed verification; refusing unaudited changes"};
  }

  AuditEvent event;
  event.seq = next_seq_;
  event.timestamp = timestamp;
  event.actor = std::string(actor);
  event.category = category;
  event.detail = std::string(detail);
  event.prev_hash = last_hash_;
  event.hash = chain_hash(event.prev_hash, event);

  const std::string line = event_to_line(event) + "\n";
  const int fd = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0600);
  if (fd < 0) {
    return Error{Errc::StoreUnavailable, "cannot open audit log for append"};
  }
  const ssize_t written = ::write(fd, line.data(), line.size());
  const bool synced = written == static_cast<ssize_t>(line.size()) &&
                      ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) {
    return Error{Errc::StoreUnavailable, "audit log append failed"};
  }

  next_seq_ = event.seq + 1;
  last_hash_ = event.hash;
  return event;
}

ChainReport AuditLog::verify_chain() const {
  std::lock_guard lock(mutex_);
  ChainReport report;
  Bytes expected_prev = genesis_hash();
  std::uint64_t index = 0;

  for (const auto& line : read_lines(path_)) {
    auto event = event_from_line(line);
    if (!event || event->seq != index || event->prev_hash != expected_prev ||
        event->hash != chain_hash(event->prev_hash, *event)) {
      report.ok = false;
      report.first_bad_seq = index;
      return report;
    }
    expected_prev = event->hash;
    ++index;
  }
  return report;
}

Result<std::vector<AuditEvent>> AuditLog::read_all() const {
  std::lock_guard lock(mutex_);
  std::vector<AuditEvent> events;
  std::uint64_t index = 0;
  for (const auto& line : read_lines(path_)) {
    auto event = event_from_line(line);
    if (!event) {
      return Error{Errc::MalformedRecord,
                   "audit log entry " + std::to_string(index) + " unreadable"};
    }
    events.push_back(std::move(*event));
    ++index;
  }
  return events;
}

std::vector<AuditEvent> AuditLog::tail(std::size_t count) const {
  auto all = read_all();
  if (!all.ok()) return {};
  auto& events = all.value();
  if (events.size() > count) {
    events.erase(events.begin(),
                 events.begin() + static_cast<std::ptrdiff_t>(events.size() - count));
  }
  return events;
}

std::uint64_t AuditLog::size() const {
  std::lock_guard lock(mutex_);
  return next_seq_;
}

Status validate_control(const SecurityControl& control) {
  if (control.control_id.empty()) {
    return Status(Errc::BadValue, "control id must not be empty");
  }
  if (control.period_days <= 0) {
    return Status(Errc::BadValue, "control period must be positive");
  }
  if (control.critical && control.period_days > 365) {
    return Status(Errc::BadValue,
                  "critical control " + control.control_id +
                      " must be assessed at least once a year");
  }
  return Status::success();
}

std::vector<std::string> assessments_due(const std::vector<SecurityControl>& controls,
                                         Timestamp now,
                                         int accreditation_period_days) {
  std::vector<std::string> due;
  for (const auto& control : controls) {
    const int effective_days =
        control.critical ? control.period_days : accreditation_period_days;
    const Seconds period = static_cast<Seconds>(effective_days) * 86400;
    if (!control.last_assessed_at.has_value() ||
        now - *control.last_assessed_at > period) {
      due.push_back(control.control_id);
    }
  }
  return due;
}

ImpactReport impact_analysis(std::string_view change_ref,
                             const std::set<std::string>& changed_keys,
                             const std::map<std::string, std::vector<std::string>>& control_map,
                             std::vector<SecurityControl>& controls) {
  ImpactReport report;
  report.change_ref = std::string(change_ref);
  for (const auto& key : changed_keys) {
    const auto it = control_map.find(key);
    if (it == control_map.end()) continue;
    report.affected_controls.insert(it->second.begin(), it->second.end());
  }
  report.requires_reassessment = !report.affected_controls.empty();

  for (auto& control : controls) {
    if (report.affected_controls.count(control.control_id) > 0) {
      control.last_assessed_at.reset();
    }
  }
  return report;
}

}  // namespace cloudvault
