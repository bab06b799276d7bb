#include "cloudvault/store.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

namespace cloudvault {

namespace {

std::function<void(const fs::path&)>& rename_hook() {
  static std::function<void(const fs::path&)> hook;
  return hook;
}

Status sync_fd(int fd) {
  if (::fsync(fd) != 0) {
    return Status(Errc::IoError, "fsync failed");
  }
  return Status::success();
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

std::optional<bool> parse_bool(const std::string& text) {
  const std::string lowered = to_lower(text);
  if (lowered == "true" || lowered == "1" || lowered == "yes") return true;
  if (lowered == "false" || lowered == "0" || lowered == "no") return false;
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

Result<Config> parse_config(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      return Error{Errc::BadValue,
                   "expected key=value at config line " + std::to_string(line_no)};
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "allow_test_profile") {
      const auto parsed = parse_bool(value);
      if (!parsed) return Error{Errc::BadValue, "bad boolean for " + key};
      config.allow_test_profile = *parsed;
    } else if (key == "min_level_for_std") {
      const auto parsed = parse_level(value);
      if (!parsed) return Error{Errc::BadValue, "bad level for " + key};
      config.min_level_for_std = *parsed;
    } else if (key == "max_attempts") {
      const auto parsed = parse_int(value);
      if (!parsed || *parsed <= 0) return Error{Errc::BadValue, "bad value for " + key};
      config.max_attempts = static_cast<int>(*parsed);
    } else if (key == "token_ttl_s") {
      const auto parsed = parse_int(value);
      if (!parsed || *parsed <= 0) return Error{Errc::BadValue, "bad value for " + key};
      config.token_ttl_s = *parsed;
    } else if (key == "inactivity_period_s") {
      const auto parsed = parse_int(value);
      if (!parsed || *parsed <= 0) return Error{Errc::BadValue, "bad value for " + key};
      config.inactivity_period_s = *parsed;
    } else if (key == "accreditation_period_days") {
      const auto parsed = parse_int(value);
      if (!parsed || *parsed <= 0) return Error{Errc::BadValue, "bad value for " + key};
      config.accreditation_period_days = static_cast<int>(*parsed);
    } else {
      return Error{Errc::UnknownConfigKey, "unknown config key " + key};
    }
  }
  return config;
}

Result<Config> load_config(const fs::path& path) {
  if (!fs::exists(path)) return Config{};
  auto bytes = read_file(path);
  if (!bytes.ok()) return bytes.error();
  return parse_config(to_string(bytes.value()));
}

std::string serialize_config(const Config& config) {
  std::ostringstream out;
  out << "allow_test_profile=" << (config.allow_test_profile ? "true" : "false")
      << "\n";
  out << "min_level_for_std=" << level_name(config.min_level_for_std) << "\n";
  out << "max_attempts=" << config.max_attempts << "\n";
  out << "token_ttl_s=" << config.token_ttl_s << "\n";
  out << "inactivity_period_s=" << config.inactivity_period_s << "\n";
  out << "accreditation_period_days=" << config.accreditation_period_days
      << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// atomic file primitives
// ---------------------------------------------------------------------------

void set_atomic_write_rename_hook(std::function<void(const fs::path&)> hook) {
  rename_hook() = std::move(hook);
}

Status atomic_write_file(const fs::path& path, const Bytes& data) {
  const fs::path tmp = path.string() + ".tmp." + to_hex(random_bytes(4));

  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  if (fd < 0) {
    return Status(Errc::IoError, "cannot create " + tmp.string());
  }
  const ssize_t written = ::write(fd, data.data(), data.size());
  Status synced = (written == static_cast<ssize_t>(data.size()))
                      ? sync_fd(fd)
                      : Status(Errc::IoError, "short write to " + tmp.string());
  ::close(fd);
  if (!synced.ok()) {
    std::error_code ec;
    fs::remove(tmp, ec);
    return synced;
  }

  if (rename_hook()) rename_hook()(tmp);

  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    return Status(Errc::IoError, "rename into " + path.string() + " failed");
  }
  return Status::success();
}

Status atomic_write_file(const fs::path& path, const std::string& data) {
  return atomic_write_file(path, Bytes(data.begin(), data.end()));
}

Result<Bytes> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return Error{Errc::NotFound, "cannot read " + path.string()};
  }
  Bytes data((std::istreambuf_iterator<char>(in)),
             std::istreambuf_iterator<char>());
  return data;
}

// ---------------------------------------------------------------------------
// advisory lock
// ---------------------------------------------------------------------------

StoreLock::~StoreLock() { release(); }

StoreLock::StoreLock(StoreLock&& other) noexcept : fd_(other.fd_) {
  other.fd_ = -1;
}

StoreLock& StoreLock::operator=(StoreLock&& other) noexcept {
  if (this != &other) {
    release();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

Status StoreLock::acquire(const fs::path& lock_path, Mode mode) {
  release();
  fd_ = ::open(lock_path.c_str(), O_WRONLY | O_CREAT, 0600);
  if (fd_ < 0) {
    return Status(Errc::IoError, "cannot open lock file " + lock_path.string());
  }
  const int op = (mode == Mode::Exclusive ? LOCK_EX : LOCK_SH) | LOCK_NB;
  if (::flock(fd_, op) != 0) {
    ::close(fd_);
    fd_ = -1;
    return Status(Errc::StoreUnavailable,
                  "store is locked by another process");
  }
  return Status::success();
}

void StoreLock::release() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
    fd_ = -1;
  }
}

// ---------------------------------------------------------------------------
// record store
// ---------------------------------------------------------------------------

std::string RecordStore::record_id_for(const SealedRecord& record) {
  return to_hex(record.mac).substr(0, 16);
}

Result<std::string> RecordStore::put_record(const Bytes& serialized,
                                            const KeyRing& keyring,
                                            AuditLog& audit,
                                            std::string_view actor,
                                            Timestamp now) {
  if (auto ready = audit.appendable(); !ready.ok()) return ready.error();
  if (!secure_data(serialized, keyring)) {
    return Error{Errc::VerifyFailed, "record does not verify; refusing to store"};
  }
  const SealedRecord record = parse_record(serialized).value();
  const std::string record_id = record_id_for(record);
  const fs::path path = dir_ / (record_id + ".cvs");

  if (fs::exists(path)) {
    auto existing = read_file(path);
    if (existing.ok() && existing.value() == serialized) {
      return record_id;  // idempotent re-put
    }
    return Error{Errc::IoError, "record id collision at " + record_id};
  }

  if (auto written = atomic_write_file(path, serialized); !written.ok()) {
    return written.error();
  }
  auto event = audit.append(actor, EventCategory::Seal,
                            "record " + record_id + " sealed and stored", now);
  if (!event.ok()) return event.error();
  return record_id;
}

Result<Bytes> RecordStore::get_record_bytes(const std::string& record_id) const {
  const fs::path path = dir_ / (record_id + ".cvs");
  if (!fs::exists(path)) {
    return Error{Errc::NotFound, "no record " + record_id};
  }
  return read_file(path);
}

Result<SealedRecord> RecordStore::get_record(const std::string& record_id) const {
  auto bytes = get_record_bytes(record_id);
  if (!bytes.ok()) return bytes.error();
  return parse_record(bytes.value());
}

std::vector<std::string> RecordStore::list() const {
  std::vector<std::string> ids;
  if (!fs::exists(dir_)) return ids;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() == ".cvs") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

// ---------------------------------------------------------------------------
// json codecs
// ---------------------------------------------------------------------------

namespace {

template <typename T, typename ParseFn>
Result<T> parse_named(const nlohmann::json& j, const char* field, ParseFn parse) {
  if (!j.contains(field) || !j[field].is_string()) {
    return Error{Errc::MalformedRecord, std::string("missing field ") + field};
  }
  const auto value = parse(j[field].template get<std::string>());
  if (!value) {
    return Error{Errc::MalformedRecord, std::string("bad value for ") + field};
  }
  return *value;
}

}  // namespace

std::string account_to_json(const Account& account) {
  nlohmann::json j;
  j["account_id"] = account.account_id;
  j["account_type"] = std::string(account_type_name(account.account_type));
  j["kind"] = std::string(account_kind_name(account.kind));
  j["state"] = std::string(account_state_name(account.state));
  auto roles = nlohmann::json::array();
  for (const auto role : account.roles) roles.push_back(std::string(role_name(role)));
  j["roles"] = roles;
  j["clearance"] = std::string(level_name(account.clearance));
  if (account.expires_at.has_value()) {
    j["expires_at"] = *account.expires_at;
  } else {
    j["expires_at"] = nullptr;
  }
  j["last_activity_at"] = account.last_activity_at;
  j["manager_id"] = account.manager_id;
  j["members"] = account.members;
  return j.dump();
}

Result<Account> account_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return Error{Errc::MalformedRecord, "account record is not valid JSON"};
  }
  Account account;
  if (!j.contains("account_id") || !j["account_id"].is_string()) {
    return Error{Errc::MalformedRecord, "account record lacks an id"};
  }
  account.account_id = j["account_id"].get<std::string>();

  auto type = parse_named<AccountType>(j, "account_type", parse_account_type);
  if (!type.ok()) return type.error();
  account.account_type = type.value();
  auto kind = parse_named<AccountKind>(j, "kind", parse_account_kind);
  if (!kind.ok()) return kind.error();
  account.kind = kind.value();
  auto state = parse_named<AccountState>(j, "state", parse_account_state);
  if (!state.ok()) return state.error();
  account.state = state.value();
  auto clearance = parse_named<SensitivityLevel>(j, "clearance", parse_level);
  if (!clearance.ok()) return clearance.error();
  account.clearance = clearance.value();

  if (j.contains("roles") && j["roles"].is_array()) {
    for (const auto& entry : j["roles"]) {
      const auto role = parse_role(entry.get<std::string>());
      if (!role) return Error{Errc::MalformedRecord, "unknown role in record"};
      account.roles.insert(*role);
    }
  }
  if (j.contains("expires_at") && j["expires_at"].is_number_integer()) {
    account.expires_at = j["expires_at"].get<Timestamp>();
  }
  if (j.contains("last_activity_at") && j["last_activity_at"].is_number_integer()) {
    account.last_activity_at = j["last_activity_at"].get<Timestamp>();
  }
  if (j.contains("manager_id") && j["manager_id"].is_string()) {
    account.manager_id = j["manager_id"].get<std::string>();
  }
  if (j.contains("members") && j["members"].is_array()) {
    for (const auto& entry : j["members"]) {
      account.members.insert(entry.get<std::string>());
    }
  }
  return account;
}

std::string request_to_json(const AccountRequest& request) {
  nlohmann::json j;
  j["request_id"] = request.request_id;
  j["requester"] = request.requester;
  j["account_type"] = std::string(account_type_name(request.account_type));
  j["kind"] = std::string(account_kind_name(request.kind));
  j["justification"] = request.justification;
  j["status"] = std::string(request_status_name(request.status));
  j["created_account_id"] = request.created_account_id;
  return j.dump();
}

Result<AccountRequest> request_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return Error{Errc::MalformedRecord, "request record is not valid JSON"};
  }
  AccountRequest request;
  if (!j.contains("request_id") || !j["request_id"].is_string()) {
    return Error{Errc::MalformedRecord, "request record lacks an id"};
  }
  request.request_id = j["request_id"].get<std::string>();
  if (j.contains("requester") && j["requester"].is_string()) {
    request.requester = j["requester"].get<std::string>();
  }
  auto type = parse_named<AccountType>(j, "account_type", parse_account_type);
  if (!type.ok()) return type.error();
  request.account_type = type.value();
  auto kind = parse_named<AccountKind>(j, "kind", parse_account_kind);
  if (!kind.ok()) return kind.error();
  request.kind = kind.value();
  auto status = parse_named<RequestStatus>(j, "status", parse_request_status);
  if (!status.ok()) return status.error();
  request.status = status.value();
  if (j.contains("justification") && j["justification"].is_string()) {
    request.justification = j["justification"].get<std::string>();
  }
  if (j.contains("created_account_id") && j["created_account_id"].is_string()) {
    request.created_account_id = j["created_account_id"].get<std::string>();
  }
  return request;
}

std::string credential_to_json(const CredentialRecord& record) {
  nlohmann::json j;
  j["account_id"] = record.account_id;
  j["name"] = record.name;
  j["salt"] = to_hex(record.salt);
  j["digest"] = to_hex(record.password_digest);
  j["failed_attempts"] = record.failed_attempts;
  j["locked"] = record.locked;
  return j.dump();
}

Result<CredentialRecord> credential_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return Error{Errc::MalformedRecord, "credential record is not valid JSON"};
  }
  CredentialRecord record;
  if (!j.contains("account_id") || !j.contains("name") || !j.contains("salt") ||
      !j.contains("digest")) {
    return Error{Errc::MalformedRecord, "credential record missing fields"};
  }
  record.account_id = j["account_id"].get<std::string>();
  record.name = j["name"].get<std::string>();
  auto salt = from_hex(j["salt"].get<std::string>());
  auto digest = from_hex(j["digest"].get<std::string>());
  if (!salt || !digest) {
    return Error{Errc::MalformedRecord, "credential record has bad hex"};
  }
  record.salt = std::move(*salt);
  record.password_digest = std::move(*digest);
  if (j.contains("failed_attempts") && j["failed_attempts"].is_number_integer()) {
    record.failed_attempts = j["failed_attempts"].get<int>();
  }
  if (j.contains("locked") && j["locked"].is_boolean()) {
    record.locked = j["locked"].get<bool>();
  }
  return record;
}

// ---------------------------------------------------------------------------
// keyring file: "CVKR" | version | count | (id_len id key32)* | active_len id
// ---------------------------------------------------------------------------

Bytes serialize_keyring(const KeyRing& keyring) {
  Bytes out = {'C', 'V', 'K', 'R', 0x01};
  out.push_back(static_cast<std::uint8_t>(keyring.keys.size()));
  for (const auto& [key_id, key] : keyring.keys) {
    out.push_back(static_cast<std::uint8_t>(key_id.size()));
    out.insert(out.end(), key_id.begin(), key_id.end());
    out.insert(out.end(), key.begin(), key.end());
  }
  out.push_back(static_cast<std::uint8_t>(keyring.active_key_id.size()));
  out.insert(out.end(), keyring.active_key_id.begin(),
             keyring.active_key_id.end());
  return out;
}

Result<KeyRing> parse_keyring(const Bytes& bytes) {
  const auto malformed = [] {
    return Error{Errc::MalformedRecord, "keyring file is malformed"};
  };
  std::size_t pos = 0;
  if (bytes.size() < 6 || bytes[0] != 'C' || bytes[1] != 'V' ||
      bytes[2] != 'K' || bytes[3] != 'R' || bytes[4] != 0x01) {
    return malformed();
  }
  pos = 5;
  const std::size_t count = bytes[pos++];
  KeyRing keyring;
  for (std::size_t i = 0; i < count; ++i) {
    if (pos >= bytes.size()) return malformed();
    const std::size_t id_len = bytes[pos++];
    if (bytes.size() - pos < id_len + kKeySize) return malformed();
    std::string key_id(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                       bytes.begin() + static_cast<std::ptrdiff_t>(pos + id_len));
    pos += id_len;
    Bytes key(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
              bytes.begin() + static_cast<std::ptrdiff_t>(pos + kKeySize));
    pos += kKeySize;
    keyring.keys[std::move(key_id)] = std::move(key);
  }
  if (pos >= bytes.size()) return malformed();
  const std::size_t active_len = bytes[pos++];
  if (bytes.size() - pos != active_len) return malformed();
  keyring.active_key_id.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                               bytes.end());
  if (keyring.keys.find(keyring.active_key_id) == keyring.keys.end()) {
    return malformed();
  }
  return keyring;
}

// ---------------------------------------------------------------------------
// controls file
// ---------------------------------------------------------------------------

std::string serialize_controls(const ControlSet& controls) {
  std::ostringstream out;
  for (const auto& control : controls.controls) {
    out << "control " << control.control_id << " "
        << (control.critical ? "critical" : "routine") << " "
        << control.period_days << " "
        << (control.last_assessed_at ? std::to_string(*control.last_assessed_at)
                                     : "-")
        << " " << control.description << "\n";
  }
  for (const auto& [key, ids] : controls.config_key_map) {
    for (const auto& id : ids) {
      out << "map " << key << " " << id << "\n";
    }
  }
  return out.str();
}

Result<ControlSet> parse_controls(const std::string& text) {
  ControlSet set;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string keyword;
    fields >> keyword;

    if (keyword == "control") {
      SecurityControl control;
      std::string criticality, period, assessed;
      fields >> control.control_id >> criticality >> period >> assessed;
      std::getline(fields, control.description);
      control.description = trim(control.description);
      if (criticality == "critical") {
        control.critical = true;
      } else if (criticality == "routine") {
        control.critical = false;
      } else {
        return Error{Errc::BadValue,
                     "bad criticality at controls line " + std::to_string(line_no)};
      }
      const auto period_days = parse_int(period);
      if (!period_days) {
        return Error{Errc::BadValue,
                     "bad period at controls line " + std::to_string(line_no)};
      }
      control.period_days = static_cast<int>(*period_days);
      if (assessed != "-") {
        const auto at = parse_int(assessed);
        if (!at) {
          return Error{Errc::BadValue,
                       "bad assessment time at controls line " +
                           std::to_string(line_no)};
        }
        control.last_assessed_at = *at;
      }
      if (auto valid = validate_control(control); !valid.ok()) {
        return valid.error();
      }
      set.controls.push_back(std::move(control));
    } else if (keyword == "map") {
      std::string key, control_id;
      fields >> key >> control_id;
      if (key.empty() || control_id.empty()) {
        return Error{Errc::BadValue,
                     "bad map at controls line " + std::to_string(line_no)};
      }
      set.config_key_map[key].push_back(control_id);
    } else {
      return Error{Errc::BadValue,
                   "unknown directive at controls line " + std::to_string(line_no)};
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// store-level save/load
// ---------------------------------------------------------------------------

Status save_account(const StoreLayout& layout, const Account& account) {
  return atomic_write_file(layout.accounts_dir() / (account.account_id + ".json"),
                           account_to_json(account) + "\n");
}

Status save_request(const StoreLayout& layout, const AccountRequest& request) {
  return atomic_write_file(
      layout.accounts_dir() / ("request-" + request.request_id + ".json"),
      request_to_json(request) + "\n");
}

Status save_credential(const StoreLayout& layout, const CredentialRecord& record) {
  return atomic_write_file(layout.credentials_dir() / (record.name + ".json"),
                           credential_to_json(record) + "\n");
}

Status save_keyring(const StoreLayout& layout, const KeyRing& keyring) {
  return atomic_write_file(layout.keyring_file(), serialize_keyring(keyring));
}

Status save_controls(const StoreLayout& layout, const ControlSet& controls) {
  return atomic_write_file(layout.controls_file(), serialize_controls(controls));
}

Status save_policy_file(const StoreLayout& layout, const std::string& text) {
  return atomic_write_file(layout.policy_file(), text);
}

Status load_accounts(const StoreLayout& layout, AccountStore& accounts) {
  const fs::path dir = layout.accounts_dir();
  if (!fs::exists(dir)) return Status::success();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    auto bytes = read_file(entry.path());
    if (!bytes.ok()) return Status(bytes.error());
    const std::string text = to_string(bytes.value());
    if (entry.path().filename().string().rfind("request-", 0) == 0) {
      auto request = request_from_json(text);
      if (!request.ok()) return Status(request.error());
      accounts.put_request(std::move(request.value()));
    } else {
      auto account = account_from_json(text);
      if (!account.ok()) return Status(account.error());
      accounts.put(std::move(account.value()));
    }
  }
  return Status::success();
}

Status load_credentials(const StoreLayout& layout, CredentialStore& credentials) {
  const fs::path dir = layout.credentials_dir();
  if (!fs::exists(dir)) return Status::success();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    auto bytes = read_file(entry.path());
    if (!bytes.ok()) return Status(bytes.error());
    auto record = credential_from_json(to_string(bytes.value()));
    if (!record.ok()) return Status(record.error());
    credentials.put(std::move(record.value()));
  }
  return Status::success();
}

Result<KeyRing> load_keyring(const StoreLayout& layout) {
  auto bytes = read_file(layout.keyring_file());
  if (!bytes.ok()) return bytes.error();
  return parse_keyring(bytes.value());
}

Result<ControlSet> load_controls(const StoreLayout& layout) {
  if (!fs::exists(layout.controls_file())) return ControlSet{};
  auto bytes = read_file(layout.controls_file());
  if (!bytes.ok()) return bytes.error();
  return parse_controls(to_string(bytes.value()));
}

}  // namespace cloudvault
