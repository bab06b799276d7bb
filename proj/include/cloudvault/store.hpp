#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cloudvault/accounts.hpp"
#include "cloudvault/authn.hpp"
#include "cloudvault/monitoring.hpp"
#include "cloudvault/result.hpp"
#include "cloudvault/sealing.hpp"
#include "cloudvault/util.hpp"

namespace cloudvault {

namespace fs = std::filesystem;

/// On-disk layout under the store root (CLOUDVAULT_HOME or --home).
struct StoreLayout {
  fs::path root;

  fs::path accounts_dir() const { return root / "accounts"; }
  fs::path credentials_dir() const { return root / "credentials"; }
  fs::path records_dir() const { return root / "records"; }
  fs::path audit_log() const { return root / "audit.log"; }
  fs::path policy_file() const { return root / "policy.conf"; }
  fs::path controls_file() const { return root / "controls.conf"; }
  fs::path keyring_file() const { return root / "keyring.bin"; }
  fs::path config_file() const { return root / "config.conf"; }
  fs::path lock_file() const { return root / ".lock"; }
};

struct Config {
  bool allow_test_profile = false;
  SensitivityLevel min_level_for_std = SensitivityLevel::Internal;
  int max_attempts = 3;
  Seconds token_ttl_s = 3600;
  Seconds inactivity_period_s = 7776000;  // 90 days
  int accreditation_period_days = 1095;   // 3 years

  SealingConfig sealing() const {
    return SealingConfig{allow_test_profile, min_level_for_std};
  }
};

/// Parses `key=value` lines with `#` comments. Absent keys keep their
/// defaults; unknown keys and non-positive numerics are rejected.
Result<Config> parse_config(const std::string& text);
Result<Config> load_config(const fs::path& path);
std::string serialize_config(const Config& config);

// ---------------------------------------------------------------------------
// atomic file primitives
// ---------------------------------------------------------------------------

/// Writes to a temp file in the same directory, fsyncs, then renames into
/// place, so a crash leaves either the old or the new content.
Status atomic_write_file(const fs::path& path, const Bytes& data);
Status atomic_write_file(const fs::path& path, const std::string& data);

Result<Bytes> read_file(const fs::path& path);

/// Test hook fired after the temp file is written but before the rename;
/// throwing from it models a crash at the rename boundary.
void set_atomic_write_rename_hook(std::function<void(const fs::path&)> hook);

// ---------------------------------------------------------------------------
// advisory store lock
// ---------------------------------------------------------------------------

/// flock-based guard on the store root: one writer, any number of readers.
class StoreLock {
 public:
  enum class Mode { Exclusive, Shared };

  StoreLock() = default;
  ~StoreLock();
  StoreLock(StoreLock&& other) noexcept;
  StoreLock& operator=(StoreLock&& other) noexcept;
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

  Status acquire(const fs::path& lock_path, Mode mode = Mode::Exclusive);
  void release();
  bool held() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

// ---------------------------------------------------------------------------
// sealed record store
// ---------------------------------------------------------------------------

/// Records are stored as `<record_id>.cvs` where record_id is the first
/// 16 hex characters of the record's MAC. Only verified records are accepted.
class RecordStore {
 public:
  explicit RecordStore(fs::path dir) : dir_(std::move(dir)) {}

  Result<std::string> put_record(const Bytes& serialized, const KeyRing& keyring,
                                 AuditLog& audit, std::string_view actor,
                                 Timestamp now);

  Result<SealedRecord> get_record(const std::string& record_id) const;
  Result<Bytes> get_record_bytes(const std::string& record_id) const;
  std::vector<std::string> list() const;

  static std::string record_id_for(const SealedRecord& record);

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
};

// ---------------------------------------------------------------------------
// persistence codecs (accounts / credentials / keyring / controls)
// ---------------------------------------------------------------------------

std::string account_to_json(const Account& account);
Result<Account> account_from_json(const std::string& text);

std::string request_to_json(const AccountRequest& request);
Result<AccountRequest> request_from_json(const std::string& text);

std::string credential_to_json(const CredentialRecord& record);
Result<CredentialRecord> credential_from_json(const std::string& text);

Bytes serialize_keyring(const KeyRing& keyring);
Result<KeyRing> parse_keyring(const Bytes& bytes);

struct ControlSet {
  std::vector<SecurityControl> controls;
  std::map<std::string, std::vector<std::string>> config_key_map;
};

std::string serialize_controls(const ControlSet& controls);
Result<ControlSet> parse_controls(const std::string& text);

Status save_account(const StoreLayout& layout, const Account& account);
Status save_request(const StoreLayout& layout, const AccountRequest& request);
Status save_credential(const StoreLayout& layout, const CredentialRecord& record);
Status save_keyring(const StoreLayout& layout, const KeyRing& keyring);
Status save_controls(const StoreLayout& layout, const ControlSet& controls);
Status save_policy_file(const StoreLayout& layout, const std::string& text);

Status load_accounts(const StoreLayout& layout, AccountStore& accounts);
Status load_credentials(const StoreLayout& layout, CredentialStore& credentials);
Result<KeyRing> load_keyring(const StoreLayout& layout);
Result<ControlSet> load_controls(const StoreLayout& layout);

}  // namespace cloudvault
