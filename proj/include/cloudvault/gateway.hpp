#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cloudvault/accounts.hpp"
#include "cloudvault/authn.hpp"
#include "cloudvault/classification.hpp"
#include "cloudvault/monitoring.hpp"
#include "cloudvault/result.hpp"
#include "cloudvault/risk.hpp"
#include "cloudvault/sealing.hpp"
#include "cloudvault/store.hpp"

namespace cloudvault {

/// The three pipeline flags plus the artifacts they guard. Each flag moves
/// false -> true at most once per call: secured requires verify, verify
/// requires log.
struct PipelineState {
  bool log = false;
  bool verify = false;
  bool secured = false;
  std::optional<SessionToken> session;
  std::optional<SealedRecord> record;
};

inline constexpr std::string_view kMsgSecured = "secured";
inline constexpr std::string_view kMsgWrongSecured = "wrong secured";
inline constexpr std::string_view kMsgAccessDenied = "access denied";
inline constexpr std::string_view kMsgLoginFailed = "login failed";

struct Outcome {
  std::string message;
  PipelineState state;
  std::optional<std::string> record_ref;
  std::vector<std::string> steps;  // executed pipeline steps, in order
};

/// Test-only fault injection points.
struct GatewayHooks {
  // Runs after the sealed record is durably stored, before the re-read
  // verification pass; receives the record file path.
  std::function<void(const fs::path&)> after_store;
};

/// An opened store with every subsystem wired together.
class Vault {
 public:
  /// Creates the directory layout, a fresh keyring, the default policy,
  /// config and controls, and a bootstrap account-manager account with the
  /// given login.
  static Result<std::unique_ptr<Vault>> init(const fs::path& root,
                                             const std::string& admin_name,
                                             std::string_view admin_password);

  static Result<std::unique_ptr<Vault>> open(const fs::path& root);

  /// Shared-lock open for inspection commands; any number of readers may
  /// hold the store at once, but never alongside a writer.
  static Result<std::unique_ptr<Vault>> open_read_only(const fs::path& root);

  const StoreLayout& layout() const { return layout_; }
  const Config& config() const { return config_; }
  AccountStore& accounts() { return accounts_; }
  CredentialStore& credentials() { return credentials_; }
  SessionStore& sessions() { return sessions_; }
  AuditLog& audit() { return audit_; }
  Authenticator& authn() { return *authn_; }
  RecordStore& records() { return *records_; }
  const RiskPolicy& policy() const { return policy_; }
  const KeyRing& keyring() const { return keyring_; }
  ControlSet& controls() { return controls_; }

  Status replace_policy(const RiskPolicy& policy);
  Status persist_controls();

  /// The bootstrap admin account id (first account-manager found).
  std::optional<std::string> first_manager() const;

 private:
  Vault() = default;

  static Result<std::unique_ptr<Vault>> open_with_mode(const fs::path& root,
                                                       StoreLock::Mode mode);

  StoreLayout layout_;
  Config config_;
  StoreLock lock_;
  AccountStore accounts_;
  CredentialStore credentials_;
  SessionStore sessions_;
  AuditLog audit_;
  std::unique_ptr<Authenticator> authn_;
  std::unique_ptr<RecordStore> records_;
  RiskPolicy policy_;
  KeyRing keyring_;
  ControlSet controls_;
};

/// The verification step: the session must be live, the account must have at
/// least one assigned duty, and its clearance must dominate the previewed
/// classification of the item.
Result<bool> verification(Vault& vault, const std::string& token_id,
                          const DataItem& item, Timestamp now);

/// The end-to-end pipeline: login (with bounded retries), verification,
/// classification, risk gate, profile selection, canonicalization,
/// encryption, authentication code, storage, and a final verification pass
/// over the stored bytes. The session is always ended before returning.
Outcome data_security(Vault& vault, const std::string& name,
                      std::string_view passw, const DataItem& item,
                      Channel channel, Timestamp now,
                      const GatewayHooks* hooks = nullptr);

}  // namespace cloudvault
