#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "cloudvault/accounts.hpp"
#include "cloudvault/monitoring.hpp"
#include "cloudvault/result.hpp"
#include "cloudvault/util.hpp"

namespace cloudvault {

/// Stored login material. Only the salted digest is kept; the password never
/// touches the store, the audit log, or any error message.
struct CredentialRecord {
  std::string account_id;
  std::string name;
  Bytes salt;             // 16 random bytes
  Bytes password_digest;  // SHA-256(salt || passw)
  int failed_attempts = 0;
  bool locked = false;    // locked <=> failed_attempts == max_attempts
};

struct SessionToken {
  std::string token_id;
  std::string account_id;
  bool log = true;  // tokens are only issued on success
  Timestamp issued_at = 0;
};

Bytes password_digest(const Bytes& salt, std::string_view passw);

class CredentialStore {
 public:
  using Persist = std::function<Status(const CredentialRecord&)>;

  CredentialStore() = default;
  CredentialStore(const CredentialStore&) = delete;
  CredentialStore& operator=(const CredentialStore&) = delete;

  void set_persistence(Persist persist);
  void put(CredentialRecord record);  // load/fixture path
  std::optional<CredentialRecord> find(const std::string& name) const;

  Status update(const CredentialRecord& record);

 private:
  std::map<std::string, CredentialRecord> records_;
  Persist persist_;
  mutable std::mutex mutex_;
};

/// In-process session table. One CLI invocation is one process; the pipeline
/// logs the user off at the end, so sessions never outlive the process.
class SessionStore {
 public:
  SessionToken issue(const std::string& account_id, Timestamp now);
  std::optional<SessionToken> find(const std::string& token_id) const;
  void revoke(const std::string& token_id);

 private:
  std::map<std::string, SessionToken> sessions_;
  mutable std::mutex mutex_;
};

/// Login names may appear in file names and audit details, so they are
/// restricted to a conservative alphabet.
bool valid_login_name(std::string_view name);

class Authenticator {
 public:
  Authenticator(AccountStore& accounts, CredentialStore& credentials,
                SessionStore& sessions, AuditLog& audit, int max_attempts,
                Seconds token_ttl)
      : accounts_(accounts),
        credentials_(credentials),
        sessions_(sessions),
        audit_(audit),
        max_attempts_(max_attempts),
        token_ttl_(token_ttl) {}

  Result<CredentialRecord> register_credentials(const std::string& manager,
                                                const std::string& account_id,
                                                const std::string& name,
                                                std::string_view passw,
                                                Timestamp now);

  /// Verifies name/password. Failures count toward lockout; an unknown name
  /// reports BadCredentials externally to avoid account enumeration.
  Result<SessionToken> logged_user(const std::string& name,
                                   std::string_view passw, Timestamp now);

  Result<Identity> resolve_session(const std::string& token_id, Timestamp now);

  void end_session(const std::string& token_id);

  int max_attempts() const { return max_attempts_; }

 private:
  AccountStore& accounts_;
  CredentialStore& credentials_;
  SessionStore& sessions_;
  AuditLog& audit_;
  int max_attempts_;
  Seconds token_ttl_;
};

}  // namespace cloudvault
