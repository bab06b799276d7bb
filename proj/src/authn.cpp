#include "cloudvault/authn.hpp"

#include <algorithm>

#include "cloudvault/sha256.hpp"

namespace cloudvault {

Bytes password_digest(const Bytes& salt, std::string_view passw) {
  Sha256 h;
  h.update(salt);
  h.update(reinterpret_cast<const std::uint8_t*>(passw.data()), passw.size());
  const auto digest = h.finish();
  return Bytes(digest.begin(), digest.end());
}

void CredentialStore::set_persistence(Persist persist) {
  std::lock_guard lock(mutex_);
  persist_ = std::move(persist);
}

void CredentialStore::put(CredentialRecord record) {
  std::lock_guard lock(mutex_);
  records_[record.name] = std::move(record);
}

std::optional<CredentialRecord> CredentialStore::find(
    const std::string& name) const {
  std::lock_guard lock(mutex_);
  const auto it = records_.find(name);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

Status CredentialStore::update(const CredentialRecord& record) {
  std::lock_guard lock(mutex_);
  if (persist_) {
    if (auto persisted = persist_(record); !persisted.ok()) return persisted;
  }
  records_[record.name] = record;
  return Status::success();
}

SessionToken SessionStore::issue(const std::string& account_id, Timestamp now) {
  std::lock_guard lock(mutex_);
  SessionToken token;
  token.token_id = to_hex(random_bytes(16));
  token.account_id = account_id;
  token.log = true;
  token.issued_at = now;
  sessions_[token.token_id] = token;
  return token;
}

std::optional<SessionToken> SessionStore::find(
    const std::string& token_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(token_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

void SessionStore::revoke(const std::string& token_id) {
  std::lock_guard lock(mutex_);
  sessions_.erase(token_id);
}

bool valid_login_name(std::string_view name) {
  if (name.empty() || name.size() > 64) return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
}

Result<CredentialRecord> Authenticator::register_credentials(
    const std::string& manager, const std::string& account_id,
    const std::string& name, std::string_view passw, Timestamp now) {
  if (auto ready = audit_.appendable(); !ready.ok()) return ready.error();
  const auto manager_account = accounts_.find(manager);
  if (!manager_account || !manager_account->has_role(Role::AccountManager)) {
    return Error{Errc::NotAuthorized, "caller lacks the account manager role"};
  }
  const auto account = accounts_.find(account_id);
  if (!account || account->state != AccountState::Active) {
    return Error{Errc::AccountNotActive, "account is not active"};
  }
  if (!valid_login_name(name)) {
    return Error{Errc::BadValue, "login name has invalid characters"};
  }
  if (credentials_.find(name).has_value()) {
    return Error{Errc::NameTaken, "login name already registered"};
  }

  CredentialRecord record;
  record.account_id = account_id;
  record.name = name;
  record.salt = random_bytes(16);
  record.password_digest = password_digest(record.salt, passw);
  record.failed_attempts = 0;
  record.locked = false;

  if (auto updated = credentials_.update(record); !updated.ok()) {
    return updated.error();
  }
  auto event = audit_.append(manager, EventCategory::AccountChange,
                             "credentials registered for " + account_id +
                                 " as " + name,
                             now);
  if (!event.ok()) return event.error();
  return record;
}

Result<SessionToken> Authenticator::logged_user(const std::string& name,
                                                std::string_view passw,
                                                Timestamp now) {
  // Fail closed: with a broken audit chain no login can be recorded, so none
  // is granted.
  if (auto ready = audit_.appendable(); !ready.ok()) return ready.error();
  auto record = credentials_.find(name);
  if (!record) {
    // Externally identical to a bad password; the audit detail tells them
    // apart for investigators.
    audit_.append("system", EventCategory::Login,
                  "login failed: unknown name", now);
    return Error{Errc::BadCredentials, "bad credentials"};
  }

  if (record->locked) {
    audit_.append(record->account_id, EventCategory::Login,
                  "login rejected: account locked", now);
    return Error{Errc::AccountLocked, "account is locked"};
  }

  const Bytes offered = password_digest(record->salt, passw);
  if (!constant_time_equal(offered, record->password_digest)) {
    record->failed_attempts += 1;
    record->locked = record->failed_attempts >= max_attempts_;
    if (auto updated = credentials_.update(*record); !updated.ok()) {
      return updated.error();
    }
    audit_.append(record->account_id, EventCategory::Login,
                  record->locked ? "login failed: bad password; record locked"
                                 : "login failed: bad password",
                  now);
    return Error{Errc::BadCredentials, "bad credentials"};
  }

  const auto account = accounts_.find(record->account_id);
  if (!account || account->state != AccountState::Active) {
    audit_.append(record->account_id, EventCategory::Login,
                  "login rejected: account not active", now);
    return Error{Errc::AccountNotActive, "account is not active"};
  }

  record->failed_attempts = 0;
  record->locked = false;
  if (auto updated = credentials_.update(*record); !updated.ok()) {
    return updated.error();
  }
  accounts_.touch_activity(record->account_id, now);

  const SessionToken token = sessions_.issue(record->account_id, now);
  audit_.append(record->account_id, EventCategory::Login, "login ok", now);
  return token;
}

Result<Identity> Authenticator::resolve_session(const std::string& token_id,
                                                Timestamp now) {
  const auto token = sessions_.find(token_id);
  if (!token) {
    return Error{Errc::UnknownToken, "unknown session token"};
  }
  if (now - token->issued_at > token_ttl_) {
    return Error{Errc::ExpiredToken, "session token expired"};
  }
  auto identity = accounts_.identity_of(token->account_id);
  if (!identity.ok()) {
    return Error{Errc::UnknownToken, "token bound to a missing account"};
  }
  accounts_.touch_activity(token->account_id, now);
  return identity;
}

void Authenticator::end_session(const std::string& token_id) {
  sessions_.revoke(token_id);
}

}  // namespace cloudvault
