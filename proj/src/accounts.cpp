#include "cloudvault/accounts.hpp"

#include <algorithm>

namespace cloudvault {

namespace {

bool is_expiring_kind(AccountKind kind) {
  return kind == AccountKind::Temporary || kind == AccountKind::Emergency;
}

}  // namespace

std::string_view account_type_name(AccountType type) {
  switch (type) {
    case AccountType::Individual: return "individual";
    case AccountType::Group: return "group";
    case AccountType::System: return "system";
  }
  return "individual";
}

std::string_view account_kind_name(AccountKind kind) {
  switch (kind) {
    case AccountKind::Permanent: return "permanent";
    case AccountKind::Temporary: return "temporary";
    case AccountKind::Emergency: return "emergency";
  }
  return "permanent";
}

std::string_view account_state_name(AccountState state) {
  switch (state) {
    case AccountState::Requested: return "requested";
    case AccountState::Active: return "active";
    case AccountState::Disabled: return "disabled";
    case AccountState::Terminated: return "terminated";
  }
  return "requested";
}

std::string_view role_name(Role role) {
  switch (role) {
    case Role::EndUser: return "end_user";
    case Role::AccountManager: return "account_manager";
    case Role::ClassifiedDataManager: return "classified_data_manager";
    case Role::RiskManager: return "risk_manager";
    case Role::EventManager: return "event_manager";
  }
  return "end_user";
}

std::string_view request_status_name(RequestStatus status) {
  switch (status) {
    case RequestStatus::Pending: return "pending";
    case RequestStatus::Approved: return "approved";
    case RequestStatus::Rejected: return "rejected";
  }
  return "pending";
}

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view name, const Enum (&values)[N],
                               std::string_view (*to_name)(Enum)) {
  const std::string lowered = to_lower(name);
  for (const auto value : values) {
    if (lowered == to_name(value)) return value;
  }
  return std::nullopt;
}

}  // namespace

std::optional<AccountType> parse_account_type(std::string_view name) {
  static const AccountType values[] = {AccountType::Individual,
                                       AccountType::Group, AccountType::System};
  return parse_enum(name, values, account_type_name);
}

std::optional<AccountKind> parse_account_kind(std::string_view name) {
  static const AccountKind values[] = {AccountKind::Permanent,
                                       AccountKind::Temporary,
                                       AccountKind::Emergency};
  return parse_enum(name, values, account_kind_name);
}

std::optional<AccountState> parse_account_state(std::string_view name) {
  static const AccountState values[] = {
      AccountState::Requested, AccountState::Active, AccountState::Disabled,
      AccountState::Terminated};
  return parse_enum(name, values, account_state_name);
}

std::optional<Role> parse_role(std::string_view name) {
  static const Role values[] = {Role::EndUser, Role::AccountManager,
                                Role::ClassifiedDataManager, Role::RiskManager,
                                Role::EventManager};
  return parse_enum(name, values, role_name);
}

std::optional<RequestStatus> parse_request_status(std::string_view name) {
  static const RequestStatus values[] = {
      RequestStatus::Pending, RequestStatus::Approved, RequestStatus::Rejected};
  return parse_enum(name, values, request_status_name);
}

void AccountStore::set_persistence(PersistAccount persist_account,
                                   PersistRequest persist_request) {
  std::unique_lock lock(mutex_);
  persist_account_ = std::move(persist_account);
  persist_request_ = std::move(persist_request);
}

void AccountStore::put(Account account) {
  std::unique_lock lock(mutex_);
  accounts_[account.account_id] = std::move(account);
}

void AccountStore::put_request(AccountRequest request) {
  std::unique_lock lock(mutex_);
  requests_[request.request_id] = std::move(request);
}

std::optional<Account> AccountStore::find(const std::string& account_id) const {
  std::shared_lock lock(mutex_);
  const auto it = accounts_.find(account_id);
  if (it == accounts_.end()) return std::nullopt;
  return it->second;
}

std::optional<AccountRequest> AccountStore::find_request(
    const std::string& request_id) const {
  std::shared_lock lock(mutex_);
  const auto it = requests_.find(request_id);
  if (it == requests_.end()) return std::nullopt;
  return it->second;
}

std::vector<Account> AccountStore::list() const {
  std::shared_lock lock(mutex_);
  std::vector<Account> out;
  out.reserve(accounts_.size());
  for (const auto& [id, account] : accounts_) out.push_back(account);
  return out;
}

bool AccountStore::empty() const {
  std::shared_lock lock(mutex_);
  return accounts_.empty();
}

Status AccountStore::persist(const Account& account) {
  if (!persist_account_) return Status::success();
  return persist_account_(account);
}

Status AccountStore::persist(const AccountRequest& request) {
  if (!persist_request_) return Status::success();
  return persist_request_(request);
}

Result<AccountRequest> AccountStore::request_account(
    const std::string& requester, AccountType account_type, AccountKind kind,
    std::string justification, AuditLog& audit, Timestamp now) {
  std::unique_lock lock(mutex_);
  if (auto ready = audit.appendable(); !ready.ok()) return ready.error();
  const auto it = accounts_.find(requester);
  if (it == accounts_.end() || it->second.state != AccountState::Active) {
    return Error{Errc::RequesterNotActive,
                 "requester must be an active account"};
  }

  AccountRequest request;
  request.request_id = random_id("r");
  while (requests_.count(request.request_id) > 0) {
    request.request_id = random_id("r");
  }
  request.requester = requester;
  request.account_type = account_type;
  request.kind = kind;
  request.justification = std::move(justification);
  request.status = RequestStatus::Pending;

  if (auto persisted = persist(request); !persisted.ok()) {
    return persisted.error();
  }
  requests_[request.request_id] = request;

  auto event = audit.append(requester, EventCategory::AccountChange,
                            "account requested: " + request.request_id, now);
  if (!event.ok()) return event.error();
  return request;
}

Result<Account> AccountStore::approve_account(
    const std::string& approver, const std::string& request_id,
    std::optional<Timestamp> expires_at, AuditLog& audit, Timestamp now) {
  std::unique_lock lock(mutex_);
  if (auto ready = audit.appendable(); !ready.ok()) return ready.error();
  const auto approver_it = accounts_.find(approver);
  if (approver_it == accounts_.end() ||
      !approver_it->second.has_role(Role::AccountManager)) {
    return Error{Errc::NotAuthorized, "approver lacks the account manager role"};
  }
  const auto request_it = requests_.find(request_id);
  if (request_it == requests_.end() ||
      request_it->second.status != RequestStatus::Pending) {
    return Error{Errc::RequestNotPending, "request is not pending"};
  }
  AccountRequest& request = request_it->second;
  if (is_expiring_kind(request.kind) && !expires_at.has_value()) {
    return Error{Errc::BadValue,
                 "temporary and emergency accounts need an expiry"};
  }
  if (!is_expiring_kind(request.kind) && expires_at.has_value()) {
    return Error{Errc::BadValue, "permanent accounts must not carry an expiry"};
  }

  Account account;
  account.account_id = random_id("a");
  while (accounts_.count(account.account_id) > 0) {
    account.account_id = random_id("a");
  }
  account.account_type = request.account_type;
  account.kind = request.kind;
  account.state = AccountState::Active;
  account.clearance = SensitivityLevel::Public;
  account.expires_at = expires_at;
  account.last_activity_at = now;
  account.manager_id = approver;

  AccountRequest approved = request;
  approved.status = RequestStatus::Approved;
  approved.created_account_id = account.account_id;

  if (auto persisted = persist(account); !persisted.ok()) return persisted.error();
  if (auto persisted = persist(approved); !persisted.ok()) return persisted.error();
  accounts_[account.account_id] = account;
  request = approved;

  auto event = audit.append(approver, EventCategory::AccountChange,
                            "account approved: " + account.account_id +
                                " from request " + request_id,
                            now);
  if (!event.ok()) return event.error();
  return account;
}

Result<AccountRequest> AccountStore::reject_request(const std::string& approver,
                                                    const std::string& request_id,
                                                    AuditLog& audit,
                                                    Timestamp now) {
  std::unique_lock lock(mutex_);
  if (auto ready = audit.appendable(); !ready.ok()) return ready.error();
  const auto approver_it = accounts_.find(approver);
  if (approver_it == accounts_.end() ||
      !approver_it->second.has_role(Role::AccountManager)) {
    return Error{Errc::NotAuthorized, "approver lacks the account manager role"};
  }
  const auto request_it = requests_.find(request_id);
  if (request_it == requests_.end() ||
      request_it->second.status != RequestStatus::Pending) {
    return Error{Errc::RequestNotPending, "request is not pending"};
  }

  AccountRequest rejected = request_it->second;
  rejected.status = RequestStatus::Rejected;
  if (auto persisted = persist(rejected); !persisted.ok()) {
    return persisted.error();
  }
  request_it->second = rejected;

  auto event = audit.append(approver, EventCategory::AccountChange,
                            "account request " + request_id + " rejected", now);
  if (!event.ok()) return event.error();
  return rejected;
}

Result<Account> AccountStore::assign_role(const std::string& manager,
                                          const std::string& target, Role role,
                                          SensitivityLevel clearance,
                                          AuditLog& audit, Timestamp now) {
  std::unique_lock lock(mutex_);
  if (auto ready = audit.appendable(); !ready.ok()) return ready.error();
  const auto manager_it = accounts_.find(manager);
  if (manager_it == accounts_.end() ||
      !manager_it->second.has_role(Role::AccountManager)) {
    return Error{Errc::NotAuthorized, "caller lacks the account manager role"};
  }
  const auto target_it = accounts_.find(target);
  if (target_it == accounts_.end() ||
      target_it->second.state != AccountState::Active) {
    return Error{Errc::TargetNotActive, "target account is not active"};
  }

  Account updated = target_it->second;
  updated.roles.insert(role);
  updated.clearance = clearance;

  if (auto persisted = persist(updated); !persisted.ok()) return persisted.error();
  target_it->second = updated;

  auto event = audit.append(
      manager, EventCategory::AccountChange,
      "role " + std::string(role_name(role)) + " assigned to " + target +
          " with clearance " + std::string(level_name(clearance)),
      now);
  if (!event.ok()) return event.error();
  return updated;
}

Result<Account> AccountStore::disable_account(const std::string& manager,
                                              const std::string& target,
                                              AuditLog& audit, Timestamp now) {
  std::unique_lock lock(mutex_);
  if (auto ready = audit.appendable(); !ready.ok()) return ready.error();
  const auto manager_it = accounts_.find(manager);
  if (manager_it == accounts_.end() ||
      !manager_it->second.has_role(Role::AccountManager)) {
    return Error{Errc::NotAuthorized, "caller lacks the account manager role"};
  }
  const auto target_it = accounts_.find(target);
  if (target_it == accounts_.end()) {
    return Error{Errc::TargetNotActive, "unknown target account"};
  }
  if (target_it->second.state == AccountState::Terminated) {
    return Error{Errc::AlreadyTerminated, "account is terminated"};
  }

  Account updated = target_it->second;
  updated.state = AccountState::Disabled;

  if (auto persisted = persist(updated); !persisted.ok()) return persisted.error();
  target_it->second = updated;

  auto event = audit.append(manager, EventCategory::AccountNotification,
                            "account " + target + " disabled; notified " +
                                updated.manager_id,
                            now);
  if (!event.ok()) return event.error();
  return updated;
}

Result<Account> AccountStore::terminate_account(const std::string& manager,
                                                const std::string& target,
                                                AuditLog& audit, Timestamp now) {
  std::unique_lock lock(mutex_);
  if (auto ready = audit.appendable(); !ready.ok()) return ready.error();
  const auto manager_it = accounts_.find(manager);
  if (manager_it == accounts_.end() ||
      !manager_it->second.has_role(Role::AccountManager)) {
    return Error{Errc::NotAuthorized, "caller lacks the account manager role"};
  }
  const auto target_it = accounts_.find(target);
  if (target_it == accounts_.end()) {
    return Error{Errc::TargetNotActive, "unknown target account"};
  }
  if (target_it->second.state == AccountState::Terminated) {
    return Error{Errc::AlreadyTerminated, "account is terminated"};
  }

  Account updated = target_it->second;
  updated.state = AccountState::Terminated;

  if (auto persisted = persist(updated); !persisted.ok()) return persisted.error();
  target_it->second = updated;

  auto event = audit.append(manager, EventCategory::AccountNotification,
                            "account " + target + " terminated; notified " +
                                updated.manager_id,
                            now);
  if (!event.ok()) return event.error();
  return updated;
}

Result<Account> AccountStore::add_group_member(const std::string& manager,
                                               const std::string& group_id,
                                               const std::string& member_id,
                                               AuditLog& audit, Timestamp now) {
  std::unique_lock lock(mutex_);
  if (auto ready = audit.appendable(); !ready.ok()) return ready.error();
  const auto manager_it = accounts_.find(manager);
  if (manager_it == accounts_.end() ||
      !manager_it->second.has_role(Role::AccountManager)) {
    return Error{Errc::NotAuthorized, "caller lacks the account manager role"};
  }
  const auto group_it = accounts_.find(group_id);
  if (group_it == accounts_.end() ||
      group_it->second.account_type != AccountType::Group) {
    return Error{Errc::NotAGroup, "target is not a group account"};
  }
  if (group_it->second.state != AccountState::Active) {
    return Error{Errc::TargetNotActive, "group account is not active"};
  }
  const auto member_it = accounts_.find(member_id);
  if (member_it == accounts_.end() ||
      member_it->second.state != AccountState::Active) {
    return Error{Errc::TargetNotActive, "member account is not active"};
  }
  if (!dominates(member_it->second.clearance, group_it->second.clearance)) {
    return Error{Errc::MembershipConditionFailed,
                 "member clearance below group clearance"};
  }

  Account updated = group_it->second;
  updated.members.insert(member_id);

  if (auto persisted = persist(updated); !persisted.ok()) return persisted.error();
  group_it->second = updated;

  auto event = audit.append(manager, EventCategory::AccountChange,
                            "member " + member_id + " joined group " + group_id,
                            now);
  if (!event.ok()) return event.error();
  return updated;
}

Result<std::vector<std::string>> AccountStore::expire_temporaries(
    Timestamp now, AuditLog& audit) {
  std::unique_lock lock(mutex_);
  if (auto ready = audit.appendable(); !ready.ok()) return ready.error();
  std::vector<std::string> expired;
  for (auto& [id, account] : accounts_) {
    if (account.state != AccountState::Active) continue;
    if (!is_expiring_kind(account.kind)) continue;
    if (!account.expires_at.has_value() || *account.expires_at >= now) continue;

    Account updated = account;
    updated.state = AccountState::Terminated;
    if (auto persisted = persist(updated); !persisted.ok()) {
      return persisted.error();
    }
    account = updated;
    auto event = audit.append("system", EventCategory::AccountNotification,
                              "account " + id + " auto-terminated (expired); notified " +
                                  account.manager_id,
                              now);
    if (!event.ok()) return event.error();
    expired.push_back(id);
  }
  return expired;
}

Result<std::vector<std::string>> AccountStore::sweep_inactive(
    Timestamp now, Seconds inactivity_period, AuditLog& audit) {
  if (inactivity_period <= 0) {
    return Error{Errc::InvalidPeriod, "inactivity period must be positive"};
  }
  if (auto ready = audit.appendable(); !ready.ok()) return ready.error();
  std::unique_lock lock(mutex_);
  std::vector<std::string> swept;
  for (auto& [id, account] : accounts_) {
    if (account.state != AccountState::Active) continue;
    if (now - account.last_activity_at <= inactivity_period) continue;

    Account updated = account;
    updated.state = AccountState::Disabled;
    if (auto persisted = persist(updated); !persisted.ok()) {
      return persisted.error();
    }
    account = updated;
    auto event = audit.append("system", EventCategory::AccountNotification,
                              "account " + id + " auto-disabled (inactive); notified " +
                                  account.manager_id,
                              now);
    if (!event.ok()) return event.error();
    swept.push_back(id);
  }
  return swept;
}

Status AccountStore::touch_activity(const std::string& account_id,
                                    Timestamp now) {
  std::unique_lock lock(mutex_);
  const auto it = accounts_.find(account_id);
  if (it == accounts_.end()) {
    return Status(Errc::NotFound, "unknown account");
  }
  Account updated = it->second;
  updated.last_activity_at = now;
  if (auto persisted = persist(updated); !persisted.ok()) return persisted;
  it->second = updated;
  return Status::success();
}

Result<Identity> AccountStore::identity_of(const std::string& account_id) const {
  std::shared_lock lock(mutex_);
  const auto it = accounts_.find(account_id);
  if (it == accounts_.end()) {
    return Error{Errc::NotFound, "unknown account"};
  }
  Identity identity;
  identity.account_id = account_id;
  identity.roles = it->second.roles;
  identity.clearance = it->second.clearance;
  return identity;
}

}  // namespace cloudvault
