#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "cloudvault/levels.hpp"
#include "cloudvault/monitoring.hpp"
#include "cloudvault/result.hpp"
#include "cloudvault/util.hpp"

namespace cloudvault {

enum class AccountType { Individual, Group, System };
enum class AccountKind { Permanent, Temporary, Emergency };
enum class AccountState { Requested, Active, Disabled, Terminated };

enum class Role {
  EndUser,
  AccountManager,
  ClassifiedDataManager,
  RiskManager,
  EventManager,
};

std::string_view account_type_name(AccountType type);
std::string_view account_kind_name(AccountKind kind);
std::string_view account_state_name(AccountState state);
std::string_view role_name(Role role);
std::optional<AccountType> parse_account_type(std::string_view name);
std::optional<AccountKind> parse_account_kind(std::string_view name);
std::optional<AccountState> parse_account_state(std::string_view name);
std::optional<Role> parse_role(std::string_view name);

/// Identity record. Terminated is absorbing; temporary and emergency accounts
/// always carry an expiry, permanent accounts never do.
struct Account {
  std::string account_id;
  AccountType account_type = AccountType::Individual;
  AccountKind kind = AccountKind::Permanent;
  AccountState state = AccountState::Requested;
  std::set<Role> roles;
  SensitivityLevel clearance = SensitivityLevel::Public;
  std::optional<Timestamp> expires_at;
  Timestamp last_activity_at = 0;
  std::string manager_id;
  std::set<std::string> members;  // non-empty only for Group accounts

  bool has_role(Role role) const { return roles.count(role) > 0; }
};

enum class RequestStatus { Pending, Approved, Rejected };

std::string_view request_status_name(RequestStatus status);
std::optional<RequestStatus> parse_request_status(std::string_view name);

struct AccountRequest {
  std::string request_id;
  std::string requester;
  AccountType account_type = AccountType::Individual;
  AccountKind kind = AccountKind::Permanent;
  std::string justification;
  RequestStatus status = RequestStatus::Pending;
  std::string created_account_id;  // set once approved
};

/// The resolved caller of an operation: who they are and what they may touch.
struct Identity {
  std::string account_id;
  std::set<Role> roles;
  SensitivityLevel clearance = SensitivityLevel::Public;

  bool has_role(Role role) const { return roles.count(role) > 0; }
};

/// Account lifecycle state machine over an in-memory map, with optional
/// write-through persistence. All mutations are serialized; reads return
/// copies so callers never share mutable objects.
class AccountStore {
 public:
  using PersistAccount = std::function<Status(const Account&)>;
  using PersistRequest = std::function<Status(const AccountRequest&)>;

  AccountStore() = default;
  AccountStore(const AccountStore&) = delete;
  AccountStore& operator=(const AccountStore&) = delete;

  void set_persistence(PersistAccount persist_account,
                       PersistRequest persist_request);

  /// Inserts without state-machine checks; for loading persisted records and
  /// building test fixtures.
  void put(Account account);
  void put_request(AccountRequest request);

  std::optional<Account> find(const std::string& account_id) const;
  std::optional<AccountRequest> find_request(const std::string& request_id) const;
  std::vector<Account> list() const;
  bool empty() const;

  Result<AccountRequest> request_account(const std::string& requester,
                                         AccountType account_type,
                                         AccountKind kind,
                                         std::string justification,
                                         AuditLog& audit, Timestamp now);

  /// Creates the account Active with no roles and the lowest clearance.
  /// expires_at is required for Temporary/Emergency requests and must be
  /// absent for Permanent ones.
  Result<Account> approve_account(const std::string& approver,
                                  const std::string& request_id,
                                  std::optional<Timestamp> expires_at,
                                  AuditLog& audit, Timestamp now);

  /// The other leg of the Pending transition: no account is created.
  Result<AccountRequest> reject_request(const std::string& approver,
                                        const std::string& request_id,
                                        AuditLog& audit, Timestamp now);

  Result<Account> assign_role(const std::string& manager,
                              const std::string& target, Role role,
                              SensitivityLevel clearance, AuditLog& audit,
                              Timestamp now);

  Result<Account> disable_account(const std::string& manager,
                                  const std::string& target, AuditLog& audit,
                                  Timestamp now);

  Result<Account> terminate_account(const std::string& manager,
                                    const std::string& target, AuditLog& audit,
                                    Timestamp now);

  /// Group admission: the joining account's clearance must dominate the
  /// group's clearance.
  Result<Account> add_group_member(const std::string& manager,
                                   const std::string& group_id,
                                   const std::string& member_id,
                                   AuditLog& audit, Timestamp now);

  /// Terminates every Active Temporary/Emergency account whose expiry lies
  /// strictly before now.
  Result<std::vector<std::string>> expire_temporaries(Timestamp now,
                                                      AuditLog& audit);

  /// Disables every Active account idle strictly longer than the period.
  Result<std::vector<std::string>> sweep_inactive(Timestamp now,
                                                  Seconds inactivity_period,
                                                  AuditLog& audit);

  /// Bumps last_activity_at (login and session use).
  Status touch_activity(const std::string& account_id, Timestamp now);

  Result<Identity> identity_of(const std::string& account_id) const;

 private:
  Status persist(const Account& account);
  Status persist(const AccountRequest& request);

  std::map<std::string, Account> accounts_;
  std::map<std::string, AccountRequest> requests_;
  PersistAccount persist_account_;
  PersistRequest persist_request_;
  mutable std::shared_mutex mutex_;
};

}  // namespace cloudvault
