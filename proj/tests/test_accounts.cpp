#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include "cloudvault/accounts.hpp"
#include "test_helpers.hpp"

using namespace cloudvault;
using cloudvault::testing::TempDir;
using cloudvault::testing::make_account;

namespace {

struct Fixture {
  TempDir dir;
  AuditLog audit;
  AccountStore accounts;

  Fixture() {
    REQUIRE(audit.open(dir / "audit.log").ok());
    accounts.put(make_account("a-manager", AccountState::Active,
                              {Role::AccountManager}, SensitivityLevel::Sensitive));
  }
};

constexpr AccountState kAllStates[] = {AccountState::Requested,
                                       AccountState::Active,
                                       AccountState::Disabled,
                                       AccountState::Terminated};

}  // namespace

TEST_CASE("request_account requires an active requester") {
  Fixture fx;
  const auto request =
      fx.accounts.request_account("a-manager", AccountType::Individual,
                                  AccountKind::Permanent, "new hire", fx.audit, 10);
  REQUIRE(request.ok());
  CHECK(request->status == RequestStatus::Pending);
  CHECK(request->requester == "a-manager");

  fx.accounts.put(make_account("a-gone", AccountState::Terminated));
  const auto refused =
      fx.accounts.request_account("a-gone", AccountType::Individual,
                                  AccountKind::Permanent, "nope", fx.audit, 10);
  REQUIRE_FALSE(refused.ok());
  CHECK(refused.code() == Errc::RequesterNotActive);

  const auto unknown =
      fx.accounts.request_account("a-nobody", AccountType::Individual,
                                  AccountKind::Permanent, "nope", fx.audit, 10);
  CHECK(unknown.code() == Errc::RequesterNotActive);
}

TEST_CASE("requesting twice yields two distinct pending requests") {
  Fixture fx;
  const auto first =
      fx.accounts.request_account("a-manager", AccountType::Individual,
                                  AccountKind::Permanent, "one", fx.audit, 10);
  const auto second =
      fx.accounts.request_account("a-manager", AccountType::Individual,
                                  AccountKind::Permanent, "two", fx.audit, 10);
  REQUIRE(first.ok());
  REQUIRE(second.ok());
  CHECK(first->request_id != second->request_id);
  CHECK(first->status == RequestStatus::Pending);
  CHECK(second->status == RequestStatus::Pending);
}

TEST_CASE("approve_account creates a least-privilege active account") {
  Fixture fx;
  const auto request =
      fx.accounts.request_account("a-manager", AccountType::Individual,
                                  AccountKind::Permanent, "new hire", fx.audit, 10);
  REQUIRE(request.ok());

  const auto account = fx.accounts.approve_account(
      "a-manager", request->request_id, std::nullopt, fx.audit, 20);
  REQUIRE(account.ok());
  CHECK(account->state == AccountState::Active);
  CHECK(account->roles.empty());
  CHECK(account->clearance == SensitivityLevel::Public);
  CHECK(account->last_activity_at == 20);
  CHECK(account->manager_id == "a-manager");
  CHECK_FALSE(account->expires_at.has_value());

  const auto stored_request = fx.accounts.find_request(request->request_id);
  REQUIRE(stored_request.has_value());
  CHECK(stored_request->status == RequestStatus::Approved);
  CHECK(stored_request->created_account_id == account->account_id);

  // Approving again: the request is no longer pending.
  const auto again = fx.accounts.approve_account(
      "a-manager", request->request_id, std::nullopt, fx.audit, 30);
  REQUIRE_FALSE(again.ok());
  CHECK(again.code() == Errc::RequestNotPending);
}

TEST_CASE("approval is gated on the account-manager role") {
  Fixture fx;
  fx.accounts.put(make_account("a-user", AccountState::Active, {Role::EndUser}));
  const auto request =
      fx.accounts.request_account("a-user", AccountType::Individual,
                                  AccountKind::Permanent, "self", fx.audit, 10);
  REQUIRE(request.ok());
  const auto denied = fx.accounts.approve_account("a-user", request->request_id,
                                                  std::nullopt, fx.audit, 20);
  REQUIRE_FALSE(denied.ok());
  CHECK(denied.code() == Errc::NotAuthorized);
}

TEST_CASE("a pending request can be rejected instead") {
  Fixture fx;
  const auto request =
      fx.accounts.request_account("a-manager", AccountType::Individual,
                                  AccountKind::Permanent, "suspicious", fx.audit, 10);
  REQUIRE(request.ok());

  const auto rejected =
      fx.accounts.reject_request("a-manager", request->request_id, fx.audit, 20);
  REQUIRE(rejected.ok());
  CHECK(rejected->status == RequestStatus::Rejected);
  CHECK(rejected->created_account_id.empty());

  // Neither approval nor a second rejection is possible afterwards.
  CHECK(fx.accounts
            .approve_account("a-manager", request->request_id, std::nullopt,
                             fx.audit, 30)
            .code() == Errc::RequestNotPending);
  CHECK(fx.accounts.reject_request("a-manager", request->request_id, fx.audit, 40)
            .code() == Errc::RequestNotPending);
}

TEST_CASE("temporary accounts must be approved with an expiry") {
  Fixture fx;
  const auto request =
      fx.accounts.request_account("a-manager", AccountType::Individual,
                                  AccountKind::Temporary, "contractor", fx.audit, 10);
  REQUIRE(request.ok());

  const auto missing = fx.accounts.approve_account(
      "a-manager", request->request_id, std::nullopt, fx.audit, 20);
  REQUIRE_FALSE(missing.ok());
  CHECK(missing.code() == Errc::BadValue);

  const auto account = fx.accounts.approve_account(
      "a-manager", request->request_id, Timestamp{5000}, fx.audit, 20);
  REQUIRE(account.ok());
  CHECK(account->expires_at == Timestamp{5000});
  CHECK(account->kind == AccountKind::Temporary);
}

TEST_CASE("assign_role adds roles idempotently and sets clearance") {
  Fixture fx;
  fx.accounts.put(make_account("a-user", AccountState::Active));

  const auto first = fx.accounts.assign_role("a-manager", "a-user", Role::EndUser,
                                             SensitivityLevel::Confidential,
                                             fx.audit, 10);
  REQUIRE(first.ok());
  CHECK(first->roles == std::set<Role>{Role::EndUser});
  CHECK(first->clearance == SensitivityLevel::Confidential);

  const auto second = fx.accounts.assign_role("a-manager", "a-user", Role::EndUser,
                                              SensitivityLevel::Confidential,
                                              fx.audit, 11);
  REQUIRE(second.ok());
  CHECK(second->roles == std::set<Role>{Role::EndUser});

  fx.accounts.put(make_account("a-dead", AccountState::Terminated));
  const auto dead = fx.accounts.assign_role("a-manager", "a-dead", Role::EndUser,
                                            SensitivityLevel::Public, fx.audit, 12);
  REQUIRE_FALSE(dead.ok());
  CHECK(dead.code() == Errc::TargetNotActive);
}

TEST_CASE("disable and terminate notify the responsible manager") {
  Fixture fx;
  Account user = make_account("a-user", AccountState::Active);
  user.manager_id = "a-manager";
  fx.accounts.put(user);

  const auto before = fx.audit.size();
  const auto terminated =
      fx.accounts.terminate_account("a-manager", "a-user", fx.audit, 10);
  REQUIRE(terminated.ok());
  CHECK(terminated->state == AccountState::Terminated);
  CHECK(fx.audit.size() == before + 1);
  const auto events = fx.audit.tail(1);
  CHECK(events[0].category == EventCategory::AccountNotification);
  CHECK(events[0].detail.find("a-manager") != std::string::npos);

  const auto again =
      fx.accounts.terminate_account("a-manager", "a-user", fx.audit, 11);
  REQUIRE_FALSE(again.ok());
  CHECK(again.code() == Errc::AlreadyTerminated);
}

TEST_CASE("state machine: exhaustive (state, operation) enumeration") {
  // Documented transitions; everything else is the documented error.
  for (const auto state : kAllStates) {
    CAPTURE(account_state_name(state));

    {  // assign_role: only Active succeeds
      Fixture fx;
      fx.accounts.put(make_account("a-x", state));
      const auto result = fx.accounts.assign_role(
          "a-manager", "a-x", Role::EndUser, SensitivityLevel::Public, fx.audit, 1);
      if (state == AccountState::Active) {
        CHECK(result.ok());
      } else {
        REQUIRE_FALSE(result.ok());
        CHECK(result.code() == Errc::TargetNotActive);
      }
    }

    {  // disable: everything but Terminated becomes Disabled
      Fixture fx;
      fx.accounts.put(make_account("a-x", state));
      const auto result =
          fx.accounts.disable_account("a-manager", "a-x", fx.audit, 1);
      if (state == AccountState::Terminated) {
        REQUIRE_FALSE(result.ok());
        CHECK(result.code() == Errc::AlreadyTerminated);
      } else {
        REQUIRE(result.ok());
        CHECK(result->state == AccountState::Disabled);
      }
    }

    {  // terminate: everything but Terminated becomes Terminated
      Fixture fx;
      fx.accounts.put(make_account("a-x", state));
      const auto result =
          fx.accounts.terminate_account("a-manager", "a-x", fx.audit, 1);
      if (state == AccountState::Terminated) {
        REQUIRE_FALSE(result.ok());
        CHECK(result.code() == Errc::AlreadyTerminated);
      } else {
        REQUIRE(result.ok());
        CHECK(result->state == AccountState::Terminated);
      }
    }

    {  // request_account by a requester in this state
      Fixture fx;
      fx.accounts.put(make_account("a-x", state));
      const auto result =
          fx.accounts.request_account("a-x", AccountType::Individual,
                                      AccountKind::Permanent, "j", fx.audit, 1);
      if (state == AccountState::Active) {
        CHECK(result.ok());
      } else {
        REQUIRE_FALSE(result.ok());
        CHECK(result.code() == Errc::RequesterNotActive);
      }
    }

    {  // expire_temporaries touches only Active expiring accounts
      Fixture fx;
      Account temp = make_account("a-x", state);
      temp.kind = AccountKind::Temporary;
      temp.expires_at = 100;
      fx.accounts.put(temp);
      const auto result = fx.accounts.expire_temporaries(200, fx.audit);
      REQUIRE(result.ok());
      if (state == AccountState::Active) {
        CHECK(result.value() == std::vector<std::string>{"a-x"});
        CHECK(fx.accounts.find("a-x")->state == AccountState::Terminated);
      } else {
        CHECK(result.value().empty());
        CHECK(fx.accounts.find("a-x")->state == state);
      }
    }

    {  // sweep_inactive touches only Active idle accounts
      Fixture fx;
      Account idle = make_account("a-x", state);
      idle.last_activity_at = 0;
      fx.accounts.put(idle);
      // The fixture manager is recently active so the sweep skips it.
      fx.accounts.touch_activity("a-manager", 10000);
      const auto result = fx.accounts.sweep_inactive(10000, 100, fx.audit);
      REQUIRE(result.ok());
      if (state == AccountState::Active) {
        CHECK(result.value() == std::vector<std::string>{"a-x"});
        CHECK(fx.accounts.find("a-x")->state == AccountState::Disabled);
      } else {
        CHECK(result.value().empty());
        CHECK(fx.accounts.find("a-x")->state == state);
      }
    }
  }
}

TEST_CASE("termination is absorbing under random operation sequences") {
  Fixture fx;
  fx.accounts.put(make_account("a-victim", AccountState::Active, {Role::EndUser}));
  REQUIRE(fx.accounts.terminate_account("a-manager", "a-victim", fx.audit, 1).ok());

  std::mt19937 rng(2024);
  for (int i = 0; i < 10000; ++i) {
    switch (rng() % 6) {
      case 0:
        fx.accounts.assign_role("a-manager", "a-victim", Role::EndUser,
                                SensitivityLevel::Sensitive, fx.audit, i);
        break;
      case 1:
        fx.accounts.disable_account("a-manager", "a-victim", fx.audit, i);
        break;
      case 2:
        fx.accounts.terminate_account("a-manager", "a-victim", fx.audit, i);
        break;
      case 3:
        fx.accounts.expire_temporaries(i, fx.audit);
        break;
      case 4:
        fx.accounts.sweep_inactive(i + 1, 1, fx.audit);
        break;
      case 5:
        fx.accounts.touch_activity("a-victim", i);
        break;
    }
    CHECK(fx.accounts.find("a-victim")->state == AccountState::Terminated);
  }
}

TEST_CASE("expiry comparison is strict") {
  Fixture fx;
  Account temp = make_account("a-temp", AccountState::Active);
  temp.kind = AccountKind::Temporary;
  temp.expires_at = 100;
  fx.accounts.put(temp);

  auto at_boundary = fx.accounts.expire_temporaries(100, fx.audit);
  REQUIRE(at_boundary.ok());
  CHECK(at_boundary.value().empty());
  CHECK(fx.accounts.find("a-temp")->state == AccountState::Active);

  auto past = fx.accounts.expire_temporaries(101, fx.audit);
  REQUIRE(past.ok());
  CHECK(past.value() == std::vector<std::string>{"a-temp"});
  CHECK(fx.accounts.find("a-temp")->state == AccountState::Terminated);
}

TEST_CASE("expire_temporaries matches a brute-force filter and is idempotent") {
  Fixture fx;
  std::mt19937 rng(17);
  std::vector<std::string> expected;
  const Timestamp now = 1000;

  for (int i = 0; i < 50; ++i) {
    Account account = make_account("a-p" + std::to_string(i),
                                   (rng() % 3 == 0) ? AccountState::Disabled
                                                    : AccountState::Active);
    const int kind_pick = static_cast<int>(rng() % 3);
    account.kind = kind_pick == 0   ? AccountKind::Permanent
                   : kind_pick == 1 ? AccountKind::Temporary
                                    : AccountKind::Emergency;
    if (account.kind != AccountKind::Permanent) {
      account.expires_at = static_cast<Timestamp>(rng() % 2000);
    }
    account.last_activity_at = now;
    fx.accounts.put(account);

    // Brute-force filter over the fixture population.
    if (account.state == AccountState::Active &&
        account.kind != AccountKind::Permanent && *account.expires_at < now) {
      expected.push_back(account.account_id);
    }
  }
  std::sort(expected.begin(), expected.end());

  auto result = fx.accounts.expire_temporaries(now, fx.audit);
  REQUIRE(result.ok());
  auto got = result.value();
  std::sort(got.begin(), got.end());
  CHECK(got == expected);

  // Idempotent for fixed now.
  auto second = fx.accounts.expire_temporaries(now, fx.audit);
  REQUIRE(second.ok());
  CHECK(second.value().empty());
}

TEST_CASE("sweep_inactive matches a brute-force filter and is idempotent") {
  Fixture fx;
  fx.accounts.touch_activity("a-manager", 100000);
  std::mt19937 rng(23);
  const Timestamp now = 100000;
  const Seconds period = 5000;
  std::vector<std::string> expected;

  for (int i = 0; i < 50; ++i) {
    Account account = make_account("a-p" + std::to_string(i),
                                   (rng() % 4 == 0) ? AccountState::Disabled
                                                    : AccountState::Active);
    account.last_activity_at = now - static_cast<Timestamp>(rng() % 10000);
    fx.accounts.put(account);
    if (account.state == AccountState::Active &&
        now - account.last_activity_at > period) {
      expected.push_back(account.account_id);
    }
  }
  std::sort(expected.begin(), expected.end());

  auto result = fx.accounts.sweep_inactive(now, period, fx.audit);
  REQUIRE(result.ok());
  auto got = result.value();
  std::sort(got.begin(), got.end());
  CHECK(got == expected);

  auto second = fx.accounts.sweep_inactive(now, period, fx.audit);
  REQUIRE(second.ok());
  CHECK(second.value().empty());

  // Zero elapsed time never disables.
  Fixture fresh;
  fresh.accounts.put(make_account("a-now", AccountState::Active));
  fresh.accounts.touch_activity("a-now", 500);
  fresh.accounts.touch_activity("a-manager", 500);
  auto untouched = fresh.accounts.sweep_inactive(500, 100, fresh.audit);
  REQUIRE(untouched.ok());
  CHECK(untouched.value().empty());
}

TEST_CASE("sweep_inactive rejects a non-positive period") {
  Fixture fx;
  CHECK(fx.accounts.sweep_inactive(100, 0, fx.audit).code() == Errc::InvalidPeriod);
  CHECK(fx.accounts.sweep_inactive(100, -5, fx.audit).code() == Errc::InvalidPeriod);
}

TEST_CASE("every successful mutation appends exactly one audit event") {
  Fixture fx;
  fx.accounts.put(make_account("a-user", AccountState::Active));

  auto count = [&] { return fx.audit.size(); };

  auto before = count();
  const auto request =
      fx.accounts.request_account("a-manager", AccountType::Individual,
                                  AccountKind::Permanent, "j", fx.audit, 1);
  REQUIRE(request.ok());
  CHECK(count() == before + 1);

  before = count();
  REQUIRE(fx.accounts
              .approve_account("a-manager", request->request_id, std::nullopt,
                               fx.audit, 2)
              .ok());
  CHECK(count() == before + 1);

  before = count();
  REQUIRE(fx.accounts
              .assign_role("a-manager", "a-user", Role::EndUser,
                           SensitivityLevel::Internal, fx.audit, 3)
              .ok());
  CHECK(count() == before + 1);

  before = count();
  REQUIRE(fx.accounts.disable_account("a-manager", "a-user", fx.audit, 4).ok());
  CHECK(count() == before + 1);

  before = count();
  REQUIRE(fx.accounts.terminate_account("a-manager", "a-user", fx.audit, 5).ok());
  CHECK(count() == before + 1);

  // Failed operations append nothing.
  before = count();
  CHECK_FALSE(fx.accounts.terminate_account("a-manager", "a-user", fx.audit, 6).ok());
  CHECK(count() == before);
}

TEST_CASE("concurrent readers coexist with serialized writers") {
  Fixture fx;
  for (int i = 0; i < 20; ++i) {
    fx.accounts.put(make_account("a-c" + std::to_string(i), AccountState::Active));
  }

  std::atomic<int> reads{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 3; ++t) {
    readers.emplace_back([&] {
      for (int i = 0; i < 500; ++i) {
        const auto listed = fx.accounts.list();
        if (!listed.empty()) ++reads;
        fx.accounts.find("a-c7");
        fx.accounts.identity_of("a-c3");
      }
    });
  }

  for (int i = 0; i < 100; ++i) {
    const std::string id = "a-c" + std::to_string(i % 20);
    fx.accounts.assign_role("a-manager", id, Role::EndUser,
                            SensitivityLevel::Internal, fx.audit, i);
    fx.accounts.touch_activity(id, i);
  }
  for (auto& reader : readers) reader.join();

  CHECK(reads.load() > 0);
  CHECK(fx.accounts.find("a-c7")->roles == std::set<Role>{Role::EndUser});
}

TEST_CASE("group membership requires clearance dominance") {
  Fixture fx;
  Account group = make_account("a-group", AccountState::Active);
  group.account_type = AccountType::Group;
  group.clearance = SensitivityLevel::Confidential;
  fx.accounts.put(group);
  fx.accounts.put(make_account("a-low", AccountState::Active, {Role::EndUser},
                               SensitivityLevel::Internal));
  fx.accounts.put(make_account("a-high", AccountState::Active, {Role::EndUser},
                               SensitivityLevel::Sensitive));

  const auto low = fx.accounts.add_group_member("a-manager", "a-group", "a-low",
                                                fx.audit, 1);
  REQUIRE_FALSE(low.ok());
  CHECK(low.code() == Errc::MembershipConditionFailed);

  const auto high = fx.accounts.add_group_member("a-manager", "a-group", "a-high",
                                                 fx.audit, 2);
  REQUIRE(high.ok());
  CHECK(high->members == std::set<std::string>{"a-high"});

  const auto not_group =
      fx.accounts.add_group_member("a-manager", "a-low", "a-high", fx.audit, 3);
  REQUIRE_FALSE(not_group.ok());
  CHECK(not_group.code() == Errc::NotAGroup);
}
