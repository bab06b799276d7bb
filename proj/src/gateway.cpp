#include "cloudvault/gateway.hpp"

namespace cloudvault {

namespace {

Outcome finish(Vault& vault, Outcome outcome) {
  if (outcome.state.session.has_value()) {
    vault.authn().end_session(outcome.state.session->token_id);
  }
  return outcome;
}

}  // namespace

Result<std::unique_ptr<Vault>> Vault::init(const fs::path& root,
                                           const std::string& admin_name,
                                           std::string_view admin_password) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) {
    return Error{Errc::IoError, "cannot create store root " + root.string()};
  }
  StoreLayout layout{root};
  if (fs::exists(layout.keyring_file())) {
    return Error{Errc::BadValue, "store already initialized at " + root.string()};
  }
  fs::create_directories(layout.accounts_dir(), ec);
  fs::create_directories(layout.credentials_dir(), ec);
  fs::create_directories(layout.records_dir(), ec);
  if (ec) {
    return Error{Errc::IoError, "cannot create store directories"};
  }

  const Timestamp now = now_utc();
  if (auto saved = save_keyring(layout, generate_keyring()); !saved.ok()) {
    return saved.error();
  }
  if (auto saved = save_policy_file(layout, serialize_policy(default_policy(now)));
      !saved.ok()) {
    return saved.error();
  }
  if (auto saved = atomic_write_file(layout.config_file(),
                                     serialize_config(Config{}));
      !saved.ok()) {
    return saved.error();
  }

  ControlSet controls;
  controls.controls = {
      {"ctl-audit-chain", "audit log chain verification", true, 365, std::nullopt},
      {"ctl-account-review", "review of account lifecycle states", true, 365,
       std::nullopt},
      {"ctl-policy-review", "risk policy review", false, 365, std::nullopt},
  };
  controls.config_key_map = {
      {"policy.conf", {"ctl-policy-review"}},
      {"max_attempts", {"ctl-account-review"}},
  };
  if (auto saved = save_controls(layout, controls); !saved.ok()) {
    return saved.error();
  }

  auto vault = open(root);
  if (!vault.ok()) return vault;
  Vault& v = *vault.value();

  // Bootstrap: the store needs one active account manager before any
  // request/approve flow can run.
  Account admin;
  admin.account_id = random_id("a");
  admin.account_type = AccountType::Individual;
  admin.kind = AccountKind::Permanent;
  admin.state = AccountState::Active;
  admin.roles = {Role::AccountManager};
  admin.clearance = SensitivityLevel::Public;
  admin.last_activity_at = now;
  admin.manager_id = admin.account_id;
  if (auto saved = save_account(v.layout(), admin); !saved.ok()) {
    return saved.error();
  }
  v.accounts().put(admin);
  v.audit().append(admin.account_id, EventCategory::AccountChange,
                   "bootstrap account manager created", now);

  auto registered = v.authn().register_credentials(
      admin.account_id, admin.account_id, admin_name, admin_password, now);
  if (!registered.ok()) return registered.error();
  return vault;
}

Result<std::unique_ptr<Vault>> Vault::open(const fs::path& root) {
  return open_with_mode(root, StoreLock::Mode::Exclusive);
}

Result<std::unique_ptr<Vault>> Vault::open_read_only(const fs::path& root) {
  return open_with_mode(root, StoreLock::Mode::Shared);
}

Result<std::unique_ptr<Vault>> Vault::open_with_mode(const fs::path& root,
                                                     StoreLock::Mode mode) {
  if (!fs::exists(root)) {
    return Error{Errc::NotFound, "no store at " + root.string()};
  }
  auto vault = std::unique_ptr<Vault>(new Vault());
  vault->layout_ = StoreLayout{root};

  if (auto locked = vault->lock_.acquire(vault->layout_.lock_file(), mode);
      !locked.ok()) {
    return locked.error();
  }

  auto config = load_config(vault->layout_.config_file());
  if (!config.ok()) return config.error();
  vault->config_ = config.value();

  if (auto opened = vault->audit_.open(vault->layout_.audit_log()); !opened.ok()) {
    return opened.error();
  }
  if (auto loaded = load_accounts(vault->layout_, vault->accounts_); !loaded.ok()) {
    return loaded.error();
  }
  if (auto loaded = load_credentials(vault->layout_, vault->credentials_);
      !loaded.ok()) {
    return loaded.error();
  }

  auto keyring = load_keyring(vault->layout_);
  if (!keyring.ok()) return keyring.error();
  vault->keyring_ = std::move(keyring.value());

  auto policy_bytes = read_file(vault->layout_.policy_file());
  if (!policy_bytes.ok()) return policy_bytes.error();
  auto policy = parse_policy(to_string(policy_bytes.value()));
  if (!policy.ok()) return policy.error();
  vault->policy_ = std::move(policy.value());

  auto controls = load_controls(vault->layout_);
  if (!controls.ok()) return controls.error();
  vault->controls_ = std::move(controls.value());

  const StoreLayout& layout = vault->layout_;
  vault->accounts_.set_persistence(
      [layout](const Account& account) { return save_account(layout, account); },
      [layout](const AccountRequest& request) {
        return save_request(layout, request);
      });
  vault->credentials_.set_persistence(
      [layout](const CredentialRecord& record) {
        return save_credential(layout, record);
      });

  vault->authn_ = std::make_unique<Authenticator>(
      vault->accounts_, vault->credentials_, vault->sessions_, vault->audit_,
      vault->config_.max_attempts, vault->config_.token_ttl_s);
  vault->records_ = std::make_unique<RecordStore>(layout.records_dir());
  return vault;
}

Status Vault::replace_policy(const RiskPolicy& policy) {
  if (auto saved = save_policy_file(layout_, serialize_policy(policy));
      !saved.ok()) {
    return saved;
  }
  policy_ = policy;
  return Status::success();
}

Status Vault::persist_controls() { return save_controls(layout_, controls_); }

std::optional<std::string> Vault::first_manager() const {
  for (const auto& account : accounts_.list()) {
    if (account.has_role(Role::AccountManager) &&
        account.state == AccountState::Active) {
      return account.account_id;
    }
  }
  return std::nullopt;
}

Result<bool> verification(Vault& vault, const std::string& token_id,
                          const DataItem& item, Timestamp now) {
  auto identity = vault.authn().resolve_session(token_id, now);
  if (!identity.ok()) {
    return Error{Errc::SessionInvalid, "session is not valid"};
  }
  // No assigned duties: the activity terminates.
  if (identity->roles.empty()) return false;
  return dominates(identity->clearance, preview_level(item, vault.policy()));
}

Outcome data_security(Vault& vault, const std::string& name,
                      std::string_view passw, const DataItem& item,
                      Channel channel, Timestamp now,
                      const GatewayHooks* hooks) {
  Outcome outcome;

  // (1) loggedUser, retried while the failure is retryable.
  outcome.steps.push_back("logged_user");
  std::optional<SessionToken> session;
  for (int attempt = 0; attempt < vault.authn().max_attempts(); ++attempt) {
    auto login = vault.authn().logged_user(name, passw, now);
    if (login.ok()) {
      session = login.value();
      break;
    }
    if (login.code() != Errc::BadCredentials) break;  // locked / not active
  }
  if (!session.has_value()) {
    outcome.message = kMsgLoginFailed;
    return finish(vault, outcome);
  }
  outcome.state.log = true;
  outcome.state.session = session;

  // (2) verification; a false verdict exits with nothing stored.
  outcome.steps.push_back("verification");
  DataItem owned_item = item;
  owned_item.owner = session->account_id;
  auto verified = verification(vault, session->token_id, owned_item, now);
  if (!verified.ok() || !verified.value()) {
    outcome.message = kMsgAccessDenied;
    return finish(vault, outcome);
  }
  outcome.state.verify = true;

  auto identity = vault.authn().resolve_session(session->token_id, now);
  if (!identity.ok()) {
    outcome.message = kMsgAccessDenied;
    return finish(vault, outcome);
  }

  // (3) classification.
  outcome.steps.push_back("classify");
  auto classified = classify(identity.value(), owned_item, vault.policy(),
                             vault.accounts(), vault.audit(), now);
  if (!classified.ok()) {
    outcome.message = kMsgAccessDenied;
    return finish(vault, outcome);
  }

  // (4) risk gate for the declared channel. The gateway cannot see whether
  // external media is encrypted, so it assumes not.
  outcome.steps.push_back("assess_operation");
  const RiskVerdict verdict =
      assess_operation(vault.policy(), classified->level, channel,
                       /*media_encrypted=*/false, &vault.audit(),
                       identity->account_id, now);
  if (verdict.decision == RiskDecision::Deny) {
    outcome.message = kMsgAccessDenied;
    return finish(vault, outcome);
  }

  // (5) privacyPolicy.
  outcome.steps.push_back("privacy_policy");
  auto profile = privacy_policy(classified.value(), vault.config().sealing());
  if (!profile.ok()) {
    outcome.message = kMsgAccessDenied;
    return finish(vault, outcome);
  }

  // (6)-(8) authenticateData, encryptData, authenticationCode.
  outcome.steps.push_back("authenticate_data");
  auto canonical = authenticate_data(classified.value());
  if (!canonical.ok()) {
    outcome.message = kMsgWrongSecured;
    return finish(vault, outcome);
  }

  const Bytes nonce = random_bytes(nonce_size(profile.value()));

  outcome.steps.push_back("encrypt_data");
  auto ciphertext =
      encrypt_data(canonical.value(), profile.value(), vault.keyring(),
                   vault.keyring().active_key_id, nonce);
  if (!ciphertext.ok()) {
    outcome.message = kMsgWrongSecured;
    return finish(vault, outcome);
  }

  SealedRecord record;
  record.profile = profile.value();
  record.level = classified->level;
  record.key_id = vault.keyring().active_key_id;
  record.nonce = nonce;
  record.ciphertext = std::move(ciphertext.value());

  outcome.steps.push_back("authentication_code");
  auto mac = authentication_code(mac_input_bytes(record), vault.keyring(),
                                 record.key_id, record.profile);
  if (!mac.ok()) {
    outcome.message = kMsgWrongSecured;
    return finish(vault, outcome);
  }
  record.mac = std::move(mac.value());
  outcome.state.record = record;

  // (9) store the assembled record.
  outcome.steps.push_back("put_record");
  const Bytes serialized = serialize_record(record);
  auto record_id = vault.records().put_record(serialized, vault.keyring(),
                                              vault.audit(),
                                              identity->account_id, now);
  if (!record_id.ok()) {
    vault.audit().append(identity->account_id, EventCategory::VerifyFail,
                         "record store refused the sealed record", now);
    outcome.message = kMsgWrongSecured;
    return finish(vault, outcome);
  }

  if (hooks != nullptr && hooks->after_store) {
    hooks->after_store(vault.records().dir() / (record_id.value() + ".cvs"));
  }

  // (10) secureData over the stored bytes, exactly as a reader would see them.
  outcome.steps.push_back("secure_data");
  auto stored = vault.records().get_record_bytes(record_id.value());
  const bool secured =
      stored.ok() && secure_data(stored.value(), vault.keyring());
  if (!secured) {
    vault.audit().append(identity->account_id, EventCategory::VerifyFail,
                         "stored record " + record_id.value() +
                             " failed verification",
                         now);
    outcome.message = kMsgWrongSecured;
    return finish(vault, outcome);
  }

  outcome.state.secured = true;
  outcome.message = kMsgSecured;
  outcome.record_ref = record_id.value();

  // (11) log the user off.
  return finish(vault, outcome);
}

}  // namespace cloudvault
