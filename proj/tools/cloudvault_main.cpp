// cloudvault — operator CLI for the data-custody gateway.
//
// The store lives in a local directory (simulating cloud storage) selected
// by --home or the CLOUDVAULT_HOME environment variable. Passwords are read
// from standard input or an interactive prompt, never from argv.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include <termios.h>
#include <unistd.h>

#include "cloudvault/gateway.hpp"

using namespace cloudvault;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDenied = 1;
constexpr int kExitUsage = 2;

int fail(const Error& error) {
  std::cerr << "error: " << error.message << " [" << errc_name(error.code)
            << "]\n";
  return kExitDenied;
}

std::string prompt_line(const char* prompt, bool echo) {
  const bool tty = ::isatty(STDIN_FILENO) != 0;
  if (tty) std::cerr << prompt;

  termios saved{};
  const bool mute = tty && !echo;
  if (mute) {
    ::tcgetattr(STDIN_FILENO, &saved);
    termios quiet = saved;
    quiet.c_lflag &= ~static_cast<tcflag_t>(ECHO);
    ::tcsetattr(STDIN_FILENO, TCSANOW, &quiet);
  }
  std::string line;
  std::getline(std::cin, line);
  if (mute) {
    ::tcsetattr(STDIN_FILENO, TCSANOW, &saved);
    std::cerr << "\n";
  }
  return line;
}

struct LoginInput {
  std::string name;
  std::string password;
};

LoginInput read_credentials() {
  LoginInput input;
  input.name = prompt_line("login name: ", true);
  input.password = prompt_line("password: ", false);
  return input;
}

Result<Timestamp> time_option(const std::string& text, Timestamp fallback) {
  if (text.empty()) return fallback;
  const auto parsed = parse_timestamp(text);
  if (!parsed) {
    return Error{Errc::BadValue, "cannot parse time '" + text + "'"};
  }
  return *parsed;
}

Result<std::unique_ptr<Vault>> open_vault(const std::string& home) {
  if (home.empty()) {
    return Error{Errc::BadValue,
                 "no store selected; pass --home or set CLOUDVAULT_HOME"};
  }
  return Vault::open(home);
}

// Inspection commands take a shared lock so readers never block each other.
Result<std::unique_ptr<Vault>> open_vault_read_only(const std::string& home) {
  if (home.empty()) {
    return Error{Errc::BadValue,
                 "no store selected; pass --home or set CLOUDVAULT_HOME"};
  }
  return Vault::open_read_only(home);
}

void print_account(const Account& account) {
  std::cout << account.account_id << "  " << account_state_name(account.state)
            << "  " << account_type_name(account.account_type) << "/"
            << account_kind_name(account.kind)
            << "  clearance=" << level_name(account.clearance) << "  roles=";
  if (account.roles.empty()) std::cout << "-";
  bool first = true;
  for (const auto role : account.roles) {
    if (!first) std::cout << ",";
    std::cout << role_name(role);
    first = false;
  }
  if (account.expires_at) {
    std::cout << "  expires=" << format_timestamp(*account.expires_at);
  }
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cloudvault — data custody gateway over a local store"};
  app.require_subcommand(1);

  std::string home;
  if (const char* env = std::getenv("CLOUDVAULT_HOME")) home = env;
  app.add_option("--home", home, "store directory (default: $CLOUDVAULT_HOME)");

  const std::vector<std::string> level_names = {"public", "internal",
                                                "confidential", "sensitive"};
  const std::vector<std::string> channel_names = {"network", "local_disk",
                                                  "print", "removable_media"};
  const std::vector<std::string> role_names = {
      "end_user", "account_manager", "classified_data_manager", "risk_manager",
      "event_manager"};
  const std::vector<std::string> type_names = {"individual", "group", "system"};
  const std::vector<std::string> kind_names = {"permanent", "temporary",
                                               "emergency"};

  std::function<int()> run;

  // ---- init -----------------------------------------------------------
  auto* init_cmd =
      app.add_subcommand("init", "create a new store with a bootstrap manager");
  std::string admin_name = "admin";
  init_cmd->add_option("--admin-name", admin_name, "bootstrap login name");
  init_cmd->callback([&] {
    run = [&]() -> int {
      const std::string password = prompt_line("admin password: ", false);
      if (password.empty()) {
        std::cerr << "error: empty admin password\n";
        return kExitUsage;
      }
      auto vault = Vault::init(home, admin_name, password);
      if (!vault.ok()) return fail(vault.error());
      std::cout << "store initialized at " << home << "\n";
      std::cout << "manager account: " << *vault.value()->first_manager()
                << " (login " << admin_name << ")\n";
      return kExitOk;
    };
  });

  // ---- account --------------------------------------------------------
  auto* account_cmd = app.add_subcommand("account", "account lifecycle");
  account_cmd->require_subcommand(1);

  std::string actor, target, request_id, role_text, clearance_text;
  std::string type_text = "individual", kind_text = "permanent";
  std::string justification, expires_text, now_text;
  Seconds period_s = 0;

  auto* req = account_cmd->add_subcommand("request", "file an account request");
  req->add_option("--as", actor, "requesting account id")->required();
  req->add_option("--type", type_text, "individual|group|system")
      ->check(CLI::IsMember(type_names));
  req->add_option("--kind", kind_text, "permanent|temporary|emergency")
      ->check(CLI::IsMember(kind_names));
  req->add_option("--justification", justification, "free-text reason")
      ->required();
  req->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      auto request = vault.value()->accounts().request_account(
          actor, *parse_account_type(type_text), *parse_account_kind(kind_text),
          justification, vault.value()->audit(), now_utc());
      if (!request.ok()) return fail(request.error());
      std::cout << "request " << request->request_id << " pending\n";
      return kExitOk;
    };
  });

  auto* approve = account_cmd->add_subcommand("approve", "approve a request");
  approve->add_option("--as", actor, "approving manager id")->required();
  approve->add_option("--request", request_id, "request id")->required();
  approve->add_option("--expires-at", expires_text,
                      "expiry (required for temporary/emergency)");
  approve->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      std::optional<Timestamp> expires;
      if (!expires_text.empty()) {
        auto parsed = time_option(expires_text, 0);
        if (!parsed.ok()) return fail(parsed.error());
        expires = parsed.value();
      }
      auto account = vault.value()->accounts().approve_account(
          actor, request_id, expires, vault.value()->audit(), now_utc());
      if (!account.ok()) return fail(account.error());
      std::cout << "account " << account->account_id << " active\n";
      return kExitOk;
    };
  });

  auto* assign =
      account_cmd->add_subcommand("assign-role", "grant a role and clearance");
  assign->add_option("--as", actor, "acting manager id")->required();
  assign->add_option("--target", target, "target account id")->required();
  assign->add_option("--role", role_text, "role name")
      ->required()
      ->check(CLI::IsMember(role_names));
  assign->add_option("--clearance", clearance_text, "sensitivity level")
      ->required()
      ->check(CLI::IsMember(level_names, CLI::ignore_case));
  assign->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      auto account = vault.value()->accounts().assign_role(
          actor, target, *parse_role(role_text), *parse_level(clearance_text),
          vault.value()->audit(), now_utc());
      if (!account.ok()) return fail(account.error());
      print_account(account.value());
      return kExitOk;
    };
  });

  auto* disable = account_cmd->add_subcommand("disable", "disable an account");
  disable->add_option("--as", actor, "acting manager id")->required();
  disable->add_option("--target", target, "target account id")->required();
  disable->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      auto account = vault.value()->accounts().disable_account(
          actor, target, vault.value()->audit(), now_utc());
      if (!account.ok()) return fail(account.error());
      print_account(account.value());
      return kExitOk;
    };
  });

  auto* terminate =
      account_cmd->add_subcommand("terminate", "terminate an account");
  terminate->add_option("--as", actor, "acting manager id")->required();
  terminate->add_option("--target", target, "target account id")->required();
  terminate->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      auto account = vault.value()->accounts().terminate_account(
          actor, target, vault.value()->audit(), now_utc());
      if (!account.ok()) return fail(account.error());
      print_account(account.value());
      return kExitOk;
    };
  });

  auto* expire = account_cmd->add_subcommand(
      "expire", "terminate overdue temporary/emergency accounts");
  expire->add_option("--now", now_text, "reference time (default: now)");
  expire->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      auto now = time_option(now_text, now_utc());
      if (!now.ok()) return fail(now.error());
      auto expired = vault.value()->accounts().expire_temporaries(
          now.value(), vault.value()->audit());
      if (!expired.ok()) return fail(expired.error());
      for (const auto& id : expired.value()) std::cout << id << "\n";
      std::cout << expired->size() << " account(s) expired\n";
      return kExitOk;
    };
  });

  auto* sweep = account_cmd->add_subcommand("sweep", "disable inactive accounts");
  sweep->add_option("--now", now_text, "reference time (default: now)");
  sweep->add_option("--period-s", period_s,
                    "inactivity period in seconds (default: config)");
  sweep->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      auto now = time_option(now_text, now_utc());
      if (!now.ok()) return fail(now.error());
      const Seconds period =
          period_s > 0 ? period_s : vault.value()->config().inactivity_period_s;
      auto swept = vault.value()->accounts().sweep_inactive(
          now.value(), period, vault.value()->audit());
      if (!swept.ok()) return fail(swept.error());
      for (const auto& id : swept.value()) std::cout << id << "\n";
      std::cout << swept->size() << " account(s) disabled\n";
      return kExitOk;
    };
  });

  auto* list = account_cmd->add_subcommand("list", "list accounts");
  list->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault_read_only(home);
      if (!vault.ok()) return fail(vault.error());
      for (const auto& account : vault.value()->accounts().list()) {
        print_account(account);
      }
      return kExitOk;
    };
  });

  auto* reg = account_cmd->add_subcommand(
      "register", "register login credentials for an account");
  reg->add_option("--as", actor, "acting manager id")->required();
  reg->add_option("--target", target, "account receiving the credentials")
      ->required();
  reg->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      const LoginInput input = read_credentials();
      auto record = vault.value()->authn().register_credentials(
          actor, target, input.name, input.password, now_utc());
      if (!record.ok()) return fail(record.error());
      std::cout << "credentials registered for " << target << " as "
                << input.name << "\n";
      return kExitOk;
    };
  });

  // ---- login ----------------------------------------------------------
  auto* login_cmd =
      app.add_subcommand("login", "verify credentials and issue a session");
  login_cmd->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      // Interactively the prompt repeats while a retry is allowed; the
      // lockout counter is the only cap. Piped input gets one attempt.
      for (;;) {
        const LoginInput input = read_credentials();
        auto token = vault.value()->authn().logged_user(input.name,
                                                        input.password,
                                                        now_utc());
        if (token.ok()) {
          std::cout << "login ok; session " << token->token_id << " for "
                    << token->account_id << "\n";
          return kExitOk;
        }
        const bool retryable = token.code() == Errc::BadCredentials;
        std::cerr << "login failed";
        if (retryable) std::cerr << " (retry allowed)";
        std::cerr << "\n";
        if (!retryable || ::isatty(STDIN_FILENO) == 0) return kExitDenied;
      }
    };
  });

  // ---- seal -----------------------------------------------------------
  auto* seal_cmd =
      app.add_subcommand("seal", "run the full data-security pipeline on a file");
  std::string in_path, level_text = "public", channel_text = "network";
  seal_cmd->add_option("--in", in_path, "payload file")
      ->required()
      ->check(CLI::ExistingFile);
  seal_cmd->add_option("--level", level_text, "requested sensitivity label")
      ->check(CLI::IsMember(level_names, CLI::ignore_case));
  seal_cmd->add_option("--channel", channel_text, "declared channel")
      ->required()
      ->check(CLI::IsMember(channel_names, CLI::ignore_case));
  seal_cmd->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      auto payload = read_file(in_path);
      if (!payload.ok()) return fail(payload.error());

      const LoginInput input = read_credentials();
      DataItem item;
      item.payload = std::move(payload.value());
      item.label = parse_level(level_text);

      const Outcome outcome =
          data_security(*vault.value(), input.name, input.password, item,
                        *parse_channel(channel_text), now_utc());
      std::cout << outcome.message << "\n";
      if (outcome.record_ref) {
        std::cout << "record " << *outcome.record_ref << "\n";
      }
      return outcome.message == kMsgSecured ? kExitOk : kExitDenied;
    };
  });

  // ---- verify / open / put / get ---------------------------------------
  std::string record_id, out_path;

  auto* verify_cmd =
      app.add_subcommand("verify", "re-verify a stored sealed record");
  verify_cmd->add_option("--id", record_id, "record id")->required();
  verify_cmd->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      auto bytes = vault.value()->records().get_record_bytes(record_id);
      if (!bytes.ok()) return fail(bytes.error());
      if (secure_data(bytes.value(), vault.value()->keyring())) {
        std::cout << "secured\n";
        return kExitOk;
      }
      vault.value()->audit().append(
          "system", EventCategory::VerifyFail,
          "record " + record_id + " failed verification", now_utc());
      std::cout << "wrong secured\n";
      return kExitDenied;
    };
  });

  auto* open_cmd =
      app.add_subcommand("open", "verify, decrypt and emit a record payload");
  open_cmd->add_option("--id", record_id, "record id")->required();
  open_cmd->add_option("--out", out_path, "payload output file (default: stdout)");
  open_cmd->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault_read_only(home);
      if (!vault.ok()) return fail(vault.error());
      auto bytes = vault.value()->records().get_record_bytes(record_id);
      if (!bytes.ok()) return fail(bytes.error());
      auto opened = open_record(bytes.value(), vault.value()->keyring());
      if (!opened.ok()) return fail(opened.error());
      std::cerr << "level: " << level_name(opened->level) << "\n";
      if (out_path.empty()) {
        std::cout.write(
            reinterpret_cast<const char*>(opened->item.payload.data()),
            static_cast<std::streamsize>(opened->item.payload.size()));
      } else {
        if (auto written = atomic_write_file(out_path, opened->item.payload);
            !written.ok()) {
          return fail(written.error());
        }
      }
      return kExitOk;
    };
  });

  auto* put_cmd =
      app.add_subcommand("put", "store an externally sealed .cvs record");
  put_cmd->add_option("--in", in_path, "record file")
      ->required()
      ->check(CLI::ExistingFile);
  put_cmd->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      auto bytes = read_file(in_path);
      if (!bytes.ok()) return fail(bytes.error());
      auto id = vault.value()->records().put_record(
          bytes.value(), vault.value()->keyring(), vault.value()->audit(),
          "system", now_utc());
      if (!id.ok()) return fail(id.error());
      std::cout << id.value() << "\n";
      return kExitOk;
    };
  });

  auto* get_cmd = app.add_subcommand("get", "fetch a sealed record's bytes");
  get_cmd->add_option("--id", record_id, "record id")->required();
  get_cmd->add_option("--out", out_path, "output file")->required();
  get_cmd->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault_read_only(home);
      if (!vault.ok()) return fail(vault.error());
      auto bytes = vault.value()->records().get_record_bytes(record_id);
      if (!bytes.ok()) return fail(bytes.error());
      if (auto written = atomic_write_file(out_path, bytes.value());
          !written.ok()) {
        return fail(written.error());
      }
      std::cout << "wrote " << out_path << "\n";
      return kExitOk;
    };
  });

  // ---- risk -------------------------------------------------------------
  auto* risk_cmd = app.add_subcommand("risk", "risk policy operations");
  risk_cmd->require_subcommand(1);
  bool media_encrypted = false;

  auto* check = risk_cmd->add_subcommand("check", "score one operation");
  check->add_option("--level", level_text, "sensitivity level")
      ->required()
      ->check(CLI::IsMember(level_names, CLI::ignore_case));
  check->add_option("--channel", channel_text, "channel")
      ->required()
      ->check(CLI::IsMember(channel_names, CLI::ignore_case));
  check->add_flag("--media-encrypted", media_encrypted,
                  "the target media is encrypted");
  check->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      const RiskVerdict verdict = assess_operation(
          vault.value()->policy(), *parse_level(level_text),
          *parse_channel(channel_text), media_encrypted, &vault.value()->audit(),
          "system", now_utc());
      std::cout << "decision=" << decision_name(verdict.decision)
                << " score=" << verdict.score;
      if (verdict.matched_rule) std::cout << " rule=" << *verdict.matched_rule;
      std::cout << "\n";
      return verdict.decision == RiskDecision::Deny ? kExitDenied : kExitOk;
    };
  });

  // ---- policy -----------------------------------------------------------
  auto* policy_cmd = app.add_subcommand("policy", "risk policy file management");
  policy_cmd->require_subcommand(1);
  std::string policy_path;

  auto* update = policy_cmd->add_subcommand("update", "install a new policy");
  update->add_option("--as", actor, "acting risk manager id")->required();
  update->add_option("--file", policy_path, "policy file")
      ->required()
      ->check(CLI::ExistingFile);
  update->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      auto text = read_file(policy_path);
      if (!text.ok()) return fail(text.error());
      auto next = parse_policy(to_string(text.value()));
      if (!next.ok()) return fail(next.error());
      auto identity = vault.value()->accounts().identity_of(actor);
      if (!identity.ok()) return fail(identity.error());
      auto updated = update_policy(identity.value(), vault.value()->policy(),
                                   next.value(), vault.value()->audit(),
                                   now_utc());
      if (!updated.ok()) return fail(updated.error());
      if (auto replaced = vault.value()->replace_policy(updated.value());
          !replaced.ok()) {
        return fail(replaced.error());
      }
      std::cout << "policy now at version " << updated->version << "\n";
      return kExitOk;
    };
  });

  // ---- audit ------------------------------------------------------------
  auto* audit_cmd = app.add_subcommand("audit", "audit log operations");
  audit_cmd->require_subcommand(1);
  std::size_t tail_count = 10;

  auto* audit_verify =
      audit_cmd->add_subcommand("verify", "re-hash the entire chain");
  audit_verify->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault_read_only(home);
      if (!vault.ok()) return fail(vault.error());
      const ChainReport report = vault.value()->audit().verify_chain();
      if (report.ok) {
        std::cout << "chain OK (" << vault.value()->audit().size()
                  << " events)\n";
        return kExitOk;
      }
      std::cout << "chain BROKEN at seq " << *report.first_bad_seq << "\n";
      return kExitDenied;
    };
  });

  auto* audit_tail = audit_cmd->add_subcommand("tail", "print recent events");
  audit_tail->add_option("-n,--count", tail_count, "events to show");
  audit_tail->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault_read_only(home);
      if (!vault.ok()) return fail(vault.error());
      for (const auto& event : vault.value()->audit().tail(tail_count)) {
        std::cout << event.seq << "  " << format_timestamp(event.timestamp)
                  << "  " << event.actor << "  "
                  << category_name(event.category) << "  " << event.detail
                  << "\n";
      }
      return kExitOk;
    };
  });

  // ---- controls -----------------------------------------------------------
  auto* controls_cmd =
      app.add_subcommand("controls", "security control assessments");
  controls_cmd->require_subcommand(1);
  std::string control_id;

  auto* due = controls_cmd->add_subcommand("due", "list overdue controls");
  due->add_option("--now", now_text, "reference time (default: now)");
  due->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault_read_only(home);
      if (!vault.ok()) return fail(vault.error());
      auto now = time_option(now_text, now_utc());
      if (!now.ok()) return fail(now.error());
      const auto ids =
          assessments_due(vault.value()->controls().controls, now.value(),
                          vault.value()->config().accreditation_period_days);
      for (const auto& id : ids) std::cout << id << "\n";
      std::cout << ids.size() << " control(s) due\n";
      return kExitOk;
    };
  });

  auto* assess = controls_cmd->add_subcommand("assess", "mark a control assessed");
  assess->add_option("--id", control_id, "control id")->required();
  assess->add_option("--now", now_text, "assessment time (default: now)");
  assess->add_option("--as", actor, "assessing account (default: system)");
  assess->callback([&] {
    run = [&]() -> int {
      auto vault = open_vault(home);
      if (!vault.ok()) return fail(vault.error());
      auto now = time_option(now_text, now_utc());
      if (!now.ok()) return fail(now.error());
      if (auto ready = vault.value()->audit().appendable(); !ready.ok()) {
        return fail(ready.error());
      }

      auto& controls = vault.value()->controls().controls;
      const auto it = std::find_if(controls.begin(), controls.end(),
                                   [&](const SecurityControl& control) {
                                     return control.control_id == control_id;
                                   });
      if (it == controls.end()) {
        return fail(Error{Errc::NotFound, "no control " + control_id});
      }
      it->last_assessed_at = now.value();
      if (auto saved = vault.value()->persist_controls(); !saved.ok()) {
        return fail(saved.error());
      }
      auto event = vault.value()->audit().append(
          actor.empty() ? "system" : actor, EventCategory::ControlAssessment,
          "control " + control_id + " assessed", now.value());
      if (!event.ok()) return fail(event.error());
      std::cout << "control " << control_id << " assessed at "
                << format_timestamp(now.value()) << "\n";
      return kExitOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (!run) {
    std::cerr << app.help();
    return kExitUsage;
  }
  return run();
}
