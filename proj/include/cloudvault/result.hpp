#pragma once

#include <cassert>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace cloudvault {

enum class Errc {
  // accounts
  RequesterNotActive,
  NotAuthorized,
  RequestNotPending,
  TargetNotActive,
  AlreadyTerminated,
  InvalidPeriod,
  NotAGroup,
  MembershipConditionFailed,
  // authn
  NameTaken,
  AccountNotActive,
  BadCredentials,
  AccountLocked,
  UnknownToken,
  ExpiredToken,
  SessionInvalid,
  // classification
  UnknownOwner,
  // risk
  BadVersion,
  // sealing
  TestProfileForbidden,
  PayloadTooLarge,
  BadNonceLength,
  UnknownKey,
  VerifyFailed,
  DigestMismatch,
  // monitoring / storage
  StoreUnavailable,
  NotFound,
  MalformedRecord,
  UnknownConfigKey,
  BadValue,
  IoError,
};

const char* errc_name(Errc code);

struct Error {
  Errc code;
  std::string message;
};

/// Value-or-error return type used across the library. Errors carry a code
/// from Errc plus a human-readable message; messages never contain secrets.
template <typename T>
class Result {
 public:
  Result(T value) : data_(std::move(value)) {}
  Result(Error error) : data_(std::move(error)) {}
  Result(Errc code, std::string message)
      : data_(Error{code, std::move(message)}) {}

  bool ok() const { return std::holds_alternative<T>(data_); }
  explicit operator bool() const { return ok(); }

  T& value() & {
    assert(ok());
    return std::get<T>(data_);
  }
  const T& value() const& {
    assert(ok());
    return std::get<T>(data_);
  }
  // Rvalue access moves the value out so `f().value()` cannot dangle.
  T value() && {
    assert(ok());
    return std::move(std::get<T>(data_));
  }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

  const Error& error() const {
    assert(!ok());
    return std::get<Error>(data_);
  }
  Errc code() const { return error().code; }

 private:
  std::variant<T, Error> data_;
};

/// Result for operations with no payload.
class Status {
 public:
  Status() = default;
  Status(Error error) : error_(std::move(error)) {}
  Status(Errc code, std::string message)
      : error_(Error{code, std::move(message)}) {}

  static Status success() { return Status(); }

  bool ok() const { return !error_.has_value(); }
  explicit operator bool() const { return ok(); }

  const Error& error() const {
    assert(!ok());
    return *error_;
  }
  Errc code() const { return error().code; }

 private:
  std::optional<Error> error_;
};

}  // namespace cloudvault
