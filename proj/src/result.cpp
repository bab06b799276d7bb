#include "cloudvault/result.hpp"

namespace cloudvault {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::RequesterNotActive: return "RequesterNotActive";
    case Errc::NotAuthorized: return "NotAuthorized";
    case Errc::RequestNotPending: return "RequestNotPending";
    case Errc::TargetNotActive: return "TargetNotActive";
    case Errc::AlreadyTerminated: return "AlreadyTerminated";
    case Errc::InvalidPeriod: return "InvalidPeriod";
    case Errc::NotAGroup: return "NotAGroup";
    case Errc::MembershipConditionFailed: return "MembershipConditionFailed";
    case Errc::NameTaken: return "NameTaken";
    case Errc::AccountNotActive: return "AccountNotActive";
    case Errc::BadCredentials: return "BadCredentials";
    case Errc::AccountLocked: return "AccountLocked";
    case Errc::UnknownToken: return "UnknownToken";
    case Errc::ExpiredToken: return "ExpiredToken";
    case Errc::SessionInvalid: return "SessionInvalid";
    case Errc::UnknownOwner: return "UnknownOwner";
    case Errc::BadVersion: return "BadVersion";
    case Errc::TestProfileForbidden: return "TestProfileForbidden";
    case Errc::PayloadTooLarge: return "PayloadTooLarge";
    case Errc::BadNonceLength: return "BadNonceLength";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::VerifyFailed: return "VerifyFailed";
    case Errc::DigestMismatch: return "DigestMismatch";
    case Errc::StoreUnavailable: return "StoreUnavailable";
    case Errc::NotFound: return "NotFound";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::UnknownConfigKey: return "UnknownConfigKey";
    case Errc::BadValue: return "BadValue";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace cloudvault
