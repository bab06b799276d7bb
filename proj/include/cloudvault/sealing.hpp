#pragma once

#include <map>
#include <optional>
#include <string>

#include "cloudvault/classification.hpp"
#include "cloudvault/levels.hpp"
#include "cloudvault/result.hpp"
#include "cloudvault/util.hpp"

namespace cloudvault {

/// TEST is a fully specified deterministic profile for golden files and is
/// not cryptographically secure; STD is the real construction
/// (ChaCha20 + HMAC-SHA-256, encrypt-then-MAC).
enum class SealProfile : std::uint8_t { Test = 0, Std = 1 };

std::string_view profile_name(SealProfile profile);

constexpr std::size_t kTestNonceSize = 8;
constexpr std::size_t kStdNonceSize = 12;
constexpr std::size_t kKeySize = 32;
constexpr std::size_t kCanonicalDigestSize = 8;

std::size_t nonce_size(SealProfile profile);

struct SealingConfig {
  bool allow_test_profile = false;
  SensitivityLevel min_level_for_std = SensitivityLevel::Internal;
};

/// Canonical serialization of a classified payload:
///   8-byte big-endian payload length || payload || 1-byte level ordinal
/// plus the 8-byte FNV-1a digest of those bytes. The digest travels inside
/// the ciphertext and exposes key confusion at open time.
struct CanonicalPayload {
  Bytes bytes;
  Bytes digest;
};

/// Binary layout (big-endian throughout):
///   magic "CVS1" | version 0x01 | profile | level | key_id_len | key_id |
///   nonce_len | nonce | ct_len (4 bytes) | ciphertext | mac_len | mac
/// The MAC covers every byte that precedes it.
struct SealedRecord {
  SealProfile profile = SealProfile::Test;
  SensitivityLevel level = SensitivityLevel::Public;
  std::string key_id;
  Bytes nonce;
  Bytes ciphertext;
  Bytes mac;
};

inline constexpr std::uint8_t kRecordMagic[4] = {0x43, 0x56, 0x53, 0x31};
inline constexpr std::uint8_t kRecordVersion = 0x01;

struct KeyRing {
  std::map<std::string, Bytes> keys;  // key_id -> 32-byte secret
  std::string active_key_id;

  const Bytes* find(const std::string& key_id) const {
    const auto it = keys.find(key_id);
    return it == keys.end() ? nullptr : &it->second;
  }
};

KeyRing generate_keyring();

// ---------------------------------------------------------------------------
// pipeline steps
// ---------------------------------------------------------------------------

/// Chooses the protection profile for a classification. There is no
/// unprotected path: when TEST is not permitted the result falls back to STD.
/// TEST is refused outright for Confidential-or-above data.
Result<SealProfile> privacy_policy(const ClassifiedData& classified,
                                   const SealingConfig& config);

/// Builds the canonical payload and its integrity digest.
Result<CanonicalPayload> authenticate_data(const ClassifiedData& classified);

/// Encrypts canonical bytes || digest under the named key. TEST uses the
/// specified keystream, STD uses ChaCha20; both keep ciphertext length equal
/// to plaintext length.
Result<Bytes> encrypt_data(const CanonicalPayload& canonical,
                           SealProfile profile, const KeyRing& keyring,
                           const std::string& key_id, const Bytes& nonce);

Result<Bytes> decrypt_data(const Bytes& ciphertext, SealProfile profile,
                           const KeyRing& keyring, const std::string& key_id,
                           const Bytes& nonce);

/// Keyed tag over header || ciphertext. TEST: 8-byte keyed FNV-1a;
/// STD: HMAC-SHA-256 (32 bytes).
Result<Bytes> authentication_code(const Bytes& header_and_ciphertext,
                                  const KeyRing& keyring,
                                  const std::string& key_id,
                                  SealProfile profile);

/// Full sealing pipeline with the keyring's active key.
Result<SealedRecord> seal(const ClassifiedData& classified, SealProfile profile,
                          const KeyRing& keyring, const Bytes& nonce);

/// Everything the MAC covers: the serialized record up to (excluding) the
/// mac length field.
Bytes mac_input_bytes(const SealedRecord& record);

Bytes serialize_record(const SealedRecord& record);

Result<SealedRecord> parse_record(const Bytes& bytes);

/// Parses and re-MACs the serialized record; true iff the record is intact.
/// Never decrypts, never throws: malformed input is simply not secure.
bool secure_data(const Bytes& serialized, const KeyRing& keyring);

/// Verifies, decrypts and validates the canonical digest. DigestMismatch
/// signals key confusion: a record whose MAC verified under a key that does
/// not reproduce the plaintext.
Result<ClassifiedData> open_record(const Bytes& serialized,
                                   const KeyRing& keyring);

// ---------------------------------------------------------------------------
// primitives (exposed for the golden/oracle tests)
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const Bytes& data);
Bytes fnv1a64_tag(const Bytes& key, const Bytes& data);
Bytes lcg_keystream(const Bytes& key, const Bytes& nonce, std::size_t length);
Bytes chacha20_xor(const Bytes& key, const Bytes& nonce, const Bytes& input);

}  // namespace cloudvault
