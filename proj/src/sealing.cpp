#include "cloudvault/sealing.hpp"

#include <cassert>
#include <cstring>

#include "cloudvault/sha256.hpp"

namespace cloudvault {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

constexpr std::uint64_t kLcgMultiplier = 6364136223846793005ull;
constexpr std::uint64_t kLcgIncrement = 1442695040888963407ull;

constexpr std::size_t kMaxCiphertext = 0xFFFFFFFFull;

std::uint64_t fnv1a64_raw(std::uint64_t state, const std::uint8_t* data,
                          std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    state ^= data[i];
    state *= kFnvPrime;
  }
  return state;
}

Bytes be64(std::uint64_t v) {
  Bytes out;
  put_u64_be(out, v);
  return out;
}

// --- ChaCha20 (RFC 8439) ---------------------------------------------------

inline std::uint32_t rotl32(std::uint32_t x, unsigned n) {
  return (x << n) | (x >> (32 - n));
}

inline void quarter_round(std::uint32_t& a, std::uint32_t& b, std::uint32_t& c,
                          std::uint32_t& d) {
  a += b; d ^= a; d = rotl32(d, 16);
  c += d; b ^= c; b = rotl32(b, 12);
  a += b; d ^= a; d = rotl32(d, 8);
  c += d; b ^= c; b = rotl32(b, 7);
}

inline std::uint32_t load_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void chacha20_block(const std::uint8_t key[32], const std::uint8_t nonce[12],
                    std::uint32_t counter, std::uint8_t out[64]) {
  std::uint32_t state[16];
  state[0] = 0x61707865;
  state[1] = 0x3320646e;
  state[2] = 0x79622d32;
  state[3] = 0x6b206574;
  for (int i = 0; i < 8; ++i) state[4 + i] = load_le32(key + i * 4);
  state[12] = counter;
  for (int i = 0; i < 3; ++i) state[13 + i] = load_le32(nonce + i * 4);

  std::uint32_t working[16];
  std::memcpy(working, state, sizeof(working));
  for (int round = 0; round < 10; ++round) {
    quarter_round(working[0], working[4], working[8], working[12]);
    quarter_round(working[1], working[5], working[9], working[13]);
    quarter_round(working[2], working[6], working[10], working[14]);
    quarter_round(working[3], working[7], working[11], working[15]);
    quarter_round(working[0], working[5], working[10], working[15]);
    quarter_round(working[1], working[6], working[11], working[12]);
    quarter_round(working[2], working[7], working[8], working[13]);
    quarter_round(working[3], working[4], working[9], working[14]);
  }
  for (int i = 0; i < 16; ++i) {
    const std::uint32_t word = working[i] + state[i];
    out[i * 4] = static_cast<std::uint8_t>(word);
    out[i * 4 + 1] = static_cast<std::uint8_t>(word >> 8);
    out[i * 4 + 2] = static_cast<std::uint8_t>(word >> 16);
    out[i * 4 + 3] = static_cast<std::uint8_t>(word >> 24);
  }
}

}  // namespace

std::string_view profile_name(SealProfile profile) {
  return profile == SealProfile::Test ? "TEST" : "STD";
}

std::size_t nonce_size(SealProfile profile) {
  return profile == SealProfile::Test ? kTestNonceSize : kStdNonceSize;
}

KeyRing generate_keyring() {
  KeyRing keyring;
  const std::string key_id = random_id("k");
  keyring.keys[key_id] = random_bytes(kKeySize);
  keyring.active_key_id = key_id;
  return keyring;
}

std::uint64_t fnv1a64(const Bytes& data) {
  return fnv1a64_raw(kFnvOffset, data.data(), data.size());
}

Bytes fnv1a64_tag(const Bytes& key, const Bytes& data) {
  std::uint64_t state = fnv1a64_raw(kFnvOffset, key.data(), key.size());
  state = fnv1a64_raw(state, data.data(), data.size());
  return be64(state);
}

Bytes lcg_keystream(const Bytes& key, const Bytes& nonce, std::size_t length) {
  assert(key.size() >= 8 && nonce.size() == kTestNonceSize);
  // Seed: first 8 key bytes XOR the 8-byte nonce, read big-endian.
  std::uint8_t seed[8];
  for (int i = 0; i < 8; ++i) seed[i] = key[i] ^ nonce[i];
  std::uint64_t x = read_u64_be(seed);

  Bytes out;
  out.reserve(length + 8);
  while (out.size() < length) {
    x = x * kLcgMultiplier + kLcgIncrement;
    put_u64_be(out, x);
  }
  out.resize(length);
  return out;
}

Bytes chacha20_xor(const Bytes& key, const Bytes& nonce, const Bytes& input) {
  Bytes out(input.size());
  std::uint8_t block[64];
  std::uint32_t counter = 0;
  for (std::size_t offset = 0; offset < input.size(); offset += 64) {
    chacha20_block(key.data(), nonce.data(), counter++, block);
    const std::size_t chunk = std::min<std::size_t>(64, input.size() - offset);
    for (std::size_t i = 0; i < chunk; ++i) {
      out[offset + i] = input[offset + i] ^ block[i];
    }
  }
  return out;
}

Result<SealProfile> privacy_policy(const ClassifiedData& classified,
                                   const SealingConfig& config) {
  if (dominates(classified.level, config.min_level_for_std)) {
    return SealProfile::Std;
  }
  if (config.allow_test_profile) {
    if (dominates(classified.level, SensitivityLevel::Confidential)) {
      return Error{Errc::TestProfileForbidden,
                   "TEST profile refused for confidential or sensitive data"};
    }
    return SealProfile::Test;
  }
  // Never unprotected: fall back to the standard profile.
  return SealProfile::Std;
}

Result<CanonicalPayload> authenticate_data(const ClassifiedData& classified) {
  const Bytes& payload = classified.item.payload;
  // ct_len is a 4-byte field and the ciphertext carries 17 bytes of framing
  // (length, level, digest) on top of the payload.
  if (payload.size() > kMaxCiphertext - 17) {
    return Error{Errc::PayloadTooLarge, "payload exceeds the record format"};
  }

  CanonicalPayload canonical;
  canonical.bytes.reserve(payload.size() + 9);
  put_u64_be(canonical.bytes, payload.size());
  canonical.bytes.insert(canonical.bytes.end(), payload.begin(), payload.end());
  canonical.bytes.push_back(ordinal(classified.level));
  canonical.digest = be64(fnv1a64(canonical.bytes));
  return canonical;
}

Result<Bytes> encrypt_data(const CanonicalPayload& canonical,
                           SealProfile profile, const KeyRing& keyring,
                           const std::string& key_id, const Bytes& nonce) {
  const Bytes* key = keyring.find(key_id);
  if (key == nullptr) {
    return Error{Errc::UnknownKey, "key id not in the keyring"};
  }
  if (nonce.size() != nonce_size(profile)) {
    return Error{Errc::BadNonceLength, "nonce length does not fit the profile"};
  }

  Bytes plaintext = canonical.bytes;
  plaintext.insert(plaintext.end(), canonical.digest.begin(),
                   canonical.digest.end());

  if (profile == SealProfile::Test) {
    const Bytes stream = lcg_keystream(*key, nonce, plaintext.size());
    for (std::size_t i = 0; i < plaintext.size(); ++i) plaintext[i] ^= stream[i];
    return plaintext;
  }
  return chacha20_xor(*key, nonce, plaintext);
}

Result<Bytes> decrypt_data(const Bytes& ciphertext, SealProfile profile,
                           const KeyRing& keyring, const std::string& key_id,
                           const Bytes& nonce) {
  const Bytes* key = keyring.find(key_id);
  if (key == nullptr) {
    return Error{Errc::UnknownKey, "key id not in the keyring"};
  }
  if (nonce.size() != nonce_size(profile)) {
    return Error{Errc::BadNonceLength, "nonce length does not fit the profile"};
  }
  if (profile == SealProfile::Test) {
    Bytes out = ciphertext;
    const Bytes stream = lcg_keystream(*key, nonce, out.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= stream[i];
    return out;
  }
  return chacha20_xor(*key, nonce, ciphertext);
}

Result<Bytes> authentication_code(const Bytes& header_and_ciphertext,
                                  const KeyRing& keyring,
                                  const std::string& key_id,
                                  SealProfile profile) {
  const Bytes* key = keyring.find(key_id);
  if (key == nullptr) {
    return Error{Errc::UnknownKey, "key id not in the keyring"};
  }
  if (profile == SealProfile::Test) {
    return fnv1a64_tag(*key, header_and_ciphertext);
  }
  return hmac_sha256(*key, header_and_ciphertext);
}

Bytes mac_input_bytes(const SealedRecord& record) {
  Bytes out(kRecordMagic, kRecordMagic + 4);
  out.push_back(kRecordVersion);
  out.push_back(static_cast<std::uint8_t>(record.profile));
  out.push_back(ordinal(record.level));
  out.push_back(static_cast<std::uint8_t>(record.key_id.size()));
  out.insert(out.end(), record.key_id.begin(), record.key_id.end());
  out.push_back(static_cast<std::uint8_t>(record.nonce.size()));
  out.insert(out.end(), record.nonce.begin(), record.nonce.end());
  put_u32_be(out, static_cast<std::uint32_t>(record.ciphertext.size()));
  out.insert(out.end(), record.ciphertext.begin(), record.ciphertext.end());
  return out;
}

Bytes serialize_record(const SealedRecord& record) {
  Bytes out = mac_input_bytes(record);
  out.push_back(static_cast<std::uint8_t>(record.mac.size()));
  out.insert(out.end(), record.mac.begin(), record.mac.end());
  return out;
}

Result<SealedRecord> parse_record(const Bytes& bytes) {
  const auto malformed = [](std::string_view what) {
    return Error{Errc::MalformedRecord, std::string(what)};
  };

  std::size_t pos = 0;
  const auto remaining = [&] { return bytes.size() - pos; };

  if (remaining() < 7) return malformed("record too short");
  if (std::memcmp(bytes.data(), kRecordMagic, 4) != 0) {
    return malformed("bad magic");
  }
  pos = 4;
  if (bytes[pos++] != kRecordVersion) return malformed("unsupported version");

  SealedRecord record;
  const std::uint8_t profile_byte = bytes[pos++];
  if (profile_byte > 1) return malformed("unknown profile");
  record.profile = static_cast<SealProfile>(profile_byte);

  const auto level = level_from_ordinal(bytes[pos++]);
  if (!level) return malformed("bad level ordinal");
  record.level = *level;

  if (remaining() < 1) return malformed("truncated key id length");
  const std::size_t key_id_len = bytes[pos++];
  if (remaining() < key_id_len) return malformed("truncated key id");
  record.key_id.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                       bytes.begin() + static_cast<std::ptrdiff_t>(pos + key_id_len));
  pos += key_id_len;

  if (remaining() < 1) return malformed("truncated nonce length");
  const std::size_t nonce_len = bytes[pos++];
  if (remaining() < nonce_len) return malformed("truncated nonce");
  record.nonce.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + nonce_len));
  pos += nonce_len;

  if (remaining() < 4) return malformed("truncated ciphertext length");
  const std::uint32_t ct_len = read_u32_be(bytes.data() + pos);
  pos += 4;
  if (remaining() < ct_len) return malformed("truncated ciphertext");
  record.ciphertext.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                           bytes.begin() + static_cast<std::ptrdiff_t>(pos + ct_len));
  pos += ct_len;

  if (remaining() < 1) return malformed("truncated mac length");
  const std::size_t mac_len = bytes[pos++];
  if (remaining() != mac_len) return malformed("mac length mismatch");
  record.mac.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return record;
}

Result<SealedRecord> seal(const ClassifiedData& classified, SealProfile profile,
                          const KeyRing& keyring, const Bytes& nonce) {
  auto canonical = authenticate_data(classified);
  if (!canonical.ok()) return canonical.error();

  auto ciphertext = encrypt_data(canonical.value(), profile, keyring,
                                 keyring.active_key_id, nonce);
  if (!ciphertext.ok()) return ciphertext.error();

  SealedRecord record;
  record.profile = profile;
  record.level = classified.level;
  record.key_id = keyring.active_key_id;
  record.nonce = nonce;
  record.ciphertext = std::move(ciphertext.value());

  auto mac = authentication_code(mac_input_bytes(record), keyring,
                                 record.key_id, profile);
  if (!mac.ok()) return mac.error();
  record.mac = std::move(mac.value());
  return record;
}

bool secure_data(const Bytes& serialized, const KeyRing& keyring) {
  auto parsed = parse_record(serialized);
  if (!parsed.ok()) return false;
  const SealedRecord& record = parsed.value();

  auto expected = authentication_code(mac_input_bytes(record), keyring,
                                      record.key_id, record.profile);
  if (!expected.ok()) return false;
  return constant_time_equal(expected.value(), record.mac);
}

Result<ClassifiedData> open_record(const Bytes& serialized,
                                   const KeyRing& keyring) {
  if (!secure_data(serialized, keyring)) {
    return Error{Errc::VerifyFailed, "record failed verification"};
  }
  const SealedRecord record = parse_record(serialized).value();

  auto plaintext = decrypt_data(record.ciphertext, record.profile, keyring,
                                record.key_id, record.nonce);
  if (!plaintext.ok()) return plaintext.error();
  const Bytes& pt = plaintext.value();

  // length field (8) + level byte (1) + digest (8)
  if (pt.size() < 17) {
    return Error{Errc::DigestMismatch, "decrypted payload too short"};
  }
  const Bytes canonical(pt.begin(), pt.end() - kCanonicalDigestSize);
  const Bytes digest(pt.end() - kCanonicalDigestSize, pt.end());
  if (be64(fnv1a64(canonical)) != digest) {
    return Error{Errc::DigestMismatch, "canonical digest mismatch"};
  }
  const std::uint64_t payload_len = read_u64_be(canonical.data());
  if (payload_len != canonical.size() - 9 ||
      canonical.back() != ordinal(record.level)) {
    return Error{Errc::DigestMismatch, "canonical structure mismatch"};
  }

  ClassifiedData classified;
  classified.item.payload.assign(canonical.begin() + 8, canonical.end() - 1);
  classified.level = record.level;
  return classified;
}

}  // namespace cloudvault
