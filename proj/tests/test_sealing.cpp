#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "cloudvault/sealing.hpp"

using namespace cloudvault;

namespace {

Bytes read_fixture(const std::string& name) {
  const std::filesystem::path path =
      std::filesystem::path(CLOUDVAULT_FIXTURE_DIR) / name;
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing fixture ", path.string());
  return Bytes((std::istreambuf_iterator<char>(in)),
               std::istreambuf_iterator<char>());
}

// Fixture constants mirrored from the reference oracle script.
Bytes fixture_key_a() {
  Bytes key(32);
  for (int i = 0; i < 32; ++i) key[i] = static_cast<std::uint8_t>(i);
  return key;
}

Bytes fixture_key_b() {
  Bytes key(32);
  for (int i = 0; i < 32; ++i) {
    key[i] = static_cast<std::uint8_t>((0xF0 + (i % 16)) ^ ((i * 7) & 0xFF));
  }
  return key;
}

Bytes fixture_nonce(std::uint8_t base) {
  Bytes nonce(8);
  for (int i = 0; i < 8; ++i) nonce[i] = static_cast<std::uint8_t>(base + i);
  return nonce;
}

KeyRing ring_with(const std::string& key_id, Bytes key) {
  KeyRing keyring;
  keyring.keys[key_id] = std::move(key);
  keyring.active_key_id = key_id;
  return keyring;
}

ClassifiedData classified(Bytes payload, SensitivityLevel level) {
  ClassifiedData data;
  data.item.payload = std::move(payload);
  data.level = level;
  return data;
}

constexpr const char* kFixtureKeyId = "k-test01";

}  // namespace

TEST_CASE("canonical payload of an empty public item") {
  const auto canonical = authenticate_data(classified({}, SensitivityLevel::Public));
  REQUIRE(canonical.ok());
  // 8-byte zero length, no payload, level byte 0.
  CHECK(to_hex(canonical->bytes) == "000000000000000000");
  // Frozen from the reference oracle.
  CHECK(to_hex(canonical->digest) == "e604823a249029bf");
}

TEST_CASE("canonical payload is deterministic") {
  const Bytes payload = to_bytes("the same bytes");
  const auto a = authenticate_data(classified(payload, SensitivityLevel::Internal));
  const auto b = authenticate_data(classified(payload, SensitivityLevel::Internal));
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  CHECK(a->bytes == b->bytes);
  CHECK(a->digest == b->digest);

  // Level participates in the canonical bytes.
  const auto c = authenticate_data(classified(payload, SensitivityLevel::Sensitive));
  REQUIRE(c.ok());
  CHECK(a->digest != c->digest);
}

TEST_CASE("canonical bytes of a known item match the oracle") {
  const auto canonical =
      authenticate_data(classified(to_bytes("example"), SensitivityLevel::Public));
  REQUIRE(canonical.ok());
  CHECK(to_hex(canonical->bytes) == "00000000000000076578616d706c6500");
}

TEST_CASE("TEST-profile encryption equals the keystream oracle") {
  // All-zero key and nonce over the 16-byte canonical input.
  const auto canonical =
      authenticate_data(classified(to_bytes("example"), SensitivityLevel::Public));
  REQUIRE(canonical.ok());

  const KeyRing keyring = ring_with("k0", Bytes(32, 0x00));
  const Bytes nonce(8, 0x00);
  const auto ciphertext = encrypt_data(canonical.value(), SealProfile::Test,
                                       keyring, "k0", nonce);
  REQUIRE(ciphertext.ok());
  // canonical bytes (16) followed by the encrypted digest (8).
  CHECK(ciphertext->size() == 24);
  CHECK(to_hex(Bytes(ciphertext->begin(), ciphertext->begin() + 16)) ==
        "14057b7ef76781487f708f7cf4d60832");
}

TEST_CASE("ciphertext length equals plaintext length under both profiles") {
  const auto canonical =
      authenticate_data(classified(to_bytes("stream cipher"), SensitivityLevel::Public));
  REQUIRE(canonical.ok());
  const std::size_t plaintext_len = canonical->bytes.size() + 8;

  const KeyRing keyring = ring_with("k0", fixture_key_a());
  const auto test_ct = encrypt_data(canonical.value(), SealProfile::Test,
                                    keyring, "k0", Bytes(8, 0x01));
  REQUIRE(test_ct.ok());
  CHECK(test_ct->size() == plaintext_len);

  const auto std_ct = encrypt_data(canonical.value(), SealProfile::Std, keyring,
                                   "k0", Bytes(12, 0x01));
  REQUIRE(std_ct.ok());
  CHECK(std_ct->size() == plaintext_len);
}

TEST_CASE("nonce length is enforced per profile") {
  const auto canonical =
      authenticate_data(classified(to_bytes("x"), SensitivityLevel::Public));
  REQUIRE(canonical.ok());
  const KeyRing keyring = ring_with("k0", fixture_key_a());

  CHECK(encrypt_data(canonical.value(), SealProfile::Test, keyring, "k0",
                     Bytes(12, 0))
            .code() == Errc::BadNonceLength);
  CHECK(encrypt_data(canonical.value(), SealProfile::Std, keyring, "k0",
                     Bytes(8, 0))
            .code() == Errc::BadNonceLength);
  CHECK(encrypt_data(canonical.value(), SealProfile::Test, keyring, "nope",
                     Bytes(8, 0))
            .code() == Errc::UnknownKey);
}

TEST_CASE("authentication code is keyed and deterministic") {
  const KeyRing keyring = ring_with("k0", fixture_key_a());
  const Bytes input = to_bytes("header and ciphertext bytes");

  const auto tag1 = authentication_code(input, keyring, "k0", SealProfile::Test);
  const auto tag2 = authentication_code(input, keyring, "k0", SealProfile::Test);
  REQUIRE(tag1.ok());
  REQUIRE(tag2.ok());
  CHECK(tag1.value() == tag2.value());
  CHECK(tag1->size() == 8);

  const auto std_tag = authentication_code(input, keyring, "k0", SealProfile::Std);
  REQUIRE(std_tag.ok());
  CHECK(std_tag->size() == 32);

  CHECK(authentication_code(input, keyring, "missing", SealProfile::Test).code() ==
        Errc::UnknownKey);
}

TEST_CASE("any single-bit change to the tag input changes the tag") {
  const KeyRing keyring = ring_with("k0", fixture_key_b());
  std::mt19937 rng(7);
  Bytes input(64);
  for (auto& b : input) b = static_cast<std::uint8_t>(rng());

  const auto base = authentication_code(input, keyring, "k0", SealProfile::Test);
  REQUIRE(base.ok());
  for (std::size_t bit = 0; bit < input.size() * 8; ++bit) {
    Bytes mutated = input;
    mutated[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    const auto tag = authentication_code(mutated, keyring, "k0", SealProfile::Test);
    REQUIRE(tag.ok());
    CHECK(tag.value() != base.value());
  }
}

TEST_CASE("golden TEST-profile records reproduce byte for byte") {
  struct Golden {
    const char* file;
    Bytes payload;
    SensitivityLevel level;
    Bytes key;
    Bytes nonce;
  };
  Bytes long_payload(173);
  for (std::size_t i = 0; i < long_payload.size(); ++i) {
    long_payload[i] = static_cast<std::uint8_t>((i * 31 + 7) & 0xFF);
  }
  const Golden goldens[] = {
      {"golden_empty_public.cvs", {}, SensitivityLevel::Public, fixture_key_a(),
       fixture_nonce(0xA0)},
      {"golden_short_internal.cvs",
       to_bytes("cloudvault golden fixture payload #2"),
       SensitivityLevel::Internal, fixture_key_a(), fixture_nonce(0xB0)},
      {"golden_long_public.cvs", long_payload, SensitivityLevel::Public,
       fixture_key_b(), fixture_nonce(0xC0)},
      {"golden_example_zero.cvs", to_bytes("example"), SensitivityLevel::Public,
       Bytes(32, 0x00), Bytes(8, 0x00)},
  };

  for (const auto& golden : goldens) {
    CAPTURE(golden.file);
    const KeyRing keyring = ring_with(kFixtureKeyId, golden.key);
    const auto record =
        seal(classified(golden.payload, golden.level), SealProfile::Test,
             keyring, golden.nonce);
    REQUIRE(record.ok());
    const Bytes produced = serialize_record(record.value());
    const Bytes expected = read_fixture(golden.file);
    CHECK(produced == expected);
    CHECK(secure_data(expected, keyring));

    const auto opened = open_record(expected, keyring);
    REQUIRE(opened.ok());
    CHECK(opened->item.payload == golden.payload);
    CHECK(opened->level == golden.level);
  }
}

TEST_CASE("record header fields survive a parse round trip") {
  const KeyRing keyring = ring_with(kFixtureKeyId, fixture_key_a());
  const auto record = seal(classified(to_bytes("abc"), SensitivityLevel::Internal),
                           SealProfile::Test, keyring, fixture_nonce(0xA0));
  REQUIRE(record.ok());
  const Bytes serialized = serialize_record(record.value());

  CHECK(serialized[0] == 0x43);
  CHECK(serialized[1] == 0x56);
  CHECK(serialized[2] == 0x53);
  CHECK(serialized[3] == 0x31);
  CHECK(serialized[4] == 0x01);

  const auto parsed = parse_record(serialized);
  REQUIRE(parsed.ok());
  CHECK(parsed->profile == SealProfile::Test);
  CHECK(parsed->level == SensitivityLevel::Internal);
  CHECK(parsed->key_id == kFixtureKeyId);
  CHECK(parsed->nonce == fixture_nonce(0xA0));
  CHECK(parsed->mac == record->mac);
  CHECK(serialize_record(parsed.value()) == serialized);
}

TEST_CASE("secure_data rejects every single-bit flip") {
  const KeyRing keyring = ring_with(kFixtureKeyId, fixture_key_a());
  const Bytes serialized = read_fixture("golden_short_internal.cvs");
  REQUIRE(secure_data(serialized, keyring));

  for (std::size_t bit = 0; bit < serialized.size() * 8; ++bit) {
    Bytes mutated = serialized;
    mutated[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    CHECK_FALSE(secure_data(mutated, keyring));
  }
}

TEST_CASE("secure_data survives every truncation without crashing") {
  const KeyRing keyring = ring_with(kFixtureKeyId, fixture_key_a());
  const Bytes serialized = read_fixture("golden_long_public.cvs");
  for (std::size_t len = 0; len < serialized.size(); ++len) {
    const Bytes prefix(serialized.begin(),
                       serialized.begin() + static_cast<std::ptrdiff_t>(len));
    CHECK_FALSE(secure_data(prefix, keyring));
  }
}

TEST_CASE("random byte blobs never verify and never crash the parser") {
  const KeyRing keyring = ring_with(kFixtureKeyId, fixture_key_a());
  std::mt19937 rng(99);
  for (int i = 0; i < 1000; ++i) {
    Bytes blob(rng() % 200);
    for (auto& b : blob) b = static_cast<std::uint8_t>(rng());
    CHECK_FALSE(secure_data(blob, keyring));
  }
  // Even with a valid-looking prefix the MAC gate holds.
  Bytes fake = {0x43, 0x56, 0x53, 0x31, 0x01, 0x00, 0x00};
  CHECK_FALSE(secure_data(fake, keyring));
}

TEST_CASE("seal then open round-trips under both profiles") {
  std::mt19937 rng(1234);
  const KeyRing keyring = ring_with("k-rt", fixture_key_b());

  for (const auto profile : {SealProfile::Test, SealProfile::Std}) {
    for (int i = 0; i < 50; ++i) {
      const std::size_t len = (i == 0) ? 0 : (i == 1) ? 1 : rng() % 300;
      Bytes payload(len);
      for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
      const auto level = kAllLevels[rng() % kAllLevels.size()];

      Bytes nonce(nonce_size(profile));
      for (auto& b : nonce) b = static_cast<std::uint8_t>(rng());

      const auto record = seal(classified(payload, level), profile, keyring, nonce);
      REQUIRE(record.ok());
      const Bytes serialized = serialize_record(record.value());
      REQUIRE(secure_data(serialized, keyring));
      const auto opened = open_record(serialized, keyring);
      REQUIRE(opened.ok());
      CHECK(opened->item.payload == payload);
      CHECK(opened->level == level);
    }
  }
}

TEST_CASE("open refuses a tampered record as a verification failure") {
  const KeyRing keyring = ring_with(kFixtureKeyId, fixture_key_a());
  Bytes serialized = read_fixture("golden_short_internal.cvs");
  serialized[serialized.size() / 2] ^= 0x40;
  const auto opened = open_record(serialized, keyring);
  REQUIRE_FALSE(opened.ok());
  CHECK(opened.code() == Errc::VerifyFailed);
}

TEST_CASE("key confusion is caught by the canonical digest") {
  // Seal under key A, then re-MAC the record under key B: the MAC verifies
  // against B's keyring but decryption diverges, which the digest exposes.
  const KeyRing ring_a = ring_with(kFixtureKeyId, fixture_key_a());
  const KeyRing ring_b = ring_with(kFixtureKeyId, fixture_key_b());

  const auto record = seal(classified(to_bytes("confused"), SensitivityLevel::Internal),
                           SealProfile::Test, ring_a, fixture_nonce(0xA0));
  REQUIRE(record.ok());

  SealedRecord spliced = record.value();
  const auto forged_mac = authentication_code(mac_input_bytes(spliced), ring_b,
                                              kFixtureKeyId, SealProfile::Test);
  REQUIRE(forged_mac.ok());
  spliced.mac = forged_mac.value();

  const Bytes serialized = serialize_record(spliced);
  REQUIRE(secure_data(serialized, ring_b));
  const auto opened = open_record(serialized, ring_b);
  REQUIRE_FALSE(opened.ok());
  CHECK(opened.code() == Errc::DigestMismatch);
}

TEST_CASE("profile selection follows the level threshold") {
  SealingConfig config;
  config.min_level_for_std = SensitivityLevel::Internal;
  config.allow_test_profile = true;

  auto profile = privacy_policy(classified({}, SensitivityLevel::Sensitive), config);
  REQUIRE(profile.ok());
  CHECK(profile.value() == SealProfile::Std);

  profile = privacy_policy(classified({}, SensitivityLevel::Public), config);
  REQUIRE(profile.ok());
  CHECK(profile.value() == SealProfile::Test);

  // No plaintext path exists: with TEST disallowed the result is still STD.
  config.allow_test_profile = false;
  profile = privacy_policy(classified({}, SensitivityLevel::Public), config);
  REQUIRE(profile.ok());
  CHECK(profile.value() == SealProfile::Std);
}

TEST_CASE("TEST profile is refused for confidential data") {
  SealingConfig config;
  config.min_level_for_std = SensitivityLevel::Sensitive;
  config.allow_test_profile = true;

  const auto profile =
      privacy_policy(classified({}, SensitivityLevel::Confidential), config);
  REQUIRE_FALSE(profile.ok());
  CHECK(profile.code() == Errc::TestProfileForbidden);
}

TEST_CASE("keyring generation produces a usable active key") {
  const KeyRing keyring = generate_keyring();
  CHECK(keyring.keys.size() == 1);
  REQUIRE(keyring.find(keyring.active_key_id) != nullptr);
  CHECK(keyring.find(keyring.active_key_id)->size() == kKeySize);
}
