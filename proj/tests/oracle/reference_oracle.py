#!/usr/bin/env python3
"""Independent reference oracle for the sealed-record format and risk matrix.

This script is deliberately kept free of any dependency on the C++ sources.
It produces:
  * the golden .cvs fixture files under tests/fixtures/
  * frozen scalar values (digests, keystream bytes, tags, risk verdicts)
    printed to stdout for embedding in the test code.

Run from the repository root:  python3 tests/oracle/reference_oracle.py
"""

import json
import os
import sys

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "..", "fixtures")

# ---------------------------------------------------------------------------
# FNV-1a 64-bit
# ---------------------------------------------------------------------------

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK64
    return h


def keyed_tag(key: bytes, data: bytes) -> bytes:
    return fnv1a64(key + data).to_bytes(8, "big")


# ---------------------------------------------------------------------------
# LCG keystream (TEST profile cipher)
# ---------------------------------------------------------------------------

LCG_MUL = 6364136223846793005
LCG_ADD = 1442695040888963407


def keystream(key: bytes, nonce: bytes, nbytes: int) -> bytes:
    assert len(nonce) == 8
    seed = bytes(k ^ n for k, n in zip(key[:8], nonce))
    x = int.from_bytes(seed, "big")
    out = bytearray()
    while len(out) < nbytes:
        x = (x * LCG_MUL + LCG_ADD) & MASK64
        out += x.to_bytes(8, "big")
    return bytes(out[:nbytes])


def xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Canonical payload and sealed record assembly
# ---------------------------------------------------------------------------


def canonical_bytes(payload: bytes, level: int) -> bytes:
    return len(payload).to_bytes(8, "big") + payload + bytes([level])


def seal_test_profile(payload: bytes, level: int, key_id: bytes, key: bytes,
                      nonce: bytes) -> bytes:
    canon = canonical_bytes(payload, level)
    digest = fnv1a64(canon).to_bytes(8, "big")
    plaintext = canon + digest
    ct = xor(plaintext, keystream(key, nonce, len(plaintext)))

    header = b"CVS1"
    header += bytes([0x01])            # format version
    header += bytes([0x00])            # profile_id TEST
    header += bytes([level])
    header += bytes([len(key_id)]) + key_id
    header += bytes([len(nonce)]) + nonce
    header += len(ct).to_bytes(4, "big")

    mac = keyed_tag(key, header + ct)
    return header + ct + bytes([len(mac)]) + mac


# ---------------------------------------------------------------------------
# Risk matrix oracle
# ---------------------------------------------------------------------------

LEVELS = ["public", "internal", "confidential", "sensitive"]
CHANNELS = ["network", "local_disk", "print", "removable_media"]
LEVEL_WEIGHTS = {"public": 0, "internal": 1, "confidential": 2, "sensitive": 3}
CHANNEL_WEIGHTS = {"network": 3, "local_disk": 1, "print": 2, "removable_media": 3}
ENCRYPT_THRESHOLD = 3
DENY_THRESHOLD = 9


def risk_verdict(level: str, channel: str, media_encrypted: bool) -> str:
    if channel in ("print", "removable_media") and not media_encrypted \
            and LEVEL_WEIGHTS[level] >= LEVEL_WEIGHTS["confidential"]:
        return "deny"
    score = LEVEL_WEIGHTS[level] * CHANNEL_WEIGHTS[channel]
    if score >= DENY_THRESHOLD:
        return "deny"
    if score >= ENCRYPT_THRESHOLD:
        return "allow_with_encryption"
    return "allow"


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

KEY_A = bytes(range(32))                      # 000102...1f
KEY_B = bytes((0xF0 + (i % 16)) ^ (i * 7 & 0xFF) for i in range(32))
KEY_ZERO = bytes(32)
KEY_ID = b"k-test01"

NONCE_1 = bytes(range(0xA0, 0xA8))
NONCE_2 = bytes(range(0xB0, 0xB8))
NONCE_3 = bytes(range(0xC0, 0xC8))
NONCE_ZERO = bytes(8)

FIXTURES = [
    # (file name, payload, level ordinal, key, nonce)
    ("golden_empty_public.cvs", b"", 0, KEY_A, NONCE_1),
    ("golden_short_internal.cvs", b"cloudvault golden fixture payload #2", 1,
     KEY_A, NONCE_2),
    ("golden_long_public.cvs",
     bytes((i * 31 + 7) & 0xFF for i in range(173)), 0, KEY_B, NONCE_3),
    ("golden_example_zero.cvs", b"example", 0, KEY_ZERO, NONCE_ZERO),
]


def main() -> None:
    os.makedirs(FIXTURE_DIR, exist_ok=True)

    print("== golden fixture files ==")
    for name, payload, level, key, nonce in FIXTURES:
        record = seal_test_profile(payload, level, KEY_ID, key, nonce)
        path = os.path.join(FIXTURE_DIR, name)
        with open(path, "wb") as f:
            f.write(record)
        print(f"{name}: {len(record)} bytes, mac16={record[-8:].hex()[:16]}")

    print()
    print("== frozen values ==")
    print(f"fnv1a64(\"\")                      = 0x{fnv1a64(b''):016x}")
    print(f"fnv1a64(\"abc\")                   = 0x{fnv1a64(b'abc'):016x}")
    canon_empty = canonical_bytes(b"", 0)
    print(f"canonical(empty, public)          = {canon_empty.hex()}")
    print(f"digest(canonical(empty, public))  = 0x{fnv1a64(canon_empty):016x}")
    canon_ex = canonical_bytes(b"example", 0)
    print(f"canonical(\"example\", public)    = {canon_ex.hex()}  ({len(canon_ex)} bytes)")
    ks16 = keystream(KEY_ZERO, NONCE_ZERO, 16)
    print(f"keystream(zero key, zero nonce)[0:16] = {ks16.hex()}")
    print(f"ct16 = canonical ^ keystream          = {xor(canon_ex, ks16).hex()}")
    tag = keyed_tag(KEY_A, b"the quick brown fox")
    print(f"tag(KEY_A, \"the quick brown fox\")    = {tag.hex()}")

    print()
    print("== risk matrix (level x channel x media_encrypted), default weights ==")
    for enc in (False, True):
        for lvl in LEVELS:
            row = [risk_verdict(lvl, ch, enc) for ch in CHANNELS]
            print(f"enc={int(enc)} {lvl:13s} " + " ".join(f"{v:22s}" for v in row))

    # Compact C++ table in row-major (encrypted, level, channel) order.
    print()
    print("== risk matrix as C++ initializer (Allow=0, AllowWithEncryption=1, Deny=2) ==")
    codes = {"allow": 0, "allow_with_encryption": 1, "deny": 2}
    cells = []
    for enc in (False, True):
        for lvl in LEVELS:
            for ch in CHANNELS:
                cells.append(codes[risk_verdict(lvl, ch, enc)])
    print("{" + ", ".join(map(str, cells)) + "}")


if __name__ == "__main__":
    main()
