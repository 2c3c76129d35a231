"""Keyed Bloom-filter encoding of identifying fields.

Each profile carries five identifying fields (first name, last name, birth
day, birth month, birth year).  Every field is normalized, split into
boundary-padded bigrams and hashed into a fixed-length bit vector with a
keyed double-hashing scheme.  Only these bit vectors leave the data owner's
boundary; all downstream similarity work happens on them.

Field order is fixed everywhere in the package: index 0 = first name,
1 = last name, 2 = birth day, 3 = birth month, 4 = birth year.
"""

from __future__ import annotations

import datetime
import hmac
import hashlib
import re
from dataclasses import dataclass, field

from .errors import EmptyFieldError

FIELD_NAMES = ("first", "last", "day", "month", "year")
NUM_FIELDS = 5

_NORMALIZE_RE = re.compile(r"[^a-z0-9]")


@dataclass(frozen=True)
class PlainProfile:
    """One plaintext registration record."""

    profile_id: str
    first_name: str
    last_name: str
    dob_day: int
    dob_month: int
    dob_year: int

    def validate(self) -> None:
        """Raise ValueError unless the id is non-empty and the DOB is a real date."""
        if not self.profile_id:
            raise ValueError("profile_id must be non-empty")
        try:
            datetime.date(self.dob_year, self.dob_month, self.dob_day)
        except ValueError as exc:
            raise ValueError(
                f"profile {self.profile_id!r}: invalid date of birth "
                f"{self.dob_year:04d}-{self.dob_month:02d}-{self.dob_day:02d}"
            ) from exc


@dataclass(frozen=True)
class EncoderConfig:
    """Parameters of the keyed Bloom encoding.

    m is the vector length in bits (32 or 64), q the gram size (fixed at 2),
    k the number of hash functions per gram, key the shared secret.  The key
    never appears in any output file.
    """

    key: bytes
    m: int = 64
    q: int = 2
    k: int = 2

    def __post_init__(self) -> None:
        if self.m not in (32, 64):
            raise ValueError(f"m must be 32 or 64, got {self.m}")
        if self.q != 2:
            raise ValueError("only 2-grams are supported")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.key:
            raise ValueError("key must be non-empty")


@dataclass(frozen=True)
class EncodedProfile:
    """A profile reduced to five equal-length bit vectors.

    Vectors are stored as big-endian bytes: bit position p lives at
    byte p // 8, mask 1 << (7 - p % 8), so ``fields[i].hex()`` is the wire
    representation.  An all-zero vector marks a field that was empty in
    the plaintext.
    """

    profile_id: str
    m: int
    fields: tuple[bytes, ...] = field(repr=False)

    def empty_fields(self) -> tuple[bool, ...]:
        zero = bytes(self.m // 8)
        return tuple(f == zero for f in self.fields)


def normalize_field(raw: str) -> str:
    """Canonicalize a plaintext field: lowercase, trimmed, [a-z0-9] only."""
    return _NORMALIZE_RE.sub("", raw.strip().lower())


def field_strings(profile: PlainProfile) -> tuple[str, str, str, str, str]:
    """The five normalized field strings, DOB fields zero-padded first."""
    return (
        normalize_field(profile.first_name),
        normalize_field(profile.last_name),
        normalize_field(f"{profile.dob_day:02d}"),
        normalize_field(f"{profile.dob_month:02d}"),
        normalize_field(f"{profile.dob_year:04d}"),
    )


def qgrams(s: str) -> list[str]:
    """Bigrams of the boundary-padded string ``_s_``, duplicates retained."""
    if not s:
        return []
    padded = "_" + s + "_"
    return [padded[i : i + 2] for i in range(len(padded) - 1)]


def _field_key(cfg: EncoderConfig, field_index: int) -> bytes:
    # Field-specific subkey so the same string encodes differently per field.
    return hmac.new(cfg.key, b"hhlink-field-%d" % field_index, hashlib.sha256).digest()


def _gram_positions(gram: str, fkey: bytes, m: int, k: int) -> list[int]:
    digest = hmac.new(fkey, gram.encode("utf-8"), hashlib.sha256).digest()
    h1 = int.from_bytes(digest[:8], "big")
    h2 = int.from_bytes(digest[8:16], "big")
    return [(h1 + i * h2) % m for i in range(k)]


def encode_field(s: str, cfg: EncoderConfig, field_index: int) -> bytes:
    """Encode one normalized field string into an m-bit vector.

    Every bigram sets k positions via double hashing keyed on
    (cfg.key, field_index).  Raises EmptyFieldError for an empty string;
    callers record an all-zero vector and flag the profile instead.
    """
    if not s:
        raise EmptyFieldError(f"field {field_index} is empty after normalization")
    fkey = _field_key(cfg, field_index)
    buf = bytearray(cfg.m // 8)
    for gram in qgrams(s):
        for pos in _gram_positions(gram, fkey, cfg.m, cfg.k):
            buf[pos >> 3] |= 1 << (7 - (pos & 7))
    return bytes(buf)


def encode_profile(profile: PlainProfile, cfg: EncoderConfig) -> EncodedProfile:
    """Encode all five fields of a profile in the fixed field order.

    Empty fields do not fail the profile; they yield all-zero vectors,
    visible through EncodedProfile.empty_fields().
    """
    vectors = []
    for idx, s in enumerate(field_strings(profile)):
        try:
            vectors.append(encode_field(s, cfg, idx))
        except EmptyFieldError:
            vectors.append(bytes(cfg.m // 8))
    return EncodedProfile(profile.profile_id, cfg.m, tuple(vectors))


def popcount(vector: bytes) -> int:
    """Number of set bits in a vector."""
    return int.from_bytes(vector, "big").bit_count()
