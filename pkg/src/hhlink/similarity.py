"""Dice coefficients over encoded bit vectors and Levenshtein edit distance.

The pairwise feature set is five per-field Dice values plus one pooled
coefficient over all fields: 2 * sum(common set bits) / sum(set-bit counts).
The pooled value is not the mean of the per-field values; numerators and
denominators are pooled before dividing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .encoder import NUM_FIELDS, EncodedProfile, popcount
from .errors import BothEmptyError, LengthMismatchError, VectorSizeMismatchError


@dataclass(frozen=True)
class FeatureVector:
    """Per-field Dice values (field order first/last/day/month/year) plus pooled value.

    both_empty marks fields where neither profile had any set bits; their
    Dice is reported as 0.0 (missing data is not evidence of identity).
    """

    d: tuple[float, float, float, float, float]
    d_all: float
    both_empty: tuple[bool, bool, bool, bool, bool] = (False,) * 5

    def as_row(self) -> tuple[float, ...]:
        return (*self.d, self.d_all)


def common_ones(a: bytes, b: bytes) -> int:
    """Count of bit positions set in both vectors."""
    if len(a) != len(b):
        raise LengthMismatchError(f"vector lengths differ: {len(a) * 8} vs {len(b) * 8} bits")
    return (int.from_bytes(a, "big") & int.from_bytes(b, "big")).bit_count()


def dice(a: bytes, b: bytes) -> float:
    """Dice coefficient 2|a AND b| / (|a| + |b|) over set bits.

    Raises BothEmptyError when neither vector has a set bit; callers
    substitute 0.0 and flag the field.
    """
    denom = popcount(a) + popcount(b)
    if denom == 0:
        if len(a) != len(b):
            raise LengthMismatchError(f"vector lengths differ: {len(a) * 8} vs {len(b) * 8} bits")
        raise BothEmptyError("both vectors are all-zero")
    return 2.0 * common_ones(a, b) / denom


def dice_all(p0: EncodedProfile, p1: EncodedProfile) -> float:
    """Pooled Dice over all five fields of two encoded profiles."""
    if p0.m != p1.m:
        raise VectorSizeMismatchError(f"mixed vector sizes: {p0.m} vs {p1.m}")
    num = 0
    den = 0
    for f0, f1 in zip(p0.fields, p1.fields):
        num += common_ones(f0, f1)
        den += popcount(f0) + popcount(f1)
    if den == 0:
        raise BothEmptyError("all fields of both profiles are empty")
    return 2.0 * num / den


def features(p0: EncodedProfile, p1: EncodedProfile) -> FeatureVector:
    """Full feature vector for a profile pair; symmetric in its arguments."""
    if p0.m != p1.m:
        raise VectorSizeMismatchError(f"mixed vector sizes: {p0.m} vs {p1.m}")
    per_field = []
    flags = []
    num = 0
    den = 0
    for f0, f1 in zip(p0.fields, p1.fields):
        c = common_ones(f0, f1)
        w = popcount(f0) + popcount(f1)
        num += c
        den += w
        if w == 0:
            per_field.append(0.0)
            flags.append(True)
        else:
            per_field.append(2.0 * c / w)
            flags.append(False)
    if den == 0:
        raise BothEmptyError("all fields of both profiles are empty")
    assert len(per_field) == NUM_FIELDS
    return FeatureVector(tuple(per_field), 2.0 * num / den, tuple(flags))


def edit_distance(s: str, t: str) -> int:
    """Levenshtein distance with unit insert/delete/substitute costs."""
    if s == t:
        return 0
    if not s:
        return len(t)
    if not t:
        return len(s)
    # Two-row dynamic program; prev[j] = distance(s[:i-1], t[:j]).
    prev = list(range(len(t) + 1))
    for i, cs in enumerate(s, start=1):
        cur = [i] + [0] * len(t)
        for j, ct in enumerate(t, start=1):
            cur[j] = min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (cs != ct),
            )
        prev = cur
    return prev[-1]
