"""Text encoding for suffix-array construction.

Suffix algorithms here work on integer alphabets of the form [0, n): every
character of an n-length text is a non-negative integer strictly below n.
Arbitrary byte strings are brought into that shape by rank-encoding: each
distinct byte value is replaced by its rank among the distinct values present.
Rank encoding is strictly monotone on byte values, so it preserves the
lexicographic order of all suffixes.

Positions at or beyond the end of the text read as the sentinel -1, which is
smaller than every real character. That convention is what makes shorter
suffixes compare less than their extensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SENTINEL = -1


@dataclass(frozen=True)
class Text:
    """An integer text over the alphabet [0, n).

    chars is a 1-D int64 array. Validation is eager so downstream code can
    assume the alphabet contract without re-checking.
    """

    chars: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.chars)
        if a.ndim != 1:
            raise ValueError(f"text must be 1-D, got shape {a.shape}")
        if a.dtype != np.int64:
            a = a.astype(np.int64)
        n = a.shape[0]
        if n and (a.min() < 0 or a.max() >= n):
            raise ValueError("characters must lie in [0, n)")
        object.__setattr__(self, "chars", a)

    def __len__(self) -> int:
        return self.chars.shape[0]


def encode_bytes(raw: bytes) -> Text:
    """Rank-encode a byte string into a Text over [0, n).

    The i-th output is the number of distinct byte values in raw that are
    strictly smaller than raw[i]. Distinctness is computed with a single
    256-bin presence pass, so encoding is linear in len(raw).
    """
    data = np.frombuffer(raw, dtype=np.uint8)
    present = np.zeros(256, dtype=np.int64)
    present[data] = 1
    # exclusive prefix sum: rank[b] = number of present values < b
    rank = np.cumsum(present) - present
    return Text(rank[data])


def char_at(text: Text, i: int) -> int:
    """Character at position i, with the out-of-range sentinel.

    i >= len(text) reads as SENTINEL (-1); negative i is an error rather
    than a python-style wraparound, which would silently corrupt suffix
    comparisons.
    """
    if i < 0:
        raise ValueError(f"negative position {i}")
    if i >= len(text):
        return SENTINEL
    return int(text.chars[i])
