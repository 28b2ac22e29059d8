"""Input text model: alphabet extraction and brute-force reference queries.

Positions in rank arithmetic are 1-based throughout the package; byte
storage is 0-based.  ``naive_rank`` and ``cyclic_count`` are deliberately
simple scans so the rest of the package can be checked against them.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Alphabet:
    """The distinct byte values of a text, ascending."""

    symbols: bytes

    def __post_init__(self):
        if len(self.symbols) == 0:
            raise ValueError("empty alphabet")
        for a, b in zip(self.symbols, self.symbols[1:]):
            if b <= a:
                raise ValueError("alphabet symbols must be strictly ascending")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def rank_of(self, symbol: int) -> int:
        """0-based index of ``symbol`` within the alphabet."""
        i = self.symbols.find(bytes([symbol]))
        if i < 0:
            raise ValueError(f"symbol {symbol} not in alphabet")
        return i

    def __contains__(self, symbol: int) -> bool:
        return self.symbols.find(bytes([symbol])) >= 0


def build_alphabet(data: bytes) -> Alphabet:
    """Collect the distinct bytes of ``data`` in ascending order."""
    if len(data) == 0:
        raise ValueError("empty text")
    return Alphabet(bytes(sorted(set(data))))


def naive_rank(s: bytes, symbol: int, i: int) -> int:
    """Occurrences of ``symbol`` in the 1-based prefix s[1..i], by direct scan."""
    if not 0 <= i <= len(s):
        raise ValueError(f"rank position {i} out of range 0..{len(s)}")
    return s.count(symbol, 0, i)


def cyclic_count(text: bytes, pattern: bytes) -> int:
    """Occurrences of ``pattern`` in ``text`` read cyclically.

    Every start position 1..n counts; a match may wrap past the end of the
    text.  The empty pattern matches at every position by convention.
    """
    n = len(text)
    if n == 0:
        raise ValueError("empty text")
    m = len(pattern)
    if m == 0:
        return n
    if m > n:
        raise ValueError("pattern longer than text")
    doubled = text + text[: m - 1]
    return sum(1 for i in range(n) if doubled[i : i + m] == pattern)
