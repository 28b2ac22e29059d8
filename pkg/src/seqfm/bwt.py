"""Cyclic Burrows-Wheeler transform over sorted rotations.

No sentinel is appended: all n rotations of the text are sorted and the
transform is the column of their last characters.  Equal rotations of a
periodic text are ordered by start offset, and ``primary_row`` records the
(smallest) 1-based rank of the unrotated text so the transform stays
invertible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .text import Alphabet, build_alphabet


@dataclass
class BwtResult:
    """Transform output: last column, C array, and the row of the text itself.

    ``c_array[k]`` counts the characters of ``bwt`` that sort strictly below
    the k-th alphabet symbol.  Treat instances as immutable once built.
    """

    bwt: bytes
    c_array: list[int]
    primary_row: int


def rotation_order(data: bytes) -> list[int]:
    """Start offsets of the cyclic rotations in lexicographic order.

    Prefix doubling over cyclic ranks; equal rotations tie-break by start
    offset, so the result is deterministic for periodic inputs.
    """
    n = len(data)
    if n == 0:
        raise ValueError("empty text")
    if n == 1:
        return [0]
    arr = np.frombuffer(data, dtype=np.uint8)
    _, rank = np.unique(arr, return_inverse=True)
    rank = rank.astype(np.int64)
    idx = np.arange(n, dtype=np.int64)
    shift = 1
    while True:
        second = rank[(idx + shift) % n]
        order = np.lexsort((idx, second, rank))
        r1 = rank[order]
        r2 = second[order]
        change = np.empty(n, dtype=bool)
        change[0] = True
        change[1:] = (r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1])
        new_rank = np.empty(n, dtype=np.int64)
        new_rank[order] = np.cumsum(change) - 1
        rank = new_rank
        if rank[order[-1]] == n - 1:
            break
        shift *= 2
        if shift >= n:
            # Remaining ties survived a full cycle of comparisons, so those
            # rotations are identical; the index key already ordered them.
            break
    return order.tolist()


def build_bwt(text: bytes) -> BwtResult:
    """Transform ``text``; the alphabet is taken from the text itself."""
    if len(text) == 0:
        raise ValueError("empty text")
    n = len(text)
    order = np.asarray(rotation_order(text), dtype=np.int64)
    arr = np.frombuffer(text, dtype=np.uint8)
    last = arr[(order - 1) % n]
    b = last.tobytes()
    alphabet = build_alphabet(text)
    primary = int(np.nonzero(order == 0)[0][0]) + 1
    return BwtResult(bwt=b, c_array=compute_c_array(b, alphabet), primary_row=primary)


def compute_c_array(b: bytes, alphabet: Alphabet) -> list[int]:
    """Per alphabet symbol, the count of characters of ``b`` sorting below it."""
    counts = [b.count(sym) for sym in alphabet.symbols]
    if sum(counts) != len(b):
        raise ValueError("byte outside alphabet")
    c = []
    acc = 0
    for k in counts:
        c.append(acc)
        acc += k
    return c


def invert_bwt(result: BwtResult, alphabet: Alphabet) -> bytes:
    """Recover the original text by walking the last-to-first mapping."""
    b = result.bwt
    n = len(b)
    if not 1 <= result.primary_row <= n:
        raise ValueError("invalid primary row")
    c_of = [0] * 256
    for r, sym in enumerate(alphabet.symbols):
        c_of[sym] = result.c_array[r]
    occ = [0] * 256
    lf = [0] * n
    for i in range(n):
        ch = b[i]
        occ[ch] += 1
        lf[i] = c_of[ch] + occ[ch]
    out = bytearray()
    row = result.primary_row
    for _ in range(n):
        out.append(b[row - 1])
        row = lf[row - 1]
    out.reverse()
    return bytes(out)
