"""Hierarchy of sampled rank tables and the lower-bound rank estimator.

Each level stores, for every alphabet symbol, the rank at every positive
multiple of that level's spacing, plus at position n when n is not a
multiple.  Spacings shrink geometrically by the schedule ratio, so a rank
known to within one level's spacing can be re-estimated to within the next
level's spacing from a handful of nearby samples.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .text import Alphabet

ENTRY_BYTES = 8  # table entries are fixed-width u64 on disk


class SampleNotFetched(LookupError):
    """A rank estimate needed a sample the planner never fetched."""


class EstimateWindow(NamedTuple):
    """A verified lower bound: the true value lies in [lower, lower + width]."""

    lower: int
    width: int

    @property
    def exact(self) -> bool:
        return self.width == 0


@dataclass
class LevelSchedule:
    """Geometric spacing plan: spacings[0] is coarsest, spacings[-1] finest."""

    ratio: int
    spacings: list[int]
    mem_budget: int

    @property
    def depth(self) -> int:
        return len(self.spacings)


def sample_count(n: int, spacing: int) -> int:
    """Number of stored samples: multiples of spacing up to n, plus n itself."""
    return n // spacing + (1 if n % spacing else 0)


def sample_positions(n: int, spacing: int) -> list[int]:
    pos = list(range(spacing, n + 1, spacing))
    if n % spacing:
        pos.append(n)
    return pos


def next_sample(n: int, spacing: int, i: int) -> int:
    """Smallest stored sample position >= i, for 1 <= i <= n."""
    if not 1 <= i <= n:
        raise ValueError(f"position {i} out of range 1..{n}")
    p = -(-i // spacing) * spacing
    return p if p <= n else n


def prev_sample(n: int, spacing: int, i: int) -> int:
    """Largest stored sample position <= i, or 0 if there is none."""
    if not 0 <= i <= n:
        raise ValueError(f"position {i} out of range 0..{n}")
    if i == n:
        return n
    return (i // spacing) * spacing


def sample_index(n: int, spacing: int, p: int) -> int:
    """0-based storage index of stored sample position ``p``."""
    if p == n and n % spacing:
        return n // spacing
    if p < spacing or p > n or p % spacing:
        raise ValueError(f"{p} is not a stored sample position")
    return p // spacing - 1


def position_at(n: int, spacing: int, t: int) -> int:
    """Stored sample position at 0-based storage index ``t``."""
    count = sample_count(n, spacing)
    if not 0 <= t < count:
        raise ValueError(f"sample index {t} out of range 0..{count - 1}")
    p = (t + 1) * spacing
    return p if p <= n else n


def make_schedule(n: int, ratio: int, finest: int, mem_budget: int, sigma: int) -> LevelSchedule:
    """Choose the number of levels so the coarsest level fits ``mem_budget``.

    The finest spacing is fixed; extra levels are added above it, each
    ``ratio`` times coarser, until the top level's table fits the budget.
    If no depth can fit (the budget is below one sample row), a single
    finest-spacing level is used and a warning is issued, since the top
    level is held resident regardless.
    """
    if n < 1:
        raise ValueError("empty text")
    if ratio < 2:
        raise ValueError("rate must be >= 2")
    if finest < 1:
        raise ValueError("finest spacing must be >= 1")
    if finest > n:
        raise ValueError("finest spacing exceeds text length")
    depth = 1
    while True:
        top = finest * ratio ** (depth - 1)
        size = sigma * sample_count(n, top) * ENTRY_BYTES
        if size <= mem_budget:
            break
        if sample_count(n, top) == 1:
            warnings.warn(
                "resident table level exceeds the memory budget; keeping it resident anyway",
                stacklevel=2,
            )
            depth = 1
            break
        depth += 1
    spacings = [finest * ratio ** (depth - 1 - i) for i in range(depth)]
    return LevelSchedule(ratio=ratio, spacings=spacings, mem_budget=mem_budget)


@dataclass
class SampleTable:
    """One level's samples: ``values[symbol]`` aligns with ``positions``."""

    level: int
    spacing: int
    positions: list[int]
    values: dict[int, list[int]]

    @property
    def n(self) -> int:
        return self.positions[-1]

    def rank_at(self, symbol: int, position: int) -> int:
        """Stored rank of ``symbol`` at a sampled ``position``."""
        return self.values[symbol][sample_index(self.n, self.spacing, position)]

    def next_sample(self, i: int) -> int:
        return next_sample(self.n, self.spacing, i)

    def prev_sample(self, i: int) -> int:
        return prev_sample(self.n, self.spacing, i)


def build_tables(b: bytes, alphabet: Alphabet, schedule: LevelSchedule) -> list[SampleTable]:
    """Sample every level's rank values from one cumulative pass per symbol."""
    n = len(b)
    if n == 0:
        raise ValueError("empty text")
    arr = np.frombuffer(b, dtype=np.uint8)
    cums = {sym: np.cumsum(arr == sym, dtype=np.int64) for sym in alphabet.symbols}
    tables = []
    for level, spacing in enumerate(schedule.spacings, start=1):
        pos = sample_positions(n, spacing)
        at = np.asarray(pos, dtype=np.int64) - 1
        values = {sym: cums[sym][at].tolist() for sym in alphabet.symbols}
        tables.append(SampleTable(level=level, spacing=spacing, positions=pos, values=values))
    return tables


def estimate_lower(
    entries: Mapping[tuple[int, int], int],
    spacing: int,
    n: int,
    symbol: int,
    window: EstimateWindow,
) -> EstimateWindow:
    """Lower-bound rank of ``symbol`` over a position window, from samples.

    ``window`` brackets the (unknown) query position; the returned window
    brackets the rank.  Reading the sample just past the window's lower end
    and subtracting the gap can only undershoot, and the undershoot never
    exceeds max(window.width, sample gap), so chained estimates stay within
    one spacing once every step of a chain is re-estimated at this level.

    ``entries`` maps (symbol, sample position) to the stored rank value.
    """
    j = window.lower
    if j == 0:
        # rank at 0 is 0 by definition; exact only if the position is pinned
        return EstimateWindow(0, window.width)
    p = next_sample(n, spacing, j)
    v = entries.get((symbol, p))
    if v is None:
        raise SampleNotFetched(f"sample not fetched: symbol {symbol} at position {p}")
    gap = p - j
    return EstimateWindow(max(0, v - gap), max(window.width, gap))
