"""Backward pattern counting in two modes over the staged index.

Both modes answer the same question, how many rotations of the indexed
text begin with the pattern, and differ only in how they touch the file:

* naive: the textbook recurrence.  Every rank query goes straight to the
  finest level, one anchor entry plus a scan of B, seeking wherever the
  current step happens to land.
* sequential: rank arguments are not known up front, so the query keeps a
  per-step lower bound and uncertainty width for both interval endpoints.
  The resident coarsest level seeds every step; each finer level is then
  planned from the current windows, read in one ascending pass, and used
  to re-derive both chains; a final forward pass over B resolves the
  remaining steps exactly.  File offsets never move backward.

Endpoints travel in rank form.  The match interval after step k is
[q_k + 1, j_k], and both q and j obey x -> C[c] + rank_c(x), so one
estimator serves both chains; ``ChainState.left`` stores q = sp - 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .layout import AccessTrace, IndexFile, TraceStats, trace_stats
from .rank_tables import (
    EstimateWindow,
    SampleNotFetched,
    estimate_lower,
    next_sample,
    position_at,
    prev_sample,
    sample_index,
)


@dataclass
class ChainState:
    """Per-step windows for both interval endpoints of one query.

    ``right[k]`` bounds j_k (the right endpoint after step k) and
    ``left[k]`` bounds q_k = sp_k - 1; index 0 holds the fixed starting
    values (n, 0) and (0, 0).  A window of width 0 is exact.
    """

    pattern: bytes
    symbols: list[int]
    right: list[EstimateWindow]
    left: list[EstimateWindow]

    @property
    def steps(self) -> int:
        return len(self.symbols)

    def step_symbol(self, k: int) -> int:
        # step k consumes the pattern right to left
        return self.symbols[len(self.symbols) - k]

    def all_exact(self) -> bool:
        return all(w.width == 0 for w in self.right) and all(
            w.width == 0 for w in self.left
        )


@dataclass
class BlockRequest:
    """One contiguous run of sample indices to read from a symbol column."""

    level: int
    symbol: int
    first: int  # sample index, inclusive
    last: int
    origins: list[tuple[str, int]]  # (chain, step) pairs this block serves


@dataclass
class SearchOutcome:
    sp: int
    ep: int
    count: int
    mode: str
    trace: AccessTrace
    stats: TraceStats


def _pattern_bytes(pattern) -> bytes:
    if isinstance(pattern, str):
        return pattern.encode("latin-1")
    return bytes(pattern)


def _finish(sp: int, ep: int, trace: AccessTrace) -> SearchOutcome:
    return SearchOutcome(
        sp=sp,
        ep=ep,
        count=max(0, ep - sp + 1),
        mode=trace.mode,
        trace=trace,
        stats=trace_stats(trace),
    )


def _derive_chain(
    index: IndexFile,
    entries,
    spacing: int,
    symbols: list[int],
    start: int,
    prev: list[EstimateWindow] | None,
) -> list[EstimateWindow]:
    """Walk one chain at one level, re-estimating every non-exact step.

    Step 1 is exact for free: its argument is either n, whose rank is in
    the resident level, or 0, whose rank is zero.  Later steps estimate
    rank over the predecessor's window; exact steps are carried over, so
    a width-0 prefix never degrades.
    """
    n = index.n
    m = len(symbols)
    out = [EstimateWindow(start, 0)]
    c1 = symbols[m - 1]
    base = index.rank_at_n(c1) if start == n else 0
    out.append(EstimateWindow(index.c_by_symbol[c1] + base, 0))
    for k in range(2, m + 1):
        if prev is not None and prev[k].width == 0:
            out.append(prev[k])
            continue
        c = symbols[m - k]
        est = estimate_lower(entries, spacing, n, c, out[k - 1])
        lower = min(index.c_by_symbol[c] + est.lower, n)  # clamp to [0, n]
        out.append(EstimateWindow(lower, est.width))
    return out


def seed_chains(index: IndexFile, pattern) -> ChainState:
    """Initial windows for both chains from the resident level alone."""
    pattern = _pattern_bytes(pattern)
    symbols = list(pattern)
    s1 = index.levels[0].spacing
    return ChainState(
        pattern=pattern,
        symbols=symbols,
        right=_derive_chain(index, index.resident, s1, symbols, index.n, None),
        left=_derive_chain(index, index.resident, s1, symbols, 0, None),
    )


def plan_blocks(index: IndexFile, chains: ChainState, level: int) -> list[BlockRequest]:
    """Sample blocks level ``level`` must supply, merged and disk-ordered.

    For each non-exact step k+1 the rank argument is step k's window; the
    block spans prev_sample of its lower bound (the extra leading sample
    keeps the exact phase from ever re-entering the table region) through
    next_sample of lower + previous spacing, the widest the window can be.
    """
    n = index.n
    spacing = index.levels[level - 1].spacing
    reach = index.levels[level - 2].spacing
    per_symbol: dict[int, list[tuple[int, int, tuple[str, int]]]] = {}
    for name, windows in (("right", chains.right), ("left", chains.left)):
        for k in range(1, chains.steps):
            if windows[k + 1].width == 0:
                continue
            arg = windows[k]
            lo = arg.lower
            hi = min(lo + (reach if arg.width else 0), n)
            if hi == 0:
                continue  # argument pinned to rank 0, nothing to read
            c = chains.symbols[chains.steps - (k + 1)]
            # multiple-floor, not prev_sample: when lo is n itself, the tail
            # sample satisfies prev_sample yet a re-derived argument one
            # spacing lower still needs the last on-grid sample before it
            p_lo = lo // spacing * spacing
            t0 = sample_index(n, spacing, p_lo) if p_lo else 0
            t1 = sample_index(n, spacing, next_sample(n, spacing, hi))
            per_symbol.setdefault(c, []).append((t0, t1, (name, k + 1)))

    blocks: list[BlockRequest] = []
    for c, wants in per_symbol.items():
        wants.sort(key=lambda item: item[:2])
        current: BlockRequest | None = None
        for t0, t1, origin in wants:
            if current is not None and t0 <= current.last + 1:
                current.last = max(current.last, t1)
                current.origins.append(origin)
            else:
                if current is not None:
                    blocks.append(current)
                current = BlockRequest(level, c, t0, t1, [origin])
        blocks.append(current)
    blocks.sort(key=lambda blk: (index.rank_by_symbol[blk.symbol], blk.first))
    return blocks


def fetch_blocks(
    index: IndexFile, trace: AccessTrace, blocks: list[BlockRequest]
) -> dict[tuple[int, int], int]:
    """Read planned blocks in disk order into a (symbol, position) map."""
    entries: dict[tuple[int, int], int] = {}
    for blk in blocks:
        spacing = index.levels[blk.level - 1].spacing
        vals = index.read_level_entries(trace, blk.level, blk.symbol, blk.first, blk.last)
        for t, val in enumerate(vals, start=blk.first):
            entries[(blk.symbol, position_at(index.n, spacing, t))] = val
    return entries


def resolve_level(
    index: IndexFile, chains: ChainState, level: int, entries
) -> ChainState:
    """Re-derive both chains against one level's buffered entries."""
    spacing = index.levels[level - 1].spacing
    return replace(
        chains,
        right=_derive_chain(index, entries, spacing, chains.symbols, index.n, chains.right),
        left=_derive_chain(index, entries, spacing, chains.symbols, 0, chains.left),
    )


def plan_b_ranges(index: IndexFile, chains: ChainState) -> list[tuple[int, int]]:
    """B byte ranges (1-based, inclusive) the exact phase will need."""
    n = index.n
    s_fin = index.finest_spacing
    spans = []
    for windows in (chains.right, chains.left):
        for k in range(1, chains.steps):
            if windows[k + 1].width == 0:
                continue
            j = windows[k].lower
            lo = prev_sample(n, s_fin, j) + 1
            hi = min(j + s_fin, n)
            if lo <= hi:
                spans.append((lo, hi))
    spans.sort()
    merged: list[list[int]] = []
    for lo, hi in spans:
        if merged and lo <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def _count_in(buffers, symbol: int, lo: int, hi: int) -> int:
    # 1-based inclusive; planning guarantees the span sits in one buffer
    if lo > hi:
        return 0
    for b_lo, b_hi, data in buffers:
        if b_lo <= lo and hi <= b_hi:
            return data[lo - b_lo : hi - b_lo + 1].count(symbol)
    raise SampleNotFetched(f"B bytes {lo}..{hi} not buffered")


def _resolve_exact(index, windows, symbols, entries, buffers) -> list[EstimateWindow]:
    n = index.n
    s_fin = index.finest_spacing
    m = len(symbols)
    out = [windows[0], windows[1]]
    for k in range(2, m + 1):
        if windows[k].width == 0:
            out.append(windows[k])
            continue
        q = out[k - 1].lower  # exact by induction over steps
        c = symbols[m - k]
        if q == 0:
            rank = 0
        else:
            anchor_pos = prev_sample(n, s_fin, q)
            if anchor_pos == 0:
                anchor = 0
            else:
                try:
                    anchor = entries[(c, anchor_pos)]
                except KeyError:
                    raise SampleNotFetched(
                        f"sample not fetched: symbol {c} at position {anchor_pos}"
                    ) from None
            rank = anchor + _count_in(buffers, c, anchor_pos + 1, q)
        out.append(EstimateWindow(index.c_by_symbol[c] + rank, 0))
    return out


def exact_phase(
    index: IndexFile, trace: AccessTrace, chains: ChainState, level_entries
) -> ChainState:
    """Read the planned B ranges forward once and settle every step.

    ``level_entries`` are the finest level's buffered samples (the
    resident level when there is only one); they provide the anchor value
    at prev_sample of each resolved argument, and the buffered B bytes
    provide the remainder of the scan.
    """
    buffers = [
        (lo, hi, index.read_b(trace, lo, hi)) for lo, hi in plan_b_ranges(index, chains)
    ]
    return replace(
        chains,
        right=_resolve_exact(index, chains.right, chains.symbols, level_entries, buffers),
        left=_resolve_exact(index, chains.left, chains.symbols, level_entries, buffers),
    )


def sequential_count(index: IndexFile, pattern, observer=None) -> SearchOutcome:
    """Count occurrences reading the index strictly in on-disk order.

    ``observer``, if given, is called as observer(stage, chains) after the
    seed pass ("seed"), each refinement pass ("level2".."levelL"), and the
    exact phase ("final").
    """
    trace = AccessTrace(mode="sequential")
    pattern = _pattern_bytes(pattern)
    n = index.n
    if len(pattern) == 0:
        return _finish(1, n, trace)
    if len(pattern) > n:
        raise ValueError("pattern longer than text")
    if any(index.rank_by_symbol[c] < 0 for c in pattern):
        return _finish(1, 0, trace)

    chains = seed_chains(index, pattern)
    if observer is not None:
        observer("seed", chains)
    entries = index.resident
    for level in range(2, index.depth + 1):
        blocks = plan_blocks(index, chains, level)
        entries = fetch_blocks(index, trace, blocks)
        chains = resolve_level(index, chains, level, entries)
        if observer is not None:
            observer(f"level{level}", chains)
    chains = exact_phase(index, trace, chains, entries)
    if observer is not None:
        observer("final", chains)
    m = chains.steps
    return _finish(chains.left[m].lower + 1, chains.right[m].lower, trace)


def _naive_rank(index: IndexFile, trace: AccessTrace, symbol: int, i: int) -> int:
    """rank_symbol(i) by anchor entry plus B scan, wherever that lands."""
    if i == 0:
        return 0
    n = index.n
    s_fin = index.finest_spacing
    anchor_pos = prev_sample(n, s_fin, i)
    rank = 0
    if anchor_pos:
        t = sample_index(n, s_fin, anchor_pos)
        rank = index.read_level_entries(trace, index.depth, symbol, t, t)[0]
    if anchor_pos < i:
        rank += index.read_b(trace, anchor_pos + 1, i).count(symbol)
    return rank


def _naive_walk(index: IndexFile, trace: AccessTrace, symbols: list[int]):
    n = index.n
    m = len(symbols)
    j, q = n, 0
    rights, lefts = [j], [q]
    for k in range(1, m + 1):
        c = symbols[m - k]
        j = index.c_by_symbol[c] + _naive_rank(index, trace, c, j)
        q = index.c_by_symbol[c] + _naive_rank(index, trace, c, q)
        rights.append(j)
        lefts.append(q)
    return rights, lefts


def backward_search_naive(index: IndexFile, pattern) -> SearchOutcome:
    """The classic recurrence with random-access rank queries."""
    trace = AccessTrace(mode="naive")
    pattern = _pattern_bytes(pattern)
    n = index.n
    if len(pattern) == 0:
        return _finish(1, n, trace)
    if len(pattern) > n:
        raise ValueError("pattern longer than text")
    if any(index.rank_by_symbol[c] < 0 for c in pattern):
        return _finish(1, 0, trace)
    rights, lefts = _naive_walk(index, trace, list(pattern))
    return _finish(lefts[-1] + 1, rights[-1], trace)


def naive_chains(index: IndexFile, pattern) -> tuple[list[int], list[int]]:
    """Exact per-step chain values (right j_k, and left q_k = sp_k - 1).

    Index 0 holds the starting values n and 0.  Useful as an oracle for
    the estimated windows.
    """
    pattern = _pattern_bytes(pattern)
    if not 1 <= len(pattern) <= index.n:
        raise ValueError("pattern length out of range")
    if any(index.rank_by_symbol[c] < 0 for c in pattern):
        raise ValueError("pattern contains a symbol not in the alphabet")
    return _naive_walk(index, AccessTrace(mode="naive"), list(pattern))
