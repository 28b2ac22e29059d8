"""On-disk index format, access tracing, and seek statistics.

All integers are little-endian and unsigned.  The file is a header followed
by the table levels (coarsest first, each level column-major) and finally
the transformed text, so a query that works coarse-to-fine can consume the
file in offset order:

    FILE   := HEADER LEVEL{1} ... LEVEL{L} B
    HEADER := magic "SQFM" | version u32 | n u64 | sigma u16 | r u32 | L u16
              alphabet: sigma bytes, ascending
              C: sigma * u64
              primary_row: u64
              per level 1..L: spacing u64 | sample_count u64 | offset u64
              b_offset: u64
    LEVEL  := one COLUMN per alphabet symbol, in alphabet order
    COLUMN := sample_count * u64   rank values, ascending sample position
    B      := n bytes              last column of the rotation sort

Offsets stored in the header are absolute.  Serialization is a pure
function of its inputs; equal inputs produce identical bytes.

Reads go through :meth:`IndexFile.traced_read`, which pins each access to
one declared region (a table column, or B) and appends it to an
:class:`AccessTrace`; :func:`trace_stats` then counts backward seeks, the
quantity the sequential search mode is designed to eliminate.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field

import numpy as np

from .bwt import BwtResult
from .rank_tables import (
    ENTRY_BYTES,
    LevelSchedule,
    SampleTable,
    sample_count,
    sample_positions,
)
from .text import Alphabet

MAGIC = b"SQFM"
VERSION = 1
_FIXED_HEAD = struct.Struct("<4sIQHIH")


class IndexFormatError(Exception):
    """Malformed index file; ``field`` names what failed to parse."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass
class Region:
    """One contiguous, named byte range of the file."""

    tag: str
    start: int
    end: int  # exclusive
    kind: str  # "header" | "table" | "B"
    level: int = 0  # table regions only
    col: int = 0  # table regions only

    @property
    def size(self) -> int:
        return self.end - self.start


@dataclass
class LevelInfo:
    spacing: int
    count: int
    offset: int


@dataclass
class AccessTrace:
    """Chronological record of every index read one query performed."""

    mode: str
    records: list[tuple[str, int, int]] = field(default_factory=list)

    def record(self, tag: str, offset: int, length: int) -> None:
        self.records.append((tag, offset, length))


@dataclass
class TraceStats:
    total_bytes: int
    read_count: int
    backward_seeks: int
    forward_skips: int
    max_backward_distance: int


def trace_stats(trace: AccessTrace) -> TraceStats:
    """Summarize a trace.

    A read is a backward seek when it starts before the previous read's
    end, and a forward skip when it starts past it; contiguous reads are
    neither.
    """
    total = 0
    backward = 0
    skips = 0
    max_back = 0
    prev_end = None
    for _, offset, length in trace.records:
        total += length
        if prev_end is not None:
            if offset < prev_end:
                backward += 1
                max_back = max(max_back, prev_end - offset)
            elif offset > prev_end:
                skips += 1
        prev_end = offset + length
    return TraceStats(
        total_bytes=total,
        read_count=len(trace.records),
        backward_seeks=backward,
        forward_skips=skips,
        max_backward_distance=max_back,
    )


def header_size(sigma: int, depth: int) -> int:
    return _FIXED_HEAD.size + sigma + 8 * sigma + 8 + 24 * depth + 8


def serialize_index(
    result: BwtResult,
    tables: list[SampleTable],
    schedule: LevelSchedule,
    alphabet: Alphabet,
) -> bytes:
    """Encode the index; see the module docstring for the layout."""
    b = result.bwt
    n = len(b)
    if n == 0:
        raise ValueError("empty text")
    if not tables:
        raise ValueError("at least one table level is required")
    if schedule.spacings != [t.spacing for t in tables]:
        raise ValueError("schedule spacings do not match the tables")
    sigma = alphabet.size
    depth = len(tables)
    for prev, cur in zip(tables, tables[1:]):
        if cur.spacing >= prev.spacing:
            raise ValueError("level spacings must be strictly decreasing")
    offset = header_size(sigma, depth)
    infos = []
    for t in tables:
        count = sample_count(n, t.spacing)
        if t.positions != sample_positions(n, t.spacing):
            raise ValueError(f"level {t.level} positions do not match its spacing")
        infos.append(LevelInfo(spacing=t.spacing, count=count, offset=offset))
        offset += sigma * count * ENTRY_BYTES
    b_offset = offset

    out = bytearray()
    out += _FIXED_HEAD.pack(MAGIC, VERSION, n, sigma, schedule.ratio, depth)
    out += alphabet.symbols
    out += struct.pack(f"<{sigma}Q", *result.c_array)
    out += struct.pack("<Q", result.primary_row)
    for info in infos:
        out += struct.pack("<QQQ", info.spacing, info.count, info.offset)
    out += struct.pack("<Q", b_offset)
    for t in tables:
        for sym in alphabet.symbols:
            col = np.asarray(t.values[sym], dtype="<u8")
            if col.shape[0] != sample_count(n, t.spacing):
                raise ValueError(f"level {t.level} column length mismatch")
            out += col.tobytes()
    out += b
    return bytes(out)


def write_index(path: str, data: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as e:
        raise OSError(f"cannot write index to {path}: {e}") from e


class IndexFile:
    """An opened index: parsed header, resident level 1, region map.

    Opening reads only the header and level 1.  Everything else is read on
    demand through :meth:`traced_read`, which confines each access to one
    declared region and records it.  Instances are immutable after open
    and safe to share across queries; each query owns a private trace.
    """

    def __init__(self, backend, size: int):
        self._fh = backend
        self._size = size
        self._parse()

    # -- construction ---------------------------------------------------

    @classmethod
    def from_bytes(cls, data: bytes) -> "IndexFile":
        return cls(io.BytesIO(data), len(data))

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "IndexFile":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _read_raw(self, offset: int, length: int) -> bytes:
        self._fh.seek(offset)
        data = self._fh.read(length)
        if len(data) != length:
            raise IndexFormatError(
                f"short read at offset {offset}: wanted {length} bytes, got {len(data)}",
                field="file",
            )
        return data

    def _read_seq(self, length: int) -> bytes:
        data = self._fh.read(length)
        if len(data) != length:
            raise IndexFormatError(
                f"truncated file: region header wanted {length} bytes, got {len(data)}",
                field="header",
            )
        return data

    def _parse(self) -> None:
        head = self._read_seq(_FIXED_HEAD.size)
        magic, version, n, sigma, ratio, depth = _FIXED_HEAD.unpack(head)
        if magic != MAGIC:
            raise IndexFormatError("bad magic", field="magic")
        if version != VERSION:
            raise IndexFormatError(f"bad version {version}", field="version")
        if n < 1:
            raise IndexFormatError("n must be positive", field="n")
        if sigma < 1:
            raise IndexFormatError("sigma must be positive", field="sigma")
        if depth < 1:
            raise IndexFormatError("level count must be positive", field="levels")
        rest = self._read_seq(header_size(sigma, depth) - _FIXED_HEAD.size)
        at = 0
        symbols = rest[at : at + sigma]
        at += sigma
        try:
            alphabet = Alphabet(symbols)
        except ValueError as e:
            raise IndexFormatError(str(e), field="alphabet") from e
        c_array = list(struct.unpack_from(f"<{sigma}Q", rest, at))
        at += 8 * sigma
        if c_array[0] != 0 or any(a > b for a, b in zip(c_array, c_array[1:])):
            raise IndexFormatError("invalid C array", field="c_array")
        (primary_row,) = struct.unpack_from("<Q", rest, at)
        at += 8
        if not 1 <= primary_row <= n:
            raise IndexFormatError("invalid primary row", field="primary_row")
        levels = []
        for _ in range(depth):
            spacing, count, offset = struct.unpack_from("<QQQ", rest, at)
            at += 24
            levels.append(LevelInfo(spacing=spacing, count=count, offset=offset))
        (b_offset,) = struct.unpack_from("<Q", rest, at)

        for i, info in enumerate(levels, start=1):
            # spacing may exceed n: such a level holds the single sample at n
            if info.spacing < 1:
                raise IndexFormatError(f"invalid spacing at level {i}", field=f"level{i}")
            if info.count != sample_count(n, info.spacing):
                raise IndexFormatError(f"invalid sample count at level {i}", field=f"level{i}")
        for a, b in zip(levels, levels[1:]):
            if b.spacing >= a.spacing:
                raise IndexFormatError("level spacings must decrease", field="levels")

        regions = [Region("header", 0, header_size(sigma, depth), kind="header")]
        for i, info in enumerate(levels, start=1):
            col_bytes = info.count * ENTRY_BYTES
            for r in range(sigma):
                start = info.offset + r * col_bytes
                regions.append(
                    Region(f"level{i}/col{r}", start, start + col_bytes, "table", i, r)
                )
        regions.append(Region("B", b_offset, b_offset + n, kind="B"))
        for prev, cur in zip(regions, regions[1:]):
            if cur.start != prev.end:
                raise IndexFormatError(
                    f"region {cur.tag} starts at {cur.start}, expected {prev.end}",
                    field=cur.tag,
                )
        for region in regions:
            if region.end > self._size:
                raise IndexFormatError(
                    f"truncated file: region {region.tag} ends at {region.end} "
                    f"but the file has {self._size} bytes",
                    field=region.tag,
                )
        if regions[-1].end != self._size:
            raise IndexFormatError("trailing data after B region", field="B")

        self.n = n
        self.sigma = sigma
        self.ratio = ratio
        self.depth = depth
        self.alphabet = alphabet
        self.c_array = c_array
        self.primary_row = primary_row
        self.levels = levels
        self.b_offset = b_offset
        self.regions = regions
        self._by_tag = {r.tag: r for r in regions}
        # dense per-byte lookups keep the query hot path off Alphabet.rank_of
        self.rank_by_symbol = [-1] * 256
        self.c_by_symbol = [0] * 256
        for r, sym in enumerate(symbols):
            self.rank_by_symbol[sym] = r
            self.c_by_symbol[sym] = c_array[r]
        self.resident = self._load_level(1)

    def _load_level(self, level: int) -> dict[tuple[int, int], int]:
        info = self.levels[level - 1]
        positions = sample_positions(self.n, info.spacing)
        entries = {}
        for r, sym in enumerate(self.alphabet.symbols):
            start = info.offset + r * info.count * ENTRY_BYTES
            raw = self._read_raw(start, info.count * ENTRY_BYTES)
            vals = struct.unpack(f"<{info.count}Q", raw)
            for pos, val in zip(positions, vals):
                entries[(sym, pos)] = val
        return entries

    # -- reading --------------------------------------------------------

    @property
    def spacings(self) -> list[int]:
        return [info.spacing for info in self.levels]

    @property
    def finest_spacing(self) -> int:
        return self.levels[-1].spacing

    def region(self, tag: str) -> Region:
        try:
            return self._by_tag[tag]
        except KeyError:
            raise ValueError(f"unknown region {tag!r}") from None

    def traced_read(self, trace: AccessTrace, tag: str, offset: int, length: int) -> bytes:
        """Read bytes confined to one region, recording the access."""
        region = self._by_tag.get(tag)
        if region is None:
            raise ValueError(f"unknown region {tag!r}")
        if offset < region.start or offset + length > region.end:
            raise ValueError(
                f"read [{offset}, {offset + length}) outside region {tag} "
                f"[{region.start}, {region.end})"
            )
        data = self._read_raw(offset, length)
        trace.record(tag, offset, length)
        return data

    def column_tag(self, level: int, symbol: int) -> str:
        return f"level{level}/col{self.rank_by_symbol[symbol]}"

    def entry_offset(self, level: int, symbol: int, t: int) -> int:
        """Absolute offset of sample index ``t`` in one level's symbol column."""
        info = self.levels[level - 1]
        r = self.rank_by_symbol[symbol]
        if r < 0:
            raise ValueError(f"symbol {symbol} not in alphabet")
        return info.offset + (r * info.count + t) * ENTRY_BYTES

    def read_level_entries(
        self, trace: AccessTrace, level: int, symbol: int, t0: int, t1: int
    ) -> list[int]:
        """Read sample indices t0..t1 inclusive from one symbol column."""
        k = t1 - t0 + 1
        raw = self.traced_read(
            trace,
            self.column_tag(level, symbol),
            self.entry_offset(level, symbol, t0),
            k * ENTRY_BYTES,
        )
        return list(struct.unpack(f"<{k}Q", raw))

    def read_b(self, trace: AccessTrace, lo: int, hi: int) -> bytes:
        """Read B[lo..hi], 1-based inclusive."""
        if not 1 <= lo <= hi <= self.n:
            raise ValueError(f"B range [{lo}, {hi}] out of bounds 1..{self.n}")
        return self.traced_read(trace, "B", self.b_offset + lo - 1, hi - lo + 1)

    def rank_at_n(self, symbol: int) -> int:
        return self.resident[(symbol, self.n)]

    # -- whole-region decoding (stats, tests, re-serialization) ---------

    def read_all_tables(self) -> list[SampleTable]:
        tables = []
        for i, info in enumerate(self.levels, start=1):
            positions = sample_positions(self.n, info.spacing)
            values = {}
            for r, sym in enumerate(self.alphabet.symbols):
                start = info.offset + r * info.count * ENTRY_BYTES
                raw = self._read_raw(start, info.count * ENTRY_BYTES)
                values[sym] = list(struct.unpack(f"<{info.count}Q", raw))
            tables.append(
                SampleTable(level=i, spacing=info.spacing, positions=positions, values=values)
            )
        return tables

    def read_b_full(self) -> bytes:
        return self._read_raw(self.b_offset, self.n)

    def to_bwt_result(self) -> BwtResult:
        return BwtResult(
            bwt=self.read_b_full(), c_array=list(self.c_array), primary_row=self.primary_row
        )

    def schedule(self) -> LevelSchedule:
        # mem_budget is a build-time knob and is not stored in the file
        return LevelSchedule(ratio=self.ratio, spacings=self.spacings, mem_budget=0)

    def table_bytes(self) -> int:
        return sum(self.sigma * info.count * ENTRY_BYTES for info in self.levels)


def open_index(path: str) -> IndexFile:
    try:
        fh = open(path, "rb")
    except OSError as e:
        raise OSError(f"cannot open index {path}: {e}") from e
    try:
        fh.seek(0, io.SEEK_END)
        size = fh.tell()
        fh.seek(0)
        return IndexFile(fh, size)
    except Exception:
        fh.close()
        raise
