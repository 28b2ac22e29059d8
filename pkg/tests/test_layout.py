import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqfm.bwt import build_bwt
from seqfm.layout import (
    AccessTrace,
    IndexFile,
    IndexFormatError,
    header_size,
    serialize_index,
    trace_stats,
    write_index,
)
from seqfm.rank_tables import build_tables, make_schedule
from seqfm.text import build_alphabet, naive_rank

from conftest import GOLDEN_C, GOLDEN_PRIMARY, GOLDEN_T, make_index


def golden_blob() -> bytes:
    alpha = build_alphabet(GOLDEN_T)
    sched = make_schedule(27, 3, 3, 64, 2)
    res = build_bwt(GOLDEN_T)
    return serialize_index(res, build_tables(res.bwt, alpha, sched), sched, alpha)


# --- format oracle: parse the blob with nothing but struct -------------------


def test_header_parses_with_raw_struct():
    blob = golden_blob()
    magic, version, n, sigma, r, depth = struct.unpack_from("<4sIQHIH", blob, 0)
    assert magic == b"SQFM"
    assert version == 1
    assert (n, sigma, r, depth) == (27, 2, 3, 2)
    off = 24
    assert blob[off : off + sigma] == b"01"
    off += sigma
    c = struct.unpack_from(f"<{sigma}Q", blob, off)
    assert list(c) == GOLDEN_C
    off += 8 * sigma
    (primary,) = struct.unpack_from("<Q", blob, off)
    assert primary == GOLDEN_PRIMARY
    off += 8
    dirs = [struct.unpack_from("<3Q", blob, off + 24 * i) for i in range(depth)]
    assert [(s, cnt) for s, cnt, _ in dirs] == [(9, 3), (3, 9)]
    off += 24 * depth
    (b_offset,) = struct.unpack_from("<Q", blob, off)
    off += 8
    assert off == header_size(sigma, depth) == 106
    # column-major level payloads: all of symbol 0's entries, then symbol 1's
    lvl1 = struct.unpack_from("<6Q", blob, dirs[0][2])
    assert list(lvl1) == [2, 7, 10, 7, 11, 17]
    lvl2 = struct.unpack_from("<18Q", blob, dirs[1][2])
    assert list(lvl2[:9]) == [1, 1, 2, 4, 6, 7, 7, 9, 10]
    assert list(lvl2[9:]) == [2, 5, 7, 8, 9, 11, 14, 15, 17]
    assert blob[b_offset : b_offset + n] == build_bwt(GOLDEN_T).bwt
    assert len(blob) == b_offset + n == 325


def test_region_table_golden():
    idx = IndexFile.from_bytes(golden_blob())
    got = [(r.tag, r.start, r.end) for r in idx.regions]
    assert got == [
        ("header", 0, 106),
        ("level1/col0", 106, 130),
        ("level1/col1", 130, 154),
        ("level2/col0", 154, 226),
        ("level2/col1", 226, 298),
        ("B", 298, 325),
    ]
    assert idx.region("B").size == 27
    assert idx.table_bytes() == 2 * (3 + 9) * 8


def test_serialize_is_deterministic():
    assert golden_blob() == golden_blob()


def test_open_reserialize_byte_identical():
    blob = golden_blob()
    idx = IndexFile.from_bytes(blob)
    again = serialize_index(
        idx.to_bwt_result(), idx.read_all_tables(), idx.schedule(), idx.alphabet
    )
    assert again == blob


@settings(max_examples=60)
@given(st.binary(min_size=1, max_size=300), st.integers(2, 4), st.integers(1, 8))
def test_open_reserialize_random(text, rate, finest):
    finest = min(finest, len(text))
    idx = make_index(text, rate, finest, 4096)
    blob = serialize_index(
        idx.to_bwt_result(), idx.read_all_tables(), idx.schedule(), idx.alphabet
    )
    assert IndexFile.from_bytes(blob).regions == idx.regions


def test_parsed_fields_round_trip():
    idx = IndexFile.from_bytes(golden_blob())
    assert idx.n == 27
    assert idx.sigma == 2
    assert idx.alphabet.symbols == b"01"
    assert idx.c_array == GOLDEN_C
    assert idx.primary_row == GOLDEN_PRIMARY
    assert idx.spacings == [9, 3]
    assert idx.finest_spacing == 3
    assert idx.rank_at_n(ord("1")) == 17
    assert idx.read_b_full() == build_bwt(GOLDEN_T).bwt
    # the coarsest level is memory-resident at open time
    assert idx.resident[(ord("1"), 18)] == 11
    assert idx.resident[(ord("0"), 27)] == 10


def test_open_from_file(tmp_path):
    path = tmp_path / "t.sqfm"
    write_index(path, golden_blob())
    from seqfm.layout import open_index

    with open_index(path) as idx:
        assert idx.n == 27


# --- corrupted inputs --------------------------------------------------------


def test_bad_magic_rejected():
    blob = bytearray(golden_blob())
    blob[:4] = b"NOPE"
    with pytest.raises(IndexFormatError, match="bad magic"):
        IndexFile.from_bytes(bytes(blob))


def test_bad_version_rejected():
    blob = bytearray(golden_blob())
    struct.pack_into("<I", blob, 4, 9)
    with pytest.raises(IndexFormatError, match="bad version"):
        IndexFile.from_bytes(bytes(blob))


def test_truncation_at_every_region_boundary():
    blob = golden_blob()
    idx = IndexFile.from_bytes(blob)
    boundaries = sorted({r.start for r in idx.regions} | {r.end for r in idx.regions})
    for cut in boundaries:
        if cut == len(blob):
            continue  # the full file is the one valid prefix
        with pytest.raises(IndexFormatError):
            IndexFile.from_bytes(blob[:cut])


def test_truncation_mid_header_and_mid_region():
    blob = golden_blob()
    for cut in (3, 10, 40, 105, 120, 200, 310):
        with pytest.raises(IndexFormatError):
            IndexFile.from_bytes(blob[:cut])


def test_trailing_garbage_rejected():
    with pytest.raises(IndexFormatError, match="trailing"):
        IndexFile.from_bytes(golden_blob() + b"\x00")


def test_bad_primary_row_rejected():
    blob = bytearray(golden_blob())
    # primary row field sits right after the C array
    struct.pack_into("<Q", blob, 24 + 2 + 16, 28)
    with pytest.raises(IndexFormatError, match="primary"):
        IndexFile.from_bytes(bytes(blob))


# --- traced reads ------------------------------------------------------------


def test_traced_read_stays_in_region():
    idx = IndexFile.from_bytes(golden_blob())
    trace = AccessTrace("sequential")
    b_start = idx.region("B").start
    data = idx.traced_read(trace, "B", b_start, 5)
    assert data == build_bwt(GOLDEN_T).bwt[:5]
    assert trace.records == [("B", 298, 5)]
    with pytest.raises(ValueError):
        idx.traced_read(trace, "B", b_start + 25, 5)  # runs past the region end
    with pytest.raises(ValueError):
        idx.traced_read(trace, "B", 0, 5)  # offsets are absolute, 0 is the header


def test_read_level_entries_and_offsets():
    idx = IndexFile.from_bytes(golden_blob())
    trace = AccessTrace("sequential")
    vals = idx.read_level_entries(trace, 2, ord("1"), 0, 3)
    assert vals == [2, 5, 7, 8]
    assert trace.records == [("level2/col1", 226, 32)]
    assert idx.entry_offset(2, ord("1"), 0) == 226
    assert idx.column_tag(2, ord("1")) == "level2/col1"


def test_read_b_is_one_based_inclusive():
    idx = IndexFile.from_bytes(golden_blob())
    trace = AccessTrace("sequential")
    assert idx.read_b(trace, 1, 5) == build_bwt(GOLDEN_T).bwt[0:5]
    assert idx.read_b(trace, 27, 27) == build_bwt(GOLDEN_T).bwt[26:27]


def test_rank_at_n_matches_naive():
    idx = IndexFile.from_bytes(golden_blob())
    b = build_bwt(GOLDEN_T).bwt
    for sym in (ord("0"), ord("1")):
        assert idx.rank_at_n(sym) == naive_rank(b, sym, 27)


# --- trace statistics --------------------------------------------------------


def test_trace_stats_definitions():
    trace = AccessTrace("sequential")
    trace.record("a", 0, 10)
    trace.record("a", 10, 5)  # contiguous: neither seek nor skip
    trace.record("a", 20, 5)  # gap forward: a skip
    trace.record("a", 15, 5)  # starts before byte 25: a backward seek of 10
    st_ = trace_stats(trace)
    assert st_.total_bytes == 25
    assert st_.read_count == 4
    assert st_.forward_skips == 1
    assert st_.backward_seeks == 1
    assert st_.max_backward_distance == 10


def test_trace_stats_empty():
    st_ = trace_stats(AccessTrace("sequential"))
    assert st_.total_bytes == 0
    assert st_.read_count == 0
    assert st_.backward_seeks == 0
