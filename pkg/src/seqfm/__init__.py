"""Disk-layout-aware rank index over the Burrows-Wheeler transform.

Build an index whose sampled rank tables precede the transformed text on
disk, then answer pattern-count queries either with classic random-access
backward search or with a staged mode that reads the file strictly in
offset order. Every read is traced, so the access pattern is testable.
"""

from .bwt import BwtResult, build_bwt, compute_c_array, invert_bwt, rotation_order
from .layout import (
    AccessTrace,
    IndexFile,
    IndexFormatError,
    TraceStats,
    open_index,
    serialize_index,
    trace_stats,
    write_index,
)
from .rank_tables import (
    EstimateWindow,
    LevelSchedule,
    SampleNotFetched,
    SampleTable,
    build_tables,
    estimate_lower,
    make_schedule,
)
from .search import (
    ChainState,
    SearchOutcome,
    backward_search_naive,
    naive_chains,
    seed_chains,
    sequential_count,
)
from .text import Alphabet, build_alphabet, cyclic_count, naive_rank

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "AccessTrace",
    "BwtResult",
    "ChainState",
    "EstimateWindow",
    "IndexFile",
    "IndexFormatError",
    "LevelSchedule",
    "SampleNotFetched",
    "SampleTable",
    "SearchOutcome",
    "TraceStats",
    "backward_search_naive",
    "build_alphabet",
    "build_bwt",
    "build_tables",
    "compute_c_array",
    "cyclic_count",
    "estimate_lower",
    "invert_bwt",
    "make_schedule",
    "naive_chains",
    "naive_rank",
    "open_index",
    "rotation_order",
    "seed_chains",
    "sequential_count",
    "serialize_index",
    "trace_stats",
    "write_index",
    "__version__",
]
