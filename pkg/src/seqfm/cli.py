"""Command-line front end: build indexes, count patterns, inspect layout.

Output is line-oriented ``key=value`` text so runs are diffable.  Exit
codes: 0 success (a count of zero is success), 1 environment or format
problems, 2 invalid queries.
"""

from __future__ import annotations

import argparse
import sys

from .bwt import build_bwt
from .layout import (
    IndexFile,
    IndexFormatError,
    open_index,
    serialize_index,
    write_index,
)
from .rank_tables import build_tables, make_schedule
from .search import backward_search_naive, sequential_count
from .text import build_alphabet


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqfm",
        description="Disk-layout-aware rank index: build, query, inspect.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="index a text file")
    b.add_argument("--input", required=True, help="file containing the text to index")
    b.add_argument("--output", required=True, help="index file to write")
    b.add_argument("--rate", type=int, default=4, help="spacing ratio between levels, >= 2")
    b.add_argument("--finest", type=int, default=64, help="finest sample spacing")
    b.add_argument(
        "--mem-budget",
        type=int,
        default=1 << 20,
        help="byte budget for the resident coarsest table",
    )
    b.add_argument(
        "--strip-newline",
        action="store_true",
        help="drop one trailing newline from the input",
    )

    c = sub.add_parser("count", help="count occurrences of a pattern")
    c.add_argument("--index", required=True)
    c.add_argument("--pattern", required=True, help="pattern text (or hex with --hex)")
    c.add_argument("--hex", action="store_true", help="interpret the pattern as hex bytes")
    c.add_argument("--mode", choices=("sequential", "naive"), default="sequential")
    c.add_argument("--trace", help="write the access trace to this file, one read per line")

    s = sub.add_parser("stats", help="print header fields and region layout")
    s.add_argument("--index", required=True)
    return parser


def _level_sizes(index: IndexFile) -> list[tuple[int, int, int]]:
    """(level, offset, size) with the per-symbol columns folded together."""
    out = []
    for i, info in enumerate(index.levels, start=1):
        out.append((i, info.offset, index.sigma * info.count * 8))
    return out


def cmd_build(args) -> int:
    try:
        with open(args.input, "rb") as fh:
            data = fh.read()
    except OSError as e:
        print(f"error: cannot read input: {e}", file=sys.stderr)
        return 1
    if args.strip_newline and data.endswith(b"\n"):
        data = data[:-1]
    try:
        alphabet = build_alphabet(data)
        schedule = make_schedule(
            len(data), args.rate, args.finest, args.mem_budget, alphabet.size
        )
        result = build_bwt(data)
        tables = build_tables(result.bwt, alphabet, schedule)
        blob = serialize_index(result, tables, schedule, alphabet)
        write_index(args.output, blob)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    index = IndexFile.from_bytes(blob)  # report from the artifact, not the inputs
    print(f"n={index.n}")
    print(f"sigma={index.sigma}")
    print(f"r={index.ratio}")
    print(f"levels={index.depth}")
    print("spacings=" + ",".join(str(s) for s in index.spacings))
    header = index.regions[0]
    print(f"region=header offset={header.start} size={header.size}")
    for level, offset, size in _level_sizes(index):
        print(f"region=level{level} offset={offset} size={size}")
    print(f"region=B offset={index.b_offset} size={index.n}")
    table_bytes = index.table_bytes()
    analytic_bits = index.sigma * sum(
        -(-index.n // info.spacing) * 64 for info in index.levels
    )
    print(f"table_bytes={table_bytes}")
    print(f"table_bits={table_bytes * 8}")
    print(f"analytic_table_bits={analytic_bits}")
    print(f"total_bytes={len(blob)}")
    print(f"output={args.output}")
    return 0


def cmd_count(args) -> int:
    if args.hex:
        try:
            pattern = bytes.fromhex(args.pattern)
        except ValueError:
            print(f"error: invalid hex pattern {args.pattern!r}", file=sys.stderr)
            return 2
    else:
        try:
            pattern = args.pattern.encode("latin-1")
        except UnicodeEncodeError:
            print("error: pattern has code points above U+00FF; use --hex", file=sys.stderr)
            return 2
    try:
        index = open_index(args.index)
    except (OSError, IndexFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        run = sequential_count if args.mode == "sequential" else backward_search_naive
        try:
            outcome = run(index, pattern)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
    finally:
        index.close()
    st = outcome.stats
    print(
        f"sp={outcome.sp} ep={outcome.ep} count={outcome.count} mode={outcome.mode} "
        f"bytes_read={st.total_bytes} reads={st.read_count} "
        f"backward_seeks={st.backward_seeks} forward_skips={st.forward_skips}"
    )
    if args.trace:
        try:
            with open(args.trace, "w") as fh:
                for tag, offset, length in outcome.trace.records:
                    fh.write(f"{tag},{offset},{length}\n")
        except OSError as e:
            print(f"error: cannot write trace: {e}", file=sys.stderr)
            return 1
    return 0


def cmd_stats(args) -> int:
    try:
        index = open_index(args.index)
    except (OSError, IndexFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    with index:
        print(f"n={index.n}")
        print(f"sigma={index.sigma}")
        print(f"alphabet={index.alphabet.symbols.hex()}")
        print(f"r={index.ratio}")
        print(f"levels={index.depth}")
        print(f"primary_row={index.primary_row}")
        print("c=" + ",".join(str(v) for v in index.c_array))
        for i, info in enumerate(index.levels, start=1):
            print(f"level={i} spacing={info.spacing} count={info.count} offset={info.offset}")
        for region in index.regions:
            print(f"region={region.tag} offset={region.start} size={region.size}")
        table_bytes = index.table_bytes()
        print(f"table_bytes={table_bytes}")
        print(f"b_bytes={index.n}")
        print(f"table_b_ratio={table_bytes / index.n:.6f}")
    return 0


_COMMANDS = {"build": cmd_build, "count": cmd_count, "stats": cmd_stats}


def main(argv=None) -> int:
    args = _make_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


def entry() -> None:
    sys.exit(main())
