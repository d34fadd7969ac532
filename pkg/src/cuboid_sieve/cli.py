"""cuboid-sieve command line.

Exit status:
    0   success
    1-6 search start codes (1 already running, 2 p below 152, 3 p above the
        limit, 4 q below the lower bound, 5 q above the upper bound,
        6 sieve files not loaded / missing)
    7   a cuboid candidate was found
    64  usage error
    65  malformed input file (tables, index, checkpoint, report)
    74  I/O error
"""

from __future__ import annotations

import argparse
import logging
import signal
import statistics
import sys
import time
from dataclasses import dataclass
from math import gcd
from pathlib import Path

from . import sievetable
from .checkpoint import CheckpointError, read_checkpoint, read_report
from .codes import Code, SearchError, check_start_point
from .engine import CandidateFound, SearchController, scan, verify_small_region
from .modpoly import MAX_MODULUS, is_prime
from .plotting import REFERENCE_SECONDS_PER_PAIR, write_bench_report, write_scan_report
from .region import P_LIMIT_32BIT, q_bounds
from .verify import CuboidCandidate, verify_pair

EXIT_CANDIDATE = 7
EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_IOERR = 74

DEFAULT_TABLES = "Cuboid_pq_bit_tables.bin"
DEFAULT_INDEX = "Cuboid_primes.bin"
DEFAULT_REPORT = "Cuboid_search_report.txt"
DEFAULT_CHECKPOINT = "Cuboid_search_checkpoint.txt"

log = logging.getLogger("cuboid_sieve")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class CliConfig:
    tables_path: Path
    index_path: Path
    report_path: Path
    checkpoint_path: Path
    prime_min: int
    prime_max: int
    p_limit: int
    batch_size: int
    verbosity: int

    @classmethod
    def from_args(cls, args) -> "CliConfig":
        for name in ("prime_min", "prime_max"):
            r = getattr(args, name)
            if not (2 <= r < MAX_MODULUS and is_prime(r)):
                raise UsageError(f"--{name.replace('_', '-')} must be a prime below {MAX_MODULUS}, got {r}")
        if args.prime_min > args.prime_max:
            raise UsageError("--prime-min exceeds --prime-max")
        if args.p_limit < 1 or args.batch_size < 1:
            raise UsageError("--p-limit and --batch-size must be positive")
        return cls(
            Path(args.tables).resolve(),
            Path(args.index).resolve(),
            Path(args.report).resolve(),
            Path(args.checkpoint).resolve(),
            args.prime_min,
            args.prime_max,
            args.p_limit,
            args.batch_size,
            args.verbose,
        )


def _load_sieve(cfg: CliConfig) -> sievetable.SieveSet:
    if not cfg.tables_path.exists() or not cfg.index_path.exists():
        raise SearchError(
            Code.NOT_LOADED, f"sieve files not found ({cfg.tables_path.name}, {cfg.index_path.name}); run gen-tables"
        )
    return sievetable.read_files(cfg.tables_path, cfg.index_path)


def cmd_gen_tables(cfg: CliConfig, args) -> int:
    primes = sievetable.primes_between(cfg.prime_min, cfg.prime_max)
    index = sievetable.PrimesIndex.for_primes(primes)
    tables = []
    for r in primes:
        t = sievetable.build_table(r)
        tables.append(t.data)
        print(f"{r}\t{len(t.data)}")
    sieve = sievetable.SieveSet(index, b"".join(tables))
    n_tables, n_index = sievetable.write_files(sieve, cfg.tables_path, cfg.index_path)
    print(f"# primes={len(primes)} first={primes[0] if primes else '-'} last={primes[-1] if primes else '-'}")
    print(f"# {cfg.tables_path.name}: {n_tables} bytes; {cfg.index_path.name}: {n_index} bytes")
    if args.text:
        Path(args.text).write_text(sievetable.dump_all_text(sieve))
        print(f"# text dump written to {args.text}")
    return 0


def cmd_dump_table(cfg: CliConfig, args) -> int:
    sieve = _load_sieve(cfg)
    if args.all:
        text = sievetable.dump_all_text(sieve)
    else:
        if args.r is None:
            raise UsageError("give a prime r or --all")
        if not is_prime(args.r):
            raise UsageError(f"r={args.r} is not prime")
        if args.r not in sieve.primes:
            print(f"prime {args.r} is not in the sieve set", file=sys.stderr)
            return EXIT_DATAERR
        text = sievetable.dump_table_text(sieve, args.r)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _resume_point(cfg: CliConfig, args) -> tuple[int, int]:
    if args.resume:
        if args.resume == "auto":
            source = cfg.checkpoint_path if cfg.checkpoint_path.exists() else cfg.report_path
        else:
            source = Path(args.resume)
        if source.read_text().lstrip().startswith("p="):
            cp = read_checkpoint(source, validate=False)
        else:
            records = read_report(source)
            if not records:
                raise CheckpointError(f"no stop records in {source}")
            cp = records[-1]
        return cp.p, cp.q
    p = args.p_start
    q = args.q_start if args.q_start is not None else q_bounds(max(p, 1)).q_low
    return p, q


def cmd_search(cfg: CliConfig, args) -> int:
    p, q = _resume_point(cfg, args)
    p_end = args.p_end if args.p_end is not None else cfg.p_limit
    code = check_start_point(p, q, cfg.p_limit, args.small_p)
    if code:
        print(f"start rejected with code {int(code)} ({code.name}) for p={p}, q={q}", file=sys.stderr)
        return int(code)
    if p_end > cfg.p_limit:
        print(f"p_end={p_end} exceeds --p-limit {cfg.p_limit}", file=sys.stderr)
        return int(Code.P_ABOVE_LIMIT)

    def sink(pp, qq, verdict):
        print(f"survivor\t{pp}\t{qq}\t{verdict.describe()}", flush=True)

    ctl = SearchController(
        cfg.report_path,
        cfg.checkpoint_path,
        p_limit=cfg.p_limit,
        small_p=args.small_p,
        batch_size=cfg.batch_size,
        sink=sink,
    )
    try:
        ctl.load(cfg.tables_path, cfg.index_path)
    except FileNotFoundError:
        print("sieve files not found; run gen-tables first", file=sys.stderr)
        return int(Code.NOT_LOADED)

    def _on_signal(signum, frame):
        log.warning("signal %d: stopping search", signum)
        ctl.request_stop()

    old = {s: signal.signal(s, _on_signal) for s in (signal.SIGINT, signal.SIGTERM)}
    try:
        code = ctl.start(p, q, p_end)
        if code:
            return int(code)
        while ctl.wait(0.5) is None and ctl.error is None and ctl.status().running:
            if cfg.verbosity:
                st = ctl.status()
                log.info("p~%d r_max=%d", st.current_p, st.current_r_max)
    finally:
        for s, h in old.items():
            signal.signal(s, h)
    ctl.wait()
    ctl.release()
    if ctl.error is not None:
        raise ctl.error
    stats = ctl.result
    print("pairs_tested\tskipped\tsurvivors\tcandidates\tmax_kill_prime\tseconds\tseconds_per_pair\tresume_p\tresume_q")
    print(
        f"{stats.pairs_tested}\t{stats.skipped}\t{stats.survivors}\t{len(stats.candidates)}\t"
        f"{stats.max_kill_prime}\t{stats.elapsed:.3f}\t{stats.seconds_per_pair:.3e}\t"
        f"{stats.resume.p}\t{stats.resume.q}"
    )
    if args.figures:
        for path in write_scan_report(stats, args.figures, "search"):
            print(f"# wrote {path}")
    return EXIT_CANDIDATE if stats.candidates else 0


def cmd_verify(cfg: CliConfig, args) -> int:
    p, q = args.p, args.q
    if p < 1 or q < 1 or p == q or gcd(p, q) != 1:
        raise UsageError(f"need coprime positive p != q, got ({p}, {q})")
    sieve = None if args.bypass_sieve else _load_sieve(cfg)
    verdict = verify_pair(p, q, sieve, bypass_sieve=args.bypass_sieve)
    print(f"p={p} q={q}: {verdict.describe()}")
    return EXIT_CANDIDATE if isinstance(verdict, CuboidCandidate) else 0


def cmd_verify_small(cfg: CliConfig, args) -> int:
    sieve = _load_sieve(cfg)
    try:
        s = verify_small_region(sieve)
    except CandidateFound as exc:
        print(f"CUBOID CANDIDATES: {exc.candidates}")
        return EXIT_CANDIDATE
    print("pairs\tcoprime_pairs\tsieved_out\tsurvivors\tcandidates\tmax_kill_prime")
    print(f"{s.pairs}\t{s.coprime_pairs}\t{s.sieved_out}\t{s.survivors}\t{len(s.candidates)}\t{s.max_kill_prime}")
    for kind, n in sorted(s.verdicts.items()):
        print(f"# survivors {kind}: {n}")
    return 0


def cmd_bench(cfg: CliConfig, args) -> int:
    if args.p_start < 1 or args.repeat < 1:
        raise UsageError("--p-start and --repeat must be positive")
    sieve = _load_sieve(cfg)
    sieve.matrices  # keep table unpacking out of the timed runs
    runs = []
    last = None
    for i in range(1, args.repeat + 1):
        if args.p_end < args.p_start:
            runs.append({"run": i, "pairs": 0, "seconds": 0.0, "seconds_per_pair": 0.0})
            continue
        t0 = time.perf_counter()
        last = scan(
            sieve,
            (args.p_start, q_bounds(args.p_start).q_low),
            args.p_end,
            small_p=True,
            p_limit=max(cfg.p_limit, args.p_end),
            batch_size=cfg.batch_size,
        )
        seconds = time.perf_counter() - t0
        dt = seconds / last.pairs_tested if last.pairs_tested else 0.0
        runs.append({"run": i, "pairs": last.pairs_tested, "seconds": f"{seconds:.4f}", "seconds_per_pair": dt})
    print("run\tpairs\tseconds\tseconds_per_pair\tratio_to_reference")
    for r in runs:
        ratio = r["seconds_per_pair"] / REFERENCE_SECONDS_PER_PAIR
        print(f"{r['run']}\t{r['pairs']}\t{r['seconds']}\t{r['seconds_per_pair']:.3e}\t{ratio:.3f}")
    dts = [r["seconds_per_pair"] for r in runs if r["pairs"]]
    if len(dts) > 1:
        spread = (max(dts) - min(dts)) / statistics.mean(dts)
        note = "stable" if spread < 0.2 else "unstable"
        print(f"# spread {spread:.1%} across {len(dts)} runs ({note})")
    print(f"# reference: {REFERENCE_SECONDS_PER_PAIR:.2e} s/pair; 10x bound {10 * REFERENCE_SECONDS_PER_PAIR:.2e} s/pair")
    if args.figures:
        for path in write_bench_report(runs, args.figures):
            print(f"# wrote {path}")
        if last is not None:
            for path in write_scan_report(last, args.figures, "bench"):
                print(f"# wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cuboid-sieve", description="Modulo-primes sieve search for perfect cuboids.")
    parser.add_argument("--tables", default=DEFAULT_TABLES, help="bit-tables file")
    parser.add_argument("--index", default=DEFAULT_INDEX, help="primes index file")
    parser.add_argument("--report", default=DEFAULT_REPORT, help="append-only search report")
    parser.add_argument("--checkpoint", default=DEFAULT_CHECKPOINT, help="checkpoint file")
    parser.add_argument("--prime-min", type=int, default=sievetable.DEFAULT_PRIME_MIN)
    parser.add_argument("--prime-max", type=int, default=sievetable.DEFAULT_PRIME_MAX)
    parser.add_argument("--p-limit", type=int, default=P_LIMIT_32BIT, help="largest p a search may reach")
    parser.add_argument("--batch-size", type=int, default=1_000_000, help="q values per scan batch")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-tables", help="build and write the sieve files")
    g.add_argument("--text", help="also write a text dump of every table here")
    g.set_defaults(func=cmd_gen_tables)

    d = sub.add_parser("dump-table", help="print one table as 0/1 text")
    d.add_argument("r", type=int, nargs="?")
    d.add_argument("--all", action="store_true")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_dump_table)

    s = sub.add_parser("search", help="run the sieve search")
    s.add_argument("--p-start", type=int, default=152)
    s.add_argument("--q-start", type=int)
    s.add_argument("--p-end", type=int, help="last p (default: --p-limit)")
    s.add_argument("--resume", nargs="?", const="auto", help="resume from a checkpoint or report file")
    s.add_argument("--small-p", action="store_true", help="allow p < 152")
    s.add_argument("--figures", help="directory for CSV tables and PNG figures")
    s.set_defaults(func=cmd_search)

    v = sub.add_parser("verify", help="classify one (p, q) pair")
    v.add_argument("p", type=int)
    v.add_argument("q", type=int)
    v.add_argument("--bypass-sieve", action="store_true")
    v.set_defaults(func=cmd_verify)

    vs = sub.add_parser("verify-small", help="exhaustively check the p <= 151 region")
    vs.set_defaults(func=cmd_verify_small)

    b = sub.add_parser("bench", help="measure seconds per sieved pair")
    b.add_argument("--p-start", type=int, default=152)
    b.add_argument("--p-end", type=int, default=2000)
    b.add_argument("--repeat", type=int, default=3)
    b.add_argument("--figures", help="directory for CSV tables and PNG figures")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on --help and on usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
    )
    try:
        cfg = CliConfig.from_args(args)
        return args.func(cfg, args)
    except UsageError as exc:
        print(f"cuboid-sieve: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SearchError as exc:
        print(f"cuboid-sieve: {exc}", file=sys.stderr)
        return int(exc.code)
    except (sievetable.SieveFormatError, CheckpointError) as exc:
        print(f"cuboid-sieve: bad input: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    except OSError as exc:
        print(f"cuboid-sieve: {exc}", file=sys.stderr)
        return EXIT_IOERR


if __name__ == "__main__":
    sys.exit(main())
