"""Resumable (p, q) scan through the sieve, plus the start/stop controller.

The scan walks p upward and, for each p, q over its region segment in
batches of at most ``batch_size`` values.  Pairs with p == q or
gcd(p, q) > 1 are skipped.  Each remaining pair is tested against the sieve
primes smallest first; the first prime whose bit is set "kills" it.  Pairs no
prime kills are survivors and go to exact verification.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import sievetable
from .checkpoint import SearchCheckpoint, append_report, write_checkpoint
from .codes import NOT_RUNNING, Code, SearchError, check_start_point, require_start_point
from .modpoly import SearchPair
from .region import P_LIMIT_32BIT, SPLIT_P, q_bounds
from .sievetable import SieveSet
from .verify import CuboidCandidate, PairVerdict, verify_pair

log = logging.getLogger(__name__)

DEFAULT_BATCH = 1_000_000
BLOCK = 100
# Below this alive fraction the sieve switches from tiled masks to index gathers.
_GATHER_FRACTION = 0.125

Sink = Callable[[int, int, PairVerdict], None]


class CandidateFound(RuntimeError):
    """An exact cuboid candidate turned up; carries every (p, q, t) found."""

    def __init__(self, candidates):
        super().__init__(f"cuboid candidate(s) found: {candidates}")
        self.candidates = candidates


@dataclass
class ScanStats:
    pairs_tested: int = 0
    survivors: int = 0
    skipped: int = 0
    histogram: dict[int, int] = field(default_factory=dict)
    block_r_max: dict[int, int] = field(default_factory=dict)
    elapsed: float = 0.0
    candidates: list[tuple[int, int, int]] = field(default_factory=list)
    verdicts: dict[str, int] = field(default_factory=dict)
    stopped: bool = False
    resume: SearchPair | None = None

    @property
    def max_kill_prime(self) -> int:
        return max((r for r, n in self.histogram.items() if n), default=1)

    @property
    def seconds_per_pair(self) -> float:
        return self.elapsed / self.pairs_tested if self.pairs_tested else 0.0

    def merge(self, later: "ScanStats") -> "ScanStats":
        """Combine with the stats of a scan that resumed where this one stopped."""
        hist = dict(self.histogram)
        for r, n in later.histogram.items():
            hist[r] = hist.get(r, 0) + n
        blocks = dict(self.block_r_max)
        for b, r in later.block_r_max.items():
            blocks[b] = max(blocks.get(b, 1), r)
        verdicts = dict(self.verdicts)
        for k, n in later.verdicts.items():
            verdicts[k] = verdicts.get(k, 0) + n
        return ScanStats(
            pairs_tested=self.pairs_tested + later.pairs_tested,
            survivors=self.survivors + later.survivors,
            skipped=self.skipped + later.skipped,
            histogram=hist,
            block_r_max=blocks,
            elapsed=self.elapsed + later.elapsed,
            candidates=self.candidates + later.candidates,
            verdicts=verdicts,
            stopped=later.stopped,
            resume=later.resume,
        )


class ScanProgress:
    """Position shared between a running scan and its observers.

    ``snapshot`` is replaced wholesale, so readers never need a lock.
    """

    def __init__(self, p: int = 0, q: int = 0, r_max: int = 1):
        self.snapshot: tuple[int, int, int] = (p, q, r_max)
        self.stop_event = threading.Event()


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


class _RowSieve:
    """Sieve rows for a fixed p, reused across the batches of that row."""

    def __init__(self, sieve: SieveSet, p: int):
        self.p = p
        self.primes = sieve.primes
        self.rows = [m[p % r] for r, m in zip(self.primes, sieve.matrices)]
        self.factors = _prime_factors(p)

    def run(self, q0: int, q1: int) -> tuple[int, int, np.ndarray, np.ndarray]:
        """Sieve q in [q0, q1].

        Returns (tested, skipped, kills per prime rank, surviving q values).
        """
        n = q1 - q0 + 1
        alive = np.ones(n, dtype=bool)
        for f in self.factors:
            alive[(-q0) % f :: f] = False
        if q0 <= self.p <= q1:
            alive[self.p - q0] = False
        tested = int(np.count_nonzero(alive))
        kills = np.zeros(len(self.primes), dtype=np.int64)
        remaining = tested
        k = 0
        # dense phase: tile each row's pattern across the whole batch
        while k < len(self.primes) and remaining > _GATHER_FRACTION * n:
            r = self.primes[k]
            pattern = self.rows[k][(q0 + np.arange(r)) % r]
            dead = np.resize(pattern, n) & alive
            c = int(np.count_nonzero(dead))
            if c:
                kills[k] = c
                alive &= ~dead
                remaining -= c
            k += 1
        qs = np.flatnonzero(alive).astype(np.int64) + q0
        # sparse phase: gather bits for the few pairs still alive
        while k < len(self.primes) and qs.size:
            dead = self.rows[k][qs % self.primes[k]]
            c = int(np.count_nonzero(dead))
            if c:
                kills[k] = c
                qs = qs[~dead]
            k += 1
        return tested, n - tested, kills, qs


def scan(
    sieve: SieveSet | None,
    start: SearchPair | tuple[int, int],
    p_end: int,
    sink: Sink | None = None,
    *,
    small_p: bool = False,
    p_limit: int = P_LIMIT_32BIT,
    batch_size: int = DEFAULT_BATCH,
    progress: ScanProgress | None = None,
    on_batch: Callable[[ScanStats, SearchPair], None] | None = None,
) -> ScanStats:
    """Scan rows p = start.p .. p_end, resuming row start.p at start.q.

    Raises SearchError with the matching code for a bad start point, a p_end
    beyond ``p_limit`` or a missing sieve.  Stops early (``stopped=True``)
    at the first batch boundary after ``progress.stop_event`` is set; the
    returned ``resume`` is the first pair not yet processed.
    """
    if sieve is None:
        raise SearchError(Code.NOT_LOADED, "sieve tables are not loaded")
    p0, q_start = int(start[0]), int(start[1])
    require_start_point(p0, q_start, p_limit, small_p)
    if p_end > p_limit:
        raise SearchError(Code.P_ABOVE_LIMIT, f"p_end={p_end} exceeds limit {p_limit}")
    if batch_size < 1:
        raise ValueError("batch_size must be positive")

    stats = ScanStats()
    primes = sieve.primes
    kills_total = np.zeros(len(primes), dtype=np.int64)
    progress = progress or ScanProgress()
    block = p0 // BLOCK
    r_max = 1
    t0 = time.perf_counter()

    p = p0
    q = q_start
    while p <= p_end:
        if p // BLOCK != block:
            block = p // BLOCK
            r_max = 1
        bounds = q_bounds(p)
        row = _RowSieve(sieve, p)
        stats.block_r_max.setdefault(block, 1)
        while q <= bounds.q_high:
            q1 = min(bounds.q_high, q + batch_size - 1)
            tested, skipped, kills, survivors = row.run(q, q1)
            stats.pairs_tested += tested
            stats.skipped += skipped
            kills_total += kills
            hit = np.flatnonzero(kills)
            if hit.size:
                r_max = max(r_max, primes[hit[-1]])
                stats.block_r_max[block] = max(stats.block_r_max[block], r_max)
            for qs in survivors.tolist():
                stats.survivors += 1
                verdict = verify_pair(p, qs, bypass_sieve=True)
                kind = type(verdict).__name__
                stats.verdicts[kind] = stats.verdicts.get(kind, 0) + 1
                if isinstance(verdict, CuboidCandidate):
                    log.critical("cuboid candidate p=%d q=%d t=%d", p, qs, verdict.t)
                    stats.candidates.append((p, qs, verdict.t))
                if sink is not None:
                    sink(p, qs, verdict)
            q = q1 + 1
            nxt = SearchPair(p, q) if q <= bounds.q_high else _next_row(p)
            progress.snapshot = (nxt.p, nxt.q, r_max if nxt.p // BLOCK == block else 1)
            if on_batch is not None:
                on_batch(stats, nxt)
            if progress.stop_event.is_set() and nxt.p <= p_end:
                stats.stopped = True
                stats.resume = nxt
                break
        if stats.stopped:
            break
        p += 1
        if p <= p_end:
            q = q_bounds(p).q_low

    if not stats.stopped:
        stats.resume = _next_row(p_end) if p_end >= p0 else SearchPair(p0, q_start)
    stats.histogram = {r: int(n) for r, n in zip(primes, kills_total) if n}
    stats.elapsed = time.perf_counter() - t0
    return stats


def _next_row(p: int) -> SearchPair:
    return SearchPair(p + 1, q_bounds(p + 1).q_low)


@dataclass
class SmallRegionSummary:
    pairs: int
    coprime_pairs: int
    sieved_out: int
    survivors: int
    verdicts: dict[str, int]
    candidates: list[tuple[int, int, int]]
    max_kill_prime: int


def verify_small_region(sieve: SieveSet, p_max: int = SPLIT_P - 1) -> SmallRegionSummary:
    """Exhaustively check every coprime p != q pair with p <= p_max (default 151)."""
    if p_max >= SPLIT_P:
        raise ValueError(f"the small region ends at p={SPLIT_P - 1}")
    stats = scan(sieve, (1, q_bounds(1).q_low), p_max, small_p=True)
    summary = SmallRegionSummary(
        pairs=stats.pairs_tested + stats.skipped,
        coprime_pairs=stats.pairs_tested,
        sieved_out=sum(stats.histogram.values()),
        survivors=stats.survivors,
        verdicts=stats.verdicts,
        candidates=stats.candidates,
        max_kill_prime=stats.max_kill_prime,
    )
    if summary.candidates:
        raise CandidateFound(summary.candidates)
    return summary


@dataclass(frozen=True)
class ControllerStatus:
    running: bool
    current_p: int
    exact_p: int
    current_q: int
    current_r_max: int


class SearchController:
    """Background search with the load/start/stop/release protocol.

    Every method reports misuse through its return code instead of raising.
    """

    def __init__(
        self,
        report_path: str | Path | None = None,
        checkpoint_path: str | Path | None = None,
        *,
        p_limit: int = P_LIMIT_32BIT,
        small_p: bool = False,
        batch_size: int = DEFAULT_BATCH,
        sink: Sink | None = None,
        checkpoint_interval: float = 60.0,
    ):
        self.checkpoint_interval = checkpoint_interval
        self._last_checkpoint = 0.0
        self.report_path = report_path
        self.checkpoint_path = checkpoint_path
        self.p_limit = p_limit
        self.small_p = small_p
        self.batch_size = batch_size
        self.sink = sink
        self.sieve: SieveSet | None = None
        self.result: ScanStats | None = None
        self.error: BaseException | None = None
        self._lock = threading.Lock()
        self._thread: threading.Thread | None = None
        self._progress = ScanProgress()

    # -- tables -------------------------------------------------------------

    def load(self, tables_path: str | Path, index_path: str | Path) -> int:
        """Load both files; returns the index file size, or 0 if already loaded."""
        with self._lock:
            if self.sieve is not None:
                return 0
            index_bytes = Path(index_path).read_bytes()
            sieve = sievetable.load(Path(tables_path).read_bytes(), index_bytes)
            sieve.matrices  # unpack now rather than inside the first scan batch
            self.sieve = sieve
            return len(index_bytes)

    def load_sieve(self, sieve: SieveSet, index_size: int | None = None) -> int:
        with self._lock:
            if self.sieve is not None:
                return 0
            self.sieve = sieve
            return index_size if index_size is not None else len(sieve.index.to_bytes())

    def release(self) -> int:
        with self._lock:
            if self.sieve is None:
                return Code.NOT_LOADED
            if self._running():
                return Code.ALREADY_RUNNING
            self.sieve = None
            return Code.OK

    # -- search -------------------------------------------------------------

    def _running(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    def start(self, p: int, q: int, p_end: int | None = None) -> int:
        with self._lock:
            if self._running():
                return Code.ALREADY_RUNNING
            if self.sieve is None:
                return Code.NOT_LOADED
            code = check_start_point(p, q, self.p_limit, self.small_p)
            if code:
                return code
            p_end = self.p_limit if p_end is None else p_end
            if p_end > self.p_limit:
                return Code.P_ABOVE_LIMIT
            self._progress = ScanProgress(p, q, 1)
            self._last_checkpoint = time.monotonic()
            self.result = None
            self.error = None
            self._thread = threading.Thread(
                target=self._worker, args=(self.sieve, p, q, p_end), name="cuboid-search", daemon=True
            )
            self._thread.start()
            return Code.OK

    def _worker(self, sieve: SieveSet, p: int, q: int, p_end: int) -> None:
        try:
            self.result = scan(
                sieve,
                (p, q),
                p_end,
                self.sink,
                small_p=self.small_p,
                p_limit=self.p_limit,
                batch_size=self.batch_size,
                progress=self._progress,
                on_batch=self._on_batch,
            )
        except BaseException as exc:  # surfaced through self.error
            log.exception("search worker failed")
            self.error = exc
        finally:
            self._write_exit_record()

    def _on_batch(self, stats: ScanStats, nxt: SearchPair) -> None:
        if self.checkpoint_path is None:
            return
        now = time.monotonic()
        if now - self._last_checkpoint >= self.checkpoint_interval:
            self._last_checkpoint = now
            write_checkpoint(self.checkpoint_path, self._exit_checkpoint())

    def _exit_checkpoint(self) -> SearchCheckpoint:
        p, q, r_max = self._progress.snapshot
        return SearchCheckpoint(p, q, r_max)

    def _write_exit_record(self) -> None:
        cp = self._exit_checkpoint()
        if self.report_path is not None:
            append_report(self.report_path, cp)
        if self.checkpoint_path is not None:
            write_checkpoint(self.checkpoint_path, cp, self.result)

    def request_stop(self) -> None:
        """Ask the worker to stop at its next batch boundary; safe in signal handlers."""
        self._progress.stop_event.set()

    def stop(self, timeout: float | None = None) -> int:
        thread = self._thread
        if thread is None or not thread.is_alive():
            return NOT_RUNNING
        self._progress.stop_event.set()
        thread.join(timeout)
        return Code.OK

    def wait(self, timeout: float | None = None) -> ScanStats | None:
        if self._thread is not None:
            self._thread.join(timeout)
        return self.result

    def status(self) -> ControllerStatus:
        p, q, r_max = self._progress.snapshot
        return ControllerStatus(self._running(), p // BLOCK * BLOCK, p, q, r_max)

    def current_p(self) -> int:
        return self.status().current_p

    def current_r_max(self) -> int:
        return self.status().current_r_max
