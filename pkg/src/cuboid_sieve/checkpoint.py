"""Report and checkpoint files for resumable searches.

The report file is append-only; each record is a timestamp line followed by
``Stop with p=<p>, q=<q>, r_max=<r>``.  The checkpoint file holds a single
``key=value`` record and is replaced atomically on every write.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .codes import require_start_point
from .modpoly import is_prime
from .region import P_LIMIT_32BIT

_STOP_RE = re.compile(r"^Stop with p=(\d+), q=(\d+), r_max=(\d+)\s*$")
_LEGACY_TIME_FORMATS = ("%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M")


class CheckpointError(ValueError):
    pass


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        pass
    for fmt in _LEGACY_TIME_FORMATS:
        try:
            return datetime.strptime(text, fmt)
        except ValueError:
            continue
    raise CheckpointError(f"unrecognised timestamp {text!r}")


@dataclass(frozen=True)
class SearchCheckpoint:
    """Next pair to process and the r_max of the current 100-block of p."""

    p: int
    q: int
    r_max: int = 1
    timestamp: datetime = field(default_factory=lambda: datetime.now().replace(microsecond=0))

    def __post_init__(self):
        if self.r_max != 1 and not is_prime(self.r_max):
            raise CheckpointError(f"r_max must be 1 or a prime, got {self.r_max}")

    def stop_line(self) -> str:
        return f"Stop with p={self.p}, q={self.q}, r_max={self.r_max}"

    def validate(self, p_limit: int = P_LIMIT_32BIT, small_p: bool = False) -> None:
        require_start_point(self.p, self.q, p_limit, small_p)


def format_report_record(cp: SearchCheckpoint) -> str:
    return f"{cp.timestamp.isoformat(sep=' ')}\n{cp.stop_line()}\n"


def append_report(path: str | Path, cp: SearchCheckpoint) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(format_report_record(cp))
        fh.flush()
        os.fsync(fh.fileno())


def read_report(path: str | Path) -> list[SearchCheckpoint]:
    """Parse every record of a report file, oldest first."""
    records = []
    pending_time = None
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        m = _STOP_RE.match(line.strip())
        if m:
            if pending_time is None:
                raise CheckpointError(f"line {lineno}: stop record without timestamp")
            p, q, r_max = map(int, m.groups())
            records.append(SearchCheckpoint(p, q, r_max, pending_time))
            pending_time = None
        else:
            try:
                pending_time = parse_timestamp(line)
            except CheckpointError:
                raise CheckpointError(f"line {lineno}: cannot parse {line!r}") from None
    return records


def stats_digest(histogram: dict[int, int], pairs_tested: int, survivors: int) -> str:
    text = ";".join(f"{r}:{histogram[r]}" for r in sorted(histogram))
    text += f"|{pairs_tested}|{survivors}"
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def write_checkpoint(path: str | Path, cp: SearchCheckpoint, stats=None) -> None:
    lines = [
        f"p={cp.p}",
        f"q={cp.q}",
        f"r_max={cp.r_max}",
        f"timestamp={cp.timestamp.isoformat()}",
    ]
    if stats is not None:
        lines += [
            f"pairs_tested={stats.pairs_tested}",
            f"survivors={stats.survivors}",
            f"digest={stats_digest(stats.histogram, stats.pairs_tested, stats.survivors)}",
        ]
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def read_checkpoint(
    path: str | Path,
    *,
    validate: bool = True,
    p_limit: int = P_LIMIT_32BIT,
    small_p: bool = False,
) -> SearchCheckpoint:
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CheckpointError(f"malformed checkpoint line {line!r}")
        values[key.strip()] = value.strip()
    try:
        cp = SearchCheckpoint(
            int(values["p"]),
            int(values["q"]),
            int(values.get("r_max", 1)),
            parse_timestamp(values["timestamp"]) if "timestamp" in values else datetime.now(),
        )
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint {path}: {exc}") from None
    if validate:
        cp.validate(p_limit, small_p)
    return cp

