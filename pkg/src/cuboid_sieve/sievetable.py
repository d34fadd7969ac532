"""Per-prime unsolvability bit-tables, their packed binary files, and queries.

A table for prime r holds r*r bits in row-major order, linear index
``i = p_res * r + q_res``.  Bit i lives at position ``i % 8`` of byte
``i // 8`` (least significant bit first); the final byte is zero padded.
A set bit means Q_pq(t) = 0 has no root t modulo r for those residues.

Two files make up a sieve set:

* the tables file, a plain concatenation of packed tables;
* the index file, a 9-byte header (magic, version, record count) followed by
  6-byte records ``<HI`` holding (prime, byte offset into the tables file).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .modpoly import MAX_MODULUS, check_modulus, coefficients_mod_array, eval_q_mod

INDEX_MAGIC = b"CBPR"
INDEX_VERSION = 1
_HEADER = struct.Struct("<4sBI")
_RECORD = struct.Struct("<HI")
OFFSET_LIMIT = 2**32

DEFAULT_PRIME_MIN = 11
DEFAULT_PRIME_MAX = 541

# Row-block size used when evaluating a table row over all square residues.
_EVAL_CHUNK = 2048


class SieveFormatError(ValueError):
    """Raised when a tables/index byte stream violates the file format."""


def primes_between(lo: int, hi: int) -> list[int]:
    """All primes in [lo, hi]."""
    if hi < 2:
        return []
    flags = np.ones(hi + 1, dtype=bool)
    flags[:2] = False
    for d in range(2, int(hi**0.5) + 1):
        if flags[d]:
            flags[d * d :: d] = False
    return [int(x) for x in np.flatnonzero(flags) if x >= lo]


def default_primes() -> list[int]:
    return primes_between(DEFAULT_PRIME_MIN, DEFAULT_PRIME_MAX)


def table_nbytes(r: int) -> int:
    return (r * r + 7) // 8


def pack_bits(bits: Sequence[int] | np.ndarray) -> bytes:
    """Pack a flat 0/1 sequence into bytes, least significant bit first."""
    arr = np.asarray(bits, dtype=np.uint8).ravel()
    if arr.size and arr.max() > 1:
        raise ValueError("bit sequence may only contain 0 and 1")
    return np.packbits(arr, bitorder="little").tobytes()


def unpack_bits(data: bytes, r: int) -> np.ndarray:
    """Unpack one table into an (r, r) boolean matrix, checking length and padding."""
    n = r * r
    if len(data) != table_nbytes(r):
        raise SieveFormatError(f"table for r={r} must be {table_nbytes(r)} bytes, got {len(data)}")
    flat = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    if flat[n:].any():
        raise SieveFormatError(f"nonzero padding bits in table for r={r}")
    return flat[:n].astype(bool).reshape(r, r)


@dataclass(frozen=True)
class BitTable:
    r: int
    data: bytes

    def __post_init__(self):
        if len(self.data) != table_nbytes(self.r):
            raise SieveFormatError(f"table for r={self.r} has wrong length {len(self.data)}")

    @classmethod
    def from_matrix(cls, r: int, matrix: np.ndarray) -> "BitTable":
        return cls(r, pack_bits(np.asarray(matrix, dtype=bool).ravel()))

    def bit(self, p_res: int, q_res: int) -> int:
        i = p_res * self.r + q_res
        return (self.data[i >> 3] >> (i & 7)) & 1

    def matrix(self) -> np.ndarray:
        return unpack_bits(self.data, self.r)


def _square_residues(r: int) -> np.ndarray:
    t = np.arange(r // 2 + 1, dtype=np.int64)
    return np.unique(t * t % r)


def _solvable_row_one(r: int) -> np.ndarray:
    """solvable[b] for the pair (1, b): some square s has Q(s) == 0 mod r."""
    squares = _square_residues(r)
    out = np.empty(r, dtype=bool)
    for lo in range(0, r, _EVAL_CHUNK):
        b = np.arange(lo, min(r, lo + _EVAL_CHUNK), dtype=np.int64)
        acc = np.zeros((b.size, squares.size), dtype=np.int64)
        for c in coefficients_mod_array(1, b, r):
            acc = (acc * squares[None, :] + c[:, None]) % r
        out[lo : lo + b.size] = (acc == 0).any(axis=1)
    return out


def build_table(r: int) -> BitTable:
    """Unsolvability table for prime r.

    Only t in [0, r // 2] is tried (Q is even in t).  Rows a != 0 are read off
    row 1 through the scaling (a, b) -> (1, b/a), which preserves solvability
    because Q is homogeneous of degree 20 when t has weight 2.
    """
    check_modulus(r)
    solvable_one = _solvable_row_one(r)
    u = np.zeros((r, r), dtype=bool)
    b = np.arange(r, dtype=np.int64)
    for a in range(1, r):
        inv = pow(a, -1, r)
        u[a] = ~solvable_one[b * inv % r]
    # Row 0 and column 0: t = 0 is always a root.
    u[0, :] = False
    u[:, 0] = False
    return BitTable.from_matrix(r, u)


def build_table_oracle(r: int) -> BitTable:
    """Plain triple loop over all residues; reference for ``build_table``."""
    check_modulus(r)
    if r > 97:
        raise ValueError("oracle is limited to r <= 97")
    bits = []
    for a in range(r):
        for b in range(r):
            solvable = False
            for t in range(r):
                if eval_q_mod(a, b, t, r) == 0:
                    solvable = True
                    break
            bits.append(0 if solvable else 1)
    return BitTable(r, pack_bits(bits))


@dataclass(frozen=True)
class PrimesIndex:
    records: tuple[tuple[int, int], ...]

    @classmethod
    def for_primes(cls, primes: Iterable[int]) -> "PrimesIndex":
        records = []
        offset = 0
        for r in primes:
            records.append((int(r), offset))
            offset += table_nbytes(int(r))
        index = cls(tuple(records))
        index.validate()
        return index

    @property
    def primes(self) -> list[int]:
        return [r for r, _ in self.records]

    @property
    def total_bytes(self) -> int:
        if not self.records:
            return 0
        r, off = self.records[-1]
        return off + table_nbytes(r)

    def validate(self) -> None:
        prev_r = 0
        expected = 0
        for r, off in self.records:
            if not 2 <= r < MAX_MODULUS:
                raise SieveFormatError(f"prime {r} outside [2, {MAX_MODULUS})")
            try:
                check_modulus(r)
            except ValueError as exc:
                raise SieveFormatError(str(exc)) from None
            if r <= prev_r:
                raise SieveFormatError("primes in index must be strictly increasing")
            if off != expected:
                raise SieveFormatError(f"offset {off} for r={r}, expected {expected}")
            prev_r = r
            expected = off + table_nbytes(r)
        if expected >= OFFSET_LIMIT:
            raise SieveFormatError(f"cumulative table size {expected} does not fit 32-bit offsets")

    def to_bytes(self) -> bytes:
        self.validate()
        out = bytearray(_HEADER.pack(INDEX_MAGIC, INDEX_VERSION, len(self.records)))
        for r, off in self.records:
            out += _RECORD.pack(r, off)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "PrimesIndex":
        if len(data) < _HEADER.size:
            raise SieveFormatError("index file truncated (header)")
        magic, version, count = _HEADER.unpack_from(data)
        if magic != INDEX_MAGIC:
            raise SieveFormatError(f"bad index magic {magic!r}")
        if version != INDEX_VERSION:
            raise SieveFormatError(f"unsupported index version {version}")
        if len(data) != _HEADER.size + count * _RECORD.size:
            raise SieveFormatError(
                f"index holds {len(data)} bytes, expected {_HEADER.size + count * _RECORD.size}"
            )
        records = tuple(_RECORD.iter_unpack(data[_HEADER.size :]))
        index = cls(records)
        index.validate()
        return index


@dataclass(frozen=True)
class SieveSet:
    index: PrimesIndex
    tables: bytes = field(repr=False)

    @property
    def primes(self) -> list[int]:
        return self.index.primes

    def __len__(self) -> int:
        return len(self.index.records)

    def rank_of(self, r: int) -> int:
        for k, (prime, _) in enumerate(self.index.records):
            if prime == r:
                return k
        raise KeyError(f"prime {r} not in sieve set")

    def table(self, r: int) -> BitTable:
        prime, off = self.index.records[self.rank_of(r)]
        return BitTable(prime, self.tables[off : off + table_nbytes(prime)])

    @cached_property
    def matrices(self) -> tuple[np.ndarray, ...]:
        """Unpacked (r, r) boolean matrices, in index order."""
        return tuple(
            unpack_bits(self.tables[off : off + table_nbytes(r)], r) for r, off in self.index.records
        )

    def is_unsolvable(self, rank: int, p: int, q: int) -> bool:
        r, off = self.index.records[rank]
        i = (p % r) * r + (q % r)
        return bool((self.tables[off + (i >> 3)] >> (i & 7)) & 1)

    def __eq__(self, other):
        if not isinstance(other, SieveSet):
            return NotImplemented
        return self.index == other.index and self.tables == other.tables

    def __hash__(self):
        return hash((self.index, self.tables))


def build_sieve_set(primes: Iterable[int] | None = None) -> SieveSet:
    primes = default_primes() if primes is None else [int(r) for r in primes]
    index = PrimesIndex.for_primes(primes)
    return SieveSet(index, b"".join(build_table(r).data for r in primes))


def serialize(sieve: SieveSet) -> tuple[bytes, bytes]:
    """Return (tables file bytes, index file bytes)."""
    sieve.index.validate()
    if len(sieve.tables) != sieve.index.total_bytes:
        raise SieveFormatError("tables payload does not match index")
    return sieve.tables, sieve.index.to_bytes()


def load(tables: bytes, index: bytes) -> SieveSet:
    idx = PrimesIndex.from_bytes(index)
    if len(tables) != idx.total_bytes:
        raise SieveFormatError(f"tables file holds {len(tables)} bytes, index expects {idx.total_bytes}")
    sieve = SieveSet(idx, bytes(tables))
    for r, off in idx.records:
        unpack_bits(sieve.tables[off : off + table_nbytes(r)], r)
    return sieve


def write_files(sieve: SieveSet, tables_path: str | Path, index_path: str | Path) -> tuple[int, int]:
    tables, index = serialize(sieve)
    Path(tables_path).write_bytes(tables)
    Path(index_path).write_bytes(index)
    return len(tables), len(index)


def read_files(tables_path: str | Path, index_path: str | Path) -> SieveSet:
    return load(Path(tables_path).read_bytes(), Path(index_path).read_bytes())


def dump_table_text(sieve: SieveSet, r: int) -> str:
    """Render one table as text: a header line, then one row per p residue."""
    try:
        table = sieve.table(r)
    except KeyError:
        raise KeyError(f"prime {r} not in sieve set") from None
    m = table.matrix()
    width = len(str(r - 1))
    lines = [f"r={r}"]
    for a in range(r):
        lines.append(f"{a:>{width}}: " + "".join("1" if x else "0" for x in m[a]))
    return "\n".join(lines) + "\n"


def dump_all_text(sieve: SieveSet) -> str:
    return "\n".join(dump_table_text(sieve, r) for r in sieve.primes)
