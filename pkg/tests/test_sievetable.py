import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuboid_sieve import sievetable
from cuboid_sieve.sievetable import (
    BitTable,
    PrimesIndex,
    SieveFormatError,
    build_sieve_set,
    build_table,
    build_table_oracle,
    dump_table_text,
    load,
    pack_bits,
    serialize,
    unpack_bits,
)

from .conftest import TABLE_11

# Sum of ceil(r^2 / 8) over the 96 primes 11..541 (computed with sympy.primerange).
DEFAULT_TABLE_BYTES = 1048164


def table11_bits():
    return [int(c) for row in TABLE_11 for c in row]


def test_table_11_matches_printed_table():
    m = build_table(11).matrix()
    assert ["".join(str(int(x)) for x in row) for row in m] == TABLE_11
    assert list(m[1]) == [bool(int(c)) for c in "00111111110"]


@pytest.mark.parametrize("r", [2, 3, 5, 7])
def test_small_prime_tables_are_zero(r):
    t = build_table(r)
    assert not t.matrix().any()
    assert set(t.data) == {0}


def test_r2_single_zero_byte():
    assert build_table(2).data == b"\x00"


def test_packed_bytes_of_table_11():
    data = build_table(11).data
    assert len(data) == 16
    assert data[:3] == bytes([0x00, 0xE0, 0x9F])
    assert f"{data[1]:08b}" == "11100000"
    assert f"{data[2]:08b}" == "10011111"
    # 121 bits: the last byte carries one data bit (row 10, col 10 = 0) and seven pad zeros
    assert data[-1] == 0


def test_pack_bits_first_bytes():
    bits = table11_bits()
    assert pack_bits(bits[:8]) == b"\x00"
    assert pack_bits(bits[8:16]) == b"\xe0"
    assert pack_bits(bits[16:24]) == b"\x9f"


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(sievetable.primes_between(2, 541)), st.integers(0, 2**32 - 1))
def test_pack_unpack_roundtrip(r, seed):
    bits = np.random.default_rng(seed).integers(0, 2, size=r * r).tolist()
    m = unpack_bits(pack_bits(bits), r)
    assert m.ravel().astype(int).tolist() == bits


def test_unpack_rejects_nonzero_padding():
    data = bytearray(build_table(11).data)
    data[-1] |= 0x80
    with pytest.raises(SieveFormatError):
        unpack_bits(bytes(data), 11)


def test_unpack_rejects_wrong_length():
    with pytest.raises(SieveFormatError):
        unpack_bits(b"\x00" * 15, 11)


def test_pack_rejects_non_bits():
    with pytest.raises(ValueError):
        pack_bits([0, 1, 2])


@pytest.mark.parametrize("r", [11, 13, 97])
def test_oracle_examples(r):
    assert build_table(r) == build_table_oracle(r)


@pytest.mark.parametrize("r", [0, 1, 4, 15, 9697, 9699])
def test_build_table_rejects_bad_r(r):
    with pytest.raises(ValueError):
        build_table(r)


def test_oracle_limited_to_97():
    with pytest.raises(ValueError):
        build_table_oracle(101)


def test_zero_margins_default_set(default_sieve):
    for r, m in zip(default_sieve.primes, default_sieve.matrices):
        assert not m[0].any() and not m[:, 0].any(), r


def test_symmetry_against_oracle(oracle_tables):
    for r, t in oracle_tables.items():
        m = t.matrix()
        assert (m == m.T).all(), r


def test_projective_scaling_against_oracle(oracle_tables):
    for r, t in oracle_tables.items():
        m = t.matrix()
        a = np.arange(r)
        for lam in range(1, r):
            scaled = m[np.ix_(lam * a % r, lam * a % r)]
            assert (scaled == m).all(), (r, lam)


def test_build_table_large_prime_matches_scalar_definition():
    # spot-check a prime beyond the oracle range against the definition
    r = 9689
    t = build_table(r)
    rng = np.random.default_rng(1)
    for a, b in rng.integers(0, r, size=(6, 2)):
        solvable = any(sievetable.eval_q_mod(int(a), int(b), x, r) == 0 for x in range(r))
        assert t.bit(int(a), int(b)) == (0 if solvable else 1)


def test_is_unsolvable_examples():
    s = build_sieve_set([11])
    assert s.is_unsolvable(0, 1, 2) is True
    assert s.is_unsolvable(0, 12, 13) is True
    assert s.is_unsolvable(0, 12, 21) is False
    assert s.is_unsolvable(0, 22, 7) is False


def test_default_set_shape(default_sieve):
    primes = default_sieve.primes
    assert len(primes) == 96 and primes[0] == 11 and primes[-1] == 541
    assert len(default_sieve.tables) == DEFAULT_TABLE_BYTES
    assert sum((r * r + 7) // 8 for r in primes) == DEFAULT_TABLE_BYTES


def test_index_records_layout(default_sieve):
    tables, index = serialize(default_sieve)
    assert len(index) == 9 + 6 * 96
    magic, version, count = struct.unpack_from("<4sBI", index)
    assert (magic, version, count) == (b"CBPR", 1, 96)
    recs = list(struct.iter_unpack("<HI", index[9:]))
    assert recs[0] == (11, 0) and recs[1] == (13, 16)
    for (r0, o0), (r1, o1) in zip(recs, recs[1:]):
        assert o1 == o0 + (r0 * r0 + 7) // 8


def test_roundtrip_default(default_sieve):
    tables, index = serialize(default_sieve)
    assert load(tables, index) == default_sieve


def test_roundtrip_files(default_files, default_sieve):
    assert sievetable.read_files(*default_files) == default_sieve


def test_empty_set():
    s = build_sieve_set([])
    tables, index = serialize(s)
    assert tables == b""
    assert len(index) == 9
    assert len(load(tables, index)) == 0


def _index_bytes(records):
    out = struct.pack("<4sBI", b"CBPR", 1, len(records))
    for r, off in records:
        out += struct.pack("<HI", r, off)
    return out


def test_load_rejects_nonmonotone_offsets():
    s = build_sieve_set([11, 13])
    bad = _index_bytes([(11, 16), (13, 0)])
    with pytest.raises(SieveFormatError):
        load(s.tables, bad)


def test_load_rejects_truncated_tables():
    tables, index = serialize(build_sieve_set([11, 13]))
    with pytest.raises(SieveFormatError):
        load(tables[:-1], index)


def test_load_rejects_truncated_index():
    tables, index = serialize(build_sieve_set([11, 13]))
    with pytest.raises(SieveFormatError):
        load(tables, index[:-2])
    with pytest.raises(SieveFormatError):
        load(tables, index[:5])


def test_load_rejects_non_prime():
    tables = b"\x00" * ((12 * 12 + 7) // 8)
    with pytest.raises(SieveFormatError):
        load(tables, _index_bytes([(12, 0)]))


def test_load_rejects_bad_magic_and_version():
    tables, index = serialize(build_sieve_set([11]))
    with pytest.raises(SieveFormatError):
        load(tables, b"XXXX" + index[4:])
    with pytest.raises(SieveFormatError):
        load(tables, index[:4] + b"\x02" + index[5:])


def test_capacity_limit_enforced():
    # offsets are 32-bit: a record placed near 2^32 must be rejected
    big = PrimesIndex(((9689, 2**32 - 100),))
    with pytest.raises(SieveFormatError):
        big.validate()


def test_capacity_bound_from_table_size():
    # sum of r^2/8 from r = 11 stays below 2^32 through r = 9689 (N = 1196) and crosses at 9697
    total = 0
    last_under = None
    for n, r in enumerate(sievetable.primes_between(11, 20000), start=5):
        total += r * r / 8
        if total >= 2**32:
            break
        last_under = (r, n)
    assert last_under == (9689, 1196)
    assert r == 9697


def test_bit_table_length_checked():
    with pytest.raises(SieveFormatError):
        BitTable(11, b"\x00")


def test_dump_text_11():
    text = dump_table_text(build_sieve_set([11]), 11)
    lines = text.splitlines()
    assert lines[0] == "r=11"
    assert [ln.split(":")[1].strip() for ln in lines[1:]] == TABLE_11


def test_dump_text_2():
    text = dump_table_text(build_sieve_set([2, 3]), 2)
    assert [ln.split(":")[1].strip() for ln in text.splitlines()[1:]] == ["00", "00"]


def test_dump_text_absent():
    with pytest.raises(KeyError):
        dump_table_text(build_sieve_set([11]), 13)


def test_generation_deterministic():
    assert serialize(build_sieve_set([11, 13, 101])) == serialize(build_sieve_set([11, 13, 101]))
