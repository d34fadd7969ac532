import pytest

from cuboid_sieve import sievetable

# Unsolvability bits for r = 11, rows p = 0..10, columns q = 0..10.
TABLE_11 = [
    "00000000000",
    "00111111110",
    "01011111101",
    "01101111011",
    "01110110111",
    "01111001111",
    "01111001111",
    "01110110111",
    "01101111011",
    "01011111101",
    "00111111110",
]

_acceptance_lines = []


@pytest.fixture(scope="session")
def default_sieve():
    s = sievetable.build_sieve_set()
    s.matrices
    return s


@pytest.fixture(scope="session")
def default_files(tmp_path_factory, default_sieve):
    d = tmp_path_factory.mktemp("sieve")
    tables, index = d / "Cuboid_pq_bit_tables.bin", d / "Cuboid_primes.bin"
    sievetable.write_files(default_sieve, tables, index)
    return tables, index


@pytest.fixture(scope="session")
def oracle_tables():
    """Brute-force tables for every prime up to 97, built once."""
    return {r: sievetable.build_table_oracle(r) for r in sievetable.primes_between(2, 97)}


@pytest.fixture
def acceptance():
    def record(number, name, ok, detail=""):
        _acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {name} {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
