"""Modulo-primes sieve search for perfect cuboids of the second-conjecture family."""

from .engine import SearchController, ScanStats, scan, verify_small_region
from .modpoly import SearchPair, eval_q_exact, eval_q_mod, q_coefficients_exact
from .region import pair_count_estimate, p_limit_32bit, q_bounds
from .sievetable import SieveSet, build_sieve_set, build_table, load, serialize
from .verify import verify_pair

__version__ = "0.1.0"
