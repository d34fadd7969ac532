"""Status codes for starting/stopping a search and the start-point checks."""

from __future__ import annotations

from enum import IntEnum

from .region import P_LIMIT_32BIT, SPLIT_P, q_bounds


class Code(IntEnum):
    OK = 0
    ALREADY_RUNNING = 1
    P_BELOW_SPLIT = 2
    P_ABOVE_LIMIT = 3
    Q_BELOW_LOWER = 4
    Q_ABOVE_UPPER = 5
    NOT_LOADED = 6


# Code 1 doubles as "not running" for stop and "search still running" for release.
NOT_RUNNING = Code.ALREADY_RUNNING


class SearchError(Exception):
    def __init__(self, code: Code, message: str):
        super().__init__(message)
        self.code = Code(code)


def check_start_point(p: int, q: int, p_limit: int = P_LIMIT_32BIT, small_p: bool = False) -> Code:
    """Region checks on a start/resume point, in the order 2, 3, 4, 5."""
    if p < 1 or (p < SPLIT_P and not small_p):
        return Code.P_BELOW_SPLIT
    if p > p_limit:
        return Code.P_ABOVE_LIMIT
    bounds = q_bounds(p)
    if q < bounds.q_low:
        return Code.Q_BELOW_LOWER
    if q > bounds.q_high:
        return Code.Q_ABOVE_UPPER
    return Code.OK


def require_start_point(p: int, q: int, p_limit: int = P_LIMIT_32BIT, small_p: bool = False) -> None:
    code = check_start_point(p, q, p_limit, small_p)
    if code:
        raise SearchError(code, f"start point (p={p}, q={q}) rejected: {code.name}")
