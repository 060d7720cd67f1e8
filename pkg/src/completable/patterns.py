"""Observation patterns: the 0/1 masks whose completability the library analyzes.

A pattern is a set of observed (row, column) positions of an m-by-n matrix.
Indices are 0-based everywhere inside the library; every textual or JSON
interface speaks 1-based, matching the usual mathematical convention.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np


class PatternFormatError(ValueError):
    """A pattern grid or JSON document could not be parsed."""


@dataclass(frozen=True)
class ObservationPattern:
    """An m-by-n observation mask stored as 0-based (row, column) pairs."""

    m: int
    n: int
    entries: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.m <= 0 or self.n <= 0:
            raise ValueError(f"dimensions must be positive, got {self.m} x {self.n}")
        entries = frozenset((int(i), int(j)) for i, j in self.entries)
        for i, j in entries:
            if not (0 <= i < self.m and 0 <= j < self.n):
                raise ValueError(f"entry ({i}, {j}) outside a {self.m} x {self.n} grid")
        object.__setattr__(self, "entries", entries)

    @property
    def size(self) -> int:
        return len(self.entries)

    def column_support(self, j: int) -> tuple[int, ...]:
        """Sorted observed row indices of column ``j``."""
        if not 0 <= j < self.n:
            raise ValueError(f"column {j} out of range")
        return tuple(sorted(i for i, jj in self.entries if jj == j))

    def column_supports(self) -> tuple[tuple[int, ...], ...]:
        rows: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.entries:
            rows[j].append(i)
        return tuple(tuple(sorted(r)) for r in rows)

    def empty_columns(self) -> tuple[int, ...]:
        supports = self.column_supports()
        return tuple(j for j in range(self.n) if not supports[j])

    def sorted_entries(self) -> list[tuple[int, int]]:
        return sorted(self.entries)

    def without_entry(self, entry: tuple[int, int]) -> "ObservationPattern":
        if entry not in self.entries:
            raise ValueError(f"entry {entry} not observed")
        return ObservationPattern(self.m, self.n, self.entries - {entry})

    def restrict(self, keep: Iterable[tuple[int, int]]) -> "ObservationPattern":
        """Sub-pattern on the same grid containing only ``keep`` entries."""
        keep = frozenset(keep)
        if not keep <= self.entries:
            raise ValueError("restriction is not a subset of the observed entries")
        return ObservationPattern(self.m, self.n, keep)


def parse_pattern(text: str) -> ObservationPattern:
    """Parse an ASCII 0/1 grid, one matrix row per line.

    Raises:
        PatternFormatError: on empty input, ragged lines or characters other
            than ``0``/``1``; the message names the offending line and column
            (1-based).
    """
    lines = [line for line in text.splitlines() if line.strip() != ""]
    if not lines:
        raise PatternFormatError("empty pattern: no grid lines found")
    width = len(lines[0])
    entries = set()
    for i, line in enumerate(lines):
        if len(line) != width:
            raise PatternFormatError(
                f"line {i + 1}: expected {width} characters, got {len(line)}"
            )
        for j, ch in enumerate(line):
            if ch == "1":
                entries.add((i, j))
            elif ch != "0":
                raise PatternFormatError(
                    f"line {i + 1}, column {j + 1}: illegal character {ch!r}"
                )
    return ObservationPattern(len(lines), width, frozenset(entries))


def pattern_to_grid(pattern: ObservationPattern) -> str:
    rows = []
    for i in range(pattern.m):
        rows.append(
            "".join("1" if (i, j) in pattern.entries else "0" for j in range(pattern.n))
        )
    return "\n".join(rows) + "\n"


def pattern_to_json(pattern: ObservationPattern) -> str:
    """JSON form with 1-based entries, sorted for reproducible output."""
    payload = {
        "m": pattern.m,
        "n": pattern.n,
        "entries": [[i + 1, j + 1] for i, j in pattern.sorted_entries()],
    }
    return json.dumps(payload)


def pattern_from_json(text: str) -> ObservationPattern:
    try:
        payload = json.loads(text)
        m, n = int(payload["m"]), int(payload["n"])
        entries = frozenset((int(i) - 1, int(j) - 1) for i, j in payload["entries"])
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise PatternFormatError(f"bad pattern JSON: {exc}") from exc
    try:
        return ObservationPattern(m, n, entries)
    except ValueError as exc:
        raise PatternFormatError(str(exc)) from exc


def load_pattern(text: str) -> ObservationPattern:
    """Parse either the grid or the JSON pattern format, by sniffing."""
    if text.lstrip().startswith("{"):
        return pattern_from_json(text)
    return parse_pattern(text)


def column_subsets(omega: Iterable[int], k: int) -> list[tuple[int, ...]]:
    """All size-``k`` subsets of ``omega`` in lexicographic order.

    Empty when ``omega`` has fewer than ``k`` elements. Lexicographic order on
    sorted elements is the one global subset order used across the library.
    """
    if k <= 0:
        raise ValueError(f"subset size must be positive, got {k}")
    return list(itertools.combinations(sorted(omega), k))


def random_pattern(m: int, n: int, k: int, seed=0) -> ObservationPattern:
    """Pattern with a uniformly random size-``k`` support per column.

    Columns are drawn independently; the result is deterministic per seed.
    """
    if m <= 0 or n <= 0:
        raise ValueError(f"dimensions must be positive, got {m} x {n}")
    if not 0 < k <= m:
        raise ValueError(f"per-column entry count k={k} must satisfy 1 <= k <= m={m}")
    rng = np.random.default_rng(seed)
    entries = set()
    for j in range(n):
        for i in rng.choice(m, size=k, replace=False):
            entries.add((int(i), j))
    return ObservationPattern(m, n, frozenset(entries))


@dataclass(frozen=True)
class MinimumSizeCheck:
    """Comparison of the observed count against the r(m+n-r) lower bound."""

    required: int
    actual: int
    passed: bool


def minimum_size_check(pattern: ObservationPattern, r: int) -> MinimumSizeCheck:
    """Check #entries >= r(m+n-r), the dimension of the rank-<=r variety.

    Any pattern observing fewer positions admits infinitely many rank-r
    completions, so this is the cheapest necessary test.
    """
    if not 1 <= r <= min(pattern.m, pattern.n):
        raise ValueError(f"rank r={r} out of range for a {pattern.m} x {pattern.n} pattern")
    required = r * (pattern.m + pattern.n - r)
    actual = pattern.size
    return MinimumSizeCheck(required=required, actual=actual, passed=actual >= required)
