"""Certificate search and verification for finite and unique completability.

A certificate partitions the pattern's columns into r groups (finite case) or
r+1 groups (unique case) and exhibits, per group, a linkage support whose
columns are (r+1)-subsets drawn from the supports of that group's pattern
columns. Verification is exact; the search is an exhaustive backtracking over
partitions and subset selections, complete at desk scale and budget-bounded
beyond it.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .patterns import ObservationPattern, column_subsets
from .slmf import Slmf, check_slmf_combinatorial

DEFAULT_BUDGET = 10**7


class _BudgetExhausted(Exception):
    pass


class _Budget:
    __slots__ = ("left",)

    def __init__(self, nodes: int) -> None:
        self.left = int(nodes)

    def spend(self) -> None:
        self.left -= 1
        if self.left < 0:
            raise _BudgetExhausted


@dataclass(frozen=True)
class SlmfWitness:
    """One group's linkage support plus the pattern column each subset came from."""

    supports: tuple[tuple[int, ...], ...]
    sources: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.supports) != len(self.sources):
            raise ValueError("each support needs exactly one source column")
        object.__setattr__(
            self, "supports", tuple(tuple(sorted(s)) for s in self.supports)
        )
        object.__setattr__(self, "sources", tuple(int(k) for k in self.sources))

    def as_slmf(self, m: int, r: int) -> Slmf:
        return Slmf(m=m, r=r, columns=self.supports)


@dataclass(frozen=True)
class Certificate:
    """Partition of the pattern columns plus one SLMF witness per group."""

    kind: str  # "finite" | "unique"
    partition: tuple[tuple[int, ...], ...]
    slmfs: tuple[SlmfWitness, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("finite", "unique"):
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if len(self.partition) != len(self.slmfs):
            raise ValueError("one SLMF witness is required per group")
        object.__setattr__(
            self, "partition", tuple(tuple(sorted(g)) for g in self.partition)
        )


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    failed_clause: Optional[str]  # "structure" | "i" | "ii"
    detail: str


def _expected_groups(kind: str, r: int) -> int:
    return r if kind == "finite" else r + 1


def verify_certificate(
    pattern: ObservationPattern, r: int, cert: Certificate
) -> VerificationResult:
    """Check every clause of a certificate; name the first failure."""
    groups = _expected_groups(cert.kind, r)
    if len(cert.partition) != groups:
        return VerificationResult(
            False, "structure", f"{cert.kind} certificate needs {groups} groups, got {len(cert.partition)}"
        )
    seen: set[int] = set()
    for group in cert.partition:
        for col in group:
            if col in seen:
                return VerificationResult(False, "structure", f"column {col + 1} appears in two groups")
            if not 0 <= col < pattern.n:
                return VerificationResult(False, "structure", f"column {col + 1} out of range")
            seen.add(col)
    if len(seen) != pattern.n:
        missing = sorted(set(range(pattern.n)) - seen)
        return VerificationResult(
            False, "structure", f"columns {[c + 1 for c in missing]} missing from the partition"
        )

    supports = pattern.column_supports()
    for j, omega in enumerate(supports):
        if len(omega) < r:
            return VerificationResult(
                False, "i", f"column {j + 1} has {len(omega)} observed rows, fewer than r={r}"
            )

    for nu, (group, witness) in enumerate(zip(cert.partition, cert.slmfs)):
        if len(witness.supports) != pattern.m - r:
            return VerificationResult(
                False,
                "ii",
                f"group {nu + 1}: expected {pattern.m - r} supports, got {len(witness.supports)}",
            )
        for support, source in zip(witness.supports, witness.sources):
            if source not in group:
                return VerificationResult(
                    False, "ii", f"group {nu + 1}: source column {source + 1} is not in the group"
                )
            if len(support) != r + 1:
                return VerificationResult(
                    False, "ii", f"group {nu + 1}: support {tuple(s + 1 for s in support)} has size != r+1"
                )
            if not set(support) <= set(supports[source]):
                return VerificationResult(
                    False,
                    "ii",
                    f"group {nu + 1}: support {tuple(s + 1 for s in support)} not contained "
                    f"in column {source + 1}",
                )
        if not witness.supports:
            continue  # m == r leaves nothing to check
        verdict = check_slmf_combinatorial(witness.as_slmf(pattern.m, r))
        if not verdict.is_slmf:
            return VerificationResult(
                False,
                "ii",
                f"group {nu + 1}: covering inequality fails at columns "
                f"{tuple(t + 1 for t in verdict.witness)}",
            )
    return VerificationResult(True, None, "all clauses hold")


@dataclass(frozen=True)
class SearchOutcome:
    """Result of a certificate search.

    ``exhausted`` records whether the whole search space was covered; a search
    that ran out of budget is inconclusive rather than negative.
    """

    certificate: Optional[Certificate]
    exhausted: bool
    nodes: int

    @property
    def status(self) -> str:
        if self.certificate is not None:
            return "found"
        return "none" if self.exhausted else "inconclusive"


def _lex_subsets_containing_first(rest: list[int]) -> Iterator[list[int]]:
    """Subsets of ``rest`` in lexicographic tuple order (empty set first)."""

    def gen(prefix: list[int], start: int) -> Iterator[list[int]]:
        yield prefix
        for idx in range(start, len(rest)):
            yield from gen(prefix + [rest[idx]], idx + 1)

    yield from gen([], 0)


def _partitions(columns: Sequence[int], groups: int, budget: _Budget) -> Iterator[list[tuple[int, ...]]]:
    """Partitions into ``groups`` nonempty parts, groups ordered by least member.

    Enumeration is lexicographic on the tuple of groups, so the partition
    whose leading groups are smallest in tuple order comes first.
    """
    columns = sorted(columns)
    if groups <= 0 or len(columns) < groups:
        return
    if groups == 1:
        yield [tuple(columns)]
        return
    first, rest = columns[0], columns[1:]
    for extra in _lex_subsets_containing_first(rest):
        budget.spend()
        if len(rest) - len(extra) < groups - 1:
            continue
        group = tuple([first] + extra)
        taken = set(extra)
        remaining = [c for c in rest if c not in taken]
        for tail in _partitions(remaining, groups - 1, budget):
            yield [group] + tail


def _group_pool(
    supports: Sequence[Sequence[int]], group: Sequence[int], r: int
) -> list[tuple[tuple[int, ...], int]]:
    """Deduplicated (subset, source column) pool for a group, lexicographic."""
    pool: dict[tuple[int, ...], int] = {}
    for k in sorted(group):
        if len(supports[k]) < r + 1:
            continue
        for subset in column_subsets(supports[k], r + 1):
            pool.setdefault(subset, k)
    return sorted(pool.items())


def _first_slmf_selection(
    pool: list[tuple[tuple[int, ...], int]], m: int, r: int, budget: _Budget
) -> Optional[SlmfWitness]:
    """Lexicographically first choice of m-r pool subsets forming an SLMF.

    Backtracking keeps, for the current partial selection, the union of every
    subfamily; a new subset is admitted only if all subfamilies containing it
    still cover enough rows, which is the covering inequality restricted to
    the chosen columns.
    """
    needed = m - r
    if needed == 0:
        return SlmfWitness(supports=(), sources=())
    if len(pool) < needed:
        return None
    masks = [sum(1 << i for i in subset) for subset, _ in pool]
    full = (1 << m) - 1
    suffix_union = [0] * (len(pool) + 1)
    for idx in range(len(pool) - 1, -1, -1):
        suffix_union[idx] = suffix_union[idx + 1] | masks[idx]
    if suffix_union[0] != full:
        # the complete family must cover every row
        return None

    chosen: list[int] = []
    # unions[t] / counts[t]: union and cardinality of the t-th subfamily of
    # the chosen columns, indexed by bitmask over selection order
    unions = [0]
    counts = [0]

    def extend(start: int) -> Optional[tuple[int, ...]]:
        if len(chosen) == needed:
            return tuple(chosen)
        for idx in range(start, len(pool)):
            budget.spend()
            remaining = needed - len(chosen) - 1
            if len(pool) - idx - 1 < remaining:
                break
            mask = masks[idx]
            union_all = unions[(1 << len(chosen)) - 1]
            if (suffix_union[idx] | union_all) != full:
                # rows missing from everything still available; later
                # candidates only shrink the reachable union
                break
            new_unions = [u | mask for u in unions]
            new_counts = [c + 1 for c in counts]
            if any(
                u.bit_count() < c + r
                for u, c in zip(new_unions, new_counts)
            ):
                continue
            chosen.append(idx)
            unions.extend(new_unions)
            counts.extend(new_counts)
            found = extend(idx + 1)
            if found is not None:
                return found
            chosen.pop()
            del unions[len(unions) // 2 :]
            del counts[len(counts) // 2 :]
        return None

    picked = extend(0)
    if picked is None:
        return None
    return SlmfWitness(
        supports=tuple(pool[idx][0] for idx in picked),
        sources=tuple(pool[idx][1] for idx in picked),
    )


def _find_certificate(
    pattern: ObservationPattern, r: int, kind: str, budget_nodes: int
) -> SearchOutcome:
    groups = _expected_groups(kind, r)
    supports = pattern.column_supports()
    budget = _Budget(budget_nodes)
    if any(len(omega) < r for omega in supports):
        return SearchOutcome(None, exhausted=True, nodes=0)
    memo: dict[frozenset[int], Optional[SlmfWitness]] = {}
    try:
        for partition in _partitions(range(pattern.n), groups, budget):
            witnesses = []
            for group in partition:
                key = frozenset(group)
                if key not in memo:
                    memo[key] = _first_slmf_selection(
                        _group_pool(supports, group, r), pattern.m, r, budget
                    )
                if memo[key] is None:
                    witnesses = None
                    break
                witnesses.append(memo[key])
            if witnesses is not None:
                cert = Certificate(
                    kind=kind, partition=tuple(partition), slmfs=tuple(witnesses)
                )
                return SearchOutcome(cert, exhausted=False, nodes=budget_nodes - budget.left)
    except _BudgetExhausted:
        return SearchOutcome(None, exhausted=False, nodes=budget_nodes)
    return SearchOutcome(None, exhausted=True, nodes=budget_nodes - budget.left)


def find_finite_certificate(
    pattern: ObservationPattern, r: int, budget: int = DEFAULT_BUDGET
) -> SearchOutcome:
    """Search for an r-group certificate of finite completability."""
    if not 1 <= r <= min(pattern.m, pattern.n):
        raise ValueError(f"rank r={r} out of range")
    return _find_certificate(pattern, r, "finite", budget)


def find_unique_certificate(
    pattern: ObservationPattern, r: int, budget: int = DEFAULT_BUDGET
) -> SearchOutcome:
    """Search for an (r+1)-group certificate of unique completability."""
    if not 1 <= r <= min(pattern.m, pattern.n):
        raise ValueError(f"rank r={r} out of range")
    return _find_certificate(pattern, r, "unique", budget)


@dataclass(frozen=True)
class RelaxedSlmfVerdict:
    """Outcome of the exact-size counting test.

    ``violating_rows`` is the first row set (smallest, then lexicographic)
    breaking the counting inequality, when one exists.
    """

    ok: bool
    reason: Optional[str]  # None | "size" | "inequality" | "equality"
    violating_rows: Optional[tuple[int, ...]]
    required_size: int
    actual_size: int


def check_relaxed_slmf(pattern: ObservationPattern, r: int) -> RelaxedSlmfVerdict:
    """Counting test for patterns of exact size r(m+n-r).

    Requires, for every row subset I with at least r+1 rows, that the observed
    surplus sum_j max(#(support_j intersect I) - r, 0) not exceed r(#I - r),
    with equality at the full row set.
    """
    if not 1 <= r <= min(pattern.m, pattern.n):
        raise ValueError(f"rank r={r} out of range")
    m, n = pattern.m, pattern.n
    required = r * (m + n - r)
    actual = pattern.size
    if actual != required:
        return RelaxedSlmfVerdict(False, "size", None, required, actual)
    support_masks = [
        sum(1 << i for i in omega) for omega in pattern.column_supports()
    ]
    for size in range(r + 1, m + 1):
        bound = r * (size - r)
        for rows in itertools.combinations(range(m), size):
            imask = sum(1 << i for i in rows)
            surplus = 0
            for smask in support_masks:
                inter = (smask & imask).bit_count()
                if inter > r:
                    surplus += inter - r
            if surplus > bound:
                return RelaxedSlmfVerdict(False, "inequality", rows, required, actual)
    total_surplus = sum(
        max(mask.bit_count() - r, 0) for mask in support_masks
    )
    if total_surplus != r * (m - r):
        return RelaxedSlmfVerdict(
            False, "equality", tuple(range(m)), required, actual
        )
    return RelaxedSlmfVerdict(True, None, None, required, actual)


@dataclass(frozen=True)
class NecessaryConditionVerdict:
    """Whether the pattern contains an exact-size sub-pattern passing the test.

    ``contains_relaxed`` is None when the search ran out of budget.
    """

    contains_relaxed: Optional[bool]
    witness: Optional[ObservationPattern]
    nodes: int


def check_necessary_condition(
    pattern: ObservationPattern, r: int, budget: int = DEFAULT_BUDGET
) -> NecessaryConditionVerdict:
    """Search for a size-r(m+n-r) sub-pattern passing the counting test.

    This is a necessary condition for finite completability, never claimed
    sufficient. When the pattern already has the exact size the search is a
    single direct check.
    """
    if not 1 <= r <= min(pattern.m, pattern.n):
        raise ValueError(f"rank r={r} out of range")
    target = r * (pattern.m + pattern.n - r)
    if pattern.size < target:
        return NecessaryConditionVerdict(False, None, 0)
    if pattern.size == target:
        verdict = check_relaxed_slmf(pattern, r)
        return NecessaryConditionVerdict(
            verdict.ok, pattern if verdict.ok else None, 1
        )
    excess = pattern.size - target
    entries = sorted(pattern.entries, key=lambda e: (e[1], e[0]))
    col_sizes = [len(omega) for omega in pattern.column_supports()]
    nodes = 0
    # any passing sub-pattern keeps every column at r or more entries, so only
    # removals respecting that can succeed
    for removal in itertools.combinations(entries, excess):
        nodes += 1
        if nodes > budget:
            return NecessaryConditionVerdict(None, None, nodes - 1)
        counts = list(col_sizes)
        feasible = True
        for _, j in removal:
            counts[j] -= 1
            if counts[j] < r:
                feasible = False
                break
        if not feasible:
            continue
        candidate = pattern.restrict(pattern.entries - set(removal))
        if check_relaxed_slmf(candidate, r).ok:
            return NecessaryConditionVerdict(True, candidate, nodes)
    return NecessaryConditionVerdict(False, None, nodes)


def certificate_to_json(cert: Certificate) -> str:
    payload = {
        "kind": cert.kind,
        "partition": [[c + 1 for c in group] for group in cert.partition],
        "slmfs": [
            {
                "columns": [
                    {"support": [i + 1 for i in support], "source_column": source + 1}
                    for support, source in zip(w.supports, w.sources)
                ]
            }
            for w in cert.slmfs
        ],
    }
    return json.dumps(payload)


def certificate_from_json(text: str) -> Certificate:
    payload = json.loads(text)
    partition = tuple(tuple(int(c) - 1 for c in group) for group in payload["partition"])
    slmfs = tuple(
        SlmfWitness(
            supports=tuple(
                tuple(int(i) - 1 for i in col["support"]) for col in item["columns"]
            ),
            sources=tuple(int(col["source_column"]) - 1 for col in item["columns"]),
        )
        for item in payload["slmfs"]
    )
    return Certificate(kind=str(payload["kind"]), partition=partition, slmfs=slmfs)
