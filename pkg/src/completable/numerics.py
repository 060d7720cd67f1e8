"""Generic sampling, numerical rank tests, exact completion, and system export.

Genericity is realized by standard-normal sampling plus explicit nondegeneracy
checks; a randomly drawn subspace misses the bad loci with probability 1.
Numerical ranks count singular values above a relative tolerance and demand a
visible spectral gap, reporting an indeterminate outcome instead of guessing
when the spectrum is ambiguous.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .patterns import ObservationPattern
from .plucker import SubspaceBasis, index_subsets, subset_position

DEFAULT_RANK_TOL = 1e-9
SPECTRAL_GAP = 1e3
FD_STEP = 1e-6
FD_CHECK_STEP = 1e-7
FD_AGREEMENT = 1e-4
CONSISTENCY_RTOL = 1e-6
GENERIC_RETRIES = 5


def _trial_seeds(seed, trials: int) -> list[np.random.SeedSequence]:
    """Independent per-trial seeds split from one master seed."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return seed.spawn(trials)


class DegenerateProjectionError(RuntimeError):
    """A column support projects the subspace below dimension r."""


class InconsistentObservationError(RuntimeError):
    """Observed values are not explained by the given column space."""


class SectionTestError(RuntimeError):
    """The tangent-space test could not set up its functionals."""


class ObservedMatrixFormatError(ValueError):
    """A values file could not be parsed."""


@dataclass(frozen=True)
class ObservedMatrix:
    """Values attached to exactly the observed positions of a pattern."""

    pattern: ObservationPattern
    values: Mapping[tuple[int, int], float]

    def __post_init__(self) -> None:
        values = {(int(i), int(j)): float(v) for (i, j), v in self.values.items()}
        if set(values) != set(self.pattern.entries):
            raise ValueError("values must be defined exactly on the observed entries")
        object.__setattr__(self, "values", values)

    def column(self, j: int) -> tuple[tuple[int, ...], np.ndarray]:
        omega = self.pattern.column_support(j)
        return omega, np.array([self.values[(i, j)] for i in omega])

    @classmethod
    def from_matrix(cls, X: np.ndarray, pattern: ObservationPattern) -> "ObservedMatrix":
        X = np.asarray(X, dtype=float)
        if X.shape != (pattern.m, pattern.n):
            raise ValueError(f"matrix shape {X.shape} does not match the pattern")
        return cls(pattern, {(i, j): X[i, j] for i, j in pattern.entries})


def observed_from_csv(text: str) -> ObservedMatrix:
    """Parse a CSV with ``*`` marking unobserved cells; dimensions inferred."""
    rows = [line for line in text.splitlines() if line.strip() != ""]
    if not rows:
        raise ObservedMatrixFormatError("empty values file")
    cells = [[c.strip() for c in row.split(",")] for row in rows]
    width = len(cells[0])
    entries = set()
    values = {}
    for i, row in enumerate(cells):
        if len(row) != width:
            raise ObservedMatrixFormatError(
                f"line {i + 1}: expected {width} cells, got {len(row)}"
            )
        for j, cell in enumerate(row):
            if cell == "*":
                continue
            try:
                values[(i, j)] = float(cell)
            except ValueError as exc:
                raise ObservedMatrixFormatError(
                    f"line {i + 1}, column {j + 1}: bad value {cell!r}"
                ) from exc
            entries.add((i, j))
    pattern = ObservationPattern(len(cells), width, frozenset(entries))
    return ObservedMatrix(pattern, values)


def observed_to_csv(obs: ObservedMatrix) -> str:
    lines = []
    for i in range(obs.pattern.m):
        cells = []
        for j in range(obs.pattern.n):
            cells.append(repr(float(obs.values[(i, j)])) if (i, j) in obs.values else "*")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def numerical_rank(
    singular_values: np.ndarray, tol: float = DEFAULT_RANK_TOL, gap: float = SPECTRAL_GAP
) -> tuple[int, bool]:
    """Count singular values above ``tol * s_max``; flag ambiguous spectra.

    Returns (rank, determinate). The call is determinate when either nothing
    was discarded or the last kept value exceeds the first discarded one by
    the required spectral gap.
    """
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] == 0:
        return 0, True
    threshold = tol * s[0]
    rank = int((s > threshold).sum())
    if rank == s.size:
        return rank, True
    if rank == 0:
        return 0, True
    first_discarded = s[rank]
    if first_discarded == 0:
        return rank, True
    return rank, bool(s[rank - 1] / first_discarded >= gap)


@dataclass(frozen=True)
class RankReport:
    """Outcome of a randomized generic-rank measurement."""

    tested_rank: int
    target: int
    trials: int
    pass_count: int
    tolerance: float
    indeterminate: int = 0

    def __post_init__(self) -> None:
        if self.pass_count > self.trials:
            raise ValueError("pass_count exceeds trials")
        if self.tested_rank > self.target:
            raise ValueError("measured rank exceeds the dimension bound")

    @property
    def passed(self) -> bool:
        return self.tested_rank == self.target and self.pass_count >= 1

    @property
    def determinate(self) -> bool:
        return self.indeterminate < self.trials


def sample_generic_subspace(m: int, r: int, seed=0) -> SubspaceBasis:
    """Basis with independent standard-normal entries; deterministic per seed."""
    if not 1 <= r <= m:
        raise ValueError(f"need 1 <= r <= m, got r={r}, m={m}")
    rng = np.random.default_rng(seed)
    return SubspaceBasis(rng.standard_normal((m, r)))


def _pivot_rows(M: np.ndarray, r: int) -> list[int]:
    """Greedy volume-maximizing choice of r rows (pivoted orthogonalization)."""
    work = np.array(M, dtype=float)
    chosen: list[int] = []
    for _ in range(r):
        norms = np.linalg.norm(work, axis=1)
        for c in chosen:
            norms[c] = -1.0
        k = int(np.argmax(norms))
        if norms[k] <= 0:
            break
        chosen.append(k)
        direction = work[k] / np.linalg.norm(work[k])
        work = work - np.outer(work @ direction, direction)
    return sorted(chosen)


def complete_column(
    basis: SubspaceBasis,
    omega: Sequence[int],
    observed: Mapping[int, float],
    rtol: float = CONSISTENCY_RTOL,
) -> np.ndarray:
    """The unique subspace vector matching the observations on ``omega``.

    Solves an r x r system on a well-conditioned size-r subset of ``omega``
    and validates the remaining observed positions against the result.

    Raises:
        DegenerateProjectionError: the projection onto ``omega`` has rank < r.
        InconsistentObservationError: observations disagree with the subspace.
    """
    omega = sorted(int(i) for i in omega)
    if set(observed) != set(omega):
        raise ValueError("observed values must cover exactly the support")
    B = basis.matrix
    proj = B[omega]
    s = np.linalg.svd(proj, compute_uv=False)
    if s.size < basis.r or s[-1] <= DEFAULT_RANK_TOL * (s[0] if s.size else 0):
        raise DegenerateProjectionError("projection drops dimension")
    pick = _pivot_rows(proj, basis.r)
    psi = [omega[t] for t in pick]
    x_psi = np.array([observed[i] for i in psi])
    v = B @ np.linalg.solve(B[psi], x_psi)
    x_omega = np.array([observed[i] for i in omega])
    scale = max(1.0, float(np.abs(x_omega).max()), float(np.abs(v).max()))
    residual = float(np.abs(v[omega] - x_omega).max())
    if residual > rtol * scale:
        raise InconsistentObservationError(
            f"not in projected subspace (residual {residual:.3g})"
        )
    return v


def complete_matrix(
    obs: ObservedMatrix, basis: SubspaceBasis, rtol: float = CONSISTENCY_RTOL
) -> np.ndarray:
    """Column-by-column completion from a known column space."""
    pattern = obs.pattern
    if basis.m != pattern.m:
        raise ValueError(f"basis has {basis.m} rows, pattern has {pattern.m}")
    X = np.zeros((pattern.m, pattern.n))
    for j in range(pattern.n):
        omega, x = obs.column(j)
        try:
            X[:, j] = complete_column(basis, omega, dict(zip(omega, x)), rtol=rtol)
        except (DegenerateProjectionError, InconsistentObservationError, ValueError) as exc:
            raise type(exc)(f"column {j + 1}: {exc}") from exc
    return X


def jacobian_rank_test(
    pattern: ObservationPattern,
    r: int,
    trials: int = 5,
    seed=0,
    tol: float = DEFAULT_RANK_TOL,
) -> RankReport:
    """Rank of the differential of the observed bilinear factorization map.

    Samples factor pairs (A, C) with normal entries and measures the rank of
    the Jacobian of (A, C) -> observed entries of A @ C. A measured rank of
    r(m+n-r) witnesses that the observed projection has full-dimensional
    image, the tangent criterion for generic finite completability.
    """
    if not 1 <= r <= min(pattern.m, pattern.n):
        raise ValueError(f"rank r={r} out of range")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    m, n = pattern.m, pattern.n
    target = r * (m + n - r)
    entries = pattern.sorted_entries()
    best = 0
    passes = 0
    indeterminate = 0
    for child in _trial_seeds(seed, trials):
        rng = np.random.default_rng(child)
        A = rng.standard_normal((m, r))
        C = rng.standard_normal((r, n))
        J = np.zeros((len(entries), r * (m + n)))
        for row, (i, j) in enumerate(entries):
            J[row, i * r : (i + 1) * r] = C[:, j]
            J[row, m * r + j * r : m * r + (j + 1) * r] = A[i, :]
        if len(entries) == 0:
            rank, ok = 0, True
        else:
            rank, ok = numerical_rank(np.linalg.svd(J, compute_uv=False), tol=tol)
        if not ok:
            indeterminate += 1
            continue
        best = max(best, rank)
        if rank == target:
            passes += 1
    return RankReport(
        tested_rank=best,
        target=target,
        trials=trials,
        pass_count=passes,
        tolerance=tol,
        indeterminate=indeterminate,
    )


def _needed_minors(funcs: Sequence[tuple[int, tuple[int, ...]]]):
    """Unique r-subsets appearing in the given section functionals."""
    needed: dict[tuple[int, ...], int] = {}
    for _, phi in funcs:
        for i in phi:
            rest = tuple(x for x in phi if x != i)
            needed.setdefault(rest, len(needed))
    return needed


def grassmann_section_rank_test(
    pattern: ObservationPattern,
    r: int,
    trials: int = 3,
    seed=0,
    tol: float = DEFAULT_RANK_TOL,
) -> RankReport:
    """Tangent-space rank of the hyperplane-section system on the Grassmannian.

    A generic subspace is drawn in a local chart (identity block on r random
    rows, free coordinates elsewhere), consistent observations are sampled
    from it, and each column contributes (#support - r) section functionals
    anchored at a well-conditioned base subset. The functionals vanish at the
    drawn subspace; the test differentiates them with central finite
    differences in the chart coordinates and measures the rank. Full rank
    r(m-r) means the sections pin the subspace down to isolated points.

    Raises:
        SectionTestError: a column support cannot yield a nondegenerate base
            subset (named in the message).
    """
    if not 1 <= r < pattern.m:
        raise ValueError(f"rank r={r} out of range for {pattern.m} rows")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    m, n = pattern.m, pattern.n
    supports = pattern.column_supports()
    for j, omega in enumerate(supports):
        if len(omega) < r:
            raise SectionTestError(
                f"column {j + 1} has {len(omega)} observed rows, fewer than r={r}"
            )
    if pattern.size != r * (m + n - r):
        warnings.warn(
            f"pattern has {pattern.size} entries, not the exact-size "
            f"{r * (m + n - r)}; the section count differs from r(m-r)",
            stacklevel=2,
        )
    target = r * (m - r)
    nparams = (m - r) * r
    if sum(max(len(omega) - r, 0) for omega in supports) == 0:
        # no column yields a section functional, the system is empty
        return RankReport(
            tested_rank=0,
            target=target,
            trials=trials,
            pass_count=trials if target == 0 else 0,
            tolerance=tol,
        )
    best = 0
    passes = 0
    indeterminate = 0
    for child in _trial_seeds(seed, trials):
        rng = np.random.default_rng(child)
        perm, C0, coeff, minor_subsets = _draw_section_setup(pattern, r, rng, supports)

        def chart_basis(C: np.ndarray) -> np.ndarray:
            B = np.empty((m, r))
            B[perm] = np.vstack([np.eye(r), C])
            return B

        def section_values(C: np.ndarray) -> np.ndarray:
            B = chart_basis(C)
            minors = np.linalg.det(B[minor_subsets])
            return coeff @ minors

        def jacobian(step: float) -> np.ndarray:
            J = np.zeros((coeff.shape[0], nparams))
            for p in range(nparams):
                a, b = divmod(p, r)
                Cp = C0.copy()
                Cp[a, b] += step
                Cm = C0.copy()
                Cm[a, b] -= step
                J[:, p] = (section_values(Cp) - section_values(Cm)) / (2 * step)
            return J

        J1 = jacobian(FD_STEP)
        J2 = jacobian(FD_CHECK_STEP)
        denom = max(float(np.linalg.norm(J1)), 1e-300)
        if float(np.linalg.norm(J1 - J2)) / denom > FD_AGREEMENT:
            indeterminate += 1
            continue
        rank, ok = numerical_rank(np.linalg.svd(J1, compute_uv=False), tol=tol)
        if not ok:
            indeterminate += 1
            continue
        best = max(best, rank)
        if rank == target:
            passes += 1
    return RankReport(
        tested_rank=best,
        target=target,
        trials=trials,
        pass_count=passes,
        tolerance=tol,
        indeterminate=indeterminate,
    )


def _draw_section_setup(pattern, r, rng, supports):
    """Draw a chart, a subspace, and consistent data; build the functionals.

    Retries a few times until every column support projects the drawn
    subspace without dropping dimension; raises when a column can never work.
    """
    m = pattern.m
    offending = None
    for _ in range(GENERIC_RETRIES):
        perm = rng.permutation(m)
        C0 = rng.standard_normal((m - r, r))
        B0 = np.empty((m, r))
        B0[perm] = np.vstack([np.eye(r), C0])
        psis = []
        offending = None
        for j, omega in enumerate(supports):
            proj = B0[list(omega)]
            s = np.linalg.svd(proj, compute_uv=False)
            if s[-1] <= DEFAULT_RANK_TOL * s[0]:
                offending = j
                break
            psis.append([omega[t] for t in _pivot_rows(proj, r)])
        if offending is not None:
            continue
        funcs: list[tuple[int, tuple[int, ...]]] = []
        xs = {}
        for j, omega in enumerate(supports):
            xs[j] = B0 @ rng.standard_normal(r)
            for k in omega:
                if k not in psis[j]:
                    funcs.append((j, tuple(sorted(psis[j] + [k]))))
        minor_pos = _needed_minors(funcs)
        minor_subsets = np.array(list(minor_pos), dtype=np.intp)
        coeff = np.zeros((len(funcs), len(minor_pos)))
        for row, (j, phi) in enumerate(funcs):
            for k, i in enumerate(phi):
                rest = tuple(x for x in phi if x != i)
                coeff[row, minor_pos[rest]] += (-1) ** k * xs[j][i]
        return perm, C0, coeff, minor_subsets
    raise SectionTestError(
        f"no nondegenerate base subset for column {offending + 1} "
        f"after {GENERIC_RETRIES} draws"
    )


@dataclass(frozen=True)
class ExportedSystem:
    """Linear part of the hyperplane-section system in Plucker coordinates.

    One row per column j and per (r+1)-subset of its support, over the
    lexicographic subset order. The quadratic relations cutting out the
    Grassmannian are intentionally not included.
    """

    m: int
    r: int
    matrix: np.ndarray
    row_origin: tuple[tuple[int, tuple[int, ...]], ...]

    @property
    def subsets(self) -> tuple[tuple[int, ...], ...]:
        return index_subsets(self.m, self.r)

    def to_csv(self) -> str:
        lines = [",".join(repr(float(v)) for v in row) for row in self.matrix]
        return "\n".join(lines) + ("\n" if lines else "")

    def index_map(self) -> dict:
        return {
            "m": self.m,
            "r": self.r,
            "plucker_subsets": [[i + 1 for i in s] for s in self.subsets],
            "rows": [
                {"column": j + 1, "phi": [i + 1 for i in phi]}
                for j, phi in self.row_origin
            ],
        }

    def index_map_json(self) -> str:
        return json.dumps(self.index_map())


def export_plucker_system(obs: ObservedMatrix, r: int) -> ExportedSystem:
    """Stack every section functional of the observed matrix into one system.

    The ground-truth column space's Plucker vector lies in the null space of
    the exported matrix; columns with exactly r observations contribute no
    rows.
    """
    pattern = obs.pattern
    if not 1 <= r <= pattern.m:
        raise ValueError(f"rank r={r} out of range for {pattern.m} rows")
    pos = subset_position(pattern.m, r)
    rows = []
    origin = []
    for j in range(pattern.n):
        omega, x = obs.column(j)
        lookup = dict(zip(omega, x))
        for phi in itertools.combinations(omega, r + 1):
            row = np.zeros(len(pos))
            for k, i in enumerate(phi):
                rest = tuple(t for t in phi if t != i)
                row[pos[rest]] = (-1) ** k * lookup[i]
            rows.append(row)
            origin.append((j, phi))
    matrix = np.array(rows) if rows else np.zeros((0, len(pos)))
    return ExportedSystem(m=pattern.m, r=r, matrix=matrix, row_origin=tuple(origin))
