"""Residues along a one-parameter deformation ``X_t`` as ``t -> t0``.

Individual point residues may blow up as singular points collide, but the
sum over the points that converge into one connected component of the
limiting singular set has a finite limit equal to the residue of that
component. This module sweeps a geometric grid of parameter values,
follows every singular point as a path, groups paths by their limit and
extrapolates the grouped sums.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .polycore import MultiPoly, is_homogeneous, poly_eval
from .projfield import (
    AffineVectorField,
    ChartVisibilityError,
    ProjectivePoint,
    chart_point_to_projective,
    point_to_chart,
    projective_distance,
)
from .residue import ChernMonomial, DegenerateSingularityError, bb_residue
from .solver import PathResult, Singularity, SingularSet, TrackerSettings, singular_set

log = logging.getLogger(__name__)

__all__ = [
    "ComponentGroup",
    "DeformationFamily",
    "GroupedSeries",
    "LimitEstimate",
    "SingularityPath",
    "SweepResult",
    "group_paths",
    "grouped_residues",
    "limit_estimate",
    "sweep",
]

NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class DeformationFamily:
    """``field`` sampled at ``t_k = t0 + (t_start - t0) * ratio**k``, ``k < count``."""

    field: AffineVectorField
    t_start: float
    ratio: float
    count: int
    t0: float = 0.0
    parameter: str = "t"

    def __post_init__(self):
        if self.t_start == self.t0:
            raise ValueError("t_start must differ from the target value t0")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.count < 3:
            raise ValueError("extrapolation requires at least 3 points")

    @property
    def grid(self) -> list[float]:
        return [self.t0 + (self.t_start - self.t0) * self.ratio**k for k in range(self.count)]


@dataclass
class SingularityPath:
    id: int
    samples: list[tuple[float, Singularity]] = field(default_factory=list)
    status: str = "converged"  # converged | merged | escaped
    merged_at: float | None = None
    limit_point: ProjectivePoint | None = None
    limit_error: float | None = None

    def at(self, t: float) -> Singularity | None:
        for tk, s in self.samples:
            if tk == t:
                return s
        return None

    @property
    def last(self) -> Singularity:
        return self.samples[-1][1]


@dataclass
class SweepResult:
    family: DeformationFamily
    grid: list[float]
    paths: list[SingularityPath]
    sets: list[SingularSet]
    failures: dict[float, list[tuple[int, PathResult]]]


@dataclass(frozen=True)
class LimitEstimate:
    limit: complex
    error: float
    levels: int = 0
    exponent: float | None = None


def _fit_exponent(ts: np.ndarray, vs: np.ndarray, floor: float) -> float | None:
    """Leading exponent ``alpha`` in ``v(t) = L + a t**alpha + ...`` from the tail.

    Successive differences shrink by ``(t_k / t_(k-1))**alpha``; the last
    triple whose differences stand clear of the noise floor is used. A
    value within 0.1 of a fraction with denominator at most 4 is snapped
    to it, since the exponents met in practice are such fractions.
    """
    d = np.diff(vs)
    alpha = None
    for k in range(1, len(d)):
        if abs(d[k]) > 100 * floor and abs(d[k - 1]) > 100 * floor:
            alpha = float(np.log(abs(d[k] / d[k - 1])) / np.log(ts[k + 1] / ts[k]))
    if alpha is None:
        return None
    snapped = Fraction(alpha).limit_denominator(4)
    if abs(alpha - snapped) < 0.1 and snapped > 0:
        return float(snapped)
    return alpha


def limit_estimate(
    series: Sequence[tuple[float, complex]],
    t0: float = 0.0,
    exponent: float | None = None,
) -> LimitEstimate:
    """Extrapolate ``v(t)`` to ``t -> t0``.

    Assumes ``v(t) = L + a_1 s + a_2 s**2 + ...`` with ``s = |t - t0|**alpha``.
    The exponent is fitted from the tail of the series, then the values
    are extrapolated to ``s = 0`` by Neville's scheme (Richardson
    extrapolation). Among the diagonal estimates using the last ``j + 1``
    points, the one that changed least from the previous order is
    returned, with that change as its error. A series that grows instead
    of settling gets an infinite error. Passing ``exponent`` skips the fit.
    """
    if len(series) < 3:
        raise ValueError("extrapolation requires at least 3 points")
    ts = np.array([abs(t - t0) for t, _ in series], dtype=float)
    vs = np.array([complex(v) for _, v in series])
    if np.any(ts <= 0) or np.any(np.diff(ts) >= 0):
        raise ValueError("series must approach t0 strictly monotonically")
    floor = NOISE_FLOOR * max(1.0, float(np.max(np.abs(vs))))
    if abs(vs[-1] - vs[-2]) <= floor and abs(vs[-2] - vs[-3]) <= floor:
        return LimitEstimate(complex(vs[-1]), float(abs(vs[-1] - vs[-2])), 0)
    alpha = exponent if exponent is not None else _fit_exponent(ts, vs, floor)
    if alpha is None or alpha <= 0.05:
        return LimitEstimate(complex(vs[-1]), float("inf"), 0, alpha)

    s = ts**alpha
    n = len(vs)
    # Neville at 0: row holds extrapolants ending at the newest point
    table = vs.copy()
    estimates = [vs[-1]]
    for j in range(1, n):
        nxt = np.empty(n - j, dtype=complex)
        for i in range(n - j):
            nxt[i] = (s[i] * table[i + 1] - s[i + j] * table[i]) / (s[i] - s[i + j])
        table = nxt
        estimates.append(table[-1])
    changes = [abs(estimates[j] - estimates[j - 1]) for j in range(1, n)]
    best = int(np.argmin(changes)) + 1
    return LimitEstimate(complex(estimates[best]), float(max(changes[best - 1], floor)), best, alpha)


# -- sweep -----------------------------------------------------------------------

def sweep(family: DeformationFamily, settings: TrackerSettings | None = None) -> SweepResult:
    """Solve at every grid value and stitch the points into paths.

    A path takes the nearest new point within ``10 x`` the largest
    single-step motion seen so far. Two paths claiming one point are both
    marked ``merged``; points nobody claims start new paths; paths that
    find nothing are ``escaped``.
    """
    settings = settings or TrackerSettings()
    grid = family.grid
    sets = []
    failures = {}
    for t in grid:
        s = singular_set(family.field, t, settings)
        sets.append(s)
        if s.failures:
            failures[t] = s.failures
            log.warning("t=%g: %d path failure(s)", t, len(s.failures))

    paths: list[SingularityPath] = []
    max_motion = 0.0
    for k, (t, sset) in enumerate(zip(grid, sets)):
        points = list(sset.points)
        if k == 0:
            for p in points:
                paths.append(SingularityPath(len(paths), [(t, p)]))
            continue
        prev_t = grid[k - 1]
        active = [p for p in paths if p.samples[-1][0] == prev_t and p.status != "escaped"]
        threshold = 10 * max_motion if max_motion > 0 else 1.0
        threshold = max(threshold, settings.dedup_tol)
        claims: dict[int, list[tuple[SingularityPath, float]]] = {}
        for path in active:
            if not points:
                break
            dists = [projective_distance(path.last.point, p.point) for p in points]
            j = int(np.argmin(dists))
            if dists[j] <= threshold:
                claims.setdefault(j, []).append((path, dists[j]))
        claimed_paths = set()
        for j, claimants in claims.items():
            for path, dist in claimants:
                path.samples.append((t, points[j]))
                claimed_paths.add(path.id)
                max_motion = max(max_motion, dist)
                if len(claimants) > 1:
                    path.status = "merged"
                    if path.merged_at is None:
                        path.merged_at = t
        for path in active:
            if path.id not in claimed_paths:
                path.status = "escaped"
        for j, p in enumerate(points):
            if j not in claims:
                paths.append(SingularityPath(len(paths), [(t, p)]))

    for path in paths:
        path.limit_point, path.limit_error = _path_limit(path, family.t0)
    return SweepResult(family, grid, paths, sets, failures)


def _path_limit(path: SingularityPath, t0: float = 0.0) -> tuple[ProjectivePoint, float]:
    last = path.last.point
    if len(path.samples) < 3:
        return last, float("nan")
    chart = int(np.argmax(np.abs(last.coords)))
    ts, coords = [], []
    for t, s in path.samples:
        try:
            coords.append(point_to_chart(s.point, chart))
            ts.append(t)
        except ChartVisibilityError:
            ts, coords = [], []  # keep only the visible tail
    if len(coords) < 3:
        return last, float("nan")
    coords = np.array(coords)
    ts = np.array(ts)
    # one expansion variable for all coordinates: the smallest fitted exponent
    # (a point moving like sqrt(t) has coordinates with t and t**1.5 terms too)
    alphas = []
    for j in range(coords.shape[1]):
        floor = NOISE_FLOOR * max(1.0, float(np.max(np.abs(coords[:, j]))))
        a = _fit_exponent(np.abs(ts - t0), coords[:, j], floor)
        if a is not None and a > 0.05:
            alphas.append(a)
    alpha = min(alphas, default=None)
    limits, errors = [], []
    for j in range(coords.shape[1]):
        est = limit_estimate(list(zip(ts, coords[:, j])), t0, alpha)
        limits.append(est.limit)
        errors.append(est.error)
    return chart_point_to_projective(limits, chart), float(max(errors, default=0.0))


# -- grouping --------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentGroup:
    label: str
    members: tuple[int, ...]
    witness: tuple[MultiPoly, ...] | None = None
    ambiguous: bool = False


def witness_residual(point: ProjectivePoint, equations: Sequence[MultiPoly]) -> float:
    """Largest modulus of the equations on the unit-norm coordinates of ``point``."""
    coords = list(point.coords)
    return max((abs(poly_eval(eq, coords, 0.0)) for eq in equations), default=0.0)


def group_paths(
    paths: Sequence[SingularityPath],
    witnesses: Mapping[str, Sequence[MultiPoly]] | None = None,
    tol: float = 1e-6,
) -> list[ComponentGroup]:
    """Group paths by the connected component their limits land in.

    A limit satisfying all equations of exactly one witness (to within
    ``tol`` or ten times the path's extrapolation error, whichever is
    larger) joins that witness's group. A limit satisfying several is put in its own group
    flagged ``ambiguous``. The remaining paths are merged when their
    limits are within ``tol`` of each other and labelled by the limit.
    """
    witnesses = dict(witnesses or {})
    for name, eqs in witnesses.items():
        for eq in eqs:
            if not is_homogeneous(eq):
                raise ValueError(f"witness {name!r} has a non-homogeneous equation")
    by_witness: dict[str, list[int]] = {name: [] for name in witnesses}
    ambiguous: list[tuple[int, list[str]]] = []
    loose: list[SingularityPath] = []
    for path in paths:
        point = path.limit_point or path.last.point
        # a limit is only known to within its extrapolation error
        err = path.limit_error if path.limit_error is not None and np.isfinite(path.limit_error) else 0.0
        bound = max(tol, 10 * err)
        hits = [name for name, eqs in witnesses.items() if witness_residual(point, eqs) < bound]
        if len(hits) == 1:
            by_witness[hits[0]].append(path.id)
        elif len(hits) > 1:
            ambiguous.append((path.id, hits))
            log.warning("path %d matches several witnesses: %s", path.id, ", ".join(hits))
        else:
            loose.append(path)

    # union-find on limit points
    parent = {p.id: p.id for p in loose}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a_idx, a in enumerate(loose):
        for b in loose[a_idx + 1:]:
            pa, pb = a.limit_point or a.last.point, b.limit_point or b.last.point
            if projective_distance(pa, pb) < tol:
                parent[find(a.id)] = find(b.id)
    clusters: dict[int, list[int]] = {}
    for p in loose:
        clusters.setdefault(find(p.id), []).append(p.id)

    lookup = {p.id: p for p in paths}
    groups = [
        ComponentGroup(name, tuple(ids), tuple(witnesses[name]))
        for name, ids in by_witness.items()
        if ids
    ]
    for pid, names in ambiguous:
        groups.append(ComponentGroup("ambiguous:" + "+".join(names), (pid,), None, True))
    rest = []
    for ids in clusters.values():
        head = lookup[min(ids)]
        rest.append(ComponentGroup((head.limit_point or head.last.point).pretty(), tuple(sorted(ids))))
    groups.extend(sorted(rest, key=lambda g: g.label))
    return groups


# -- grouped residues --------------------------------------------------------------

@dataclass
class GroupedSeries:
    """Per grid value and group, the summed residue (``None`` when excluded)."""

    monomial: ChernMonomial
    grid: list[float]
    values: dict[str, list[complex | None]]
    flags: dict[str, list[str]]
    t0: float = 0.0

    def series(self, label: str) -> list[tuple[float, complex]]:
        return [(t, v) for t, v in zip(self.grid, self.values[label]) if v is not None]

    def limit(self, label: str) -> LimitEstimate:
        return limit_estimate(self.series(label), self.t0)

    def totals(self) -> list[complex | None]:
        out = []
        for k in range(len(self.grid)):
            col = [vals[k] for vals in self.values.values()]
            out.append(None if any(v is None for v in col) else sum(col, 0j))
        return out


def grouped_residues(
    groups: Sequence[ComponentGroup],
    paths: Sequence[SingularityPath],
    monomial: ChernMonomial,
    grid: Sequence[float] | None = None,
    t0: float = 0.0,
) -> GroupedSeries:
    """Sum the point residues of each group's members at every grid value.

    A grid value where some member is missing or degenerate is flagged and
    left out of that group's series rather than patched.
    """
    lookup = {p.id: p for p in paths}
    if grid is None:
        grid = sorted({t for p in paths for t, _ in p.samples}, key=lambda t: -abs(t - t0))
    grid = list(grid)
    values: dict[str, list] = {}
    flags: dict[str, list] = {}
    for g in groups:
        vals, notes = [], []
        for t in grid:
            total, note = 0j, ""
            for pid in g.members:
                s = lookup[pid].at(t)
                if s is None:
                    note = f"path {pid} has no point at t={t:g}"
                    break
                try:
                    total += bb_residue(s, monomial).value
                except DegenerateSingularityError:
                    note = f"path {pid} is degenerate at t={t:g}"
                    break
            vals.append(None if note else total)
            notes.append(note)
        values[g.label] = vals
        flags[g.label] = notes
    return GroupedSeries(monomial, grid, values, flags, t0)
