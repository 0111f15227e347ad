"""Locating the zeros of a polynomial vector field.

Three layers:

* :func:`roots_univariate` - Aberth-Ehrlich simultaneous iteration;
* :func:`newton_refine` - Newton's method with a rank check at every iterate;
* :func:`solve_total_degree` / :func:`singular_set` - total-degree homotopy
  continuation (gamma trick) chart by chart, merged in projective space.

Paths are tracked on the homogenized system restricted to a random affine
patch, so paths heading to infinity stay bounded and are recognized by a
vanishing homogenizing coordinate.
"""

from __future__ import annotations

import cmath
import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import DEGENERATE_TOL, determinant, is_nondegenerate
from .polycore import MultiPoly
from .projfield import (
    AffineVectorField,
    ProjectivePoint,
    chart_point_to_projective,
    projective_distance,
    pushforward_chart,
)

log = logging.getLogger(__name__)

__all__ = [
    "NewtonConvergenceError",
    "PathResult",
    "RootFindingError",
    "SingularJacobianError",
    "SingularSet",
    "Singularity",
    "SolverError",
    "TotalDegreeResult",
    "TrackerSettings",
    "newton_refine",
    "roots_univariate",
    "singular_set",
    "solve_total_degree",
]


class SolverError(RuntimeError):
    pass


class SingularJacobianError(SolverError):
    """Newton hit a numerically singular Jacobian (degenerate or non-isolated zero)."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class NewtonConvergenceError(SolverError):
    pass


class RootFindingError(SolverError):
    pass


# -- univariate ---------------------------------------------------------------

def _univariate_coefficients(p: MultiPoly, t_value: complex) -> np.ndarray:
    """Highest-degree-first coefficients of a polynomial in one chart variable."""
    active = {i for e in p.terms for i, k in enumerate(e[:-1]) if k}
    if len(active) > 1:
        raise ValueError("polynomial is not univariate in the chart variables")
    var = active.pop() if active else 0
    deg = p.degree_in(var)
    coeffs = np.zeros(max(deg, 0) + 1, dtype=complex)
    for e, c in p.terms.items():
        coeffs[deg - e[var]] += c * complex(t_value) ** e[-1]
    return coeffs


def roots_univariate(
    p: MultiPoly | Sequence[complex],
    t_value: complex = 0.0,
    *,
    tol: float = 1e-12,
    max_iter: int = 500,
) -> np.ndarray:
    """All roots, with multiplicity, by Aberth-Ehrlich iteration.

    ``p`` is either a :class:`MultiPoly` in a single chart variable (the
    parameter is set to ``t_value``) or a coefficient sequence, highest
    power first. Each root is finally polished by Newton steps.
    """
    if isinstance(p, MultiPoly):
        coeffs = _univariate_coefficients(p, t_value)
    else:
        coeffs = np.asarray(p, dtype=complex)
    nz = np.flatnonzero(coeffs)
    if len(nz) == 0:
        raise ValueError("zero polynomial has no well-defined roots")
    coeffs = coeffs[nz[0]:]
    deg = len(coeffs) - 1
    if deg < 1:
        raise ValueError("polynomial must have degree >= 1")
    lead = coeffs[0]
    monic = coeffs / lead
    deriv = np.polyder(monic)
    scale = float(np.max(np.abs(monic)))

    # Fujiwara-style radius, offset angle avoids symmetric stalls
    radius = 2 * max(abs(monic[k]) ** (1.0 / k) for k in range(1, deg + 1)) or 1.0
    z = radius * np.exp(1j * (2 * np.pi * np.arange(deg) / deg + 0.4))

    for _ in range(max_iter):
        pv = np.polyval(monic, z)
        dv = np.polyval(deriv, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pv / dv
            step = ratio / (1.0 - ratio * inv.sum(axis=1))
        step = np.where(pv == 0, 0, step)
        if not np.all(np.isfinite(step)):
            z = z + 1e-8 * radius * np.exp(1j * np.arange(deg))
            continue
        z = z - step
        if np.all(np.abs(step) <= tol * (1 + np.abs(z))):
            break
    else:
        residual = np.max(np.abs(np.polyval(monic, z)))
        if residual > 1e-8 * scale:
            raise RootFindingError(f"Aberth iteration did not converge (residual {residual:.2e})")

    # Newton polish, keeping a step only where it lowers the residual
    # (near a multiple root a lone Newton step would break the cluster's symmetry)
    for _ in range(3):
        pv = np.polyval(monic, z)
        dv = np.polyval(deriv, z)
        ok = (np.abs(dv) > 0) & (np.abs(pv) > tol * scale)
        trial = np.where(ok, z - np.divide(pv, dv, out=np.zeros_like(pv), where=ok), z)
        z = np.where(np.abs(np.polyval(monic, trial)) < np.abs(pv), trial, z)
    z = _recentre_clusters(monic, z)
    return z[np.lexsort((z.imag, z.real))]


def _recentre_clusters(monic: np.ndarray, z: np.ndarray, radius: float = 1e-3) -> np.ndarray:
    """Collapse each cluster of ``m`` nearly equal roots that is a true ``m``-fold root.

    Members of an ``m``-fold cluster are only known to about ``eps**(1/m)``,
    but the centroid is a simple root of the ``(m-1)``-th derivative and
    can be refined to full precision. When that refined centroid is also a
    root of ``p`` to rounding level the members are replaced by it;
    otherwise they are separate close roots and are left alone.
    """
    absc = np.abs(monic)
    z = z.copy()
    unassigned = list(range(len(z)))
    while unassigned:
        i = unassigned.pop(0)
        members = [i] + [j for j in unassigned if abs(z[j] - z[i]) < radius * (1 + abs(z[i]))]
        unassigned = [j for j in unassigned if j not in members]
        m = len(members)
        if m < 2:
            continue
        d = np.polyder(monic, m - 1)
        dd = np.polyder(d)
        c = z[members].mean()
        c0 = c
        for _ in range(5):
            dv = np.polyval(dd, c)
            if dv == 0:
                break
            c = c - np.polyval(d, c) / dv
        noise = 1e3 * np.finfo(float).eps * np.polyval(absc, abs(c))
        if abs(c - c0) < radius * (1 + abs(c0)) and abs(np.polyval(monic, c)) <= noise:
            z[members] = c
    return z


# -- compiled evaluation --------------------------------------------------------

class _CompiledSystem:
    """Fast evaluation of a square polynomial system and its Jacobian.

    Polynomials are given as ``{exponent tuple: coefficient}`` over the
    unknowns (parameter already substituted). All monomials of the system
    and of its partial derivatives are evaluated once per call and
    combined with dense coefficient matrices.
    """

    def __init__(self, polys: Sequence[dict[tuple, complex]], nvars: int):
        self.m = len(polys)
        self.nvars = nvars
        deriv_polys = []
        for p in polys:
            for v in range(nvars):
                d = {}
                for e, c in p.items():
                    if e[v]:
                        lowered = list(e)
                        lowered[v] -= 1
                        d[tuple(lowered)] = d.get(tuple(lowered), 0) + c * e[v]
                deriv_polys.append(d)
        monos = sorted({e for p in list(polys) + deriv_polys for e in p} or {(0,) * nvars})
        index = {e: i for i, e in enumerate(monos)}
        self.exps = np.array(monos, dtype=np.int64).reshape(len(monos), nvars)
        self.cf = np.zeros((self.m, len(monos)), dtype=complex)
        self.cj = np.zeros((self.m * nvars, len(monos)), dtype=complex)
        for i, p in enumerate(polys):
            for e, c in p.items():
                self.cf[i, index[e]] += c
        for i, p in enumerate(deriv_polys):
            for e, c in p.items():
                self.cj[i, index[e]] += c
        self.maxpow = int(self.exps.max()) if self.exps.size else 0

    def _monomials(self, z: np.ndarray) -> np.ndarray:
        powers = z[None, :] ** np.arange(self.maxpow + 1)[:, None]  # (maxpow+1, nvars)
        return np.prod(powers[self.exps, np.arange(self.nvars)], axis=1)

    def value(self, z: np.ndarray) -> np.ndarray:
        return self.cf @ self._monomials(z)

    def value_and_jacobian(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mon = self._monomials(z)
        return self.cf @ mon, (self.cj @ mon).reshape(self.m, self.nvars)


def _specialize(p: MultiPoly, t_value: complex) -> dict[tuple, complex]:
    out: dict[tuple, complex] = {}
    for e, c in p.terms.items():
        key = e[:-1]
        out[key] = out.get(key, 0) + c * complex(t_value) ** e[-1]
    return {e: c for e, c in out.items() if c != 0}


def _affine_system(field: AffineVectorField, t_value: complex) -> _CompiledSystem:
    return _CompiledSystem([_specialize(c, t_value) for c in field.components], field.n)


# -- singularities ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Singularity:
    """A located zero of a vector field and its first jet."""

    point: ProjectivePoint
    chart_index: int
    affine_coords: np.ndarray
    jacobian: np.ndarray
    residual_norm: float
    nondegenerate: bool

    @property
    def det(self) -> complex:
        return determinant(self.jacobian)

    def __repr__(self):
        kind = "nondegenerate" if self.nondegenerate else "degenerate"
        return f"Singularity({self.point.pretty()}, chart={self.chart_index}, {kind})"


def _make_singularity(field, z, jac, residual, degenerate_tol) -> Singularity:
    z = np.array(z, dtype=complex)
    jac = np.array(jac, dtype=complex)
    z.setflags(write=False)
    jac.setflags(write=False)
    return Singularity(
        point=chart_point_to_projective(z, field.chart_index),
        chart_index=field.chart_index,
        affine_coords=z,
        jacobian=jac,
        residual_norm=float(residual),
        nondegenerate=is_nondegenerate(jac, degenerate_tol),
    )


def newton_refine(
    field: AffineVectorField,
    seed: Sequence[complex],
    t_value: complex = 0.0,
    *,
    tol: float = 1e-10,
    max_iter: int = 50,
    degenerate_tol: float = DEGENERATE_TOL,
    _system: _CompiledSystem | None = None,
) -> Singularity:
    """Refine ``seed`` to a nondegenerate zero of ``field`` at ``t = t_value``.

    Raises :class:`SingularJacobianError` as soon as an iterate has a
    numerically singular Jacobian, which is how degenerate and
    non-isolated zeros announce themselves.
    """
    system = _system or _affine_system(field, t_value)
    z = np.array(seed, dtype=complex)
    if z.shape != (field.n,):
        raise ValueError(f"seed must have length {field.n}")
    prev_step = np.inf
    for _ in range(max_iter):
        f, jac = system.value_and_jacobian(z)
        if not np.all(np.isfinite(f)):
            break
        if not is_nondegenerate(jac, degenerate_tol):
            raise SingularJacobianError(
                f"singular Jacobian at {np.round(z, 6).tolist()}", point=z
            )
        step = np.linalg.solve(jac, -f)
        z = z + step
        size = np.linalg.norm(step)
        scale = 1 + np.linalg.norm(z)
        if size <= 1e-14 * scale or (size > 0.5 * prev_step and size <= 1e-9 * scale):
            f, jac = system.value_and_jacobian(z)
            residual = np.linalg.norm(f)
            if residual < tol:
                return _make_singularity(field, z, jac, residual, degenerate_tol)
            break
        prev_step = size
    raise NewtonConvergenceError(f"Newton did not converge from seed {list(seed)}")


# -- homotopy continuation --------------------------------------------------------------

@dataclass(frozen=True)
class TrackerSettings:
    """Numerical knobs for path tracking; ``seed`` fixes gamma and the patch."""

    seed: int = 0
    initial_step: float = 0.05
    max_step: float = 0.1
    min_step: float = 1e-14
    corrector_tol: float = 1e-12
    max_corrector_iter: int = 10
    divergence_radius: float = 1e8
    endgame_zone: float = 1e-5
    max_steps: int = 20000
    newton_tol: float = 1e-10
    degenerate_tol: float = DEGENERATE_TOL
    dedup_tol: float = 1e-6

    def __post_init__(self):
        for name in ("initial_step", "max_step", "min_step", "corrector_tol",
                     "divergence_radius", "endgame_zone", "newton_tol",
                     "degenerate_tol", "dedup_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_corrector_iter < 1 or self.max_steps < 1:
            raise ValueError("iteration limits must be positive")

    def _rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    @property
    def gamma(self) -> complex:
        return cmath.exp(2j * np.pi * self._rng().random())

    def patch(self, size: int) -> np.ndarray:
        rng = self._rng()
        rng.random()  # gamma's draw
        v = rng.normal(size=size) + 1j * rng.normal(size=size)
        return v / np.linalg.norm(v)


@dataclass(frozen=True)
class PathResult:
    index: int
    status: str  # "finite" | "infinity" | "failed"
    endpoint: np.ndarray | None = None
    singularity: Singularity | None = None
    steps: int = 0
    message: str = ""


@dataclass(frozen=True)
class TotalDegreeResult:
    """Outcome of one total-degree solve in one chart."""

    chart_index: int
    t_value: complex
    bezout: int
    paths: tuple[PathResult, ...]
    singularities: tuple[Singularity, ...]
    gamma: complex

    @property
    def finite_count(self) -> int:
        return sum(p.status == "finite" for p in self.paths)

    @property
    def at_infinity_count(self) -> int:
        return sum(p.status == "infinity" for p in self.paths)

    @property
    def failures(self) -> tuple[PathResult, ...]:
        return tuple(p for p in self.paths if p.status == "failed")


def _homogenize(poly: dict[tuple, complex], degree: int) -> dict[tuple, complex]:
    return {e + (degree - sum(e),): c for e, c in poly.items()}


class _Homotopy:
    """``H(Z, s) = [(1-s) gamma G(Z) + s F(Z); patch . Z - 1]`` on C^{n+1}."""

    def __init__(self, target: list[dict], degrees: list[int], gamma: complex, patch: np.ndarray):
        n = len(target)
        self.n = n
        self.gamma = gamma
        self.patch = patch
        self.target = _CompiledSystem([_homogenize(p, d) for p, d in zip(target, degrees)], n + 1)
        start = []
        for i, d in enumerate(degrees):
            hi = [0] * (n + 1)
            hi[i] = d
            hh = [0] * (n + 1)
            hh[n] = d
            start.append({tuple(hi): 1.0, tuple(hh): -1.0})
        self.start = _CompiledSystem(start, n + 1)

    def evaluate(self, z: np.ndarray, s: float):
        f, jf = self.target.value_and_jacobian(z)
        g, jg = self.start.value_and_jacobian(z)
        h = np.empty(self.n + 1, dtype=complex)
        h[: self.n] = (1 - s) * self.gamma * g + s * f
        h[self.n] = self.patch @ z - 1
        jz = np.empty((self.n + 1, self.n + 1), dtype=complex)
        jz[: self.n] = (1 - s) * self.gamma * jg + s * jf
        jz[self.n] = self.patch
        hs = np.zeros(self.n + 1, dtype=complex)
        hs[: self.n] = f - self.gamma * g
        return h, jz, hs


def _affine_norm(z: np.ndarray) -> float:
    h = abs(z[-1])
    top = np.linalg.norm(z[:-1])
    return np.inf if h == 0 else top / h


def _correct(hom: _Homotopy, z: np.ndarray, s: float, settings: TrackerSettings):
    prev = np.inf
    for _ in range(settings.max_corrector_iter):
        h, jz, _ = hom.evaluate(z, s)
        try:
            dz = np.linalg.solve(jz, -h)
        except np.linalg.LinAlgError:
            return False, z
        z = z + dz
        size = np.linalg.norm(dz)
        if not np.isfinite(size):
            return False, z
        if size <= settings.corrector_tol * (1 + np.linalg.norm(z)):
            return True, z
        # ill-conditioned near singular endpoints: settle for a tiny residual
        if np.linalg.norm(hom.evaluate(z, s)[0]) <= settings.corrector_tol:
            return True, z
        if size > 0.5 * prev:
            return False, z
        prev = size
    return False, z


def _track(hom: _Homotopy, z: np.ndarray, settings: TrackerSettings):
    """Follow one path from s=0 to s=1. Returns (status, z, s, steps, message)."""
    s = 0.0
    step = settings.initial_step
    streak = 0
    steps = 0
    while s < 1.0:
        if steps >= settings.max_steps:
            return "failed", z, s, steps, f"step budget exhausted at s={s:.3e}"
        steps += 1
        step = min(step, 1.0 - s)
        _, jz, hs = hom.evaluate(z, s)
        try:
            zdot = np.linalg.solve(jz, -hs)
        except np.linalg.LinAlgError:
            zdot = None
        if zdot is not None and np.all(np.isfinite(zdot)):
            s_new = 1.0 if step >= 1.0 - s else s + step
            ok, z_new = _correct(hom, z + step * zdot, s_new, settings)
        else:
            ok = False
        if ok:
            z, s = z_new, s_new
            streak += 1
            if streak >= 3:
                step = min(2 * step, settings.max_step)
                streak = 0
            if _affine_norm(z) > settings.divergence_radius:
                return "infinity", z, s, steps, ""
        else:
            streak = 0
            step /= 2
            if step < settings.min_step:
                if 1.0 - s <= settings.endgame_zone:
                    return "endzone", z, s, steps, ""
                return "failed", z, s, steps, f"step size underflow at s={s:.6g}"
    return "reached", z, s, steps, ""


def _polish_endpoint(hom: _Homotopy, z: np.ndarray, iters: int = 60) -> tuple[np.ndarray, float]:
    """Gauss-Newton on the target system (s=1); tolerant of rank deficiency."""
    best_z, best_res = z, np.inf
    for _ in range(iters):
        h, jz, _ = hom.evaluate(z, 1.0)
        res = np.linalg.norm(h)
        if res < best_res:
            best_z, best_res = z, res
        dz = np.linalg.lstsq(jz, -h, rcond=1e-12)[0]
        if not np.all(np.isfinite(dz)):
            break
        z = z + dz
        if np.linalg.norm(dz) <= 1e-15 * (1 + np.linalg.norm(z)):
            h, _, _ = hom.evaluate(z, 1.0)
            if np.linalg.norm(h) < best_res:
                best_z, best_res = z, np.linalg.norm(h)
            break
    return best_z, best_res


def _start_points(degrees: list[int], patch: np.ndarray):
    n = len(degrees)
    for combo in itertools.product(*[range(d) for d in degrees]):
        z = np.empty(n + 1, dtype=complex)
        for i, (k, d) in enumerate(zip(combo, degrees)):
            z[i] = cmath.exp(2j * np.pi * k / d)
        z[n] = 1.0
        yield z / (patch @ z)


def _classify(field, t_value, system, hom, status, z, settings) -> tuple[str, Singularity | None, str]:
    if status == "infinity":
        return "infinity", None, ""
    z, res = _polish_endpoint(hom, z)
    if _affine_norm(z) > settings.divergence_radius:
        return "infinity", None, ""
    affine = z[:-1] / z[-1]
    try:
        sing = newton_refine(
            field, affine, t_value, tol=settings.newton_tol,
            degenerate_tol=settings.degenerate_tol, _system=system,
        )
        return "finite", sing, ""
    except SolverError:
        pass
    f, jac = system.value_and_jacobian(affine)
    residual = float(np.linalg.norm(f))
    if residual < settings.newton_tol:
        return "finite", _make_singularity(field, affine, jac, residual, settings.degenerate_tol), ""
    if res < settings.newton_tol and _affine_norm(z) > np.sqrt(settings.divergence_radius):
        # on a solution component that runs off to infinity
        return "infinity", None, ""
    return "failed", None, f"endpoint residual {residual:.2e} after polishing (|z|={_affine_norm(z):.2e})"


def solve_total_degree(
    field: AffineVectorField,
    t_value: complex = 0.0,
    settings: TrackerSettings | None = None,
) -> TotalDegreeResult:
    """All isolated zeros of ``field`` in its chart by total-degree homotopy.

    Tracks ``prod(deg X_i)`` paths from ``z_i**d_i = 1``. Every path ends
    up in exactly one of three bins: finite (refined and returned),
    at infinity, or failed (kept with a message, never dropped).
    """
    settings = settings or TrackerSettings()
    target = [_specialize(c, t_value) for c in field.components]
    if any(not p for p in target):
        raise ValueError("all components must be nonzero polynomials")
    degrees = [max(sum(e) for e in p) for p in target]
    if any(d == 0 for d in degrees):
        # a nonzero constant component: no zeros in this chart
        return TotalDegreeResult(field.chart_index, t_value, 1, (), (), settings.gamma)
    n = field.n
    gamma = settings.gamma
    patch = settings.patch(n + 1)
    hom = _Homotopy(target, degrees, gamma, patch)
    system = _CompiledSystem(target, n)

    paths = []
    for idx, z0 in enumerate(_start_points(degrees, patch)):
        status, z, s, steps, msg = _track(hom, z0, settings)
        if status == "failed":
            paths.append(PathResult(idx, "failed", z, None, steps, msg))
            continue
        kind, sing, msg = _classify(field, t_value, system, hom, status, z, settings)
        endpoint = None if kind == "infinity" else z
        paths.append(PathResult(idx, kind, endpoint, sing, steps, msg))

    found = _dedup([p.singularity for p in paths if p.singularity is not None], settings.dedup_tol)
    for p in paths:
        if p.status == "failed":
            log.warning("chart %d, t=%s: path %d failed: %s", field.chart_index, t_value, p.index, p.message)
    return TotalDegreeResult(
        chart_index=field.chart_index,
        t_value=t_value,
        bezout=int(np.prod(degrees)),
        paths=tuple(paths),
        singularities=tuple(found),
        gamma=gamma,
    )


def _dedup(sings: list[Singularity], tol: float) -> list[Singularity]:
    kept: list[Singularity] = []
    for s in sorted(sings, key=lambda s: (not s.nondegenerate, s.residual_norm)):
        if all(projective_distance(s.point, k.point) >= tol for k in kept):
            kept.append(s)
    return sorted(kept, key=lambda s: s.point.sort_key())


@dataclass(frozen=True)
class SingularSet:
    """Merged singular points over all charts at one parameter value."""

    t_value: complex
    points: tuple[Singularity, ...]
    per_chart: dict[int, TotalDegreeResult] = field(default_factory=dict)

    @property
    def nondegenerate(self) -> tuple[Singularity, ...]:
        return tuple(p for p in self.points if p.nondegenerate)

    @property
    def degenerate(self) -> tuple[Singularity, ...]:
        return tuple(p for p in self.points if not p.nondegenerate)

    @property
    def possible_non_isolated(self) -> bool:
        return bool(self.degenerate)

    @property
    def failures(self) -> list[tuple[int, PathResult]]:
        return [(k, p) for k, r in sorted(self.per_chart.items()) for p in r.failures]


def singular_set(
    field: AffineVectorField,
    t_value: complex = 0.0,
    settings: TrackerSettings | None = None,
    charts: Sequence[int] | None = None,
) -> SingularSet:
    """Zeros of the field over all of P^n.

    Solves in every chart (the given one first, then the others in
    descending order), and merges by projective distance. When a point is
    seen in several charts the earlier chart wins, unless the point's
    coordinate at that chart index is under 1e-3 of its largest one.
    """
    settings = settings or TrackerSettings()
    n = field.n
    if charts is None:
        charts = [field.chart_index] + [k for k in range(n, -1, -1) if k != field.chart_index]
    per_chart: dict[int, TotalDegreeResult] = {}
    merged: list[Singularity] = []
    for k in charts:
        chart_field = field if k == field.chart_index else pushforward_chart(field, k)
        result = solve_total_degree(chart_field, t_value, settings)
        per_chart[k] = result
        for s in result.singularities:
            for i, kept in enumerate(merged):
                if projective_distance(s.point, kept.point) < settings.dedup_tol:
                    if _prefer(s, kept):
                        merged[i] = s
                    break
            else:
                merged.append(s)
    merged.sort(key=lambda s: s.point.sort_key())
    return SingularSet(t_value, tuple(merged), per_chart)


def _visibility(s: Singularity) -> float:
    c = np.abs(s.point.coords)
    return c[s.chart_index] / c.max()


def _prefer(new: Singularity, old: Singularity) -> bool:
    if new.nondegenerate != old.nondegenerate:
        return new.nondegenerate
    # keep the earlier chart unless the point sits badly there
    return _visibility(old) < 1e-3 and _visibility(new) > _visibility(old)
