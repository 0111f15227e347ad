"""Polynomial vector fields in the standard affine charts of P^n.

Chart ``k`` (0-based) is ``U_k = {x_k != 0}`` with affine coordinates
``w_j = x_j / x_k`` for ``j != k`` in increasing ``j``. Hand-written
1-based coordinates ``x_1..x_{n+1}`` map to indices ``0..n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .polycore import MultiPoly, format_poly, parse_poly, poly_substitute

__all__ = [
    "AffineVectorField",
    "ChartVisibilityError",
    "ProjectiveAmbient",
    "ProjectivePoint",
    "chart_point_to_projective",
    "normalize_homogeneous",
    "point_to_chart",
    "projective_distance",
    "pushforward_chart",
]

VISIBILITY_TOL = 1e-9


class ChartVisibilityError(ValueError):
    """The point has a (numerically) vanishing coordinate at the chart index."""


@dataclass(frozen=True)
class ProjectiveAmbient:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("projective dimension must be >= 1")

    def chart_coordinates(self, chart_index: int) -> list[int]:
        """Homogeneous indices that become the affine coordinates of a chart."""
        self.check_chart(chart_index)
        return [j for j in range(self.n + 1) if j != chart_index]

    def check_chart(self, chart_index: int) -> None:
        if not 0 <= chart_index <= self.n:
            raise IndexError(f"chart index {chart_index} out of range 0..{self.n}")


def normalize_homogeneous(coords: Sequence[complex]) -> np.ndarray:
    """Unit Euclidean norm, then rotate so the first non-negligible entry is positive real."""
    z = np.asarray(coords, dtype=complex)
    norm = np.linalg.norm(z)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("homogeneous coordinates must be finite and not all zero")
    z = z / norm
    for c in z:
        if abs(c) > VISIBILITY_TOL:
            z = z * (abs(c) / c)
            break
    return z


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """A point of P^n stored as normalized homogeneous coordinates."""

    coords: np.ndarray

    def __init__(self, coords: Sequence[complex]):
        object.__setattr__(self, "coords", normalize_homogeneous(coords))
        self.coords.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return self.n == other.n and projective_distance(self, other) < 1e-12

    __hash__ = None

    def sort_key(self) -> tuple:
        return tuple(v for c in self.coords for v in (round(c.real, 9), round(c.imag, 9)))

    def pretty(self, digits: int = 6) -> str:
        """Coordinates scaled so the largest entry is 1, e.g. ``[1:1:1:0]``."""
        z = self.coords / self.coords[np.argmax(np.abs(self.coords))]
        parts = []
        for c in z:
            re_, im = round(c.real, digits) + 0.0, round(c.imag, digits) + 0.0
            if im == 0:
                parts.append(f"{re_:g}")
            elif re_ == 0:
                parts.append(f"{im:g}j")
            else:
                parts.append(f"{re_:g}{im:+g}j")
        return "[" + ":".join(parts) + "]"

    def __repr__(self):
        return f"ProjectivePoint({self.pretty()})"


def point_to_chart(p: ProjectivePoint, chart_index: int) -> np.ndarray:
    """Affine coordinates ``x_j / x_k`` of ``p`` in chart ``k``."""
    if not 0 <= chart_index <= p.n:
        raise IndexError(f"chart index {chart_index} out of range 0..{p.n}")
    xk = p.coords[chart_index]
    if abs(xk) <= VISIBILITY_TOL:
        raise ChartVisibilityError(
            f"point {p.pretty()} is not visible in chart {chart_index}"
        )
    return np.delete(p.coords, chart_index) / xk


def chart_point_to_projective(coords: Sequence[complex], chart_index: int) -> ProjectivePoint:
    z = np.asarray(coords, dtype=complex)
    if not 0 <= chart_index <= len(z):
        raise IndexError(f"chart index {chart_index} out of range 0..{len(z)}")
    return ProjectivePoint(np.insert(z, chart_index, 1.0))


def projective_distance(p: ProjectivePoint, q: ProjectivePoint) -> float:
    """Chordal Fubini-Study distance ``sqrt(1 - |<p, q>|^2)``."""
    if p.n != q.n:
        raise ValueError("points live in different projective spaces")
    overlap = abs(np.vdot(p.coords, q.coords))
    return float(np.sqrt(max(0.0, 1.0 - min(1.0, overlap) ** 2)))


@dataclass(frozen=True)
class AffineVectorField:
    """``sum_j components[j] * d/dw_j`` in chart ``chart_index`` of P^n.

    ``clearing_exponent`` is the power of the inverse coordinate that was
    multiplied in when this field was produced by :func:`pushforward_chart`
    (zero for fields given directly).
    """

    ambient: ProjectiveAmbient
    chart_index: int
    components: tuple[MultiPoly, ...]
    clearing_exponent: int = field(default=0, compare=False)

    def __post_init__(self):
        self.ambient.check_chart(self.chart_index)
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        n = self.ambient.n
        if len(comps) != n:
            raise ValueError(f"expected {n} components, got {len(comps)}")
        for c in comps:
            if c.num_vars != n:
                raise ValueError(f"component has {c.num_vars} variables, expected {n}")

    @classmethod
    def from_strings(
        cls,
        n: int,
        chart_index: int,
        expressions: Sequence[str],
        variable_names: Sequence[str],
        parameter_name: str | None = "t",
    ) -> "AffineVectorField":
        comps = [parse_poly(e, variable_names, parameter_name) for e in expressions]
        return cls(ProjectiveAmbient(n), chart_index, tuple(comps))

    @property
    def n(self) -> int:
        return self.ambient.n

    @property
    def degree(self) -> int:
        return max(0, max(c.degree() for c in self.components))

    @property
    def has_parameter(self) -> bool:
        return any(c.has_parameter for c in self.components)

    def format(self, variable_names: Sequence[str], parameter_name: str = "t") -> list[str]:
        return [format_poly(c, variable_names, parameter_name) for c in self.components]


def _laurent_sum(parts, n: int, var: int) -> tuple[MultiPoly, int]:
    """Sum of ``poly * var**power`` (powers may be negative) as ``(numerator, shift)``.

    The value equals ``numerator * var**(-shift)``.
    """
    shift = max([0] + [-power for _, power in parts])
    total = MultiPoly.zero(n)
    for poly, power in parts:
        total = total + poly * _monomial(n, var, power + shift)
    return total, shift


def _monomial(n: int, index: int, power: int) -> MultiPoly:
    exps = [0] * (n + 1)
    exps[index] = power
    return MultiPoly(n, {tuple(exps): 1})


def pushforward_chart(field: AffineVectorField, target_chart: int) -> AffineVectorField:
    """Express ``field`` in ``target_chart`` and clear denominators.

    With source chart ``k`` and target ``m`` the target coordinates are
    ``v_i = w_i / w_m`` (``i != k``) and ``v_k = 1 / w_m``, so the
    components transform as::

        Y_i = v_k X_i - v_i v_k X_m      (i != k)
        Y_k = -v_k**2 X_m

    with every ``X_j`` evaluated at ``w_j = v_j / v_k``, ``w_m = 1 / v_k``.
    All components are then multiplied by the least power ``v_k**e`` that
    makes them polynomial; ``e`` is stored on the result.
    """
    amb = field.ambient
    amb.check_chart(target_chart)
    k = field.chart_index
    if target_chart == k:
        raise ValueError("target chart equals source")
    n = amb.n
    src_idx = amb.chart_coordinates(k)  # homogeneous index of each source coordinate
    dst_idx = amb.chart_coordinates(target_chart)
    dst_pos = {h: i for i, h in enumerate(dst_idx)}

    m_src = src_idx.index(target_chart)  # source coordinate w_m = x_m / x_k
    v_k = dst_pos[k]  # target coordinate v_k = x_k / x_m (the inverse coordinate)

    one = MultiPoly.constant(n, 1)
    subs = {}
    for j, h in enumerate(src_idx):
        subs[j] = one if h == target_chart else MultiPoly.variable(n, dst_pos[h])

    pulled = [poly_substitute(comp, subs, v_k, 1) for comp in field.components]
    qm, em = pulled[m_src]

    new: list[tuple[MultiPoly, int]] = [None] * n
    for j, h in enumerate(src_idx):
        if h == target_chart:
            continue
        i = dst_pos[h]
        qj, ej = pulled[j]
        new[i] = _laurent_sum([(qj, 1 - ej), (-MultiPoly.variable(n, i) * qm, 1 - em)], n, v_k)
    new[v_k] = _laurent_sum([(-qm, 2 - em)], n, v_k)

    exponent = 0
    for poly, shift in new:
        if not poly.is_zero:
            exponent = max(exponent, shift - poly.min_degree_in(v_k))
    comps = []
    for poly, shift in new:
        out = {}
        for exps, c in poly.terms.items():
            lifted = list(exps)
            lifted[v_k] += exponent - shift
            out[tuple(lifted)] = c
        comps.append(MultiPoly(n, out))
    return AffineVectorField(amb, target_chart, tuple(comps), exponent)
