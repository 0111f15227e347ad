"""Baum-Bott residues of rank-one foliations on P^n.

At a nondegenerate zero with linear part ``J`` the residue of a top-degree
Chern monomial ``phi`` is ``phi(J) / det J``, where ``phi(J)`` is ``phi``
evaluated on the elementary symmetric functions of the eigenvalues of
``J``. Summed over the whole singular set the residues give the Chern
number of ``T P^n`` (for a foliation with trivial tangent sheaf), which is
also how the residue of a non-isolated component is recovered.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import comb, prod
from typing import Iterable, Sequence


from .linalg import DEGENERATE_TOL, degeneracy_scale, elementary_symmetric_invariants
from .solver import Singularity

__all__ = [
    "ChernMonomial",
    "DegenerateSingularityError",
    "ResidueRecord",
    "SumReport",
    "all_monomials",
    "bb_residue",
    "bb_residue_matrix",
    "chern_number_projective",
    "elementary_symmetric_invariants",
    "phi_value",
    "residual_attribution",
    "verify_sum_theorem",
]


class DegenerateSingularityError(ValueError):
    """The point residue formula needs an invertible first jet."""


@dataclass(frozen=True, order=True)
class ChernMonomial:
    """``prod c_i**a_i`` with ``exponents = (a_1, ..., a_n)``."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(a) for a in self.exponents))
        if not self.exponents or any(a < 0 for a in self.exponents):
            raise ValueError("exponents must be a non-empty list of non-negative integers")

    @property
    def degree(self) -> int:
        return sum(i * a for i, a in enumerate(self.exponents, start=1))

    @property
    def label(self) -> str:
        parts = [f"c{i}" if a == 1 else f"c{i}^{a}" for i, a in enumerate(self.exponents, start=1) if a]
        return "*".join(parts) or "1"

    @classmethod
    def parse(cls, label: str, n: int | None = None) -> "ChernMonomial":
        """Parse labels like ``"c1^3"``, ``"c1*c2"``, ``"c3"``."""
        powers: dict[int, int] = {}
        for factor in label.replace(" ", "").split("*"):
            m = re.fullmatch(r"c(\d+)(?:\^(\d+))?", factor)
            if not m or int(m.group(1)) < 1:
                raise ValueError(f"bad Chern monomial {label!r}")
            i = int(m.group(1))
            powers[i] = powers.get(i, 0) + int(m.group(2) or 1)
        size = max(powers) if n is None else n
        if max(powers) > size:
            raise ValueError(f"{label!r} uses c{max(powers)} but n = {size}")
        return cls(tuple(powers.get(i, 0) for i in range(1, size + 1)))

    def __str__(self):
        return self.label


def all_monomials(n: int) -> list[ChernMonomial]:
    """Every degree-``n`` monomial in ``c_1..c_n``, one per partition of ``n``.

    Ordered with ``c1^n`` first and ``c_n`` last.
    """
    out = []

    def parts(remaining, largest, acc):
        if remaining == 0:
            exps = [0] * n
            for p in acc:
                exps[p - 1] += 1
            out.append(ChernMonomial(tuple(exps)))
            return
        for p in range(min(remaining, largest), 0, -1):
            parts(remaining - p, p, acc + [p])

    parts(n, n, [])
    return sorted(out, key=lambda m: tuple(-a for a in m.exponents))


def _check_degree(monomial: ChernMonomial, n: int) -> None:
    if len(monomial.exponents) != n or monomial.degree != n:
        raise ValueError(
            f"monomial {monomial.label} has degree {monomial.degree}, expected top degree {n}"
        )


def phi_value(monomial: ChernMonomial, invariants: Sequence[complex]) -> complex:
    """``prod c_i**a_i`` for the given invariants ``(c_1, ..., c_n)``."""
    _check_degree(monomial, len(invariants))
    return complex(prod(complex(c) ** a for c, a in zip(invariants, monomial.exponents)))


@dataclass(frozen=True)
class ResidueRecord:
    label: str
    monomial: ChernMonomial
    value: complex
    singularity: Singularity | None = None
    attributed: bool = False


def bb_residue_matrix(jacobian, monomial: ChernMonomial, degenerate_tol: float = DEGENERATE_TOL) -> complex:
    """``phi(J) / det J`` for a single first-jet matrix."""
    inv = elementary_symmetric_invariants(jacobian)
    _check_degree(monomial, len(inv))
    det = inv[-1]
    if not abs(det) > degenerate_tol * degeneracy_scale(jacobian):
        raise DegenerateSingularityError("first jet is degenerate; residue formula does not apply")
    det = complex(det)
    # phi * conj(det) / |det|^2 rather than phi / det: when phi is det itself
    # the product is real and equal to the denominator, so c_n gives exactly 1
    return phi_value(monomial, inv) * det.conjugate() / (det.real * det.real + det.imag * det.imag)


def bb_residue(s: Singularity, monomial: ChernMonomial, degenerate_tol: float = DEGENERATE_TOL) -> ResidueRecord:
    if not s.nondegenerate:
        raise DegenerateSingularityError(
            f"{s.point.pretty()} is degenerate; use residual_attribution for its component"
        )
    value = bb_residue_matrix(s.jacobian, monomial, degenerate_tol)
    return ResidueRecord(s.point.pretty(), monomial, value, s)


def chern_number_projective(n: int, monomial: ChernMonomial) -> int:
    """``int_{P^n} phi(T P^n)`` from ``c(T P^n) = (1 + xi)**(n+1)``."""
    _check_degree(monomial, n)
    return prod(comb(n + 1, i) ** a for i, a in enumerate(monomial.exponents, start=1))


@dataclass(frozen=True)
class SumReport:
    monomial: ChernMonomial
    sum: complex
    target: int
    residual: float


def verify_sum_theorem(
    singularities: Iterable[Singularity], monomial: ChernMonomial, n: int
) -> SumReport:
    sings = list(singularities)
    degenerate = [s for s in sings if not s.nondegenerate]
    if degenerate:
        raise DegenerateSingularityError(
            f"{len(degenerate)} degenerate point(s); the point sum does not cover the singular set"
        )
    total = sum((bb_residue(s, monomial).value for s in sings), 0j)
    target = chern_number_projective(n, monomial)
    return SumReport(monomial, total, target, abs(total - target))


def residual_attribution(
    known: Iterable[ResidueRecord], monomial: ChernMonomial, n: int, label: str
) -> ResidueRecord:
    """Residue of whatever is left once the isolated points are accounted for."""
    known = list(known)
    if any(r.monomial != monomial for r in known):
        raise ValueError("all known records must use the same monomial")
    target = chern_number_projective(n, monomial)
    total = sum((r.value for r in known), 0j)
    return ResidueRecord(label, monomial, complex(target) - total, None, attributed=True)
