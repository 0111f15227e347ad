"""Baum-Bott residues of polynomial vector fields on complex projective space."""

__version__ = "0.1.0"

from .polycore import MultiPoly, PolyParseError, format_poly, parse_poly
from .projfield import (
    AffineVectorField,
    ProjectiveAmbient,
    ProjectivePoint,
    pushforward_chart,
)
from .solver import (
    Singularity,
    TrackerSettings,
    newton_refine,
    roots_univariate,
    singular_set,
    solve_total_degree,
)
from .residue import (
    ChernMonomial,
    all_monomials,
    bb_residue,
    bb_residue_matrix,
    chern_number_projective,
    residual_attribution,
    verify_sum_theorem,
)
from .deform import DeformationFamily, group_paths, grouped_residues, limit_estimate, sweep

__all__ = [
    "AffineVectorField",
    "ChernMonomial",
    "DeformationFamily",
    "MultiPoly",
    "PolyParseError",
    "ProjectiveAmbient",
    "ProjectivePoint",
    "Singularity",
    "TrackerSettings",
    "all_monomials",
    "bb_residue",
    "bb_residue_matrix",
    "chern_number_projective",
    "format_poly",
    "group_paths",
    "grouped_residues",
    "limit_estimate",
    "newton_refine",
    "parse_poly",
    "pushforward_chart",
    "residual_attribution",
    "roots_univariate",
    "singular_set",
    "solve_total_degree",
    "sweep",
    "verify_sum_theorem",
]
