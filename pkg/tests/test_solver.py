import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbres.polycore import from_coefficients, parse_poly, poly_diff, poly_eval
from bbres.projfield import AffineVectorField, ProjectivePoint, point_to_chart, projective_distance
from bbres.solver import (
    SingularJacobianError,
    TrackerSettings,
    newton_refine,
    roots_univariate,
    singular_set,
    solve_total_degree,
)

from conftest import o_matrix


def cubic(t):
    return parse_poly(f"l^3 - l^2 - {t!r}", ["l"], None)


def elementary(r):
    return r.sum(), r[0] * r[1] + r[0] * r[2] + r[1] * r[2], r.prod()


# -- univariate roots -------------------------------------------------------------

def test_cubic_at_zero_has_double_root():
    r = np.sort_complex(roots_univariate(cubic(0.0)))
    assert np.allclose(r, [0, 0, 1], atol=1e-7)


@pytest.mark.parametrize("t", [0.5, 0.1, 0.01, 1e-4])
def test_cubic_root_relations(t):
    r = roots_univariate(cubic(t))
    e1, e2, e3 = elementary(r)
    assert abs(e1 - 1) < 1e-10
    assert abs(e2) < 1e-10
    assert abs(e3 - t) < 1e-10


def test_parameter_specialization():
    p = parse_poly("x^3 - x^2 - t", ["x"])
    assert np.allclose(np.sort_complex(roots_univariate(p, t_value=0.1)),
                       np.sort_complex(roots_univariate(cubic(0.1))), atol=1e-12)


def test_double_root():
    r = roots_univariate([1, 2, 1])
    assert np.allclose(r, [-1, -1], atol=1e-7)


def test_zero_polynomial_rejected():
    with pytest.raises(ValueError):
        roots_univariate([0, 0])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_roots_reexpand_to_input(true_roots):
    coeffs = np.poly(true_roots)
    r = roots_univariate(coeffs)
    assert len(r) == len(true_roots)
    back = np.poly(r)
    assert np.allclose(back, coeffs, rtol=1e-9, atol=1e-9 * np.max(np.abs(coeffs)))


# -- Newton -------------------------------------------------------------------

def test_newton_finds_origin(xt_field):
    s = newton_refine(xt_field, [0.01, 0.01, 0.01], 0.1)
    assert np.allclose(s.affine_coords, 0, atol=1e-12)
    assert s.point == ProjectivePoint([0, 0, 0, 1])
    assert s.nondegenerate


def test_newton_finds_q(x_chart2):
    s = newton_refine(x_chart2, [0.9, 1.1, 0.05])
    assert np.allclose(s.affine_coords, [1, 1, 0], atol=1e-12)
    assert s.residual_norm < 1e-10


def test_newton_singular_on_line(x_field):
    with pytest.raises(SingularJacobianError):
        newton_refine(x_field, [0, 0, 5])


def test_newton_is_idempotent(x_chart2):
    s = newton_refine(x_chart2, [0.9, 1.1, 0.05])
    again = newton_refine(x_chart2, s.affine_coords)
    assert np.max(np.abs(again.affine_coords - s.affine_coords)) < 1e-12


# -- homotopy -------------------------------------------------------------------

def test_linear_field_one_path():
    field = AffineVectorField.from_strings(2, 0, ["x", "2*y"], ["x", "y"])
    res = solve_total_degree(field)
    assert res.bezout == 1
    assert res.finite_count == 1
    assert np.allclose(res.singularities[0].affine_coords, 0)


def test_family_chart_3_has_only_origin(xt_field):
    res = solve_total_degree(xt_field, 0.1)
    assert len(res.singularities) == 1
    assert np.allclose(res.singularities[0].affine_coords, 0, atol=1e-12)


def test_family_chart_2_points_match_roots(xt_field):
    from bbres.projfield import pushforward_chart
    res = solve_total_degree(pushforward_chart(xt_field, 2), 0.1)
    u = roots_univariate(cubic(0.1))
    found = [s.affine_coords for s in res.singularities]
    assert len(found) == 3
    for uj in u:
        assert min(np.linalg.norm(z - [uj**2, uj, 0]) for z in found) < 1e-9


def test_limit_field_chart_3_flags_degenerate(x_field):
    res = solve_total_degree(x_field, 0.0)
    assert res.finite_count + res.at_infinity_count + len(res.failures) == res.bezout
    assert all(not s.nondegenerate for s in res.singularities)
    q = ProjectivePoint([1, 1, 1, 0])
    assert all(projective_distance(s.point, q) > 0.1 for s in res.singularities)


def _check_accounting(sset):
    for k, r in sset.per_chart.items():
        assert r.finite_count + r.at_infinity_count + len(r.failures) == r.bezout, k


def _jacobian_fresh(field, z, t):
    n = field.n
    return np.array([[poly_eval(poly_diff(c, j), z, t) for j in range(n)] for c in field.components])


@pytest.mark.parametrize("t", [0.5, 0.1, 0.05, 0.01, 1e-4])
def test_family_has_four_points(xt_field, t):
    from bbres.projfield import pushforward_chart
    sset = singular_set(xt_field, t)
    _check_accounting(sset)
    assert not sset.failures
    assert len(sset.points) == 4
    assert all(s.nondegenerate for s in sset.points)
    for s in sset.points:
        field = xt_field if s.chart_index == 3 else pushforward_chart(xt_field, s.chart_index)
        assert s.residual_norm < 1e-10
        assert np.allclose(_jacobian_fresh(field, s.affine_coords, t), s.jacobian, atol=1e-12)


def test_jacobian_at_origin(xt_field):
    t = 0.05
    sset = singular_set(xt_field, t)
    o = [s for s in sset.points if s.point == ProjectivePoint([0, 0, 0, 1])]
    assert len(o) == 1 and o[0].chart_index == 3
    assert np.max(np.abs(o[0].jacobian - o_matrix(t))) < 1e-12


def test_points_off_origin_reported_in_chart_2(xt_field):
    sset = singular_set(xt_field, 0.1)
    others = [s for s in sset.points if s.point != ProjectivePoint([0, 0, 0, 1])]
    assert {s.chart_index for s in others} == {2}


def test_limit_field_singular_set(x_field):
    sset = singular_set(x_field, 0.0)
    _check_accounting(sset)
    q = [s for s in sset.nondegenerate]
    assert len(q) == 1 and q[0].point == ProjectivePoint([1, 1, 1, 0])
    assert sset.possible_non_isolated
    for s in sset.degenerate:
        assert abs(s.point.coords[0]) < 1e-8 and abs(s.point.coords[1]) < 1e-8  # on L


def test_seed_reproducible(xt_field):
    a = singular_set(xt_field, 0.1, TrackerSettings(seed=7))
    b = singular_set(xt_field, 0.1, TrackerSettings(seed=7))
    assert [s.point.sort_key() for s in a.points] == [s.point.sort_key() for s in b.points]
    c = singular_set(xt_field, 0.1, TrackerSettings(seed=123))
    assert len(c.points) == 4


def test_settings_validation():
    with pytest.raises(ValueError):
        TrackerSettings(newton_tol=0)
