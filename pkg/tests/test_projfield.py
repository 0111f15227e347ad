import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bbres.polycore import MultiPoly, poly_eval
from bbres.projfield import (
    AffineVectorField,
    ChartVisibilityError,
    ProjectivePoint,
    chart_point_to_projective,
    point_to_chart,
    projective_distance,
    pushforward_chart,
)

from conftest import load_fixture

XYZ = ["x", "y", "z"]


def test_limit_field_to_chart_2(x_field):
    moved = pushforward_chart(x_field, 2)
    assert moved.format(XYZ) == ["x - x*y", "x - y^2", "-y*z"]
    assert moved.clearing_exponent == 0
    # coefficients are exact integers
    for comp in moved.components:
        for c in comp.terms.values():
            assert c.imag == 0 and c.real == int(c.real)


def test_family_to_chart_2(xt_field):
    moved = pushforward_chart(xt_field, 2)
    assert moved.format(XYZ) == ["x - x*y + t", "x - y^2", "-y*z"]


def test_same_chart_rejected(x_field):
    with pytest.raises(ValueError, match="target chart equals source"):
        pushforward_chart(x_field, 3)


def test_p1_radial_fixture():
    fx = load_fixture("p1_radial_pushforward.json")
    src = fx["source"]
    field = AffineVectorField.from_strings(src["dimension"], src["chart"], src["components"], src["variables"])
    moved = pushforward_chart(field, fx["target_chart"])
    assert moved.format(src["variables"]) == fx["expected_components"]
    assert moved.clearing_exponent == fx["expected_clearing_exponent"]


def test_clearing_exponent_for_quadratic_field():
    # x^2 d/dx in chart 3, seen from chart 0 with v = (x1, x2, x3)/x0:
    # Y_i = -v_i / v_3 and Y_3 = -1, so one factor of v_3 is cleared
    field = AffineVectorField.from_strings(3, 3, ["x^2", "0", "0"], XYZ)
    moved = pushforward_chart(field, 0)
    assert moved.format(XYZ) == ["-x", "-y", "-z"]
    assert moved.clearing_exponent == 1


@pytest.mark.parametrize("target", [0, 1, 2])
def test_round_trip_is_parallel(xt_field, target):
    back = pushforward_chart(pushforward_chart(xt_field, target), 3)
    rng = np.random.default_rng(target)
    for _ in range(5):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        t = 0.3
        a = np.array([poly_eval(c, z, t) for c in xt_field.components])
        b = np.array([poly_eval(c, z, t) for c in back.components])
        # b = (monomial factor) * a
        ratio = b / a
        assert np.allclose(ratio, ratio[0], rtol=1e-9)


def test_point_to_chart_examples():
    q = ProjectivePoint([1, 1, 1, 0])
    assert np.allclose(point_to_chart(q, 2), [1, 1, 0])
    o = ProjectivePoint([0, 0, 0, 1])
    assert np.allclose(point_to_chart(o, 3), [0, 0, 0])
    u = 0.7 + 0.2j
    p = ProjectivePoint([u**2, u, 1, 0])
    assert np.allclose(point_to_chart(p, 2), [u**2, u, 0], atol=1e-14)
    with pytest.raises(ChartVisibilityError):
        point_to_chart(q, 3)


def test_chart_point_to_projective_examples():
    assert chart_point_to_projective([0, 0, 0], 3) == ProjectivePoint([0, 0, 0, 1])
    q = chart_point_to_projective([1, 1, 0], 2)
    assert np.allclose(q.coords, np.array([1, 1, 1, 0]) / np.sqrt(3))
    assert q.pretty() == "[1:1:1:0]"


def test_distance_examples():
    q, o = ProjectivePoint([1, 1, 1, 0]), ProjectivePoint([0, 0, 0, 1])
    assert projective_distance(q, q) == pytest.approx(0, abs=1e-12)
    assert projective_distance(ProjectivePoint([1, 0]), ProjectivePoint([0, 1])) == pytest.approx(1)
    assert projective_distance(q, o) == pytest.approx(1)


def test_normalization_phase():
    p = ProjectivePoint([0, 2j, 1])
    assert p.coords[0] == 0
    assert p.coords[1].imag == 0 and p.coords[1].real > 0
    assert np.linalg.norm(p.coords) == pytest.approx(1)


def test_bad_field_shape():
    from bbres.projfield import ProjectiveAmbient
    with pytest.raises(ValueError):
        AffineVectorField(ProjectiveAmbient(2), 0, (MultiPoly.variable(2, 0),))


coord = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)
vec = st.lists(coord, min_size=4, max_size=4).filter(lambda v: np.linalg.norm(v) > 1e-3)
scalar = st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(vec, vec, scalar, scalar)
def test_distance_symmetric_and_scale_invariant(a, b, la, lb):
    p, q = ProjectivePoint(a), ProjectivePoint(b)
    d = projective_distance(p, q)
    assert abs(d - projective_distance(q, p)) < 1e-12
    ps = ProjectivePoint(np.array(a) * la)
    qs = ProjectivePoint(np.array(b) * lb)
    assert abs(d - projective_distance(ps, qs)) < 1e-12 or abs(d**2 - projective_distance(ps, qs) ** 2) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(coord, min_size=3, max_size=3), st.integers(0, 3))
def test_chart_round_trip(w, k):
    p = chart_point_to_projective(w, k)
    assert np.allclose(point_to_chart(p, k), w, rtol=1e-12, atol=1e-12 * (1 + max(map(abs, w))))
