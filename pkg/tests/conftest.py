import json
from pathlib import Path

import numpy as np
import pytest

from bbres.projfield import AffineVectorField

FIXTURES = Path(__file__).parent / "fixtures"
DATA = Path(__file__).parents[1] / "src" / "bbres" / "data"

# first jet of the limit field at Q = [1:1:1:0], chart 2
A_AT_Q = np.array([[0, -1, 0], [1, -2, 0], [0, 0, -1]], dtype=complex)


def o_matrix(t):
    return np.array([[1, 0, t], [1, 0, 0], [0, 1, 0]], dtype=complex)


def load_fixture(name):
    return json.loads((FIXTURES / name).read_text())


@pytest.fixture
def x_field():
    """Limit field (x, x, y) in chart 3."""
    return AffineVectorField.from_strings(3, 3, ["x", "x", "y"], ["x", "y", "z"])


@pytest.fixture
def xt_field():
    """Family (x + t*z, x, y) in chart 3."""
    return AffineVectorField.from_strings(3, 3, ["x + t*z", "x", "y"], ["x", "y", "z"])


@pytest.fixture
def x_chart2():
    return AffineVectorField.from_strings(3, 2, ["x - x*y", "x - y^2", "-y*z"], ["x", "y", "z"])


@pytest.fixture
def family_spec():
    return DATA / "p3_family.spec"


@pytest.fixture
def limit_spec():
    return DATA / "p3_limit.spec"


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
