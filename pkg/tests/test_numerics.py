import math

import numpy as np
import pytest

from normdecay.errors import OptimizationFailure
from normdecay.optimize import bracket_grid, geometric_grid, golden_section
from normdecay.quadrature import geometric_breaks, log_integrate


def test_log_integrate_polynomial_exact():
    val = log_integrate(lambda x: 3 * np.log(x), 1.0, 2.0)
    assert val == pytest.approx(math.log(15 / 4), rel=1e-15)


def test_log_integrate_concentrated_exponential():
    # ∫_{-1}^0 e^{2ty} dy at t = 1e6
    t = 1e6
    val = log_integrate(lambda y: 2 * t * y, -1.0, 0.0, breaks=geometric_breaks(-1.0, 0.0, "right", 40))
    assert val == pytest.approx(-math.log(2 * t), rel=1e-13)


def test_log_integrate_endpoint_singularity():
    # ∫_0^1 y^{-1/2} dy = 2
    val = log_integrate(lambda y: -0.5 * np.log(y), 0.0, 1.0, breaks=geometric_breaks(0.0, 1.0, "left", 60))
    assert val == pytest.approx(math.log(2.0), abs=1e-9)


def test_log_integrate_empty_interval():
    assert log_integrate(lambda y: y, 1.0, 1.0) == -math.inf


def test_geometric_breaks_order():
    pts = geometric_breaks(0.0, 1.0, "right", 5)
    assert pts == [0.5, 0.75, 0.875, 0.9375, 0.96875]


def test_golden_section_quadratic():
    x, fx = golden_section(lambda x: (x - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-9)
    assert fx == pytest.approx(0.0, abs=1e-16)


def test_golden_section_maximize_endpoint():
    x, fx = golden_section(lambda x: x, 0.0, 2.0, maximize=True)
    assert x == 2.0 and fx == 2.0


def test_golden_section_nan_everywhere_fails_with_bracket():
    with pytest.raises(OptimizationFailure) as info:
        golden_section(lambda x: math.nan, 1.0, 2.0)
    assert info.value.bracket is not None


def test_grids():
    g = geometric_grid(1.0, 8.0)
    assert list(g) == [1.0, 2.0, 4.0, 8.0]
    b = bracket_grid(2.0, math.inf)
    assert b[0] == 2.0 and 1e300 / 1.25 < b[-1] <= 1e300
    assert np.all(np.diff(b) > 0)
    with pytest.raises(ValueError):
        geometric_grid(1.0, 2.0, 1.0)
