import math

import numpy as np
from hypothesis import given, settings, strategies as st
from scipy import integrate

from normdecay.asymptotics import decay_exponents, scaling_exponents
from normdecay.expr import evaluate, parse
from normdecay.measure import SpectralMeasure, orbit_log_norm2, orbit_series, total_mass
from normdecay.models import MultiplicationModel, state_measure
from normdecay.suites import calibration_family

gammas = st.floats(0.05, 4.0)


@given(gammas, st.floats(0.01, 10.0))
def test_power_measure_normalized(g, mass):
    mu = SpectralMeasure.power(g, mass=mass)
    assert math.isclose(math.exp(orbit_log_norm2(mu, 0.0)), mass, rel_tol=1e-12)
    assert math.isclose(total_mass(mu), mass, rel_tol=1e-12)


@given(gammas, st.floats(1e50, 1e300))
def test_log_domain_survives_huge_t(g, t):
    lg = orbit_log_norm2(SpectralMeasure.power(g), t)
    assert math.isfinite(lg)
    assert lg < 0


@settings(deadline=None, max_examples=30)
@given(st.floats(-1.0, 1.0), st.floats(0.0, 2.0))
def test_eval_is_deterministic(y, c):
    e = parse(f"{c!r}+exp(-y)*sin(y)^2")
    assert evaluate(e, y) == evaluate(e, y)


def test_precedence():
    assert evaluate(parse("2+3*4"), 0.0) == 14
    assert evaluate(parse("2^3^2"), 0.0) == 512
    assert evaluate(parse("-2^2"), 0.0) == -4


def test_state_measure_matches_direct_quadrature():
    rng = np.random.default_rng(3)
    model = MultiplicationModel.from_text("1/(1+y^2)", "y", (0.0, 50.0))
    mu = state_measure(model, parse("exp(-y)"), (0.0, 50.0))
    for t in rng.uniform(0.0, 30.0, 20):
        f = lambda y: math.exp(-2 * t / (1 + y * y)) * math.exp(-2 * y)
        direct, _ = integrate.quad(f, 0.0, 50.0, epsabs=0, epsrel=1e-13, limit=200)
        assert abs(math.exp(orbit_log_norm2(mu, float(t))) - direct) <= 1e-9 * direct


def test_lower_never_exceeds_upper_and_calibration_agrees():
    for _name, _gamma, mu in calibration_family():
        dec = decay_exponents(orbit_series(mu, 10.0, 1e8))
        sca = scaling_exponents(mu, 0.0, 1e-8, 0.5)
        assert dec.lower <= dec.upper
        assert sca.lower <= sca.upper
        assert abs(dec.lower - sca.lower) <= 0.1
        assert abs(dec.upper - sca.upper) <= 0.1
