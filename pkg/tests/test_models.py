import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import FROZEN
from normdecay.errors import ConfigError, InvalidModel, NotMonotone
from normdecay.expr import parse
from normdecay.measure import ball_mass, orbit_log_norm2, total_mass
from normdecay.models import (
    FiniteVector,
    LaplacianModel,
    MultiplicationModel,
    laplacian_log_norm2,
    laplacian_orbit,
    model_from_doc,
    model_gap,
    model_hash,
    resolvent_norm,
    semigroup_opnorm_log,
    spectral_distance,
    state_measure,
)

UNIT = MultiplicationModel.from_text("1", "y", (0.0, math.inf))
EX1 = MultiplicationModel.from_text("1/ln(y)", "y", (2.0, math.inf))


# resolvent ------------------------------------------------------------------

def test_resolvent_examples():
    assert resolvent_norm(UNIT, 0.0) == 1.0
    assert resolvent_norm(LaplacianModel(), 5.0) == pytest.approx(0.2, rel=1e-15)


def test_example1_resolvent_near_curve():
    # the spectrum point -r(y) - i y is closest to i s for s = -y
    got = resolvent_norm(EX1, -math.exp(10))
    assert got == pytest.approx(FROZEN["example1_resolvent_at_-e10"], rel=1e-9)


def test_resolvent_infinite_on_spectrum():
    assert resolvent_norm(LaplacianModel(), 0.0) == math.inf


@pytest.mark.parametrize("model, s", [
    (EX1, -50.0), (EX1, -1e4), (UNIT, -3.0), (UNIT, 7.0),
    (MultiplicationModel.from_text("y^(-2)", "y", (1.0, math.inf)), -300.0),
    (MultiplicationModel.from_text("1+sin(y)^2", "y^2", (0.0, 10.0)), -20.0),
])
def test_resolvent_times_sampled_distance(model, s):
    # dense sampling, zoomed in around the nearest sample a few times
    lo, hi = model.domain[0], min(model.domain[1], 1e6)
    for _ in range(5):
        g = np.linspace(lo, hi, 20001)
        d = np.hypot(model.r(g, strict=False), s + model.v(g, strict=False))
        i = int(np.nanargmin(d))
        lo, hi = g[max(i - 1, 0)], g[min(i + 1, g.size - 1)]
    prod = resolvent_norm(model, s) * float(np.nanmin(d))
    assert 1 - 1e-6 <= prod <= 1 + 1e-6


# semigroup norms -----------------------------------------------------------

def test_opnorm_examples():
    assert semigroup_opnorm_log(UNIT, 1.0, 0) == -1.0
    assert semigroup_opnorm_log(EX1, 0.0, 0) == 0.0
    assert semigroup_opnorm_log(LaplacianModel(), 0.0, 0) == 0.0
    assert semigroup_opnorm_log(EX1, 100.0, 1) == pytest.approx(FROZEN["example1_opnorm_log_t100"], abs=1e-8)


def test_opnorm_needs_bounded_inverse():
    with pytest.raises(InvalidModel):
        semigroup_opnorm_log(LaplacianModel(), 1.0, 1)


def test_opnorm_monotone_in_t_and_k():
    # |phi| >= 1 on the domain of this model, so raising k cannot increase the norm
    m = MultiplicationModel.from_text("1/y", "y", (1.0, math.inf))
    ts = [0.5, 1, 2, 5, 10, 100, 1e3, 1e4]
    for k in (0, 1, 2):
        vals = [semigroup_opnorm_log(m, t, k) for t in ts]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    for t in ts:
        vals = [semigroup_opnorm_log(m, t, k) for k in (0, 1, 2, 3)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_gap():
    assert model_gap(UNIT) == 1.0
    assert model_gap(EX1) == 0.0
    assert model_gap(LaplacianModel()) == 0.0


# state measures ------------------------------------------------------------

def test_state_measure_identity_pushforward():
    m = MultiplicationModel.from_text("y", "0", (0.0, 1.0))
    mu = state_measure(m, parse("1"), (0.0, 1.0))
    assert total_mass(mu) == pytest.approx(1.0, rel=1e-12)
    assert ball_mass(mu, 0.0, 0.3) == pytest.approx(0.3, rel=1e-12)
    assert orbit_log_norm2(mu, 10.0) == pytest.approx(math.log((1 - math.exp(-20)) / 20), rel=1e-12)


def test_state_measure_square_gives_half_power_law():
    m = MultiplicationModel.from_text("y^2", "y", (0.0, 1.0))
    mu = state_measure(m, parse("1"), (0.0, 1.0))
    assert total_mass(mu) == pytest.approx(1.0, rel=1e-12)
    for eps in (1e-2, 1e-4, 1e-6):
        assert ball_mass(mu, 0.0, eps) == pytest.approx(math.sqrt(eps), rel=1e-9)


def test_state_measure_scaled_weight():
    m = MultiplicationModel.from_text("y", "0", (0.0, 1.0))
    mu = state_measure(m, parse("sqrt(2)"), (0.0, 0.5))
    assert total_mass(mu) == pytest.approx(1.0, rel=1e-12)
    assert ball_mass(mu, 0.0, 0.25) == pytest.approx(0.5, rel=1e-12)
    assert ball_mass(mu, -0.75, 0.2) == 0.0


def test_state_measure_not_monotone():
    m = MultiplicationModel.from_text("(y-1)^2", "0", (0.0, 2.0))
    with pytest.raises(NotMonotone):
        state_measure(m, parse("1"), (0.0, 2.0))


# Laplacian -----------------------------------------------------------------

def test_laplacian_norm_examples():
    assert laplacian_log_norm2(0.0) == 0.0
    assert laplacian_log_norm2(10.0) == pytest.approx(FROZEN["laplacian_log_norm2_10"], abs=1e-13)
    big = laplacian_log_norm2(1e4)
    assert big == pytest.approx(FROZEN["laplacian_log_norm2_1e4"], abs=1e-12)
    assert big == pytest.approx(-0.5 * math.log(8 * math.pi * 1e4), abs=1e-4)


def test_laplacian_orbit_examples():
    d0 = FiniteVector.delta(0)
    assert laplacian_orbit(d0, 0.0, 0) == 1.0
    assert laplacian_orbit(d0, 0.0, 3) == 0.0
    assert laplacian_orbit(d0, 1.0, 0) == pytest.approx(FROZEN["laplacian_delta0_t1_n0"], rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.0, max_value=500.0), st.integers(min_value=0, max_value=60))
def test_laplacian_kernel_symmetry(t, n):
    d0 = FiniteVector.delta(0)
    assert laplacian_orbit(d0, t, n) == laplacian_orbit(d0, t, -n)


def test_laplacian_orbit_is_linear():
    x = FiniteVector(((0, 1.0), (3, -2.0)))
    t = 2.5
    expect = laplacian_orbit(FiniteVector.delta(0), t, 1) - 2 * laplacian_orbit(FiniteVector.delta(3), t, 1)
    assert laplacian_orbit(x, t, 1) == pytest.approx(expect, rel=1e-14)


# documents -----------------------------------------------------------------

def test_model_documents():
    m = model_from_doc({"kind": "mult", "r": "1/ln(y)", "v": "y", "domain": [2, "inf"]})
    assert model_hash(m) == model_hash(EX1)
    assert model_from_doc(EX1.to_doc()) == EX1
    assert isinstance(model_from_doc({"kind": "laplacian"}), LaplacianModel)


@pytest.mark.parametrize("doc, field, offset", [
    ({"kind": "mult", "r": "1/ln(y", "v": "y", "domain": [2, "inf"]}, "r", 6),
    ({"kind": "mult", "r": "1", "v": "y*", "domain": [0, 1]}, "v", 2),
    ({"kind": "mult", "r": "1", "v": "y", "domain": [1]}, "domain", None),
    ({"kind": "mult", "r": "1", "v": "y", "domain": [1, "x"]}, "domain[1]", None),
    ({"kind": "mult", "r": "y-1", "v": "y", "domain": [0, 2]}, "r", None),
    ({"kind": "other"}, "kind", None),
])
def test_model_document_errors(doc, field, offset):
    with pytest.raises(ConfigError) as info:
        model_from_doc(doc)
    assert info.value.field == field
    assert info.value.offset == offset


def test_spectral_distance_zero_on_curve():
    assert spectral_distance(LaplacianModel(), 0.0) == 0.0
