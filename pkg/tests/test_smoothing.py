import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiconcave_approx.errors import InvalidParameterError
from semiconcave_approx.smoothing import (
    SmootherKind,
    algebraic_plus,
    check_plus_axioms,
    make_smoother,
    moreau_plus,
)

EPS_LIST = [1e-4, 1e-3, 1e-2, 1e-1, 1.0]
reals = st.floats(-1e3, 1e3, allow_nan=False)


def test_moreau_examples():
    g = moreau_plus(0.5)
    assert g.value(-1.0) == 0.0
    assert g.value(0.25) == 0.0625
    assert g.value(2.0) == 1.75
    for eps in EPS_LIST:
        assert moreau_plus(eps).deriv(0.0) == 0.0


def test_moreau_breakpoint_convention():
    g = moreau_plus(0.2)
    assert g.second_deriv(0.0) == pytest.approx(5.0)
    assert g.second_deriv(0.2) == 0.0
    assert g.second_deriv(-1e-300) == 0.0
    assert g.sup_second_deriv == pytest.approx(5.0)


def test_algebraic_examples():
    g = algebraic_plus(1.0)
    assert g.value(0.0) == 0.0
    assert g.value(1.0) == pytest.approx(math.sqrt(2) / 2, abs=1e-13)
    assert g.deriv(0.0) == 0.5
    assert g.sup_second_deriv == 0.5
    assert g.second_deriv(0.0) == 0.5


@pytest.mark.parametrize("make", [moreau_plus, algebraic_plus])
@pytest.mark.parametrize("eps", [0.0, -1.0, float("nan"), float("inf")])
def test_bad_epsilon(make, eps):
    with pytest.raises(InvalidParameterError):
        make(eps)


def test_make_smoother():
    assert make_smoother("moreau", 0.1).kind is SmootherKind.MOREAU
    assert make_smoother("algebraic", 0.1).kind is SmootherKind.ALGEBRAIC
    with pytest.raises(InvalidParameterError):
        make_smoother("custom", 0.1)


def test_axioms_moreau_exact():
    rep = check_plus_axioms(moreau_plus(0.1), 10_000, (-5, 5))
    assert all(v == 0.0 for _, v in rep.items())
    assert rep.ok()


def test_axioms_algebraic():
    # Everything but nonnegativity holds analytically.  The closed form is
    # negative for s < 0; its worst sample on [-5, 5] sits at s = -5.
    rep = check_plus_axioms(algebraic_plus(0.1), 10_000, (-5, 5))
    assert rep.deriv_range <= 1e-15
    assert rep.convexity <= 1e-15
    assert rep.closeness <= 1e-15
    assert rep.underestimation is None and rep.flat_left is None
    oracle = -0.5 * (-5 + math.sqrt(25 + 0.01) - 0.1)
    assert rep.nonnegativity == pytest.approx(oracle, rel=1e-12)
    assert not rep.ok()


def test_axioms_degenerate_interval():
    rep = check_plus_axioms(algebraic_plus(1.0), 10, (0, 0))
    assert rep.closeness == 0.0


def test_axioms_bad_args():
    with pytest.raises(InvalidParameterError):
        check_plus_axioms(moreau_plus(1.0), 1, (0, 1))
    with pytest.raises(InvalidParameterError):
        check_plus_axioms(moreau_plus(1.0), 10, (1, 0))


@pytest.mark.parametrize("eps", EPS_LIST)
def test_algebraic_infimum_is_minus_half_eps(eps):
    g = algebraic_plus(eps)
    s = -np.logspace(-8, 8, 200) * eps
    assert np.all(g.value(s) >= -0.5 * eps - 1e-15)
    assert g.value(-1e8 * eps) == pytest.approx(-0.5 * eps, rel=1e-6)


@pytest.mark.parametrize("make", [moreau_plus, algebraic_plus])
@pytest.mark.parametrize("eps", EPS_LIST)
def test_closeness_and_monotone_derivative(make, eps):
    g = make(eps)
    s = np.sort(np.concatenate([np.linspace(-3, 3, 5001), np.linspace(-2 * eps, 2 * eps, 1001)]))
    assert np.max(np.abs(g.value(s) - np.maximum(s, 0))) <= eps
    d = g.deriv(s)
    assert np.all(np.diff(d) >= -1e-15)
    assert np.all((d >= 0) & (d <= 1))


@pytest.mark.parametrize("make", [moreau_plus, algebraic_plus])
@pytest.mark.parametrize("eps", [1e-2, 1e-1, 1.0])
def test_derivatives_match_finite_differences(make, eps):
    g = make(eps)
    s = np.linspace(-3, 3, 3001)
    s = s[(np.abs(s) >= 1e-3) & (np.abs(s - eps) >= 1e-3)]
    h = 1e-6
    fd1 = (g.value(s + h) - g.value(s - h)) / (2 * h)
    fd2 = (g.deriv(s + h) - g.deriv(s - h)) / (2 * h)
    assert np.max(np.abs(fd1 - g.deriv(s))) <= 1e-6
    assert np.max(np.abs(fd2 - g.second_deriv(s))) <= 1e-6 * max(1.0, 1 / eps**2)


@settings(max_examples=200, deadline=None)
@given(s=reals, eps=st.floats(1e-4, 1.0))
def test_moreau_properties(s, eps):
    g = moreau_plus(eps)
    assert 0.0 <= g.value(s) <= max(s, 0.0)
    if s <= 0:
        assert g.deriv(s) == 0.0
    # Moreau envelope: min_t (t)_+ + (t - s)^2 / (2 eps) has the prox t* = clip
    t = s - eps if s >= eps else (0.0 if s >= 0 else s)
    assert g.value(s) == pytest.approx(max(t, 0.0) + (t - s) ** 2 / (2 * eps), abs=1e-12 * (1 + abs(s)))


@settings(max_examples=200, deadline=None)
@given(s=reals, eps=st.floats(1e-4, 1.0))
def test_algebraic_upper_bound_and_closeness(s, eps):
    g = algebraic_plus(eps)
    v = float(g.value(s))
    assert v <= max(s, 0.0) + 1e-12 * (1 + abs(s))
    assert abs(v - max(s, 0.0)) <= eps
    assert float(g.second_deriv(s)) <= g.sup_second_deriv * (1 + 1e-15)
