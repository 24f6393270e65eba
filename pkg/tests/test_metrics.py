import math

import numpy as np
import pytest

from semiconcave_approx.chebyshev import interpolate_family
from semiconcave_approx.errors import DegenerateRegionError, InvalidArgumentError, InvalidParameterError
from semiconcave_approx.metrics import (
    RESULTS_HEADER,
    LipschitzFunction,
    MetricsReport,
    box_constant,
    build_grid,
    coarea_check,
    compute_metrics,
    global_error_bound_check,
    localized_bound_check,
    table1,
)
from semiconcave_approx.semiconcave import FunctionFamily, SemiconcaveApprox
from semiconcave_approx.testbed import exact_solution

CENTERS = ((1, 0), (0, 1), (-1, 0), (0, -1))


def brute_force_fraction(N, delta, tol=1e-12):
    """Omega_delta membership by the set definition, one point at a time."""
    inside = 0
    axis = [-1 + 2 * k / (N - 1) for k in range(N)]
    for x in axis:
        for y in axis:
            phi = [math.exp(-0.5 * ((x - a) ** 2 + (y - b) ** 2)) for a, b in CENTERS]
            v = min(phi)
            active = {j for j, p in enumerate(phi) if p - v <= tol * (1 + abs(v))}
            if all(v <= phi[j] - delta for j in range(4) if j not in active):
                inside += 1
    return inside / N**2


@pytest.fixture(scope="module")
def ex():
    return exact_solution(2)


@pytest.fixture(scope="module")
def grid101(ex):
    return build_grid(101, ex, [0.0, 1e-3, 1e-2, 1e-1])


def test_build_grid_basics(ex, grid101):
    assert grid101.points.shape == (101**2, 2)
    assert grid101.mask(0.0).all()
    keys = sorted(grid101.masks)
    for a, b in zip(keys, keys[1:]):
        assert np.all(grid101.mask(a) | ~grid101.mask(b))
    with pytest.raises(InvalidParameterError):
        build_grid(1, ex)
    with pytest.raises(InvalidParameterError):
        build_grid(5, ex, [-1.0])
    with pytest.raises(InvalidArgumentError):
        grid101.mask(0.5)


def test_fully_tied_point_only(ex):
    g = build_grid(3, ex, [10.0])
    assert g.fraction(10.0) == pytest.approx(1 / 9)
    assert g.mask(10.0)[4]  # the origin


@pytest.mark.parametrize("N", [11, 101])
def test_fractions_match_brute_force(ex, N):
    fr = table1(N, (1e-4, 1e-3, 1e-2, 1e-1, 10.0), ex)
    for delta, f in fr.items():
        assert f == brute_force_fraction(N, delta)


def test_grid_101_fractions(ex):
    # the coarse grid sits 0.017 above the fine-grid values for delta >= 1e-2
    fr = table1(101, (1e-4, 1e-3, 1e-2, 1e-1), ex)
    assert fr[1e-4] == 1.0 and fr[1e-3] == 1.0
    assert fr[1e-2] == pytest.approx(0.9357, abs=1e-4)
    assert fr[1e-1] == pytest.approx(0.4326, abs=1e-4)


def test_exact_self_comparison(ex, grid101):
    for delta in grid101.masks:
        r = compute_metrics(ex.approx, grid101, delta)
        assert (r.D_C, r.D_W1, r.D_Winf) == (0.0, 0.0, 0.0)
        assert r.method == "Exact"


def test_exact_hamiltonian_vanishes(ex, grid101):
    r = compute_metrics(ex.approx, grid101, 0.0)
    assert r.D_Hinf <= 1e-12


def test_moreau_on_exact_family(ex, grid101):
    r = compute_metrics(SemiconcaveApprox.moreau(ex.family, 1e-4), grid101, 1e-3)
    assert r.D_Winf <= 1e-10
    assert r.method == "MoreauRegMin"


def test_lse_on_exact_family(ex, grid101):
    r = compute_metrics(SemiconcaveApprox.lse(ex.family, 1e-2), grid101, 1e-2)
    assert r.D_Winf >= 1e-1


def test_report_invariants_and_normalization(ex, grid101):
    fam = interpolate_family(ex.family, 4)
    for mode in ("moreau", "lse"):
        u = SemiconcaveApprox.build(fam, mode, 1e-2)
        for delta in grid101.masks:
            r = compute_metrics(u, grid101, delta, m=4)
            assert r.D_W1 <= r.D_Winf and r.D_H1 <= r.D_Hinf
            assert 0 <= r.omega_fraction <= 1 and r.runtime_ms >= 0
            rn = compute_metrics(u, grid101, delta, m=4, normalized_dc=True)
            count = np.count_nonzero(grid101.mask(delta))
            assert rn.D_C == pytest.approx(r.D_C / count, rel=1e-15)


def test_degenerate_region(ex):
    g = build_grid(4, ex, [10.0])
    assert g.fraction(10.0) == 0.0
    with pytest.raises(DegenerateRegionError):
        compute_metrics(ex.approx, g, 10.0)


def test_csv_row():
    r = MetricsReport("LSE", 4, 0.01, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 1.0, 12.5)
    assert r.csv_row() == ("LSE", "4", "0.01", "0.0", "0.1", "0.2", "0.3", "0.4", "0.5", "1.0", "12.5")
    assert RESULTS_HEADER == ("method", "m", "epsilon", "delta", "D_C", "D_W1", "D_Winf", "D_H1", "D_Hinf",
                              "omega_fraction", "runtime_ms")


def test_box_constant():
    assert box_constant([-1, -1], [1, 1]) == 2.0
    assert box_constant([0, 0], [1, 4]) == 4.0


def test_coarea_examples(ex):
    zero = LipschitzFunction(lambda x: np.zeros(x.shape[:-1]), lambda x: np.zeros(x.shape))
    rep = coarea_check(zero, 2.0, [-1, -1], [1, 1], 51)
    assert (rep.lhs, rep.rhs, rep.ok, rep.K) == (0.0, 0.0, True, 2.0)
    diff = LipschitzFunction.difference(ex.approx, SemiconcaveApprox.moreau(ex.family, 1e-2))
    rep = coarea_check(diff, 2.0, [-1, -1], [1, 1], 201)
    assert rep.ok and rep.lhs > 0
    with pytest.raises(InvalidParameterError):
        coarea_check(zero, 0.5, [-1, -1], [1, 1])


def test_coarea_rhs_closed_form():
    # v = eps * x_1 on [-1, 1]^2: lhs = eps * 4^(1/p); sup|v| = sup|grad v| = eps
    eps = 0.3
    lin = LipschitzFunction(lambda x: eps * x[..., 0], lambda x: np.broadcast_to([eps, 0.0], x.shape))
    for p in (1.0, 2.0, 4.0):
        rep = coarea_check(lin, p, [-1, -1], [1, 1], 101)
        assert rep.lhs == pytest.approx(eps * 4 ** (1 / p), rel=1e-12)
        const = (2 * 2 * 4 + 2 ** (p / 2) * 4) ** (1 / p)
        assert rep.rhs == pytest.approx(const * 2 * eps, rel=1e-12)


def test_global_bound_examples(ex):
    fam = ex.family
    rep = global_error_bound_check(fam, fam, 1e-3, 1.0, grid_per_axis=101)
    assert rep.value_rhs == pytest.approx(3e-3)
    assert rep.value_lhs <= 3e-3 and rep.ok
    rep = global_error_bound_check(fam, fam, 0.0, 1.0, grid_per_axis=101)
    assert rep.value_lhs == 0.0 and rep.grad_lhs == 0.0
    rep = global_error_bound_check(fam, interpolate_family(fam, 6), 1e-2, 1.0)
    assert rep.ok
    with pytest.raises(InvalidArgumentError):
        global_error_bound_check(fam, FunctionFamily(fam.members[:3]), 1e-2)
    with pytest.raises(InvalidParameterError):
        global_error_bound_check(fam, fam, 1e-2, 0.5)


def test_localized_bound(ex):
    fam = ex.family
    for m in (4, 8):
        ifam = interpolate_family(fam, m)
        for mode in ("moreau", "algebraic"):
            rep = localized_bound_check(fam, ifam, 1e-3, 1e-2, mode)
            assert rep.ok
    rep = localized_bound_check(fam, fam, 1e-4, 1e-2, "moreau")
    assert rep.bound == 0.0 and rep.measured <= 1e-10
    with pytest.raises(InvalidParameterError):
        localized_bound_check(fam, fam, 1e-2, 1e-2)
