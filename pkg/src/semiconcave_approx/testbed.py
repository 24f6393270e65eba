"""Closed-form test problems.

* the Exponential Distance Function ``v_d = min_i exp(-|x - c_i|^2 / 2)`` with
  centers ``+-e_i`` on ``[-1, 1]^d`` and its Hamiltonian
  ``H(p, a) = |p|^2 + 2 log|a| a^2``;
* a 1-D three-member family whose smallest member's gradient at a triple
  tie is not a reachable gradient, plus the bump-function modification that
  repairs it without changing the minimum.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgumentError
from .semiconcave import C2Function, FunctionFamily, SemiconcaveApprox, active_set, box
from .softmin import ActiveIndexInfo

#: Relative tie tolerance used for the exact solution on floating-point grids.
DEFAULT_TIE_RTOL = 1e-12

#: Reachable gradients of the unmodified 1-D minimum at x = 0.
COUNTEREXAMPLE_REACHABLE_GRADIENTS_AT_0 = frozenset({-1.0, 1.0})

COUNTEREXAMPLE_DOMAIN = (-2.0, 2.0)


def gaussian_member(center: Sequence[float], lower, upper, name: str = "") -> C2Function:
    """``exp(-|x - c|^2 / 2)`` with closed-form gradient and Hessian."""
    c = np.asarray(center, dtype=float)
    d = c.size

    def value(x):
        z = np.asarray(x, dtype=float) - c
        return np.exp(-0.5 * np.sum(z * z, axis=-1))

    def grad(x):
        z = np.asarray(x, dtype=float) - c
        return -z * value(x)[..., None]

    def hess(x):
        z = np.asarray(x, dtype=float) - c
        outer = z[..., :, None] * z[..., None, :] - np.eye(d)
        return outer * value(x)[..., None, None]

    return C2Function(value, grad, hess, lower, upper, name)


def gaussian_family(centers, lower, upper) -> FunctionFamily:
    lo, hi = box(lower, upper)
    return FunctionFamily(tuple(gaussian_member(c, lo, hi, f"gauss{i}") for i, c in enumerate(centers)))


def exp_distance_centers(d: int) -> np.ndarray:
    eye = np.eye(d)
    return np.concatenate([eye, -eye])


def exp_distance_family(d: int = 2) -> FunctionFamily:
    """The ``2d`` members ``exp(-|x -+ e_i|^2 / 2)`` on ``[-1, 1]^d``.

    Member order: ``+e_1, ..., +e_d, -e_1, ..., -e_d``.
    """
    if d < 1:
        raise InvalidArgumentError("dimension must be >= 1")
    return gaussian_family(exp_distance_centers(d), -np.ones(d), np.ones(d))


def hamiltonian_residual(p, a) -> np.ndarray:
    """``H(p, a) = |p|^2 + 2 log(|a|) a^2``, with ``H(p, 0) = |p|^2``."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    pp = np.sum(p * p, axis=-1)
    absa = np.abs(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(absa > 0.0, 2.0 * np.log(np.where(absa > 0.0, absa, 1.0)) * a * a, 0.0)
    return pp + term


@dataclass(frozen=True)
class ExactSolution:
    """Exact minimum of a family with the largest-active reference gradient."""

    family: FunctionFamily
    tie_rtol: float = DEFAULT_TIE_RTOL

    @property
    def approx(self) -> SemiconcaveApprox:
        return SemiconcaveApprox.exact(self.family, self.tie_rtol)

    def value(self, x) -> np.ndarray:
        return self.approx.value(x)

    def ref_grad(self, x) -> np.ndarray:
        return self.approx.grad(x)

    def value_and_ref_grad(self, x):
        return self.approx.value_and_grad(x)

    def active(self, x) -> ActiveIndexInfo:
        return active_set(self.approx, x, self.tie_rtol)


def exact_solution(d: int = 2, tie_rtol: float = DEFAULT_TIE_RTOL) -> ExactSolution:
    return ExactSolution(exp_distance_family(d), tie_rtol)


def bump(y) -> np.ndarray:
    """``exp(-1/(1 - y^2))`` on ``|y| < 1``, 0 outside (guarded near the edge)."""
    y = np.asarray(y, dtype=float)
    inside = np.abs(y) < 1.0 - 1e-8
    q = np.where(inside, 1.0 - y * y, 1.0)
    return np.where(inside, np.exp(-1.0 / q), 0.0)


def _bump_derivs(y):
    y = np.asarray(y, dtype=float)
    inside = np.abs(y) < 1.0 - 1e-8
    q = np.where(inside, 1.0 - y * y, 1.0)
    f = np.where(inside, np.exp(-1.0 / q), 0.0)
    h1 = -2.0 * y / q**2
    h2 = -2.0 / q**2 - 8.0 * y * y / q**3
    return f, f * h1, f * (h1 * h1 + h2)


def _scalar_member(f: Callable, df: Callable, d2f: Callable, lo, hi, name: str) -> C2Function:
    def value(x):
        return f(np.asarray(x, dtype=float)[..., 0])

    def grad(x):
        return df(np.asarray(x, dtype=float)[..., 0])[..., None]

    def hess(x):
        return d2f(np.asarray(x, dtype=float)[..., 0])[..., None, None]

    return C2Function(value, grad, hess, lo, hi, name)


def counterexample_family(modified: bool = False) -> FunctionFamily:
    """``-x``, ``exp(x) - 1`` and ``-x^3`` on ``[-2, 2]``.

    With ``modified=True`` the third member becomes ``-x^3 + bump(2x)``, which
    lifts it off the triple tie at 0 without changing the minimum.
    """
    lo, hi = box([COUNTEREXAMPLE_DOMAIN[0]], [COUNTEREXAMPLE_DOMAIN[1]])
    phi1 = _scalar_member(lambda t: -t, lambda t: -np.ones_like(t), lambda t: np.zeros_like(t), lo, hi, "-x")
    phi2 = _scalar_member(lambda t: np.exp(t) - 1.0, np.exp, np.exp, lo, hi, "exp(x)-1")
    if not modified:
        phi3 = _scalar_member(lambda t: -t**3, lambda t: -3.0 * t**2, lambda t: -6.0 * t, lo, hi, "-x^3")
    else:
        def f3(t):
            return -t**3 + bump(2.0 * t)

        def df3(t):
            return -3.0 * t**2 + 2.0 * _bump_derivs(2.0 * t)[1]

        def d2f3(t):
            return -6.0 * t + 4.0 * _bump_derivs(2.0 * t)[2]

        phi3 = _scalar_member(f3, df3, d2f3, lo, hi, "-x^3+bump(2x)")
    return FunctionFamily((phi1, phi2, phi3))


POINT = (-0.5, -0.5)


@dataclass(frozen=True)
class PointCheck:
    """Closed forms at ``x = (-1/2, -1/2)`` and the measured deviations.

    ``h_moreau``/``h_lse`` pair each smoothed gradient with the exact value;
    the ``*_smoothed_value`` variants use the approximant's own value.
    """

    epsilon: float
    value: float
    grad_phi1: np.ndarray
    grad_phi2: np.ndarray
    moreau_grad: np.ndarray
    lse_grad: np.ndarray
    moreau_grad_dev: float
    lse_grad_dev: float
    h_moreau: float
    h_lse: float
    h_moreau_smoothed_value: float
    h_lse_smoothed_value: float

    @property
    def h_moreau_dev(self) -> float:
        return abs(self.h_moreau)

    @property
    def h_lse_dev(self) -> float:
        return abs(self.h_lse - H_LSE_LIMIT)


VALUE_AT_POINT = float(np.exp(-1.25))
MOREAU_LIMIT_GRAD = np.array([1.0, 3.0]) * VALUE_AT_POINT / 2.0
LSE_LIMIT_GRAD = np.array([1.0, 1.0]) * VALUE_AT_POINT
H_LSE_LIMIT = -0.5 * float(np.exp(-2.5))


def point_check(epsilon: float = 1e-3) -> PointCheck:
    fam = exp_distance_family(2)
    x = np.array(POINT)
    v = float(fam.values(x).min())
    grads = fam.grads(x)
    mv, mg = SemiconcaveApprox.moreau(fam, epsilon).value_and_grad(x)
    lv, lg = SemiconcaveApprox.lse(fam, epsilon).value_and_grad(x)
    return PointCheck(
        epsilon=float(epsilon),
        value=v,
        grad_phi1=grads[0],
        grad_phi2=grads[1],
        moreau_grad=mg,
        lse_grad=lg,
        moreau_grad_dev=float(np.max(np.abs(mg - MOREAU_LIMIT_GRAD))),
        lse_grad_dev=float(np.max(np.abs(lg - LSE_LIMIT_GRAD))),
        h_moreau=float(hamiltonian_residual(mg, v)),
        h_lse=float(hamiltonian_residual(lg, v)),
        h_moreau_smoothed_value=float(hamiltonian_residual(mg, mv)),
        h_lse_smoothed_value=float(hamiltonian_residual(lg, lv)),
    )
