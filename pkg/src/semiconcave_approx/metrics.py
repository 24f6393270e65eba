"""Grid error metrics and numerical checks of the approximation inequalities.

Continuum norms are replaced by grid quantities: sup -> max over grid
points, L^1 -> mean, L^p -> trapezoidal (cell-weighted) quadrature.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateRegionError, InvalidArgumentError, InvalidParameterError
from .semiconcave import (
    FunctionFamily,
    Mode,
    SemiconcaveApprox,
    omega_delta_mask,
)
from .testbed import ExactSolution, hamiltonian_residual

RESULTS_HEADER = (
    "method", "m", "epsilon", "delta", "D_C", "D_W1", "D_Winf", "D_H1", "D_Hinf",
    "omega_fraction", "runtime_ms",
)

METRIC_NAMES = ("D_C", "D_W1", "D_Winf", "D_H1", "D_Hinf")

METHOD_LABELS = {Mode.MOREAU: "MoreauRegMin", Mode.LSE: "LSE", Mode.EXACT: "Exact",
                 Mode.ALGEBRAIC: "AlgebraicRegMin"}


@dataclass
class EvaluationGrid:
    """Uniform ``N x N`` grid on the exact solution's box with Omega_delta masks.

    ``values``/``ref_grads`` hold the exact minimum and the reference gradient
    of the largest active member at every point.
    """

    N: int
    points: np.ndarray
    values: np.ndarray
    ref_grads: np.ndarray
    masks: Dict[float, np.ndarray]
    tie_tolerance: float

    def mask(self, delta: float) -> np.ndarray:
        delta = float(delta)
        if delta not in self.masks:
            raise InvalidArgumentError(f"delta={delta!r} has no mask on this grid")
        return self.masks[delta]

    def fraction(self, delta: float) -> float:
        return float(np.count_nonzero(self.mask(delta))) / self.mask(delta).size


def build_grid(N: int, exact: ExactSolution, deltas: Iterable[float] = (0.0,),
               tie_tolerance: Optional[float] = None) -> EvaluationGrid:
    """Grid of ``N`` points per axis; ``delta = 0`` means the whole closed box."""
    if N < 2:
        raise InvalidParameterError("N must be >= 2")
    tol = exact.tie_rtol if tie_tolerance is None else float(tie_tolerance)
    pts = exact.family.grid(N)
    values, ref = exact.value_and_ref_grad(pts)
    masks = {}
    for delta in deltas:
        delta = float(delta)
        if delta < 0:
            raise InvalidParameterError("deltas must be nonnegative")
        masks[delta] = (np.ones(len(pts), dtype=bool) if delta == 0.0
                        else omega_delta_mask(exact.family, pts, delta, tol))
    return EvaluationGrid(N, pts, values, ref, masks, tol)


@dataclass(frozen=True)
class GridField:
    values: np.ndarray
    grads: np.ndarray
    runtime_ms: float = 0.0


def evaluate_on_grid(u: SemiconcaveApprox, grid: EvaluationGrid) -> GridField:
    t0 = time.perf_counter()
    v, g = u.value_and_grad(grid.points)
    return GridField(v, g, 1e3 * (time.perf_counter() - t0))


@dataclass(frozen=True)
class MetricsReport:
    method: str
    m: int
    epsilon: float
    delta: float
    D_C: float
    D_W1: float
    D_Winf: float
    D_H1: float
    D_Hinf: float
    omega_fraction: float
    runtime_ms: float

    def row(self) -> Tuple:
        return tuple(getattr(self, k) for k in RESULTS_HEADER)

    def csv_row(self) -> Tuple[str, ...]:
        out = []
        for k in RESULTS_HEADER:
            v = getattr(self, k)
            out.append(repr(float(v)) if isinstance(v, float) else str(v))
        return tuple(out)


def compute_metrics(u: SemiconcaveApprox, grid: EvaluationGrid, delta: float,
                    hamiltonian: Callable = hamiltonian_residual, *, m: int = 0,
                    normalized_dc: bool = False, field: Optional[GridField] = None) -> MetricsReport:
    """The five grid metrics of ``u`` against the exact solution over ``X cap Omega_delta``.

    ``D_C`` is the plain maximum unless ``normalized_dc`` is set, in which case
    it is divided by the number of points in the region.
    """
    t0 = time.perf_counter()
    mask = grid.mask(delta)
    count = int(np.count_nonzero(mask))
    if count == 0:
        raise DegenerateRegionError(f"Omega_delta is empty for delta={delta!r}")
    if field is None:
        field = evaluate_on_grid(u, grid)
    uv = field.values[mask]
    ug = field.grads[mask]
    verr = np.abs(grid.values[mask] - uv)
    gerr = np.linalg.norm(grid.ref_grads[mask] - ug, axis=-1)
    herr = np.abs(hamiltonian(ug, uv))
    dc = float(verr.max())
    if normalized_dc:
        dc /= count
    elapsed = field.runtime_ms + 1e3 * (time.perf_counter() - t0)
    return MetricsReport(
        method=METHOD_LABELS.get(u.mode, u.mode.value),
        m=int(m),
        epsilon=float(u.epsilon),
        delta=float(delta),
        D_C=dc,
        D_W1=float(gerr.mean()),
        D_Winf=float(gerr.max()),
        D_H1=float(herr.mean()),
        D_Hinf=float(herr.max()),
        omega_fraction=count / mask.size,
        runtime_ms=elapsed,
    )


# --- coarea-type estimate ---------------------------------------------------

def box_constant(lower, upper) -> float:
    """``K = |Omega| * max_i 1/(b_i - a_i)`` for a box."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    return float(np.prod(hi - lo) * np.max(1.0 / (hi - lo)))


def coarea_rhs(sup_value: float, sup_grad: float, p: float, d: int, K: float, volume: float) -> float:
    const = (2.0 * K * d * d + d ** (p / 2.0) * volume) ** (1.0 / p)
    return const * (sup_value ** (1.0 / p) * sup_grad ** ((p - 1.0) / p)
                    + sup_value ** (1.0 / (1.0 + p)) * sup_grad ** (p / (1.0 + p)))


def _tensor_grid(lower, upper, per_axis: int):
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    axes = [np.linspace(a, b, per_axis) for a, b in zip(lo, hi)]
    w1 = [np.full(per_axis, (b - a) / (per_axis - 1)) for a, b in zip(lo, hi)]
    for w in w1:
        w[[0, -1]] *= 0.5
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    weights = w1[0]
    for w in w1[1:]:
        weights = np.multiply.outer(weights, w)
    return pts, np.asarray(weights).ravel()


def lp_norm(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    return float(np.sum(weights * np.abs(values) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class LipschitzFunction:
    """A Lipschitz function given by value and (a.e.) gradient maps."""

    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def difference(cls, f, g) -> "LipschitzFunction":
        """``f - g`` for two objects exposing ``value_and_grad``."""
        return cls(lambda x: f.value(x) - g.value(x), lambda x: f.grad(x) - g.grad(x))


@dataclass(frozen=True)
class CoareaReport:
    lhs: float
    rhs: float
    ok: bool
    K: float
    p: float


def coarea_check(v_small: LipschitzFunction, p: float, lower, upper, probe_grid: int = 201) -> CoareaReport:
    """Check ``||grad v||_Lp <= const * (...)`` with all norms taken on the probe grid."""
    if p < 1:
        raise InvalidParameterError("p must be >= 1")
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    pts, w = _tensor_grid(lo, hi, probe_grid)
    vals = np.asarray(v_small.value(pts))
    gnorm = np.linalg.norm(np.asarray(v_small.grad(pts)), axis=-1)
    lhs = lp_norm(gnorm, w, p)
    K = box_constant(lo, hi)
    rhs = coarea_rhs(float(np.max(np.abs(vals))), float(np.max(gnorm)), p, lo.size, K, float(np.prod(hi - lo)))
    return CoareaReport(lhs, rhs, lhs <= rhs * (1.0 + 1e-6), K, float(p))


# --- global and localized error bounds ----------------------------------------

def _approximant(family: FunctionFamily, epsilon: float, mode: str, tie_rtol: float) -> SemiconcaveApprox:
    if epsilon == 0.0:
        return SemiconcaveApprox.exact(family, tie_rtol)
    return SemiconcaveApprox.build(family, mode, epsilon)


def _family_distances(fam_a: FunctionFamily, fam_b: FunctionFamily, pts) -> Tuple[float, float]:
    dv = np.max(np.abs(fam_a.values(pts) - fam_b.values(pts)))
    dg = np.max(np.linalg.norm(fam_a.grads(pts) - fam_b.grads(pts), axis=-1))
    return float(dv), float(dg)


@dataclass(frozen=True)
class GlobalBoundReport:
    value_lhs: float
    value_rhs: float
    grad_lhs: float
    grad_rhs: float
    p: float

    @property
    def value_ok(self) -> bool:
        return self.value_lhs <= self.value_rhs * (1.0 + 1e-6)

    @property
    def grad_ok(self) -> bool:
        return self.grad_lhs <= self.grad_rhs * (1.0 + 1e-6)

    @property
    def ok(self) -> bool:
        return self.value_ok and self.grad_ok


def global_error_bound_check(family_exact: FunctionFamily, family_interp: FunctionFamily,
                             epsilon: float, p: float = 1.0, mode: str = "moreau",
                             grid_per_axis: int = 201, tie_rtol: float = 1e-12) -> GlobalBoundReport:
    """Sup-norm bound on the values and L^p bound on the gradients of the approximant.

    value:    ``max|v_n - v_{n,m,eps}| <= max_i ||phi_i - phi_{i,m}|| + (n-1) eps``
    gradient: ``||grad v_{n,m,eps} - grad v_n||_Lp <= const * (r^(1/p) S^((p-1)/p)
              + r^(1/(1+p)) S^(p/(1+p)))`` with ``r`` the value bound and
              ``S = L_m + L``.
    """
    if len(family_exact) != len(family_interp):
        raise InvalidArgumentError("families must have the same length")
    if family_exact.dim != family_interp.dim:
        raise InvalidArgumentError("families must share the domain")
    if p < 1:
        raise InvalidParameterError("p must be >= 1")
    n = len(family_exact)
    lo, hi = family_exact.lower, family_exact.upper
    pts, w = _tensor_grid(lo, hi, grid_per_axis)
    exact = SemiconcaveApprox.exact(family_exact, tie_rtol)
    approx = _approximant(family_interp, float(epsilon), mode, tie_rtol)
    v_ex, g_ex = exact.value_and_grad(pts)
    v_ap, g_ap = approx.value_and_grad(pts)
    dist_v, _ = _family_distances(family_exact, family_interp, pts)
    value_lhs = float(np.max(np.abs(v_ex - v_ap)))
    value_rhs = dist_v + (n - 1) * float(epsilon)
    L = float(np.max(np.linalg.norm(family_exact.grads(pts), axis=-1)))
    L_m = float(np.max(np.linalg.norm(family_interp.grads(pts), axis=-1)))
    grad_lhs = lp_norm(np.linalg.norm(g_ap - g_ex, axis=-1), w, p)
    K = box_constant(lo, hi)
    grad_rhs = coarea_rhs(value_rhs, L_m + L, p, family_exact.dim, K, family_exact.volume)
    return GlobalBoundReport(value_lhs, value_rhs, grad_lhs, grad_rhs, float(p))


@dataclass(frozen=True)
class LocalizedBoundReport:
    measured: float
    bound: float
    smoothing_term: float
    value_term: float
    grad_term: float
    omega_fraction: float

    @property
    def ok(self) -> bool:
        return self.measured <= self.bound * (1.0 + 1e-6) + 1e-8


def localized_bound_check(family_exact: FunctionFamily, family_interp: FunctionFamily,
                          epsilon: float, delta: float, mode: str = "moreau",
                          grid_per_axis: int = 201, tie_rtol: float = 1e-12) -> LocalizedBoundReport:
    """Uniform gradient error on Omega_delta against its a-priori bound.

    The smoothing term uses ``g'(delta/2)``, the weaker of the two forms the
    argument supports, so the check is valid for ``eps < delta / (2(n-1))``.
    """
    n = len(family_exact)
    if len(family_interp) != n:
        raise InvalidArgumentError("families must have the same length")
    if not (0 < epsilon < delta / (2.0 * max(n - 1, 1))):
        raise InvalidParameterError("need 0 < epsilon < delta / (2 (n - 1))")
    approx = SemiconcaveApprox.build(family_interp, mode, epsilon)
    g = approx.smoother
    pts = family_exact.grid(grid_per_axis)
    exact = SemiconcaveApprox.exact(family_exact, tie_rtol)
    mask = omega_delta_mask(family_exact, pts, delta, tie_rtol)
    _, g_ex = exact.value_and_grad(pts[mask])
    _, g_ap = approx.value_and_grad(pts[mask])
    measured = float(np.max(np.linalg.norm(g_ap - g_ex, axis=-1), initial=0.0))
    L = float(np.max(np.linalg.norm(family_exact.grads(pts), axis=-1)))
    dist_v, dist_g = _family_distances(family_exact, family_interp, pts)
    smoothing = 2.0 * L * (float(g.deriv(0.0)) + (1.0 - float(g.deriv(0.5 * delta)) ** (n - 1)))
    value_term = 2.0 * n * (n - 1) * L * g.sup_second_deriv * dist_v
    bound = smoothing + value_term + dist_g
    return LocalizedBoundReport(measured, bound, smoothing, value_term, dist_g, float(mask.mean()))


@dataclass(frozen=True)
class AgreementReport:
    measured: float
    bound: float
    premise_ok: bool

    @property
    def ok(self) -> bool:
        return self.measured <= self.bound + 1e-10


def localized_gradient_agreement(family_exact: FunctionFamily, family_pert: FunctionFamily, delta: float,
                                 points, tie_rtol: float = 1e-12) -> AgreementReport:
    """Reference gradients of two nearby exact minima compared on Omega_delta.

    ``premise_ok`` reports whether every member moved by less than
    ``delta/2`` on the points, which the bound requires.
    """
    points = np.asarray(points, dtype=float)
    a = SemiconcaveApprox.exact(family_exact, tie_rtol)
    b = SemiconcaveApprox.exact(family_pert, tie_rtol)
    _, ga = a.value_and_grad(points)
    _, gb = b.value_and_grad(points)
    mask = omega_delta_mask(family_exact, points, delta, tie_rtol)
    measured = float(np.max(np.linalg.norm(ga - gb, axis=-1)[mask], initial=0.0))
    dist_v, dist_g = _family_distances(family_exact, family_pert, points)
    premise = dist_v < 0.5 * delta
    return AgreementReport(measured, dist_g, premise)


def table1(N: int = 1001, deltas: Sequence[float] = (1e-4, 1e-3, 1e-2, 1e-1),
           exact: Optional[ExactSolution] = None) -> Dict[float, float]:
    """Fraction of grid points in Omega_delta for each delta."""
    from .testbed import exact_solution

    exact = exact or exact_solution(2)
    pts = exact.family.grid(N)
    out = {}
    for delta in deltas:
        delta = float(delta)
        if delta == 0.0:
            out[delta] = 1.0
            continue
        mask = omega_delta_mask(exact.family, pts, delta, exact.tie_rtol)
        out[delta] = float(np.count_nonzero(mask)) / mask.size
    return out
