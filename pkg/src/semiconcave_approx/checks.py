"""Randomized invariant suites with fixed seeds.

Each suite returns a list of :class:`CheckResult`; a result passes when its
worst observed violation is at most its tolerance.  Suites never raise on a
failed invariant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .chebyshev import interpolate_family
from .metrics import (
    LipschitzFunction,
    coarea_check,
    global_error_bound_check,
    localized_bound_check,
    localized_gradient_agreement,
)
from .semiconcave import (
    C2Function,
    FunctionFamily,
    SemiconcaveApprox,
    estimate_constants,
    hessian_bound_check,
)
from .smoothing import SmoothPlus, SmootherKind, algebraic_plus, check_plus_axioms, moreau_plus
from .softmin import psi_exact, psi_smooth, weights_product_form
from .testbed import exp_distance_family

DEFAULT_SEED = 20240917
SCOPES = ("axioms", "softmin", "bounds", "coarea", "all")
EPSILONS = (1e-3, 1e-2, 1e-1)


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    tol: float
    count: int = 0
    #: violation is expected from the closed form and does not fail the run
    known_deviation: bool = False

    @property
    def passed(self) -> bool:
        return bool(self.worst <= self.tol)

    @property
    def blocking(self) -> bool:
        return not self.passed and not self.known_deviation

    def line(self) -> str:
        status = "PASS" if self.passed else ("XFAIL" if self.known_deviation else "FAIL")
        return f"{status} {self.name}: worst={self.worst:.3e} tol={self.tol:.1e} n={self.count}"


def default_smoothers(epsilons: Sequence[float] = EPSILONS) -> List[SmoothPlus]:
    return [make(e) for make in (moreau_plus, algebraic_plus) for e in epsilons]


def _merge(name: str, tol: float, parts: Iterable[tuple], known_deviation: bool = False) -> CheckResult:
    worst = -math.inf
    count = 0
    for w, c in parts:
        worst = max(worst, float(w))
        count += int(c)
    return CheckResult(name, worst if count else 0.0, tol, count, known_deviation)


# --- axioms -------------------------------------------------------------------

def axiom_suite(smoothers: Optional[Sequence[SmoothPlus]] = None, samples: int = 20001) -> List[CheckResult]:
    """Axiom violations per smoother kind.

    The algebraic closed form dips below zero for ``s < 0`` (down to
    ``-eps/2``), so its nonnegativity entry is flagged as a known deviation.
    """
    smoothers = default_smoothers() if smoothers is None else smoothers
    worst: Dict[tuple, List[tuple]] = {}
    for g in smoothers:
        rep = check_plus_axioms(g, samples, (-50.0 * g.epsilon, 50.0 * g.epsilon))
        for key, v in rep.items():
            worst.setdefault((g.kind, key), []).append((v, samples))
    return [_merge(f"axiom.{kind.value}.{k}", 1e-12, v,
                   known_deviation=(kind is SmootherKind.ALGEBRAIC and k == "nonnegativity"))
            for (kind, k), v in worst.items()]


# --- softmin ------------------------------------------------------------------

def random_vectors(rng: np.random.Generator, rows: int, n: int) -> np.ndarray:
    """Mixed-scale vectors in ``[-10, 10]^n``; about a fifth are snapped to a lattice to create ties."""
    scale = 10.0 ** rng.uniform(-4.0, 1.0, size=(rows, 1))
    a = rng.uniform(-1.0, 1.0, size=(rows, n)) * scale
    snap = rng.random(rows) < 0.2
    a[snap] = np.round(a[snap] * 20.0) / 20.0
    return a


def _breakpoint_distance(a: np.ndarray, g: SmoothPlus) -> np.ndarray:
    """Smallest distance of any recursion argument to 0 or eps (Moreau kinks)."""
    psi = a[:, 0].copy()
    dist = np.full(len(a), np.inf)
    for i in range(1, a.shape[1]):
        r = a[:, i] - psi
        dist = np.minimum(dist, np.minimum(np.abs(r), np.abs(r - g.epsilon)))
        psi = a[:, i] - g.value(r)
    return dist


def fd_weights(a: np.ndarray, g: SmoothPlus, h: float = 1e-6) -> np.ndarray:
    n = a.shape[-1]
    out = np.empty(a.shape)
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        out[..., j] = (psi_smooth(a + e, g).value - psi_smooth(a - e, g).value) / (2.0 * h)
    return out


def softmin_suite(smoothers: Optional[Sequence[SmoothPlus]] = None, total: int = 100_000,
                  seed: int = DEFAULT_SEED, max_n: int = 8, hessian_rows: int = 200,
                  fd_rows: int = 200) -> List[CheckResult]:
    """Simplex, product form, uniform bound, Moreau ordering, FD and Hessian checks."""
    smoothers = default_smoothers() if smoothers is None else smoothers
    rng = np.random.default_rng(seed)
    rows = max(1, -(-total // (len(smoothers) * max_n)))
    parts: Dict[str, List[tuple]] = {k: [] for k in
                                     ("simplex", "product_form", "uniform_bound", "moreau_overestimates",
                                      "fd_weights", "psi_hessian_nsd", "psi_hessian_norm")}
    for g in smoothers:
        for n in range(1, max_n + 1):
            a = random_vectors(rng, rows, n)
            res = psi_smooth(a, g)
            w = res.weights
            neg = np.max(-w)
            sum_err = np.max(np.abs(w.sum(axis=-1) - 1.0))
            parts["simplex"].append((max(neg, sum_err), rows))
            parts["product_form"].append((np.max(np.abs(w - weights_product_form(a, g))), rows))
            exact = psi_exact(a)
            parts["uniform_bound"].append((np.max(np.abs(res.value - exact) - (n - 1) * g.epsilon), rows))
            if g.underestimates:
                parts["moreau_overestimates"].append((np.max(exact - res.value), rows))

            sub = a[:fd_rows]
            keep = _breakpoint_distance(sub, g) >= 1e-3 if g.underestimates else np.ones(len(sub), bool)
            if keep.any():
                err = np.max(np.abs(fd_weights(sub[keep], g) - w[:fd_rows][keep]))
                parts["fd_weights"].append((err, int(keep.sum())))

            hs = psi_smooth(a[:hessian_rows], g, want_hessian=True).hessian
            eig = np.linalg.eigvalsh(hs)
            parts["psi_hessian_nsd"].append((np.max(eig[..., -1]), len(hs)))
            opnorm = np.max(np.abs(eig), axis=-1)
            parts["psi_hessian_norm"].append(
                (np.max(opnorm - 2.0 * (n - 1) * g.sup_second_deriv), len(hs)))
    tols = {"simplex": 1e-12, "product_form": 1e-12, "uniform_bound": 1e-12,
            "moreau_overestimates": 1e-15, "fd_weights": 1e-5, "psi_hessian_nsd": 1e-10,
            "psi_hessian_norm": 1e-9}
    return [_merge(f"softmin.{k}", tols[k], v) for k, v in parts.items()]


# --- bounds -------------------------------------------------------------------

def _shifted_family(family: FunctionFamily, shifts: np.ndarray, slopes: np.ndarray) -> FunctionFamily:
    """Adds ``c_i + l_i . x`` to member ``i``."""
    members = []
    for f, c, l in zip(family.members, shifts, slopes):
        def value(x, f=f, c=c, l=l):
            return f.value(x) + c + np.asarray(x, dtype=float) @ l

        def grad(x, f=f, l=l):
            return f.grad(x) + l

        members.append(C2Function(value, grad, f.hess, f.lower, f.upper, f.name + "+affine"))
    return FunctionFamily(tuple(members))


def bounds_suite(seed: int = DEFAULT_SEED, grid_per_axis: int = 201,
                 degrees: Sequence[int] = (2, 4, 6, 8, 10)) -> List[CheckResult]:
    """Composite Hessian, global, localized and agreement bounds on the exp-distance family."""
    rng = np.random.default_rng(seed + 1)
    fam = exp_distance_family(2)
    n = len(fam)
    constants = estimate_constants(fam, grid_per_axis)
    pts = rng.uniform(-1.0, 1.0, size=(2000, 2))

    upper, lower = [], []
    for g in default_smoothers((1e-3, 1e-2, 1e-1)):
        rep = hessian_bound_check(SemiconcaveApprox.with_smoother(fam, g), pts, constants)
        upper.append((rep.worst_upper_violation, len(pts)))
        lower.append((rep.worst_lower_violation, len(pts)))

    value_parts, grad_parts, loc_parts = [], [], []
    interp = {m: interpolate_family(fam, m) for m in degrees}
    for m, ifam in interp.items():
        for eps in (1e-4, 1e-2):
            for p in (1.0, 2.0):
                rep = global_error_bound_check(fam, ifam, eps, p, "moreau", grid_per_axis)
                value_parts.append((rep.value_lhs / rep.value_rhs - 1.0, 1))
                grad_parts.append((rep.grad_lhs / rep.grad_rhs - 1.0, 1))
        for delta in (1e-2, 1e-1):
            for eps in (e for e in (1e-4, 1e-3, 1e-2) if e < delta / (2.0 * (n - 1))):
                for mode in ("moreau", "algebraic"):
                    rep = localized_bound_check(fam, ifam, eps, delta, mode, grid_per_axis)
                    loc_parts.append((rep.measured - rep.bound * (1.0 + 1e-6) - 1e-8, 1))

    agree = []
    for _ in range(20):
        delta = 10.0 ** rng.uniform(-2.0, -0.5)
        size = 0.2 * delta
        pert = _shifted_family(fam, rng.uniform(-size, size, n) / 2.0,
                               rng.uniform(-size, size, (n, 2)) / 4.0)
        rep = localized_gradient_agreement(fam, pert, delta, rng.uniform(-1.0, 1.0, (2000, 2)))
        if rep.premise_ok:
            agree.append((rep.measured - rep.bound, 2000))

    return [
        _merge("bounds.composite_hessian_upper", 1e-8, upper),
        _merge("bounds.composite_hessian_lower", 1e-8, lower),
        _merge("bounds.global_value", 1e-6, value_parts),
        _merge("bounds.global_gradient", 1e-6, grad_parts),
        _merge("bounds.localized_gradient", 0.0, loc_parts),
        _merge("bounds.localized_agreement", 1e-10, agree),
    ]


# --- coarea -------------------------------------------------------------------

def coarea_suite(seed: int = DEFAULT_SEED, pairs: int = 200, probe_grid: int = 201) -> List[CheckResult]:
    """Coarea-type inequality on (smoothed - exact) and (interpolated - exact) differences."""
    rng = np.random.default_rng(seed + 2)
    fam = exp_distance_family(2)
    exact = SemiconcaveApprox.exact(fam, 1e-12)
    interp: Dict[int, FunctionFamily] = {}
    parts: Dict[float, List[tuple]] = {1.0: [], 2.0: [], 4.0: []}
    for k in range(pairs):
        p = (1.0, 2.0, 4.0)[k % 3]
        kind = rng.integers(3)
        if kind == 2:
            m = int(rng.integers(2, 11))
            if m not in interp:
                interp[m] = interpolate_family(fam, m)
            other = SemiconcaveApprox.exact(interp[m], 1e-12)
        else:
            eps = 10.0 ** rng.uniform(-3.0, -1.0)
            other = (SemiconcaveApprox.moreau if kind == 0 else SemiconcaveApprox.algebraic)(fam, eps)
        rep = coarea_check(LipschitzFunction.difference(other, exact), p, fam.lower, fam.upper, probe_grid)
        ratio = rep.lhs / rep.rhs if rep.rhs > 0 else (0.0 if rep.lhs == 0 else math.inf)
        parts[p].append((ratio - 1.0, 1))
    return [_merge(f"coarea.p={int(p)}", 1e-6, v) for p, v in parts.items()]


SUITES: Dict[str, Callable[..., List[CheckResult]]] = {
    "axioms": axiom_suite,
    "softmin": softmin_suite,
    "bounds": bounds_suite,
    "coarea": coarea_suite,
}


def run_checks(scope: str = "all", seed: int = DEFAULT_SEED,
               smoothers: Optional[Sequence[SmoothPlus]] = None) -> List[CheckResult]:
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    names = list(SUITES) if scope == "all" else [scope]
    out: List[CheckResult] = []
    for name in names:
        if name == "axioms":
            out += axiom_suite(smoothers)
        elif name == "softmin":
            out += softmin_suite(smoothers, seed=seed)
        else:
            out += SUITES[name](seed=seed)
    return out
