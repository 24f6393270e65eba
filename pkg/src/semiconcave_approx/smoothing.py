"""Regularizations of the positive part ``(s)_+ = max(s, 0)``.

Two families are provided: the Moreau envelope of the positive part
(piecewise quadratic, C^{1,1}) and a smooth algebraic one built from
``sqrt(s^2 + eps^2)``.  All maps accept scalars or numpy arrays.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import InvalidParameterError

ScalarMap = Callable[[np.ndarray], np.ndarray]


class SmootherKind(str, enum.Enum):
    MOREAU = "moreau"
    ALGEBRAIC = "algebraic"
    CUSTOM = "custom"


@dataclass(frozen=True)
class SmoothPlus:
    """A regularized positive part ``g_eps`` with its first two derivatives.

    ``sup_second_deriv`` is the exact value of ``sup |g''_eps|``; it enters
    the Hessian bounds of the smoothed minimum.
    """

    epsilon: float
    kind: SmootherKind
    value: ScalarMap
    deriv: ScalarMap
    second_deriv: ScalarMap
    sup_second_deriv: float

    @property
    def underestimates(self) -> bool:
        """True when ``g_eps(s) <= (s)_+`` and ``g'_eps`` vanishes on ``s <= 0``."""
        return self.kind is SmootherKind.MOREAU

    def __repr__(self) -> str:
        return f"SmoothPlus(kind={self.kind.value}, epsilon={self.epsilon!r})"


def _check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not np.isfinite(epsilon) or epsilon <= 0.0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon!r}")
    return epsilon


def moreau_plus(epsilon: float) -> SmoothPlus:
    """Moreau envelope ``min_t (t)_+ + |t - s|^2 / (2 eps)``.

    Equals 0 for ``s < 0``, ``s^2/(2 eps)`` on ``[0, eps)`` and ``s - eps/2``
    beyond.  The second derivative is taken as ``1/eps`` on the half-open
    interval ``[0, eps)`` and 0 elsewhere.
    """
    eps = _check_epsilon(epsilon)

    def value(s):
        s = np.asarray(s, dtype=float)
        return np.where(s < 0.0, 0.0, np.where(s < eps, s * s / (2.0 * eps), s - 0.5 * eps))

    def deriv(s):
        s = np.asarray(s, dtype=float)
        return np.where(s < 0.0, 0.0, np.where(s < eps, s / eps, 1.0))

    def second_deriv(s):
        s = np.asarray(s, dtype=float)
        return np.where((s >= 0.0) & (s < eps), 1.0 / eps, 0.0)

    return SmoothPlus(eps, SmootherKind.MOREAU, value, deriv, second_deriv, 1.0 / eps)


def algebraic_plus(epsilon: float) -> SmoothPlus:
    """``g(s) = (s + sqrt(s^2 + eps^2) - eps) / 2``; ``sup |g''| = 1/(2 eps)`` at 0."""
    eps = _check_epsilon(epsilon)

    def value(s):
        s = np.asarray(s, dtype=float)
        return 0.5 * (s + np.hypot(s, eps) - eps)

    def deriv(s):
        s = np.asarray(s, dtype=float)
        return 0.5 * (1.0 + s / np.hypot(s, eps))

    def second_deriv(s):
        s = np.asarray(s, dtype=float)
        return 0.5 * eps * eps / np.hypot(s, eps) ** 3

    return SmoothPlus(eps, SmootherKind.ALGEBRAIC, value, deriv, second_deriv, 0.5 / eps)


def make_smoother(kind: str, epsilon: float) -> SmoothPlus:
    kind = SmootherKind(kind)
    if kind is SmootherKind.MOREAU:
        return moreau_plus(epsilon)
    if kind is SmootherKind.ALGEBRAIC:
        return algebraic_plus(epsilon)
    raise InvalidParameterError("custom smoothers must be constructed directly")


@dataclass(frozen=True)
class AxiomReport:
    """Worst-case violation of each smoother axiom over the sampled points.

    A violation of 0 means the axiom held at every sample.  The Moreau-only
    entries are ``None`` for other kinds.
    """

    nonnegativity: float
    deriv_range: float
    convexity: float
    closeness: float
    underestimation: Optional[float] = None
    flat_left: Optional[float] = None

    def items(self):
        for name in ("nonnegativity", "deriv_range", "convexity", "closeness",
                     "underestimation", "flat_left"):
            v = getattr(self, name)
            if v is not None:
                yield name, v

    def worst(self) -> float:
        return max(v for _, v in self.items())

    def ok(self, tol: float = 1e-12) -> bool:
        return self.worst() <= tol


def check_plus_axioms(g: SmoothPlus, samples: int, interval: Tuple[float, float]) -> AxiomReport:
    """Sample ``interval`` uniformly and measure how far ``g`` is from each axiom.

    Never raises on a violated axiom; the caller decides what to do with the
    report.
    """
    if samples < 2:
        raise InvalidParameterError("samples must be >= 2")
    lo, hi = map(float, interval)
    if hi < lo:
        raise InvalidParameterError("interval must satisfy lo <= hi")
    s = np.linspace(lo, hi, int(samples))
    val = np.asarray(g.value(s), dtype=float)
    d1 = np.asarray(g.deriv(s), dtype=float)
    d2 = np.asarray(g.second_deriv(s), dtype=float)
    plus = np.maximum(s, 0.0)

    nonneg = float(np.max(np.maximum(-val, 0.0)))
    drange = float(np.max(np.maximum(np.maximum(-d1, d1 - 1.0), 0.0)))
    convex = float(np.max(np.maximum(-d2, 0.0)))
    close = float(np.max(np.maximum(np.abs(val - plus) - g.epsilon, 0.0)))
    under = flat = None
    if g.kind is SmootherKind.MOREAU:
        under = float(np.max(np.maximum(val - plus, 0.0)))
        left = s <= 0.0
        flat = float(np.max(np.abs(d1[left]))) if left.any() else 0.0
    return AxiomReport(nonneg, drange, convex, close, under, flat)
