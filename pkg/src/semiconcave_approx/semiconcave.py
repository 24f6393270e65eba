"""Composition of a smoothed minimum with a family of C^2 functions.

``v(x) = psi(phi_1(x), ..., phi_n(x))`` where ``psi`` is the exact minimum,
the smoothed minimum for a given :class:`SmoothPlus`, or the Log-Sum-Exp
minimum.  Points are arrays of shape ``(..., d)``.

Indices are 0-based throughout.  Tie tolerances are relative: an index ``i``
is active at ``x`` when ``phi_i(x) <= v(x) + tol * (1 + |v(x)|)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, InvalidArgumentError, InvalidParameterError, UnsupportedModeError
from .smoothing import SmoothPlus, algebraic_plus, moreau_plus
from .softmin import ActiveIndexInfo, lse_min, psi_smooth


@dataclass(frozen=True)
class C2Function:
    """A scalar function on the box ``[lower, upper]`` with gradient and Hessian.

    ``value``, ``grad`` and ``hess`` map points of shape ``(..., d)`` to arrays
    of shape ``(...)``, ``(..., d)`` and ``(..., d, d)``.
    """

    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    lower: np.ndarray
    upper: np.ndarray
    name: str = ""

    @property
    def dim(self) -> int:
        return len(self.lower)


def box(lower: Sequence[float], upper: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
        raise InvalidArgumentError("box bounds must be 1-D with lower < upper")
    return lo, hi


@dataclass(frozen=True)
class FunctionFamily:
    members: Tuple[C2Function, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InvalidArgumentError("a family needs at least one member")
        lo, hi = members[0].lower, members[0].upper
        for f in members[1:]:
            if not (np.array_equal(f.lower, lo) and np.array_equal(f.upper, hi)):
                raise InvalidArgumentError("all members must share the same domain box")
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i: int) -> C2Function:
        return self.members[i]

    @property
    def lower(self) -> np.ndarray:
        return self.members[0].lower

    @property
    def upper(self) -> np.ndarray:
        return self.members[0].upper

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def values(self, x) -> np.ndarray:
        return np.stack([f.value(x) for f in self.members], axis=-1)

    def grads(self, x) -> np.ndarray:
        return np.stack([f.grad(x) for f in self.members], axis=-2)

    def hessians(self, x) -> np.ndarray:
        return np.stack([f.hess(x) for f in self.members], axis=-3)

    def check_domain(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise InvalidArgumentError(f"points must have trailing dimension {self.dim}")
        if np.any(x < self.lower) or np.any(x > self.upper) or not np.all(np.isfinite(x)):
            raise DomainError("point outside the domain box")
        return x

    def grid(self, per_axis: int) -> np.ndarray:
        """Uniform tensor grid, shape ``(per_axis ** d, d)``."""
        axes = [np.linspace(lo, hi, per_axis) for lo, hi in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


class Mode(str, enum.Enum):
    EXACT = "exact"
    MOREAU = "moreau"
    ALGEBRAIC = "algebraic"
    LSE = "lse"
    CUSTOM = "custom"


_SMOOTHER_MODES = (Mode.MOREAU, Mode.ALGEBRAIC, Mode.CUSTOM)


def _last_true(mask: np.ndarray) -> np.ndarray:
    n = mask.shape[-1]
    return n - 1 - np.argmax(mask[..., ::-1], axis=-1)


@dataclass(frozen=True)
class SemiconcaveApprox:
    """``psi o Phi_n`` for one of the four minimum operators.

    Build with :meth:`exact`, :meth:`moreau`, :meth:`algebraic` or :meth:`lse`.
    ``tie_tolerance`` is used by the exact mode to pick the reference gradient.
    """

    family: FunctionFamily
    mode: Mode
    epsilon: float = 0.0
    tie_tolerance: float = 0.0
    smoother: Optional[SmoothPlus] = field(default=None, compare=False)

    @classmethod
    def exact(cls, family, tie_tolerance: float = 0.0):
        return cls(family, Mode.EXACT, 0.0, tie_tolerance)

    @classmethod
    def moreau(cls, family, epsilon: float):
        return cls(family, Mode.MOREAU, float(epsilon), 0.0, moreau_plus(epsilon))

    @classmethod
    def algebraic(cls, family, epsilon: float):
        return cls(family, Mode.ALGEBRAIC, float(epsilon), 0.0, algebraic_plus(epsilon))

    @classmethod
    def lse(cls, family, epsilon: float):
        if not epsilon > 0:
            raise InvalidParameterError("epsilon must be positive")
        return cls(family, Mode.LSE, float(epsilon))

    @classmethod
    def with_smoother(cls, family, g: SmoothPlus):
        return cls(family, Mode(g.kind.value), g.epsilon, 0.0, g)

    @classmethod
    def build(cls, family, mode: str, epsilon: float = 0.0, tie_tolerance: float = 0.0):
        mode = Mode(mode)
        if mode is Mode.EXACT:
            return cls.exact(family, tie_tolerance)
        return getattr(cls, mode.value)(family, epsilon)

    @property
    def n(self) -> int:
        return len(self.family)

    @property
    def is_smooth(self) -> bool:
        return self.mode is not Mode.EXACT

    def _minimum(self, a: np.ndarray):
        """Value and weights of the minimum operator applied to ``a`` (..., n)."""
        if self.mode is Mode.LSE:
            return lse_min(a, self.epsilon)
        if self.mode is Mode.EXACT:
            v = a.min(axis=-1)
            tol = self.tie_tolerance * (1.0 + np.abs(v))
            idx = _last_true(a <= (v + tol)[..., None])
            w = np.zeros(a.shape)
            np.put_along_axis(w, idx[..., None], 1.0, axis=-1)
            return v, w
        res = psi_smooth(a, self.smoother)
        return res.value, res.weights

    def value(self, x) -> np.ndarray:
        x = self.family.check_domain(x)
        a = self.family.values(x)
        if self.mode is Mode.EXACT:
            return a.min(axis=-1)
        return self._minimum(a)[0]

    def weights(self, x) -> np.ndarray:
        x = self.family.check_domain(x)
        return self._minimum(self.family.values(x))[1]

    def value_and_grad(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """Value and gradient in one pass over the family.

        In exact mode the gradient is the reference gradient of the largest
        active member.
        """
        x = self.family.check_domain(x)
        v, w = self._minimum(self.family.values(x))
        grads = self.family.grads(x)
        return v, np.einsum("...n,...nd->...d", w, grads)

    def grad(self, x) -> np.ndarray:
        return self.value_and_grad(x)[1]

    def hessian(self, x) -> np.ndarray:
        """Chain-rule Hessian ``J^T H_psi J + sum_k w_k hess(phi_k)``."""
        if self.mode not in _SMOOTHER_MODES:
            raise UnsupportedModeError(f"Hessian is not available in {self.mode.value} mode")
        x = self.family.check_domain(x)
        res = psi_smooth(self.family.values(x), self.smoother, want_hessian=True)
        jac = self.family.grads(x)
        outer = np.einsum("...rd,...rk,...ke->...de", jac, res.hessian, jac)
        return outer + np.einsum("...k,...kde->...de", res.weights, self.family.hessians(x))


def eval_value(v: SemiconcaveApprox, x) -> np.ndarray:
    return v.value(x)


def eval_grad(v: SemiconcaveApprox, x) -> np.ndarray:
    return v.grad(x)


def _relative_tol(values: np.ndarray, tie_tolerance: float) -> np.ndarray:
    vmin = values.min(axis=-1)
    return vmin, tie_tolerance * (1.0 + np.abs(vmin))


def active_set(v: SemiconcaveApprox, x, tie_tolerance: float = 0.0) -> ActiveIndexInfo:
    """Members attaining the exact minimum at the single point ``x``."""
    x = v.family.check_domain(x)
    if x.ndim != 1:
        raise InvalidArgumentError("active_set expects a single point")
    a = v.family.values(x)
    vmin, tol = _relative_tol(a, tie_tolerance)
    idx = np.flatnonzero(a <= vmin + tol)
    return ActiveIndexInfo(frozenset(int(i) for i in idx), int(idx.max()), float(tie_tolerance))


def gaps(family: FunctionFamily, x) -> Tuple[np.ndarray, np.ndarray]:
    """``phi_j(x) - v_n(x)`` for every member, and the minimum ``v_n(x)``."""
    a = family.values(family.check_domain(x))
    vmin = a.min(axis=-1)
    return a - vmin[..., None], vmin


def omega_delta_member(v: SemiconcaveApprox, x, delta: float, tie_tolerance: float = 0.0) -> np.ndarray:
    """True where no member's gap to the minimum lies strictly between the tie tolerance and ``delta``."""
    if not delta > 0:
        raise InvalidParameterError("delta must be positive")
    return omega_delta_mask(v.family, x, delta, tie_tolerance)


def omega_delta_mask(family: FunctionFamily, x, delta: float, tie_tolerance: float = 0.0) -> np.ndarray:
    g, vmin = gaps(family, x)
    tol = (tie_tolerance * (1.0 + np.abs(vmin)))[..., None]
    bad = (g > tol) & (g < delta)
    return ~bad.any(axis=-1)


def gradient_active_set_index(v: SemiconcaveApprox, x) -> np.ndarray:
    """Index of the largest weight, ties broken toward the largest index."""
    if not v.is_smooth:
        raise UnsupportedModeError("gradient active sets need a smooth mode")
    w = v.weights(x)
    return _last_true(w >= w.max(axis=-1, keepdims=True))


def estimate_constants(family: FunctionFamily, grid_per_axis: int = 201) -> Tuple[float, float]:
    """Grid estimates of ``L = max |grad phi_i|`` and ``C = max ||hess phi_i||_2``."""
    if grid_per_axis < 2:
        raise InvalidParameterError("grid_per_axis must be >= 2")
    pts = family.grid(grid_per_axis)
    L = 0.0
    C = 0.0
    for f in family.members:
        L = max(L, float(np.max(np.linalg.norm(f.grad(pts), axis=-1))))
        # symmetric: operator norm = largest |eigenvalue|
        eig = np.linalg.eigvalsh(f.hess(pts))
        C = max(C, float(np.max(np.abs(eig))))
    return L, C


@dataclass(frozen=True)
class HessianReport:
    lambda_max: np.ndarray
    lambda_min: np.ndarray
    C: float
    L: float
    upper_bound: float
    lower_bound: float
    tol: float = 1e-8

    @property
    def worst_upper_violation(self) -> float:
        return float(np.max(self.lambda_max - self.upper_bound, initial=-np.inf))

    @property
    def worst_lower_violation(self) -> float:
        return float(np.max(self.lower_bound - self.lambda_min, initial=-np.inf))

    @property
    def ok(self) -> bool:
        return self.worst_upper_violation <= self.tol and self.worst_lower_violation <= self.tol


def hessian_bound_check(v: SemiconcaveApprox, sample_points, constants: Optional[Tuple[float, float]] = None,
                        grid_per_axis: int = 201) -> HessianReport:
    """Eigenvalue range of the composite Hessian at ``sample_points``.

    Upper bound: ``C`` (semiconcavity); lower bound:
    ``-(C + 2 n (n-1) L^2 sup|g''|)``.
    """
    if v.mode not in _SMOOTHER_MODES:
        raise UnsupportedModeError(f"Hessian bound check is not available in {v.mode.value} mode")
    L, C = constants if constants is not None else estimate_constants(v.family, grid_per_axis)
    eig = np.linalg.eigvalsh(v.hessian(sample_points))
    n = v.n
    lower = -(C + 2.0 * n * (n - 1) * L * L * v.smoother.sup_second_deriv)
    return HessianReport(eig[..., -1], eig[..., 0], C, L, C, lower)
