"""Exact and smoothed minimum of a real vector.

The exact minimum is evaluated through ``psi_{i+1} = a_{i+1} - (a_{i+1} - psi_i)_+``;
the smoothed one replaces ``(.)_+`` by a :class:`SmoothPlus`.  The gradient of
the smoothed minimum is a probability vector over the entries ("weights").

Every vector-valued function here broadcasts over leading axes: an input of
shape ``(..., n)`` is treated as a batch of length-``n`` vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple

import numpy as np

from .errors import InvalidArgumentError, InvalidParameterError
from .smoothing import SmoothPlus


def _as_vectors(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        a = a[None]
    if a.shape[-1] == 0:
        raise InvalidArgumentError("empty vector")
    return a


@dataclass(frozen=True)
class SoftMinEval:
    value: np.ndarray
    weights: np.ndarray
    hessian: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ActiveIndexInfo:
    """Indices attaining the minimum (0-based) and the largest of them."""

    active_set: FrozenSet[int]
    largest_active: int
    tie_tolerance: float = 0.0


def psi_exact(a, n: Optional[int] = None) -> np.ndarray:
    """Minimum over the first ``n`` entries via the positive-part recursion."""
    a = _as_vectors(a)
    size = a.shape[-1]
    if n is None:
        n = size
    if not 1 <= n <= size:
        raise InvalidArgumentError(f"n must lie in [1, {size}], got {n}")
    psi = a[..., 0].copy()
    for i in range(1, n):
        ai = a[..., i]
        psi = ai - np.maximum(ai - psi, 0.0)
    return psi


def psi_smooth(a, g: SmoothPlus, want_hessian: bool = False) -> SoftMinEval:
    """Smoothed minimum with its gradient and, optionally, its Hessian.

    One forward pass: ``psi_{i+1} = a_{i+1} - g(a_{i+1} - psi_i)``; the weights
    follow ``p_i = (1 - g'(r)) e_i + g'(r) p_{i-1}`` and the Hessian the
    rank-one update ``H_i = -g''(r) u u^T + g'(r) H_{i-1}``, ``u = e_i - p_{i-1}``.
    """
    a = _as_vectors(a)
    n = a.shape[-1]
    batch = a.shape[:-1]
    psi = a[..., 0].copy()
    w = np.zeros(batch + (n,))
    w[..., 0] = 1.0
    hess = np.zeros(batch + (n, n)) if want_hessian else None
    for i in range(1, n):
        r = a[..., i] - psi
        d1 = np.asarray(g.deriv(r), dtype=float)
        if want_hessian:
            u = -w.copy()
            u[..., i] += 1.0
            d2 = np.asarray(g.second_deriv(r), dtype=float)
            hess = d1[..., None, None] * hess - d2[..., None, None] * (u[..., :, None] * u[..., None, :])
        psi = a[..., i] - np.asarray(g.value(r), dtype=float)
        w = d1[..., None] * w
        w[..., i] += 1.0 - d1
    return SoftMinEval(psi, w, hess)


def weights_product_form(a, g: SmoothPlus) -> np.ndarray:
    """Weights from the closed product formula.

    ``p_j = (1 - g'(r_j)) * prod_{i > j} g'(r_i)`` with ``r_i = a_i - psi_{i-1,eps}``;
    the first factor is 1 for the first entry.
    """
    a = _as_vectors(a)
    n = a.shape[-1]
    d1 = np.zeros(a.shape)
    psi = a[..., 0].copy()
    for i in range(1, n):
        r = a[..., i] - psi
        d1[..., i] = g.deriv(r)
        psi = a[..., i] - np.asarray(g.value(r), dtype=float)
    own = 1.0 - d1
    own[..., 0] = 1.0
    # tail[..., j] = prod_{i > j} d1[..., i]
    tail = np.ones(a.shape)
    for j in range(n - 2, -1, -1):
        tail[..., j] = tail[..., j + 1] * d1[..., j + 1]
    return own * tail


def active_info(a, tie_tolerance: float = 0.0) -> ActiveIndexInfo:
    a = np.asarray(a, dtype=float).ravel()
    if a.size == 0:
        raise InvalidArgumentError("empty vector")
    if tie_tolerance < 0:
        raise InvalidParameterError("tie_tolerance must be nonnegative")
    idx = np.flatnonzero(a <= a.min() + tie_tolerance)
    return ActiveIndexInfo(frozenset(int(i) for i in idx), int(idx.max()), float(tie_tolerance))


def limit_weights(a, tie_tolerance: float = 0.0) -> np.ndarray:
    """Indicator of the largest active index: the eps -> 0 limit for the Moreau smoother."""
    info = active_info(a, tie_tolerance)
    out = np.zeros(np.asarray(a).size)
    out[info.largest_active] = 1.0
    return out


def lse_min(a, epsilon: float) -> Tuple[np.ndarray, np.ndarray]:
    """Log-Sum-Exp minimum ``-eps log(mean(exp(-a/eps)))`` and its softmin weights.

    Shifted by ``min(a)`` before exponentiating so tiny ``eps`` cannot overflow.
    """
    a = _as_vectors(a)
    epsilon = float(epsilon)
    if not epsilon > 0.0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon!r}")
    n = a.shape[-1]
    amin = a.min(axis=-1, keepdims=True)
    e = np.exp(-(a - amin) / epsilon)
    total = e.sum(axis=-1, keepdims=True)
    value = amin[..., 0] - epsilon * np.log(total[..., 0] / n)
    return value, e / total
