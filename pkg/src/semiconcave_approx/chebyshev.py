"""Tensor-product Chebyshev interpolation on ``[-1, 1]^2``.

A degree-``m`` interpolant is ``sum_{i,j=0}^m theta[i, j] T_i(x_1) T_j(x_2)``
with ``theta`` obtained from samples at the Chebyshev-Gauss-Lobatto nodes
``cos(pi k / m)``.  Derivatives use the coefficient recurrence
``c'_{k-1} = c'_{k+1} + 2 k c_k`` along each axis.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .errors import DataError, InvalidArgumentError
from .semiconcave import C2Function, FunctionFamily

_LOWER = np.array([-1.0, -1.0])
_UPPER = np.array([1.0, 1.0])


@dataclass(frozen=True)
class ChebCoeffs2D:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise InvalidArgumentError(f"coefficients must be (m+1)x(m+1), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def __call__(self, x) -> np.ndarray:
        return evaluate(self.coeffs, x)


def lobatto_nodes(m: int) -> np.ndarray:
    if m < 0:
        raise InvalidArgumentError("degree must be nonnegative")
    if m == 0:
        return np.zeros(1)
    return np.cos(np.pi * np.arange(m + 1) / m)


def _transform_matrix(m: int) -> np.ndarray:
    """Maps node samples to coefficients (discrete cosine transform, type I)."""
    if m == 0:
        return np.ones((1, 1))
    k = np.arange(m + 1)
    mat = (2.0 / m) * np.cos(np.pi * np.outer(k, k) / m)
    mat[:, [0, m]] *= 0.5
    mat[[0, m], :] *= 0.5
    return mat


def vander(t, m: int) -> np.ndarray:
    """``[T_0(t), ..., T_m(t)]`` along a new last axis (three-term recurrence)."""
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (m + 1,))
    out[..., 0] = 1.0
    if m >= 1:
        out[..., 1] = t
    for k in range(2, m + 1):
        out[..., k] = 2.0 * t * out[..., k - 1] - out[..., k - 2]
    return out


def derivative_coeffs(c: np.ndarray, axis: int) -> np.ndarray:
    """Coefficients of the derivative series along ``axis`` (same shape, top row zero)."""
    c = np.moveaxis(np.asarray(c, dtype=float), axis, 0)
    m = c.shape[0] - 1
    out = np.zeros_like(c)
    if m >= 1:
        out[m - 1] = 2.0 * m * c[m]
        for k in range(m - 1, 0, -1):
            nxt = out[k + 1] if k + 1 <= m else 0.0
            out[k - 1] = nxt + 2.0 * k * c[k]
        out[0] *= 0.5
    return np.moveaxis(out, 0, axis)


def evaluate(coeffs: np.ndarray, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    m = coeffs.shape[0] - 1
    t1 = vander(x[..., 0], m)
    t2 = vander(x[..., 1], m)
    return np.einsum("...i,ij,...j->...", t1, coeffs, t2)


def interpolate(f: Callable[[np.ndarray], np.ndarray], m: int) -> ChebCoeffs2D:
    """Interpolate ``f`` (points ``(..., 2)`` -> values) at the degree-``m`` Lobatto grid."""
    nodes = lobatto_nodes(m)
    pts = np.stack(np.meshgrid(nodes, nodes, indexing="ij"), axis=-1)
    samples = np.asarray(f(pts), dtype=float)
    if samples.shape != (m + 1, m + 1):
        raise DataError(f"f returned shape {samples.shape}, expected {(m + 1, m + 1)}")
    bad = np.argwhere(~np.isfinite(samples))
    if bad.size:
        i, j = bad[0]
        raise DataError(f"non-finite sample at node ({nodes[i]!r}, {nodes[j]!r})")
    mat = _transform_matrix(m)
    return ChebCoeffs2D(mat @ samples @ mat.T)


def as_c2_function(c: ChebCoeffs2D, name: str = "") -> C2Function:
    base = c.coeffs
    d1 = derivative_coeffs(base, 0)
    d2 = derivative_coeffs(base, 1)
    d11 = derivative_coeffs(d1, 0)
    d12 = derivative_coeffs(d1, 1)
    d22 = derivative_coeffs(d2, 1)
    m = c.degree

    def _bases(x):
        x = np.asarray(x, dtype=float)
        return vander(x[..., 0], m), vander(x[..., 1], m)

    def value(x):
        t1, t2 = _bases(x)
        return np.einsum("...i,ij,...j->...", t1, base, t2)

    def grad(x):
        t1, t2 = _bases(x)
        g1 = np.einsum("...i,ij,...j->...", t1, d1, t2)
        g2 = np.einsum("...i,ij,...j->...", t1, d2, t2)
        return np.stack([g1, g2], axis=-1)

    def hess(x):
        t1, t2 = _bases(x)
        h11 = np.einsum("...i,ij,...j->...", t1, d11, t2)
        h12 = np.einsum("...i,ij,...j->...", t1, d12, t2)
        h22 = np.einsum("...i,ij,...j->...", t1, d22, t2)
        row1 = np.stack([h11, h12], axis=-1)
        row2 = np.stack([h12, h22], axis=-1)
        return np.stack([row1, row2], axis=-2)

    return C2Function(value, grad, hess, _LOWER.copy(), _UPPER.copy(), name)


def interpolate_family(family: FunctionFamily, m: int) -> FunctionFamily:
    """Member-wise interpolation of a family living on ``[-1, 1]^2``."""
    if family.dim != 2 or not (np.all(family.lower == -1.0) and np.all(family.upper == 1.0)):
        raise InvalidArgumentError("Chebyshev interpolation needs the domain [-1, 1]^2")
    members = []
    for i, f in enumerate(family.members):
        try:
            coeffs = interpolate(f.value, m)
        except DataError as exc:
            raise DataError(f"member {i}: {exc}") from exc
        members.append(as_c2_function(coeffs, name=f"cheb{m}({f.name or i})"))
    return FunctionFamily(tuple(members))


def write_coeffs_csv(c: ChebCoeffs2D, path: Union[str, Path]) -> None:
    """Row-major dump with header ``i,j,theta``; ``i``/``j`` are the degrees in x1/x2."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "theta"])
        for (i, j), v in np.ndenumerate(c.coeffs):
            w.writerow([i, j, repr(float(v))])


def read_coeffs_csv(path: Union[str, Path]) -> ChebCoeffs2D:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    size = int(round(np.sqrt(len(rows))))
    if size * size != len(rows):
        raise DataError("coefficient file is not square")
    out = np.zeros((size, size))
    for r in rows:
        out[int(r["i"]), int(r["j"])] = float(r["theta"])
    return ChebCoeffs2D(out)
