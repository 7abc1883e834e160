"""Lagrange interpolation on uniform grids (linear and cubic).

Queries are reduced to fractional index coordinates ``s`` (``s = i`` at node
``i``) before stencil lookup. The steppers build feet directly in index space,
so a zero displacement hits a node exactly and reproduces it bit for bit.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid1D, Grid2D, check_values

ORDERS = (1, 3)
SNAP = 8 * np.finfo(float).eps


def _check_order(order: int) -> int:
    if order not in ORDERS:
        raise ValueError(f"interpolation order must be 1 or 3, got {order}")
    return order


def lagrange4_weights(tau):
    """Cubic Lagrange basis on the nodes 0, 1, 2, 3 evaluated at ``tau``."""
    t0 = tau
    t1 = tau - 1.0
    t2 = tau - 2.0
    t3 = tau - 3.0
    return np.stack(
        [-t1 * t2 * t3 / 6.0, t0 * t2 * t3 / 2.0, -t0 * t1 * t3 / 2.0, t0 * t1 * t2 / 6.0],
        axis=-1,
    )


def stencil(s, n: int, periodic: bool, order: int):
    """Node indices and weights for fractional index coordinates ``s``.

    Returns ``(idx, w)`` with shape ``s.shape + (order + 1,)``. Periodic
    coordinates wrap modulo ``n``; bounded ones are clamped to ``[0, n - 1]``
    and cubic stencils are shifted inward at the ends.
    """
    s = np.asarray(s, dtype=float)
    # snap rounding-level misses of a node so nodal queries stay exact
    nearest = np.round(s)
    s = np.where(np.abs(s - nearest) <= SNAP * np.maximum(1.0, np.abs(s)), nearest, s)
    if periodic:
        s = np.mod(s, n)
        i = np.floor(s).astype(np.intp)
        t = s - i
    else:
        s = np.clip(s, 0.0, n - 1.0)
        i = np.minimum(np.floor(s).astype(np.intp), n - 2)
        t = s - i
    if order == 1:
        idx = np.stack([i, i + 1], axis=-1)
        w = np.stack([1.0 - t, t], axis=-1)
    else:
        start = i - 1
        if periodic:
            tau = t + 1.0
        else:
            start = np.clip(start, 0, n - 4)
            tau = s - start
        idx = start[..., None] + np.arange(4)
        w = lagrange4_weights(tau)
    if periodic:
        idx = np.mod(idx, n)
    return idx, w


def interpolate_index(values: np.ndarray, s, periodic: bool, order: int = 3) -> np.ndarray:
    """Interpolate 1D nodal values at fractional index coordinates."""
    idx, w = stencil(s, values.shape[0], periodic, order)
    return np.sum(w * values[idx], axis=-1)


def interpolate_index_2d(values: np.ndarray, s1, s2, periodic: tuple[bool, bool],
                         order: int = 3) -> np.ndarray:
    """Tensor-product interpolation at fractional index coordinates ``(s1, s2)``."""
    s1, s2 = np.broadcast_arrays(np.asarray(s1, dtype=float), np.asarray(s2, dtype=float))
    n1, n2 = values.shape
    idx1, w1 = stencil(s1, n1, periodic[0], order)
    idx2, w2 = stencil(s2, n2, periodic[1], order)
    out = np.zeros(s1.shape)
    for b in range(order + 1):
        column = np.sum(w1 * values[idx1, idx2[..., b : b + 1]], axis=-1)
        out += w2[..., b] * column
    return out


def _index_coordinate(x, axis: Grid1D):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("interpolation query points must be finite")
    return (x - axis.origin) / axis.dx


def eval_1d(values, grid: Grid1D, x, order: int = 3):
    """Evaluate the degree-``order`` interpolant of ``values`` at points ``x``."""
    _check_order(order)
    values = check_values(values, grid)
    out = interpolate_index(values, _index_coordinate(x, grid), grid.periodic, order)
    return out if np.ndim(x) else float(out)


def eval_2d(values, grid: Grid2D, x1, x2, order: int = 3):
    """Tensor-product interpolant of 2D nodal values at points ``(x1, x2)``."""
    _check_order(order)
    values = check_values(values, grid)
    out = interpolate_index_2d(
        values,
        _index_coordinate(x1, grid.axis1),
        _index_coordinate(x2, grid.axis2),
        (grid.axis1.periodic, grid.axis2.periodic),
        order,
    )
    return out if (np.ndim(x1) or np.ndim(x2)) else float(out)


def nodal_sampler(grid: Grid1D | Grid2D, nodal_values):
    """Piecewise-linear sampler of nodal data, callable on physical coordinates.

    Same weights as ``eval_1d(..., order=1)`` (bilinear in 2D) without the
    per-call validation, since samplers sit in the displacement inner loops.
    """
    v = check_values(nodal_values, grid)
    if isinstance(grid, Grid2D):
        ax1, ax2 = grid.axes

        def sample_2d(x1, x2):
            i1, i1n, t1 = _p1_cell(x1, ax1)
            i2, i2n, t2 = _p1_cell(x2, ax2)
            low = (1.0 - t1) * v[i1, i2] + t1 * v[i1n, i2]
            high = (1.0 - t1) * v[i1, i2n] + t1 * v[i1n, i2n]
            return (1.0 - t2) * low + t2 * high

        return sample_2d

    def sample(x):
        i, inext, t = _p1_cell(x, grid)
        return (1.0 - t) * v[i] + t * v[inext]

    return sample


def _p1_cell(x, axis: Grid1D):
    n = axis.n_nodes
    s = (np.asarray(x, dtype=float) - axis.origin) / axis.dx
    if axis.periodic:
        s = np.mod(s, n)
        i = np.floor(s).astype(np.intp)
        t = s - i
        i = np.mod(i, n)
        return i, np.mod(i + 1, n), t
    s = np.clip(s, 0.0, n - 1.0)
    i = np.minimum(np.floor(s).astype(np.intp), n - 2)
    return i, i + 1, s - i
