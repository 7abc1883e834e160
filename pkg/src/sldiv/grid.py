"""Uniform grids, time grids, boundary conditions and norms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

BoundaryValue = Union[float, Callable[[float], float]]


class DegenerateReferenceError(ZeroDivisionError):
    """Raised when a relative error is requested against a zero reference."""


@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class Dirichlet:
    """Boundary values at both ends; each is a constant or a function of t."""

    left: BoundaryValue = 0.0
    right: BoundaryValue = 0.0

    def values(self, t: float) -> tuple[float, float]:
        left = self.left(t) if callable(self.left) else self.left
        right = self.right(t) if callable(self.right) else self.right
        return float(left), float(right)


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D grid on ``[origin, origin + length]``.

    Periodic grids have ``n_nodes`` distinct nodes with spacing
    ``length / n_nodes`` (the right end point is identified with the left
    one). Dirichlet grids include both end points.
    """

    length: float
    n_nodes: int
    bc: Periodic | Dirichlet = field(default_factory=Periodic)
    origin: float = 0.0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"grid length must be positive, got {self.length}")
        if self.n_nodes < 4:
            raise ValueError(f"cubic stencils need at least 4 nodes, got {self.n_nodes}")

    @property
    def periodic(self) -> bool:
        return isinstance(self.bc, Periodic)

    @property
    def dx(self) -> float:
        if self.periodic:
            return self.length / self.n_nodes
        return self.length / (self.n_nodes - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.origin + np.arange(self.n_nodes) * self.dx

    def canonical(self, x):
        """Map coordinates into the domain: wrap if periodic, clamp otherwise."""
        x = np.asarray(x, dtype=float)
        if self.periodic:
            return self.origin + np.mod(x - self.origin, self.length)
        return np.clip(x, self.origin, self.origin + self.length)

    def refine(self, factor: int) -> Grid1D:
        """Grid whose nodes contain these nodes, ``factor`` times finer."""
        if factor < 1 or int(factor) != factor:
            raise ValueError(f"refinement factor must be a positive integer, got {factor}")
        if self.periodic:
            n = self.n_nodes * factor
        else:
            n = (self.n_nodes - 1) * factor + 1
        return Grid1D(self.length, n, self.bc, self.origin)

    def with_bc(self, bc: Periodic | Dirichlet) -> Grid1D:
        return Grid1D(self.length, self.n_nodes, bc, self.origin)


@dataclass(frozen=True)
class Grid2D:
    """Tensor product of two 1D grids.

    Values live in arrays of shape ``(axis1.n_nodes, axis2.n_nodes)`` indexed
    ``[i1, i2]``; flattening is row-major (``i1`` is the slow index).
    """

    axis1: Grid1D
    axis2: Grid1D

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axis1.n_nodes, self.axis2.n_nodes)

    @property
    def axes(self) -> tuple[Grid1D, Grid1D]:
        return (self.axis1, self.axis2)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis1.nodes, self.axis2.nodes, indexing="ij")

    def refine(self, factor: int) -> Grid2D:
        return Grid2D(self.axis1.refine(factor), self.axis2.refine(factor))


@dataclass(frozen=True)
class TimeGrid:
    horizon: float
    steps: int

    def __post_init__(self):
        if not self.horizon > 0 or self.steps < 1:
            raise ValueError(f"invalid time grid T={self.horizon}, M={self.steps}")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    def time(self, n: int) -> float:
        # exact at the last level
        return self.horizon if n == self.steps else n * self.dt

    def refine(self, factor: int) -> TimeGrid:
        return TimeGrid(self.horizon, self.steps * int(factor))


def check_values(values, grid: Grid1D | Grid2D) -> np.ndarray:
    """Validate nodal values against a grid and return them as a float array."""
    values = np.asarray(values, dtype=float)
    shape = grid.shape if isinstance(grid, Grid2D) else (grid.n_nodes,)
    if values.shape != shape:
        raise ValueError(f"expected nodal values of shape {shape}, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("nodal values must be finite")
    return values


def cell_volume(grid: Grid1D | Grid2D) -> float:
    if isinstance(grid, Grid2D):
        return grid.axis1.dx * grid.axis2.dx
    return grid.dx


def l2_norm(values, grid: Grid1D | Grid2D) -> float:
    """Discrete l2 norm ``(dx * sum w_j**2) ** 0.5``.

    The sum runs sequentially in ascending (row-major) index order, so the
    result does not depend on numpy's pairwise summation blocking.
    """
    w = check_values(values, grid).ravel()
    total = float(np.cumsum(w * w)[-1])
    return math.sqrt(cell_volume(grid) * total)


def linf_norm(values, grid: Grid1D | Grid2D | None = None) -> float:
    values = np.asarray(values, dtype=float)
    if grid is not None:
        check_values(values, grid)
    return float(np.max(np.abs(values)))


def relative_error(values, reference, grid: Grid1D | Grid2D, norm: str = "l2") -> float:
    if norm == "l2":
        measure = lambda w: l2_norm(w, grid)
    elif norm == "linf":
        measure = lambda w: linf_norm(w, grid)
    else:
        raise ValueError(f"unknown norm {norm!r}; expected 'l2' or 'linf'")
    ref_size = measure(reference)
    if ref_size == 0.0:
        raise DegenerateReferenceError("reference solution is identically zero")
    diff = np.asarray(values, dtype=float) - np.asarray(reference, dtype=float)
    return measure(diff) / ref_size


def stability_numbers(a: float, nu: float, dt: float, dx: float) -> tuple[float, float]:
    """Courant number ``a dt / dx`` and diffusion number ``nu dt / (2 dx^2)``."""
    if not (dt > 0 and dx > 0):
        raise ValueError("dt and dx must be positive")
    return a * dt / dx, nu * dt / (2.0 * dx * dx)
