"""Semi-Lagrangian time steppers for diffusion in divergence form.

Each step averages interpolated values of the previous solution at a set of
feet: ``x_i +- delta_i`` in 1D (weights 1/2), or the four axis- or
eigenvector-aligned feet in 2D (weights 1/4, diffusivity scaled by 2).
Advection moves the base point of the feet to the departure point
``z_i = x_i - alpha_i`` first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .displacement import (
    DisplacementPolicy,
    LineSampler,
    RayleighSampler,
    advective_displacement,
    along,
    bracket_upper,
    diffusive_bisection,
    solve_displacements,
)
from .grid import Dirichlet, Grid1D, Grid2D, TimeGrid, check_values
from .interp import interpolate_index, interpolate_index_2d, nodal_sampler

PSD_TOLERANCE = 1e-12
TIE_TOLERANCE = 1e-14


class NumericalBlowup(RuntimeError):
    """The solution stopped being finite."""


class ModelError(ValueError):
    """A diffusivity closure produced an invalid (negative or non-finite) value."""


class PSDViolation(ValueError):
    """A diffusivity tensor has a clearly negative eigenvalue."""


@dataclass(frozen=True)
class SchemeConfig:
    order: int = 3
    displacement: DisplacementPolicy = field(default_factory=DisplacementPolicy)
    advective_iters: int = 3

    def __post_init__(self):
        if self.order not in (1, 3):
            raise ValueError(f"interpolation order must be 1 or 3, got {self.order}")


@dataclass(frozen=True)
class DiagonalDiffusivity:
    """``diag(nu1, nu2)``, each a function of ``(x1, x2)`` at the frozen time."""

    nu1: Callable
    nu2: Callable


@dataclass(frozen=True)
class TensorDiffusivity:
    """Symmetric 2x2 tensor; ``components(x1, x2)`` returns ``(a11, a12, a22)``."""

    components: Callable


@dataclass
class Feet:
    """Feet of one SL step in fractional index coordinates, equally weighted."""

    points: list
    displacements: list = field(default_factory=list)

    @property
    def weight(self) -> float:
        return 1.0 / len(self.points)


def weights(dimension: int = 1) -> np.ndarray:
    """Weights of the 2d feet, each ``1 / (2d)``."""
    return np.full(2 * dimension, 1.0 / (2 * dimension))


# -- boundary handling --------------------------------------------------------

def apply_bc(values: np.ndarray, grid: Grid1D | Grid2D, t: float, bcs=None) -> np.ndarray:
    """Overwrite Dirichlet boundary nodes with their values at time ``t``."""
    if isinstance(grid, Grid2D):
        for axis, ax in enumerate(grid.axes):
            bc = ax.bc if bcs is None else bcs[axis]
            if isinstance(bc, Dirichlet):
                left, right = bc.values(t)
                index = [slice(None), slice(None)]
                index[axis] = 0
                values[tuple(index)] = left
                index[axis] = -1
                values[tuple(index)] = right
        return values
    bc = grid.bc if bcs is None else bcs
    if isinstance(bc, Dirichlet):
        values[0], values[-1] = bc.values(t)
    return values


def nodal_gradient(values: np.ndarray, grid: Grid1D | Grid2D):
    """Second-order nodal gradient, one-sided at Dirichlet boundaries."""
    if isinstance(grid, Grid2D):
        return tuple(_gradient_axis(values, ax, axis) for axis, ax in enumerate(grid.axes))
    return _gradient_axis(values, grid, 0)


def _gradient_axis(values, ax: Grid1D, axis: int):
    if ax.periodic:
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * ax.dx)
    return np.gradient(values, ax.dx, axis=axis, edge_order=2)


# -- feet construction --------------------------------------------------------

def _directional_pair(plus: LineSampler, minus: LineSampler, dt, policy, coef, dx):
    """Solve both displacements of one direction; bracket from the nodal sup."""
    nu_sup = float(np.max(plus(np.zeros(plus.size)), initial=0.0))
    hi = bracket_upper(dt, nu_sup, dx, coef)
    return (solve_displacements(plus, dt, policy, hi, coef),
            solve_displacements(minus, dt, policy, hi, coef))


def _axis_pair(nu, coords, direction, axes, dt, policy, coef, dx):
    flipped = tuple(-d for d in direction)
    return _directional_pair(LineSampler(nu, coords, direction, axes),
                             LineSampler(nu, coords, flipped, axes), dt, policy, coef, dx)


def diffusive_feet_1d(grid: Grid1D, nu: Callable | None, dt: float, config: SchemeConfig,
                      alpha=None) -> Feet:
    """Feet ``z_i +- delta_i`` in index coordinates (``z_i = x_i - alpha_i``)."""
    base = np.arange(grid.n_nodes, dtype=float)
    if alpha is not None:
        base = base - np.asarray(alpha) / grid.dx
    if nu is None:
        return Feet([base])
    x = grid.nodes
    policy = config.displacement.for_length(grid.length)
    plus, minus = _axis_pair(nu, (x,), (1.0,), (grid,), dt, policy, 2.0, grid.dx)
    return Feet([base + plus.delta / grid.dx, base - minus.delta / grid.dx], [plus, minus])


def apply_feet(values: np.ndarray, feet: Feet, grid: Grid1D | Grid2D, order: int) -> np.ndarray:
    w = feet.weight
    out = None
    for p in feet.points:
        if isinstance(grid, Grid2D):
            term = interpolate_index_2d(values, p[0], p[1],
                                        (grid.axis1.periodic, grid.axis2.periodic), order)
        else:
            term = interpolate_index(values, p, grid.periodic, order)
        out = w * term if out is None else out + w * term
    return out


# -- 1D steppers --------------------------------------------------------------

def step_diffusion_1d(values, grid: Grid1D, nu: Callable, dt: float,
                      config: SchemeConfig | None = None, t: float = 0.0) -> np.ndarray:
    """One step of ``v_i = 1/2 I[V](x_i + d+_i) + 1/2 I[V](x_i - d-_i)``.

    ``nu`` is the diffusivity frozen at time ``t`` (a function of ``x``).
    """
    config = config or SchemeConfig()
    values = check_values(values, grid)
    feet = diffusive_feet_1d(grid, nu, dt, config)
    return apply_bc(apply_feet(values, feet, grid, config.order), grid, t + dt)


def step_advection_1d(values, grid: Grid1D, f: Callable, dt: float,
                      config: SchemeConfig | None = None, t: float = 0.0) -> np.ndarray:
    """Plain advective SL step ``v_i = I[V](z_i)``."""
    config = config or SchemeConfig()
    values = check_values(values, grid)
    alpha = advective_displacement(f, grid.nodes, dt, config.advective_iters, (grid,))
    feet = diffusive_feet_1d(grid, None, dt, config, alpha)
    return apply_bc(apply_feet(values, feet, grid, config.order), grid, t + dt)


def step_advdiff_1d(values, grid: Grid1D, f: Callable | None, nu: Callable | None, dt: float,
                    config: SchemeConfig | None = None, t: float = 0.0) -> np.ndarray:
    """Advection-diffusion step with feet ``z_i +- delta_i``.

    Diffusive displacements are computed around the node ``x_i``, independently
    of the advective one, and the two are added.
    """
    config = config or SchemeConfig()
    values = check_values(values, grid)
    alpha = None
    if f is not None:
        alpha = advective_displacement(f, grid.nodes, dt, config.advective_iters, (grid,))
    feet = diffusive_feet_1d(grid, nu, dt, config, alpha)
    return apply_bc(apply_feet(values, feet, grid, config.order), grid, t + dt)


# -- 2D steppers --------------------------------------------------------------

def _base_2d(grid: Grid2D, velocity, dt, config):
    x1, x2 = (c.ravel() for c in grid.mesh())
    i1, i2 = (c.ravel().astype(float) for c in np.meshgrid(
        np.arange(grid.axis1.n_nodes), np.arange(grid.axis2.n_nodes), indexing="ij"))
    if velocity is not None:
        a1, a2 = advective_displacement(velocity, (x1, x2), dt, config.advective_iters, grid.axes)
        i1 = i1 - a1 / grid.axis1.dx
        i2 = i2 - a2 / grid.axis2.dx
    return (x1, x2), (i1, i2)


def diag_feet_2d(grid: Grid2D, diffusivity: DiagonalDiffusivity, dt: float,
                 config: SchemeConfig, velocity: Callable | None = None) -> Feet:
    coords, (i1, i2) = _base_2d(grid, velocity, dt, config)
    ax1, ax2 = grid.axes
    policy = config.displacement.for_length(max(ax1.length, ax2.length))
    p1, m1 = _axis_pair(diffusivity.nu1, coords, (1.0, 0.0), grid.axes, dt, policy,
                        4.0, ax1.dx)
    p2, m2 = _axis_pair(diffusivity.nu2, coords, (0.0, 1.0), grid.axes, dt, policy,
                        4.0, ax2.dx)
    return Feet(
        [
            (i1 + p1.delta / ax1.dx, i2),
            (i1 - m1.delta / ax1.dx, i2),
            (i1, i2 + p2.delta / ax2.dx),
            (i1, i2 - m2.delta / ax2.dx),
        ],
        [p1, m1, p2, m2],
    )


def step_diag_2d(values, grid: Grid2D, diffusivity: DiagonalDiffusivity, dt: float,
                 config: SchemeConfig | None = None, t: float = 0.0,
                 velocity: Callable | None = None) -> np.ndarray:
    """Diagonal 2D scheme: four axis-aligned feet, displacements ``sqrt(4 dt nu_j)``.

    ``velocity(x1, x2)`` (optional) returns the two components at time ``t``.
    """
    config = config or SchemeConfig()
    values = check_values(values, grid)
    feet = diag_feet_2d(grid, diffusivity, dt, config, velocity)
    out = apply_feet(values, feet, grid, config.order).reshape(grid.shape)
    return apply_bc(out, grid, t + dt)


def symmetric_eig_2x2(a11, a12, a22):
    """Closed-form eigenpairs of symmetric 2x2 tensors.

    Returns ``(lam1, lam2, q1, q2)`` with ``lam1 >= lam2`` and unit eigenvectors
    ``q1 = (cos phi, sin phi)``, ``q2 = (-sin phi, cos phi)``. Nearly diagonal
    tensors (``|a12| <= 1e-14 |A|``) keep the coordinate axes and their
    diagonal entries in axis order.
    """
    a11, a12, a22 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (a11, a12, a22)))
    scale = np.maximum(np.maximum(np.abs(a11), np.abs(a22)), np.abs(a12))
    tie = np.abs(a12) <= TIE_TOLERANCE * scale
    mean = 0.5 * (a11 + a22)
    radius = np.hypot(0.5 * (a11 - a22), a12)
    phi = 0.5 * np.arctan2(2.0 * a12, a11 - a22)
    c = np.where(tie, 1.0, np.cos(phi))
    s = np.where(tie, 0.0, np.sin(phi))
    lam1 = np.where(tie, a11, mean + radius)
    lam2 = np.where(tie, a22, mean - radius)
    return lam1, lam2, (c, s), (-s, c)


def tensor_feet_2d(grid: Grid2D, tensor: TensorDiffusivity, dt: float, config: SchemeConfig,
                   velocity: Callable | None = None) -> Feet:
    """Feet along the per-node eigenvectors of the tensor.

    Along each eigenvector ``q_j`` the directional diffusivity is
    ``q_j^T A(x_i + s q_j) q_j``, which equals the eigenvalue at the node.
    """
    coords, (i1, i2) = _base_2d(grid, velocity, dt, config)
    a11, a12, a22 = (np.broadcast_to(np.asarray(a, dtype=float), coords[0].shape)
                     for a in tensor.components(*coords))
    lam1, lam2, q1, q2 = symmetric_eig_2x2(a11, a12, a22)
    smallest = np.minimum(lam1, lam2)
    worst = float(np.min(smallest, initial=0.0))
    if worst < -PSD_TOLERANCE:
        node = int(np.argmin(smallest))
        raise PSDViolation(f"diffusivity tensor not positive semidefinite at node {node} "
                           f"(eigenvalue {worst:.3e})")
    ax1, ax2 = grid.axes
    policy = config.displacement.for_length(max(ax1.length, ax2.length))
    dx = min(ax1.dx, ax2.dx)
    points, disps = [], []
    for q in (q1, q2):
        flipped = (-q[0], -q[1])
        plus, minus = _directional_pair(
            RayleighSampler(tensor.components, coords, q, grid.axes),
            RayleighSampler(tensor.components, coords, flipped, grid.axes),
            dt, policy, 4.0, dx)
        points.append((i1 + q[0] * plus.delta / ax1.dx, i2 + q[1] * plus.delta / ax2.dx))
        points.append((i1 - q[0] * minus.delta / ax1.dx, i2 - q[1] * minus.delta / ax2.dx))
        disps += [plus, minus]
    return Feet(points, disps)


def step_tensor_2d(values, grid: Grid2D, tensor: TensorDiffusivity, dt: float,
                   config: SchemeConfig | None = None, t: float = 0.0,
                   velocity: Callable | None = None) -> np.ndarray:
    """General symmetric diffusivity via a per-node frozen eigenvector frame."""
    config = config or SchemeConfig()
    values = check_values(values, grid)
    feet = tensor_feet_2d(grid, tensor, dt, config, velocity)
    out = apply_feet(values, feet, grid, config.order).reshape(grid.shape)
    return apply_bc(out, grid, t + dt)


# -- nonlinear problems -------------------------------------------------------

def frozen_diffusivity(fields: Sequence[np.ndarray], grid: Grid1D | Grid2D,
                       builder: Callable) -> np.ndarray:
    """Nodal diffusivity from the current fields and their nodal gradients."""
    grads = [nodal_gradient(u, grid) for u in fields]
    nu = np.asarray(builder(list(fields), grads), dtype=float)
    bad = np.flatnonzero(~(np.isfinite(nu) & (nu >= 0)))
    if bad.size:
        raise ModelError(f"diffusivity closure invalid at node(s) {bad[:5].tolist()}")
    return nu


def step_nonlinear(fields, grid: Grid1D | Grid2D, builder: Callable, dt: float,
                   config: SchemeConfig | None = None, t: float = 0.0, bcs=None) -> list:
    """One step with the diffusivity frozen at time ``t``.

    ``builder(fields, gradients)`` returns nodal diffusivities; they are
    interpolated linearly between nodes and shared by every field, so all
    fields move with the same feet. ``bcs`` optionally gives one boundary
    condition per field (per-axis tuples in 2D) instead of the grid's.
    """
    config = config or SchemeConfig()
    single = isinstance(fields, np.ndarray)
    fields = [check_values(u, grid) for u in ([fields] if single else fields)]
    nu = frozen_diffusivity(fields, grid, builder)
    sampler = nodal_sampler(grid, nu)
    if isinstance(grid, Grid2D):
        feet = diag_feet_2d(grid, DiagonalDiffusivity(sampler, sampler), dt, config)
    else:
        feet = diffusive_feet_1d(grid, sampler, dt, config)
    out = []
    for k, u in enumerate(fields):
        new = apply_feet(u, feet, grid, config.order)
        if isinstance(grid, Grid2D):
            new = new.reshape(grid.shape)
        out.append(apply_bc(new, grid, t + dt, None if bcs is None else bcs[k]))
    return out[0] if single else out


# -- consistency diagnostic ---------------------------------------------------

def consistency_residual(x, dt: float, nu: Callable, nu_x: Callable, tol: float = 0.0):
    """Residuals of the four first-order consistency conditions at ``x``.

    With weights 1/2 and bisection-converged displacements, returns
    ``(r1, r2, r3, r4)``: weight sum minus one, first moment minus
    ``dt nu_x``, second moment minus ``2 dt nu``, and the third moment.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    policy = DisplacementPolicy(method="bisection", tol_abs=tol, max_iters=200)
    hi = 2.0 * bracket_upper(dt, float(np.max(nu(xs))), 0.0)
    d_plus = diffusive_bisection(along(nu, xs, +1), dt, hi, policy).delta
    d_minus = diffusive_bisection(along(nu, xs, -1), dt, hi, policy).delta
    a_plus = a_minus = 0.5
    r1 = np.full_like(xs, (a_plus + a_minus) - 1.0)
    r2 = (a_plus * d_plus - a_minus * d_minus) - dt * np.asarray(nu_x(xs))
    r3 = (a_plus * d_plus**2 + a_minus * d_minus**2) - 2.0 * dt * np.asarray(nu(xs))
    r4 = a_plus * d_plus**3 - a_minus * d_minus**3
    if np.ndim(x) == 0:
        return float(r1[0]), float(r2[0]), float(r3[0]), float(r4[0])
    return r1, r2, r3, r4


# -- time loops ---------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSpec1D:
    """``u_t + f(x, t) u_x = (nu(x, t) u_x)_x`` with initial data ``initial``."""

    grid: Grid1D
    initial: Callable | np.ndarray
    diffusivity: Callable | None = None
    velocity: Callable | None = None

    def initial_values(self) -> np.ndarray:
        u0 = self.initial(self.grid.nodes) if callable(self.initial) else self.initial
        return check_values(np.array(u0, dtype=float), self.grid)


def _check_finite(values, n):
    if not np.all(np.isfinite(values)):
        raise NumericalBlowup(f"non-finite solution after step {n}")


def solve_1d(problem: ProblemSpec1D, time: TimeGrid, config: SchemeConfig | None = None,
             observer: Callable | None = None) -> np.ndarray:
    """Advance a linear 1D problem to the horizon.

    ``observer(n, t, values)`` is called with the initial state and after
    every step.
    """
    config = config or SchemeConfig()
    grid = problem.grid
    v = apply_bc(problem.initial_values(), grid, 0.0)
    if observer is not None:
        observer(0, 0.0, v)
    for n in range(time.steps):
        t = time.time(n)
        nu = None if problem.diffusivity is None else (
            lambda x, t=t: problem.diffusivity(x, t))
        f = None if problem.velocity is None else (lambda x, t=t: problem.velocity(x, t))
        v = step_advdiff_1d(v, grid, f, nu, time.dt, config, t)
        _check_finite(v, n + 1)
        if observer is not None:
            observer(n + 1, time.time(n + 1), v)
    return v


def solve_2d(initial: np.ndarray, grid: Grid2D, diffusivity: Callable, time: TimeGrid,
             config: SchemeConfig | None = None, velocity: Callable | None = None,
             observer: Callable | None = None) -> np.ndarray:
    """Advance a linear 2D problem.

    ``diffusivity(t)`` returns a :class:`DiagonalDiffusivity` or
    :class:`TensorDiffusivity` frozen at ``t``; ``velocity(x1, x2, t)``
    returns both velocity components.
    """
    config = config or SchemeConfig()
    v = apply_bc(check_values(np.array(initial, dtype=float), grid), grid, 0.0)
    if observer is not None:
        observer(0, 0.0, v)
    for n in range(time.steps):
        t = time.time(n)
        f = None if velocity is None else (lambda x1, x2, t=t: velocity(x1, x2, t))
        coeff = diffusivity(t)
        if isinstance(coeff, TensorDiffusivity):
            v = step_tensor_2d(v, grid, coeff, time.dt, config, t, f)
        else:
            v = step_diag_2d(v, grid, coeff, time.dt, config, t, f)
        _check_finite(v, n + 1)
        if observer is not None:
            observer(n + 1, time.time(n + 1), v)
    return v


def solve_nonlinear(initial: Sequence[np.ndarray], grid: Grid1D | Grid2D, builder: Callable,
                    time: TimeGrid, config: SchemeConfig | None = None, bcs=None,
                    observer: Callable | None = None) -> list:
    """Advance a (possibly coupled) frozen-coefficient nonlinear problem."""
    config = config or SchemeConfig()
    fields = [apply_bc(check_values(np.array(u, dtype=float), grid), grid, 0.0,
                       None if bcs is None else bcs[k]) for k, u in enumerate(initial)]
    if observer is not None:
        observer(0, 0.0, fields)
    for n in range(time.steps):
        t = time.time(n)
        fields = step_nonlinear(fields, grid, builder, time.dt, config, t, bcs)
        for u in fields:
            _check_finite(u, n + 1)
        if observer is not None:
            observer(n + 1, time.time(n + 1), fields)
    return fields
