"""Diffusive and advective displacements defining the feet of the SL scheme.

The diffusive displacement at a node solves ``delta = sqrt(c dt nu(x + side*delta))``
with ``c = 2d`` in ``d`` dimensions. All solvers are vectorized over nodes and
use a fixed number of sweeps, so results do not depend on evaluation order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .grid import Grid1D

logger = logging.getLogger(__name__)

METHODS = ("fixed_point", "bisection", "fallback")
GEOMETRIC_SCAN = 40
METHOD_ALIASES = {"fp": "fixed_point", "bisect": "bisection", "fallback": "fallback"}


class DiffusivityDomainError(ValueError):
    """A diffusivity sample was negative or not finite."""


class BracketError(RuntimeError):
    """No sign change of the displacement residual could be bracketed."""


@dataclass(frozen=True)
class DisplacementPolicy:
    """How diffusive displacements are computed.

    ``max_iters`` counts fixed-point sweeps for ``fixed_point`` (default 3)
    and ``fallback`` (default 30, stopping early once every node meets
    ``tol_abs``), and bisection halvings for ``bisection`` (default 60).
    ``tol_abs=None`` means ``1e-12 * max(1, L)`` once a domain length is known.
    """

    method: str = "fixed_point"
    max_iters: Optional[int] = None
    tol_abs: Optional[float] = None
    init: str = "local"
    bisect_iters: int = 60
    scan_points: int = 16

    def __post_init__(self):
        method = METHOD_ALIASES.get(self.method, self.method)
        if method not in METHODS:
            raise ValueError(f"unknown displacement method {self.method!r}")
        object.__setattr__(self, "method", method)
        if self.init not in ("local", "large"):
            raise ValueError(f"init must be 'local' or 'large', got {self.init!r}")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    @property
    def iterations(self) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return {"fixed_point": 3, "fallback": 30, "bisection": self.bisect_iters}[self.method]

    def tolerance(self) -> float:
        return 1e-12 if self.tol_abs is None else self.tol_abs

    def for_length(self, length: float) -> DisplacementPolicy:
        if self.tol_abs is not None:
            return self
        return replace(self, tol_abs=1e-12 * max(1.0, float(length)))


@dataclass
class DisplacementResult:
    delta: np.ndarray
    converged: np.ndarray
    residual: np.ndarray
    iterations: int
    bisected: int = 0


class LineSampler:
    """Diffusivity along one ray per node, ``x_i + s * direction_i``.

    ``nu`` takes one coordinate array per dimension. Positions are mapped into
    the domain (wrapped or clamped) through ``axes`` before sampling.
    """

    def __init__(self, nu: Callable, origin: Sequence, direction: Sequence,
                 axes: Sequence[Grid1D] | None = None, clip_negative: bool = False):
        self.nu = nu
        self.origin = tuple(np.asarray(o, dtype=float).ravel() for o in origin)
        self.direction = tuple(np.broadcast_to(np.asarray(d, dtype=float), self.origin[0].shape)
                               for d in direction)
        self.axes = tuple(axes) if axes is not None else None
        self.clip_negative = clip_negative

    @property
    def size(self) -> int:
        return self.origin[0].size

    def __call__(self, s, idx=None) -> np.ndarray:
        pts = []
        for k, (o, d) in enumerate(zip(self.origin, self.direction)):
            if idx is not None:
                o, d = o[idx], d[idx]
            p = o + d * s
            if self.axes is not None:
                p = self.axes[k].canonical(p)
            pts.append(p)
        direction = self.direction if idx is None else tuple(d[idx] for d in self.direction)
        values = np.broadcast_to(np.asarray(self._evaluate(pts, direction), dtype=float),
                                 pts[0].shape)
        if self.clip_negative:
            values = np.maximum(values, 0.0)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            bad = np.unique(np.nonzero(~(values >= 0))[-1])
            where = bad if idx is None else np.arange(self.size)[idx][bad]
            raise DiffusivityDomainError(
                f"diffusivity must be finite and >= 0; violated at node(s) {where[:5].tolist()}")
        return values

    def _evaluate(self, points, direction):
        return self.nu(*points)


class RayleighSampler(LineSampler):
    """Directional diffusivity ``q^T A(x_i + s q) q`` of a 2x2 tensor field.

    ``nu`` returns the components ``(a11, a12, a22)``; ``direction`` holds the
    per-node unit vectors ``q``. Rounding-level negative values are clipped.
    """

    def __init__(self, components: Callable, origin, direction, axes=None):
        super().__init__(components, origin, direction, axes, clip_negative=True)

    def _evaluate(self, points, direction):
        a11, a12, a22 = self.nu(*points)
        c, s = direction
        return c * c * a11 + 2.0 * c * s * a12 + s * s * a22


def along(nu: Callable, x, side: int = 1, grid: Grid1D | None = None) -> LineSampler:
    """1D sampler of ``nu`` at ``x + side * s``."""
    return LineSampler(nu, (x,), (float(side),), None if grid is None else (grid,))


def bracket_upper(dt: float, nu_sup: float, dx: float, coef: float = 2.0) -> float:
    """Upper end of the bisection bracket, ``sqrt(c dt sup nu) + dx``."""
    return float(np.sqrt(coef * dt * nu_sup) + dx)


def diffusive_fixed_point(sampler, dt: float, policy: DisplacementPolicy | None = None,
                          coef: float = 2.0, hi=None, stop_early: bool = False
                          ) -> DisplacementResult:
    """Iterate ``delta_k = sqrt(c dt nu(x +- delta_{k-1}))``.

    Starts from ``sqrt(c dt nu(x))`` (``init='local'``) or from ``hi``
    (``init='large'``). A node is reported converged when its final residual
    ``|delta - T(delta)|`` is within tolerance or the residual never grew.
    """
    policy = policy or DisplacementPolicy()
    tol = policy.tolerance()
    scale = coef * dt
    shape = (sampler.size,)
    if policy.init == "large":
        if hi is None:
            raise ValueError("init='large' needs an upper bracket 'hi'")
        delta = np.broadcast_to(np.asarray(hi, dtype=float), shape).copy()
    else:
        delta = np.sqrt(scale * sampler(np.zeros(shape)))
    previous = np.full(shape, np.inf)
    monotone = np.ones(shape, dtype=bool)
    iterations = 0
    image = np.sqrt(scale * sampler(delta))
    residual = np.abs(image - delta)
    for _ in range(policy.iterations):
        monotone &= residual <= previous
        previous = residual
        delta = image
        iterations += 1
        image = np.sqrt(scale * sampler(delta))
        residual = np.abs(image - delta)
        if stop_early and np.all(residual <= tol):
            break
    monotone &= residual <= previous
    converged = (residual <= tol) | monotone
    return DisplacementResult(delta, converged, residual, iterations)


def diffusive_bisection(sampler, dt: float, hi, policy: DisplacementPolicy | None = None,
                        coef: float = 2.0, idx=None) -> DisplacementResult:
    """Root of ``g(delta) = delta - sqrt(c dt nu(x +- delta))`` on ``[0, hi]``.

    A coarse scan from ``hi`` downward isolates the largest sign change before
    bisecting, so a spurious root at zero (vanishing diffusivity at the node)
    is only returned when no positive root exists.
    """
    policy = policy or DisplacementPolicy(method="bisection")
    tol = policy.tolerance()
    scale = coef * dt
    size = sampler.size if idx is None else np.arange(sampler.size)[idx].size

    def g(s):
        return s - np.sqrt(scale * sampler(s, idx))

    hi = np.broadcast_to(np.asarray(hi, dtype=float), (size,)).copy()
    hi = np.where(hi > 0, hi, np.sqrt(scale * np.max(sampler(np.zeros(size), idx), initial=0.0)))
    for _ in range(60):
        low = g(hi) < 0
        if not low.any():
            break
        hi = np.where(low, 2.0 * np.maximum(hi, np.finfo(float).tiny), hi)
    else:
        raise BracketError("could not bracket the diffusive displacement")

    # uniform points locate the largest root; geometric ones catch roots
    # squeezed near zero by a vanishing diffusivity at the node
    k = policy.scan_points
    fractions = np.union1d(np.arange(k + 1) / k, 2.0 ** -np.arange(1, GEOMETRIC_SCAN + 1))
    k = fractions.size - 1
    samples = fractions[:, None] * hi[None, :]
    negative = g(samples[:-1]) < 0
    has_root = negative.any(axis=0)
    top = k - 1 - np.argmax(negative[::-1], axis=0)
    cols = np.arange(size)
    lo = samples[top, cols]
    up = samples[top + 1, cols]
    for _ in range(policy.bisect_iters if policy.method != "bisection" else policy.iterations):
        width = up - lo
        if np.all(width[has_root] <= tol):
            break
        mid = 0.5 * (lo + up)
        neg = g(mid) < 0
        new_lo = np.where(neg, mid, lo)
        new_up = np.where(neg, up, mid)
        if np.array_equal(new_lo, lo) and np.array_equal(new_up, up):
            break
        lo, up = new_lo, new_up
    delta = np.where(has_root, 0.5 * (lo + up), 0.0)
    width = np.where(has_root, up - lo, 0.0)
    residual = np.abs(g(delta))
    return DisplacementResult(delta, width <= tol, residual, policy.iterations, bisected=size)


def solve_displacements(sampler, dt: float, policy: DisplacementPolicy, hi,
                        coef: float = 2.0) -> DisplacementResult:
    """Dispatch on ``policy.method``; ``fallback`` bisects only the failed nodes."""
    if policy.method == "bisection":
        return diffusive_bisection(sampler, dt, hi, policy, coef)
    if policy.method == "fixed_point":
        return diffusive_fixed_point(sampler, dt, policy, coef, hi)
    result = diffusive_fixed_point(sampler, dt, policy, coef, hi, stop_early=True)
    failed = ~result.converged | (result.residual > policy.tolerance())
    if failed.any():
        idx = np.flatnonzero(failed)
        hi_nodes = np.broadcast_to(np.asarray(hi, dtype=float), result.delta.shape)[idx]
        sub = diffusive_bisection(sampler, dt, hi_nodes, policy, coef, idx=idx)
        result.delta[idx] = sub.delta
        result.converged[idx] = sub.converged
        result.residual[idx] = sub.residual
        result.bisected = idx.size
    return result


def advective_displacement(f: Callable, x, dt: float, iters: int = 3,
                           axes: Sequence[Grid1D] | None = None):
    """Fixed-point departure offsets ``alpha = dt f(x - alpha)``.

    ``x`` is a coordinate array (1D) or a tuple of arrays (one per axis),
    in which case ``f`` returns a tuple of velocity components.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    multi = isinstance(x, tuple)
    coords = tuple(np.asarray(c, dtype=float) for c in (x if multi else (x,)))

    def velocity(points):
        if axes is not None:
            points = [ax.canonical(p) for ax, p in zip(axes, points)]
        v = f(*points)
        v = v if multi else (v,)
        return tuple(np.broadcast_to(np.asarray(c, dtype=float), coords[0].shape) for c in v)

    alpha = tuple(dt * v for v in velocity(coords))
    for _ in range(iters):
        alpha = tuple(dt * v for v in velocity([c - a for c, a in zip(coords, alpha)]))
    for a in alpha:
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite advective displacement")
    return alpha if multi else alpha[0]
