"""Reference solutions and the Eulerian finite-difference baseline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Dirichlet, Grid1D, Grid2D, TimeGrid, check_values


class ConfigurationError(ValueError):
    pass


# -- Fourier solution, constant coefficients ----------------------------------

def wavenumbers(grid: Grid1D) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(grid.n_nodes, d=grid.dx)


def fourier_exact(u0, grid: Grid1D, a: float, nu: float, t: float) -> np.ndarray:
    """Exact evolution of the discrete Fourier modes of ``u0`` under
    ``u_t + a u_x = nu u_xx`` on a periodic grid."""
    if not grid.periodic:
        raise ConfigurationError("the Fourier solution needs a periodic grid")
    u0 = check_values(u0, grid)
    kappa = wavenumbers(grid)
    factor = np.exp(-nu * kappa**2 * t) * np.exp(-1j * a * kappa * t)
    return np.real(np.fft.ifft(np.fft.fft(u0) * factor))


# -- FD + off-centered Crank-Nicolson ----------------------------------------

@dataclass(frozen=True)
class ThetaSchemeConfig:
    theta: float = 0.52

    def __post_init__(self):
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0.5, 1], got {self.theta}")


def _coefficient(c, x, t):
    if c is None:
        return np.zeros_like(x)
    if callable(c):
        return np.broadcast_to(np.asarray(c(x, t), dtype=float), x.shape)
    return np.full_like(x, float(c))


def fd_operator(grid: Grid1D, f, nu, t: float) -> sp.csr_matrix:
    """Sparse ``S = -f D4 + D_nu`` at time ``t``.

    ``D4`` is the fourth-order centered first derivative and
    ``D_nu v_i = (nu_{i+1/2}(v_{i+1}-v_i) - nu_{i-1/2}(v_i-v_{i-1})) / dx^2``
    with arithmetic face means of nodal diffusivities. On Dirichlet grids the
    boundary rows are zero and the rows next to them use second-order
    centered advection. ``f`` and ``nu`` are constants or functions of
    ``(x, t)``.
    """
    n, dx = grid.n_nodes, grid.dx
    x = grid.nodes
    fx = _coefficient(f, x, t)
    nux = _coefficient(nu, x, t)
    i = np.arange(n)
    if grid.periodic:
        nu_right = 0.5 * (nux + np.roll(nux, -1))
        nu_left = np.roll(nu_right, 1)
        rows = np.concatenate([i] * 5)
        cols = np.concatenate([(i + k) % n for k in (-2, -1, 0, 1, 2)])
        adv = -fx / (12.0 * dx)
        vals = np.concatenate([
            adv,
            -8.0 * adv + nu_left / dx**2,
            -(nu_left + nu_right) / dx**2,
            8.0 * adv + nu_right / dx**2,
            -adv,
        ])
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    inner = np.arange(1, n - 1)
    nu_right = 0.5 * (nux[inner] + nux[inner + 1])
    nu_left = 0.5 * (nux[inner] + nux[inner - 1])
    entries = {}

    def add(r, c, v):
        for rr, cc, vv in zip(r, c, v):
            entries[(rr, cc)] = entries.get((rr, cc), 0.0) + vv

    add(inner, inner - 1, nu_left / dx**2)
    add(inner, inner, -(nu_left + nu_right) / dx**2)
    add(inner, inner + 1, nu_right / dx**2)
    wide = np.arange(2, n - 2)
    adv = -fx[wide] / (12.0 * dx)
    for k, w in zip((-2, -1, 1, 2), (-1.0, 8.0, -8.0, 1.0)):
        add(wide, wide + k, -w * adv)
    for r in (1, n - 2):
        if r in wide:
            continue
        add([r, r], [r - 1, r + 1], [fx[r] / (2.0 * dx), -fx[r] / (2.0 * dx)])
    keys = list(entries)
    return sp.csr_matrix(
        ([entries[k] for k in keys], ([k[0] for k in keys], [k[1] for k in keys])),
        shape=(n, n))


def fd_theta_step(values, grid: Grid1D, f, nu, t: float, dt: float,
                  config: ThetaSchemeConfig | None = None, operators=None) -> np.ndarray:
    """Solve ``(I - theta dt S^{n+1}) V^{n+1} = (I + (1 - theta) dt S^n) V^n``.

    ``operators`` optionally supplies ``(S^n, S^{n+1})`` already assembled.
    """
    config = config or ThetaSchemeConfig()
    values = check_values(values, grid)
    theta = config.theta
    now, after = operators or (fd_operator(grid, f, nu, t), fd_operator(grid, f, nu, t + dt))
    eye = sp.identity(grid.n_nodes, format="csr")
    lhs = eye - theta * dt * after
    rhs = (eye + (1.0 - theta) * dt * now) @ values
    if isinstance(grid.bc, Dirichlet):
        # replace the boundary rows by identity rows carrying the boundary data
        keep = np.ones(grid.n_nodes)
        keep[[0, -1]] = 0.0
        lhs = sp.diags(keep) @ lhs + sp.diags(1.0 - keep)
        rhs[0], rhs[-1] = grid.bc.values(t + dt)
    out = spla.spsolve(lhs.tocsc(), rhs)
    if not np.all(np.isfinite(out)):
        raise np.linalg.LinAlgError("singular theta-scheme system")
    return out


def solve_fd_theta(u0, grid: Grid1D, f, nu, time: TimeGrid,
                   config: ThetaSchemeConfig | None = None,
                   constant: bool = False) -> np.ndarray:
    """Time loop for the theta scheme.

    With ``constant=True`` the coefficients are taken as time independent and
    the system is factorized once.
    """
    config = config or ThetaSchemeConfig()
    v = check_values(np.array(u0, dtype=float), grid)
    if constant and grid.periodic:
        eye = sp.identity(grid.n_nodes, format="csc")
        s = fd_operator(grid, f, nu, 0.0).tocsc()
        solve = spla.factorized((eye - config.theta * time.dt * s).tocsc())
        explicit = (eye + (1.0 - config.theta) * time.dt * s).tocsr()
        for _ in range(time.steps):
            v = solve(explicit @ v)
        return v
    after = fd_operator(grid, f, nu, time.time(0))
    for n in range(time.steps):
        now, after = after, fd_operator(grid, f, nu, time.time(n + 1))
        v = fd_theta_step(v, grid, f, nu, time.time(n), time.dt, config, (now, after))
    return v


# -- Barenblatt-Pattle --------------------------------------------------------

@dataclass(frozen=True)
class BarenblattParams:
    m: float = 3.0
    A: float = 1.0
    t0: float = 1.0
    d: int = 1

    def __post_init__(self):
        if not self.m > 1 or self.A == 0 or not self.t0 > 0:
            raise ValueError("Barenblatt profile needs m > 1, A != 0, t0 > 0")

    @property
    def k(self) -> float:
        return self.d / (self.d * (self.m - 1.0) + 2.0)

    def _slope(self, t):
        s = t + self.t0
        return self.k * (self.m - 1.0) / (2.0 * self.m * self.d * s ** (2.0 * self.k / self.d))

    def support_radius(self, t: float) -> float:
        return float(np.sqrt(self.A**2 / self._slope(t)))


def barenblatt_eval(x, t: float, params: BarenblattParams | None = None):
    """Self-similar porous-medium solution of ``u_t = div(m u^(m-1) grad u)``.

    ``x`` is an array of positions (``d = 1``) or a pair of coordinate arrays.
    """
    params = params or BarenblattParams()
    if not t + params.t0 > 0:
        raise ValueError("need t + t0 > 0")
    if isinstance(x, tuple):
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in x)
    else:
        r2 = np.asarray(x, dtype=float) ** 2
    core = np.maximum(params.A**2 - params._slope(t) * r2, 0.0)
    u = (t + params.t0) ** (-params.k) * core ** (1.0 / (params.m - 1.0))
    return u if np.ndim(u) else float(u)


# -- refined references -------------------------------------------------------

def restrict(values: np.ndarray, factor: int) -> np.ndarray:
    """Injection of refined nodal values onto the coarse nodes."""
    values = np.asarray(values)
    return values[tuple(slice(None, None, factor) for _ in range(values.ndim))]


def reference_high_res(solve: Callable, grid: Grid1D | Grid2D, time: TimeGrid,
                       space_factor: int = 4, time_factor: int = 4):
    """Run ``solve(fine_grid, fine_time)`` on a nested refinement and inject.

    ``solve`` may return one array or a list of arrays (coupled fields).
    """
    for factor in (space_factor, time_factor):
        if int(factor) != factor or factor < 1:
            raise ConfigurationError(f"refinement factors must be positive integers, got {factor}")
    fine = solve(grid.refine(int(space_factor)), time.refine(int(time_factor)))
    if isinstance(fine, (list, tuple)):
        return [restrict(u, int(space_factor)) for u in fine]
    return restrict(fine, int(space_factor))
