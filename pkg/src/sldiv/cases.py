"""Registry of numerical experiments, error reports and CSV output.

Resolution convention: ``N`` is the number of nodes per axis on periodic
grids and the number of intervals on Dirichlet grids (``N + 1`` nodes), so
that refining by an integer factor always nests the coarse nodes.
"""

from __future__ import annotations

import csv
import os
import time as _time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .displacement import DisplacementPolicy
from .grid import (Dirichlet, Grid1D, Grid2D, Periodic, TimeGrid, relative_error,
                   stability_numbers)
from .oracles import (BarenblattParams, ConfigurationError, ThetaSchemeConfig, barenblatt_eval,
                      fourier_exact, reference_high_res, solve_fd_theta)
from .solver import (DiagonalDiffusivity, ProblemSpec1D, SchemeConfig, TensorDiffusivity,
                     solve_1d, solve_2d, solve_nonlinear)

CONST_LENGTH = 10.0
CONST_HORIZON = 2.75
CONST_NU = 0.05
VARCOEF_LENGTH = 10.0
VARCOEF_HORIZON = 4.0
BASELINE_COURANT = (1.375, 2.75, 5.5)


class UnknownCaseError(KeyError):
    """Requested case name is not registered."""


# -- problem ingredients ------------------------------------------------------

def gaussian_ic(grid: Grid1D, center: float, sigma: float | None = None,
                amplitude: float = 1.0) -> np.ndarray:
    """``amplitude * exp(-(x - center)^2 / (2 sigma^2))`` at the nodes (default ``sigma = L/20``)."""
    sigma = grid.length / 20.0 if sigma is None else sigma
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = grid.nodes
    return amplitude * np.exp(-((x - center) ** 2) / (2.0 * sigma**2))


def varcoef_fields(length: float = VARCOEF_LENGTH, horizon: float = VARCOEF_HORIZON):
    """Velocity ``f(x, t)`` and diffusivity ``nu(x, t)`` of the 1D variable-coefficient case.

    The diffusivity jumps on the half-open interval ``[0.5 L, 0.8 L)``.
    """

    def f(x, t):
        x = np.asarray(x, dtype=float)
        return 0.5 + 0.5 * np.cos(6.0 * np.pi * x / length) * np.cos(2.0 * np.pi * t / horizon)

    def nu(x, t):
        x = np.asarray(x, dtype=float)
        xi = ((x >= 0.5 * length) & (x < 0.8 * length)).astype(float)
        return 0.01 + 0.04 * xi * np.sin(2.0 * np.pi * t / horizon) ** 2

    return f, nu


@dataclass(frozen=True)
class TurbulenceParams:
    """Constants of the vertical mixing closure ``k = l^2 |u_z| F(Ri)``.

    ``F(Ri) = (1 + b |Ri|)^beta`` with ``(b, beta)`` taken from ``stable``
    for ``Ri > 0`` and from ``unstable`` for ``Ri < 0``.
    """

    mixing_length: float = 50.0
    theta_ref: float = 273.0
    gravity: float = 9.81
    stable: tuple = (5.0, -2.0)
    unstable: tuple = (20.0, 0.5)
    eps: float = 1e-6

    def __post_init__(self):
        if not (self.mixing_length > 0 and self.theta_ref > 0 and self.gravity > 0):
            raise ValueError("mixing length, reference temperature and gravity must be positive")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


def richardson(u_z, theta_z, params: TurbulenceParams | None = None):
    """Gradient Richardson number, with ``u_z^2`` clamped below by ``eps^2``."""
    params = params or TurbulenceParams()
    u_z = np.asarray(u_z, dtype=float)
    shear = np.maximum(u_z * u_z, params.eps**2)
    return params.gravity * np.asarray(theta_z, dtype=float) / (params.theta_ref * shear)


def stability_function(ri, params: TurbulenceParams | None = None):
    params = params or TurbulenceParams()
    ri = np.asarray(ri, dtype=float)
    (b_s, beta_s), (b_u, beta_u) = params.stable, params.unstable
    stable = (1.0 + b_s * np.abs(ri)) ** beta_s
    unstable = (1.0 + b_u * np.abs(ri)) ** beta_u
    return np.where(ri > 0, stable, np.where(ri < 0, unstable, 1.0))


def turb_diffusivity(u_z, theta_z, params: TurbulenceParams | None = None):
    params = params or TurbulenceParams()
    u_z = np.asarray(u_z, dtype=float)
    ri = richardson(u_z, theta_z, params)
    return params.mixing_length**2 * np.abs(u_z) * stability_function(ri, params)


def porous_builder(m: float = 3.0) -> Callable:
    """Nodal diffusivity ``m u^(m-1)`` of the porous-medium equation."""

    def builder(fields, grads):
        return m * np.maximum(fields[0], 0.0) ** (m - 1.0)

    return builder


def turbulence_builder(params: TurbulenceParams | None = None) -> Callable:
    params = params or TurbulenceParams()

    def builder(fields, grads):
        return turb_diffusivity(grads[0], grads[1], params)

    return builder


def turbulence_initial(z, stable: bool):
    """Initial wind, temperature and the two Dirichlet conditions."""
    z = np.asarray(z, dtype=float)
    u0 = 0.2236 * np.sqrt(z)
    if stable:
        theta0 = np.minimum(290.0 + 0.005 * z, 295.0)
        theta_bc = Dirichlet(290.0, 295.0)
    else:
        theta0 = np.maximum(300.0 - 0.005 * z, 295.0)
        theta_bc = Dirichlet(300.0, 295.0)
    return u0, theta0, Dirichlet(0.0, 10.0), theta_bc


# -- specs and reports --------------------------------------------------------

@dataclass
class ErrorReport:
    case: str
    N: int
    M: int
    C: float
    mu: float
    l2_rel: Optional[float] = None
    linf_rel: Optional[float] = None
    wall_time: float = 0.0

    def __post_init__(self):
        for err in (self.l2_rel, self.linf_rel):
            if err is not None and not (np.isfinite(err) and err >= 0):
                raise ValueError(f"invalid error value {err!r}")


@dataclass(frozen=True)
class CaseSpec:
    """Which case to run and how; ``None`` fields take the registered defaults."""

    name: str
    nodes: Optional[int] = None
    steps: Optional[int] = None
    order: int = 3
    displacement: Optional[str] = None
    ref_factor: int = 4
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.name not in CASES:
            raise UnknownCaseError(f"unknown case {self.name!r}; choose from {sorted(CASES)}")
        for label, value in (("nodes", self.nodes), ("steps", self.steps)):
            if value is not None and (int(value) != value or value < 1):
                raise ValueError(f"{label} must be a positive integer, got {value}")
        if self.order not in (1, 3):
            raise ValueError(f"interpolation order must be 1 or 3, got {self.order}")
        if int(self.ref_factor) != self.ref_factor or self.ref_factor < 1:
            raise ConfigurationError(f"ref_factor must be a positive integer, got {self.ref_factor}")

    @property
    def resolution(self) -> tuple[int, int]:
        case = CASES[self.name]
        return (self.nodes or case.nodes, self.steps or case.steps)


@dataclass
class CaseResult:
    """Outcome of one case: error reports (primary first), fields and diagnostics."""

    reports: list
    fields: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    dx: float = float("nan")
    dt: float = float("nan")

    @property
    def report(self) -> ErrorReport:
        return self.reports[0]


@dataclass(frozen=True)
class Case:
    runner: Callable
    nodes: int
    steps: int
    policy: DisplacementPolicy = field(default_factory=DisplacementPolicy)
    description: str = ""


def _config(spec: CaseSpec) -> SchemeConfig:
    policy = CASES[spec.name].policy
    if spec.displacement is not None:
        policy = replace(policy, method=spec.displacement)
    return SchemeConfig(order=spec.order, displacement=policy)


def _report(spec, N, M, a, nu, dt, dx, values=None, reference=None, grid=None, label=None):
    c, mu = stability_numbers(a, nu, dt, dx)
    report = ErrorReport(label or spec.name, N, M, c, mu)
    if reference is not None:
        report.l2_rel = relative_error(values, reference, grid, "l2")
        report.linf_rel = relative_error(values, reference, grid, "linf")
    return report


# -- runners ------------------------------------------------------------------

def _constant_problem(N, M, a, order=3, policy=None):
    grid = Grid1D(CONST_LENGTH, N)
    time = TimeGrid(CONST_HORIZON, M)
    u0 = gaussian_ic(grid, CONST_LENGTH / 2.0)
    nu = lambda x, t: np.full_like(x, CONST_NU)
    velocity = None if a == 0 else (lambda x, t: np.full_like(x, a))
    config = SchemeConfig(order=order, displacement=policy or DisplacementPolicy())
    v = solve_1d(ProblemSpec1D(grid, u0, nu, velocity), time, config)
    return grid, time, v, fourier_exact(u0, grid, a, CONST_NU, CONST_HORIZON)


def _run_constant(spec: CaseSpec, a: float) -> CaseResult:
    N, M = spec.resolution
    config = _config(spec)
    grid, time, v, ref = _constant_problem(N, M, a, config.order, config.displacement)
    report = _report(spec, N, M, a, CONST_NU, time.dt, grid.dx, v, ref, grid)
    return CaseResult([report], {"solution": (grid, v)}, dx=grid.dx, dt=time.dt)


def _run_const_diff(spec):
    return _run_constant(spec, 0.0)


def _run_const_advdiff(spec):
    return _run_constant(spec, 1.0)


def _fd_baseline(N, M, a=1.0, theta=0.52):
    grid = Grid1D(CONST_LENGTH, N)
    time = TimeGrid(CONST_HORIZON, M)
    u0 = gaussian_ic(grid, CONST_LENGTH / 2.0)
    w = solve_fd_theta(u0, grid, a, CONST_NU, time, ThetaSchemeConfig(theta), constant=True)
    return grid, time, w, fourier_exact(u0, grid, a, CONST_NU, CONST_HORIZON)


def _run_baseline(spec: CaseSpec) -> CaseResult:
    N, M = spec.resolution
    config = _config(spec)
    grid, time, v, ref = _constant_problem(N, M, 1.0, config.order, config.displacement)
    _, _, w, _ = _fd_baseline(N, M)
    sl = _report(spec, N, M, 1.0, CONST_NU, time.dt, grid.dx, v, ref, grid,
                 f"{spec.name}:sl")
    fd = _report(spec, N, M, 1.0, CONST_NU, time.dt, grid.dx, w, ref, grid,
                 f"{spec.name}:fd_theta")
    return CaseResult([sl, fd], {"solution": (grid, v), "fd_theta": (grid, w)},
                      dx=grid.dx, dt=time.dt)


def _run_varcoef(spec: CaseSpec) -> CaseResult:
    N, M = spec.resolution
    config = _config(spec)
    grid = Grid1D(VARCOEF_LENGTH, N)
    time = TimeGrid(VARCOEF_HORIZON, M)
    f, nu = varcoef_fields()
    u0 = gaussian_ic(grid, VARCOEF_LENGTH / 3.0)

    extremes = []

    def observer(n, t, v):
        extremes.append((float(v.min()), float(v.max())))

    v = solve_1d(ProblemSpec1D(grid, u0, nu, f), time, config, observer)

    def fine_solve(fine_grid, fine_time):
        fine_u0 = gaussian_ic(fine_grid, VARCOEF_LENGTH / 3.0)
        return solve_fd_theta(fine_u0, fine_grid, f, nu, fine_time, ThetaSchemeConfig(0.5))

    k = int(spec.ref_factor)
    ref = reference_high_res(fine_solve, grid, time, k, 4 * k)
    # reporting metadata: mean velocity and background diffusivity
    report = _report(spec, N, M, 0.5, 0.01, time.dt, grid.dx, v, ref, grid)
    growth = max(max(hi - extremes[n][1], extremes[n][0] - lo, 0.0)
                 for n, (lo, hi) in enumerate(extremes[1:]))
    return CaseResult([report], {"solution": (grid, v), "reference": (grid, ref)},
                      {"max_principle_excess": growth}, dx=grid.dx, dt=time.dt)


def _snapshot_observer(times, store):
    def observer(n, t, v):
        for target in times:
            if np.isclose(t, target, rtol=0.0, atol=1e-9):
                store[target] = [u.copy() for u in v] if isinstance(v, list) else v.copy()

    return observer


def _square_indicator(x1, x2, lo1, hi1, lo2, hi2):
    return ((x1 >= lo1) & (x1 <= hi1) & (x2 >= lo2) & (x2 <= hi2)).astype(float)


def _periodic_square(N):
    axis = Grid1D(6.0, N, Periodic(), origin=-3.0)
    return Grid2D(axis, axis)


def _run_isotropic(spec: CaseSpec) -> CaseResult:
    N, M = spec.resolution
    grid = _periodic_square(N)
    time = TimeGrid(1.0, M)
    x1, x2 = grid.mesh()
    u0 = _square_indicator(x1, x2, -1.5, 1.5, -1.5, 1.5)

    def nu(a, b):
        return np.exp(-5.0 * ((a - 1.5) ** 2 + b**2))

    coeff = DiagonalDiffusivity(nu, nu)
    snaps = {}
    v = solve_2d(u0, grid, lambda t: coeff, time, _config(spec),
                 observer=_snapshot_observer((0.5, 1.0), snaps))
    c, mu = stability_numbers(0.0, 1.0, time.dt, grid.axis1.dx)
    fields = {f"t{t:g}": (grid, u) for t, u in sorted(snaps.items())}
    fields["solution"] = (grid, v)
    metrics = {"mass_initial": float(u0.sum()), "mass_final": float(v.sum())}
    return CaseResult([ErrorReport(spec.name, N, M, c, mu)], fields, metrics,
                      dx=grid.axis1.dx, dt=time.dt)


ANISO_SNAPSHOTS = (0.25, 0.5, 0.75)


def _run_aniso(spec: CaseSpec) -> CaseResult:
    N, M = spec.resolution
    grid = _periodic_square(N)
    time = TimeGrid(0.75, M)
    x1, x2 = grid.mesh()
    u0 = _square_indicator(x1, x2, -1.5, -0.5, 0.5, 1.5)
    tensor = TensorDiffusivity(
        lambda a, b: (np.zeros_like(a), np.zeros_like(a), np.exp(-5.0 * a * a)))
    snaps = {}
    v = solve_2d(u0, grid, lambda t: tensor, time, _config(spec),
                 velocity=lambda a, b, t: (b, -a),
                 observer=_snapshot_observer(ANISO_SNAPSHOTS, snaps))
    c, mu = stability_numbers(3.0, 1.0, time.dt, grid.axis1.dx)
    fields = {f"t{t:g}": (grid, u) for t, u in sorted(snaps.items())}
    fields["solution"] = (grid, v)
    return CaseResult([ErrorReport(spec.name, N, M, c, mu)], fields,
                      {"min": float(v.min()), "max": float(v.max())},
                      dx=grid.axis1.dx, dt=time.dt)


POROUS_SNAPSHOTS = (1.0, 4.0, 16.0)


def _run_porous_1d(spec: CaseSpec) -> CaseResult:
    N, M = spec.resolution
    params = BarenblattParams()
    grid = Grid1D(20.0, N + 1, Dirichlet(0.0, 0.0), origin=-10.0)
    time = TimeGrid(16.0, M)
    u0 = barenblatt_eval(grid.nodes, 0.0, params)
    snaps = {}
    u = solve_nonlinear([u0], grid, porous_builder(params.m), time, _config(spec),
                        observer=_snapshot_observer(POROUS_SNAPSHOTS, snaps))[0]
    exact = barenblatt_eval(grid.nodes, time.horizon, params)
    report = _report(spec, N, M, 0.0, params.m * float(np.max(u0)) ** (params.m - 1.0),
                     time.dt, grid.dx, u, exact, grid)
    leak = {}
    for t, (snap,) in snaps.items():
        outside = np.abs(grid.nodes) > params.support_radius(t) + 4.0 * grid.dx
        leak[t] = float(np.max(np.abs(snap[outside]), initial=0.0) / np.max(np.abs(snap)))
    fields = {f"t{t:g}": (grid, s[0]) for t, s in sorted(snaps.items())}
    fields["solution"] = (grid, u)
    fields["exact"] = (grid, exact)
    metrics = {"support_leak": leak, "mass_initial": float(u0.sum() * grid.dx),
               "mass_final": float(u.sum() * grid.dx)}
    return CaseResult([report], fields, metrics, dx=grid.dx, dt=time.dt)


def _run_porous_2d(spec: CaseSpec) -> CaseResult:
    N, M = spec.resolution
    params = BarenblattParams(d=2)
    axis = Grid1D(20.0, N + 1, Dirichlet(0.0, 0.0), origin=-10.0)
    grid = Grid2D(axis, axis)
    time = TimeGrid(4.0, M)
    x1, x2 = grid.mesh()
    u0 = barenblatt_eval((x1, x2), 0.0, params)
    u = solve_nonlinear([u0], grid, porous_builder(params.m), time, _config(spec))[0]
    exact = barenblatt_eval((x1, x2), time.horizon, params)
    report = _report(spec, N, M, 0.0, params.m * float(np.max(u0)) ** (params.m - 1.0),
                     time.dt, axis.dx, u, exact, grid)
    return CaseResult([report], {"solution": (grid, u), "exact": (grid, exact)},
                      dx=axis.dx, dt=time.dt)


TURB_HEIGHT = 2000.0
TURB_HORIZON = 900.0


def _turbulence_solve(grid: Grid1D, time: TimeGrid, stable: bool, config: SchemeConfig,
                      observer=None):
    u0, theta0, u_bc, theta_bc = turbulence_initial(grid.nodes, stable)
    return solve_nonlinear([u0, theta0], grid, turbulence_builder(), time, config,
                           bcs=[u_bc, theta_bc], observer=observer)


def _rms(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.sqrt(np.mean(values * values)))


def _run_turbulence(spec: CaseSpec, stable: bool) -> CaseResult:
    N, M = spec.resolution
    config = _config(spec)
    grid = Grid1D(TURB_HEIGHT, N + 1, Dirichlet(0.0, 0.0))
    time = TimeGrid(TURB_HORIZON, M)
    window = TURB_HORIZON - 100.0
    snaps = {}
    u, theta = _turbulence_solve(grid, time, stable, config,
                                 _snapshot_observer((window,), snaps))
    k = int(spec.ref_factor)
    u_ref, theta_ref = reference_high_res(
        lambda g, t: _turbulence_solve(g, t, stable, config), grid, time, k, k)
    u0, theta0, _, _ = turbulence_initial(grid.nodes, stable)
    k0 = turb_diffusivity(np.gradient(u0, grid.dx, edge_order=2),
                          np.gradient(theta0, grid.dx, edge_order=2))
    reports = [
        _report(spec, N, M, 0.0, float(np.max(k0)), time.dt, grid.dx, theta, theta_ref, grid,
                f"{spec.name}:theta"),
        _report(spec, N, M, 0.0, float(np.max(k0)), time.dt, grid.dx, u, u_ref, grid,
                f"{spec.name}:u"),
    ]
    z = grid.nodes
    lower = (z > 0) & (z < 0.5 * TURB_HEIGHT)
    grad0 = np.abs(np.gradient(theta0, grid.dx, edge_order=2))[lower]
    grad = np.abs(np.gradient(theta, grid.dx, edge_order=2))[lower]
    metrics = {
        "theta_change_last_100s": _rms(theta - snaps[window][1]) if window in snaps else None,
        "theta_initial_range": float(np.ptp(theta0)),
        "lower_gradient_ratio": float(grad.max() / grad0.max()),
        "u_ref_distance": _rms(u - u_ref) / float(np.ptp(u_ref)),
        "theta_ref_distance": _rms(theta - theta_ref) / float(np.ptp(theta_ref)),
    }
    fields = {"u": (grid, u), "theta": (grid, theta), "u_reference": (grid, u_ref),
              "theta_reference": (grid, theta_ref)}
    return CaseResult(reports, fields, metrics, dx=grid.dx, dt=time.dt)


def _run_turb_stable(spec):
    return _run_turbulence(spec, True)


def _run_turb_unstable(spec):
    return _run_turbulence(spec, False)


CASES = {
    "const_diff": Case(_run_const_diff, 200, 100, description="constant-coefficient diffusion"),
    "const_advdiff": Case(_run_const_advdiff, 400, 200,
                          description="constant-coefficient advection-diffusion"),
    "baseline_compare": Case(_run_baseline, 200, 20,
                             description="SL against the FD theta scheme"),
    "varcoef_1d": Case(_run_varcoef, 200, 100, description="1D variable coefficients"),
    "isotropic_2d": Case(_run_isotropic, 50, 20, description="2D isotropic diffusion"),
    "aniso_rot_2d": Case(_run_aniso, 100, 120,
                         description="2D rotation with anisotropic diffusion"),
    "porous_1d": Case(_run_porous_1d, 50, 320,
                      DisplacementPolicy("fallback", init="large"), "1D porous medium"),
    "porous_2d": Case(_run_porous_2d, 50, 80,
                      DisplacementPolicy("fallback", init="large"), "2D porous medium"),
    "turb_stable": Case(_run_turb_stable, 32, 360, DisplacementPolicy("bisection"),
                        "turbulent vertical diffusion, stable"),
    "turb_unstable": Case(_run_turb_unstable, 32, 360, DisplacementPolicy("bisection"),
                          "turbulent vertical diffusion, unstable"),
}


# -- execution and CSV output -------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_rows(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])


def write_solution_csv(path, grid: Grid1D | Grid2D, values) -> None:
    """``x,value`` (1D) or ``x,y,value`` (2D, row-major) table of nodal values."""
    values = np.asarray(values, dtype=float)
    if isinstance(grid, Grid2D):
        x1, x2 = grid.mesh()
        rows = zip(x1.ravel(), x2.ravel(), values.ravel())
        _write_rows(Path(path), ["x", "y", "value"], rows)
    else:
        _write_rows(Path(path), ["x", "value"], zip(grid.nodes, values))


ERROR_HEADER = ["case", "N", "M", "C", "mu", "l2_rel", "linf_rel"]


def write_error_csv(path, reports) -> None:
    rows = [[r.case, r.N, r.M, r.C, r.mu, r.l2_rel, r.linf_rel] for r in reports]
    _write_rows(Path(path), ERROR_HEADER, rows)


def resolve_out_dir(out_dir: str | None) -> Path | None:
    if out_dir is not None:
        return Path(out_dir)
    env = os.environ.get("OUT_DIR")
    return Path(env) if env else None


def run_case_full(spec: CaseSpec) -> CaseResult:
    """Run a case and write its CSVs into ``spec.out_dir`` (or ``$OUT_DIR``) if set."""
    start = _time.perf_counter()
    result = CASES[spec.name].runner(spec)
    elapsed = _time.perf_counter() - start
    for r in result.reports:
        r.wall_time = elapsed
    out = resolve_out_dir(spec.out_dir)
    if out is not None:
        for label, (grid, values) in result.fields.items():
            write_solution_csv(out / f"{spec.name}_{label}.csv", grid, values)
        write_error_csv(out / f"{spec.name}_errors.csv", result.reports)
    return result


def run_case(spec: CaseSpec) -> ErrorReport:
    """Run a case and return its primary error report."""
    return run_case_full(spec).report


# -- studies ------------------------------------------------------------------

def observed_order(steps, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(step)``."""
    steps = np.asarray(steps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if steps.size < 3:
        raise ConfigurationError("a convergence study needs at least 3 resolutions")
    if np.any(errors <= 0) or np.any(steps <= 0):
        raise ConfigurationError("steps and errors must be positive for a log-log fit")
    return float(np.polyfit(np.log(steps), np.log(errors), 1)[0])


@dataclass
class ConvergenceTable:
    rows: list
    rates: dict


def convergence_study(case: str, resolutions, orders=(3,), variable: str = "time",
                      out_dir: str | None = None, **spec_options) -> ConvergenceTable:
    """Errors over ``resolutions`` and the observed order per interpolation order.

    ``variable='time'`` regresses against ``dt`` (keep ``N`` fixed and fine),
    ``variable='space'`` against ``dx``.
    """
    resolutions = list(resolutions)
    if len(resolutions) < 3:
        raise ConfigurationError("a convergence study needs at least 3 resolutions")
    if variable not in ("time", "space"):
        raise ValueError(f"variable must be 'time' or 'space', got {variable!r}")
    rows, rates = [], {}
    for order in orders:
        steps, errors = [], []
        for N, M in resolutions:
            result = CASES[case].runner(CaseSpec(case, N, M, order=order, **spec_options))
            r = result.report
            if r.l2_rel is None:
                raise ConfigurationError(f"case {case!r} has no error metric")
            rows.append([case, order, N, M, result.dx, result.dt, r.l2_rel, r.linf_rel])
            steps.append(result.dt if variable == "time" else result.dx)
            errors.append(r.l2_rel)
        rates[order] = observed_order(steps, errors)
    out = resolve_out_dir(out_dir)
    if out is not None:
        _write_rows(out / f"{case}_convergence.csv",
                    ["case", "order", "N", "M", "dx", "dt", "l2_rel", "linf_rel"], rows)
        _write_rows(out / f"{case}_rates.csv", ["case", "order", "variable", "rate"],
                    [[case, o, variable, rate] for o, rate in rates.items()])
    return ConvergenceTable(rows, rates)


def compare_baseline(nodes: int = 200, courants=BASELINE_COURANT, order: int = 3,
                     theta: float = 0.52, out_dir: str | None = None) -> list:
    """Rows ``(scheme, C, mu, l2_rel, linf_rel)`` for SL and the theta scheme."""
    dx = CONST_LENGTH / nodes
    rows = []
    for courant in courants:
        steps = int(round(CONST_HORIZON / (courant * dx)))
        if not np.isclose(CONST_HORIZON / steps, courant * dx, rtol=1e-12):
            raise ConfigurationError(f"C = {courant} does not give an integer step count")
        grid, time, v, ref = _constant_problem(nodes, steps, 1.0, order)
        _, _, w, _ = _fd_baseline(nodes, steps, theta=theta)
        c, mu = stability_numbers(1.0, CONST_NU, time.dt, grid.dx)
        for scheme, values in (("sl", v), ("fd_theta", w)):
            rows.append([scheme, c, mu, relative_error(values, ref, grid, "l2"),
                         relative_error(values, ref, grid, "linf")])
    out = resolve_out_dir(out_dir)
    if out is not None:
        _write_rows(out / "baseline_compare.csv", ["scheme", "C", "mu", "l2_rel", "linf_rel"],
                    rows)
    return rows
