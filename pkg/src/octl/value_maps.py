"""Scalar value maps obtained by bisection over monotone feasibility predicates.

==========  ==========================================  =====================
map         definition                                  monotone predicate
==========  ==========================================  =====================
M(tau, r)   least bound reaching B(z_d, r) on (tau, T)   r(M, tau) <= r in M
tau(M, r)   latest activation reaching B(z_d, r)         r(M, tau) <= r in tau
M^tau       least bound hitting z_d exactly              r(M, tau) <= eta in M
T_M         least horizon steering y0 to 0               dist0(M, s) <= eta in s
M_T         least bound steering y0 to 0 at time T       dist0(M, T) <= eta in M
==========  ==========================================  =====================

Every returned value is the midpoint of a bracket no wider than the
configured bisection tolerance.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math
import os

import numpy as np

from .dynamics import ControlSignal, terminal_state
from .op_solver import OpSolution, cached_solve, r_of, reaches
from .spectral_model import Model

log = logging.getLogger(__name__)

MAP_KINDS = ("r_of_M", "M_of_tau", "tau_of_M", "M_sup_tau", "T_of_M", "M_of_T")


class InfeasibleError(ValueError):
    def __init__(self, message: str, minimal_M: float | None = None):
        super().__init__(message)
        self.minimal_M = minimal_M


@dataclass(frozen=True, eq=False)
class ValueMapResult:
    value: float
    bracket: tuple[float, float]
    attaining_control: ControlSignal
    probe_count: int
    solution: OpSolution | None = None
    model: Model | None = None  # grid of the attaining control when it differs


@dataclass
class MapSample:
    kind: str
    grid: list[float]
    values: list[float]
    status: list[str] = field(default_factory=list)


def _bisect(pred, x_false: float, x_true: float, tol: float):
    """Shrink ``[x_false, x_true]`` (either orientation) to width ``tol``."""
    probes = 0
    while abs(x_true - x_false) > tol:
        mid = 0.5 * (x_false + x_true)
        probes += 1
        if pred(mid):
            x_true = mid
        else:
            x_false = mid
    return x_false, x_true, probes


def _grow(pred, start: float, limit: int = 60):
    """Double ``start`` until ``pred`` holds; returns ``(last_false, first_true, probes)``."""
    lo, hi = 0.0, start
    for probes in range(1, limit + 1):
        if pred(hi):
            return lo, hi, probes
        lo, hi = hi, 2.0 * hi
    raise RuntimeError(f"no feasible bracket found below {hi}")


def _b_min(model: Model) -> float:
    return float(np.min(np.diag(model.coupling)))


def _r_T(model: Model, y0, z_d) -> float:
    return float(np.linalg.norm(model.free_propagate(y0, model.horizon) - z_d))


def _check_tau(model: Model, tau: float) -> None:
    if not 0.0 <= tau < model.horizon:
        raise ValueError(f"tau={tau} outside [0, {model.horizon})")


def _result(model, y0, z_d, M, tau, lo, hi, probes, value=None) -> ValueMapResult:
    value = 0.5 * (lo + hi) if value is None else value
    bracket = (min(lo, hi), max(lo, hi))
    sol = cached_solve(model, y0, z_d, M if M is not None else value,
                       tau if tau is not None else value)
    return ValueMapResult(value, bracket, sol.control, probes, sol, model)


def solve_np(model: Model, y0, z_d, tau: float, r: float) -> ValueMapResult:
    """Optimal norm ``M(tau, r)``: the least bound that reaches ``B(z_d, r)``."""
    _check_tau(model, tau)
    if r <= 0:
        raise ValueError("r must be positive; use m_tau for exact reach")
    y0, z_d = np.asarray(y0, complex), np.asarray(z_d, complex)
    r_T = _r_T(model, y0, z_d)
    if r >= r_T:
        log.warning("r=%g >= r_T=%g: the zero control already reaches the ball", r, r_T)
        zero = ControlSignal.zeros(model, tau)
        return ValueMapResult(0.0, (0.0, 0.0), zero, 0, cached_solve(model, y0, z_d, 0.0, tau),
                              model)
    tol = model.config.bisection_tolerance

    def pred(M):
        return reaches(model, y0, z_d, M, tau, r)

    lo, hi, grow = _grow(pred, r_T / (_b_min(model) * (model.horizon - tau)))
    lo, hi, probes = _bisect(pred, lo, hi, tol)
    M = 0.5 * (lo + hi)
    return _result(model, y0, z_d, M, tau, lo, hi, grow + probes)


def solve_tp(model: Model, y0, z_d, M: float, r: float) -> ValueMapResult:
    """Optimal time ``tau(M, r)``: the latest activation that still reaches ``B(z_d, r)``."""
    y0, z_d = np.asarray(y0, complex), np.asarray(z_d, complex)
    r_T = _r_T(model, y0, z_d)
    if not 0 < r < r_T:
        raise ValueError(f"r={r} outside (0, r_T={r_T})")
    T = model.horizon
    tol = model.config.bisection_tolerance

    def pred(tau):
        return reaches(model, y0, z_d, M, tau, r)

    if not pred(0.0):
        # at the edge M = M(0, r) the bisected M may sit a hair below the true value
        slack = T * tol
        if M > 0 and r_of(model, y0, z_d, M, 0.0) <= r + slack:
            return _result(model, y0, z_d, M, 0.0, 0.0, 0.0, 1, value=0.0)
        minimal = solve_np(model, y0, z_d, 0.0, r).value
        raise InfeasibleError(
            f"(M={M}, r={r}) is infeasible; the bound must be at least M(0, r)={minimal:.6g}",
            minimal)
    # at tau -> T the control window vanishes and the distance tends to r_T > r
    x_false, x_true, probes = _bisect(pred, T, 0.0, tol)
    tau = 0.5 * (x_false + x_true)
    return _result(model, y0, z_d, M, tau, x_true, x_false, probes + 1)


def m_tau(model: Model, y0, z_d, tau: float) -> ValueMapResult:
    """``M^tau``: the least bound that steers ``y0`` exactly onto ``z_d`` (within eta)."""
    _check_tau(model, tau)
    y0, z_d = np.asarray(y0, complex), np.asarray(z_d, complex)
    eta = model.config.reach_tolerance
    r_T = _r_T(model, y0, z_d)
    if r_T <= eta:
        raise ValueError("z_d is the free endpoint (r_T = 0); M^tau is degenerate")

    def pred(M):
        return reaches(model, y0, z_d, M, tau, eta)

    lo, hi, grow = _grow(pred, r_T / (_b_min(model) * (model.horizon - tau)))
    lo, hi, probes = _bisect(pred, lo, hi, model.config.bisection_tolerance)
    M = 0.5 * (lo + hi)
    return _result(model, y0, z_d, M, tau, lo, hi, grow + probes)


def _null_target(model: Model) -> np.ndarray:
    return np.zeros(model.num_modes, complex)


def solve_tocp(model: Model, y0, M: float) -> ValueMapResult:
    """Minimal time ``T_M`` to steer ``y0`` to rest with ``||u(t)|| <= M``.

    Each probe horizon gets its own grid with the node spacing of ``model``.
    """
    if M <= 0:
        raise ValueError(f"control bound must be positive, got {M}")
    y0 = np.asarray(y0, complex)
    norm0 = float(np.linalg.norm(y0))
    zero = _null_target(model)
    if norm0 == 0.0:
        return ValueMapResult(0.0, (0.0, 0.0), ControlSignal.zeros(model), 0, None, model)
    eta = model.config.reach_tolerance

    def pred(s):
        return reaches(model.with_horizon(s), y0, zero, M, 0.0, eta)

    lo, hi, grow = _grow(pred, norm0 / (_b_min(model) * M))
    lo, hi, probes = _bisect(pred, lo, hi, model.config.bisection_tolerance)
    s = 0.5 * (lo + hi)
    horizon_model = model.with_horizon(s)
    sol = cached_solve(horizon_model, y0, zero, M, 0.0)
    return ValueMapResult(s, (lo, hi), sol.control, grow + probes, sol, horizon_model)


def solve_nocp(model: Model, y0, T: float) -> ValueMapResult:
    """Minimal norm ``M_T`` of a control steering ``y0`` to rest at time ``T``."""
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    y0 = np.asarray(y0, complex)
    norm0 = float(np.linalg.norm(y0))
    horizon_model = model.with_horizon(T)
    zero = _null_target(model)
    if norm0 == 0.0:
        return ValueMapResult(0.0, (0.0, 0.0), ControlSignal.zeros(horizon_model), 0, None,
                              horizon_model)
    eta = model.config.reach_tolerance

    def pred(M):
        return reaches(horizon_model, y0, zero, M, 0.0, eta)

    lo, hi, grow = _grow(pred, norm0 / (_b_min(model) * T))
    lo, hi, probes = _bisect(pred, lo, hi, model.config.bisection_tolerance)
    M = 0.5 * (lo + hi)
    sol = cached_solve(horizon_model, y0, zero, M, 0.0)
    return ValueMapResult(M, (lo, hi), sol.control, grow + probes, sol, horizon_model)


def latest_feasible_tau(model: Model, y0, z_d, control: ControlSignal, r: float) -> float:
    """Largest activation time for which the given control still lands in ``B(z_d, r)``."""
    y0, z_d = np.asarray(y0, complex), np.asarray(z_d, complex)
    T = model.horizon
    tol = model.config.bisection_tolerance

    def pred(tau):
        y_T = terminal_state(model, y0, control.with_tau(tau))
        return float(np.linalg.norm(y_T - z_d)) <= r

    if not pred(0.0):
        raise ValueError("control does not reach the target ball even when active on (0, T)")
    if _r_T(model, y0, z_d) <= r:
        return T - tol
    x_false, x_true, _ = _bisect(pred, T, 0.0, tol)
    return x_true


def sample_map(kind: str, grid, *, model: Model, y0, z_d=None, tau: float = 0.0,
               r: float | None = None, workers: int | None = None) -> MapSample:
    """Evaluate one value map at every abscissa of ``grid``.

    Points outside the map's domain get a NaN ordinate and an error status;
    the remaining points are unaffected.
    """
    if kind not in MAP_KINDS:
        raise ValueError(f"unknown map kind {kind!r}")
    grid = [float(x) for x in grid]
    if not grid:
        raise ValueError("empty grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be sorted ascending")
    y0 = np.asarray(y0, complex)
    z_d = np.zeros_like(y0) if z_d is None else np.asarray(z_d, complex)

    def point(x):
        if kind == "r_of_M":
            if x < 0:
                raise ValueError("negative bound")
            _check_tau(model, tau)
            return r_of(model, y0, z_d, x, tau)
        if kind == "M_of_tau":
            return solve_np(model, y0, z_d, x, r).value
        if kind == "tau_of_M":
            return solve_tp(model, y0, z_d, x, r).value
        if kind == "M_sup_tau":
            return m_tau(model, y0, z_d, x).value
        if kind == "T_of_M":
            return solve_tocp(model, y0, x).value
        return solve_nocp(model, y0, x).value

    def safe(x):
        try:
            return float(point(x)), "ok"
        except (ValueError, RuntimeError) as exc:
            return math.nan, f"error: {exc}"

    if workers is None:
        workers = int(os.environ.get("OCTL_THREADS", "1") or 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(safe, grid))
    else:
        out = [safe(x) for x in grid]
    return MapSample(kind, grid, [v for v, _ in out], [s for _, s in out])
