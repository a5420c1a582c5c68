"""Optimal target problem: minimize ``||y(T) - z_d||`` with ``||u(t)|| <= M`` on ``(tau, T)``.

Solved by conditional gradient on ``f(u) = 0.5 ||y(T; u) - z_d||^2``.  The
linear minimization step is the pointwise maximum principle: on every active
interval the best vertex is ``M g_j / ||g_j||`` with ``g_j`` the interval
integral of ``B phi`` and ``phi`` the adjoint started from ``-(y(T) - z_d)``.
Since ``f`` is quadratic the line search along ``[u, v]`` is exact.
"""
from __future__ import annotations

from dataclasses import dataclass
import threading

import numpy as np

from .dynamics import ControlSignal, active_windows, interval_pairings, reach_weights
from .spectral_model import Model


@dataclass(frozen=True)
class OpProblem:
    model: Model
    y0: np.ndarray
    z_d: np.ndarray
    M: float
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "y0", np.asarray(self.y0, dtype=complex))
        object.__setattr__(self, "z_d", np.asarray(self.z_d, dtype=complex))
        if self.M < 0:
            raise ValueError(f"control bound must be nonnegative, got {self.M}")
        if not 0.0 <= self.tau < self.model.horizon:
            raise ValueError(f"tau={self.tau} outside [0, {self.model.horizon})")
        n = self.model.num_modes
        if self.y0.shape != (n,) or self.z_d.shape != (n,):
            raise ValueError(f"y0 and z_d must have length {n}")

    @property
    def free_residual(self) -> np.ndarray:
        return self.model.free_propagate(self.y0, self.model.horizon) - self.z_d

    @property
    def r_T(self) -> float:
        return float(np.linalg.norm(self.free_residual))


@dataclass(frozen=True, eq=False)
class OpSolution:
    control: ControlSignal
    r_value: float
    fw_gap: float
    bang_bang_deviation: float
    max_principle_residual: float
    iterations: int
    converged: bool
    terminal: np.ndarray


class _Landscape:
    """Precomputed affine map ``u -> y(T) - z_d`` for one (model, tau)."""

    def __init__(self, problem: OpProblem):
        model = problem.model
        self.model = model
        self.weights = reach_weights(model, problem.tau)
        starts, ends, self.active = active_windows(model.time_grid, problem.tau)
        self.widths = ends - starts
        self.offset = problem.free_residual

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Linear part only: ``sum_j W_j * (B u_j)``."""
        return (self.weights * (values @ self.model.coupling)).sum(axis=0)

    def pairings(self, residual: np.ndarray) -> np.ndarray:
        # phi(T) = -(y(T) - z_d)
        return (np.conj(self.weights) * -residual) @ self.model.coupling

    def vertex(self, g: np.ndarray, M: float, zeta: float) -> np.ndarray:
        norms = np.linalg.norm(g, axis=1)
        # compare interval averages of B phi against the degeneracy threshold
        live = self.active & (norms > zeta * np.maximum(self.widths, 1e-300))
        scale = np.where(live, M / np.where(live, norms, 1.0), 0.0)
        return g * scale[:, None]


def _zeta(model: Model, phi_T: np.ndarray) -> float:
    return model.config.degenerate_tolerance * float(np.linalg.norm(phi_T))


def _frank_wolfe(problem: OpProblem, u0: np.ndarray | None = None, stop_below=None):
    """Run conditional gradient; returns ``(values, residual, gap, iterations, reason)``.

    ``stop_below`` turns the run into a certified decision of
    ``min ||y(T) - z_d|| <= level``: it stops as soon as the iterate reaches the
    level, or the duality lower bound ``0.5 r^2 - gap`` rules it out.  A small
    gap alone settles nothing here, so only the iteration cap ends it otherwise.
    """
    cfg = problem.model.config
    land = _Landscape(problem)
    K, N = problem.model.num_intervals, problem.model.num_modes
    u = np.zeros((K, N), complex) if u0 is None else np.array(u0, dtype=complex)
    u[~land.active] = 0.0
    res = land.offset + land.apply(u)
    gap = np.inf
    M = problem.M
    tol = cfg.fw_gap_tolerance
    it = 0
    for it in range(cfg.max_fw_iterations + 1):
        r2 = float(np.real(np.vdot(res, res)))
        if r2 == 0.0:
            return u, res, 0.0, it, "exact"
        if stop_below is not None and r2 <= stop_below * stop_below:
            return u, res, gap, it, "reached"
        g = land.pairings(res)
        v = land.vertex(g, M, _zeta(problem.model, res))
        d = v - u
        Ad = land.apply(d)
        gap = -float(np.real(np.vdot(Ad, res)))
        if stop_below is not None and 0.5 * r2 - gap > 0.5 * stop_below * stop_below:
            return u, res, gap, it, "excluded"
        if it == cfg.max_fw_iterations or (stop_below is None and gap <= tol):
            break
        curv = float(np.real(np.vdot(Ad, Ad)))
        step = 1.0 if gap >= curv else gap / curv
        u = u + step * d
        res = res + step * Ad
    reason = "converged" if gap <= tol else "capped"
    return u, res, max(gap, 0.0), it, reason


def _certificates(problem: OpProblem, values: np.ndarray, residual: np.ndarray):
    land = _Landscape(problem)
    if not np.any(residual):
        return 0.0, 0.0
    g = land.pairings(residual)
    with np.errstate(invalid="ignore", divide="ignore"):
        avg = g / land.widths[:, None]
    avg_norm = np.linalg.norm(avg, axis=1)
    mask = land.active & (avg_norm > _zeta(problem.model, residual))
    if not mask.any():
        return 0.0, 0.0
    u_norm = np.linalg.norm(values, axis=1)
    deviation = np.abs(u_norm[mask] - problem.M)
    residuals = problem.M * avg_norm[mask] - np.real(
        np.sum(np.conj(avg[mask]) * values[mask], axis=1))
    return float(deviation.max()), float(max(residuals.max(), 0.0))


def solve_op(problem: OpProblem, initial: ControlSignal | np.ndarray | None = None
             ) -> OpSolution:
    """Conditional-gradient solve of the optimal target problem.

    ``initial`` defaults to the zero control.  A run that hits the iteration
    cap is returned with ``converged=False`` rather than raising.
    """
    model = problem.model
    if isinstance(initial, ControlSignal):
        initial = initial.values
    if initial is not None:
        initial = _project(np.asarray(initial, dtype=complex), problem.M)
    u, res, gap, iters, reason = _frank_wolfe(problem, initial)
    control = ControlSignal(u, problem.tau, model.time_grid)
    if reason == "exact":
        dev, mpr = 0.0, 0.0
    else:
        dev, mpr = _certificates(problem, u, res)
    return OpSolution(
        control=control,
        r_value=float(np.linalg.norm(res)),
        fw_gap=gap,
        bang_bang_deviation=dev,
        max_principle_residual=mpr,
        iterations=iters,
        converged=reason in ("converged", "exact"),
        terminal=res + problem.z_d,
    )


def _project(values: np.ndarray, M: float) -> np.ndarray:
    norms = np.linalg.norm(values, axis=1)
    scale = np.where(norms > M, M / np.where(norms > 0, norms, 1.0), 1.0)
    return values * scale[:, None]


def verify_certificates(solution: OpSolution, problem: OpProblem) -> tuple[float, float]:
    """Bang-bang deviation and maximum-principle residual of a control.

    Both are maxima over active intervals where the interval average of
    ``B phi`` exceeds the degeneracy threshold.
    """
    land = _Landscape(problem)
    values = solution.control.effective_values
    residual = land.offset + land.apply(values)
    return _certificates(problem, values, residual)


_cache: dict = {}
_cache_lock = threading.Lock()


def _key(model, y0, z_d, M, tau):
    return (model.key, np.asarray(y0, complex).tobytes(), np.asarray(z_d, complex).tobytes(),
            float(M), float(tau))


def cached_solve(model: Model, y0, z_d, M: float, tau: float) -> OpSolution:
    key = _key(model, y0, z_d, M, tau)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit
    sol = solve_op(OpProblem(model, y0, z_d, M, tau))
    with _cache_lock:
        _cache.setdefault(key, sol)
    return sol


def clear_cache() -> None:
    with _cache_lock:
        _cache.clear()
        _decisions.clear()


def r_of(model: Model, y0, z_d, M: float, tau: float) -> float:
    """Optimal distance ``r(M, tau)``; memoized per argument tuple."""
    return cached_solve(model, y0, z_d, M, tau).r_value


_decisions: dict = {}


def reaches(model: Model, y0, z_d, M: float, tau: float, level: float) -> bool:
    """Certified test of ``r(M, tau) <= level``.

    Stops the solver early once the answer is settled either way.  If the
    iteration cap is hit first, falls back to comparing the last iterate.
    """
    key = _key(model, y0, z_d, M, tau) + (float(level),)
    with _cache_lock:
        hit = _decisions.get(key)
    if hit is not None:
        return hit
    problem = OpProblem(model, y0, z_d, M, tau)
    u, res, gap, _, reason = _frank_wolfe(problem, stop_below=level)
    r = float(np.linalg.norm(res))
    if reason in ("reached", "exact"):
        answer = True
    elif reason == "excluded":
        answer = False
    else:
        answer = r <= level
    with _cache_lock:
        _decisions[key] = answer
    return answer


def pairing_gap(problem: OpProblem, solution: OpSolution) -> float:
    """Frank-Wolfe gap of ``solution`` recomputed from scratch."""
    land = _Landscape(problem)
    u = solution.control.effective_values
    res = land.offset + land.apply(u)
    g = interval_pairings(problem.model, -res, problem.tau)
    v = land.vertex(g, problem.M, _zeta(problem.model, res))
    return float(np.real(np.vdot(g, v - u)))
