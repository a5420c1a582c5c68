"""Forward and adjoint solves for piecewise-constant controls.

Both are exact: on an interval of length ``w`` with a constant control the
Duhamel integral has the closed form ``(exp(i lam w) - 1) / (i lam)``, so the
only discretization is the control parametrization itself.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral_model import Model


@dataclass(frozen=True, eq=False)
class ControlSignal:
    """Piecewise-constant control, one coefficient vector per grid interval.

    Intervals that end at or before ``tau`` are inactive; the interval that
    straddles ``tau`` only acts on its part after ``tau``.
    """

    values: np.ndarray
    tau: float
    grid: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.ndim != 2 or values.shape[0] != len(self.grid) - 1:
            raise ValueError("control values must have shape (num_intervals, num_modes)")
        if not 0.0 <= self.tau < self.grid[-1]:
            raise ValueError(f"activation time {self.tau} outside [0, {self.grid[-1]})")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "tau", float(self.tau))

    @classmethod
    def zeros(cls, model: Model, tau: float = 0.0) -> "ControlSignal":
        return cls(np.zeros((model.num_intervals, model.num_modes), complex), tau,
                   model.time_grid)

    @property
    def active(self) -> np.ndarray:
        return self.grid[1:] > self.tau

    @property
    def effective_values(self) -> np.ndarray:
        """Values with inactive intervals zeroed."""
        return np.where(self.active[:, None], self.values, 0.0)

    def interval_norms(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=1)

    def sup_norm(self) -> float:
        norms = self.interval_norms()[self.active]
        return float(norms.max()) if norms.size else 0.0

    def with_tau(self, tau: float) -> "ControlSignal":
        return ControlSignal(self.values, tau, self.grid)


@dataclass(frozen=True, eq=False)
class Trajectory:
    states: np.ndarray  # (num_nodes, num_modes)
    times: np.ndarray

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]


def _check_grid(model: Model, signal: ControlSignal) -> None:
    grid = signal.grid
    if grid.shape != model.time_grid.shape or not np.array_equal(grid, model.time_grid):
        raise ValueError("control grid does not match the model time grid")


def _duhamel_factor(lam: np.ndarray, width) -> np.ndarray:
    # (exp(i lam w) - 1) / (i lam) without cancellation for small w
    half = 0.5 * lam * width
    return 2.0 * np.sin(half) / lam * np.exp(1j * half)


def active_windows(grid: np.ndarray, tau: float):
    """Start points, end points and active mask of the intervals inside ``(tau, T)``."""
    ends = grid[1:]
    starts = np.maximum(grid[:-1], tau)
    active = ends > starts
    starts = np.where(active, starts, ends)
    return starts, ends, active


def reach_weights(model: Model, tau: float) -> np.ndarray:
    """Row ``j`` holds ``integral over interval j of exp(i lam (T - s)) ds``.

    The terminal state is ``exp(i lam T) y0 + sum_j weights[j] * (B u_j)``.
    Inactive rows are zero.
    """
    lam = model.eigenvalues
    T = model.horizon
    starts, ends, _ = active_windows(model.time_grid, tau)
    width = (ends - starts)[:, None]
    return np.exp(1j * lam * (T - ends)[:, None]) * _duhamel_factor(lam, width)


def terminal_state(model: Model, y0, signal: ControlSignal) -> np.ndarray:
    _check_grid(model, signal)
    W = reach_weights(model, signal.tau)
    free = model.free_propagate(y0, model.horizon)
    return free + (W * (signal.effective_values @ model.coupling)).sum(axis=0)


def solve_forward(model: Model, y0, signal: ControlSignal) -> Trajectory:
    _check_grid(model, signal)
    grid = model.time_grid
    lam = model.eigenvalues
    y = np.asarray(y0, dtype=complex).copy()
    if y.shape != (model.num_modes,):
        raise ValueError("initial state has the wrong length")
    starts, ends, active = active_windows(grid, signal.tau)
    forcing = signal.effective_values @ model.coupling
    states = np.empty((len(grid), model.num_modes), complex)
    states[0] = y
    for j in range(len(grid) - 1):
        y = np.exp(1j * lam * (grid[j + 1] - grid[j])) * y
        if active[j]:
            y = y + _duhamel_factor(lam, ends[j] - starts[j]) * forcing[j]
        states[j + 1] = y
    return Trajectory(states, grid)


def solve_adjoint(model: Model, phi_T) -> Trajectory:
    """Backward free flow ``phi(t) = exp(-i lam (T - t)) phi(T)`` at the grid nodes.

    This is the flow dual to the forward one, i.e.
    ``Re<y(T) - free, phi(T)> = Re integral <B phi(t), u(t)> dt``.
    """
    grid = model.time_grid
    phi_T = np.asarray(phi_T, dtype=complex)
    lam = model.eigenvalues
    states = np.exp(-1j * lam * (model.horizon - grid)[:, None]) * phi_T
    return Trajectory(states, grid)


def interval_pairings(model: Model, phi_T, tau: float) -> np.ndarray:
    """Row ``j`` is ``integral over the active part of interval j of B phi(t) dt``."""
    W = reach_weights(model, tau)
    return (np.conj(W) * np.asarray(phi_T, dtype=complex)) @ model.coupling


def pairing_residual(model: Model, u_star: ControlSignal, v: ControlSignal,
                     phi: Trajectory) -> float:
    """``Re integral_tau^T <B phi(t), u*(t) - v(t)> dt`` on the window of ``u_star``."""
    _check_grid(model, u_star)
    _check_grid(model, v)
    g = interval_pairings(model, phi.terminal, u_star.tau)
    diff = u_star.effective_values - np.where(u_star.active[:, None], v.values, 0.0)
    return float(np.real(np.vdot(g, diff)))


def control_distance(a: ControlSignal, b: ControlSignal) -> float:
    """Discrete L^inf(L^2) distance over intervals active in both windows."""
    if a.values.shape != b.values.shape or not np.allclose(a.grid, b.grid, rtol=0,
                                                           atol=1e-12):
        raise ValueError("controls live on different grids")
    both = a.active & b.active
    if not both.any():
        return 0.0
    return float(np.linalg.norm(a.values[both] - b.values[both], axis=1).max())
