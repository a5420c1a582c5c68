"""Sine-mode truncation of the 1-D Dirichlet Schrödinger equation with internal control.

The state ``y(t) = sum_k y_k(t) sqrt(2/pi) sin(kx)`` evolves by

    y_k' = i k^2 y_k + (B u)_k,

where ``B`` is the Galerkin matrix of multiplication by the indicator of the
control region.  Everything downstream works in these eigen-coordinates, so
Euclidean norms coincide with L^2 norms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np


class ConfigError(ValueError):
    """Raised for an invalid model or scenario configuration."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class ModelConfig:
    num_modes: int = 2
    omega: tuple[tuple[float, float], ...] = ((0.0, math.pi / 2),)
    horizon: float = 1.0
    num_time_intervals: int = 128
    domain_length: float = math.pi
    reach_tolerance: float = 1e-6
    bisection_tolerance: float = 1e-4
    fw_gap_tolerance: float = 1e-10
    max_fw_iterations: int = 200_000
    degenerate_tolerance: float = 1e-12

    def __post_init__(self):
        omega = tuple((float(a), float(b)) for a, b in self.omega)
        object.__setattr__(self, "omega", omega)
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.num_modes, (int, np.integer)) or self.num_modes < 1:
            raise ConfigError("num_modes must be a positive integer", "num_modes")
        if (not isinstance(self.num_time_intervals, (int, np.integer))
                or self.num_time_intervals < 1):
            raise ConfigError("num_time_intervals must be a positive integer",
                              "num_time_intervals")
        if not self.domain_length > 0:
            raise ConfigError("domain_length must be positive", "domain_length")
        if self.domain_length != math.pi:
            # the sine basis below is the Dirichlet basis of (0, pi)
            raise ConfigError("only the interval (0, pi) is supported", "domain_length")
        if not self.horizon > 0:
            raise ConfigError("horizon must be positive", "horizon")
        for name in ("reach_tolerance", "bisection_tolerance", "fw_gap_tolerance",
                     "degenerate_tolerance"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive", name)
        if self.max_fw_iterations < 1:
            raise ConfigError("max_fw_iterations must be positive", "max_fw_iterations")
        validate_omega(self.omega, self.domain_length)


def validate_omega(omega, domain_length: float = math.pi) -> None:
    if len(omega) == 0:
        raise ConfigError("omega must contain at least one subinterval", "omega")
    spans = sorted(omega)
    for a, b in spans:
        if not (0.0 <= a < b <= domain_length):
            raise ConfigError(
                f"omega subinterval ({a}, {b}) is empty or outside (0, {domain_length})",
                "omega")
    for (_, b0), (a1, _) in zip(spans, spans[1:]):
        if a1 < b0:
            raise ConfigError("omega subintervals overlap", "omega")


def coupling_matrix(omega, num_modes: int) -> np.ndarray:
    """Matrix of ``(2/pi) * integral over omega of sin(jx) sin(kx)``.

    Uses the closed-form antiderivative, so the full domain gives the
    identity up to rounding.
    """
    validate_omega(omega)
    n = np.arange(1, num_modes + 1, dtype=float)
    j, k = n[:, None], n[None, :]
    diff = j - k
    summ = j + k
    same = diff == 0
    safe = np.where(same, 1.0, diff)
    B = np.zeros((num_modes, num_modes))
    for a, b in omega:
        plus = (np.sin(summ * b) - np.sin(summ * a)) / summ
        minus = np.where(same, b - a, (np.sin(diff * b) - np.sin(diff * a)) / safe)
        B += (minus - plus) / np.pi
    # exact symmetry; the two triangles round differently otherwise
    return 0.5 * (B + B.T)


def uniform_grid(horizon: float, num_intervals: int) -> np.ndarray:
    return np.linspace(0.0, horizon, num_intervals + 1)


def density_grid(horizon: float, step: float) -> np.ndarray:
    """Nodes ``0, h, 2h, ...`` up to ``horizon``, closing with a partial interval."""
    count = int(math.floor(horizon / step + 1e-9))
    nodes = step * np.arange(count + 1)
    if horizon - nodes[-1] > 1e-12 * max(1.0, horizon):
        nodes = np.append(nodes, horizon)
    else:
        nodes[-1] = horizon
    return nodes


@dataclass(frozen=True, eq=False)
class Model:
    """Immutable spectral model: eigenvalues, coupling matrix and time grid.

    ``reversed`` flips the sign of the eigenvalues, which is the time-reversed
    flow ``z' = -i k^2 z + B v``.
    """

    config: ModelConfig
    eigenvalues: np.ndarray
    coupling: np.ndarray
    time_grid: np.ndarray
    reversed: bool = False
    key: tuple = field(default=(), repr=False)

    @property
    def num_modes(self) -> int:
        return self.config.num_modes

    @property
    def horizon(self) -> float:
        return float(self.time_grid[-1])

    @property
    def num_intervals(self) -> int:
        return len(self.time_grid) - 1

    @property
    def step(self) -> float:
        """Nominal interval length of the grid this model was built with."""
        return self.config.horizon / self.config.num_time_intervals

    def free_propagate(self, state, dt: float) -> np.ndarray:
        return np.exp(1j * self.eigenvalues * dt) * np.asarray(state, dtype=complex)

    def with_horizon(self, horizon: float) -> "Model":
        """Same model on ``(0, horizon)`` with the original node spacing."""
        if not horizon > 0:
            raise ValueError("horizon must be positive")
        return _assemble(self.config, density_grid(horizon, self.step),
                         self.reversed, self.coupling)

    def time_reversed(self) -> "Model":
        return _assemble(self.config, self.time_grid, not self.reversed, self.coupling)


def _assemble(config, grid, reversed_, coupling=None) -> Model:
    n = np.arange(1, config.num_modes + 1, dtype=float)
    eig = n * n
    if reversed_:
        eig = -eig
    B = coupling_matrix(config.omega, config.num_modes) if coupling is None else coupling
    for arr in (eig, B, grid):
        arr.setflags(write=False)
    key = (config, grid.tobytes(), reversed_)
    return Model(config, eig, B, grid, reversed_, key)


def build_model(config: ModelConfig) -> Model:
    config.validate()
    grid = uniform_grid(config.horizon, config.num_time_intervals)
    return _assemble(config, grid, False)


def free_propagate(state, dt: float, eigenvalues) -> np.ndarray:
    """Free flow ``y_k(t + dt) = exp(i lambda_k dt) y_k(t)``; ``dt`` may be negative."""
    if isinstance(eigenvalues, Model):
        eigenvalues = eigenvalues.eigenvalues
    return np.exp(1j * np.asarray(eigenvalues) * dt) * np.asarray(state, dtype=complex)


def duhamel_interval(state, control_value, t0: float, t1: float, model: Model) -> np.ndarray:
    """Exact solution over ``[t0, t1]`` with a constant control value."""
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got t0={t0}, t1={t1}")
    lam = model.eigenvalues
    dt = t1 - t0
    rot = np.exp(1j * lam * dt)
    forcing = model.coupling @ np.asarray(control_value, dtype=complex)
    return rot * np.asarray(state, dtype=complex) + (rot - 1.0) / (1j * lam) * forcing
