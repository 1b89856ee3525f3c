"""Periodic central differences and classical RK4 stepping.

Every simulator in the package uses one :class:`PeriodicDerivative` instance
for all of its spatial derivatives. Reusing the same operator is what makes
``w - D v`` (or ``w - D rho``) an exact invariant of the semi-discrete
systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

# one-sided weights c_m of D f_i = sum_m c_m (f_{i+m} - f_{i-m}) / h
_CENTRAL_WEIGHTS = {
    2: (1.0 / 2.0,),
    4: (2.0 / 3.0, -1.0 / 12.0),
    6: (3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0),
}


class PeriodicDerivative:
    """First derivative on a uniform periodic grid.

    The operator is a circulant, antisymmetric matrix, so ``sum(f * D g) ==
    -sum(g * D f)`` up to rounding and ``sum(D f) == 0``.

    Args:
        h: grid spacing.
        order: formal accuracy, one of 2, 4, 6.
    """

    def __init__(self, h: float, order: int = 4):
        if order not in _CENTRAL_WEIGHTS:
            raise ValueError(f"order must be one of {sorted(_CENTRAL_WEIGHTS)}, got {order}")
        if not h > 0:
            raise ValueError("grid spacing must be positive")
        self.h = float(h)
        self.order = order
        self._weights = _CENTRAL_WEIGHTS[order]

    def __call__(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        M = len(self._weights)
        n = f.shape[-1]
        fp = np.concatenate([f[..., n - M :], f, f[..., :M]], axis=-1)
        out = self._weights[0] * (fp[..., M + 1 : M + 1 + n] - fp[..., M - 1 : M - 1 + n])
        for m, c in enumerate(self._weights[1:], start=2):
            out += c * (fp[..., M + m : M + m + n] - fp[..., M - m : M - m + n])
        return out / self.h

    def symbol(self, k: np.ndarray | float) -> np.ndarray | float:
        """Modified wavenumber: ``D exp(i k x) = i * symbol(k) * exp(i k x)``."""
        k = np.asarray(k, dtype=float)
        s = sum(2.0 * c * np.sin(m * k * self.h) for m, c in enumerate(self._weights, start=1))
        return s / self.h

    def matrix(self, n: int) -> np.ndarray:
        """Dense n x n matrix of the operator (for tests and small problems)."""
        return np.column_stack([self(np.eye(n)[i]) for i in range(n)])


def rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, dt: float) -> np.ndarray:
    """One classical four-stage Runge-Kutta step for ``y' = f(y)``."""
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_count(dt: float, t_final: float) -> tuple[int, float]:
    """Number of equal steps reaching ``t_final`` without exceeding ``dt``."""
    if not dt > 0 or not t_final > 0:
        raise ValueError("dt and t_final must be positive")
    n = int(np.ceil(t_final / dt - 1e-12))
    n = max(n, 1)
    return n, t_final / n


@dataclass
class AuditLog:
    """Audit time series; ``columns`` maps a name to a list of values."""

    columns: dict[str, list] = field(default_factory=dict)
    snapshots: list = field(default_factory=list)

    def record(self, **values):
        for k, val in values.items():
            self.columns.setdefault(k, []).append(float(val))

    def array(self, name: str) -> np.ndarray:
        return np.asarray(self.columns[name])
