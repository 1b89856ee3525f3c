"""One-dimensional periodic solver for the augmented Eulerian capillary system.

    rho_t + (j)_x = 0
    eta_t + (eta j / rho)_x = 0
    j_t + (j^2 / rho + P)_x - c rho w_xx = 0
    w_t + j_xx = 0

All derivatives use a single :class:`~capillary.finite_difference.PeriodicDerivative`,
so ``w - D rho`` is exactly invariant in the semi-discrete system.

Two forms of the momentum equation are available:

``"divergence"`` (default)
    ``j_t = -D(j^2/rho + P) + c rho D D w``. Momentum changes only through
    ``sum(rho D D w)``, which vanishes when ``w = D rho``; energy is conserved
    to the spatial truncation error.

``"conjugate"``
    ``j_t = -u D j - rho D(mu + u^2/2) - eta D theta + rho D D (c w)``.
    Pairing each equation with the conjugate variables ``(q, theta, u, c w)``
    makes every term telescope under the antisymmetric ``D``, so the discrete
    total energy is conserved exactly by the semi-discrete system; the time
    integrator alone sets the energy drift. Momentum is conserved to the
    spatial truncation error.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import SimulationBlowUp, ThermoDomainError
from .finite_difference import AuditLog, PeriodicDerivative, rk4_step, step_count
from .thermo import EquationOfState


SCHEMES = ("divergence", "conjugate")


class PositivityLossError(ThermoDomainError):
    """Density became non-positive during a right-hand-side evaluation."""


@dataclass(frozen=True, eq=False)
class EulerianField:
    """Periodic grid state; node ``i`` sits at ``x = i * dx``."""

    rho: np.ndarray
    eta: np.ndarray
    j: np.ndarray
    w: np.ndarray
    c: float
    dx: float
    t: float = 0.0
    order: int = 4
    scheme: str = "divergence"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")

    @property
    def n(self) -> int:
        return self.rho.size

    @property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(self.n)

    @property
    def D(self) -> PeriodicDerivative:
        return PeriodicDerivative(self.dx, self.order)

    def stack(self) -> np.ndarray:
        return np.stack([self.rho, self.eta, self.j, self.w])

    def with_array(self, y: np.ndarray, t: float) -> "EulerianField":
        return replace(self, rho=y[0].copy(), eta=y[1].copy(), j=y[2].copy(), w=y[3].copy(), t=t)


def make_field(
    rho, eta, j, c: float, length: float, order: int = 4, w=None, scheme: str = "divergence"
) -> EulerianField:
    """Build a field; ``w`` defaults to the compatible ``D rho``."""
    rho = np.asarray(rho, dtype=float)
    n = rho.size
    dx = length / n
    D = PeriodicDerivative(dx, order)
    w = D(rho) if w is None else np.asarray(w, dtype=float)
    eta = np.broadcast_to(np.asarray(eta, dtype=float), (n,)).copy()
    j = np.broadcast_to(np.asarray(j, dtype=float), (n,)).copy()
    return EulerianField(
        rho=rho.copy(), eta=eta, j=j, w=w.copy(), c=float(c), dx=dx, order=order, scheme=scheme
    )


def _rhs_array(
    y: np.ndarray, D: PeriodicDerivative, eos: EquationOfState, c: float, scheme: str = "divergence"
) -> np.ndarray:
    rho, eta, j, w = y
    if np.any(rho <= 0):
        raise PositivityLossError("density lost positivity")
    if scheme == "conjugate":
        _, (mu, theta), _ = eos.derivatives(rho, eta)
        u = j / rho
        dj = -u * D(j) - rho * D(mu + 0.5 * u * u) - eta * D(theta) + rho * D(D(c * w))
    elif scheme == "divergence":
        dj = -D(j * j / rho + eos.pressure(rho, eta)) + c * rho * D(D(w))
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return np.stack([-D(j), -D(eta * j / rho), dj, -D(D(j))])


def rhs_eulerian(f: EulerianField, eos: EquationOfState) -> EulerianField:
    return f.with_array(_rhs_array(f.stack(), f.D, eos, f.c, f.scheme), f.t)


def energy_audit(f: EulerianField, eos: EquationOfState) -> float:
    """Discrete total energy ``sum(eps + j^2/(2 rho) + c w^2/2) dx``."""
    eps = eos.energy(f.rho, f.eta)
    return float(np.sum(eps + f.j**2 / (2.0 * f.rho) + 0.5 * f.c * f.w**2) * f.dx)


def momentum(f: EulerianField) -> float:
    return float(np.sum(f.j) * f.dx)


def constraint_audit(f: EulerianField) -> float:
    """``max |w - D rho|``."""
    return float(np.max(np.abs(f.w - f.D(f.rho))))


def stable_dt(f: EulerianField, eos: EquationOfState, cfl: float = 0.4) -> float:
    """``cfl * min(dx / (|u| + a), dx^2 / (2 sqrt(c rho)))`` over the grid.

    Grid points with negative squared sound speed contribute 0 to ``a``; the
    capillary bound is dropped when ``c = 0``.
    """
    _, _, (hrr, hre, hee) = eos.derivatives(f.rho, f.eta)
    s = f.eta / f.rho
    a2 = f.rho * (hrr + 2 * s * hre + s * s * hee)
    speed = np.max(np.abs(f.j / f.rho) + np.sqrt(np.maximum(a2, 0.0)))
    bounds = []
    if f.c > 0:
        bounds.append(f.dx**2 / (2.0 * np.sqrt(f.c * np.max(f.rho))))
    if speed > 0:
        bounds.append(f.dx / speed)
    if not bounds:
        raise ValueError("no wave speed to bound the time step")
    return cfl * min(bounds)


def step_rk4(f: EulerianField, eos: EquationOfState, dt: float) -> EulerianField:
    D = f.D
    y = rk4_step(lambda s: _rhs_array(s, D, eos, f.c, f.scheme), f.stack(), dt)
    return f.with_array(y, f.t + dt)


def audit(f: EulerianField, eos: EquationOfState) -> dict:
    return {
        "t": f.t,
        "energy": energy_audit(f, eos),
        "momentum": momentum(f),
        "constraint_norm": constraint_audit(f),
        "min_rho": float(np.min(f.rho)),
    }


def _blow_up(last: EulerianField, eos, log: AuditLog, reason: str) -> SimulationBlowUp:
    if log.columns["t"][-1] != last.t:
        log.record(**audit(last, eos))
    return SimulationBlowUp(last, last.t, reason, log)


def run(
    f: EulerianField,
    eos: EquationOfState,
    dt: float,
    T: float,
    audit_every: int = 1,
    snapshot_every: int | None = None,
) -> tuple[EulerianField, AuditLog]:
    """Integrate to ``f.t + T`` with RK4 steps no larger than ``dt``.

    Raises:
        SimulationBlowUp: non-finite values, loss of positivity or an EOS
            domain violation.
    """
    n, dt = step_count(dt, T)
    log = AuditLog()
    log.record(**audit(f, eos))
    if snapshot_every:
        log.snapshots.append(f)
    D = f.D
    c, scheme = f.c, f.scheme
    y = f.stack()
    t0 = f.t
    for i in range(1, n + 1):
        t_prev = t0 + (i - 1) * dt
        try:
            y_new = rk4_step(lambda s: _rhs_array(s, D, eos, c, scheme), y, dt)
        except ThermoDomainError as exc:
            raise _blow_up(f.with_array(y, t_prev), eos, log, str(exc)) from exc
        if not np.all(np.isfinite(y_new)) or np.any(y_new[0] <= 0):
            raise _blow_up(f.with_array(y, t_prev), eos, log, "non-finite or non-positive density")
        y = y_new
        is_audit = i % audit_every == 0 or i == n
        is_snap = bool(snapshot_every) and (i % snapshot_every == 0 or i == n)
        if is_audit or is_snap:
            cur = f.with_array(y, t0 + i * dt)
            if is_audit:
                log.record(**audit(cur, eos))
            if is_snap:
                log.snapshots.append(cur)
    return f.with_array(y, t0 + n * dt), log
