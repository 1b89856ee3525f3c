"""One-dimensional capillary fluid in mass Lagrangian coordinates.

Unknowns are the specific volume ``v``, its gradient ``w`` (evolved as an
independent field) and the velocity ``u``:

    v_t - u_z = 0
    w_t - u_zz = 0
    u_t - (e_v - (e_w)_z)_z = 0

for an energy ``e(v, w)``. In conjugate variables ``sigma = e_v`` and
``r = e_w`` with ``pi = sigma v + r w - e`` the system takes the matrix form
``A (sigma, r, u)_t + B1 (.)_z + C1 (.)_zz = 0``; plane waves give the
pencil ``k B1 + i k^2 C1 - lambda A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import ConvergenceError, SimulationBlowUp, SingularJacobianError, ThermoDomainError
from .finite_difference import AuditLog, PeriodicDerivative, rk4_step, step_count
from .spectral import hermitian_pencil

B1 = np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
C1 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
B1.setflags(write=False)
C1.setflags(write=False)


@dataclass(frozen=True)
class EnergyFunctional1D:
    """Separable energy ``e(v, w) = eps(v) + c_L w^2 / 2``.

    ``eps``, ``d_eps`` and ``d2_eps`` must accept numpy arrays.
    """

    eps: Callable
    d_eps: Callable
    d2_eps: Callable
    c_L: float
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.c_L > 0:
            raise ValueError("c_L must be positive")

    def check(self, v):
        if np.any(~np.isfinite(v)) or np.any(np.asarray(v) <= 0):
            raise ThermoDomainError("specific volume must be positive and finite")

    def e(self, v, w):
        self.check(v)
        return self.eps(v) + 0.5 * self.c_L * w**2

    def grad(self, v, w):
        self.check(v)
        return self.d_eps(v), self.c_L * w

    def hess(self, v, w):
        self.check(v)
        return np.array([[self.d2_eps(v), 0.0], [0.0, self.c_L]])


def gamma_law(gamma: float = 2.0, c_L: float = 0.1) -> EnergyFunctional1D:
    """``eps(v) = v^(1-gamma)/(gamma-1)``, i.e. pressure ``-eps'(v) = v^-gamma``."""
    if not gamma > 1:
        raise ValueError("gamma must exceed 1")
    g = float(gamma)
    return EnergyFunctional1D(
        eps=lambda v: v ** (1.0 - g) / (g - 1.0),
        d_eps=lambda v: -(v ** (-g)),
        d2_eps=lambda v: g * v ** (-g - 1.0),
        c_L=float(c_L),
        name="gamma-law",
        params={"gamma": g, "c_L": float(c_L)},
    )


def quadratic(stiffness: float = 1.0, c_L: float = 1.0) -> EnergyFunctional1D:
    """``eps(v) = stiffness * v^2 / 2``."""
    s = float(stiffness)
    return EnergyFunctional1D(
        eps=lambda v: 0.5 * s * v**2,
        d_eps=lambda v: s * v,
        d2_eps=lambda v: s + 0.0 * v,
        c_L=float(c_L),
        name="quadratic",
        params={"stiffness": s, "c_L": float(c_L)},
    )


@dataclass(frozen=True, eq=False)
class LegendreResult:
    pi: float
    v: float
    w: float
    hess: np.ndarray


@dataclass(frozen=True, eq=False)
class LagrangianMatrices:
    """3x3 system in the order ``(sigma, r, u)``."""

    A: np.ndarray
    B1: np.ndarray
    C1: np.ndarray


def legendre_pi(
    sigma: float,
    r: float,
    efun: EnergyFunctional1D,
    guess_v: float,
    guess_w: float,
    max_iter: int = 50,
    tol: float = 1e-14,
) -> LegendreResult:
    """Invert ``sigma = e_v``, ``r = e_w`` and return ``pi = sigma v + r w - e``.

    The Hessian of ``pi`` in ``(sigma, r)`` is the inverse energy Hessian.
    """
    x = np.array([guess_v, guess_w], dtype=float)
    target = np.array([sigma, r], dtype=float)
    scale = np.maximum(np.abs(target), 1.0)

    def resid(y):
        return (np.array(efun.grad(y[0], y[1])) - target) / scale

    f = resid(x)
    err = np.max(np.abs(f))
    for _ in range(max_iter):
        if err <= tol:
            break
        H = efun.hess(*x)
        det = np.linalg.det(H)
        if not np.isfinite(det) or abs(det) <= 1e-13 * np.max(np.abs(H)) ** 2:
            raise SingularJacobianError(f"singular energy Hessian at v={x[0]!r}")
        step = -np.linalg.solve(H, f * scale)
        t = 1.0
        for _ in range(60):
            trial = x + t * step
            try:
                f_new = resid(trial)
                err_new = np.max(np.abs(f_new))
            except ThermoDomainError:
                err_new = np.inf
            if err_new < err:
                break
            t *= 0.5
        else:
            if err <= 100 * tol:
                break
            raise ConvergenceError(f"line search failed at residual {err:.3e}")
        x, f, err = trial, f_new, err_new
    else:
        if err > tol:
            raise ConvergenceError(f"Newton did not converge (residual {err:.3e})")
    v, w = float(x[0]), float(x[1])
    pi = sigma * v + r * w - float(efun.e(v, w))
    return LegendreResult(pi=pi, v=v, w=w, hess=np.linalg.inv(efun.hess(v, w)))


def conjugate_energy_density(sigma, r, u, efun, guess_v, guess_w=0.0) -> float:
    """``u^2/2 + sigma pi_sigma + r pi_r - pi``, the energy density in conjugate variables.

    Equal to ``u^2/2 + e(v, w)`` by Legendre duality; with the flux
    ``-sigma u + [r, u]``, ``[r, u] = u r_z - r u_z``, it gives the local
    energy law of the 1-D system.
    """
    lg = legendre_pi(sigma, r, efun, guess_v, guess_w)
    return 0.5 * u * u + sigma * lg.v + r * lg.w - lg.pi


def assemble_lagrangian_matrices(sigma, r, efun, guess_v, guess_w=0.0) -> LagrangianMatrices:
    lg = legendre_pi(sigma, r, efun, guess_v, guess_w)
    A = np.zeros((3, 3))
    A[:2, :2] = 0.5 * (lg.hess + lg.hess.T)
    A[2, 2] = 1.0
    return LagrangianMatrices(A=A, B1=B1, C1=C1)


def dispersion_1d(sigma, r, k: float, efun, guess_v, guess_w=0.0) -> np.ndarray:
    """Roots of ``det(k B1 + i k^2 C1 - lambda A) = 0``, ascending."""
    m = assemble_lagrangian_matrices(sigma, r, efun, guess_v, guess_w)
    lam, _ = hermitian_pencil(k * m.B1 + 1j * k**2 * m.C1, m.A)
    return lam


@dataclass(frozen=True, eq=False)
class LagrangianField:
    """Periodic grid state; node ``i`` sits at ``z = i * dz``."""

    v: np.ndarray
    w: np.ndarray
    u: np.ndarray
    dz: float
    t: float = 0.0
    order: int = 4

    @property
    def n(self) -> int:
        return self.v.size

    @property
    def z(self) -> np.ndarray:
        return self.dz * np.arange(self.n)

    @property
    def D(self) -> PeriodicDerivative:
        return PeriodicDerivative(self.dz, self.order)

    def stack(self) -> np.ndarray:
        return np.stack([self.v, self.w, self.u])

    def with_array(self, y: np.ndarray, t: float) -> "LagrangianField":
        return replace(self, v=y[0].copy(), w=y[1].copy(), u=y[2].copy(), t=t)

    def shifted(self, m: int) -> "LagrangianField":
        return replace(self, v=np.roll(self.v, m), w=np.roll(self.w, m), u=np.roll(self.u, m))


def make_field(v, u, length: float, order: int = 4, w=None) -> LagrangianField:
    """Build a field; ``w`` defaults to the compatible ``D v``."""
    v = np.asarray(v, dtype=float)
    dz = length / v.size
    D = PeriodicDerivative(dz, order)
    w = D(v) if w is None else np.asarray(w, dtype=float)
    return LagrangianField(v=v.copy(), w=w.copy(), u=np.asarray(u, dtype=float).copy(), dz=dz, order=order)


def variational_pressure(f: LagrangianField, efun: EnergyFunctional1D) -> np.ndarray:
    """``p = -(e_v - D[e_w])``."""
    e_v, e_w = efun.grad(f.v, f.w)
    return -(e_v - f.D(e_w))


def _rhs_array(y: np.ndarray, D: PeriodicDerivative, efun: EnergyFunctional1D) -> np.ndarray:
    v, w, u = y
    # positivity is checked once per step by the caller
    p = -(efun.d_eps(v) - D(efun.c_L * w))
    du = D(u)
    return np.stack([du, D(du), -D(p)])


def rhs(f: LagrangianField, efun: EnergyFunctional1D) -> LagrangianField:
    """Time derivative of ``(v, w, u)`` as a field."""
    return f.with_array(_rhs_array(f.stack(), f.D, efun), f.t)


def total_energy(f: LagrangianField, efun: EnergyFunctional1D) -> float:
    return float(np.sum(0.5 * f.u**2 + efun.e(f.v, f.w)) * f.dz)


def constraint_norm(f: LagrangianField) -> float:
    return float(np.max(np.abs(f.w - f.D(f.v))))


def stable_dt(f: LagrangianField, efun: EnergyFunctional1D, cfl: float = 0.4) -> float:
    """``cfl * min(dz / a_L, dz^2 / (2 sqrt(c_L)))`` with ``a_L = sqrt(max eps'')``."""
    a_L = np.sqrt(np.max(efun.d2_eps(f.v)))
    return cfl * min(f.dz / a_L, f.dz**2 / (2.0 * np.sqrt(efun.c_L)))


def step_rk4(f: LagrangianField, efun: EnergyFunctional1D, dt: float) -> LagrangianField:
    D = f.D
    y = rk4_step(lambda y: _rhs_array(y, D, efun), f.stack(), dt)
    return f.with_array(y, f.t + dt)


def audit(f: LagrangianField, efun: EnergyFunctional1D) -> dict:
    return {
        "t": f.t,
        "energy": total_energy(f, efun),
        "constraint_norm": constraint_norm(f),
        "min_v": float(np.min(f.v)),
    }


def run(
    f: LagrangianField,
    efun: EnergyFunctional1D,
    dt: float,
    T: float,
    audit_every: int = 1,
    snapshot_every: int | None = None,
) -> tuple[LagrangianField, AuditLog]:
    """Integrate to time ``f.t + T`` with RK4 steps no larger than ``dt``.

    Raises:
        SimulationBlowUp: a non-finite value or non-positive ``v`` appeared.
    """
    n, dt = step_count(dt, T)
    log = AuditLog()
    log.record(**audit(f, efun))
    if snapshot_every:
        log.snapshots.append(f)
    D = f.D
    y = f.stack()
    t0 = f.t
    for i in range(1, n + 1):
        y_new = rk4_step(lambda s: _rhs_array(s, D, efun), y, dt)
        if not np.all(np.isfinite(y_new)) or np.any(y_new[0] <= 0):
            last = f.with_array(y, t0 + (i - 1) * dt)
            if log.columns["t"][-1] != last.t:
                log.record(**audit(last, efun))
            raise SimulationBlowUp(last, last.t, "non-finite or non-positive specific volume", log)
        y = y_new
        is_audit = i % audit_every == 0 or i == n
        is_snap = bool(snapshot_every) and (i % snapshot_every == 0 or i == n)
        if is_audit or is_snap:
            cur = f.with_array(y, t0 + i * dt)
            if is_audit:
                log.record(**audit(cur, efun))
            if is_snap:
                log.snapshots.append(cur)
    return f.with_array(y, t0 + n * dt), log
