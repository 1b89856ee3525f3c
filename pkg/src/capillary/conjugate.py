"""Conjugate variables of the capillary total energy and the potential Pi.

The total energy per unit volume is

    E(rho, eta, j, w) = eps(rho, eta) + |j|^2 / (2 rho) + c |w|^2 / 2,

and its gradient defines the conjugate variables

    q = mu - |u|^2 / 2,   theta,   u = j / rho,   r = c w.

The Legendre transform ``Pi = rho q + eta theta + j.u + w.r - E`` equals
``P(mu, theta) + |r|^2 / (2c)`` with ``mu = q + |u|^2 / 2``. Its gradient in
``v = (q, theta, u1, u2, u3, r1, r2, r3)`` recovers ``(rho, eta, j, w)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SingularJacobianError, ThermoDomainError
from .thermo import EquationOfState, ThermoState

#: order of the conjugate vector v; also the row/column order of A, B, C
VARIABLES = ("q", "theta", "u1", "u2", "u3", "r1", "r2", "r3")
NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-13


def _vec3(x) -> np.ndarray:
    a = np.asarray(x, dtype=float).reshape(-1)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class PhysicalState:
    """``(rho, eta, j, w)`` and the capillarity coefficient ``c``."""

    rho: float
    eta: float
    j: np.ndarray
    w: np.ndarray
    c: float

    def __post_init__(self):
        object.__setattr__(self, "j", _vec3(self.j))
        object.__setattr__(self, "w", _vec3(self.w))
        if not self.rho > 0:
            raise ThermoDomainError(f"density must be positive, got {self.rho!r}")
        if not self.c > 0:
            raise ValueError(f"capillarity coefficient must be positive, got {self.c!r}")

    @classmethod
    def at_rest(cls, rho: float, eta: float, c: float, u=(0.0, 0.0, 0.0)) -> "PhysicalState":
        """Constant state with velocity ``u`` and ``w = 0``."""
        return cls(rho, eta, rho * _vec3(u), np.zeros(3), c)

    @property
    def u(self) -> np.ndarray:
        return self.j / self.rho

    @property
    def thermo(self) -> ThermoState:
        return ThermoState(self.rho, self.eta)

    def total_energy(self, eos: EquationOfState) -> float:
        eps = eos.evaluate(self.thermo).eps
        return eps + self.j @ self.j / (2.0 * self.rho) + 0.5 * self.c * self.w @ self.w

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.rho, self.eta], self.j, self.w])


@dataclass(frozen=True, eq=False)
class ConjugateState:
    """``v = (q, theta, u, r)`` together with ``c``."""

    q: float
    theta: float
    u: np.ndarray
    r: np.ndarray
    c: float

    def __post_init__(self):
        object.__setattr__(self, "u", _vec3(self.u))
        object.__setattr__(self, "r", _vec3(self.r))
        if not self.c > 0:
            raise ValueError(f"capillarity coefficient must be positive, got {self.c!r}")

    @property
    def mu(self) -> float:
        return self.q + 0.5 * self.u @ self.u

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.q, self.theta], self.u, self.r])

    @classmethod
    def from_vector(cls, v, c: float) -> "ConjugateState":
        v = np.asarray(v, dtype=float)
        return cls(v[0], v[1], v[2:5], v[5:8], c)


@dataclass(frozen=True, eq=False)
class PiEval:
    """Value, gradient and Hessian of Pi in the conjugate variables.

    ``state`` is the physical state recovered during evaluation.
    """

    pi: float
    grad: np.ndarray
    hess: np.ndarray
    state: PhysicalState


def to_conjugate(p: PhysicalState, eos: EquationOfState) -> ConjugateState:
    te = eos.evaluate(p.thermo)
    u = p.u
    return ConjugateState(q=te.mu - 0.5 * u @ u, theta=te.theta, u=u, r=p.c * p.w, c=p.c)


def invert_gibbs(
    eos: EquationOfState,
    mu: float,
    theta: float,
    guess: ThermoState,
    max_iter: int = NEWTON_MAX_ITER,
    tol: float = NEWTON_TOL,
) -> ThermoState:
    """Solve ``(mu(rho, eta), theta(rho, eta)) = (mu, theta)`` by damped Newton.

    The Jacobian is the energy Hessian. Steps are halved until the trial
    state is admissible and the scaled residual decreases.

    Raises:
        ThermoDomainError: ``theta`` is not a positive finite temperature.
        SingularJacobianError: the energy Hessian is numerically singular.
        ConvergenceError: no convergence within ``max_iter`` iterations.
    """
    if not (np.isfinite(mu) and np.isfinite(theta)):
        raise ThermoDomainError("non-finite conjugate variables")
    if not theta > 0:
        raise ThermoDomainError(f"temperature must be positive, got theta={theta!r}")
    target = np.array([mu, theta])
    scale = np.array([abs(mu) + theta, theta])

    def residual(rho, eta):
        _, grad, hess = eos.derivatives(rho, eta)
        return np.array(grad) - target, hess

    x = np.array([guess.rho, guess.eta], dtype=float)
    f, hess = residual(*x)
    err = np.max(np.abs(f) / scale)
    for _ in range(max_iter):
        if err <= tol:
            return ThermoState(float(x[0]), float(x[1]))
        hrr, hre, hee = hess
        det = hrr * hee - hre * hre
        if not np.isfinite(det) or abs(det) <= 1e-13 * (abs(hrr * hee) + hre * hre):
            raise SingularJacobianError(
                f"singular energy Hessian at rho={x[0]!r}, eta={x[1]!r} (det={det!r})"
            )
        step = -np.array([hee * f[0] - hre * f[1], -hre * f[0] + hrr * f[1]]) / det
        t = 1.0
        for _ in range(60):
            trial = x + t * step
            try:
                f_new, hess_new = residual(*trial)
                err_new = np.max(np.abs(f_new) / scale)
            except ThermoDomainError:
                err_new = np.inf
            if np.isfinite(err_new) and err_new < err:
                break
            t *= 0.5
        else:
            if err <= 100 * tol:
                # stalled at rounding level
                return ThermoState(float(x[0]), float(x[1]))
            raise ConvergenceError(f"line search failed at residual {err:.3e}")
        x, f, hess, err = trial, f_new, hess_new, err_new
    if err <= tol:
        return ThermoState(float(x[0]), float(x[1]))
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations (residual {err:.3e})")


def from_conjugate(v: ConjugateState, eos: EquationOfState, guess: ThermoState) -> PhysicalState:
    """Map ``(q, theta, u, r)`` back to ``(rho, eta, j, w)``."""
    s = invert_gibbs(eos, v.mu, v.theta, guess)
    return PhysicalState(s.rho, s.eta, s.rho * v.u, v.r / v.c, v.c)


def pi_eval(v: ConjugateState, eos: EquationOfState, guess: ThermoState) -> PiEval:
    """Evaluate Pi, its gradient and its analytic Hessian at ``v``.

    With ``G`` the inverse of the energy Hessian (the Hessian of ``P`` in
    ``(mu, theta)``) the Hessian is

        [[G_mm,     G_mt,     G_mm u^T,             0  ],
         [G_mt,     G_tt,     G_mt u^T,             0  ],
         [G_mm u,   G_mt u,   rho I + G_mm u u^T,   0  ],
         [0,        0,        0,                    I/c]].
    """
    p = from_conjugate(v, eos, guess)
    te = eos.evaluate(p.thermo)
    hrr, hre = te.hessian[0]
    hee = te.hessian[1, 1]
    det = hrr * hee - hre * hre
    if abs(det) <= 1e-13 * (abs(hrr * hee) + hre * hre):
        raise SingularJacobianError("singular energy Hessian; Pi is not twice differentiable here")
    g_mm, g_mt, g_tt = hee / det, -hre / det, hrr / det

    u, r, c = v.u, v.r, v.c
    pi = te.P + r @ r / (2.0 * c)
    grad = np.concatenate([[p.rho, p.eta], p.rho * u, r / c])

    hess = np.zeros((8, 8))
    hess[0, 0] = g_mm
    hess[0, 1] = hess[1, 0] = g_mt
    hess[1, 1] = g_tt
    hess[0, 2:5] = hess[2:5, 0] = g_mm * u
    hess[1, 2:5] = hess[2:5, 1] = g_mt * u
    hess[2:5, 2:5] = p.rho * np.eye(3) + g_mm * np.outer(u, u)
    hess[5:8, 5:8] = np.eye(3) / c
    return PiEval(pi=float(pi), grad=grad, hess=hess, state=p)


def pi_value(v: ConjugateState, eos: EquationOfState, guess: ThermoState) -> float:
    """Pi alone, computed from the definition ``rho q + eta theta + j.u + w.r - E``."""
    p = from_conjugate(v, eos, guess)
    return float(
        p.rho * v.q + p.eta * v.theta + p.j @ v.u + p.w @ v.r - p.total_energy(eos)
    )
