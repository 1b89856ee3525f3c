"""Equations of state ``eps(rho, eta)`` with analytic derivatives.

Energy ``eps`` is per unit volume and ``eta`` is entropy per unit volume.
The chemical potential and temperature are the partial derivatives

    mu = d eps / d rho,    theta = d eps / d eta,

and the thermodynamic pressure follows from the Euler relation

    P = rho * mu + theta * eta - eps,

which is the same as ``rho * d eps/d rho - eps`` when the derivative is
taken at fixed specific entropy ``eta / rho``.

Both built-in closures share the form

    eps = cv * rho * T(rho, eta) - a * rho**2,
    T   = h(rho) * exp(eta / (rho * cv)),

so their derivatives are assembled from the logarithmic derivatives of
``h``. New closures only need to implement :meth:`EquationOfState.derivatives`.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteError, ThermoDomainError


@dataclass(frozen=True)
class ThermoState:
    """Density and entropy per unit volume."""

    rho: float
    eta: float

    def __post_init__(self):
        if not np.isfinite(self.rho) or not np.isfinite(self.eta):
            raise ThermoDomainError(f"non-finite thermodynamic state {self}")
        if self.rho <= 0:
            raise ThermoDomainError(f"density must be positive, got rho={self.rho!r}")

    @property
    def specific_entropy(self) -> float:
        return self.eta / self.rho


@dataclass(frozen=True)
class ThermoEval:
    """Energy, its derivatives and derived quantities at one state.

    Attributes:
        eps: energy per unit volume.
        mu: chemical potential, d eps / d rho.
        theta: temperature, d eps / d eta.
        P: thermodynamic pressure.
        hessian: 2x2 Hessian of eps in (rho, eta).
        convex: True iff ``hessian`` is positive definite.
    """

    eps: float
    mu: float
    theta: float
    P: float
    hessian: np.ndarray
    convex: bool


def is_positive_definite_2x2(h: np.ndarray) -> bool:
    """Leading-minor test for a symmetric 2x2 matrix."""
    return bool(h[0, 0] > 0 and h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0] > 0)


class EquationOfState(ABC):
    """Interface for closures ``eps(rho, eta)``.

    Methods accept scalars or numpy arrays of matching shape.
    """

    name: str = "eos"

    @abstractmethod
    def check_domain(self, rho, eta) -> None:
        """Raise :class:`ThermoDomainError` if any state is out of range."""

    @abstractmethod
    def derivatives(self, rho, eta):
        """Return ``(eps, (eps_r, eps_e), (eps_rr, eps_re, eps_ee))``."""

    def energy(self, rho, eta):
        return self.derivatives(rho, eta)[0]

    def pressure(self, rho, eta):
        eps, (mu, theta), _ = self.derivatives(rho, eta)
        return rho * mu + theta * eta - eps

    def evaluate(self, s: ThermoState) -> ThermoEval:
        eps, (mu, theta), (hrr, hre, hee) = self.derivatives(s.rho, s.eta)
        P = self.pressure(s.rho, s.eta)
        hess = np.array([[hrr, hre], [hre, hee]], dtype=float)
        values = np.array([eps, mu, theta, P], dtype=float)
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(hess))):
            raise NonFiniteError(f"{self.name}: non-finite evaluation at {s}")
        return ThermoEval(
            eps=float(eps),
            mu=float(mu),
            theta=float(theta),
            P=float(P),
            hessian=hess,
            convex=is_positive_definite_2x2(hess),
        )

    def sound_speed_sq(self, s: ThermoState) -> float:
        """``dP/drho`` at fixed specific entropy; negative values are returned as is."""
        h = self.evaluate(s).hessian
        x = np.array([1.0, s.specific_entropy])
        return float(s.rho * x @ h @ x)

    def to_dict(self) -> dict:
        raise NotImplementedError


class _ExponentialThermalEOS(EquationOfState):
    """Shared algebra for ``eps = cv*rho*h(rho)*exp(eta/(rho*cv)) - a*rho**2``."""

    cv: float
    attraction: float

    @abstractmethod
    def _log_h(self, rho):
        """Return ``(ln h, (ln h)', (ln h)'')``."""

    def derivatives(self, rho, eta):
        self.check_domain(rho, eta)
        cv = self.cv
        log_h, d1, d2 = self._log_h(rho)
        ell = np.log(rho) + log_h + eta / (rho * cv)
        phi = np.exp(ell)  # rho * T
        l_r = 1.0 / rho + d1 - eta / (cv * rho**2)
        l_e = 1.0 / (cv * rho)
        l_rr = -1.0 / rho**2 + d2 + 2.0 * eta / (cv * rho**3)
        l_re = -1.0 / (cv * rho**2)

        a = self.attraction
        eps = cv * phi - a * rho**2
        eps_r = cv * phi * l_r - 2.0 * a * rho
        eps_e = cv * phi * l_e
        eps_rr = cv * phi * (l_r**2 + l_rr) - 2.0 * a
        eps_re = cv * phi * (l_r * l_e + l_re)
        eps_ee = cv * phi * l_e**2
        return eps, (eps_r, eps_e), (eps_rr, eps_re, eps_ee)

    def temperature(self, rho, eta):
        log_h, _, _ = self._log_h(rho)
        return np.exp(log_h + eta / (rho * self.cv))

    def pressure(self, rho, eta):
        # Euler relation reduces to cv * rho^2 * T * (ln h)' - a rho^2
        self.check_domain(rho, eta)
        log_h, d1, _ = self._log_h(rho)
        T = np.exp(log_h + eta / (rho * self.cv))
        return self.cv * rho * rho * T * d1 - self.attraction * rho * rho


class Polytropic(_ExponentialThermalEOS):
    """Perfect gas ``eps = K/(gamma-1) * rho**gamma * exp((gamma-1)*eta/rho)``.

    Pressure is ``K * rho**gamma * exp((gamma-1)*eta/rho)`` and the energy is
    convex on the whole half plane ``rho > 0``.
    """

    name = "polytropic"

    def __init__(self, K: float = 1.0, gamma: float = 2.0):
        if not K > 0:
            raise ValueError("K must be positive")
        if not gamma > 1:
            raise ValueError("gamma must exceed 1")
        self.K = float(K)
        self.gamma = float(gamma)
        self.cv = 1.0 / (self.gamma - 1.0)
        self.attraction = 0.0

    def __repr__(self):
        return f"Polytropic(K={self.K!r}, gamma={self.gamma!r})"

    def check_domain(self, rho, eta):
        if np.any(~np.isfinite(rho)) or np.any(~np.isfinite(eta)):
            raise ThermoDomainError("non-finite state")
        if np.any(np.asarray(rho) <= 0):
            raise ThermoDomainError("density must be positive")

    def _log_h(self, rho):
        g1 = self.gamma - 1.0
        return np.log(self.K) + g1 * np.log(rho), g1 / rho, -g1 / rho**2

    def to_dict(self):
        return {"model": "polytropic", "K": self.K, "gamma": self.gamma}


class VanDerWaals(_ExponentialThermalEOS):
    """Van der Waals fluid with constant specific heat.

    ``P = rho*R*T/(1 - b*rho) - a*rho**2`` and
    ``T = (rho/(1 - b*rho))**(R/cv) * exp(eta/(rho*cv))``.
    The energy is convex exactly where ``(dP/drho)_T > 0``; inside the
    spinodal it is not. The adiabatic exponent is ``1 + R/cv``.
    """

    name = "van-der-waals"

    def __init__(self, a: float = 3.0, b: float = 1.0 / 3.0, R: float = 8.0 / 3.0, cv: float = 4.0):
        for label, val in (("a", a), ("b", b), ("R", R), ("cv", cv)):
            if not val > 0:
                raise ValueError(f"{label} must be positive")
        self.a = float(a)
        self.b = float(b)
        self.R = float(R)
        self.cv = float(cv)
        self.attraction = self.a

    def __repr__(self):
        return f"VanDerWaals(a={self.a!r}, b={self.b!r}, R={self.R!r}, cv={self.cv!r})"

    @property
    def gamma(self) -> float:
        return 1.0 + self.R / self.cv

    def check_domain(self, rho, eta):
        rho = np.asarray(rho)
        if np.any(~np.isfinite(rho)) or np.any(~np.isfinite(eta)):
            raise ThermoDomainError("non-finite state")
        if np.any(rho <= 0):
            raise ThermoDomainError("density must be positive")
        if np.any(rho * self.b >= 1):
            raise ThermoDomainError(f"covolume bound violated: rho*b >= 1 (b={self.b})")

    def _log_h(self, rho):
        d = self.R / self.cv
        one_m = 1.0 - self.b * rho
        log_h = d * (np.log(rho) - np.log(one_m))
        d1 = d * (1.0 / rho + self.b / one_m)
        d2 = d * (-1.0 / rho**2 + self.b**2 / one_m**2)
        return log_h, d1, d2

    def entropy_at(self, rho: float, T: float) -> float:
        """Entropy per volume giving temperature ``T`` at density ``rho``."""
        self.check_domain(rho, 0.0)
        log_h, _, _ = self._log_h(rho)
        return float(rho * self.cv * (np.log(T) - log_h))

    def spinodal_indicator(self, rho, T):
        """``(dP/drho)_T``; negative inside the spinodal."""
        return self.R * T / (1.0 - self.b * rho) ** 2 - 2.0 * self.a * rho

    def to_dict(self):
        return {"model": "van-der-waals", "a": self.a, "b": self.b, "R": self.R, "cv": self.cv}


def evaluate(eos: EquationOfState, s: ThermoState) -> ThermoEval:
    """Evaluate ``eos`` at ``s``; see :meth:`EquationOfState.evaluate`."""
    return eos.evaluate(s)


def sound_speed_sq(eos: EquationOfState, s: ThermoState) -> float:
    return eos.sound_speed_sq(s)


def eos_from_dict(params: dict) -> EquationOfState:
    """Build an EOS from ``{"model": ..., **parameters}``."""
    params = dict(params)
    model = params.pop("model", "polytropic")
    if model == "polytropic":
        allowed = {"K", "gamma"}
        cls = Polytropic
    elif model in ("van-der-waals", "vdw", "van_der_waals"):
        allowed = {"a", "b", "R", "cv"}
        cls = VanDerWaals
    else:
        raise ValueError(f"unknown EOS model {model!r}")
    unknown = set(params) - allowed
    if unknown:
        raise ValueError(f"unknown parameters for {model}: {sorted(unknown)}")
    return cls(**{k: float(v) for k, v in params.items()})
