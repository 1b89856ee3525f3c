"""Initial data for the 1-D simulators, built from a :class:`RunConfig`.

``standing-wave`` perturbs the density (or specific volume) by a cosine at
rest; ``traveling-wave`` adds the matching linear velocity so that the
perturbation is a single right-going eigenmode of the continuous system.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import eulerian1d, lagrangian1d
from .config import RunConfig
from .thermo import EquationOfState, ThermoState


def lagrangian_functional(cfg: RunConfig) -> lagrangian1d.EnergyFunctional1D:
    return lagrangian1d.gamma_law(cfg.lagrangian.gamma, cfg.lagrangian.c_L)


def lagrangian_initial(cfg: RunConfig, efun: lagrangian1d.EnergyFunctional1D):
    g, ini, lag = cfg.grid, cfg.initial, cfg.lagrangian
    z = g.L * np.arange(g.N) / g.N
    k = 2.0 * np.pi * ini.mode / g.L
    v_e = lag.v_e
    if ini.kind == "uniform":
        v = np.full(g.N, v_e)
        u = np.zeros(g.N)
    else:
        wave = ini.amplitude * v_e * np.cos(k * z)
        v = v_e + wave
        if ini.kind == "standing-wave":
            u = np.zeros(g.N)
        else:
            lam = np.sqrt(efun.d2_eps(v_e) * k**2 + efun.c_L * k**4)
            u = -(lam / k) * wave
    return lagrangian1d.make_field(v, u, g.L, order=g.order)


def eulerian_initial(cfg: RunConfig, eos: EquationOfState):
    g, ini, eq = cfg.grid, cfg.initial, cfg.equilibrium
    x = g.L * np.arange(g.N) / g.N
    k = 2.0 * np.pi * ini.mode / g.L
    rho_e, s_e, u_e = eq.rho_e, eq.eta_e / eq.rho_e, float(eq.u_e[0])
    if ini.kind == "uniform":
        rho = np.full(g.N, rho_e)
        u = np.full(g.N, u_e)
    else:
        rel = ini.amplitude * np.cos(k * x)
        rho = rho_e * (1.0 + rel)
        u = np.full(g.N, u_e)
        if ini.kind == "traveling-wave":
            a2 = eos.sound_speed_sq(ThermoState(rho_e, eq.eta_e))
            omega = np.sqrt(max(a2, 0.0) * k**2 + cfg.c * rho_e * k**4)
            u = u + (omega / k) * rel
    return eulerian1d.make_field(
        rho, s_e * rho, rho * u, cfg.c, g.L, order=g.order, scheme=g.scheme
    )


def choose_dt(cfg: RunConfig, bound_at_default_cfl: float, bound_at_unit_cfl: float) -> float:
    """Time step from ``time.dt`` or ``time.cfl``.

    An explicit ``dt`` above the stability bound (at the default CFL 0.4) is
    clamped to the bound with a warning.
    """
    t = cfg.time
    if t.dt is None:
        return t.cfl * bound_at_unit_cfl
    if t.dt > bound_at_default_cfl:
        warnings.warn(
            f"dt={float(t.dt)!r} exceeds the stability bound {float(bound_at_default_cfl)!r}; using the bound",
            RuntimeWarning,
            stacklevel=2,
        )
        return bound_at_default_cfl
    return t.dt
