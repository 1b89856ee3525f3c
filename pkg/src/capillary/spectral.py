"""Symmetric system matrices and the Hermitian dispersion relation.

For a constant state the linearised capillary system in conjugate variables
reads ``A v_t + sum_i B^i v_{x_i} + (second-order terms) = 0``. Plane waves
``exp(i(k.x - lambda t))`` give the pencil

    det(B + iC - lambda A) = 0,   B = sum_i k_i B^i,

with ``A`` the Hessian of Pi, ``B^i`` the Hessian of ``Pi u^i`` and ``C`` the
antisymmetric capillary coupling between the ``u`` and ``r`` blocks.

:func:`oracle_dispersion` linearises the primitive-variable system
``(rho, eta, j, w)`` directly and shares no code with the assembly routines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, lapack, solve_triangular

from .conjugate import ConjugateState, PhysicalState, pi_eval
from .errors import EigensolverError, NotPositiveDefiniteError
from .thermo import EquationOfState, ThermoState

U = slice(2, 5)
R = slice(5, 8)


def _wave_vector(k) -> np.ndarray:
    k = np.asarray(k, dtype=float).reshape(-1)
    if k.shape != (3,) or not np.all(np.isfinite(k)):
        raise ValueError(f"wave vector must be a finite 3-vector, got {k!r}")
    return k


@dataclass(frozen=True, eq=False)
class SystemMatrices:
    """``A`` (symmetric), ``B`` (symmetric) and ``C`` (antisymmetric), 8x8."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def hermitian(self) -> np.ndarray:
        return self.B + 1j * self.C


@dataclass(frozen=True, eq=False)
class DispersionResult:
    """Frequencies of the pencil ``B + iC - lambda A`` at one wave vector.

    Attributes:
        k: the wave vector.
        lambdas: real frequencies, ascending.
        vectors: matching eigenvectors (columns), first nonzero entry real positive.
        max_imag: largest |Im| of the Rayleigh quotients ``x* (B+iC) x / x* A x``.
        residuals: per-mode scaled residual of ``(B + iC - lambda A) x``.
    """

    k: np.ndarray
    lambdas: np.ndarray
    vectors: np.ndarray
    max_imag: float
    residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))


def assemble_A(v: ConjugateState, eos: EquationOfState, guess: ThermoState) -> np.ndarray:
    return pi_eval(v, eos, guess).hess


def _assemble_B_from(pe, u: np.ndarray, k: np.ndarray) -> np.ndarray:
    # Hess(Pi u^i) = u^i Hess(Pi) + e_{u_i} grad^T + grad e_{u_i}^T, since u^i is a coordinate
    kk = np.zeros(8)
    kk[U] = k
    return (u @ k) * pe.hess + np.outer(kk, pe.grad) + np.outer(pe.grad, kk)


def assemble_B(v: ConjugateState, k, eos: EquationOfState, guess: ThermoState) -> np.ndarray:
    """``B = sum_i k_i * Hess_v(Pi u^i)``, assembled analytically."""
    k = _wave_vector(k)
    return _assemble_B_from(pi_eval(v, eos, guess), v.u, k)


def assemble_C(k, rho_e: float) -> np.ndarray:
    """Capillary coupling: ``-rho_e k k^T`` in the (u, r) block, ``+rho_e k k^T`` in (r, u)."""
    if not rho_e > 0:
        raise ValueError("rho_e must be positive")
    k = _wave_vector(k)
    C = np.zeros((8, 8))
    kk = rho_e * np.outer(k, k)
    C[U, R] = -kk
    C[R, U] = kk
    return C


def assemble(v: ConjugateState, k, eos: EquationOfState, guess: ThermoState) -> SystemMatrices:
    k = _wave_vector(k)
    pe = pi_eval(v, eos, guess)
    return SystemMatrices(A=pe.hess, B=_assemble_B_from(pe, v.u, k), C=assemble_C(k, pe.state.rho))


def cholesky_lower(A: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; raises :class:`NotPositiveDefiniteError` with the pivot."""
    L, info = lapack.dpotrf(np.asarray(A, dtype=float), lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(pivot=info - 1)
    if info < 0:
        raise EigensolverError(f"dpotrf: illegal argument {-info}")
    return L


def _normalise_phase(x: np.ndarray) -> np.ndarray:
    x = x / np.linalg.norm(x, axis=0)
    for col in range(x.shape[1]):
        vec = x[:, col]
        nz = np.flatnonzero(np.abs(vec) > 1e-12 * np.max(np.abs(vec)))
        x[:, col] = vec * (abs(vec[nz[0]]) / vec[nz[0]])
    return x


def hermitian_pencil(M: np.ndarray, A: np.ndarray):
    """Solve ``M x = lambda A x`` for Hermitian ``M`` and symmetric positive definite ``A``.

    ``A`` is Jacobi-scaled, factored as ``L L^T`` and the problem reduced to
    the Hermitian standard problem ``L^-1 M L^-T``. ``M`` is divided by its
    largest entry before the solve and the frequencies rescaled afterwards.

    Returns:
        (lambdas, vectors), ascending; vectors are ``A``-orthogonal columns.
    """
    M = np.asarray(M, dtype=complex)
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    diag = np.diag(A)
    if np.any(diag <= 0):
        raise NotPositiveDefiniteError(pivot=int(np.flatnonzero(diag <= 0)[0]))
    d = 1.0 / np.sqrt(diag)
    As = d[:, None] * A * d[None, :]
    Ms = d[:, None] * M * d[None, :]
    L = cholesky_lower(As)
    scale = np.max(np.abs(Ms))
    if scale == 0.0:
        return np.zeros(n), d[:, None] * solve_triangular(L.T, np.eye(n, dtype=complex), lower=False)
    Ms = Ms / scale

    X = solve_triangular(L, Ms, lower=True)
    S = solve_triangular(L, X.conj().T, lower=True).conj().T
    S = 0.5 * (S + S.conj().T)
    try:
        mu, Z = eigh(S)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc
    vecs = d[:, None] * solve_triangular(L.T, Z, lower=False)
    return scale * mu, vecs


def dispersion_from_matrices(m: SystemMatrices, k) -> DispersionResult:
    H = m.hermitian
    lambdas, vecs = hermitian_pencil(H, m.A)
    vecs = _normalise_phase(vecs)
    norm_H = np.linalg.norm(H, 2)
    norm_A = np.linalg.norm(m.A, 2)
    res = np.empty(len(lambdas))
    imag = np.empty(len(lambdas))
    for i, lam in enumerate(lambdas):
        x = vecs[:, i]
        res[i] = np.linalg.norm(H @ x - lam * (m.A @ x)) / (
            (norm_H + abs(lam) * norm_A) * np.linalg.norm(x) + np.finfo(float).tiny
        )
        imag[i] = abs((x.conj() @ H @ x).imag / (x.conj() @ m.A @ x).real)
    return DispersionResult(
        k=_wave_vector(k), lambdas=lambdas, vectors=vecs, max_imag=float(np.max(imag)), residuals=res
    )


def dispersion_eigs(v: ConjugateState, k, eos: EquationOfState, guess: ThermoState) -> DispersionResult:
    """Real frequencies of ``det(B + iC - lambda A) = 0``.

    Raises:
        NotPositiveDefiniteError: ``A`` is not positive definite (loss of
            local convexity of the energy).
    """
    return dispersion_from_matrices(assemble(v, k, eos, guess), k)


def oracle_matrix(equilibrium: PhysicalState, k, eos: EquationOfState) -> np.ndarray:
    """Plane-wave matrix ``M`` with ``lambda x = M x`` for primitive ``x = (rho, eta, j, w)``.

    Linearises

        rho_t + div j = 0
        eta_t + div(eta j / rho) = 0
        j_t + div(j j^T / rho + P I) - c rho grad(div w) = 0
        w_t + grad(div j) = 0

    about a constant state with ``w = 0``.
    """
    k = _wave_vector(k)
    rho, eta, j, c = equilibrium.rho, equilibrium.eta, equilibrium.j, equilibrium.c
    if np.any(equilibrium.w != 0):
        raise ValueError("oracle linearisation requires w = 0 at equilibrium")
    _, (mu, theta), (err, ere, eee) = eos.derivatives(rho, eta)
    # P = rho mu + eta theta - eps  =>  dP = rho dmu + eta dtheta
    P_rho = rho * err + eta * ere
    P_eta = rho * ere + eta * eee

    M = np.zeros((8, 8), dtype=complex)
    RHO, ETA, J, W = 0, 1, slice(2, 5), slice(5, 8)
    # mass flux j
    M[RHO, J] = k
    # entropy flux eta j / rho
    M[ETA, RHO] = -(eta / rho**2) * (k @ j)
    M[ETA, ETA] = (k @ j) / rho
    M[ETA, J] = (eta / rho) * k
    # momentum flux F = j j^T / rho + P I; k^T dF
    M[J, J] = ((k @ j) * np.eye(3) + np.outer(j, k)) / rho
    M[J, RHO] = -(k @ j) * j / rho**2 + P_rho * k
    M[J, ETA] = P_eta * k
    M[J, W] = -1j * c * rho * np.outer(k, k)
    # gradient-of-density equation
    M[W, J] = 1j * np.outer(k, k)
    return M


def oracle_dispersion(equilibrium: PhysicalState, k, eos: EquationOfState) -> np.ndarray:
    """Complex frequencies of the directly linearised primitive system.

    Sorted by real part, then imaginary part.
    """
    lam = np.linalg.eigvals(oracle_matrix(equilibrium, k, eos))
    return lam[np.lexsort((lam.imag, lam.real))]
