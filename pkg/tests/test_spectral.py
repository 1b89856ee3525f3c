import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from capillary.conjugate import PhysicalState, pi_value, to_conjugate
from capillary.errors import NotPositiveDefiniteError
from capillary.spectral import (
    assemble,
    assemble_A,
    assemble_B,
    assemble_C,
    cholesky_lower,
    dispersion_eigs,
    hermitian_pencil,
    oracle_dispersion,
)
from capillary.thermo import Polytropic, ThermoState, VanDerWaals

vec3 = st.tuples(*[st.floats(-1.0, 1.0)] * 3).map(np.array)
U, R = slice(2, 5), slice(5, 8)


@st.composite
def equilibria(draw, moving=True):
    eos = Polytropic(draw(st.floats(0.5, 2.0)), draw(st.floats(1.2, 3.0)))
    rho = draw(st.floats(0.3, 2.0))
    eta = rho * draw(st.floats(-0.8, 0.8))
    u = draw(vec3) if moving else np.zeros(3)
    c = draw(st.floats(0.01, 2.0))
    k = 4.0 * draw(vec3)
    return eos, PhysicalState.at_rest(rho, eta, c, u), k


def _lam(eos, p, k):
    return dispersion_eigs(to_conjugate(p, eos), k, eos, p.thermo)


def test_C_reference_entries():
    C = assemble_C([1.0, 0.0, 0.0], 2.0)
    expected = np.zeros((8, 8))
    expected[2, 5] = -2.0
    expected[5, 2] = 2.0
    np.testing.assert_array_equal(C, expected)
    np.testing.assert_array_equal(assemble_C([0, 0, 0], 1.5), 0.0)


@settings(max_examples=50, deadline=None)
@given(k=vec3, rho=st.floats(0.1, 5.0))
def test_C_antisymmetric_and_blocks(k, rho):
    C = assemble_C(k, rho)
    np.testing.assert_array_equal(C + C.T, 0.0)
    np.testing.assert_array_equal(C[:2], 0.0)
    np.testing.assert_array_equal(C[:, :2], 0.0)
    np.testing.assert_array_equal(C[U, R], -rho * np.outer(k, k))


def test_A_at_rest_block_diagonal(poly):
    p = PhysicalState.at_rest(1.4, 0.3, 0.25)
    A = assemble_A(to_conjugate(p, poly), poly, p.thermo)
    np.testing.assert_allclose(A[U, U], 1.4 * np.eye(3), rtol=1e-14)
    np.testing.assert_array_equal(A[R, R], np.eye(3) / 0.25)
    np.testing.assert_array_equal(A[:2, 2:], 0.0)
    np.testing.assert_array_equal(A[U, R], 0.0)
    H = poly.evaluate(p.thermo).hessian
    np.testing.assert_allclose(A[:2, :2], np.linalg.inv(H), rtol=1e-13)


def test_B_at_rest_structure(poly):
    rho, eta = 1.1, 0.2
    p = PhysicalState.at_rest(rho, eta, 0.3)
    k = np.array([0.7, -1.2, 0.4])
    B = assemble_B(to_conjugate(p, poly), k, poly, p.thermo)
    np.testing.assert_array_equal(B[:2, :2], 0.0)
    np.testing.assert_allclose(B[0, U], rho * k, rtol=1e-14)
    np.testing.assert_allclose(B[1, U], eta * k, rtol=1e-14)
    np.testing.assert_allclose(B[U, U], 0.0, atol=0)
    np.testing.assert_array_equal(B[R], 0.0)


def _second_differences(f, x, h):
    n = x.size
    H = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            ei, ej = np.zeros(n), np.zeros(n)
            ei[i], ej[j] = h[i], h[j]
            H[i, j] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h[i] * h[j])
    return H


@pytest.mark.parametrize("u", [(0.0, 0.0, 0.0), (0.3, -0.2, 0.5)])
def test_B_matches_finite_differences_of_pi_u(poly, u):
    # B = sum_i k_i Hess(Pi u^i), oracle from second differences of the scalar Pi(v) u^i
    p = PhysicalState(1.2, 0.1, 1.2 * np.array(u), [0.1, -0.3, 0.2], 0.4)
    v = to_conjugate(p, poly)
    k = np.array([0.5, 1.5, -1.0])
    x = v.as_vector()
    h = 1e-4 * (1 + np.abs(x))

    def f(y):
        return pi_value(type(v).from_vector(y, v.c), poly, p.thermo) * (k @ y[U])

    fd = _second_differences(f, x, h)
    B = assemble_B(v, k, poly, p.thermo)
    assert np.max(np.abs(fd - B)) / np.max(np.abs(B)) <= 1e-5


def test_B_linear_in_k(poly):
    p = PhysicalState(1.0, 0.2, [0.2, 0.1, -0.3], [0, 0, 0], 0.1)
    v = to_conjugate(p, poly)
    k1, k2 = np.array([1.0, 2.0, -0.5]), np.array([-0.3, 0.4, 2.0])
    B = lambda k: assemble_B(v, k, poly, p.thermo)  # noqa: E731
    np.testing.assert_array_equal(B(np.zeros(3)), 0.0)
    np.testing.assert_allclose(B(k1 + k2), B(k1) + B(k2), atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(rho=st.floats(0.2, 2.5), T=st.floats(0.3, 2.5))
def test_A_positive_definite_iff_convex(rho, T):
    vdw = VanDerWaals()
    if abs(vdw.spinodal_indicator(rho, T)) < 1e-6:
        return
    p = PhysicalState.at_rest(rho, vdw.entropy_at(rho, T), 0.1, (0.2, 0.0, 0.0))
    A = assemble_A(to_conjugate(p, vdw), vdw, p.thermo)
    try:
        cholesky_lower(A)
        spd = True
    except NotPositiveDefiniteError:
        spd = False
    assert spd == vdw.evaluate(p.thermo).convex


@settings(max_examples=60, deadline=None)
@given(equilibria())
def test_hermitian_structure_and_residuals(case):
    eos, p, k = case
    m = assemble(to_conjugate(p, eos), k, eos, p.thermo)
    H = m.hermitian
    assert np.linalg.norm(H - H.conj().T, np.inf) <= 1e-12
    res = _lam(eos, p, k)
    assert np.all(np.diff(res.lambdas) >= 0)
    assert res.max_residual <= 1e-9
    assert res.max_imag <= 1e-9


def test_k_zero_gives_zero_frequencies(poly):
    p = PhysicalState.at_rest(1.0, 0.0, 0.1, (0.4, 0.0, 0.0))
    np.testing.assert_array_equal(_lam(poly, p, np.zeros(3)).lambdas, 0.0)
    np.testing.assert_array_equal(oracle_dispersion(p, np.zeros(3), poly), 0.0)


def test_capillary_branch_reference_state(poly):
    p = PhysicalState.at_rest(1.0, 0.0, 0.1)
    lam = _lam(poly, p, [2.0, 0.0, 0.0]).lambdas
    expected = np.sqrt(2.0 * 4 + 0.1 * 16)  # a^2 = gamma P / rho = 2
    assert lam[-1] == pytest.approx(expected, rel=1e-12)
    assert lam[0] == pytest.approx(-expected, rel=1e-12)
    np.testing.assert_allclose(lam[1:-1], 0.0, atol=1e-12)


@pytest.mark.parametrize("alpha", [1, 2, 4])
def test_quadratic_plus_quartic_scaling(poly, alpha):
    p = PhysicalState.at_rest(1.3, 0.2, 0.05)
    k = alpha * np.array([0.3, -0.4, 0.2])
    a2 = poly.sound_speed_sq(p.thermo)
    kn = np.linalg.norm(k)
    lam = _lam(poly, p, k).lambdas
    assert lam[-1] ** 2 == pytest.approx(a2 * kn**2 + 0.05 * 1.3 * kn**4, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(equilibria(moving=False), st.integers(0, 2**31))
def test_rotation_equivariance_at_rest(case, seed):
    eos, p, k = case
    rot = Rotation.random(random_state=seed).as_matrix()
    a = _lam(eos, p, k).lambdas
    b = _lam(eos, p, rot @ k).lambdas
    assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, np.max(np.abs(a)))


@settings(max_examples=40, deadline=None)
@given(equilibria())
def test_galilean_shift(case):
    eos, p, k = case
    rest = PhysicalState.at_rest(p.rho, p.eta, p.c)
    shifted = _lam(eos, p, k).lambdas
    base = _lam(eos, rest, k).lambdas
    assert np.max(np.abs(shifted - base - p.u @ k)) <= 1e-10 * max(1.0, np.max(np.abs(shifted)))


def test_gas_dynamics_limit_moving_state(poly):
    p = PhysicalState.at_rest(1.0, 0.1, 1e-12, (0.3, -0.1, 0.2))
    k = np.array([1.0, 2.0, -0.5])
    a = np.sqrt(poly.sound_speed_sq(p.thermo))
    lam = _lam(poly, p, k).lambdas
    uk, kn = p.u @ k, np.linalg.norm(k)
    assert lam[-1] == pytest.approx(uk + a * kn, rel=1e-6)
    assert lam[0] == pytest.approx(uk - a * kn, rel=1e-6)


def test_oracle_acoustic_limit(poly):
    p = PhysicalState.at_rest(1.0, 0.0, 1e-14)
    lam = oracle_dispersion(p, [0.0, 3.0, 0.0], poly)
    a = np.sqrt(2.0)
    assert lam[-1].real == pytest.approx(3 * a, rel=1e-6)
    assert lam[0].real == pytest.approx(-3 * a, rel=1e-6)
    np.testing.assert_allclose(lam[1:-1], 0.0, atol=1e-7)


@settings(max_examples=60, deadline=None)
@given(equilibria(moving=False))
def test_oracle_agrees_at_rest(case):
    eos, p, k = case
    lam = _lam(eos, p, k).lambdas
    lo = oracle_dispersion(p, k, eos)
    assert np.max(np.abs(lo.imag)) <= 1e-8
    assert np.max(np.abs(np.sort(lo.real) - lam)) <= 1e-8 * max(np.max(np.abs(lam)), 1e-300)


@settings(max_examples=60, deadline=None)
@given(equilibria())
def test_oracle_moving_state_physical_modes(case):
    # the primitive linearisation puts the three w-constraint modes at 0, the
    # symmetric form at u.k; all other modes coincide
    eos, p, k = case
    uk = p.u @ k
    lam = _lam(eos, p, k).lambdas
    lo = oracle_dispersion(p, k, eos)
    assert np.max(np.abs(lo.imag)) <= 1e-8
    left = np.sort(np.concatenate([lam, np.zeros(3)]))
    right = np.sort(np.concatenate([lo.real, np.full(3, uk)]))
    assert np.max(np.abs(left - right)) <= 1e-8 * max(np.max(np.abs(lam)), 1.0)


def test_spinodal_state_raises_with_pivot_and_oracle_is_complex(vdw):
    p = PhysicalState.at_rest(1.0, vdw.entropy_at(1.0, 0.5), 0.1)
    with pytest.raises(NotPositiveDefiniteError) as info:
        _lam(vdw, p, [1.0, 0.0, 0.0])
    assert isinstance(info.value.pivot, int) and 0 <= info.value.pivot < 8
    lo = oracle_dispersion(p, [1.0, 0.0, 0.0], vdw)
    # lambda^2 = a^2 k^2 + c rho k^4 = -1 + 0.1
    assert np.max(np.abs(lo.imag)) == pytest.approx(np.sqrt(0.9), rel=1e-10)


def test_pencil_against_generalised_lapack_solver():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(6, 6))
    A = X @ X.T + 6 * np.eye(6)
    Y = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    M = Y + Y.conj().T
    lam, vecs = hermitian_pencil(M, A)
    ref = scipy.linalg.eigh(M, A, eigvals_only=True)
    np.testing.assert_allclose(lam, ref, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(M @ vecs, A @ vecs * lam, atol=1e-10)


def test_eigenvector_phase_convention(poly):
    p = PhysicalState.at_rest(1.0, 0.0, 0.1, (0.1, 0.0, 0.0))
    res = _lam(poly, p, [1.0, 0.5, 0.0])
    for col in res.vectors.T:
        nz = np.flatnonzero(np.abs(col) > 1e-12 * np.max(np.abs(col)))
        first = col[nz[0]]
        assert abs(first.imag) <= 1e-14 and first.real > 0


def test_rejects_bad_wave_vector(poly):
    p = PhysicalState.at_rest(1.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        _lam(poly, p, [1.0, 2.0])
    with pytest.raises(ValueError):
        assemble_C([np.nan, 0, 0], 1.0)


def test_thermo_state_guess_is_used(poly):
    p = PhysicalState.at_rest(1.0, 0.0, 0.1)
    v = to_conjugate(p, poly)
    a = dispersion_eigs(v, [1, 0, 0], poly, ThermoState(0.85, 0.05)).lambdas
    b = dispersion_eigs(v, [1, 0, 0], poly, p.thermo).lambdas
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_spd_is_sufficient_not_necessary(vdw):
    # between the isothermal and the isentropic spinodal A is indefinite, yet the
    # directly linearised system still has a real spectrum
    rho, T = 1.0, 0.8
    p = PhysicalState.at_rest(rho, vdw.entropy_at(rho, T), 0.1)
    assert vdw.spinodal_indicator(rho, T) < 0 < vdw.sound_speed_sq(p.thermo)
    with pytest.raises(NotPositiveDefiniteError):
        _lam(vdw, p, [0.3, 0.0, 0.0])
    for kn in (0.1, 0.3, 1.0, 3.0):
        assert np.max(np.abs(oracle_dispersion(p, [kn, 0.0, 0.0], vdw).imag)) <= 1e-12 * max(1.0, kn**2)


def test_zero_wave_vector(poly, vdw):
    p = PhysicalState.at_rest(1.1, 0.2, 0.3, (0.4, 0.0, 0.0))
    res = _lam(poly, p, [0.0, 0.0, 0.0])
    np.testing.assert_array_equal(res.lambdas, 0.0)
    A = assemble_A(to_conjugate(p, poly), poly, p.thermo)
    G = res.vectors.conj().T @ A @ res.vectors
    np.testing.assert_allclose(G - np.diag(np.diag(G)), 0.0, atol=1e-12)
    # the SPD hypothesis is still enforced when B + iC vanishes
    q = PhysicalState.at_rest(1.0, vdw.entropy_at(1.0, 0.5), 0.1)
    with pytest.raises(NotPositiveDefiniteError):
        _lam(vdw, q, [0.0, 0.0, 0.0])
