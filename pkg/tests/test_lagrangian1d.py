import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import curve_fit

from capillary import lagrangian1d as lg
from capillary.errors import NotPositiveDefiniteError, SimulationBlowUp
from capillary.finite_difference import PeriodicDerivative

from conftest import central_gradient, max_rel


def _wave_field(n=64, length=2 * np.pi, amp=1e-2, order=4, mode=1):
    z = length * np.arange(n) / n
    return lg.make_field(1.0 + amp * np.cos(2 * np.pi * mode * z / length), np.zeros(n), length, order)


def test_constant_matrices_exact():
    assert lg.B1.tolist() == [[0, 0, -1], [0, 0, 0], [-1, 0, 0]]
    assert lg.C1.tolist() == [[0, 0, 0], [0, 0, -1], [0, 1, 0]]
    assert not lg.B1.flags.writeable and not lg.C1.flags.writeable
    efun = lg.gamma_law()
    m1 = lg.assemble_lagrangian_matrices(-1.0, 0.0, efun, 1.0)
    m2 = lg.assemble_lagrangian_matrices(-0.5, 0.2, efun, 1.3)
    assert m1.B1.tobytes() == m2.B1.tobytes() and m1.C1.tobytes() == m2.C1.tobytes()


def test_quadratic_energy_legendre_closed_form():
    efun = lg.quadratic(1.0, 1.0)
    res = lg.legendre_pi(0.7, -0.4, efun, 0.5, 0.0)
    assert (res.v, res.w) == pytest.approx((0.7, -0.4), rel=1e-14)
    assert res.pi == pytest.approx(0.5 * 0.7**2 + 0.5 * 0.4**2, rel=1e-14)
    m = lg.assemble_lagrangian_matrices(0.7, -0.4, efun, 0.5)
    np.testing.assert_allclose(m.A, np.eye(3), rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(v=st.floats(0.4, 3.0), w=st.floats(-2.0, 2.0), gamma=st.floats(1.2, 3.0), c_L=st.floats(0.01, 2.0))
def test_legendre_round_trip_and_derivatives(v, w, gamma, c_L):
    efun = lg.gamma_law(gamma, c_L)
    sigma, r = (float(x) for x in efun.grad(v, w))
    res = lg.legendre_pi(sigma, r, efun, 1.1 * v, 0.0)
    assert max_rel([res.v, res.w], [v, w]) <= 1e-10
    x = np.array([sigma, r])
    fd = central_gradient(lambda y: lg.legendre_pi(y[0], y[1], efun, v, w).pi, x, 1e-5)
    assert max_rel(fd, [v, w]) <= 1e-6

    def recovered(y):
        back = lg.legendre_pi(y[0], y[1], efun, v, w)
        return np.array([back.v, back.w])

    assert max_rel(central_gradient(recovered, x, 1e-5), res.hess) <= 1e-5


@settings(max_examples=40, deadline=None)
@given(v=st.floats(0.4, 3.0), w=st.floats(-2.0, 2.0), u=st.floats(-2, 2))
def test_conjugate_energy_density_equals_primitive(v, w, u):
    efun = lg.gamma_law(2.0, 0.3)
    sigma, r = (float(x) for x in efun.grad(v, w))
    dens = lg.conjugate_energy_density(sigma, r, u, efun, v, w)
    assert dens == pytest.approx(0.5 * u * u + float(efun.e(v, w)), rel=1e-12)


def test_local_energy_law_with_bracket_flux():
    # E_t + (-sigma u + [r, u])_z = 0 on a smooth field, derivatives by FFT
    n, length = 64, 2 * np.pi
    z = length * np.arange(n) / n
    k = np.fft.fftfreq(n, d=length / n) * 2 * np.pi

    def dz(f):
        return np.fft.ifft(1j * k * np.fft.fft(f)).real

    efun = lg.gamma_law(2.0, 0.2)
    v = 1 + 0.1 * np.cos(z) + 0.05 * np.sin(2 * z)
    u = 0.2 * np.sin(z) - 0.1 * np.cos(3 * z)
    w = dz(v)
    sigma, r = efun.grad(v, w)
    v_t, w_t = dz(u), dz(dz(u))
    u_t = dz(sigma - dz(r))
    E_t = u * u_t + sigma * v_t + r * w_t
    flux = -sigma * u + (u * dz(r) - r * dz(u))
    assert np.max(np.abs(E_t + dz(flux))) <= 1e-11
    # with -sigma pi_sigma in place of +sigma pi_sigma the density changes by -2 sigma v,
    # which is not conserved by the same flux
    sigma_t = efun.d2_eps(v) * v_t
    E_alt_t = E_t - 2 * (sigma_t * v + sigma * v_t)
    assert np.max(np.abs(E_alt_t + dz(flux))) > 1e-3


def test_dispersion_closed_form_and_parity():
    efun = lg.gamma_law(2.0, 0.1)
    v_e = 1.3
    for k in (0.25, 1.0, 3.0):
        lam = lg.dispersion_1d(float(efun.d_eps(v_e)), 0.0, k, efun, v_e)
        target = float(efun.d2_eps(v_e)) * k**2 + 0.1 * k**4
        assert lam[2] ** 2 == pytest.approx(target, rel=1e-10)
        assert lam[0] == pytest.approx(-lam[2], rel=1e-12)
        assert abs(lam[1]) <= 1e-12 * lam[2]
    np.testing.assert_array_equal(lg.dispersion_1d(-1.0, 0.0, 0.0, efun, 1.0), 0.0)


def test_dispersion_needs_positive_definite_A():
    concave = lg.EnergyFunctional1D(
        eps=lambda v: -0.5 * v**2, d_eps=lambda v: -v, d2_eps=lambda v: -1.0 + 0 * v, c_L=0.5
    )
    with pytest.raises(NotPositiveDefiniteError):
        lg.dispersion_1d(-1.0, 0.0, 1.0, concave, 1.0)


def test_variational_pressure_uniform():
    efun = lg.gamma_law(2.0, 0.1)
    f = lg.make_field(np.full(16, 1.5), np.zeros(16), 1.0)
    np.testing.assert_allclose(lg.variational_pressure(f, efun), 1.5**-2.0, rtol=1e-15)


@pytest.mark.parametrize("order", [2, 4, 6])
def test_variational_pressure_manufactured_convergence(order):
    efun = lg.gamma_law(2.0, 0.3)
    length, amp = 3.0, 0.2
    errs = []
    for n in (16, 32) if order == 6 else (32, 64):
        z = length * np.arange(n) / n
        kz = 2 * np.pi / length
        v = 1 + amp * np.sin(kz * z)
        w = amp * kz * np.cos(kz * z)  # exact v_z
        exact = v**-2.0 - 0.3 * amp * kz**2 * np.sin(kz * z)  # -eps'(v) + c_L v_zz
        f = lg.make_field(v, np.zeros(n), length, order, w=w)
        errs.append(np.max(np.abs(lg.variational_pressure(f, efun) - exact)))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(order, abs=0.3)


def test_rhs_uniform_rest_is_zero_and_translation_equivariant():
    efun = lg.gamma_law()
    f = lg.make_field(np.full(32, 0.8), np.zeros(32), 2.0)
    r = lg.rhs(f, efun)
    assert np.all(r.v == 0) and np.all(r.w == 0) and np.all(r.u == 0)
    g = _wave_field()
    g = lg.make_field(g.v, 0.1 * np.sin(g.z), 2 * np.pi)
    for m in (1, 5, -7):
        a = lg.rhs(g.shifted(m), efun).stack()
        b = lg.rhs(g, efun).shifted(m).stack()
        np.testing.assert_array_equal(a, b)


def test_uniform_field_bit_stable_for_ten_thousand_steps():
    efun = lg.gamma_law()
    f0 = lg.make_field(np.full(32, 1.1), np.zeros(32), 2 * np.pi)
    f = f0
    for _ in range(10_000):
        f = lg.step_rk4(f, efun, 0.01)
    assert f.v.tobytes() == f0.v.tobytes()
    assert f.w.tobytes() == f0.w.tobytes() and f.u.tobytes() == f0.u.tobytes()


def test_total_energy_uniform_and_rotation_invariant():
    efun = lg.gamma_law(2.0, 0.1)
    f = lg.make_field(np.full(20, 2.0), np.zeros(20), 4.0)
    assert lg.total_energy(f, efun) == pytest.approx(20 * 0.2 * 0.5, rel=1e-14)
    g = _wave_field()
    assert lg.total_energy(g.shifted(9), efun) == pytest.approx(lg.total_energy(g, efun), rel=1e-15)


def test_standing_wave_frequency_matches_dispersion():
    efun = lg.gamma_law(2.0, 0.1)
    n, length, amp = 64, 2 * np.pi, 1e-4
    f = _wave_field(n, length, amp)
    k = 2 * np.pi / length
    lam = lg.dispersion_1d(float(efun.d_eps(1.0)), 0.0, k, efun, 1.0)[2]
    dt = lg.stable_dt(f, efun)
    ts, amps = [], []
    for _ in range(int(4 * 2 * np.pi / lam / (20 * dt))):
        f, log = lg.run(f, efun, dt, 20 * dt)
        ts.append(f.t)
        amps.append(2 * np.fft.rfft(f.v)[1].real / n)
    popt, _ = curve_fit(lambda t, a, om: a * np.cos(om * t), ts, amps, p0=(amp, lam))
    assert popt[1] == pytest.approx(lam, rel=1e-3)


def test_energy_drift_fourth_order_in_dt():
    efun = lg.gamma_law(2.0, 0.1)
    n = 64
    z = 2 * np.pi * np.arange(n) / n
    # a short-wave component makes the time error dominate rounding at this size
    f = lg.make_field(1 + 1e-2 * np.cos(z) + 1e-2 * np.sin(16 * z), np.zeros(n), 2 * np.pi)
    dt0 = lg.stable_dt(f, efun)
    T = 1.0
    drifts = []
    for m in (1, 2, 4):
        _, log = lg.run(f, efun, dt0 / m, T, audit_every=10**9)
        e = log.array("energy")
        drifts.append(abs(e[-1] - e[0]) / abs(e[0]))
    orders = np.log2(np.array(drifts[:-1]) / np.array(drifts[1:]))
    assert np.all(orders >= 3.5), (drifts, orders)


def test_run_records_audits_and_snapshots():
    efun = lg.gamma_law()
    f = _wave_field(32)
    dt = lg.stable_dt(f, efun)
    end, log = lg.run(f, efun, dt, 25 * dt, audit_every=10, snapshot_every=10)
    assert list(log.columns) == ["t", "energy", "constraint_norm", "min_v"]
    assert len(log.array("t")) == 4  # t=0, 10, 20, 25
    assert len(log.snapshots) == 4
    assert end.t == pytest.approx(25 * dt, rel=1e-14)
    assert np.max(log.array("constraint_norm")) <= 1e-12


def test_blow_up_reports_last_good_state():
    efun = lg.gamma_law()
    f = _wave_field(32, amp=0.5)
    with pytest.raises(SimulationBlowUp) as info:
        lg.run(f, efun, 50 * lg.stable_dt(f, efun), 100.0)
    last = info.value.last_good
    assert np.all(np.isfinite(last.stack())) and np.all(last.v > 0)
    assert info.value.time == last.t
    assert info.value.log.array("t")[-1] == last.t


def test_stable_dt_formula():
    efun = lg.gamma_law(2.0, 0.1)
    f = _wave_field(64)
    dz = f.dz
    a_L = np.sqrt(np.max(2.0 * f.v**-3.0))
    assert lg.stable_dt(f, efun, 0.5) == pytest.approx(0.5 * min(dz / a_L, dz**2 / (2 * np.sqrt(0.1))), rel=1e-14)


def test_compatible_initialisation():
    f = _wave_field(48, order=6)
    assert lg.constraint_norm(f) == 0.0
    np.testing.assert_array_equal(f.w, PeriodicDerivative(f.dz, 6)(f.v))
