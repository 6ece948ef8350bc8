import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from operadic_ho.errors import DomainError
from operadic_ho.oscillator import (
    OscParams,
    OscState,
    analytic_state,
    bracket_PQ,
    hamiltonian,
    integrate,
    poisson_bracket_fd,
    quasi_from_phase_point,
    quasi_partials,
    quasi_state,
)


def test_hamiltonian_values():
    par = OscParams(omega=1.0, p0=2.0)
    assert hamiltonian(OscState(0, 0.0, 2.0), par) == par.E == 2.0
    assert hamiltonian(OscState(0, 1.0, 0.0), OscParams(omega=2.0, p0=1.0)) == 2.0


def test_params_validation_and_energy():
    assert OscParams.from_energy(2.0).p0 == 2.0
    for bad in (dict(omega=0.0), dict(omega=-1.0), dict(p0=0.0), dict(p0=-2.0)):
        with pytest.raises(DomainError):
            OscParams(**bad)
    with pytest.raises(DomainError):
        OscParams.from_energy(0.0)


def test_analytic_state_examples():
    par = OscParams(omega=1.0, p0=2.0)
    s = analytic_state(0.0, par)
    assert (s.q, s.p) == (0.0, 2.0)
    s = analytic_state(math.pi / 2, par)
    assert s.q == pytest.approx(2.0, abs=1e-15)
    assert s.p == pytest.approx(0.0, abs=1e-15)
    par = OscParams(omega=3.0, p0=1.3)
    s = analytic_state(par.period, par)
    assert abs(s.q) < 1e-12 and abs(s.p - 1.3) < 1e-12


def test_analytic_state_matches_rk4():
    par = OscParams(omega=1.0, p0=2.0)
    steps = 2000
    traj = integrate(OscState(0, 0.0, 2.0), (math.pi / 2) / steps, steps, par)
    assert traj[-1].q == pytest.approx(2.0, abs=1e-12)
    assert traj[-1].p == pytest.approx(0.0, abs=1e-12)


def test_energy_conserved_along_exact_trajectory():
    par = OscParams(omega=1.7, p0=2.3)
    for t in np.linspace(0, 10, 101):
        assert hamiltonian(analytic_state(t, par), par) == pytest.approx(par.E, rel=1e-12)


def _period_error(par, steps):
    traj = integrate(OscState(0, 0.0, par.p0), par.period / steps, steps, par)
    end = traj[-1]
    return math.hypot(end.q, end.p - par.p0), traj


def test_rk4_closes_one_period_with_fourth_order():
    par = OscParams(omega=1.0, p0=2.0)
    err, traj = _period_error(par, 1000)
    assert len(traj) == 1001
    assert err < 1e-9
    drift = max(abs(hamiltonian(s, par) - par.E) for s in traj) / par.E
    assert drift < 1e-9
    err_half, _ = _period_error(par, 2000)
    assert err / err_half == pytest.approx(16.0, rel=0.05)


def test_integrate_rejects_bad_step():
    with pytest.raises(ValueError):
        integrate(OscState(0, 0, 1), 0.0, 10, OscParams())
    with pytest.raises(ValueError):
        integrate(OscState(0, 0, 1), 0.1, 0, OscParams())


def test_quasi_state_examples():
    par = OscParams(omega=1.0, p0=2.0)
    qs = quasi_state(0.0, par)
    assert (qs.Q, qs.P) == (0.0, math.sqrt(4.0))
    qs = quasi_state(math.pi, par)
    assert qs.Q == pytest.approx(2.0, abs=1e-15)
    assert qs.P == pytest.approx(0.0, abs=1e-15)
    s = analytic_state(math.pi, par)
    assert qs.P**2 - qs.Q**2 == pytest.approx(2 * s.p, abs=1e-14)


def test_quasi_state_constraints_on_random_times():
    par = OscParams(omega=1.3, p0=1.9)
    rng = np.random.default_rng(0)
    for t in rng.uniform(0, 4 * math.pi / par.omega, size=1000):
        s, qs = analytic_state(t, par), quasi_state(t, par)
        assert abs(qs.P**2 - qs.Q**2 - 2 * s.p) < 1e-10
        assert abs(qs.Q * qs.P - par.omega * s.q) < 1e-10
        assert abs(qs.P**2 + qs.Q**2 - 2 * math.sqrt(2 * hamiltonian(s, par))) < 1e-12


def test_half_frequency_rotation():
    par = OscParams(omega=1.3, p0=1.9)
    h = 1e-5
    for t in (0.1, 1.0, 2.7, 5.5):
        a, b = quasi_state(t + h, par), quasi_state(t - h, par)
        c = quasi_state(t, par)
        assert (a.Q - b.Q) / (2 * h) == pytest.approx(0.5 * par.omega * c.P, abs=1e-8)
        assert (a.P - b.P) / (2 * h) == pytest.approx(-0.5 * par.omega * c.Q, abs=1e-8)


def test_quasi_from_phase_point_examples():
    par = OscParams(omega=1.0, p0=2.0)
    qs = quasi_from_phase_point(0.0, 2.0, par)
    assert (qs.Q, qs.P) == (0.0, 2.0)
    qs = quasi_from_phase_point(0.0, -2.0, par)
    assert qs.Q == pytest.approx(2.0, abs=1e-15)
    assert qs.P == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        quasi_from_phase_point(0.0, 0.0, par)


@settings(max_examples=200)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.2, 3))
def test_quasi_from_phase_point_satisfies_constraints(q, p, w):
    assume(p * p + w * w * q * q > 1e-6)
    par = OscParams(omega=w, p0=1.0)
    qs = quasi_from_phase_point(q, p, par)
    assert abs(qs.P**2 - qs.Q**2 - 2 * p) < 1e-10
    assert abs(qs.Q * qs.P - w * q) < 1e-10
    assert qs.P >= 0


def test_pointwise_and_trajectory_quasi_agree_up_to_sign():
    par = OscParams(omega=1.0, p0=2.0)
    for t in np.linspace(0, 4 * math.pi, 97):
        s = analytic_state(t, par)
        if hamiltonian(s, par) <= 0:
            continue
        a, b = quasi_state(t, par), quasi_from_phase_point(s.q, s.p, par)
        assert a.Q**2 == pytest.approx(b.Q**2, abs=1e-10)
        assert a.P**2 == pytest.approx(b.P**2, abs=1e-10)
        assert a.Q * a.P == pytest.approx(b.Q * b.P, abs=1e-10)


def test_quasi_partials_against_finite_differences():
    par = OscParams(omega=1.4, p0=1.0)
    q, p, h = 0.3, 1.7, 1e-6
    qs, dq, dp = quasi_partials(q, p, par)
    f = lambda q_, p_: quasi_from_phase_point(q_, p_, par)  # noqa: E731
    assert dq.Q == pytest.approx((f(q + h, p).Q - f(q - h, p).Q) / (2 * h), abs=1e-8)
    assert dq.P == pytest.approx((f(q + h, p).P - f(q - h, p).P) / (2 * h), abs=1e-8)
    assert dp.Q == pytest.approx((f(q, p + h).Q - f(q, p - h).Q) / (2 * h), abs=1e-8)
    assert dp.P == pytest.approx((f(q, p + h).P - f(q, p - h).P) / (2 * h), abs=1e-8)


def test_canonical_bracket_orientation():
    at = OscState(0, 0.4, -0.9)
    assert poisson_bracket_fd(lambda q, p: p, lambda q, p: q, at) == pytest.approx(1.0, abs=1e-10)
    assert poisson_bracket_fd(lambda q, p: q, lambda q, p: p, at) == pytest.approx(-1.0, abs=1e-10)


def _P(par):
    return lambda q, p: quasi_from_phase_point(q, p, par).P


def _Q(par):
    return lambda q, p: quasi_from_phase_point(q, p, par).Q


def test_PQ_bracket_example():
    par = OscParams(omega=1.0, p0=1.0)
    at = OscState(0, 0.3, 1.7)
    got = poisson_bracket_fd(_P(par), _Q(par), at, h=1e-5)
    assert got == pytest.approx(bracket_PQ(at, par), abs=1e-6)
    assert poisson_bracket_fd(_P(par), _P(par), at) == 0.0
    assert poisson_bracket_fd(_Q(par), _Q(par), at) == 0.0


def test_bracket_step_must_be_positive():
    with pytest.raises(ValueError):
        poisson_bracket_fd(lambda q, p: q, lambda q, p: p, OscState(0, 1, 1), h=0.0)
