import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import draw_params
from qadditivity import dephasing as dp
from qadditivity.errors import SingularPopulation, SingularTime
from qadditivity.universe import evolve, reduced

seeds = st.integers(0, 2**32 - 1)


def test_modulation_function(fig1a):
    assert dp.g(fig1a, "A", 0.0) == pytest.approx(1.0)
    for t in (0.3, 1.2, 4.0):
        assert abs(dp.g(fig1a, "A", t)) ** 2 == pytest.approx(dp.g_abs2(fig1a, "A", t), abs=1e-14)
    half = dp.DephasingParams(1.0, 1.0, 0.5, 0.8, 0.5)
    assert abs(dp.g(half, "A", np.pi / 2)) < 1e-15


def test_modulation_depends_on_other_side():
    p = dp.DephasingParams(1.0, 1.0, 0.5, 0.9, 0.6)
    assert dp.g_abs2(p, "A", 1.0) == pytest.approx(1 - 4 * 0.4 * 0.6 * math.sin(1.0) ** 2)


@given(seed=seeds, t=st.floats(0, 30))
def test_reduced_state_matches_universe(seed, t):
    p = draw_params(np.random.default_rng(seed))
    spec, state = p.universe(), p.product_state()
    for side in "AB":
        np.testing.assert_allclose(dp.reduced_state(p, side, t), reduced(spec, state, t, side), atol=1e-12)


@given(seed=seeds, t=st.floats(0, 30))
def test_full_state_matches_universe(seed, t):
    p = draw_params(np.random.default_rng(seed))
    np.testing.assert_allclose(
        dp.full_state(p, t), evolve(p.universe(), p.product_state().joint(), t), atol=1e-12
    )


def test_state_examples(rng):
    p = draw_params(rng)
    np.testing.assert_allclose(dp.full_state(p, 0.0), p.product_state().joint())
    np.testing.assert_allclose(dp.reduced_state(p, "B", 0.0), p.initial_state("B"))
    rho0 = p.product_state().joint()
    w = (p.omega_A + p.omega_B) / 2
    assert dp.full_state(p, 1.3)[0, 3] / rho0[0, 3] == pytest.approx(np.exp(2j * w * 1.3))
    for t in (0.5, 2.0):
        np.testing.assert_allclose(np.diag(dp.reduced_state(p, "A", t)), [p.p0("A"), p.p1("A")])
        assert abs(dp.reduced_state(p, "A", t)[0, 1]) == pytest.approx(
            math.sqrt(dp.g_abs2(p, "A", t)) * abs(p.coh_A)
        )


def test_effective_frequency_examples(fig1a):
    decoupled = dp.DephasingParams(1.3, 0.4, 0.0, 0.8, 0.5)
    assert dp.effective_frequency(decoupled, "A", 2.0) == 1.3
    assert dp.effective_frequency(fig1a, "A", 0.0) == pytest.approx(1.2)
    full = dp.DephasingParams(1.0, 1.0, 0.5, 0.3, 1.0)
    for t in (0.0, 0.7, 2.2):
        assert dp.effective_frequency(full, "A", t) == pytest.approx(2.0)


def test_dephasing_rate_examples(fig1a):
    assert dp.dephasing_rate(dp.DephasingParams(1, 1, 0.0, 0.8, 0.6), "A", 1.0) == 0.0
    assert dp.dephasing_rate(fig1a, "A", 0.0) == 0.0


def test_dephasing_rate_sign_changes_each_quarter_period():
    p = dp.DephasingParams(1.0, 1.0, 0.8, 0.7, 0.3)
    quarter = math.pi / (4 * p.K)
    signs = [np.sign(dp.dephasing_rate(p, "A", (m + 0.5) * quarter)) for m in range(6)]
    assert all(a == -b for a, b in zip(signs, signs[1:]))


@given(seed=seeds, t=st.floats(0, 10))
def test_closed_forms_match_log_derivative(seed, t):
    p = draw_params(np.random.default_rng(seed))
    for side in "AB":
        if dp.g_abs2(p, side, t) < 1e-2:
            continue
        h = 1e-4
        gdot = (dp.g(p, side, t + h) - dp.g(p, side, t - h)) / (2 * h)
        ratio = gdot / dp.g(p, side, t)
        scale = (2 * abs(p.K)) ** 3 * h * h / dp.g_abs2(p, side, t) + 1e-9
        assert abs(dp.effective_frequency(p, side, t) - p.omega(side) - ratio.imag) < 10 * scale
        assert abs(dp.dephasing_rate(p, side, t) + ratio.real / 2) < 10 * scale
        exact = dp.g_dot(p, side, t) / dp.g(p, side, t)
        assert dp.effective_frequency(p, side, t) == pytest.approx(p.omega(side) + exact.imag, abs=1e-12)
        assert dp.dephasing_rate(p, side, t) == pytest.approx(-exact.real / 2, abs=1e-12)


def test_singular_time_raises():
    p = dp.DephasingParams(1.0, 1.0, 0.5, 0.8, 0.5)
    for fn in (dp.effective_frequency, dp.dephasing_rate, dp.internal_energy_analytic):
        with pytest.raises(SingularTime):
            fn(p, "A", np.pi / 2)


def test_energies(fig1a):
    assert dp.bare_energy(fig1a, "A") == pytest.approx(0.3)
    assert dp.interaction_energy(fig1a) == pytest.approx(0.06)
    assert dp.internal_energy_analytic(fig1a, "A", 0.0) == pytest.approx(0.36)
    assert dp.energy_sum(fig1a, 0.0) == pytest.approx(dp.local_energy(fig1a) + 2 * 0.06)
    for t in (0.4, 1.9):
        assert dp.energy_sum(fig1a, t) == dp.internal_energy_analytic(
            fig1a, "A", t
        ) + dp.internal_energy_analytic(fig1a, "B", t)
        u = dp.effective_frequency(fig1a, "A", t) * (fig1a.p1_A - fig1a.p0("A")) / 2
        assert dp.internal_energy_analytic(fig1a, "A", t) == pytest.approx(u)
    decoupled = dp.DephasingParams(1.0, 2.0, 0.0, 0.8, 0.6)
    assert dp.internal_energy_analytic(decoupled, "B", 3.0) == dp.bare_energy(decoupled, "B")
    assert dp.energy_sum(decoupled, 3.0) == pytest.approx(dp.total_energy(decoupled))


def test_peak_amplitude(fig1a):
    assert dp.peak_amplitude(fig1a, "A") == pytest.approx(3.0)
    assert dp.peak_amplitude(dp.DephasingParams(1, 1, 1, 0.7, 0.7), "A") == pytest.approx(1.0)
    peaks = [dp.peak_amplitude(dp.DephasingParams(1, 1, 1, 0.8, 0.5 + e), "A") for e in (0.1, 0.01, 0.001)]
    assert peaks[0] < peaks[1] < peaks[2]
    with pytest.raises(SingularPopulation):
        dp.peak_amplitude(dp.DephasingParams(1, 1, 1, 0.8, 0.5), "A")


def test_peak_location_on_dense_grid():
    p = dp.DephasingParams(1.0, 1.0, 0.7, 0.8, 0.6)
    period = dp.oscillation_period(p)
    times = np.linspace(0, period, 10001)
    dev = [abs(dp.internal_energy_analytic(p, "A", t) - dp.bare_energy(p, "A")) for t in times]
    t_peak = times[int(np.argmax(dev))]
    assert math.sin(2 * p.K * t_peak) ** 2 == pytest.approx(1.0, abs=1e-6)
    assert max(dev) / p.K == pytest.approx(dp.peak_amplitude(p, "A"), rel=1e-9)


def test_singular_times():
    half = dp.DephasingParams(1.0, 1.0, 0.5, 0.8, 0.5)
    np.testing.assert_allclose(dp.singular_times(half, "A"), [np.pi / 2, 3 * np.pi / 2])
    assert len(dp.singular_times(half, "A", t_stop=10.0)) == 3
    assert dp.singular_times(half, "B") == []
    assert dp.singular_times(dp.DephasingParams(1, 1, 0.0, 0.8, 0.5), "A") == []
    tiny = dp.DephasingParams(1, 1, 1e-9, 0.8, 0.5)
    assert dp.singular_times(tiny, "A", t_stop=1e6) == []


def test_negative_coupling_uses_magnitude():
    p = dp.DephasingParams(1.0, 1.0, -0.5, 0.8, 0.5)
    assert dp.oscillation_period(p) == pytest.approx(np.pi)
    np.testing.assert_allclose(dp.singular_times(p, "A"), [np.pi / 2, 3 * np.pi / 2])
    assert dp.oscillation_period(dp.DephasingParams(1, 1, 0.0, 0.5, 0.5)) == math.inf


def test_parameter_validation():
    with pytest.raises(ValueError):
        dp.DephasingParams(1, 1, 1, 1.2, 0.5)
    with pytest.raises(ValueError):
        dp.DephasingParams(1, 1, 1, 0.5, 0.5, coh_A=0.6)
