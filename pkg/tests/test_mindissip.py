import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import draw_params, random_universe
from qadditivity import dephasing as dp
from qadditivity import maptomo, mindissip, qmat
from qadditivity.errors import DimensionError, NotHPTA, SingularMap
from qadditivity.maptomo import Superoperator
from qadditivity.mindissip import (
    canonical_decompose,
    heat_rate,
    internal_energy,
    lindblad_superoperator,
    qubit_frequency_and_rate,
    reconstruction_residual,
    thermo_trace,
    work_increment,
)
from qadditivity.universe import ProductState, UniverseSpec

seeds = st.integers(0, 2**32 - 1)
SZ = qmat.pauli("z")


def random_lindblad(rng, d, n_jumps=None, negative=True):
    n_jumps = d * d - 1 if n_jumps is None else n_jumps
    h = qmat.random_hermitian(d, rng)
    jumps = rng.normal(size=(n_jumps, d, d)) + 1j * rng.normal(size=(n_jumps, d, d))
    rates = rng.uniform(-1 if negative else 0, 1, n_jumps)
    return h, rates, jumps


def test_unitary_generator():
    dec = canonical_decompose(lindblad_superoperator(SZ / 2, [], np.zeros((0, 2, 2))))
    np.testing.assert_allclose(dec.H_eff, SZ / 2, atol=1e-12)
    assert np.abs(dec.rates).max() < 1e-10


def test_pure_dephasing_generator():
    gamma = 0.37
    gen = Superoperator.from_function(lambda x: gamma * (SZ @ x @ SZ - x), 2, "generator")
    dec = canonical_decompose(gen)
    assert np.abs(dec.H_eff).max() < 1e-12
    np.testing.assert_allclose(dec.rates, [2 * gamma, 0, 0], atol=1e-12)
    jump = dec.jumps[0]
    assert np.abs(np.abs(jump) - np.abs(SZ / np.sqrt(2))).max() < 1e-12
    w, g = qubit_frequency_and_rate(dec)
    assert w == pytest.approx(0, abs=1e-12) and g == pytest.approx(gamma, abs=1e-12)


def test_two_qubit_generator_matches_closed_form(rng):
    for _ in range(5):
        p = draw_params(rng)
        t = rng.uniform(0, np.pi / abs(p.K))
        for side in "AB":
            if dp.g_abs2(p, side, t) < 1e-6:
                continue
            dec = canonical_decompose(maptomo.generator(p.universe(), p.product_state().environment(side), side, t))
            w, g = qubit_frequency_and_rate(dec)
            np.testing.assert_allclose(dec.H_eff, w / 2 * SZ, atol=1e-12)
            assert w == pytest.approx(dp.effective_frequency(p, side, t), rel=1e-6)
            assert g == pytest.approx(dp.dephasing_rate(p, side, t), rel=1e-6, abs=1e-9)


@given(seed=seeds, d=st.integers(2, 4))
def test_decomposition_invariants(seed, d):
    rng = np.random.default_rng(seed)
    gen = lindblad_superoperator(*random_lindblad(rng, d))
    dec = canonical_decompose(gen)
    assert abs(np.trace(dec.H_eff)) < 1e-10
    assert np.abs(np.einsum("kaa->k", dec.jumps)).max() < 1e-10
    gram = np.einsum("jba,kba->jk", dec.jumps.conj(), dec.jumps)
    assert np.abs(gram - np.eye(len(dec.jumps))).max() < 1e-10
    assert dec.rates.dtype.kind == "f"
    assert reconstruction_residual(gen, dec) < 1e-8


@given(seed=seeds)
def test_decomposition_recovers_traceless_input(seed):
    rng = np.random.default_rng(seed)
    h = qmat.random_hermitian(3, rng)
    h -= np.trace(h) / 3 * np.eye(3)
    gen = lindblad_superoperator(h, [0.4], [np.diag([1.0, -1.0, 0.0]) / np.sqrt(2)])
    dec = canonical_decompose(gen)
    np.testing.assert_allclose(dec.H_eff, h, atol=1e-12)
    assert dec.rates[0] == pytest.approx(0.4, abs=1e-12)


@given(seed=seeds)
def test_decomposition_idempotent(seed):
    rng = np.random.default_rng(seed)
    dec = canonical_decompose(lindblad_superoperator(*random_lindblad(rng, 2)))
    again = canonical_decompose(dec.to_superoperator())
    np.testing.assert_allclose(again.H_eff, dec.H_eff, atol=1e-9)
    np.testing.assert_allclose(again.rates, dec.rates, atol=1e-9)


def test_identity_shift_of_jump_is_undone(rng):
    h, rates, jumps = random_lindblad(rng, 2, 1, negative=False)
    jumps = jumps - np.einsum("kaa->k", jumps)[:, None, None] / 2 * np.eye(2)
    c = 0.3 - 0.8j
    # L -> L + c I leaves the generator invariant if H absorbs the difference
    shifted = jumps + c * np.eye(2)
    h_comp = h + rates[0] / 2j * (np.conj(c) * jumps[0] - c * qmat.dagger(jumps[0]))
    g1 = lindblad_superoperator(h, rates, jumps)
    g2 = lindblad_superoperator(h_comp, rates, shifted)
    assert np.abs(g1.matrix - g2.matrix).max() < 1e-12
    d1, d2 = canonical_decompose(g1), canonical_decompose(g2)
    np.testing.assert_allclose(d1.H_eff, d2.H_eff, atol=1e-12)
    np.testing.assert_allclose(d1.rates, d2.rates, atol=1e-12)


def test_degenerate_rates_are_deterministic():
    # depolarizing channel: three equal rates
    paulis = [qmat.pauli(a) / np.sqrt(2) for a in "xyz"]
    gen = lindblad_superoperator(np.zeros((2, 2)), [0.5] * 3, paulis)
    a, b = canonical_decompose(gen), canonical_decompose(gen)
    np.testing.assert_array_equal(a.jumps, b.jumps)
    np.testing.assert_allclose(a.rates, [0.5] * 3, atol=1e-12)
    assert reconstruction_residual(gen, a) < 1e-12


def test_negative_rates_reported():
    gen = Superoperator.from_function(lambda x: -0.2 * (SZ @ x @ SZ - x), 2, "generator")
    assert canonical_decompose(gen).rates[0] == pytest.approx(-0.4)


def test_not_hpta():
    bad = Superoperator.from_function(lambda x: 1j * x, 2, "generator")
    with pytest.raises(NotHPTA):
        canonical_decompose(bad)
    trace_loss = Superoperator.from_function(lambda x: -x, 2, "generator")
    with pytest.raises(NotHPTA):
        canonical_decompose(trace_loss)


def test_internal_energy_examples(fig1a):
    spec, state = fig1a.universe(), fig1a.product_state()
    dec = canonical_decompose(maptomo.generator(spec, state.rho_B0, "A", 0.0))
    assert internal_energy(state.rho_A0, dec) == pytest.approx(0.36, abs=1e-9)
    assert internal_energy(np.eye(2) / 2, dec) == pytest.approx(0, abs=1e-15)
    with pytest.raises(DimensionError):
        internal_energy(np.eye(3) / 3, dec)


def test_heat_rate_examples(rng):
    h, rates, jumps = random_lindblad(rng, 2)
    dec = canonical_decompose(lindblad_superoperator(h, rates, jumps))
    rho = qmat.random_density_matrix(2, rng)
    assert heat_rate(np.zeros((2, 2)), dec) == 0
    assert abs(heat_rate(-1j * (dec.H_eff @ rho - rho @ dec.H_eff), dec)) < 1e-14


def test_work_increment_rules():
    t = np.linspace(0, 1, 11)
    q, w = work_increment(t, np.full(11, 2.0), np.zeros(11))
    assert np.all(q == 0) and np.all(w == 0)
    u = np.sin(t)
    q, w = work_increment(t, u, np.zeros(11))
    np.testing.assert_allclose(w, u - u[0])
    with pytest.raises(ValueError):
        work_increment([0, 2, 1], [0, 0, 0], [0, 0, 0])


def test_heat_integration_second_order():
    errs = []
    for n in (21, 41):
        t = np.linspace(0, 2, n)
        q, _ = work_increment(t, np.zeros(n), np.cos(t))
        errs.append(abs(q[-1] - np.sin(2)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)


def test_thermo_trace_decoupled():
    p = dp.DephasingParams(1.0, 1.7, 0.0, 0.8, 0.3)
    recs = thermo_trace(p.universe(), p.product_state(), np.linspace(0, 5, 11))
    for r in recs:
        assert abs(r.delta) < 1e-9
        assert r.U_A == pytest.approx(dp.bare_energy(p, "A"), abs=1e-9)
        assert r.U_B == pytest.approx(dp.bare_energy(p, "B"), abs=1e-9)


def test_thermo_trace_in_phase_and_first_law(fig1a):
    period = dp.oscillation_period(fig1a)
    grid = np.linspace(0, 2 * period, 41)
    recs = thermo_trace(fig1a.universe(), fig1a.product_state(), grid)
    ua = np.array([r.U_A for r in recs])
    ub = np.array([r.U_B for r in recs])
    # in phase: both deviations share sign and peak together
    da, db = ua - ua[0], ub - ub[0]
    assert np.all(da * db >= -1e-18)
    assert np.argmax(da) == np.argmax(db)
    # period pi/(2K)
    np.testing.assert_allclose(ua[:21], ua[20:], atol=1e-8)
    assert recs[0].U_A + recs[0].U_B - dp.local_energy(fig1a) == pytest.approx(
        2 * dp.interaction_energy(fig1a), abs=1e-9
    )
    for side in "AB":
        u = np.array([getattr(r, f"U_{side}") for r in recs])
        qd = np.array([getattr(r, f"Qdot_{side}") for r in recs])
        w = np.array([getattr(r, f"W_{side}") for r in recs])
        q, _ = work_increment(grid, u, qd)
        assert np.abs((u - u[0]) - q - w).max() < 1e-8
        np.testing.assert_allclose(w, u - u[0], atol=1e-8)


def test_thermo_trace_singular_points():
    p = dp.DephasingParams(1.0, 1.0, 0.5, 0.8, 0.5)
    grid = [0.0, 1.0, np.pi / 2, 2.0]
    with pytest.raises(SingularMap) as err:
        thermo_trace(p.universe(), p.product_state(), grid)
    assert err.value.grid_index == 2
    recs = thermo_trace(p.universe(), p.product_state(), grid, on_singular="flag")
    assert [r.singular for r in recs] == [False, False, True, False]
    assert np.isnan(recs[2].U_A) and np.isfinite(recs[3].W_A)
    with pytest.raises(ValueError):
        thermo_trace(p.universe(), p.product_state(), grid, on_singular="ignore")


def test_thermo_trace_parallel_matches_serial(rng, monkeypatch):
    spec = random_universe(rng, 2, 3)
    state = ProductState(qmat.random_density_matrix(2, rng), qmat.random_density_matrix(3, rng))
    grid = np.linspace(0, 2, 9)
    serial = thermo_trace(spec, state, grid)
    parallel = thermo_trace(spec, state, grid, workers=4)
    monkeypatch.setenv("QADDITIVITY_THREADS", "3")
    from_env = thermo_trace(spec, state, grid)
    for a, b, c in zip(serial, parallel, from_env):
        assert (a.t, a.U_A, a.U_B, a.W_A, a.delta) == (b.t, b.U_A, b.U_B, b.W_A, b.delta)
        assert (a.U_A, a.Qdot_B) == (c.U_A, c.Qdot_B)


def test_general_universe_closure(rng):
    spec = UniverseSpec(2, 2, qmat.random_hermitian(4, rng))
    state = ProductState(qmat.random_density_matrix(2, rng), qmat.random_density_matrix(2, rng))
    grid = np.linspace(0, 0.5, 26)
    recs = thermo_trace(spec, state, grid)
    for side in "AB":
        u = np.array([getattr(r, f"U_{side}") for r in recs])
        qd = np.array([getattr(r, f"Qdot_{side}") for r in recs])
        w = np.array([getattr(r, f"W_{side}") for r in recs])
        q, _ = work_increment(grid, u, qd)
        assert np.abs(u - u[0] - q - w).max() < 1e-12
