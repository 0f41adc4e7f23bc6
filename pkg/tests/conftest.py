import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qadditivity import additivity, qmat
from qadditivity.additivity import DomainCheck, EffectiveHamiltonianRule
from qadditivity.dephasing import DephasingParams
from qadditivity.universe import UniverseSpec, evolve, expectation

settings.register_profile(
    "repo", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fig1a():
    return DephasingParams(omega_A=1.0, omega_B=1.0, K=0.5, p1_A=0.8, p1_B=0.6)


def draw_population(rng, gap=0.02):
    while True:
        x = rng.uniform(0.05, 0.95)
        if abs(x - 0.5) > gap:
            return x


def draw_params(rng, coherences=True) -> DephasingParams:
    """Random commuting-model parameters in the acceptance ranges."""
    k = 0.0
    while k == 0.0:
        k = rng.uniform(-2, 2)
    p_a, p_b = draw_population(rng), draw_population(rng)
    coh = [0.0, 0.0]
    if coherences:
        for i, p in enumerate((p_a, p_b)):
            coh[i] = np.sqrt(p * (1 - p)) * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    return DephasingParams(
        rng.uniform(0.1, 5), rng.uniform(0.1, 5), k, p_a, p_b, coh[0], coh[1]
    )


def random_universe(rng, d_a=2, d_b=2, scale=1.0):
    return UniverseSpec(d_a, d_b, qmat.random_hermitian(d_a * d_b, rng, scale))


def positive_control_rule(selection=None) -> EffectiveHamiltonianRule:
    """Local parts plus an equal share of <H_I>(t) + h00 on each side.

    Constructed so that the effective energies always add up to <H>.
    """

    def domain(rho0, H, dims, t):
        if selection == "traceless" and abs(np.trace(H).real) > 1e-12:
            return DomainCheck(False, "tr H != 0")
        return DomainCheck(True)

    def rule(rho0, H, dims, t):
        s = additivity.split_hamiltonian(H, *dims, convention="traceless")
        rho_t = evolve(UniverseSpec(dims[0], dims[1], H), rho0, t)
        share = 0.5 * (expectation(rho_t, s.H_I) + s.h00)
        return s.H_A + share * np.eye(dims[0]), s.H_B + share * np.eye(dims[1])

    return EffectiveHamiltonianRule(
        name=f"control[{selection}]",
        domain=domain,
        rule=rule,
        selection=selection,
        shift_closed=selection is None,
    )
