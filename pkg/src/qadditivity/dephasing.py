"""Closed-form oracle for two qubits coupled by ``K sz (x) sz``.

Local Hamiltonians are ``(omega_j/2) sz`` with ``sz = diag(-1, +1)``.  Every
quantity here is an explicit formula; nothing goes through the numerical
pipeline, so the module serves as an independent check of it.

``side`` names the subsystem a quantity belongs to; its modulation function
``g`` depends on the populations of the *other* side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmat
from .errors import SingularPopulation, SingularTime
from .universe import ProductState, UniverseSpec, other_side

G_TOL = 1e-8


@dataclass(frozen=True)
class DephasingParams:
    omega_A: float
    omega_B: float
    K: float
    p1_A: float
    p1_B: float
    coh_A: complex = 0.0
    coh_B: complex = 0.0

    def __post_init__(self):
        for side in ("A", "B"):
            p1 = self.p1(side)
            if not 0.0 <= p1 <= 1.0:
                raise ValueError(f"p1_{side}={p1} outside [0, 1]")
            coh = complex(self.coh(side))
            if abs(coh) ** 2 > p1 * (1 - p1) + 1e-15:
                raise ValueError(f"coh_{side} too large for a positive initial state")

    def p1(self, side: str) -> float:
        return self.p1_A if side == "A" else self.p1_B

    def p0(self, side: str) -> float:
        return 1.0 - self.p1(side)

    def omega(self, side: str) -> float:
        return self.omega_A if side == "A" else self.omega_B

    def coh(self, side: str) -> complex:
        return self.coh_A if side == "A" else self.coh_B

    def initial_state(self, side: str) -> np.ndarray:
        c = complex(self.coh(side))
        return np.array([[self.p0(side), c], [c.conjugate(), self.p1(side)]], dtype=complex)

    def product_state(self) -> ProductState:
        return ProductState(self.initial_state("A"), self.initial_state("B"))

    def universe(self) -> UniverseSpec:
        sz = qmat.pauli("z")
        return UniverseSpec.from_split(
            self.omega_A / 2 * sz, self.omega_B / 2 * sz, self.K * qmat.tensor(sz, sz)
        )


def _polarization(params: DephasingParams, side: str) -> float:
    """p1 - p0 of ``side``."""
    return 2 * params.p1(side) - 1


def g(params: DephasingParams, side: str, t: float) -> complex:
    env = other_side(side)
    k = params.K
    return params.p0(env) * np.exp(-2j * k * t) + params.p1(env) * np.exp(2j * k * t)


def g_dot(params: DephasingParams, side: str, t: float) -> complex:
    env = other_side(side)
    k = params.K
    return 2j * k * (-params.p0(env) * np.exp(-2j * k * t) + params.p1(env) * np.exp(2j * k * t))


def g_abs2(params: DephasingParams, side: str, t: float) -> float:
    """|g|^2 = 1 - 4 p0 p1 sin^2(2Kt), populations of the other side."""
    env = other_side(side)
    return 1.0 - 4 * params.p0(env) * params.p1(env) * math.sin(2 * params.K * t) ** 2


def _require_nonsingular(params, side, t):
    mod = math.sqrt(max(g_abs2(params, side, t), 0.0))
    if mod <= G_TOL:
        raise SingularTime(t, mod)
    return mod * mod


def reduced_state(params: DephasingParams, side: str, t: float) -> np.ndarray:
    coh = np.exp(1j * params.omega(side) * t) * g(params, side, t) * params.coh(side)
    return np.array(
        [[params.p0(side), coh], [np.conj(coh), params.p1(side)]], dtype=complex
    )


def full_state(params: DephasingParams, t: float) -> np.ndarray:
    """Universe state from the explicit phase table of the commuting model.

    Diagonal entries are constant; each upper-triangular entry rho_ij picks
    up the phase listed below (lower triangle by Hermiticity).
    """
    w_a, w_b, k = params.omega_A, params.omega_B, params.K
    w = (w_a + w_b) / 2
    delta = (w_b - w_a) / 2
    rho0 = qmat.tensor(params.initial_state("A"), params.initial_state("B"))
    exponents = {
        (0, 1): -1j * (2 * k - w_b),
        (0, 2): -1j * (2 * k - w_a),
        (0, 3): 2j * w,
        (1, 2): -2j * delta,
        (1, 3): 1j * (2 * k + w_a),
        (2, 3): 1j * (2 * k + w_b),
    }
    rho = rho0.copy()
    for (i, j), rate in exponents.items():
        rho[i, j] = rho0[i, j] * np.exp(rate * t)
        rho[j, i] = np.conj(rho[i, j])
    return rho


def effective_frequency(params: DephasingParams, side: str, t: float) -> float:
    """omega_eff = omega + 2K (p1 - p0)_env / |g|^2."""
    if params.K == 0:
        return float(params.omega(side))
    g2 = _require_nonsingular(params, side, t)
    return params.omega(side) + 2 * params.K * _polarization(params, other_side(side)) / g2


def dephasing_rate(params: DephasingParams, side: str, t: float) -> float:
    """gamma = -Re(g'/g)/2 = 2K p0 p1 sin(4Kt) / |g|^2 (other side's populations)."""
    if params.K == 0:
        return 0.0
    g2 = _require_nonsingular(params, side, t)
    env = other_side(side)
    k = params.K
    return 2 * k * params.p0(env) * params.p1(env) * math.sin(4 * k * t) / g2


def bare_energy(params: DephasingParams, side: str) -> float:
    """<H_j> = (omega_j/2)(p1 - p0)."""
    return params.omega(side) / 2 * _polarization(params, side)


def interaction_energy(params: DephasingParams) -> float:
    """<H_I> = K (p1 - p0)_A (p1 - p0)_B."""
    return params.K * _polarization(params, "A") * _polarization(params, "B")


def local_energy(params: DephasingParams) -> float:
    return bare_energy(params, "A") + bare_energy(params, "B")


def total_energy(params: DephasingParams) -> float:
    return local_energy(params) + interaction_energy(params)


def internal_energy_analytic(params: DephasingParams, side: str, t: float) -> float:
    """U_j(t) = <H_j> + <H_I> / |g_j(t)|^2."""
    if params.K == 0:
        return bare_energy(params, side)
    g2 = _require_nonsingular(params, side, t)
    return bare_energy(params, side) + interaction_energy(params) / g2


def energy_sum(params: DephasingParams, t: float) -> float:
    return internal_energy_analytic(params, "A", t) + internal_energy_analytic(params, "B", t)


def peak_amplitude(params: DephasingParams, side: str) -> float:
    """max_t |U_j(t) - <H_j>| / |K| = |p1_j - 1/2| / |p1_env - 1/2|."""
    env = other_side(side)
    denom = abs(params.p1(env) - 0.5)
    if denom == 0.0:
        raise SingularPopulation(f"p1 of side {env} equals 1/2; peak of U_{side} is unbounded")
    return abs(params.p1(side) - 0.5) / denom


def oscillation_period(params: DephasingParams) -> float:
    """Period pi/(2|K|) of |g|^2 and hence of the effective energies."""
    if params.K == 0:
        return math.inf
    return math.pi / (2 * abs(params.K))


def singular_times(params: DephasingParams, side: str, t_stop: float | None = None) -> list[float]:
    """Times in [0, t_stop) where g of ``side`` vanishes.

    Only possible when the other side has p1 = 1/2; then
    t* = (2m+1) pi / (4|K|).  ``t_stop`` defaults to pi/|K|, one period of g.
    """
    if params.K == 0 or params.p1(other_side(side)) != 0.5:
        return []
    k = abs(params.K)
    t_stop = math.pi / k if t_stop is None else t_stop
    out = []
    m = 0
    while (t := (2 * m + 1) * math.pi / (4 * k)) < t_stop:
        out.append(t)
        m += 1
    return out
