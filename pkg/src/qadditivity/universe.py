"""Closed bipartite universe: exact evolution and reduced states."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmat
from .errors import DimensionError

SPLIT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class UniverseSpec:
    """Constant total Hamiltonian on ``C^d_A (x) C^d_B``.

    ``split`` is the optional model-supplied ``(H_A, H_B, H_I)`` with
    ``H = H_A (x) I + I (x) H_B + H_I``.
    """

    d_A: int
    d_B: int
    H: np.ndarray
    split: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
    _eig: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h = qmat.check_hermitian(self.H, "H")
        if h.shape[0] != self.d_A * self.d_B:
            raise DimensionError(
                f"H has dimension {h.shape[0]}, expected {self.d_A}*{self.d_B}"
            )
        object.__setattr__(self, "H", h)
        if self.split is not None:
            h_a, h_b, h_i = (qmat.check_hermitian(m) for m in self.split)
            recon = (
                qmat.tensor(h_a, np.eye(self.d_B))
                + qmat.tensor(np.eye(self.d_A), h_b)
                + h_i
            )
            if np.max(np.abs(recon - h)) > SPLIT_TOL:
                raise ValueError("split does not reconstruct H")
            object.__setattr__(self, "split", (h_a, h_b, h_i))
        object.__setattr__(self, "_eig", qmat.eigh_hermitian(h))

    @classmethod
    def from_split(cls, h_a, h_b, h_i) -> "UniverseSpec":
        h_a = np.asarray(h_a, dtype=complex)
        h_b = np.asarray(h_b, dtype=complex)
        d_a, d_b = h_a.shape[0], h_b.shape[0]
        h = qmat.tensor(h_a, np.eye(d_b)) + qmat.tensor(np.eye(d_a), h_b) + h_i
        return cls(d_a, d_b, h, (h_a, h_b, np.asarray(h_i, dtype=complex)))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.d_A, self.d_B)

    @property
    def dim(self) -> int:
        return self.d_A * self.d_B

    def propagator(self, t: float) -> np.ndarray:
        return qmat.propagator_from_eig(*self._eig, t)

    def shifted(self, alpha: float) -> "UniverseSpec":
        """Same universe with ``H -> H + alpha*I`` (split dropped)."""
        return UniverseSpec(self.d_A, self.d_B, self.H + alpha * np.eye(self.dim))


@dataclass(frozen=True, eq=False)
class ProductState:
    rho_A0: np.ndarray
    rho_B0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho_A0", qmat.check_density(self.rho_A0, "rho_A0"))
        object.__setattr__(self, "rho_B0", qmat.check_density(self.rho_B0, "rho_B0"))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.rho_A0.shape[0], self.rho_B0.shape[0])

    def joint(self) -> np.ndarray:
        return qmat.tensor(self.rho_A0, self.rho_B0)

    def factor(self, side: str) -> np.ndarray:
        return {"A": self.rho_A0, "B": self.rho_B0}[side]

    def environment(self, side: str) -> np.ndarray:
        """Initial state of the side complementary to ``side``."""
        return {"A": self.rho_B0, "B": self.rho_A0}[side]


def other_side(side: str) -> str:
    try:
        return {"A": "B", "B": "A"}[side]
    except KeyError:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}") from None


def evolve(spec: UniverseSpec, rho0: np.ndarray, t: float) -> np.ndarray:
    """rho(t) = U rho0 U^dagger with U = exp(-iHt)."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (spec.dim, spec.dim):
        raise DimensionError(f"state shape {rho0.shape} does not match universe dim {spec.dim}")
    u = spec.propagator(t)
    return u @ rho0 @ qmat.dagger(u)


def _joint(spec: UniverseSpec, rho0) -> np.ndarray:
    if isinstance(rho0, ProductState):
        if rho0.dims != spec.dims:
            raise DimensionError(f"product state dims {rho0.dims} != universe dims {spec.dims}")
        return rho0.joint()
    return np.asarray(rho0, dtype=complex)


def reduced(spec: UniverseSpec, rho0, t: float, side: str) -> np.ndarray:
    """Reduced state of ``side`` at time ``t``, via the full universe state."""
    return qmat.partial_trace(evolve(spec, _joint(spec, rho0), t), spec.dims, keep=side)


@dataclass(frozen=True)
class BareAverages:
    H_A: float
    H_B: float
    H_I: float
    H: float

    @property
    def H_L(self) -> float:
        return self.H_A + self.H_B


def expectation(rho: np.ndarray, op: np.ndarray) -> float:
    return float(np.einsum("ab,ba->", rho, op).real)


def bare_averages(spec: UniverseSpec, rho0, t: float = 0.0) -> BareAverages:
    """Averages of the split pieces of H, at ``t`` (default the initial state)."""
    if spec.split is None:
        raise ValueError("universe has no (H_A, H_B, H_I) split")
    rho = _joint(spec, rho0)
    if t != 0.0:
        rho = evolve(spec, rho, t)
    h_a, h_b, h_i = spec.split
    return BareAverages(
        H_A=expectation(rho, qmat.tensor(h_a, np.eye(spec.d_B))),
        H_B=expectation(rho, qmat.tensor(np.eye(spec.d_A), h_b)),
        H_I=expectation(rho, h_i),
        H=expectation(rho, spec.H),
    )
