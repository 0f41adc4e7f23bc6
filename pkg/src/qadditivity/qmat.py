"""Dense complex-matrix kernel.

Operators are plain ``numpy`` arrays of complex dtype.  Hermitian operators
and density matrices are validated on demand by :func:`check_hermitian` and
:func:`check_density`, not wrapped in classes.

Conventions used throughout the package:

* qubit basis ordered (ground, excited), so ``pauli("z") = diag(-1, +1)``;
* composite index ``|jk> = |j>_A |k>_B``, i.e. ``np.kron(a, b)``;
* hbar = 1.
"""

from __future__ import annotations

import contextlib
import dataclasses
import functools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalFailure

MAX_DIM = 32


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10
    trace: float = 1e-10
    pos: float = 1e-10
    unit: float = 1e-12


_active = Tolerances()


def tolerances() -> Tolerances:
    return _active


def configure_tolerances(**overrides) -> Tolerances:
    """Replace the active tolerances; returns the previous set."""
    global _active
    previous = _active
    _active = dataclasses.replace(_active, **overrides)
    return previous


@contextlib.contextmanager
def override_tolerances(**overrides):
    previous = configure_tolerances(**overrides)
    try:
        yield _active
    finally:
        configure_tolerances(**dataclasses.asdict(previous))


def dagger(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    return a.conj() if a.ndim < 2 else np.swapaxes(a.conj(), -1, -2)


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def is_hermitian(a: np.ndarray, tol: float | None = None) -> bool:
    tol = _active.herm if tol is None else tol
    return bool(np.max(np.abs(a - dagger(a)), initial=0.0) <= tol)


def check_hermitian(a, name: str = "operator") -> np.ndarray:
    m = as_matrix(a)
    if not is_hermitian(m):
        raise ValueError(f"{name} is not Hermitian")
    return m


def check_density(rho, name: str = "state") -> np.ndarray:
    """Validate a density matrix and return it as a complex array."""
    m = check_hermitian(rho, name)
    tr = np.trace(m).real
    if abs(tr - 1.0) > _active.trace:
        raise ValueError(f"{name} has trace {tr!r}, expected 1")
    if np.linalg.eigvalsh(m).min() < -_active.pos:
        raise ValueError(f"{name} is not positive semidefinite")
    return m


def pauli(axis: str) -> np.ndarray:
    """Pauli matrix with the excited state second: sigma_z = diag(-1, +1)."""
    if axis == "x":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if axis == "y":
        return np.array([[0, 1j], [-1j, 0]], dtype=complex)
    if axis == "z":
        return np.array([[-1, 0], [0, 1]], dtype=complex)
    raise ValueError(f"unknown Pauli axis {axis!r}")


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def partial_trace(rho: np.ndarray, dims: tuple[int, int], keep: str) -> np.ndarray:
    """Reduced operator of subsystem ``keep`` ("A" or "B")."""
    d_a, d_b = dims
    rho = np.asarray(rho)
    if rho.shape[-2:] != (d_a * d_b, d_a * d_b):
        raise DimensionError(
            f"operator shape {rho.shape[-2:]} does not match dims {dims}"
        )
    r = rho.reshape(rho.shape[:-2] + (d_a, d_b, d_a, d_b))
    if keep == "A":
        return np.einsum("...ijkj->...ik", r)
    if keep == "B":
        return np.einsum("...ijil->...jl", r)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def eigh_hermitian(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc


def propagator_from_eig(evals: np.ndarray, evecs: np.ndarray, t: float) -> np.ndarray:
    return (evecs * np.exp(-1j * evals * t)) @ dagger(evecs)


def expm_hermitian_propagator(h: np.ndarray, t: float) -> np.ndarray:
    """U = exp(-i h t) through the spectral decomposition of ``h``."""
    evals, evecs = eigh_hermitian(as_matrix(h))
    return propagator_from_eig(evals, evecs, t)


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Trace-orthonormal Hermitian basis, identity element first.

    ``elements`` has shape ``(d*d, d, d)``.
    """

    dim: int
    elements: np.ndarray

    def __len__(self):
        return self.elements.shape[0]

    def coordinates(self, x: np.ndarray) -> np.ndarray:
        """Coefficients ``tr(F_i x)``; works on stacks of operators."""
        return np.einsum("iab,...ba->...i", self.elements, x)

    def operator(self, coords: np.ndarray) -> np.ndarray:
        return np.einsum("...i,iab->...ab", coords, self.elements)

    def gram(self) -> np.ndarray:
        return np.einsum("iab,jba->ij", self.elements, self.elements)

    def vec_matrix(self) -> np.ndarray:
        """Unitary whose columns are the column-stacked basis elements."""
        return np.stack([f.reshape(-1, order="F") for f in self.elements], axis=1)


@functools.lru_cache(maxsize=None)
def build_operator_basis(d: int) -> OperatorBasis:
    """Normalized generalized Gell-Mann basis.

    Order: identity/sqrt(d); then for each pair j < k (lexicographic) the
    symmetric element (|j><k| + |k><j|)/sqrt(2); then for each pair the
    antisymmetric element i(|j><k| - |k><j|)/sqrt(2); then the diagonal
    elements l = 1..d-1, proportional to -sum_{m<l}|m><m| + l|l><l|.
    The signs are chosen so that d = 2 gives the Pauli matrices of
    :func:`pauli` divided by sqrt(2).
    """
    if d < 2:
        raise ValueError("operator basis needs d >= 2")
    if d > MAX_DIM:
        raise ValueError(f"dimension {d} exceeds the supported cap {MAX_DIM}")
    elems = [np.eye(d, dtype=complex) / np.sqrt(d)]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1 / np.sqrt(2)
        elems.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = 1j / np.sqrt(2)
        m[k, j] = -1j / np.sqrt(2)
        elems.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = -1.0
        diag[l] = l
        elems.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    arr = np.array(elems)
    arr.setflags(write=False)
    return OperatorBasis(d, arr)


def rotated_basis(basis: OperatorBasis, orthogonal: np.ndarray) -> OperatorBasis:
    """Mix the traceless elements of ``basis`` by a real orthogonal matrix.

    The result keeps the identity first and stays trace-orthonormal; it is
    a different valid basis for checking basis independence.
    """
    n = len(basis) - 1
    q = np.asarray(orthogonal, dtype=float)
    if q.shape != (n, n) or not np.allclose(q.T @ q, np.eye(n), atol=1e-12):
        raise ValueError("expected a real orthogonal matrix on the traceless sector")
    rest = np.einsum("ji,jab->iab", q, basis.elements[1:])
    arr = np.concatenate([basis.elements[:1], rest])
    arr.setflags(write=False)
    return OperatorBasis(basis.dim, arr)


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (g + dagger(g)) / 2
