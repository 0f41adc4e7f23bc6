"""Reduced dynamical maps, their time derivatives, and time-local generators.

A map ``Phi_t`` on a d-level side is stored as a d^2 x d^2 matrix in the
coordinates of :func:`qmat.build_operator_basis`:
``M[i, j] = tr(F_i Phi_t[F_j])``.  Because the basis is Hermitian, a
hermiticity-preserving map has a real matrix, and trace preservation reads
``M[0] = (1, 0, ..., 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmat
from .errors import DimensionError, SingularMap
from .universe import UniverseSpec, other_side

INVERSION_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class Superoperator:
    dim: int
    matrix: np.ndarray
    role: str = "map"

    @property
    def basis(self) -> qmat.OperatorBasis:
        return qmat.build_operator_basis(self.dim)

    @classmethod
    def from_function(cls, fn, dim: int, role: str = "map") -> "Superoperator":
        """Tabulate a linear operator-valued function on the operator basis."""
        basis = qmat.build_operator_basis(dim)
        images = np.array([fn(f) for f in basis.elements])
        return cls(dim, basis.coordinates(images).T, role)

    @classmethod
    def identity(cls, dim: int) -> "Superoperator":
        return cls(dim, np.eye(dim * dim, dtype=complex), "map")

    def apply(self, x: np.ndarray) -> np.ndarray:
        b = self.basis
        return b.operator(b.coordinates(np.asarray(x, dtype=complex)) @ self.matrix.T)

    def to_vec_form(self) -> np.ndarray:
        """Matrix acting on column-stacked operators."""
        t = self.basis.vec_matrix()
        return t @ self.matrix @ qmat.dagger(t)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix.imag)))

    def trace_row_defect(self) -> float:
        """Distance of the first row from what the role requires."""
        target = np.zeros(self.matrix.shape[1])
        if self.role == "map":
            target[0] = 1.0
        return float(np.max(np.abs(self.matrix[0] - target)))


@dataclass(frozen=True)
class MapDiagnostics:
    t: float
    det: complex
    smallest_singular_value: float
    largest_singular_value: float
    invertible: bool


def default_step(spec: UniverseSpec) -> float:
    """Finite-difference step 1e-5 * max(1, 1/||H_0||).

    ``H_0`` is the traceless part of H, so the step (and everything built on
    it) is unchanged by H -> H + alpha*I.
    """
    evals = spec._eig[0]
    norm = float(np.max(np.abs(evals - evals.mean())))
    return 1e-5 * max(1.0, 1.0 / norm) if norm > 0 else 1e-5


def _traceless_eig(spec: UniverseSpec):
    # a uniform shift of H only changes a global phase of U
    evals, evecs = spec._eig
    return evals - evals.mean(), evecs


def _side_dims(spec: UniverseSpec, side: str, env0: np.ndarray) -> int:
    env_side = other_side(side)
    d = spec.d_A if side == "A" else spec.d_B
    d_env = spec.d_B if side == "A" else spec.d_A
    if env0.shape != (d_env, d_env):
        raise DimensionError(
            f"environment state shape {env0.shape} does not match side {env_side} "
            f"dimension {d_env}"
        )
    return d


def _inputs(spec: UniverseSpec, env0: np.ndarray, side: str):
    """Basis inputs ``F_i (x) env0`` rotated into the eigenbasis of H.

    Returns ``(d, bohr, vecs, y)`` with Bohr frequencies ``E_a - E_b`` and
    ``y[i] = V^+ (F_i (x) env0) V``.
    """
    env0 = np.asarray(env0, dtype=complex)
    d = _side_dims(spec, side, env0)
    basis = qmat.build_operator_basis(d)
    if side == "A":
        joint = np.einsum("iab,cd->iacbd", basis.elements, env0)
    else:
        joint = np.einsum("cd,iab->icadb", env0, basis.elements)
    joint = joint.reshape(len(basis), spec.dim, spec.dim)
    evals, vecs = _traceless_eig(spec)
    bohr = evals[:, None] - evals[None, :]
    return d, bohr, vecs, qmat.dagger(vecs) @ joint @ vecs


def _map_matrix(spec, side, d, vecs, weighted) -> np.ndarray:
    """Map matrix from eigenbasis-weighted inputs (any leading batch axes)."""
    evolved = vecs @ weighted @ qmat.dagger(vecs)
    images = qmat.partial_trace(evolved, spec.dims, keep=side)
    return np.swapaxes(qmat.build_operator_basis(d).coordinates(images), -1, -2)


def _phase(bohr, t):
    return np.exp(-1j * np.multiply.outer(t, bohr))


def _stencil(bohr, t, h):
    """Finite-difference weights on each Bohr component of ``exp(-i w s)``.

    In the eigenbasis every stencil is a scalar factor times the phase at
    ``t``: central ``-i sin(w h)/h``, one-sided
    ``(4 expm1(-i w h) - expm1(-2 i w h)) / (2h)``.  Same differences as on
    the maps themselves, without the cancellation.
    """
    t = np.asarray(t, dtype=float)
    central = -1j * np.sin(bohr * h) / h
    one_sided = (4 * np.expm1(-1j * bohr * h) - np.expm1(-2j * bohr * h)) / (2 * h)
    weights = np.where((t >= h)[..., None, None], central, one_sided)
    return _phase(bohr, t) * weights


def build_map(spec: UniverseSpec, env0: np.ndarray, side: str, t: float) -> Superoperator:
    """Phi_t[X] = tr_env[U (X (x) env0) U^dagger], tabulated on the basis."""
    d, bohr, vecs, y = _inputs(spec, env0, side)
    return Superoperator(d, _map_matrix(spec, side, d, vecs, _phase(bohr, t) * y), "map")


def _check_step(spec, h):
    h = default_step(spec) if h is None else h
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    return h


def map_derivative(
    spec: UniverseSpec, env0: np.ndarray, side: str, t: float, h: float | None = None
) -> Superoperator:
    """Second-order finite-difference derivative of Phi_t.

    Central difference ``(Phi_{t+h} - Phi_{t-h}) / 2h`` for ``t >= h``,
    one-sided ``(-3 Phi_t + 4 Phi_{t+h} - Phi_{t+2h}) / 2h`` below.  The
    stencils are evaluated exactly in the eigenbasis of H (see
    :func:`_stencil`), so rounding noise is not amplified by 1/h.
    """
    h = _check_step(spec, h)
    d, bohr, vecs, y = _inputs(spec, env0, side)
    deriv = _map_matrix(spec, side, d, vecs, _stencil(bohr, t, h) * y)
    return Superoperator(d, deriv, "generator")


def _diagnose(t, m) -> tuple[MapDiagnostics, tuple]:
    u, s, vh = np.linalg.svd(m)
    diag = MapDiagnostics(
        t=t,
        det=complex(np.linalg.det(m)),
        smallest_singular_value=float(s[-1]),
        largest_singular_value=float(s[0]),
        invertible=bool(s[-1] > INVERSION_RTOL * s[0]),
    )
    return diag, (u, s, vh)


def diagnostics(spec: UniverseSpec, env0: np.ndarray, side: str, t: float) -> MapDiagnostics:
    return _diagnose(t, build_map(spec, env0, side, t).matrix)[0]


def generator_and_diagnostics(
    spec: UniverseSpec, env0: np.ndarray, side: str, t: float, h: float | None = None
) -> tuple[Superoperator | None, MapDiagnostics]:
    """Generator plus the map diagnostics at ``t``.

    Returns ``(None, diagnostics)`` at singular times instead of raising.
    """
    phi = build_map(spec, env0, side, t)
    diag, (u, s, vh) = _diagnose(t, phi.matrix)
    if not diag.invertible:
        return None, diag
    inv = (qmat.dagger(vh) / s) @ qmat.dagger(u)
    deriv = map_derivative(spec, env0, side, t, h)
    return Superoperator(phi.dim, deriv.matrix @ inv, "generator"), diag


@dataclass(frozen=True, eq=False)
class GeneratorSeries:
    """Generators and map diagnostics on a time grid, as stacked arrays.

    ``generators[k]`` is NaN where the map is not invertible.
    """

    dim: int
    times: np.ndarray
    maps: np.ndarray
    generators: np.ndarray
    det: np.ndarray
    smallest_singular_value: np.ndarray
    invertible: np.ndarray


def generator_series(
    spec: UniverseSpec, env0: np.ndarray, side: str, times, h: float | None = None
) -> GeneratorSeries:
    """Vectorized :func:`generator` over many times (same stencils and rules)."""
    times = np.asarray(times, dtype=float)
    h = _check_step(spec, h)
    d, bohr, vecs, y = _inputs(spec, env0, side)
    phi0 = _map_matrix(spec, side, d, vecs, _phase(bohr, times)[:, None] * y)
    deriv = _map_matrix(spec, side, d, vecs, _stencil(bohr, times, h)[:, None] * y)

    u, s, vh = np.linalg.svd(phi0)
    invertible = s[:, -1] > INVERSION_RTOL * s[:, 0]
    s_inv = np.where(invertible[:, None], 1.0 / np.where(s > 0, s, 1.0), np.nan)
    inv = (qmat.dagger(vh) * s_inv[:, None, :]) @ qmat.dagger(u)
    return GeneratorSeries(
        dim=d,
        times=times,
        maps=phi0,
        generators=deriv @ inv,
        det=np.linalg.det(phi0),
        smallest_singular_value=s[:, -1],
        invertible=invertible,
    )


def generator(
    spec: UniverseSpec, env0: np.ndarray, side: str, t: float, h: float | None = None
) -> Superoperator:
    """Time-local generator L_t = dPhi_t/dt o Phi_t^{-1}.

    Raises :class:`SingularMap` when Phi_t is not invertible; no
    regularization is attempted.
    """
    gen, diag = generator_and_diagnostics(spec, env0, side, t, h)
    if gen is None:
        raise SingularMap(t, diag.smallest_singular_value, side=side)
    return gen
