"""Canonical traceless-jump decomposition of HPTA generators and the
effective thermodynamic quantities built on it.

Any hermiticity-preserving superoperator can be written uniquely as
``L[X] = sum_ab c_ab F_a X F_b`` over the Hermitian operator basis, with
``c`` a Hermitian matrix.  With ``F_0`` proportional to the identity, the
block ``c[1:, 1:]`` is the Kossakowski matrix of the traceless sector and
the mixed column ``c[1:, 0]`` carries the Hamiltonian.  Diagonalizing the
Kossakowski matrix yields rates and trace-orthonormal traceless jumps.
"""

from __future__ import annotations

import concurrent.futures
import functools
import os
from dataclasses import dataclass, field

import numpy as np

from . import maptomo, qmat
from .errors import (
    DimensionError,
    KossakowskiDiagonalizationFailure,
    NotHPTA,
    SingularMap,
)
from .maptomo import MapDiagnostics, Superoperator
from .universe import ProductState, UniverseSpec, evolve, expectation

HERM_TOL = 1e-10
TRACE_TOL = 1e-8
DEGENERACY_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class CanonicalDecomposition:
    """``L = -i[H_eff, .] + sum_k rates[k] (L_k . L_k^+ - 1/2 {L_k^+ L_k, .})``."""

    H_eff: np.ndarray
    rates: np.ndarray
    jumps: np.ndarray
    kossakowski: np.ndarray
    t: float | None = None

    @property
    def dim(self) -> int:
        return self.H_eff.shape[0]

    def dissipator(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x, dtype=complex)
        for g, jump in zip(self.rates, self.jumps):
            jd = qmat.dagger(jump)
            jdj = jd @ jump
            out += g * (jump @ x @ jd - 0.5 * (jdj @ x + x @ jdj))
        return out

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return -1j * (self.H_eff @ x - x @ self.H_eff) + self.dissipator(x)

    def to_superoperator(self) -> Superoperator:
        return Superoperator.from_function(self.apply, self.dim, "generator")


def lindblad_superoperator(H, rates, jumps) -> Superoperator:
    """Superoperator of an arbitrary (not necessarily canonical) Lindblad form."""
    H = np.asarray(H, dtype=complex)
    d = CanonicalDecomposition(
        H, np.asarray(rates, dtype=float), np.asarray(jumps, dtype=complex), np.zeros((0, 0))
    )
    return d.to_superoperator()


@functools.lru_cache(maxsize=None)
def _coefficient_overlap(d: int) -> np.ndarray:
    f = qmat.build_operator_basis(d).elements
    fc = f.conj()
    out = np.einsum("pac,qeb,iab,jec->pqij", fc, fc, f, f, optimize=True)
    out.setflags(write=False)
    return out


def _coefficient_matrix(L: Superoperator) -> np.ndarray:
    # L[X]_{ab} = sum_ij F_i[a,b] M_ij tr(F_j X); project onto F_p X F_q.
    return np.einsum("pqij,ij->pq", _coefficient_overlap(L.dim), L.matrix)


def _effective_hamiltonian(c: np.ndarray, d: int) -> np.ndarray:
    """Traceless Hamiltonian part from (stacks of) Hermitian coefficient matrices."""
    f = qmat.build_operator_basis(d).elements
    drift = np.einsum("...k,kab->...ab", c[..., 1:, 0], f[1:]) / np.sqrt(d)
    h = 0.5j * (drift - qmat.dagger(drift))
    h = h - np.einsum("...aa->...", h)[..., None, None] / d * np.eye(d)
    return (h + qmat.dagger(h)) / 2


def effective_hamiltonian_series(generators: np.ndarray, d: int) -> np.ndarray:
    """Canonical Hamiltonians of a stack of generator matrices (NaN propagates)."""
    c = np.einsum("pqij,...ij->...pq", _coefficient_overlap(d), generators)
    c = (c + qmat.dagger(c)) / 2
    return _effective_hamiltonian(c, d)


def _canonical_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition with reproducible eigenvectors.

    Inside each degenerate cluster the eigenvectors are replaced by the
    Gram-Schmidt orthonormalization of the projected unit vectors e_0, e_1,
    ... (lexicographic choice); each vector's phase is fixed so that its
    first component of at least half the maximal magnitude is real positive.
    """
    try:
        evals, evecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise KossakowskiDiagonalizationFailure(str(exc)) from exc
    if not np.all(np.isfinite(evals)):
        raise KossakowskiDiagonalizationFailure("non-finite Kossakowski eigenvalues")
    n = len(evals)
    tol = DEGENERACY_RTOL * max(1.0, float(np.max(np.abs(evals), initial=0.0)))
    out = np.empty_like(evecs)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and evals[stop] - evals[stop - 1] <= tol:
            stop += 1
        v = evecs[:, start:stop]
        if stop - start > 1:
            proj = v @ qmat.dagger(v)
            chosen = []
            for k in range(n):
                w = proj[:, k].copy()
                for c in chosen:
                    w -= np.vdot(c, w) * c
                norm = np.linalg.norm(w)
                if norm > 1e-6:
                    chosen.append(w / norm)
                if len(chosen) == stop - start:
                    break
            if len(chosen) != stop - start:
                raise KossakowskiDiagonalizationFailure("degenerate cluster lost rank")
            v = np.stack(chosen, axis=1)
        for col in range(v.shape[1]):
            x = v[:, col]
            k = int(np.argmax(np.abs(x) >= 0.5 * np.max(np.abs(x))))
            v[:, col] = x * (abs(x[k]) / x[k])
        out[:, start:stop] = v
        start = stop
    order = np.argsort(-np.abs(evals), kind="stable")
    return evals[order], out[:, order]


def canonical_decompose(L: Superoperator, t: float | None = None) -> CanonicalDecomposition:
    """Unique decomposition of an HPTA generator with traceless jumps and a
    traceless effective Hamiltonian.

    Jumps are trace-orthonormal, so the rates carry the magnitudes.  Rates
    may be negative.
    """
    scale = max(1.0, float(np.max(np.abs(L.matrix))))
    herm_defect = L.hermiticity_defect()
    if herm_defect > HERM_TOL * scale:
        raise NotHPTA(f"superoperator is not hermiticity-preserving (defect {herm_defect:.2e})")
    trace_defect = float(np.max(np.abs(L.matrix[0])))
    if trace_defect > TRACE_TOL * scale:
        raise NotHPTA(f"superoperator is not trace-annihilating (defect {trace_defect:.2e})")

    d = L.dim
    c = _coefficient_matrix(L)
    c = (c + qmat.dagger(c)) / 2
    f = L.basis.elements
    H_eff = _effective_hamiltonian(c, d)

    kossakowski = c[1:, 1:]
    rates, vecs = _canonical_eigh(kossakowski)
    jumps = np.einsum("km,kab->mab", vecs, f[1:])
    return CanonicalDecomposition(H_eff, rates, jumps, kossakowski, t)


def reconstruction_residual(L: Superoperator, decomp: CanonicalDecomposition) -> float:
    return float(np.max(np.abs(decomp.to_superoperator().matrix - L.matrix)))


def qubit_frequency_and_rate(decomp: CanonicalDecomposition) -> tuple[float, float]:
    """(omega_eff, gamma) for a qubit generator written as
    ``-i[(omega_eff/2) sz, .] + gamma (sz . sz - .) + (other channels)``.

    ``gamma`` is half the z-z Kossakowski element.
    """
    if decomp.dim != 2:
        raise DimensionError("qubit coefficients need a two-level decomposition")
    omega = float(np.trace(decomp.H_eff @ qmat.pauli("z")).real)
    gamma = float(decomp.kossakowski[2, 2].real) / 2
    return omega, gamma


def internal_energy(rho: np.ndarray, decomp: CanonicalDecomposition) -> float:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != decomp.H_eff.shape:
        raise DimensionError(f"state shape {rho.shape} does not match H_eff {decomp.H_eff.shape}")
    return expectation(rho, decomp.H_eff)


def heat_rate(rho_dot: np.ndarray, decomp: CanonicalDecomposition) -> float:
    return expectation(np.asarray(rho_dot, dtype=complex), decomp.H_eff)


def work_increment(times, energies, heat_rates) -> tuple[np.ndarray, np.ndarray]:
    """Accumulated heat and work along a trace.

    Heat is the trapezoid integral of the heat rate; work closes the energy
    balance, ``W(t) = U(t) - U(t_0) - Q(t)``.
    """
    t = np.asarray(times, dtype=float)
    u = np.asarray(energies, dtype=float)
    q_dot = np.asarray(heat_rates, dtype=float)
    if not (t.shape == u.shape == q_dot.shape):
        raise ValueError("times, energies and heat rates must have equal length")
    if t.size and np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    if t.size == 0:
        return t.copy(), t.copy()
    q = np.concatenate([[0.0], np.cumsum(np.diff(t) * (q_dot[1:] + q_dot[:-1]) / 2)])
    return q, (u - u[0]) - q


@dataclass
class ThermoRecord:
    t: float
    U_A: float
    U_B: float
    Qdot_A: float
    Qdot_B: float
    W_A: float
    W_B: float
    delta: float
    diag_A: MapDiagnostics | None = None
    diag_B: MapDiagnostics | None = None
    decomp_A: CanonicalDecomposition | None = field(default=None, repr=False)
    decomp_B: CanonicalDecomposition | None = field(default=None, repr=False)
    singular: bool = False
    grid_index: int | None = None


def _thread_count(workers):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("QADDITIVITY_THREADS")
    return max(1, int(env)) if env else 1


def _point(spec, rho0, energy_total, t, h, index):
    joint = evolve(spec, rho0.joint(), t)
    values = {}
    singular = False
    for side in ("A", "B"):
        gen, diag = maptomo.generator_and_diagnostics(spec, rho0.environment(side), side, t, h)
        values[f"diag_{side}"] = diag
        if gen is None:
            singular = True
            values[f"sv_{side}"] = diag.smallest_singular_value
            continue
        rho = qmat.partial_trace(joint, spec.dims, keep=side)
        decomp = canonical_decompose(gen, t)
        values[f"decomp_{side}"] = decomp
        values[f"U_{side}"] = internal_energy(rho, decomp)
        values[f"Qdot_{side}"] = heat_rate(gen.apply(rho), decomp)
    nan = float("nan")
    rec = ThermoRecord(
        t=t,
        U_A=values.get("U_A", nan),
        U_B=values.get("U_B", nan),
        Qdot_A=values.get("Qdot_A", nan),
        Qdot_B=values.get("Qdot_B", nan),
        W_A=nan,
        W_B=nan,
        delta=nan,
        diag_A=values["diag_A"],
        diag_B=values["diag_B"],
        decomp_A=values.get("decomp_A"),
        decomp_B=values.get("decomp_B"),
        singular=singular,
        grid_index=index,
    )
    if not singular:
        rec.delta = energy_total - rec.U_A - rec.U_B
    return rec


def thermo_trace(
    spec: UniverseSpec,
    rho0: ProductState,
    grid,
    h: float | None = None,
    on_singular: str = "raise",
    workers: int | None = None,
) -> list[ThermoRecord]:
    """Effective energies, heat rates, accumulated work and the mismatch
    ``delta = <H> - U_A - U_B`` on a time grid.

    ``on_singular="raise"`` propagates :class:`SingularMap` with the grid
    index; ``"flag"`` keeps going and marks the record (its values are NaN,
    and heat integration bridges over it).
    """
    if on_singular not in ("raise", "flag"):
        raise ValueError("on_singular must be 'raise' or 'flag'")
    grid = [float(t) for t in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("time grid must be strictly increasing")
    energy_total = expectation(rho0.joint(), spec.H)

    n = _thread_count(workers)
    args = [(spec, rho0, energy_total, t, h, i) for i, t in enumerate(grid)]
    if n > 1:
        with concurrent.futures.ThreadPoolExecutor(n) as pool:
            records = list(pool.map(lambda a: _point(*a), args))
    else:
        records = [_point(*a) for a in args]

    for rec in records:
        if rec.singular and on_singular == "raise":
            side = "A" if not rec.diag_A.invertible else "B"
            sv = getattr(rec, f"diag_{side}").smallest_singular_value
            raise SingularMap(rec.t, sv, side=side, grid_index=rec.grid_index)

    good = [r for r in records if not r.singular]
    if good:
        times = [r.t for r in good]
        for side in ("A", "B"):
            _, work = work_increment(
                times,
                [getattr(r, f"U_{side}") for r in good],
                [getattr(r, f"Qdot_{side}") for r in good],
            )
            for r, w in zip(good, work):
                setattr(r, f"W_{side}", float(w))
    return records
