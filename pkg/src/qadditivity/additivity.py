"""Effective-Hamiltonian rules and energy-additivity audits.

A rule maps ``(rho0, H, dims, t)`` to a pair of local operators
``(Ht_A, Ht_B)`` on an explicit, inspectable domain.  Three properties are
audited:

* weak additivity: ``<Ht_A(t)> + <Ht_B(t)>`` is constant in t;
* strong additivity by invariance (SAI): the domain is closed under
  ``H -> H + alpha*I`` and the sum equals ``<H>`` everywhere;
* strong additivity by selectivity (SAS): the domain admits no uniform shift
  and the sum equals ``<H>`` everywhere.

Averages are taken in ``rho(t) = exp(-iHt) rho0 exp(iHt)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import maptomo, qmat
from .errors import DomainError
from .mindissip import canonical_decompose
from .universe import UniverseSpec, evolve, expectation

PRODUCT_TOL = 1e-10
TRACE_ZERO_TOL = 1e-12
CONVENTIONS = ("traceless", "zero_ground", "raw")


# --------------------------------------------------------------------------
# Hamiltonian split
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HamiltonianSplit:
    """``H = H_L + H_I`` with ``H_L = H_A (x) I + I (x) H_B + offset * I``.

    ``h00 = tr H / (d_A d_B)``.  The convention decides how the identity
    component is shared: ``traceless`` keeps both local parts traceless and
    leaves ``offset = h00``; ``zero_ground`` shifts each local part to zero
    ground energy; ``raw`` uses the normalized partial traces of H for both
    local parts (identity counted twice, ``offset = -h00``).
    """

    H_L: np.ndarray
    H_I: np.ndarray
    h00: float
    H_A: np.ndarray
    H_B: np.ndarray
    offset: float
    convention: str


def split_hamiltonian(
    H,
    d_A: int,
    d_B: int,
    convention: str = "traceless",
    bases: tuple[qmat.OperatorBasis, qmat.OperatorBasis] | None = None,
) -> HamiltonianSplit:
    """Unique local/interaction decomposition of a bipartite Hamiltonian.

    H is projected on the product basis ``A_j (x) B_k`` built from two
    identity-first orthonormal local bases; the interaction part collects
    the terms with both ``j, k >= 1``.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    H = qmat.check_hermitian(H, "H")
    if H.shape[0] != d_A * d_B:
        raise ValueError(f"H dimension {H.shape[0]} does not match {d_A}*{d_B}")
    ba, bb = bases or (qmat.build_operator_basis(d_A), qmat.build_operator_basis(d_B))
    fa, fb = ba.elements, bb.elements
    coef = np.einsum("jab,kcd,bdac->jk", fa, fb, H.reshape(d_A, d_B, d_A, d_B))
    # Hermitian basis: coefficients are real
    coef = coef.real

    h00 = float(np.trace(H).real) / (d_A * d_B)
    loc_a = np.einsum("j,jab->ab", coef[1:, 0], fa[1:]) / np.sqrt(d_B)
    loc_b = np.einsum("k,kab->ab", coef[0, 1:], fb[1:]) / np.sqrt(d_A)
    h_int = np.einsum("jk,jab,kcd->acbd", coef[1:, 1:], fa[1:], fb[1:]).reshape(H.shape)

    eye_a, eye_b = np.eye(d_A), np.eye(d_B)
    if convention == "traceless":
        h_a, h_b, offset = loc_a, loc_b, h00
    elif convention == "zero_ground":
        ga = float(np.linalg.eigvalsh(loc_a).min())
        gb = float(np.linalg.eigvalsh(loc_b).min())
        h_a, h_b = loc_a - ga * eye_a, loc_b - gb * eye_b
        offset = h00 + ga + gb
    else:
        h_a, h_b, offset = loc_a + h00 * eye_a, loc_b + h00 * eye_b, -h00
    h_l = qmat.tensor(h_a, eye_b) + qmat.tensor(eye_a, h_b) + offset * np.eye(d_A * d_B)
    return HamiltonianSplit(h_l, h_int, h00, h_a, h_b, float(offset), convention)


# --------------------------------------------------------------------------
# Rules
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainCheck:
    inside: bool
    reason: str = ""

    def __bool__(self):
        return bool(self.inside)


IN = DomainCheck(True)


@dataclass(frozen=True)
class EffectiveHamiltonianRule:
    """A correspondence (rho0, H, t) -> (Ht_A, Ht_B) with explicit domain.

    ``selection`` names the identity-fixing convention the domain imposes
    on H (``None`` when the domain places no such restriction);
    ``shift_closed`` declares symbolically whether the domain is closed
    under ``H -> H + alpha*I`` (``None``: unknown, sample the predicate).
    """

    name: str
    domain: Callable[..., DomainCheck]
    rule: Callable[..., tuple[np.ndarray, np.ndarray]]
    selection: str | None = None
    shift_closed: bool | None = None

    def domain_predicate(self, rho0, H, dims, t) -> DomainCheck:
        return self.domain(rho0, H, dims, t)

    def evaluate(self, rho0, H, dims, t):
        check = self.domain(rho0, H, dims, t)
        if not check:
            raise DomainError(check.reason)
        return self.rule(rho0, H, dims, t)


def rule_bare(convention: str = "traceless") -> EffectiveHamiltonianRule:
    """Effective Hamiltonians equal to the bare local Hamiltonians."""

    def rule(rho0, H, dims, t):
        s = split_hamiltonian(H, *dims, convention=convention)
        return s.H_A, s.H_B

    return EffectiveHamiltonianRule(
        name=f"bare[{convention}]", domain=lambda *a: IN, rule=rule, shift_closed=True
    )


def product_factors(rho0, dims) -> tuple[np.ndarray, np.ndarray] | None:
    """Factors of ``rho0`` if it is a product state, else ``None``."""
    rho_a = qmat.partial_trace(rho0, dims, keep="A")
    rho_b = qmat.partial_trace(rho0, dims, keep="B")
    if np.max(np.abs(qmat.tensor(rho_a, rho_b) - rho0)) > PRODUCT_TOL:
        return None
    return rho_a, rho_b


def _selection_check(selection, H, dims) -> DomainCheck:
    if selection is None:
        return IN
    scale = max(1.0, float(np.max(np.abs(H))))
    if selection == "traceless":
        tr = float(np.trace(H).real)
        if abs(tr) > TRACE_ZERO_TOL * scale * H.shape[0]:
            return DomainCheck(False, f"tr H = {tr:.6g} != 0 (traceless selection)")
        return IN
    if selection == "zero_ground":
        off = split_hamiltonian(H, *dims, convention="zero_ground").offset
        if abs(off) > TRACE_ZERO_TOL * scale * H.shape[0]:
            return DomainCheck(
                False, f"H carries identity offset {off:.6g} beyond zero-ground local parts"
            )
        return IN
    raise ValueError(f"unknown selection {selection!r}")


def rule_minimal_dissipation(
    h: float | None = None, selection: str | None = None
) -> EffectiveHamiltonianRule:
    """Canonical Hamiltonians of the exact reduced generators of both sides.

    Domain: product initial states, both reduced maps invertible at t, and
    (optionally) an identity-fixing ``selection`` on H.
    """

    def domain(rho0, H, dims, t):
        rho0 = np.asarray(rho0, dtype=complex)
        if t < 0:
            return DomainCheck(False, "negative time")
        check = _selection_check(selection, np.asarray(H, dtype=complex), dims)
        if not check:
            return check
        factors = product_factors(rho0, dims)
        if factors is None:
            return DomainCheck(False, "initial state is not a product state")
        spec = UniverseSpec(dims[0], dims[1], H)
        for side, env in (("A", factors[1]), ("B", factors[0])):
            diag = maptomo.diagnostics(spec, env, side, t)
            if not diag.invertible:
                return DomainCheck(
                    False,
                    f"map of side {side} not invertible at t={t!r} "
                    f"(smallest singular value {diag.smallest_singular_value:.3e})",
                )
        return IN

    def rule(rho0, H, dims, t):
        rho_a, rho_b = product_factors(np.asarray(rho0, dtype=complex), dims)
        spec = UniverseSpec(dims[0], dims[1], H)
        h_a = canonical_decompose(maptomo.generator(spec, rho_b, "A", t, h), t).H_eff
        h_b = canonical_decompose(maptomo.generator(spec, rho_a, "B", t, h), t).H_eff
        return h_a, h_b

    name = "minimal_dissipation" + (f"[{selection}]" if selection else "")
    return EffectiveHamiltonianRule(
        name=name,
        domain=domain,
        rule=rule,
        selection=selection,
        shift_closed=selection is None,
    )


# --------------------------------------------------------------------------
# Audits
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Instance:
    """Initial universe state, constant Hamiltonian and a time grid."""

    rho0: np.ndarray
    H: np.ndarray
    dims: tuple[int, int]
    times: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rho0", qmat.check_density(self.rho0, "rho0"))
        object.__setattr__(self, "H", qmat.check_hermitian(self.H, "H"))
        object.__setattr__(self, "dims", tuple(self.dims))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))

    def shifted(self, alpha: float) -> "Instance":
        return Instance(self.rho0, self.H + alpha * np.eye(self.H.shape[0]), self.dims, self.times)

    def energy(self) -> float:
        return expectation(self.rho0, self.H)

    def energy_scale(self) -> float:
        evals = np.linalg.eigvalsh(self.H)
        spread = float(np.max(np.abs(evals - evals.mean())))
        return spread if spread > 0 else 1.0


@dataclass
class Verdict:
    status: str
    max_violation: float = 0.0
    residuals: list = field(default_factory=list)
    reason: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "max_violation": _num(self.max_violation),
            "reason": self.reason,
            "residuals": [[_num(t), _num(r)] for t, r in self.residuals],
            **{k: _jsonable(v) for k, v in self.details.items()},
        }


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (float, np.floating)):
        return _num(v)
    return v


def _effective_sum(rule, inst: Instance, t: float, spec: UniverseSpec | None = None) -> float:
    """<Ht_A(t)> + <Ht_B(t)> in the instantaneous state."""
    h_a, h_b = rule.evaluate(inst.rho0, inst.H, inst.dims, t)
    spec = spec or UniverseSpec(inst.dims[0], inst.dims[1], inst.H)
    rho_t = evolve(spec, inst.rho0, t)
    rho_a = qmat.partial_trace(rho_t, inst.dims, keep="A")
    rho_b = qmat.partial_trace(rho_t, inst.dims, keep="B")
    return expectation(rho_a, h_a) + expectation(rho_b, h_b)


def _outside(rule, inst: Instance, times) -> DomainCheck | None:
    for t in times:
        check = rule.domain_predicate(inst.rho0, inst.H, inst.dims, t)
        if not check:
            return DomainCheck(False, f"t={t!r}: {check.reason}")
    return None


def check_weak(rule: EffectiveHamiltonianRule, inst: Instance, tol: float = 1e-9) -> Verdict:
    """Weak additivity: the effective-energy sum never departs from its t=0 value."""
    times = inst.times if 0.0 in inst.times else (0.0,) + inst.times
    out = _outside(rule, inst, times)
    if out is not None:
        return Verdict("not_applicable", reason=f"outside_domain: {out.reason}")
    spec = UniverseSpec(inst.dims[0], inst.dims[1], inst.H)
    ref = _effective_sum(rule, inst, 0.0, spec)
    residuals = [(t, _effective_sum(rule, inst, t, spec) - ref) for t in inst.times]
    worst = max((abs(r) for _, r in residuals), default=0.0)
    return Verdict("pass" if worst <= tol else "fail", worst, residuals)


def default_shifts(inst: Instance) -> list[float]:
    scale = inst.energy_scale()
    return [s * f * scale for f in (1.0, 10.0, 0.1) for s in (1.0, -1.0)]


def _strong_residuals(rule, inst: Instance, alpha: float) -> list[tuple[float, float]]:
    shifted = inst.shifted(alpha) if alpha else inst
    spec = UniverseSpec(inst.dims[0], inst.dims[1], shifted.H)
    energy = shifted.energy()
    return [(t, _effective_sum(rule, shifted, t, spec) - energy) for t in inst.times]


def _shift_closed(rule, inst: Instance, shifts) -> DomainCheck:
    """Whether every sampled shift of an in-domain point stays in the domain."""
    if rule.shift_closed is not None:
        return DomainCheck(rule.shift_closed, "declared by rule")
    for alpha in shifts:
        for t in inst.times:
            if not rule.domain_predicate(inst.rho0, inst.H + alpha * np.eye(inst.H.shape[0]), inst.dims, t):
                return DomainCheck(False, f"shift alpha={alpha!r} leaves the domain at t={t!r}")
    return DomainCheck(True, "sampled shifts stay in the domain")


def check_sai(
    rule: EffectiveHamiltonianRule,
    inst: Instance,
    shifts: list[float] | None = None,
    tol: float = 1e-9,
) -> Verdict:
    """Strong additivity by invariance.

    ``details["shift_defect"]`` is ``max |r(alpha,t) - r(0,t) + alpha|``: zero
    for a rule whose outputs ignore uniform shifts of H.
    """
    shifts = default_shifts(inst) if shifts is None else list(shifts)
    out = _outside(rule, inst, inst.times)
    if out is not None:
        return Verdict("not_applicable", reason=f"outside_domain: {out.reason}")
    closed = _shift_closed(rule, inst, shifts)
    if not closed:
        return Verdict("not_applicable", reason=f"clause1: domain not shift-closed ({closed.reason})")

    base = _strong_residuals(rule, inst, 0.0)
    by_shift = {0.0: base}
    for alpha in shifts:
        by_shift[alpha] = _strong_residuals(rule, inst, alpha)
    worst = max(abs(r) for res in by_shift.values() for _, r in res)
    defect = max(
        abs(r - r0 + alpha)
        for alpha, res in by_shift.items()
        for (_, r), (_, r0) in zip(res, base)
    )
    return Verdict(
        "pass" if worst <= tol else "fail",
        worst,
        base,
        details={
            "shifts": shifts,
            "shift_defect": defect,
            "max_residual_by_shift": {
                repr(a): max(abs(r) for _, r in res) for a, res in by_shift.items()
            },
        },
    )


def check_sas(
    rule: EffectiveHamiltonianRule,
    inst: Instance,
    tol: float = 1e-9,
    shifts: list[float] | None = None,
) -> Verdict:
    """Strong additivity by selectivity."""
    if rule.selection is None and rule.shift_closed is not False:
        return Verdict("not_applicable", reason="clause1: rule declares no selection convention")
    out = _outside(rule, inst, inst.times)
    if out is not None:
        return Verdict("not_applicable", reason=f"outside_domain: {out.reason}")
    shifts = default_shifts(inst) if shifts is None else list(shifts)
    n = inst.H.shape[0]
    for alpha in shifts:
        for t in inst.times:
            if rule.domain_predicate(inst.rho0, inst.H + alpha * np.eye(n), inst.dims, t):
                return Verdict(
                    "not_applicable",
                    reason=f"clause1: shift alpha={alpha!r} stays in the domain at t={t!r}",
                )
    residuals = _strong_residuals(rule, inst, 0.0)
    worst = max((abs(r) for _, r in residuals), default=0.0)
    return Verdict(
        "pass" if worst <= tol else "fail",
        worst,
        residuals,
        details={"clause1": "pass", "shifts": shifts},
    )


def mismatch_trace(rule: EffectiveHamiltonianRule, inst: Instance) -> list[tuple[float, float]]:
    """Delta(t) = <H> - <Ht_A(t)> - <Ht_B(t)>; NaN outside the domain."""
    spec = UniverseSpec(inst.dims[0], inst.dims[1], inst.H)
    energy = inst.energy()
    out = []
    for t in inst.times:
        if rule.domain_predicate(inst.rho0, inst.H, inst.dims, t):
            out.append((t, energy - _effective_sum(rule, inst, t, spec)))
        else:
            out.append((t, float("nan")))
    return out


@dataclass
class AdditivityReport:
    rule: str
    instances: int
    weak: Verdict
    sai: Verdict
    sas: Verdict
    mismatch_trace: list
    per_instance: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "instances": self.instances,
            "weak": self.weak.to_dict(),
            "sai": self.sai.to_dict(),
            "sas": self.sas.to_dict(),
            "mismatch_trace": [[_num(t), _num(d)] for t, d in self.mismatch_trace],
        }

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


def _merge(verdicts: list[Verdict]) -> Verdict:
    """Combine per-instance verdicts.

    A clause-1 failure is a property of the domain and decides the whole
    audit; instances merely outside the domain are skipped.
    """
    for v in verdicts:
        if v.status == "not_applicable" and v.reason.startswith("clause1"):
            return v
    applicable = [v for v in verdicts if v.status != "not_applicable"]
    if not applicable:
        return verdicts[0] if verdicts else Verdict("not_applicable", reason="no instances")
    worst = max(applicable, key=lambda v: v.max_violation)
    status = "fail" if any(v.status == "fail" for v in applicable) else "pass"
    skipped = len(verdicts) - len(applicable)
    reason = f"{skipped} instance(s) outside domain skipped" if skipped else ""
    return Verdict(status, worst.max_violation, worst.residuals, reason, worst.details)


def audit(
    rule: EffectiveHamiltonianRule,
    instances: list[Instance],
    tol: float = 1e-9,
    shifts: list[float] | None = None,
) -> AdditivityReport:
    weak = [check_weak(rule, inst, tol) for inst in instances]
    sai = [check_sai(rule, inst, shifts, tol) for inst in instances]
    sas = [check_sas(rule, inst, tol, shifts) for inst in instances]
    trace = mismatch_trace(rule, instances[0]) if instances else []
    return AdditivityReport(
        rule=rule.name,
        instances=len(instances),
        weak=_merge(weak),
        sai=_merge(sai),
        sas=_merge(sas),
        mismatch_trace=trace,
        per_instance=list(zip(weak, sai, sas)),
    )
