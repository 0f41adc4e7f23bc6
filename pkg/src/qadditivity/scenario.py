"""Declarative scenarios: YAML config, thermo traces, figure data, scans.

Config grammar (YAML mapping; unknown keys are rejected)::

    name: fig1a                      # optional label
    model:                           # required
      type: dephasing                # or: matrices
      omega_A: 1.0                   # dephasing: omega_A, omega_B, K, p1_A, p1_B
      omega_B: 1.0                   #   coh_A, coh_B optional (number or [re, im])
      K: 0.5
      p1_A: 0.8
      p1_B: 0.6
      # matrices: d_A, d_B, H, rho_A0, rho_B0; entries number or [re, im]
    grid: {start: 0.0, stop: 6.28, points: 201}
    h: 1.0e-5                        # optional finite-difference step
    rules: [bare, minimal_dissipation]
    audit_points: 41                 # optional, grid size for additivity audits
    figure:                          # optional, dephasing only
      sets: [{p1_A: 0.8, p1_B: 0.6}]
    scan:                            # used by the `scan` verb, dephasing only
      axis: p1_B
      values: [0.6, 0.55, 0.5]
      points_per_period: 10000
    output: {dir: out}
    tolerances: {herm: 1.0e-10}      # overrides of qmat tolerances
    workers: 1                       # optional thread count
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__, additivity, dephasing, maptomo, mindissip, qmat
from .errors import ConfigError, NumericalFailure, SingularPopulation
from .universe import ProductState, UniverseSpec, evolve

ORACLE_RTOL = 1e-5
ORACLE_ATOL = 1e-8
RULES = {
    "bare": lambda h: additivity.rule_bare(),
    "minimal_dissipation": lambda h: additivity.rule_minimal_dissipation(h),
    "minimal_dissipation_traceless": lambda h: additivity.rule_minimal_dissipation(
        h, selection="traceless"
    ),
    "minimal_dissipation_zero_ground": lambda h: additivity.rule_minimal_dissipation(
        h, selection="zero_ground"
    ),
}
THERMO_COLUMNS = [
    "t", "U_A", "U_B", "Qdot_A", "Qdot_B", "W_A", "W_B", "delta",
    "omega_eff_A", "omega_eff_B", "gamma_A", "gamma_B", "det_phi_A", "det_phi_B",
    "U_A_exact", "U_B_exact", "omega_eff_A_exact", "omega_eff_B_exact",
    "gamma_A_exact", "gamma_B_exact", "flag",
]
HEADER = "# qadditivity {version}; energies, frequencies and rates in natural units (hbar = 1)\n"


# --------------------------------------------------------------------------
# Config parsing
# --------------------------------------------------------------------------


def _line_map(text: str) -> dict:
    """Map from key path (tuple) to 1-based line number."""
    lines = {}

    def walk(node, path):
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                walk(v, path + (k.value,))
                lines.setdefault(path + (k.value,), k.start_mark.line + 1)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return lines
    if root is not None:
        walk(root, ())
    return lines


class _Reader:
    """Typed access to the parsed tree, reporting the offending field and line."""

    def __init__(self, data, lines):
        self.data = data
        self.lines = lines

    def fail(self, path, msg):
        name = ".".join(str(p) for p in path) or None
        line = None
        for k in range(len(path), -1, -1):
            if tuple(path[:k]) in self.lines:
                line = self.lines[tuple(path[:k])]
                break
        raise ConfigError(msg, field=name, line=line)

    def get(self, path, default=KeyError):
        node = self.data
        for p in path:
            if isinstance(node, dict) and p in node:
                node = node[p]
            elif isinstance(node, list) and isinstance(p, int) and p < len(node):
                node = node[p]
            elif default is KeyError:
                self.fail(path, "missing required field")
            else:
                return default
        return node

    def mapping(self, path, allowed, default=KeyError):
        node = self.get(path, default)
        if node is default and default is not KeyError:
            return node
        if not isinstance(node, dict):
            self.fail(path, "expected a mapping")
        for key in node:
            if key not in allowed:
                self.fail(path + (key,), f"unknown key (allowed: {', '.join(sorted(allowed))})")
        return node

    def number(self, path, default=KeyError, lo=None, hi=None, positive=False):
        node = self.get(path, default)
        if node is None and default is None:
            return None
        if isinstance(node, bool) or not isinstance(node, (int, float)):
            self.fail(path, f"expected a number, got {node!r}")
        x = float(node)
        if not math.isfinite(x):
            self.fail(path, "must be finite")
        if lo is not None and x < lo or hi is not None and x > hi:
            self.fail(path, f"value {x!r} outside [{lo}, {hi}]")
        if positive and x <= 0:
            self.fail(path, "must be positive")
        return x

    def integer(self, path, default=KeyError, lo=None):
        node = self.get(path, default)
        if node is None and default is None:
            return None
        if isinstance(node, bool) or not isinstance(node, int):
            self.fail(path, f"expected an integer, got {node!r}")
        if lo is not None and node < lo:
            self.fail(path, f"must be >= {lo}")
        return int(node)

    def complex_(self, path, default=KeyError):
        node = self.get(path, default)
        if isinstance(node, list):
            if len(node) != 2:
                self.fail(path, "complex numbers are written [re, im]")
            return complex(self.number(path + (0,)), self.number(path + (1,)))
        return complex(self.number(path, default))

    def matrix(self, path, dim):
        node = self.get(path)
        if not isinstance(node, list) or len(node) != dim:
            self.fail(path, f"expected a {dim}x{dim} matrix (list of rows)")
        out = np.zeros((dim, dim), dtype=complex)
        for i, row in enumerate(node):
            if not isinstance(row, list) or len(row) != dim:
                self.fail(path + (i,), f"expected a row of {dim} entries")
            for j in range(dim):
                out[i, j] = self.complex_(path + (i, j))
        return out


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    points: int

    def times(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    name: str
    model: object  # DephasingParams or (UniverseSpec, ProductState)
    grid: Grid
    h: float | None = None
    rules: tuple[str, ...] = ()
    audit_points: int = 41
    figure_sets: tuple[tuple[float, float], ...] = ()
    scan_axis: str = "p1_B"
    scan_values: tuple[float, ...] = ()
    points_per_period: int = 10000
    output_dir: str = "out"
    tolerances: dict = field(default_factory=dict)
    workers: int | None = None
    source: str = ""

    @property
    def params(self) -> dephasing.DephasingParams | None:
        return self.model if isinstance(self.model, dephasing.DephasingParams) else None

    def universe(self) -> tuple[UniverseSpec, ProductState]:
        if self.params is not None:
            return self.params.universe(), self.params.product_state()
        return self.model

    def digest(self) -> str:
        return hashlib.sha256(self.source.encode()).hexdigest()


TOP_KEYS = {
    "name", "model", "grid", "h", "rules", "audit_points", "figure", "scan",
    "output", "tolerances", "workers",
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a YAML scenario; raises :class:`ConfigError`."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(
            f"malformed YAML: {getattr(exc, 'problem', exc)}",
            line=mark.line + 1 if mark else None,
        ) from None
    if data is None:
        data = {}
    r = _Reader(data, _line_map(text))
    if not isinstance(data, dict):
        r.fail((), "top level must be a mapping")
    r.mapping((), TOP_KEYS)

    model = _parse_model(r)
    g = r.mapping(("grid",), {"start", "stop", "points"})
    grid = Grid(
        start=r.number(("grid", "start"), 0.0, lo=0.0),
        stop=r.number(("grid", "stop")),
        points=r.integer(("grid", "points"), lo=2),
    )
    if grid.stop <= grid.start:
        r.fail(("grid", "stop"), "stop must exceed start")
    del g

    rules = r.get(("rules",), [])
    if not isinstance(rules, list):
        r.fail(("rules",), "expected a list of rule names")
    for i, name in enumerate(rules):
        if name not in RULES:
            r.fail(("rules", i), f"unknown rule {name!r} (known: {', '.join(RULES)})")

    sets = ()
    if r.get(("figure",), None) is not None:
        r.mapping(("figure",), {"sets"})
        raw = r.get(("figure", "sets"))
        if not isinstance(raw, list) or not raw:
            r.fail(("figure", "sets"), "expected a non-empty list")
        if not isinstance(model, dephasing.DephasingParams):
            r.fail(("figure",), "figure data needs a dephasing model")
        out = []
        for i, _ in enumerate(raw):
            r.mapping(("figure", "sets", i), {"p1_A", "p1_B"})
            out.append(
                (
                    r.number(("figure", "sets", i, "p1_A"), lo=0.0, hi=1.0),
                    r.number(("figure", "sets", i, "p1_B"), lo=0.0, hi=1.0),
                )
            )
        sets = tuple(out)

    scan_axis, scan_values, ppp = "p1_B", (), 10000
    if r.get(("scan",), None) is not None:
        r.mapping(("scan",), {"axis", "values", "points_per_period"})
        scan_axis = r.get(("scan", "axis"), "p1_B")
        if scan_axis not in ("p1_A", "p1_B"):
            r.fail(("scan", "axis"), "axis must be p1_A or p1_B")
        raw = r.get(("scan", "values"))
        if not isinstance(raw, list) or not raw:
            r.fail(("scan", "values"), "expected a non-empty list")
        scan_values = tuple(r.number(("scan", "values", i), lo=0.0, hi=1.0) for i in range(len(raw)))
        ppp = r.integer(("scan", "points_per_period"), 10000, lo=4)
        if not isinstance(model, dephasing.DephasingParams):
            r.fail(("scan",), "scans need a dephasing model")

    out_dir = "out"
    if r.get(("output",), None) is not None:
        r.mapping(("output",), {"dir"})
        out_dir = r.get(("output", "dir"), "out")
        if not isinstance(out_dir, str) or not out_dir:
            r.fail(("output", "dir"), "expected a directory path")

    tol = {}
    if r.get(("tolerances",), None) is not None:
        known = set(qmat.Tolerances.__dataclass_fields__)
        r.mapping(("tolerances",), known)
        tol = {k: r.number(("tolerances", k), positive=True) for k in r.get(("tolerances",))}

    name = r.get(("name",), "scenario")
    if not isinstance(name, str):
        r.fail(("name",), "expected a string")
    return ScenarioConfig(
        name=name,
        model=model,
        grid=grid,
        h=r.number(("h",), None, positive=True),
        rules=tuple(rules),
        audit_points=r.integer(("audit_points",), 41, lo=2),
        figure_sets=sets,
        scan_axis=scan_axis,
        scan_values=scan_values,
        points_per_period=ppp,
        output_dir=out_dir,
        tolerances=tol,
        workers=r.integer(("workers",), None, lo=1),
        source=text,
    )


def _parse_model(r: _Reader):
    kind = r.get(("model", "type"), "dephasing")
    if kind == "dephasing":
        keys = {"type", "omega_A", "omega_B", "K", "p1_A", "p1_B", "coh_A", "coh_B"}
        r.mapping(("model",), keys)
        kw = {k: r.number(("model", k)) for k in ("omega_A", "omega_B", "K")}
        for k in ("p1_A", "p1_B"):
            kw[k] = r.number(("model", k), lo=0.0, hi=1.0)
        for k in ("coh_A", "coh_B"):
            kw[k] = r.complex_(("model", k), 0.0)
        try:
            return dephasing.DephasingParams(**kw)
        except ValueError as exc:
            r.fail(("model",), str(exc))
    if kind == "matrices":
        r.mapping(("model",), {"type", "d_A", "d_B", "H", "rho_A0", "rho_B0"})
        d_a = r.integer(("model", "d_A"), lo=2)
        d_b = r.integer(("model", "d_B"), lo=2)
        mats = {}
        for key, dim in (("H", d_a * d_b), ("rho_A0", d_a), ("rho_B0", d_b)):
            mats[key] = r.matrix(("model", key), dim)
        try:
            spec = UniverseSpec(d_a, d_b, mats["H"])
        except ValueError as exc:
            r.fail(("model", "H"), str(exc))
        try:
            state = ProductState(mats["rho_A0"], mats["rho_B0"])
        except ValueError as exc:
            r.fail(("model",), str(exc))
        return spec, state
    r.fail(("model", "type"), f"unknown model type {kind!r} (dephasing or matrices)")


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


# --------------------------------------------------------------------------
# Formatting
# --------------------------------------------------------------------------


def fmt(x) -> str:
    """Deterministic 17-significant-digit rendering; NaN and None are empty."""
    if x is None or isinstance(x, str):
        return "" if x is None else x
    x = float(x)
    if math.isnan(x):
        return ""
    if x == 0.0:
        return "0"
    return format(x, ".17g")


def render_csv(columns, rows) -> str:
    out = [HEADER.format(version=__version__), ",".join(columns) + "\n"]
    for row in rows:
        out.append(",".join(fmt(v) for v in row) + "\n")
    return "".join(out)


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


# --------------------------------------------------------------------------
# Computations
# --------------------------------------------------------------------------


def _agrees(num, exact) -> bool:
    return abs(num - exact) <= ORACLE_ATOL + ORACLE_RTOL * abs(exact)


def thermo_rows(cfg: ScenarioConfig) -> tuple[list[list], list[str]]:
    """Thermo trace rows plus warnings (singular points, oracle disagreement)."""
    spec, state = cfg.universe()
    times = cfg.grid.times()
    records = mindissip.thermo_trace(
        spec, state, times, h=cfg.h, on_singular="flag", workers=cfg.workers
    )
    params = cfg.params
    qubits = spec.dims == (2, 2)
    rows, warnings = [], []
    for rec in records:
        row = {c: None for c in THERMO_COLUMNS}
        row["t"] = rec.t
        row["det_phi_A"] = rec.diag_A.det.real
        row["det_phi_B"] = rec.diag_B.det.real
        flags = []
        if rec.singular:
            flags.append("singular")
            warnings.append(f"singular grid point t={fmt(rec.t)} skipped")
        else:
            for k in ("U_A", "U_B", "Qdot_A", "Qdot_B", "W_A", "W_B", "delta"):
                row[k] = getattr(rec, k)
            if qubits:
                for side in ("A", "B"):
                    w, gam = mindissip.qubit_frequency_and_rate(getattr(rec, f"decomp_{side}"))
                    row[f"omega_eff_{side}"], row[f"gamma_{side}"] = w, gam
        if params is not None and not rec.singular:
            for side in ("A", "B"):
                try:
                    row[f"U_{side}_exact"] = dephasing.internal_energy_analytic(params, side, rec.t)
                    row[f"omega_eff_{side}_exact"] = dephasing.effective_frequency(params, side, rec.t)
                    row[f"gamma_{side}_exact"] = dephasing.dephasing_rate(params, side, rec.t)
                except NumericalFailure:
                    continue
            pairs = [
                (f"{q}_{s}", f"{q}_{s}_exact")
                for q in ("U", "omega_eff", "gamma")
                for s in ("A", "B")
            ]
            bad = [a for a, b in pairs if row[b] is not None and not _agrees(row[a], row[b])]
            if bad:
                flags.append("oracle_mismatch:" + "+".join(bad))
                warnings.append(f"oracle mismatch at t={fmt(rec.t)}: {', '.join(bad)}")
        row["flag"] = ";".join(flags)
        rows.append([row[c] for c in THERMO_COLUMNS])
    return rows, warnings


def energy_series(
    spec: UniverseSpec, state: ProductState, side: str, times, h: float | None = None
) -> np.ndarray:
    """Effective internal energy U_side(t) on a grid (NaN at singular times)."""
    gs = maptomo.generator_series(spec, state.environment(side), side, times, h)
    h_eff = mindissip.effective_hamiltonian_series(gs.generators, gs.dim)
    rho0 = state.joint()
    rho_t = np.array([evolve(spec, rho0, t) for t in gs.times])
    rho_side = qmat.partial_trace(rho_t, spec.dims, keep=side)
    return np.einsum("nab,nba->n", rho_side, h_eff).real


def figure_rows(cfg: ScenarioConfig) -> tuple[list[list], list[str]]:
    """(U_j(t) - <H_j>)/K, numeric and exact, for each parameter set.

    With K = 0 the curves are reported unnormalized (identically zero).
    """
    base = cfg.params
    sets = cfg.figure_sets or ((base.p1_A, base.p1_B),)
    times = cfg.grid.times()
    rows, warnings = [], []
    for idx, (p1_a, p1_b) in enumerate(sets):
        params = dephasing.DephasingParams(
            base.omega_A, base.omega_B, base.K, p1_a, p1_b, base.coh_A, base.coh_B
        )
        spec, state = params.universe(), params.product_state()
        norm = params.K if params.K != 0 else 1.0
        num = {
            s: (energy_series(spec, state, s, times, cfg.h) - dephasing.bare_energy(params, s)) / norm
            for s in ("A", "B")
        }
        for k, t in enumerate(times):
            exact, flags = {}, []
            for s in ("A", "B"):
                try:
                    u = dephasing.internal_energy_analytic(params, s, t)
                    exact[s] = (u - dephasing.bare_energy(params, s)) / norm
                except NumericalFailure:
                    exact[s] = None
                    flags.append(f"singular_{s}")
            for s in ("A", "B"):
                if exact[s] is not None and not (
                    np.isfinite(num[s][k]) and _agrees(num[s][k], exact[s])
                ):
                    flags.append(f"oracle_mismatch_{s}")
            if flags:
                warnings.append(f"figure set {idx} t={fmt(t)}: {';'.join(flags)}")
            rows.append(
                [idx, p1_a, p1_b, t, num["A"][k], num["B"][k], exact["A"], exact["B"], ";".join(flags)]
            )
    return rows, warnings


FIGURE_COLUMNS = ["set", "p1_A", "p1_B", "t", "dU_A_over_K", "dU_B_over_K",
                  "dU_A_over_K_exact", "dU_B_over_K_exact", "flag"]
SCAN_COLUMNS = ["epsilon", "p1_A", "p1_B", "peak_U_A", "peak_U_B", "peak_U_A_exact",
                "peak_U_B_exact", "peak_U_A_times_abs_epsilon", "flag"]


def dense_peaks(
    params: dephasing.DephasingParams, points_per_period: int, h=None, sides=("A", "B")
) -> dict:
    """max_t |U_j(t) - <H_j>| / |K| over one period, on the numeric pipeline."""
    period = dephasing.oscillation_period(params)
    times = np.linspace(0.0, period, points_per_period + 1)
    spec, state = params.universe(), params.product_state()
    out = {}
    for s in sides:
        dev = np.abs(energy_series(spec, state, s, times, h) - dephasing.bare_energy(params, s))
        out[s] = float(np.nanmax(dev)) / abs(params.K)
    return out


def scan_rows(cfg: ScenarioConfig) -> tuple[list[list], list[str]]:
    """Peak effective-energy deviations while one population approaches 1/2."""
    base = cfg.params
    if base.K == 0:
        raise ConfigError("scan needs K != 0", field="model.K")
    axis = cfg.scan_axis

    def one(value):
        kw = dict(
            omega_A=base.omega_A, omega_B=base.omega_B, K=base.K,
            p1_A=base.p1_A, p1_B=base.p1_B, coh_A=base.coh_A, coh_B=base.coh_B,
        )
        kw[axis] = value
        params = dephasing.DephasingParams(**kw)
        eps = value - 0.5
        watched = "A" if axis == "p1_B" else "B"
        exact, peaks, notes = {}, {}, []
        for s in ("A", "B"):
            try:
                exact[s] = dephasing.peak_amplitude(params, s)
            except SingularPopulation as exc:
                exact[s] = None
                notes.append(str(exc))
        wanted = [s for s in ("A", "B") if exact[s] is not None]
        peaks = dense_peaks(params, cfg.points_per_period, cfg.h, wanted) if wanted else {}
        row = [eps, params.p1_A, params.p1_B, peaks.get("A"), peaks.get("B"),
               exact["A"], exact["B"], None, ""]
        if exact[watched] is None:
            row[-1] = "SingularPopulation"
        else:
            row[-2] = peaks[watched] * abs(eps)
        warning = f"{axis}={fmt(value)}: " + "; ".join(notes) if notes else None
        return row, warning

    n = _workers(cfg.workers)
    if n > 1:
        with concurrent.futures.ThreadPoolExecutor(n) as pool:
            results = list(pool.map(one, cfg.scan_values))
    else:
        results = [one(v) for v in cfg.scan_values]
    return [r for r, _ in results], [w for _, w in results if w]


def _workers(workers):
    if workers is not None:
        return workers
    env = os.environ.get("QADDITIVITY_THREADS")
    return int(env) if env and env.isdigit() and int(env) > 0 else 1


def additivity_reports(cfg: ScenarioConfig) -> dict:
    spec, state = cfg.universe()
    times = np.linspace(cfg.grid.start, cfg.grid.stop, min(cfg.audit_points, cfg.grid.points))
    inst = additivity.Instance(state.joint(), spec.H, spec.dims, times)
    reports = []
    for name in cfg.rules:
        rep = additivity.audit(RULES[name](cfg.h), [inst])
        d = rep.to_dict()
        d["rule_key"] = name
        reports.append(d)
    return {"scenario": cfg.name, "audit_times": len(times), "reports": reports}


# --------------------------------------------------------------------------
# Drivers
# --------------------------------------------------------------------------


@dataclass
class RunManifest:
    config_sha256: str
    version: str
    outputs: dict
    warnings: list

    def to_text(self) -> str:
        return json.dumps(
            {
                "config_sha256": self.config_sha256,
                "version": self.version,
                "outputs": self.outputs,
                "warnings": self.warnings,
            },
            indent=2,
        ) + "\n"


def _write(out_dir: Path, files: dict, cfg: ScenarioConfig, warnings) -> RunManifest:
    out_dir.mkdir(parents=True, exist_ok=True)
    sums = {}
    for name, text in files.items():
        data = text.encode("utf-8")
        (out_dir / name).write_bytes(data)
        sums[name] = hashlib.sha256(data).hexdigest()
    manifest = RunManifest(cfg.digest(), __version__, sums, list(warnings))
    (out_dir / "manifest.json").write_bytes(manifest.to_text().encode("utf-8"))
    return manifest


def run(cfg: ScenarioConfig, out_dir=None) -> RunManifest:
    """Thermo trace, additivity reports and (dephasing models) figure data."""
    out_dir = Path(out_dir or cfg.output_dir)
    with qmat.override_tolerances(**cfg.tolerances):
        rows, warnings = thermo_rows(cfg)
        files = {"thermo.csv": render_csv(THERMO_COLUMNS, rows)}
        if cfg.params is not None:
            frows, fwarn = figure_rows(cfg)
            files["figure.csv"] = render_csv(FIGURE_COLUMNS, frows)
            warnings += fwarn
        if cfg.rules:
            files["additivity.json"] = json.dumps(additivity_reports(cfg), indent=2) + "\n"
    return _write(out_dir, files, cfg, warnings)


def scan(cfg: ScenarioConfig, out_dir=None) -> RunManifest:
    if cfg.params is None or not cfg.scan_values:
        raise ConfigError("scan needs a dephasing model and a scan section", field="scan")
    out_dir = Path(out_dir or cfg.output_dir)
    with qmat.override_tolerances(**cfg.tolerances):
        rows, warnings = scan_rows(cfg)
    return _write(out_dir, {"scan.csv": render_csv(SCAN_COLUMNS, rows)}, cfg, warnings)


# --------------------------------------------------------------------------
# Presets (illustrative parameter choices)
# --------------------------------------------------------------------------


def _dephasing_preset(name, p1_a, p1_b, k, periods=2.0, points=201, sets=None, rules=None,
                      scan=None):
    stop = periods * math.pi / (2 * abs(k)) if k else 2 * math.pi
    doc = {
        "name": name,
        "model": {"type": "dephasing", "omega_A": 1.0, "omega_B": 1.0, "K": k,
                  "p1_A": p1_a, "p1_B": p1_b},
        "grid": {"start": 0.0, "stop": float(fmt(stop)), "points": points},
        "rules": rules if rules is not None else ["bare", "minimal_dissipation",
                                                  "minimal_dissipation_traceless"],
        "audit_points": 21,
        "output": {"dir": f"out/{name}"},
    }
    if sets:
        doc["figure"] = {"sets": [{"p1_A": a, "p1_B": b} for a, b in sets]}
    if scan:
        doc["scan"] = scan
    return doc


PRESETS = {
    "fig1a": (
        "illustrative: in-phase oscillations, amplitude ratio 3",
        _dephasing_preset("fig1a", 0.8, 0.6, 0.5),
    ),
    "fig1b": (
        "illustrative: near-singular B population, amplitude ratio 225",
        _dephasing_preset("fig1b", 0.8, 0.52, 0.5),
    ),
    "fig1": (
        "illustrative: both figure parameter sets in one figure-data file",
        _dephasing_preset("fig1", 0.8, 0.6, 0.5, sets=[(0.8, 0.6), (0.8, 0.52)]),
    ),
    "decoupled": (
        "K = 0: effective energies equal the bare ones",
        _dephasing_preset("decoupled", 0.8, 0.6, 0.0),
    ),
    "scan_singularity": (
        "p1_B -> 1/2 with p1_A = 0.8, K = 1: peaks grow like 1/|epsilon|",
        _dephasing_preset(
            "scan_singularity", 0.8, 0.6, 1.0, rules=[],
            scan={"axis": "p1_B", "values": [0.6, 0.55, 0.525, 0.5125, 0.5],
                  "points_per_period": 10000},
        ),
    ),
}


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise KeyError(name)
    desc, doc = PRESETS[name]
    return f"# {name}: {desc}\n" + yaml.safe_dump(doc, sort_keys=False)
