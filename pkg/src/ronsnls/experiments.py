"""Experiment configs and runners behind the command-line interface.

Configs are flat key/value TOML files with dotted keys, e.g.::

    experiment = "Compare"
    pde.equation = "Mnls"
    ansatz.family = "GaussianFull"
    initial.A = 0.1
    initial.L = 15.0
    dns.dt = 0.025

Every key has a default in :data:`DEFAULTS` except ``experiment`` and the
``initial.<parameter>`` entries, which must name every parameter of the family.
"""

from __future__ import annotations

import hashlib
import json
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from . import ansatz as az
from . import closed_form as cf
from . import diagnostics as dg
from . import integrate as it
from . import master as ms
from . import pde
from . import rons
from .grid import PeriodicGrid


class Experiment(str, Enum):
    ROM_RUN = "RomRun"
    DNS_RUN = "DnsRun"
    COMPARE = "Compare"
    MASTER_EQ_CHECK = "MasterEqCheck"
    VELOCITY_SWEEP = "VelocitySweep"
    CONSERVATION_AUDIT = "ConservationAudit"


ROM_MODELS = ("rons", "lagrangian", "constrained")

DEFAULTS: dict[str, object] = {
    "description": "",
    "pde.equation": "NlsStationary",
    "ansatz.family": "GaussianTranslating",
    "grid.domain_over_pi": 256.0,
    "grid.num_points": 1024,
    "rom.models": ["rons"],
    "rom.closed_form": True,
    "rom.method": it.RK45_ADAPTIVE,
    "rom.rtol": 1e-10,
    "rom.atol": 1e-10,
    "rom.dt": 0.05,
    "rom.quadrature_points": 8192,
    "time.t_final": 100.0,
    "time.output_dt": 0.5,
    "dns.dt": 0.025,
    "dns.contour_points": 32,
    "dns.dealias": False,
    "dns.velocity_potential": True,
    "diagnostics.velocity_channel": "wave_center",
    "diagnostics.fit_window": [],
    "diagnostics.grow": 1.05,
    "diagnostics.decay": 0.95,
    "diagnostics.snapshot_times": [],
    "sweep.amplitudes": [],
    "check.states": 20,
    "check.seed": 0,
    "check.tolerance": 1e-8,
    "audit.dns_t_final": 100.0,
    "output.dir": "output",
}

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_EVENT = 3


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def flatten(tree: dict, prefix: str = "") -> dict[str, object]:
    out = {}
    for key, value in tree.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        else:
            out[name] = value
    return out


def parse_value(text: str):
    """Parse a ``--set`` value as a TOML value, falling back to a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def parse_override(item: str) -> tuple[str, object]:
    key, sep, value = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override {item!r} is not of the form KEY=VALUE")
    return key.strip(), parse_value(value.strip())


def _coerce(key: str, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{key}: expected a list, got {value!r}")
        return value
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string, got {value!r}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated flat configuration."""

    values: dict[str, object]
    source: str = ""

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def experiment(self) -> Experiment:
        return Experiment(self.values["experiment"])

    @property
    def family(self) -> az.AnsatzFamily:
        return az.get_family(self.values["ansatz.family"], len(self.initial_values()))

    def initial_values(self) -> list[float]:
        return [v for k, v in self.values.items() if k.startswith("initial.")]

    @property
    def initial_state(self) -> az.ParameterState:
        fam = self.family
        return fam.state([self.values[f"initial.{n}"] for n in fam.names])

    @property
    def equation(self) -> pde.Equation:
        return pde.Equation(self.values["pde.equation"])

    @property
    def rom_kind(self) -> pde.PdeKind:
        return pde.PdeKind(self.equation)

    @property
    def dns_kind(self) -> pde.PdeKind:
        return pde.PdeKind(self.equation, include_velocity_potential=self.values["dns.velocity_potential"])

    @property
    def grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.values["grid.domain_over_pi"] * np.pi, self.values["grid.num_points"])

    @property
    def rom_grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.values["grid.domain_over_pi"] * np.pi, self.values["rom.quadrature_points"])

    def ode_config(self, t_final: float | None = None) -> it.OdeSolverConfig:
        v = self.values
        return it.OdeSolverConfig(
            t_final=t_final or v["time.t_final"],
            method=v["rom.method"],
            dt=v["rom.dt"],
            rtol=v["rom.rtol"],
            atol=v["rom.atol"],
            output_dt=v["time.output_dt"],
        )

    def etd_config(self, t_final: float | None = None) -> it.EtdSolverConfig:
        v = self.values
        return it.EtdSolverConfig(
            t_final=t_final or v["time.t_final"],
            dt=v["dns.dt"],
            contour_points=v["dns.contour_points"],
            dealias=v["dns.dealias"],
            output_dt=v["time.output_dt"],
        )

    @property
    def fit_window(self):
        w = self.values["diagnostics.fit_window"]
        return tuple(w) if w else None

    def canonical(self) -> str:
        return json.dumps(self.values, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def build_config(raw: dict[str, object], source: str = "") -> ExperimentConfig:
    """Validate a flat key/value mapping and fill in defaults."""
    if "experiment" not in raw:
        raise ConfigError("experiment: missing required key")
    try:
        Experiment(raw["experiment"])
    except ValueError:
        choices = ", ".join(e.value for e in Experiment)
        raise ConfigError(f"experiment: {raw['experiment']!r} is not one of {choices}") from None

    values: dict[str, object] = {"experiment": raw["experiment"]}
    for key, default in DEFAULTS.items():
        values[key] = _coerce(key, raw[key], default) if key in raw else default
    for key, value in raw.items():
        if key == "experiment" or key in DEFAULTS:
            continue
        if not key.startswith("initial."):
            raise ConfigError(f"{key}: unknown key")
        values[key] = _coerce(key, value, 0.0)

    try:
        pde.Equation(values["pde.equation"])
    except ValueError:
        raise ConfigError(f"pde.equation: unknown equation {values['pde.equation']!r}") from None
    try:
        fid = az.FamilyId(values["ansatz.family"])
    except ValueError:
        raise ConfigError(f"ansatz.family: unknown family {values['ansatz.family']!r}") from None

    given = [k[len("initial."):] for k in values if k.startswith("initial.")]
    try:
        names = az.param_names(fid, len(given) if fid is az.FamilyId.POLY_EXPONENT else None)
    except ValueError as exc:
        raise ConfigError(f"initial: {exc}") from None
    missing = [n for n in names if n not in given]
    extra = [n for n in given if n not in names]
    if missing:
        raise ConfigError(f"initial.{missing[0]}: missing parameter of {fid.value}")
    if extra:
        raise ConfigError(f"initial.{extra[0]}: not a parameter of {fid.value}")
    # keep initial.* in the family's order
    init = {f"initial.{n}": values.pop(f"initial.{n}") for n in names}
    values.update(init)

    for key in ("grid.num_points", "rom.quadrature_points"):
        n = values[key]
        if n < 8 or n & (n - 1):
            raise ConfigError(f"{key}: must be a power of two >= 8, got {n}")
    for key in ("grid.domain_over_pi", "time.t_final", "time.output_dt", "dns.dt", "rom.dt",
                "rom.rtol", "rom.atol", "audit.dns_t_final", "check.tolerance"):
        if not values[key] > 0:
            raise ConfigError(f"{key}: must be positive, got {values[key]}")
    if values["dns.contour_points"] < 16 or values["dns.contour_points"] % 2:
        raise ConfigError("dns.contour_points: must be an even number >= 16")
    if values["rom.method"] not in (it.RK4_FIXED, it.RK45_ADAPTIVE):
        raise ConfigError(f"rom.method: must be {it.RK4_FIXED} or {it.RK45_ADAPTIVE}")
    for m in values["rom.models"]:
        if m not in ROM_MODELS:
            raise ConfigError(f"rom.models: unknown model {m!r}; choose from {', '.join(ROM_MODELS)}")
    nls = values["pde.equation"] != pde.Equation.MNLS.value
    if not nls and any(m in ("lagrangian", "constrained") for m in values["rom.models"]):
        raise ConfigError("rom.models: lagrangian and constrained models need an NLS equation")
    if values["experiment"] in (Experiment.MASTER_EQ_CHECK.value, Experiment.CONSERVATION_AUDIT.value) and not nls:
        raise ConfigError(f"pde.equation: {values['experiment']} needs an NLS equation")
    if values["experiment"] == Experiment.VELOCITY_SWEEP.value:
        amps = values["sweep.amplitudes"]
        if not amps or not all(isinstance(a, (int, float)) and a > 0 for a in amps):
            raise ConfigError("sweep.amplitudes: need a non-empty list of positive amplitudes")
        if "A" not in names:
            raise ConfigError("ansatz.family: sweeps need a family with an amplitude parameter A")
    if values["diagnostics.velocity_channel"] not in ("wave_center", "centroid"):
        raise ConfigError("diagnostics.velocity_channel: must be wave_center or centroid")
    w = values["diagnostics.fit_window"]
    if w and (len(w) != 2 or not w[0] < w[1]):
        raise ConfigError("diagnostics.fit_window: expected [t_a, t_b] with t_a < t_b")

    cfg = ExperimentConfig(values, source)
    try:
        cfg.family.check(cfg.initial_state.values)
    except az.AdmissibilityError as exc:
        raise ConfigError(f"initial: {exc}") from None
    return cfg


def bundled_config_dir() -> Path:
    return Path(str(resources.files("ronsnls") / "configs"))


def resolve_config_path(name: str) -> Path:
    """Accept a file path or the stem of a bundled config such as ``fig3``."""
    p = Path(name)
    if p.is_file():
        return p
    candidate = bundled_config_dir() / f"{name}.cfg"
    if candidate.is_file():
        return candidate
    raise ConfigError(f"config: no such file or bundled config {name!r}")


def load_config(path, overrides=()) -> ExperimentConfig:
    path = resolve_config_path(str(path))
    try:
        with open(path, "rb") as fh:
            raw = flatten(tomllib.load(fh))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config: {path}: {exc}") from None
    for item in overrides:
        key, value = parse_override(item) if isinstance(item, str) else item
        raw[key] = value
    return build_config(raw, str(path))


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    path: Path
    experiment: str
    description: str


def list_experiments() -> list[CatalogEntry]:
    out = []
    for path in sorted(bundled_config_dir().glob("*.cfg")):
        with open(path, "rb") as fh:
            raw = flatten(tomllib.load(fh))
        out.append(CatalogEntry(path.stem, path, raw.get("experiment", "?"), raw.get("description", "")))
    return out


# ---------------------------------------------------------------- models


def _closed_form_system(kind: pde.PdeKind, family: az.AnsatzFamily):
    for system, (equation, fid) in cf._PAIRING.items():
        if kind.equation is equation and family.family_id is fid:
            return system
    return None


def _density(equation: pde.Equation) -> ms.LagrangianDensity:
    if equation is pde.Equation.NLS_STATIONARY:
        return ms.NLS_STATIONARY_H
    if equation is pde.Equation.NLS_COMOVING:
        return ms.NLS_COMOVING_H
    raise ValueError(f"{equation.value} has no Lagrangian density")


def rom_vector_field(cfg: ExperimentConfig, model: str):
    """Return ``q -> qdot`` for one of :data:`ROM_MODELS`."""
    kind, family = cfg.rom_kind, cfg.family
    if model == "rons":
        system = _closed_form_system(kind, family) if cfg["rom.closed_form"] else None
        if system is not None:
            return lambda q: cf.closed_form_rhs(system, q)
        return rons.rons_vector_field(kind, family, cfg.rom_grid)
    grid = cfg.rom_grid
    if model == "lagrangian":
        density = _density(kind.equation)
        return lambda q: ms.solve_imag_part(ms.assemble_master(density, family, q, grid, check_tail=False)).qdot
    if model == "constrained":
        cons = rons.nls_conserved_quantities(family, grid)
        return lambda q: rons.constrained_rons_rhs(rons.assemble(kind, family, q, grid, check_tail=False), cons).qdot
    raise ValueError(f"unknown ROM model {model!r}")


def run_rom(cfg: ExperimentConfig, model: str, t_final: float | None = None) -> it.RomTrajectory:
    return it.integrate_ode(rom_vector_field(cfg, model), cfg.initial_state, cfg.ode_config(t_final), cfg.family)


def run_dns(cfg: ExperimentConfig, t_final: float | None = None) -> it.FieldTrajectory:
    grid = cfg.grid
    u0 = cfg.family.evaluate(cfg.initial_state.values, grid)
    return it.integrate_etd(cfg.dns_kind, grid, u0, cfg.etd_config(t_final))


# ---------------------------------------------------------------- outputs


@dataclass
class RunResult:
    status: int
    outputs: list[Path]
    summary: str
    events: list[str]


class _Outputs:
    def __init__(self, directory: Path):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[Path] = []
        self.events: list[str] = []

    def path(self, name: str) -> Path:
        p = self.dir / name
        self.files.append(p)
        return p

    def text(self, name: str, content: str) -> None:
        self.path(name).write_text(content)

    def event(self, label: str, event: str | None, message: str) -> None:
        if event is not None:
            self.events.append(f"{label}: {event}: {message}")


def _snapshot_times(cfg: ExperimentConfig) -> list[float]:
    times = cfg["diagnostics.snapshot_times"]
    if times:
        return [float(t) for t in times]
    T = cfg["time.t_final"]
    return [0.0, 0.5 * T, T]


def _write_envelopes(path: Path, grid: PeriodicGrid, snapshots: dict[float, np.ndarray]) -> None:
    times = sorted(snapshots)
    with open(path, "w") as fh:
        fh.write(",".join(["x"] + [f"abs_u_t{t:.17g}" for t in times]) + "\n")
        for i, x in enumerate(grid.points):
            row = [f"{x:.17g}"] + [f"{abs(snapshots[t][i]):.17g}" for t in times]
            fh.write(",".join(row) + "\n")


def _dns_outputs(cfg, out: _Outputs) -> tuple[it.FieldTrajectory, dg.ObservableSeries]:
    traj = run_dns(cfg)
    out.event("dns", traj.event, traj.message)
    series = dg.ObservableSeries.from_fields(traj, _snapshot_times(cfg))
    series.to_csv(out.path("dns_observables.csv"))
    _write_envelopes(out.path("dns_envelopes.csv"), traj.grid, series.snapshots)
    return traj, series


def _rom_outputs(cfg, model, out: _Outputs) -> tuple[it.RomTrajectory, dg.ObservableSeries]:
    traj = run_rom(cfg, model)
    out.event(f"rom.{model}", traj.event, traj.message)
    traj.to_csv(out.path(f"rom_{model}.csv"))
    series = dg.ObservableSeries.from_rom(traj, cfg.grid, _snapshot_times(cfg))
    series.to_csv(out.path(f"rom_{model}_observables.csv"))
    _write_envelopes(out.path(f"rom_{model}_envelopes.csv"), cfg.grid, series.snapshots)
    return traj, series


def _velocity_line(label, series, cfg) -> str:
    try:
        fit = dg.group_velocity(series, cfg.fit_window, cfg["diagnostics.velocity_channel"])
    except ValueError as exc:
        return f"{label}: group velocity unavailable ({exc})"
    flag = " (low confidence)" if fit.low_confidence else ""
    return f"{label}: c_g = {fit.velocity:.10g}, residual rms = {fit.residual_rms:.3g}{flag}"


def _rom_run(cfg, out):
    lines = []
    for model in cfg["rom.models"]:
        _, series = _rom_outputs(cfg, model, out)
        lines.append(_velocity_line(f"rom.{model}", series, cfg))
    return "\n".join(lines)


def _dns_run(cfg, out):
    _, series = _dns_outputs(cfg, out)
    m = series["mass"]
    return _velocity_line("dns", series, cfg) + f"\ndns: relative mass drift = {np.max(np.abs(m / m[0] - 1)):.3e}"


def _compare(cfg, out):
    dns, _ = _dns_outputs(cfg, out)
    lines = []
    for model in cfg["rom.models"]:
        rom, _ = _rom_outputs(cfg, model, out)
        report = dg.compare(
            rom, dns,
            fit_window=cfg.fit_window,
            velocity_channel=cfg["diagnostics.velocity_channel"],
            grow=cfg["diagnostics.grow"],
            decay=cfg["diagnostics.decay"],
        )
        out.text(f"report_{model}.txt", report.to_text())
        report.envelope_csv(out.path(f"envelope_error_{model}.csv"))
        lines.append(
            f"{model}: c_rom = {report.group_velocity_rom:.10g}, c_dns = {report.group_velocity_dns:.10g}, "
            f"class rom/dns = {report.focusing_class_rom.value}/{report.focusing_class_dns.value}, "
            f"max envelope error = {report.envelope_error_L2.max():.4g}"
        )
    return "\n".join(lines)


def sample_states(family: az.AnsatzFamily, q0, count: int, seed: int) -> list[np.ndarray]:
    """Admissible random states around ``q0``, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    q0 = np.asarray(q0, dtype=float)
    scale = 0.2 * np.abs(q0) + 0.05
    states = []
    while len(states) < count:
        q = q0 + scale * rng.uniform(-1.0, 1.0, q0.size)
        if family.admissibility_margin(q) > 0:
            states.append(q)
    return states


def master_eq_check(cfg) -> str:
    """Compare the real and imaginary parts of the master equation at random states."""
    family, kind = cfg.family, cfg.rom_kind
    density = _density(kind.equation)
    grid = cfg.rom_grid
    tol = cfg["check.tolerance"]
    worst_real, worst_imag, deficient = 0.0, 0.0, set()
    rank = len(family.names)
    for q in sample_states(family, cfg.initial_state.values, cfg["check.states"], cfg["check.seed"]):
        sys_ = ms.assemble_master(density, family, q, grid, check_tail=False)
        real = ms.solve_real_part(sys_)
        ref = rons.rons_rhs(rons.assemble(kind, family, q, grid, check_tail=False))
        scale = max(np.max(np.abs(ref)), 1e-300)
        worst_real = max(worst_real, float(np.max(np.abs(real - ref)) / scale))
        report = ms.solve_imag_part(sys_)
        rank = min(rank, report.rank)
        if report.full_rank:
            worst_imag = max(worst_imag, float(np.max(np.abs(report.qdot - real)) / scale))
        else:
            deficient.update(report.undetermined())
    lines = [
        f"family = {family.family_id.value}",
        f"equation = {kind.equation.value}",
        f"states = {cfg['check.states']}",
        f"real part vs RONS: max relative deviation = {worst_real:.3e}",
    ]
    if deficient:
        ordered = [n for n in family.names if n in deficient]
        lines.append(f"Im[M] rank-deficient: {' '.join(ordered)}")
        lines.append(f"min rank = {rank} of {len(family.names)}")
    else:
        verdict = "yes" if worst_imag < tol else "no"
        lines.append(f"coincide: {verdict}, max deviation = {worst_imag:.3e} (tolerance {tol:.0e})")
    return "\n".join(lines)


def _master(cfg, out):
    text = master_eq_check(cfg)
    out.text("master_report.txt", text + "\n")
    return text


def _sweep_case(args):
    cfg_values, amplitude = args
    values = dict(cfg_values)
    values["initial.A"] = float(amplitude)
    cfg = ExperimentConfig(values)
    rom = run_rom(cfg, "rons")
    dns = run_dns(cfg)
    rows = {}
    for channel in ("centroid", "wave_center"):
        rep = dg.compare(rom, dns, fit_window=cfg.fit_window, velocity_channel=channel)
        rows[channel] = (rep.group_velocity_rom, rep.group_velocity_dns, rep.relative_velocity_error)
    events = [e for e in (rom.event, dns.event) if e]
    return float(amplitude), rows, events


SWEEP_HEADER = ("A0", "c_rom", "c_dns", "rel_err", "c_rom_peak", "c_dns_peak", "rel_err_peak")


def velocity_sweep(cfg: ExperimentConfig, workers: int | None = None) -> list[tuple]:
    """Run every amplitude of ``sweep.amplitudes`` in parallel; rows sorted by ``A0``.

    ``c_*`` use the channel from ``diagnostics.velocity_channel``; the ``*_peak``
    columns always use the peak-tracking center.
    """
    primary = cfg["diagnostics.velocity_channel"]
    jobs = [(cfg.values, a) for a in sorted(cfg["sweep.amplitudes"])]
    if workers == 1:
        results = [_sweep_case(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_case, jobs))
    rows = []
    for amplitude, by_channel, events in sorted(results, key=lambda r: r[0]):
        rows.append((amplitude, *by_channel[primary], *by_channel["wave_center"], events))
    return rows


def _sweep(cfg, out, workers):
    rows = velocity_sweep(cfg, workers)
    with open(out.path("velocity_sweep.csv"), "w") as fh:
        fh.write(",".join(SWEEP_HEADER) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row[:-1]) + "\n")
            for e in row[-1]:
                out.events.append(f"A0={row[0]:g}: {e}")
    worst = max(r[3] for r in rows)
    return f"{len(rows)} cases, max relative velocity error = {worst:.4g}"


def conservation_audit(cfg: ExperimentConfig) -> dict[str, float]:
    """Multipliers of constrained RONS, ROM drift of mass/energy and DNS mass drift."""
    family, kind = cfg.family, cfg.rom_kind
    cons = rons.nls_conserved_quantities(family, cfg.rom_grid)
    worst_lambda = 0.0
    for q in sample_states(family, cfg.initial_state.values, cfg["check.states"], cfg["check.seed"]):
        sys_ = rons.assemble(kind, family, q, cfg.rom_grid, check_tail=False)
        sol = rons.constrained_rons_rhs(sys_, cons)
        worst_lambda = max(worst_lambda, float(np.max(np.abs(sol.multipliers))))
    rom = run_rom(cfg, "rons")
    drifts = {}
    for c in cons:
        vals = np.array([c.value(q) for q in rom.values])
        drifts[c.name] = float(np.max(np.abs(vals / vals[0] - 1.0)))
    dns = run_dns(cfg, cfg["audit.dns_t_final"])
    mass = np.array([dg.field_observables(dns.grid, u).mass for u in dns.fields])
    return {
        "max_abs_multiplier": worst_lambda,
        "rom_mass_drift": drifts["mass"],
        "rom_energy_drift": drifts.get("energy", float("nan")),
        "dns_mass_drift": float(np.max(np.abs(mass / mass[0] - 1.0))),
        "rom_event": rom.event or "none",
        "dns_event": dns.event or "none",
    }


def _audit(cfg, out):
    result = conservation_audit(cfg)
    text = "\n".join(
        f"{k} = {v:.17g}" if isinstance(v, float) else f"{k} = {v}" for k, v in result.items()
    )
    out.text("conservation_audit.txt", text + "\n")
    for key in ("rom_event", "dns_event"):
        if result[key] != "none":
            out.events.append(f"{key}: {result[key]}")
    return text


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(cfg: ExperimentConfig, out: _Outputs) -> Path:
    lines = [
        f"experiment = {cfg['experiment']}",
        f"config_source = {Path(cfg.source).name if cfg.source else '-'}",
        f"config_sha256 = {cfg.digest()}",
        f"ronsnls = {__version__}",
        f"numpy = {np.__version__}",
        f"scipy = {scipy.__version__}",
        f"python = {platform.python_version()}",
    ]
    for p in out.files:
        if p.exists():
            lines.append(f"file {p.name} sha256 = {_sha256(p)}")
    for e in out.events:
        lines.append(f"event {e}")
    path = out.dir / "manifest.txt"
    path.write_text("\n".join(lines) + "\n")
    return path


def run_experiment(cfg: ExperimentConfig, output_dir=None, workers: int | None = None) -> RunResult:
    """Execute ``cfg`` and write its outputs plus ``manifest.txt`` into ``output_dir``.

    Runtime events (blow-up, inadmissible states) do not abort the run; they
    are listed in the manifest and turn the exit status to :data:`EXIT_EVENT`.
    """
    out = _Outputs(Path(output_dir or cfg["output.dir"]))
    (out.dir / "config.cfg").write_text(
        "\n".join(f"{k} = {json.dumps(v)}" for k, v in cfg.values.items()) + "\n"
    )
    out.files.append(out.dir / "config.cfg")
    exp = cfg.experiment
    if exp is Experiment.ROM_RUN:
        summary = _rom_run(cfg, out)
    elif exp is Experiment.DNS_RUN:
        summary = _dns_run(cfg, out)
    elif exp is Experiment.COMPARE:
        summary = _compare(cfg, out)
    elif exp is Experiment.MASTER_EQ_CHECK:
        summary = _master(cfg, out)
    elif exp is Experiment.VELOCITY_SWEEP:
        summary = _sweep(cfg, out, workers)
    else:
        summary = _audit(cfg, out)
    manifest = write_manifest(cfg, out)
    status = EXIT_EVENT if out.events else EXIT_OK
    return RunResult(status, out.files + [manifest], summary, list(out.events))
