"""Observables, wave-center tracking, group velocity and ROM/DNS comparison."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .ansatz import AnsatzFamily, GaussianFamily, _values
from .grid import PeriodicGrid, check_field, quadrature, spectral_derivative
from .integrate import FieldTrajectory, RomTrajectory
from .rons import gaussian_conserved_quantities

CHANNELS = ("mass", "energy", "peak_amplitude", "wave_center", "centroid")
AMBIGUITY_RATIO = 0.95
MIN_FIT_SAMPLES = 10


class FocusingClass(str, Enum):
    FOCUSING = "Focusing"
    DEFOCUSING = "Defocusing"
    NEUTRAL = "Neutral"


@dataclass(frozen=True)
class Observables:
    mass: float
    energy: float
    peak_amplitude: float
    wave_center: float
    centroid: float
    ambiguous: bool = False


def wave_center(grid: PeriodicGrid, u: np.ndarray) -> float:
    """Location of ``max |u|`` refined by a three-point quadratic fit.

    The fit is done on ``log |u|``, which is exactly quadratic for a Gaussian
    envelope; it falls back to ``|u|`` when a neighbour vanishes.
    """
    a = np.abs(u)
    n = a.size
    j = int(np.argmax(a))
    if a[j] == 0.0:
        return 0.0
    y = a[[(j - 1) % n, j, (j + 1) % n]]
    if np.all(y > 0):
        y = np.log(y)
    curv = y[0] - 2.0 * y[1] + y[2]
    offset = 0.5 * (y[0] - y[2]) / curv if curv < 0 else 0.0
    return float(grid.points[j] + offset * grid.dx)


def centroid(grid: PeriodicGrid, u: np.ndarray) -> float:
    """``int x |u|^2 dx / int |u|^2 dx`` over the period centred on the peak.

    Working in the window ``[x_peak - D/2, x_peak + D/2)`` keeps the result
    continuous when mass wraps around the boundary.
    """
    rho = np.abs(u) ** 2
    total = rho.sum()
    if total == 0.0:
        return 0.0
    j = int(np.argmax(rho))
    n = rho.size
    rolled = np.roll(rho, n // 2 - j)
    offsets = grid.dx * (np.arange(n) - n // 2)
    return float(grid.points[j] + (offsets * rolled).sum() / total)


def peak_is_ambiguous(u: np.ndarray, ratio: float = AMBIGUITY_RATIO) -> bool:
    """True when a second, separate local maximum reaches ``ratio`` of the peak."""
    a = np.abs(u)
    top = a.max()
    if top == 0.0:
        return False
    local = (a >= np.roll(a, 1)) & (a > np.roll(a, -1)) & (a >= ratio * top)
    return int(local.sum()) > 1


def field_observables(grid: PeriodicGrid, u) -> Observables:
    """Mass, NLS energy (spectral ``u_x``), peak and center of a sampled field."""
    u = check_field(grid, u)
    ux = spectral_derivative(grid, u, 1)
    rho = np.abs(u) ** 2
    mass = quadrature(rho, grid)
    energy = quadrature(np.abs(ux) ** 2 / 8.0 - rho**2 / 4.0, grid)
    return Observables(
        mass=float(mass),
        energy=float(energy),
        peak_amplitude=float(np.sqrt(rho.max())),
        wave_center=wave_center(grid, u),
        centroid=centroid(grid, u),
        ambiguous=peak_is_ambiguous(u),
    )


def state_observables(family: AnsatzFamily, q, grid: PeriodicGrid) -> Observables:
    """Observables of an ansatz state.

    Gaussian families use the closed-form mass and energy and the exact center
    ``x_c``; everything else is sampled on ``grid``.
    """
    q = _values(q)
    if isinstance(family, GaussianFamily):
        A, _, _, _, _, xc = family.unpack(q)
        mass, energy = (c.value(q) for c in gaussian_conserved_quantities(family))
        return Observables(float(mass), float(energy), float(abs(A)), float(xc), float(xc))
    return field_observables(grid, family.evaluate(q, grid, check_tail=False))


@dataclass
class ObservableSeries:
    """Observable channels sampled at strictly increasing ``times``.

    ``wave_center`` and ``centroid`` are unwrapped across the periodic boundary.
    """

    times: np.ndarray
    channels: dict[str, np.ndarray]
    domain_length: float
    ambiguous: np.ndarray = field(default=None)
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        for name, values in self.channels.items():
            if len(values) != self.times.size:
                raise ValueError(f"channel {name!r} has {len(values)} samples, expected {self.times.size}")
        if self.ambiguous is None:
            self.ambiguous = np.zeros(self.times.size, dtype=bool)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    @classmethod
    def from_samples(cls, times, samples, domain_length: float, snapshots=None) -> "ObservableSeries":
        channels = {name: np.array([getattr(s, name) for s in samples], dtype=float) for name in CHANNELS}
        for name in ("wave_center", "centroid"):
            channels[name] = np.unwrap(channels[name], period=domain_length)
        ambiguous = np.array([s.ambiguous for s in samples], dtype=bool)
        return cls(np.asarray(times, dtype=float), channels, domain_length, ambiguous, snapshots or {})

    @classmethod
    def from_fields(cls, traj: FieldTrajectory, snapshot_times=()) -> "ObservableSeries":
        samples = [field_observables(traj.grid, u) for u in traj.fields]
        snaps = _pick_snapshots(traj.times, traj.fields, snapshot_times)
        return cls.from_samples(traj.times, samples, traj.grid.domain_length, snaps)

    @classmethod
    def from_rom(cls, traj: RomTrajectory, grid: PeriodicGrid, snapshot_times=()) -> "ObservableSeries":
        samples = [state_observables(traj.family, q, grid) for q in traj.values]
        fields = _LazyRender(traj, grid)
        snaps = _pick_snapshots(traj.times, fields, snapshot_times)
        return cls.from_samples(traj.times, samples, grid.domain_length, snaps)

    def to_csv(self, path) -> None:
        names = list(self.channels)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + names)
            for i, t in enumerate(self.times):
                w.writerow([f"{t:.17g}"] + [f"{self.channels[n][i]:.17g}" for n in names])


class _LazyRender:
    def __init__(self, traj: RomTrajectory, grid: PeriodicGrid):
        self.traj, self.grid = traj, grid

    def __getitem__(self, i):
        return self.traj.family.evaluate(self.traj.values[i], self.grid, check_tail=False)


def _pick_snapshots(times, fields, wanted) -> dict[float, np.ndarray]:
    out = {}
    for t in wanted:
        i = int(np.argmin(np.abs(times - t)))
        if abs(times[i] - t) < 1e-9 * max(1.0, abs(t)):
            out[float(times[i])] = np.asarray(fields[i])
    return out


@dataclass(frozen=True)
class VelocityFit:
    velocity: float
    intercept: float
    residual_rms: float
    samples: int
    window: tuple[float, float]
    low_confidence: bool

    def to_text(self) -> str:
        return (
            f"velocity = {self.velocity:.17g}\n"
            f"residual_rms = {self.residual_rms:.17g}\n"
            f"samples = {self.samples}\n"
            f"window = {self.window[0]:.17g} {self.window[1]:.17g}\n"
            f"low_confidence = {self.low_confidence}\n"
        )


def group_velocity(series: ObservableSeries, fit_window=None, channel: str = "wave_center") -> VelocityFit:
    """Least-squares slope of the (unwrapped) center channel over ``fit_window``.

    The default window is ``[0.2 T, 0.8 T]`` with ``T`` the last sample time.
    ``low_confidence`` is set when any sample in the window has two near-equal
    peaks, which makes the peak-based center ambiguous.
    """
    t = series.times
    if fit_window is None:
        T = t[-1] - t[0]
        fit_window = (t[0] + 0.2 * T, t[0] + 0.8 * T)
    ta, tb = fit_window
    tol = 1e-9 * max(1.0, abs(tb))
    mask = (t >= ta - tol) & (t <= tb + tol)
    n = int(mask.sum())
    if n < MIN_FIT_SAMPLES:
        raise ValueError(f"fit window [{ta}, {tb}] holds {n} samples, need at least {MIN_FIT_SAMPLES}")
    x = series[channel][mask]
    tw = t[mask]
    slope, intercept = np.polyfit(tw, x, 1)
    resid = x - (slope * tw + intercept)
    return VelocityFit(
        velocity=float(slope),
        intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        samples=n,
        window=(float(ta), float(tb)),
        low_confidence=bool(series.ambiguous[mask].any()),
    )


def focusing_class(peaks, grow: float = 1.05, decay: float = 0.95) -> FocusingClass:
    """Focusing if the peak ever exceeds ``grow * peak(0)``, Defocusing if it ends below ``decay * peak(0)``."""
    peaks = np.asarray(peaks, dtype=float)
    if peaks.max() > grow * peaks[0]:
        return FocusingClass.FOCUSING
    if peaks[-1] < decay * peaks[0]:
        return FocusingClass.DEFOCUSING
    return FocusingClass.NEUTRAL


@dataclass
class ComparisonReport:
    """Model trajectory versus reference trajectory.

    ``relative_velocity_error = |c_rom - c_dns| / |c_dns|`` and the envelope
    error is ``|| |u_rom| - |u_dns| ||_2 / || |u_dns| ||_2`` per shared sample.
    """

    group_velocity_rom: float
    group_velocity_dns: float
    relative_velocity_error: float
    times: np.ndarray
    envelope_error_L2: np.ndarray
    peak_amplitude_error: float
    peak_time_error: float
    focusing_class_rom: FocusingClass
    focusing_class_dns: FocusingClass
    velocity_channel: str = "wave_center"

    @property
    def classes_agree(self) -> bool:
        return self.focusing_class_rom is self.focusing_class_dns

    def to_text(self) -> str:
        lines = [
            f"velocity_channel = {self.velocity_channel}",
            f"group_velocity_rom = {self.group_velocity_rom:.17g}",
            f"group_velocity_dns = {self.group_velocity_dns:.17g}",
            f"relative_velocity_error = {self.relative_velocity_error:.17g}",
            f"max_envelope_error_L2 = {float(np.max(self.envelope_error_L2)):.17g}",
            f"peak_amplitude_error = {self.peak_amplitude_error:.17g}",
            f"peak_time_error = {self.peak_time_error:.17g}",
            f"focusing_class_rom = {self.focusing_class_rom.value}",
            f"focusing_class_dns = {self.focusing_class_dns.value}",
            f"classes_agree = {'yes' if self.classes_agree else 'no'}",
        ]
        return "\n".join(lines) + "\n"

    def envelope_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "envelope_error_L2"])
            for t, e in zip(self.times, self.envelope_error_L2):
                w.writerow([f"{t:.17g}", f"{e:.17g}"])


def _fields_and_series(traj, grid):
    if isinstance(traj, FieldTrajectory):
        if grid is not None and traj.grid != grid:
            raise ValueError(f"grid mismatch: {traj.grid} vs {grid}")
        return traj.grid, traj.fields, ObservableSeries.from_fields(traj)
    if grid is None:
        raise ValueError("a grid is required to render a parameter trajectory")
    return grid, _LazyRender(traj, grid), ObservableSeries.from_rom(traj, grid)


def compare(
    rom,
    dns,
    grid: PeriodicGrid | None = None,
    fit_window=None,
    velocity_channel: str = "wave_center",
    grow: float = 1.05,
    decay: float = 0.95,
) -> ComparisonReport:
    """Compare two trajectories, each either a ROM or a field trajectory.

    Parameter trajectories are rendered onto the field trajectory's grid (or
    ``grid`` when both are parameter trajectories).
    """
    if grid is None:
        for traj in (dns, rom):
            if isinstance(traj, FieldTrajectory):
                grid = traj.grid
                break
    g1, f_rom, s_rom = _fields_and_series(rom, grid)
    g2, f_dns, s_dns = _fields_and_series(dns, grid)
    if g1 != g2:
        raise ValueError(f"grid mismatch: {g1} vs {g2}")

    t_r, t_d = s_rom.times, s_dns.times
    shared, err = [], []
    for i, t in enumerate(t_r):
        j = int(np.argmin(np.abs(t_d - t)))
        if abs(t_d[j] - t) <= 1e-9 * max(1.0, abs(t)):
            a, b = np.abs(f_rom[i]), np.abs(f_dns[j])
            nb = np.linalg.norm(b)
            shared.append(t)
            err.append(np.linalg.norm(a - b) / nb if nb > 0 else float(np.linalg.norm(a) > 0))
    if not shared:
        raise ValueError("trajectories share no sample times")

    c_rom = group_velocity(s_rom, fit_window, velocity_channel).velocity
    c_dns = group_velocity(s_dns, fit_window, velocity_channel).velocity
    p_rom, p_dns = s_rom["peak_amplitude"], s_dns["peak_amplitude"]
    i_rom, i_dns = int(np.argmax(p_rom)), int(np.argmax(p_dns))
    return ComparisonReport(
        group_velocity_rom=c_rom,
        group_velocity_dns=c_dns,
        relative_velocity_error=abs(c_rom - c_dns) / abs(c_dns) if c_dns != 0 else abs(c_rom - c_dns),
        times=np.array(shared),
        envelope_error_L2=np.array(err),
        peak_amplitude_error=float(abs(p_rom[i_rom] - p_dns[i_dns]) / p_dns[i_dns]) if p_dns[i_dns] > 0 else 0.0,
        peak_time_error=float(abs(t_r[i_rom] - t_d[i_dns])),
        focusing_class_rom=focusing_class(p_rom, grow, decay),
        focusing_class_dns=focusing_class(p_dns, grow, decay),
        velocity_channel=velocity_channel,
    )
