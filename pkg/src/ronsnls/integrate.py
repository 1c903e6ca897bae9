"""Time integration: RK4/RK45 for parameter ODEs, ETDRK4 for the spectral DNS."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.integrate

from .ansatz import AdmissibilityError, AnsatzFamily, ParameterState, family_of
from .grid import PeriodicGrid, check_field
from .pde import PdeKind, linear_symbol, nonlinear_term
from .rons import SingularMetricError

RK4_FIXED = "RK4Fixed"
RK45_ADAPTIVE = "RK45Adaptive"


@dataclass(frozen=True)
class OdeSolverConfig:
    t_final: float
    method: str = RK45_ADAPTIVE
    dt: float = 0.05
    rtol: float = 1e-10
    atol: float = 1e-10
    dt_max: float = math.inf
    output_dt: float = 1.0

    def __post_init__(self):
        if self.method not in (RK4_FIXED, RK45_ADAPTIVE):
            raise ValueError(f"unknown ODE method {self.method!r}")
        for name in ("t_final", "dt", "rtol", "atol", "dt_max", "output_dt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class EtdSolverConfig:
    t_final: float
    dt: float = 0.025
    contour_points: int = 32
    dealias: bool = False
    output_dt: float = 1.0

    def __post_init__(self):
        if not (self.dt > 0 and self.t_final > 0 and self.output_dt > 0):
            raise ValueError("dt, t_final and output_dt must be positive")
        if self.contour_points < 16 or self.contour_points % 2:
            raise ValueError("contour_points must be an even number >= 16")


@dataclass
class RomTrajectory:
    """Parameter time series; ``event`` is set when integration stopped early."""

    family: AnsatzFamily
    times: np.ndarray
    values: np.ndarray  # (T, n)
    event: str | None = None
    message: str = ""

    @property
    def names(self) -> tuple[str, ...]:
        return self.family.names

    def channel(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def states(self) -> list[ParameterState]:
        return [self.family.state(v, t) for t, v in zip(self.times, self.values)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("t",) + self.names)
            for t, row in zip(self.times, self.values):
                w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])


@dataclass
class FieldTrajectory:
    grid: PeriodicGrid
    times: np.ndarray
    fields: np.ndarray  # (T, N)
    event: str | None = None
    message: str = ""
    steps: int = field(default=0)


def _as_family_and_values(q0, family):
    if isinstance(q0, ParameterState):
        return family or family_of(q0), np.array(q0.values, dtype=float), float(q0.time)
    if family is None:
        raise ValueError("family is required when q0 is a plain array")
    return family, np.asarray(q0, dtype=float).copy(), 0.0


def _output_times(t0: float, t_final: float, output_dt: float) -> np.ndarray:
    n = int(math.floor((t_final - t0) / output_dt + 1e-9))
    ts = t0 + output_dt * np.arange(n + 1)
    if t_final - ts[-1] > 1e-9 * max(1.0, abs(t_final)):
        ts = np.append(ts, t_final)
    return ts


def integrate_ode(
    rhs: Callable[[np.ndarray], np.ndarray],
    q0,
    cfg: OdeSolverConfig,
    family: AnsatzFamily | None = None,
) -> RomTrajectory:
    """Integrate ``qdot = rhs(q)`` from ``q0`` to ``cfg.t_final``.

    Stops early, keeping the outputs produced so far, when the state leaves the
    admissible region of ``family`` (``event="inadmissible"``), the adaptive step
    underflows (``"step_underflow"``) or the right-hand side becomes singular
    (``"singular_metric"``).
    """
    family, y0, t0 = _as_family_and_values(q0, family)
    family.check(y0)
    t_end = t0 + cfg.t_final
    t_out = _output_times(t0, t_end, cfg.output_dt)
    if cfg.method == RK4_FIXED:
        return _rk4(rhs, family, y0, t_out, cfg)

    solver = scipy.integrate.RK45(
        lambda t, y: rhs(y), t0, y0, t_end, rtol=cfg.rtol, atol=cfg.atol, max_step=cfg.dt_max
    )
    times, values = [t0], [y0.copy()]
    k = 1
    event, message = None, ""
    while k < t_out.size:
        t_prev = solver.t
        try:
            msg = solver.step()
        except (AdmissibilityError, SingularMetricError) as exc:
            event, message = _classify(exc), str(exc)
            break
        if solver.status == "failed":
            event, message = "step_underflow", msg or "step size underflow"
            break
        margin = family.admissibility_margin(solver.y)
        if not margin > 0:
            event, message = "inadmissible", f"state left admissible region after t={t_prev:.6g}"
            break
        dense = solver.dense_output()
        while k < t_out.size and t_out[k] <= solver.t + 1e-12:
            times.append(t_out[k])
            values.append(dense(t_out[k]) if t_out[k] < solver.t else solver.y.copy())
            k += 1
        if solver.status == "finished":
            break
    return RomTrajectory(family, np.array(times), np.array(values), event, message)


def _classify(exc) -> str:
    return "singular_metric" if isinstance(exc, SingularMetricError) else "inadmissible"


def _rk4(rhs, family, y0, t_out, cfg) -> RomTrajectory:
    times, values = [t_out[0]], [y0.copy()]
    y, t = y0.copy(), t_out[0]
    event, message = None, ""
    try:
        for t_next in t_out[1:]:
            n = max(1, int(math.ceil((t_next - t) / cfg.dt - 1e-9)))
            h = (t_next - t) / n
            for _ in range(n):
                k1 = rhs(y)
                k2 = rhs(y + 0.5 * h * k1)
                k3 = rhs(y + 0.5 * h * k2)
                k4 = rhs(y + h * k3)
                y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
                if not family.admissibility_margin(y) > 0:
                    raise AdmissibilityError(f"state left admissible region near t={t:.6g}")
            t = t_next
            times.append(t)
            values.append(y.copy())
    except (AdmissibilityError, SingularMetricError) as exc:
        event, message = _classify(exc), str(exc)
    return RomTrajectory(family, np.array(times), np.array(values), event, message)


def phi_coefficients(z: np.ndarray, contour_points: int = 32):
    """ETDRK4 coefficient functions evaluated by averaging over a unit circle around ``z``.

    Returns ``(q, f1, f2, f3)`` without the factor ``dt``:

        q  = (e^{z/2} - 1) / z
        f1 = (-4 - z + e^z (4 - 3z + z^2)) / z^3
        f2 = (2 + z + e^z (z - 2)) / z^3
        f3 = (-4 - 3z - z^2 + e^z (4 - z)) / z^3
    """
    r = np.exp(2j * np.pi * (np.arange(contour_points) + 0.5) / contour_points)
    lr = z[:, None] + r[None, :]
    e = np.exp(lr)
    lr3 = lr**3
    q = ((np.exp(lr / 2) - 1) / lr).mean(axis=1)
    f1 = ((-4 - lr + e * (4 - 3 * lr + lr**2)) / lr3).mean(axis=1)
    f2 = ((2 + lr + e * (lr - 2)) / lr3).mean(axis=1)
    f3 = ((-4 - 3 * lr - lr**2 + e * (4 - lr)) / lr3).mean(axis=1)
    return q, f1, f2, f3


class EtdRk4:
    """Fourth-order exponential time differencing Runge-Kutta stepper in Fourier space."""

    def __init__(self, kind: PdeKind, grid: PeriodicGrid, dt: float, contour_points: int = 32,
                 dealias: bool = False):
        self.kind = kind
        self.grid = grid
        self.dt = dt
        lin = linear_symbol(kind, grid) * dt
        self.E = np.exp(lin)
        self.E2 = np.exp(lin / 2)
        q, f1, f2, f3 = phi_coefficients(lin, contour_points)
        self.Q, self.f1, self.f2, self.f3 = dt * q, dt * f1, dt * f2, dt * f3
        self.mask = grid.dealias_mask() if dealias else None

    def nonlinear(self, v: np.ndarray) -> np.ndarray:
        n = np.fft.fft(nonlinear_term(self.kind, self.grid, np.fft.ifft(v)))
        if self.mask is not None:
            n *= self.mask
        return n

    def step(self, v: np.ndarray) -> np.ndarray:
        Nv = self.nonlinear(v)
        a = self.E2 * v + self.Q * Nv
        Na = self.nonlinear(a)
        b = self.E2 * v + self.Q * Na
        Nb = self.nonlinear(b)
        c = self.E2 * a + self.Q * (2 * Nb - Nv)
        Nc = self.nonlinear(c)
        return self.E * v + self.f1 * Nv + 2 * self.f2 * (Na + Nb) + self.f3 * Nc


def integrate_etd(kind: PdeKind, grid: PeriodicGrid, u0, cfg: EtdSolverConfig) -> FieldTrajectory:
    """Pseudospectral ETDRK4 integration of ``u_t = F(u)`` on ``grid``.

    Output is stored every ``cfg.output_dt`` (rounded to whole steps).  A
    non-finite state ends the run with ``event="blow_up"``.
    """
    u0 = check_field(grid, u0)
    stepper = EtdRk4(kind, grid, cfg.dt, cfg.contour_points, cfg.dealias)
    n_steps = int(round(cfg.t_final / cfg.dt))
    stride = max(1, int(round(cfg.output_dt / cfg.dt)))
    v = np.fft.fft(u0)
    times, fields = [0.0], [u0.copy()]
    event, message = None, ""
    for n in range(1, n_steps + 1):
        v = stepper.step(v)
        if n % stride == 0 or n == n_steps:
            u = np.fft.ifft(v)
            if not np.all(np.isfinite(u)):
                event, message = "blow_up", f"non-finite field; last valid time {times[-1]:.6g}"
                break
            times.append(n * cfg.dt)
            fields.append(u)
    return FieldTrajectory(grid, np.array(times), np.array(fields), event, message, steps=n)
