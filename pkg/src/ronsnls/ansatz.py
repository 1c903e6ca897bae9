"""Ansatz families with analytic parameter and spatial derivatives.

Every family is written in logarithmic-derivative form: with ``w = u_x/u`` and
``c_k = (du/dq_k)/u`` all higher derivatives follow from

    u_x   = w u
    u_xx  = (w' + w^2) u
    u_xxx = (w'' + 3 w w' + w^3) u
    d(u_x)/dq_k = (c_k' + c_k w) u

so a family only has to supply ``u``, ``w, w', w''`` and ``c_k, c_k'``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .grid import PeriodicGrid, tail_ratio

TAIL_RTOL = 1e-12


class AdmissibilityError(ValueError):
    """Parameter vector outside the admissible region of its ansatz family."""


class TailWarning(UserWarning):
    """Ansatz is not negligible at the edge of the periodic box."""


class FamilyId(str, Enum):
    GAUSSIAN_COMOVING = "GaussianComoving"
    GAUSSIAN_TRANSLATING = "GaussianTranslating"
    GAUSSIAN_FULL = "GaussianFull"
    SECH = "Sech"
    POLY_EXPONENT = "PolyExponent"


_FIXED_NAMES = {
    FamilyId.GAUSSIAN_COMOVING: ("A", "L", "U", "phi"),
    FamilyId.GAUSSIAN_TRANSLATING: ("A", "L", "U", "phi", "x_c"),
    FamilyId.GAUSSIAN_FULL: ("A", "L", "U", "V", "phi", "x_c"),
    FamilyId.SECH: ("A_r", "A_i", "L", "U", "x_c"),
}


def param_names(family_id: FamilyId | str, num_params: int | None = None) -> tuple[str, ...]:
    family_id = FamilyId(family_id)
    if family_id is FamilyId.POLY_EXPONENT:
        if num_params is None or num_params % 2 or num_params < 2:
            raise ValueError("PolyExponent needs an even parameter count 2(m+1)")
        m1 = num_params // 2
        return tuple(f"alpha{j}" for j in range(m1)) + tuple(f"beta{j}" for j in range(m1))
    return _FIXED_NAMES[family_id]


@dataclass(frozen=True)
class ParameterState:
    """Named real parameter vector of an ansatz family at a given time."""

    family: FamilyId
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", FamilyId(self.family))
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("parameter vector must be one-dimensional")
        names = param_names(self.family, v.size)
        if v.size != len(names):
            raise ValueError(f"{self.family.value} expects {len(names)} parameters, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise AdmissibilityError("parameter vector contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def names(self) -> tuple[str, ...]:
        return param_names(self.family, self.values.size)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, map(float, self.values)))

    def replace(self, values=None, time=None) -> "ParameterState":
        return ParameterState(
            self.family,
            self.values if values is None else values,
            self.time if time is None else time,
        )

    def to_record(self) -> str:
        """Serialize as ``key = value`` lines (shortest round-trip floats)."""
        lines = [f"family = {self.family.value}", f"time = {float(self.time)!r}"]
        lines += [f"{k} = {float(v)!r}" for k, v in zip(self.names, self.values)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str) -> "ParameterState":
        entries = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"malformed record line: {raw!r}")
            entries[key.strip()] = value.strip()
        try:
            family = FamilyId(entries.pop("family"))
        except KeyError:
            raise ValueError("record has no 'family' entry") from None
        time = float(entries.pop("time", 0.0))
        if family is FamilyId.POLY_EXPONENT:
            names = param_names(family, len(entries))
        else:
            names = param_names(family)
        missing = [n for n in names if n not in entries]
        extra = sorted(set(entries) - set(names))
        if missing or extra:
            raise ValueError(f"record fields mismatch: missing={missing}, unexpected={extra}")
        return cls(family, [float(entries[n]) for n in names], time)


@dataclass
class AnsatzJet:
    """Ansatz samples and all derivatives needed by RONS and the master equation."""

    u: np.ndarray
    ux: np.ndarray
    uxx: np.ndarray
    uxxx: np.ndarray
    du: np.ndarray  # (n, N): du/dq_k
    dux: np.ndarray  # (n, N): d(u_x)/dq_k


def _values(q) -> np.ndarray:
    if isinstance(q, ParameterState):
        return q.values
    return np.asarray(q, dtype=float)


def _sech(z: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(z))
    return 2.0 * e / (1.0 + e * e)


def _warn_tail(u: np.ndarray) -> None:
    ratio = tail_ratio(u)
    if ratio >= TAIL_RTOL:
        warnings.warn(
            f"ansatz edge/peak ratio {ratio:.3e} exceeds {TAIL_RTOL:g}; "
            "the periodic box truncates the profile",
            TailWarning,
            stacklevel=3,
        )


class AnsatzFamily:
    """Base class; subclasses implement :meth:`_log_jet` and :meth:`check`."""

    family_id: FamilyId | None = None
    names: tuple[str, ...] = ()

    @property
    def param_count(self) -> int:
        return len(self.names)

    def check(self, q: np.ndarray) -> None:
        raise NotImplementedError

    def admissibility_margin(self, q: np.ndarray) -> float:
        """Continuous function that is positive exactly on the admissible set."""
        raise NotImplementedError

    def _log_jet(self, q: np.ndarray, x: np.ndarray):
        raise NotImplementedError

    def state(self, values, time: float = 0.0) -> ParameterState:
        if self.family_id is None:
            raise TypeError(f"{type(self).__name__} has no serializable family id")
        return ParameterState(self.family_id, values, time)

    def _prepare(self, q) -> np.ndarray:
        q = _values(q)
        if q.shape != (self.param_count,):
            raise ValueError(f"expected {self.param_count} parameters, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise AdmissibilityError("parameter vector contains non-finite values")
        self.check(q)
        return q

    def jet(self, q, grid: PeriodicGrid, check_tail: bool = True) -> AnsatzJet:
        q = self._prepare(q)
        u, w, w1, w2, c, cx = self._log_jet(q, grid.points)
        if check_tail:
            _warn_tail(u)
        return AnsatzJet(
            u=u,
            ux=w * u,
            uxx=(w1 + w * w) * u,
            uxxx=(w2 + 3.0 * w * w1 + w**3) * u,
            du=c * u,
            dux=(cx + c * w) * u,
        )

    def evaluate(self, q, grid: PeriodicGrid, check_tail: bool = True) -> np.ndarray:
        q = self._prepare(q)
        u = self._log_jet(q, grid.points)[0]
        if check_tail:
            _warn_tail(u)
        return u

    def param_derivatives(self, q, grid: PeriodicGrid) -> np.ndarray:
        return self.jet(q, grid, check_tail=False).du

    def spatial_derivative(self, q, grid: PeriodicGrid) -> np.ndarray:
        return self.jet(q, grid, check_tail=False).ux

    def mixed_derivatives(self, q, grid: PeriodicGrid) -> np.ndarray:
        return self.jet(q, grid, check_tail=False).dux

    def __repr__(self) -> str:
        return f"{type(self).__name__}({', '.join(self.names)})"


class GaussianFamily(AnsatzFamily):
    """``A exp(-s^2/L^2 + i s^2 U/L + i s V + i phi)`` with ``s = x - x_c``.

    ``translating`` adds the center ``x_c``; ``asymmetric`` adds ``V`` (and
    implies a translating center).
    """

    def __init__(self, translating: bool = False, asymmetric: bool = False):
        self.translating = translating or asymmetric
        self.asymmetric = asymmetric
        if asymmetric:
            self.family_id = FamilyId.GAUSSIAN_FULL
        elif translating:
            self.family_id = FamilyId.GAUSSIAN_TRANSLATING
        else:
            self.family_id = FamilyId.GAUSSIAN_COMOVING
        self.names = param_names(self.family_id)

    def unpack(self, q):
        d = dict(zip(self.names, _values(q)))
        return d["A"], d["L"], d["U"], d.get("V", 0.0), d["phi"], d.get("x_c", 0.0)

    def check(self, q):
        A, L = q[0], q[1]
        if not L > 0:
            raise AdmissibilityError(f"Gaussian width L must be positive, got {L}")
        if not A > 0:
            raise AdmissibilityError(f"Gaussian amplitude A must be positive, got {A}")

    def admissibility_margin(self, q):
        return float(min(q[0], q[1]))

    def _log_jet(self, q, x):
        A, L, U, V, phi, xc = self.unpack(q)
        s = x - xc
        a = -1.0 / L**2 + 1j * U / L
        b = 1j * V
        u = A * np.exp(a * s * s + b * s + 1j * phi)
        w = 2.0 * a * s + b
        w1 = np.full_like(w, 2.0 * a)
        w2 = np.zeros_like(w)
        one = np.ones_like(w)
        zero = np.zeros_like(w)
        cols = {
            "A": (one / A, zero),
            "L": (2 * s * s / L**3 - 1j * s * s * U / L**2, 4 * s / L**3 - 2j * s * U / L**2),
            "U": (1j * s * s / L, 2j * s / L),
            "V": (1j * s, 1j * one),
            "phi": (1j * one, zero),
            "x_c": (-w, -w1),
        }
        c = np.array([cols[n][0] for n in self.names])
        cx = np.array([cols[n][1] for n in self.names])
        return u, w, w1, w2, c, cx


class MassConstrainedGaussian(AnsatzFamily):
    """Co-moving Gaussian with the amplitude slaved to the width, ``A^2 L = mass_constant``.

    Parameters are ``(L, U, phi)``.
    """

    names = ("L", "U", "phi")

    def __init__(self, mass_constant: float):
        if not mass_constant > 0:
            raise ValueError("mass_constant must be positive")
        self.mass_constant = float(mass_constant)

    def check(self, q):
        if not q[0] > 0:
            raise AdmissibilityError(f"Gaussian width L must be positive, got {q[0]}")

    def admissibility_margin(self, q):
        return float(q[0])

    def _log_jet(self, q, x):
        L, U, phi = q
        A = np.sqrt(self.mass_constant / L)
        a = -1.0 / L**2 + 1j * U / L
        u = A * np.exp(a * x * x + 1j * phi)
        w = 2.0 * a * x
        w1 = np.full_like(w, 2.0 * a)
        w2 = np.zeros_like(w)
        one = np.ones_like(w)
        c = np.array([
            -0.5 / L + 2 * x * x / L**3 - 1j * x * x * U / L**2,
            1j * x * x / L,
            1j * one,
        ])
        cx = np.array([
            4 * x / L**3 - 2j * x * U / L**2,
            2j * x / L,
            0 * one,
        ])
        return u, w, w1, w2, c, cx


class SechFamily(AnsatzFamily):
    """``(A_r + i A_i) sech((x - x_c)/L) exp(i (x - x_c)^2 U)``."""

    family_id = FamilyId.SECH
    names = param_names(FamilyId.SECH)

    def check(self, q):
        Ar, Ai, L = q[0], q[1], q[2]
        if not L > 0:
            raise AdmissibilityError(f"sech width L must be positive, got {L}")
        if Ar == 0.0 and Ai == 0.0:
            raise AdmissibilityError("sech amplitude (A_r, A_i) must be nonzero")

    def admissibility_margin(self, q):
        return float(min(q[2], np.hypot(q[0], q[1])))

    def _log_jet(self, q, x):
        Ar, Ai, L, U, xc = q
        A = Ar + 1j * Ai
        s = x - xc
        z = s / L
        sech = _sech(z)
        tanh = np.tanh(z)
        u = A * sech * np.exp(1j * U * s * s)
        w = -tanh / L + 2j * U * s
        w1 = -sech**2 / L**2 + 2j * U
        w2 = 2.0 * sech**2 * tanh / L**3 + 0j
        one = np.ones_like(w)
        c = np.array([
            one / A,
            1j * one / A,
            s * tanh / L**2 + 0j,
            1j * s * s,
            -w,
        ])
        cx = np.array([
            0 * one,
            0 * one,
            tanh / L**2 + s * sech**2 / L**3 + 0j,
            2j * s,
            -w1,
        ])
        return u, w, w1, w2, c, cx


class PolyExponentFamily(AnsatzFamily):
    """``exp(sum_j (alpha_j + i beta_j) x^j)`` for ``j = 0..degree``."""

    family_id = FamilyId.POLY_EXPONENT
    max_degree = 4

    def __init__(self, degree: int):
        if not 2 <= degree <= self.max_degree:
            raise ValueError(f"degree must lie in [2, {self.max_degree}], got {degree}")
        self.degree = degree
        self.names = param_names(FamilyId.POLY_EXPONENT, 2 * (degree + 1))

    def _leading(self, q) -> int:
        nz = np.flatnonzero(q[1 : self.degree + 1]) + 1
        return int(nz.max()) if nz.size else 0

    def check(self, q):
        lead = self._leading(q)
        if lead % 2 or lead == 0 or not q[lead] < 0:
            raise AdmissibilityError(
                "leading real coefficient must have even degree >= 2 and be negative"
            )

    def admissibility_margin(self, q):
        lead = self._leading(q)
        if lead % 2 or lead == 0:
            return -1.0
        return float(-q[lead])

    def _log_jet(self, q, x):
        m1 = self.degree + 1
        z = q[:m1] + 1j * q[m1:]
        powers = np.array([x**j for j in range(m1)])
        dpowers = np.array([j * x ** max(j - 1, 0) for j in range(m1)])
        u = np.exp(z @ powers)
        d1 = np.polynomial.polynomial.polyder(z, 1)
        d2 = np.polynomial.polynomial.polyder(z, 2)
        d3 = np.polynomial.polynomial.polyder(z, 3)
        pv = np.polynomial.polynomial.polyval
        w = pv(x, d1) if d1.size else np.zeros_like(u)
        w1 = pv(x, d2) + 0 * u if d2.size else np.zeros_like(u)
        w2 = pv(x, d3) + 0 * u if d3.size else np.zeros_like(u)
        c = np.concatenate([powers, 1j * powers]).astype(complex)
        cx = np.concatenate([dpowers, 1j * dpowers]).astype(complex)
        return u, w, w1, w2, c, cx


GAUSSIAN_COMOVING = GaussianFamily()
GAUSSIAN_TRANSLATING = GaussianFamily(translating=True)
GAUSSIAN_FULL = GaussianFamily(asymmetric=True)
SECH = SechFamily()


def get_family(family_id: FamilyId | str, num_params: int | None = None) -> AnsatzFamily:
    family_id = FamilyId(family_id)
    if family_id is FamilyId.POLY_EXPONENT:
        if num_params is None:
            raise ValueError("PolyExponent needs num_params to fix its degree")
        return PolyExponentFamily(num_params // 2 - 1)
    return {
        FamilyId.GAUSSIAN_COMOVING: GAUSSIAN_COMOVING,
        FamilyId.GAUSSIAN_TRANSLATING: GAUSSIAN_TRANSLATING,
        FamilyId.GAUSSIAN_FULL: GAUSSIAN_FULL,
        FamilyId.SECH: SECH,
    }[family_id]


def family_of(state: ParameterState) -> AnsatzFamily:
    return get_family(state.family, state.values.size)


def gaussian_to_poly_exponent(q) -> np.ndarray:
    """Map co-moving Gaussian ``(A, L, U, phi)`` to degree-2 PolyExponent parameters."""
    A, L, U, phi = _values(q)
    return np.array([np.log(A), 0.0, -1.0 / L**2, phi, 0.0, U / L])


def soliton_initial_state(L0: float) -> ParameterState:
    """Sech state that is an exact steady soliton of the co-moving NLS.

    The profile ``a sech(x/L0)`` balances dispersion and nonlinearity when
    ``a = 1/(sqrt(2) L0)``.
    """
    if not L0 > 0:
        raise AdmissibilityError(f"L0 must be positive, got {L0}")
    return ParameterState(FamilyId.SECH, [1.0 / (np.sqrt(2.0) * L0), 0.0, L0, 0.0, 0.0])
