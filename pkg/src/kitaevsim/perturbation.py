"""First-order time-dependent transition coefficients.

For the exponential drive B(t) = D exp(-i omega t), the first-order
coefficient of a target at detuning delta = omega0 - omega is

    c(t) = M/D * [ a(t) + i b(t) ],
    a(t) = (D/delta) (1 - cos(delta t)),   b(t) = -(D/delta) sin(delta t),

with omega0 = E_target - E_initial (hbar = 1).  Near resonance the
(1 - cos)/delta form is replaced by its Taylor expansion.  For arbitrary
drives the defining time integral is evaluated by adaptive-panel Simpson
quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import CouplingParams, energy_expectation, perturbation_element
from .lattice import LatticeGeometry
from .manifold import ExcitedLabel, FlipConfig, excite

# below this |delta * t| the closed form switches to its Taylor branch;
# cancellation in (1 - cos)/delta is the concern, not the sin term
RESONANCE_SERIES_THRESHOLD = 1e-4

_QUAD_MAX_DEPTH = 48
_QUAD_MAX_PANELS = 200_000


@dataclass(frozen=True)
class DriveSpec:
    """Time-dependent drive acting on one plaquette's six-Pauli string."""

    kind: str  # "exponential" | "custom"
    amplitude: float
    omega: float = 0.0
    plaquette: int = 0
    t_samples: np.ndarray | None = None
    b_samples: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("exponential", "custom"):
            raise ValueError(f"unknown drive kind {self.kind!r}")
        if self.amplitude < 0 or not math.isfinite(self.amplitude):
            raise ValueError("drive amplitude must be finite and >= 0")
        if self.kind == "custom":
            if self.t_samples is None or self.b_samples is None:
                raise ValueError("custom drive needs t_samples and b_samples")
            t = np.asarray(self.t_samples, dtype=float)
            if t.ndim != 1 or len(t) < 2 or np.any(np.diff(t) <= 0):
                raise ValueError("custom drive grid must be strictly increasing")

    @classmethod
    def exponential(cls, d: float, omega: float, plaquette: int = 0) -> "DriveSpec":
        return cls(kind="exponential", amplitude=d, omega=omega, plaquette=plaquette)

    @classmethod
    def custom(
        cls, t_samples, b_samples, plaquette: int = 0, amplitude: float = 1.0
    ) -> "DriveSpec":
        return cls(
            kind="custom",
            amplitude=amplitude,
            plaquette=plaquette,
            t_samples=np.asarray(t_samples, dtype=float),
            b_samples=np.asarray(b_samples, dtype=complex),
        )

    def b_of(self, t):
        """Complex drive value B(t); custom drives interpolate linearly."""
        if self.kind == "exponential":
            return self.amplitude * np.exp(-1j * self.omega * np.asarray(t))
        re = np.interp(t, self.t_samples, self.b_samples.real)
        im = np.interp(t, self.t_samples, self.b_samples.imag)
        return re + 1j * im


@dataclass
class CoefficientSeries:
    """Complex trajectory c(t_k) of one target state."""

    target: ExcitedLabel
    e_target: float
    e_initial: float
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if len(self.times) != len(self.values):
            raise ValueError("times and values length mismatch")
        if len(self.times) == 0 or self.times[0] != 0.0:
            raise ValueError("coefficient grid must start at t = 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("coefficient grid must be strictly increasing")
        if abs(self.values[0]) > 1e-12:
            raise ValueError("first-order coefficient must vanish at t = 0")

    @property
    def label(self) -> str:
        return f"exc:p{self.target.flipped_plaquette}:{self.target.base.hex}"

    @property
    def omega0(self) -> float:
        return self.e_target - self.e_initial

    def index_of(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if not math.isclose(self.times[k], t, rel_tol=0.0, abs_tol=1e-12):
            raise ValueError(f"t={t} is not on the series grid")
        return k


def coefficient_closed_form(m_sign: int, d: float, delta: float, t):
    """Closed-form coefficient for the exponential drive.

    Returns m_sign * (a + i b) with a, b as in the module docstring;
    accepts scalar or array t >= 0.  The Taylor branch handles
    |delta * t| < 1e-4 including delta = 0 exactly.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("time must be >= 0")
    x = delta * t_arr
    series = np.abs(x) < RESONANCE_SERIES_THRESHOLD

    if delta != 0.0:
        # stable main branch: 1 - cos(x) = 2 sin(x/2)^2
        a = np.where(series, 0.0, d * (2.0 * np.sin(x / 2.0) ** 2) / delta)
        b = np.where(series, 0.0, -d * np.sin(x) / delta)
    else:
        a = np.zeros_like(t_arr)
        b = np.zeros_like(t_arr)

    if np.any(series):
        ts = np.where(series, t_arr, 0.0)
        xs = delta * ts
        a = np.where(series, d * (delta * ts * ts / 2.0) * (1.0 - xs * xs / 12.0), a)
        b = np.where(series, -d * ts * (1.0 - xs * xs / 6.0), b)

    out = np.asarray((a + 1j * b) * m_sign)
    return complex(out) if t_arr.ndim == 0 else out


def _adaptive_simpson(f, a: float, b: float, tol: float):
    """Adaptive Simpson for complex integrands; returns (value, err_est)."""

    def simpson(fa, fm, fb, h):
        return (h / 6.0) * (fa + 4.0 * fm + fb)

    m0 = 0.5 * (a + b)
    stack = [(a, b, f(a), f(m0), f(b), None, tol, 0)]
    total = 0.0 + 0.0j
    err_total = 0.0
    panels = 0
    while stack:
        lo, hi, flo, fmid, fhi, s_whole, tol_loc, depth = stack.pop()
        panels += 1
        if panels > _QUAD_MAX_PANELS:
            raise RuntimeError(
                f"quadrature did not converge within panel budget; "
                f"accumulated error estimate {err_total:.3e}"
            )
        h = hi - lo
        mid = 0.5 * (lo + hi)
        if s_whole is None:
            s_whole = simpson(flo, fmid, fhi, h)
        flm = f(0.5 * (lo + mid))
        frm = f(0.5 * (mid + hi))
        s_left = simpson(flo, flm, fmid, h / 2.0)
        s_right = simpson(fmid, frm, fhi, h / 2.0)
        err = abs(s_left + s_right - s_whole) / 15.0
        if err <= tol_loc or depth >= _QUAD_MAX_DEPTH:
            if depth >= _QUAD_MAX_DEPTH and err > tol_loc:
                raise RuntimeError(
                    f"quadrature hit max depth; local error estimate {err:.3e}"
                )
            total += s_left + s_right + (s_left + s_right - s_whole) / 15.0
            err_total += err
            continue
        stack.append((lo, mid, flo, flm, fmid, s_left, tol_loc / 2.0, depth + 1))
        stack.append((mid, hi, fmid, frm, fhi, s_right, tol_loc / 2.0, depth + 1))
    return total, err_total


def coefficient_quadrature(
    m: complex, drive: DriveSpec, delta_e: float, t: float, tol: float
) -> complex:
    """Numerical evaluation of the defining coefficient integral.

    c(t) = (1/i) * integral_0^t exp(i delta_e t') B(t') (m / D_ref) dt'
    where D_ref is the drive's amplitude field (the normalization under
    which m was computed).
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if t < 0:
        raise ValueError("time must be >= 0")
    if t == 0 or m == 0:
        return 0.0 + 0.0j
    d_ref = drive.amplitude
    if d_ref == 0:
        return 0.0 + 0.0j
    scale = m / d_ref

    def integrand(tp: float) -> complex:
        return -1j * np.exp(1j * delta_e * tp) * complex(drive.b_of(tp)) * scale

    value, _ = _adaptive_simpson(integrand, 0.0, float(t), tol)
    return value


def connected_targets(
    geom: LatticeGeometry,
    params: CouplingParams,
    initial: FlipConfig,
    drive_plaquette: int,
    engine: str = "label",
) -> list[ExcitedLabel]:
    """Excited labels with a nonzero drive matrix element from ``initial``."""
    ref = params if params.d > 0 else CouplingParams(
        params.jx, params.jy, params.jz, d=1.0, omega=params.omega
    )
    out = []
    for j in range(geom.n_plaquettes):
        target = excite(initial, j)
        m = perturbation_element(
            geom, initial, target, ref, drive_plaquette=drive_plaquette,
            engine=engine,
        )
        if m != 0:
            out.append(target)
    return out


def evolve_coefficients(
    geom: LatticeGeometry,
    params: CouplingParams,
    drive: DriveSpec,
    initial: FlipConfig,
    targets,
    times,
    engine: str = "label",
    quad_tol: float = 1e-10,
) -> list[CoefficientSeries]:
    """One first-order CoefficientSeries per target state.

    The initial state carries zeroth-order amplitude one and no series of
    its own.  Targets whose drive matrix element vanishes get identically
    zero series.
    """
    times = np.asarray(times, dtype=float)
    if len(times) == 0 or times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ValueError("time grid must start at 0 and increase strictly")
    if drive.kind == "exponential" and drive.amplitude != params.d:
        raise ValueError(
            "exponential drive amplitude must match CouplingParams.d"
        )

    e_init = energy_expectation(geom, params, initial, engine=engine)
    ordered = sorted(targets, key=lambda tg: (tg.flipped_plaquette, tg.base.bits))
    out = []
    for target in ordered:
        e_t = energy_expectation(geom, params, target.base, target, engine=engine)
        m = perturbation_element(
            geom, initial, target, params,
            drive_plaquette=drive.plaquette, engine=engine,
        )
        if m == 0:
            values = np.zeros(len(times), dtype=complex)
        elif drive.kind == "exponential":
            # c = (M/D) * closed_form(D) = M * closed_form at unit amplitude
            delta = (e_t - e_init) - drive.omega
            unit = coefficient_closed_form(1, 1.0, delta, times)
            values = m * np.asarray(unit, dtype=complex)
        else:
            values = np.array(
                [
                    coefficient_quadrature(m, drive, e_t - e_init, tk, quad_tol)
                    for tk in times
                ],
                dtype=complex,
            )
        out.append(
            CoefficientSeries(
                target=target,
                e_target=e_t,
                e_initial=e_init,
                times=times,
                values=values,
            )
        )
    return out
