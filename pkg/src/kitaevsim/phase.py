"""Modulus/argument decomposition of coefficient trajectories.

A coefficient series c(t) is split as c = A exp(i phi) with A = |c| >= 0
and phi the minimally-jumping continuation of arg c.  The complex
exponent ln A + i phi is the quantity whose real part governs the
stability of the initial state (growing |c| = transition underway) and
whose imaginary part shifts effective energy levels.

Samples where A falls below a zero threshold are flagged singular: the
argument is genuinely undefined at c = 0, those samples are excluded
from slope estimation, and the unwrapping branch restarts after each
singular gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .perturbation import CoefficientSeries

GROWING = "GROWING"
DECAYING = "DECAYING"

TWO_PI = 2.0 * math.pi


@dataclass
class SubGeometricPhase:
    """Decomposed series: moduli A, log-moduli a, unwrapped arguments phi."""

    times: np.ndarray
    modulus: np.ndarray       # A >= 0
    log_modulus: np.ndarray   # a = ln A, -inf at singular samples
    angle: np.ndarray         # unwrapped phi, 0.0 placeholder at singular samples
    singular: np.ndarray      # bool flags where A <= eps_zero
    eps_zero: float

    def reconstruct(self) -> np.ndarray:
        return self.modulus * np.exp(1j * self.angle)


def decompose_values(times, values, eps_zero: float | None = None) -> SubGeometricPhase:
    """Decompose raw complex samples; see :func:`decompose`."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=complex)
    if len(times) != len(values):
        raise ValueError("times and values length mismatch")

    modulus = np.abs(values)
    peak = float(modulus.max()) if len(modulus) else 0.0
    if eps_zero is None:
        eps_zero = 1e-12 * peak if peak > 0 else math.inf
    elif eps_zero <= 0:
        raise ValueError("eps_zero must be positive")

    singular = modulus <= eps_zero
    log_modulus = np.full(len(values), -math.inf)
    np.log(modulus, out=log_modulus, where=~singular)

    angle = np.zeros(len(values))
    prev = -1  # index of previous non-singular sample
    for k in range(len(values)):
        if singular[k]:
            continue
        raw = float(np.angle(values[k]))
        if prev == k - 1:
            # minimal-jump continuation
            angle[k] = raw + TWO_PI * round((angle[prev] - raw) / TWO_PI)
        else:
            # first sample of an arc: branch restarts at the raw argument
            angle[k] = raw
        prev = k

    return SubGeometricPhase(
        times=times,
        modulus=modulus,
        log_modulus=log_modulus,
        angle=angle,
        singular=singular,
        eps_zero=float(eps_zero),
    )


def decompose(series: CoefficientSeries, eps_zero: float | None = None) -> SubGeometricPhase:
    """Split a coefficient series into modulus and unwrapped argument."""
    return decompose_values(series.times, series.values, eps_zero)


def _slopes(phase: SubGeometricPhase) -> np.ndarray:
    """Finite-difference slope of a(t); NaN where not estimable."""
    t = phase.times
    a = phase.log_modulus
    ok = ~phase.singular
    n = len(t)
    slope = np.full(n, np.nan)
    for k in range(n):
        if not ok[k]:
            continue
        left = k - 1 if k - 1 >= 0 and ok[k - 1] else None
        right = k + 1 if k + 1 < n and ok[k + 1] else None
        if left is not None and right is not None:
            slope[k] = (a[right] - a[left]) / (t[right] - t[left])
        elif right is not None:
            slope[k] = (a[right] - a[k]) / (t[right] - t[k])
        elif left is not None:
            slope[k] = (a[k] - a[left]) / (t[k] - t[left])
    return slope


def stability_intervals(
    phase: SubGeometricPhase, slope_tol: float | None = None
) -> list[tuple[float, float, str]]:
    """Maximal runs where ln A grows or decays beyond a slope tolerance.

    Boundaries fall at classification changes and at singular samples.
    """
    ok = ~phase.singular
    if int(ok.sum()) < 3:
        raise ValueError("need at least 3 non-singular samples")
    if slope_tol is None:
        # relative default plus an absolute floor so that constant-modulus
        # series (a identically zero up to roundoff) stay unclassified
        peak = float(np.max(np.abs(phase.log_modulus[ok])))
        slope_tol = 1e-9 * peak + 1e-12
    elif slope_tol < 0:
        raise ValueError("slope_tol must be >= 0")

    slope = _slopes(phase)
    labels = np.zeros(len(slope), dtype=int)
    with np.errstate(invalid="ignore"):
        labels[slope > slope_tol] = 1
        labels[slope < -slope_tol] = -1
    labels[~ok] = 0
    labels[np.isnan(slope)] = 0

    intervals: list[tuple[float, float, str]] = []
    k = 0
    n = len(labels)
    while k < n:
        if labels[k] == 0:
            k += 1
            continue
        start = k
        while k + 1 < n and labels[k + 1] == labels[start]:
            k += 1
        name = GROWING if labels[start] > 0 else DECAYING
        intervals.append((float(phase.times[start]), float(phase.times[k]), name))
        k += 1
    return intervals


def effective_level(e: float, phase: SubGeometricPhase) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise shifted level E - phi(t)/t on t > 0, non-singular samples."""
    mask = (~phase.singular) & (phase.times > 0)
    t = phase.times[mask]
    return t, e - phase.angle[mask] / t


def shifted_transition_frequency(
    e_upper: float,
    phase_upper: SubGeometricPhase,
    e_lower: float,
    phase_lower: SubGeometricPhase,
) -> tuple[np.ndarray, np.ndarray]:
    """Predicted resonance between two levels including their phase shifts.

    Equals the difference of the two effective-level series:
    (E_u - E_l) + (phi_l(t) - phi_u(t)) / t.
    """
    if not np.array_equal(phase_upper.times, phase_lower.times):
        raise ValueError("phase series must share one time grid")
    mask = (
        (~phase_upper.singular) & (~phase_lower.singular) & (phase_upper.times > 0)
    )
    t = phase_upper.times[mask]
    shift = (phase_lower.angle[mask] - phase_upper.angle[mask]) / t
    return t, (e_upper - e_lower) + shift
