"""Density matrices, sublattice entropy, observables, thermal mixtures.

The evolved state lives in the active basis: the initial configuration
plus every excited label the drive connects to it at first order.  Its
density matrix has diagonal entries |c|^2 (phase-free) while each
off-diagonal entry carries the phase difference of the two states plus
their dynamical-phase mismatch; that structure is what makes the
coefficient phases observable.

Entropy uses the natural logarithm, so a maximally mixed qubit pair
carries ln 2 per qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeGeometry
from .manifold import FlipConfig, build_product_ket
from .pauli import HILBERT_CAP_SITES
from .perturbation import CoefficientSeries

ENTROPY_EIGENVALUE_FLOOR = 1e-14


@dataclass
class DensityMatrix:
    """Complex Hermitian matrix with its basis labels (None = full Hilbert)."""

    matrix: np.ndarray
    labels: tuple[str, ...] | None = None

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def diagnostics(self, tol: float = 1e-10) -> list[str]:
        """Contract violations (empty list = healthy density matrix)."""
        issues = []
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            issues.append("not Hermitian to 1e-12")
        if abs(self.trace - 1.0) > tol:
            issues.append(f"trace {self.trace} deviates from 1")
        evals = np.linalg.eigvalsh(m)
        if evals.min() < -1e-10:
            issues.append(f"negative eigenvalue {evals.min():.3e}")
        return issues

    def to_payload(self) -> dict:
        """JSON-ready form: basis labels plus row-major [re, im] entries."""
        if self.labels is not None:
            basis = list(self.labels)
        else:
            basis = [f"hilbert:{k}" for k in range(self.dim)]
        entries = [
            [float(v.real), float(v.imag)] for v in self.matrix.reshape(-1)
        ]
        return {"basis": basis, "dim": self.dim, "entries": entries}


@dataclass
class ActiveState:
    """Normalized active-basis amplitudes at one instant."""

    labels: tuple[str, ...]
    energies: np.ndarray
    amplitudes: np.ndarray
    t: float
    norm_factor: float  # pre-normalization norm of the raw amplitudes


@dataclass
class ThermalEnsemble:
    """Weighted mixture of pure states; weights follow the chosen statistics."""

    energies: np.ndarray
    states: list[np.ndarray]
    kt: float
    weights: np.ndarray

    def density(self, labels: tuple[str, ...] | None = None) -> DensityMatrix:
        dim = len(self.states[0])
        rho = np.zeros((dim, dim), dtype=complex)
        for p, psi in zip(self.weights, self.states):
            rho += p * np.outer(psi, psi.conj())
        return DensityMatrix(matrix=rho, labels=labels)


def initial_label(config: FlipConfig) -> str:
    return f"cfg:{config.hex}"


def assemble_state(
    coeffs: list[CoefficientSeries], t: float, initial: FlipConfig
) -> ActiveState:
    """Evolved state at time t: zeroth-order initial plus first-order targets.

    Dynamical phases exp(-i E t) are applied to every amplitude and the
    vector is normalized; the pre-normalization norm is reported.
    """
    if not coeffs:
        raise ValueError("need at least one coefficient series")
    e_init = coeffs[0].e_initial
    for s in coeffs:
        if s.e_initial != e_init:
            raise ValueError("series disagree on the initial energy")
    k = coeffs[0].index_of(t)

    labels = [initial_label(initial)]
    energies = [e_init]
    amps = [np.exp(-1j * e_init * t)]
    for s in coeffs:
        labels.append(s.label)
        energies.append(s.e_target)
        amps.append(s.values[k] * np.exp(-1j * s.e_target * t))
    raw = np.asarray(amps, dtype=complex)
    norm = float(np.linalg.norm(raw))
    return ActiveState(
        labels=tuple(labels),
        energies=np.asarray(energies, dtype=float),
        amplitudes=raw / norm,
        t=float(t),
        norm_factor=norm,
    )


def density_matrix(state: ActiveState | np.ndarray) -> DensityMatrix:
    """Pure-state density matrix rho_mn = amp_m * conj(amp_n)."""
    if isinstance(state, ActiveState):
        amps = state.amplitudes
        labels = state.labels
    else:
        amps = np.asarray(state, dtype=complex)
        labels = None
    if abs(np.linalg.norm(amps) - 1.0) > 1e-10:
        raise ValueError("state must be normalized to 1e-10")
    return DensityMatrix(matrix=np.outer(amps, amps.conj()), labels=labels)


def _sublattice_sites(geom: LatticeGeometry, part: str) -> list[int]:
    if part not in ("A", "B"):
        raise ValueError(f"sublattice must be 'A' or 'B', got {part!r}")
    return [k for k in range(geom.n_sites) if geom.sublattice[k] == part]


def reduced_density_matrix(psi: np.ndarray, keep_sites) -> np.ndarray:
    """Reduced density matrix of a pure ket on the kept sites.

    Site k of the ket lives on bit k of the basis index.
    """
    n = int(len(psi)).bit_length() - 1
    if 2**n != len(psi):
        raise ValueError("ket length is not a power of two")
    keep = list(keep_sites)
    if len(set(keep)) != len(keep) or any(not 0 <= s < n for s in keep):
        raise ValueError("keep_sites must be distinct sites of the ket")
    rest = [s for s in range(n) if s not in set(keep)]
    # axis j of the reshaped tensor is site n-1-j
    tensor = psi.reshape([2] * n)
    axes = [n - 1 - s for s in keep] + [n - 1 - s for s in rest]
    block = np.transpose(tensor, axes).reshape(2 ** len(keep), 2 ** len(rest))
    return block @ block.conj().T


def partial_trace_matrix(rho: np.ndarray, n_sites: int, keep_sites) -> np.ndarray:
    """Partial trace of a dense operator over the complement of keep_sites."""
    if rho.shape != (2**n_sites, 2**n_sites):
        raise ValueError("operator shape does not match n_sites")
    keep = list(keep_sites)
    rest = [s for s in range(n_sites) if s not in set(keep)]
    tensor = rho.reshape([2] * (2 * n_sites))
    # row axes: site n-1-s at axis n-1-s; column axes shifted by n_sites
    perm = (
        [n_sites - 1 - s for s in keep]
        + [n_sites - 1 - s for s in rest]
        + [2 * n_sites - 1 - s for s in keep]
        + [2 * n_sites - 1 - s for s in rest]
    )
    dk, dr = 2 ** len(keep), 2 ** len(rest)
    t = np.transpose(tensor, perm).reshape(dk, dr, dk, dr)
    return np.einsum("arbr->ab", t)


def entropy_of_density(
    rho: np.ndarray, floor: float = ENTROPY_EIGENVALUE_FLOOR
) -> float:
    """Von Neumann entropy -sum(lambda ln lambda) over eigenvalues > floor."""
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > floor]
    return float(-np.sum(evals * np.log(evals)))


def reduced_entropy(
    geom: LatticeGeometry,
    full_ket: np.ndarray,
    part: str = "A",
    floor: float = ENTROPY_EIGENVALUE_FLOOR,
    cap: int = HILBERT_CAP_SITES,
) -> tuple[DensityMatrix, float]:
    """Partial trace onto one sublattice and its entanglement entropy."""
    if geom.n_sites > cap:
        raise ValueError(f"{geom.n_sites} sites exceeds the Hilbert cap of {cap}")
    if len(full_ket) != 2**geom.n_sites:
        raise ValueError("ket dimension does not match the lattice")
    if abs(np.linalg.norm(full_ket) - 1.0) > 1e-9:
        raise ValueError("ket must be normalized")
    keep = _sublattice_sites(geom, part)
    rho = reduced_density_matrix(full_ket, keep)
    s = entropy_of_density(rho, floor)
    labels = tuple(f"{part}{k}" for k in range(2 ** len(keep)))
    return DensityMatrix(matrix=rho, labels=labels), s


def embed_active_state(
    geom: LatticeGeometry,
    initial: FlipConfig,
    targets,
    state: ActiveState,
    cap: int = HILBERT_CAP_SITES,
) -> np.ndarray:
    """Lift active-basis amplitudes to the full 2**n_sites Hilbert space.

    ``targets`` must list the excited labels in the same order as the
    coefficient series used to assemble ``state``.
    """
    targets = list(targets)
    if len(state.amplitudes) != len(targets) + 1:
        raise ValueError("state and target list are inconsistent")
    psi = state.amplitudes[0] * build_product_ket(geom, initial, cap=cap)
    for amp, target in zip(state.amplitudes[1:], targets):
        psi = psi + amp * build_product_ket(geom, target.base, target, cap=cap)
    return psi


def observable_expectation(rho: DensityMatrix, op: np.ndarray) -> complex:
    """Tr(rho op); real up to numerical noise for Hermitian op."""
    if op.shape != rho.matrix.shape:
        raise ValueError(
            f"operator shape {op.shape} does not match basis dim {rho.dim}"
        )
    return complex(np.trace(rho.matrix @ op))


def thermal_weights(
    energies,
    kt: float,
    distribution: str = "boltzmann",
    mu: float = 0.0,
) -> np.ndarray:
    """Normalized occupation weights at temperature kt (hbar = k_B = 1).

    kt = 0 resolves to uniform weights over the minimal-energy subset;
    kt = inf gives uniform weights.  "fermi" applies 1/(exp((E-mu)/kt)+1)
    before normalization.
    """
    e = np.asarray(energies, dtype=float)
    if len(e) == 0:
        raise ValueError("empty member list")
    if kt < 0 or math.isnan(kt):
        raise ValueError(f"temperature must be >= 0, got {kt}")
    if distribution not in ("boltzmann", "fermi"):
        raise ValueError(f"unknown distribution {distribution!r}")

    if math.isinf(kt):
        w = np.ones(len(e))
    elif kt == 0.0:
        scale = 1.0 + abs(float(e.min()))
        w = (e <= e.min() + 1e-12 * scale).astype(float)
    elif distribution == "boltzmann":
        w = np.exp(-(e - e.min()) / kt)  # max-shift keeps exponents <= 0
    else:
        x = np.clip((e - mu) / kt, -700.0, 700.0)
        w = 1.0 / (np.exp(x) + 1.0)
    return w / w.sum()


def thermal_ensemble(
    members,
    kt: float,
    distribution: str = "boltzmann",
    mu: float = 0.0,
) -> ThermalEnsemble:
    """Mixture of (energy, pure state) members with statistical weights."""
    members = list(members)
    if not members:
        raise ValueError("empty member list")
    energies = np.array([float(e) for e, _ in members])
    states = [np.asarray(psi, dtype=complex) for _, psi in members]
    dim = len(states[0])
    if any(len(psi) != dim for psi in states):
        raise ValueError("member states must share one basis")
    weights = thermal_weights(energies, kt, distribution, mu)
    return ThermalEnsemble(energies=energies, states=states, kt=kt, weights=weights)


def thermal_mix(
    members,
    kt: float,
    distribution: str = "boltzmann",
    mu: float = 0.0,
    labels: tuple[str, ...] | None = None,
) -> DensityMatrix:
    """Weighted density matrix sum over pure members (no relative phases)."""
    return thermal_ensemble(members, kt, distribution, mu).density(labels)
