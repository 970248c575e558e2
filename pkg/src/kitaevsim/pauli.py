"""Dense Pauli kernels on bitmask-indexed state vectors.

Convention: basis index bit k holds site k, bit value 0 = spin up
(sigma^z = +1).  Vectors are complex numpy arrays of length 2**n.
"""

from __future__ import annotations

import numpy as np

HILBERT_CAP_SITES = 16

_SQ2 = 1.0 / np.sqrt(2.0)

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# fixed global-phase convention for single-site eigenvectors
_EIGVEC = {
    ("x", 1): np.array([_SQ2, _SQ2], dtype=complex),
    ("x", -1): np.array([_SQ2, -_SQ2], dtype=complex),
    ("y", 1): np.array([_SQ2, 1j * _SQ2], dtype=complex),
    ("y", -1): np.array([_SQ2, -1j * _SQ2], dtype=complex),
    ("z", 1): np.array([1.0, 0.0], dtype=complex),
    ("z", -1): np.array([0.0, 1.0], dtype=complex),
}


def pauli_eigenvector(component: str, sign: int) -> np.ndarray:
    """Normalized eigenvector of sigma^component with eigenvalue sign."""
    return _EIGVEC[(component, int(sign))].copy()


def n_sites_of(psi: np.ndarray) -> int:
    n = int(len(psi)).bit_length() - 1
    if 2**n != len(psi):
        raise ValueError(f"vector length {len(psi)} is not a power of two")
    return n


def product_ket(components, signs) -> np.ndarray:
    """Tensor product of single-site eigenvectors, site k on bit k."""
    psi = np.ones(1, dtype=complex)
    for comp, s in zip(components, signs):
        psi = np.kron(_EIGVEC[(comp, int(s))], psi)
    return psi


def apply_pauli(psi: np.ndarray, site: int, component: str) -> np.ndarray:
    """sigma_site^component applied to psi (out of place)."""
    n = n_sites_of(psi)
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for {n} sites")
    arr = psi.reshape(2 ** (n - 1 - site), 2, 2**site)
    out = np.empty_like(arr)
    if component == "x":
        out[:, 0, :] = arr[:, 1, :]
        out[:, 1, :] = arr[:, 0, :]
    elif component == "y":
        out[:, 0, :] = -1j * arr[:, 1, :]
        out[:, 1, :] = 1j * arr[:, 0, :]
    elif component == "z":
        out[:, 0, :] = arr[:, 0, :]
        out[:, 1, :] = -arr[:, 1, :]
    else:
        raise ValueError(f"unknown Pauli component {component!r}")
    return out.reshape(psi.shape)


def apply_pauli_string(psi: np.ndarray, ops) -> np.ndarray:
    """Product of single-site Paulis; ops = [(site, component), ...].

    All our strings act on distinct sites, so application order is
    immaterial there; for repeated sites the (site, component) pairs are
    applied left to right, i.e. the first pair acts on psi first.
    """
    out = psi
    for site, comp in ops:
        out = apply_pauli(out, site, comp)
    return out


def dense_from_apply(apply_fn, dim: int) -> np.ndarray:
    """Materialize a linear operator column by column (validation use)."""
    mat = np.empty((dim, dim), dtype=complex)
    e = np.zeros(dim, dtype=complex)
    for k in range(dim):
        e[k] = 1.0
        mat[:, k] = apply_fn(e)
        e[k] = 0.0
    return mat
