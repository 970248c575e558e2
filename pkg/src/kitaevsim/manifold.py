"""Flip configurations and product kets of the degenerate ground manifold.

A flip configuration is a bit set over the N plaquettes; bit p set means
all six spins of plaquette p are flipped relative to the all-plus
reference.  A site's sign is (-1)**(number of set incident plaquettes).
An excitation on plaquette i additionally flips the owner-assigned sign
of the site at plaquette i's third position.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .lattice import LatticeGeometry
from .pauli import HILBERT_CAP_SITES, product_ket

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlipConfig:
    """Bit set over N plaquettes; bit p set <=> plaquette p fully flipped."""

    bits: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("plaquette count must be nonnegative")
        if not 0 <= self.bits < (1 << self.n):
            raise ValueError(f"bits 0x{self.bits:x} out of range for n={self.n}")

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def contains(self, p: int) -> bool:
        return bool((self.bits >> p) & 1)

    @property
    def hex(self) -> str:
        return f"0x{self.bits:x}"


@dataclass(frozen=True)
class ExcitedLabel:
    """A flip configuration with the third spin of one plaquette flipped."""

    base: FlipConfig
    flipped_plaquette: int

    def __post_init__(self) -> None:
        if not 0 <= self.flipped_plaquette < self.base.n:
            raise ValueError(
                f"plaquette {self.flipped_plaquette} out of range "
                f"for n={self.base.n}"
            )


def excite(config: FlipConfig, i: int) -> ExcitedLabel:
    """Label the state obtained by flipping plaquette i's third spin."""
    return ExcitedLabel(base=config, flipped_plaquette=i)


def enumerate_weight_class(n: int, k: int) -> list[FlipConfig]:
    """All C(n, k) configurations of weight k, in lexicographic order."""
    if not 0 <= k <= n:
        raise ValueError(f"weight {k} out of range for n={n}")
    out = []
    for positions in combinations(range(n), k):
        bits = 0
        for p in positions:
            bits |= 1 << p
        out.append(FlipConfig(bits=bits, n=n))
    return out


def flip_signature(
    geom: LatticeGeometry,
    config: FlipConfig,
    excitation: ExcitedLabel | None = None,
) -> np.ndarray:
    """Per-site signs (+-1) of the labeled product state.

    The sign of each site is the parity of its flipped incident
    plaquettes; an excitation negates one more site, the third-position
    site of the excited plaquette.
    """
    if config.n != geom.n_plaquettes:
        raise ValueError(
            f"config has {config.n} plaquettes, geometry has {geom.n_plaquettes}"
        )
    if excitation is not None and excitation.base != config:
        raise ValueError("excitation.base does not match the given config")

    signs = np.ones(geom.n_sites, dtype=np.int8)
    for s in range(geom.n_sites):
        flipped = sum(
            1 for p, _ in geom.site_plaquettes[s] if config.contains(p)
        )
        if flipped % 2:
            signs[s] = -1

    if excitation is not None:
        i = excitation.flipped_plaquette
        s3 = geom.position3_site(i)
        if geom.owner[s3] != i:
            # the flip lands on the owner-assigned component, which may not
            # be the z label plaquette i would use for this site
            log.debug(
                "excited plaquette %d does not own its third site %d "
                "(owner %d, component %s)",
                i, s3, geom.owner[s3], geom.site_components[s3],
            )
        signs[s3] = -signs[s3]
    return signs


def signature_kernel(geom: LatticeGeometry) -> list[FlipConfig]:
    """Basis of flip configurations whose site signature is the identity.

    Distinct configurations collide exactly when the plaquette-to-site
    incidence matrix has a nontrivial mod-2 kernel; this happens on tori
    whose plaquettes admit a proper three-coloring (both dimensions
    divisible by three), where two whole color classes cover every site
    twice.  A nonempty basis is a hard diagnostic: the 2**N manifold
    coordinates then over-count the distinct product states.
    """
    rows = []
    for p in range(geom.n_plaquettes):
        site_mask = 0
        for s in geom.plaquettes[p]:
            site_mask |= 1 << s
        rows.append((site_mask, 1 << p))

    # XOR basis over GF(2), keyed by each stored row's lowest set bit
    kernel = []
    pivots: dict[int, tuple[int, int]] = {}
    for site_mask, subset in rows:
        while site_mask:
            low = site_mask & -site_mask
            if low not in pivots:
                pivots[low] = (site_mask, subset)
                break
            pivot_mask, pivot_subset = pivots[low]
            site_mask ^= pivot_mask
            subset ^= pivot_subset
        if site_mask == 0:
            kernel.append(FlipConfig(bits=subset, n=geom.n_plaquettes))
    return kernel


def build_product_ket(
    geom: LatticeGeometry,
    config: FlipConfig,
    excitation: ExcitedLabel | None = None,
    cap: int = HILBERT_CAP_SITES,
) -> np.ndarray:
    """Explicit unit-norm product vector in the 2**n_sites Hilbert space."""
    if geom.n_sites > cap:
        raise ValueError(
            f"{geom.n_sites} sites exceeds the Hilbert cap of {cap} sites"
        )
    signs = flip_signature(geom, config, excitation)
    return product_ket(geom.site_components, signs)
