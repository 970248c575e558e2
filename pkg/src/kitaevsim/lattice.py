"""Honeycomb torus geometry.

Sites are indexed ``2*(ix + nx*iy) + s`` where ``s=0`` is sublattice A and
``s=1`` is sublattice B.  Each unit cell carries one z bond (A-B inside the
cell); x and y bonds attach A to the B sites of neighbouring cells, giving
``3*nx*ny`` bonds and ``nx*ny`` hexagonal plaquettes on the torus.

A plaquette is stored as an ordered 6-tuple of sites.  The position labels
around a hexagon follow the fixed pattern (x, y, z, x, y, z); with the
ordering used here, each position's label equals the component of the
site's bond that points out of the hexagon.  Every site belongs to three
plaquettes and receives a different label from each one, so product kets
need a single canonical choice: the component assigned by the
lowest-indexed plaquette containing the site (the site's "owner").
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

PLAQUETTE_PATTERN = ("x", "y", "z", "x", "y", "z")
COMPONENTS = ("x", "y", "z")


@dataclass(frozen=True)
class LatticeGeometry:
    """Immutable honeycomb torus: sites, typed bonds, ordered plaquettes."""

    nx: int
    ny: int
    sublattice: tuple[str, ...]
    bonds: tuple[tuple[int, int, str], ...]
    plaquettes: tuple[tuple[int, ...], ...]
    # site -> ((plaquette, position), ...) sorted by plaquette index
    site_plaquettes: tuple[tuple[tuple[int, int], ...], ...]
    owner: tuple[int, ...]
    site_components: tuple[str, ...]

    @property
    def n_sites(self) -> int:
        return 2 * self.nx * self.ny

    @property
    def n_plaquettes(self) -> int:
        return self.nx * self.ny

    def position3_site(self, p: int) -> int:
        """Site sitting at the third position (z label) of plaquette p."""
        return self.plaquettes[p][2]


@dataclass
class ValidationReport:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append((name, passed, detail))

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self) -> list[str]:
        return [name for name, passed, _ in self.checks if not passed]


def build_lattice(nx: int, ny: int) -> LatticeGeometry:
    """Build the nx-by-ny honeycomb torus.

    Requires nx, ny >= 2: a single cell in either direction would wrap a
    plaquette onto itself and alias bonds.
    """
    if nx < 2 or ny < 2:
        raise ValueError(f"honeycomb torus needs nx, ny >= 2, got {nx}x{ny}")

    def site(ix: int, iy: int, s: int) -> int:
        return 2 * ((ix % nx) + nx * (iy % ny)) + s

    n_sites = 2 * nx * ny
    sublattice = tuple("A" if k % 2 == 0 else "B" for k in range(n_sites))

    bonds: list[tuple[int, int, str]] = []
    for comp in COMPONENTS:
        for iy in range(ny):
            for ix in range(nx):
                a = site(ix, iy, 0)
                if comp == "z":
                    b = site(ix, iy, 1)
                elif comp == "x":
                    b = site(ix, iy - 1, 1)
                else:  # y
                    b = site(ix + 1, iy - 1, 1)
                bonds.append((a, b, comp))

    # Hexagon around cell (ix, iy); consecutive sites are bonded and the
    # position labels (x,y,z,x,y,z) match each site's outward bond.
    plaquettes: list[tuple[int, ...]] = []
    for iy in range(ny):
        for ix in range(nx):
            plaquettes.append(
                (
                    site(ix, iy, 0),
                    site(ix, iy, 1),
                    site(ix, iy + 1, 0),
                    site(ix + 1, iy, 1),
                    site(ix + 1, iy, 0),
                    site(ix + 1, iy - 1, 1),
                )
            )

    incidence: list[list[tuple[int, int]]] = [[] for _ in range(n_sites)]
    for p, sites in enumerate(plaquettes):
        for pos, s in enumerate(sites):
            incidence[s].append((p, pos))
    site_plaquettes = tuple(tuple(sorted(inc)) for inc in incidence)

    owner = tuple(inc[0][0] for inc in site_plaquettes)
    site_components = tuple(
        PLAQUETTE_PATTERN[inc[0][1]] for inc in site_plaquettes
    )

    return LatticeGeometry(
        nx=nx,
        ny=ny,
        sublattice=sublattice,
        bonds=tuple(bonds),
        plaquettes=tuple(plaquettes),
        site_plaquettes=site_plaquettes,
        owner=owner,
        site_components=site_components,
    )


def site_component(geom: LatticeGeometry, site: int) -> str:
    """Canonical Pauli component of a site (label from its owner plaquette)."""
    if not 0 <= site < geom.n_sites:
        raise ValueError(f"site {site} out of range for {geom.n_sites} sites")
    return geom.site_components[site]


def validate_geometry(geom: LatticeGeometry) -> ValidationReport:
    """Check every structural invariant; returns a report, never raises."""
    rep = ValidationReport()
    n = geom.n_sites
    n_plaq = geom.n_plaquettes

    rep.add("site_count", len(geom.sublattice) == n == 2 * geom.nx * geom.ny,
            f"{len(geom.sublattice)} sites")

    by_comp = {c: 0 for c in COMPONENTS}
    for _, _, c in geom.bonds:
        by_comp[c] = by_comp.get(c, 0) + 1
    rep.add(
        "bond_count",
        len(geom.bonds) == 3 * geom.nx * geom.ny
        and all(by_comp.get(c, 0) == geom.nx * geom.ny for c in COMPONENTS),
        f"per component {by_comp}",
    )

    rep.add("plaquette_count", len(geom.plaquettes) == geom.nx * geom.ny,
            f"{len(geom.plaquettes)} plaquettes")

    counts = [0] * n
    for sites in geom.plaquettes:
        for s in sites:
            if 0 <= s < n:
                counts[s] += 1
    rep.add("site_in_three_plaquettes", all(c == 3 for c in counts),
            f"min {min(counts)} max {max(counts)}" if counts else "empty")

    # every bond appears as a consecutive (cyclic) pair in exactly 2 plaquettes
    edge_use: dict[frozenset, int] = {}
    for sites in geom.plaquettes:
        for k in range(6):
            edge_use[frozenset((sites[k], sites[(k + 1) % 6]))] = (
                edge_use.get(frozenset((sites[k], sites[(k + 1) % 6])), 0) + 1
            )
    bond_pairs = {frozenset((i, j)) for i, j, _ in geom.bonds}
    two_each = all(edge_use.get(b, 0) == 2 for b in bond_pairs)
    no_stray = all(e in bond_pairs for e in edge_use)
    rep.add("bond_in_two_plaquettes", two_each and no_stray,
            "hexagon edges consistent with bond list" if two_each and no_stray
            else "mismatch between hexagon edges and bonds")

    alternating = all(
        all(geom.sublattice[sites[k]] != geom.sublattice[sites[(k + 1) % 6]]
            for k in range(6))
        for sites in geom.plaquettes
    )
    rep.add("sublattice_alternation", alternating)

    bond_comp = {frozenset((i, j)): c for i, j, c in geom.bonds}
    pattern_ok = True
    for sites in geom.plaquettes:
        comps = sorted(
            bond_comp.get(frozenset((sites[k], sites[(k + 1) % 6])), "?")
            for k in range(6)
        )
        if comps != ["x", "x", "y", "y", "z", "z"]:
            pattern_ok = False
    rep.add("plaquette_edge_components", pattern_ok, "{x,x,y,y,z,z} per hexagon")

    incidence_total = sum(len(inc) for inc in geom.site_plaquettes)
    rep.add("incidence_sum", incidence_total == 6 * n_plaq,
            f"{incidence_total} vs {6 * n_plaq}")

    return rep


def geometry_to_json(geom: LatticeGeometry) -> str:
    """Debug/golden-file dump of the full geometry."""
    doc = {
        "nx": geom.nx,
        "ny": geom.ny,
        "sites": [
            {"id": k, "sublattice": geom.sublattice[k]}
            for k in range(geom.n_sites)
        ],
        "bonds": [{"i": i, "j": j, "component": c} for i, j, c in geom.bonds],
        "plaquettes": [list(p) for p in geom.plaquettes],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
