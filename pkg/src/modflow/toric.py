"""Region presets for the 3x3 toric code on the edge lattice.

Edge numbering follows :func:`modflow.lattice.build_edge_lattice`.  Every
preset was checked against the GF(2) entropy counter in
:mod:`modflow.stabilizer` and against the dense ground state.

* ``A1_REGIONS``: two adjacent plaquettes sharing edge 6 (C) with the
  remaining plaquette edges split into B and D.  ``S_BC + S_CD - S_B - S_D = 0``.
* ``ANNULUS``: the ring of eight edges around the star of vertex (0, 0),
  cut into quadrants.  B is two opposite arcs, A and C the other two, so
  C together with A encircles the star and ``I(A:C|B) = 2 ln 2``.
* ``DEFORM_REGIONS``: an ``A, B, C', M, D, E`` assignment with both Markov
  preconditions ``I(C:E|D) = I(D:C'|M) = 0`` (``C = M C'``).
"""
from __future__ import annotations

from .lattice import A1Regions, Lattice, Region, Tripartition, build_edge_lattice, tripartite_disk

LX = LY = 3

A1_REGIONS = A1Regions(Region([0, 1, 3], "B"), Region([6], "C"), Region([7, 9, 12], "D"))

ANNULUS = {"A": [3, 6], "B": [5, 10, 12, 15], "C": [16, 17]}

DEFORM_REGIONS = {
    "A": [0, 13], "B": [1, 10, 11], "C'": [4], "M": [2, 5, 17],
    "D": [8, 9, 14, 15], "E": [3, 6, 7, 12, 16],
}

DISK_CENTER = (0.0, 0.0)
DISK_RADIUS = 1.2
# smaller disk off the vertex: leaves room for all six deformation cases
DEFORM_DISK = ((0.5, 0.0), 1.05, (0.0, 120.0, 240.0))


def edge_lattice() -> Lattice:
    return build_edge_lattice(LX, LY)


def disk_tripartition(lattice: Lattice | None = None) -> Tripartition:
    """Disk of radius 1.2 around vertex (0, 0): sectors of 5, 3 and 4 edges."""
    return tripartite_disk(lattice or edge_lattice(), DISK_CENTER, DISK_RADIUS)


def deformation_tripartition(lattice: Lattice | None = None) -> Tripartition:
    """A = (0, 2, 3, 6), B = (1, 4, 13), C = (12, 15)."""
    center, radius, cuts = DEFORM_DISK
    return tripartite_disk(lattice or edge_lattice(), center, radius, cuts)


def annulus_regions() -> tuple[Region, Region, Region]:
    return tuple(Region(ANNULUS[k], k) for k in "ABC")


def pair_clusters(n: int = 2 * LX * LY) -> list[list[int]]:
    """Pairs of edges such that no pair links C with E or D with C'.

    Random states on these pairs satisfy both preconditions of
    ``DEFORM_REGIONS`` with generic (non-flat) entanglement spectra, so the
    deformation identity is tested beyond a pure global phase.
    """
    owner = {s: k for k, v in DEFORM_REGIONS.items() for s in v}
    c_set = {"C'", "M"}
    forbidden = [(c_set, {"E"}), ({"D"}, {"C'"})]

    def ok(a, b):
        ra, rb = owner[a], owner[b]
        for x, y in forbidden:
            if (ra in x and rb in y) or (rb in x and ra in y):
                return False
        return True

    free = list(range(n))
    pairs = []
    while free:
        a = free.pop(0)
        for b in free:
            if ok(a, b) and owner[a] != owner[b]:
                break
        else:
            b = next((b for b in free if ok(a, b)), None)
            if b is None:
                pairs.append([a])
                continue
        free.remove(b)
        pairs.append([a, b])
    return pairs
