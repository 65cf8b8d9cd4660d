"""Lattice geometry, regions and the tripartition templates used by the diagnostics.

Coordinates are stored as floats so that the edge lattice of the toric code
(sites on bond midpoints) shares the same machinery as ordinary vertex
lattices.  All distances use the minimum-image convention on periodic axes.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidGeometry, InvalidParameter, InvalidRegion, TopologyViolation

DEFORMATION_CASES = ("A->Ax", "B->By", "C->Cz", "A->Ax'", "B->Bx'", "C->Cz'")
_CASE_TARGET = {"A->Ax": "A", "B->By": "B", "C->Cz": "C", "A->Ax'": "A", "B->Bx'": "B", "C->Cz'": "C"}


@dataclass(frozen=True, eq=False)
class Lattice:
    """Finite two-dimensional lattice with one tensor factor per site."""

    width: int
    height: int
    periodic: tuple[bool, bool]
    local_dims: tuple[int, ...]
    coords: np.ndarray
    bond_length: float = 1.0
    kind: str = "vertex"

    def __post_init__(self):
        if len(self.local_dims) != len(self.coords):
            raise InvalidGeometry("one local dimension per site required")
        if any(d < 2 for d in self.local_dims):
            raise InvalidGeometry("every local dimension must be >= 2")

    @property
    def n_sites(self) -> int:
        return len(self.local_dims)

    @property
    def hilbert_dim(self) -> int:
        return int(np.prod(self.local_dims, dtype=object))

    def index(self, coord) -> int:
        hits = np.flatnonzero(np.all(np.isclose(self.coords, np.asarray(coord, float)), axis=1))
        if len(hits) != 1:
            raise InvalidGeometry(f"no site at {coord}")
        return int(hits[0])

    def displacement(self, center) -> np.ndarray:
        """Minimum-image displacement of every site from ``center``."""
        d = self.coords - np.asarray(center, float)[None, :]
        for ax, size in enumerate((self.width, self.height)):
            if self.periodic[ax]:
                d[:, ax] -= size * np.round(d[:, ax] / size)
        return d

    def neighbors(self) -> list[list[int]]:
        out = []
        for i in range(self.n_sites):
            d = self.displacement(self.coords[i])
            r = np.hypot(d[:, 0], d[:, 1])
            nb = np.flatnonzero((r > 1e-9) & (r <= self.bond_length + 1e-9))
            out.append([int(j) for j in nb])
        return out

    def all_sites(self) -> "Region":
        return Region(range(self.n_sites), "all")


def build_torus_lattice(width: int, height: int, local_dim: int) -> Lattice:
    """Periodic square lattice, sites ordered row-major (index = y * width + x)."""
    if width < 2 or height < 2:
        raise InvalidGeometry("torus needs width, height >= 2")
    if local_dim < 2:
        raise InvalidGeometry("local dimension must be >= 2")
    ys, xs = np.divmod(np.arange(width * height), width)
    coords = np.stack([xs, ys], axis=1).astype(float)
    return Lattice(width, height, (True, True), (local_dim,) * (width * height), coords)


def build_chain(n: int, local_dim: int = 2, periodic: bool = False) -> Lattice:
    if n < 2:
        raise InvalidGeometry("chain needs at least two sites")
    coords = np.stack([np.arange(n), np.zeros(n)], axis=1).astype(float)
    return Lattice(n, 1, (periodic, False), (local_dim,) * n, coords)


def build_edge_lattice(lx: int, ly: int) -> Lattice:
    """Qubits on the bonds of an lx x ly torus.

    Cell (x, y) owns the horizontal bond at (x + 1/2, y) (index 2*(y*lx+x)) and
    the vertical bond at (x, y + 1/2) (index 2*(y*lx+x) + 1).  Two bonds are
    neighbours when they meet at a right angle, i.e. at distance 1/sqrt(2).
    """
    if lx < 2 or ly < 2:
        raise InvalidGeometry("edge lattice needs lx, ly >= 2")
    coords = []
    for y in range(ly):
        for x in range(lx):
            coords.append((x + 0.5, y))
            coords.append((x, y + 0.5))
    return Lattice(lx, ly, (True, True), (2,) * (2 * lx * ly), np.array(coords, float),
                   bond_length=np.sqrt(0.5), kind="edge")


@dataclass(frozen=True)
class Region:
    sites: tuple[int, ...]
    label: str = ""

    def __init__(self, sites: Iterable[int] = (), label: str = ""):
        s = tuple(sorted({int(i) for i in sites}))
        if any(i < 0 for i in s):
            raise InvalidRegion("negative site index")
        object.__setattr__(self, "sites", s)
        object.__setattr__(self, "label", label)

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, i):
        return i in self.sites

    def __or__(self, other: "Region") -> "Region":
        return Region(self.sites + tuple(as_region(other).sites), self.label + as_region(other).label)

    def __sub__(self, other: "Region") -> "Region":
        drop = set(as_region(other).sites)
        return Region((i for i in self.sites if i not in drop), self.label)

    def isdisjoint(self, other: "Region") -> bool:
        return set(self.sites).isdisjoint(as_region(other).sites)

    def to_list(self) -> list[int]:
        return list(self.sites)


def as_region(x) -> Region:
    return x if isinstance(x, Region) else Region(x)


def complement(lattice_or_n, region) -> Region:
    n = lattice_or_n if isinstance(lattice_or_n, int) else lattice_or_n.n_sites
    keep = set(as_region(region).sites)
    return Region((i for i in range(n) if i not in keep), "~" + as_region(region).label)


def _check_disjoint(*regions: Region):
    for i, r in enumerate(regions):
        for s in regions[i + 1:]:
            if not r.isdisjoint(s):
                raise InvalidRegion(f"regions {r.label!r} and {s.label!r} overlap")


@dataclass(frozen=True)
class Tripartition:
    A: Region
    B: Region
    C: Region
    orientation: str = "counterclockwise"
    geometry_tag: str = "custom"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        _check_disjoint(self.A, self.B, self.C)
        if self.orientation not in ("counterclockwise", "clockwise"):
            raise InvalidParameter(f"unknown orientation {self.orientation!r}")

    @property
    def AB(self) -> Region:
        return Region(self.A.sites + self.B.sites, "AB")

    @property
    def BC(self) -> Region:
        return Region(self.B.sites + self.C.sites, "BC")

    @property
    def ABC(self) -> Region:
        return Region(self.A.sites + self.B.sites + self.C.sites, "ABC")

    def reversed(self) -> "Tripartition":
        """The (C, B, A) tripartition, i.e. the opposite orientation."""
        flip = "clockwise" if self.orientation == "counterclockwise" else "counterclockwise"
        return Tripartition(Region(self.C.sites, "A"), Region(self.B.sites, "B"),
                            Region(self.A.sites, "C"), flip, self.geometry_tag, dict(self.meta))

    def to_dict(self) -> dict:
        return {"A": self.A.to_list(), "B": self.B.to_list(), "C": self.C.to_list(),
                "orientation": self.orientation, "geometry_tag": self.geometry_tag,
                "meta": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.meta.items()}}


@dataclass(frozen=True)
class A1Regions:
    B: Region
    C: Region
    D: Region

    def __post_init__(self):
        _check_disjoint(self.B, self.C, self.D)


@dataclass(frozen=True)
class DeformationSpec:
    case: str
    moved_sites: Region

    def __post_init__(self):
        if self.case not in DEFORMATION_CASES:
            raise InvalidParameter(f"unknown deformation case {self.case!r}")
        object.__setattr__(self, "moved_sites", as_region(self.moved_sites))


def _check_fits(lattice: Lattice, center, radius: float):
    if radius <= 0:
        raise InvalidGeometry("radius must be positive")
    for ax, size in enumerate((lattice.width, lattice.height)):
        if lattice.periodic[ax]:
            if 2 * radius >= size:
                raise InvalidGeometry("disk wraps the torus")
        elif center[ax] - radius < -1e-9 or center[ax] + radius > size - 1 + 1e-9:
            raise InvalidGeometry("disk leaves the open lattice")


def _angles(lattice: Lattice, center) -> tuple[np.ndarray, np.ndarray]:
    d = lattice.displacement(center)
    r2 = d[:, 0] ** 2 + d[:, 1] ** 2
    ang = np.mod(np.arctan2(d[:, 1], d[:, 0]), 2 * np.pi)
    return r2, ang


def tripartite_disk(lattice: Lattice, center, radius: float,
                    cut_angles: Sequence[float] = (0.0, 120.0, 240.0),
                    orientation: str = "counterclockwise") -> Tripartition:
    """Split the disk ``|r - center| <= radius`` into three angular sectors.

    ``cut_angles`` are in degrees; A spans [c0, c1), B spans [c1, c2) and C the
    rest, measured counterclockwise (or clockwise for the opposite
    orientation).  The site at the center, if any, belongs to A.
    """
    center = np.asarray(center, float)
    _check_fits(lattice, center, radius)
    c0, c1, c2 = (np.deg2rad(a) for a in cut_angles)
    if not (c0 < c1 < c2 < c0 + 2 * np.pi):
        raise InvalidGeometry("cut angles must increase within one turn")
    r2, ang = _angles(lattice, center)
    inside = r2 <= radius ** 2 + 1e-9
    phi = np.mod(ang - c0, 2 * np.pi) if orientation == "counterclockwise" else np.mod(c0 - ang, 2 * np.pi)
    phi[r2 < 1e-18] = 0.0
    sec = np.where(phi < c1 - c0, 0, np.where(phi < c2 - c0, 1, 2))
    regs = [Region(np.flatnonzero(inside & (sec == k)), lab) for k, lab in enumerate("ABC")]
    if any(len(r) == 0 for r in regs):
        raise InvalidGeometry("an angular sector is empty; enlarge the radius")
    meta = {"center": tuple(float(c) for c in center), "radius": float(radius),
            "cut_angles": tuple(float(a) for a in cut_angles),
            "sizes": tuple(len(r) for r in regs)}
    tri = Tripartition(*regs, orientation=orientation, geometry_tag="disk-corner", meta=meta)
    meta["triple_point"] = _triple_point(lattice, tri, center)
    return tri


def _triple_point(lattice: Lattice, tri: Tripartition, center):
    """Nearest unit plaquette touching all of A, B and C (vertex lattices only)."""
    if lattice.kind != "vertex" or lattice.height < 2:
        return None
    owner = np.full(lattice.n_sites, -1)
    for k, r in enumerate((tri.A, tri.B, tri.C)):
        owner[list(r.sites)] = k
    best = None
    for i in range(lattice.n_sites):
        x, y = lattice.coords[i]
        corners = [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)]
        idx = []
        for cx, cy in corners:
            if lattice.periodic[0]:
                cx %= lattice.width
            if lattice.periodic[1]:
                cy %= lattice.height
            if cx >= lattice.width or cy >= lattice.height:
                break
            idx.append(int(cy * lattice.width + cx))
        if len(idx) != 4 or {0, 1, 2} - set(owner[idx]):
            continue
        d = lattice.displacement(center)[i] + 0.5
        key = (round(float(d @ d), 9), min(idx))
        if best is None or key < best[0]:
            best = (key, tuple(sorted(idx)))
    return None if best is None else best[1]


def tripartite_chain(n_sites: int, sizes: Sequence[int], start: int = 0) -> Tripartition:
    """Contiguous A|B|C blocks of a path, beginning at ``start``."""
    a, b, c = sizes
    if min(sizes) < 1 or start + a + b + c > n_sites:
        raise InvalidGeometry("chain blocks do not fit")
    A = Region(range(start, start + a), "A")
    B = Region(range(start + a, start + a + b), "B")
    C = Region(range(start + a + b, start + a + b + c), "C")
    return Tripartition(A, B, C, geometry_tag="chain", meta={"sizes": (a, b, c), "start": start})


def annulus_partition_BCD(lattice: Lattice, center, radii: Sequence[float],
                          metric: str = "euclidean", split_angle: float = 0.0) -> A1Regions:
    """C is the inner disk; the surrounding band is cut in half into B and D.

    With ``metric="chebyshev"`` the disk and band are squares, which is the
    only sensible shape on very small lattices.
    """
    r_in, r_out = radii
    if r_in < 0 or r_out <= r_in:
        raise InvalidGeometry("radii must satisfy 0 <= r_in < r_out")
    center = np.asarray(center, float)
    _check_fits(lattice, center, r_out)
    d = lattice.displacement(center)
    if metric == "euclidean":
        r = np.hypot(d[:, 0], d[:, 1])
    elif metric == "chebyshev":
        r = np.max(np.abs(d), axis=1)
    else:
        raise InvalidParameter(f"unknown metric {metric!r}")
    ang = np.mod(np.arctan2(d[:, 1], d[:, 0]) - np.deg2rad(split_angle), 2 * np.pi)
    C = Region(np.flatnonzero(r <= r_in + 1e-9), "C")
    band = (r > r_in + 1e-9) & (r <= r_out + 1e-9)
    B = Region(np.flatnonzero(band & (ang < np.pi)), "B")
    D = Region(np.flatnonzero(band & (ang >= np.pi)), "D")
    if len(C) == 0 or len(B) == 0 or len(D) == 0:
        raise InvalidGeometry("empty band in annulus partition")
    return A1Regions(B, C, D)


def is_connected(neighbors: list[list[int]], sites: Iterable[int]) -> bool:
    s = set(sites)
    if not s:
        return True
    start = next(iter(s))
    seen = {start}
    todo = deque([start])
    while todo:
        i = todo.popleft()
        for j in neighbors[i]:
            if j in s and j not in seen:
                seen.add(j)
                todo.append(j)
    return len(seen) == len(s)


def _touching(neighbors, sites, regions: dict[str, Region]) -> set[str]:
    out = set()
    for name, reg in regions.items():
        rs = set(reg.sites)
        if any(j in rs for i in sites for j in neighbors[i]):
            out.add(name)
    return out


def apply_deformation(lattice: Lattice, tri: Tripartition, spec: DeformationSpec,
                      neighbors: list[list[int]] | None = None) -> Tripartition:
    """Reassign ``spec.moved_sites`` to the case's target region.

    Raises TopologyViolation if any of A, B, C becomes disconnected or the
    complement of ABC splits (a hole was created).
    """
    nb = neighbors if neighbors is not None else lattice.neighbors()
    target = _CASE_TARGET[spec.case]
    moved = set(spec.moved_sites.sites)
    if not moved:
        raise InvalidParameter("deformation moves no sites")
    regs = {"A": tri.A, "B": tri.B, "C": tri.C}
    new = {}
    for name, reg in regs.items():
        keep = [i for i in reg.sites if i not in moved]
        if name == target:
            keep += list(moved)
        new[name] = Region(keep, name)
    for name, reg in new.items():
        if len(reg) == 0 or not is_connected(nb, reg.sites):
            raise TopologyViolation(f"region {name} is empty or disconnected after {spec.case}")
    out = Tripartition(new["A"], new["B"], new["C"], tri.orientation, tri.geometry_tag,
                       dict(tri.meta, deformation=spec.case))
    if tri.geometry_tag == "disk-corner":
        if not is_connected(nb, complement(lattice, out.ABC).sites):
            raise TopologyViolation("deformation punches a hole into ABC")
    return out


def standard_deformations(lattice: Lattice, tri: Tripartition) -> list[DeformationSpec]:
    """One single-site deformation per case, chosen deterministically.

    Away-from-corner moves take an exterior site touching only the target
    region; the primed moves take an exterior site at the A|B (x') or C|A
    (z') junction on the outer boundary.
    """
    nb = lattice.neighbors()
    regs = {"A": tri.A, "B": tri.B, "C": tri.C}
    ext = complement(lattice, tri.ABC).sites
    center = tri.meta.get("center")
    cuts = np.deg2rad(tri.meta.get("cut_angles", (0.0, 120.0, 240.0)))
    if center is not None:
        _, ang = _angles(lattice, center)
    else:
        ang = np.zeros(lattice.n_sites)

    def pick(case, target, other, aim):
        # strict candidates touch exactly the wanted regions; relaxed ones
        # touch the target and sit diagonally next to ``other`` (square-lattice
        # junctions).  Either way the move must keep the topology.
        want = {target} | ({other} if other else set())
        strict = [i for i in ext if touch[i] == want]
        relaxed = [i for i in ext if target in touch[i] and want <= touch[i] | near[i]
                   and i not in strict]
        for cands in (strict, relaxed):
            dist = [abs(np.angle(np.exp(1j * (ang[i] - aim)))) for i in cands]
            for _, i in sorted(zip(dist, cands)):
                spec = DeformationSpec(case, Region([i], case.split(">")[1][1:]))
                try:
                    apply_deformation(lattice, tri, spec, nb)
                except TopologyViolation:
                    continue
                return spec
        raise InvalidGeometry(f"no exterior site available for deformation {case}")

    touch = {i: _touching(nb, [i], regs) for i in ext}
    near = {}
    for i in ext:
        d = lattice.displacement(lattice.coords[i])
        r = np.hypot(d[:, 0], d[:, 1])
        close = np.flatnonzero((r > 1e-9) & (r <= 1.5 * lattice.bond_length))
        near[i] = {k for k, reg in regs.items() if set(reg.sites) & set(close.tolist())}
    sign = 1.0 if tri.orientation == "counterclockwise" else -1.0
    rel = {"A": (cuts[1] - cuts[0]) / 2, "B": (cuts[1] + cuts[2]) / 2 - cuts[0],
           "C": (cuts[2] - cuts[0] + 2 * np.pi) / 2}
    mids = {k: cuts[0] + sign * v for k, v in rel.items()}
    specs = [pick(case, name, None, mids[name])
             for case, name in (("A->Ax", "A"), ("B->By", "B"), ("C->Cz", "C"))]
    ab = cuts[0] + sign * (cuts[1] - cuts[0])
    specs.append(pick("A->Ax'", "A", "B", ab))
    specs.append(pick("B->Bx'", "B", "A", ab))
    specs.append(pick("C->Cz'", "C", "A", cuts[0]))
    return specs
