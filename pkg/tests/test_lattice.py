import numpy as np
import pytest
from hypothesis import given, strategies as st

from modflow.errors import InvalidGeometry, InvalidParameter, InvalidRegion, TopologyViolation
from modflow.lattice import (DEFORMATION_CASES, DeformationSpec, Region, Tripartition,
                             annulus_partition_BCD, apply_deformation, build_chain,
                             build_edge_lattice, build_torus_lattice, complement, is_connected,
                             standard_deformations, tripartite_chain, tripartite_disk)


@pytest.mark.parametrize("w,h,d,n,dim", [(2, 2, 2, 4, 16), (3, 3, 2, 9, 512)])
def test_torus_counts(w, h, d, n, dim):
    lat = build_torus_lattice(w, h, d)
    assert lat.n_sites == n
    assert lat.hilbert_dim == dim


def test_degenerate_local_dim():
    with pytest.raises(InvalidGeometry):
        build_torus_lattice(2, 2, 1)


def test_index_is_row_major_bijection():
    lat = build_torus_lattice(5, 4, 2)
    idx = [lat.index(c) for c in lat.coords]
    assert idx == list(range(lat.n_sites))
    assert lat.index((2, 1)) == 1 * 5 + 2


def test_disk_sector_counts():
    # independent loop count over the 30x30 grid gives 70, 66, 61
    tri = tripartite_disk(build_torus_lattice(30, 30, 2), (15, 15), 8)
    assert tuple(len(r) for r in (tri.A, tri.B, tri.C)) == (70, 66, 61)
    assert tri.geometry_tag == "disk-corner"


def test_disk_orientation_order():
    lat = build_torus_lattice(30, 30, 2)
    c = lat.index((15, 15))
    d = lat.displacement((15, 15))
    ang = np.degrees(np.arctan2(d[:, 1], d[:, 0])) % 360
    tri = tripartite_disk(lat, (15, 15), 6)
    assert c in tri.A
    assert all(ang[i] < 120 for i in tri.A if i != c)
    assert all(120 <= ang[i] < 240 for i in tri.B)
    assert all(ang[i] >= 240 for i in tri.C)
    rev = tripartite_disk(lat, (15, 15), 6, orientation="clockwise")
    # clockwise from 0 deg, A is the sector just below the positive x axis
    assert all(ang[i] > 240 or ang[i] == 0 for i in rev.A)


def test_disk_errors():
    lat = build_torus_lattice(10, 10, 2)
    with pytest.raises(InvalidGeometry):
        tripartite_disk(lat, (5, 5), 0)
    with pytest.raises(InvalidGeometry):
        tripartite_disk(lat, (5, 5), 5.5)


def test_chain_fallback():
    tri = tripartite_chain(8, (2, 3, 2), start=1)
    assert tri.geometry_tag == "chain"
    assert tri.A.sites == (1, 2) and tri.B.sites == (3, 4, 5) and tri.C.sites == (6, 7)
    with pytest.raises(InvalidGeometry):
        tripartite_chain(5, (2, 2, 2))


def test_annulus_bands():
    a = annulus_partition_BCD(build_torus_lattice(6, 6, 2), (3, 3), (1, 2), metric="chebyshev")
    assert (len(a.B), len(a.C), len(a.D)) == (8, 9, 8)
    assert not set(a.B.sites) & set(a.C.sites) and not set(a.C.sites) & set(a.D.sites)


def test_annulus_errors():
    lat = build_torus_lattice(6, 6, 2)
    with pytest.raises(InvalidGeometry):
        annulus_partition_BCD(lat, (3, 3), (2, 1))
    with pytest.raises(InvalidGeometry):
        annulus_partition_BCD(lat, (2.5, 2.5), (0.1, 2), metric="chebyshev")


def test_overlapping_tripartition_rejected():
    with pytest.raises(InvalidRegion):
        Tripartition(Region([0, 1]), Region([1, 2]), Region([3]))


def test_reversed():
    tri = tripartite_chain(6, (1, 2, 1))
    rev = tri.reversed()
    assert rev.A.sites == tri.C.sites and rev.C.sites == tri.A.sites
    assert rev.orientation == "clockwise"


def test_deformation_grows_A():
    lat = build_torus_lattice(12, 12, 2)
    tri = tripartite_disk(lat, (6, 6), 3)
    specs = standard_deformations(lat, tri)
    assert [s.case for s in specs] == list(DEFORMATION_CASES)
    new = apply_deformation(lat, tri, specs[0])
    assert len(new.A) == len(tri.A) + 1
    assert len(new.B) == len(tri.B) and len(new.C) == len(tri.C)


def test_corner_deformation_touches_two_regions():
    lat = build_torus_lattice(12, 12, 2)
    tri = tripartite_disk(lat, (6, 6), 3)
    spec = standard_deformations(lat, tri)[5]
    assert spec.case == "C->Cz'"
    nb = lat.neighbors()
    site = spec.moved_sites.sites[0]
    touched = {n for n in nb[site]}
    assert touched & set(tri.A.sites) and touched & set(tri.C.sites)
    new = apply_deformation(lat, tri, spec)
    assert site in new.C


def test_disconnecting_move_rejected():
    lat = build_chain(9)
    tri = tripartite_chain(9, (2, 3, 2), start=1)
    # moving the middle of B into A splits B
    with pytest.raises(TopologyViolation):
        apply_deformation(lat, tri, DeformationSpec("A->Ax", Region([4])))


def test_unknown_case():
    with pytest.raises(InvalidParameter):
        DeformationSpec("A->Aq", Region([0]))


def test_edge_lattice_neighbours():
    lat = build_edge_lattice(3, 3)
    assert lat.n_sites == 18
    nb = lat.neighbors()
    assert all(len(n) == 4 for n in nb)
    assert is_connected(nb, range(18))


@given(st.integers(8, 14), st.integers(8, 14), st.floats(1.5, 3.5), st.integers(0, 359))
def test_partition_property(w, h, r, cut):
    lat = build_torus_lattice(w, h, 2)
    tri = tripartite_disk(lat, (w / 2, h / 2), r, (cut, cut + 120, cut + 240))
    sets = [set(x.sites) for x in (tri.A, tri.B, tri.C)]
    assert not (sets[0] & sets[1] or sets[1] & sets[2] or sets[0] & sets[2])
    assert set().union(*sets) <= set(range(lat.n_sites))


@given(st.integers(0, 5))
def test_deformation_preserves_disjointness(k):
    lat = build_torus_lattice(12, 12, 2)
    tri = tripartite_disk(lat, (6, 6), 3)
    spec = standard_deformations(lat, tri)[k]
    new = apply_deformation(lat, tri, spec)
    sets = [set(x.sites) for x in (new.A, new.B, new.C)]
    assert sum(map(len, sets)) == len(set().union(*sets))
    assert len(new.ABC) + len(complement(lat, new.ABC)) == lat.n_sites
