import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from modflow import toric
from modflow.modular import check_bulk_a1, cmi, region_entropy
from modflow.stabilizer import CSSState, gf2_nullspace, gf2_rank, toric_css

LN2 = np.log(2)


def test_gf2_basics():
    m = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    assert gf2_rank(m) == 2
    ns = gf2_nullspace(m)
    assert ns.shape == (1, 3) and not np.any((m @ ns.T) % 2)


def test_css_counts():
    css = toric_css(3, 3)
    assert css.n == 18
    # 9 vertex checks with one relation; Z part completes a full stabilizer group
    assert gf2_rank(css.x_gens) == 8 and gf2_rank(css.z_gens) == 10


def test_single_edge_and_star():
    css = toric_css(3, 3)
    assert css.entropy([0]) == pytest.approx(LN2)
    # the four edges of a vertex star carry one X check: S = (4 - 1) ln 2
    star = [0, 1, 4, 13]
    assert css.entropy(star) == pytest.approx(3 * LN2)


def test_annulus_and_a1(toric_state):
    css = toric_css(3, 3)
    A, B, C = toric.annulus_regions()
    assert abs(cmi(toric_state, A, B, C) - 2 * LN2) <= 1e-8
    assert abs(css.cmi(A, B, C) - 2 * LN2) <= 1e-12
    assert abs(check_bulk_a1(toric_state, toric.A1_REGIONS)) <= 1e-10


def test_markov_tripartition_entropy_law(toric_state):
    # plaquette-pair layout: I(B:D|C) = 0
    r = toric.A1_REGIONS
    assert abs(cmi(toric_state, r.B, r.C, r.D)) <= 1e-10


def test_deform_preconditions(toric_state):
    from modflow.imf import deform_regions_check
    chk = deform_regions_check(toric_state, toric.DEFORM_REGIONS)
    assert chk["ok"]
    regs = set().union(*map(set, toric.DEFORM_REGIONS.values()))
    assert regs == set(range(18))


def test_pair_clusters_screen():
    pairs = toric.pair_clusters()
    assert sorted(s for p in pairs for s in p) == list(range(18))
    owner = {s: k for k, v in toric.DEFORM_REGIONS.items() for s in v}
    for p in pairs:
        if len(p) == 2:
            kinds = {owner[p[0]], owner[p[1]]}
            assert not ({"C'", "M"} & kinds and "E" in kinds)
            assert kinds != {"D", "C'"}


@given(st.sets(st.integers(0, 17), min_size=1, max_size=9))
def test_gf2_counter_matches_state(toric_state, region):
    css = toric_css(3, 3)
    assert abs(css.entropy(sorted(region)) - region_entropy(toric_state, sorted(region))) <= 1e-9
