import numpy as np
import pytest
from hypothesis import given, strategies as st

from modflow import toric
from modflow.chirality import (ChargeOperator, FitQualityWarning, J_via_overlap, PumpSeries,
                               charge_pump, check_basic_charge_facts, check_J_invariance,
                               check_sigma_invariance, derivative_law, entropy_pump, fit_slope,
                               hall_sigma, modular_commutator_J, overlap_F_J, overlap_F_sigma,
                               sigma_via_overlap, verify_V_cancellation)
from modflow.errors import InvalidParameter, PreconditionViolation
from modflow.exact import (product_state, random_cluster_state, random_state, random_u1_state)
from modflow.lattice import (Region, Tripartition, build_torus_lattice, standard_deformations,
                             tripartite_chain, tripartite_disk)

R = 1 / np.sqrt(2)
TRI = tripartite_chain(8, (2, 3, 2), start=0)


def test_J_examples(toric_state):
    prod = product_state((2,) * 8, [[R, R]] * 8)
    assert modular_commutator_J(prod, TRI) == 0.0
    assert abs(modular_commutator_J(toric_state, toric.disk_tripartition())) <= 1e-8
    psi = random_state((2,) * 8, seed=0)
    assert abs(modular_commutator_J(psi, TRI) + modular_commutator_J(psi, TRI.reversed())) <= 1e-10


def test_J_nonzero_generic():
    psi = random_state((2,) * 8, seed=0)
    assert abs(modular_commutator_J(psi, TRI)) > 1e-4


def test_overlap_F_J_basics():
    psi = random_state((2,) * 8, seed=1)
    assert overlap_F_J(psi, TRI, 0, 0) == pytest.approx(1.0, abs=1e-12)
    # F(x, 0) = sum_a p_a^(1 - ix) over the spectrum of rho_AB: bounded by 1, not unimodular
    from modflow.modular import schmidt_spectrum
    p = schmidt_spectrum(psi, TRI.AB)
    assert abs(overlap_F_J(psi, TRI, 0.7, 0)) == pytest.approx(abs(np.sum(p ** (1 + 0.7j))), abs=1e-12)
    assert abs(overlap_F_J(psi, TRI, 0.7, 0)) <= 1


def test_J_overlap_convergence():
    psi = random_state((2,) * 8, seed=1)
    J = modular_commutator_J(psi, TRI)
    errs = [abs(J_via_overlap(psi, TRI, h) - J) for h in (1e-1, 1e-2, 1e-3)]
    assert errs[-1] <= 1e-4
    order = np.log(errs[0] / errs[1]) / np.log(10)
    assert 1.7 < order < 2.3
    prod = product_state((2,) * 8, [[R, R]] * 8)
    assert abs(J_via_overlap(prod, TRI)) <= 1e-8
    with pytest.raises(InvalidParameter):
        J_via_overlap(psi, TRI, 0.0)


def test_sigma_examples():
    prod = product_state((2,) * 8, [[1, 0], [0, 1]] * 4)
    assert hall_sigma(prod, TRI) == 0.0
    assert abs(sigma_via_overlap(prod, TRI)) <= 1e-10
    psi = random_u1_state((2,) * 8, [1] * 8, 4, seed=2)
    assert abs(sigma_via_overlap(psi, TRI) - hall_sigma(psi, TRI)) <= 1e-3
    with pytest.raises(PreconditionViolation):
        hall_sigma(random_state((2,) * 8, seed=2), TRI)


def test_F_sigma_bounded():
    psi = random_u1_state((2,) * 8, [1] * 8, 4, seed=3)
    for y in (0.3, 1.0, 2.5):
        assert abs(overlap_F_sigma(psi, TRI, None, 0.0, y)) <= 1 + 1e-12


def test_sigma_zero_on_symmetric_markov():
    clusters = [[0, 2], [1, 3], [4, 6], [5, 7]]
    psi = random_cluster_state((2,) * 8, clusters, [1] * 8, [1] * 4, seed=4)
    assert abs(hall_sigma(psi, TRI)) <= 1e-8


def test_charge_facts():
    psi = random_u1_state((2,) * 6, [1] * 6, 3, seed=5)
    tri = tripartite_chain(6, (2, 2, 1))
    assert max(check_basic_charge_facts(psi, tri).values()) <= 1e-8
    prod = product_state((2,) * 6, [[1, 0], [0, 1]] * 3)
    assert max(check_basic_charge_facts(prod, tri).values()) <= 1e-12
    bad = check_basic_charge_facts(random_state((2,) * 6, seed=5), tri)
    assert bad["[K_A,Q_A]psi"] > 1e-3


def test_charge_operator():
    q = ChargeOperator([1, 2, 1, 1], Region([0, 1]))
    assert np.allclose(q.diagonal((2, 2, 2, 2)).reshape(2, 2, 2, 2)[1, 1, 0, 0], 3)
    both = q + ChargeOperator([1, 2, 1, 1], Region([3]))
    assert set(both.region.sites) == {0, 1, 3}


def test_pumps_on_toric(toric_state):
    tri = toric.disk_tripartition()
    s = entropy_pump(toric_state, tri, np.linspace(-2, 2, 9))
    assert np.ptp(s.values) <= 1e-8
    assert np.max(np.abs(s.aux)) <= 1e-8


def test_charge_pump_symmetric_product():
    prod = product_state((2,) * 8, [[1, 0], [0, 1]] * 4)
    s = charge_pump(prod, TRI, None, np.linspace(-1, 1, 5))
    assert np.ptp(s.values) == 0.0 and s.slope_factor == 0.5


def test_derivative_laws():
    psi = random_u1_state((2,) * 8, [1] * 8, 4, seed=6)
    for kind in ("S", "Q"):
        rows = derivative_law(psi, TRI, [-1.0, 0.0, 0.8], kind)
        assert max(r["residual"] for r in rows) <= 1e-4


def test_fit_slope():
    t = np.linspace(-2, 2, 21)
    slope, icpt, r2, n = fit_slope(t, 0.5 * t + 3)
    assert slope == pytest.approx(0.5) and icpt == pytest.approx(3) and r2 == pytest.approx(1.0)
    assert n == 17
    with pytest.warns(FitQualityWarning):
        fit_slope([0, 1], [0, 1])
    with pytest.raises(InvalidParameter):
        PumpSeries.build([0, 0, 1], [1, 2, 3], "exact", "S_BC")


def test_invariance_tables(toric_state):
    lat = toric.edge_lattice()
    tri = toric.deformation_tripartition(lat)
    specs = standard_deformations(lat, tri)
    tab = check_J_invariance(toric_state, lat, tri, specs)
    assert len(tab["rows"]) == 6 and tab["max_abs_delta"] <= 1e-8
    lat = build_torus_lattice(4, 4, 2)
    tri = tripartite_disk(lat, (1, 1), 1.5)
    specs = standard_deformations(lat, tri)
    pair = random_cluster_state((2,) * 16, [[2 * k, 2 * k + 1] for k in range(8)], [1] * 16, [1] * 8,
                                seed=1)
    tab = check_sigma_invariance(pair, lat, tri, None, specs)
    assert tab["max_abs_delta"] <= 1e-8 and abs(tab["base"]) <= 1e-8


def test_V_cancellation(toric_state):
    assert max(verify_V_cancellation(toric_state, toric.DEFORM_REGIONS, 0.3, 0.2, 0.4)) <= 1e-7
    assert max(verify_V_cancellation(toric_state, toric.DEFORM_REGIONS, 0.0, 0.2, 0.4)) <= 1e-12
    prod = product_state((2,) * 18, [[R, R]] * 18)
    assert max(verify_V_cancellation(prod, toric.DEFORM_REGIONS, 0.3, 0.2, 0.4)) <= 1e-10


@given(st.integers(0, 10_000))
def test_J_antisymmetry_property(seed):
    psi = random_state((2,) * 7, seed=seed)
    tri = tripartite_chain(7, (2, 2, 2), start=seed % 2)
    assert abs(modular_commutator_J(psi, tri) + modular_commutator_J(psi, tri.reversed())) <= 1e-10


@given(st.integers(0, 10_000), st.floats(-1.5, 1.5))
def test_entropy_derivative_property(seed, t):
    psi = random_state((2,) * 7, seed=seed)
    tri = tripartite_chain(7, (2, 2, 2), start=seed % 2)
    row = derivative_law(psi, tri, [t], "S")[0]
    assert row["residual"] <= 1e-4
