import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from modflow.errors import InvalidOperator, InvalidRegion
from modflow.exact import PureState, partial_trace, product_state, random_markov_state, random_state
from modflow.lattice import A1Regions, Region
from modflow.modular import (apply_modular_phase, check_bulk_a1, cmi, entropy,
                             modular_hamiltonian, modular_phase, region_entropy, schmidt,
                             spectral, support_projector, unitary_extension)


def test_spectral_examples():
    mo = spectral(np.eye(2) / 2)
    assert np.allclose(mo.eigenvalues, [0.5, 0.5]) and mo.zero_cut == 0
    mo = spectral(np.diag([1.0, 0.0]))
    assert np.allclose(mo.eigenvalues, [1, 0]) and mo.zero_cut == 1
    assert np.allclose(spectral(np.diag([0.75, 0.25])).eigenvalues, [0.75, 0.25])
    with pytest.raises(InvalidOperator):
        spectral(np.array([[0.5, 0.3], [0.0, 0.5]]))


def test_entropy_examples():
    assert entropy(np.eye(2) / 2) == pytest.approx(np.log(2), abs=1e-14)
    assert entropy(np.diag([1.0, 0.0])) == 0.0
    # -sum p ln p for (3/4, 1/4)
    assert entropy(np.diag([0.75, 0.25])) == pytest.approx(0.5623351446188083, abs=1e-12)


def test_modular_hamiltonian_examples():
    assert np.allclose(modular_hamiltonian(np.eye(2) / 2), np.log(2) * np.eye(2))
    assert np.allclose(modular_hamiltonian(np.diag([1.0, 0.0])), 0)
    rng = np.random.default_rng(0)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    assert abs(np.trace(rho @ modular_hamiltonian(rho)).real - entropy(rho)) <= 1e-10


def test_modular_phase_examples():
    t = 0.83
    assert np.allclose(modular_phase(np.eye(2) / 2, t).matrix(), np.exp(-1j * t * np.log(2)) * np.eye(2))
    assert np.allclose(modular_phase(np.diag([1.0, 0.0]), 7).matrix(), np.diag([1, 0]))
    m = modular_phase(np.diag([0.75, 0.25]), np.pi).matrix()
    assert np.allclose(m, np.diag(np.exp(1j * np.pi * np.log([0.75, 0.25]))))


def test_support_projector_and_extension():
    assert np.allclose(support_projector(np.eye(3) / 3), np.eye(3))
    p = support_projector(np.diag([1.0, 0.0]))
    assert np.linalg.matrix_rank(p) == 1
    full = np.diag([0.6, 0.4])
    assert np.allclose(unitary_extension(full, 0.4), modular_phase(full, 0.4).matrix())
    assert np.allclose(unitary_extension(np.diag([1.0, 0.0]), 1.0), np.eye(2))


def test_support_projector_keeps_state():
    for s in range(100):
        psi = random_state((2, 2, 2), seed=s)
        rho = partial_trace(psi, [0, 1]).matrix
        P = np.kron(support_projector(rho), np.eye(2))
        assert np.linalg.norm(P @ psi.amplitudes - psi.amplitudes) <= 1e-10


def test_extension_equivalence_on_markov_marginal():
    # rho_X ~ (unitary extension) acts identically on rho_Y for Y containing X
    psi, _ = random_markov_state(2, [2], [1], 2, left_ranks=[1], seed=1)
    rho_ab = partial_trace(psi, [0, 1]).matrix
    rho_a = partial_trace(psi, [0]).matrix
    t = 0.9
    ext = np.kron(unitary_extension(rho_a, t), np.eye(psi.dims[1]))
    raw = np.kron(modular_phase(rho_a, t).matrix(), np.eye(psi.dims[1]))
    assert np.linalg.norm(ext @ rho_ab - raw @ rho_ab) <= 1e-10


def test_state_level_phase_matches_operator_route():
    psi = random_state((2, 3, 2), seed=4)
    rho = partial_trace(psi, [0, 1]).matrix
    u = np.kron(unitary_extension(rho, 0.6), np.eye(2))
    assert np.linalg.norm(apply_modular_phase(psi, [0, 1], 0.6) - u @ psi.amplitudes) <= 1e-12


def test_cmi_examples():
    ghz = np.zeros(16)
    ghz[0] = ghz[-1] = 1 / np.sqrt(2)
    assert abs(cmi(PureState.from_vector(ghz, (2,) * 4), [0], [1], [2])) <= 1e-12
    psi, _ = random_markov_state(3, [1, 2], [2, 1], 2, seed=0)
    assert cmi(psi, [0], [1], [2]) <= 1e-10
    assert cmi(random_state((2,) * 4, seed=0), [0], [1], [2]) > 1e-3
    with pytest.raises(InvalidRegion):
        cmi(psi, [0], [0, 1], [2])


def test_bulk_a1_examples(toric_state):
    from modflow.toric import A1_REGIONS
    assert abs(check_bulk_a1(toric_state, A1_REGIONS)) <= 1e-10
    regs = A1Regions(Region([0]), Region([1]), Region([2]))
    assert check_bulk_a1(product_state((2,) * 4, [[1, 0]] * 4), regs) == 0.0
    assert abs(check_bulk_a1(random_state((2,) * 5, seed=2), regs)) > 1e-3


def test_region_entropy_edges():
    psi = random_state((2,) * 3, seed=0)
    assert region_entropy(psi, []) == 0.0
    assert region_entropy(psi, [0, 1, 2]) == 0.0


@given(st.integers(0, 10_000), st.floats(-3, 3))
def test_modular_phase_is_isometric_on_state(seed, t):
    psi = random_state((2, 2, 3), seed=seed)
    v = apply_modular_phase(psi, [0, 2], t)
    assert abs(np.linalg.norm(v) - 1) <= 1e-12


@given(st.integers(0, 10_000))
def test_ssa(seed):
    psi = random_state((2,) * 5, seed=seed)
    assert cmi(psi, [0], [1, 2], [3]) >= -1e-12


@given(st.integers(0, 10_000))
def test_kernel_vectors_unmoved(seed):
    # rank-deficient rho_X: the extension is the identity off the support
    rng = np.random.default_rng(seed)
    amps = np.zeros((4, 2), complex)
    amps[:2] = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    psi = PureState.from_vector(amps.ravel(), (2, 2, 2))
    sc = schmidt(psi, [0, 1])
    w = np.zeros(8, complex)
    w.reshape(4, 2)[3, 0] = 1.0
    assert np.linalg.norm(apply_modular_phase(psi, [0, 1], 1.3, sc=sc, vector=w) - w) <= 1e-12
