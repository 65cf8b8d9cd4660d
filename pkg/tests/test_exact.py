import numpy as np
import pytest
from hypothesis import given, strategies as st

from modflow.errors import InvalidOperator, InvalidParameter, NoSupport, ResourceLimit
from modflow.exact import (PureState, apply_onsite_unitary, basis_state, charge_diagonal,
                           load_state, partial_trace, product_state, random_markov_state,
                           random_state, random_u1_state, save_state, toric_code_ground_state,
                           toric_stabilizer_expectations, u1_rotation)
from modflow.modular import cmi, schmidt_spectrum

X = np.array([[0, 1], [1, 0]])
R = 1 / np.sqrt(2)


def bell():
    return PureState.from_vector(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2))


def test_bell_partial_trace():
    rho = partial_trace(bell(), [0]).matrix
    assert np.allclose(rho, np.eye(2) / 2, atol=1e-14)


def test_product_partial_trace():
    psi = product_state((2, 2), [[1, 0], [R, R]])
    rho = partial_trace(psi, [0]).matrix
    assert np.allclose(rho, np.diag([1, 0]), atol=1e-14)


def test_schmidt_duality_random():
    psi = random_state((2,) * 4, seed=3)
    a = np.sort(np.linalg.eigvalsh(partial_trace(psi, [0, 1]).matrix))
    b = np.sort(np.linalg.eigvalsh(partial_trace(psi, [2, 3]).matrix))
    assert np.max(np.abs(a - b)) <= 1e-10


def test_product_state_examples():
    assert np.argmax(np.abs(product_state((2, 2, 2), [[1, 0]] * 3).amplitudes)) == 0
    plus = product_state((2, 2), [[R, R], [R, R]])
    assert np.allclose(plus.amplitudes, 0.5)
    assert product_state((2, 3), [[1, 0], [0, 1, 0]]).dim == 6


def test_random_state_seeding():
    a, b = random_state((2,) * 5, seed=1), random_state((2,) * 5, seed=1)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    ov = [abs(random_state((2,) * 5, seed=s).overlap(random_state((2,) * 5, seed=s + 500))) ** 2
          for s in range(100)]
    # Haar average of |<psi|phi>|^2 is 1/dim
    assert abs(np.mean(ov) - 1 / 32) < 0.01
    with pytest.raises(InvalidParameter):
        random_state((2, 1), seed=0)


def test_u1_sector_support():
    psi = random_u1_state((2,) * 4, [1] * 4, 2, seed=0)
    assert np.count_nonzero(np.abs(psi.amplitudes) > 0) == 6
    q = charge_diagonal(psi.dims, [1] * 4)
    p = np.abs(psi.amplitudes) ** 2
    assert abs(p @ q - 2) <= 1e-12
    assert abs(p @ q ** 2 - (p @ q) ** 2) <= 1e-12
    with pytest.raises(NoSupport):
        random_u1_state((2,) * 4, [1] * 4, 5, seed=0)


def test_toric_2x2_stabilizers():
    psi = toric_code_ground_state(2, 2)
    assert psi.n_sites == 8
    av, bp = toric_stabilizer_expectations(psi, 2, 2)
    assert np.max(np.abs(av - 1)) <= 1e-12 and np.max(np.abs(bp - 1)) <= 1e-12


def test_toric_size_limit():
    with pytest.raises(ResourceLimit):
        toric_code_ground_state(4, 3)


def test_markov_single_pure_block_is_product():
    psi, cert = random_markov_state(2, [1], [1], 2, probs=[1.0], left_ranks=[1], right_ranks=[1],
                                    seed=0)
    assert psi.dims[3] == 1
    for site in range(3):
        assert schmidt_spectrum(psi, [site])[0] > 1 - 1e-12
    assert abs(cmi(psi, [0], [1], [2])) <= 1e-10


def test_markov_two_blocks():
    psi, cert = random_markov_state(2, [2, 1], [1, 2], 2, probs=[0.5, 0.5], seed=4)
    assert cert.probs == (0.5, 0.5)
    assert abs(cmi(psi, [0], [1], [2])) <= 1e-10


def test_markov_rank_deficient_and_env_limit():
    psi, _ = random_markov_state(2, [2], [2], 2, left_ranks=[1], seed=2)
    assert abs(cmi(psi, [0], [1], [2])) <= 1e-10
    with pytest.raises(ResourceLimit):
        random_markov_state(2, [2], [2], 2, env_dim=1, seed=2)


@given(st.integers(0, 10_000))
def test_markov_always_passes(seed):
    rng = np.random.default_rng(seed)
    nb = int(rng.integers(1, 3))
    psi, _ = random_markov_state(int(rng.integers(2, 4)), list(rng.integers(1, 3, nb)),
                                 list(rng.integers(1, 3, nb)), 2, seed=seed)
    assert cmi(psi, [0], [1], [2]) <= 1e-10


def test_onsite_unitary_examples():
    psi = random_u1_state((2,) * 4, [1] * 4, 2, seed=5)
    same = apply_onsite_unitary(psi, [None] * 4)
    assert np.array_equal(same.amplitudes, psi.amplitudes)
    t = 0.37
    rot = apply_onsite_unitary(psi, u1_rotation(psi.dims, [1] * 4, t))
    assert np.allclose(rot.amplitudes, np.exp(2j * t) * psi.amplitudes, atol=1e-12)
    flipped = apply_onsite_unitary(basis_state((2,) * 3, [0, 0, 0]), [None, X, None])
    assert np.argmax(np.abs(flipped.amplitudes)) == 0b010
    with pytest.raises(InvalidOperator):
        apply_onsite_unitary(psi, [np.diag([1, 2]), None, None, None])


def test_save_load_roundtrip(tmp_path):
    psi = random_state((2, 3), seed=9)
    save_state(psi, tmp_path / "psi")
    back = load_state(tmp_path / "psi")
    assert np.array_equal(back.amplitudes, psi.amplitudes) and back.dims == psi.dims


@given(st.integers(0, 10_000), st.integers(1, 4))
def test_partial_trace_is_a_state(seed, k):
    psi = random_state((2,) * 5, seed=seed)
    rho = partial_trace(psi, list(range(k))).matrix
    assert abs(np.trace(rho) - 1) <= 1e-12
    assert np.linalg.eigvalsh(rho).min() >= -1e-12


@given(st.integers(0, 10_000), st.integers(1, 5))
def test_schmidt_duality_property(seed, k):
    psi = random_state((2, 3, 2, 2, 3, 2), seed=seed)
    a = schmidt_spectrum(psi, list(range(k)))
    b = schmidt_spectrum(psi, list(range(k, 6)))
    n = min(a.size, b.size)
    assert np.max(np.abs(a[:n] - b[:n])) <= 1e-10
