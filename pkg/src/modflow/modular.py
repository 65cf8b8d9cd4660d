"""Spectral kernel: entropies, modular Hamiltonians and modular phases.

Two entry points exist for every quantity.  The operator-level functions take
a :class:`~modflow.exact.DensityMatrix` (or a plain matrix) and work with its
eigendecomposition.  The state-level functions never form rho: they take the
SVD of the amplitude matrix ``M`` (region x rest), whose left singular vectors
are the eigenvectors of rho_X with eigenvalues ``s**2``.  The SVD route keeps
kernel directions at machine precision, which matters for the exact identities
checked downstream.

Eigenvalues below ``eps * p_max`` are treated as exact zeros: they carry
``0**(it) = 0`` in rho**(it), are excluded from K = -ln rho, and the unitary
extension acts on them as the identity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import InvalidOperator, InvalidRegion
from .exact import DensityMatrix, PureState, bipartite, from_bipartite
from .lattice import A1Regions, Region, as_region

EPS = 1e-12


@dataclass(frozen=True, eq=False)
class ModularObject:
    """Eigen-decomposition of a density matrix with zero-mode bookkeeping."""

    eigenvalues: np.ndarray      # descending, cut modes set to 0
    eigenvectors: np.ndarray     # columns
    zero_cut: int
    region: Region | None = None
    eps: float = EPS

    @property
    def support(self) -> np.ndarray:
        return self.eigenvalues > 0

    @property
    def dim(self) -> int:
        return self.eigenvectors.shape[0]


@dataclass(frozen=True, eq=False)
class ModularPhase:
    """rho**(it) in spectral form: ``p**(it)`` on the support, 0 on the kernel."""

    eigenvectors: np.ndarray
    phases: np.ndarray           # 0 on kernel directions
    t: float

    def matrix(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.phases[None, :]) @ v.conj().T

    def __matmul__(self, other: "ModularPhase") -> np.ndarray:
        return self.matrix() @ other.matrix()


def _as_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, complex)


def spectral(rho, eps: float = EPS) -> ModularObject:
    if isinstance(rho, ModularObject):
        return rho
    m = _as_matrix(rho)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidOperator("density matrix must be square")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-10:
        raise InvalidOperator("density matrix is not Hermitian")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w, v = w[::-1], v[:, ::-1]
    cut = w < eps * max(w[0], 0.0) if w.size else np.zeros(0, bool)
    w = np.where(cut, 0.0, w)
    region = rho.region if isinstance(rho, DensityMatrix) else None
    return ModularObject(w, v, int(cut.sum()), region, eps)


def entropy(rho, eps: float = EPS) -> float:
    """von Neumann entropy in nats."""
    p = spectral(rho, eps).eigenvalues
    return float(-np.sum(xlogy(p, p)))


def modular_hamiltonian(rho, eps: float = EPS) -> np.ndarray:
    """``K = sum_{p_a > 0} (-ln p_a) |a><a|``; zero on the kernel."""
    mo = spectral(rho, eps)
    k = np.zeros_like(mo.eigenvalues)
    k[mo.support] = -np.log(mo.eigenvalues[mo.support])
    return (mo.eigenvectors * k[None, :]) @ mo.eigenvectors.conj().T


def modular_phase(rho, t: float, eps: float = EPS) -> ModularPhase:
    mo = spectral(rho, eps)
    ph = np.zeros(mo.eigenvalues.size, complex)
    ph[mo.support] = np.exp(1j * t * np.log(mo.eigenvalues[mo.support]))
    return ModularPhase(mo.eigenvectors, ph, float(t))


def support_projector(rho, eps: float = EPS) -> np.ndarray:
    mo = spectral(rho, eps)
    v = mo.eigenvectors[:, mo.support]
    return v @ v.conj().T


def unitary_extension(rho, t: float, eps: float = EPS) -> np.ndarray:
    """rho**(it) on the support, identity on the kernel (exactly unitary)."""
    mp = modular_phase(rho, t, eps)
    mo = spectral(rho, eps)
    ph = np.where(mo.support, mp.phases, 1.0)
    return (mo.eigenvectors * ph[None, :]) @ mo.eigenvectors.conj().T


# ---------------------------------------------------------------------------
# state-level (SVD) routines
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Schmidt:
    """Thin SVD ``M = U diag(s) Vh`` of a state across region | complement."""

    U: np.ndarray
    s: np.ndarray
    Vh: np.ndarray
    keep: np.ndarray             # singular values outside the zero cut
    region: Region
    dims: tuple[int, ...]

    @property
    def probabilities(self) -> np.ndarray:
        return np.where(self.keep, self.s ** 2, 0.0)

    @property
    def log_p(self) -> np.ndarray:
        out = np.zeros_like(self.s)
        out[self.keep] = 2 * np.log(self.s[self.keep])
        return out


def schmidt(state: PureState, region, eps: float = EPS) -> Schmidt:
    region = as_region(region)
    m = bipartite(state, region)
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        u, s, vh = _svd_via_gram(m)
    keep = s ** 2 >= eps * (s[0] ** 2 if s.size else 0.0)
    return Schmidt(u, s, vh, keep, region, state.dims)


def _svd_via_gram(m):
    w, u = np.linalg.eigh(m @ m.conj().T)
    w, u = w[::-1], u[:, ::-1]
    s = np.sqrt(np.clip(w, 0, None))
    r = min(m.shape)
    u, s = u[:, :r], s[:r]
    vh = np.zeros((r, m.shape[1]), complex)
    nz = s > 0
    vh[nz] = (u[:, nz].conj().T @ m) / s[nz, None]
    return u, s, vh


def schmidt_spectrum(state: PureState, region, eps: float = EPS) -> np.ndarray:
    """Nonzero eigenvalues of rho_X in descending order."""
    sc = schmidt(state, region, eps)
    return sc.probabilities[sc.keep]


def region_entropy(state: PureState, region, eps: float = EPS) -> float:
    if len(as_region(region)) == 0 or len(as_region(region)) == state.n_sites:
        return 0.0
    p = schmidt_spectrum(state, region, eps)
    return float(-np.sum(xlogy(p, p)))


def apply_modular_phase(state: PureState, region, t: float, eps: float = EPS,
                        sc: Schmidt | None = None,
                        vector: np.ndarray | None = None) -> np.ndarray:
    """Amplitudes of ``rho_X**(it) v`` with rho_X taken from ``state``.

    ``v`` defaults to the state itself.  Applies the unitary extension: on
    ``|psi>`` this coincides with rho**(it) since psi has no weight on the
    kernel of rho_X.
    """
    sc = sc or schmidt(state, region, eps)
    ph = np.ones(sc.s.size, complex)
    ph[sc.keep] = np.exp(1j * t * sc.log_p[sc.keep])
    m = _bip(state.amplitudes if vector is None else vector, state.dims, sc.region)
    # unitary extension acts as identity off span(U); (ph - 1) restricts the update to it
    new = m + (sc.U * (ph - 1.0)[None, :]) @ (sc.U.conj().T @ m)
    return from_bipartite(new, state.dims, sc.region)


def apply_modular_hamiltonian(state: PureState, region, eps: float = EPS,
                              vector: np.ndarray | None = None) -> np.ndarray:
    """``(K_X (x) 1) v`` with K_X built from ``state``; ``v`` defaults to the state."""
    region = as_region(region)
    if len(region) == 0:
        return np.zeros(state.dim, complex)
    sc = schmidt(state, region, eps)
    k = np.where(sc.keep, -sc.log_p, 0.0)
    v = state.amplitudes if vector is None else vector
    vm = _bip(v, state.dims, region)
    out = (sc.U * k[None, :]) @ (sc.U.conj().T @ vm)
    return from_bipartite(out, state.dims, region)


def _bip(vec: np.ndarray, dims, region) -> np.ndarray:
    sites = as_region(region).sites
    rest = [k for k in range(len(dims)) if k not in set(sites)]
    dx = int(np.prod([dims[k] for k in sites], dtype=int))
    return np.asarray(vec).reshape(dims).transpose(list(sites) + rest).reshape(dx, -1)


def _disjoint(*regs):
    seen = set()
    for r in regs:
        s = set(as_region(r).sites)
        if s & seen:
            raise InvalidRegion("regions overlap")
        seen |= s


def cmi(state: PureState, A, B, C, eps: float = EPS) -> float:
    """``I(A:C|B) = S_AB + S_BC - S_B - S_ABC`` in nats."""
    A, B, C = as_region(A), as_region(B), as_region(C)
    _disjoint(A, B, C)
    S = lambda r: region_entropy(state, r, eps)  # noqa: E731
    return S(A | B) + S(B | C) - S(B) - S(A | B | C)


def check_bulk_a1(state: PureState, regions: A1Regions, eps: float = EPS) -> float:
    """``S_BC + S_CD - S_B - S_D``; vanishes for states obeying bulk A1."""
    B, C, D = regions.B, regions.C, regions.D
    S = lambda r: region_entropy(state, r, eps)  # noqa: E731
    return S(B | C) + S(C | D) - S(B) - S(D)
