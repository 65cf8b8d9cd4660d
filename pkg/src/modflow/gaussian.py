"""Number-conserving fermionic Gaussian states.

A pure Gaussian state is fixed by its correlation matrix ``C_ij = <c_i^+ c_j>``.
Internally most formulas use ``G = C.T`` (``G_ij = <c_j^+ c_i>``), which for a
pure state is the projector onto the occupied orbitals.  With that choice

* the reduced state on modes X is ``rho_X ~ exp(-c^+ h_X c)`` with
  ``h_X = ln((1 - G_X) / G_X)``,
* ``<c^+ X c> = Tr(X G)`` and ``[c^+ X c, c^+ Y c] = c^+ [X, Y] c``,
* ``rho_X**(it)`` conjugates ``G`` as ``G -> e^{-i h t} G e^{i h t}``.

Modes are attached to lattice sites through ``site_of_mode`` so that the same
:class:`~modflow.lattice.Region` objects drive both backends.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.special import xlogy

from .errors import InvalidParameter, InvalidRegion, ModelGapless, ResourceLimit
from .exact import PureState
from .lattice import Region, Tripartition, as_region, build_torus_lattice

log = logging.getLogger(__name__)

CLIP = 1e-10
_SX = np.array([[0, 1], [1, 0]], complex)
_SY = np.array([[0, -1j], [1j, 0]], complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True, eq=False)
class GaussianState:
    corr: np.ndarray                       # C_ij = <c_i^+ c_j>
    site_of_mode: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.corr, complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise InvalidParameter("correlation matrix must be square")
        if np.max(np.abs(c - c.conj().T), initial=0.0) > 1e-10:
            raise InvalidParameter("correlation matrix is not Hermitian")
        w = np.linalg.eigvalsh(c) if c.shape[0] <= 4000 else None
        if w is not None and (w.min() < -1e-10 or w.max() > 1 + 1e-10):
            raise InvalidParameter("correlation matrix eigenvalues outside [0, 1]")
        object.__setattr__(self, "corr", c)
        object.__setattr__(self, "site_of_mode", np.asarray(self.site_of_mode, int))
        if len(self.site_of_mode) != c.shape[0]:
            raise InvalidParameter("one site label per mode required")

    @property
    def n_modes(self) -> int:
        return self.corr.shape[0]

    @property
    def G(self) -> np.ndarray:
        return self.corr.T

    def purity_defect(self) -> float:
        return float(np.linalg.norm(self.corr @ self.corr - self.corr))

    @property
    def is_pure(self) -> bool:
        return self.purity_defect() <= 1e-8

    def modes(self, region) -> np.ndarray:
        """Mode indices carried by the lattice sites of ``region`` (sorted)."""
        sites = np.asarray(as_region(region).sites, int)
        return np.flatnonzero(np.isin(self.site_of_mode, sites))

    def with_corr(self, corr: np.ndarray, check: bool = True) -> "GaussianState":
        if check:
            return GaussianState(corr, self.site_of_mode, dict(self.meta))
        # unitary conjugation keeps the spectrum, so skip the O(N^3) validation
        out = object.__new__(GaussianState)
        object.__setattr__(out, "corr", np.asarray(corr, complex))
        object.__setattr__(out, "site_of_mode", self.site_of_mode)
        object.__setattr__(out, "meta", dict(self.meta))
        return out

    def conj(self) -> "GaussianState":
        """Complex conjugate (antiunitary time reversal)."""
        return self.with_corr(self.corr.conj())


@dataclass(frozen=True)
class ModelParams:
    m: float
    width: int = 30
    height: int = 30
    twist_x: float = 0.0
    twist_y: float = 0.0


# ---------------------------------------------------------------------------
# QWZ Chern insulator
# ---------------------------------------------------------------------------

def _bloch(m: float, kx, ky) -> np.ndarray:
    kx, ky = np.broadcast_arrays(np.asarray(kx, float), np.asarray(ky, float))
    d = np.stack([np.sin(kx), -np.sin(ky), m + np.cos(kx) + np.cos(ky)], -1)
    return np.einsum("...a,aij->...ij", d, np.stack([_SX, _SY, _SZ]))


def qwz_hamiltonian(params: ModelParams) -> np.ndarray:
    """Real-space single-particle Hamiltonian; mode index ``2 * site + orbital``.

    Hoppings ``c_{r+x}^+ T_x c_r + h.c.`` with ``T_x = (sz + i sx) / 2``,
    ``T_y = (sz - i sy) / 2`` and on-site ``m sz`` reproduce the Bloch form
    ``sin kx sx - sin ky sy + (m + cos kx + cos ky) sz``.  The sign of the
    ``sy`` term selects the chirality for which ``m = -1`` has plaquette Chern
    number +1.  Twist angles attach a phase to the bonds that wrap around the
    torus.
    """
    L, W = params.width, params.height
    n = L * W
    H = np.zeros((2 * n, 2 * n), complex)
    tx = (_SZ + 1j * _SX) / 2
    ty = (_SZ - 1j * _SY) / 2
    for y, x in product(range(W), range(L)):
        r = y * L + x
        H[2 * r:2 * r + 2, 2 * r:2 * r + 2] += params.m * _SZ
        for (dx, dy), T, tw in (((1, 0), tx, params.twist_x), ((0, 1), ty, params.twist_y)):
            xx, yy = x + dx, y + dy
            phase = 1.0
            if xx == L or yy == W:
                phase = np.exp(1j * tw)
            s = (yy % W) * L + (xx % L)
            blk = phase * T
            H[2 * s:2 * s + 2, 2 * r:2 * r + 2] += blk
            H[2 * r:2 * r + 2, 2 * s:2 * s + 2] += blk.conj().T
    return H


def qwz_ground_state(params: ModelParams) -> GaussianState:
    """Filled lower band of the QWZ model on a ``width x height`` torus."""
    if abs(abs(params.m) - 2) < 1e-12 or abs(params.m) < 1e-12:
        raise ModelGapless(f"QWZ model is gapless at m = {params.m}")
    if params.width < 2 or params.height < 2:
        raise InvalidParameter("torus needs width, height >= 2")
    H = qwz_hamiltonian(params)
    e, v = np.linalg.eigh(H)
    nf = H.shape[0] // 2
    gap = float(e[nf] - e[nf - 1])
    if gap <= 1e-6:
        raise ModelGapless(f"finite-size gap {gap:.3e} at m = {params.m}")
    occ = v[:, :nf]
    G = occ @ occ.conj().T
    site = np.repeat(np.arange(params.width * params.height), 2)
    meta = {"model": "qwz", "m": params.m, "width": params.width, "height": params.height,
            "twist_x": params.twist_x, "twist_y": params.twist_y, "gap": gap, "filled": nf}
    return GaussianState(G.T, site, meta)


def qwz_lattice(params: ModelParams):
    return build_torus_lattice(params.width, params.height, 4)


def chern_number(params: ModelParams, k_grid: int = 40, band: int = 0) -> int:
    """Lattice field-strength Chern number of ``band`` (0 = lower) by plaquette products."""
    if abs(abs(params.m) - 2) < 1e-12 or abs(params.m) < 1e-12:
        raise ModelGapless(f"QWZ model is gapless at m = {params.m}")
    k = 2 * np.pi * np.arange(k_grid) / k_grid
    kx, ky = np.meshgrid(k, k, indexing="ij")
    _, v = np.linalg.eigh(_bloch(params.m, kx, ky))
    u = v[..., band]                                   # (nk, nk, 2)

    def link(a, b):
        z = np.sum(a.conj() * b, -1)
        return z / np.abs(z)

    ux = link(u, np.roll(u, -1, 0))
    uy = link(u, np.roll(u, -1, 1))
    f = np.angle(ux * np.roll(uy, -1, 0) / (np.roll(ux, -1, 1) * uy))
    c = f.sum() / (2 * np.pi)
    return int(np.rint(c))


# ---------------------------------------------------------------------------
# entropies, kernels and the chirality observables
# ---------------------------------------------------------------------------

def _block(g: GaussianState, idx: np.ndarray) -> np.ndarray:
    return g.G[np.ix_(idx, idx)]


def g_entropy(g: GaussianState, X) -> float:
    idx = g.modes(X)
    if idx.size == 0:
        return 0.0
    lam = np.clip(np.linalg.eigvalsh(_block(g, idx)), 0.0, 1.0)
    return float(-np.sum(xlogy(lam, lam) + xlogy(1 - lam, 1 - lam)))


def g_modular_kernel(g: GaussianState, X, eps: float = CLIP) -> np.ndarray:
    """Single-particle kernel ``h_X`` on the modes of ``X`` (in ``g.modes(X)`` order)."""
    idx = g.modes(X) if not isinstance(X, np.ndarray) else X
    if idx.size == 0:
        return np.zeros((0, 0), complex)
    lam, v = np.linalg.eigh(_block(g, idx))
    clipped = int(np.sum((lam < eps) | (lam > 1 - eps)))
    if clipped:
        log.debug("clipped %d of %d kernel eigenvalues", clipped, lam.size)
    lam = np.clip(lam, eps, 1 - eps)
    return (v * np.log((1 - lam) / lam)[None, :]) @ v.conj().T


def _embedded(g: GaussianState, X, within: np.ndarray, eps: float) -> np.ndarray:
    """Kernel of ``X`` embedded into the index set ``within`` (zero elsewhere)."""
    idx = g.modes(X)
    pos = np.searchsorted(within, idx)
    out = np.zeros((within.size, within.size), complex)
    out[np.ix_(pos, pos)] = g_modular_kernel(g, idx, eps)
    return out


def g_J(g: GaussianState, tri: Tripartition, eps: float = CLIP) -> float:
    """``J = i Tr([h_AB, h_BC] G)`` restricted to the modes of ABC."""
    w = g.modes(tri.ABC)
    h1 = _embedded(g, tri.AB, w, eps)
    h2 = _embedded(g, tri.BC, w, eps)
    G = _block(g, w)
    val = 1j * np.trace((h1 @ h2 - h2 @ h1) @ G)
    return float(val.real)


def mode_charges(g: GaussianState, charges=None) -> np.ndarray:
    """Per-mode charge vector (default: every mode carries charge 1)."""
    if charges is None:
        return np.ones(g.n_modes)
    q = np.asarray(charges, float)
    if q.shape != (g.n_modes,):
        raise InvalidParameter("need one charge per mode")
    return q


def g_sigma(g: GaussianState, tri: Tripartition, charges=None, eps: float = CLIP) -> float:
    """``(i/2) <[K_AB, Q_BC^2]>`` by Wick contraction."""
    w = g.modes(tri.ABC)
    q = mode_charges(g, charges)
    h = _embedded(g, tri.AB, w, eps)
    bc = np.isin(w, g.modes(tri.BC))
    P = np.diag(np.where(bc, q[w], 0.0)).astype(complex)
    G = _block(g, w)
    one_m = np.eye(w.size) - G
    D = h @ P - P @ h
    comm = (2 * np.trace(D @ G) * np.trace(P @ G)
            + np.trace(D @ one_m @ P @ G) + np.trace(P @ one_m @ D @ G))
    return float((0.5j * comm).real)


def wick_quartic(g: GaussianState, i: int, j: int, k: int, l: int) -> complex:
    """``<c_i^+ c_j c_k^+ c_l>`` from the correlation matrix."""
    C = g.corr
    return complex(C[i, j] * C[k, l] + C[i, l] * ((j == k) - C[k, j]))


def g_charge_variance(g: GaussianState, X, charges=None) -> float:
    """``<Q_X^2>`` for ``Q_X = sum_{i in X} q_i n_i``."""
    idx = g.modes(X)
    q = mode_charges(g, charges)[idx]
    G = _block(g, idx)
    P = np.diag(q)
    return float((np.trace(P @ G) ** 2 + np.trace(P @ (np.eye(idx.size) - G) @ P @ G)).real)


def g_imf(g: GaussianState, X, t: float, eps: float = CLIP) -> GaussianState:
    """Instantaneous modular flow ``G -> e^{-i h_X t} G e^{i h_X t}``."""
    idx = g.modes(X)
    if idx.size == 0 or t == 0:
        return g
    u = sla.expm(-1j * t * g_modular_kernel(g, idx, eps))
    G = g.G.copy()
    G[idx, :] = u @ G[idx, :]
    G[:, idx] = G[:, idx] @ u.conj().T
    return g.with_corr(G.T, check=False)


def g_entropy_pump(g: GaussianState, tri: Tripartition, t_grid: Sequence[float],
                   with_J: bool = True):
    """``S_BC`` and ``J`` along ``I_AB(t)``, composing grid increments."""
    from .chirality import PumpSeries
    ts = _check_grid(t_grid)
    cur = g_imf(g, tri.AB, ts[0])
    vals, js, prev = [], [], ts[0]
    for t in ts:
        cur = g_imf(cur, tri.AB, t - prev)
        prev = t
        vals.append(g_entropy(cur, tri.BC))
        js.append(g_J(cur, tri) if with_J else np.nan)
    return PumpSeries.build(ts, vals, "gaussian", "S_BC", aux=np.array(js), aux_name="J")


def g_charge_pump(g: GaussianState, tri: Tripartition, t_grid: Sequence[float], charges=None,
                  with_sigma: bool = True):
    """``<Q_BC^2>`` and ``Sigma`` along ``I_AB(t)``."""
    from .chirality import PumpSeries
    ts = _check_grid(t_grid)
    cur = g_imf(g, tri.AB, ts[0])
    vals, sig, prev = [], [], ts[0]
    for t in ts:
        cur = g_imf(cur, tri.AB, t - prev)
        prev = t
        vals.append(g_charge_variance(cur, tri.BC, charges))
        sig.append(g_sigma(cur, tri, charges) if with_sigma else np.nan)
    return PumpSeries.build(ts, vals, "gaussian", "Q2_BC", aux=np.array(sig), aux_name="Sigma",
                            slope_factor=0.5)


def _check_grid(t_grid) -> np.ndarray:
    ts = np.asarray(t_grid, float)
    if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0) or not np.all(np.isfinite(ts)):
        raise InvalidParameter("t grid must be finite and strictly increasing")
    return ts


# ---------------------------------------------------------------------------
# random states and the Fock-space oracle
# ---------------------------------------------------------------------------

def random_gaussian_state(n_modes: int, n_particles: int | None = None, seed: int | None = None,
                          real: bool = False) -> GaussianState:
    """Slater determinant of ``n_particles`` Haar-random orbitals, one mode per site."""
    rng = np.random.default_rng(seed)
    n_particles = n_modes // 2 if n_particles is None else n_particles
    if not 0 <= n_particles <= n_modes:
        raise InvalidParameter("particle number out of range")
    z = rng.normal(size=(n_modes, n_modes))
    if not real:
        z = z + 1j * rng.normal(size=(n_modes, n_modes))
    q, _ = np.linalg.qr(z)
    occ = q[:, :n_particles]
    G = occ @ occ.conj().T
    return GaussianState(G.T, np.arange(n_modes), {"seed": seed, "filled": n_particles})


def chain_hopping_state(n_modes: int, n_particles: int | None = None, flux: float = 0.0,
                        seed: int | None = None) -> GaussianState:
    """Ground state of a disordered complex-hopping chain (a local Gaussian state)."""
    rng = np.random.default_rng(seed)
    n_particles = n_modes // 2 if n_particles is None else n_particles
    H = np.diag(rng.normal(scale=0.5, size=n_modes)).astype(complex)
    for i in range(n_modes - 1):
        H[i + 1, i] = -(1 + 0.3 * rng.normal()) * np.exp(1j * (flux + rng.normal(scale=0.5)))
        H[i, i + 1] = np.conj(H[i + 1, i])
    _, v = np.linalg.eigh(H)
    occ = v[:, :n_particles]
    G = occ @ occ.conj().T
    return GaussianState(G.T, np.arange(n_modes), {"seed": seed, "filled": n_particles})


def _jw_creators(n: int) -> list[sp.csr_matrix]:
    z = sp.diags([1.0, -1.0])
    cdag = sp.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))   # |1><0|
    eye = sp.identity(2)
    out = []
    for j in range(n):
        ops = [z] * j + [cdag] + [eye] * (n - j - 1)
        m = ops[0]
        for o in ops[1:]:
            m = sp.kron(m, o, format="csr")
        out.append(sp.csr_matrix(m, dtype=complex))
    return out


def fock_creators(n: int) -> list[sp.csr_matrix]:
    """Jordan-Wigner ``c_j^+`` on ``n`` modes; mode 0 is the most significant bit."""
    if n > 12:
        raise ResourceLimit("Fock embedding limited to 12 modes")
    return _jw_creators(n)


def slater_fock_embed(g: GaussianState, max_modes: int = 12) -> PureState:
    """Dense Fock-space vector of a pure Gaussian state (sites = modes)."""
    n = g.n_modes
    if n > min(max_modes, 12):
        raise ResourceLimit(f"{n} modes exceed the Fock embedding limit of {min(max_modes, 12)}")
    if not g.is_pure:
        raise InvalidParameter("Fock embedding needs a pure correlation matrix")
    w, v = np.linalg.eigh(g.G)
    phi = v[:, w > 0.5]
    cd = fock_creators(n)
    vec = np.zeros(2 ** n, complex)
    vec[0] = 1.0
    for k in range(phi.shape[1]):
        dk = sum(phi[j, k] * cd[j] for j in range(n))
        vec = dk @ vec
    vec /= np.linalg.norm(vec)
    return PureState(vec, (2,) * n, meta={"source": "slater_fock_embed"})


def fock_correlation(psi: PureState) -> np.ndarray:
    """``C_ij = <c_i^+ c_j>`` evaluated on a Fock vector."""
    n = psi.n_sites
    cd = fock_creators(n)
    v = psi.amplitudes
    cv = [c.conj().T @ v for c in cd]              # c_j |v>
    return np.array([[np.vdot(cv[i], cv[j]) for j in range(n)] for i in range(n)])


def fock_quartic(psi: PureState, i: int, j: int, k: int, l: int) -> complex:
    cd = fock_creators(psi.n_sites)
    v = psi.amplitudes
    w = cd[i] @ (cd[j].conj().T @ (cd[k] @ (cd[l].conj().T @ v)))
    return complex(np.vdot(v, w))


def check_contiguous(g: GaussianState, *regions) -> None:
    """Jordan-Wigner reductions are faithful only for contiguous mode blocks."""
    for r in regions:
        idx = g.modes(r)
        if idx.size and idx[-1] - idx[0] + 1 != idx.size:
            raise InvalidRegion("region is not contiguous in the mode ordering")


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def save_gaussian(g: GaussianState, path) -> None:
    path = Path(path)
    np.save(path.with_suffix(".npy"), g.corr)
    header = {"n_modes": g.n_modes, "site_of_mode": g.site_of_mode.tolist(),
              "meta": {k: v for k, v in g.meta.items() if isinstance(v, (int, float, str, type(None)))}}
    path.with_suffix(".json").write_text(json.dumps(header, indent=2))


def load_gaussian(path) -> GaussianState:
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    return GaussianState(np.load(path.with_suffix(".npy")), header["site_of_mode"], header.get("meta", {}))
