"""Dense pure-state backend.

Amplitudes are stored as a flat complex vector; site k is tensor axis k and
the flat index is big-endian (site 0 most significant), i.e. numpy C-order of
``amplitudes.reshape(dims)``.

On-site charges follow one convention throughout: a site with charge ``q``
carries ``Q_v = q * diag(0, 1, ..., d-1)``.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidOperator, InvalidParameter, InvalidRegion, NoSupport, ResourceLimit
from .lattice import Region, as_region

NORM_TOL = 1e-10
MAX_DIM = 2 ** 24


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    dims: tuple[int, ...]
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=complex).ravel()
        dims = tuple(int(d) for d in self.dims)
        if amps.size != int(np.prod(dims)):
            raise InvalidParameter(f"amplitude length {amps.size} does not match dims {dims}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidParameter(f"state not normalized (norm {norm:.3e})")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_vector(cls, vec, dims, **kw) -> "PureState":
        vec = np.asarray(vec, dtype=complex).ravel()
        n = np.linalg.norm(vec)
        if n == 0:
            raise InvalidParameter("zero vector")
        return cls(vec / n, tuple(dims), **kw)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def with_amplitudes(self, amps: np.ndarray) -> "PureState":
        # renormalise away roundoff only; callers apply exact unitaries
        amps = np.asarray(amps, dtype=complex)
        return PureState(amps / np.linalg.norm(amps), self.dims, self.seed, dict(self.meta))

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def distance(self, other: "PureState") -> float:
        return float(np.linalg.norm(self.amplitudes - other.amplitudes))

    def phase_distance(self, other: "PureState") -> float:
        """Distance after removing the optimal global phase."""
        ov = np.vdot(other.amplitudes, self.amplitudes)
        ph = ov / abs(ov) if abs(ov) > 0 else 1.0
        return float(np.linalg.norm(self.amplitudes - ph * other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    region: Region
    dims: tuple[int, ...]
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class MarkovCertificate:
    """Block data of ``rho_ABC = (+)_i p_i rho_{A bL_i} (x) rho_{bR_i C}``."""

    blocks: tuple[tuple[int, int], ...]
    probs: tuple[float, ...]
    left_factors: tuple[np.ndarray, ...] = field(repr=False)
    right_factors: tuple[np.ndarray, ...] = field(repr=False)
    b_unitary: np.ndarray = field(repr=False)

    def __post_init__(self):
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise InvalidParameter("block probabilities must sum to one")


def _check_region(dims: Sequence[int], region) -> tuple[int, ...]:
    sites = as_region(region).sites
    if sites and (sites[-1] >= len(dims)):
        raise InvalidRegion(f"site {sites[-1]} outside a {len(dims)}-site system")
    return sites


def bipartite(state: PureState, region) -> np.ndarray:
    """Amplitudes as a (dim_X, dim_rest) matrix with X's sites in sorted order."""
    sites = _check_region(state.dims, region)
    rest = [k for k in range(state.n_sites) if k not in set(sites)]
    dx = int(np.prod([state.dims[k] for k in sites], dtype=int))
    t = state.amplitudes.reshape(state.dims).transpose(list(sites) + rest)
    return t.reshape(dx, -1)


def from_bipartite(mat: np.ndarray, dims: Sequence[int], region) -> np.ndarray:
    """Inverse of :func:`bipartite`; returns a flat amplitude vector."""
    sites = as_region(region).sites
    rest = [k for k in range(len(dims)) if k not in set(sites)]
    perm = list(sites) + rest
    t = np.asarray(mat).reshape([dims[k] for k in perm])
    return t.transpose(np.argsort(perm)).ravel()


def partial_trace(state: PureState, region) -> DensityMatrix:
    """Reduced density matrix on ``region`` (the complement is traced out)."""
    region = as_region(region)
    sites = _check_region(state.dims, region)
    if not sites:
        return DensityMatrix(np.ones((1, 1), complex), region, (), degenerate=True)
    m = bipartite(state, region)
    rho = m @ m.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho, region, tuple(state.dims[k] for k in sites))


def product_state(dims: Sequence[int], local_vectors: Sequence) -> PureState:
    if len(dims) != len(local_vectors):
        raise InvalidParameter("one local vector per site required")
    vec = np.ones(1, complex)
    for d, v in zip(dims, local_vectors):
        v = np.asarray(v, complex).ravel()
        if v.size != d:
            raise InvalidParameter(f"local vector of length {v.size} on a {d}-dim site")
        n = np.linalg.norm(v)
        if abs(n - 1) > 1e-12:
            warnings.warn("local vector not normalized; normalizing", stacklevel=2)
            v = v / n
        vec = np.kron(vec, v)
    return PureState(vec, tuple(dims))


def basis_state(dims: Sequence[int], levels: Sequence[int]) -> PureState:
    return product_state(dims, [np.eye(d)[l] for d, l in zip(dims, levels)])


def _check_dims(dims):
    if any(int(d) < 2 for d in dims):
        raise InvalidParameter("every site needs dimension >= 2")
    if int(np.prod(dims, dtype=object)) > MAX_DIM:
        raise ResourceLimit(f"Hilbert space dimension exceeds {MAX_DIM}")


def random_state(dims: Sequence[int], seed: int | None = None) -> PureState:
    """Normalized complex Gaussian vector (Haar distributed)."""
    _check_dims(dims)
    rng = np.random.default_rng(seed)
    n = int(np.prod(dims))
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return PureState.from_vector(v, dims, seed=seed)


def charge_diagonal(dims: Sequence[int], site_charges: Sequence[float], region=None) -> np.ndarray:
    """Eigenvalues of ``Q_X = sum_{v in X} Q_v`` on every computational basis state."""
    sites = range(len(dims)) if region is None else as_region(region).sites
    q = np.zeros(dims)
    for k in sites:
        shape = [1] * len(dims)
        shape[k] = dims[k]
        q = q + site_charges[k] * np.arange(dims[k]).reshape(shape)
    return q.ravel()


def random_u1_state(dims: Sequence[int], site_charges: Sequence[float], sector: float,
                    seed: int | None = None) -> PureState:
    """Random state supported on the basis states of total charge ``sector``."""
    _check_dims(dims)
    q = charge_diagonal(dims, site_charges)
    mask = np.isclose(q, sector)
    if not mask.any():
        raise NoSupport(f"charge sector {sector} is empty")
    rng = np.random.default_rng(seed)
    v = np.zeros(q.size, complex)
    k = int(mask.sum())
    v[mask] = rng.normal(size=k) + 1j * rng.normal(size=k)
    return PureState.from_vector(v, dims, seed=seed, meta={"charges": list(site_charges), "sector": sector})


def random_cluster_state(dims: Sequence[int], clusters: Sequence[Sequence[int]],
                         site_charges: Sequence[float] | None = None,
                         sectors: Sequence[float] | None = None,
                         seed: int | None = None) -> PureState:
    """Tensor product of independent random states on disjoint site clusters.

    Such states obey a strict area law built from local boundary terms, so any
    conditioning region thicker than the cluster size screens the CMI.  With
    ``site_charges`` each cluster is drawn inside the charge sector given by
    ``sectors`` and the whole state is U(1) symmetric.
    """
    _check_dims(dims)
    flat = [s for c in clusters for s in c]
    if sorted(flat) != list(range(len(dims))):
        raise InvalidParameter("clusters must partition the sites")
    rng = np.random.default_rng(seed)
    tensor = np.ones(1, complex)
    order = []
    for k, cl in enumerate(clusters):
        cd = [dims[s] for s in cl]
        sub_seed = int(rng.integers(2 ** 32))
        if site_charges is None:
            piece = random_state(cd, sub_seed)
        else:
            piece = random_u1_state(cd, [site_charges[s] for s in cl], sectors[k], sub_seed)
        tensor = np.kron(tensor, piece.amplitudes)
        order.extend(cl)
    t = tensor.reshape([dims[s] for s in order]).transpose(np.argsort(order))
    meta = {"clusters": [list(c) for c in clusters]}
    if site_charges is not None:
        meta.update(charges=list(site_charges), sector=float(sum(sectors)))
    return PureState.from_vector(t.ravel(), dims, seed=seed, meta=meta)


def toric_code_stabilizers(lx: int, ly: int) -> tuple[list[list[int]], list[list[int]]]:
    """Vertex (X-type) and plaquette (Z-type) supports on the edge lattice.

    Edge numbering matches :func:`modflow.lattice.build_edge_lattice`:
    h(x, y) = 2*(y*lx + x) joins (x, y)-(x+1, y); v(x, y) = h(x, y) + 1 joins
    (x, y)-(x, y+1).
    """
    def h(x, y):
        return 2 * ((y % ly) * lx + (x % lx))

    def v(x, y):
        return h(x, y) + 1

    verts = [[h(x, y), h(x - 1, y), v(x, y), v(x, y - 1)] for y in range(ly) for x in range(lx)]
    plaqs = [[h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)] for y in range(ly) for x in range(lx)]
    return verts, plaqs


def _masks(n: int, supports) -> list[int]:
    return [sum(1 << (n - 1 - s) for s in sup) for sup in supports]


def toric_code_ground_state(lx: int, ly: int) -> PureState:
    """``prod_v (1 + A_v)/2 |0...0>`` normalised.

    A_v is the product of X on the four bonds at vertex v and B_p the product
    of Z around plaquette p; the state has A_v = B_p = +1 and is also the +1
    eigenstate of Z strings along both non-contractible cycles.
    """
    n = 2 * lx * ly
    if n > 20:
        raise ResourceLimit(f"{n} qubits exceeds the 20-qubit toric-code limit")
    verts, _ = toric_code_stabilizers(lx, ly)
    idx = np.arange(2 ** n)
    psi = np.zeros(2 ** n, complex)
    psi[0] = 1.0
    for m in _masks(n, verts):
        psi = 0.5 * (psi + psi[idx ^ m])
    return PureState.from_vector(psi, (2,) * n, meta={"model": "toric", "lx": lx, "ly": ly})


def toric_stabilizer_expectations(state: PureState, lx: int, ly: int) -> tuple[np.ndarray, np.ndarray]:
    n = 2 * lx * ly
    verts, plaqs = toric_code_stabilizers(lx, ly)
    idx = np.arange(2 ** n)
    psi = state.amplitudes
    av = [np.vdot(psi, psi[idx ^ m]).real for m in _masks(n, verts)]
    bp = []
    for m in _masks(n, plaqs):
        par = _parity(idx & m)
        bp.append(float(np.sum(np.abs(psi) ** 2 * (1 - 2 * par))))
    return np.array(av), np.array(bp)


def _parity(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    p = np.zeros_like(x)
    while np.any(x):
        p ^= x & 1
        x >>= 1
    return p


def _random_density(dim: int, rank: int, rng) -> np.ndarray:
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _haar_unitary(dim: int, rng) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_markov_state(dim_A: int, left_dims: Sequence[int], right_dims: Sequence[int], dim_C: int,
                        dim_B: int | None = None, env_dim: int | None = None,
                        probs: Sequence[float] | None = None,
                        left_ranks: Sequence[int] | None = None,
                        right_ranks: Sequence[int] | None = None,
                        scramble_B: bool = True,
                        seed: int | None = None) -> tuple[PureState, MarkovCertificate]:
    """Pure state on parties (A, B, C, D) whose ABC marginal is exactly Markov.

    ``rho_ABC = (+)_i p_i rho_{A bL_i} (x) rho_{bR_i C}``, with block i occupying
    a ``left_dims[i] * right_dims[i]`` subspace of B; ``scramble_B`` rotates B
    by a Haar unitary so the block structure is hidden.  D purifies ABC and
    has dimension rank(rho_ABC) unless ``env_dim`` is given.
    """
    if len(left_dims) != len(right_dims) or not left_dims:
        raise InvalidParameter("need matching, non-empty block lists")
    rng = np.random.default_rng(seed)
    nb = len(left_dims)
    used = sum(l * r for l, r in zip(left_dims, right_dims))
    dim_B = used if dim_B is None else dim_B
    if used > dim_B:
        raise InvalidParameter("blocks do not fit into B")
    if probs is None:
        probs = rng.dirichlet(np.ones(nb) * 2.0)
    probs = np.asarray(probs, float)
    probs = probs / probs.sum()
    left_ranks = left_ranks or [dim_A * l for l in left_dims]
    right_ranks = right_ranks or [r * dim_C for r in right_dims]
    lefts, rights = [], []
    rho = np.zeros((dim_A, dim_B, dim_C, dim_A, dim_B, dim_C), complex)
    off = 0
    for i, (l, r) in enumerate(zip(left_dims, right_dims)):
        rl = _random_density(dim_A * l, min(left_ranks[i], dim_A * l), rng)
        rr = _random_density(r * dim_C, min(right_ranks[i], r * dim_C), rng)
        lefts.append(rl)
        rights.append(rr)
        # B index inside block i is off + bl * r + br
        blk = np.kron(rl, rr).reshape(dim_A, l, r, dim_C, dim_A, l, r, dim_C)
        sl = slice(off, off + l * r)
        rho[:, sl, :, :, sl, :] += probs[i] * blk.reshape(dim_A, l * r, dim_C, dim_A, l * r, dim_C)
        off += l * r
    u = _haar_unitary(dim_B, rng) if scramble_B else np.eye(dim_B)
    rho = np.einsum("ab,xbyzcw,dc->xayzdw", u, rho, u.conj(), optimize=True)
    d = dim_A * dim_B * dim_C
    mat = rho.reshape(d, d)
    mat = (mat + mat.conj().T) / 2
    w, v = np.linalg.eigh(mat)
    keep = w > 1e-14 * w.max()
    rank = int(keep.sum())
    env = rank if env_dim is None else env_dim
    if env < rank:
        raise ResourceLimit(f"environment dimension {env} cannot purify a rank-{rank} marginal")
    psi = np.zeros((d, env), complex)
    psi[:, :rank] = v[:, keep] * np.sqrt(w[keep])[None, :]
    state = PureState.from_vector(psi.ravel(), (dim_A, dim_B, dim_C, env), seed=seed,
                                  meta={"parties": "ABCD"})
    cert = MarkovCertificate(tuple(zip(left_dims, right_dims)), tuple(float(p) for p in probs),
                             tuple(lefts), tuple(rights), u)
    return state, cert


def apply_local_operator(state: PureState, sites, op: np.ndarray, normalize: bool = False) -> PureState:
    """Apply ``op`` (acting on ``sites`` in sorted order) tensored with identity."""
    region = as_region(sites)
    m = bipartite(state, region)
    op = np.asarray(op, complex)
    if op.shape != (m.shape[0], m.shape[0]):
        raise InvalidOperator(f"operator shape {op.shape} does not match region dim {m.shape[0]}")
    vec = from_bipartite(op @ m, state.dims, region)
    if normalize:
        return state.with_amplitudes(vec)
    return PureState(vec, state.dims, state.seed, dict(state.meta))


def apply_onsite_unitary(state: PureState, unitaries: Sequence[np.ndarray | None]) -> PureState:
    """Apply ``prod_v U_v``; ``None`` entries are identities."""
    if len(unitaries) != state.n_sites:
        raise InvalidOperator("one factor (or None) per site required")
    t = state.amplitudes.reshape(state.dims)
    for k, u in enumerate(unitaries):
        if u is None:
            continue
        u = np.asarray(u, complex)
        if u.shape != (state.dims[k],) * 2 or not np.allclose(u.conj().T @ u, np.eye(state.dims[k]), atol=1e-12):
            raise InvalidOperator(f"factor on site {k} is not unitary")
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [k])), 0, k)
    return PureState(t.ravel(), state.dims, state.seed, dict(state.meta))


def u1_rotation(dims: Sequence[int], site_charges: Sequence[float], t: float, region=None) -> list:
    """Per-site factors of ``U_X(t) = prod_{v in X} exp(i t Q_v)``."""
    sites = set(range(len(dims))) if region is None else set(as_region(region).sites)
    return [np.diag(np.exp(1j * t * site_charges[k] * np.arange(d))) if k in sites else None
            for k, d in enumerate(dims)]


def save_state(state: PureState, path) -> None:
    """Write ``<path>.npy`` (amplitudes) and ``<path>.json`` (header)."""
    path = Path(path)
    np.save(path.with_suffix(".npy"), state.amplitudes)
    header = {"dims": list(state.dims), "seed": state.seed, "norm": state.norm}
    path.with_suffix(".json").write_text(json.dumps(header, indent=2))


def load_state(path) -> PureState:
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    amps = np.load(path.with_suffix(".npy"))
    return PureState(amps, tuple(header["dims"]), header.get("seed"))
