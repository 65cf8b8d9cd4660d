"""Modular commutator J, the charge response Sigma, and the pumping experiments.

Both observables are expectation values of commutators with modular
Hamiltonians and are evaluated from operator-on-vector products:

    J     = i <[K_AB, K_BC]>    = -2 Im <K_AB psi | K_BC psi>
    Sigma = (i/2) <[K_AB, Q_BC^2]> = -Im <K_AB psi | Q_BC^2 psi>

The overlap forms use ``F_J(x, y) = <I_AB(x)psi | I_BC(y)psi>`` and
``F_S(x, y) = <I_AB(x)psi | exp(i y Q_BC) psi>``.  Since
``I_X(s)psi = exp(-i s K_X) psi`` on the state, ``d_x d_y F_J = <K_AB K_BC>``
and ``d_x d_y^2 F_S = -i <K_AB Q_BC^2>`` at the origin, hence
``J = -2 Im d_x d_y F_J`` and ``Sigma = -Re d_x d_y^2 F_S``.

Functions that accept a state dispatch on its type, so a
:class:`~modflow.gaussian.GaussianState` runs through the same entry points.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from . import gaussian as gs
from .errors import InvalidParameter, InvalidRegion, PreconditionViolation
from .exact import PureState, charge_diagonal
from .imf import _residual, apply_flow
from .lattice import Region, Tripartition, apply_deformation, as_region
from .modular import EPS, apply_modular_hamiltonian, apply_modular_phase, region_entropy, schmidt


class FitQualityWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class ChargeOperator:
    """``Q_X = sum_{v in X} q_v n_v`` with ``n_v = diag(0, 1, ..., d_v - 1)``."""

    charges: tuple
    region: Region | None = None

    def __post_init__(self):
        object.__setattr__(self, "charges", tuple(float(q) for q in self.charges))
        if self.region is not None:
            object.__setattr__(self, "region", as_region(self.region))

    def restrict(self, region) -> "ChargeOperator":
        return ChargeOperator(self.charges, region)

    def diagonal(self, dims: Sequence[int]) -> np.ndarray:
        if len(dims) != len(self.charges):
            raise InvalidParameter("one charge per site required")
        return charge_diagonal(dims, self.charges, self.region)

    def bound(self, dims: Sequence[int]) -> float:
        sites = range(len(dims)) if self.region is None else self.region.sites
        return float(sum(abs(self.charges[k]) * (dims[k] - 1) for k in sites))

    def __add__(self, other: "ChargeOperator") -> "ChargeOperator":
        if self.charges != other.charges:
            raise InvalidParameter("charge assignments differ")
        a = set(self.region.sites) if self.region is not None else None
        b = set(other.region.sites) if other.region is not None else None
        if a is None or b is None or a & b:
            raise InvalidRegion("can only add charges of disjoint regions")
        return ChargeOperator(self.charges, Region(a | b))


def _charges(charges, state: PureState) -> ChargeOperator:
    if isinstance(charges, ChargeOperator):
        return charges
    if charges is None:
        charges = [1.0] * state.n_sites
    return ChargeOperator(tuple(charges))


@dataclass(eq=False)
class PumpSeries:
    t: np.ndarray
    values: np.ndarray
    backend: str
    quantity: str
    slope: float
    intercept: float
    r2: float
    aux: np.ndarray | None = None
    aux_name: str = ""
    slope_factor: float = 1.0       # Sigma = slope_factor * slope for the charge pump
    meta: dict = field(default_factory=dict)

    @classmethod
    def build(cls, t, values, backend: str, quantity: str, aux=None, aux_name: str = "",
              slope_factor: float = 1.0, trim: float = 0.1) -> "PumpSeries":
        t = np.asarray(t, float)
        v = np.asarray(values, float)
        if t.ndim != 1 or t.size != v.size or np.any(np.diff(t) <= 0):
            raise InvalidParameter("t grid must be strictly increasing and match the values")
        if not np.all(np.isfinite(v)):
            raise InvalidParameter("pump values must be finite")
        slope, intercept, r2, used = fit_slope(t, v, trim)
        out = cls(t, v, backend, quantity, slope, intercept, r2,
                  None if aux is None else np.asarray(aux, float), aux_name, slope_factor)
        out.meta["fit_points"] = used
        return out

    @property
    def response(self) -> float:
        """``slope`` for the entropy pump, ``slope / 2`` (= Sigma) for the charge pump."""
        return self.slope * self.slope_factor

    def rows(self) -> list[dict]:
        out = []
        for k, t in enumerate(self.t):
            row = {"t": t, self.quantity: self.values[k]}
            if self.aux is not None:
                row[self.aux_name] = self.aux[k]
            out.append(row)
        return out

    def summary(self) -> dict:
        return {"quantity": self.quantity, "backend": self.backend, "slope": self.slope,
                "intercept": self.intercept, "r2": self.r2, "response": self.response,
                "fit_points": self.meta.get("fit_points"),
                "spread": float(np.ptp(self.values))}


def fit_slope(t, v, trim: float = 0.1) -> tuple[float, float, float, int]:
    """OLS over the central ``1 - 2 trim`` fraction of the grid; returns slope, intercept, R^2, n."""
    t = np.asarray(t, float)
    v = np.asarray(v, float)
    n = t.size
    lo = int(np.floor(trim * n))
    sel = slice(lo, n - lo)
    tt, vv = t[sel], v[sel]
    if tt.size < 3:
        warnings.warn("grid too coarse for a slope fit; using all points", FitQualityWarning)
        tt, vv = t, v
    if tt.size < 2:
        raise InvalidParameter("need at least two grid points")
    res = stats.linregress(tt, vv)
    ss = float(np.sum((vv - vv.mean()) ** 2))
    r2 = 1.0 if ss < 1e-24 else float(res.rvalue ** 2)
    return float(res.slope), float(res.intercept), r2, int(tt.size)


# ---------------------------------------------------------------------------
# J and Sigma
# ---------------------------------------------------------------------------

def _check_tri(tri: Tripartition):
    if not isinstance(tri, Tripartition):
        raise InvalidRegion("expected a Tripartition")


def modular_commutator_J(state, tri: Tripartition, eps: float = EPS,
                         return_imag: bool = False):
    """``J(A,B,C) = i <[K_AB, K_BC]>``; optionally also its imaginary residue."""
    _check_tri(tri)
    if isinstance(state, gs.GaussianState):
        j = gs.g_J(state, tri)
        return (j, 0.0) if return_imag else j
    a = apply_modular_hamiltonian(state, tri.AB, eps)
    b = apply_modular_hamiltonian(state, tri.BC, eps)
    val = 1j * (np.vdot(a, b) - np.vdot(b, a))
    return (float(val.real), float(val.imag)) if return_imag else float(val.real)


def overlap_F_J(state: PureState, tri: Tripartition, x: float, y: float) -> complex:
    """``<I_AB(x)psi | I_BC(y)psi>``."""
    _check_tri(tri)
    return complex(np.vdot(apply_flow(state, tri.AB, x).amplitudes,
                           apply_flow(state, tri.BC, y).amplitudes))


def J_via_overlap(state: PureState, tri: Tripartition, h: float = 1e-3, eps: float = EPS) -> float:
    """Central-difference ``-2 Im d_x d_y F_J`` at the origin."""
    _check_tri(tri)
    if not h > 0:
        raise InvalidParameter("finite-difference step must be positive")
    sab, sbc = schmidt(state, tri.AB, eps), schmidt(state, tri.BC, eps)
    ab = {s: apply_modular_phase(state, tri.AB, s * h, eps, sc=sab) for s in (1, -1)}
    bc = {s: apply_modular_phase(state, tri.BC, s * h, eps, sc=sbc) for s in (1, -1)}
    F = lambda sx, sy: np.vdot(ab[sx], bc[sy])  # noqa: E731
    mixed = (F(1, 1) - F(1, -1) - F(-1, 1) + F(-1, -1)) / (4 * h * h)
    return float(-2 * mixed.imag)


def _u1_variance(state: PureState, q: ChargeOperator) -> float:
    d = ChargeOperator(q.charges).diagonal(state.dims)
    p = np.abs(state.amplitudes) ** 2
    m = float(p @ d)
    return float(p @ (d - m) ** 2)


def _require_symmetric(state: PureState, q: ChargeOperator, tol: float = 1e-10):
    var = _u1_variance(state, q)
    if var > tol:
        raise PreconditionViolation(f"state is not U(1) symmetric (total-charge variance {var:.3e})")


def hall_sigma(state, tri: Tripartition, charges=None, eps: float = EPS,
               check_symmetry: bool = True) -> float:
    """``Sigma(A,B,C) = (i/2) <[K_AB, Q_BC^2]>``."""
    _check_tri(tri)
    if isinstance(state, gs.GaussianState):
        return gs.g_sigma(state, tri, charges)
    q = _charges(charges, state)
    if check_symmetry:
        _require_symmetric(state, q)
    qbc = q.restrict(tri.BC).diagonal(state.dims)
    a = apply_modular_hamiltonian(state, tri.AB, eps)
    return float(-np.vdot(a, qbc ** 2 * state.amplitudes).imag)


def overlap_F_sigma(state: PureState, tri: Tripartition, charges, x: float, y: float) -> complex:
    """``<I_AB(x)psi | exp(i y Q_BC) psi>``."""
    q = _charges(charges, state).restrict(tri.BC).diagonal(state.dims)
    return complex(np.vdot(apply_flow(state, tri.AB, x).amplitudes,
                           np.exp(1j * y * q) * state.amplitudes))


def sigma_via_overlap(state: PureState, tri: Tripartition, charges=None, h: float = 1e-3,
                      eps: float = EPS) -> float:
    """``-Re d_x d_y^2 F_S`` with a central x-difference and a 5-point y-stencil."""
    _check_tri(tri)
    if not h > 0:
        raise InvalidParameter("finite-difference step must be positive")
    q = _charges(charges, state).restrict(tri.BC).diagonal(state.dims)
    sab = schmidt(state, tri.AB, eps)
    ab = {s: apply_modular_phase(state, tri.AB, s * h, eps, sc=sab) for s in (1, -1)}
    ys = {k: np.exp(1j * k * h * q) * state.amplitudes for k in (-2, -1, 0, 1, 2)}
    w = {-2: -1.0, -1: 16.0, 0: -30.0, 1: 16.0, 2: -1.0}

    def d2(sx):
        return sum(w[k] * np.vdot(ab[sx], ys[k]) for k in w) / (12 * h * h)

    third = (d2(1) - d2(-1)) / (2 * h)
    return float(-third.real)


def check_basic_charge_facts(state: PureState, tri: Tripartition, charges=None,
                             eps: float = EPS) -> dict[str, float]:
    """Residuals of the elementary charge identities on a U(1)-symmetric state.

    * ``||[K_X, Q_X] psi||`` for X in (A, AB, BC, B)
    * ``|<[K_AB, Q_A^2]>|``
    * ``|<[K_AB, Q_BC^2]> - <[K_AB, Q_{(BC)^c}^2]>|``
    """
    _check_tri(tri)
    q = _charges(charges, state)
    psi = state.amplitudes
    out = {}
    for name, X in (("A", tri.A), ("AB", tri.AB), ("BC", tri.BC), ("B", tri.B)):
        qx = q.restrict(X).diagonal(state.dims)
        kq = apply_modular_hamiltonian(state, X, eps, vector=qx * psi)
        qk = qx * apply_modular_hamiltonian(state, X, eps)
        out[f"[K_{name},Q_{name}]psi"] = float(np.linalg.norm(kq - qk))
    a = apply_modular_hamiltonian(state, tri.AB, eps)

    def comm(region):
        d = q.restrict(region).diagonal(state.dims)
        x = np.vdot(a, d ** 2 * psi)
        return 2j * x.imag                           # <K Q^2> - <Q^2 K>

    out["<[K_AB,Q_A^2]>"] = float(abs(comm(tri.A)))
    rest = Region([k for k in range(state.n_sites) if k not in tri.BC])
    out["<[K_AB,Q_BC^2]>-<[K_AB,Q_BCbar^2]>"] = float(abs(comm(tri.BC) - comm(rest)))
    return out


# ---------------------------------------------------------------------------
# pumps and the exact derivative laws
# ---------------------------------------------------------------------------

def _grid(t_grid) -> np.ndarray:
    ts = np.asarray(t_grid, float)
    if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0):
        raise InvalidParameter("t grid must be strictly increasing")
    return ts


def flow_path(state, region, t_grid, eps: float = EPS):
    """Yield ``(t, I_X(t) state)`` by composing grid increments."""
    ts = _grid(t_grid)
    step = gs.g_imf if isinstance(state, gs.GaussianState) else apply_flow
    cur, prev = step(state, region, ts[0]), ts[0]
    for t in ts:
        cur = step(cur, region, t - prev)
        prev = t
        yield t, cur


def entropy_pump(state, tri: Tripartition, t_grid, with_J: bool = True,
                 eps: float = EPS) -> PumpSeries:
    """``S_BC`` (and ``J``) along ``psi(t) = I_AB(t) psi``."""
    _check_tri(tri)
    if isinstance(state, gs.GaussianState):
        return gs.g_entropy_pump(state, tri, t_grid, with_J)
    vals, js = [], []
    for _, cur in flow_path(state, tri.AB, t_grid, eps):
        vals.append(region_entropy(cur, tri.BC, eps))
        js.append(modular_commutator_J(cur, tri, eps) if with_J else np.nan)
    return PumpSeries.build(_grid(t_grid), vals, "exact", "S_BC", np.array(js), "J")


def charge_pump(state, tri: Tripartition, charges=None, t_grid=(-1.0, 0.0, 1.0),
                with_sigma: bool = True, eps: float = EPS) -> PumpSeries:
    """``<Q_BC^2>`` (and ``Sigma``) along ``psi(t) = I_AB(t) psi``; slope = 2 Sigma."""
    _check_tri(tri)
    if isinstance(state, gs.GaussianState):
        return gs.g_charge_pump(state, tri, t_grid, charges, with_sigma)
    q = _charges(charges, state)
    qbc2 = q.restrict(tri.BC).diagonal(state.dims) ** 2
    vals, sig = [], []
    for _, cur in flow_path(state, tri.AB, t_grid, eps):
        vals.append(float(np.abs(cur.amplitudes) ** 2 @ qbc2))
        sig.append(hall_sigma(cur, tri, q, eps, check_symmetry=False) if with_sigma else np.nan)
    return PumpSeries.build(_grid(t_grid), vals, "exact", "Q2_BC", np.array(sig), "Sigma",
                            slope_factor=0.5)


def _observable(state, tri, kind: str, charges, eps):
    if kind == "S":
        if isinstance(state, gs.GaussianState):
            return gs.g_entropy(state, tri.BC)
        return region_entropy(state, tri.BC, eps)
    if isinstance(state, gs.GaussianState):
        return gs.g_charge_variance(state, tri.BC, charges)
    q = _charges(charges, state).restrict(tri.BC).diagonal(state.dims)
    return float(np.abs(state.amplitudes) ** 2 @ q ** 2)


def derivative_law(state, tri: Tripartition, t_points: Sequence[float], kind: str = "S",
                   charges=None, h: float = 1e-3, eps: float = EPS) -> list[dict]:
    """Compare central differences along ``I_AB`` with the instantaneous response.

    ``kind="S"``: ``dS_BC/dt`` against ``J(psi(t))``.
    ``kind="Q"``: ``d<Q_BC^2>/dt`` against ``2 Sigma(psi(t))``.
    """
    if kind not in ("S", "Q"):
        raise InvalidParameter("kind must be 'S' or 'Q'")
    if not h > 0:
        raise InvalidParameter("finite-difference step must be positive")
    gauss = isinstance(state, gs.GaussianState)
    step = gs.g_imf if gauss else apply_flow
    rows = []
    for t in sorted(float(x) for x in t_points):
        cur = step(state, tri.AB, t)
        fp = _observable(step(cur, tri.AB, h), tri, kind, charges, eps)
        fm = _observable(step(cur, tri.AB, -h), tri, kind, charges, eps)
        fd = (fp - fm) / (2 * h)
        if kind == "S":
            ref = modular_commutator_J(cur, tri, eps)
        else:
            ref = 2 * hall_sigma(cur, tri, charges, eps) if gauss else \
                2 * hall_sigma(cur, tri, charges, eps, check_symmetry=False)
        rows.append({"t": t, "finite_difference": fd, "instantaneous": ref, "residual": abs(fd - ref)})
    return rows


# ---------------------------------------------------------------------------
# deformation invariance and the V(t) cancellation
# ---------------------------------------------------------------------------

def _invariance_table(state, lattice, tri, deformations, value) -> dict:
    base = value(tri)
    rows = []
    for spec in deformations:
        new = apply_deformation(lattice, tri, spec)
        v = value(new)
        rows.append({"case": spec.case, "moved": list(spec.moved_sites.sites), "value": v,
                     "delta": v - base})
    worst = max((abs(r["delta"]) for r in rows), default=0.0)
    rel = worst / abs(base) if abs(base) > 1e-12 else float("nan")
    return {"base": base, "rows": rows, "max_abs_delta": worst, "max_rel_delta": rel}


def check_J_invariance(state, lattice, tri: Tripartition, deformations, eps: float = EPS) -> dict:
    """``J`` before/after each :class:`~modflow.lattice.DeformationSpec`."""
    return _invariance_table(state, lattice, tri, deformations,
                             lambda t: modular_commutator_J(state, t, eps))


def check_sigma_invariance(state, lattice, tri: Tripartition, charges, deformations,
                           eps: float = EPS) -> dict:
    """``Sigma`` before/after each deformation case."""
    return _invariance_table(state, lattice, tri, deformations,
                             lambda t: hall_sigma(state, t, charges, eps))


def verify_V_cancellation(state: PureState, regions: Mapping[str, object], t: float,
                          x: float, y: float, eps: float = EPS) -> tuple[float, float]:
    """Check ``I_AB(x) psi(t) = V(t) I_AB(x) psi'(t)`` and the BC analogue.

    ``psi(t) = I_AB(t) psi``, ``psi'(t) = I_MD(t) psi`` and
    ``V(t) = rho'_D^{-it} rho'_DE^{it} rho'_M^{-it} rho'_C^{it}`` with every
    factor built from ``psi'(t)`` as a unitary extension.
    """
    R = {k: as_region(v) for k, v in regions.items()}
    A, B, D, E, M = R["A"], R["B"], R["D"], R["E"], R["M"]
    C = M | R["C'"]
    psi_t = apply_flow(state, A | B, t, eps)
    psi_p = apply_flow(state, M | D, t, eps)
    factors = [(C, t), (M, -t), (D | E, t), (D, -t)]
    cache = {id(X): schmidt(psi_p, X, eps) for X, _ in factors}

    def V(vec):
        for X, s in factors:
            vec = apply_modular_phase(psi_p, X, s, eps, sc=cache[id(X)], vector=vec)
        return vec

    r_ab = _residual(apply_flow(psi_t, A | B, x, eps).amplitudes,
                     V(apply_flow(psi_p, A | B, x, eps).amplitudes))
    r_bc = _residual(apply_flow(psi_t, B | C, y, eps).amplitudes,
                     V(apply_flow(psi_p, B | C, y, eps).amplitudes))
    return float(r_ab), float(r_bc)
