"""Entropies of CSS stabilizer states by GF(2) rank counting.

For a stabilizer state on n qubits, ``S_R = (|R| - dim G_R) ln 2`` where
``G_R`` is the subgroup of stabilizers supported inside R.  For a CSS code the
X- and Z-type parts count separately, and for a generator matrix V the
dimension of ``{v in span V : supp v in R}`` is ``rank V - rank V[:, R^c]``.
This gives an oracle for the toric code that shares no code with the
state-vector backend.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import as_region

LN2 = float(np.log(2.0))


def gf2_rank(mat: np.ndarray) -> int:
    m = (np.asarray(mat, np.uint8) & 1).copy()
    rows, cols = m.shape if m.ndim == 2 else (0, 0)
    r = 0
    for c in range(cols):
        piv = np.flatnonzero(m[r:, c])
        if piv.size == 0:
            continue
        p = r + piv[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        hit = np.flatnonzero(m[:, c])
        hit = hit[hit != r]
        m[hit] ^= m[r]
        r += 1
        if r == rows:
            break
    return r


def gf2_nullspace(mat: np.ndarray) -> np.ndarray:
    """Basis (rows) of ``{z : mat @ z = 0 mod 2}``."""
    m = (np.asarray(mat, np.uint8) & 1).copy()
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        piv = np.flatnonzero(m[r:, c]) if r < rows else np.array([], int)
        if piv.size == 0:
            continue
        p = r + piv[0]
        m[[r, p]] = m[[p, r]]
        hit = np.flatnonzero(m[:, c])
        hit = hit[hit != r]
        m[hit] ^= m[r]
        pivots.append(c)
        r += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        z = np.zeros(cols, np.uint8)
        z[f] = 1
        for i, pc in enumerate(pivots):
            z[pc] = m[i, f]
        basis.append(z)
    return np.array(basis, np.uint8).reshape(len(basis), cols)


def _support_matrix(n: int, supports: Sequence[Sequence[int]]) -> np.ndarray:
    m = np.zeros((len(supports), n), np.uint8)
    for i, s in enumerate(supports):
        for q in s:
            m[i, q] ^= 1
    return m


@dataclass(frozen=True, eq=False)
class CSSState:
    n: int
    x_gens: np.ndarray
    z_gens: np.ndarray

    @classmethod
    def from_x_supports(cls, n: int, supports) -> "CSSState":
        """State stabilized by the given X checks and every commuting Z string.

        This is ``prod (1 + X_s)/2 |0...0>``: the Z part is the GF(2)
        orthogonal complement of the X span.
        """
        x = _support_matrix(n, supports)
        return cls(n, x, gf2_nullspace(x))

    def _dim_inside(self, gens: np.ndarray, region) -> int:
        outside = [q for q in range(self.n) if q not in set(region)]
        if gens.shape[0] == 0:
            return 0
        return gf2_rank(gens) - (gf2_rank(gens[:, outside]) if outside else 0)

    def entropy(self, region) -> float:
        sites = as_region(region).sites
        k = self._dim_inside(self.x_gens, sites) + self._dim_inside(self.z_gens, sites)
        return (len(sites) - k) * LN2

    def cmi(self, A, B, C) -> float:
        A, B, C = as_region(A), as_region(B), as_region(C)
        S = self.entropy
        return S(A | B) + S(B | C) - S(B) - S(A | B | C)


def toric_css(lx: int, ly: int) -> CSSState:
    from .exact import toric_code_stabilizers
    verts, _ = toric_code_stabilizers(lx, ly)
    return CSSState.from_x_supports(2 * lx * ly, verts)
