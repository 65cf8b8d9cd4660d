"""Instantaneous modular flow with current-state semantics.

``apply_flow(psi, X, t)`` returns ``rho_X**(it) |psi>`` where ``rho_X`` is the
reduced density matrix of ``psi`` itself.  A sequence of flows therefore
recomputes the reduced state before every step; the ``verify_*`` helpers build
both sides of each flow identity this way and report the 2-norm of their
difference.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidParameter, InvalidRegion, PreconditionViolation
from .exact import PureState, apply_local_operator, apply_onsite_unitary
from .lattice import Region, as_region
from .modular import (EPS, apply_modular_hamiltonian, apply_modular_phase, cmi,
                      schmidt)


class Residual(float):
    """A 2-norm residual that also carries the global-phase-quotiented value."""

    phase_free: float

    def __new__(cls, value: float, phase_free: float | None = None):
        obj = super().__new__(cls, value)
        obj.phase_free = float(value if phase_free is None else phase_free)
        return obj


def _residual(u: np.ndarray, v: np.ndarray) -> Residual:
    d = float(np.linalg.norm(u - v))
    ov = abs(np.vdot(u, v))
    pf = float(np.sqrt(max(0.0, 2.0 - 2.0 * min(ov, 1.0))))
    return Residual(d, pf)


@dataclass(frozen=True)
class FlowStep:
    region: Region
    t: float

    def __post_init__(self):
        object.__setattr__(self, "region", as_region(self.region))
        if len(self.region) == 0:
            raise InvalidRegion("flow step needs a nonempty region")
        object.__setattr__(self, "t", float(self.t))


@dataclass
class FlowProgram:
    """Ordered flow steps; ``provenance`` is filled by :func:`run_program`.

    Each provenance entry records the step index, the region, ``t``, and the
    index of the state (0 = input, k = output of step k) whose reduced density
    matrix generated that step's unitary, together with its entropy.
    """

    steps: list[FlowStep] = field(default_factory=list)
    provenance: list[dict] = field(default_factory=list)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "FlowProgram":
        return cls([s if isinstance(s, FlowStep) else FlowStep(*s) for s in pairs])

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def apply_flow(state: PureState, region, t: float, eps: float = EPS) -> PureState:
    """``I_X(t)|psi> = rho_X**(it)|psi>`` using the unitary extension of rho_X."""
    region = as_region(region)
    if len(region) in (0, state.n_sites) or t == 0:
        # rho of the empty / full region is the scalar 1 (pure state)
        return state
    vec = apply_modular_phase(state, region, t, eps)
    return PureState(vec, state.dims, state.seed, dict(state.meta))


def run_program(state: PureState, program, eps: float = EPS) -> PureState:
    """Apply the steps in order; step k sees the output of step k-1."""
    if not isinstance(program, FlowProgram):
        program = FlowProgram.from_pairs(program)
    program.provenance.clear()
    cur = state
    for k, step in enumerate(program.steps):
        sc = schmidt(cur, step.region, eps)
        p = sc.probabilities[sc.keep]
        program.provenance.append({
            "step": k, "region": list(step.region.sites), "t": step.t,
            "rho_from_state": k, "entropy": float(-np.sum(p * np.log(p))),
            "rank": int(sc.keep.sum()),
        })
        if step.t != 0 and len(step.region) < cur.n_sites:
            cur = PureState(apply_modular_phase(cur, step.region, step.t, eps, sc=sc),
                            cur.dims, cur.seed, dict(cur.meta))
    return cur


def naive_composition(state: PureState, program, eps: float = EPS) -> PureState:
    """Every rho_X**(it) built from the *initial* state (not an IMF sequence)."""
    if not isinstance(program, FlowProgram):
        program = FlowProgram.from_pairs(program)
    vec = state.amplitudes
    for step in program.steps:
        vec = apply_modular_phase(state, step.region, step.t, eps, vector=vec)
    return PureState(vec, state.dims, state.seed, dict(state.meta))


def _complement(state: PureState, region: Region) -> Region:
    return Region(tuple(k for k in range(state.n_sites) if k not in region))


def verify_flip(state: PureState, A, t: float, eps: float = EPS) -> Residual:
    """``|| I_A(t)psi - I_Abar(t)psi ||``."""
    A = as_region(A)
    lhs = apply_flow(state, A, t, eps).amplitudes
    rhs = apply_flow(state, _complement(state, A), t, eps).amplitudes
    return _residual(lhs, rhs)


def verify_commutation(state: PureState, A, B, s: float, t: float, eps: float = EPS,
                       strict: bool = True) -> Residual:
    """``|| I_A(s) I_B(t) psi - I_B(t) I_A(s) psi ||`` for ``A`` inside ``B``.

    ``strict=False`` skips the nesting check, which is how the counterexample
    family (overlapping, non-nested regions) is evaluated.
    """
    A, B = as_region(A), as_region(B)
    if strict and not set(A.sites) <= set(B.sites):
        raise PreconditionViolation("commutation move needs A contained in B")
    one = run_program(state, [(B, t), (A, s)], eps).amplitudes
    two = run_program(state, [(A, s), (B, t)], eps).amplitudes
    return _residual(one, two)


def markov_move_sides(state: PureState, A, B, C, t: float, eps: float = EPS):
    A, B, C = as_region(A), as_region(B), as_region(C)
    lhs = apply_flow(state, A | B | C, t, eps)
    cur = apply_flow(state, B, -t, eps)
    cur = apply_flow(cur, B | C, t, eps)
    rhs = apply_flow(cur, A | B, t, eps)
    return lhs, rhs


def verify_markov_move(state: PureState, A, B, C, t: float, eps: float = EPS) -> Residual:
    """``|| I_ABC(t)psi - I_AB(t) I_BC(t) I_B(-t) psi ||``."""
    lhs, rhs = markov_move_sides(state, A, B, C, t, eps)
    return _residual(lhs.amplitudes, rhs.amplitudes)


def k_combination(state: PureState, terms: Sequence[tuple[float, object]],
                  eps: float = EPS) -> np.ndarray:
    """``sum_k c_k (K_{X_k} (x) 1)|psi>`` for ``terms = [(c_k, X_k), ...]``."""
    out = np.zeros(state.dim, complex)
    for c, X in terms:
        if len(as_region(X)) in (0, state.n_sites):
            continue
        out += c * apply_modular_hamiltonian(state, X, eps)
    return out


def verify_k_decomposition(state: PureState, A, B, C, eps: float = EPS) -> float:
    """``|| (K_AB + K_BC - K_ABC - K_B)|psi> ||``."""
    A, B, C = as_region(A), as_region(B), as_region(C)
    v = k_combination(state, [(1, A | B), (1, B | C), (-1, A | B | C), (-1, B)], eps)
    return float(np.linalg.norm(v))


def verify_u_passthrough(state: PureState, program, unitaries: Sequence | None = None,
                         op: tuple | None = None, eps: float = EPS) -> Residual:
    """Max over insertion points of ``|| U P psi - P_k(U) psi ||``.

    ``unitaries`` is a per-site list (``None`` = identity).  Alternatively
    ``op = (sites, matrix)`` inserts a general multi-site unitary, which is
    how the non-on-site counterexample is built.
    """
    if not isinstance(program, FlowProgram):
        program = FlowProgram.from_pairs(program)
    if (unitaries is None) == (op is None):
        raise InvalidParameter("give exactly one of unitaries / op")

    def U(s: PureState) -> PureState:
        if unitaries is not None:
            return apply_onsite_unitary(s, unitaries)
        return apply_local_operator(s, op[0], op[1])

    ref = U(run_program(state, program, eps)).amplitudes
    worst = Residual(0.0, 0.0)
    n = len(program.steps)
    for k in range(n):
        cur = run_program(state, FlowProgram(program.steps[:k]), eps)
        cur = run_program(U(cur), FlowProgram(program.steps[k:]), eps)
        r = _residual(ref, cur.amplitudes)
        if r > worst:
            worst = r
    return worst


def deform_regions_check(state: PureState, regions: Mapping[str, object],
                         tol: float = 1e-6, eps: float = EPS) -> dict:
    """Markov preconditions ``I(C:E|D)`` and ``I(D:C'|M)`` with ``C = MC'``."""
    R = {k: as_region(v) for k, v in regions.items()}
    C = R["M"] | R["C'"]
    out = {"I(C:E|D)": cmi(state, C, R["D"], R["E"], eps),
           "I(D:C'|M)": cmi(state, R["D"], R["M"], R["C'"], eps)}
    out["ok"] = all(v <= tol for k, v in out.items())
    return out


def verify_flow_identity_deform(state: PureState, regions: Mapping[str, object], t: float,
                                tol: float = 1e-6, eps: float = EPS) -> Residual:
    """``|| I_AB(t)psi - I_D(-t) I_DE(t) I_M(-t) I_C(t) I_MD(t) psi ||``.

    ``regions`` maps ``A, B, C', M, D, E`` to site sets; ``C = M C'`` and
    ``E`` should be the complement of ``ABCD``.
    """
    R = {k: as_region(v) for k, v in regions.items()}
    missing = {"A", "B", "C'", "M", "D", "E"} - set(R)
    if missing:
        raise InvalidRegion(f"missing regions {sorted(missing)}")
    pre = deform_regions_check(state, R, tol, eps)
    if not pre["ok"]:
        raise PreconditionViolation(f"Markov preconditions fail: {pre}")
    A, B, D, E, M = R["A"], R["B"], R["D"], R["E"], R["M"]
    C = M | R["C'"]
    lhs = apply_flow(state, A | B, t, eps).amplitudes
    rhs = run_program(state, [(M | D, t), (C, t), (M, -t), (D | E, t), (D, -t)], eps).amplitudes
    return _residual(lhs, rhs)
