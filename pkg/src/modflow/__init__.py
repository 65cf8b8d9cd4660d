"""Instantaneous modular flow, modular commutators and charge pumps.

Two backends share one interface: a dense pure-state backend for small
qudit systems (:mod:`modflow.exact`) and a free-fermion backend working
with correlation matrices (:mod:`modflow.gaussian`).
"""
__version__ = "0.1.0"

from .errors import (ConfigError, InvalidGeometry, InvalidOperator, InvalidParameter,
                     InvalidRegion, ModelGapless, ModflowError, NoSupport,
                     PreconditionViolation, ResourceLimit, TopologyViolation)
from .lattice import (A1Regions, DeformationSpec, Lattice, Region, Tripartition,
                      annulus_partition_BCD, apply_deformation, build_chain,
                      build_edge_lattice, build_torus_lattice, tripartite_chain,
                      tripartite_disk)
from .exact import (DensityMatrix, MarkovCertificate, PureState, apply_onsite_unitary,
                    partial_trace, random_markov_state, random_state, random_u1_state,
                    toric_code_ground_state)
from .modular import cmi, entropy, modular_hamiltonian, modular_phase, region_entropy
from .imf import (FlowProgram, FlowStep, apply_flow, run_program, verify_commutation,
                  verify_flip, verify_flow_identity_deform, verify_k_decomposition,
                  verify_markov_move, verify_u_passthrough)
from .chirality import (ChargeOperator, PumpSeries, J_via_overlap, charge_pump, entropy_pump,
                        hall_sigma, modular_commutator_J, sigma_via_overlap)
from .gaussian import (GaussianState, ModelParams, chern_number, g_J, g_imf, g_sigma,
                       qwz_ground_state, slater_fock_embed)
