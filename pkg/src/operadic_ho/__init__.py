"""Operadic Lax representations of the harmonic oscillator, the evolving
Bianchi algebras VII_a, III_1, VI_a, and their quantum Jacobi operators on a
truncated Fock space."""
from .errors import DomainError, PositivityError, TruncationError
from .fock import FockSpace, coherent, func_calc
from .lax import BianchiSpec, CParams, Family, StructureTable, evolve_algebra, solve_constants
from .operad import MultiOp, apply, gerstenhaber, partial_compose, total_compose
from .oscillator import OscParams, OscState, QuasiState
from .qjacobi import Ordering, build_quantum_structure, qjacobi_closed, qjacobi_direct

__version__ = "0.1.0"
