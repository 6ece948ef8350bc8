"""
Operator-valued Bianchi structures on the truncated Fock space, their
quantum Jacobi operator, and the closed and semiclassical forms it is
compared against.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .fock import (
    FockSpace,
    coherent,
    coherent_alpha_for_energy,
    commutator,
    energy_indices,
    func_calc,
    projected_norm,
    truncation_size,
)
from .errors import TruncationError
from .lax import BianchiSpec, _closed_form_basis
from .oscillator import OscParams

log = logging.getLogger(__name__)

__all__ = [
    "Ordering",
    "QuantumStructure",
    "JacobiComponents",
    "build_quantum_structure",
    "det3",
    "qbracket",
    "qjacobi_direct",
    "qjacobi_closed",
    "semiclassical_closed",
    "corollary_H_equals_E",
    "select_ordering",
    "OrderingReport",
    "probe_norm",
    "jacobi_deformation_scaling",
    "corollary_ratio",
]


class Ordering(str, Enum):
    STRUCT_LEFT = "STRUCT_LEFT"  # mu x y
    STRUCT_RIGHT = "STRUCT_RIGHT"  # x y mu


@dataclass(frozen=True, eq=False)
class QuantumStructure:
    """Structure operators ``entries[s, i, j]`` (each ``N x N``) of an operator-valued algebra."""

    spec: BianchiSpec
    p0: float
    omega: float
    hbar: float
    entries: np.ndarray
    q: np.ndarray
    p: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    ordering: Ordering = Ordering.STRUCT_LEFT

    @property
    def N(self) -> int:
        return self.q.shape[0]

    @property
    def a(self) -> float:
        return self.spec.a

    @classmethod
    def from_operators(cls, spec: BianchiSpec, p0: float, omega: float, hbar: float,
                       q, p, Q, P, ordering: Ordering = Ordering.STRUCT_LEFT) -> "QuantumStructure":
        """Substitute operators (or 1x1 arrays for scalars) into the closed-form evolved algebra."""
        q, p, Q, P = (np.atleast_2d(np.asarray(m, dtype=complex)) for m in (q, p, Q, P))
        eye = np.eye(q.shape[0], dtype=complex)
        b = _closed_form_basis(spec, OscParams(omega=omega, p0=p0))
        entries = sum(np.einsum("sij,mn->sijmn", b[k], op)
                      for k, op in (("1", eye), ("q", q), ("p", p), ("Q", Q), ("P", P)))
        entries.setflags(write=False)
        return cls(spec, p0, omega, hbar, entries, q, p, Q, P, Ordering(ordering))

    def with_ordering(self, ordering: Ordering) -> "QuantumStructure":
        return QuantumStructure(self.spec, self.p0, self.omega, self.hbar, self.entries,
                                self.q, self.p, self.Q, self.P, Ordering(ordering))


def build_quantum_structure(spec: BianchiSpec, space: FockSpace, p0: float,
                            ordering: Ordering = Ordering.STRUCT_LEFT) -> QuantumStructure:
    if not p0 > 0:
        raise ValueError(f"p0 must be positive, got {p0}")
    return QuantumStructure.from_operators(spec, p0, space.omega, space.hbar,
                                           space.q, space.p, space.Q, space.P, ordering)


@dataclass(frozen=True, eq=False)
class JacobiComponents:
    J1: np.ndarray
    J2: np.ndarray
    J3: np.ndarray
    det: float

    def __iter__(self):
        return iter((self.J1, self.J2, self.J3))

    def __sub__(self, other: "JacobiComponents") -> "JacobiComponents":
        return JacobiComponents(self.J1 - other.J1, self.J2 - other.J2, self.J3 - other.J3,
                                self.det - other.det)


def det3(x, y, z) -> float:
    (x1, x2, x3), (y1, y2, y3), (z1, z2, z3) = x, y, z
    return float(x1 * (y2 * z3 - y3 * z2) - x2 * (y1 * z3 - y3 * z1) + x3 * (y1 * z2 - y2 * z1))


def _is_scalar(c) -> bool:
    return np.ndim(c) == 0


def qbracket(x: Sequence, y: Sequence, S: QuantumStructure) -> list:
    """``[x, y]_hbar`` for elements whose three coefficients are scalars or ``N x N`` operators."""
    for c in (*x, *y):
        if not _is_scalar(c) and np.shape(c) != (S.N, S.N):
            raise ValueError(f"coefficient of shape {np.shape(c)} does not live on N={S.N}")
    out = []
    for i in range(3):
        acc = np.zeros((S.N, S.N), dtype=complex)
        for j in range(3):
            for k in range(3):
                mu = S.entries[i, j, k]
                xj, yk = x[j], y[k]
                if _is_scalar(xj) and _is_scalar(yk):
                    if xj * yk != 0:
                        acc += (xj * yk) * mu
                    continue
                if not mu.any():
                    continue
                if S.ordering is Ordering.STRUCT_LEFT:
                    acc += _mul(_mul(mu, xj), yk)
                else:
                    acc += _mul(_mul(xj, yk), mu)
        out.append(acc)
    return out


def _mul(A, B):
    if _is_scalar(A) or _is_scalar(B):
        return A * B
    return A @ B


def qjacobi_direct(x, y, z, S: QuantumStructure) -> JacobiComponents:
    J = [np.zeros((S.N, S.N), dtype=complex) for _ in range(3)]
    for u, v, w in ((x, y, z), (y, z, x), (z, x, y)):
        term = qbracket(u, qbracket(v, w, S), S)
        for i in range(3):
            J[i] += term[i]
    return JacobiComponents(*J, det3(x, y, z))


def _xi(S: QuantumStructure) -> tuple[np.ndarray, np.ndarray]:
    eye = np.eye(S.N)
    xi1 = S.omega * S.q @ S.Q + (S.p - S.p0 * eye) @ S.P
    xi2 = S.omega * S.q @ S.P - (S.p + S.p0 * eye) @ S.Q
    return xi1, xi2


def qjacobi_closed(x, y, z, S: QuantumStructure) -> JacobiComponents:
    d = det3(x, y, z)
    a, p0 = S.a, S.p0
    k = a * d / math.sqrt(2 * p0**3)
    xi1, xi2 = _xi(S)
    return JacobiComponents(-k * xi1, -k * xi2, (a**2 * d / p0) * commutator(S.P, S.Q), d)


def semiclassical_closed(x, y, z, S: QuantumStructure, E: float, H: np.ndarray | None = None) -> JacobiComponents:
    """Semiclassical approximations of the Jacobi components.

    ``H`` defaults to the spectral oscillator Hamiltonian of the structure's
    Fock space; passing ``E * identity`` gives the energy-conserving case.
    """
    if H is None:
        H = FockSpace(S.N, S.omega, S.hbar).H
    d = det3(x, y, z)
    a, p0, w = S.a, S.p0, S.omega
    ih = S.hbar / 1j
    sqrt2H = func_calc(H, lambda v: np.sqrt(2 * v), clip_tol=1e-12 * max(1.0, np.abs(H).max()))
    eps = func_calc(H, lambda v: w / (2 * np.sqrt(2 * v)))
    gap = math.sqrt(2 * E) * np.eye(S.N) - sqrt2H
    k = a * d / math.sqrt(2 * p0**3)
    J1 = k * (S.P @ gap - ih * (S.Q @ eps) / 2)
    J2 = k * (S.Q @ gap + ih * (S.P @ eps) / 2)
    J3 = ih * (a**2 * d / p0) * eps
    return JacobiComponents(J1, J2, J3, d)


def corollary_H_equals_E(x, y, z, S: QuantumStructure, E: float) -> JacobiComponents:
    d = det3(x, y, z)
    a, p0, w = S.a, S.p0, S.omega
    ih = S.hbar / 1j
    eps_E = w / (2 * math.sqrt(2 * E))
    k = a * d / math.sqrt((2 * p0) ** 3)
    return JacobiComponents(
        -ih * k * eps_E * S.Q,
        ih * k * eps_E * S.P,
        ih * (a**2 * d / p0) * eps_E * np.eye(S.N, dtype=complex),
        d,
    )


@dataclass(frozen=True)
class OrderingReport:
    selected: Ordering | None
    residuals: dict


def select_ordering(spec: BianchiSpec, N: int = 64, hbar: float = 0.1, E: float = 2.0, omega: float = 1.0,
                    n_triples: int = 20, seed: int = 0, tol: float = 1e-8) -> OrderingReport:
    """Pick the nested-bracket ordering that reproduces the closed-form Jacobi components.

    For each ordering the residual is the largest projected spectral norm
    (energies ``<= 2E``) of ``J_direct - J_closed`` over random triples.
    """
    space = FockSpace(N, omega, hbar)
    base = build_quantum_structure(spec, space, math.sqrt(2 * E))
    keep = energy_indices(space, 2 * E)
    rng = np.random.default_rng(seed)
    triples = [rng.uniform(-1, 1, size=(3, 3)) for _ in range(n_triples)]
    residuals = {}
    for ordering in Ordering:
        S = base.with_ordering(ordering)
        worst = 0.0
        for x, y, z in triples:
            diff = qjacobi_direct(x, y, z, S) - qjacobi_closed(x, y, z, S)
            worst = max(worst, *(projected_norm(D, keep) for D in diff))
        residuals[ordering.value] = worst
    passing = [o for o in Ordering if residuals[o.value] < tol]
    selected = min(passing, key=lambda o: residuals[o.value]) if passing else None
    log.info("ordering selection for %s a=%g: %s -> %s", spec.family.value, spec.a, residuals,
             selected.value if selected else None)
    return OrderingReport(selected, residuals)


def probe_norm(A: np.ndarray, state) -> float:
    """Spectral norm of ``A`` restricted to the probe state, ``||A |psi>||``."""
    v = state.vector if hasattr(state, "vector") else np.asarray(state)
    return float(np.linalg.norm(A @ v))


_E1, _E2, _E3 = np.eye(3)


def _setup(spec, E, hbar, omega, N_override, ordering):
    alpha = coherent_alpha_for_energy(E, hbar, omega)
    N = N_override or truncation_size(alpha, E, hbar, omega)
    space = FockSpace(N, omega, hbar)
    S = build_quantum_structure(spec, space, math.sqrt(2 * E), ordering)
    try:
        return space, S, coherent(space, alpha)
    except TruncationError as exc:
        raise TruncationError(f"hbar={hbar}: {exc}") from exc


def jacobi_deformation_scaling(spec: BianchiSpec, E: float, hbar_list: Sequence[float], omega: float = 1.0,
                               triple=(_E1, _E2, _E3), N_override: int | None = None,
                               ordering: Ordering = Ordering.STRUCT_LEFT,
                               norm: str = "probe") -> list[dict]:
    """Size of the quantum Jacobi operator and its distance to the semiclassical forms across ``hbar``.

    ``norm="probe"`` measures ``||J |alpha>||`` in the coherent state with
    ``<H> = E``; ``norm="shell"`` uses the spectral norm compressed to
    energies ``<= 2E``.
    """
    hbar_list = list(hbar_list)
    if len(hbar_list) < 3 or any(b >= a for a, b in zip(hbar_list, hbar_list[1:])):
        raise ValueError("hbar_list must be strictly decreasing with at least three points")
    x, y, z = triple
    rows = []
    for hbar in hbar_list:
        space, S, state = _setup(spec, E, hbar, omega, N_override, ordering)
        if norm == "probe":
            size = lambda A: probe_norm(A, state)  # noqa: E731
        elif norm == "shell":
            keep = energy_indices(space, 2 * E)
            size = lambda A: projected_norm(A, keep)  # noqa: E731
        else:
            raise ValueError(f"unknown norm {norm!r}")
        J = qjacobi_direct(x, y, z, S)
        semi = semiclassical_closed(x, y, z, S, E, H=space.H)
        row = dict(hbar=hbar, N=S.N, family=spec.family.value, a=spec.a)
        for i, (Ji, Si) in enumerate(zip(J, semi), start=1):
            row[f"J{i}_norm"] = size(Ji)
            row[f"J{i}_resid"] = size(Ji - Si)
        if rows:
            prev = rows[-1]
            row["slope3"] = math.log(prev["J3_norm"] / row["J3_norm"]) / math.log(prev["hbar"] / hbar)
        else:
            row["slope3"] = None
        rows.append(row)
    return rows


def corollary_ratio(spec: BianchiSpec, E: float, hbar: float, omega: float = 1.0,
                    triple=(_E1, _E2, _E3), N_override: int | None = None,
                    ordering: Ordering = Ordering.STRUCT_LEFT) -> dict:
    """Coherent-state expectations of the direct first Jacobi component against the two approximations."""
    space, S, state = _setup(spec, E, hbar, omega, N_override, ordering)
    x, y, z = triple
    direct = qjacobi_direct(x, y, z, S)
    cor = corollary_H_equals_E(x, y, z, S, E)
    semi = semiclassical_closed(x, y, z, S, E, H=space.H)
    v = state.vector

    def ev(A):
        return complex(v.conj() @ A @ v)

    return dict(hbar=hbar, N=S.N, direct=ev(direct.J1), corollary=ev(cor.J1), semiclassical=ev(semi.J1),
                ratio_corollary=ev(direct.J1) / ev(cor.J1), ratio_semiclassical=ev(direct.J1) / ev(semi.J1))
