"""
Matrix and operadic Lax pairs of the harmonic oscillator and the evolving
Bianchi algebras VII_a, III_{a=1}, VI_{a!=1}.

Structure constants are stored as ``mu[s, i, j]`` = coefficient of ``e_s`` in
``[e_i, e_j]`` (0-based), which is also the coefficient layout of a degree-2
:class:`~operadic_ho.operad.MultiOp`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError
from .operad import MultiOp, apply, gerstenhaber
from .oscillator import (
    OscParams,
    OscState,
    QuasiState,
    analytic_state,
    quasi_partials,
    quasi_state,
)

__all__ = [
    "Family",
    "BianchiSpec",
    "CParams",
    "StructureTable",
    "build_L",
    "build_M",
    "lax_residual_at",
    "matrix_lax_residual",
    "lax_spectrum",
    "solve_constants",
    "build_mu",
    "evolve_algebra",
    "operadic_lax_residual",
    "pde_lax_residual",
    "bracket_closed_form",
    "classical_jacobiator",
]


class Family(str, Enum):
    VII_a = "VII_a"
    III_1 = "III_1"
    VI_a = "VI_a"


# (alpha, n1, n2, n3) per family; "a" stands for the family parameter
_CLASSIFICATION = {
    Family.VII_a: ("a", 0, 1, 1),
    Family.III_1: (1, 0, 1, -1),
    Family.VI_a: ("a", 0, 1, -1),
}


@dataclass(frozen=True)
class BianchiSpec:
    family: Family
    a: float = 1.0

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if fam is Family.III_1:
            if self.a != 1:
                raise DomainError("III_1 has a fixed to 1")
        elif not (math.isfinite(self.a) and self.a > 0):
            raise DomainError(f"{fam.value} needs a > 0, got {self.a}")
        elif fam is Family.VI_a and self.a == 1:
            raise DomainError("VI_a excludes a = 1 (that case is III_1)")

    @property
    def classification(self) -> tuple[float, int, int, int]:
        alpha, n1, n2, n3 = _CLASSIFICATION[self.family]
        return (self.a if alpha == "a" else alpha), n1, n2, n3

    @property
    def alpha(self) -> float:
        return self.classification[0]

    @property
    def sigma(self) -> int:
        """Sign of the constant structure constant ``[e1, e2]^3``."""
        return self.classification[3]

    def initial_table(self) -> "StructureTable":
        """Structure constants from ``[e1,e2] = -alpha e2 + n3 e3``,
        ``[e2,e3] = n1 e1``, ``[e3,e1] = n2 e2 + alpha e3``."""
        alpha, n1, n2, n3 = self.classification
        mu = np.zeros((3, 3, 3))
        _set(mu, 0, 1, (0.0, -alpha, n3))
        _set(mu, 1, 2, (n1, 0.0, 0.0))
        _set(mu, 2, 0, (0.0, n2, alpha))
        return StructureTable(mu)


def _set(mu: np.ndarray, i: int, j: int, values) -> None:
    for s, v in enumerate(values):
        mu[s, i, j] = v
        mu[s, j, i] = -v


@dataclass(frozen=True, eq=False)
class StructureTable:
    mu: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        if mu.shape != (3, 3, 3):
            raise ValueError(f"expected shape (3, 3, 3), got {mu.shape}")
        if not np.array_equal(mu, -mu.transpose(0, 2, 1)):
            raise ValueError("structure constants must be antisymmetric in the lower indices")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    def __getitem__(self, idx):
        return self.mu[idx]

    def as_multiop(self) -> MultiOp:
        return MultiOp(self.mu)

    def dump_text(self) -> str:
        """Golden format: ``s i j value`` per nonzero entry, 1-based."""
        lines = [
            f"{s + 1} {i + 1} {j + 1} {format(float(self.mu[s, i, j]), '.17g')}"
            for s, i, j in zip(*np.nonzero(self.mu))
        ]
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class CParams:
    C: tuple[float, ...]

    def __post_init__(self):
        if len(self.C) != 9:
            raise ValueError("need exactly nine constants")
        # adding 0.0 turns -0.0 into 0.0 so dumps never print "-0"
        object.__setattr__(self, "C", tuple(float(c) + 0.0 for c in self.C))

    def __getitem__(self, nu: int) -> float:
        """1-based access matching the usual labelling C1..C9."""
        return self.C[nu - 1]

    @property
    def valid(self) -> bool:
        c = self.C
        return (c[1] ** 2 + c[2] ** 2 + c[4] ** 2 + c[5] ** 2 + c[6] ** 2 + c[7] ** 2) != 0


def build_L(q: float, p: float, params: OscParams) -> np.ndarray:
    wq = params.omega * q
    return np.array([[p, wq, 0.0], [wq, -p, 0.0], [0.0, 0.0, 1.0]])


def build_M(params: OscParams) -> np.ndarray:
    return 0.5 * params.omega * np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


def lax_residual_at(q: float, p: float, params: OscParams, M: np.ndarray | None = None) -> float:
    """``max |dL/dt - (ML - LM)|`` with ``dL/dt`` from the equations of motion."""
    w = params.omega
    M = build_M(params) if M is None else M
    L = build_L(q, p, params)
    qdot, pdot = p, -(w**2) * q
    dL = np.array([[pdot, w * qdot, 0.0], [w * qdot, -pdot, 0.0], [0.0, 0.0, 0.0]])
    return float(np.max(np.abs(dL - (M @ L - L @ M))))


def matrix_lax_residual(t: float, params: OscParams, M: np.ndarray | None = None) -> float:
    s = analytic_state(t, params)
    return lax_residual_at(s.q, s.p, params, M)


def lax_spectrum(q: float, p: float, params: OscParams) -> np.ndarray:
    return np.linalg.eigvalsh(build_L(q, p, params))


def solve_constants(mu0: StructureTable, p0: float) -> CParams:
    """Recover C1..C9 from the structure constants at ``t = 0`` (``q = Q = 0``, ``P = sqrt(2 p0)``)."""
    if not p0 > 0:
        raise DomainError(f"p0 must be positive, got {p0}")
    m = mu0.mu
    r = math.sqrt(2.0 * p0)
    # mu[s, 0, 2] is the (1,3) entry, i.e. minus the tabulated (3,1) entry
    C = (
        0.5 * (m[1, 1, 2] - m[0, 2, 0]),
        (m[1, 0, 2] + m[0, 1, 2]) / (2.0 * p0),
        (m[1, 1, 2] + m[0, 2, 0]) / (2.0 * p0),
        0.5 * (m[1, 0, 2] - m[0, 1, 2]),
        m[0, 0, 1] / r,
        -m[1, 0, 1] / r,
        m[2, 0, 2] / r,
        -m[2, 1, 2] / r,
        m[2, 0, 1],
    )
    return CParams(C)


def build_mu(C: CParams, s: OscState, qs: QuasiState, params: OscParams) -> StructureTable:
    wq = params.omega * s.q
    p, Q, P = s.p, qs.Q, qs.P
    mu = np.zeros((3, 3, 3))
    _set(mu, 1, 2, (C[2] * p - C[3] * wq - C[4], C[2] * wq + C[3] * p + C[1], C[7] * Q - C[8] * P))
    _set(mu, 0, 2, (-(C[2] * wq + C[3] * p - C[1]), C[2] * p - C[3] * wq + C[4], C[7] * P + C[8] * Q))
    _set(mu, 0, 1, (C[5] * P + C[6] * Q, C[5] * Q - C[6] * P, C[9]))
    return StructureTable(mu)


def _closed_form_basis(spec: BianchiSpec, params: OscParams) -> dict[str, np.ndarray]:
    """Closed-form evolved algebra as ``K0 + q Kq + p Kp + Q KQ + P KP``."""
    a, p0, w = spec.a, params.p0, params.omega
    c = a / math.sqrt(2.0 * p0)
    d = 1.0 / (2.0 * p0)
    basis = {k: np.zeros((3, 3, 3)) for k in ("1", "q", "p", "Q", "P")}
    _set(basis["1"], 0, 1, (0.0, 0.0, spec.sigma))
    _set(basis["Q"], 0, 1, (c, 0.0, 0.0))
    _set(basis["P"], 0, 1, (0.0, -c, 0.0))
    # [e2,e3] = ((p - p0)/(-2p0), omega q/(-2p0), -c Q)
    _set(basis["p"], 1, 2, (-d, 0.0, 0.0))
    _set(basis["1"], 1, 2, (0.5, 0.0, 0.0))
    _set(basis["q"], 1, 2, (0.0, -w * d, 0.0))
    _set(basis["Q"], 1, 2, (0.0, 0.0, -c))
    # [e3,e1] = (omega q/(-2p0), (p + p0)/(2p0), c P)
    _set(basis["q"], 2, 0, (-w * d, 0.0, 0.0))
    _set(basis["p"], 2, 0, (0.0, d, 0.0))
    _set(basis["1"], 2, 0, (0.0, 0.5, 0.0))
    _set(basis["P"], 2, 0, (0.0, 0.0, c))
    return basis


def _closed_form(spec, params, q, p, Q, P) -> np.ndarray:
    b = _closed_form_basis(spec, params)
    return b["1"] + q * b["q"] + p * b["p"] + Q * b["Q"] + P * b["P"]


def evolve_algebra(spec: BianchiSpec, t: float, params: OscParams) -> StructureTable:
    """Structure constants of the evolved algebra at time ``t``, in closed form."""
    s = analytic_state(t, params)
    qs = quasi_state(t, params)
    return StructureTable(_closed_form(spec, params, s.q, s.p, qs.Q, qs.P))


def bracket_closed_form(M: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """``[M, mu]^i_jk = M^i_s mu^s_jk - mu^i_sk M^s_j - mu^i_js M^s_k`` (test oracle)."""
    return (
        np.einsum("is,sjk->ijk", M, mu)
        - np.einsum("isk,sj->ijk", mu, M)
        - np.einsum("ijs,sk->ijk", mu, M)
    )


def _lax_rhs(mu: np.ndarray, M: np.ndarray) -> np.ndarray:
    return gerstenhaber(MultiOp(M), MultiOp(mu)).coeffs


def operadic_lax_residual(
    spec: BianchiSpec,
    t: float,
    dt: float | None = None,
    params: OscParams | None = None,
    M: np.ndarray | None = None,
) -> float:
    """Max-norm of central-difference ``dmu/dt`` minus the Gerstenhaber bracket ``[M, mu]``."""
    params = OscParams() if params is None else params
    dt = 1e-5 * params.period if dt is None else dt
    if not dt > 0:
        raise ValueError("dt must be positive")
    M = build_M(params) if M is None else M
    dmu = (evolve_algebra(spec, t + dt, params).mu - evolve_algebra(spec, t - dt, params).mu) / (2 * dt)
    rhs = _lax_rhs(evolve_algebra(spec, t, params).mu, M)
    return float(np.max(np.abs(dmu - rhs)))


def pde_lax_residual(spec: BianchiSpec, q: float, p: float, params: OscParams,
                     M: np.ndarray | None = None) -> float:
    """Residual of ``p dmu/dq - omega^2 q dmu/dp = [M, mu]`` with exact partials."""
    b = _closed_form_basis(spec, params)
    qs, d_dq, d_dp = quasi_partials(q, p, params)
    mu = b["1"] + q * b["q"] + p * b["p"] + qs.Q * b["Q"] + qs.P * b["P"]
    mu_q = b["q"] + d_dq.Q * b["Q"] + d_dq.P * b["P"]
    mu_p = b["p"] + d_dp.Q * b["Q"] + d_dp.P * b["P"]
    lhs = p * mu_q - params.omega**2 * q * mu_p
    M = build_M(params) if M is None else M
    return float(np.max(np.abs(lhs - _lax_rhs(mu, M))))


def classical_jacobiator(mu: StructureTable | np.ndarray, x, y, z) -> np.ndarray:
    """``[x,[y,z]] + [y,[z,x]] + [z,[x,y]]`` for scalar structure constants."""
    f = mu.as_multiop() if isinstance(mu, StructureTable) else MultiOp(np.asarray(mu, dtype=float))
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))

    def br(u, v):
        return apply(f, [u, v])

    return br(x, br(y, z)) + br(y, br(z, x)) + br(z, br(x, y))
