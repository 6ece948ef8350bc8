"""Classical harmonic oscillator and its quasi-canonical (half-angle) coordinates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "OscParams",
    "OscState",
    "QuasiState",
    "hamiltonian",
    "analytic_state",
    "integrate",
    "quasi_state",
    "quasi_from_phase_point",
    "quasi_partials",
    "poisson_bracket_fd",
    "bracket_PQ",
]


@dataclass(frozen=True)
class OscParams:
    """Frequency ``omega`` and initial momentum ``p0`` (``q(0) = 0``); ``E = p0**2 / 2``."""

    omega: float = 1.0
    p0: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise DomainError(f"omega must be positive, got {self.omega}")
        if not (math.isfinite(self.p0) and self.p0 > 0):
            raise DomainError(f"p0 must be positive, got {self.p0}")

    @classmethod
    def from_energy(cls, E: float, omega: float = 1.0) -> "OscParams":
        if not E > 0:
            raise DomainError(f"energy must be positive, got {E}")
        return cls(omega=omega, p0=math.sqrt(2.0 * E))

    @property
    def E(self) -> float:
        return 0.5 * self.p0**2

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


@dataclass(frozen=True)
class OscState:
    t: float
    q: float
    p: float


@dataclass(frozen=True)
class QuasiState:
    Q: float
    P: float


def hamiltonian(s: OscState, params: OscParams) -> float:
    return 0.5 * (s.p**2 + params.omega**2 * s.q**2)


def analytic_state(t: float, params: OscParams) -> OscState:
    w = params.omega
    return OscState(t, params.p0 / w * math.sin(w * t), params.p0 * math.cos(w * t))


def _rhs(q: float, p: float, w2: float) -> tuple[float, float]:
    return p, -w2 * q


def integrate(s0: OscState, dt: float, steps: int, params: OscParams) -> list[OscState]:
    """Classical RK4; returns ``steps + 1`` states starting with ``s0``."""
    if not dt > 0 or steps < 1:
        raise ValueError("need dt > 0 and steps >= 1")
    w2 = params.omega**2
    q, p, t = s0.q, s0.p, s0.t
    out = [s0]
    for _ in range(steps):
        k1q, k1p = _rhs(q, p, w2)
        k2q, k2p = _rhs(q + 0.5 * dt * k1q, p + 0.5 * dt * k1p, w2)
        k3q, k3p = _rhs(q + 0.5 * dt * k2q, p + 0.5 * dt * k2p, w2)
        k4q, k4p = _rhs(q + dt * k3q, p + dt * k3p, w2)
        q += dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
        p += dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        t += dt
        out.append(OscState(t, q, p))
    return out


def quasi_state(t: float, params: OscParams) -> QuasiState:
    """(Q, P) along the trajectory through ``(0, p0)``: a rotation at half the frequency."""
    r = math.sqrt(2.0 * params.p0)
    half = 0.5 * params.omega * t
    return QuasiState(r * math.sin(half), r * math.cos(half))


def quasi_from_phase_point(q: float, p: float, params: OscParams) -> QuasiState:
    """Solve ``P^2 - Q^2 = 2p``, ``QP = omega q`` on the branch with ``P >= 0``.

    The half-angle map ``theta = atan2(omega q, p)`` is used, so ``Q`` jumps
    sign across the ray ``q = 0, p < 0``.
    """
    wq = params.omega * q
    S = math.hypot(p, wq)
    if S == 0.0:
        raise DomainError("quasi-canonical coordinates are undefined at the origin")
    theta = math.atan2(wq, p)
    r = math.sqrt(2.0 * S)
    return QuasiState(r * math.sin(0.5 * theta), r * math.cos(0.5 * theta))


def quasi_partials(q: float, p: float, params: OscParams) -> tuple[QuasiState, QuasiState, QuasiState]:
    """(Q, P) at a phase point together with their q- and p-derivatives.

    Implicit differentiation of the defining constraints gives
    ``d(Q, P)/dq = omega (P, Q) / (2S)`` and ``d(Q, P)/dp = (-Q, P) / (2S)``
    with ``S = sqrt(p^2 + omega^2 q^2)``.
    """
    qs = quasi_from_phase_point(q, p, params)
    w = params.omega
    two_s = 2.0 * math.hypot(p, w * q)
    d_dq = QuasiState(w * qs.P / two_s, w * qs.Q / two_s)
    d_dp = QuasiState(-qs.Q / two_s, qs.P / two_s)
    return qs, d_dq, d_dp


def poisson_bracket_fd(
    f: Callable[[float, float], float],
    g: Callable[[float, float], float],
    at: OscState,
    h: float = 1e-5,
) -> float:
    """Central-difference ``{f, g} = f_p g_q - f_q g_p``.

    With this orientation ``{p, q} = 1`` and ``{P, Q} = omega / (2 sqrt(2H))``.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    q, p = at.q, at.p

    def d(fun):
        fq = (fun(q + h, p) - fun(q - h, p)) / (2 * h)
        fp = (fun(q, p + h) - fun(q, p - h)) / (2 * h)
        return fq, fp

    fq, fp = d(f)
    gq, gp = d(g)
    return fp * gq - fq * gp


def bracket_PQ(s: OscState, params: OscParams) -> float:
    """Exact value of ``{P, Q}`` at a phase point."""
    H = hamiltonian(s, params)
    if not H > 0:
        raise DomainError("bracket undefined at the origin")
    return params.omega / (2.0 * math.sqrt(2.0 * H))
