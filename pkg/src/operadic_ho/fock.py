"""
Truncated Fock space of the quantum oscillator.

Operators are plain complex ``numpy`` arrays in the number basis
``|0>, ..., |N-1>``.  :class:`FockSpace` builds and caches the standard ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Literal

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import DomainError, PositivityError, TruncationError

__all__ = [
    "FockSpace",
    "CoherentState",
    "ladder",
    "canonical_ops",
    "quasi_ops",
    "func_calc",
    "jacobi_eigh",
    "coherent",
    "expectation",
    "commutator",
    "coherent_alpha_for_energy",
    "truncation_size",
    "energy_indices",
    "projected_norm",
    "dump_csv",
    "quasi_ccr_sweep",
]

Branch = Literal["signed", "positive"]


def jacobi_eigh(A: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigensolver for a Hermitian matrix.

    Returns ascending eigenvalues and the matching orthonormal eigenvectors
    (as columns).  Stops when the off-diagonal Frobenius norm falls below
    ``tol * ||A||_F``.
    """
    A = np.array(A, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A) or 1.0
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                tau = (A[q, q].real - A[p, p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # rotation = diag(1, conj(phase)) @ [[c, s], [-s, c]] on the (p, q) plane
                R = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = A[:, [p, q]] @ R
                A[:, p], A[:, q] = cols[:, 0], cols[:, 1]
                rows = R.conj().T @ A[[p, q], :]
                A[p, :], A[q, :] = rows[0], rows[1]
                A[p, q] = A[q, p] = 0.0
                vc = V[:, [p, q]] @ R
                V[:, p], V[:, q] = vc[:, 0], vc[:, 1]
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(A).real
    order = np.argsort(w)
    return w[order], V[:, order]


def func_calc(
    A: np.ndarray,
    f: Callable[[np.ndarray], np.ndarray],
    clip_tol: float | None = None,
    method: Literal["lapack", "jacobi"] = "lapack",
) -> np.ndarray:
    """``f(A)`` for Hermitian ``A`` through its eigendecomposition.

    With ``clip_tol`` set, ``f`` is taken to need a nonnegative argument:
    eigenvalues in ``[-clip_tol, 0)`` are clipped to zero and anything more
    negative raises :class:`PositivityError`.
    """
    A = np.asarray(A)
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.conj().T)) > 1e-12 * scale:
        raise ValueError("func_calc needs a Hermitian matrix")
    if method == "jacobi":
        w, U = jacobi_eigh(A)
    else:
        w, U = np.linalg.eigh(A)
    if np.max(np.abs((U * w) @ U.conj().T - A)) > 1e-10 * scale:
        raise RuntimeError("eigendecomposition failed to reconstruct the input")
    if clip_tol is not None:
        if w.min() < -clip_tol:
            raise PositivityError(
                f"eigenvalue {w.min():.3e} below -{clip_tol:.1e}; increase the truncation N"
            )
        w = np.where(w < 0, 0.0, w)
    return (U * f(w)) @ U.conj().T


@dataclass(frozen=True)
class FockSpace:
    """First ``N`` number states of an oscillator with frequency ``omega`` and Planck constant ``hbar``.

    ``branch`` selects how the quasi-canonical operator Q is realized:
    ``"signed"`` (default) carries the sign of q, ``"positive"`` is the bare
    positive square root of ``S - p``.
    """

    N: int
    omega: float = 1.0
    hbar: float = 0.1
    branch: Branch = "signed"

    def __post_init__(self):
        if self.N < 4:
            raise DomainError(f"truncation must be at least 4, got {self.N}")
        for name in ("omega", "hbar"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and positive, got {v}")
        if self.branch not in ("signed", "positive"):
            raise ValueError(f"unknown branch {self.branch!r}")

    @property
    def levels(self) -> np.ndarray:
        """Eigenvalues of H, ``hbar omega (n + 1/2)``."""
        return self.hbar * self.omega * (np.arange(self.N) + 0.5)

    @cached_property
    def identity(self) -> np.ndarray:
        return np.eye(self.N, dtype=complex)

    @cached_property
    def a(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.N)), 1).astype(complex)

    @cached_property
    def adag(self) -> np.ndarray:
        return self.a.conj().T

    @cached_property
    def q(self) -> np.ndarray:
        return math.sqrt(self.hbar / (2 * self.omega)) * (self.a + self.adag)

    @cached_property
    def p(self) -> np.ndarray:
        return 1j * math.sqrt(self.hbar * self.omega / 2) * (self.adag - self.a)

    @cached_property
    def H(self) -> np.ndarray:
        return np.diag(self.levels).astype(complex)

    @cached_property
    def S(self) -> np.ndarray:
        """``sqrt(2 H)``."""
        return np.diag(np.sqrt(2 * self.levels)).astype(complex)

    @cached_property
    def eps(self) -> np.ndarray:
        """``omega / (2 sqrt(2 H))``."""
        return np.diag(self.omega / (2 * np.sqrt(2 * self.levels))).astype(complex)

    def _clip_tol(self, A: np.ndarray) -> float:
        return 1e-8 * np.linalg.norm(A, 2)

    @cached_property
    def P(self) -> np.ndarray:
        A = self.S + self.p
        return func_calc(A, np.sqrt, self._clip_tol(A))

    @cached_property
    def R(self) -> np.ndarray:
        """Positive square root of ``S - p``."""
        A = self.S - self.p
        return func_calc(A, np.sqrt, self._clip_tol(A))

    @cached_property
    def sign_q(self) -> np.ndarray:
        return func_calc(self.q, np.sign)

    @cached_property
    def Q(self) -> np.ndarray:
        if self.branch == "positive":
            return self.R
        return 0.5 * (self.sign_q @ self.R + self.R @ self.sign_q)


def ladder(space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    return space.a, space.adag


def canonical_ops(space: FockSpace) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return space.q, space.p, space.H


def quasi_ops(space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    return space.Q, space.P


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


@dataclass(frozen=True, eq=False)
class CoherentState:
    alpha: complex
    vector: np.ndarray
    leakage: float


def coherent(space: FockSpace, alpha: complex, leakage_threshold: float = 1e-8) -> CoherentState:
    n = np.arange(space.N)
    r2 = abs(alpha) ** 2
    # Poisson weight of the discarded levels n >= N
    leakage = float(gammainc(space.N, r2)) if r2 > 0 else 0.0
    if leakage > leakage_threshold:
        raise TruncationError(
            f"coherent state |{alpha}> leaks {leakage:.2e} past N={space.N}; "
            f"use N >= {truncation_size(abs(alpha))}"
        )
    if alpha == 0:
        c = np.zeros(space.N, dtype=complex)
        c[0] = 1.0
    else:
        logmag = -0.5 * r2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
        c = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    c = c / np.linalg.norm(c)
    return CoherentState(complex(alpha), c, leakage)


def expectation(state: CoherentState | np.ndarray, A: np.ndarray) -> complex:
    v = state.vector if isinstance(state, CoherentState) else np.asarray(state)
    if A.shape != (v.size, v.size):
        raise ValueError("operator and state dimensions differ")
    return complex(v.conj() @ (A @ v))


def coherent_alpha_for_energy(E: float, hbar: float, omega: float = 1.0) -> float:
    """Real ``alpha`` with ``<H> = hbar omega (|alpha|^2 + 1/2) = E``."""
    r2 = E / (hbar * omega) - 0.5
    if r2 < 0:
        raise DomainError(f"energy {E} is below the ground state {0.5 * hbar * omega}")
    return math.sqrt(r2)


def truncation_size(alpha_abs: float, E: float | None = None, hbar: float | None = None,
                    omega: float = 1.0, factor: float = 5.0) -> int:
    """Even ``N`` covering a coherent state of modulus ``alpha_abs`` and, if
    given, ``factor * E / (hbar omega)`` levels."""
    N = math.ceil(alpha_abs**2 + 8 * alpha_abs + 20)
    if E is not None and hbar is not None:
        N = max(N, math.ceil(factor * E / (hbar * omega)))
    return N + (N % 2)


def energy_indices(space: FockSpace, cutoff: float) -> np.ndarray:
    """Number states with energy ``<= cutoff``."""
    return np.flatnonzero(space.levels <= cutoff)


def projected_norm(A: np.ndarray, keep: np.ndarray) -> float:
    """Spectral norm of ``A`` compressed to the span of the basis states in ``keep``."""
    return float(np.linalg.norm(A[np.ix_(keep, keep)], 2))


def dump_csv(A: np.ndarray, tol: float = 0.0) -> str:
    """``row,col,re,im`` per entry with modulus above ``tol``."""
    rows = ["row,col,re,im"]
    for i, j in zip(*np.nonzero(np.abs(A) > tol)):
        z = A[i, j]
        rows.append(f"{i},{j},{z.real:.17g},{z.imag:.17g}")
    return "\n".join(rows) + "\n"


def quasi_ccr_sweep(hbar_list, E: float = 2.0, omega: float = 1.0, N_override: int | None = None,
                    branch: Branch = "signed") -> list[dict]:
    """Semiclassical residuals of the quasi-canonical operators across ``hbar``.

    Per point: ``sym_resid``, the relative spectral norm of
    ``P Q + Q P - 2 omega q`` compressed to energies ``<= 2E``;
    ``comm_ratio``, ``<[P,Q]> / (hbar/i)`` in the coherent state with
    ``<H> = E``; and ``comm_resid``, its relative distance to
    ``omega / (2 sqrt(2E))``.
    """
    target = omega / (2 * math.sqrt(2 * E))
    rows = []
    for hbar in hbar_list:
        alpha = coherent_alpha_for_energy(E, hbar, omega)
        N = N_override or truncation_size(alpha, E, hbar, omega)
        space = FockSpace(N, omega, hbar, branch)
        keep = energy_indices(space, 2 * E)
        sym = space.P @ space.Q + space.Q @ space.P - 2 * omega * space.q
        sym_resid = projected_norm(sym, keep) / projected_norm(2 * omega * space.q, keep)
        try:
            state = coherent(space, alpha)
        except TruncationError as exc:
            raise TruncationError(f"hbar={hbar}: {exc}") from exc
        ratio = (expectation(state, commutator(space.P, space.Q)) / (hbar / 1j)).real
        rows.append(
            dict(hbar=hbar, N=N, sym_resid=sym_resid, comm_ratio=ratio,
                 comm_resid=abs(ratio - target) / target)
        )
    return rows
