"""
Endomorphism operad of a finite-dimensional real vector space.

An operation of degree ``n`` is a multilinear map ``V^{⊗n} -> V`` stored as a
dense array ``c`` of shape ``(d,) * (n + 1)`` with ``c[i, j1, ..., jn]`` the
coefficient of ``e_i`` in ``f(e_j1, ..., e_jn)``.  Integer arrays are kept as
integers so that sign bookkeeping can be checked with exact arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "MultiOp",
    "partial_compose",
    "total_compose",
    "gerstenhaber",
    "apply",
    "dump_text",
]


@dataclass(frozen=True, eq=False)
class MultiOp:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim < 2:
            raise ValueError("an operation needs an output index and at least one argument")
        d = c.shape[0]
        if any(s != d for s in c.shape):
            raise ValueError(f"coefficient array must be hypercubic, got shape {c.shape}")
        if np.iscomplexobj(c):
            raise ValueError("coefficients must be real")
        if not np.issubdtype(c.dtype, np.integer):
            c = c.astype(float)
            if not np.all(np.isfinite(c)):
                raise ValueError("coefficients must be finite")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.ndim - 1

    @property
    def reduced_degree(self) -> int:
        return self.degree - 1

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "MultiOp":
        return cls(np.eye(dim, dtype=int))

    @classmethod
    def zeros(cls, dim: int, degree: int) -> "MultiOp":
        return cls(np.zeros((dim,) * (degree + 1), dtype=int))

    def __add__(self, other: "MultiOp") -> "MultiOp":
        _check_same(self, other)
        return MultiOp(self.coeffs + other.coeffs)

    def __sub__(self, other: "MultiOp") -> "MultiOp":
        _check_same(self, other)
        return MultiOp(self.coeffs - other.coeffs)

    def __neg__(self) -> "MultiOp":
        return MultiOp(-self.coeffs)

    def __rmul__(self, scalar) -> "MultiOp":
        return MultiOp(scalar * self.coeffs)

    def __repr__(self) -> str:
        return f"MultiOp(degree={self.degree}, dim={self.dim}, dtype={self.coeffs.dtype})"


def _check_same(f: MultiOp, g: MultiOp) -> None:
    if f.dim != g.dim or f.degree != g.degree:
        raise ValueError(
            f"operations differ in shape: (dim {f.dim}, degree {f.degree}) vs "
            f"(dim {g.dim}, degree {g.degree})"
        )


def _check_dims(f: MultiOp, g: MultiOp) -> None:
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} != {g.dim}")


def partial_compose(f: MultiOp, g: MultiOp, i: int) -> MultiOp:
    """Insert ``g`` into argument slot ``i`` (0-based) of ``f``, with sign ``(-1)^(i|g|)``.

    The result has degree ``deg f + deg g - 1``; its arguments are those of
    ``f`` before slot ``i``, then those of ``g``, then the rest of ``f``.
    """
    _check_dims(f, g)
    if not 0 <= i <= f.reduced_degree:
        raise ValueError(f"slot {i} out of range for an operation of degree {f.degree}")
    # tensordot leaves axes (out, f-args without slot i, g-args); move g-args into slot i
    c = np.tensordot(f.coeffs, g.coeffs, axes=([1 + i], [0]))
    n_g = g.degree
    tail = list(range(c.ndim - n_g, c.ndim))
    c = np.moveaxis(c, tail, list(range(1 + i, 1 + i + n_g)))
    if (i * g.reduced_degree) % 2:
        c = -c
    return MultiOp(c)


def total_compose(f: MultiOp, g: MultiOp) -> MultiOp:
    _check_dims(f, g)
    out = partial_compose(f, g, 0)
    for i in range(1, f.degree):
        out = out + partial_compose(f, g, i)
    return out


def gerstenhaber(f: MultiOp, g: MultiOp) -> MultiOp:
    """Graded commutator ``f∘g - (-1)^(|f||g|) g∘f`` of total compositions."""
    _check_dims(f, g)
    fg = total_compose(f, g)
    gf = total_compose(g, f)
    if (f.reduced_degree * g.reduced_degree) % 2:
        return fg + gf
    return fg - gf


def apply(f: MultiOp, args: Sequence) -> np.ndarray:
    """Evaluate ``f`` on concrete vectors."""
    if len(args) != f.degree:
        raise ValueError(f"operation of degree {f.degree} got {len(args)} arguments")
    out = f.coeffs
    for v in args:
        v = np.asarray(v)
        if v.shape != (f.dim,):
            raise ValueError(f"argument of shape {v.shape}, expected ({f.dim},)")
        # contract the first remaining argument axis
        out = np.tensordot(out, v, axes=([1], [0]))
    return out


def dump_text(f: MultiOp) -> str:
    """One line ``i j1 ... jn value`` per nonzero coefficient, 1-based, sorted."""
    lines = []
    for idx in zip(*np.nonzero(f.coeffs)):
        value = f.coeffs[idx]
        val = str(int(value)) if np.issubdtype(f.coeffs.dtype, np.integer) else format(float(value), ".17g")
        lines.append(" ".join(str(k + 1) for k in idx) + " " + val)
    return "\n".join(lines) + ("\n" if lines else "")
