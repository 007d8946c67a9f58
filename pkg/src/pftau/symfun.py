"""Symmetric-function layer: h_n, Schur functions, Miwa shifts, V, c(t,s).

Coupling sequences are the deformation parameters of the ensembles and
double as the "times" of the series machinery.  Entries may be complex
(Miwa shifts at complex points need this); c_factor is real-input only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .partitions import Partition


@dataclass(frozen=True)
class CouplingSeq:
    """Finite coupling sequence (t_1, ..., t_K); entries beyond K are zero."""

    values: tuple = ()

    def __post_init__(self) -> None:
        def norm(v):
            if isinstance(v, complex):
                return float(v.real) if v.imag == 0.0 else complex(v)
            return float(v)
        object.__setattr__(self, "values", tuple(norm(v) for v in self.values))

    @classmethod
    def of(cls, *values) -> "CouplingSeq":
        return cls(tuple(values))

    @classmethod
    def zero(cls) -> "CouplingSeq":
        return cls(())

    @property
    def order(self) -> int:
        return len(self.values)

    def entry(self, n: int):
        """1-based coefficient t_n (zero beyond the stored order)."""
        return self.values[n - 1] if 1 <= n <= len(self.values) else 0.0

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self.values)

    def is_real(self) -> bool:
        return all(not isinstance(v, complex) or v.imag == 0.0 for v in self.values)

    def top_index(self) -> int:
        """Largest n with t_n != 0, or 0 for the zero sequence."""
        for n in range(len(self.values), 0, -1):
            if self.values[n - 1] != 0:
                return n
        return 0

    def add(self, other: "CouplingSeq") -> "CouplingSeq":
        k = max(self.order, other.order)
        return CouplingSeq(tuple(self.entry(n) + other.entry(n) for n in range(1, k + 1)))

    def __str__(self) -> str:
        return "(" + ", ".join(repr(v) for v in self.values) + ")"


ZERO_SEQ = CouplingSeq.zero()


def potential(x, t: CouplingSeq):
    """V(x,t) = sum_n t_n x^n, a finite sum over the stored order."""
    acc = 0.0
    xp = 1.0
    for v in t.values:
        xp = xp * x
        acc = acc + v * xp
    return acc


def hseq(nmax: int, t: CouplingSeq) -> np.ndarray:
    """h_0..h_nmax from the recurrence n h_n = sum_k k t_k h_{n-k}."""
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    cplx = any(isinstance(v, complex) for v in t.values)
    h = np.zeros(nmax + 1, dtype=complex if cplx else float)
    h[0] = 1.0
    for n in range(1, nmax + 1):
        acc = 0.0
        for k in range(1, min(n, t.order) + 1):
            acc = acc + k * t.values[k - 1] * h[n - k]
        h[n] = acc / n
    return h


def complete_homogeneous(n: int, t: CouplingSeq):
    """h_n(t); generating identity exp(V(z,t)) = sum z^n h_n(t)."""
    if n < 0:
        raise ValueError("complete_homogeneous needs n >= 0 (h_{n<0}=0 is the caller's job)")
    return hseq(n, t)[n]


def schur_from_h(lam: Partition, h: np.ndarray):
    """Jacobi-Trudi determinant det(h_{lam_i - i + j}) given a long-enough h table."""
    ell = lam.length
    if ell == 0:
        return 1.0
    mat = np.zeros((ell, ell), dtype=h.dtype)
    for i in range(1, ell + 1):
        for j in range(1, ell + 1):
            m = lam.part(i) - i + j
            if 0 <= m < len(h):
                mat[i - 1, j - 1] = h[m]
            elif m >= len(h):
                raise ValueError(f"h table too short: need index {m}")
    if ell == 1:
        return mat[0, 0]
    if ell == 2:
        return mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    return np.linalg.det(mat)


def schur(lam: Partition, t: CouplingSeq):
    """Schur function s_lambda(t) via Jacobi-Trudi; s_empty = 1."""
    if lam.length == 0:
        return 1.0
    return schur_from_h(lam, hseq(lam.parts[0] + lam.length, t))


def miwa_shift(t: CouplingSeq, atoms: Sequence[tuple], scale: float = 1.0,
               order: int | None = None) -> CouplingSeq:
    """t_n -> t_n - scale * (1/n) * sum_i a_i p_i^n for n = 1..order.

    atoms is a list of (weight a_i, point p_i); the bracket shift t +- [a]
    used by the bilinear-identity checks is atoms=[(-+1, a)], scale=1.
    """
    k = t.order if order is None else order
    vals = []
    for n in range(1, k + 1):
        shift = 0.0
        for a, p in atoms:
            shift = shift + a * p ** n
        vals.append(t.entry(n) - scale * shift / n)
    return CouplingSeq(tuple(vals))


def c_factor(t: CouplingSeq, s: CouplingSeq) -> float:
    """exp(sum_n n t_n s_n); couples the two deformation directions."""
    if not (t.is_real() and s.is_real()):
        raise ValueError("c_factor is defined for real coupling sequences")
    k = min(t.order, s.order)
    return math.exp(sum(n * t.entry(n).real * s.entry(n).real for n in range(1, k + 1)))
