"""Finite-window free-fermion calculus with the extra Majorana-type mode.

Modes psi_i create level i, psi^+_i empties it; the vacuum has every
negative level filled.  A window [lo, hi) truncates the sea: levels below
lo are frozen occupied, levels >= hi frozen empty.  Any expectation value
whose mode indices stay inside the window is exact.

The extra mode phi squares to 1/2 and anticommutes with every psi; since
phi|0> = |0>/sqrt(2) and the psi's generate the whole module from the
vacuum, its action is forced to be diagonal on occupation states:
phi |S> = (-1)^{p(S)} / sqrt(2) |S>, with p(S) the number of creations
and annihilations separating S from the sea.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .skewlin import SkewPair

PRUNE_TOL = 1e-15
_SQRT2 = math.sqrt(2.0)


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class FockWindow:
    lo: int
    hi: int

    def __post_init__(self):
        if not (self.lo < 0 <= self.hi):
            raise WindowError(f"window [{self.lo}, {self.hi}) must straddle zero")

    def check_mode(self, i: int) -> None:
        if not (self.lo <= i < self.hi):
            raise WindowError(f"mode {i} outside window [{self.lo}, {self.hi})")

    def check_charge(self, charge: int) -> None:
        if not (self.lo <= min(0, charge) and max(0, charge) <= self.hi):
            raise WindowError(f"charge {charge} does not fit window [{self.lo}, {self.hi})")

    def sea(self) -> frozenset:
        return frozenset(range(self.lo, 0))


class FockVector:
    """Sparse vector over occupation basis states (frozensets of filled modes)."""

    __slots__ = ("window", "amp")

    def __init__(self, window: FockWindow, amp: dict | None = None):
        self.window = window
        self.amp = amp or {}

    def prune(self) -> "FockVector":
        if self.amp:
            top = max(abs(v) for v in self.amp.values())
            cut = PRUNE_TOL * max(top, 1.0)
            self.amp = {k: v for k, v in self.amp.items() if abs(v) > cut}
        return self

    def scaled(self, c: complex) -> "FockVector":
        return FockVector(self.window, {k: c * v for k, v in self.amp.items()})

    def add_into(self, other: "FockVector") -> "FockVector":
        for k, v in other.amp.items():
            self.amp[k] = self.amp.get(k, 0.0) + v
        return self

    def coefficient(self, state: frozenset) -> complex:
        return complex(self.amp.get(state, 0.0))

    def norm2(self) -> float:
        return sum(abs(v) ** 2 for v in self.amp.values())

    def is_zero(self) -> bool:
        return not self.amp or all(v == 0 for v in self.amp.values())


def charged_vacuum(charge: int, window: FockWindow) -> FockVector:
    """|L>: the sea with L extra levels filled (L >= 0) or emptied (L < 0)."""
    window.check_charge(charge)
    occ = set(window.sea())
    if charge >= 0:
        occ |= set(range(0, charge))
    else:
        occ -= set(range(charge, 0))
    return FockVector(window, {frozenset(occ): 1.0 + 0.0j})


def _sign_above(state: frozenset, i: int) -> float:
    return -1.0 if sum(1 for j in state if j > i) % 2 else 1.0


def _phi_parity(state: frozenset, window: FockWindow) -> int:
    return len(state.symmetric_difference(window.sea())) % 2


def apply_psi(i: int, vec: FockVector) -> FockVector:
    vec.window.check_mode(i)
    out: dict = {}
    for state, c in vec.amp.items():
        if i in state:
            continue
        ns = state | {i}
        out[ns] = out.get(ns, 0.0) + c * _sign_above(state, i)
    return FockVector(vec.window, out)


def apply_psi_dag(i: int, vec: FockVector) -> FockVector:
    vec.window.check_mode(i)
    out: dict = {}
    for state, c in vec.amp.items():
        if i not in state:
            continue
        ns = state - {i}
        out[ns] = out.get(ns, 0.0) + c * _sign_above(ns, i)
    return FockVector(vec.window, out)


def apply_phi(vec: FockVector) -> FockVector:
    out: dict = {}
    for state, c in vec.amp.items():
        sign = -1.0 if _phi_parity(state, vec.window) else 1.0
        out[state] = c * sign / _SQRT2
    return FockVector(vec.window, out)


def apply_field(z: complex, vec: FockVector, dagger: bool = False) -> FockVector:
    """psi(z) = sum_i z^i psi_i, or psi^+(z) = sum_i z^{-i-1} psi^+_i."""
    w = vec.window
    total = FockVector(w)
    for i in range(w.lo, w.hi):
        coeff = (z ** (-i - 1)) if dagger else (z ** i)
        piece = apply_psi_dag(i, vec) if dagger else apply_psi(i, vec)
        total.add_into(piece.scaled(coeff))
    return total.prune()


def apply_linear(coeffs_psi: dict, coeffs_dag: dict, vec: FockVector) -> FockVector:
    """sum_i v_i psi_i + sum_i u_i psi^+_i applied once."""
    total = FockVector(vec.window)
    for i, v in coeffs_psi.items():
        if v != 0:
            total.add_into(apply_psi(i, vec).scaled(v))
    for i, u in coeffs_dag.items():
        if u != 0:
            total.add_into(apply_psi_dag(i, vec).scaled(u))
    return total.prune()


def apply_pair_sum(pair: SkewPair, vec: FockVector) -> FockVector:
    """Phi = (1/2) sum A_ij psi_i psi_j + phi sum a_i psi_i, one application."""
    w = vec.window
    total = FockVector(w)
    size = pair.size
    base = pair.index_base
    for jj in range(size):
        j = base + jj
        if not (w.lo <= j < w.hi):
            continue
        col = pair.a_matrix[:, jj]
        if np.any(col != 0):
            pv = apply_psi(j, vec)
            if not pv.is_zero():
                for ii in range(size):
                    cij = pair.a_matrix[ii, jj]
                    if cij == 0:
                        continue
                    i = base + ii
                    if not (w.lo <= i < w.hi):
                        continue
                    total.add_into(apply_psi(i, pv).scaled(0.5 * cij))
    border = FockVector(w)
    for jj in range(size):
        aj = pair.border[jj]
        if aj == 0:
            continue
        j = base + jj
        if not (w.lo <= j < w.hi):
            continue
        border.add_into(apply_psi(j, vec).scaled(aj))
    if border.amp:
        total.add_into(apply_phi(border))
    return total.prune()


def apply_word(word: Iterable, vec: FockVector) -> FockVector:
    """Apply a product of operators, rightmost factor first.

    Word entries: ("psi", i), ("psi_dag", i), ("phi",), ("psi_z", z),
    ("psi_dag_z", z), ("linear", vdict, udict), ("pair", SkewPair).
    """
    ops = list(word)
    for op in reversed(ops):
        tag = op[0]
        if tag == "psi":
            vec = apply_psi(op[1], vec)
        elif tag == "psi_dag":
            vec = apply_psi_dag(op[1], vec)
        elif tag == "phi":
            vec = apply_phi(vec)
        elif tag == "psi_z":
            vec = apply_field(op[1], vec, dagger=False)
        elif tag == "psi_dag_z":
            vec = apply_field(op[1], vec, dagger=True)
        elif tag == "linear":
            vec = apply_linear(op[1], op[2], vec)
        elif tag == "pair":
            vec = apply_pair_sum(op[1], vec)
        else:
            raise ValueError(f"unknown operator tag {tag!r}")
        if vec.is_zero():
            break
    return vec


def vev(bra_charge: int, word: Iterable, ket_charge: int, window: FockWindow) -> complex:
    """<bra_charge| word |ket_charge>; exact zero on charge imbalance."""
    ket = charged_vacuum(ket_charge, window)
    bra = charged_vacuum(bra_charge, window)
    result = apply_word(word, ket)
    (bra_state, _), = bra.amp.items()
    return result.coefficient(bra_state)


def exp_pair_vev(bra_charge: int, pair: SkewPair, ket_charge: int,
                 window: FockWindow) -> complex:
    """<bra| exp(Phi) |ket> with quadratic-plus-border Phi, by Taylor expansion.

    The expansion terminates: each application raises charge, and the
    window bounds the reachable charge.
    """
    ket = charged_vacuum(ket_charge, window)
    bra = charged_vacuum(bra_charge, window)
    (bra_state, _), = bra.amp.items()
    total = ket.coefficient(bra_state)
    term = ket
    k = 0
    while not term.is_zero() and k < 2 * (window.hi - window.lo) + 2:
        k += 1
        term = apply_pair_sum(pair, term).scaled(1.0 / k)
        total += term.coefficient(bra_state)
    return complex(total)
