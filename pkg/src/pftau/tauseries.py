"""Truncated Schur-series tau functions, group-integral series, bilinear
difference residuals, and wave-function polynomiality checks.

A series value is sum_lambda Abar_{h(lambda)}(L) s_lambda(t) over partitions
of weight <= cutoff and length <= charge.  With the moment conventions of
`moments`, this equals the plain eigenvalue integral times the fixed
constant sqrt(2)^(charge mod 2) (the border normalization); all
deformation-ratio comparisons are insensitive to it.

The residual check covers the four-term difference form of the bilinear
identity only; the contour-integral form needs residue extraction in an
auxiliary variable and is out of scope here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .moments import EnsembleSpec, moment_pair, sympl_border_moments
from .partitions import Partition, conjugate, enumerate_partitions, is_even_partition, shifted_indices
from .skewlin import SkewPair, abar
from .symfun import CouplingSeq, ZERO_SEQ, hseq, miwa_shift, potential, schur_from_h


@dataclass
class TauApprox:
    """Truncated tau series: per-partition Pfaffian coefficients."""

    kind: str
    charge: int
    L: int
    cutoff: int
    terms: dict
    provenance: str = ""

    def ordered_terms(self) -> list:
        lams = sorted(self.terms, key=lambda lam: (lam.weight, tuple(-p for p in lam.parts)))
        return [(lam, self.terms[lam]) for lam in lams]

    def evaluate(self, t: CouplingSeq) -> complex:
        """Compensated sum of coefficient * s_lambda(t) in canonical order."""
        h = hseq(self.cutoff + self.charge + 1, t if t is not None else ZERO_SEQ)
        re, im = [], []
        for lam, coeff in self.ordered_terms():
            if lam.weight > self.cutoff:
                continue
            val = coeff * schur_from_h(lam, h)
            val = complex(val)
            re.append(val.real)
            im.append(val.imag)
        return complex(math.fsum(re), math.fsum(im))

    def coefficient(self, lam: Partition) -> complex:
        return complex(self.terms.get(lam, 0.0))


def series_terms(pair: SkewPair, charge: int, L: int, cutoff: int) -> dict:
    return {lam: abar(shifted_indices(lam, charge), L, pair)
            for lam in enumerate_partitions(cutoff, charge)}


def required_table_size(charge: int, L: int, cutoff: int, base: int) -> int:
    return cutoff + charge - 1 + L - base + 1


def tau_series(spec: EnsembleSpec, cutoff: int, pair: SkewPair | None = None,
               charge: int | None = None) -> TauApprox:
    """Schur-series approximation of the ensemble partition function."""
    if charge is None:
        charge = spec.n_eff
    if pair is None:
        base = min(0, spec.L)
        pair = moment_pair(spec, required_table_size(charge, spec.L, cutoff, base), base)
    return TauApprox(spec.kind, charge, spec.L, cutoff,
                     series_terms(pair, charge, spec.L, cutoff),
                     provenance=pair.provenance)


def tau_charge_family(spec: EnsembleSpec, charges, cutoff: int) -> dict:
    """Tau series at several charges over one moment pair.

    For the symplectic-family kinds the paper's border vector vanishes, which
    makes every odd-charge member identically zero and the four-term
    difference identity vacuous; the family used for residual checks grafts
    the plain single-moment border onto the same skew matrix (any border
    yields a valid family, and even charges are untouched by it).
    """
    charges = sorted(set(int(c) for c in charges))
    if min(charges) < 0:
        raise ValueError("charges must be nonnegative")
    base = min(0, spec.L)
    size = required_table_size(max(charges), spec.L, cutoff, base)
    pair = moment_pair(spec, size, base)
    if spec.family == "sympl" and any(c % 2 for c in charges):
        pair = SkewPair(pair.a_matrix, sympl_border_moments(spec.s, base, size),
                        index_base=base, offset_hint=spec.L,
                        provenance=pair.provenance + "+grafted-border")
    return {c: TauApprox(spec.kind, c, spec.L, cutoff,
                         series_terms(pair, c, spec.L, cutoff), pair.provenance)
            for c in charges}


def group_series(group: str, n: int, t: CouplingSeq, cutoff: int) -> float:
    """Truncated character expansion of the Haar average of exp(sum t_m Tr g^m).

    orthogonal: partitions with every part even, length <= n;
    symplectic: partitions whose conjugate has every part even, length <= n
    (pass the matrix size 2n for Sp(2n)).
    """
    if group not in ("orthogonal", "symplectic"):
        raise ValueError(f"unknown group {group!r}")
    h = hseq(cutoff + n + 1, t)
    total = [1.0]
    for lam in enumerate_partitions(cutoff, n):
        if lam.weight == 0:
            continue
        keep = is_even_partition(lam) if group == "orthogonal" else is_even_partition(conjugate(lam))
        if keep:
            total.append(float(np.real(schur_from_h(lam, h))))
    return math.fsum(total)


@dataclass
class HirotaReport:
    residual: complex
    scale: float
    charge: int

    @property
    def relative(self) -> float:
        return abs(self.residual) / max(self.scale, 1e-300)


def hirota_residual(family: dict, l: int, t: CouplingSeq, alpha: float, beta: float) -> HirotaReport:
    """LHS - RHS of the four-term difference bilinear identity at charge N.

    family maps charges N-1..N+2 to TauApprox objects built at the same
    (L, s); alpha and beta are the two shift points (distinct, nonzero).
    """
    if alpha == beta:
        raise ValueError("Hirota shift points must be distinct")
    if alpha == 0 or beta == 0:
        raise ValueError("Hirota shift points must be nonzero")
    charges = sorted(family)
    if len(charges) != 4 or charges != list(range(charges[0], charges[0] + 4)):
        raise ValueError("family must cover four consecutive charges")
    n = charges[1]
    cutoff = family[n].cutoff
    for c, tau in family.items():
        if tau.L != l:
            raise ValueError(f"family member at charge {c} was built at L={tau.L}, not {l}")

    order = cutoff + charges[-1] + 1

    def sh(seq: CouplingSeq, *points: float) -> CouplingSeq:
        out = seq
        for p in points:
            out = miwa_shift(out, [(-1.0, 1.0 / p)], 1.0, order=order)
        return out

    t_a = sh(t, alpha)
    t_b = sh(t, beta)
    t_ab = sh(t, alpha, beta)
    term1 = -beta / (alpha - beta) * family[n].evaluate(t_b) * family[n + 1].evaluate(t_a)
    term2 = -alpha / (beta - alpha) * family[n].evaluate(t_a) * family[n + 1].evaluate(t_b)
    term3 = (1.0 / (alpha * beta)) * family[n + 2].evaluate(t_ab) * family[n - 1].evaluate(t)
    rhs = family[n + 1].evaluate(t_ab) * family[n].evaluate(t)
    residual = term1 + term2 + term3 - rhs
    scale = max(abs(term1), abs(term2), abs(term3), abs(rhs))
    return HirotaReport(residual, scale, n)


@dataclass
class WaveReport:
    degree: int
    points: tuple
    fit_deviation_t: float
    fit_deviation_s: float | None
    two_sided_gap: float | None


def _poly_fit_deviation(xs: np.ndarray, ys: np.ndarray, degree: int) -> float:
    coeffs = np.polynomial.polynomial.polyfit(xs, ys, degree)
    fit = np.polynomial.polynomial.polyval(xs, coeffs)
    return float(np.max(np.abs(ys - fit)) / max(np.max(np.abs(ys)), 1e-300))


def _augment_points(points, degree: int) -> np.ndarray:
    pts = sorted(float(p) for p in points)
    extra = [math.sqrt(pts[i] * pts[i + 1]) for i in range(len(pts) - 1) if pts[i] * pts[i + 1] > 0]
    pts = sorted(set(pts + extra + [1.5 * pts[-1]]))
    k = 1
    while len(pts) < degree + 3:
        pts.append(pts[-1] * (1.0 + 0.25 * k))
        k += 1
    return np.array(pts)


def wave_polynomial_check(spec: EnsembleSpec, cutoff: int, points,
                          s_ratio_fn=None) -> WaveReport:
    """Fit lambda^charge * tau(t - [1/lambda]) / tau(t) by a degree-charge polynomial.

    `s_ratio_fn(lambda)`, when given, supplies the s-side construction
    tau(t, s + [lambda]) / tau(t, s) (a same-degree polynomial on the
    restricted ensemble); its fit quality and the gap between the two wave
    functions are reported, not asserted.
    """
    charge = spec.n_eff
    if charge == 0:
        return WaveReport(0, tuple(points), 0.0, None, None)
    base_tau = tau_series(spec, cutoff)
    tau0 = base_tau.evaluate(spec.t)
    if abs(tau0) < 1e-12:
        raise ValueError("tau vanishes at base point")
    xs = _augment_points(points, charge)
    vals_t = []
    for lam in xs:
        tsh = miwa_shift(spec.t, [(1.0, 1.0 / lam)], 1.0, order=cutoff + charge)
        vals_t.append(lam ** charge * base_tau.evaluate(tsh) / tau0)
    vals_t = np.array([complex(v).real for v in vals_t])
    dev_t = _poly_fit_deviation(xs, vals_t, charge)

    dev_s = gap = None
    if s_ratio_fn is not None:
        # tau(t, s+[lambda]) / tau(t, s) is itself polynomial in lambda
        vals_s = np.array([complex(s_ratio_fn(lam)).real for lam in xs])
        dev_s = _poly_fit_deviation(xs, vals_s, charge)
        wave_t = vals_t / xs ** charge * np.exp(
            [potential(l, spec.t) - potential(1.0 / l, spec.s) for l in xs]) * xs ** spec.L
        wave_s = vals_s * np.exp(
            [potential(1.0 / l, spec.s) for l in xs]) * xs ** (-float(spec.L))
        gap = float(np.max(np.abs(wave_t - wave_s)) / max(np.max(np.abs(wave_t)), 1e-300))
    return WaveReport(charge, tuple(float(x) for x in xs), dev_t, dev_s, gap)
