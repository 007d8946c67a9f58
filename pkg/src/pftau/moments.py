"""Skew moment pairs (A, a), kernel matrices, and complex bimoments.

The moment tables never see the t-couplings: t enters through the Schur
series (and through kernel/oracle weights).  The s-couplings, the matrix
half-width and the quadrature level fully determine a table, which makes
them cacheable.

Sector conventions, fixed once here and mirrored exactly by the oracle
module (see `oracle.discrete_consistency` for the finite proof):

* real orthogonal sector   R[n,m] = sgn-weighted double moment, already skew;
* orthogonal border        a[n] = sqrt(2) * single moment with its Gaussian;
* symplectic line sector   A[n,m] = (n-m)/2 * single moment of x^(n+m-1);
* quaternion half-plane    A = (raw - raw^T)/2 with the literal (z - zbar)
                           inside raw, which lands on real entries;
* real-Ginibre half-plane  C = (raw - raw^T)/(2i): the erfc-weighted raw
                           moments have an imaginary skew part, and dividing
                           by i is what matches the positive (|Delta|-style)
                           eigenvalue sectors and keeps tau values real.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import quad
from .quad import (LinePanels, QuadratureError, half_plane_grid, full_plane_grid,
                   gaussian_halfwidth, real_line_breakpoints, erfc_vec)
from .skewlin import SkewPair
from .symfun import CouplingSeq, ZERO_SEQ, potential

ORTH_KINDS = ("OE", "GinOE")
SYMPL_KINDS = ("SE", "GinSE")
_DEFAULT_MIX = {"OE": (0.0, 1.0), "SE": (0.0, 1.0), "GinOE": (1.0, 1.0),
                "GinSE": (1.0, 0.0), "GinUE": (0.0, 0.0)}

TABLE_BUILDS = 0
_SECTOR_CACHE: dict = {}
_DISK_CACHE = None


def clear_cache() -> None:
    _SECTOR_CACHE.clear()


def set_disk_cache(store) -> None:
    """Install a persistent table store (see cli.MomentCache); None disables."""
    global _DISK_CACHE
    _DISK_CACHE = store


@dataclass(frozen=True)
class EnsembleSpec:
    """One deformed-ensemble problem instance."""

    kind: str
    n: int
    L: int = 0
    t: CouplingSeq = ZERO_SEQ
    s: CouplingSeq = ZERO_SEQ
    alpha: float | None = None
    beta: float | None = None
    # second coupling family and determinant exponent of the complex ensemble
    L2: int = 0
    t_bar: CouplingSeq = ZERO_SEQ
    s_bar: CouplingSeq = ZERO_SEQ

    def __post_init__(self):
        if self.kind not in _DEFAULT_MIX:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.n < 0:
            raise ValueError("matrix size index must be >= 0")
        for name, v in (("alpha", self.alpha), ("beta", self.beta)):
            if v is not None and not 0.0 <= float(v) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def mix(self) -> tuple[float, float]:
        """(alpha, beta) with per-kind defaults filled in."""
        da, db = _DEFAULT_MIX[self.kind]
        return (da if self.alpha is None else float(self.alpha),
                db if self.beta is None else float(self.beta))

    @property
    def family(self) -> str:
        if self.kind in ORTH_KINDS:
            return "orth"
        if self.kind in SYMPL_KINDS:
            return "sympl"
        return "unitary"

    @property
    def n_eff(self) -> int:
        """Pfaffian/charge size: partitions run over length <= n_eff."""
        return 2 * self.n if self.family == "sympl" else self.n

    def validate(self) -> quad.Validation:
        if self.kind == "GinUE":
            return validate_ginue(self)
        return quad.convergence_validate(self.kind, self.t, self.s, self.L, self.mix[0])

    def digest(self) -> str:
        payload = repr((self.kind, self.n, self.L, self.t.values, self.s.values,
                        self.mix, self.L2, self.t_bar.values, self.s_bar.values))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def validate_ginue(spec: EnsembleSpec) -> quad.Validation:
    for name, seq in (("s", spec.s), ("s'", spec.s_bar)):
        if seq.top_index() != 0:
            return quad.Validation(False, f"{name} != 0 blows up near 0 on some ray of the full plane")
    for name, seq in (("t", spec.t), ("t'", spec.t_bar)):
        k = seq.top_index()
        if k > 2:
            return quad.Validation(False, f"degree-{k} {name}-coupling outruns the full-plane Gaussian")
        if k == 2 and abs(seq.entry(2)) >= 0.5:
            return quad.Validation(False, f"|{name}_2| >= 1/2 overwhelms the full-plane Gaussian")
        if not seq.is_real():
            return quad.Validation(False, "couplings must be real")
    if spec.L2 - spec.L >= 2:
        return quad.Validation(False, "antiholomorphic determinant power too negative at the origin")
    return quad.Validation(True)


# ---------------------------------------------------------------------------
# weights shared with the oracle module

def line_weight(family: str, t: CouplingSeq, s: CouplingSeq):
    """Per-eigenvalue real-line weight; V enters twice for the symplectic line."""
    mult = 2.0 if family == "sympl" else 1.0
    gauss = 1.0 if family == "sympl" else 0.5

    def w(x):
        e = -gauss * x * x
        if t.top_index():
            e = e + mult * potential(x, t)
        if s.top_index():
            e = e - mult * potential(1.0 / x, s)
        return np.exp(e)

    return w


def pair_weight(kind: str, t: CouplingSeq, s: CouplingSeq):
    """Weight of one conjugate pair (z, zbar) in the upper half-plane."""
    if kind == "GinSE":
        def w(z):
            e = -np.abs(z) ** 2
            if t.top_index():
                e = e + 2 * np.real(potential(z, t))
            if s.top_index():
                e = e - 2 * np.real(potential(1.0 / z, s))
            return np.exp(e)
    elif kind == "GinOE":
        def w(z):
            e = -np.real(z * z)
            if t.top_index():
                e = e + 2 * np.real(potential(z, t))
            if s.top_index():
                e = e - 2 * np.real(potential(1.0 / z, s))
            return erfc_vec(math.sqrt(2.0) * np.imag(z)) * np.exp(e)
    else:
        raise ValueError(f"no pair weight for kind {kind!r}")
    return w


def clip_support(radius: float, poles, gauss: float, lin: float, maxdeg: int,
                 need: float = 26.0) -> float:
    """Shrink a cutoff radius below the nearest pole, if the tail is negligible."""
    if not poles:
        return radius
    rp = 0.92 * min(abs(float(q)) for q in poles if q != 0)
    if rp >= radius:
        return radius
    if gauss * rp * rp - lin * rp - maxdeg * math.log1p(rp) < need:
        raise QuadratureError(
            f"pole at distance {rp / 0.92:.3g} sits inside the numerically effective support")
    return rp


def _line_panels(family: str, s: CouplingSeq, maxdeg: int, level: int,
                 t: CouplingSeq = ZERO_SEQ, order: int = 24,
                 poles=None) -> LinePanels:
    gauss = 1.0 if family == "sympl" else 0.5
    mult = 2.0 if family == "sympl" else 1.0
    if t.top_index() >= 2:
        gauss = gauss - mult * float(t.entry(2))
    lin = mult * abs(float(t.entry(1))) if t.top_index() else 0.0
    halfwidth = gaussian_halfwidth(gauss, lin, max(maxdeg, 2))
    halfwidth = clip_support(halfwidth, poles, gauss, lin, max(maxdeg, 2))
    inner = None
    ks = s.top_index()
    if ks:
        sk = mult * float(s.entry(ks))
        inner = min((abs(sk) / 60.0) ** (1.0 / ks), 0.3)
    bp = real_line_breakpoints(halfwidth, n_center=12, inner_cut=inner, level=level)
    return LinePanels(bp, order=order)


def _power_table(x: np.ndarray, indices) -> np.ndarray:
    """x**k for each k in indices; integer exponents, negative allowed."""
    return np.stack([x ** int(k) for k in indices])


def _sector_key(name: str, s: CouplingSeq, base: int, size: int) -> tuple:
    return (name, s.values, base, size)


def _converged_table(build, rel_tol: float = 5e-10, max_level: int = 4,
                     zero_floor: float = 0.0):
    prev = build(0)
    for lvl in range(1, max_level + 1):
        cur = build(lvl)
        scale = max(float(np.max(np.abs(cur))), 1e-300)
        delta = float(np.max(np.abs(cur - prev)))
        if delta <= rel_tol * scale:
            return cur
        if scale < zero_floor and delta < zero_floor:
            return cur
        prev = cur
    raise QuadratureError(f"moment table did not converge (residual {delta:.3e})",
                          best=cur, residual=delta)


def _cached_sector(name: str, s: CouplingSeq, base: int, size: int, build):
    key = _sector_key(name, s, base, size)
    hit = _SECTOR_CACHE.get(key)
    if hit is not None:
        return hit
    if _DISK_CACHE is not None:
        stored = _DISK_CACHE.load(key)
        if stored is not None:
            _SECTOR_CACHE[key] = stored
            return stored
    global TABLE_BUILDS
    TABLE_BUILDS += 1
    table = _converged_table(build)
    _SECTOR_CACHE[key] = table
    if _DISK_CACHE is not None:
        _DISK_CACHE.store(key, table)
    return table


def orth_real_sector(s: CouplingSeq, base: int, size: int) -> np.ndarray:
    """R[n,m] = iint x^n y^m sgn(x-y) w0(x) w0(y); skew up to quadrature noise."""
    idx = np.arange(base, base + size)
    w0 = line_weight("orth", ZERO_SEQ, s)

    def build(level):
        lp = _line_panels("orth", s, int(np.max(np.abs(idx))) + 1, level)
        wv = w0(lp.nodes)
        powers = _power_table(lp.nodes, idx)
        cums = np.stack([lp.cumulative(powers[m] * wv) for m in range(size)])
        totals = np.array([lp.integrate(powers[m] * wv) for m in range(size)]).real
        inner = 2.0 * cums - totals[:, None]
        r = np.einsum("p,np,mp->nm", lp.weights * wv, powers, inner)
        return (r - r.T) / 2.0

    return _cached_sector("orth_real", s, base, size, build)


def orth_border(s: CouplingSeq, base: int, size: int) -> np.ndarray:
    idx = np.arange(base, base + size)
    w0 = line_weight("orth", ZERO_SEQ, s)

    def build(level):
        lp = _line_panels("orth", s, int(np.max(np.abs(idx))) + 1, level)
        wv = w0(lp.nodes)
        powers = _power_table(lp.nodes, idx)
        return math.sqrt(2.0) * powers @ (lp.weights * wv)

    return _cached_sector("orth_border", s, base, size, build)


def sympl_sector(s: CouplingSeq, base: int, size: int) -> np.ndarray:
    """A[n,m] = (n-m)/2 * mu_{n+m-1} with symplectic-line single moments mu."""
    idx = np.arange(base, base + size)
    w0 = line_weight("sympl", ZERO_SEQ, s)
    qmin, qmax = 2 * base - 1, 2 * (base + size - 1) - 1
    qs = np.arange(qmin, qmax + 1)

    def build(level):
        lp = _line_panels("sympl", s, int(max(abs(qmin), abs(qmax))) + 1, level)
        wv = w0(lp.nodes)
        powers = _power_table(lp.nodes, qs)
        mu = powers @ (lp.weights * wv)
        n = idx[:, None]
        m = idx[None, :]
        return (n - m) / 2.0 * mu[(n + m - 1) - qmin]

    return _cached_sector("sympl_line", s, base, size, build)


def sympl_border_moments(s: CouplingSeq, base: int, size: int) -> np.ndarray:
    """Plain single moments of the symplectic-line weight.

    Not an ensemble datum (that border vanishes); used to extend a
    symplectic skew matrix to odd charges so the difference bilinear
    identity has nonvacuous members.
    """
    idx = np.arange(base, base + size)
    w0 = line_weight("sympl", ZERO_SEQ, s)

    def build(level):
        lp = _line_panels("sympl", s, int(np.max(np.abs(idx))) + 1, level)
        wv = w0(lp.nodes)
        powers = _power_table(lp.nodes, idx)
        return powers @ (lp.weights * wv)

    return _cached_sector("sympl_border", s, base, size, build).astype(complex)


def _half_plane_raw(kind: str, s: CouplingSeq, base: int, size: int, level: int) -> np.ndarray:
    idx = np.arange(base, base + size)
    maxdeg = 2 * int(np.max(np.abs(idx))) + 2
    # uniform radial bound e^{-r^2}: direct for GinSE, via erfc(u) <= e^{-u^2} for GinOE
    radius = gaussian_halfwidth(1.0, 0.0, maxdeg, tail=42.0)
    grid = half_plane_grid(radius, level=level)
    z = grid.nodes
    w = pair_weight(kind, ZERO_SEQ, s)(z)
    zp = np.stack([z ** int(k) for k in idx])
    zbp = np.conj(zp)
    if kind == "GinSE":
        w = w * (z - np.conj(z))
    return np.einsum("p,np,mp->nm", grid.weights * w, zp, zbp)


def ginse_complex_sector(s: CouplingSeq, base: int, size: int) -> np.ndarray:
    def build(level):
        raw = _half_plane_raw("GinSE", s, base, size, level)
        return (raw - raw.T) / 2.0
    return _cached_sector("ginse_complex", s, base, size, build)


def ginoe_complex_sector(s: CouplingSeq, base: int, size: int) -> np.ndarray:
    def build(level):
        raw = _half_plane_raw("GinOE", s, base, size, level)
        return (raw - raw.T) / 2.0j
    return _cached_sector("ginoe_complex", s, base, size, build)


def moment_pair(spec: EnsembleSpec, size: int, base: int | None = None) -> SkewPair:
    """The skew pair (A, a) feeding every Pfaffian coefficient of the series."""
    spec.validate().require()
    if base is None:
        base = min(0, spec.L)
    alpha, beta = spec.mix
    if spec.family == "orth":
        a_mat = np.zeros((size, size), dtype=complex)
        if beta != 0.0:
            a_mat = a_mat + beta * orth_real_sector(spec.s, base, size)
        if alpha != 0.0:
            a_mat = a_mat + alpha * ginoe_complex_sector(spec.s, base, size)
        border = beta * orth_border(spec.s, base, size).astype(complex)
    elif spec.family == "sympl":
        a_mat = np.zeros((size, size), dtype=complex)
        if beta != 0.0:
            a_mat = a_mat + beta * sympl_sector(spec.s, base, size)
        if alpha != 0.0:
            a_mat = a_mat + alpha * ginse_complex_sector(spec.s, base, size)
        border = np.zeros(size, dtype=complex)
    else:
        raise ValueError("moment_pair serves the Pfaffian ensembles, not GinUE")
    a_mat = (a_mat - a_mat.T) / 2.0
    return SkewPair(a_mat, border, index_base=base, offset_hint=spec.L,
                    provenance=f"{spec.kind}:{spec.digest()}")


# ---------------------------------------------------------------------------
# kernel matrices of the determinant-average identity

@dataclass
class KernelMatrix:
    points: np.ndarray
    kstar: np.ndarray
    k: np.ndarray
    kind: str
    variant: str = "abs"


def _check_points(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if len(np.unique(p)) != len(p):
        raise ValueError("kernel points must be distinct (coincident p gives a zero prefactor)")
    return p


def kernel_matrix(spec: EnsembleSpec, p, variant: str = "abs") -> KernelMatrix:
    """K*_nm by quadrature and K_nm = (p_m - p_n) K*_nm.

    `variant` selects |x-y| (as displayed for the kernels) or sgn(x-y) in
    the real double integral; the sgn variant integrates an antisymmetric
    function and is kept only so the experiment can record that it fails.
    """
    p = _check_points(p)
    spec.validate().require()
    if spec.kind in ("OE", "GinOE"):
        kstar = _kernel_real_block(spec, p, variant)
        if spec.kind == "GinOE":
            kstar = kstar + _kernel_pair_block(spec, p)
    elif spec.kind == "GinSE":
        kstar = _kernel_pair_block(spec, p)
    elif spec.kind == "SE":
        kstar = _kernel_se(spec, p)
    else:
        raise ValueError(f"no kernel for kind {spec.kind!r}")
    kk = (p[None, :] - p[:, None]) * kstar
    return KernelMatrix(p, kstar, kk, spec.kind, variant)


def _inv_points(p: np.ndarray) -> list[float]:
    return [1.0 / float(v) for v in p if v != 0]


def _kernel_se(spec: EnsembleSpec, p: np.ndarray) -> np.ndarray:
    w0 = line_weight("sympl", spec.t, spec.s)

    def build(level):
        lp = _line_panels("sympl", spec.s, 2 * abs(spec.L) + 4, level, t=spec.t,
                          poles=_inv_points(p))
        x = lp.nodes
        wv = w0(x) * x ** (2 * spec.L) * lp.weights
        dens = np.stack([(1.0 - x * pi) ** 2 for pi in p])
        out = np.empty((len(p), len(p)))
        for a in range(len(p)):
            for b in range(len(p)):
                out[a, b] = np.sum(wv / (dens[a] * dens[b]))
        return out

    return _converged_table(build)


def _kernel_real_block(spec: EnsembleSpec, p: np.ndarray, variant: str) -> np.ndarray:
    w0 = line_weight("orth", spec.t, spec.s)

    def build(level):
        lp = _line_panels("orth", spec.s, abs(spec.L) + 4, level, t=spec.t,
                          poles=_inv_points(p))
        x = lp.nodes
        base_vals = w0(x) * x ** spec.L
        dens = np.stack([1.0 - x * pi for pi in p])
        out = np.empty((len(p), len(p)))
        for a in range(len(p)):
            for b in range(len(p)):
                g = base_vals / (dens[a] * dens[b])
                c0 = lp.cumulative(g)
                if variant == "abs":
                    # iint |x-y| g g = 2 int g(x) [x C0(x) - C1(x)] dx
                    c1 = lp.cumulative(x * g)
                    out[a, b] = 2.0 * np.sum(lp.weights * g * (x * c0 - c1))
                else:
                    # sgn variant integrates an antisymmetric function
                    tot0 = np.sum(lp.weights * g)
                    out[a, b] = np.sum(lp.weights * g * (2.0 * c0 - tot0))
        return out

    return _converged_table(build, rel_tol=2e-9, zero_floor=1e-10 if variant != "abs" else 0.0)


def _kernel_pair_block(spec: EnsembleSpec, p: np.ndarray) -> np.ndarray:
    w = pair_weight(spec.kind, spec.t, spec.s)
    square = spec.kind == "GinSE"

    def build(level):
        gauss = 1.0 - 2.0 * abs(float(spec.t.entry(2)))
        maxdeg = 4 * abs(spec.L) + 6
        radius = gaussian_halfwidth(gauss, 2 * abs(float(spec.t.entry(1))), maxdeg)
        radius = clip_support(radius, _inv_points(p), gauss,
                              2 * abs(float(spec.t.entry(1))), maxdeg)
        grid = half_plane_grid(radius, level=level)
        z = grid.nodes
        zb = np.conj(z)
        vand = (z - zb) ** (2 if square else 1)
        base_vals = grid.weights * w(z) * np.abs(z) ** (2 * spec.L) * vand
        dens = np.stack([(1.0 - z * pi) * (1.0 - zb * pi) for pi in p])
        out = np.empty((len(p), len(p)), dtype=complex)
        for a in range(len(p)):
            for b in range(len(p)):
                out[a, b] = np.sum(base_vals / (dens[a] * dens[b]))
        return out

    return _converged_table(build, rel_tol=2e-9)


def kernel_prefactor(p: np.ndarray, L: int) -> float:
    """prod p_i^{(L+1)(2-N)} / prod_{i>j} (p_i - p_j) of the Pfaffian identity."""
    p = np.asarray(p, dtype=float)
    n = len(p)
    num = float(np.prod(p ** ((L + 1) * (2 - n))))
    den = 1.0
    for i in range(n):
        for j in range(i):
            den *= p[i] - p[j]
    return num / den


# ---------------------------------------------------------------------------
# complex (GinUE) bimoments

def complex_bimoment_matrix(spec: EnsembleSpec, size: int) -> np.ndarray:
    """M_jk = int z^{j-1+L1} zbar^{k-1-L2} e^{V(z,t)+V(zbar,t') - |z|^2} d^2 z."""
    if spec.kind != "GinUE":
        raise ValueError("bimoments are specific to the complex Ginibre ensemble")
    validate_ginue(spec).require()
    jpow = np.arange(size) + spec.L
    kpow = np.arange(size) - spec.L2

    def build(level):
        gauss = 1.0 - abs(float(spec.t.entry(2))) - abs(float(spec.t_bar.entry(2)))
        lin = abs(float(spec.t.entry(1))) + abs(float(spec.t_bar.entry(1)))
        radius = gaussian_halfwidth(gauss, lin, 2 * size + abs(spec.L) + abs(spec.L2) + 2)
        grid = full_plane_grid(radius, level=level)
        z = grid.nodes
        e = -np.abs(z) ** 2
        if spec.t.top_index():
            e = e + potential(z, spec.t)
        if spec.t_bar.top_index():
            e = e + potential(np.conj(z), spec.t_bar)
        wv = grid.weights * np.exp(e)
        zp = np.stack([z ** int(a) for a in jpow])
        zbp = np.stack([np.conj(z) ** int(b) for b in kpow])
        return np.einsum("p,jp,kp->jk", wv, zp, zbp)

    return _converged_table(build, rel_tol=2e-9)
