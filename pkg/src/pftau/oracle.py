"""Independent ground truth: eigenvalue-space integrals, Haar Monte Carlo,
and discrete-measure identities that hold exactly.

The eigenvalue engines expand every Vandermonde factor into monomials and
reduce the sectors to products of one-eigenvalue moments (full half-plane
for conjugate pairs, nested ordered integrals for real eigenvalues), so a
three-eigenvalue integral costs a handful of one-dimensional quadratures.

Normalization: complex-pair sectors carry one fixed constant per pair
((z - zbar)/2 for the quaternion kinds, 1/(2i) for the real-Ginibre kind),
and the symplectic line carries 1/2 per doubled eigenvalue.  With those
constants the Schur/Pfaffian series of `tauseries` equals the eigenvalue
sum times sqrt(2)^(charge mod 2) -- exactly, which is what
`discrete_consistency` certifies on atomic measures.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import moments as mom
from .moments import EnsembleSpec
from .partitions import Partition, enumerate_partitions, shifted_indices
from .quad import LinePanels, full_plane_grid, gaussian_halfwidth, half_plane_grid
from .skewlin import SkewPair, abar
from .symfun import CouplingSeq, ZERO_SEQ, hseq, potential, schur_from_h

PAIR_NORM = {"GinOE": 1.0 / 2.0j, "GinSE": 0.5}


@dataclass
class OracleResult:
    value: complex
    error_estimate: float
    method: str


# ---------------------------------------------------------------------------
# multivariate monomial expansion

def poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0.0) + c1 * c2
    return out


def poly_linear(nvars: int, i: int, j: int) -> dict:
    """v_i - v_j as a monomial dict."""
    ei = tuple(1 if k == i else 0 for k in range(nvars))
    ej = tuple(1 if k == j else 0 for k in range(nvars))
    return {ei: 1.0, ej: -1.0}


def poly_monomial(nvars: int, exps: dict, coeff=1.0) -> dict:
    e = tuple(exps.get(k, 0) for k in range(nvars))
    return {e: coeff}


def vandermonde_poly(nvars: int, power: int = 1) -> dict:
    out = {tuple(0 for _ in range(nvars)): 1.0}
    for i in range(nvars):
        for j in range(i + 1, nvars):
            for _ in range(power):
                out = poly_mul(out, poly_linear(nvars, i, j))
    return out


# ---------------------------------------------------------------------------
# one-eigenvalue moment engines

class OrderedLineIntegrator:
    """Nested ordered integrals int_{x_1 > ... > x_r} prod x_i^{e_i} w(x_i)."""

    def __init__(self, lp: LinePanels, wvals: np.ndarray):
        self.lp = lp
        self.w = wvals
        self._cum: dict = {(): None}

    def _cumulative(self, suffix: tuple) -> np.ndarray:
        hit = self._cum.get(suffix)
        if hit is not None or suffix == ():
            return hit
        e = suffix[0]
        inner = self._cumulative(suffix[1:])
        vals = self.lp.nodes ** e * self.w
        if inner is not None:
            vals = vals * inner
        out = self.lp.cumulative(vals)
        self._cum[suffix] = out
        return out

    def value(self, exps: tuple) -> complex:
        if not exps:
            return 1.0
        inner = self._cumulative(tuple(exps[1:]))
        vals = self.lp.nodes ** exps[0] * self.w
        if inner is not None:
            vals = vals * inner
        return self.lp.integrate(vals)


def pair_moment_table(kind: str, t: CouplingSeq, s: CouplingSeq, maxdeg: int,
                      level: int, extra=None, poles=None) -> np.ndarray:
    """T[a,b] = int z^a zbar^b W_pair(z) [extra(z)] d^2 z over the half-plane."""
    gauss = 1.0 - 2.0 * abs(float(t.entry(2)))
    lin = 2.0 * abs(float(t.entry(1)))
    radius = gaussian_halfwidth(gauss, lin, 2 * maxdeg + 2)
    radius = mom.clip_support(radius, poles, gauss, lin, 2 * maxdeg + 2)
    grid = half_plane_grid(radius, level=level)
    z = grid.nodes
    w = mom.pair_weight(kind, t, s)(z) * grid.weights
    if extra is not None:
        w = w * extra(z)
    zp = np.stack([z ** a for a in range(maxdeg + 1)])
    zbp = np.conj(zp)
    return np.einsum("p,ap,bp->ab", w, zp, zbp)


def line_setup(family: str, t: CouplingSeq, s: CouplingSeq, maxdeg: int,
               level: int, extra=None, poles=None) -> tuple[LinePanels, np.ndarray]:
    lp = mom._line_panels(family, s, maxdeg + 2, level, t=t, poles=poles)
    w = mom.line_weight(family, t, s)(lp.nodes)
    if extra is not None:
        w = w * extra(lp.nodes)
    return lp, w


# ---------------------------------------------------------------------------
# eigenvalue integrals

def _sector_value_orth(k: int, n_real: int, L: int, pair_T, ordered: OrderedLineIntegrator) -> complex:
    """One (k complex pairs, n_real reals) sector of the real-matrix family."""
    nv = 2 * k + n_real
    poly = vandermonde_poly(nv, power=1)
    # absolute powers: |z|^{2L} per pair, x^L per real
    shift = {}
    for i in range(2 * k):
        shift[i] = L
    for j in range(n_real):
        shift[2 * k + j] = L
    poly = poly_mul(poly, poly_monomial(nv, shift))
    norm = PAIR_NORM["GinOE"] ** k / math.factorial(k) if k else 1.0
    total = 0.0 + 0.0j
    for exps, coeff in poly.items():
        term = coeff
        for i in range(k):
            term = term * pair_T[exps[2 * i], exps[2 * i + 1]]
        if term == 0:
            continue
        term = term * ordered.value(exps[2 * k:])
        total += term
    return total * norm


def _sector_value_sympl(k: int, m: int, L: int, pair_T, mu, mu_qmin: int) -> complex:
    """k quaternion pairs and m doubled line eigenvalues (confluent factors)."""
    nv = 2 * k + m
    poly = {tuple(0 for _ in range(nv)): 1.0}
    # pair-pair and pair-line cross factors from the confluent Vandermonde;
    # each pair carries (z - zbar) from Delta itself and (z - zbar)/2 from
    # the pair weight
    for i in range(k):
        zi, zbi = 2 * i, 2 * i + 1
        poly = poly_mul(poly, poly_linear(nv, zi, zbi))
        poly = poly_mul(poly, poly_linear(nv, zi, zbi))
        poly = poly_mul(poly, {tuple(0 for _ in range(nv)): PAIR_NORM["GinSE"]})
        poly = poly_mul(poly, poly_monomial(nv, {zi: L, zbi: L}))
        for j in range(i + 1, k):
            zj, zbj = 2 * j, 2 * j + 1
            for a, b in ((zi, zj), (zi, zbj), (zbi, zj), (zbi, zbj)):
                poly = poly_mul(poly, poly_linear(nv, a, b))
    for j in range(m):
        xj = 2 * k + j
        poly = poly_mul(poly, poly_monomial(nv, {xj: 2 * L}, 0.5))
        for i in range(k):
            for zslot in (2 * i, 2 * i + 1):
                p = poly_linear(nv, zslot, xj)
                poly = poly_mul(poly, poly_mul(p, p))
        for j2 in range(j + 1, m):
            p = poly_linear(nv, xj, 2 * k + j2)
            p2 = poly_mul(p, p)
            poly = poly_mul(poly, poly_mul(p2, p2))
    norm = 1.0
    if k:
        norm /= math.factorial(k)
    if m:
        norm /= math.factorial(m)
    total = 0.0 + 0.0j
    for exps, coeff in poly.items():
        term = coeff
        for i in range(k):
            term = term * pair_T[exps[2 * i], exps[2 * i + 1]]
        for j in range(m):
            term = term * mu[exps[2 * k + j] - mu_qmin]
        total += term
    return total * norm


def _mix_weight(alpha: float, beta: float, k: int, n_real_or_m: int, family: str) -> float:
    if family == "orth":
        return alpha ** k * beta ** ((n_real_or_m + 1) // 2)
    return alpha ** k * beta ** n_real_or_m


def _eigen_value_at_level(spec: EnsembleSpec, level: int, extra_real=None,
                          extra_pair=None, poles=None) -> complex:
    alpha, beta = spec.mix
    n, L = spec.n, spec.L
    if spec.family == "orth":
        if n > 3:
            raise ValueError("eigenvalue oracle implemented for N <= 3")
        maxdeg = n - 1 + abs(L) + 1
        pair_T = None
        if alpha != 0.0 and n >= 2:
            pair_T = pair_moment_table("GinOE", spec.t, spec.s, maxdeg + abs(L) + 2,
                                       level, extra=extra_pair, poles=poles)
        lp, w = line_setup("orth", spec.t, spec.s, maxdeg, level, extra=extra_real, poles=poles)
        ordered = OrderedLineIntegrator(lp, w)
        total = 0.0 + 0.0j
        for k in range(0, n // 2 + 1):
            wk = _mix_weight(alpha, beta, k, n - 2 * k, "orth")
            if wk == 0.0:
                continue
            total += wk * _sector_value_orth(k, n - 2 * k, L, pair_T, ordered)
        return total
    if spec.family == "sympl":
        if n > 3:
            raise ValueError("eigenvalue oracle implemented for N <= 3")
        maxdeg = 4 * n + 2 * abs(L) + 2
        pair_T = None
        if alpha != 0.0:
            pair_T = pair_moment_table("GinSE", spec.t, spec.s, maxdeg, level,
                                       extra=extra_pair, poles=poles)
        mu_qmin = -2 * abs(L)
        mu_qmax = maxdeg * 2
        lp, w = line_setup("sympl", spec.t, spec.s, mu_qmax, level, extra=extra_real, poles=poles)
        powers = np.stack([lp.nodes ** q for q in range(mu_qmin, mu_qmax + 1)])
        mu = powers @ (lp.weights * w)
        total = 0.0 + 0.0j
        for k in range(0, n + 1):
            wk = _mix_weight(alpha, beta, k, n - k, "sympl")
            if wk == 0.0:
                continue
            total += wk * _sector_value_sympl(k, n - k, L, pair_T, mu, mu_qmin)
        return total
    raise ValueError(f"no eigenvalue oracle for kind {spec.kind!r}")


def _converged_scalar(evaluate, rel_tol: float = 1e-9, max_level: int = 4):
    prev = evaluate(0)
    for lvl in range(1, max_level + 1):
        cur = evaluate(lvl)
        delta = abs(cur - prev)
        if delta <= rel_tol * max(abs(cur), 1e-280):
            return cur, delta
        prev = cur
    return cur, delta


def eigen_integral(spec: EnsembleSpec, rel_tol: float = 1e-9) -> OracleResult:
    """Direct eigenvalue-space value of the deformed partition function.

    No attempt is made to match absorbed volume constants; use ratios.
    """
    spec.validate().require()
    value, err = _converged_scalar(lambda lvl: _eigen_value_at_level(spec, lvl), rel_tol)
    return OracleResult(value, err, "quadrature")


def det_average_lhs(spec: EnsembleSpec, p, insert_power: int = 1,
                    rel_tol: float = 1e-9) -> OracleResult:
    """Average of prod_i det(1 - p_i X)^{-r} in eigenvalue coordinates.

    r = insert_power applies per eigenvalue (for the quaternion kinds the
    full 2Nx2N determinant corresponds to r = 2).
    """
    spec.validate().require()
    p = np.asarray(p, dtype=float)

    def extra_real(x):
        out = np.ones_like(x)
        for pi in p:
            out = out / (1.0 - pi * x) ** insert_power
        return out

    def extra_pair(z):
        out = np.ones_like(z)
        for pi in p:
            out = out / ((1.0 - pi * z) * (1.0 - pi * np.conj(z))) ** insert_power
        return out

    # a negative power is a polynomial insertion and has no pole to dodge
    poles = [1.0 / float(pi) for pi in p if pi != 0] if insert_power > 0 else []
    value, err = _converged_scalar(
        lambda lvl: _eigen_value_at_level(spec, lvl, extra_real, extra_pair, poles), rel_tol)
    return OracleResult(value, err, "quadrature")


def ginue_two_point(spec: EnsembleSpec, rel_tol: float = 2e-6) -> OracleResult:
    """Direct |Delta|^2-weighted two-eigenvalue quadrature over the plane."""
    if spec.kind != "GinUE" or spec.n != 2:
        raise ValueError("direct two-point oracle is for GinUE with N = 2")
    mom.validate_ginue(spec).require()

    def weight(z):
        e = -np.abs(z) ** 2
        if spec.t.top_index():
            e = e + potential(z, spec.t)
        if spec.t_bar.top_index():
            e = e + potential(np.conj(z), spec.t_bar)
        return np.exp(e) * z ** spec.L * np.conj(z) ** (-spec.L2)

    def evaluate(n_r, r_order, n_theta, t_order):
        gauss = 1.0 - abs(float(spec.t.entry(2))) - abs(float(spec.t_bar.entry(2)))
        radius = gaussian_halfwidth(gauss, abs(float(spec.t.entry(1)))
                                    + abs(float(spec.t_bar.entry(1))), 6)
        grid = full_plane_grid(radius, n_r=n_r, r_order=r_order,
                               n_theta=n_theta, t_order=t_order)
        z = grid.nodes
        wv = weight(z) * grid.weights
        total = 0.0 + 0.0j
        block = 2048
        for i0 in range(0, len(z), block):
            zi = z[i0:i0 + block]
            d2 = np.abs(zi[:, None] - z[None, :]) ** 2
            total += np.sum(wv[i0:i0 + block][:, None] * wv[None, :] * d2)
        return total

    # two unrelated coarse rules give the error estimate; escalate only on demand
    coarse = evaluate(4, 14, 4, 12)
    value = evaluate(5, 18, 5, 14)
    err = abs(value - coarse)
    if err > rel_tol * max(abs(value), 1e-280):
        finer = evaluate(8, 22, 8, 18)
        err = abs(finer - value)
        value = finer
    return OracleResult(value, err, "quadrature")


# ---------------------------------------------------------------------------
# Haar-measure Monte Carlo

def haar_orthogonal(rng: np.random.Generator, n: int, batch: int = 1) -> np.ndarray:
    """Batch of Haar orthogonal matrices: QR with positive R diagonal."""
    g = rng.standard_normal((batch, n, n))
    q, r = np.linalg.qr(g)
    sign = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    sign = np.where(sign == 0, 1.0, sign)
    return q * sign[:, None, :]


def haar_symplectic(rng: np.random.Generator, two_n: int, batch: int = 1) -> np.ndarray:
    """Batch of compact-symplectic-group elements as 2n x 2n unitaries.

    Gram-Schmidt over quaternion columns: each orthonormalized complex
    column is followed by its symplectic partner J conj(col).
    """
    if two_n % 2:
        raise ValueError("symplectic size must be even")
    n = two_n // 2
    jmat = np.zeros((two_n, two_n))
    for i in range(n):
        jmat[2 * i, 2 * i + 1] = 1.0
        jmat[2 * i + 1, 2 * i] = -1.0
    g = rng.standard_normal((batch, two_n, two_n)) + 1j * rng.standard_normal((batch, two_n, two_n))
    q = np.zeros_like(g)
    for c in range(n):
        v = g[:, :, 2 * c]
        for prev in range(2 * c):
            u = q[:, :, prev]
            v = v - u * np.sum(np.conj(u) * v, axis=1)[:, None]
        v = v / np.linalg.norm(v, axis=1)[:, None]
        q[:, :, 2 * c] = v
        # partner -J conj(v) keeps det = +1 (conjugate eigenvalue pairs)
        q[:, :, 2 * c + 1] = np.conj(v) @ jmat
    return q


def _batched_power_sums(eig: np.ndarray, order: int) -> np.ndarray:
    """p[b, m-1] = Re Tr g^m from the eigenvalue batch, m = 1..order."""
    out = np.empty((eig.shape[0], order))
    cur = np.ones_like(eig)
    for m in range(1, order + 1):
        cur = cur * eig
        out[:, m - 1] = np.real(np.sum(cur, axis=1))
    return out


def _batched_schur(lam: Partition, psums: np.ndarray) -> np.ndarray:
    """s_lambda of each sample from its power sums, by Jacobi-Trudi."""
    ell = lam.length
    if ell == 0:
        return np.ones(psums.shape[0])
    nmax = lam.parts[0] + ell
    b = psums.shape[0]
    h = np.zeros((b, nmax + 1))
    h[:, 0] = 1.0
    for n in range(1, nmax + 1):
        acc = np.zeros(b)
        for k in range(1, min(n, psums.shape[1]) + 1):
            acc += psums[:, k - 1] * h[:, n - k]   # k * t_k = p_k
        h[:, n] = acc / n
    mats = np.zeros((b, ell, ell))
    for i in range(1, ell + 1):
        for j in range(1, ell + 1):
            m = lam.part(i) - i + j
            if m >= 0:
                mats[:, i - 1, j - 1] = h[:, m]
    if ell == 1:
        return mats[:, 0, 0]
    return np.linalg.det(mats)


def _schur_of_matrix(lam: Partition, m: np.ndarray) -> float:
    eig = np.linalg.eigvals(m)
    order = max(lam.parts[0] + lam.length, 1) if lam.parts else 1
    return float(_batched_schur(lam, _batched_power_sums(eig[None, :], order))[0])


def haar_expectation_mc(group, payload, samples: int, seed: int,
                        shards: int = 8) -> OracleResult:
    """Monte Carlo Haar average of s_lambda(g) or exp(sum t_m Tr g^m).

    group: ("orthogonal", N) or ("symplectic", 2n); payload: ("schur", lam)
    or ("exp_trace", CouplingSeq).  Fixed seed gives bit-identical output;
    shard estimates reduce in a fixed order.
    """
    gname, size = group
    kind, arg = payload
    if samples < 1:
        raise ValueError("samples >= 1")
    seeds = np.random.SeedSequence(seed).spawn(shards)
    per = [samples // shards + (1 if i < samples % shards else 0) for i in range(shards)]
    vals = []
    if kind == "schur":
        order = max(arg.parts[0] + arg.length, 1) if arg.parts else 1
    elif kind == "exp_trace":
        order = max(arg.order, 1)
    else:
        raise ValueError(f"unknown payload {kind!r}")
    for ss, cnt in zip(seeds, per):
        if cnt == 0:
            continue
        rng = np.random.default_rng(ss)
        g = (haar_orthogonal(rng, size, cnt) if gname == "orthogonal"
             else haar_symplectic(rng, size, cnt))
        eig = np.linalg.eigvals(g)
        psums = _batched_power_sums(eig, order)
        if kind == "schur":
            vals.append(_batched_schur(arg, psums))
        else:
            coeffs = np.array([float(arg.entry(m).real) for m in range(1, order + 1)])
            vals.append(np.exp(psums @ coeffs))
    vals = np.concatenate(vals)
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else math.inf
    return OracleResult(mean, stderr, f"monte-carlo(seed={seed}, samples={samples})")


# ---------------------------------------------------------------------------
# discrete-measure exact consistency

BORDER_NORM = math.sqrt(2.0)


def _atomic_moments(kind: str, real_atoms, pair_atoms, t: CouplingSeq, s: CouplingSeq,
                    alpha: float, beta: float, base: int, size: int,
                    fold_t: bool) -> SkewPair:
    idx = np.arange(base, base + size)
    family = "orth" if kind in mom.ORTH_KINDS else "sympl"
    vmult = 2.0 if family == "sympl" else 1.0
    a_mat = np.zeros((size, size), dtype=complex)
    border = np.zeros(size, dtype=complex)
    if real_atoms:
        xs = np.array([x for x, _ in real_atoms], dtype=float)
        gs = np.array([w for _, w in real_atoms], dtype=complex)
        gs = gs * np.exp(-vmult * np.array([potential(1.0 / x, s) for x in xs]))
        if fold_t and t.top_index():
            gs = gs * np.exp(vmult * np.array([potential(x, t) for x in xs]))
        px = np.stack([xs ** int(k) for k in idx])
        if family == "orth":
            sgn = np.sign(xs[:, None] - xs[None, :])
            core = np.einsum("j,k,jk,nj,mk->nm", gs, gs, sgn, px, px)
            a_mat += beta * core
            border += beta * BORDER_NORM * (px @ gs)
        else:
            nn = idx[:, None].astype(float)
            mm = idx[None, :].astype(float)
            qpow = np.stack([xs ** int(q) for q in range(2 * base - 1, 2 * (base + size - 1))])
            muat = qpow @ gs
            a_mat += beta * (nn - mm) / 2.0 * muat[(idx[:, None] + idx[None, :] - 1) - (2 * base - 1)]
    if pair_atoms:
        zs = np.array([z for z, _ in pair_atoms], dtype=complex)
        ws = np.array([w for _, w in pair_atoms], dtype=complex)
        ws = ws * np.exp(-2.0 * np.real(np.array([potential(1.0 / z, s) for z in zs])))
        if fold_t and t.top_index():
            ws = ws * np.exp(2.0 * np.real(np.array([potential(z, t) for z in zs])))
        pz = np.stack([zs ** int(k) for k in idx])
        pzb = np.conj(pz)
        if kind == "GinSE":
            raw = np.einsum("j,j,nj,mj->nm", ws, zs - np.conj(zs), pz, pzb)
            a_mat += alpha * (raw - raw.T) / 2.0
        elif kind == "GinOE":
            raw = np.einsum("j,nj,mj->nm", ws, pz, pzb)
            a_mat += alpha * (raw - raw.T) / 2.0j
        else:
            raise ValueError(f"kind {kind} takes no pair atoms")
    return SkewPair(a_mat, border, index_base=base, provenance=f"atomic:{kind}")


def _atomic_eigensum(kind: str, real_atoms, pair_atoms, n: int, L: int,
                     t: CouplingSeq, s: CouplingSeq, alpha: float,
                     beta: float) -> tuple[complex, float]:
    """Ordered eigenvalue sum over atomic measures, all sectors.

    Returns (value, scale); scale is the sum of term magnitudes, the honest
    yardstick when the signed sum nearly cancels.
    """
    family = "orth" if kind in mom.ORTH_KINDS else "sympl"
    vmult = 2.0 if family == "sympl" else 1.0
    reals = [(float(x), complex(w) * math.exp(vmult * (potential(x, t) - potential(1.0 / x, s))))
             for x, w in (real_atoms or [])]
    pairs = [(complex(z), complex(w) * np.exp(2.0 * np.real(potential(z, t) - potential(1.0 / z, s))))
             for z, w in (pair_atoms or [])]
    total = 0.0 + 0.0j
    scale = 0.0
    if family == "orth":
        pairnorm = PAIR_NORM["GinOE"]
        for k in range(0, n // 2 + 1):
            n_real = n - 2 * k
            wk = _mix_weight(alpha, beta, k, n_real, "orth")
            if wk == 0.0 or k > len(pairs) or n_real > len(reals):
                continue
            for psub in itertools.combinations(range(len(pairs)), k):
                zsel = sorted((pairs[i] for i in psub), key=lambda zw: -zw[0].real)
                for rsub in itertools.combinations(range(len(reals)), n_real):
                    xsel = sorted((reals[i] for i in rsub), key=lambda xw: -xw[0])
                    args = []
                    for z, _ in zsel:
                        args += [z, np.conj(z)]
                    args += [x for x, _ in xsel]
                    args = np.array(args, dtype=complex)
                    vdm = np.prod([args[i] - args[j]
                                   for i in range(len(args)) for j in range(i + 1, len(args))]) \
                        if len(args) > 1 else 1.0
                    wt = np.prod([w * (z * np.conj(z)) ** L for z, w in zsel]) if zsel else 1.0
                    wt = wt * (np.prod([w * x ** L for x, w in xsel]) if xsel else 1.0)
                    term = wk * vdm * wt * pairnorm ** k
                    total += term
                    scale += abs(term)
        return complex(total), scale
    # symplectic family: k quaternion pairs + m doubled line eigenvalues
    for k in range(0, n + 1):
        m = n - k
        wk = _mix_weight(alpha, beta, k, m, "sympl")
        if wk == 0.0 or k > len(pairs) or m > len(reals):
            continue
        for psub in itertools.combinations(range(len(pairs)), k):
            zsel = [pairs[i] for i in psub]
            for rsub in itertools.combinations(range(len(reals)), m):
                xsel = [reals[i] for i in rsub]
                pts = []
                for z, _ in zsel:
                    pts += [(z, 1), (np.conj(z), 1)]
                pts += [(x, 2) for x, _ in xsel]
                vdm = 1.0 + 0.0j
                for i in range(len(pts)):
                    for j in range(i + 1, len(pts)):
                        vdm *= (pts[i][0] - pts[j][0]) ** (pts[i][1] * pts[j][1])
                wt = np.prod([w * (z * np.conj(z)) ** L * PAIR_NORM["GinSE"] * (z - np.conj(z))
                              for z, w in zsel]) if zsel else 1.0
                wt = wt * (np.prod([w * x ** (2 * L) * 0.5 for x, w in xsel]) if xsel else 1.0)
                term = wk * vdm * wt
                total += term
                scale += abs(term)
    return complex(total), scale


def discrete_consistency(kind: str, real_atoms, n: int, L: int, t: CouplingSeq,
                         pair_atoms=None, alpha: float | None = None,
                         beta: float | None = None,
                         series_cutoff: int | None = None,
                         with_scale: bool = False):
    """Exact finite check of the Wick/Pfaffian identity on atomic measures.

    lhs: the ordered eigenvalue sum with t folded into the atom weights.
    rhs: the Schur/Pfaffian series with the same atomic moments, summed in
    s_lambda(t) up to `series_cutoff` (the tail is factorially small), then
    divided by the fixed border constant sqrt(2)^(charge mod 2).

    Equality certifies the moment conventions, the shifted-index bookkeeping
    and the bordered Pfaffians at once.  With `with_scale`, the sum of
    term magnitudes comes back too (the right yardstick near cancellations).
    """
    da, db = mom._DEFAULT_MIX[kind]
    alpha = da if alpha is None else alpha
    beta = db if beta is None else beta
    family = "orth" if kind in mom.ORTH_KINDS else "sympl"
    charge = n if family == "orth" else 2 * n
    n_atoms = len(real_atoms or []) + len(pair_atoms or [])
    if n_atoms < 1 or len(real_atoms or []) > 8 or len(pair_atoms or []) > 8:
        raise ValueError("node count out of range (need 1 to 8 atoms per sector)")
    if n > n_atoms:
        raise ValueError(f"N={n} exceeds the {n_atoms} available atoms")
    s = ZERO_SEQ
    lhs, scale = _atomic_eigensum(kind, real_atoms, pair_atoms, n, L, t, s, alpha, beta)
    base = min(0, L)
    if series_cutoff is None:
        series_cutoff = 18
    size = series_cutoff + charge + L - base + 1
    pair = _atomic_moments(kind, real_atoms, pair_atoms, t, s, alpha, beta, base, size,
                           fold_t=False)
    h = hseq(series_cutoff + charge + 1, t)
    acc = []
    for lam in enumerate_partitions(series_cutoff, charge):
        coeff = abar(shifted_indices(lam, charge), L, pair)
        if coeff != 0:
            acc.append(complex(coeff * schur_from_h(lam, h)))
    rhs = complex(math.fsum(v.real for v in acc), math.fsum(v.imag for v in acc))
    border_norm = BORDER_NORM if charge % 2 else 1.0
    rhs = rhs / border_norm
    if with_scale:
        series_scale = sum(abs(v) for v in acc) / border_norm
        return lhs, rhs, max(scale, series_scale, 1e-300)
    return lhs, rhs
