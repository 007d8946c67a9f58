"""Deterministic quadrature backends and the deformation-parameter validator.

Everything here is panel Gauss-Legendre: grids are pure functions of their
descriptor, refinement doubles the panel count, and reductions run in a
fixed order, so results are reproducible bit for bit.  No Monte Carlo.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.special import erfc as _erfc_arr

from .symfun import CouplingSeq

erfc_vec = _erfc_arr


def erfc(x: float) -> float:
    """Complementary error function, 2/sqrt(pi) * int_x^inf exp(-u^2) du."""
    return math.erfc(x)


class QuadratureError(RuntimeError):
    def __init__(self, message: str, best: complex = 0.0, residual: float = math.inf):
        super().__init__(message)
        self.best = best
        self.residual = residual


class ValidationError(ValueError):
    pass


@lru_cache(maxsize=32)
def _gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = npleg.leggauss(order)
    return x, w


@lru_cache(maxsize=32)
def _cumulative_matrix(order: int) -> np.ndarray:
    """Q with (Q @ v)[j] = int_{-1}^{x_j} p(x) dx for the GL interpolant of v."""
    x, _ = _gl_rule(order)
    vand = npleg.legvander(x, order - 1)
    basis_coeffs = np.linalg.inv(vand)            # column i: Legendre coeffs of ell_i
    ci = npleg.legint(basis_coeffs, axis=0)
    at_nodes = npleg.legval(x, ci)                # shape (basis, node)
    at_left = npleg.legval(-1.0, ci)              # shape (basis,)
    return (at_nodes - at_left[:, None]).T        # shape (node, basis)


def _panel_nodes(panels: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _gl_rule(order)
    a = panels[:, 0][:, None]
    b = panels[:, 1][:, None]
    half = (b - a) / 2.0
    nodes = (a + b) / 2.0 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


class LinePanels:
    """Composite GL panels on a line, with spectral cumulative integration."""

    def __init__(self, breakpoints: np.ndarray, order: int = 24):
        bp = np.asarray(breakpoints, dtype=float)
        if bp.ndim != 1 or len(bp) < 2 or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        self.breakpoints = bp
        self.order = order
        self.panels = np.column_stack([bp[:-1], bp[1:]])
        self.nodes, self.weights = _panel_nodes(self.panels, order)

    @property
    def n_panels(self) -> int:
        return len(self.panels)

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(self.weights * values))

    def cumulative(self, values: np.ndarray) -> np.ndarray:
        """int_{x_min}^{x} of the panelwise interpolant, at every node."""
        v = np.asarray(values).reshape(self.n_panels, self.order)
        half = (self.panels[:, 1] - self.panels[:, 0]) / 2.0
        q = _cumulative_matrix(self.order)
        local = (v @ q.T) * half[:, None]
        _, wstd = _gl_rule(self.order)
        totals = (v * wstd[None, :]).sum(axis=1) * half
        offsets = np.concatenate([[0.0], np.cumsum(totals)[:-1]])
        return (local + offsets[:, None]).ravel()

    def refined(self) -> "LinePanels":
        bp = self.breakpoints
        mid = (bp[:-1] + bp[1:]) / 2.0
        new = np.sort(np.concatenate([bp, mid]))
        return LinePanels(new, self.order)


def _geometric_breakpoints(inner: float, outer: float, per_octave: int = 1) -> np.ndarray:
    n = max(int(math.ceil(math.log2(outer / inner))) * per_octave, 1)
    return inner * (outer / inner) ** (np.arange(n + 1) / n)


def real_line_breakpoints(halfwidth: float, n_center: int = 12,
                          inner_cut: float | None = None, level: int = 0) -> np.ndarray:
    """Panel breakpoints on [-R, R]; inner_cut clusters panels toward 0."""
    scale = 2 ** level
    if inner_cut is None:
        return np.linspace(-halfwidth, halfwidth, n_center * scale + 1)
    pos = _geometric_breakpoints(inner_cut, halfwidth, per_octave=scale)
    return np.concatenate([-pos[::-1], pos])


@dataclass(frozen=True)
class QuadratureGrid:
    """Deterministic quadrature rule; `descriptor` rebuilds it at any level."""

    domain: str                       # "real-line" | "half-plane" | "full-plane"
    nodes: np.ndarray
    weights: np.ndarray
    level: int
    descriptor: tuple

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be strictly positive")
        if self.domain == "half-plane" and np.any(np.imag(self.nodes) <= 0):
            raise ValueError("half-plane nodes must have positive imaginary part")


def real_line_grid(halfwidth: float, n_center: int = 12, order: int = 24,
                   inner_cut: float | None = None, level: int = 0) -> QuadratureGrid:
    bp = real_line_breakpoints(halfwidth, n_center, inner_cut, level)
    panels = np.column_stack([bp[:-1], bp[1:]])
    nodes, weights = _panel_nodes(panels, order)
    return QuadratureGrid("real-line", nodes, weights, level,
                          ("real-line", halfwidth, n_center, order, inner_cut))


def _polar_grid(domain: str, theta_max: float, radius: float, n_r: int, r_order: int,
                n_theta: int, t_order: int, level: int) -> QuadratureGrid:
    scale = 2 ** level
    rb = np.linspace(0.0, radius, n_r * scale + 1)
    r_nodes, r_w = _panel_nodes(np.column_stack([rb[:-1], rb[1:]]), r_order)
    tb = np.linspace(0.0, theta_max, n_theta * scale + 1)
    t_nodes, t_w = _panel_nodes(np.column_stack([tb[:-1], tb[1:]]), t_order)
    z = r_nodes[:, None] * np.exp(1j * t_nodes[None, :])
    w = (r_w * r_nodes)[:, None] * t_w[None, :]
    return QuadratureGrid(domain, z.ravel(), w.ravel(), level,
                          (domain, radius, n_r, r_order, n_theta, t_order))


def half_plane_grid(radius: float, n_r: int = 8, r_order: int = 20,
                    n_theta: int = 6, t_order: int = 24, level: int = 0) -> QuadratureGrid:
    """Polar tensor grid over the upper half-plane; d^2 z = dRe z dIm z."""
    return _polar_grid("half-plane", math.pi, radius, n_r, r_order, n_theta, t_order, level)


def full_plane_grid(radius: float, n_r: int = 8, r_order: int = 20,
                    n_theta: int = 8, t_order: int = 24, level: int = 0) -> QuadratureGrid:
    return _polar_grid("full-plane", 2 * math.pi, radius, n_r, r_order, n_theta, t_order, level)


def refine(grid: QuadratureGrid) -> QuadratureGrid:
    d = grid.descriptor
    lvl = grid.level + 1
    if d[0] == "real-line":
        return real_line_grid(d[1], d[2], d[3], d[4], level=lvl)
    if d[0] in ("half-plane", "full-plane"):
        builder = half_plane_grid if d[0] == "half-plane" else full_plane_grid
        return builder(d[1], d[2], d[3], d[4], d[5], level=lvl)
    raise ValueError(f"cannot refine grid with descriptor {d}")


def quad_sum(f: Callable[[np.ndarray], np.ndarray], grid: QuadratureGrid) -> complex:
    """Single-grid weighted sum, reduced in fixed node order."""
    vals = np.asarray(f(grid.nodes))
    return complex(np.sum(grid.weights * vals))


@dataclass
class IntegralResult:
    value: complex
    error: float
    level: int

    def __complex__(self) -> complex:
        return complex(self.value)


def _integrate_refining(f, grid: QuadratureGrid, rel_tol: float, max_refine: int,
                        abs_floor: float) -> IntegralResult:
    prev = quad_sum(f, grid)
    for _ in range(max_refine):
        grid = refine(grid)
        cur = quad_sum(f, grid)
        delta = abs(cur - prev)
        if delta <= rel_tol * max(abs(cur), abs_floor):
            return IntegralResult(cur, delta, grid.level)
        prev = cur
    raise QuadratureError(
        f"no convergence after {max_refine} refinements (residual {delta:.3e})",
        best=cur, residual=delta)


def integrate_real(f, grid: QuadratureGrid, rel_tol: float = 1e-10,
                   max_refine: int = 6, abs_floor: float = 1e-300) -> IntegralResult:
    if grid.domain != "real-line":
        raise ValueError("integrate_real needs a real-line grid")
    return _integrate_refining(f, grid, rel_tol, max_refine, abs_floor)


def integrate_halfplane(f, grid: QuadratureGrid, rel_tol: float = 1e-9,
                        max_refine: int = 5, abs_floor: float = 1e-300) -> IntegralResult:
    if grid.domain not in ("half-plane", "full-plane"):
        raise ValueError("integrate_halfplane needs a half- or full-plane grid")
    return _integrate_refining(f, grid, rel_tol, max_refine, abs_floor)


def gaussian_halfwidth(gauss: float, lin: float = 0.0, maxdeg: int = 0,
                       tail: float = 42.0) -> float:
    """Cutoff R with gauss*R^2 - |lin|*R - maxdeg*log(1+R) >= tail."""
    if gauss <= 0:
        raise ValueError("need a positive Gaussian coefficient")
    r = max(2.0, math.sqrt(tail / gauss))
    for _ in range(200):
        if gauss * r * r - abs(lin) * r - maxdeg * math.log1p(r) >= tail:
            return r
        r *= 1.125
    raise ValueError("runaway support radius")


@dataclass(frozen=True)
class Validation:
    ok: bool
    reason: str | None = None

    def require(self) -> None:
        if not self.ok:
            raise ValidationError(self.reason or "rejected deformation parameters")


REAL_LINE_KINDS = {"OE", "SE"}
KNOWN_KINDS = {"OE", "SE", "GinOE", "GinSE", "GinUE"}


def _tail_growth_check(t: CouplingSeq, complex_sector: bool, gauss0: float,
                       mult: float) -> str | None:
    if not t.is_real():
        return "deformation couplings must be real"
    k = t.top_index()
    if k == 0 or k == 1:
        return None
    t2 = mult * float(t.entry(2).real)
    # Re(t_k z^k) grows like +|t_k| r^k along some ray of a complex sector,
    # so there both signs of t_2 eat into the Gaussian.
    gauss_eff = gauss0 - (abs(t2) if complex_sector else max(t2, 0.0))
    if gauss_eff <= 0.0:
        return f"quadratic coupling t_2={t.entry(2)} overwhelms the Gaussian"
    if k == 2:
        return None
    # Degrees >= 3 are admissible in two ways: an even negative top degree
    # decays on its own on the real line, and otherwise the growing part
    # must stay far below the Gaussian out to the quadrature support
    # (which admits the small tails of truncated Miwa shifts).
    risky = []
    for n in range(3, k + 1):
        tn = float(t.entry(n).real)
        if tn == 0.0:
            continue
        if not complex_sector and n % 2 == 0 and tn < 0.0:
            continue
        risky.append(n)
    if not risky:
        return None
    radius = gaussian_halfwidth(gauss_eff, mult * abs(float(t.entry(1).real)), 6)
    growth = sum(mult * abs(float(t.entry(n).real)) * radius ** n for n in risky)
    if growth <= 0.1 * gauss_eff * radius * radius:
        return None
    kk = max(risky)
    if complex_sector:
        return f"degree-{kk} coupling outruns the Gaussian on some ray of the complex sector"
    if kk % 2 == 1:
        return f"odd top degree {kk} grows at +infinity"
    return f"positive top degree {kk} grows at infinity"


def _origin_check(s: CouplingSeq, L: int, complex_sector: bool) -> str | None:
    if not s.is_real():
        return "deformation couplings must be real"
    k = s.top_index()
    if complex_sector and k != 0:
        return ("s-deformation diverges near 0 along some phase ray of the "
                "complex sector; only s = 0 is admissible there")
    if k == 0:
        if L < 0:
            return f"L={L} puts a pole at the origin and s = 0 cannot damp it"
        return None
    if k % 2 == 1:
        return f"odd top s-index {k} blows up on one side of the origin"
    if float(s.entry(k).real) <= 0:
        return f"nonpositive top s-coefficient s_{k} blows up at the origin"
    return None


def convergence_validate(kind: str, t: CouplingSeq, s: CouplingSeq, L: int,
                         alpha: float | None = None) -> Validation:
    """Sufficient (not necessary) decay test for the ensemble integrals.

    Checks the leading exponent at infinity against the Gaussian, the
    behaviour at the origin produced by the s-couplings and the
    determinant power, and refuses any s-deformation of a complex sector.
    """
    if kind not in KNOWN_KINDS:
        return Validation(False, f"unknown ensemble kind {kind!r}")
    complex_sector = kind in ("GinSE", "GinUE") or (kind == "GinOE" and alpha != 0)
    mult = 2.0 if kind in ("SE", "GinSE") else 1.0
    gauss0 = 1.0 if kind in ("SE", "GinSE", "GinUE") else 0.5
    reason = _tail_growth_check(t, complex_sector, 1.0 if complex_sector else gauss0,
                                2.0 if complex_sector else mult)
    if reason is None:
        reason = _origin_check(s, L, complex_sector)
    if reason is None and kind == "GinOE" and alpha != 0:
        # the real sector of the mixed ensemble keeps its own constraints
        reason = _tail_growth_check(t, False, 0.5, 1.0) or _origin_check(s, L, False)
    return Validation(reason is None, reason)
