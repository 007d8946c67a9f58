import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pftau.moments import EnsembleSpec
from pftau.oracle import (det_average_lhs, discrete_consistency, eigen_integral,
                          ginue_two_point, haar_expectation_mc, haar_orthogonal,
                          haar_symplectic, pair_moment_table, poly_mul, poly_linear,
                          vandermonde_poly)
from pftau.partitions import Partition
from pftau.symfun import CouplingSeq, ZERO_SEQ, miwa_shift

SQRT_PI = math.sqrt(math.pi)


def test_eigen_se_n1_gaussian():
    res = eigen_integral(EnsembleSpec("SE", 1))
    # one eigenvalue, Delta^4 = 1, with the 1/2-per-line normalization
    assert res.value.real == pytest.approx(SQRT_PI / 2, rel=1e-10)
    assert res.method == "quadrature"


def test_eigen_ginoe_n1_real_sector_only():
    res = eigen_integral(EnsembleSpec("GinOE", 1))
    assert res.value.real == pytest.approx(math.sqrt(2 * math.pi), rel=1e-10)


def test_eigen_se_ratio_closed_form():
    t = CouplingSeq.of(0.3)
    r = eigen_integral(EnsembleSpec("SE", 1, 0, t)).value / eigen_integral(EnsembleSpec("SE", 1)).value
    assert r.real == pytest.approx(math.exp(0.09), rel=1e-9)


def test_eigen_size_limit():
    with pytest.raises(ValueError, match="N <= 3"):
        eigen_integral(EnsembleSpec("OE", 4))


def test_ordered_symmetrization_identity():
    """N! * ordered integral == full-space |Delta|-weighted integral.

    The full-space side is the gamma-product closed form of the
    |Delta|^(2 gamma)-weighted Gaussian integral at gamma = 1/2.
    """
    for n in (2, 3):
        ordered = eigen_integral(EnsembleSpec("OE", n)).value.real
        full = (2 * math.pi) ** (n / 2)
        for j in range(1, n + 1):
            full *= math.gamma(1 + j / 2) / math.gamma(1.5)
        assert ordered == pytest.approx(full / math.factorial(n), rel=1e-8)


def test_det_average_empty_points_is_eigen():
    spec = EnsembleSpec("SE", 1, 0, CouplingSeq.of(0.2))
    assert det_average_lhs(spec, ()).value == pytest.approx(eigen_integral(spec).value)


def test_det_average_equals_miwa_shift():
    spec = EnsembleSpec("SE", 1, 0, CouplingSeq.of(0.1), CouplingSeq.of(0.0, 0.4))
    da = det_average_lhs(spec, (0.1,), insert_power=1)
    tsh = miwa_shift(spec.t, [(-1.0, 0.1)], 0.5, order=12)
    ei = eigen_integral(EnsembleSpec("SE", 1, 0, tsh, spec.s))
    assert da.value == pytest.approx(ei.value, rel=1e-8)


def test_det_average_equals_miwa_shift_oe():
    spec = EnsembleSpec("OE", 2, 0, CouplingSeq.of(0.1))
    da = det_average_lhs(spec, (0.1,), insert_power=1)
    tsh = miwa_shift(spec.t, [(-1.0, 0.1)], 1.0, order=14)
    ei = eigen_integral(EnsembleSpec("OE", 2, 0, tsh))
    assert da.value == pytest.approx(ei.value, rel=1e-7)


def test_haar_orthogonal_statistics():
    rng = np.random.default_rng(0)
    q = haar_orthogonal(rng, 3, batch=4)
    for b in range(4):
        assert np.allclose(q[b] @ q[b].T, np.eye(3), atol=1e-12)


def test_haar_symplectic_structure():
    rng = np.random.default_rng(1)
    q = haar_symplectic(rng, 4, batch=3)
    jmat = np.zeros((4, 4))
    for i in range(2):
        jmat[2 * i, 2 * i + 1] = 1.0
        jmat[2 * i + 1, 2 * i] = -1.0
    for b in range(3):
        m = q[b]
        assert np.allclose(m.conj().T @ m, np.eye(4), atol=1e-12)
        assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(m.T @ jmat @ m, jmat, atol=1e-10)
        eig = np.linalg.eigvals(m)
        assert np.allclose(np.sort(np.abs(eig)), 1.0, atol=1e-10)


def test_haar_predicates():
    r = haar_expectation_mc(("orthogonal", 3), ("schur", Partition((2,))), 40000, 42)
    assert abs(r.value - 1.0) <= 4 * r.error_estimate
    r = haar_expectation_mc(("orthogonal", 3), ("schur", Partition((1,))), 40000, 43)
    assert abs(r.value) <= 4 * r.error_estimate
    r = haar_expectation_mc(("symplectic", 2), ("schur", Partition((1, 1))), 40000, 44)
    assert abs(r.value - 1.0) <= max(4 * r.error_estimate, 1e-12)


def test_haar_determinism_and_variance_scaling():
    a = haar_expectation_mc(("orthogonal", 3), ("schur", Partition((2,))), 5000, 7)
    b = haar_expectation_mc(("orthogonal", 3), ("schur", Partition((2,))), 5000, 7)
    assert a.value == b.value and a.error_estimate == b.error_estimate
    small = haar_expectation_mc(("orthogonal", 3), ("exp_trace", CouplingSeq.of(0.2)), 1000, 11)
    large = haar_expectation_mc(("orthogonal", 3), ("exp_trace", CouplingSeq.of(0.2)), 100000, 11)
    shrink = small.error_estimate / large.error_estimate
    assert 10.0 / 2 <= shrink <= 10.0 * 2   # samples^(-1/2) within a factor 2


def test_discrete_single_atom_border():
    # one-point measure: lhs = a^L w e^{V(a,t)}, rhs = the border term
    t = CouplingSeq.of(0.2)
    for L in (0, 1, 2):
        lhs, rhs = discrete_consistency("OE", [(0.8, 1.3)], 1, L, t)
        assert lhs == pytest.approx(1.3 * 0.8 ** L * math.exp(0.2 * 0.8))
        assert rhs == pytest.approx(lhs, rel=1e-12)


def test_discrete_atom_count_guards():
    t = CouplingSeq.of(0.1)
    with pytest.raises(ValueError, match="node count"):
        discrete_consistency("OE", [], 1, 0, t)
    with pytest.raises(ValueError, match="node count"):
        discrete_consistency("OE", [(0.1 * k, 1.0) for k in range(1, 11)], 2, 0, t)
    with pytest.raises(ValueError, match="exceeds"):
        discrete_consistency("OE", [(0.5, 1.0), (-0.5, 1.0)], 3, 0, t)


def test_discrete_oe_pair_and_triple():
    t = CouplingSeq.of(0.1)
    atoms = [(1.0, 1.0), (-1.0, 1.0)]
    lhs, rhs = discrete_consistency("OE", atoms, 2, 0, t)
    assert rhs == pytest.approx(lhs, rel=1e-12)
    atoms4 = [(-1.1, 0.7), (-0.3, 1.2), (0.4, 0.9), (1.2, 0.5)]
    lhs, rhs, scale = discrete_consistency("OE", atoms4, 3, 0, t, with_scale=True)
    assert abs(lhs - rhs) <= 1e-10 * scale


def test_discrete_all_kinds_randomized():
    rng = np.random.default_rng(99)
    t = CouplingSeq.of(0.07, -0.03)
    for kind in ("OE", "SE", "GinOE", "GinSE"):
        for trial in range(12):
            n = 1 + trial % 3
            L = int(rng.integers(0, 3))
            xs = np.linspace(-1.3, 1.2, 5) + rng.uniform(-0.04, 0.04, size=5)
            reals = list(zip(xs.tolist(), rng.uniform(0.3, 1.2, size=5).tolist()))
            pairs = None
            if kind in ("GinOE", "GinSE"):
                res = np.linspace(-1.0, 1.0, 4) + rng.uniform(-0.04, 0.04, size=4)
                pairs = [(complex(a, b), w) for a, b, w in
                         zip(res, rng.uniform(0.2, 1.0, size=4), rng.uniform(0.3, 1.2, size=4))]
            lhs, rhs, scale = discrete_consistency(kind, reals, n, L, t, pair_atoms=pairs,
                                                   with_scale=True)
            assert abs(lhs - rhs) <= 1e-9 * scale, (kind, n, L)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000),
       st.sampled_from(["OE", "SE", "GinOE", "GinSE"]),
       st.integers(1, 3), st.integers(0, 2))
def test_discrete_identity_property(seed, kind, n, L):
    rng = np.random.default_rng(seed)
    xs = np.linspace(-1.3, 1.2, 5) + rng.uniform(-0.05, 0.05, size=5)
    reals = list(zip(xs.tolist(), rng.uniform(0.3, 1.2, size=5).tolist()))
    pairs = None
    if kind in ("GinOE", "GinSE"):
        res = np.linspace(-1.0, 1.0, 4) + rng.uniform(-0.05, 0.05, size=4)
        pairs = [(complex(a, b), w) for a, b, w in
                 zip(res, rng.uniform(0.2, 1.0, size=4), rng.uniform(0.3, 1.2, size=4))]
    t = CouplingSeq.of(float(rng.uniform(-0.1, 0.1)), float(rng.uniform(-0.05, 0.05)))
    lhs, rhs, scale = discrete_consistency(kind, reals, n, L, t, pair_atoms=pairs,
                                           with_scale=True)
    assert abs(lhs - rhs) <= 1e-9 * scale


def test_discrete_matches_fock_vev():
    """Third route: the finite-window expectation of exp(Phi) agrees too.

    With the stored border convention (+sqrt(2) times the plain moments),
    <N+L| exp(Phi) |L> equals the eigenvalue sum times (-1)^{(L+1)(N mod 2)}:
    the sqrt(2) of the border cancels against the phi-mode normalization and
    the remaining sign is the phi parity of the charged vacua.
    """
    from pftau.fock import FockWindow, exp_pair_vev
    from pftau.oracle import _atomic_moments
    t = CouplingSeq.of(0.15)
    atoms = [(0.9, 1.1), (-0.5, 0.8), (0.2, 1.3)]
    for n in (1, 2, 3):
        for L in (0, 1, 2):
            lhs, rhs = discrete_consistency("OE", atoms, n, L, t)
            pair = _atomic_moments("OE", atoms, None, t, ZERO_SEQ, 0.0, 1.0,
                                   base=0, size=n + L + 2, fold_t=True)
            window = FockWindow(-2, n + L + 3)
            vev_val = exp_pair_vev(n + L, pair, L, window)
            sign = (-1.0) ** ((L + 1) * (n % 2))
            assert vev_val == pytest.approx(sign * lhs, rel=1e-10), (n, L)


def test_ginue_two_point_matches_determinant():
    spec = EnsembleSpec("GinUE", 2, 0, CouplingSeq.of(0.2), t_bar=CouplingSeq.of(0.2))
    from pftau.moments import complex_bimoment_matrix
    m = complex_bimoment_matrix(spec, 2)
    direct = ginue_two_point(spec)
    assert direct.value == pytest.approx(2.0 * np.linalg.det(m), rel=1e-6)
    with pytest.raises(ValueError):
        ginue_two_point(EnsembleSpec("GinUE", 3))


def test_poly_helpers():
    p = poly_linear(2, 0, 1)
    sq = poly_mul(p, p)
    assert sq == {(2, 0): 1.0, (1, 1): -2.0, (0, 2): 1.0}
    vdm = vandermonde_poly(2)
    assert vdm == {(1, 0): 1.0, (0, 1): -1.0}


def test_negative_det_power_series_vs_oracle():
    """L = -1 exercises the negative-index moment table; the undeformed base
    vanishes by parity for the single-eigenvalue case, so ratios anchor at a
    small nonzero coupling."""
    from pftau.tauseries import tau_series
    s = CouplingSeq.of(0.0, 0.4)
    t = CouplingSeq.of(0.2)
    tb = CouplingSeq.of(0.07)
    for kind, n in (("SE", 1), ("OE", 1), ("OE", 2)):
        spec = EnsembleSpec(kind, n, -1, t, s)
        tau = tau_series(spec, 12)
        r_series = tau.evaluate(t) / tau.evaluate(tb)
        r_oracle = (eigen_integral(spec).value
                    / eigen_integral(EnsembleSpec(kind, n, -1, tb, s)).value)
        assert r_series == pytest.approx(r_oracle, rel=1e-9), (kind, n)


def test_ginue_unbalanced_det_powers():
    from pftau.moments import complex_bimoment_matrix
    gu = EnsembleSpec("GinUE", 2, 1, CouplingSeq.of(0.2), t_bar=CouplingSeq.of(0.2))
    gub = EnsembleSpec("GinUE", 2, 1, CouplingSeq.of(0.07), t_bar=CouplingSeq.of(0.07))
    r_det = (np.linalg.det(complex_bimoment_matrix(gu, 2))
             / np.linalg.det(complex_bimoment_matrix(gub, 2)))
    r_direct = ginue_two_point(gu).value / ginue_two_point(gub).value
    assert r_det == pytest.approx(r_direct, rel=1e-6)


def test_three_eigenvalue_continuum_ratios():
    """The N=3 engines (mixed sector with border, six-slot expansion) track
    the series at nonzero coupling."""
    from pftau.tauseries import tau_series
    for kind in ("GinOE", "GinSE"):
        t = CouplingSeq.of(0.2)
        tau = tau_series(EnsembleSpec(kind, 3, 0, t), 12)
        r_series = tau.evaluate(t) / tau.evaluate(ZERO_SEQ)
        r_oracle = (eigen_integral(EnsembleSpec(kind, 3, 0, t)).value
                    / eigen_integral(EnsembleSpec(kind, 3, 0)).value)
        assert r_series == pytest.approx(r_oracle, rel=1e-8), kind


def test_pair_moment_table_hermitian_pairing():
    t = pair_moment_table("GinSE", ZERO_SEQ, ZERO_SEQ, 4, level=0)
    # T[a,b] with the (z - zbar)-free weight obeys T[b,a] = conj(T[a,b])
    for a in range(5):
        for b in range(5):
            assert t[b, a] == pytest.approx(np.conj(t[a, b]), abs=1e-10 * np.max(np.abs(t)))
