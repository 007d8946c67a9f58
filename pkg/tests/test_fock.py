import math

import numpy as np
import pytest

from pftau.fock import (FockVector, FockWindow, WindowError, apply_phi, apply_psi,
                        apply_psi_dag, charged_vacuum, exp_pair_vev, vev)
from pftau.skewlin import SkewPair, pfaffian

W = FockWindow(-4, 8)


def rand_vector(rng, window=W, pieces=4):
    vec = FockVector(window, {})
    for _ in range(pieces):
        x = charged_vacuum(0, window)
        for i in rng.integers(window.lo, window.hi - 1, size=3):
            x = apply_psi(int(i), x)
        if not x.is_zero():
            vec.add_into(x.scaled(complex(rng.normal(), rng.normal())))
    return vec


def test_window_validation():
    with pytest.raises(WindowError):
        FockWindow(0, 4)
    with pytest.raises(WindowError):
        charged_vacuum(9, W)
    with pytest.raises(WindowError):
        apply_psi(99, charged_vacuum(0, W))


def test_charged_vacuum_occupations():
    v0 = charged_vacuum(0, W)
    (state,), = [list(v0.amp)]
    assert state == frozenset(range(-4, 0))
    v2 = charged_vacuum(2, W)
    (state2,), = [list(v2.amp)]
    assert state2 == frozenset(range(-4, 0)) | {0, 1}
    vm = charged_vacuum(-2, W)
    (statem,), = [list(vm.amp)]
    assert statem == frozenset(range(-4, -2))


def test_vacuum_orthonormality():
    for l1 in range(-2, 4):
        for l2 in range(-2, 4):
            assert vev(l1, [], l2, W) == (1.0 if l1 == l2 else 0.0)


def test_vacuum_annihilation_conditions():
    v0 = charged_vacuum(0, W)
    for i in range(W.lo, 0):
        assert apply_psi(i, v0).is_zero()
    for i in range(0, W.hi):
        assert apply_psi_dag(i, v0).is_zero()


def test_anticommutators_exact():
    rng = np.random.default_rng(2)
    vec = rand_vector(rng)
    for i, j in [(-2, -2), (1, 1), (2, 5), (-1, 3), (0, -3)]:
        both = apply_psi(i, apply_psi_dag(j, vec)).add_into(apply_psi_dag(j, apply_psi(i, vec)))
        for state in set(both.amp) | set(vec.amp):
            want = vec.amp.get(state, 0.0) if i == j else 0.0
            assert both.amp.get(state, 0.0) == want
        pp = apply_psi(i, apply_psi(j, vec)).add_into(apply_psi(j, apply_psi(i, vec)))
        assert pp.is_zero() or max(abs(v) for v in pp.amp.values()) == 0


def test_phi_squares_to_half_and_anticommutes():
    rng = np.random.default_rng(3)
    vec = rand_vector(rng)
    twice = apply_phi(apply_phi(vec))
    for state, c in vec.amp.items():
        assert twice.amp[state] == pytest.approx(0.5 * c)
    for i in (-2, 0, 3):
        anti = apply_phi(apply_psi(i, vec)).add_into(apply_psi(i, apply_phi(vec)))
        assert all(abs(v) < 1e-15 for v in anti.amp.values())


def test_phi_vacuum_expectation():
    for L in range(-3, 5):
        assert vev(L, [("phi",)], L, W) == pytest.approx((-1) ** L / math.sqrt(2))


def test_single_field_gives_power():
    z = 0.7 - 0.2j
    for L in (0, 1, 2, -1):
        assert vev(L + 1, [("psi_z", z)], L, W) == pytest.approx(z ** L)


def test_vandermonde_identity():
    rng = np.random.default_rng(5)
    for n, L in [(2, 0), (2, 1), (2, 2), (3, 0), (3, 1), (3, 2)]:
        zs = 0.8 * (rng.normal(size=n) + 1j * rng.normal(size=n))
        got = vev(n + L, [("psi_z", z) for z in zs], L, W)
        vdm = np.prod([zs[i] - zs[j] for i in range(n) for j in range(i + 1, n)])
        want = np.prod(zs ** L) * vdm
        assert got == pytest.approx(want, rel=1e-12)


def test_charge_imbalance_exactly_zero():
    assert vev(2, [("psi_z", 0.3)], 0, W) == 0.0
    assert vev(0, [("phi",), ("psi", 1)], 0, W) == 0.0


def test_wick_pfaffian_even_and_odd():
    rng = np.random.default_rng(8)

    def rand_word():
        v = {i: complex(rng.normal(), rng.normal()) for i in range(-3, 6)}
        u = {i: complex(rng.normal(), rng.normal()) for i in range(-3, 6)}
        return ("linear", v, u)

    for n in (4, 6):
        words = [rand_word() for _ in range(n)]
        direct = vev(1, words, 1, W)
        mat = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(i + 1, n):
                mat[i, j] = vev(1, [words[i], words[j]], 1, W)
                mat[j, i] = -mat[i, j]
        assert direct == pytest.approx(pfaffian(mat), rel=1e-11)
    for n in (3, 5):
        words = [rand_word() for _ in range(n)]
        assert vev(1, words, 1, W) == 0.0


def test_window_independence_bit_identical():
    z1, z2 = 0.6 + 0.3j, -0.4 + 0.9j
    small = vev(2, [("psi_z", z1), ("psi_z", z2)], 0, FockWindow(-3, 5))
    large = vev(2, [("psi_z", z1), ("psi_z", z2)], 0, FockWindow(-6, 9))
    assert small == large   # exact equality, not approximate


def test_psi_dag_field():
    # <L-1| psi^+(p) |L> = sum_i p^{-i-1} <L-1|psi^+_i|L> = p^{-L} picks i = L-1
    p = 1.7
    for L in (0, 1, 2):
        got = vev(L - 1, [("psi_dag_z", p)], L, W)
        assert got == pytest.approx(p ** (-L))


def test_exp_pair_vev_matches_word_expansion():
    rng = np.random.default_rng(13)
    m = 6
    raw = rng.normal(size=(m, m))
    amat = raw - raw.T
    border = rng.normal(size=m)
    pair = SkewPair(amat.astype(complex), border.astype(complex))
    # charge 2: exp(Phi) contributes 1 + Phi + Phi^2/2 ... explicitly
    direct = exp_pair_vev(2, pair, 0, W)
    one = vev(2, [("pair", pair)], 0, W)
    two = vev(2, [("pair", pair), ("pair", pair)], 0, W) / 2
    assert direct == pytest.approx(one + two, rel=1e-12)
