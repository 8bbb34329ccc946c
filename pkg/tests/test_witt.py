import math
from fractions import Fraction as F

import numpy as np
import pytest

from circlecalc import measures as M
from circlecalc import premeasure as P
from circlecalc import witt as W
from circlecalc.errors import ValidationError
from circlecalc.series import FLOAT, TaylorSeries, exp_series

K = 24


def poly(*c, K=K):
    return W.WittVec(TaylorSeries(list(c), order=K))


def test_add_neg():
    rng = np.random.default_rng(0)
    P_ = W.random_witt(rng, K)
    assert P_ + W.one(K) == P_
    assert W.teichmuller(2, K) + W.teichmuller(F(1, 3), K) == poly(1, F(-7, 3), F(2, 3))
    assert P_ + (-P_) == W.one(K)
    with pytest.raises(ValidationError):
        W.WittVec(TaylorSeries([2, 1]))


def test_ghost_examples():
    a = F(2, 3)
    # oracle: -z P'/P for P = 1 - a z is sum a^n z^n by series division
    assert W.ghost(W.teichmuller(a, K)) == [a ** n for n in range(1, K + 1)]
    assert W.ghost(W.one(K)) == [0] * K
    rng = np.random.default_rng(1)
    for _ in range(10):
        P_ = W.random_witt(rng, K)
        assert W.unghost(W.ghost(P_)) == P_
        w = [F(int(x), 3) for x in rng.integers(-5, 6, K)]
        assert W.ghost(W.unghost(w)) == w


def test_multiplication_examples():
    a, b = F(3, 2), F(-1, 5)
    assert W.teichmuller(a, K) * W.teichmuller(b, K) == W.teichmuller(a * b, K)
    rng = np.random.default_rng(2)
    P_ = W.random_witt(rng, K)
    assert W.teichmuller(a, K) * P_ == W.rotate(P_, a)
    assert W.teichmuller(1, K) * P_ == P_
    assert W.teichmuller(0, K) == W.one(K)
    assert W.n_fold(W.teichmuller(a, K), 3) == W.WittVec(TaylorSeries([1, -a], order=K) * TaylorSeries([1, -a], order=K) * TaylorSeries([1, -a], order=K))


def test_frobenius_verschiebung_examples():
    a = F(2, 5)
    for N in (2, 3):
        assert W.frobenius(W.teichmuller(a, K), N) == W.teichmuller(a ** N, K // N)
    assert W.verschiebung(W.teichmuller(a, K), 2) == poly(1, 0, -a)
    rng = np.random.default_rng(3)
    P_ = W.random_witt(rng, K)
    g = W.ghost(P_)
    for N in (2, 3, 4):
        gv = W.ghost(W.verschiebung(P_, N))
        assert gv == [N * g[m // N - 1] if m % N == 0 else 0 for m in range(1, K + 1)]
        gf = W.ghost(W.frobenius(P_, N))
        assert gf == [g[m * N - 1] for m in range(1, K // N + 1)]


def test_ring_axioms_small():
    rep = W.ring_axioms_check(n_vectors=12, K=16, seed=5)
    assert rep["pass"], rep["failures"]


def test_artin_hasse():
    E2 = W.artin_hasse(2, 4)
    assert E2.series == TaylorSeries([1, 1, 1, F(2, 3), F(2, 3)])
    exp_z = exp_series(TaylorSeries([0, 1], order=10))
    for N in (3, 5, 7):
        E = W.artin_hasse(N, 10)
        assert all(E.series[n] == exp_z[n] for n in range(N))
    ES = W.artin_hasse_S((2, 3), 12)
    c = [F(0)] * 13
    for m in (1, 2, 3, 4, 6, 8, 9, 12):
        c[m] = F(1, m)
    assert ES.series == exp_series(TaylorSeries(c))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_p_integrality(p):
    assert W.p_integral_check(W.artin_hasse(p, 40), p)["pass"]


def test_p_integrality_failure():
    half = W.WittVec(exp_series(TaylorSeries([0, F(1, 2)], order=6)))
    rep = W.p_integral_check(half, 2)
    assert not rep["pass"] and rep["first_failure"] == 1
    # 1/8 at z^2
    assert half.series[2] == F(1, 8)
    assert not W.p_integral_check(W.WittVec(exp_series(TaylorSeries([0, 1], order=40))), 2)["pass"]


def test_w_of_premeasure():
    for zeta in (F(1, 4), F(1, 2), F(0)):
        w = W.w_of_premeasure(M.Atom(zeta), K)
        inv = complex(np.exp(-2j * np.pi * float(zeta)))
        assert w.to_float().equals(W.teichmuller(inv, K), 1e-14)
    assert W.w_of_premeasure(M.Atom(F(1, 4)), K).kind == "rational"
    for N in (2, 3):
        w = W.w_of_premeasure(P.artin_hasse_mass(N), 32)
        assert w.to_float().equals(W.artin_hasse(N, 32).to_float(), 1e-12)
        c = P.distribution_coefficients(P.artin_hasse_mass(N), 32)
        assert np.max(np.abs(np.array(W.ghost(w)) - c[1:])) < 1e-12
    zero = W.w_of_premeasure(P.MassFunction(), K)
    assert zero.equals(W.one(K, FLOAT))


def test_correspondences():
    assert W.correspondence_suite(M.Atom(F(1, 7)), 2)["pass"]
    assert W.correspondence_suite(M.Atom(F(2, 9), F(1, 3)) + M.Haar(F(1, 2)), 3)["pass"]
    orbit = M.orbit_measure(2, F(1, 7))
    rep = W.correspondence_suite(orbit, 2)
    assert rep["pass"]
    w = W.w_of_premeasure(orbit, K)
    assert W.frobenius(w, 2).equals(w.truncate(K // 2))
    haar = W.w_of_premeasure(M.Haar(1), K)
    assert haar == W.one(K)


def test_idempotency_resolution():
    rep = W.idempotency_resolution(2, 16)
    assert rep["resolved"]
    assert rep["idempotent"] in ("E_N", "-E_N")
    E = W.artin_hasse(3, 18)
    g = W.ghost(E)
    sq = W.ghost(E * E)
    assert sq == [x * x for x in g]


def test_pretty_and_json():
    E = W.artin_hasse(2, 4)
    text = W.pretty(E)
    assert text.splitlines()[0] == "n\tcoefficient\tghost" and "2/3" in text
    assert W.WittVec.from_json(E.to_json()) == E
