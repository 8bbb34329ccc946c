import cmath
import math
import random
from fractions import Fraction as F

import numpy as np
import pytest

from circlecalc.cyclotomic import Cyc
from circlecalc.errors import ValidationError
from circlecalc.measures import (
    Atom,
    Density,
    DigitBernoulli,
    FourierWindow,
    G_series,
    Haar,
    LinComb,
    Pull,
    Push,
    Rotate,
    atoms_of,
    cauchy_series,
    convolve,
    corollary9_check,
    digit_bernoulli_depth,
    eval_herglotz,
    f_mu_series,
    first_moment,
    fourier,
    herglotz_series,
    invariance_check,
    jordan_parts,
    measure_from_json,
    measure_to_json,
    muhat_fourier,
    orbit_measure,
    total_mass,
)
from circlecalc.series import FLOAT, RATIONAL, TaylorSeries, compose_zN, feq_residual


def random_atomic(rng, n_atoms=4, denoms=(2, 3, 4, 5, 6, 7, 8, 9, 10, 12)):
    terms = []
    for _ in range(n_atoms):
        q = rng.choice(denoms)
        terms.append((F(rng.randint(-3, 5), rng.randint(1, 4)), Atom(F(rng.randrange(q), q))))
    return LinComb(tuple(terms))


def test_haar_window():
    w = fourier(Haar(1), 5)
    assert w[0] == 1
    assert all(w[n] == 0 for n in range(-5, 6) if n)
    assert herglotz_series(Haar(1), 6) == TaylorSeries.one(6)


def test_push_of_atom():
    t = F(2, 11)
    a = fourier(Push(2, Atom(t)), 8)
    b = fourier(Atom(2 * t), 8)
    assert a.equals(b)
    for nu in range(-8, 9):
        assert a[nu] == Cyc.root(-2 * nu * t)


def test_pull_of_atom_is_roots_of_unity():
    N = 3
    w = fourier(Pull(N, Atom(0)), 9)
    for nu in range(-9, 10):
        assert w[nu] == (1 if nu % N == 0 else 0)
    roots = LinComb(tuple((F(1, N), Atom(F(k, N))) for k in range(N)))
    assert w.equals(fourier(roots, 9))


def _db_atomic_oracle(base, digits_weights, depth, nu):
    pts = np.zeros(1)
    wts = np.ones(1)
    for k in range(1, depth + 1):
        pts = np.concatenate([pts + d * base ** (-k) for d, _ in digits_weights])
        wts = np.concatenate([wts * p for _, p in digits_weights])
    return np.sum(wts * np.exp(-2j * np.pi * nu * pts))


def test_digit_bernoulli_against_atomic_oracle():
    db = DigitBernoulli(3, (F(1, 2), 0, F(1, 2)))
    w = fourier(db, 4, tol=1e-13)
    for nu in (1, 2, 4):
        oracle = _db_atomic_oracle(3, [(0, 0.5), (2, 0.5)], 20, nu)
        assert abs(w[nu] - oracle) < 1e-8
    # closed form: c_1 = prod_k e^{-2 pi i / 3^k} cos(2 pi / 3^k)
    prod = 1 + 0j
    for k in range(1, 60):
        prod *= cmath.exp(-2j * math.pi / 3 ** k) * math.cos(2 * math.pi / 3 ** k)
    assert abs(w[1] - prod) < 1e-12
    assert digit_bernoulli_depth(db, 4, 1e-13) > 0


def test_digit_bernoulli_tolerance_is_certified():
    db = DigitBernoulli(2, (0.3, 0.7))
    coarse = fourier(db, 6, tol=1e-4)
    fine = fourier(db, 6, tol=1e-14)
    for nu in range(-6, 7):
        assert abs(coarse[nu] - fine[nu]) <= coarse.err(nu) + fine.err(nu) + 1e-15


def test_invariance_examples():
    mu = orbit_measure(2, F(1, 7))
    rep = invariance_check(mu, 2, 20)
    assert rep["pass"] and rep["exact"] and rep["max_deviation"] < 1e-14
    assert invariance_check(Haar(1), 5, 10)["pass"]
    rep = invariance_check(DigitBernoulli(2, (0.25, 0.75)), 2, 16, tol=1e-12)
    assert rep["pass"]
    assert not invariance_check(Atom(F(1, 5)), 2, 4)["pass"]
    assert invariance_check(DigitBernoulli(3, (0.2, 0.3, 0.5)), 3, 10)["pass"]
    assert not invariance_check(DigitBernoulli(3, (0.2, 0.3, 0.5)), 2, 10, tol=1e-9)["pass"]


def test_herglotz_examples():
    h = herglotz_series(Atom(0), 6)
    assert h.kind == RATIONAL and h == TaylorSeries([1, 2, 2, 2, 2, 2, 2])
    mu = random_atomic(random.Random(1))
    eta = F(1, 5)
    a = herglotz_series(mu, 10, kind=FLOAT)
    b = herglotz_series(Rotate(eta, mu), 10, kind=FLOAT)
    for nu in range(11):
        assert abs(b[nu] - a[nu] * cmath.exp(-2j * math.pi * nu * float(eta))) < 1e-12
    # Cauchy transform
    k = cauchy_series(Atom(0), 4)
    assert k == TaylorSeries([1, 1, 1, 1, 1])


def test_G_examples_and_pull_scaling():
    g = G_series(Atom(0), 6)
    for nu in range(1, 7):
        assert abs(g[nu] - 1 / (1j * math.pi * nu)) < 1e-15
    assert max(abs(c) for c in G_series(Haar(1), 5)) == 0
    mu = random_atomic(random.Random(2))
    for N in (2, 3):
        lhs = G_series(Pull(N, mu), 24)
        rhs = compose_zN(G_series(mu, 24), N).scale(1 / N)
        assert lhs.equals(rhs)
        # G_{N_* mu} = N (N_* G_mu): coefficient v of the left is N a_{vN}
        lhs = G_series(Push(N, mu), 8)
        full = G_series(mu, 8 * N)
        for nu in range(1, 9):
            assert abs(lhs[nu] - N * full[nu * N]) < 1e-14


def test_transform_naturality():
    mu = random_atomic(random.Random(3))
    for N in (2, 5):
        hp = herglotz_series(Push(N, mu), 10, kind=FLOAT)
        h = herglotz_series(mu, 10 * N, kind=FLOAT)
        assert all(abs(hp[nu] - h[nu * N]) < 1e-13 for nu in range(11))
        hq = herglotz_series(Pull(N, mu), 30, kind=FLOAT)
        assert hq.equals(compose_zN(herglotz_series(mu, 30, kind=FLOAT), N))


def test_f_mu_examples():
    f = f_mu_series(Haar(1), 6)
    assert abs(f.prefactor - math.exp(-1)) < 1e-15
    assert f.series.equals(TaylorSeries.one(6, FLOAT))
    mu = orbit_measure(2, F(1, 7))
    f = f_mu_series(mu, 128)
    assert feq_residual(f.series, 2) < 1e-12
    f = f_mu_series(Atom(0), 8, kind=RATIONAL)
    assert f.series.kind == RATIONAL
    # exp(-2 z/(1-z)) coefficient of z: -2, of z^2: -2 + 2 = 0
    assert f.series[1] == -2 and f.series[2] == 0


def test_muhat_examples():
    w = muhat_fourier(Haar(1), 5)
    assert abs(w[0] - 0.5) < 1e-15
    for nu in range(1, 6):
        assert abs(w[nu] - (-1 / (2j * math.pi * nu))) < 1e-15
    # step function: jump of 1 at t = 1/2, muhat = [t > 1/2]
    w = muhat_fourier(Atom(F(1, 2)), 6)
    for nu in range(-6, 7):
        if nu == 0:
            direct = 0.5
        else:
            direct = (1 - cmath.exp(-2j * math.pi * nu * 0.5)) / (-2j * math.pi * nu)
        assert abs(w[nu] - direct) < 1e-14
    # 2 pi i v c_v(muhat) = c_v(mu) - mu(T)
    mu = random_atomic(random.Random(4))
    wm = fourier(mu, 6)
    wh = muhat_fourier(mu, 6)
    M = float(total_mass(mu))
    for nu in range(1, 7):
        assert abs(2j * math.pi * nu * wh[nu] - (complex(wm[nu]) - M)) < 1e-13


def test_muhat_c0_is_mean_of_muhat():
    rng = np.random.default_rng(0)
    mu = LinComb(((F(1, 2), Atom(F(1, 3))), (F(1, 4), Haar(1)), (F(1, 4), Density((1, F(1, 4), (0, F(1, 8)))))))
    t = (np.arange(300000) + 0.5) / 300000
    muhat = 0.5 * (t > 1 / 3) + 0.25 * t
    # density 1 + 2 Re(c1 e(t)) + 2 Re(c2 e(2t)); cumulative integral
    c1, c2 = 0.25, 0.125j
    dens_int = t + 2 * np.real(c1 * (np.exp(2j * np.pi * t) - 1) / (2j * np.pi)) + 2 * np.real(c2 * (np.exp(4j * np.pi * t) - 1) / (4j * np.pi))
    muhat = muhat + 0.25 * dens_int
    assert abs(muhat_fourier(mu, 1)[0] - muhat.mean()) < 1e-8
    assert rng is not None


def test_first_moment_digit_bernoulli():
    db = DigitBernoulli(3, (0.5, 0, 0.5))
    v, _ = first_moment(db)
    assert abs(v - 0.5) < 1e-15
    v, err = first_moment(Rotate(0.1, db))
    pts = np.zeros(1)
    for k in range(1, 14):
        pts = np.concatenate([pts, pts + 2 * 3.0 ** (-k)])
    assert abs(v - np.mean((pts + 0.1) % 1)) < 1e-3 + err


def test_convolution_examples():
    mu = random_atomic(random.Random(5))
    assert convolve(Atom(0), mu, K=8).equals(fourier(mu, 8))
    hm = convolve(Haar(1), mu, K=8)
    assert hm.equals(fourier(Haar(total_mass(mu)), 8))
    a, b = F(1, 6), F(2, 9)
    assert convolve(Atom(a), Atom(b), K=10).equals(fourier(Atom(a + b), 10))
    with pytest.raises(ValidationError):
        convolve(fourier(mu, 3), fourier(mu, 4))


def test_corollary9_examples():
    mu = orbit_measure(2, F(1, 7))
    rep = corollary9_check(fourier(mu, 256), 2, eps=1.0)
    assert rep["hermitian"] and rep["invariant"] and rep["converges_heuristic"]
    ones = FourierWindow.from_array(np.ones(2 * 4096 + 1))
    rep = corollary9_check(ones, 2, eps=1.0)
    assert rep["hermitian"] and rep["invariant"] and rep["converges_heuristic"]
    with pytest.raises(ValidationError):
        corollary9_check(FourierWindow.from_array(np.abs(np.arange(-64, 65)).astype(float)), 2)
    # growing partial sums are flagged
    grow = FourierWindow.from_array(np.full(2 * 512 + 1, -1.0))
    assert not corollary9_check(grow, 2, eps=1.0)["converges_heuristic"]


def test_jordan_parts():
    a, b = F(1, 3), F(1, 5)
    pos, neg = jordan_parts(Atom(a) - Atom(b))
    assert fourier(pos, 5).equals(fourier(Atom(a), 5))
    assert fourier(neg, 5).equals(fourier(Atom(b), 5))
    with pytest.raises(ValidationError):
        jordan_parts(orbit_measure(2, F(1, 7)) - Haar(1))
    pos, neg = jordan_parts(LinComb(((2, Atom(a)), (-1, Atom(a)))))
    assert fourier(pos, 4).equals(fourier(Atom(a), 4)) and neg.terms == ()


def test_jordan_parts_preserve_invariance():
    rng = random.Random(7)
    for _ in range(10):
        o1 = orbit_measure(2, F(rng.randint(1, 6), 7))
        o2 = orbit_measure(2, F(rng.randint(1, 14), 15))
        mu = LinComb(((F(rng.randint(1, 4)), o1), (-F(rng.randint(1, 4)), o2)))
        assert invariance_check(mu, 2, 12)["pass"]
        for part in jordan_parts(mu):
            assert invariance_check(part, 2, 12)["pass"]


def test_eval_herglotz_examples():
    for r in (0.1, 0.5, 0.9):
        assert abs(eval_herglotz(Atom(0), r) - (1 + r) / (1 - r)) < 1e-12
    assert eval_herglotz(Haar(1), 0.3 + 0.4j) == 1
    mu = orbit_measure(2, F(1, 7))
    assert abs(eval_herglotz(mu, 0) - 1) < 1e-15


def test_eval_herglotz_matches_series():
    rng = random.Random(8)
    mu = LinComb(((F(1, 2), Push(3, random_atomic(rng))), (F(1, 3), Pull(2, Rotate(F(1, 8), random_atomic(rng)))),
                  (F(1, 6), DigitBernoulli(2, (0.5, 0.5))), (1, DigitBernoulli(3, (0.5, 0, 0.5)))))
    z = 0.45 * cmath.exp(0.7j)
    h = herglotz_series(mu, 80, kind=FLOAT)
    ser = sum(h[n] * z ** n for n in range(81))
    assert abs(eval_herglotz(mu, z, tol=1e-12) - ser) < 1e-10


def test_push_pull_identities_small_exact():
    rng = random.Random(9)
    for _ in range(5):
        mu = random_atomic(rng)
        N, M = rng.choice([(2, 3), (3, 5), (4, 7)])
        K = 12
        assert fourier(Push(N, Pull(N, mu)), K).equals(fourier(mu, K))
        avg = LinComb(tuple((F(1, N), Rotate(F(k, N), mu)) for k in range(N)))
        assert fourier(Pull(N, Push(N, mu)), K).equals(fourier(avg, K))
        assert fourier(Pull(N, Push(M, mu)), K).equals(fourier(Push(M, Pull(N, mu)), K))


def test_pull_invariance_forces_haar():
    for mu, expect in [(Haar(F(3, 2)), True), (orbit_measure(2, F(1, 7)), False), (Atom(0), False)]:
        K = 16
        a, b = fourier(Pull(2, mu), K), fourier(mu, K)
        if a.equals(b):
            assert all(b[n] == 0 for n in range(-K, K + 1) if n)
            assert expect
        else:
            assert not expect


def test_hermitian_symmetry():
    rng = random.Random(10)
    mu = LinComb(((1, random_atomic(rng)), (F(1, 2), DigitBernoulli(3, (0.1, 0.6, 0.3))),
                  (1, Density((1, (F(1, 3), F(1, 5)))))))
    w = fourier(mu, 12).to_float()
    for nu in range(13):
        assert abs(w[-nu] - complex(w[nu]).conjugate()) < 1e-13


def test_total_mass_preserved():
    mu = random_atomic(random.Random(11))
    m = total_mass(mu)
    for e in (Rotate(F(1, 3), mu), Push(4, mu), Pull(5, mu)):
        assert total_mass(e) == m
        assert fourier(e, 0)[0] == m


def test_atoms_of():
    at = atoms_of(Pull(2, Atom(0, F(1))))
    assert sorted(at) == [(F(0), F(1, 2)), (F(1, 2), F(1, 2))]
    assert atoms_of(DigitBernoulli(2, (0.5, 0.5))) is None


def test_json_round_trip_and_errors():
    mu = LinComb(((F(1, 2), Rotate(F(1, 3), Push(2, Atom(F(1, 7))))), (0.25, DigitBernoulli(3, (0.5, 0, 0.5))),
                  (1, Pull(3, Density((1, (F(1, 4), 0))))), (1, Haar(F(1, 3)))))
    back = measure_from_json(measure_to_json(mu))
    assert fourier(back, 6).equals(fourier(mu, 6))
    with pytest.raises(ValidationError) as ei:
        measure_from_json({"type": "lincomb", "terms": [[1, {"type": "atom"}]]})
    assert "$.terms[0][1]" in str(ei.value)
    with pytest.raises(ValidationError):
        measure_from_json({"type": "digit_bernoulli", "base": 2, "weights": [0.3, 0.3]})


def test_window_csv():
    csv_text = fourier(Haar(1), 2).to_csv()
    lines = csv_text.strip().split("\r\n")
    assert lines[0] == "nu,re,im,errbound"
    assert len(lines) == 6
