import cmath
import random
from fractions import Fraction as F

from circlecalc.cyclotomic import Cyc
from circlecalc.series import QQi


def test_sum_of_roots_vanishes():
    for n in (2, 3, 4, 6, 12, 30, 35, 64, 360):
        s = Cyc()
        for k in range(n):
            s = s + Cyc.root(F(k, n))
        assert s.is_zero()
        assert s == 0


def test_partial_sums_nonzero():
    s = Cyc.root(0) + Cyc.root(F(1, 5))
    assert not s.is_zero()


def test_character_sums_exact():
    # sum_k e^{2 pi i k v / N} is N when N | v and 0 otherwise
    for N in (4, 6, 9, 10):
        for v in range(-12, 13):
            s = Cyc()
            for k in range(N):
                s = s + Cyc.root(F(k * v, N))
            assert s == (N if v % N == 0 else 0)


def test_to_gaussian():
    assert Cyc.root(F(1, 4)).to_gaussian() == QQi(0, 1)
    assert Cyc.root(F(1, 2), 3).to_gaussian() == -3
    x = Cyc.root(F(1, 6)) + Cyc.root(F(-1, 6))  # 2 cos(pi/3) = 1
    assert x.to_gaussian() == 1
    assert Cyc.root(F(1, 7)).to_gaussian() is None
    y = Cyc.root(F(1, 8)) * Cyc.root(F(1, 8))
    assert y.to_gaussian() == QQi(0, 1)


def test_random_identities_agree_with_floats():
    rng = random.Random(0)
    for _ in range(200):
        terms = {F(rng.randint(0, 59), rng.choice([3, 4, 5, 12, 20, 60])): F(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(5)}
        x = Cyc(terms)
        val = sum((float(a) * cmath.exp(2j * cmath.pi * float(q)) for q, a in terms.items()), 0j)
        assert abs(complex(x) - val) < 1e-12
        # zero test agrees with numerics
        assert x.is_zero() == (abs(val) < 1e-12)
        assert (x * x.conjugate() - x.conjugate() * x).is_zero()


def test_cos_identities():
    # 2cos(2pi/5) = (sqrt5 - 1)/2 satisfies t^2 + t - 1 = 0
    t = Cyc.root(F(1, 5)) + Cyc.root(F(-1, 5))
    assert (t * t + t - 1).is_zero()
