import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy import integrate

from circlecalc import kappa as K
from circlecalc import premeasure as P
from circlecalc.errors import ValidationError

K0, K1, K2 = K.Kappa(0), K.Kappa(1), K.Kappa(2)


def test_kappa_examples():
    for x in (0.0, 0.1, 0.5, 0.9, 1.0):
        assert K0(x) == pytest.approx(x)
        assert K1(x) == pytest.approx(x * (1 - math.log(x)) if x else 0.0)
    assert K1(0.5) == pytest.approx(0.846573590279973, abs=1e-14)
    for g in (0, 0.5, 1, 1.5, 2, 3.7):
        assert K.Kappa(g)(1) == 1
    with pytest.raises(ValidationError):
        K1(1.5)


@pytest.mark.parametrize("g", [0.3, 0.5, 1.5, 2.5])
def test_incomplete_gamma_against_quadrature(g):
    assert K.verify_incomplete_gamma(g) <= 1e-10
    # independent check with scipy quadrature of the defining integral
    for x in (1e-4, 0.05, 0.6):
        val, _ = integrate.quad(lambda t: abs(math.log(t)) ** g, 0, x, limit=200)
        assert K.Kappa(g)(x) == pytest.approx(val / math.gamma(g + 1), abs=1e-9)


def test_integer_closed_form_matches_incomplete_gamma():
    from scipy import special
    for g in (1, 2, 3):
        for x in (1e-6, 0.01, 0.3, 0.77):
            assert K.Kappa(g)(x) == pytest.approx(float(special.gammaincc(g + 1, -math.log(x))), rel=1e-12)


@pytest.mark.parametrize("kap", [K0, K1, K2, K.Kappa(0.5), K.power_kappa(0.7)])
def test_axioms(kap):
    assert K.kappa_axioms_check(kap)["pass"]


def test_monotonicity_in_gamma():
    for d, g in ((0, 1), (1, 2), (0.5, 1.5)):
        assert K.monotonicity_check(d, g)["pass"]


def test_power_kappa():
    assert K.power_kappa(1)(0.3) == pytest.approx(0.3)
    assert K.power_kappa(0.7)(0.5) == pytest.approx(2 ** -0.7)
    with pytest.raises(ValidationError):
        K.power_kappa(1.5)
    assert isinstance(K.parse_kappa("power=0.5"), K.PowerKappa)
    assert K.parse_kappa("gamma=2") == K2
    with pytest.raises(ValidationError):
        K.parse_kappa("beta=1")


def test_entropy_finite():
    assert K.entropy_finite(K.FiniteCircleSet((F(1, 3),)), K1) == 1
    assert K.entropy_finite(K.FiniteCircleSet(()), K1) == 0
    for N in (2, 5, 8):
        roots = K.FiniteCircleSet(tuple(F(k, N) for k in range(N)))
        assert K.entropy_finite(roots, K0) == pytest.approx(1)
        assert K.entropy_finite(roots, K1) == pytest.approx(1 + math.log(N))
    assert K.entropy_finite(K.FiniteCircleSet((0, F(1, 2))), K1) == pytest.approx(1.6931471805599454)
    rng = np.random.default_rng(0)
    E = K.FiniteCircleSet(tuple(rng.random(5)))
    for _ in range(10):
        E2 = E.union(K.FiniteCircleSet((rng.random(),)))
        assert K.entropy_finite(E2, K1) >= K.entropy_finite(E, K1) - 1e-15
        assert K.entropy_finite(E, K1) >= 1
        E = E2


def test_pre_and_image_sets():
    assert K.preimage_set(K.FiniteCircleSet((0,)), 2).points == (0, F(1, 2))
    rng = np.random.default_rng(5)
    for _ in range(40):
        E = K.FiniteCircleSet(tuple(F(int(rng.integers(0, 360)), 360) for _ in range(int(rng.integers(1, 8)))))
        for N in (2, 3, 7):
            for kap in (K0, K1, K2):
                assert K.transform_bounds_check(E, N, kap)["pass"]
    img = K.image_set(K.FiniteCircleSet((F(1, 8), F(5, 8), 0)), 2, 1)
    assert img.points == (0, F(1, 4))


def test_middle_thirds():
    d = K.CantorDesc(3, (0, 2))
    r = K.entropy_cantor(d, K1, tol=1e-12)
    assert r["value"] == pytest.approx(K.MIDDLE_THIRDS_KAPPA1, abs=1e-9)
    assert abs(r["value"] - (1 + 3 * math.log(3))) <= r["error_bound"] + 1e-12
    chk = K.cantor_truncation_check(d, K1)
    assert chk["pass"]
    # depth-n truncation = levels <= n plus the 2^n hull interiors
    for n, v in zip(range(1, 9), chk["truncations"]):
        assert r["value"] - v == pytest.approx(
            sum(2 ** (m - 1) * K1(3.0 ** -m) for m in range(n + 1, 200)) - 2 ** n * K1(3.0 ** -n), abs=1e-9)
    # kappa^alpha criterion
    crit = math.log(2) / math.log(3)
    assert not K.entropy_cantor(d, K.power_kappa(crit - 0.05))["carleson"]
    assert K.entropy_cantor(d, K.power_kappa(crit + 0.05))["carleson"]


def test_other_cantor_sets():
    for D in ((0,), (1,)):
        assert K.entropy_cantor(K.CantorDesc(3, D), K1)["value"] == pytest.approx(1.0)
    for desc in (K.CantorDesc(5, (0, 2, 4)), K.CantorDesc(4, (0, 1)), K.CantorDesc(7, (1, 2, 5))):
        chk = K.cantor_truncation_check(desc, K1, depths=range(1, 7))
        assert chk["pass"]
        assert chk["series"] - chk["truncations"][-1] < 0.3
    with pytest.raises(ValidationError):
        K.CantorDesc(3, (0, 1, 2))


def ah_arc(N=2):
    mf = P.artin_hasse_mass(N)
    return lambda s, l: P.arc_measure_fine(mf, s, l)[0]


def test_arc_measure_fine_matches_plain():
    mf = P.MassFunction(0.3, ((F(1, 4), 0.2),), P.lacunary_smooth(3))
    rng = np.random.default_rng(2)
    s, l = rng.random(50), rng.random(50)
    fine, bounds = P.arc_measure_fine(mf, s, l)
    plain = P.arc_measure_many(mf, s, l, 1e-10)
    assert np.all(np.abs(fine - plain) <= bounds + 1e-10)
    assert np.max(bounds) <= 1e-6
    # tiny arc at 0: -2 delta * (number of frequencies below 1/delta), up to O(delta)
    d = 2.0 ** -30
    v, b = P.arc_measure_fine(P.artin_hasse_mass(2), [0.0], [d])
    assert v[0] == pytest.approx(-2 * d * 30, rel=0.1)


def test_variation_dichotomy():
    fn = ah_arc()
    rows0 = K.variation_estimate(fn, K0, range(4, 15), offsets=(0.0, 0.137))
    sums = [r["abs_sum"] for r in rows0]
    assert all(b > a for a, b in zip(sums, sums[1:]))
    rows1 = K.variation_estimate(fn, K1, range(4, 15), offsets=(0.0, 0.137))
    assert max(r["ratio"] for r in rows1) < 1.0
    zero = K.variation_estimate(lambda s, l: np.zeros(len(s)), K1, range(2, 6))
    assert all(r["ratio"] == 0 for r in zero)
    assert K.variation_csv(rows0).startswith("k,abs_sum,kappa_sum,ratio\r\n")


def test_kappa_bounded():
    fn = ah_arc()
    a1 = K.fit_bound(fn, K1)
    assert K.kappa_bounded_check(fn, K1, 2 * a1)["pass"]
    a0 = K.fit_bound(fn, K0)
    rep = K.kappa_bounded_check(fn, K0, 2 * a0)
    assert not rep["pass"] and rep["worst_arc"][1] < 2.0 ** -20
    assert K.kappa_bounded_check(lambda s, l: np.zeros(len(s)), K1, 0)["pass"]


def test_growth_profiles():
    radii = [1 - 2.0 ** -j for j in range(6, 13)]
    sup = K.lacunary_sum_sup((2, 3))
    h = K.lacunary_sum_eval((2, 3))
    assert sup(radii[0]) == pytest.approx(h(radii[0], 1e-12).real, rel=1e-12)
    rep2 = K.growth_class_check(h, 2, radii, sup_fn=sup)
    assert rep2["bounded"] and rep2["nonincreasing_envelope"]
    rep1 = K.growth_class_check(h, 1, radii, sup_fn=sup)
    assert rep1["increasing"] and not rep1["bounded"]
    # grid sup agrees with the closed form at a moderate radius
    grid = K.growth_class_check(h, 2, radii[:2], n_theta=256)
    assert grid["rows"][0]["sup_re"] == pytest.approx(rep2["rows"][0]["sup_re"], rel=1e-9)
    # Artin-Hasse unit: h = -2 sum z^{2^v}, gamma = 1 bounded
    ah = P.artin_hasse_mass(2)
    rep = K.growth_class_check(lambda z, tol: P.eval_herglotz_mass(ah, z, tol), 1,
                               [1 - 2.0 ** -j for j in range(4, 10)], n_theta=384)
    assert max(r["ratio"] for r in rep["rows"]) < 2.0
    const = K.growth_class_check(lambda z, tol: 1.0 + 0j, 1, radii, n_theta=8)
    assert const["rows"][-1]["ratio"] < const["rows"][0]["ratio"]
    assert K.growth_csv(rep2).count("\r\n") == len(radii) + 1
