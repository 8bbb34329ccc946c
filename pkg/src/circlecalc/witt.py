"""Truncated big Witt vectors W(Lambda) = 1 + T Lambda[[T]] over Q(i) or complex floats.

Addition is the series product, the ghost map is gamma(P) = -z P'/P, and multiplication
is defined through the ghost map, where it becomes the coefficientwise product.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from . import measures as M
from . import premeasure as P
from .errors import KindMismatchError, ValidationError
from .generators import enumerate_S, validate_generators
from .series import (FLOAT, QQi, RATIONAL, TaylorSeries, compose_zN, contract_N, exp_series,
                     log_series, mult_trace, power, to_exact)


class WittVec:
    """A Witt vector given by its series P with P(0) = 1."""

    __slots__ = ("series",)

    def __init__(self, series):
        if not isinstance(series, TaylorSeries):
            raise ValidationError("WittVec wraps a TaylorSeries")
        c0 = series[0]
        if (series.kind == RATIONAL and c0 != 1) or (series.kind == FLOAT and abs(c0 - 1) > 1e-12):
            raise ValidationError("a Witt vector needs constant term 1")
        self.series = series

    @property
    def order(self):
        return self.series.order

    @property
    def kind(self):
        return self.series.kind

    def __add__(self, o):
        return w_add(self, o)

    def __neg__(self):
        return w_neg(self)

    def __sub__(self, o):
        return w_add(self, w_neg(o))

    def __mul__(self, o):
        return w_mul(self, o)

    def __eq__(self, o):
        if not isinstance(o, WittVec):
            return NotImplemented
        return self.kind == o.kind and self.order == o.order and self.series.equals(o.series)

    __hash__ = None

    def equals(self, o, tol=None):
        """Equality to the common order; mixed kinds compare as floats."""
        a, b = self.series, o.series
        if a.kind != b.kind:
            a, b = a.to_float(), b.to_float()
        return a.equals(b, tol)

    def truncate(self, K):
        return WittVec(self.series.truncate(K))

    def to_float(self):
        return WittVec(self.series.to_float())

    def to_json(self):
        return self.series.to_json()

    @classmethod
    def from_json(cls, obj):
        return cls(TaylorSeries.from_json(obj))

    def __repr__(self):
        return f"WittVec({self.series!r})"


def _wrap(x):
    if isinstance(x, WittVec):
        return x
    if isinstance(x, TaylorSeries):
        return WittVec(x)
    raise TypeError(f"expected a Witt vector, got {type(x).__name__}")


def _same(a, b):
    a, b = _wrap(a), _wrap(b)
    if a.kind != b.kind:
        raise KindMismatchError(f"Witt vectors of kinds {a.kind} and {b.kind}")
    return a, b


def _neg1(kind):
    return Fraction(-1) if kind == RATIONAL else -1.0


def one(K, kind=RATIONAL):
    return WittVec(TaylorSeries.one(K, kind))


def w_add(a, b):
    a, b = _same(a, b)
    return WittVec(a.series * b.series)


def w_neg(a):
    a = _wrap(a)
    return WittVec(exp_series(log_series(a.series).scale(_neg1(a.kind))))


def w_sum(vs):
    vs = list(vs)
    acc = vs[0]
    for v in vs[1:]:
        acc = w_add(acc, v)
    return acc


def ghost(a):
    """Ghost components (w_1, ..., w_K) of -zP'/P."""
    a = _wrap(a)
    L = log_series(a.series)
    return [-n * L[n] for n in range(1, a.order + 1)]


def unghost(w, kind=None):
    """Inverse of :func:`ghost`: P = exp(-sum w_n z^n / n)."""
    w = list(w)
    if kind is None:
        kind = FLOAT if any(isinstance(x, (float, complex)) for x in w) else RATIONAL
    if kind == RATIONAL:
        coeffs = [Fraction(0)] + [-to_exact(x) / n for n, x in enumerate(w, 1)]
    else:
        coeffs = [0j] + [-complex(x) / n for n, x in enumerate(w, 1)]
    return WittVec(exp_series(TaylorSeries(coeffs, kind)))


def w_mul(a, b):
    a, b = _same(a, b)
    K = min(a.order, b.order)
    ga, gb = ghost(a.truncate(K)), ghost(b.truncate(K))
    return unghost([x * y for x, y in zip(ga, gb)], a.kind)


def teichmuller(x, K, kind=None):
    """[x] = 1 - x T."""
    if kind is None:
        kind = FLOAT if isinstance(x, (float, complex)) else RATIONAL
    return WittVec(TaylorSeries([1, -x if kind == RATIONAL else -complex(x)], kind, order=K))


def frobenius(a, N):
    """F_N(P), defined by F_N(P)(z^N) = prod_{zeta^N=1} P(zeta z); the order drops to K // N."""
    a = _wrap(a)
    return WittVec(contract_N(mult_trace(a.series, N), N))


def verschiebung(a, N):
    """V_N(P)(z) = P(z^N)."""
    a = _wrap(a)
    return WittVec(compose_zN(a.series, N))


def rotate(a, zeta):
    """P(zeta z); equals [zeta] (.) P."""
    a = _wrap(a)
    if a.kind == RATIONAL and not isinstance(zeta, (float, complex)):
        z = to_exact(zeta)
        out, p = [], Fraction(1)
        for c in a.series.coeffs:
            out.append(c * p)
            p = p * z
        return WittVec(TaylorSeries(out, RATIONAL))
    z = complex(zeta)
    arr = a.series.to_float().to_numpy() * z ** np.arange(a.order + 1)
    return WittVec(TaylorSeries.from_numpy(arr))


def n_fold(a, n):
    """n-fold sum a (+) ... (+) a = P^n."""
    a = _wrap(a)
    return WittVec(power(a.series, int(n)))


def artin_hasse(N, K):
    """E_N = exp(sum_v z^{N^v} / N^v), exact."""
    N = int(N)
    if N < 2:
        raise ValidationError("N must be at least 2")
    c = [Fraction(0)] * (K + 1)
    m = 1
    while m <= K:
        c[m] = Fraction(1, m)
        m *= N
    return WittVec(exp_series(TaylorSeries(c, RATIONAL)))


def artin_hasse_S(S, K):
    """E_S = exp(sum_{N in S} z^N / N)."""
    gens = validate_generators(S)
    c = [Fraction(0)] * (K + 1)
    for m in enumerate_S(gens, K):
        c[m] = Fraction(1, m)
    return WittVec(exp_series(TaylorSeries(c, RATIONAL)))


def _denominator(c):
    if isinstance(c, QQi):
        return np.lcm(c.re.denominator, c.im.denominator)
    return Fraction(c).denominator


def p_integral_check(a, p):
    """Every coefficient's denominator coprime to p; reports the first offending index."""
    a = _wrap(a)
    if a.kind != RATIONAL:
        raise KindMismatchError("p-integrality needs exact coefficients")
    for n, c in enumerate(a.series.coeffs):
        d = int(_denominator(c))
        if d % p == 0:
            return {"p": p, "order": a.order, "pass": False, "first_failure": n, "coefficient": str(c)}
    return {"p": p, "order": a.order, "pass": True, "first_failure": None}


# premeasures ------------------------------------------------------------------------------

def _coefficients(src, K):
    """c_1..c_K of the distribution behind a measure tree, window or mass function."""
    if isinstance(src, P.MassFunction):
        c = P.distribution_coefficients(src, K)
        return [complex(x) for x in c[1:]], FLOAT
    if isinstance(src, M.MeasureExpr):
        src = M.fourier(src, K)
    if isinstance(src, M.FourierWindow):
        if src.exact:
            vals = []
            for n in range(1, K + 1):
                g = src[n].to_gaussian() if hasattr(src[n], "to_gaussian") else src[n]
                if g is None:
                    break
                vals.append(g)
            else:
                return vals, RATIONAL
        return [complex(src[n]) for n in range(1, K + 1)], FLOAT
    raise ValidationError(f"cannot take Fourier coefficients of {type(src).__name__}")


def w_of_premeasure(src, K):
    """w(T) = exp(-sum_v c_v(T) z^v / v); its ghost components are the c_v."""
    c, kind = _coefficients(src, K)
    return unghost(c, kind)


def correspondence_suite(mu, N, K=24, q=Fraction(1, 5), tol=1e-12):
    """w(N_* mu) = F_N w(mu), w(N N^* mu) = V_N w(mu), w([zeta^{-1}]_* mu) = [zeta] (.) w(mu)."""
    w = w_of_premeasure(mu, K)
    push = w_of_premeasure(M.Push(N, mu), K // N)
    pull = w_of_premeasure(M.LinComb(((N, M.Pull(N, mu)),)), K)
    zeta = complex(np.exp(2j * np.pi * float(q)))
    rot = w_of_premeasure(M.Rotate(-q, mu), K)
    checks = {
        "push_frobenius": push.equals(frobenius(w, N), tol),
        "pull_verschiebung": pull.equals(verschiebung(w, N), tol),
        "rotation_teichmuller": rot.to_float().equals(w_mul(teichmuller(zeta, K), w.to_float()), 1e-10),
    }
    return {"N": N, "order": K, "checks": checks, "pass": all(checks.values())}


# identity suites ---------------------------------------------------------------------------

def idempotency_resolution(N=2, K=16):
    """Decide by exact computation which of E_N and its negative is idempotent under (.)."""
    E = artin_hasse(N, K)
    sq = w_mul(E, E)
    negE = w_neg(E)
    e_idem = sq == E
    neg_idem = w_mul(negE, negE) == negE
    gE = ghost(E)
    powers = [n for n in range(1, K + 1) if _is_power(n, N)]
    return {
        "N": N,
        "order": K,
        "E_idempotent": e_idem,
        "negE_idempotent": neg_idem,
        "square_equals_negE": sq == negE,
        "ghost_E_at_powers": sorted({str(gE[n - 1]) for n in powers}),
        "idempotent": "E_N" if e_idem else ("-E_N" if neg_idem else None),
        # c_v(mu * mu) = c_v(mu)^2: the premeasure with w(mu) = E_N satisfies mu * mu = -mu
        "convolution_square": "mu" if e_idem else ("-mu" if neg_idem else None),
        "resolved": e_idem or neg_idem,
    }


def _is_power(n, N):
    while n % N == 0:
        n //= N
    return n == 1


def random_witt(rng, K, lo=-3, hi=3):
    return WittVec(TaylorSeries([1] + [Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, 4)))
                                       for _ in range(K)], RATIONAL))


def ring_axioms_check(n_vectors=100, K=24, seed=0):
    """Exact checks of the ring axioms, the ghost homomorphism and the F/V relations."""
    rng = np.random.default_rng(seed)
    fails = []
    vecs = [random_witt(rng, K) for _ in range(n_vectors)]
    for i in range(0, n_vectors, 1):
        a, b, c = vecs[i], vecs[(i + 1) % n_vectors], vecs[(i + 7) % n_vectors]
        if a + b != b + a or (a + b) + c != a + (b + c) or a - a != one(K):
            fails.append(("additive group", i))
        ab = a * b
        if ab != b * a:
            fails.append(("commutative", i))
        if i % 4 == 0:
            if (ab * c) != a * (b * c):
                fails.append(("associative", i))
            if a * (b + c) != ab + a * c:
                fails.append(("distributive", i))
        if [x * y for x, y in zip(ghost(a), ghost(b))] != ghost(ab):
            fails.append(("ghost multiplicative", i))
        if [x + y for x, y in zip(ghost(a), ghost(b))] != ghost(a + b):
            fails.append(("ghost additive", i))
        x = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
        if teichmuller(x, K) * a != rotate(a, x):
            fails.append(("teichmuller", i))
        if teichmuller(1, K) * a != a:
            fails.append(("unit", i))
        N, Mm = [(2, 3), (3, 2), (2, 5), (3, 4)][i % 4]
        if frobenius(frobenius(a, N), Mm) != frobenius(a, N * Mm):
            fails.append(("F_N F_M", i))
        if frobenius(verschiebung(a, N), N) != n_fold(a, N).truncate(K // N):
            fails.append(("F_N V_N", i))
        if frobenius(verschiebung(a, Mm), N) != verschiebung(frobenius(a, N), Mm).truncate(K // N):
            fails.append(("F_N V_M", i))
        vf = verschiebung(frobenius(a, N), N).to_float()
        tr = w_sum([rotate(a.to_float(), np.exp(2j * np.pi * k / N)) for k in range(N)])
        if not vf.equals(tr.truncate(vf.order), 1e-12):
            fails.append(("V_N F_N = Tr_N", i))
    return {"vectors": n_vectors, "order": K, "failures": fails, "pass": not fails}


def pretty(a, max_terms=None):
    """Two-column text view: coefficient and ghost component per index."""
    a = _wrap(a)
    g = [None] + ghost(a)
    lines = ["n\tcoefficient\tghost"]
    K = a.order if max_terms is None else min(a.order, max_terms)
    for n in range(K + 1):
        lines.append(f"{n}\t{a.series[n]}\t{'' if n == 0 else g[n]}")
    return "\n".join(lines)


def dumps(a):
    return json.dumps(a.to_json())
