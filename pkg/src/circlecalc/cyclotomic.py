"""Exact elements of cyclotomic fields.

A :class:`Cyc` is a finite sum  sum_q a_q e^{2 pi i q}  with rational angles q (mod 1)
and rational coefficients. Equality is decided by reducing to the canonical basis of
Q(zeta_n), n = lcm of the angle denominators, through the CRT splitting
Q(zeta_n) = tensor over p^e || n of Q(zeta_{p^e}). In each factor the powers
xi^{u + p^{e-1} j} with j < p - 1 form a basis, and xi^{u + p^{e-1}(p-1)} is rewritten
as minus the sum over the other j.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from math import gcd, lcm

from .series import QQi, gauss


def _factor(n):
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def _key(q):
    """Reduced (k, n) with q = k/n mod 1, 0 <= k < n."""
    if type(q) is int:
        return (0, 1)
    if type(q) is not Fraction:
        q = Fraction(q)
    n = q.denominator
    return (q.numerator % n, n)


def _add_keys(a, b):
    k1, n1 = a
    k2, n2 = b
    if n1 == n2:
        k, n = k1 + k2, n1
    else:
        k, n = k1 * n2 + k2 * n1, n1 * n2
    g = gcd(k, n)
    if g > 1:
        k, n = k // g, n // g
    return (k % n, n)


def _neg_key(a):
    k, n = a
    return ((-k) % n, n)


def _coeff(a):
    return a if type(a) is Fraction else Fraction(a)


class Cyc:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        # terms: {(k, n): Fraction} meaning sum a * e^{2 pi i k/n}
        self.terms = {}
        if terms:
            for q, a in terms.items():
                self._acc(_key(q), _coeff(a))

    def _acc(self, key, a):
        if not a:
            return
        t = self.terms
        v = t.get(key)
        if v is None:
            t[key] = a
            return
        v = v + a
        if v:
            t[key] = v
        else:
            del t[key]

    @classmethod
    def root(cls, q, coeff=1):
        """coeff * e^{2 pi i q}."""
        c = cls()
        c._acc(_key(q), _coeff(coeff))
        return c

    @classmethod
    def from_exact(cls, x):
        """Embed an int, Fraction, QQi or Cyc."""
        if isinstance(x, Cyc):
            return x
        if isinstance(x, QQi):
            c = cls()
            c._acc((0, 1), x.re)
            c._acc((1, 4), x.im)
            return c
        return cls.root(0, Fraction(x))

    def copy(self):
        c = Cyc()
        c.terms = dict(self.terms)
        return c

    def __add__(self, o):
        o = Cyc.from_exact(o) if not isinstance(o, Cyc) else o
        c = self.copy()
        for q, a in o.terms.items():
            c._acc(q, a)
        return c

    __radd__ = __add__

    def add_scaled(self, o, s):
        """In-place self += s * o for a rational s."""
        s = _coeff(s)
        if s:
            for q, a in o.terms.items():
                self._acc(q, a * s)
        return self

    def __neg__(self):
        c = Cyc()
        c.terms = {q: -a for q, a in self.terms.items()}
        return c

    def __sub__(self, o):
        o = Cyc.from_exact(o) if not isinstance(o, Cyc) else o
        c = self.copy()
        for q, a in o.terms.items():
            c._acc(q, -a)
        return c

    def __rsub__(self, o):
        return Cyc.from_exact(o) - self

    def __mul__(self, o):
        if not isinstance(o, Cyc):
            if isinstance(o, QQi):
                o = Cyc.from_exact(o)
            else:
                s = _coeff(o)
                c = Cyc()
                if s:
                    c.terms = {q: a * s for q, a in self.terms.items()}
                return c
        c = Cyc()
        for q1, a1 in self.terms.items():
            for q2, a2 in o.terms.items():
                c._acc(_add_keys(q1, q2), a1 * a2)
        return c

    __rmul__ = __mul__

    def rotate(self, q):
        """Multiply by e^{2 pi i q}."""
        k = _key(q)
        if k == (0, 1):
            return self.copy()
        c = Cyc()
        c.terms = {_add_keys(p, k): a for p, a in self.terms.items()}
        return c

    def conjugate(self):
        c = Cyc()
        c.terms = {_neg_key(q): a for q, a in self.terms.items()}
        return c

    def conductor(self):
        n = 1
        for _, d in self.terms:
            n = lcm(n, d)
        return n

    def canonical(self, n=None):
        """Coordinates in the tensor basis of Q(zeta_n); n must be a multiple of the conductor."""
        n = self.conductor() if n is None else n
        fac = [(p, p ** e, p ** (e - 1)) for p, e in _factor(n)]
        out = {}
        for (kq, d), a in self.terms.items():
            k = (kq * (n // d)) % n
            items = [(tuple(k % pe for _, pe, _ in fac), a)]
            for i, (p, pe, low) in enumerate(fac):
                nxt = []
                for tup, c in items:
                    u, j = tup[i] % low, tup[i] // low
                    if j == p - 1:
                        for jj in range(p - 1):
                            nxt.append((tup[:i] + (u + low * jj,) + tup[i + 1:], -c))
                    else:
                        nxt.append((tup, c))
                items = nxt
            for tup, c in items:
                v = out.get(tup, 0) + c
                if v == 0:
                    out.pop(tup, None)
                else:
                    out[tup] = v
        return out

    def is_zero(self):
        if not self.terms:
            return True
        # a cheap numeric screen before the exact reduction
        if abs(complex(self)) > 1e-6 * (1 + sum(abs(float(a)) for a in self.terms.values())):
            return False
        return not self.canonical()

    def __eq__(self, o):
        if isinstance(o, (int, Fraction, QQi, Cyc)):
            return (self - o).is_zero()
        return NotImplemented

    __hash__ = None

    def __complex__(self):
        return sum((complex(float(a)) * cmath.exp(2j * cmath.pi * k / d) for (k, d), a in self.terms.items()), 0j)

    def to_gaussian(self):
        """Exact value in Q(i) as Fraction/QQi, or None when the value is not a Gaussian rational."""
        n = lcm(self.conductor(), 4)
        mine = self.canonical(n)
        one = Cyc.root(0).canonical(n)
        i_can = Cyc.root(Fraction(1, 4)).canonical(n)
        (t1, c1), = one.items()
        (ti, ci), = i_can.items()
        if any(t not in (t1, ti) for t in mine):
            return None
        return gauss(mine.get(t1, 0) / c1, mine.get(ti, 0) / ci)

    def __repr__(self):
        body = " + ".join(f"{a}*e({Fraction(k, d)})" for (k, d), a in sorted(self.terms.items(), key=lambda t: Fraction(*t[0])))
        return f"Cyc({body or '0'})"
