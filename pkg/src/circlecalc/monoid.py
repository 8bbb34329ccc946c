"""The semigroup ring of rotations [zeta] and power maps phi_N, and its actions.

Elements are kept in normal form [zeta] phi_N with zeta = e^{2 pi i q}, q a rational
turn. Composition follows phi_N [zeta] = [zeta^N] phi_N:

    ([q], N) * ([r], M) = ([q + N r], N M).

Right actions are pullbacks: on functions f . [zeta] phi_N = f(zeta z^N), on measures
mu . [zeta] = [zeta^{-1}]_* mu and mu . phi_N = N^* mu. Left actions are pushforwards:
[eta] f = f(eta^{-1} z), phi_N = N_*.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from . import measures as M
from . import premeasure as P
from .cyclotomic import Cyc
from .errors import KindMismatchError, ValidationError
from .generators import enumerate_S, validate_generators
from .series import FLOAT, RATIONAL, TaylorSeries, contract_N, exp_series, log_series

__all__ = [
    "MonoidElem", "AlgebraElem", "mul", "identity", "rot", "phi", "build_phi_S", "build_omega_S",
    "build_eN", "build_trN", "act_right", "act_left", "enumerate_S", "count_bounds",
]


def _q(x):
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


@dataclass(frozen=True, order=True)
class MonoidElem:
    """[e^{2 pi i rotation}] phi_power."""

    rotation: Fraction = Fraction(0)
    power: int = 1

    def __post_init__(self):
        if isinstance(self.rotation, float):
            raise ValidationError("rotations must be exact rational turns")
        object.__setattr__(self, "rotation", _q(self.rotation))
        if int(self.power) != self.power or self.power < 1:
            raise ValidationError("power must be a positive integer")
        object.__setattr__(self, "power", int(self.power))

    def __mul__(self, other):
        return MonoidElem(self.rotation + self.power * other.rotation, self.power * other.power)

    def render(self):
        parts = []
        if self.rotation:
            parts.append(f"[{self.rotation}]")
        if self.power != 1:
            parts.append(f"φ_{self.power}")
        return "".join(parts) or "1"


class AlgebraElem:
    """Finite rational combination of monoid elements."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        for m, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                self.terms[m] = self.terms.get(m, 0) + c
        self.terms = {m: c for m, c in self.terms.items() if c}

    @classmethod
    def of(cls, m, c=1):
        return cls({m: c})

    def __add__(self, o):
        o = _lift(o)
        t = dict(self.terms)
        for m, c in o.terms.items():
            t[m] = t.get(m, 0) + c
        return AlgebraElem(t)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElem({m: -c for m, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-_lift(o))

    def __rsub__(self, o):
        return _lift(o) - self

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            return AlgebraElem({m: c * o for m, c in self.terms.items()})
        return mul(self, o)

    def __rmul__(self, s):
        if isinstance(s, (int, Fraction)):
            return AlgebraElem({m: c * s for m, c in self.terms.items()})
        return NotImplemented

    def __eq__(self, o):
        if isinstance(o, (int, Fraction, AlgebraElem, MonoidElem)):
            return (self - _lift(o)).terms == {}
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"AlgebraElem({self.render()})"

    def render(self):
        if not self.terms:
            return "0"
        out = []
        for m, c in sorted(self.terms.items(), key=lambda mc: (mc[0].power, mc[0].rotation)):
            sign = "-" if c < 0 else "+"
            a = abs(c)
            body = m.render()
            txt = body if a == 1 and body != "1" else (f"{a}" if body == "1" else f"{a}·{body}")
            out.append((sign, txt))
        first = ("-" if out[0][0] == "-" else "") + out[0][1]
        return " ".join([first] + [f"{s} {t}" for s, t in out[1:]])

    def to_json(self):
        return {"terms": [{"rotation": str(m.rotation), "power": m.power, "coeff": str(c)}
                          for m, c in sorted(self.terms.items())]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        terms = {}
        try:
            for i, t in enumerate(obj["terms"]):
                try:
                    m = MonoidElem(Fraction(t.get("rotation", "0")), int(t.get("power", 1)))
                    c = Fraction(t["coeff"])
                except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
                    raise ValidationError(f"$.terms[{i}]: {exc}") from exc
                terms[m] = terms.get(m, 0) + c
        except (KeyError, TypeError) as exc:
            raise ValidationError("$: object with a 'terms' list expected") from exc
        return cls(terms)


def _lift(x):
    if isinstance(x, AlgebraElem):
        return x
    if isinstance(x, MonoidElem):
        return AlgebraElem.of(x)
    if isinstance(x, (int, Fraction)):
        return AlgebraElem.of(MonoidElem(), x)
    raise TypeError(f"cannot use {type(x).__name__} as an algebra element")


def mul(a, b):
    a, b = _lift(a), _lift(b)
    out = {}
    for m1, c1 in a.terms.items():
        for m2, c2 in b.terms.items():
            m = m1 * m2
            out[m] = out.get(m, 0) + c1 * c2
    return AlgebraElem(out)


def identity():
    return _lift(1)


def rot(q):
    return AlgebraElem.of(MonoidElem(Fraction(q), 1))


def phi(N):
    return AlgebraElem.of(MonoidElem(Fraction(0), N))


def build_trN(N):
    N = int(N)
    if N < 1:
        raise ValidationError("N must be at least 1")
    return AlgebraElem({MonoidElem(Fraction(k, N), 1): 1 for k in range(N)})


def build_eN(N):
    return build_trN(N) * Fraction(1, int(N))


def _product(factors):
    out = identity()
    for f in factors:
        out = out * f
    return out


def build_phi_S(S):
    return _product(1 - phi(N) for N in validate_generators(S))


def build_omega_S(S):
    return _product(1 - build_eN(N) for N in validate_generators(S))


# actions ------------------------------------------------------------------------------

ADDITIVE = "additive"
MULTIPLICATIVE = "multiplicative"


def _rotate_series_exact(h, q):
    """h(e^{2 pi i q} z) for a rational series, as a list of Cyc coefficients."""
    return [Cyc.from_exact(c) * Cyc.root(q * n) if c != 0 else Cyc() for n, c in enumerate(h.coeffs)]


def _series_combination(h, parts):
    """sum_k c_k h(zeta_k z^{N_k}) for parts = [(c_k, q_k, N_k)], exact when possible."""
    K = h.order
    if h.kind == RATIONAL:
        acc = [Cyc() for _ in range(K + 1)]
        for c, q, N in parts:
            for n in range(K // N + 1):
                a = h[n]
                if a != 0:
                    acc[n * N] = acc[n * N] + Cyc.from_exact(a) * Cyc.root(q * n, c)
        out = []
        for v in acc:
            g = v.to_gaussian()
            if g is None:
                return TaylorSeries([complex(x) for x in acc], FLOAT)
            out.append(g)
        return TaylorSeries(out, RATIONAL)
    arr = h.to_numpy()
    out = np.zeros(K + 1, dtype=complex)
    for c, q, N in parts:
        n = np.arange(K // N + 1)
        out[n * N] += float(c) * arr[n] * np.exp(2j * np.pi * ((n * float(q)) % 1.0))
    return TaylorSeries.from_numpy(out)


def _series_right(h, a):
    return _series_combination(h, [(c, m.rotation, m.power) for m, c in a.terms.items()])


def _series_left_single(h, m):
    # [q] phi_N h = rotate by -q after N_*, with N_* h = contraction of the N-th coefficients
    g = contract_N(h, m.power) if m.power != 1 else h
    if m.rotation == 0:
        return g
    return _series_combination(g, [(1, -m.rotation, 1)])


def _series_add(terms, K):
    out = None
    for c, s in terms:
        s = s.scale(c) if s.kind == FLOAT else s.scale(Fraction(c))
        if out is None:
            out = s
        else:
            if out.kind != s.kind:
                out, s = out.to_float(), s.to_float()
            out = out + s
    return out if out is not None else TaylorSeries.zero(K)


def _log_of(f):
    return log_series(f).scale(-1 if f.kind == FLOAT else Fraction(-1))


def _exp_of(h):
    return exp_series(h.scale(-1 if h.kind == FLOAT else Fraction(-1)))


def act_right(x, a, mode=ADDITIVE):
    """x . a for a series (additive h or multiplicative f), measure tree or mass function.

    Multiplicative series are handled by log-linearization: f . a = exp(-(h . a)) with
    h = -log f, which needs f(0) = 1.
    """
    a = _lift(a)
    if isinstance(x, TaylorSeries):
        if mode == MULTIPLICATIVE:
            return _exp_of(_series_right(_log_of(x), a))
        if mode != ADDITIVE:
            raise ValidationError(f"unknown mode {mode!r}")
        return _series_right(x, a)
    if isinstance(x, M.MeasureExpr):
        terms = []
        for m, c in a.terms.items():
            y = x
            if m.rotation:
                y = M.Rotate(-m.rotation, y)
            if m.power != 1:
                y = M.Pull(m.power, y)
            terms.append((c, y))
        return M.LinComb(tuple(terms))
    if isinstance(x, P.MassFunction):
        parts = []
        for m, c in a.terms.items():
            y = P.act_rotation(x, m.rotation) if m.rotation else x
            parts.append((float(c), P.act_pull(y, m.power)))
        return P.mf_lincomb(parts)
    raise KindMismatchError(f"no right action on {type(x).__name__}")


def act_left(a, x, mode=ADDITIVE):
    """a . x by pushforward: [eta] acts by the rotation by eta and phi_N by N_*."""
    a = _lift(a)
    if isinstance(x, TaylorSeries):
        if mode == MULTIPLICATIVE:
            return _exp_of(act_left(a, _log_of(x)))
        parts = [(c, _series_left_single(x, m)) for m, c in a.terms.items()]
        return _series_add(parts, x.order)
    if isinstance(x, M.MeasureExpr):
        terms = []
        for m, c in a.terms.items():
            y = M.Push(m.power, x) if m.power != 1 else x
            if m.rotation:
                y = M.Rotate(m.rotation, y)
            terms.append((c, y))
        return M.LinComb(tuple(terms))
    if isinstance(x, P.MassFunction):
        parts = []
        for m, c in a.terms.items():
            y = P.act_push(x, m.power)
            if m.rotation:
                y = P.rotate_measure(y, m.rotation)
            parts.append((float(c), y))
        return P.mf_lincomb(parts)
    raise KindMismatchError(f"no left action on {type(x).__name__}")


# counting -----------------------------------------------------------------------------

def count_S(S, x):
    return len(enumerate_S(S, math.floor(x)))


def calibrated_a1(S):
    """a_1 fitted once per S at x = N_1^s so that count(x) = a_1 (1 + log^s x) there."""
    gens = validate_generators(S)
    s, N1 = len(gens), max(gens)
    x = N1 ** s
    return count_S(gens, x) / (1 + math.log(x) ** s)


def count_bounds(S, x):
    """(count, lower, upper) with lower = s^{-s} log_{N_1}^s x and upper = a_1 (1 + log^s x)."""
    gens = validate_generators(S)
    if x < 1:
        raise ValidationError("x must be at least 1")
    s, N1 = len(gens), max(gens)
    count = count_S(gens, x)
    lower = s ** (-s) * (math.log(x) / math.log(N1)) ** s
    upper = calibrated_a1(gens) * (1 + math.log(x) ** s)
    return count, lower, upper
