"""Truncated power series over exact Gaussian rationals or complex floats."""

from __future__ import annotations

import json
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import ConstantTermError, KindMismatchError, ValidationError
from .generators import enumerate_S, validate_generators

RATIONAL = "rational"
FLOAT = "float"
FLOAT_TOL = 1e-12


class QQi:
    """Gaussian rational re + i*im with a nonzero imaginary part.

    Use :func:`gauss` to build values; it collapses to a plain Fraction when im == 0,
    so real exact series never pay for complex arithmetic.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __repr__(self):
        return f"QQi({self.re}, {self.im})"

    def __add__(self, o):
        if isinstance(o, QQi):
            return gauss(self.re + o.re, self.im + o.im)
        if isinstance(o, Rational):
            return QQi(self.re + o, self.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __sub__(self, o):
        if isinstance(o, QQi):
            return gauss(self.re - o.re, self.im - o.im)
        if isinstance(o, Rational):
            return QQi(self.re - o, self.im)
        return NotImplemented

    def __rsub__(self, o):
        if isinstance(o, Rational):
            return QQi(o - self.re, -self.im)
        return NotImplemented

    def __mul__(self, o):
        if isinstance(o, QQi):
            return gauss(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
        if isinstance(o, Rational):
            return gauss(self.re * o, self.im * o)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Rational):
            return gauss(self.re / o, self.im / o)
        if isinstance(o, QQi):
            d = o.re * o.re + o.im * o.im
            return self * QQi(o.re / d, -o.im / d)
        return NotImplemented

    def __rtruediv__(self, o):
        if isinstance(o, Rational):
            d = self.re * self.re + self.im * self.im
            return gauss(o * self.re / d, -o * self.im / d)
        return NotImplemented

    def __eq__(self, o):
        if isinstance(o, QQi):
            return self.re == o.re and self.im == o.im
        if isinstance(o, Rational):
            return self.im == 0 and self.re == o
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return QQi(self.re, -self.im)

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im


def gauss(re, im=0):
    """Exact Gaussian rational; a Fraction when the imaginary part vanishes."""
    im = Fraction(im)
    if im == 0:
        return Fraction(re)
    return QQi(re, im)


def _parse_rational(x):
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, bool):
        raise ValidationError("booleans are not scalars")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise ValidationError(f"exact scalar expected, got {x!r}")


def to_exact(x):
    """Coerce int/Fraction/QQi/'p/q' strings/(re, im) pairs to an exact scalar."""
    if isinstance(x, QQi):
        return gauss(x.re, x.im)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return gauss(_parse_rational(x[0]), _parse_rational(x[1]))
    if isinstance(x, float) or isinstance(x, complex):
        raise KindMismatchError(f"float scalar {x!r} in an exact series")
    return _parse_rational(x)


def _is_zero_exact(c):
    return c == 0


class TaylorSeries:
    """Immutable truncated series a_0 + a_1 z + ... + a_K z^K.

    ``kind`` is ``"rational"`` (exact Gaussian rationals) or ``"float"`` (complex floats).
    Binary operations require matching kinds and truncate to the smaller order.
    """

    __slots__ = ("_c", "kind")

    def __init__(self, coeffs, kind=RATIONAL, order=None):
        if kind not in (RATIONAL, FLOAT):
            raise ValidationError(f"unknown scalar kind {kind!r}")
        coeffs = list(coeffs)
        if order is not None:
            if order < 0:
                raise ValidationError("order must be non-negative")
            coeffs = coeffs[: order + 1]
            coeffs += [0] * (order + 1 - len(coeffs))
        if not coeffs:
            raise ValidationError("a series needs at least one coefficient")
        if kind == RATIONAL:
            self._c = tuple(to_exact(c) for c in coeffs)
        else:
            self._c = tuple(complex(c) for c in coeffs)
        self.kind = kind

    @classmethod
    def _raw(cls, coeffs, kind):
        s = object.__new__(cls)
        s._c = tuple(coeffs)
        s.kind = kind
        return s

    # construction helpers
    @classmethod
    def zero(cls, order, kind=RATIONAL):
        return cls._raw([Fraction(0) if kind == RATIONAL else 0j] * (order + 1), kind)

    @classmethod
    def one(cls, order, kind=RATIONAL):
        s = cls.zero(order, kind)
        c = list(s._c)
        c[0] = Fraction(1) if kind == RATIONAL else 1 + 0j
        return cls._raw(c, kind)

    @classmethod
    def monomial(cls, n, order, coeff=1, kind=RATIONAL):
        c = [0] * (order + 1)
        if n <= order:
            c[n] = coeff
        return cls(c, kind)

    @classmethod
    def from_numpy(cls, arr):
        return cls._raw([complex(x) for x in np.asarray(arr, dtype=complex)], FLOAT)

    # basic accessors
    @property
    def order(self):
        return len(self._c) - 1

    @property
    def coeffs(self):
        return self._c

    def __getitem__(self, n):
        return self._c[n]

    def __len__(self):
        return len(self._c)

    def __iter__(self):
        return iter(self._c)

    def __repr__(self):
        return f"TaylorSeries({list(self._c)!r}, kind={self.kind!r})"

    def to_numpy(self):
        return np.array([complex(c) for c in self._c], dtype=complex)

    def to_float(self):
        if self.kind == FLOAT:
            return self
        return TaylorSeries._raw([complex(c) for c in self._c], FLOAT)

    def truncate(self, order):
        if order > self.order:
            raise ValidationError(f"cannot extend order {self.order} to {order}")
        return TaylorSeries._raw(self._c[: order + 1], self.kind)

    def _check(self, other):
        if not isinstance(other, TaylorSeries):
            raise TypeError(f"expected TaylorSeries, got {type(other).__name__}")
        if other.kind != self.kind:
            raise KindMismatchError(f"scalar kinds differ: {self.kind} vs {other.kind}")
        return min(self.order, other.order)

    # arithmetic
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return TaylorSeries._raw([-c for c in self._c], self.kind)

    def __mul__(self, other):
        if isinstance(other, TaylorSeries):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, s):
        if self.kind == RATIONAL:
            s = to_exact(s)
        else:
            s = complex(s)
        return TaylorSeries._raw([s * c for c in self._c], self.kind)

    def shift_constant(self, c):
        out = list(self._c)
        out[0] = out[0] + (to_exact(c) if self.kind == RATIONAL else complex(c))
        return TaylorSeries._raw(out, self.kind)

    def max_abs_diff(self, other):
        K = self._check(other)
        a = np.array([complex(x) for x in self._c[: K + 1]])
        b = np.array([complex(x) for x in other._c[: K + 1]])
        return float(np.max(np.abs(a - b))) if K >= 0 else 0.0

    def equals(self, other, tol=None):
        """Coefficientwise equality to the common order: exact for rationals, 1e-12 for floats."""
        K = self._check(other)
        if self.kind == RATIONAL and tol is None:
            return all(self._c[n] == other._c[n] for n in range(K + 1))
        return self.max_abs_diff(other) <= (FLOAT_TOL if tol is None else tol)

    def __eq__(self, other):
        if not isinstance(other, TaylorSeries) or other.kind != self.kind:
            return NotImplemented
        return self.order == other.order and self.equals(other)

    __hash__ = None

    # JSON
    def to_json(self):
        def enc(c):
            if self.kind == RATIONAL:
                if isinstance(c, QQi):
                    return [str(c.re), str(c.im)]
                return [str(c), "0"]
            return [c.real, c.imag]

        return {"order": self.order, "kind": self.kind, "coeffs": [enc(c) for c in self._c]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            kind = obj["kind"]
            order = int(obj["order"])
            raw = obj["coeffs"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"series JSON needs order, kind and coeffs: {exc}") from exc
        if len(raw) != order + 1:
            raise ValidationError(f"series JSON: expected {order + 1} coefficients, got {len(raw)}")
        if kind == RATIONAL:
            return cls([to_exact(tuple(c)) for c in raw], RATIONAL)
        if kind == FLOAT:
            return cls([complex(float(c[0]), float(c[1])) for c in raw], FLOAT)
        raise ValidationError(f"unknown kind {kind!r}")


def add(f, g):
    K = f._check(g)
    return TaylorSeries._raw([f._c[n] + g._c[n] for n in range(K + 1)], f.kind)


def sub(f, g):
    K = f._check(g)
    return TaylorSeries._raw([f._c[n] - g._c[n] for n in range(K + 1)], f.kind)


def mul(f, g):
    """Cauchy product truncated at the common order."""
    K = f._check(g)
    if f.kind == FLOAT:
        a = np.array(f._c[: K + 1], dtype=complex)
        b = np.array(g._c[: K + 1], dtype=complex)
        return TaylorSeries.from_numpy(np.convolve(a, b)[: K + 1])
    a, b = f._c, g._c
    nz_a = [(i, a[i]) for i in range(K + 1) if a[i] != 0]
    out = [Fraction(0)] * (K + 1)
    for j in range(K + 1):
        bj = b[j]
        if bj == 0:
            continue
        for i, ai in nz_a:
            if i + j > K:
                break
            out[i + j] = out[i + j] + ai * bj
    return TaylorSeries._raw(out, f.kind)


def _require_constant(f, value, what):
    c = f[0]
    if f.kind == RATIONAL:
        ok = c == value
    else:
        ok = abs(complex(c) - value) <= FLOAT_TOL
    if not ok:
        raise ConstantTermError(f"{what} requires constant term {value}, got {c}")


def exp_series(h):
    """exp(h) for h(0) = 0 via n g_n = sum_{k=1}^n k h_k g_{n-k}."""
    _require_constant(h, 0, "exp_series")
    K = h.order
    if h.kind == FLOAT:
        kh = np.arange(K + 1) * np.array(h._c, dtype=complex)
        g = np.zeros(K + 1, dtype=complex)
        g[0] = 1.0
        for n in range(1, K + 1):
            g[n] = np.dot(kh[1: n + 1], g[n - 1::-1]) / n
        return TaylorSeries.from_numpy(g)
    kh = [(k, k * h._c[k]) for k in range(1, K + 1) if h._c[k] != 0]
    g = [Fraction(1)] + [Fraction(0)] * K
    for n in range(1, K + 1):
        s = Fraction(0)
        for k, v in kh:
            if k > n:
                break
            s = s + v * g[n - k]
        g[n] = s / n
    return TaylorSeries._raw(g, RATIONAL)


def log_series(f):
    """log(f) for f(0) = 1; inverse of :func:`exp_series`."""
    _require_constant(f, 1, "log_series")
    K = f.order
    if f.kind == FLOAT:
        a = np.array(f._c, dtype=complex)
        kh = np.zeros(K + 1, dtype=complex)
        for n in range(1, K + 1):
            # n a_n = sum_{k=1}^n k h_k a_{n-k}
            acc = np.dot(kh[1:n], a[n - 1:0:-1]) if n > 1 else 0
            kh[n] = n * a[n] - acc
        h = kh / np.maximum(np.arange(K + 1), 1)
        h[0] = 0
        return TaylorSeries.from_numpy(h)
    a = f._c
    nz = [(k, a[k]) for k in range(1, K + 1) if a[k] != 0]
    kh = [Fraction(0)] * (K + 1)
    for n in range(1, K + 1):
        s = n * a[n]
        for k, ak in nz:
            if k >= n:
                break
            # term with h index n-k and a index k
            if kh[n - k] != 0:
                s = s - kh[n - k] * ak
        kh[n] = s
    return TaylorSeries._raw([Fraction(0)] + [kh[n] / n for n in range(1, K + 1)], RATIONAL)


def compose_zN(f, N):
    """f(z^N) truncated at the same order."""
    N = int(N)
    if N < 1:
        raise ValidationError("N must be at least 1")
    K = f.order
    zero = Fraction(0) if f.kind == RATIONAL else 0j
    out = [zero] * (K + 1)
    for m in range(0, K // N + 1):
        out[m * N] = f._c[m]
    return TaylorSeries._raw(out, f.kind)


def contract_N(f, N):
    """Series g with g(z^N) = f(z) for f supported on multiples of N; order drops to K // N."""
    N = int(N)
    return TaylorSeries._raw([f._c[m * N] for m in range(f.order // N + 1)], f.kind)


def trace_N(h, N):
    """Tr_N h = N * sum_{N | v} a_v z^v."""
    N = int(N)
    if N < 1:
        raise ValidationError("N must be at least 1")
    zero = Fraction(0) if h.kind == RATIONAL else 0j
    out = [N * c if n % N == 0 else zero for n, c in enumerate(h._c)]
    return TaylorSeries._raw(out, h.kind)


def mult_trace(f, N):
    """prod_{zeta^N = 1} f(zeta z), computed as exp(Tr_N log f)."""
    _require_constant(f, 1, "mult_trace")
    return exp_series(trace_N(log_series(f), N))


def power(f, n):
    """f^n for a non-negative integer n by repeated squaring."""
    result = TaylorSeries.one(f.order, f.kind)
    base = f
    while n:
        if n & 1:
            result = mul(result, base)
        base = mul(base, base)
        n >>= 1
    return result


def feq_residual(f, N):
    """Max coefficient gap between f(z^N)^N and prod_{zeta^N=1} f(zeta z)."""
    _require_constant(f, 1, "feq_residual")
    lhs = power(compose_zN(f, N), int(N))
    rhs = mult_trace(f, N)
    return lhs.max_abs_diff(rhs)


def _subset_products(gens):
    out = [(1, 0)]
    for g in gens:
        out = out + [(m * g, k + 1) for m, k in out]
    return out


def phi_S(f, S):
    """Phi_S f = exp(sum_d (-1)^|d| log f(z^{prod N_i^d_i}))."""
    gens = validate_generators(S)
    _require_constant(f, 1, "phi_S")
    L = log_series(f)
    acc = TaylorSeries.zero(f.order, f.kind)
    for m, k in _subset_products(gens):
        term = compose_zN(L, m)
        acc = acc + term if k % 2 == 0 else acc - term
    return exp_series(acc)


def omega_S(f, S):
    """Omega_S f: delete log-coefficients at indices divisible by some generator."""
    gens = validate_generators(S)
    _require_constant(f, 1, "omega_S")
    L = log_series(f)
    zero = Fraction(0) if f.kind == RATIONAL else 0j
    out = [c if all(n % g for g in gens) else zero for n, c in enumerate(L._c)]
    out[0] = zero
    return exp_series(TaylorSeries._raw(out, f.kind))


def psi_S_product(alpha, S):
    """prod_{N in S, N <= K} alpha(z^N); exact at order K since alpha(z^N) = 1 + O(z^N)."""
    _require_constant(alpha, 1, "psi_S_product")
    result = TaylorSeries.one(alpha.order, alpha.kind)
    for N in enumerate_S(S, max(alpha.order, 1)):
        result = mul(result, compose_zN(alpha, N))
    return result


def psi_S_log(h, S):
    """Additive counterpart of :func:`psi_S_product`: sum_{N in S} h(z^N)."""
    acc = TaylorSeries.zero(h.order, h.kind)
    for N in enumerate_S(S, max(h.order, 1)):
        acc = acc + compose_zN(h, N)
    return acc


def evaluate(f, z):
    """Horner evaluation of the truncated polynomial at a complex point."""
    acc = 0j
    for c in reversed(f._c):
        acc = acc * z + complex(c)
    return acc
