"""Structured circle measures and their Fourier coefficients.

Angles are measured in turns: an angle t stands for the point e^{2 pi i t}. Exact
angles are Fractions, so Fourier windows of trees built from exact data are computed
exactly in cyclotomic fields.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from math import gcd
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .cyclotomic import Cyc
from .errors import ToleranceError, ValidationError
from .series import FLOAT, QQi, RATIONAL, TaylorSeries, exp_series, to_exact

MAX_INDEX = 10 ** 6
MAX_DEPTH = 400


def _exact(x):
    return isinstance(x, Rational) and not isinstance(x, bool)


def _turn(t):
    """Normalize an angle in turns to [0, 1)."""
    if _exact(t):
        t = Fraction(t)
        return t - (t.numerator // t.denominator)
    t = float(t) % 1.0
    return 0.0 if t == 1.0 else t


def _scalar(x):
    if isinstance(x, bool):
        raise ValidationError("boolean is not a scalar")
    if _exact(x):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


def _e(t):
    return cmath.exp(2j * math.pi * float(t))


# expression tree ---------------------------------------------------------------

class MeasureExpr:
    """Base class of measure expression nodes."""

    def __add__(self, other):
        return LinComb(((1, self), (1, other)))

    def __rmul__(self, s):
        return LinComb(((s, self),))

    def __sub__(self, other):
        return LinComb(((1, self), (-1, other)))


@dataclass(frozen=True)
class Haar(MeasureExpr):
    mass: object = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "mass", _scalar(self.mass))


@dataclass(frozen=True)
class Atom(MeasureExpr):
    """weight * delta at the point e^{2 pi i turn}."""

    turn: object
    weight: object = Fraction(1)

    def __post_init__(self):
        if isinstance(self.turn, str):
            object.__setattr__(self, "turn", Fraction(self.turn))
        object.__setattr__(self, "turn", _turn(self.turn))
        object.__setattr__(self, "weight", _scalar(self.weight))

    @classmethod
    def from_radians(cls, theta, weight=1):
        return cls(float(theta) / (2 * math.pi), weight)


@dataclass(frozen=True)
class Density(MeasureExpr):
    """Real trigonometric density given by c_0, ..., c_L; c_{-v} = conj(c_v)."""

    coeffs: tuple

    def __post_init__(self):
        cs = []
        for c in self.coeffs:
            if isinstance(c, (float, complex)):
                cs.append(complex(c))
            else:
                cs.append(to_exact(c))
        if not cs:
            raise ValidationError("density needs c_0")
        c0 = cs[0]
        if (isinstance(c0, complex) and abs(c0.imag) > 1e-15) or isinstance(c0, QQi):
            raise ValidationError("c_0 of a real density must be real")
        object.__setattr__(self, "coeffs", tuple(cs))


@dataclass(frozen=True)
class DigitBernoulli(MeasureExpr):
    """Law of sum_k d_k N^{-k} (in turns) with i.i.d. digits d_k ~ weights."""

    base: int
    weights: tuple

    def __post_init__(self):
        N = int(self.base)
        if N < 2:
            raise ValidationError("base must be at least 2")
        w = tuple(_scalar(p) for p in self.weights)
        if len(w) != N:
            raise ValidationError(f"need {N} digit weights, got {len(w)}")
        if any(p < 0 for p in w):
            raise ValidationError("digit weights must be non-negative")
        if abs(float(sum(w)) - 1) > 1e-12:
            raise ValidationError("digit weights must sum to 1")
        object.__setattr__(self, "base", N)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class Rotate(MeasureExpr):
    """[eta]_* inner with eta = e^{2 pi i turn}."""

    turn: object
    inner: MeasureExpr

    def __post_init__(self):
        if isinstance(self.turn, str):
            object.__setattr__(self, "turn", Fraction(self.turn))
        object.__setattr__(self, "turn", _turn(self.turn))


@dataclass(frozen=True)
class Push(MeasureExpr):
    """N_* inner."""

    N: int
    inner: MeasureExpr

    def __post_init__(self):
        if int(self.N) < 1:
            raise ValidationError("N must be at least 1")
        object.__setattr__(self, "N", int(self.N))


@dataclass(frozen=True)
class Pull(MeasureExpr):
    """N^* inner (average over the N preimages)."""

    N: int
    inner: MeasureExpr

    def __post_init__(self):
        if int(self.N) < 1:
            raise ValidationError("N must be at least 1")
        object.__setattr__(self, "N", int(self.N))


@dataclass(frozen=True)
class LinComb(MeasureExpr):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple((_scalar(s), m) for s, m in self.terms))


def is_exact(e):
    """True when every Fourier coefficient of e is computed exactly."""
    if isinstance(e, Haar):
        return _exact(e.mass)
    if isinstance(e, Atom):
        return _exact(e.turn) and _exact(e.weight)
    if isinstance(e, Density):
        return not any(isinstance(c, complex) for c in e.coeffs)
    if isinstance(e, DigitBernoulli):
        return False
    if isinstance(e, Rotate):
        return _exact(e.turn) and is_exact(e.inner)
    if isinstance(e, (Push, Pull)):
        return is_exact(e.inner)
    if isinstance(e, LinComb):
        return all(_exact(s) and is_exact(m) for s, m in e.terms)
    raise TypeError(f"not a measure expression: {e!r}")


def total_mass(e):
    if isinstance(e, Haar):
        return e.mass
    if isinstance(e, Atom):
        return e.weight
    if isinstance(e, Density):
        c0 = e.coeffs[0]
        return c0.real if isinstance(c0, complex) else c0
    if isinstance(e, DigitBernoulli):
        return Fraction(1)
    if isinstance(e, (Rotate, Push, Pull)):
        return total_mass(e.inner)
    if isinstance(e, LinComb):
        return sum((s * total_mass(m) for s, m in e.terms), Fraction(0))
    raise TypeError(f"not a measure expression: {e!r}")


# Fourier coefficients ----------------------------------------------------------

def _db_depth(db, nu, tol):
    m = sum(d * float(p) for d, p in enumerate(db.weights))
    if m == 0 or nu == 0:
        return 0, 0.0
    N = db.base
    c = 2 * math.pi * abs(nu) * m / (N - 1)
    D = 1
    while True:
        arg = c * float(N) ** (-D)
        bound = math.expm1(arg) if arg < 700 else math.inf
        if bound <= tol:
            return D, bound
        D += 1
        if D > MAX_DEPTH:
            raise ToleranceError(f"digit-Bernoulli depth exceeds {MAX_DEPTH} at index {nu}", bound)


def digit_bernoulli_depth(db, K, tol):
    """Product depth used for the largest index of a window of half-width K."""
    return _db_depth(db, K, tol)[0]


def _db_coef(db, nu, tol):
    D, bound = _db_depth(db, nu, tol)
    N = db.base
    w = [(d, float(p)) for d, p in enumerate(db.weights) if p != 0]
    val = 1 + 0j
    for k in range(1, D + 1):
        Nk = N ** k
        s = 0j
        for d, p in w:
            s += p * _e(-((nu * d) % Nk) / Nk)
        val *= s
    return val, bound


def _coef(e, nu, tol, exact):
    """(value, error) of c_nu(e); values are Cyc when exact, complex otherwise."""
    zero = Cyc() if exact else 0j
    if isinstance(e, Haar):
        if nu != 0:
            return zero, 0.0
        return (Cyc.from_exact(e.mass) if exact else complex(float(e.mass))), 0.0
    if isinstance(e, Atom):
        if exact:
            return Cyc.root(-nu * e.turn, e.weight), 0.0
        if _exact(e.turn):
            ph = _e(-Fraction(nu) * e.turn % 1)
        else:
            ph = _e(-nu * e.turn)
        return float(e.weight) * ph, 0.0
    if isinstance(e, Density):
        L = len(e.coeffs) - 1
        if abs(nu) > L:
            return zero, 0.0
        c = e.coeffs[abs(nu)]
        if exact:
            v = Cyc.from_exact(c)
            return (v if nu >= 0 else v.conjugate()), 0.0
        c = complex(c)
        return (c if nu >= 0 else c.conjugate()), 0.0
    if isinstance(e, DigitBernoulli):
        return _db_coef(e, nu, tol)
    if isinstance(e, Rotate):
        v, err = _coef(e.inner, nu, tol, exact)
        if exact:
            return v.rotate(-nu * e.turn), err
        ph = _e(-Fraction(nu) * e.turn % 1) if _exact(e.turn) else _e(-nu * e.turn)
        return complex(v) * ph, err
    if isinstance(e, Push):
        if abs(nu) * e.N > MAX_INDEX:
            raise ToleranceError(f"push needs inner coefficient {nu * e.N}, above the cap {MAX_INDEX}")
        return _coef(e.inner, nu * e.N, tol, exact)
    if isinstance(e, Pull):
        if nu % e.N:
            return zero, 0.0
        return _coef(e.inner, nu // e.N, tol, exact)
    if isinstance(e, LinComb):
        acc = zero
        err = 0.0
        weight = sum(abs(float(s)) for s, _ in e.terms) or 1.0
        for s, m in e.terms:
            v, er = _coef(m, nu, tol / weight, exact)
            if exact:
                acc.add_scaled(v, s)
            else:
                acc = acc + complex(v) * float(s)
            err += abs(float(s)) * er
        return acc, err
    raise TypeError(f"not a measure expression: {e!r}")


class FourierWindow:
    """Coefficients c_{-K}..c_K with per-coefficient certified error bounds."""

    def __init__(self, K, values, errs, exact):
        if len(values) != 2 * K + 1 or len(errs) != 2 * K + 1:
            raise ValidationError("window length must be 2K+1")
        self.K = K
        self.values = list(values)
        self.errs = list(errs)
        self.exact = exact

    @classmethod
    def from_array(cls, arr, errs=None):
        arr = [complex(a) for a in arr]
        K = (len(arr) - 1) // 2
        return cls(K, arr, errs if errs is not None else [0.0] * len(arr), False)

    def __getitem__(self, nu):
        if abs(nu) > self.K:
            raise IndexError(nu)
        return self.values[nu + self.K]

    def err(self, nu):
        return self.errs[nu + self.K]

    def complex_array(self):
        return np.array([complex(v) for v in self.values])

    def err_array(self):
        return np.array(self.errs, dtype=float)

    def truncate(self, K):
        if K > self.K:
            raise ValidationError("cannot widen a window")
        lo, hi = self.K - K, self.K + K + 1
        return FourierWindow(K, self.values[lo:hi], self.errs[lo:hi], self.exact)

    def to_float(self):
        return FourierWindow(self.K, [complex(v) for v in self.values], self.errs, False)

    def equals(self, other, tol=1e-12):
        """Exact comparison when both windows are exact, else within tol plus error bounds."""
        if other.K != self.K:
            raise ValidationError(f"window widths differ: {self.K} vs {other.K}")
        if self.exact and other.exact:
            return all((a - b).is_zero() for a, b in zip(self.values, other.values))
        return self.max_deviation(other) <= tol + max(self.errs) + max(other.errs)

    def max_deviation(self, other):
        return float(np.max(np.abs(self.complex_array() - other.complex_array())))

    def scale(self, s):
        if self.exact and _exact(s):
            return FourierWindow(self.K, [v * Fraction(s) for v in self.values], self.errs, True)
        s = complex(s)
        return FourierWindow(self.K, [complex(v) * s for v in self.values], [abs(s) * e for e in self.errs], False)

    def __add__(self, other):
        if other.K != self.K:
            raise ValidationError("window widths differ")
        errs = [a + b for a, b in zip(self.errs, other.errs)]
        if self.exact and other.exact:
            return FourierWindow(self.K, [a + b for a, b in zip(self.values, other.values)], errs, True)
        return FourierWindow(self.K, [complex(a) + complex(b) for a, b in zip(self.values, other.values)], errs, False)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["nu", "re", "im", "errbound"])
        for nu in range(-self.K, self.K + 1):
            v = complex(self[nu])
            w.writerow([nu, repr(v.real), repr(v.imag), repr(self.err(nu))])
        return buf.getvalue()


def fourier(mu, K, tol=1e-12):
    """Fourier window of mu for |nu| <= K with certified errors below tol."""
    if K < 0:
        raise ValidationError("K must be non-negative")
    if not tol > 0:
        raise ValidationError("tol must be positive")
    exact = is_exact(mu)
    if exact:
        at = atoms_of(mu)
        if at is not None and len(at) <= FAST_ATOMS:
            return _atomic_window(_merge_atoms(at), K)
    vals, errs = [], []
    for nu in range(-K, K + 1):
        v, er = _coef(mu, nu, tol, exact)
        vals.append(v)
        errs.append(er)
    return FourierWindow(K, vals, errs, exact)


FAST_ATOMS = 20000


def _atomic_window(atoms, K):
    # c_nu = sum_j w_j e(-nu t_j), keyed by reduced integer angles
    keyed = [(Fraction(t).numerator, Fraction(t).denominator, Fraction(w)) for t, w in atoms if w != 0]
    vals = []
    for nu in range(-K, K + 1):
        c = Cyc()
        for k, n, w in keyed:
            m = (-nu * k) % n
            g = gcd(m, n)
            c._acc((m // g, n // g), w)
        vals.append(c)
    return FourierWindow(K, vals, [0.0] * (2 * K + 1), True)


def coefficient(mu, nu, tol=1e-12):
    v, _ = _coef(mu, nu, tol, is_exact(mu))
    return v


# checks and transforms ---------------------------------------------------------

def invariance_check(mu, N, K, tol=1e-12):
    """max_{|v| <= K} |c_v - c_{vN}|; exact verdict for exact trees."""
    if N < 2:
        raise ValidationError("N must be at least 2")
    exact = is_exact(mu)
    dev, errsum, exact_ok = 0.0, 0.0, True
    for nu in range(-K, K + 1):
        a, ea = _coef(mu, nu, tol, exact)
        b, eb = _coef(mu, nu * N, tol, exact)
        if exact:
            if not (a - b).is_zero():
                exact_ok = False
        dev = max(dev, abs(complex(a) - complex(b)))
        errsum = max(errsum, ea + eb)
    passed = exact_ok if exact else dev <= tol + errsum
    return {"N": N, "K": K, "max_deviation": dev, "error_bound": errsum, "exact": exact, "pass": bool(passed)}


def _series_from_coeffs(coeffs, exact, kind):
    if kind == "auto":
        kind = RATIONAL if exact else FLOAT
        if exact:
            gs = [v.to_gaussian() for v in coeffs]
            if any(g is None for g in gs):
                kind = FLOAT
            else:
                return TaylorSeries(gs, RATIONAL)
    if kind == RATIONAL:
        gs = [v.to_gaussian() if isinstance(v, Cyc) else v for v in coeffs]
        if any(g is None for g in gs):
            raise ValidationError("coefficients are not Gaussian rationals")
        return TaylorSeries(gs, RATIONAL)
    return TaylorSeries([complex(v) for v in coeffs], FLOAT)


def herglotz_series(mu, K, kind="auto", tol=1e-12):
    """h_mu = c_0 + 2 sum_{v >= 1} c_v z^v."""
    exact = is_exact(mu)
    cs = [_coef(mu, nu, tol, exact)[0] for nu in range(K + 1)]
    cs = [cs[0]] + [c * 2 for c in cs[1:]]
    return _series_from_coeffs(cs, exact, kind)


def cauchy_series(mu, K, kind="auto", tol=1e-12):
    """K_mu = (h_mu + c_0)/2 = c_0 + sum_{v >= 1} c_v z^v."""
    exact = is_exact(mu)
    cs = [_coef(mu, nu, tol, exact)[0] for nu in range(K + 1)]
    return _series_from_coeffs(cs, exact, kind)


def G_series(mu, K, tol=1e-12):
    """G_mu = (1/(pi i)) sum_{v >= 1} c_v z^v / v (complex floats)."""
    exact = is_exact(mu)
    out = [0j]
    for nu in range(1, K + 1):
        out.append(complex(_coef(mu, nu, tol, exact)[0]) / (1j * math.pi * nu))
    return TaylorSeries(out, FLOAT)


@dataclass(frozen=True)
class FSeries:
    """f_mu = prefactor * series with series(0) = 1."""

    prefactor: float
    series: TaylorSeries


def f_mu_series(mu, K, kind=FLOAT, tol=1e-12):
    """f_mu = exp(-h_mu), split as e^{-c_0} times exp(-(h_mu - c_0))."""
    h = herglotz_series(mu, K, kind=kind if kind == FLOAT else "auto", tol=tol)
    c0 = h[0]
    return FSeries(math.exp(-float(complex(c0).real)), exp_series(-(h.shift_constant(-c0))))


# atomic flattening and moments --------------------------------------------------

def atoms_of(e):
    """Flatten a finite atomic tree to [(turn, weight)], or None if not atomic."""
    if isinstance(e, Atom):
        return [(e.turn, e.weight)]
    if isinstance(e, Haar):
        return [] if e.mass == 0 else None
    if isinstance(e, Density):
        return [] if all(c == 0 for c in e.coeffs) else None
    if isinstance(e, DigitBernoulli):
        nz = [d for d, p in enumerate(e.weights) if p != 0]
        if nz == [0]:
            return [(Fraction(0), Fraction(1))]
        return None
    if isinstance(e, Rotate):
        inner = atoms_of(e.inner)
        return None if inner is None else [(_turn(t + e.turn), w) for t, w in inner]
    if isinstance(e, Push):
        inner = atoms_of(e.inner)
        return None if inner is None else [(_turn(t * e.N), w) for t, w in inner]
    if isinstance(e, Pull):
        inner = atoms_of(e.inner)
        if inner is None:
            return None
        out = []
        for t, w in inner:
            for k in range(e.N):
                out.append((_turn((t + k) / e.N if _exact(t) else (t + k) / e.N), w / e.N))
        return out
    if isinstance(e, LinComb):
        out = []
        for s, m in e.terms:
            inner = atoms_of(m)
            if inner is None:
                return None
            out += [(t, s * w) for t, w in inner]
        return out
    raise TypeError(f"not a measure expression: {e!r}")


def _merge_atoms(atoms):
    merged = {}
    for t, w in atoms:
        merged[t] = merged.get(t, 0) + w
    return sorted(merged.items(), key=lambda tw: float(tw[0]))


def jordan_parts(mu):
    """Split a finite atomic measure into positive and negative parts after merging equal angles."""
    at = atoms_of(mu)
    if at is None:
        raise ValidationError("jordan_parts needs a finite atomic measure")
    merged = _merge_atoms(at)
    pos = [Atom(t, w) for t, w in merged if w > 0]
    neg = [Atom(t, -w) for t, w in merged if w < 0]
    return LinComb(tuple((1, a) for a in pos)), LinComb(tuple((1, a) for a in neg))


def first_moment(e):
    """(value, error) of the integral of t dmu(t) over t in [0, 1) (angles in turns)."""
    at = atoms_of(e)
    if at is not None:
        return float(sum((t * w for t, w in at), Fraction(0)) if all(_exact(t) and _exact(w) for t, w in at)
                     else sum(float(t) * float(w) for t, w in at)), 0.0
    if isinstance(e, Haar):
        return float(e.mass) / 2, 0.0
    if isinstance(e, Density):
        v = float(complex(e.coeffs[0]).real) / 2
        for nu in range(1, len(e.coeffs)):
            v += 2 * (complex(e.coeffs[nu]) / (2j * math.pi * nu)).real
        return v, 0.0
    if isinstance(e, DigitBernoulli):
        m = sum(d * float(p) for d, p in enumerate(e.weights))
        return m / (e.base - 1), 0.0
    if isinstance(e, Pull):
        v, err = first_moment(e.inner)
        M = float(total_mass(e.inner))
        return v / e.N + (e.N - 1) / (2 * e.N) * M, err / e.N
    if isinstance(e, LinComb):
        v, err = 0.0, 0.0
        for s, m in e.terms:
            a, b = first_moment(m)
            v += float(s) * a
            err += abs(float(s)) * b
        return v, err
    return _fejer_moment(e)


def _fejer_moment(e, L=4096):
    def est(L):
        v = float(total_mass(e)) / 2
        for nu in range(1, L + 1):
            c = complex(coefficient(e, nu))
            v += (1 - nu / (L + 1)) * 2 * (c / (2j * math.pi * nu)).real
        return v

    a, b = est(L // 2), est(L)
    return b, abs(b - a)


def muhat_fourier(mu, K, tol=1e-12):
    """Window of the cumulative mass function: c_v(muhat) = (c_v - mu(T))/(2 pi i v), c_0 = mu_0."""
    M = float(total_mass(mu))
    w = fourier(mu, K, tol).to_float()
    vals, errs = [], []
    m1, m1_err = first_moment(mu)
    for nu in range(-K, K + 1):
        if nu == 0:
            vals.append(complex(M - m1))
            errs.append(m1_err)
        else:
            vals.append((complex(w[nu]) - M) / (2j * math.pi * nu))
            errs.append(w.err(nu) / (2 * math.pi * abs(nu)))
    return FourierWindow(K, vals, errs, False)


def convolve(a, b, K=None, tol=1e-12):
    """Coefficientwise product of two windows (measures are evaluated first)."""
    if isinstance(a, MeasureExpr):
        if K is None:
            K = b.K if isinstance(b, FourierWindow) else None
        if K is None:
            raise ValidationError("K is required when convolving two expressions")
        a = fourier(a, K, tol)
    if isinstance(b, MeasureExpr):
        b = fourier(b, a.K, tol)
    if a.K != b.K:
        raise ValidationError(f"window widths differ: {a.K} vs {b.K}")
    exact = a.exact and b.exact
    vals, errs = [], []
    for x, y, ex, ey in zip(a.values, b.values, a.errs, b.errs):
        vals.append(x * y if exact else complex(x) * complex(y))
        errs.append(abs(complex(x)) * ey + abs(complex(y)) * ex + ex * ey)
    return FourierWindow(a.K, vals, errs, exact)


def corollary9_check(c, N, eps=1.0, n_max=None, bound=None, threshold=0.1, tol=1e-10):
    """Check the coefficient-growth conditions for invariance on a coefficient window.

    (i) Hermitian symmetry, (ii) c_{vN} = c_v inside the window, (iii') partial sums of
    |b_n(eps)|^2 where sum b_n z^n = exp(-eps sum_{v >= 1} c_v z^v). The convergence verdict
    is heuristic: the share of the last half of the partial sum must fall below threshold.
    """
    if not isinstance(c, FourierWindow):
        c = FourierWindow.from_array(c)
    arr = c.complex_array()
    K = c.K
    mags = np.abs(arr[K:])
    if bound is not None:
        if np.max(mags) > bound + tol:
            raise ValidationError(f"sequence exceeds the declared bound {bound}")
    elif K >= 4:
        half = K // 2
        lo, hi = np.max(mags[: half + 1]), np.max(mags[half + 1:])
        if hi > 1.5 * lo + tol:
            raise ValidationError("sequence looks unbounded (growth across the window)")
    herm = float(np.max(np.abs(arr[K + 1:] - np.conj(arr[K - 1::-1])))) if K else 0.0
    inv = 0.0
    for nu in range(-(K // N), K // N + 1):
        inv = max(inv, abs(arr[K + nu * N] - arr[K + nu]))
    n_max = K if n_max is None else min(n_max, K)
    h = np.concatenate([[0], -eps * arr[K + 1: K + n_max + 1]])
    b = exp_series(TaylorSeries.from_numpy(h)).to_numpy()
    partial = np.cumsum(np.abs(b) ** 2)
    total = partial[-1]
    tail = total - partial[n_max // 2]
    ratio = float(tail / total) if total > 0 else 0.0
    return {
        "hermitian_deviation": herm,
        "hermitian": herm <= tol,
        "invariance_deviation": float(inv),
        "invariant": float(inv) <= tol,
        "partial_sums": partial.tolist(),
        "tail_ratio": ratio,
        "converges_heuristic": ratio < threshold,
        "advisory": True,
    }


# Herglotz evaluation -----------------------------------------------------------

def _h_eval(e, z, tol):
    if isinstance(e, Haar):
        return complex(float(e.mass))
    if isinstance(e, Atom):
        zeta = _e(e.turn)
        return float(e.weight) * (zeta + z) / (zeta - z)
    if isinstance(e, Density):
        acc = 0j
        for c in reversed(e.coeffs[1:]):
            acc = (acc + 2 * complex(c)) * z
        return acc + complex(e.coeffs[0])
    if isinstance(e, DigitBernoulli):
        r = abs(z)
        half = tol / 2
        if r == 0:
            return 1 + 0j
        # tail 2 sum_{v > K} r^v = 2 r^{K+1}/(1-r) <= tol/2
        K = max(1, int(math.ceil(math.log(half * (1 - r) / 2) / math.log(r))))
        if K > MAX_INDEX:
            raise ToleranceError(f"herglotz evaluation at |z|={r} needs {K} coefficients", 2 * r ** MAX_INDEX / (1 - r))
        # coefficient errors contribute at most 2 * per * r/(1-r) <= tol/2
        per = max(half * (1 - r) / 4, 1e-16)
        acc = 0j
        zp = 1 + 0j
        for nu in range(1, K + 1):
            zp *= z
            acc += _db_coef(e, nu, per)[0] * zp
        return 1 + 2 * acc
    if isinstance(e, Rotate):
        return _h_eval(e.inner, z * _e(-e.turn), tol)
    if isinstance(e, Pull):
        return _h_eval(e.inner, z ** e.N, tol)
    if isinstance(e, Push):
        if z == 0:
            return _h_eval(e.inner, 0j, tol)
        r, a = abs(z), cmath.phase(z)
        rr = r ** (1 / e.N)
        return sum(_h_eval(e.inner, rr * cmath.exp(1j * (a + 2 * math.pi * k) / e.N), tol) for k in range(e.N)) / e.N
    if isinstance(e, LinComb):
        weight = sum(abs(float(s)) for s, _ in e.terms) or 1.0
        return sum((float(s) * _h_eval(m, z, tol / weight) for s, m in e.terms), 0j)
    raise TypeError(f"not a measure expression: {e!r}")


def eval_herglotz(mu, z, tol=1e-12):
    """h_mu(z) for |z| < 1; closed forms except at digit-Bernoulli leaves (certified partial sums)."""
    z = complex(z)
    if not abs(z) < 1:
        raise ValidationError("z must lie in the open unit disc")
    return _h_eval(mu, z, tol)


# JSON and convenience ----------------------------------------------------------

def orbit_measure(N, q):
    """Uniform probability on the orbit of the exact angle q under t -> N t."""
    q = _turn(Fraction(q))
    orbit = []
    t = q
    while t not in orbit:
        orbit.append(t)
        t = _turn(N * t)
    if t != q:
        raise ValidationError(f"{q} is not periodic under x{N}")
    w = Fraction(1, len(orbit))
    return LinComb(tuple((w, Atom(t)) for t in orbit))


def _enc_scalar(x):
    return str(x) if isinstance(x, Fraction) else x


def _enc_exact(c):
    if isinstance(c, complex):
        return [c.real, c.imag]
    if isinstance(c, QQi):
        return [str(c.re), str(c.im)]
    return [str(c), "0"]


def measure_to_json(e):
    if isinstance(e, Haar):
        return {"type": "haar", "mass": _enc_scalar(e.mass)}
    if isinstance(e, Atom):
        return {"type": "atom", "turn": _enc_scalar(e.turn), "weight": _enc_scalar(e.weight)}
    if isinstance(e, Density):
        return {"type": "density", "coeffs": [_enc_exact(c) for c in e.coeffs]}
    if isinstance(e, DigitBernoulli):
        return {"type": "digit_bernoulli", "base": e.base, "weights": [_enc_scalar(p) for p in e.weights]}
    if isinstance(e, Rotate):
        return {"type": "rotate", "turn": _enc_scalar(e.turn), "inner": measure_to_json(e.inner)}
    if isinstance(e, Push):
        return {"type": "push", "N": e.N, "inner": measure_to_json(e.inner)}
    if isinstance(e, Pull):
        return {"type": "pull", "N": e.N, "inner": measure_to_json(e.inner)}
    if isinstance(e, LinComb):
        return {"type": "lincomb", "terms": [[_enc_scalar(s), measure_to_json(m)] for s, m in e.terms]}
    raise TypeError(f"not a measure expression: {e!r}")


def _dec_scalar(x, path):
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise ValidationError(f"{path}: scalar expected, got {x!r}")
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError as exc:
            raise ValidationError(f"{path}: bad rational {x!r}") from exc
    return x


def _dec_coeff(c, path):
    if isinstance(c, list) and len(c) == 2:
        if all(isinstance(v, str) or (isinstance(v, int) and not isinstance(v, bool)) for v in c):
            return to_exact(tuple(c))
        return complex(float(c[0]), float(c[1]))
    return _dec_scalar(c, path)


def measure_from_json(obj, path="$"):
    """Parse the measure JSON schema; errors name the JSON path of the offending node."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValidationError(f"{path}: object with a 'type' field expected")
    t = obj["type"]
    try:
        if t == "haar":
            return Haar(_dec_scalar(obj.get("mass", 1), path + ".mass"))
        if t == "atom":
            if "turn" in obj:
                return Atom(_dec_scalar(obj["turn"], path + ".turn"), _dec_scalar(obj.get("weight", 1), path + ".weight"))
            if "angle" in obj:
                return Atom.from_radians(float(obj["angle"]), _dec_scalar(obj.get("weight", 1), path + ".weight"))
            raise ValidationError(f"{path}: atom needs 'turn' or 'angle'")
        if t == "density":
            return Density(tuple(_dec_coeff(c, f"{path}.coeffs[{i}]") for i, c in enumerate(obj["coeffs"])))
        if t == "digit_bernoulli":
            return DigitBernoulli(int(obj["base"]), tuple(_dec_scalar(p, f"{path}.weights[{i}]") for i, p in enumerate(obj["weights"])))
        if t == "rotate":
            return Rotate(_dec_scalar(obj["turn"], path + ".turn"), measure_from_json(obj["inner"], path + ".inner"))
        if t == "push":
            return Push(int(obj["N"]), measure_from_json(obj["inner"], path + ".inner"))
        if t == "pull":
            return Pull(int(obj["N"]), measure_from_json(obj["inner"], path + ".inner"))
        if t == "orbit":
            return orbit_measure(int(obj["N"]), _dec_scalar(obj["turn"], path + ".turn"))
        if t == "lincomb":
            return LinComb(tuple((_dec_scalar(s, f"{path}.terms[{i}][0]"), measure_from_json(m, f"{path}.terms[{i}][1]"))
                                 for i, (s, m) in enumerate(obj["terms"])))
    except KeyError as exc:
        raise ValidationError(f"{path}: missing field {exc}") from exc
    except ValidationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    raise ValidationError(f"{path}: unknown measure type {t!r}")
