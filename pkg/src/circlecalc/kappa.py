"""Entropy functions kappa, kappa-entropy of finite and Cantor sets, variation and growth probes.

Arc lengths are normalized so the whole circle has length 1. Membership verdicts coming
from sampling are labeled advisory.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np
from scipy import special

from .errors import ToleranceError, ValidationError
from .generators import enumerate_S, validate_generators


def _check_x(x):
    if not 0 <= x <= 1:
        raise ValidationError(f"kappa argument {x} outside [0, 1]")


def _simpson_integral(x, gamma, tol=1e-13):
    """Adaptive Simpson for int_0^x |log t|^gamma dt after t = x w^4 (smooth at w = 0)."""
    lx = math.log(x)

    def g(w):
        if w == 0:
            return 0.0
        return 4 * x * w ** 3 * abs(lx + 4 * math.log(w)) ** gamma

    def simpson(a, fa, b, fb):
        m = (a + b) / 2
        fm = g(m)
        return m, fm, (b - a) / 6 * (fa + 4 * fm + fb)

    def rec(a, fa, b, fb, m, fm, whole, eps, depth):
        lm, flm, left = simpson(a, fa, m, fm)
        rm, frm, right = simpson(m, fm, b, fb)
        if depth <= 0 or abs(left + right - whole) <= 15 * eps:
            return left + right + (left + right - whole) / 15
        return (rec(a, fa, m, fm, lm, flm, left, eps / 2, depth - 1)
                + rec(m, fm, b, fb, rm, frm, right, eps / 2, depth - 1))

    fa, fb = g(0.0), g(1.0)
    m, fm, whole = simpson(0.0, fa, 1.0, fb)
    return rec(0.0, fa, 1.0, fb, m, fm, whole, tol, 60)


@lru_cache(maxsize=None)
def verify_incomplete_gamma(gamma, n_points=20, tol=1e-10):
    """Compare the incomplete-gamma closed form with quadrature of the defining integral.

    Returns the largest deviation; raises ToleranceError above ``tol``.
    """
    xs = np.geomspace(1e-6, 1.0, n_points)
    c = math.gamma(gamma + 1)
    worst = 0.0
    for x in xs:
        closed = float(special.gammaincc(gamma + 1, -math.log(x))) if x < 1 else 1.0
        quad = _simpson_integral(float(x), gamma) / c
        worst = max(worst, abs(closed - quad))
    if worst > tol:
        raise ToleranceError(f"incomplete gamma cross-check failed for gamma={gamma}: {worst:.3g}", worst)
    return worst


@dataclass(frozen=True)
class Kappa:
    """kappa_gamma(x) = Gamma(gamma+1)^{-1} int_0^x |log t|^gamma dt."""

    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValidationError("gamma must be >= 0")
        if not self.is_integer:
            verify_incomplete_gamma(float(self.gamma))

    @property
    def is_integer(self):
        return float(self.gamma).is_integer()

    def __call__(self, x):
        return kappa_eval(self, x)

    def label(self):
        return f"gamma={self.gamma:g}"


@dataclass(frozen=True)
class PowerKappa:
    """x -> x^alpha for 0 < alpha <= 1."""

    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValidationError("alpha must lie in (0, 1]")

    def __call__(self, x):
        _check_x(x)
        return float(x) ** self.alpha

    def label(self):
        return f"power={self.alpha:g}"


def power_kappa(alpha):
    return PowerKappa(float(alpha))


def kappa_eval(kappa, x):
    if not isinstance(kappa, Kappa):
        return kappa(x)
    x = float(x)
    _check_x(x)
    if x == 0:
        return 0.0
    if x == 1:
        return 1.0
    g = kappa.gamma
    u = -math.log(x)
    if kappa.is_integer:
        term, acc = 1.0, 1.0
        for nu in range(1, int(g) + 1):
            term *= u / nu
            acc += term
        return x * acc
    return float(special.gammaincc(g + 1, u))


def parse_kappa(text):
    """'gamma=<float>' or 'power=<alpha>'."""
    key, _, val = str(text).partition("=")
    try:
        v = float(val)
    except ValueError as exc:
        raise ValidationError(f"bad kappa spec {text!r}") from exc
    if key.strip() == "gamma":
        return Kappa(v)
    if key.strip() == "power":
        return PowerKappa(v)
    raise ValidationError(f"bad kappa spec {text!r}: use gamma=<g> or power=<alpha>")


# axioms ---------------------------------------------------------------------------------

def kappa_axioms_check(kappa, n=1000, seed=0, tol=1e-12):
    """Sampled check of kappa(0)=0, kappa(1)=1, monotonicity, concavity, kappa(x) >= x,
    subadditivity and kappa(x/a) >= kappa(x)/a."""
    rng = np.random.default_rng(seed)
    xs = np.sort(rng.random(n))
    k = np.array([kappa(x) for x in xs])
    fails = []
    if abs(kappa(0.0)) > tol or abs(kappa(1.0) - 1) > tol:
        fails.append("endpoints")
    if np.any(np.diff(k) < -tol):
        fails.append("monotone")
    if np.any(k < xs - tol):
        fails.append("kappa>=x")
    ys = rng.random(n)
    mids = [(kappa((x + y) / 2), (kappa(x) + kappa(y)) / 2) for x, y in zip(xs, ys)]
    if any(m < avg - tol for m, avg in mids):
        fails.append("concave")
    sub = [(kappa(min(1.0, x + y)), kappa(x) + kappa(y)) for x, y in zip(xs / 2, ys / 2)]
    if any(a > b + tol for a, b in sub):
        fails.append("subadditive")
    alphas = 1 + 10 * rng.random(n)
    if any(kappa(x / a) < kappa(x) / a - tol for x, a in zip(xs, alphas)):
        fails.append("scaling")
    return {"kappa": kappa.label(), "samples": n, "failures": fails, "pass": not fails}


def monotonicity_check(delta, gamma, n=1000, seed=0):
    """kappa_delta(x) <= kappa_gamma(x), strictly on the open interval."""
    rng = np.random.default_rng(seed)
    kd, kg = Kappa(delta), Kappa(gamma)
    xs = rng.uniform(1e-9, 1 - 1e-9, n)
    gaps = np.array([kg(x) - kd(x) for x in xs])
    return {"delta": delta, "gamma": gamma, "min_gap": float(gaps.min()), "pass": bool(np.all(gaps > 0))}


# finite sets -------------------------------------------------------------------------

def _exact(x):
    return isinstance(x, Rational) and not isinstance(x, bool)


def _turn(t):
    if _exact(t):
        t = Fraction(t)
        return t - (t.numerator // t.denominator)
    t = float(t) % 1.0
    return 0.0 if t == 1.0 else t


@dataclass(frozen=True)
class FiniteCircleSet:
    """Sorted distinct points in turns."""

    points: tuple

    def __post_init__(self):
        pts = sorted({_turn(p) for p in self.points}, key=float)
        object.__setattr__(self, "points", tuple(pts))

    def __len__(self):
        return len(self.points)

    def gaps(self):
        p = self.points
        if not p:
            return []
        out = [p[i + 1] - p[i] for i in range(len(p) - 1)]
        out.append(1 - p[-1] + p[0])
        return out

    def union(self, other):
        return FiniteCircleSet(self.points + tuple(other.points))


def entropy_finite(E, kappa):
    """sum over the complementary arcs of kappa(length); 0 for the empty set."""
    if not isinstance(E, FiniteCircleSet):
        E = FiniteCircleSet(tuple(E))
    return float(sum(kappa(float(g)) for g in E.gaps()))


def preimage_set(E, N):
    N = int(N)
    return FiniteCircleSet(tuple((p + k) / N if _exact(p) else (float(p) + k) / N
                                 for p in E.points for k in range(N)))


def image_set(E, N, k):
    """phi_N(E cap closed arc [k/N, (k+1)/N])."""
    N, k = int(N), int(k)
    if not 0 <= k < N:
        raise ValidationError("need 0 <= k < N")
    lo, hi = Fraction(k, N), Fraction(k + 1, N)
    sel = [p for p in E.points if lo <= p <= hi]
    if k == N - 1 and any(p == 0 for p in E.points):
        sel.append(Fraction(0))
    return FiniteCircleSet(tuple(_turn(N * p) for p in sel))


def transform_bounds_check(E, N, kappa):
    """kappa(E) <= kappa(phi_N^{-1} E) <= N kappa(E) and kappa(phi_N(E cap I_k)) <= 2N kappa(E)."""
    base = entropy_finite(E, kappa)
    pre = entropy_finite(preimage_set(E, N), kappa)
    imgs = [entropy_finite(image_set(E, N, k), kappa) for k in range(N)]
    slack = 1e-12 * max(1.0, N * base)
    return {
        "kappa_E": base, "kappa_preimage": pre, "kappa_images": imgs,
        "pass": bool(base <= pre + slack and pre <= N * base + slack
                     and all(v <= 2 * N * base + slack for v in imgs)),
    }


# Cantor sets -------------------------------------------------------------------------

@dataclass(frozen=True)
class CantorDesc:
    """Points sum_k d_k N^{-k} (turns) with digits d_k in D."""

    base: int
    digits: tuple

    def __post_init__(self):
        N = int(self.base)
        D = tuple(sorted(set(int(d) for d in self.digits)))
        if N < 2:
            raise ValidationError("base must be >= 2")
        if not D or D[0] < 0 or D[-1] >= N:
            raise ValidationError("digits must be a nonempty subset of 0..N-1")
        if len(D) == N:
            raise ValidationError("digit set must be a proper subset (null set)")
        object.__setattr__(self, "base", N)
        object.__setattr__(self, "digits", D)

    @property
    def hull(self):
        """Length of the convex hull of the Cantor set inside [0, 1]."""
        return Fraction(self.digits[-1] - self.digits[0], self.base - 1)

    def inner_gaps(self):
        """Gaps between consecutive children of a cylinder, in units of the child scale."""
        D, L = self.digits, self.hull
        return [Fraction(b - a) - L for a, b in zip(D, D[1:]) if Fraction(b - a) - L > 0]

    def endpoints(self, depth):
        """Endpoints of the depth-n hull intervals as a finite set."""
        N, D, L = self.base, self.digits, self.hull
        left = [Fraction(D[0], N - 1)]
        for n in range(1, depth + 1):
            scale = Fraction(1, N ** n)
            left = [x + (d - D[0]) * scale for x in left for d in D]
        width = L / N ** depth
        pts = []
        for x in left:
            pts.extend((x, x + width))
        return FiniteCircleSet(tuple(pts))


def cantor_terms(desc, kappa, n):
    """Entropy contribution of the gaps created at level n (n >= 1)."""
    N, D = desc.base, desc.digits
    s = sum(kappa(float(g) / N ** n) for g in desc.inner_gaps())
    return len(D) ** (n - 1) * s


def entropy_cantor(desc, kappa, tol=1e-10, ceiling=1e6, max_levels=10 ** 6):
    """kappa-entropy of the Cantor set with a certified tail bound.

    The entropy is kappa(1 - L) for the outer gap (absent when the hull length L is 1) plus
    sum_n |D|^{n-1} sum_gaps kappa(g N^{-n}). The tail after level n is bounded by
    t_{n+1} q / (1 - q) with q the current term ratio; for the kappa families here the
    ratio is non-increasing in n, which is checked along the way.
    """
    L = desc.hull
    total = kappa(float(1 - L)) if L < 1 else 0.0
    if not desc.inner_gaps():
        return {"value": total, "error_bound": 0.0, "levels": 0, "converged": True, "carleson": True,
                "partial_sums": [total]}
    partial = [total]
    prev = None
    prev_ratio = math.inf
    for n in range(1, max_levels + 1):
        t = cantor_terms(desc, kappa, n)
        total += t
        if n <= 60:
            partial.append(total)
        if total > ceiling:
            return {"value": math.inf, "error_bound": math.inf, "levels": n, "converged": False,
                    "carleson": False, "partial_sums": partial,
                    "reason": f"partial sums exceed {ceiling:g} at level {n}"}
        if prev is not None and prev > 0:
            q = t / prev
            if q < 1 and q <= prev_ratio * (1 + 1e-12):
                tail = t * q / (1 - q)
                if tail <= tol:
                    return {"value": total, "error_bound": tail, "levels": n, "converged": True,
                            "carleson": True, "partial_sums": partial}
            prev_ratio = q
        prev = t
    raise ToleranceError("entropy_cantor: no convergence within the level budget", None)


def cantor_truncation_check(desc, kappa, depths=range(1, 9)):
    """Entropies of depth-n endpoint sets: nondecreasing and bounded by the series value."""
    series = entropy_cantor(desc, kappa)
    vals = [entropy_finite(desc.endpoints(n), kappa) for n in depths]
    mono = all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    below = all(v <= series["value"] + series["error_bound"] + 1e-12 for v in vals)
    return {"series": series["value"], "truncations": vals, "monotone": mono, "bounded": below,
            "pass": mono and below}


MIDDLE_THIRDS_KAPPA1 = 1 + 3 * math.log(3)


# variation and boundedness ---------------------------------------------------------------

def variation_estimate(arc_fn, kappa, levels, offsets=(0.0,)):
    """Dyadic partitions into 2^k equal arcs, rotated by each offset.

    ``arc_fn(starts, length)`` returns arc masses. The reported ratio is a lower bound
    for the kappa-variation norm.
    """
    rows = []
    for k in levels:
        n = 2 ** k
        best = None
        for off in offsets:
            starts = float(off) + np.arange(n) / n
            masses = np.asarray(arc_fn(starts, 1.0 / n))
            s = float(np.sum(np.abs(masses)))
            if best is None or s > best:
                best = s
        ksum = n * kappa(1.0 / n)
        rows.append({"k": k, "abs_sum": best, "kappa_sum": ksum, "ratio": best / ksum})
    return rows


def variation_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["k", "abs_sum", "kappa_sum", "ratio"])
    for r in rows:
        w.writerow([r["k"], repr(r["abs_sum"]), repr(r["kappa_sum"]), repr(r["ratio"])])
    return buf.getvalue()


def adversarial_arcs(max_k=40, max_period=12):
    """Short arcs starting or ending at periodic points of doubling-type maps."""
    pts = {Fraction(0), Fraction(1, 2)}
    for m in range(1, max_period + 1):
        q = 2 ** m - 1
        pts.update(Fraction(j, q) for j in range(q) if q < 64 or j in (1, q - 1))
        q3 = 3 ** m - 1
        if q3 < 200:
            pts.update(Fraction(j, q3) for j in range(q3))
    starts, lengths = [], []
    for p in sorted(pts):
        for k in range(1, max_k + 1):
            L = 2.0 ** -k
            starts += [float(p), float(p) - L]
            lengths += [L, L]
    return np.array(starts), np.array(lengths)


def random_arcs(n, seed=0, min_log2=-40):
    rng = np.random.default_rng(seed)
    return rng.random(n), 2.0 ** rng.uniform(min_log2, 0, n)


def fit_bound(arc_fn, kappa, n=256, seed=1, min_length=2.0 ** -8):
    """Largest |mu(C)| / kappa(|C|) over random calibration arcs of length >= min_length."""
    rng = np.random.default_rng(seed)
    starts = rng.random(n)
    lengths = np.exp(rng.uniform(math.log(min_length), 0, n))
    m = np.abs(np.asarray(arc_fn(starts, lengths)))
    k = np.array([kappa(x) for x in lengths])
    return float(np.max(m / k))


def kappa_bounded_check(arc_fn, kappa, a, samples=10 ** 4, seed=0):
    """Sampled test of |mu(C)| <= a kappa(|C|) on random and adversarial arcs (advisory)."""
    rs, rl = random_arcs(samples, seed)
    as_, al = adversarial_arcs()
    starts = np.concatenate([rs, as_])
    lengths = np.concatenate([rl, al])
    m = np.asarray(arc_fn(starts, lengths))
    k = np.array([kappa(x) for x in lengths])
    ratio = np.abs(m) / k
    i = int(np.argmax(ratio))
    return {"a": a, "worst_ratio": float(ratio[i]), "worst_arc": (float(starts[i]), float(lengths[i])),
            "positive_part_max": float(np.max(m / k)), "negative_part_max": float(np.max(-m / k)),
            "samples": len(starts), "pass": bool(ratio[i] <= a), "advisory": True}


# growth classes ----------------------------------------------------------------------------

def growth_class_check(h, gamma, radii, n_theta=1536, sup_fn=None, tol=1e-9):
    """Profile sup_theta Re h(r e^{i theta}) / |log(1 - r)|^gamma over the radii (advisory).

    ``h(z, tol)`` evaluates the function; ``sup_fn(r)`` may supply the supremum in closed form.
    The verdict "bounded" means the running maximum of the profile over the second half of
    the schedule does not exceed its value at the start of that half.
    """
    thetas = np.arange(n_theta) / n_theta
    rows, last_good = [], None
    for r in radii:
        try:
            if sup_fn is not None:
                sup = float(sup_fn(r))
            else:
                sup = max(h(r * np.exp(2j * np.pi * t), tol).real for t in thetas)
        except ToleranceError as exc:
            return {"rows": rows, "bounded": None, "failed_at": r, "last_good_radius": last_good,
                    "error": str(exc), "advisory": True}
        denom = abs(math.log(1 - r)) ** gamma
        rows.append({"r": r, "sup_re": sup, "ratio": sup / denom})
        last_good = r
    ratios = [row["ratio"] for row in rows]
    half = ratios[len(ratios) // 2:]
    bounded = bool(half and max(half) <= half[0] * (1 + 1e-12) + 1e-15)
    increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
    return {"rows": rows, "bounded": bounded, "increasing": increasing,
            "nonincreasing_envelope": all(b <= a * (1 + 1e-12) + 1e-15 for a, b in zip(half, half[1:])),
            "advisory": True}


def growth_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["r", "sup_re_h", "ratio"])
    for row in report["rows"]:
        w.writerow([repr(row["r"]), repr(row["sup_re"]), repr(row["ratio"])])
    return buf.getvalue()


def lacunary_sum_sup(S, coeff=2.0, tol=1e-12):
    """r -> coeff * sum_{N in S} r^N with the tail bounded by r^{c+1}/(1 - r)."""
    gens = validate_generators(S)

    def sup(r):
        if not 0 <= r < 1:
            raise ValidationError("r must lie in [0, 1)")
        if r == 0:
            return coeff
        c = 1
        while abs(coeff) * r ** (c + 1) / (1 - r) > tol:
            c *= 2
        Ns = np.array(enumerate_S(gens, c), dtype=float)
        return abs(coeff) * float(np.sum(r ** Ns))

    return sup


def lacunary_sum_eval(S, coeff=2.0, tol=1e-12):
    """z -> coeff * sum_{N in S} z^N (h of Psi_S applied to coeff * z)."""
    gens = validate_generators(S)

    def h(z, _tol=tol):
        r = abs(z)
        if r >= 1:
            raise ToleranceError("evaluation outside the open disc", None)
        c = 1
        while r ** (c + 1) / (1 - r) * abs(coeff) > _tol:
            c *= 2
            if c > 2 ** 40:
                raise ToleranceError("too close to the boundary", None)
        Ns = np.array(enumerate_S(gens, c), dtype=float)
        return complex(coeff * np.sum(np.power(complex(z), Ns)))

    return h
