"""Finitely generated multiplicative monoids S = <N_1, ..., N_s> of positive integers."""

from fractions import Fraction
from math import gcd

from .errors import ValidationError


def validate_generators(gens):
    """Return the generators as a sorted tuple; they must be pairwise coprime and at least 2."""
    try:
        gs = tuple(sorted(int(g) for g in gens))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"generators must be integers: {gens!r}") from exc
    if not gs:
        raise ValidationError("at least one generator is required")
    for g in gs:
        if g < 2:
            raise ValidationError(f"generator {g} is smaller than 2")
    for i, a in enumerate(gs):
        for b in gs[i + 1:]:
            if gcd(a, b) != 1:
                raise ValidationError(f"generators {a} and {b} are not coprime")
    return gs


def enumerate_S(gens, bound):
    """All products N_1^v_1 ... N_s^v_s <= bound, sorted ascending."""
    gs = validate_generators(gens)
    bound = int(bound)
    if bound < 1:
        return []
    out = [1]
    for g in gs:
        new = []
        for m in out:
            while m <= bound:
                new.append(m)
                m *= g
        out = new
    return sorted(out)


def reciprocal_sum(gens):
    """Exact value of sum_{N in S} 1/N = prod_i N_i/(N_i - 1)."""
    total = Fraction(1)
    for g in validate_generators(gens):
        total *= Fraction(g, g - 1)
    return total


def reciprocal_tail(gens, cutoff):
    """Exact value of sum_{N in S, N > cutoff} 1/N."""
    head = sum((Fraction(1, n) for n in enumerate_S(gens, cutoff)), Fraction(0))
    return reciprocal_sum(gens) - head
