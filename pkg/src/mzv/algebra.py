"""Linear combinations of nested-sum products and the quasi-shuffle product.

Values live in the free Q-module on formal products zeta(c1)*...*zeta(cr) of
compositions.  Nothing here is numeric: coefficients are exact Fractions and
divergent compositions are carried along as formal symbols (a combination is
"regularized" while it still contains one).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .compositions import Composition, composition, composition_from_json

LEFT = frozenset({1})
RIGHT = frozenset({2})
BOTH = frozenset({1, 2})

# An interleaving pattern is a tuple over {LEFT, RIGHT, BOTH}: the slots of the
# merged composition, each tagged with the operand(s) contributing to it.


def interleavings(a1: int, a2: int, a12: int):
    """All patterns with a1 left-only, a2 right-only and a12 merged slots."""
    if min(a1, a2, a12) < 0:
        raise ValueError("slot counts must be >= 0")
    n = a1 + a2 + a12
    out = set()
    for left_pos in itertools.combinations(range(n), a1):
        rest = [i for i in range(n) if i not in left_pos]
        for right_pos in itertools.combinations(rest, a2):
            slots = [BOTH] * n
            for i in left_pos:
                slots[i] = LEFT
            for i in right_pos:
                slots[i] = RIGHT
            out.add(tuple(slots))
    return out


def merge_parts(left_parts, right_parts, pattern, combine):
    """Fill a pattern with parts from the two operands, combining on BOTH slots.

    The operands are consumed in order; ``combine`` is only called for merged
    slots, so the same walker serves integer parts (combine = add exponents,
    multiply signs) and formal-symbol parts (combine = multiset union).
    """
    li = iter(left_parts)
    ri = iter(right_parts)
    out = []
    for slot in pattern:
        if slot == LEFT:
            out.append(next(li))
        elif slot == RIGHT:
            out.append(next(ri))
        else:
            out.append(combine(next(li), next(ri)))
    for leftover in (li, ri):
        if next(leftover, None) is not None:
            raise ValueError("pattern does not exhaust the operands")
    return tuple(out)


def rho(left: Composition, right: Composition, pattern) -> Composition:
    """Map an interleaving pattern to its merged composition.

    Merged slots add exponents and multiply signs.
    """
    lparts = [(p, left.sign(i)) for i, p in enumerate(left.parts)]
    rparts = [(p, right.sign(i)) for i, p in enumerate(right.parts)]
    merged = merge_parts(
        lparts, rparts, pattern, lambda a, b: (a[0] + b[0], a[1] * b[1])
    )
    return Composition(
        tuple(p for p, _ in merged), tuple(s for _, s in merged)
    )


@dataclass(frozen=True)
class ProductTerm:
    """coefficient * zeta(f1) * ... * zeta(fr), factors kept sorted."""

    coefficient: Fraction
    factors: tuple[Composition, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficient", Fraction(self.coefficient))
        object.__setattr__(
            self, "factors", tuple(sorted(self.factors, key=lambda c: c.sort_key))
        )

    @property
    def weight(self) -> int:
        return sum(f.weight for f in self.factors)

    @property
    def factor_key(self):
        return tuple(f.sort_key for f in self.factors)

    def scaled(self, q) -> "ProductTerm":
        return ProductTerm(self.coefficient * Fraction(q), self.factors)

    def __str__(self):
        if not self.factors:
            return str(self.coefficient)
        body = "·".join(f.zeta_str() for f in self.factors)
        return "%s·%s" % (self.coefficient, body)

    def to_json(self):
        return {
            "coefficient": "%s/%s" % (
                self.coefficient.numerator, self.coefficient.denominator),
            "factors": [f.to_json() for f in self.factors],
        }


@dataclass(frozen=True)
class ZetaCombination:
    """A finite Q-linear combination of product terms."""

    terms: tuple[ProductTerm, ...] = ()

    @property
    def regularized(self) -> bool:
        """True while some factor is a divergent (leading-1) composition."""
        return any(
            not f.admissible for t in self.terms for f in t.factors
        )

    @property
    def weight(self):
        """Common weight of all terms, or None if empty/inhomogeneous."""
        ws = {t.weight for t in self.terms}
        return ws.pop() if len(ws) == 1 else None

    def is_zero(self) -> bool:
        return not normalize(self).terms

    def compositions(self):
        """The distinct factor compositions appearing in the combination."""
        seen = {}
        for t in self.terms:
            for f in t.factors:
                seen[f] = None
        return list(seen)

    def __add__(self, other):
        return normalize(ZetaCombination(self.terms + other.terms))

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return ZetaCombination(tuple(t.scaled(-1) for t in self.terms))

    def scaled(self, q) -> "ZetaCombination":
        q = Fraction(q)
        if q == 0:
            return ZetaCombination()
        return normalize(ZetaCombination(tuple(t.scaled(q) for t in self.terms)))

    def __mul__(self, other):
        """Formal product: juxtaposition of zeta factors, no shuffling."""
        out = []
        for a in self.terms:
            for b in other.terms:
                out.append(
                    ProductTerm(a.coefficient * b.coefficient, a.factors + b.factors)
                )
        return normalize(ZetaCombination(tuple(out)))

    def __str__(self):
        if not self.terms:
            return "0"
        return "  +  ".join(str(t) for t in self.terms).replace("+  -", "-  ")

    def to_json(self):
        return [t.to_json() for t in self.terms]


def normalize(comb: ZetaCombination) -> ZetaCombination:
    """Merge terms with equal factor multisets, drop zeros, sort canonically."""
    acc = {}
    reps = {}
    for t in comb.terms:
        k = t.factor_key
        acc[k] = acc.get(k, Fraction(0)) + t.coefficient
        reps.setdefault(k, t.factors)
    terms = [
        ProductTerm(c, reps[k]) for k, c in acc.items() if c != 0
    ]
    terms.sort(key=lambda t: t.factor_key)
    return ZetaCombination(tuple(terms))


def zeta(*parts) -> ZetaCombination:
    """Convenience: the combination with the single term 1*zeta(parts)."""
    if len(parts) == 1 and isinstance(parts[0], Composition):
        c = parts[0]
    else:
        c = composition(*parts)
    return ZetaCombination((ProductTerm(Fraction(1), (c,)),))


def one(coefficient=1) -> ZetaCombination:
    """The constant term (empty product of zeta factors)."""
    return ZetaCombination((ProductTerm(Fraction(coefficient), ()),))


def stuffle(left: Composition, right: Composition) -> ZetaCombination:
    """Quasi-shuffle product of two nested sums.

    Splits the double summation domain by the interleaving order of the two
    index chains; ties merge slots via rho.
    """
    m, n = left.depth, right.depth
    out = []
    for a in range(min(m, n) + 1):
        for pattern in interleavings(m - a, n - a, a):
            c = rho(left, right, pattern)
            out.append(ProductTerm(Fraction(1), (c,)))
    return normalize(ZetaCombination(tuple(out)))


def combination_from_json(obj) -> ZetaCombination:
    terms = []
    for t in obj:
        num, _, den = t["coefficient"].partition("/")
        coeff = Fraction(int(num), int(den or 1))
        factors = tuple(composition_from_json(f) for f in t["factors"])
        terms.append(ProductTerm(coeff, factors))
    return ZetaCombination(tuple(terms))


# --- divergence elimination -------------------------------------------------
#
# zeta(1) times an admissible sum obeys
#   zeta(1) zeta(k1..kn) = zeta(1,k1..kn)
#       + sum_kappa [ zeta(..,k_kappa+1,..) + zeta(..,k_kappa,1,..) ]
# (split the extra summation index into the gaps of the existing chain).
# Substituting this wherever a zeta(1) factor occurs removes all divergent
# *factors*; the surviving divergent compositions must then cancel among
# themselves, otherwise the combination is not in the eliminable family.


class EliminationError(ValueError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def divergent_expansion(x: Composition) -> ZetaCombination:
    """zeta(1)*zeta(x) rewritten as zeta(1,x) plus admissible corrections."""
    if x.signs is not None:
        raise EliminationError("elimination handles unsigned factors only")
    parts = x.parts
    out = [zeta(Composition((1,) + parts))]
    for kappa in range(len(parts)):
        bumped = parts[:kappa] + (parts[kappa] + 1,) + parts[kappa + 1:]
        inserted = parts[:kappa + 1] + (1,) + parts[kappa + 1:]
        out.append(zeta(Composition(bumped)))
        out.append(zeta(Composition(inserted)))
    total = ZetaCombination()
    for c in out:
        total = total + c
    return total


_ZETA1_KEY = Composition((1,)).sort_key


def eliminate_divergent(comb: ZetaCombination) -> ZetaCombination:
    """Rewrite away zeta(1) factors; fail if divergent terms survive.

    Equal in value to the input under any regularization that respects the
    defining sums, since only exact rearrangement identities are substituted.
    """
    comb = normalize(comb)
    while True:
        target = None
        for t in comb.terms:
            keys = [f.sort_key for f in t.factors]
            if _ZETA1_KEY in keys and len(t.factors) >= 2:
                target = t
                break
        if target is None:
            break
        rest = list(target.factors)
        rest.remove(Composition((1,)))
        partner = max(rest, key=lambda c: c.sort_key)
        if not partner.admissible:
            raise EliminationError(
                "cannot eliminate zeta(1) against divergent partner %s" % partner,
                residual=comb)
        spectators = list(rest)
        spectators.remove(partner)
        replacement = divergent_expansion(partner)
        spectator_comb = ZetaCombination(
            (ProductTerm(target.coefficient, tuple(spectators)),))
        comb = (comb - ZetaCombination((target,))) + spectator_comb * replacement
    bad = [
        t for t in comb.terms
        if any(not f.admissible for f in t.factors)
    ]
    if bad:
        raise EliminationError(
            "divergent terms survive elimination: %s"
            % "; ".join(str(t) for t in bad),
            residual=normalize(ZetaCombination(tuple(bad))))
    return comb
