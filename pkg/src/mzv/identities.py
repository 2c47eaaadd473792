"""Closed-form identity families for nested harmonic sums.

Every emitter returns an Identity holding two combinations of equal value.
Families based on splitting the summation domain (reflection, permutation)
hold for signed exponents too; the partial-integration families trade the
outermost or innermost exponent against its neighbours through binomial
rearrangement and are stated for unsigned exponents.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from . import diagrams
from .algebra import (
    ProductTerm,
    ZetaCombination,
    divergent_expansion,
    eliminate_divergent,
    normalize,
    stuffle,
    zeta,
)
from .compositions import Composition, composition, parse_composition

# The substitution that rewrites zeta(1)-factors into admissible terms is
# shared with the diagram reductions; re-exported here under the name callers
# look for when finishing an identity by hand.
eliminate_zeta1 = eliminate_divergent


@dataclass(frozen=True, eq=False)
class Identity:
    """An equation lhs = rhs between combinations of nested sums."""

    family: str
    parameters: dict
    lhs: ZetaCombination
    rhs: ZetaCombination
    derivation: tuple = ()

    @property
    def combination(self) -> ZetaCombination:
        """lhs - rhs; the combination a checker should find to be zero."""
        return normalize(self.lhs - self.rhs)

    @property
    def weight(self):
        return self.lhs.weight

    @property
    def regularized(self) -> bool:
        return self.lhs.regularized or self.rhs.regularized

    def __str__(self):
        return "%s  =  %s" % (self.lhs, self.rhs)

    def to_json(self):
        return {
            "family": self.family,
            "parameters": self.parameters,
            "weight": self.weight,
            "regularized": self.regularized,
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
        }


def _as_composition(x) -> Composition:
    if isinstance(x, Composition):
        return x
    if isinstance(x, str):
        return parse_composition(x)
    return composition(*x)


def _check_unsigned(c: Composition, what: str):
    if c.signs is not None:
        raise ValueError("%s takes unsigned exponents" % what)


# --- domain-splitting families ---------------------------------------------

def reflection(a: int, b: int) -> Identity:
    """zeta(a) zeta(b) split by which of the two indices is larger."""
    left, right = composition(a), composition(b)
    return Identity(
        family="reflection",
        parameters={"a": a, "b": b},
        lhs=zeta(left) * zeta(right),
        rhs=stuffle(left, right),
        derivation=("split the double sum by n > m, n < m, n = m",),
    )


def permutation_identity(left, right) -> Identity:
    """The quasi-shuffle product of two nested sums of any depth."""
    left = _as_composition(left)
    right = _as_composition(right)
    return Identity(
        family="permutation",
        parameters={"left": left.to_json(), "right": right.to_json()},
        lhs=zeta(left) * zeta(right),
        rhs=stuffle(left, right),
        derivation=(
            "split the product domain by the interleaving order of the chains",
        ),
    )


def three_point_identity(a: int, b: int, c: int) -> Identity:
    """Weight-(a+b+c) relation from moving two ordering kernels off the root.

    Built by applying the three-point rewrite at the root of the depth-3
    ladder diagram and evaluating each structural piece exactly.
    """
    for v in (a, b, c):
        if v < 1:
            raise ValueError("exponents must be >= 1")
    d = diagrams.build_seashell((a, b, c))
    pieces = diagrams.rewrite_three_point(d, d.root)
    rhs = ZetaCombination()
    notes = []
    for coeff, piece in pieces:
        val = diagrams.reduce(piece, strategy="structural")
        rhs = rhs + val.scaled(coeff)
        notes.append("%s from %s" % (val, piece))
    return Identity(
        family="three-point",
        parameters={"a": a, "b": b, "c": c},
        lhs=zeta(a, b, c),
        rhs=rhs,
        derivation=tuple(notes),
    )


def shuffle_identity(left, right) -> Identity:
    """zeta(left) zeta(right) expanded into single nested sums by repeated
    partial integration of a double-branch diagram."""
    left = _as_composition(left)
    right = _as_composition(right)
    _check_unsigned(left, "shuffle")
    _check_unsigned(right, "shuffle")
    return Identity(
        family="shuffle",
        parameters={"left": left.to_json(), "right": right.to_json()},
        lhs=zeta(left) * zeta(right),
        rhs=diagrams.shuffle_expansion(left, right),
        derivation=("double-branch recursion on the product diagram",),
    )


# --- partial integration, generic depth ------------------------------------

def _rightward_general_rhs(ks) -> ZetaCombination:
    """Expansion of zeta(ks) that trades the innermost exponent outward.

    One block per split position kappa, plus a final block of two-factor
    products carrying the leftover single sum.
    """
    m = len(ks)
    k = (0,) + tuple(ks)
    terms = []
    sign_last = (-1) ** (k[m] % 2)

    for kappa in range(1, m):

        def emit(n, kappa=kappa):
            coeff = comb(k[kappa] - n[kappa] + n[kappa + 1] - 1,
                         n[kappa + 1] - 1)
            for j in range(kappa + 1, m):
                coeff *= comb(k[j] - n[j] + n[j + 1] - 1, k[j] - 1)
            if not coeff:
                return
            arg = tuple(k[i] for i in range(1, kappa)) + (n[kappa],) + tuple(
                k[j] - n[j] + n[j + 1] for j in range(kappa, m))
            terms.append(
                ProductTerm(Fraction(sign_last * coeff), (Composition(arg),)))

        def rec(j, upper, acc, kappa=kappa, emit=emit):
            if j == kappa:
                for v in range(1, k[kappa] + 1):
                    emit({**acc, kappa: v})
                return
            for v in range(1, upper + 1):
                rec(j - 1, v, {**acc, j: v})

        rec(m - 1, k[m], {m: k[m]})

    def recf(j, upper, acc):
        if j == 0:
            coeff = 1
            for jj in range(1, m):
                coeff *= comb(k[jj] - acc[jj] + acc[jj + 1] - 1, k[jj] - 1)
            if not coeff:
                return
            sign = (-1) ** ((k[m] - acc[1]) % 2)
            arg = tuple(k[jj] - acc[jj] + acc[jj + 1] for jj in range(1, m))
            prod = zeta(acc[1]) * zeta(Composition(arg))
            for t in prod.scaled(Fraction(sign * coeff)).terms:
                terms.append(t)
            return
        for v in range(1, upper + 1):
            recf(j - 1, v, {**acc, j: v})

    recf(m - 1, k[m], {m: k[m]})
    return normalize(ZetaCombination(tuple(terms)))


def _leftward_general_rhs(ks) -> ZetaCombination:
    """Expansion of zeta(k1) zeta(k2..km) that absorbs the leading exponent.

    All coefficients are positive; the expansion runs over descending index
    chains bounded by k1.
    """
    m = len(ks)
    k = (0,) + tuple(ks)
    n0 = k[1]
    terms = []

    for kappa in range(1, m):

        def emit(n, kappa=kappa):
            n = {**n, 0: n0}
            coeff = comb(k[kappa + 1] + n[kappa - 1] - n[kappa] - 1,
                         n[kappa - 1] - 1)
            for lam in range(2, kappa + 1):
                coeff *= comb(k[lam] + n[lam - 2] - n[lam - 1] - 1, k[lam] - 1)
            if not coeff:
                return
            arg = tuple(k[lam + 1] + n[lam - 1] - n[lam]
                        for lam in range(1, kappa + 1)) \
                + (n[kappa],) + tuple(k[i] for i in range(kappa + 2, m + 1))
            terms.append(ProductTerm(Fraction(coeff), (Composition(arg),)))

        def rec(j, upper, acc, kappa=kappa, emit=emit):
            if j == kappa:
                for v in range(1, k[kappa + 1] + 1):
                    emit({**acc, kappa: v})
                return
            for v in range(1, upper + 1):
                rec(j + 1, v, {**acc, j: v})

        rec(1, n0, {0: n0})

    def recf(j, upper, acc):
        if j == m:
            n = {**acc, 0: n0}
            coeff = 1
            for lam in range(2, m + 1):
                coeff *= comb(k[lam] + n[lam - 2] - n[lam - 1] - 1, k[lam] - 1)
            if not coeff:
                return
            arg = tuple(k[lam + 1] + n[lam - 1] - n[lam]
                        for lam in range(1, m)) + (n[m - 1],)
            terms.append(ProductTerm(Fraction(coeff), (Composition(arg),)))
            return
        for v in range(1, upper + 1):
            recf(j + 1, v, {**acc, j: v})

    recf(1, n0, {0: n0})
    return normalize(ZetaCombination(tuple(terms)))


def partial_integration(ks, variant: str = "rightward") -> Identity:
    """Generic-depth partial integration, stated raw.

    rightward: zeta(ks) equals an expansion whose product block may carry
    zeta(1) factors; leftward: zeta(k1) zeta(k2..km) equals a positive
    expansion into single sums.  Divergent pieces are kept (the identity is
    exact term by term under the formal regularization); apply
    eliminate_zeta1 to the combination for a finite statement.
    """
    c = _as_composition(ks)
    _check_unsigned(c, "partial integration")
    ks = c.parts
    if len(ks) < 2:
        raise ValueError("partial integration needs depth >= 2")
    if variant == "rightward":
        lhs = zeta(c)
        rhs = _rightward_general_rhs(ks)
    elif variant == "leftward":
        lhs = zeta(ks[0]) * zeta(Composition(ks[1:]))
        rhs = _leftward_general_rhs(ks)
    else:
        raise ValueError("variant must be rightward or leftward")
    return Identity(
        family="partial-int",
        parameters={"exponents": list(ks), "variant": variant},
        lhs=lhs,
        rhs=rhs,
        derivation=("iterated binomial rearrangement, %s sweep" % variant,),
    )


def partial_integration_cross_check(ks) -> ZetaCombination:
    """Substitute leftward expansions into the rightward identity.

    Every two-factor product in the rightward expansion of zeta(ks) is an
    instance of the leftward left-hand side; replacing each by its leftward
    right-hand side must cancel everything.  Returns the normalized residual
    (empty when the two sweeps are consistent).
    """
    c = _as_composition(ks)
    _check_unsigned(c, "partial integration")
    if c.depth < 2:
        raise ValueError("cross check needs depth >= 2")
    ident = partial_integration(c, "rightward")
    out = []
    for t in ident.combination.terms:
        if len(t.factors) == 1:
            out.append(t)
            continue
        if len(t.factors) != 2:
            raise ValueError("unexpected factor count in %s" % t)
        head, tail = t.factors
        if head.depth != 1:
            head, tail = tail, head
        if head.depth != 1:
            raise ValueError("no single-sum factor in %s" % t)
        expansion = _leftward_general_rhs((head.parts[0],) + tail.parts)
        out.extend(expansion.scaled(t.coefficient).terms)
    return normalize(ZetaCombination(tuple(out)))


# --- partial integration, fixed depth, finite forms ------------------------

def partial_integration_length2(a: int, b: int) -> Identity:
    """zeta(a, b) expressed through depth-2 sums with swapped weight and
    single-zeta products; the divergent pieces cancel exactly."""
    if a < 2 or b < 1:
        raise ValueError("needs a >= 2, b >= 1")
    sb = (-1) ** (b % 2)
    terms = []
    for n in range(1, a + 1):
        coeff = sb * comb(a + b - n - 1, b - 1)
        if coeff:
            terms.append(
                ProductTerm(Fraction(coeff), (Composition((n, a + b - n)),)))
    raw = ZetaCombination(tuple(terms))
    for n in range(1, b + 1):
        coeff = (-1) ** ((b - n) % 2) * comb(a + b - n - 1, a - 1)
        if coeff:
            raw = raw + (zeta(n) * zeta(a + b - n)).scaled(coeff)
    return Identity(
        family="partial-int-2",
        parameters={"a": a, "b": b},
        lhs=zeta(a, b),
        rhs=eliminate_divergent(raw),
        derivation=("binomial rearrangement of the inner sum, then "
                    "zeta(1) elimination",),
    )


def partial_integration_length3(a: int, b: int, c: int,
                                variant: str = "rightward") -> Identity:
    """zeta(a, b, c) expressed through depth <= 3 sums and products.

    The two variants move the innermost exponent through the chain in a
    different order and give genuinely different right-hand sides of the
    same value.
    """
    if a < 2 or b < 1 or c < 1:
        raise ValueError("needs a >= 2, b >= 1, c >= 1")
    w = a + b + c
    terms = []
    if variant == "rightward":
        for n in range(1, b + 1):
            coeff = (-1) ** (c % 2) * comb(b + c - n - 1, c - 1)
            if coeff:
                terms.append(ProductTerm(
                    Fraction(coeff), (Composition((a, n, b + c - n)),)))
        for n in range(1, c + 1):
            for m in range(1, a + 1):
                coeff = (-1) ** (b % 2) * comb(b + c - n - 1, b - 1) \
                    * comb(w - m - n - 1, b + c - n - 1)
                if coeff:
                    terms.append(ProductTerm(
                        Fraction(coeff), (Composition((m, w - m - n, n)),)))
        raw = ZetaCombination(tuple(terms))
        for n in range(1, c + 1):
            for m in range(1, b + c - n + 1):
                coeff = (-1) ** ((b + m) % 2) * comb(b + c - n - 1, b - 1) \
                    * comb(w - m - n - 1, a - 1)
                if coeff:
                    raw = raw + (zeta(m) * zeta(w - m - n, n)).scaled(coeff)
    elif variant == "alternative":
        for n in range(1, b + 1):
            coeff = (-1) ** (c % 2) * comb(b + c - n - 1, c - 1)
            if coeff:
                terms.append(ProductTerm(
                    Fraction(coeff), (Composition((a, n, b + c - n)),)))
        for n in range(1, c + 1):
            for m in range(1, a + 1):
                coeff = (-1) ** (c % 2) * comb(b + c - n - 1, b - 1) \
                    * comb(a - m + n - 1, n - 1)
                if coeff:
                    terms.append(ProductTerm(
                        Fraction(coeff),
                        (Composition((m, a - m + n, b + c - n)),)))
        raw = ZetaCombination(tuple(terms))
        for n in range(1, c + 1):
            for m in range(1, n + 1):
                coeff = (-1) ** ((c - m) % 2) * comb(a - m + n - 1, a - 1) \
                    * comb(b + c - n - 1, b - 1)
                if coeff:
                    raw = raw + (zeta(m) * zeta(a - m + n, b + c - n)).scaled(coeff)
    else:
        raise ValueError("variant must be rightward or alternative")
    return Identity(
        family="partial-int-3",
        parameters={"a": a, "b": b, "c": c, "variant": variant},
        lhs=zeta(a, b, c),
        rhs=eliminate_divergent(raw),
        derivation=("two binomial rearrangements of the inner sums (%s), "
                    "then zeta(1) elimination" % variant,),
    )


def trailing_one(x) -> Identity:
    """Finite form for a sum whose innermost exponent is 1.

    Equates the two expansions of zeta(1) zeta(x) (index insertion versus
    the leftward sweep) and solves for the trailing-one term; the single
    divergent piece cancels between them.
    """
    x = _as_composition(x)
    _check_unsigned(x, "trailing-one")
    if not x.admissible:
        raise ValueError("base composition must be admissible")
    target = Composition(x.parts + (1,))
    z = normalize(
        divergent_expansion(x) - _leftward_general_rhs((1,) + x.parts))
    coeff = Fraction(0)
    rest = []
    for t in z.terms:
        if t.factors == (target,):
            coeff += t.coefficient
        else:
            rest.append(t)
    if coeff == 0:
        raise ValueError("solve for the trailing-one term is degenerate")
    rhs = ZetaCombination(tuple(rest)).scaled(Fraction(-1) / coeff)
    return Identity(
        family="trailing-one",
        parameters={"exponents": list(x.parts)},
        lhs=zeta(target),
        rhs=rhs,
        derivation=(
            "equate index insertion with the leftward sweep for "
            "zeta(1)zeta(%s) and solve" % x,),
    )


# --- family catalog ---------------------------------------------------------

def _ints(args, n, what):
    if len(args) != n:
        raise ValueError("%s takes %d integer arguments" % (what, n))
    return [int(a) for a in args]


def _derive_reflection(args, variant):
    a, b = _ints(args, 2, "reflection")
    return reflection(a, b)


def _derive_permutation(args, variant):
    if len(args) != 2:
        raise ValueError("permutation takes two compositions")
    return permutation_identity(args[0], args[1])


def _derive_three_point(args, variant):
    a, b, c = _ints(args, 3, "three-point")
    return three_point_identity(a, b, c)


def _derive_partial2(args, variant):
    a, b = _ints(args, 2, "partial-int-2")
    return partial_integration_length2(a, b)


def _derive_partial3(args, variant):
    a, b, c = _ints(args, 3, "partial-int-3")
    return partial_integration_length3(a, b, c, variant or "rightward")


def _derive_partial(args, variant):
    if len(args) != 1:
        raise ValueError("partial-int takes one composition")
    return partial_integration(args[0], variant or "rightward")


def _derive_trailing_one(args, variant):
    if len(args) != 1:
        raise ValueError("trailing-one takes one composition")
    return trailing_one(args[0])


def _derive_shuffle(args, variant):
    if len(args) != 2:
        raise ValueError("shuffle takes two compositions")
    return shuffle_identity(args[0], args[1])


FAMILIES = {
    "reflection": (_derive_reflection, "a b"),
    "permutation": (_derive_permutation, "left right"),
    "three-point": (_derive_three_point, "a b c"),
    "partial-int-2": (_derive_partial2, "a b"),
    "partial-int-3": (_derive_partial3,
                      "a b c  [--variant rightward|alternative]"),
    "partial-int": (_derive_partial,
                    "k1,...,km  [--variant rightward|leftward]"),
    "trailing-one": (_derive_trailing_one, "k1,...,km"),
    "shuffle": (_derive_shuffle, "left right"),
}


def derive(family: str, args, variant: str = None) -> Identity:
    """Dispatch to an identity family by name with string arguments."""
    if family not in FAMILIES:
        raise ValueError("unknown family %r (have: %s)"
                         % (family, ", ".join(sorted(FAMILIES))))
    fn, _ = FAMILIES[family]
    return fn(list(args), variant)


def identity_from_json(obj) -> Identity:
    """Rebuild an Identity from its to_json form."""
    from .algebra import combination_from_json
    return Identity(
        family=obj["family"],
        parameters=obj.get("parameters", {}),
        lhs=combination_from_json(obj["lhs"]),
        rhs=combination_from_json(obj["rhs"]),
    )
