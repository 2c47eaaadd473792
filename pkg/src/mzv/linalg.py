"""Exact-rational rank analysis of the permutation-identity system.

Nested sums over l formal exponents satisfy one quasi-shuffle relation for
every ordered split of the exponent tuple.  The unknowns of the system are
the l! (distinct) permutations of the full-length sum; products and the
lower-length sums produced by merging exponents are known quantities and sit
in right-hand-side columns.  Rank therefore means: rank of the coefficient
matrix over the unknown columns alone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import identities
from .algebra import ProductTerm, ZetaCombination, interleavings, merge_parts, normalize
from .compositions import composition


def generic_symbols(l: int):
    if not 1 <= l <= 9:
        raise ValueError("supported symbol counts are 1..9")
    return tuple("abcdefghi"[:l])


def zeta_column(comp):
    """Column key for a single nested sum; comp is a tuple of parts, each
    part a sorted tuple of symbol names."""
    return ("z", tuple(tuple(p) for p in comp))


def product_column(comps):
    """Column key for a product of two or more nested sums (unordered)."""
    return ("p", tuple(sorted(tuple(tuple(p) for p in c) for c in comps)))


def symbolic_stuffle(left, right):
    """Quasi-shuffle of two symbolic compositions; returns comp -> count."""
    out = {}
    m, n = len(left), len(right)
    for a in range(min(m, n) + 1):
        for pattern in interleavings(m - a, n - a, a):
            comp = merge_parts(
                left, right, pattern, lambda x, y: tuple(sorted(x + y)))
            out[comp] = out.get(comp, 0) + 1
    return out


def ordered_splits(symbols):
    """All pairs of nonempty ordered tuples partitioning the symbol multiset."""
    n = len(symbols)
    seen = set()
    for mask in range(1, 2 ** n - 1):
        left = tuple(symbols[i] for i in range(n) if mask >> i & 1)
        right = tuple(symbols[i] for i in range(n) if not mask >> i & 1)
        for u in set(itertools.permutations(left)):
            for v in set(itertools.permutations(right)):
                if (u, v) not in seen:
                    seen.add((u, v))
                    yield u, v


def _split_row(u, v):
    u_comp = tuple((s,) for s in u)
    v_comp = tuple((s,) for s in v)
    row = {product_column((u_comp, v_comp)): Fraction(1)}
    for comp, count in symbolic_stuffle(u_comp, v_comp).items():
        col = zeta_column(comp)
        val = row.get(col, Fraction(0)) - count
        if val:
            row[col] = val
        else:
            row.pop(col, None)
    return row


@dataclass
class ExactMatrix:
    """Sparse rows of exact rationals with hashable column keys.

    ``unknowns``, when set, names the columns the system is solved for;
    everything else is a right-hand-side column and is ignored by rank().
    """

    rows: list
    row_labels: list
    unknowns: tuple = None

    @property
    def columns(self):
        cols = set()
        for r in self.rows:
            cols.update(r)
        return sorted(cols)

    @property
    def rhs_columns(self):
        if self.unknowns is None:
            return []
        known = set(self.unknowns)
        return [c for c in self.columns if c not in known]

    def rank(self) -> int:
        if self.unknowns is None:
            return _sparse_rank(self.rows)
        keep = set(self.unknowns)
        rows = [{c: v for c, v in r.items() if c in keep} for r in self.rows]
        return _sparse_rank(rows)


def _sparse_rank(rows) -> int:
    work = [dict(r) for r in rows if r]
    rank = 0
    while work:
        work.sort(key=lambda r: (len(r), min(r)))
        piv = work.pop(0)
        col = min(piv)
        pval = piv[col]
        rank += 1
        remaining = []
        for r in work:
            if col in r:
                f = r[col] / pval
                for c, v in piv.items():
                    nv = r.get(c, Fraction(0)) - f * v
                    if nv:
                        r[c] = nv
                    else:
                        r.pop(c, None)
            if r:
                remaining.append(r)
        work = remaining
    return rank


def permutation_unknowns(symbols):
    """Columns for the distinct permutations of the full symbol tuple."""
    perms = sorted(set(itertools.permutations(symbols)))
    return tuple(zeta_column(tuple((s,) for s in p)) for p in perms)


def assemble_permutation_system(symbols) -> ExactMatrix:
    """One row per ordered split: the product column minus its quasi-shuffle
    expansion.  Repeated symbol names yield the degenerate (collapsed)
    system."""
    symbols = tuple(symbols)
    rows = []
    labels = []
    for u, v in ordered_splits(symbols):
        rows.append(_split_row(u, v))
        labels.append((u, v))
    return ExactMatrix(rows, labels, unknowns=permutation_unknowns(symbols))


def permutation_rank(symbols) -> int:
    return assemble_permutation_system(symbols).rank()


@dataclass
class BasisReduction:
    """Every full-length permutation sum expressed over the fixed-lead basis.

    ``expressions`` maps a non-basis permutation comp to {column: coeff};
    the permutation sum equals that combination of basis and rhs columns.
    """

    symbols: tuple
    rank: int
    basis: tuple
    expressions: dict


def reduce_to_basis(l: int) -> BasisReduction:
    """Solve the permutation system for the non-basis permutation columns.

    The basis is the (l-1)! permutations starting with the first symbol.
    Fails if some non-basis column admits no pivot or if leftover rows still
    touch unknown columns (either would refute the rank count l! - (l-1)!).
    """
    symbols = generic_symbols(l)
    mat = assemble_permutation_system(symbols)
    unknown_set = set(mat.unknowns)
    pivot_cols = [c for c in mat.unknowns if c[1][0] != (symbols[0],)]
    basis = tuple(c[1] for c in mat.unknowns if c[1][0] == (symbols[0],))

    rows = [dict(r) for r in mat.rows]
    pivots = {}
    for col in pivot_cols:
        best = None
        for i, r in enumerate(rows):
            if col in r and (best is None or len(r) < len(rows[best])):
                best = i
        if best is None:
            raise ArithmeticError("no pivot row for column %s" % (col,))
        piv = rows.pop(best)
        pval = piv[col]
        piv = {c: v / pval for c, v in piv.items()}
        for bucket in (rows, list(pivots.values())):
            for r in bucket:
                if col in r and r is not piv:
                    f = r[col]
                    for c, v in piv.items():
                        nv = r.get(c, Fraction(0)) - f * v
                        if nv:
                            r[c] = nv
                        else:
                            r.pop(c, None)
        pivots[col] = piv
    leftovers = [r for r in rows if unknown_set.intersection(r)]
    if leftovers:
        raise ArithmeticError(
            "%d rows relate basis unknowns to each other" % len(leftovers))

    expressions = {}
    for col, piv in pivots.items():
        comp = col[1]
        expressions[comp] = {c: -v for c, v in piv.items() if c != col}
    return BasisReduction(symbols, len(pivots), tuple(basis), expressions)


def instantiate_column(col, assignment) -> ProductTerm:
    """Turn a symbolic column into a concrete product term.

    ``assignment`` maps each symbol name to a positive integer exponent;
    merged parts become the sum of their entries.
    """
    kind, payload = col
    comps = [payload] if kind == "z" else list(payload)
    factors = tuple(
        composition(*(sum(assignment[s] for s in part) for part in comp))
        for comp in comps)
    return ProductTerm(Fraction(1), factors)


def instantiate_expression(comp, expression, assignment) -> ZetaCombination:
    """The combination (permutation sum) - (its basis expression), which
    should be zero, at concrete exponent values."""
    lhs = instantiate_column(zeta_column(comp), assignment)
    terms = [lhs]
    for col, coeff in expression.items():
        terms.append(instantiate_column(col, assignment).scaled(-coeff))
    return normalize(ZetaCombination(tuple(terms)))


def three_point_rows(symbols=("a", "b", "c")):
    """The six three-point relations over the given three symbol names.

    Runs the diagram-level identity on power-coded integer labels and decodes
    every resulting part back into a symbol multiset, so the rows share the
    column encoding of assemble_permutation_system.
    """
    symbols = tuple(symbols)
    if len(symbols) != 3:
        raise ValueError("three-point rows need exactly three symbols")
    labels = [16, 256, 4096]

    def decode_part(p):
        out = []
        rest = p
        for i in range(3):
            digit = (p >> (4 * (i + 1))) & 15
            out.extend([symbols[i]] * digit)
            rest -= digit << (4 * (i + 1))
        if rest:
            raise ValueError("part %d is not a sum of coded labels" % p)
        return tuple(sorted(out))

    rows = []
    for perm in itertools.permutations(range(3)):
        ident = identities.three_point_identity(
            labels[perm[0]], labels[perm[1]], labels[perm[2]])
        row = {}
        for t in ident.combination.terms:
            comps = [
                tuple(decode_part(p) for p in f.parts) for f in t.factors
            ]
            if len(comps) == 1:
                key = zeta_column(comps[0])
            else:
                key = product_column(comps)
            val = row.get(key, Fraction(0)) + t.coefficient
            if val:
                row[key] = val
            else:
                row.pop(key, None)
        rows.append(row)
    return rows
