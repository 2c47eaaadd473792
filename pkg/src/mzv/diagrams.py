"""Weighted vacuum diagrams on the circle and their reduction to nested sums.

A diagram is a directed multigraph with integer edge labels.  An edge (a, b, k)
stands for the k-th periodic propagator between the positions of a and b;
label 0 is the ordering kernel.  The value of a diagram is the sum over
positive integer edge momenta, conserving at every vertex, of the product
n_e^(-k_e).  Reductions rewrite a diagram into a linear combination of nested
harmonic sums of the same total weight.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .algebra import (
    ProductTerm,
    ZetaCombination,
    eliminate_divergent,
    normalize,
    one,
    zeta,
)
from .compositions import Composition


class IrreducibleDiagramError(ValueError):
    """Raised when no reduction rule applies; carries what was reduced so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Diagram:
    vertices: tuple[int, ...]
    root: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        vs = tuple(sorted(set(int(v) for v in self.vertices)))
        es = []
        for (a, b, k) in self.edges:
            a, b, k = int(a), int(b), int(k)
            if a not in vs or b not in vs:
                raise ValueError("edge endpoint outside vertex set")
            if k < 0:
                raise ValueError("edge labels must be >= 0")
            es.append((a, b, k))
        if self.root not in vs:
            raise ValueError("root must be a vertex")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", tuple(sorted(es)))

    def out_edges(self, v):
        return [(i, e) for i, e in enumerate(self.edges) if e[0] == v]

    def in_edges(self, v):
        return [(i, e) for i, e in enumerate(self.edges) if e[1] == v]

    def replace_edges(self, drop=(), add=()) -> "Diagram":
        dropped = set(drop)
        es = [e for i, e in enumerate(self.edges) if i not in dropped]
        es.extend(add)
        return Diagram(self.vertices, self.root, tuple(es))

    def fuse(self, group) -> "Diagram":
        """Identify the given vertices; edges among them become self-loops."""
        group = set(group)
        target = self.root if self.root in group else min(group)
        mapping = {v: (target if v in group else v) for v in self.vertices}
        vs = tuple(sorted(set(mapping.values())))
        es = tuple((mapping[a], mapping[b], k) for (a, b, k) in self.edges)
        return Diagram(vs, mapping[self.root], es)

    def to_json(self):
        return {
            "vertices": list(self.vertices),
            "root": self.root,
            "edges": [
                {"from": a, "to": b, "label": k} for (a, b, k) in self.edges
            ],
        }

    def __str__(self):
        body = ", ".join("%d-%d[%d]" % e for e in self.edges)
        return "Diagram(root=%d; %s)" % (self.root, body)


def diagram_from_json(obj) -> Diagram:
    edges = tuple((e["from"], e["to"], e["label"]) for e in obj["edges"])
    return Diagram(tuple(obj["vertices"]), obj["root"], edges)


@lru_cache(maxsize=None)
def canonical_key(d: Diagram):
    """Vertex-relabeling invariant key (root pinned to 0)."""
    others = [v for v in d.vertices if v != d.root]
    best = None
    for perm in itertools.permutations(range(1, len(others) + 1)):
        mapping = {d.root: 0}
        mapping.update({v: p for v, p in zip(others, perm)})
        key = tuple(sorted((mapping[a], mapping[b], k) for (a, b, k) in d.edges))
        if best is None or key < best:
            best = key
    return (len(d.vertices), best)


def diagrams_equal(a: Diagram, b: Diagram) -> bool:
    return canonical_key(a) == canonical_key(b)


def combine_terms(terms):
    """Merge (coefficient, diagram) pairs by canonical key, dropping zeros."""
    acc = {}
    reps = {}
    for coeff, d in terms:
        k = canonical_key(d)
        acc[k] = acc.get(k, Fraction(0)) + Fraction(coeff)
        reps.setdefault(k, d)
    return tuple((acc[k], reps[k]) for k in sorted(acc) if acc[k] != 0)


def coupling_powers(d: Diagram):
    """(total coupling power, propagator count) = (sum of labels, edge count)."""
    return (sum(k for (_, _, k) in d.edges), len(d.edges))


# --- builders ---------------------------------------------------------------

def _parts(c):
    if isinstance(c, Composition):
        if c.signs is not None:
            raise ValueError("diagrams carry unsigned labels")
        return c.parts
    return tuple(int(k) for k in c)


def build_seashell(c) -> Diagram:
    """The depth-m ladder: a directed cycle through the root carrying the
    labels k1..km plus a zero chord from every non-root cycle vertex back to
    the root.

    The chords force the full ordering of the cycle momenta, so the value is
    exactly the nested sum for (k1,...,km).  m = 1 degenerates to a self-loop.
    """
    parts = _parts(c)
    if any(k < 1 for k in parts):
        raise ValueError("seashell labels must be >= 1")
    m = len(parts)
    edges = [(i, (i + 1) % m, parts[i]) for i in range(m)]
    edges += [(i, 0, 0) for i in range(1, m)]
    return Diagram(tuple(range(m)), 0, tuple(edges))


def build_half_moon(a: int, b: int, c: int) -> Diagram:
    """Two vertices, three parallel propagators: in a, out b and c."""
    return Diagram((0, 1), 0, ((0, 1, a), (1, 0, b), (1, 0, c)))


def build_peacock(trunk, branch1, branch2) -> Diagram:
    """Trunk chain up from the root, two descending branch chains back down.

    Interior trunk and branch vertices carry zero chords to the root; the top
    vertex (trunk end) has none.  Trunk labels may include 0.
    """
    trunk = tuple(int(k) for k in trunk)
    b1 = _parts(branch1)
    b2 = _parts(branch2)
    if not trunk or not b1 or not b2:
        raise ValueError("trunk and both branches must be nonempty")
    edges = []
    nxt = 1
    prev = 0
    for i, k in enumerate(trunk):
        cur = nxt
        nxt += 1
        edges.append((prev, cur, k))
        if i > 0:
            edges.append((prev, 0, 0))
        prev = cur
    top = prev
    for branch in (b1, b2):
        prev = top
        for j, k in enumerate(branch):
            last = j == len(branch) - 1
            cur = 0 if last else nxt
            if not last:
                nxt += 1
            edges.append((prev, cur, k))
            if j > 0:
                edges.append((prev, 0, 0))
            prev = cur
    return Diagram(tuple(range(nxt)), 0, tuple(edges))


# --- single-step rewrites ---------------------------------------------------

def rewrite_reverse_edge(d: Diagram, edge_index: int):
    """Reverse an ordering kernel: minus the reversed edge, plus the fused
    endpoints, minus the edge dropped."""
    a, b, k = d.edges[edge_index]
    if k != 0:
        raise ValueError("reversal rewrite applies to zero-labeled edges")
    if a == b:
        raise ValueError("cannot reverse a self-loop")
    reversed_d = d.replace_edges(drop=(edge_index,), add=((b, a, 0),))
    fused = d.replace_edges(drop=(edge_index,)).fuse({a, b})
    dropped = d.replace_edges(drop=(edge_index,))
    return combine_terms(
        [(Fraction(-1), reversed_d), (Fraction(1), fused), (Fraction(-1), dropped)]
    )


def rewrite_integrate_valence2(d: Diagram, v):
    """Convolution at a flow-through vertex: g^(k) * g^(l) -> g^(k+l)."""
    if v == d.root:
        raise ValueError("the root is not integrated out")
    ins = d.in_edges(v)
    outs = d.out_edges(v)
    if len(ins) != 1 or len(outs) != 1:
        raise ValueError("vertex must have exactly one in- and one out-edge")
    (i1, (a, _, k)) = ins[0]
    (i2, (_, b, l)) = outs[0]
    if a == v or b == v:
        raise ValueError("self-loop blocks the convolution")
    merged = d.replace_edges(drop=(i1, i2), add=((a, b, k + l),))
    vs = tuple(w for w in merged.vertices if w != v)
    return combine_terms([(Fraction(1), Diagram(vs, merged.root, merged.edges))])


def rewrite_partial_integration(d: Diagram, v, raise_edge=None):
    """Differentiate under the integral at a vertex with one in-, two out-edges.

    The raised out-edge gains one unit; the identity trades lowering the
    in-edge against lowering the other out-edge:
        D[in=a, raised, other=c] = D[a-1, raised+1, c] - D[a, raised+1, c-1].
    By default the zero-labeled out-edge is raised.
    """
    if v == d.root:
        raise ValueError("partial integration acts at a non-root vertex")
    ins = d.in_edges(v)
    outs = d.out_edges(v)
    if len(ins) != 1 or len(outs) != 2:
        raise ValueError("vertex must have one in-edge and two out-edges")
    (ii, (_, _, a)) = ins[0]
    if a < 1:
        raise ValueError("in-edge label must be >= 1")
    if raise_edge is None:
        zero_outs = [i for i, e in outs if e[2] == 0]
        if len(zero_outs) != 1:
            raise ValueError("ambiguous raise target; pass raise_edge")
        raise_edge = zero_outs[0]
    (io,) = [i for i, _ in outs if i != raise_edge]
    ra, rb, rk = d.edges[raise_edge]
    oa, ob, ok = d.edges[io]
    if ok < 1:
        raise ValueError("the lowered out-edge label must be >= 1")
    ea, eb, ek = d.edges[ii]
    plus = d.replace_edges(
        drop=(ii, raise_edge), add=((ea, eb, ek - 1), (ra, rb, rk + 1)))
    minus = d.replace_edges(
        drop=(io, raise_edge), add=((oa, ob, ok - 1), (ra, rb, rk + 1)))
    return combine_terms([(Fraction(1), plus), (Fraction(-1), minus)])


def rewrite_exchange_inner(d: Diagram, v, u_edge=None, v_edge=None):
    """Swap the two side edges across a zero-labeled inner edge into v.

    Requires an edge (u, v, 0) with u and v both non-root; the swapped edges
    are one further out-edge of u and one of v with a common head.  The inner
    double sum is invariant under reflecting the middle momentum, which this
    label swap implements.
    """
    if v == d.root:
        raise ValueError("v must be a non-root vertex")
    zero_ins = [
        (i, e) for i, e in d.in_edges(v) if e[2] == 0 and e[0] != d.root
    ]
    if len(zero_ins) != 1:
        raise ValueError("v needs exactly one zero-labeled in-edge from an apex")
    (_, (u, _, _)) = zero_ins[0]
    if u_edge is None:
        cands = [i for i, e in d.out_edges(u) if e[1] != v]
        if len(cands) != 1:
            raise ValueError("ambiguous side edge at u; pass u_edge")
        u_edge = cands[0]
    if v_edge is None:
        head = d.edges[u_edge][1]
        cands = [i for i, e in d.out_edges(v) if e[1] == head]
        if len(cands) != 1:
            raise ValueError("ambiguous side edge at v; pass v_edge")
        v_edge = cands[0]
    ua, ub, uk = d.edges[u_edge]
    va, vb, vk = d.edges[v_edge]
    if ub != vb:
        raise ValueError("side edges must share their head")
    swapped = d.replace_edges(
        drop=(u_edge, v_edge), add=((ua, ub, vk), (va, vb, uk)))
    return combine_terms([(Fraction(1), swapped)])


def _reverse_all(d: Diagram) -> Diagram:
    return Diagram(d.vertices, d.root, tuple((b, a, k) for (a, b, k) in d.edges))


def rewrite_three_point(d: Diagram, v):
    """Move a pair of ordering kernels off a three-point constellation.

    v must carry two zero-labeled in-edges from distinct vertices (the
    out-edge case is handled by global arrow reversal, which preserves the
    value).  Emits seven structural terms: two re-routed configurations, the
    bare diagram, three single contractions and the double contraction.
    """
    ins = [(i, e) for i, e in d.in_edges(v) if e[2] == 0 and e[0] != v]
    outs = [(i, e) for i, e in d.out_edges(v) if e[2] == 0 and e[1] != v]
    if len(ins) == 2 and ins[0][1][0] != ins[1][1][0]:
        (i1, (x, _, _)), (i2, (y, _, _)) = ins
        base = d.replace_edges(drop=(i1, i2))
        terms = [
            (Fraction(-1), base.replace_edges(add=((v, x, 0), (y, x, 0)))),
            (Fraction(-1), base.replace_edges(add=((v, y, 0), (x, y, 0)))),
            (Fraction(1), base),
            (Fraction(1), base.replace_edges(add=((y, x, 0),)).fuse({v, x})),
            (Fraction(1), base.replace_edges(add=((x, y, 0),)).fuse({v, y})),
            (Fraction(1), base.replace_edges(add=((v, x, 0),)).fuse({x, y})),
            (Fraction(-1), base.fuse({v, x, y})),
        ]
        return combine_terms(terms)
    if len(outs) == 2 and outs[0][1][1] != outs[1][1][1]:
        conj = rewrite_three_point(_reverse_all(d), v)
        return combine_terms([(c, _reverse_all(t)) for c, t in conj])
    raise ValueError(
        "v needs two zero-labeled in-edges (or out-edges) from distinct vertices")


# --- structural evaluation (order expansion) --------------------------------

def _components(d: Diagram):
    adj = {v: set() for v in d.vertices}
    for (a, b, _) in d.edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = set()
    comps = []
    for start in d.vertices:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            w = stack.pop()
            for nb in adj[w]:
                if nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        seen |= comp
        comps.append(comp)
    return comps


def _hamiltonian_cycles(d: Diagram):
    """Directed cycles through every vertex once, as tuples of edge indices."""
    n = len(d.vertices)
    out_map = {v: d.out_edges(v) for v in d.vertices}
    cycles = []
    if n == 1:
        for i, (_, b, _) in out_map[d.root]:
            if b == d.root:
                cycles.append((i,))
        return cycles

    def walk(v, visited, path):
        for i, (_, b, _) in out_map[v]:
            if b == d.root and len(visited) == n:
                cycles.append(tuple(path + [i]))
            elif b not in visited:
                visited.add(b)
                walk(b, visited, path + [i])
                visited.remove(b)

    walk(d.root, {d.root}, [])
    return cycles


def _solve_chords(d: Diagram, cycle):
    """Express chord momenta as exact linear forms in the cycle momenta.

    Returns (chord indices, forms, constraint forms); every form is a tuple of
    Fractions indexed by cycle position.  Raises when the linear system leaves
    a chord momentum free.
    """
    cyc_set = set(cycle)
    chords = [i for i in range(len(d.edges)) if i not in cyc_set]
    vidx = {v: j for j, v in enumerate(d.vertices)}
    P = len(cycle)
    C = len(chords)
    rows = [[Fraction(0)] * (C + P) for _ in d.vertices]
    for rank, i in enumerate(cycle):
        a, b, _ = d.edges[i]
        rows[vidx[a]][C + rank] -= 1
        rows[vidx[b]][C + rank] += 1
    for col, i in enumerate(chords):
        a, b, _ = d.edges[i]
        rows[vidx[a]][col] -= 1
        rows[vidx[b]][col] += 1
    pivots = {}
    r = 0
    for col in range(C):
        piv = next((rr for rr in range(r, len(rows)) if rows[rr][col] != 0), None)
        if piv is None:
            raise IrreducibleDiagramError("chord momenta underdetermined")
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for rr in range(len(rows)):
            if rr != r and rows[rr][col] != 0:
                f = rows[rr][col]
                rows[rr] = [x - f * y for x, y in zip(rows[rr], rows[r])]
        pivots[col] = r
        r += 1
    chord_forms = {}
    for col, i in enumerate(chords):
        row = rows[pivots[col]]
        chord_forms[i] = tuple(-row[C + j] for j in range(P))
    constraints = []
    for rr in range(r, len(rows)):
        form = tuple(rows[rr][C + j] for j in range(P))
        if any(x != 0 for x in form):
            constraints.append(form)
    return chords, chord_forms, constraints


def _ordered_partitions(P):
    """Ordered set partitions of range(P): (group count, position -> group),
    where group 0 carries the largest momenta."""

    def rgs(prefix, mx):
        if len(prefix) == P:
            yield prefix
            return
        for g in range(mx + 2):
            yield from rgs(prefix + [g], max(mx, g))

    for part in rgs([], -1):
        dd = max(part) + 1
        for perm in itertools.permutations(range(dd)):
            yield dd, tuple(perm[g] for g in part)


def order_expansion(d: Diagram) -> ZetaCombination:
    """Value of a cycle-plus-zero-chords diagram by splitting the momentum cone.

    Enumerates the relative orderings (with ties) of the cycle momenta; in
    every ordering cell each chord momentum is a fixed integer combination of
    the ordered group values, and the cell contributes a nested sum iff all
    chords stay positive on the whole cell.
    """
    candidates = []
    for cyc in _hamiltonian_cycles(d):
        cyc_set = set(cyc)
        if all(d.edges[i][2] == 0
               for i in range(len(d.edges)) if i not in cyc_set):
            candidates.append(cyc)
    if not candidates:
        raise IrreducibleDiagramError(
            "no cycle through all vertices with zero-labeled chords")
    cyc = min(candidates)
    chords, chord_forms, constraints = _solve_chords(d, cyc)
    P = len(cyc)
    labels = [d.edges[i][2] for i in cyc]
    terms = []
    for dd, assign in _ordered_partitions(P):
        ok = True
        for form in constraints:
            sums = [Fraction(0)] * dd
            for j, g in enumerate(assign):
                sums[g] += form[j]
            if any(s != 0 for s in sums):
                ok = False
                break
        if not ok:
            continue
        feasible = True
        for i in chords:
            form = chord_forms[i]
            a = [Fraction(0)] * dd
            for j, g in enumerate(assign):
                a[g] += form[j]
            if any(x.denominator != 1 for x in a):
                raise IrreducibleDiagramError("non-integer chord decomposition")
            partial = list(itertools.accumulate(a))
            total = partial[-1]
            if all(s >= 0 for s in partial[:-1]) and total >= 0:
                if sum(partial[:-1]) + total >= 1:
                    continue       # positive on the whole cell
                feasible = False   # identically zero on the cell
                break
            if all(s <= 0 for s in partial[:-1]) and total <= 0:
                feasible = False
                break
            raise IrreducibleDiagramError(
                "chord momentum changes sign inside an ordering cell")
        if not feasible:
            continue
        expo = [0] * dd
        for j, g in enumerate(assign):
            expo[g] += labels[j]
        if any(k == 0 for k in expo):
            raise IrreducibleDiagramError("free momentum with zero exponent")
        terms.append(ProductTerm(Fraction(1), (Composition(tuple(expo)),)))
    return normalize(ZetaCombination(tuple(terms)))


def _structural_value(d: Diagram, trace) -> ZetaCombination:
    total = one()
    for comp in _components(d):
        sub_edges = tuple(e for e in d.edges if e[0] in comp)
        if not sub_edges:
            continue
        root = d.root if d.root in comp else min(comp)
        sub = Diagram(tuple(sorted(comp)), root, sub_edges)
        total = total * _connected_value(sub, trace)
    return normalize(total)


def _connected_value(d: Diagram, trace) -> ZetaCombination:
    """Self-loops, dead vertices and the root-zero factor rule, then order
    expansion on what is left."""
    factors = one()
    while True:
        loops = [(i, e) for i, e in enumerate(d.edges) if e[0] == e[1]]
        if loops:
            i, (w, _, k) = loops[0]
            if k == 0:
                raise IrreducibleDiagramError("zero-labeled loop is singular")
            factors = factors * zeta(k)
            trace.append("loop at %d gives a weight-%d factor" % (w, k))
            d = d.replace_edges(drop=(i,))
            continue
        if not d.edges:
            return factors
        dead = [
            v for v in d.vertices
            if (d.in_edges(v) or d.out_edges(v))
            and (not d.in_edges(v) or not d.out_edges(v))
        ]
        if dead:
            trace.append("vertex %d is all-in or all-out: value 0" % dead[0])
            return ZetaCombination()
        applied = False
        for i, (a, b, k) in enumerate(d.edges):
            if a == d.root and k == 0 and b != d.root:
                others = [(j, e) for j, e in enumerate(d.edges)
                          if j != i and (e[0] == b or e[1] == b)]
                if all(e[0] == b for _, e in others):
                    back = [(j, e) for j, e in others
                            if e[1] == d.root and e[2] >= 1]
                    if back:
                        j, (_, _, q) = min(back, key=lambda jt: jt[1][2])
                        factors = factors * zeta(q)
                        trace.append(
                            "zero arc into %d frees a weight-%d factor" % (b, q))
                        d = d.replace_edges(drop=(i, j)).fuse({d.root, b})
                        applied = True
                        break
        if applied:
            continue
        break
    if len(_components(d)) > 1:
        return factors * _structural_value(d, trace)
    trace.append("order expansion over %d cycle positions" % len(d.vertices))
    return factors * order_expansion(d)


# --- shuffle-structure reduction -------------------------------------------

@lru_cache(maxsize=None)
def _branch_suffixes(B, C):
    """Expansion of the double-branch state whose trunk ends in a zero label.

    The state equals sum coeff * zeta(trunk . suffix) over the returned
    (suffix, coefficient) pairs; the recursion integrates the trunk end by
    parts and pushes the resulting zero label up the opposite branch.
    """
    items = {}
    for X, Y in ((B, C), (C, B)):
        x1, y1 = X[0], Y[0]
        for nu in range(1, x1 + 1):
            coeff = comb(x1 + y1 - nu - 1, y1 - 1)
            head = x1 + y1 - nu
            X2 = (nu,) + X[1:]
            Y2 = Y[1:]
            if not Y2:
                suf = (head,) + X2
                items[suf] = items.get(suf, 0) + coeff
            else:
                for suf, c2 in _branch_suffixes(Y2, X2):
                    key = (head,) + suf
                    items[key] = items.get(key, 0) + coeff * c2
    return tuple(sorted(items.items()))


def shuffle_expansion(left, right) -> ZetaCombination:
    """The product zeta(left)*zeta(right) expanded into single nested sums by
    the double-branch recursion."""
    L = _parts(left)
    R = _parts(right)
    if any(k < 1 for k in L + R):
        raise ValueError("branch labels must be >= 1")
    terms = [
        ProductTerm(Fraction(c), (Composition(suf),))
        for suf, c in _branch_suffixes(L, R)
    ]
    return normalize(ZetaCombination(tuple(terms)))


def _peacock_structure(d: Diagram):
    """Recover (trunk labels, branch labels, branch labels) or None."""
    out_map = {v: d.out_edges(v) for v in d.vertices}
    in_map = {v: d.in_edges(v) for v in d.vertices}
    tops = [v for v in d.vertices
            if v != d.root and len(out_map[v]) == 2 and len(in_map[v]) == 1]
    for top in tops:
        trunk = []
        v = d.root
        seen = {d.root}
        ok = True
        while v != top:
            step = [e for _, e in out_map[v]
                    if not (v != d.root and e == (v, d.root, 0))]
            if len(step) != 1:
                ok = False
                break
            if v != d.root and len(out_map[v]) != 2:
                ok = False
                break
            (_, b, k) = step[0]
            if b in seen:
                ok = False
                break
            trunk.append(k)
            v = b
            seen.add(v)
        if not ok or v != top:
            continue
        branches = []
        for _, (_, b, k) in out_map[top]:
            labels = [k]
            w = b
            while w != d.root and labels is not None:
                if w in seen or len(in_map[w]) != 1:
                    labels = None
                    break
                seen.add(w)
                outs = [e for _, e in out_map[w]]
                chord = [e for e in outs if e == (w, d.root, 0)]
                step = [e for e in outs if e not in chord]
                if len(step) != 1 or len(chord) != 1:
                    labels = None
                    break
                labels.append(step[0][2])
                w = step[0][1]
            if labels is None:
                branches = None
                break
            branches.append(tuple(labels))
        if branches is not None and len(branches) == 2 \
                and len(seen) == len(d.vertices):
            return tuple(trunk), branches[0], branches[1]
    return None


def _branch_state_value(trunk, B, C, trace) -> ZetaCombination:
    if len(B) == 1 and B[0] == 0:
        return zeta(Composition(trunk + C))
    if len(C) == 1 and C[0] == 0:
        return zeta(Composition(trunk + B))
    if B[0] == 0:
        trace.append("zero branch head pushed onto the trunk")
        return _branch_state_value(trunk + (0,), B[1:], C, trace)
    if C[0] == 0:
        trace.append("zero branch head pushed onto the trunk")
        return _branch_state_value(trunk + (0,), C[1:], B, trace)
    if not trunk or trunk[-1] != 0:
        raise IrreducibleDiagramError(
            "trunk must end in a zero label for the branch recursion")
    prefix = trunk[:-1]
    if any(k == 0 for k in prefix + B + C):
        raise IrreducibleDiagramError("interior zero labels are not reducible")
    terms = [
        ProductTerm(Fraction(c), (Composition(prefix + suf),))
        for suf, c in _branch_suffixes(B, C)
    ]
    trace.append("branch recursion produced %d terms" % len(terms))
    return normalize(ZetaCombination(tuple(terms)))


def _reduce_shuffle(d: Diagram, trace) -> ZetaCombination:
    struct = _peacock_structure(d)
    if struct is None:
        raise IrreducibleDiagramError("not a double-branch diagram")
    trunk, B, C = struct
    trace.append("double-branch structure: trunk %s, branches %s | %s"
                 % (list(trunk), list(B), list(C)))
    return _branch_state_value(trunk, B, C, trace)


# --- rightward strategy -----------------------------------------------------

def _fan_structure(d: Diagram):
    """Read the diagram as a cycle through the root with one chord per apex.

    Prefers the reading with the most zero-labeled chords; returns
    (cycle labels, chord labels in cycle order) or None.
    """
    best = None
    for cyc in _hamiltonian_cycles(d):
        cyc_set = set(cyc)
        heads = {}
        ok = True
        for i in range(len(d.edges)):
            if i in cyc_set:
                continue
            a, b, _ = d.edges[i]
            if b != d.root or a == d.root or a in heads:
                ok = False
                break
            heads[a] = i
        if not ok:
            continue
        apexes = [d.edges[i][1] for i in cyc][:-1]
        if set(heads) != set(apexes):
            continue
        t = tuple(d.edges[i][2] for i in cyc)
        c = tuple(d.edges[heads[a]][2] for a in apexes)
        key = (-sum(1 for k in c if k == 0), t, c)
        if best is None or key < best[0]:
            best = (key, t, c)
    if best is None:
        return None
    return best[1], best[2]


def _rightward_terms(t, c):
    """Drive the fan state apex by apex, right to left.

    Returns (coefficient, ZetaCombination) pieces; each terminal state is a
    fully ordered cycle (all chords zero) or a leading factor split.
    """
    p = len(c)
    out = []
    stack = [(Fraction(1), tuple(t), tuple(c), p)]
    while stack:
        coeff, t, c, i = stack.pop()
        if c[i - 1] == 0 or t[i] != 0:
            raise_chord = True
            y, z = c[i - 1], t[i]
        else:
            raise_chord = False
            y, z = t[i], c[i - 1]
        inner = [(coeff, t[i - 1], y, z)]
        while inner:
            cf, x, y, z = inner.pop()
            if z == 0:
                nt = t[:i - 1] + (x, y) + t[i + 1:]
                nc = c[:i - 1] + (0,) + c[i:]
                assert all(k == 0 for k in nc)
                out.append((cf, zeta(Composition(nt))))
            elif x == 0:
                big, rem = (y, z) if raise_chord else (z, y)
                if i == 1:
                    tail = (rem,) + t[i + 1:]
                    out.append((cf, zeta(big) * zeta(Composition(tail))))
                else:
                    nt = t[:i - 1] + (0, rem) + t[i + 1:]
                    nc = c[:i - 2] + (big, 0) + c[i:]
                    stack.append((cf, nt, nc, i - 1))
            else:
                inner.append((cf, x - 1, y + 1, z))
                inner.append((-cf, x, y + 1, z - 1))
    return out


def _reduce_rightward(d: Diagram, trace) -> ZetaCombination:
    fan = _fan_structure(d)
    if fan is None:
        raise IrreducibleDiagramError("not a cycle-with-chords diagram")
    t, c = fan
    trace.append("fan structure: cycle %s, chords %s" % (list(t), list(c)))
    if not c:
        return zeta(Composition(t))
    if any(k != 0 for k in c[:-1]):
        raise IrreducibleDiagramError(
            "only the last chord may start nonzero for the rightward sweep")
    if any(k == 0 for k in t):
        raise IrreducibleDiagramError("zero cycle labels need an exchange first")
    raw = []
    for coeff, piece in _rightward_terms(t, c):
        raw.extend(pt.scaled(coeff) for pt in piece.terms)
    total = normalize(ZetaCombination(tuple(raw)))
    trace.append("raw reduction has %d terms" % len(total.terms))
    final = eliminate_divergent(total)
    trace.append("divergence elimination leaves %d terms" % len(final.terms))
    return final


# --- entry point ------------------------------------------------------------

def reduce(d: Diagram, strategy: str = "auto", trace: bool = False):
    """Reduce a diagram to an equal-valued combination of nested sums.

    Strategies: "structural" (order expansion of zero-chord diagrams),
    "rightward" (iterated partial integration, right to left, divergent
    pieces eliminated), "shuffle" (double-branch recursion), "auto"
    (structural when it applies, then shuffle, then rightward).
    """
    tr = []
    if strategy == "structural":
        comb_ = _structural_value(d, tr)
    elif strategy == "rightward":
        comb_ = _reduce_rightward(d, tr)
    elif strategy == "shuffle":
        comb_ = _reduce_shuffle(d, tr)
    elif strategy == "auto":
        try:
            comb_ = _structural_value(d, tr)
        except IrreducibleDiagramError:
            tr.append("order expansion not applicable; matching known shapes")
            if _peacock_structure(d) is not None:
                try:
                    comb_ = _reduce_shuffle(d, tr)
                except IrreducibleDiagramError:
                    comb_ = _reduce_rightward(d, tr)
            else:
                comb_ = _reduce_rightward(d, tr)
    else:
        raise ValueError("unknown strategy %r" % strategy)
    if trace:
        return comb_, tuple(tr)
    return comb_
