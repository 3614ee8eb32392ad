"""Integral group homology from normalized bar chains.

Degree-n chains are free on tuples of non-identity elements, rank
(|G|-1)^n, so order-16 groups stay tractable through degree 4. Restriction
is the inclusion-induced map; corestriction is the chain-level transfer
built from left coset representatives; verlagerung is the classical
coset-product transfer on abelianizations, kept as an independent oracle.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .abgroup import AbHom, FgAbGroup, IntMatrix
from .chain import ChainComplex, HomologyData, homology, homology_with_maps, induced_hom
from .errors import InvalidInputError, SizeGuardError
from .groups import FiniteGroup, Subgroup, abelianization_with_map

# cap on |G|^(maxdeg+1); order 16 through degree 4 stays inside
DEFAULT_BAR_GUARD = 4_000_000


def _tuple_index(t, m: int) -> int:
    idx = 0
    for g in t:
        idx = idx * m + (g - 1)
    return idx


@lru_cache(maxsize=6)
def _bar_diff(table: tuple, n: int) -> IntMatrix:
    """Differential from bar degree n to degree n-1; columns indexed by
    non-identity tuples in mixed radix, alternating face sum, faces that
    produce an identity entry dropped."""
    order = len(table)
    m = order - 1
    if n == 1:
        return IntMatrix.zeros(1, m)
    triples = []
    for col, t in enumerate(itertools.product(range(1, order), repeat=n)):
        triples.append((_tuple_index(t[1:], m), col, 1))
        sign = -1
        for i in range(n - 1):
            prod = table[t[i]][t[i + 1]]
            if prod != 0:
                face = t[:i] + (prod,) + t[i + 2 :]
                triples.append((_tuple_index(face, m), col, sign))
            sign = -sign
        triples.append((_tuple_index(t[:-1], m), col, sign))
    return IntMatrix.from_entries(m ** (n - 1), m ** n, triples)


def bar_guard_check(g: FiniteGroup, maxdeg: int, guard: int = DEFAULT_BAR_GUARD) -> None:
    if maxdeg < 0:
        raise InvalidInputError("maxdeg must be nonnegative")
    if g.order ** (maxdeg + 1) > guard:
        raise SizeGuardError(
            f"bar chains for order {g.order} at degree {maxdeg} exceed the size guard "
            f"({g.order}^{maxdeg + 1} > {guard})"
        )


def bar_chains(
    g: FiniteGroup, maxdeg: int, reduced: bool = False, guard: int = DEFAULT_BAR_GUARD
) -> ChainComplex:
    """Normalized bar chains of g up to degree maxdeg.

    Unreduced: degree 0 has rank 1. With reduced=True degree 0 is empty and
    homology in positive degrees is unchanged.
    """
    bar_guard_check(g, maxdeg, guard)
    m = g.order - 1
    ranks = [0 if reduced else 1] + [m**n for n in range(1, maxdeg + 1)]
    diffs = []
    for n in range(1, maxdeg + 1):
        d = _bar_diff(g.table, n)
        if n == 1 and reduced:
            d = IntMatrix.zeros(0, m)
        diffs.append(d)
    return ChainComplex(
        top_degree=maxdeg,
        ranks=tuple(ranks),
        diffs=tuple(diffs),
        meta={"kind": "bar", "group": g.name or f"order{g.order}", "reduced": reduced},
    )


def group_homology(g: FiniteGroup, i: int, guard: int = DEFAULT_BAR_GUARD) -> FgAbGroup:
    """H_i(g; Z) with trivial integer coefficients."""
    if i < 0:
        raise InvalidInputError("homology degree must be nonnegative")
    if i == 0:
        return FgAbGroup.make(1, [])
    c = bar_chains(g, i + 1, guard=guard)
    return homology(c, i)


def homology_data(g: FiniteGroup, i: int, guard: int = DEFAULT_BAR_GUARD) -> HomologyData:
    """H_i with explicit generating cycles and a projection, for induced maps."""
    if i < 1:
        raise InvalidInputError("explicit cycle data starts at degree 1")
    c = bar_chains(g, i + 1, guard=guard)
    return homology_with_maps(c, i)


# --- chain-level maps --------------------------------------------------------


def _local_index(h: Subgroup):
    pos = {e: k for k, e in enumerate(h.elements)}
    return pos


def inclusion_chain_map(g: FiniteGroup, h: Subgroup, n: int) -> IntMatrix:
    """Degree-n bar chains of the subgroup into those of the parent."""
    mh = len(h.elements) - 1
    mg = g.order - 1
    triples = []
    for col, t in enumerate(itertools.product(range(1, len(h.elements)), repeat=n)):
        gt = tuple(h.elements[k] for k in t)
        triples.append((_tuple_index(gt, mg), col, 1))
    return IntMatrix.from_entries(mg**n, mh**n, triples)


def pushforward_chain_map(g: FiniteGroup, q: FiniteGroup, fmap, n: int) -> IntMatrix:
    """Degree-n map induced by a homomorphism g -> q on bar chains; tuples
    acquiring an identity entry die in the normalized complex."""
    mg = g.order - 1
    mq = q.order - 1
    triples = []
    for col, t in enumerate(itertools.product(range(1, g.order), repeat=n)):
        qt = tuple(fmap[x] for x in t)
        if 0 in qt:
            continue
        triples.append((_tuple_index(qt, mq), col, 1))
    return IntMatrix.from_entries(mq**n, mg**n, triples)


def transfer_chain_map(h: Subgroup, n: int) -> IntMatrix:
    """Chain-level transfer from parent bar chains to subgroup bar chains.

    For each left coset representative, sweep the tuple right to left: each
    entry g takes the current representative r to g*r = r'*x with x in the
    subgroup, emits x, and hands r' to the next entry. Summing over cosets
    is a chain map; entries emitting the identity kill the output tuple.
    """
    g = h.parent
    pos = _local_index(h)
    reps = h.coset_reps
    rep_of = [0] * g.order
    rep_inv = {}
    for r in reps:
        rep_inv[r] = g.inv(r)
        for e in h.elements:
            rep_of[g.mul(r, e)] = r
    mg = g.order - 1
    mh = len(h.elements) - 1
    triples = []
    for col, t in enumerate(itertools.product(range(1, g.order), repeat=n)):
        for r0 in reps:
            out = [0] * n
            r = r0
            dead = False
            for j in range(n - 1, -1, -1):
                u = g.mul(t[j], r)
                r = rep_of[u]
                x = g.mul(rep_inv[r], u)
                if x == 0:
                    dead = True
                    break
                out[j] = pos[x]
            if dead:
                continue
            triples.append((_tuple_index(out, mh), col, 1))
    return IntMatrix.from_entries(mh**n, mg**n, triples)


def restriction_map(g: FiniteGroup, h: Subgroup, i: int, guard: int = DEFAULT_BAR_GUARD) -> AbHom:
    """H_i(subgroup) -> H_i(parent), induced by inclusion."""
    if h.parent is not g and h.parent.table != g.table:
        raise InvalidInputError("subgroup does not belong to the given group")
    src = homology_data(h.as_group(), i, guard=guard)
    dst = homology_data(g, i, guard=guard)
    return induced_hom(src, dst, inclusion_chain_map(g, h, i))


def corestriction_map(h: Subgroup, g: FiniteGroup, i: int, guard: int = DEFAULT_BAR_GUARD) -> AbHom:
    """Transfer H_i(parent) -> H_i(subgroup); independent of the choice of
    coset representatives (property-tested, not assumed)."""
    if h.parent is not g and h.parent.table != g.table:
        raise InvalidInputError("subgroup does not belong to the given group")
    src = homology_data(g, i, guard=guard)
    dst = homology_data(h.as_group(), i, guard=guard)
    return induced_hom(src, dst, transfer_chain_map(h, i))


def induced_map_on_homology(
    g: FiniteGroup, q: FiniteGroup, fmap, i: int, guard: int = DEFAULT_BAR_GUARD
) -> AbHom:
    """H_i(g) -> H_i(q) along a homomorphism given as an index map."""
    src = homology_data(g, i, guard=guard)
    dst = homology_data(q, i, guard=guard)
    return induced_hom(src, dst, pushforward_chain_map(g, q, fmap, i))


# --- classical transfer on abelianizations -----------------------------------


def verlagerung(g: FiniteGroup, h: Subgroup) -> AbHom:
    """Transfer on abelianizations by the coset-product formula.

    Each element walks every coset representative once; the subgroup factors
    it emits multiply up to its transfer class.
    """
    if h.parent is not g and h.parent.table != g.table:
        raise InvalidInputError("subgroup does not belong to the given group")
    am_g = abelianization_with_map(g)
    hg = h.as_group()
    am_h = abelianization_with_map(hg)
    pos = _local_index(h)
    reps = h.coset_reps
    rep_of = [0] * g.order
    rep_inv = {}
    for r in reps:
        rep_inv[r] = g.inv(r)
        for e in h.elements:
            rep_of[g.mul(r, e)] = r
    tgt_orders = am_h.group.generator_orders()
    ngt = len(tgt_orders)

    def transfer_class(x: int) -> list[int]:
        acc = [0] * ngt
        for r in reps:
            u = g.mul(x, r)
            r2 = rep_of[u]
            e = g.mul(rep_inv[r2], u)
            for k, c in enumerate(am_h.coords[pos[e]]):
                acc[k] += c
        return acc

    src_orders = am_g.group.generator_orders()
    cols = []
    for k in range(len(src_orders)):
        acc = [0] * ngt
        for x, cnt in enumerate(am_g.representatives[k]):
            if cnt == 0:
                continue
            tc = transfer_class(x)
            for t in range(ngt):
                acc[t] += cnt * tc[t]
        cols.append(acc)
    dicts = [dict() for _ in range(ngt)]
    for j, col in enumerate(cols):
        for t, v in enumerate(col):
            if v:
                dicts[t][j] = v
    return AbHom(
        am_g.group, am_h.group, IntMatrix(ngt, len(src_orders), dicts)
    ).normalized()


def h1_identification(g: FiniteGroup, data: HomologyData | None = None) -> AbHom:
    """The canonical isomorphism H_1 -> abelianization.

    A degree-1 cycle is a formal sum of elements; its class is the matching
    product in the abelianization.
    """
    if data is None:
        data = homology_data(g, 1)
    am = abelianization_with_map(g)
    ngt = am.group.ngens()
    dicts = [dict() for _ in range(ngt)]
    for j in range(data.generators.cols):
        z = data.generators.column(j)
        acc = [0] * ngt
        for idx, cnt in enumerate(z):
            if cnt == 0:
                continue
            for t, c in enumerate(am.coords[idx + 1]):
                acc[t] += cnt * c
        for t, v in enumerate(acc):
            if v:
                dicts[t][j] = v
    hom = AbHom(data.group, am.group, IntMatrix(ngt, data.group.ngens(), dicts)).normalized()
    return hom
