"""Finite groups as multiplication tables, subgroups, and a fixed catalog.

Index 0 is always the identity. The catalog ships every group of order <= 16
(one representative per isomorphism class) under stable ASCII names, so
batch runs are reproducible without external input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

from .abgroup import FgAbGroup, IntMatrix, snf
from .errors import InvalidInputError

SCHEMA_GROUP = "dcft/finite-group/1"


@dataclass(frozen=True)
class FiniteGroup:
    order: int
    table: tuple[tuple[int, ...], ...]
    name: str = ""
    generator_labels: tuple[str, ...] = ()
    presentation: tuple | None = None  # optional (ngens, relator words) cross-check data

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        row = self.table[a]
        for b, v in enumerate(row):
            if v == 0:
                return b
        raise InvalidInputError("element without inverse")

    def element_order(self, a: int) -> int:
        n = 1
        x = a
        while x != 0:
            x = self.mul(x, a)
            n += 1
        return n

    def __str__(self):
        return self.name or f"group of order {self.order}"


def validate_group(g: FiniteGroup) -> None:
    n = g.order
    if len(g.table) != n or any(len(r) != n for r in g.table):
        raise InvalidInputError("table shape mismatch")
    for r in g.table:
        for v in r:
            if not 0 <= v < n:
                raise InvalidInputError("table entry out of range")
    for a in range(n):
        if g.table[0][a] != a or g.table[a][0] != a:
            raise InvalidInputError("index 0 is not an identity")
    for a in range(n):
        if 0 not in g.table[a]:
            raise InvalidInputError(f"element {a} has no inverse")
    t = g.table
    for a in range(n):
        ta = t[a]
        for b in range(n):
            tab = t[ta[b]]
            tb = t[b]
            for c in range(n):
                if tab[c] != ta[tb[c]]:
                    raise InvalidInputError(f"associativity fails at ({a},{b},{c})")


def _normalize_identity(elems, mul):
    """Reindex an element list so the identity lands at index 0."""
    ident = None
    for e in elems:
        if all(mul(e, x) == x for x in elems[: min(len(elems), 4)]):
            if all(mul(e, x) == x and mul(x, e) == x for x in elems):
                ident = e
                break
    if ident is None:
        raise InvalidInputError("no identity found")
    ordered = [ident] + [e for e in elems if e != ident]
    index = {e: i for i, e in enumerate(ordered)}
    table = tuple(tuple(index[mul(a, b)] for b in ordered) for a in ordered)
    return table


def group_from_elements(elems, mul, name="") -> FiniteGroup:
    table = _normalize_identity(list(elems), mul)
    g = FiniteGroup(order=len(table), table=table, name=name)
    validate_group(g)
    return g


def closure(generators, mul, identity):
    """Closure of the generator set under mul; BFS keeps insertion stable."""
    seen = {identity}
    out = [identity]
    frontier = [identity]
    while frontier:
        nxt = []
        for x in frontier:
            for h in generators:
                y = mul(x, h)
                if y not in seen:
                    seen.add(y)
                    out.append(y)
                    nxt.append(y)
        frontier = nxt
    return out


# --- constructions ----------------------------------------------------------


def cyclic_group(n: int, name="") -> FiniteGroup:
    table = tuple(tuple((a + b) % n for b in range(n)) for a in range(n))
    return FiniteGroup(n, table, name or f"Z{n}")


def direct_product(g: FiniteGroup, h: FiniteGroup, name="") -> FiniteGroup:
    n, m = g.order, h.order
    idx = lambda a, b: a * m + b
    table = tuple(
        tuple(idx(g.table[a1][a2], h.table[b1][b2]) for a2 in range(n) for b2 in range(m))
        for a1 in range(n)
        for b1 in range(m)
    )
    return FiniteGroup(n * m, table, name or f"{g.name}x{h.name}")


def semidirect_cyclic(n: int, m: int, r: int, name="") -> FiniteGroup:
    """Z/n x| Z/m with the generator of Z/m acting by x -> r*x; r^m = 1 mod n."""
    if pow(r, m, n) != 1 % n:
        raise InvalidInputError("action order does not divide m")
    def mul(p, q):
        (a, i), (b, j) = p, q
        return ((a + b * pow(r, i, n)) % n, (i + j) % m)
    elems = [(a, i) for a in range(n) for i in range(m)]
    return group_from_elements(elems, mul, name)


def dihedral_group(n: int, name="") -> FiniteGroup:
    """Order 2n: rotations and reflections of the n-gon."""
    def mul(p, q):
        (a, i), (b, j) = p, q
        return ((a + (b if i == 0 else -b)) % n, (i + j) % 2)
    elems = [(a, i) for a in range(n) for i in range(2)]
    return group_from_elements(elems, mul, name or f"D{n}")


def dicyclic_group(n: int, name="") -> FiniteGroup:
    """Order 4n: <a, b | a^{2n} = 1, b^2 = a^n, b a b^{-1} = a^{-1}>."""
    # elements a^k b^e, k mod 2n, e in {0,1}; b a = a^{-1} b, b^2 = a^n
    def mul(p, q):
        (k, e), (l, f) = p, q
        if e == 0:
            return ((k + l) % (2 * n), f)
        k2 = (k - l) % (2 * n)
        if f == 0:
            return (k2, 1)
        return ((k2 + n) % (2 * n), 0)
    elems = [(k, e) for k in range(2 * n) for e in range(2)]
    return group_from_elements(elems, mul, name or f"Dic{n}")


def symmetric_group(n: int, name="") -> FiniteGroup:
    import itertools

    perms = list(itertools.permutations(range(n)))
    def mul(p, q):
        return tuple(p[q[i]] for i in range(n))
    return group_from_elements(perms, mul, name or f"S{n}")


def alternating_group(n: int, name="") -> FiniteGroup:
    import itertools

    def parity(p):
        seen = [False] * len(p)
        par = 0
        for i in range(len(p)):
            if seen[i]:
                continue
            j, ln = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                ln += 1
            par ^= (ln - 1) & 1
        return par
    perms = [p for p in itertools.permutations(range(n)) if parity(p) == 0]
    def mul(p, q):
        return tuple(p[q[i]] for i in range(n))
    return group_from_elements(perms, mul, name or f"A{n}")


def _pauli_group() -> FiniteGroup:
    """Central product of Z/4 and D4: closure of the 2x2 sign/swap matrices
    X, Z and the central i over the Gaussian integers."""
    # entries are Gaussian integers (re, im); matrices are 2x2 tuples
    def cmul(u, v):
        return (u[0] * v[0] - u[1] * v[1], u[0] * v[1] + u[1] * v[0])
    def cadd(u, v):
        return (u[0] + v[0], u[1] + v[1])
    def mmul(p, q):
        return tuple(
            tuple(
                cadd(cmul(p[i][0], q[0][j]), cmul(p[i][1], q[1][j]))
                for j in range(2)
            )
            for i in range(2)
        )
    one = (1, 0)
    zero = (0, 0)
    ii = (0, 1)
    X = ((zero, one), (one, zero))
    Z = ((one, zero), (zero, (-1, 0)))
    S = ((ii, zero), (zero, ii))
    I2 = ((one, zero), (zero, one))
    elems = closure([X, Z, S], mmul, I2)
    if len(elems) != 16:
        raise InvalidInputError("pauli closure has wrong size")
    return group_from_elements(elems, mmul, "Pauli16")


def _z4_semi_z4() -> FiniteGroup:
    # <a, b | a^4 = b^4 = 1, b a b^-1 = a^-1>
    def mul(p, q):
        (a, i), (b, j) = p, q
        return ((a + (b if i % 2 == 0 else -b)) % 4, (i + j) % 4)
    elems = [(a, i) for a in range(4) for i in range(4)]
    return group_from_elements(elems, mul, "Z4rZ4")


def _z4xz2_semi_z2() -> FiniteGroup:
    # <a, b, c | a^4 = b^2 = c^2 = 1, ab = ba, c a c = a b, c b c = b>
    def mul(p, q):
        (i, j, k), (x, y, z) = p, q
        # c^k a^x = a^x b^{k*x} c^k
        return ((i + x) % 4, (j + y + k * x) % 2, (k + z) % 2)
    elems = [(i, j, k) for i in range(4) for j in range(2) for k in range(2)]
    return group_from_elements(elems, mul, "Z4xZ2rZ2")


def _modular_16() -> FiniteGroup:
    # <a, b | a^8 = b^2 = 1, b a b^-1 = a^5>
    return semidirect_cyclic(8, 2, 5, "M16")


def _semidihedral_16() -> FiniteGroup:
    # <a, b | a^8 = b^2 = 1, b a b^-1 = a^3>
    return semidirect_cyclic(8, 2, 3, "SD16")


def _abelian(name: str, *factors: int) -> FiniteGroup:
    g = cyclic_group(factors[0])
    for f in factors[1:]:
        g = direct_product(g, cyclic_group(f))
    return FiniteGroup(g.order, g.table, name)


@lru_cache(maxsize=1)
def catalog() -> dict[str, FiniteGroup]:
    """Every group of order <= 16, one per isomorphism class, stable names."""
    groups: list[FiniteGroup] = []
    add = groups.append
    for n in range(1, 17):
        add(cyclic_group(n))
    add(_abelian("Z2xZ2", 2, 2))
    add(_abelian("Z4xZ2", 4, 2))
    add(_abelian("Z2xZ2xZ2", 2, 2, 2))
    add(_abelian("Z3xZ3", 3, 3))
    add(_abelian("Z6xZ2", 6, 2))
    add(_abelian("Z8xZ2", 8, 2))
    add(_abelian("Z4xZ4", 4, 4))
    add(_abelian("Z4xZ2xZ2", 4, 2, 2))
    add(_abelian("Z2xZ2xZ2xZ2", 2, 2, 2, 2))
    add(symmetric_group(3, "S3"))
    add(dihedral_group(4, "D4"))
    add(dicyclic_group(2, "Q8"))
    add(dihedral_group(5, "D5"))
    add(dihedral_group(6, "D6"))
    add(alternating_group(4, "A4"))
    add(dicyclic_group(3, "Dic3"))
    add(dihedral_group(7, "D7"))
    add(dihedral_group(8, "D8"))
    add(dicyclic_group(4, "Q16"))
    add(_semidihedral_16())
    add(_modular_16())
    g = direct_product(dihedral_group(4, "D4"), cyclic_group(2), "D4xZ2")
    add(g)
    add(direct_product(dicyclic_group(2, "Q8"), cyclic_group(2), "Q8xZ2"))
    add(_pauli_group())
    add(_z4_semi_z4())
    add(_z4xz2_semi_z2())
    out = {}
    for g in groups:
        if g.name in out:
            raise InvalidInputError(f"duplicate catalog name {g.name}")
        out[g.name] = g
    return out


def catalog_group(name: str) -> FiniteGroup:
    cat = catalog()
    if name == "trivial":
        return cat["Z1"]
    if name not in cat:
        raise InvalidInputError(f"unknown catalog group {name!r}; known: {', '.join(sorted(cat))}")
    return cat[name]


# --- subgroups ---------------------------------------------------------------


@dataclass(frozen=True)
class Subgroup:
    parent: FiniteGroup
    elements: tuple[int, ...]
    # left coset representatives, identity first (it represents H itself)
    coset_reps: tuple[int, ...] = field(default=())

    def __post_init__(self):
        elems = tuple(sorted(set(self.elements)))
        object.__setattr__(self, "elements", elems)
        es = set(elems)
        if 0 not in es:
            raise InvalidInputError("subgroup must contain the identity")
        for a in elems:
            if self.parent.inv(a) not in es:
                raise InvalidInputError("subgroup not closed under inverse")
            for b in elems:
                if self.parent.mul(a, b) not in es:
                    raise InvalidInputError("subgroup not closed under product")
        if self.parent.order % len(elems):
            raise InvalidInputError("subgroup order does not divide group order")
        if not self.coset_reps:
            reps = []
            assigned = set()
            for g in range(self.parent.order):
                if g in assigned:
                    continue
                reps.append(g)
                for h in elems:
                    assigned.add(self.parent.mul(g, h))
            object.__setattr__(self, "coset_reps", tuple(reps))

    def index(self) -> int:
        return self.parent.order // len(self.elements)

    def as_group(self) -> FiniteGroup:
        """The subgroup as a standalone group; element i is self.elements[i]."""
        pos = {e: i for i, e in enumerate(self.elements)}
        table = tuple(
            tuple(pos[self.parent.mul(a, b)] for b in self.elements) for a in self.elements
        )
        return FiniteGroup(len(self.elements), table, name=f"sub({self.parent.name})")


def subgroup_generated(g: FiniteGroup, gens) -> Subgroup:
    elems = closure(list(gens), g.mul, 0)
    return Subgroup(g, tuple(elems))


# --- abelianization ----------------------------------------------------------


@dataclass(frozen=True)
class Abelianization:
    group: FgAbGroup
    # coords[g] = coordinates of the class of g in group's canonical generators
    coords: tuple[tuple[int, ...], ...]
    # representatives[k] = integer vector over group elements whose class is
    # canonical generator k; lets maps out of the abelianization be built from
    # per-element data
    representatives: tuple[tuple[int, ...], ...]

    def class_of(self, g: int) -> list[int]:
        return list(self.coords[g])


def abelianization_with_map(g: FiniteGroup) -> Abelianization:
    """G^ab presented on all elements with relations g*h = g+h, canonically.

    The SNF transform turns each element into coordinates in the canonical
    invariant-factor generators.
    """
    n = g.order
    triples = []
    col = 0
    for a in range(n):
        for b in range(n):
            c = g.table[a][b]
            # relation a + b - c = 0
            for idx, s in ((a, 1), (b, 1), (c, -1)):
                triples.append((idx, col, s))
            col += 1
    rel = IntMatrix.from_entries(n, col, triples)
    s = snf(rel)
    # coker Z^n / im(rel) = Z^n / D-span under u-coordinates
    d = list(s.d) + [0] * (n - len(s.d))
    keep = [i for i, o in enumerate(d) if o != 1]
    orders = [d[i] for i in keep]
    group = FgAbGroup.make(
        sum(1 for o in orders if o == 0), [o for o in orders if o > 1]
    )
    # canonical generator order: torsion then free; orders list may interleave
    tor_idx = [i for i, o in zip(keep, orders) if o > 1]
    free_idx = [i for i, o in zip(keep, orders) if o == 0]
    ordered = tor_idx + free_idx
    coords = []
    for e in range(n):
        u_col = [s.U.entry(i, e) for i in ordered]
        red = []
        for v, i in zip(u_col, ordered):
            o = d[i]
            red.append(v % o if o else v)
        coords.append(tuple(red))
    reps = tuple(tuple(s.Uinv.entry(e, i) for e in range(n)) for i in ordered)
    return Abelianization(group=group, coords=tuple(coords), representatives=reps)


def abelianization(g: FiniteGroup) -> FgAbGroup:
    return abelianization_with_map(g).group


def commutator_subgroup(g: FiniteGroup) -> Subgroup:
    """Normal closure of all commutators (test oracle for abelianization)."""
    comms = set()
    for a in range(g.order):
        ia = g.inv(a)
        for b in range(g.order):
            comms.add(g.mul(g.mul(a, b), g.mul(ia, g.inv(b))))
    return subgroup_generated(g, comms)


def quotient_group(g: FiniteGroup, normal: Subgroup) -> tuple[FiniteGroup, list[int]]:
    """Quotient by a normal subgroup; also returns the projection index map."""
    es = set(normal.elements)
    for a in range(g.order):
        ia = g.inv(a)
        for h in normal.elements:
            if g.mul(g.mul(a, h), ia) not in es:
                raise InvalidInputError("subgroup is not normal")
    coset_of = [-1] * g.order
    cosets = []
    for a in range(g.order):
        if coset_of[a] >= 0:
            continue
        idx = len(cosets)
        cosets.append(a)
        for h in normal.elements:
            coset_of[g.mul(a, h)] = idx
    def mul(i, j):
        return coset_of[g.mul(cosets[i], cosets[j])]
    table = _normalize_identity(list(range(len(cosets))), mul)
    # _normalize_identity may permute; rebuild projection accordingly
    ident = coset_of[0]
    ordered = [ident] + [i for i in range(len(cosets)) if i != ident]
    pos = {c: i for i, c in enumerate(ordered)}
    q = FiniteGroup(len(cosets), table, name=f"{g.name}/N")
    proj = [pos[coset_of[a]] for a in range(g.order)]
    return q, proj


# --- homomorphisms and isomorphism -------------------------------------------


def is_homomorphism(fmap, g: FiniteGroup, h: FiniteGroup) -> bool:
    return all(
        fmap[g.mul(a, b)] == h.mul(fmap[a], fmap[b]) for a in range(g.order) for b in range(g.order)
    )


def is_surjective_map(fmap, h: FiniteGroup) -> bool:
    return len(set(fmap)) == h.order


def _fingerprint(g: FiniteGroup):
    orders = sorted(g.element_order(a) for a in range(g.order))
    center = sum(
        1 for a in range(g.order) if all(g.mul(a, b) == g.mul(b, a) for b in range(g.order))
    )
    ab = abelianization(g)
    derived = len(commutator_subgroup(g).elements)
    return (g.order, tuple(orders), center, ab.free_rank, ab.torsion, derived)


def groups_isomorphic(g: FiniteGroup, h: FiniteGroup) -> bool:
    """Backtracking isomorphism search, pruned by element orders."""
    if _fingerprint(g) != _fingerprint(h):
        return False
    n = g.order
    gens = []
    got = subgroup_generated(g, [])
    for a in range(n):
        if a in got.elements:
            continue
        gens.append(a)
        got = subgroup_generated(g, gens)
        if len(got.elements) == n:
            break
    h_orders = {}
    for b in range(n):
        h_orders.setdefault(h.element_order(b), []).append(b)

    g_elems = closure(gens, g.mul, 0)
    order_index = {e: i for i, e in enumerate(g_elems)}

    def extend(mapping, assigned):
        k = len(mapping)
        if k == len(gens):
            # build full map by closure words
            img = {0: 0}
            frontier = [0]
            while frontier:
                nxt = []
                for x in frontier:
                    for gi, hi in zip(gens, mapping):
                        y = g.mul(x, gi)
                        iy = h.mul(img[x], hi)
                        if y in img:
                            if img[y] != iy:
                                return False
                        else:
                            img[y] = iy
                            nxt.append(y)
                frontier = nxt
            if len(img) != n or len(set(img.values())) != n:
                return False
            fmap = [img[a] for a in range(n)]
            return is_homomorphism(fmap, g, h)
        a = gens[k]
        for b in h_orders.get(g.element_order(a), []):
            if extend(mapping + [b], assigned):
                return True
        return False

    return bool(extend([], set()))


# --- serialization -----------------------------------------------------------


def group_to_json_dict(g: FiniteGroup) -> dict:
    doc = {
        "schema_version": SCHEMA_GROUP,
        "order": g.order,
        "table": [v for row in g.table for v in row],
    }
    if g.name:
        doc["name"] = g.name
    return doc


def group_from_json_dict(doc: dict) -> FiniteGroup:
    if doc.get("schema_version") != SCHEMA_GROUP:
        raise InvalidInputError("unsupported finite-group schema")
    n = int(doc["order"])
    flat = [int(v) for v in doc["table"]]
    if len(flat) != n * n:
        raise InvalidInputError("table length must be order^2")
    table = tuple(tuple(flat[i * n : (i + 1) * n]) for i in range(n))
    g = FiniteGroup(n, table, name=str(doc.get("name", "")))
    validate_group(g)
    return g


def load_group(path: str) -> FiniteGroup:
    with open(path, "r", encoding="utf-8") as fh:
        return group_from_json_dict(json.load(fh))
