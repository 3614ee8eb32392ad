"""Connective chain complexes of free Z-modules: homology, shifts, truncation.

Chain components are free; torsion lives only in homology. Degree indexing is
homological (all degrees >= 0) and every complex carries an explicit
top_degree, because the complexes arriving here are truncations of infinite
ones: homology at the top degree misses its incoming differential and is
flagged with TruncationWarning.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

from .abgroup import (
    AbHom,
    FgAbGroup,
    IntMatrix,
    cokernel_presentation,
    column_echelon_basis,
    iso_test,
    kernel_basis,
    snf,
    snf_diagonal,
    solve_columns,
)
from .errors import InvalidInputError

SCHEMA_CHAIN = "dcft/chain-complex/1"

# with_maps is viable only while the transform matrices stay dense-python
# friendly; larger differentials take the rank/torsion route.
_WITH_MAPS_COLS = 360


class TruncationWarning(UserWarning):
    """Raised when a computation touches the unreliable truncation boundary."""


@dataclass(frozen=True)
class ChainComplex:
    """ranks[n] is the free rank in degree n; diffs[n-1] is d_n: C_n -> C_{n-1}."""

    top_degree: int
    ranks: tuple[int, ...]
    diffs: tuple[IntMatrix, ...]
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.top_degree < 0:
            raise InvalidInputError("top_degree must be >= 0")
        if len(self.ranks) != self.top_degree + 1:
            raise InvalidInputError("ranks length must be top_degree + 1")
        if len(self.diffs) != self.top_degree:
            raise InvalidInputError("need exactly one differential per degree >= 1")

    def rank(self, n: int) -> int:
        return self.ranks[n] if 0 <= n <= self.top_degree else 0

    def diff(self, n: int) -> IntMatrix:
        """d_n: C_n -> C_{n-1}; zero matrix outside 1..top_degree."""
        if 1 <= n <= self.top_degree:
            return self.diffs[n - 1]
        return IntMatrix.zeros(self.rank(n - 1), self.rank(n))

    def __str__(self):
        return "ChainComplex(ranks=" + ",".join(str(r) for r in self.ranks) + ")"


def complex_from_ranks(ranks, diffs, meta=None) -> ChainComplex:
    return ChainComplex(len(ranks) - 1, tuple(ranks), tuple(diffs), meta or {})


def zero_complex(top_degree: int = 0) -> ChainComplex:
    ranks = (0,) * (top_degree + 1)
    diffs = tuple(IntMatrix.zeros(0, 0) for _ in range(top_degree))
    return ChainComplex(top_degree, ranks, diffs)


def two_term_complex(matrix: IntMatrix) -> ChainComplex:
    """[C_1 --matrix--> C_0]."""
    return ChainComplex(1, (matrix.rows, matrix.cols), (matrix,))


def validate(c: ChainComplex) -> None:
    """d o d = 0 and shape agreement; names the first failing degree."""
    for n in range(1, c.top_degree + 1):
        d = c.diffs[n - 1]
        if d.rows != c.ranks[n - 1] or d.cols != c.ranks[n]:
            raise InvalidInputError(f"differential shape mismatch at degree {n}")
    for n in range(2, c.top_degree + 1):
        if not c.diffs[n - 2].mul(c.diffs[n - 1]).is_zero():
            raise InvalidInputError(f"d o d != 0 at degree {n}")


def homology(c: ChainComplex, n: int) -> FgAbGroup:
    """H_n = ker d_n / im d_{n+1}, canonical.

    Exploits that im(d_n) is free: the cokernel of d_{n+1} splits off
    ker d_n / im d_{n+1}, so rank(d_n) plus the invariant factors of d_{n+1}
    determine H_n without a kernel basis. The explicit kernel-basis route is
    homology_with_maps; both are cross-checked in the test suite.
    """
    if n < 0 or n > c.top_degree:
        raise InvalidInputError(f"degree {n} out of range 0..{c.top_degree}")
    if n == c.top_degree:
        warnings.warn(
            f"homology at top degree {n} misses the incoming differential",
            TruncationWarning,
            stacklevel=2,
        )
    r_in = len(snf_diagonal(c.diff(n))) if n >= 1 else 0
    dnext = c.diff(n + 1)
    diag = snf_diagonal(dnext) if n < c.top_degree else ()
    free = c.rank(n) - r_in - len(diag)
    return FgAbGroup.make(free, [d for d in diag if d > 1])


@dataclass
class HomologyData:
    """H_n with coordinates: generating cycles and a projection to them."""

    group: FgAbGroup
    degree: int
    # columns are cycles in C_degree representing the canonical generators
    generators: IntMatrix
    _kernel: IntMatrix
    _vinv: IntMatrix
    _ux: IntMatrix
    _orders: tuple[int, ...]

    def project(self, cycle) -> list[int]:
        """Coordinates of a cycle in the canonical generators."""
        y = self._vinv.apply(cycle)
        kdim = self._kernel.cols
        head = y[: len(y) - kdim]
        if any(head):
            raise InvalidInputError("vector is not a cycle")
        tail = y[len(y) - kdim:]
        coords = self._ux.apply(tail)
        out = []
        for v, o in zip(coords, self._orders):
            if o == 1:
                continue
            out.append(v % o if o else v)
        return out


def homology_with_maps(c: ChainComplex, n: int) -> HomologyData:
    """Homology via an explicit kernel basis of d_n, with generator cycles.

    SNF of d_n gives the kernel basis; the image of d_{n+1} is rewritten in
    kernel coordinates and a second SNF presents the quotient canonically.
    """
    if n < 0 or n > c.top_degree:
        raise InvalidInputError(f"degree {n} out of range 0..{c.top_degree}")
    if n == c.top_degree:
        warnings.warn(
            f"homology at top degree {n} misses the incoming differential",
            TruncationWarning,
            stacklevel=2,
        )
    cn = c.rank(n)
    if n >= 1:
        s = snf(c.diff(n))
        r = len(s.d)
        kern = s.V.submatrix_cols(range(r, cn))
        vinv = s.Vinv
    else:
        kern = IntMatrix.identity(cn)
        vinv = IntMatrix.identity(cn)
    kdim = kern.cols
    # boundaries in kernel coordinates: last kdim rows of Vinv @ d_{n+1};
    # wide differentials shrink to a column basis first (span is all that matters)
    dnext = c.diff(n + 1)
    if dnext.cols > dnext.rows:
        dnext = column_echelon_basis(dnext)
    x_full = vinv.mul(dnext)
    xd = [dict(x_full.row_dict(i)) for i in range(cn - kdim, cn)]
    x = IntMatrix(kdim, x_full.cols, xd)
    x = _column_reduce(x)
    sx = snf(x)
    orders = list(sx.d) + [0] * (kdim - len(sx.d))
    torsion = [d for d in sx.d if d > 1]
    free = kdim - len(sx.d)
    group = FgAbGroup.make(free, torsion)
    keep = [i for i, o in enumerate(orders) if o != 1]
    # generator cycles: kernel basis times Uinv columns, torsion-first order
    gen_cols = sx.Uinv.submatrix_cols(keep)
    generators = kern.mul(gen_cols)
    kept_orders = tuple(orders[i] for i in keep)
    ux_rows = [dict(sx.U.row_dict(i)) for i in keep]
    ux = IntMatrix(len(keep), kdim, ux_rows)
    return HomologyData(
        group=group,
        degree=n,
        generators=generators,
        _kernel=kern,
        _vinv=vinv,
        _ux=ux,
        _orders=kept_orders,
    )


def _column_reduce(x: IntMatrix) -> IntMatrix:
    """Column echelon (column ops only), which preserves the column span."""
    if x.cols <= x.rows * 2:
        return x
    m = x.rows
    basis: dict[int, list[int]] = {}
    for j in range(x.cols):
        vec = x.column(j)
        i = 0
        while i < m:
            v = vec[i]
            if v == 0:
                i += 1
                continue
            b = basis.get(i)
            if b is None:
                basis[i] = vec if v > 0 else [-t for t in vec]
                break
            p = b[i]  # kept positive
            while v:
                q = (v + (p >> 1)) // p
                vec = [t - q * u for t, u in zip(vec, b)]
                v = vec[i]
                if v:
                    # smaller remainder becomes the pivot; keep reducing old pivot
                    nb = vec if v > 0 else [-t for t in vec]
                    vec = b
                    b = nb
                    basis[i] = b
                    p = b[i]
                    v = vec[i]
            i += 1
    cols = [basis[k] for k in sorted(basis)]
    dicts = [dict() for _ in range(m)]
    for j, col in enumerate(cols):
        for i, v in enumerate(col):
            if v:
                dicts[i][j] = v
    return IntMatrix(m, len(cols) if cols else 0, dicts)


def induced_hom(src: HomologyData, dst: HomologyData, chain_map: IntMatrix) -> AbHom:
    """Map on homology induced by a chain map given in degree src.degree."""
    cols = []
    for j in range(src.generators.cols):
        z = src.generators.column(j)
        cols.append(dst.project(chain_map.apply(z)))
    ngt = dst.group.ngens()
    dicts = [dict() for _ in range(ngt)]
    for j, col in enumerate(cols):
        for i, v in enumerate(col):
            if v:
                dicts[i][j] = v
    return AbHom(src.group, dst.group, IntMatrix(ngt, src.group.ngens(), dicts)).normalized()


def shift(c: ChainComplex, k: int) -> ChainComplex:
    """Degree n of the result holds degree n - k of c; H_n(shift) = H_{n-k}(c).

    Content pushed below degree 0 is dropped; nonzero drops are recorded in
    meta["dropped"] rather than raised.
    """
    if k == 0:
        return c
    new_top = c.top_degree + k
    dropped = []
    if new_top < 0:
        dropped = [(n, c.ranks[n]) for n in range(c.top_degree + 1) if c.ranks[n]]
        return ChainComplex(0, (0,), (), {"dropped": dropped})
    ranks = []
    for n in range(new_top + 1):
        ranks.append(c.rank(n - k))
    if k > 0:
        diffs = [IntMatrix.zeros(ranks[n - 1], ranks[n]) for n in range(1, k + 1)]
        diffs += [c.diffs[n - 1] for n in range(1, c.top_degree + 1)]
    else:
        dropped = [(n, c.ranks[n]) for n in range(-k) if c.ranks[n]]
        diffs = [c.diffs[n - 1] for n in range(1 - k, c.top_degree + 1)]
    meta = {"dropped": dropped} if dropped else {}
    return ChainComplex(new_top, tuple(ranks), tuple(diffs), meta)


def connective_truncate(c: ChainComplex) -> ChainComplex:
    """Identity on the connective complexes this library builds; idempotent."""
    validate(c)
    return c


def direct_sum(c1: ChainComplex, c2: ChainComplex) -> ChainComplex:
    top = max(c1.top_degree, c2.top_degree)
    ranks = tuple(c1.rank(n) + c2.rank(n) for n in range(top + 1))
    diffs = []
    for n in range(1, top + 1):
        a, b = c1.diff(n), c2.diff(n)
        m = IntMatrix.zeros(a.rows + b.rows, a.cols + b.cols)
        dicts = [dict(d) for d in m._rows]
        for i in range(a.rows):
            for j, v in a.row_dict(i).items():
                dicts[i][j] = v
        for i in range(b.rows):
            for j, v in b.row_dict(i).items():
                dicts[a.rows + i][a.cols + j] = v
        diffs.append(IntMatrix(a.rows + b.rows, a.cols + b.cols, dicts))
    return ChainComplex(top, ranks, tuple(diffs))


def euler_characteristic(c: ChainComplex) -> int:
    return sum((-1) ** n * r for n, r in enumerate(c.ranks))


def complexes_isomorphic(c1: ChainComplex, c2: ChainComplex) -> bool:
    """Complete isomorphism test for bounded complexes of free Z-modules.

    Over a PID such a complex splits into elementary pieces, so equal ranks
    and equal invariant factors of each differential decide the question.
    """
    top = max(c1.top_degree, c2.top_degree)
    for n in range(top + 1):
        if c1.rank(n) != c2.rank(n):
            return False
    for n in range(1, top + 1):
        if tuple(snf_diagonal(c1.diff(n))) != tuple(snf_diagonal(c2.diff(n))):
            return False
    return True


# --- serialization ---------------------------------------------------------


def to_json_dict(c: ChainComplex) -> dict:
    return {
        "schema_version": SCHEMA_CHAIN,
        "top_degree": c.top_degree,
        "ranks": list(c.ranks),
        "differentials": {str(n): c.diffs[n - 1].to_rows() for n in range(1, c.top_degree + 1)},
    }


def from_json_dict(doc: dict) -> ChainComplex:
    if doc.get("schema_version") != SCHEMA_CHAIN:
        raise InvalidInputError("unsupported chain-complex schema")
    top = int(doc["top_degree"])
    ranks = tuple(int(r) for r in doc["ranks"])
    diffs = []
    for n in range(1, top + 1):
        rows = doc["differentials"][str(n)]
        m = IntMatrix.from_rows(rows) if rows else IntMatrix.zeros(ranks[n - 1], ranks[n])
        if m.rows == 0 or m.cols == 0:
            m = IntMatrix.zeros(ranks[n - 1], ranks[n])
        diffs.append(m)
    c = ChainComplex(top, ranks, tuple(diffs))
    validate(c)
    return c


def dumps_canonical(doc: dict) -> str:
    """Deterministic serialization used by every report writer."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
