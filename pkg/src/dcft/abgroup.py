"""Exact integer linear algebra and finitely generated abelian groups.

Everything downstream (homology, class groups, ray class groups) reduces to
Smith/Hermite normal forms computed here. All arithmetic is arbitrary
precision; the only fixed-width fast path (int64 numpy) sits behind an
overflow monitor that falls back to object dtype.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

# int64 entries beyond this bound trigger the exact object-dtype fallback.
_INT64_SAFE = 1 << 59


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with g = gcd(a, b) >= 0 and x*a + y*b = g."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


class IntMatrix:
    """Immutable integer matrix, row-sparse storage with dense semantics."""

    __slots__ = ("rows", "cols", "_rows", "_snf_diag_cache")

    def __init__(self, rows: int, cols: int, row_dicts):
        if rows < 0 or cols < 0:
            raise InvalidInputError("negative matrix dimensions")
        self.rows = rows
        self.cols = cols
        self._rows = tuple(row_dicts)
        self._snf_diag_cache = None
        if len(self._rows) != rows:
            raise InvalidInputError("row count mismatch")

    # --- constructors -----------------------------------------------------

    @classmethod
    def from_rows(cls, data) -> "IntMatrix":
        data = [list(r) for r in data]
        rows = len(data)
        cols = len(data[0]) if rows else 0
        if any(len(r) != cols for r in data):
            raise InvalidInputError("ragged rows")
        dicts = [{j: int(v) for j, v in enumerate(r) if v} for r in data]
        return cls(rows, cols, dicts)

    @classmethod
    def from_entries(cls, rows: int, cols: int, triples) -> "IntMatrix":
        dicts = [dict() for _ in range(rows)]
        for i, j, v in triples:
            if v:
                nv = dicts[i].get(j, 0) + int(v)
                if nv:
                    dicts[i][j] = nv
                else:
                    dicts[i].pop(j, None)
        return cls(rows, cols, dicts)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, [dict() for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, [{i: 1} for i in range(n)])

    @classmethod
    def diagonal(cls, rows: int, cols: int, diag) -> "IntMatrix":
        dicts = [dict() for _ in range(rows)]
        for i, v in enumerate(diag):
            if v:
                dicts[i][i] = int(v)
        return cls(rows, cols, dicts)

    # --- accessors --------------------------------------------------------

    def entry(self, i: int, j: int) -> int:
        return self._rows[i].get(j, 0)

    def row_dict(self, i: int) -> dict:
        return self._rows[i]

    def to_rows(self) -> list[list[int]]:
        out = []
        for d in self._rows:
            row = [0] * self.cols
            for j, v in d.items():
                row[j] = v
            out.append(row)
        return out

    def nnz(self) -> int:
        return sum(len(d) for d in self._rows)

    def max_abs(self) -> int:
        m = 0
        for d in self._rows:
            for v in d.values():
                if v > m:
                    m = v
                elif -v > m:
                    m = -v
        return m

    def is_zero(self) -> bool:
        return all(not d for d in self._rows)

    def __eq__(self, other):
        return (
            isinstance(other, IntMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self._rows == other._rows
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(tuple(sorted(d.items())) for d in self._rows)))

    def __repr__(self):
        return f"IntMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"

    # --- algebra ----------------------------------------------------------

    def transpose(self) -> "IntMatrix":
        dicts = [dict() for _ in range(self.cols)]
        for i, d in enumerate(self._rows):
            for j, v in d.items():
                dicts[j][i] = v
        return IntMatrix(self.cols, self.rows, dicts)

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise InvalidInputError("shape mismatch in matrix product")
        # dense products with provably int64-safe accumulation go through numpy
        cells = self.rows * self.cols + other.rows * other.cols
        work = self.nnz() * max(1, other.nnz() // max(1, other.rows))
        if cells <= 2_000_000 and work > 200_000:
            bound = self.max_abs() * other.max_abs() * max(1, self.cols)
            if bound < _INT64_SAFE:
                a = np.array(self.to_rows(), dtype=np.int64).reshape(self.rows, self.cols)
                b = np.array(other.to_rows(), dtype=np.int64).reshape(other.rows, other.cols)
                c = a @ b
                dicts = []
                for i in range(self.rows):
                    nz = np.nonzero(c[i])[0]
                    dicts.append({int(j): int(c[i, j]) for j in nz})
                return IntMatrix(self.rows, other.cols, dicts)
        out = [dict() for _ in range(self.rows)]
        orows = other._rows
        for i, d in enumerate(self._rows):
            acc = out[i]
            for j, v in d.items():
                for k, w in orows[j].items():
                    nv = acc.get(k, 0) + v * w
                    if nv:
                        acc[k] = nv
                    else:
                        del acc[k]
        return IntMatrix(self.rows, other.cols, out)

    def __matmul__(self, other):
        return self.mul(other)

    def add(self, other: "IntMatrix") -> "IntMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise InvalidInputError("shape mismatch in matrix sum")
        out = []
        for d1, d2 in zip(self._rows, other._rows):
            d = dict(d1)
            for j, v in d2.items():
                nv = d.get(j, 0) + v
                if nv:
                    d[j] = nv
                else:
                    d.pop(j, None)
            out.append(d)
        return IntMatrix(self.rows, self.cols, out)

    def neg(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [{j: -v for j, v in d.items()} for d in self._rows])

    def scalar_mul(self, c: int) -> "IntMatrix":
        if c == 0:
            return IntMatrix.zeros(self.rows, self.cols)
        return IntMatrix(self.rows, self.cols, [{j: c * v for j, v in d.items()} for d in self._rows])

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise InvalidInputError("row mismatch in hstack")
        off = self.cols
        dicts = []
        for d1, d2 in zip(self._rows, other._rows):
            d = dict(d1)
            for j, v in d2.items():
                d[j + off] = v
            dicts.append(d)
        return IntMatrix(self.rows, self.cols + other.cols, dicts)

    def vstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.cols:
            raise InvalidInputError("col mismatch in vstack")
        return IntMatrix(self.rows + other.rows, self.cols, list(self._rows) + list(other._rows))

    def submatrix_cols(self, js) -> "IntMatrix":
        js = list(js)
        pos = {j: k for k, j in enumerate(js)}
        dicts = []
        for d in self._rows:
            nd = {}
            for j, v in d.items():
                k = pos.get(j)
                if k is not None:
                    nd[k] = v
            dicts.append(nd)
        return IntMatrix(self.rows, len(js), dicts)

    def column(self, j: int) -> list[int]:
        return [d.get(j, 0) for d in self._rows]

    def apply(self, vec) -> list[int]:
        """Matrix times column vector."""
        vec = list(vec)
        if len(vec) != self.cols:
            raise InvalidInputError("vector length mismatch")
        out = []
        for d in self._rows:
            s = 0
            for j, v in d.items():
                x = vec[j]
                if x:
                    s += v * x
            out.append(s)
        return out


# --------------------------------------------------------------------------
# Dense exact SNF (diagonal only), list-of-lists over python ints.
# Used for small matrices and as the final stage of the sparse engine.
# --------------------------------------------------------------------------


def _dense_snf_diag_obj(a: list[list[int]]) -> list[int]:
    nr = len(a)
    nc = len(a[0]) if nr else 0
    out = []
    top = 0
    while top < nr and top < nc:
        best = None
        for i in range(top, nr):
            ai = a[i]
            for j in range(top, nc):
                v = ai[j]
                if v:
                    av = abs(v)
                    if best is None or av < best[0]:
                        best = (av, i, j)
                        if av == 1:
                            break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        a[top], a[pi] = a[pi], a[top]
        if pj != top:
            for row in a:
                row[top], row[pj] = row[pj], row[top]
        while True:
            p = a[top][top]
            if p < 0:
                a[top] = [-x for x in a[top]]
                p = -p
            dirty = False
            for i in range(top + 1, nr):
                x = a[i][top]
                if x:
                    q = (x + (p >> 1)) // p  # balanced remainder keeps growth down
                    if q:
                        at = a[top]
                        a[i] = [y - q * z for y, z in zip(a[i], at)]
                    if a[i][top]:
                        a[top], a[i] = a[i], a[top]
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(top + 1, nc):
                x = a[top][j]
                if x:
                    q = (x + (p >> 1)) // p
                    if q:
                        for row in a:
                            if row[top]:
                                row[j] -= q * row[top]
                    if a[top][j]:
                        for row in a:
                            row[top], row[j] = row[j], row[top]
                        dirty = True
                        break
            if not dirty:
                break
        out.append(abs(a[top][top]))
        top += 1
    return _fix_divisibility(out)


def _fix_divisibility(diag: list[int]) -> list[int]:
    out = [x for x in diag if x]
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            if out[j] % out[i]:
                g = math.gcd(out[i], out[j])
                out[j] = out[i] // g * out[j]
                out[i] = g
    out.sort()
    return out


# --------------------------------------------------------------------------
# Sparse invariant-factor engine.
#
# Three phases: (1) Markowitz elimination of unit pivots on dict-of-rows,
# restricted to thin rows with an escalating cap; (2) densify the survivors
# and clear remaining unit pivots with vectorized Schur updates; (3) exact
# column echelon plus dense SNF on the tiny residue. Unit-pivot elimination
# is unimodular and contributes invariant factor 1 exactly, so only the
# residue needs general SNF.
# --------------------------------------------------------------------------

_THIN_TARGET = 320
_THIN_ROWCAP = 110
_THIN_CAPMAX = 4096


def _thin_unit_phase(rows: dict, cols: dict, target_rows=_THIN_TARGET, rowcap=_THIN_ROWCAP):
    colrows = {c: list(s) for c, s in cols.items()}
    units = 0
    push = heapq.heappush
    pop = heapq.heappop
    while True:
        heap = []
        for r, d in rows.items():
            ln = len(d)
            if ln > rowcap:
                continue
            for c, v in d.items():
                if v in (1, -1):
                    heap.append(((ln - 1) * (len(colrows[c]) - 1), r, c))
        heapq.heapify(heap)
        while heap and len(rows) > target_rows:
            score, r, c = pop(heap)
            d = rows.get(r)
            if d is None:
                continue
            v = d.get(c)
            if v not in (1, -1):
                continue
            ln = len(d)
            if ln > rowcap:
                continue
            # colrows lists are lazy: stale entries are filtered on use, so
            # the Markowitz score is a cheap upper estimate.
            cur = (ln - 1) * (len(colrows.get(c, ())) - 1)
            if cur > score + 16:
                push(heap, (cur, r, c))
                continue
            units += 1
            prow = rows.pop(r)
            del prow[c]
            items = list(prow.items())
            for r2 in colrows.pop(c, ()):
                d2 = rows.get(r2)
                if d2 is None:
                    continue
                f = d2.pop(c, 0)
                if not f:
                    continue
                mult = -f * v
                for cc, vv in items:
                    nv = d2.get(cc, 0) + mult * vv
                    if nv:
                        if cc not in d2:
                            colrows[cc].append(r2)
                        d2[cc] = nv
                        if nv in (1, -1) and len(d2) <= rowcap:
                            push(heap, ((len(d2) - 1) * (len(colrows[cc]) - 1), r2, cc))
                    else:
                        del d2[cc]
                if not d2:
                    rows.pop(r2)
        if len(rows) <= target_rows or rowcap >= _THIN_CAPMAX:
            break
        rowcap *= 2
    live = {r: d for r, d in rows.items() if d}
    return units, live


def _dedup_columns(live: dict, dtype):
    """Dense array of the surviving rows with sign-duplicate columns merged."""
    rlist = sorted(live)
    rpos = {r: i for i, r in enumerate(rlist)}
    colsdict: dict = {}
    for r, d in live.items():
        i = rpos[r]
        for c, v in d.items():
            colsdict.setdefault(c, []).append((i, v))
    seen = set()
    keys = []
    for c, pairs in colsdict.items():
        pairs.sort()
        sgn = 1 if pairs[0][1] > 0 else -1
        key = tuple((i, sgn * v) for i, v in pairs)
        if key not in seen:
            seen.add(key)
            keys.append(key)
    a = np.zeros((len(rlist), len(keys)), dtype=dtype)
    for j, key in enumerate(keys):
        for i, v in key:
            a[i, j] = v
    return a


def _dense_unit_phase(a, monitor_overflow: bool):
    units = 0
    progress = True
    while progress:
        progress = False
        order = np.argsort((a != 0).sum(axis=1))
        for r in order:
            row = a[r]
            cand = np.flatnonzero((row == 1) | (row == -1))
            if len(cand) == 0:
                continue
            colnnz = (a[:, cand] != 0).sum(axis=0)
            c = int(cand[int(np.argmin(colnnz))])
            v = int(a[r, c])
            hit = np.flatnonzero(a[:, c])
            hit = hit[hit != r]
            if len(hit):
                f = (a[hit, c] * v)[:, None]
                a[hit, :] -= f * row[None, :]
                if monitor_overflow and int(np.abs(a[hit, :]).max()) > _INT64_SAFE:
                    raise OverflowError("int64 safety cap exceeded")
            a[r, :] = 0
            a[:, c] = 0
            units += 1
            progress = True
    res = a[(a != 0).any(axis=1)][:, (a != 0).any(axis=0)]
    return units, res


def _tail_echelon_snf(res) -> list[int]:
    if res.size == 0:
        return []
    m = res.shape[0]
    basis: dict[int, np.ndarray] = {}
    for j in range(res.shape[1]):
        vec = res[:, j].astype(object)
        i = 0
        while i < m:
            x = vec[i]
            if x == 0:
                i += 1
                continue
            b = basis.get(i)
            if b is None:
                basis[i] = vec if x > 0 else -vec
                break
            p = b[i]
            while x:
                q = (x + (p >> 1)) // p  # p kept positive
                vec = vec - q * b
                x = vec[i]
                if x:
                    b, vec = (vec if x > 0 else -vec), b
                    basis[i] = b
                    p = b[i]
                    x = vec[i]
            i += 1
    if not basis:
        return []
    comp = [[int(basis[k][i]) for k in sorted(basis)] for i in range(m)]
    return _dense_snf_diag_obj(comp)


def snf_diagonal(a: IntMatrix) -> tuple[int, ...]:
    """Nonzero invariant factors of a, smallest first. len() is the rank.

    Cached per matrix object; the shared bar-differential cache makes
    repeated homology queries hit this cache.
    """
    if a._snf_diag_cache is not None:
        return a._snf_diag_cache
    if a.rows * a.cols <= 40000 or a.nnz() <= 1200:
        diag = tuple(_dense_snf_diag_obj(a.to_rows()))
        a._snf_diag_cache = diag
        return diag
    rows = {i: dict(d) for i, d in enumerate(a._rows) if d}
    cols: dict = {}
    for i, d in rows.items():
        for j in d:
            cols.setdefault(j, []).append(i)
    units, live = _thin_unit_phase(rows, cols)
    if not live:
        diag = tuple([1] * units)
        a._snf_diag_cache = diag
        return diag
    maxabs = max(max(abs(v) for v in d.values()) for d in live.values())
    try:
        if maxabs > _INT64_SAFE:
            raise OverflowError
        dense = _dedup_columns(live, np.int64)
        u2, res = _dense_unit_phase(dense, monitor_overflow=True)
    except OverflowError:
        dense = _dedup_columns(live, object)
        u2, res = _dense_unit_phase(dense, monitor_overflow=False)
    tail = _tail_echelon_snf(res)
    diag = tuple([1] * (units + u2) + tail)
    a._snf_diag_cache = diag
    return diag


def rank(a: IntMatrix) -> int:
    return len(snf_diagonal(a))


# --------------------------------------------------------------------------
# Full SNF with unimodular transforms (dense, exact). For the sizes where
# kernel bases and induced maps are required.
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SmithForm:
    """U @ A @ V = diagonal(d padded with zeros); U, V unimodular."""

    d: tuple[int, ...]
    U: IntMatrix
    V: IntMatrix
    Uinv: IntMatrix
    Vinv: IntMatrix
    shape: tuple[int, int]

    def diagonal_matrix(self) -> IntMatrix:
        return IntMatrix.diagonal(self.shape[0], self.shape[1], self.d)


def snf(a: IntMatrix) -> SmithForm:
    nr, nc = a.rows, a.cols
    m = a.to_rows()
    u = [[1 if i == j else 0 for j in range(nr)] for i in range(nr)]
    uinv = [[1 if i == j else 0 for j in range(nr)] for i in range(nr)]
    v = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]
    vinv = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]

    def row_axpy(i, k, q):
        # r_i -= q * r_k; U on the left, Uinv undoes it on the right.
        m[i] = [x - q * y for x, y in zip(m[i], m[k])]
        u[i] = [x - q * y for x, y in zip(u[i], u[k])]
        for row in uinv:
            row[k] += q * row[i]

    def row_swap(i, k):
        m[i], m[k] = m[k], m[i]
        u[i], u[k] = u[k], u[i]
        for row in uinv:
            row[i], row[k] = row[k], row[i]

    def row_neg(i):
        m[i] = [-x for x in m[i]]
        u[i] = [-x for x in u[i]]
        for row in uinv:
            row[i] = -row[i]

    def col_axpy(j, k, q):
        # c_j -= q * c_k; V on the right, Vinv undoes it on the left.
        for row in m:
            row[j] -= q * row[k]
        for row in v:
            row[j] -= q * row[k]
        vinv[k] = [x + q * y for x, y in zip(vinv[k], vinv[j])]

    def col_swap(j, k):
        for row in m:
            row[j], row[k] = row[k], row[j]
        for row in v:
            row[j], row[k] = row[k], row[j]
        vinv[j], vinv[k] = vinv[k], vinv[j]

    def col_neg(j):
        for row in m:
            row[j] = -row[j]
        for row in v:
            row[j] = -row[j]
        vinv[j] = [-x for x in vinv[j]]

    top = 0
    limit = min(nr, nc)
    while top < limit:
        best = None
        for i in range(top, nr):
            mi = m[i]
            for j in range(top, nc):
                x = mi[j]
                if x:
                    ax = abs(x)
                    if best is None or ax < best[0]:
                        best = (ax, i, j)
                        if ax == 1:
                            break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        if pi != top:
            row_swap(top, pi)
        if pj != top:
            col_swap(top, pj)
        while True:
            p = m[top][top]
            if p < 0:
                row_neg(top)
                p = -p
            dirty = False
            for i in range(top + 1, nr):
                x = m[i][top]
                if x:
                    q = (x + (p >> 1)) // p
                    if q:
                        row_axpy(i, top, q)
                    if m[i][top]:
                        row_swap(top, i)
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(top + 1, nc):
                x = m[top][j]
                if x:
                    q = (x + (p >> 1)) // p
                    if q:
                        col_axpy(j, top, q)
                    if m[top][j]:
                        col_swap(top, j)
                        dirty = True
                        break
            if not dirty:
                break
        top += 1

    # enforce the divisibility chain: fold offending pairs and re-clear
    changed = True
    while changed:
        changed = False
        diag = [m[i][i] for i in range(min(nr, nc))]
        k = len([x for x in diag if x])
        for i in range(k):
            for j in range(i + 1, k):
                if diag[j] % diag[i]:
                    col_axpy(i, j, -1)  # c_i += c_j brings m[j][j] into column i
                    # re-eliminate the 2x2 block at (i, j)
                    while True:
                        p = m[i][i]
                        if p < 0:
                            row_neg(i)
                            p = -p
                        x = m[j][i]
                        if x:
                            q = (x + (p >> 1)) // p
                            if q:
                                row_axpy(j, i, q)
                            if m[j][i]:
                                row_swap(i, j)
                                continue
                        y = m[i][j]
                        if y:
                            q = (y + (p >> 1)) // p
                            if q:
                                col_axpy(j, i, q)
                            if m[i][j]:
                                col_swap(i, j)
                                continue
                        break
                    if m[j][j] < 0:
                        row_neg(j)
                    changed = True
        if changed:
            continue
    diag = [m[i][i] for i in range(min(nr, nc))]
    for i in range(len(diag)):
        if diag[i] < 0:
            row_neg(i)
            diag[i] = -diag[i]
    d = tuple(x for x in diag if x)
    return SmithForm(
        d=d,
        U=IntMatrix.from_rows(u),
        V=IntMatrix.from_rows(v),
        Uinv=IntMatrix.from_rows(uinv),
        Vinv=IntMatrix.from_rows(vinv),
        shape=(nr, nc),
    )


def hnf(a: IntMatrix) -> IntMatrix:
    """Column-style Hermite normal form; same column span over Z.

    Column echelon with positive pivots in strictly increasing pivot rows,
    entries left of each pivot reduced into [0, pivot); zero columns trail.
    """
    nr, nc = a.rows, a.cols
    cols = [a.column(j) for j in range(nc)]
    out_cols = []
    pivot = 0
    used = [False] * nc
    for i in range(nr):
        # euclid all unused columns against each other at row i
        while True:
            live = [j for j in range(nc) if not used[j] and cols[j][i]]
            if len(live) <= 1:
                break
            live.sort(key=lambda j: abs(cols[j][i]))
            jp = live[0]
            p = cols[jp][i]
            for j in live[1:]:
                q = cols[j][i] // p
                if q:
                    cols[j] = [x - q * y for x, y in zip(cols[j], cols[jp])]
        live = [j for j in range(nc) if not used[j] and cols[j][i]]
        if not live:
            continue
        jp = live[0]
        if cols[jp][i] < 0:
            cols[jp] = [-x for x in cols[jp]]
        p = cols[jp][i]
        # reduce previously placed columns at this row into [0, p)
        for col in out_cols:
            q = col[i] // p
            if q:
                for k in range(nr):
                    col[k] -= q * cols[jp][k]
        out_cols.append(cols[jp])
        used[jp] = True
        pivot += 1
    while len(out_cols) < nc:
        out_cols.append([0] * nr)
    dicts = [dict() for _ in range(nr)]
    for j, col in enumerate(out_cols):
        for i, x in enumerate(col):
            if x:
                dicts[i][j] = x
    return IntMatrix(nr, nc, dicts)


def in_column_span(a: IntMatrix, vec) -> bool:
    """Whether vec lies in the Z-span of a's columns."""
    h = hnf(a)
    v = list(vec)
    for j in range(h.cols):
        col = h.column(j)
        i = next((k for k, x in enumerate(col) if x), None)
        if i is None:
            break
        if v[i] % col[i]:
            return False
        q = v[i] // col[i]
        if q:
            v = [x - q * y for x, y in zip(v, col)]
    return all(x == 0 for x in v)


def kernel_basis(a: IntMatrix) -> IntMatrix:
    """Columns form a basis of the integer kernel of a."""
    s = snf(a)
    r = len(s.d)
    keep = list(range(r, a.cols))
    return s.V.submatrix_cols(keep)


def column_echelon_basis(a: IntMatrix) -> IntMatrix:
    """At most min(rows, cols) columns spanning the same column lattice.

    Column operations only (right-unimodular), so cokernels and any row-side
    data are unaffected. Sparse insertion echelon; wide sparse inputs shrink
    to a pivot-per-row basis before any dense work downstream.
    """
    coldicts: list[dict[int, int]] = [dict() for _ in range(a.cols)]
    for i in range(a.rows):
        for j, v in a.row_dict(i).items():
            coldicts[j][i] = v
    basis: dict[int, dict[int, int]] = {}
    for vec in coldicts:
        while vec:
            i = min(vec)
            b = basis.get(i)
            if b is None:
                if vec[i] < 0:
                    vec = {k: -v for k, v in vec.items()}
                basis[i] = vec
                break
            p = b[i]  # kept positive
            v = vec[i]
            q = (v + (p >> 1)) // p
            if q:
                for k, u in b.items():
                    nv = vec.get(k, 0) - q * u
                    if nv:
                        vec[k] = nv
                    else:
                        vec.pop(k, None)
                v = vec.get(i, 0)
            if v:
                # balanced remainder beats the pivot; swap and keep reducing
                basis[i] = {k: -t for k, t in vec.items()} if v < 0 else vec
                vec = b
    dicts: list[dict[int, int]] = [dict() for _ in range(a.rows)]
    for j, i in enumerate(sorted(basis)):
        for k, v in basis[i].items():
            dicts[k][j] = v
    return IntMatrix(a.rows, len(basis), dicts)


def solve_columns(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    """Exact X with a @ X = b; raises if no integer solution exists."""
    s = snf(a)
    r = len(s.d)
    ub = s.U.mul(b)
    xdicts = [dict() for _ in range(a.cols)]
    for i in range(ub.rows):
        for j, v in ub.row_dict(i).items():
            if i < r:
                if v % s.d[i]:
                    raise InvalidInputError("no integral solution")
                w = v // s.d[i]
                if w:
                    xdicts[i][j] = w
            elif v:
                raise InvalidInputError("no integral solution")
    y = IntMatrix(a.cols, b.cols, xdicts)
    return s.V.mul(y)


def det(a: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if a.rows != a.cols:
        raise InvalidInputError("determinant of non-square matrix")
    n = a.rows
    if n == 0:
        return 1
    m = a.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


# --------------------------------------------------------------------------
# Finitely generated abelian groups in canonical invariant-factor form.
# --------------------------------------------------------------------------


def _factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _canonical_torsion(factors) -> tuple[int, ...]:
    """Fold arbitrary cyclic orders into an invariant-factor chain."""
    primary: dict[int, list[int]] = {}
    for f in factors:
        f = int(f)
        if f < 0:
            f = -f
        if f in (0, 1):
            continue
        for p, e in _factorize(f).items():
            primary.setdefault(p, []).append(e)
    for p in primary:
        primary[p].sort(reverse=True)
    depth = max((len(v) for v in primary.values()), default=0)
    chain = []
    for k in range(depth):
        d = 1
        for p, exps in primary.items():
            if k < len(exps):
                d *= p ** exps[k]
        chain.append(d)
    chain.reverse()
    return tuple(chain)


@dataclass(frozen=True)
class FgAbGroup:
    """Canonical form: two groups are isomorphic iff they are equal."""

    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise InvalidInputError("negative free rank")
        t = tuple(int(x) for x in self.torsion)
        object.__setattr__(self, "torsion", t)
        for x in t:
            if x < 2:
                raise InvalidInputError("torsion factors must be >= 2")
        for x, y in zip(t, t[1:]):
            if y % x:
                raise InvalidInputError("torsion factors must form a divisibility chain")

    @classmethod
    def make(cls, free_rank: int = 0, factors=()) -> "FgAbGroup":
        return cls(free_rank, _canonical_torsion(factors))

    @classmethod
    def zero(cls) -> "FgAbGroup":
        return cls(0, ())

    @classmethod
    def cyclic(cls, n: int) -> "FgAbGroup":
        if n == 0:
            return cls(1, ())
        return cls.make(0, [abs(n)])

    @classmethod
    def free(cls, r: int) -> "FgAbGroup":
        return cls(r, ())

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def order(self):
        """Group order, or None for infinite."""
        if self.free_rank:
            return None
        return math.prod(self.torsion) if self.torsion else 1

    def exponent(self):
        if self.free_rank:
            return None
        return self.torsion[-1] if self.torsion else 1

    def direct_sum(self, other: "FgAbGroup") -> "FgAbGroup":
        return FgAbGroup.make(self.free_rank + other.free_rank, self.torsion + other.torsion)

    def tensor_zmod(self, n: int) -> "FgAbGroup":
        """A (x) Z/n: the mod-n quotient."""
        if n <= 0:
            raise InvalidInputError("modulus must be positive")
        facs = [n] * self.free_rank + [math.gcd(d, n) for d in self.torsion]
        return FgAbGroup.make(0, facs)

    def n_torsion(self, n: int) -> "FgAbGroup":
        """A[n]: elements killed by n."""
        if n <= 0:
            raise InvalidInputError("n must be positive")
        return FgAbGroup.make(0, [math.gcd(d, n) for d in self.torsion])

    def hom_count_to_cyclic(self, n: int) -> int:
        """|Hom(A, Z/n)|."""
        out = n ** self.free_rank
        for d in self.torsion:
            out *= math.gcd(d, n)
        return out

    def generator_orders(self) -> tuple[int, ...]:
        """Canonical generator orders, torsion first, 0 marking free generators."""
        return self.torsion + (0,) * self.free_rank

    def ngens(self) -> int:
        return len(self.torsion) + self.free_rank

    def __str__(self):
        parts = [f"Z/{d}" for d in self.torsion]
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        return " + ".join(parts) if parts else "0"


def iso_test(g: FgAbGroup, h: FgAbGroup) -> bool:
    """Canonical forms make isomorphism literal field equality."""
    return g.free_rank == h.free_rank and g.torsion == h.torsion


def cokernel_presentation(a: IntMatrix) -> FgAbGroup:
    """Z^rows / (column span of a), canonical."""
    diag = snf_diagonal(a)
    free = a.rows - len(diag)
    return FgAbGroup.make(free, [d for d in diag if d > 1])


@dataclass(frozen=True)
class ProfiniteFgAb:
    """Profinite completion data: torsion survives, free rank becomes Zhat-rank."""

    zhat_rank: int = 0
    torsion: tuple[int, ...] = ()

    def direct_sum(self, other: "ProfiniteFgAb") -> "ProfiniteFgAb":
        return ProfiniteFgAb(
            self.zhat_rank + other.zhat_rank,
            _canonical_torsion(self.torsion + other.torsion),
        )

    def __str__(self):
        parts = [f"Z/{d}" for d in self.torsion]
        if self.zhat_rank == 1:
            parts.append("Zhat")
        elif self.zhat_rank > 1:
            parts.append(f"Zhat^{self.zhat_rank}")
        return " + ".join(parts) if parts else "0"


def profinite_complete(g: FgAbGroup) -> ProfiniteFgAb:
    return ProfiniteFgAb(zhat_rank=g.free_rank, torsion=g.torsion)


# --------------------------------------------------------------------------
# Homomorphisms between canonical groups.
# --------------------------------------------------------------------------


@dataclass
class AbHom:
    """Map of canonical groups; matrix columns act on source generators.

    Generator convention follows FgAbGroup.generator_orders: torsion
    generators first, then free generators.
    """

    source: FgAbGroup
    target: FgAbGroup
    matrix: IntMatrix

    def __post_init__(self):
        if self.matrix.rows != self.target.ngens() or self.matrix.cols != self.source.ngens():
            raise InvalidInputError("hom matrix shape does not match generator counts")

    def validate(self) -> None:
        """Check the matrix kills source relations."""
        src = self.source.generator_orders()
        tgt = self.target.generator_orders()
        for j, oj in enumerate(src):
            if oj == 0:
                continue
            for i, oi in enumerate(tgt):
                v = oj * self.matrix.entry(i, j)
                if oi == 0:
                    if v != 0:
                        raise InvalidInputError(f"relation violated at generator {j}, coordinate {i}")
                elif v % oi:
                    raise InvalidInputError(f"relation violated at generator {j}, coordinate {i}")

    def normalized(self) -> "AbHom":
        tgt = self.target.generator_orders()
        dicts = []
        for i in range(self.matrix.rows):
            o = tgt[i]
            d = {}
            for j, v in self.matrix.row_dict(i).items():
                w = v % o if o else v
                if w:
                    d[j] = w
            dicts.append(d)
        return AbHom(self.source, self.target, IntMatrix(self.matrix.rows, self.matrix.cols, dicts))

    def equal(self, other: "AbHom") -> bool:
        return (
            self.source == other.source
            and self.target == other.target
            and self.normalized().matrix == other.normalized().matrix
        )

    def compose(self, first: "AbHom") -> "AbHom":
        """self o first."""
        if first.target != self.source:
            raise InvalidInputError("composition mismatch")
        return AbHom(first.source, self.target, self.matrix.mul(first.matrix)).normalized()

    def apply(self, coords) -> list[int]:
        out = self.matrix.apply(coords)
        tgt = self.target.generator_orders()
        return [v % o if o else v for v, o in zip(out, tgt)]

    def scalar(self, c: int) -> "AbHom":
        return AbHom(self.source, self.target, self.matrix.scalar_mul(c)).normalized()

    @classmethod
    def identity(cls, g: FgAbGroup) -> "AbHom":
        return cls(g, g, IntMatrix.identity(g.ngens()))

    @classmethod
    def zero(cls, source: FgAbGroup, target: FgAbGroup) -> "AbHom":
        return cls(source, target, IntMatrix.zeros(target.ngens(), source.ngens()))

    @classmethod
    def multiplication_by(cls, g: FgAbGroup, c: int) -> "AbHom":
        return cls.identity(g).scalar(c)

    def is_surjective(self) -> bool:
        rel = [o for o in self.target.generator_orders() if o]
        relm = IntMatrix.diagonal(self.target.ngens(), len(rel), rel)
        return cokernel_presentation(self.matrix.hstack(relm)).is_trivial()

    def is_iso(self) -> bool:
        # a surjection between isomorphic fg abelian groups is an isomorphism
        return iso_test(self.source, self.target) and self.is_surjective()
