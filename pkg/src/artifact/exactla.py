"""Sparse exact linear algebra over the rationals.

Every homology computation in this package reduces to rank arithmetic
over Q.  This module provides:

* ``Mat`` -- a sparse matrix stored column-major as ``{row: value}``
  dicts.  Entries are python ints or ``fractions.Fraction``; the two mix
  freely and all arithmetic is exact.
* a rank engine tuned for the very sparse, permutation-like integer
  matrices that nerve and tensor-power bases produce (structural peeling
  of singleton rows/columns, then fraction-free elimination with
  sparsity-aware deterministic pivoting),
* ``Subspace`` -- canonical reduced-echelon subspaces with the sum /
  intersection / preimage / quotient operations homology needs,
* induced maps on quotients and subquotients (``restrict_to_quotient``),
* ``BlockBasis`` / ``BlockMap`` -- bookkeeping for operators on direct
  sums of labelled blocks, with a vectorised fast path when every block
  is one-dimensional with integer coefficients.

Canonical outputs (echelon bases, quotient representatives) pick pivots
smallest row index first, then smallest column index, so repeated runs
produce identical matrices.
"""

from __future__ import annotations

import heapq
from collections import deque
from fractions import Fraction
from math import gcd

import numpy as np

_COEFF_GUARD = 1 << 40  # beyond this, int64 block arithmetic falls back to exact python


class DimensionError(ValueError):
    """Shapes do not line up."""


class ContainmentError(ValueError):
    """A containment precondition (small inside big) failed."""


# ---------------------------------------------------------------------------
# sparse vectors: plain dicts {index: value}, zero entries never stored
# ---------------------------------------------------------------------------

def vec_axpy(target, coeff, source):
    """target += coeff * source, in place, dropping entries that cancel."""
    if not coeff:
        return target
    for i, v in source.items():
        w = target.get(i, 0) + coeff * v
        if w:
            target[i] = w
        else:
            target.pop(i, None)
    return target


def vec_scale(vec, coeff):
    if not coeff:
        return {}
    return {i: coeff * v for i, v in vec.items()}


def vec_dot(a, b):
    if len(a) > len(b):
        a, b = b, a
    return sum(v * b[i] for i, v in a.items() if i in b)


# ---------------------------------------------------------------------------
# Mat
# ---------------------------------------------------------------------------

class Mat:
    """Sparse matrix over Q, stored as one ``{row: value}`` dict per column."""

    __slots__ = ("rows", "cols", "_columns", "_rank")

    def __init__(self, rows, cols, columns=None):
        if rows < 0 or cols < 0:
            raise DimensionError("negative matrix dimensions")
        self.rows = rows
        self.cols = cols
        self._columns = [{} for _ in range(cols)] if columns is None else columns
        self._rank = None

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, rows, cols):
        return cls(rows, cols)

    @classmethod
    def identity(cls, n):
        return cls(n, n, [{i: 1} for i in range(n)])

    @classmethod
    def from_entries(cls, rows, cols, entries):
        """Build from an iterable of (row, col, value); duplicates accumulate."""
        m = cls(rows, cols)
        cs = m._columns
        for r, c, v in entries:
            if not v:
                continue
            if not (0 <= r < rows and 0 <= c < cols):
                raise DimensionError(f"entry ({r},{c}) outside {rows}x{cols}")
            col = cs[c]
            w = col.get(r, 0) + v
            if w:
                col[r] = w
            else:
                del col[r]
        return m

    @classmethod
    def from_dense(cls, rows_of_values):
        rows = len(rows_of_values)
        cols = len(rows_of_values[0]) if rows else 0
        m = cls(rows, cols)
        for r, row in enumerate(rows_of_values):
            if len(row) != cols:
                raise DimensionError("ragged dense matrix")
            for c, v in enumerate(row):
                if v:
                    m._columns[c][r] = v
        return m

    @classmethod
    def from_columns(cls, rows, columns):
        cols = [dict(c) for c in columns]
        for c in cols:
            for r in c:
                if not 0 <= r < rows:
                    raise DimensionError("column entry out of range")
        return cls(rows, len(cols), cols)

    # -- basic access ---------------------------------------------------

    def entry(self, r, c):
        return self._columns[c].get(r, 0)

    def column(self, c):
        """The c-th column as a dict (do not mutate)."""
        return self._columns[c]

    def nnz(self):
        return sum(len(c) for c in self._columns)

    def is_zero(self):
        return all(not c for c in self._columns)

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and \
            self._columns == other._columns

    __hash__ = None  # mutable

    def __repr__(self):
        return f"Mat({self.rows}x{self.cols}, nnz={self.nnz()})"

    def to_dense(self):
        out = [[0] * self.cols for _ in range(self.rows)]
        for c, col in enumerate(self._columns):
            for r, v in col.items():
                out[r][c] = v
        return out

    # -- arithmetic -----------------------------------------------------

    def __matmul__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionError(f"cannot compose {self.rows}x{self.cols} with "
                                 f"{other.rows}x{other.cols}")
        out = Mat(self.rows, other.cols)
        mine = self._columns
        for j, col in enumerate(other._columns):
            acc = out._columns[j]
            for k, v in col.items():
                vec_axpy(acc, v, mine[k])
        return out

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionError("matrix sum shape mismatch")
        out = Mat(self.rows, self.cols, [dict(c) for c in self._columns])
        for j, col in enumerate(other._columns):
            vec_axpy(out._columns[j], 1, col)
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, coeff):
        if not coeff:
            return Mat(self.rows, self.cols)
        return Mat(self.rows, self.cols,
                   [{r: coeff * v for r, v in c.items()} for c in self._columns])

    def transpose(self):
        out = Mat(self.cols, self.rows)
        for c, col in enumerate(self._columns):
            for r, v in col.items():
                out._columns[r][c] = v
        return out

    def apply(self, vec):
        """Image of a sparse column vector (dict) under this matrix."""
        out = {}
        for i, v in vec.items():
            if i >= self.cols:
                raise DimensionError("vector longer than column count")
            vec_axpy(out, v, self._columns[i])
        return out

    def hstack(self, other):
        if self.rows != other.rows:
            raise DimensionError("hstack needs equal row counts")
        return Mat(self.rows, self.cols + other.cols,
                   [dict(c) for c in self._columns] + [dict(c) for c in other._columns])

    # -- rank / kernel / image -------------------------------------------

    def rank(self):
        if self._rank is None:
            self._rank = rank_of_columns(self._columns)
        return self._rank

    def kernel(self):
        """Canonical-basis subspace of solutions of M x = 0."""
        _, _, _, nullcombos = _column_echelon(self._columns, track=True)
        return Subspace.span(self.cols, nullcombos)

    def image(self):
        return Subspace.span(self.rows, self._columns)

    def solver(self):
        return EchelonSolver(self._columns)


def compose(a, b):
    """Matrix product a @ b (apply b first)."""
    return a @ b


def rank(m):
    return m.rank()


def kernel(m):
    return m.kernel()


def image(m):
    return m.image()


def inverse(m):
    """The inverse of a square invertible matrix."""
    if m.rows != m.cols:
        raise DimensionError("only square matrices can be inverted")
    sol = m.solver()
    cols = []
    for i in range(m.rows):
        c = sol.solve({i: 1})
        if c is None:
            raise ValueError("matrix is singular")
        cols.append(c)
    return Mat.from_columns(m.rows, cols)


def random_invertible(rng, n, span=3):
    """A random invertible n x n matrix with small rational entries."""
    if n == 0:
        return Mat.zero(0, 0)
    while True:
        rows = [[Fraction(rng.randint(-span, span), rng.choice((1, 1, 2)))
                 for _ in range(n)] for _ in range(n)]
        m = Mat.from_dense(rows)
        if m.rank() == n:
            return m


# ---------------------------------------------------------------------------
# rank engine (exact, integer, sparsity-aware)
# ---------------------------------------------------------------------------

def _integerize_column(col):
    den = 1
    for v in col.values():
        if isinstance(v, Fraction) and v.denominator != 1:
            den = den * v.denominator // gcd(den, v.denominator)
    if den == 1:
        return {r: int(v) for r, v in col.items()}
    return {r: int(v * den) for r, v in col.items()}


def rank_of_columns(columns):
    """Exact rank of the span of sparse columns (dicts of int/Fraction)."""
    cols = [_integerize_column(c) for c in columns if c]
    if sum(len(c) for c in cols) > _BIG_RANK_NNZ:
        return _rl_rank_from_dicts(cols)
    return _int_rank(cols)


def _int_rank(cols, rows_out=None):
    """Rank of integer column dicts.  Mutates (and consumes) its input.

    Strategy: repeatedly peel singleton rows and columns (no arithmetic,
    covers most pivots of permutation-like matrices), then eliminate with
    an approximate-Markowitz pivot: among a few sparsest candidate
    columns pick (cost, non-unit, col, row)-minimal, so runs are
    deterministic.  Rows are combined fraction-free with gcd reduction.

    When ``rows_out`` is a list, the pivot row of every elimination step
    is appended to it; those rows index an invertible square submatrix.
    """
    rank = 0
    row_cols = {}
    for ci, col in enumerate(cols):
        for r in col:
            row_cols.setdefault(r, set()).add(ci)

    peel = deque()
    for ci, col in enumerate(cols):
        if len(col) == 1:
            peel.append((0, ci))
    for r, s in row_cols.items():
        if len(s) == 1:
            peel.append((1, r))

    heap = [(len(col), ci) for ci, col in enumerate(cols) if col]
    heapq.heapify(heap)

    def retire_column(ci):
        # drop column ci: its rows lose one incidence
        for r in cols[ci]:
            s = row_cols.get(r)
            if s is None:
                continue
            s.discard(ci)
            if len(s) == 1:
                peel.append((1, r))
            elif not s:
                del row_cols[r]
        cols[ci] = {}

    def retire_row(r):
        # strip row r out of every remaining column
        for ci in row_cols.pop(r, ()):
            col = cols[ci]
            if r in col:
                del col[r]
                if len(col) == 1:
                    peel.append((0, ci))
                elif col:
                    heapq.heappush(heap, (len(col), ci))

    while True:
        while peel:
            kind, x = peel.popleft()
            if kind == 0:
                ci = x
                col = cols[ci]
                if len(col) != 1:
                    continue
                (r,) = col
                rank += 1
                if rows_out is not None:
                    rows_out.append(r)
                s = row_cols.get(r)
                if s is not None:
                    s.discard(ci)
                cols[ci] = {}
                retire_row(r)
            else:
                r = x
                s = row_cols.get(r)
                if s is None or len(s) != 1:
                    continue
                (ci,) = s
                rank += 1
                if rows_out is not None:
                    rows_out.append(r)
                del row_cols[r]
                del cols[ci][r]
                retire_column(ci)

        # pick an elimination pivot among the sparsest live columns
        candidates = []
        while heap:
            nnz, ci = heapq.heappop(heap)
            col = cols[ci]
            if not col:
                continue
            if len(col) != nnz:
                heapq.heappush(heap, (len(col), ci))
                continue
            candidates.append((nnz, ci))
            if len(candidates) >= 8 or (heap and heap[0][0] > nnz):
                break
        if not candidates:
            break

        best = None
        for nnz, ci in candidates:
            for r in sorted(cols[ci]):
                v = cols[ci][r]
                cost = (nnz - 1) * (len(row_cols[r]) - 1)
                key = (cost, 0 if v in (1, -1) else 1, ci, r)
                if best is None or key < best[0]:
                    best = (key, ci, r)
        for nnz, ci in candidates:
            if ci != best[1] and cols[ci]:
                heapq.heappush(heap, (len(cols[ci]), ci))

        _, pc, pr = best
        pivcol = cols[pc]
        a = pivcol[pr]
        others = sorted(row_cols[pr] - {pc})
        for cj in others:
            col = cols[cj]
            b = col.pop(pr)
            if a == 1:
                fs, fp = 1, -b
            elif a == -1:
                fs, fp = 1, b
            else:
                g = gcd(a, b)
                fs, fp = a // g, -(b // g)
            if fs != 1:
                for r in col:
                    col[r] *= fs
            for r, v in pivcol.items():
                if r == pr:
                    continue
                w = col.get(r, 0) + fp * v
                if w:
                    if r not in col:
                        row_cols.setdefault(r, set()).add(cj)
                    col[r] = w
                else:
                    del col[r]
                    s = row_cols.get(r)
                    if s is not None:
                        s.discard(cj)
                        if len(s) == 1:
                            peel.append((1, r))
                        elif not s:
                            del row_cols[r]
            if fs != 1 and col:
                g = 0
                for v in col.values():
                    g = gcd(g, v)
                    if g == 1:
                        break
                if g > 1:
                    for r in col:
                        col[r] //= g
            if len(col) == 1:
                peel.append((0, cj))
            elif col:
                heapq.heappush(heap, (len(col), cj))
        rank += 1
        if rows_out is not None:
            rows_out.append(pr)
        del row_cols[pr]
        retire_column(pc)

    return rank


_BIG_RANK_NNZ = 150_000  # above this, rank switches to the array-backed engine


def _merge_sorted(ai, av, bi, bv):
    """Sum two row-sorted sparse columns given as (index, value) arrays."""
    mi = np.concatenate([ai, bi])
    mv = np.concatenate([av, bv])
    order = np.argsort(mi, kind="stable")
    mi = mi[order]
    mv = mv[order]
    first = np.empty(mi.size, dtype=bool)
    first[0] = True
    first[1:] = mi[1:] != mi[:-1]
    starts = np.flatnonzero(first)
    sums = np.add.reduceat(mv, starts)
    keep = sums != 0
    return mi[starts][keep], sums[keep]


def _in_sorted(x, table):
    """Boolean mask: which entries of x appear in the sorted array table."""
    if table.size == 0:
        return np.zeros(x.size, dtype=bool)
    p = np.searchsorted(table, x)
    p[p == table.size] = table.size - 1
    return table[p] == x


def _gcd_normalize(nv):
    """Divide a value array by its gcd; demote object arrays that fit int64."""
    if nv.dtype == object:
        g = 0
        for x in nv:
            g = gcd(g, int(x))
            if g == 1:
                break
        if g > 1:
            nv = nv // g
        if max(abs(int(x)) for x in nv) < 1 << 62:
            nv = nv.astype(np.int64)
    else:
        g = int(np.gcd.reduce(np.abs(nv)))
        if g > 1:
            nv //= g
    return nv


def _rl_rank(cols_idx, cols_val, nrows, rows_out=None):
    """Right-looking Markowitz rank on numpy column arrays.

    Same elimination strategy as _int_rank (peel singleton rows and
    columns, then pivot at an approximately Markowitz-minimal entry),
    but columns live in row-sorted index/value array pairs, the live
    count per row in one vector, and row->columns incidence in lazily
    purged lists, so multi-million-entry eliminations stay within a few
    hundred megabytes.  Values are int64 with an overflow check that
    promotes a column to exact python integers when tripped.

    When ``rows_out`` is a list, the pivot row of every elimination step
    is appended to it; those rows index an invertible square submatrix.
    """
    idxs = list(cols_idx)
    vals = list(cols_val)
    rank = 0
    row_cnt = np.zeros(nrows, dtype=np.int64)
    row_cols = [[] for _ in range(nrows)]
    peel = deque()
    for ci, a in enumerate(idxs):
        if a is None or a.size == 0:
            idxs[ci] = None
            vals[ci] = None
            continue
        row_cnt[a] += 1
        for r in a.tolist():
            row_cols[r].append(ci)
        if a.size == 1:
            peel.append((0, ci))
    for r in np.flatnonzero(row_cnt == 1):
        peel.append((1, int(r)))
    heap = [(a.size, ci) for ci, a in enumerate(idxs)
            if a is not None and a.size > 1]
    heapq.heapify(heap)

    def live_cols_of_row(r):
        # drop stale and duplicate incidence entries while reading
        out = []
        seen = set()
        for ci in row_cols[r]:
            if ci in seen:
                continue
            a = idxs[ci]
            if a is None:
                continue
            p = int(np.searchsorted(a, r))
            if p < a.size and int(a[p]) == r:
                out.append(ci)
                seen.add(ci)
        row_cols[r] = out
        return out

    def retire_column(ci):
        # drop column ci: its rows lose one incidence
        a = idxs[ci]
        idxs[ci] = None
        vals[ci] = None
        row_cnt[a] -= 1
        for r in a[row_cnt[a] == 1]:
            peel.append((1, int(r)))

    def retire_row(r):
        # strip row r out of every remaining column
        for ci in live_cols_of_row(r):
            a = idxs[ci]
            p = int(np.searchsorted(a, r))
            a = np.delete(a, p)
            if a.size == 0:
                idxs[ci] = None
                vals[ci] = None
                continue
            idxs[ci] = a
            vals[ci] = np.delete(vals[ci], p)
            if a.size == 1:
                peel.append((0, ci))
            else:
                heapq.heappush(heap, (a.size, ci))
        row_cnt[r] = 0
        row_cols[r] = []

    while True:
        while peel:
            kind, x = peel.popleft()
            if kind == 0:
                ci = x
                a = idxs[ci]
                if a is None or a.size != 1:
                    continue
                r = int(a[0])
                rank += 1
                if rows_out is not None:
                    rows_out.append(r)
                idxs[ci] = None
                vals[ci] = None
                row_cnt[r] -= 1
                retire_row(r)
            else:
                r = x
                if row_cnt[r] != 1:
                    continue
                (ci,) = live_cols_of_row(r)
                rank += 1
                if rows_out is not None:
                    rows_out.append(r)
                a = idxs[ci]
                p = int(np.searchsorted(a, r))
                idxs[ci] = np.delete(a, p)
                vals[ci] = np.delete(vals[ci], p)
                row_cnt[r] = 0
                row_cols[r] = []
                if idxs[ci].size:
                    retire_column(ci)
                else:
                    idxs[ci] = None
                    vals[ci] = None

        # pick an elimination pivot among the sparsest live columns
        candidates = []
        while heap:
            nnz, ci = heapq.heappop(heap)
            a = idxs[ci]
            if a is None or a.size == 0:
                continue
            if a.size != nnz:
                heapq.heappush(heap, (a.size, ci))
                continue
            candidates.append((nnz, ci))
            if len(candidates) >= 8 or (heap and heap[0][0] > nnz):
                break
        if not candidates:
            break

        best = None
        for nnz, ci in candidates:
            a = idxs[ci]
            v = vals[ci]
            costs = (nnz - 1) * (row_cnt[a] - 1)
            for k in range(a.size):
                key = (int(costs[k]), 0 if v[k] in (1, -1) else 1,
                       ci, int(a[k]))
                if best is None or key < best[0]:
                    best = (key, ci, int(a[k]), k)
        for nnz, ci in candidates:
            if ci != best[1] and idxs[ci] is not None:
                heapq.heappush(heap, (idxs[ci].size, ci))

        _, pc, pr, pk = best
        aval = int(vals[pc][pk])
        pa = np.delete(idxs[pc], pk)
        pv = np.delete(vals[pc], pk)
        for cj in sorted(c for c in live_cols_of_row(pr) if c != pc):
            a = idxs[cj]
            v = vals[cj]
            p = int(np.searchsorted(a, pr))
            b = int(v[p])
            a = np.delete(a, p)
            v = np.delete(v, p)
            g = gcd(aval, b)
            fs = aval // g
            fp = -(b // g)
            pvf = pv
            if v.dtype != object and pv.dtype != object:
                vm = int(np.abs(v).max()) if v.size else 0
                pm = int(np.abs(pv).max()) if pv.size else 0
                if abs(fs) * vm + abs(fp) * pm >= 1 << 62:
                    v = v.astype(object)
                    pvf = pv.astype(object)
            elif v.dtype != object:
                v = v.astype(object)
            elif pv.dtype != object:
                pvf = pv.astype(object)
            ni, nv = _merge_sorted(a, v * fs, pa, pvf * fp)
            if fs != 1 and nv.size:
                nv = _gcd_normalize(nv)
            removed = a[~_in_sorted(a, ni)]
            added = ni[~_in_sorted(ni, a)]
            if removed.size:
                row_cnt[removed] -= 1
                for r in removed[row_cnt[removed] == 1]:
                    peel.append((1, int(r)))
            if added.size:
                row_cnt[added] += 1
                for r in added.tolist():
                    row_cols[r].append(cj)
            if ni.size == 0:
                idxs[cj] = None
                vals[cj] = None
                continue
            idxs[cj] = ni
            vals[cj] = nv
            if ni.size == 1:
                peel.append((0, cj))
            else:
                heapq.heappush(heap, (ni.size, cj))
        rank += 1
        if rows_out is not None:
            rows_out.append(pr)
        retire_column(pc)
        row_cnt[pr] = 0
        row_cols[pr] = []

    return rank


def _rl_rank_from_coo(srcs, dsts, vals):
    """Array-engine rank from canonical COO arrays (sorted by column)."""
    if len(srcs) == 0:
        return 0
    first = np.empty(len(srcs), dtype=bool)
    first[0] = True
    first[1:] = srcs[1:] != srcs[:-1]
    starts = np.flatnonzero(first)[1:]
    cols_idx = np.split(dsts, starts)
    cols_val = np.split(vals, starts)
    return _rl_rank(cols_idx, cols_val, int(dsts.max()) + 1)


def _rl_rank_from_dicts(cols):
    """Array-engine rank from integer column dicts."""
    cols_idx = []
    cols_val = []
    nrows = 0
    for col in cols:
        rows = np.fromiter(sorted(col), dtype=np.int64, count=len(col))
        if rows.size:
            nrows = max(nrows, int(rows[-1]) + 1)
        if any(abs(col[int(r)]) >= 1 << 62 for r in rows):
            vals = np.array([col[int(r)] for r in rows], dtype=object)
        else:
            vals = np.fromiter((col[int(r)] for r in rows), dtype=np.int64,
                               count=rows.size)
        cols_idx.append(rows)
        cols_val.append(vals)
    return _rl_rank(cols_idx, cols_val, nrows)


def staged_transpose_rank(srcs, dsts, vals, drop):
    """Rank of a sparse matrix given as COO, eliminated transposed with
    known-redundant rows removed first.

    ``srcs``/``dsts``/``vals`` hold column / row / value triples.  ``drop``
    is a sorted array of row ids certified to be linear combinations of
    the remaining rows (for a differential d_n, the elimination pivot
    rows of d_{n-1} transposed qualify, because d_{n-1} d_n = 0 makes the
    rows of d_n at an invertible row-selection of d_{n-1}^T dependent on
    the rest).  Dropping them shrinks the transposed elimination to
    roughly rank-many columns, which avoids the expensive reductions of
    dependent columns entirely.

    Returns ``(rank, pivot_ids)`` where ``pivot_ids`` is the sorted array
    of elimination pivot positions in the *column* space of the input --
    exactly the certificate the next differential up needs as ``drop``.
    """
    empty = np.empty(0, dtype=np.int64)
    if len(srcs) == 0:
        return 0, empty
    if drop is not None and len(drop):
        keep = ~_in_sorted(dsts, np.asarray(drop, dtype=np.int64))
        srcs, dsts, vals = srcs[keep], dsts[keep], vals[keep]
        if len(srcs) == 0:
            return 0, empty
    order = np.lexsort((srcs, dsts))
    ts = dsts[order]
    td = srcs[order]
    tv = vals[order]
    rows_out = []
    if len(ts) > _BIG_RANK_NNZ:
        first = np.empty(len(ts), dtype=bool)
        first[0] = True
        first[1:] = ts[1:] != ts[:-1]
        starts = np.flatnonzero(first)[1:]
        cols_idx = np.split(td, starts)
        cols_val = np.split(tv, starts)
        rank = _rl_rank(cols_idx, cols_val, int(td.max()) + 1, rows_out)
    else:
        cols = []
        col = None
        prev = -1
        for k in range(len(ts)):
            c = ts[k]
            if c != prev:
                col = {}
                cols.append(col)
                prev = c
            col[int(td[k])] = int(tv[k])
        rank = _int_rank(cols, rows_out)
    return rank, np.array(sorted(rows_out), dtype=np.int64)


# ---------------------------------------------------------------------------
# canonical echelon forms, subspaces, solving
# ---------------------------------------------------------------------------

def _column_echelon(columns, track=False):
    """Column echelon data for a list of sparse columns.

    Returns (pivot_rows_sorted, basis, combos, nullcombos) where basis is
    the canonical reduced echelon basis of the column span (pivot rows
    strictly increasing, pivot entries 1, pivot rows cleared elsewhere),
    combos[i] expresses basis[i] in the input columns (when track=True),
    and nullcombos spans the kernel of the input-columns matrix.
    """
    pivots = {}
    nullcombos = []
    for j, col in enumerate(columns):
        v = dict(col)
        combo = {j: Fraction(1)} if track else None
        while v:
            r = min(v)
            hit = pivots.get(r)
            if hit is None:
                pivots[r] = (v, combo)
                break
            pv, pcombo = hit
            f = Fraction(v[r]) / Fraction(pv[r])
            vec_axpy(v, -f, pv)
            if track:
                vec_axpy(combo, -f, pcombo)
        else:
            if track and combo:
                nullcombos.append(combo)

    rows = sorted(pivots)
    # normalise pivots to 1
    for r in rows:
        v, combo = pivots[r]
        lead = v[r]
        if lead != 1:
            inv = Fraction(1, 1) / lead
            for i in list(v):
                v[i] *= inv
            if track:
                for i in list(combo):
                    combo[i] *= inv
    # full back-reduction -> canonical reduced echelon basis
    for r in rows:
        vr, cr = pivots[r]
        for r2 in rows:
            if r2 == r:
                continue
            v2, c2 = pivots[r2]
            x = v2.get(r)
            if x:
                vec_axpy(v2, -x, vr)
                if track:
                    vec_axpy(c2, -x, cr)
    basis = [pivots[r][0] for r in rows]
    combos = [pivots[r][1] for r in rows] if track else None
    return rows, basis, combos, nullcombos


class EchelonSolver:
    """Prefactored echelon of a column list, for repeated exact solves."""

    __slots__ = ("_pivots",)

    def __init__(self, columns):
        pivots = {}
        for j, col in enumerate(columns):
            v = dict(col)
            combo = {j: Fraction(1)}
            while v:
                r = min(v)
                hit = pivots.get(r)
                if hit is None:
                    pivots[r] = (v, combo)
                    break
                pv, pcombo = hit
                f = Fraction(v[r]) / Fraction(pv[r])
                vec_axpy(v, -f, pv)
                vec_axpy(combo, -f, pcombo)
        self._pivots = pivots

    def solve(self, target):
        """Coefficients x (dict col->value) with columns @ x = target, or None."""
        v = dict(target)
        out = {}
        while v:
            r = min(v)
            hit = self._pivots.get(r)
            if hit is None:
                return None
            pv, pcombo = hit
            f = Fraction(v[r]) / Fraction(pv[r])
            vec_axpy(v, -f, pv)
            vec_axpy(out, f, pcombo)
        return out


class IntEchelonTable:
    """Incremental fraction-free echelon over sparse integer columns.

    Non-canonical (pivot row = smallest index at insertion time); meant
    for fast independence and membership tests where the canonical
    reduced basis of ``Subspace`` would be wasted work.  Fractions are
    cleared on entry, so any exact column can be fed in.
    """

    __slots__ = ("table",)

    def __init__(self, columns=()):
        self.table = {}
        for c in columns:
            self.add(c)

    @property
    def dim(self):
        return len(self.table)

    def columns(self):
        return [self.table[r] for r in sorted(self.table)]

    def _reduce(self, v):
        while v:
            r = min(v)
            t = self.table.get(r)
            if t is None:
                return v, r
            a, b = t[r], v[r]
            g = gcd(a, b)
            fs, fp = a // g, -(b // g)
            if fs != 1:
                for i in v:
                    v[i] *= fs
            vec_axpy(v, fp, t)
            if fs != 1 and v:
                g2 = 0
                for x in v.values():
                    g2 = gcd(g2, x)
                    if g2 == 1:
                        break
                if g2 > 1:
                    for i in v:
                        v[i] //= g2
        return None, None

    def add(self, col):
        """Insert col if independent of the table; return True if it was."""
        v, r = self._reduce(_integerize_column(col))
        if v is None:
            return False
        self.table[r] = v
        return True

    def contains(self, col):
        v, _ = self._reduce(_integerize_column(col))
        return v is None


class Subspace:
    """A subspace of Q^ambient with its canonical reduced echelon basis.

    Basis vectors are sparse dicts; pivot rows are strictly increasing,
    each pivot entry is 1 and is the only nonzero in its row across the
    basis, so equal subspaces always carry identical bases.
    """

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, ambient, basis, pivots):
        self.ambient = ambient
        self.basis = basis
        self.pivots = pivots

    @classmethod
    def span(cls, ambient, vectors):
        for v in vectors:
            for i in v:
                if not 0 <= i < ambient:
                    raise DimensionError("vector outside ambient space")
        rows, basis, _, _ = _column_echelon(list(vectors))
        return cls(ambient, basis, rows)

    @classmethod
    def zero(cls, ambient):
        return cls(ambient, [], [])

    @classmethod
    def full(cls, ambient):
        return cls(ambient, [{i: 1} for i in range(ambient)], list(range(ambient)))

    @property
    def dim(self):
        return len(self.basis)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (self.ambient == other.ambient and self.pivots == other.pivots
                and self.basis == other.basis)

    __hash__ = None  # mutable

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"

    def reduce(self, vec):
        """The canonical representative of vec modulo this subspace."""
        v = dict(vec)
        for r, b in zip(self.pivots, self.basis):
            x = v.get(r)
            if x:
                vec_axpy(v, -x, b)
        return v

    def contains(self, vec):
        return not self.reduce(vec)

    def contains_subspace(self, other):
        if other.ambient != self.ambient:
            raise DimensionError("ambient mismatch")
        return all(self.contains(b) for b in other.basis)

    def sum_with(self, other):
        if other.ambient != self.ambient:
            raise DimensionError("ambient mismatch")
        return Subspace.span(self.ambient, self.basis + other.basis)

    def intersect(self, other):
        if other.ambient != self.ambient:
            raise DimensionError("ambient mismatch")
        if not self.basis or not other.basis:
            return Subspace.zero(self.ambient)
        _, _, _, nullcombos = _column_echelon(self.basis + other.basis, track=True)
        k = len(self.basis)
        vectors = []
        for combo in nullcombos:
            v = {}
            for j, c in combo.items():
                if j < k:
                    vec_axpy(v, c, self.basis[j])
            if v:
                vectors.append(v)
        return Subspace.span(self.ambient, vectors)

    def nonpivot_positions(self):
        pset = set(self.pivots)
        return [i for i in range(self.ambient) if i not in pset]

    def quotient_projector(self):
        """Matrix of the projection Q^ambient -> Q^ambient/this, in the
        canonical quotient basis (unit vectors at non-pivot positions)."""
        nonpiv = self.nonpivot_positions()
        pos = {r: i for i, r in enumerate(nonpiv)}
        m = Mat(len(nonpiv), self.ambient)
        for i, r in enumerate(nonpiv):
            m._columns[r][i] = 1
        for p, b in zip(self.pivots, self.basis):
            col = m._columns[p]
            for r, v in b.items():
                if r != p:
                    w = col.get(pos[r], 0) - v
                    if w:
                        col[pos[r]] = w
                    else:
                        col.pop(pos[r], None)
        return m

    def preimage_under(self, m):
        """{x : m x in this subspace} as a subspace of the domain."""
        if m.rows != self.ambient:
            raise DimensionError("codomain mismatch")
        if self.dim == self.ambient:
            return Subspace.full(m.cols)
        return (self.quotient_projector() @ m).kernel()


def quotient_dim(big, small):
    """dim(big/small); raises ContainmentError unless small <= big."""
    if not big.contains_subspace(small):
        raise ContainmentError("small subspace not contained in big one")
    return big.dim - small.dim


def quotient_completion(num, den):
    """Vectors from num's canonical basis forming a basis of num/den.

    Deterministic first-completion: walk num.basis in order, keep the
    vectors that are independent modulo den plus the kept ones.  If num
    is None the full space is used and the representatives are the unit
    vectors at den's non-pivot positions.
    """
    if num is None:
        return [{i: 1} for i in den.nonpivot_positions()]
    if not num.contains_subspace(den):
        raise ContainmentError("denominator not inside numerator")
    table = {}
    for r, b in zip(den.pivots, den.basis):
        table[r] = dict(b)
    reps = []
    for v in num.basis:
        w = dict(v)
        while w:
            r = min(w)
            hit = table.get(r)
            if hit is None:
                table[r] = w
                reps.append(v)
                break
            vec_axpy(w, -(Fraction(w[r]) / Fraction(hit[r])), hit)
    return reps


def restrict_to_quotient(m, src_den, dst_den, src_num=None, dst_num=None):
    """Matrix of the map induced by m on subquotients.

    The map goes (src_num/src_den) -> (dst_num/dst_den); a None numerator
    means the full space.  Bases are the deterministic completions from
    ``quotient_completion``.  Raises ContainmentError when m does not map
    numerator into numerator-plus-denominator, and ValueError when it
    fails to map denominator into denominator (the induced map would not
    be well defined).
    """
    if src_den.ambient != m.cols or dst_den.ambient != m.rows:
        raise DimensionError("quotient data does not match matrix shape")
    for b in src_den.basis:
        if not dst_den.contains(m.apply(b)):
            raise ValueError("map does not send denominator into denominator; "
                             "induced map undefined")
    src_reps = quotient_completion(src_num, src_den)
    dst_reps = quotient_completion(dst_num, dst_den)
    solver = EchelonSolver(dst_reps + dst_den.basis)
    k = len(dst_reps)
    out = Mat(k, len(src_reps))
    for j, rep in enumerate(src_reps):
        coeffs = solver.solve(m.apply(rep))
        if coeffs is None:
            raise ContainmentError("image leaves the target subquotient")
        col = out._columns[j]
        for i, c in coeffs.items():
            if i < k and c:
                col[i] = c
    return out


# ---------------------------------------------------------------------------
# block bases and block maps
# ---------------------------------------------------------------------------

class BlockBasis:
    """An ordered direct sum of labelled blocks.

    ``blocks`` is a sequence of (key, dim) pairs; keys are typically
    tuples of small ints (nerve strings by arrow index).  Provides global
    offsets for assembling sparse matrices.
    """

    __slots__ = ("keys", "dims", "offsets", "index", "total", "scalar")

    def __init__(self, blocks):
        keys = []
        dims = []
        offsets = []
        total = 0
        for key, dim in blocks:
            keys.append(key)
            dims.append(dim)
            offsets.append(total)
            total += dim
        self.keys = keys
        self.dims = dims
        self.offsets = offsets
        self.index = {k: i for i, k in enumerate(keys)}
        if len(self.index) != len(keys):
            raise ValueError("duplicate block keys")
        self.total = total
        self.scalar = all(d == 1 for d in dims)

    def __len__(self):
        return len(self.keys)

    def global_index(self, key, inner=0):
        pos = self.index[key]
        return self.offsets[pos] + inner

    def __repr__(self):
        return f"BlockBasis({len(self.keys)} blocks, total={self.total})"


def _small_id(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def _small_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _small_scale(a, c):
    return tuple(tuple(c * x for x in row) for row in a)


def _small_mul(a, b):
    # a: p x q, b: q x r  ->  p x r
    bt = tuple(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, colu)) for colu in bt) for row in a)


def _small_is_zero(a):
    return all(not x for row in a for x in row)


def small_block_of(m):
    """A Mat as a tuple-of-row-tuples small block."""
    return tuple(tuple(m.entry(r, c) for c in range(m.cols))
                 for r in range(m.rows))


class BlockMap:
    """A linear map between two BlockBasis spaces, stored blockwise.

    Internally either a vectorised integer COO over blocks (when both
    bases are all-scalar blocks and coefficients are small ints) or a
    dict of small dense blocks.  ``then`` composes, ``to_mat`` expands,
    ``rank`` feeds the rank engine without building a ``Mat``.
    """

    __slots__ = ("src", "dst", "_coo", "_terms")

    def __init__(self, src, dst, coo=None, terms=None):
        self.src = src
        self.dst = dst
        self._coo = coo
        self._terms = terms

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, src, dst):
        if src.scalar and dst.scalar:
            e = np.zeros(0, dtype=np.int64)
            return cls(src, dst, coo=(e, e.copy(), e.copy()))
        return cls(src, dst, terms={})

    @classmethod
    def identity(cls, basis):
        if basis.scalar:
            idx = np.arange(len(basis), dtype=np.int64)
            return cls(basis, basis, coo=(idx, idx.copy(),
                                          np.ones(len(basis), dtype=np.int64)))
        terms = {i: {i: _small_id(d)} for i, d in enumerate(basis.dims)}
        return cls(basis, basis, terms=terms)

    @classmethod
    def from_coo(cls, src, dst, srcs, dsts, vals):
        s = np.asarray(srcs, dtype=np.int64)
        d = np.asarray(dsts, dtype=np.int64)
        v = np.asarray(vals, dtype=np.int64)
        return cls(src, dst, coo=_coo_canonical(s, d, v))

    @classmethod
    def from_terms(cls, src, dst, term_items):
        """term_items: iterable of (src_pos, dst_pos, small_block).

        small_block is a tuple-of-row-tuples (or a bare scalar for 1x1).
        Duplicate (src, dst) pairs accumulate.
        """
        terms = {}
        for sp, dp, blk in term_items:
            if not isinstance(blk, tuple):
                blk = ((blk,),)
            if len(blk) != dst.dims[dp] or (blk and len(blk[0]) != src.dims[sp]):
                raise DimensionError("small block shape mismatch")
            row = terms.setdefault(sp, {})
            row[dp] = _small_add(row[dp], blk) if dp in row else blk
        for sp in list(terms):
            row = terms[sp]
            for dp in list(row):
                if _small_is_zero(row[dp]):
                    del row[dp]
            if not row:
                del terms[sp]
        bm = cls(src, dst, terms=terms)
        return bm._try_vectorise()

    def _try_vectorise(self):
        if not (self.src.scalar and self.dst.scalar) or self._terms is None:
            return self
        srcs, dsts, vals = [], [], []
        ok = True
        for sp, row in self._terms.items():
            for dp, blk in row.items():
                v = blk[0][0]
                if isinstance(v, Fraction):
                    if v.denominator != 1:
                        ok = False
                        break
                    v = int(v)
                if abs(v) > _COEFF_GUARD:
                    ok = False
                    break
                srcs.append(sp)
                dsts.append(dp)
                vals.append(v)
            if not ok:
                break
        if not ok:
            return self
        return BlockMap.from_coo(self.src, self.dst, srcs, dsts, vals)

    # -- inspection -------------------------------------------------------

    @property
    def shape(self):
        return (self.dst.total, self.src.total)

    def is_zero(self):
        if self._coo is not None:
            return len(self._coo[0]) == 0
        return not self._terms

    def __eq__(self, other):
        if not isinstance(other, BlockMap):
            return NotImplemented
        if (len(self.src), len(self.dst)) != (len(other.src), len(other.dst)):
            return False
        a, b = self, other
        if (a._coo is None) != (b._coo is None):
            a = a._as_terms_map()
            b = b._as_terms_map()
        if a._coo is not None:
            return all(np.array_equal(x, y) for x, y in zip(a._coo, b._coo))
        return a._norm_terms() == b._norm_terms()

    __hash__ = None  # mutable

    def _norm_terms(self):
        out = {}
        for sp, row in self._terms.items():
            nr = {dp: tuple(tuple(Fraction(x) for x in r) for r in blk)
                  for dp, blk in row.items() if not _small_is_zero(blk)}
            if nr:
                out[sp] = nr
        return out

    def _as_terms_map(self):
        if self._terms is not None:
            return self
        s, d, v = self._coo
        terms = {}
        for i in range(len(s)):
            terms.setdefault(int(s[i]), {})[int(d[i])] = ((int(v[i]),),)
        return BlockMap(self.src, self.dst, terms=terms)

    # -- algebra ----------------------------------------------------------

    def scale(self, coeff):
        if self._coo is not None and isinstance(coeff, int) and abs(coeff) <= _COEFF_GUARD:
            s, d, v = self._coo
            if coeff == 0:
                return BlockMap.zero(self.src, self.dst)
            nv = v * coeff
            return BlockMap(self.src, self.dst, coo=(s, d, nv))
        me = self._as_terms_map()
        terms = {sp: {dp: _small_scale(blk, coeff) for dp, blk in row.items()}
                 for sp, row in me._terms.items()} if coeff else {}
        return BlockMap(self.src, self.dst, terms=terms)

    def __add__(self, other):
        if not isinstance(other, BlockMap):
            return NotImplemented
        if len(self.src) != len(other.src) or len(self.dst) != len(other.dst):
            raise DimensionError("block map sum shape mismatch")
        if self._coo is not None and other._coo is not None:
            s = np.concatenate([self._coo[0], other._coo[0]])
            d = np.concatenate([self._coo[1], other._coo[1]])
            v = np.concatenate([self._coo[2], other._coo[2]])
            return BlockMap(self.src, self.dst, coo=_coo_canonical(s, d, v))
        a = self._as_terms_map()
        b = other._as_terms_map()
        items = [(sp, dp, blk) for sp, row in a._terms.items() for dp, blk in row.items()]
        items += [(sp, dp, blk) for sp, row in b._terms.items() for dp, blk in row.items()]
        return BlockMap.from_terms(self.src, self.dst, items)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def then(self, other):
        """Composite other . self (apply self first)."""
        if len(self.dst) != len(other.src):
            raise DimensionError("block map composition mismatch")
        if self._coo is not None and other._coo is not None:
            s1, d1, v1 = self._coo
            s2, d2, v2 = other._coo
            if len(s1) == 0 or len(s2) == 0:
                return BlockMap.zero(self.src, other.dst)
            m1 = int(np.abs(v1).max())
            m2 = int(np.abs(v2).max())
            if m1 * m2 <= _COEFF_GUARD:
                order = np.argsort(s2, kind="stable")
                s2s, d2s, v2s = s2[order], d2[order], v2[order]
                indptr = np.searchsorted(s2s, np.arange(len(other.src) + 1))
                start = indptr[d1]
                cnt = indptr[d1 + 1] - start
                total = int(cnt.sum())
                if total == 0:
                    return BlockMap.zero(self.src, other.dst)
                ends = np.cumsum(cnt)
                pos = np.arange(total) - np.repeat(ends - cnt, cnt) + np.repeat(start, cnt)
                out_s = np.repeat(s1, cnt)
                out_d = d2s[pos]
                out_v = np.repeat(v1, cnt) * v2s[pos]
                return BlockMap(self.src, other.dst,
                                coo=_coo_canonical(out_s, out_d, out_v))
        a = self._as_terms_map()
        b = other._as_terms_map()
        items = []
        for sp, row in a._terms.items():
            for mid, m1 in row.items():
                brow = b._terms.get(mid)
                if not brow:
                    continue
                for dp, m2 in brow.items():
                    items.append((sp, dp, _small_mul(m2, m1)))
        return BlockMap.from_terms(self.src, other.dst, items)

    # -- expansion ----------------------------------------------------------

    def to_mat(self):
        out = Mat(self.dst.total, self.src.total)
        if self._coo is not None:
            s, d, v = self._coo
            soff = self.src.offsets
            doff = self.dst.offsets
            columns = out._columns
            for i in range(len(s)):
                columns[soff[s[i]]][doff[d[i]]] = int(v[i])
            return out
        soff = self.src.offsets
        doff = self.dst.offsets
        for sp, row in self._terms.items():
            so = soff[sp]
            for dp, blk in row.items():
                do = doff[dp]
                for r, brow in enumerate(blk):
                    for c, val in enumerate(brow):
                        if val:
                            out._columns[so + c][do + r] = val
        return out

    def columns(self):
        """Column dicts of the expanded matrix (cheaper than to_mat for rank)."""
        cols = [dict() for _ in range(self.src.total)]
        if self._coo is not None:
            s, d, v = self._coo
            soff = self.src.offsets
            doff = self.dst.offsets
            for i in range(len(s)):
                cols[soff[s[i]]][doff[d[i]]] = int(v[i])
            return cols
        soff = self.src.offsets
        doff = self.dst.offsets
        for sp, row in self._terms.items():
            so = soff[sp]
            for dp, blk in row.items():
                do = doff[dp]
                for r, brow in enumerate(blk):
                    for c, val in enumerate(brow):
                        if val:
                            cols[so + c][do + r] = val
        return cols

    def rank(self):
        if self._coo is not None:
            s, d, v = self._coo
            if len(s) > _BIG_RANK_NNZ:
                return _rl_rank_from_coo(s, d, v)
            cols = [c for c in self.columns() if c]
            return _int_rank(cols)
        return rank_of_columns(self.columns())

    def apply(self, vec):
        return self.to_mat().apply(vec)


def _coo_canonical(s, d, v):
    if len(s) == 0:
        e = np.zeros(0, dtype=np.int64)
        return (e, e.copy(), e.copy())
    order = np.lexsort((d, s))
    s, d, v = s[order], d[order], v[order]
    first = np.empty(len(s), dtype=bool)
    first[0] = True
    first[1:] = (s[1:] != s[:-1]) | (d[1:] != d[:-1])
    idx = np.flatnonzero(first)
    sums = np.add.reduceat(v, idx)
    keep = sums != 0
    return (np.ascontiguousarray(s[idx][keep]),
            np.ascontiguousarray(d[idx][keep]),
            np.ascontiguousarray(sums[keep]))


def stack_blockmaps(src, dst, placed):
    """Assemble a BlockMap on concatenated bases from placed pieces.

    ``placed``: iterable of (blockmap, src_block_offset, dst_block_offset,
    coefficient).  Offsets are in *blocks* within the concatenated bases.
    """
    placed = list(placed)
    if src.scalar and dst.scalar and all(
            p[0]._coo is not None and isinstance(p[3], int) for p in placed):
        ss, ds, vs = [], [], []
        for bm, so, do, coeff in placed:
            s, d, v = bm._coo
            if len(s) == 0 or coeff == 0:
                continue
            ss.append(s + so)
            ds.append(d + do)
            vs.append(v * coeff)
        if not ss:
            return BlockMap.zero(src, dst)
        return BlockMap(src, dst, coo=_coo_canonical(
            np.concatenate(ss), np.concatenate(ds), np.concatenate(vs)))
    items = []
    for bm, so, do, coeff in placed:
        if coeff == 0:
            continue
        t = bm._as_terms_map()
        for sp, row in t._terms.items():
            for dp, blk in row.items():
                items.append((sp + so, dp + do,
                              blk if coeff == 1 else _small_scale(blk, coeff)))
    return BlockMap.from_terms(src, dst, items)
