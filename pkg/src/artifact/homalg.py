"""Chain complexes, homology with representatives, and spectral sequences.

Complexes here are materialised windows: a complex carries degrees
``0..hi`` and (when ``truncated``) only promises homology up to
``hi - 1``, since the boundary space in top degree is unknown.

Double complexes follow the commuting convention: the stored horizontal
and vertical differentials commute, and totalisation twists the vertical
one by (-1)^p, so ``Tot_n = (+)_{p+q=n} C_{p,q}`` with differential
``d_h + (-1)^p d_v`` squares to zero.  ``DoubleComplex.from_anticommuting``
absorbs the other sign convention.

The column-filtration spectral sequence is computed from explicit cycle
subspaces ``Z^r = F_p \\cap D^{-1}(F_{p-r})`` of the totalisation, so
every page and differential is an honest subquotient of chains.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .exactla import (
    BlockBasis,
    BlockMap,
    DimensionError,
    EchelonSolver,
    Mat,
    Subspace,
    _in_sorted,
    _integerize_column,
    restrict_to_quotient,
    stack_blockmaps,
    staged_transpose_rank,
)


class WindowError(ValueError):
    """A degree outside the materialised window was requested."""


def _as_mat(provider):
    return provider if isinstance(provider, Mat) else provider.to_mat()


def _shape(provider):
    if isinstance(provider, Mat):
        return (provider.rows, provider.cols)
    return provider.shape


def _diff_coo(provider):
    """A differential as canonical COO arrays (col, row, value) or None.

    Columns holding fractions are scaled integral first; per-column
    scaling changes neither ranks nor elimination pivot certificates.
    """
    if isinstance(provider, BlockMap) and provider._coo is not None:
        return provider._coo
    m = _as_mat(provider)
    ss, dd, vv = [], [], []
    for ci, col in enumerate(m._columns):
        if not col:
            continue
        ic = _integerize_column(col)
        for r in sorted(ic):
            ss.append(ci)
            dd.append(r)
            vv.append(ic[r])
    if not ss:
        return None
    big = any(abs(x) >= 1 << 62 for x in vv)
    return (np.array(ss, dtype=np.int64), np.array(dd, dtype=np.int64),
            np.array(vv, dtype=object if big else np.int64))


class ChainComplex:
    """A non-negatively graded chain complex on degrees [0, hi].

    ``spaces`` maps each degree in 0..hi to a BlockBasis or a plain
    dimension; ``diffs`` maps n to the differential X_n -> X_{n-1}
    (a Mat or a BlockMap) for 1 <= n <= hi.  Differentials into or out
    of zero-dimensional spaces may be omitted.  d o d = 0 is checked on
    construction.
    """

    def __init__(self, spaces, diffs, truncated=True, check=True):
        if not spaces:
            raise ValueError("empty complex window")
        self.hi = max(spaces)
        self.truncated = truncated
        self.dims = {}
        self.bases = {}
        for n in range(self.hi + 1):
            if n not in spaces:
                raise ValueError(f"degree {n} missing from the window")
            sp = spaces[n]
            if isinstance(sp, BlockBasis):
                self.bases[n] = sp
                self.dims[n] = sp.total
            else:
                self.dims[n] = int(sp)
        self._diffs = dict(diffs)
        self._mats = {}
        self._ranks = {}
        self._homology = {}
        self._pivot_rows = {}
        self._d2_known = set(range(2, self.hi + 1)) if check else set()
        if check:
            self._validate()

    # -- access ---------------------------------------------------------

    def dim(self, n):
        return self.dims.get(n, 0)

    def d_provider(self, n):
        return self._diffs.get(n)

    def d_mat(self, n):
        """The differential X_n -> X_{n-1} as a Mat (zero if absent)."""
        m = self._mats.get(n)
        if m is None:
            p = self._diffs.get(n)
            m = Mat.zero(self.dim(n - 1), self.dim(n)) if p is None else _as_mat(p)
            self._mats[n] = m
        return m

    def rank_d(self, n):
        r = self._ranks.get(n)
        if r is not None:
            return r
        if not (1 <= n <= self.hi) or self._diffs.get(n) is None:
            self._ranks[n] = 0
            return 0
        for k in range(1, n + 1):
            self._run_stage(k)
        return self._ranks[n]

    def _d2_certified(self, k):
        """Ensure d_{k-1} o d_k = 0 before its pivots justify clearing."""
        if k in self._d2_known:
            return True
        a = self._diffs.get(k)
        b = self._diffs.get(k - 1)
        if a is not None and b is not None:
            if isinstance(a, BlockMap) and isinstance(b, BlockMap):
                ok = a.then(b).is_zero()
            else:
                ok = (_as_mat(b) @ _as_mat(a)).is_zero()
            if not ok:
                raise ValueError(f"d^2 != 0 between degrees {k} and {k - 2}")
        self._d2_known.add(k)
        return True

    def _run_stage(self, k):
        """Rank of d_k by transposed elimination.

        The pivot rows certified at level k-1 index rows of d_k that are
        combinations of the remaining ones (because d_{k-1} d_k = 0), so
        the transposed elimination drops them up front: what is left has
        roughly rank-many, almost all independent columns, instead of
        dim X_k mostly dependent ones.
        """
        if k in self._pivot_rows:
            return
        p = self._diffs.get(k)
        coo = None
        if p is not None and self.dim(k) and self.dim(k - 1):
            coo = _diff_coo(p)
        if coo is None:
            self._ranks.setdefault(k, 0)
            self._pivot_rows[k] = np.empty(0, dtype=np.int64)
            return
        drop = self._pivot_rows.get(k - 1)
        if drop is not None and len(drop):
            self._d2_certified(k)
        rank, piv = staged_transpose_rank(*coo, drop)
        cached = self._ranks.get(k)
        if cached is not None and cached != rank:
            raise RuntimeError(
                f"rank of differential {k} disagrees with cached value: "
                f"{rank} != {cached}")
        self._ranks[k] = rank
        self._pivot_rows[k] = piv

    def max_homology_degree(self):
        return self.hi - 1 if self.truncated else self.hi

    def betti(self, n):
        if n < 0 or n > self.max_homology_degree():
            raise WindowError(f"homology degree {n} outside window "
                              f"[0, {self.max_homology_degree()}]")
        return self.dims[n] - self.rank_d(n) - self.rank_d(n + 1)

    def betti_list(self):
        return [self.betti(n) for n in range(self.max_homology_degree() + 1)]

    def homology(self, n):
        h = self._homology.get(n)
        if h is None:
            h = HomologyClassSpace(self, n)
            self._homology[n] = h
        return h

    def shifted(self, s):
        """The same complex with degrees moved up by s (X'_n = X_{n-s})."""
        spaces = {}
        diffs = {}
        for n in range(s, self.hi + s + 1):
            spaces[n] = self.bases.get(n - s, self.dims.get(n - s, 0))
        for n, p in self._diffs.items():
            diffs[n + s] = p
        for n in range(0, s):
            spaces.setdefault(n, 0)
        out = ChainComplex(spaces, diffs, truncated=self.truncated, check=False)
        out._ranks = {n + s: r for n, r in self._ranks.items()}
        out._mats = {n + s: m for n, m in self._mats.items()}
        out._pivot_rows = {n + s: pr for n, pr in self._pivot_rows.items()}
        out._d2_known = {n + s for n in self._d2_known}
        return out

    # -- validation -------------------------------------------------------

    def _validate(self):
        for n in range(1, self.hi + 1):
            p = self._diffs.get(n)
            if p is None:
                # omitted differentials are zero maps
                continue
            if _shape(p) != (self.dims[n - 1], self.dims[n]):
                raise DimensionError(f"differential {n} has shape {_shape(p)}, "
                                     f"expected {(self.dims[n - 1], self.dims[n])}")
        for n in range(2, self.hi + 1):
            a = self._diffs.get(n)
            b = self._diffs.get(n - 1)
            if a is None or b is None:
                continue
            if isinstance(a, BlockMap) and isinstance(b, BlockMap):
                ok = a.then(b).is_zero()
            else:
                ok = (_as_mat(b) @ _as_mat(a)).is_zero()
            if not ok:
                raise ValueError(f"d^2 != 0 between degrees {n} and {n - 2}")


def _provider_columns(provider, ids):
    """Selected columns of a differential as sparse dicts, exact values."""
    if isinstance(provider, BlockMap) and provider._coo is not None:
        s, d, v = provider._coo
        want = np.asarray(ids, dtype=np.int64)
        lo = np.searchsorted(s, want, side="left")
        hi = np.searchsorted(s, want, side="right")
        return [{int(d[k]): int(v[k]) for k in range(a, b)}
                for a, b in zip(lo, hi)]
    m = _as_mat(provider)
    return [m._columns[int(c)] for c in ids]


def _boundary_basis_columns(cc, n):
    """Columns of d_{n+1} forming a basis of the boundary space in X_n.

    The staged rank elimination certifies an independent column set of
    size rank, which therefore spans the image; restricting the boundary
    echelon to it avoids reducing the (often far more numerous) dependent
    columns.
    """
    d_next = cc.d_provider(n + 1)
    if d_next is None or cc.dim(n) == 0:
        return []
    cc.rank_d(n + 1)
    piv = cc._pivot_rows.get(n + 1)
    if piv is None:
        return [col for col in _as_mat(d_next)._columns if col]
    return _provider_columns(d_next, piv)


def _projected_boundary_pivots(cc, n):
    """Elimination pivot rows of the boundary space of degree n, after
    deleting the coordinates at the certified independent columns of d_n.

    Cycles are determined by their coordinates off those columns, so the
    deletion is injective on boundaries and the projected basis columns
    stay independent (checked).  Eliminating them leaves a pivot row set
    P' such that any boundary combination vanishing on P' is zero; the
    coordinates outside both deleted sets therefore enumerate a homology
    basis.
    """
    b = cc.rank_d(n + 1)
    if b == 0 or cc.dim(n) == 0:
        return np.empty(0, dtype=np.int64)
    srcs, dsts, vals = _diff_coo(cc.d_provider(n + 1))
    keep = _in_sorted(srcs, cc._pivot_rows[n + 1])
    jpiv = cc._pivot_rows.get(n)
    if jpiv is not None and len(jpiv):
        keep &= ~_in_sorted(dsts, jpiv)
    rank, prows = staged_transpose_rank(dsts[keep], srcs[keep], vals[keep],
                                        None)
    if rank != b:
        raise RuntimeError("boundary basis degenerated under projection")
    return prows


class HomologyClassSpace:
    """H_n of a complex: dimension, canonical cycle representatives, and
    coordinates of arbitrary cycles in those representatives."""

    def __init__(self, cc, n):
        self.complex = cc
        self.degree = n
        self.dim = cc.betti(n)
        self._reps = None
        self._solver = None

    @property
    def reps(self):
        """Cycle representatives (sparse vectors), one basis class each.

        Assembled from the elimination certificates rather than a kernel
        basis: a cycle is determined by its coordinates off the certified
        independent columns J of d_n (each free assignment completes
        uniquely to a cycle), and after removing the projected boundary
        pivot coordinates exactly ``dim`` free positions remain.  The
        completion of each one is independent modulo boundaries, because
        a boundary combination vanishing on the pivot coordinates is zero.
        """
        if self._reps is None:
            if self.dim == 0:
                self._reps = []
                return self._reps
            cc, n = self.complex, self.degree
            cc.rank_d(n)
            jpiv = cc._pivot_rows.get(n)
            jcols = [] if jpiv is None else [int(j) for j in jpiv]
            taken = set(jcols)
            taken.update(int(r) for r in _projected_boundary_pivots(cc, n))
            free = [x for x in range(cc.dim(n)) if x not in taken]
            if len(free) != self.dim:
                raise RuntimeError("homology representative count mismatch")
            if jcols:
                d_n = cc.d_provider(n)
                solver = EchelonSolver(_provider_columns(d_n, jcols))
                reps = []
                for i, col in zip(free, _provider_columns(d_n, free)):
                    sol = solver.solve({r: -c for r, c in col.items()})
                    if sol is None:
                        raise RuntimeError("cycle completion failed")
                    v = {i: Fraction(1)}
                    for k, c in sol.items():
                        if c:
                            v[jcols[k]] = c
                    reps.append(v)
            else:
                reps = [{i: Fraction(1)} for i in free]
            self._reps = reps
        return self._reps

    def coords_of(self, vec):
        """Coordinates of a cycle's class in the representative basis."""
        if self.dim == 0:
            return {}
        if self._solver is None:
            cc, n = self.complex, self.degree
            cols = list(self.reps) + _boundary_basis_columns(cc, n)
            self._solver = EchelonSolver(cols)
        sol = self._solver.solve(vec)
        if sol is None:
            raise ValueError("vector is not a cycle modulo boundaries")
        return {i: c for i, c in sol.items() if i < self.dim and c}

    def class_matrix_of(self, vectors):
        """Matrix whose columns are coords_of each given vector."""
        out = Mat(self.dim, len(vectors))
        for j, v in enumerate(vectors):
            for i, c in self.coords_of(v).items():
                out._columns[j][i] = c
        return out


class ChainMap:
    """Degreewise components of a chain map between two complexes."""

    def __init__(self, src, dst, components, check=True):
        self.src = src
        self.dst = dst
        self.components = dict(components)
        if check:
            self._validate()

    def _validate(self):
        for n, f in self.components.items():
            if _shape(f) != (self.dst.dim(n), self.src.dim(n)):
                raise DimensionError(f"component {n} shape mismatch")
        for n in range(1, min(self.src.hi, self.dst.hi) + 1):
            f_n = self.components.get(n)
            f_prev = self.components.get(n - 1)
            if f_n is None or f_prev is None:
                continue
            d_src = self.src.d_provider(n)
            d_dst = self.dst.d_provider(n)
            if isinstance(f_n, BlockMap) and isinstance(f_prev, BlockMap) and \
                    isinstance(d_src, (BlockMap, type(None))) and \
                    isinstance(d_dst, (BlockMap, type(None))):
                left = f_n.then(d_dst) if d_dst is not None else None
                right = d_src.then(f_prev) if d_src is not None else None
                if left is None and right is None:
                    continue
                if left is None:
                    ok = right.is_zero()
                elif right is None:
                    ok = left.is_zero()
                else:
                    ok = (left - right).is_zero()
            else:
                left = self.dst.d_mat(n) @ self.at(n)
                right = self.at(n - 1) @ self.src.d_mat(n)
                ok = left == right
            if not ok:
                raise ValueError(f"not a chain map at degree {n}")

    def at(self, n):
        f = self.components.get(n)
        if f is None:
            return Mat.zero(self.dst.dim(n), self.src.dim(n))
        return _as_mat(f)

    def induced(self, n):
        """The induced matrix H_n(src) -> H_n(dst) in representative bases."""
        hs = self.src.homology(n)
        hd = self.dst.homology(n)
        f = self.at(n)
        return hd.class_matrix_of([f.apply(rep) for rep in hs.reps])


def snake_connecting(incl, proj, n):
    """Connecting map H_n(C) -> H_{n-1}(A) for 0 -> A -i-> B -p-> C -> 0.

    ``incl``: ChainMap A -> B, ``proj``: ChainMap B -> C, degreewise part
    of a short exact sequence (the solves fail loudly otherwise).
    """
    B = incl.dst
    if proj.src is not B:
        raise ValueError("inclusion and projection do not share the middle complex")
    hC = proj.dst.homology(n)
    hA = incl.src.homology(n - 1)
    out = Mat(hA.dim, hC.dim)
    if hC.dim == 0:
        return out
    p_solver = proj.at(n).solver()
    i_solver = incl.at(n - 1).solver()
    d_B = B.d_mat(n)
    for j, z in enumerate(hC.reps):
        x = p_solver.solve(z)
        if x is None:
            raise ValueError("projection misses a cycle; sequence not exact")
        y = i_solver.solve(d_B.apply(x))
        if y is None:
            raise ValueError("boundary fails to lift along the inclusion")
        for i, c in hA.coords_of(y).items():
            out._columns[j][i] = c
    return out


def exactness_defect(f, g):
    """dim(ker g / im f) for matrices with g @ f = 0; zero iff exact."""
    if f.rows != g.cols:
        raise DimensionError("maps not composable")
    if not (g @ f).is_zero():
        raise ValueError("composite g f is nonzero")
    return (g.cols - g.rank()) - f.rank()


def check_exact_sequence(maps):
    """Exactness defects at the inner junctions of a run of composable maps."""
    return [exactness_defect(f, g) for f, g in zip(maps, maps[1:])]


# ---------------------------------------------------------------------------
# double complexes
# ---------------------------------------------------------------------------

def _dense_block_basis(dim, tag="cell"):
    return BlockBasis([(tag, dim)]) if dim else BlockBasis([])


def as_block_basis(space, tag="cell"):
    return space if isinstance(space, BlockBasis) else _dense_block_basis(space, tag)


def mat_as_blockmap(m, src=None, dst=None):
    """Wrap a Mat as a one-block-per-side BlockMap."""
    src = src if src is not None else _dense_block_basis(m.cols)
    dst = dst if dst is not None else _dense_block_basis(m.rows)
    if src.total != m.cols or dst.total != m.rows:
        raise DimensionError("basis totals do not match matrix shape")
    if m.cols == 0 or m.rows == 0 or m.is_zero():
        return BlockMap.zero(src, dst)
    dense = tuple(tuple(row) for row in m.to_dense())
    if len(src) == 1 and len(dst) == 1:
        return BlockMap.from_terms(src, dst, [(0, 0, dense)])
    raise DimensionError("mat_as_blockmap expects single-block bases")


class DoubleComplex:
    """A first-quadrant double complex with commuting differentials.

    ``cells[(p, q)]`` is a BlockBasis (or plain dimension) for every
    p, q >= 0 with p + q <= window; ``horiz[(p, q)]`` maps cell (p,q) to
    (p-1,q) and ``vert[(p, q)]`` to (p,q-1).  Maps touching empty cells
    may be omitted.  On construction d_h^2 = 0, d_v^2 = 0 and
    d_h d_v = d_v d_h are checked inside the window.
    """

    def __init__(self, cells, horiz, vert, window, check=True):
        self.window = window
        self.cells = {}
        for p in range(window + 1):
            for q in range(window + 1 - p):
                if (p, q) not in cells:
                    raise ValueError(f"cell {(p, q)} missing from the window")
        for pq, basis in cells.items():
            self.cells[pq] = as_block_basis(basis, tag=pq)
        self.horiz = dict(horiz)
        self.vert = dict(vert)
        self._tot = None
        self._tot_bases = None
        self._offsets = None
        if check:
            self._validate()

    @classmethod
    def from_anticommuting(cls, cells, horiz, vert, window, check=True):
        """Build from anticommuting data (d_h d_v = -d_v d_h, total
        differential d_h + d_v): the vertical maps in odd columns are
        negated on storage and the (-1)^p of totalisation restores them."""
        flipped = {pq: (v.scale(-1) if pq[0] % 2 else v) for pq, v in vert.items()}
        return cls(cells, horiz, flipped, window, check=check)

    def cell(self, p, q):
        return self.cells[(p, q)]

    def h_map(self, p, q):
        m = self.horiz.get((p, q))
        if m is None:
            return BlockMap.zero(self.cells[(p, q)], self.cells[(p - 1, q)])
        return m

    def v_map(self, p, q):
        m = self.vert.get((p, q))
        if m is None:
            return BlockMap.zero(self.cells[(p, q)], self.cells[(p, q - 1)])
        return m

    def _validate(self):
        W = self.window
        for (p, q), m in self.horiz.items():
            if _shape(m) != (self.cells[(p - 1, q)].total, self.cells[(p, q)].total):
                raise DimensionError(f"horizontal map at {(p, q)} has wrong shape")
        for (p, q), m in self.vert.items():
            if _shape(m) != (self.cells[(p, q - 1)].total, self.cells[(p, q)].total):
                raise DimensionError(f"vertical map at {(p, q)} has wrong shape")
        for p in range(W + 1):
            for q in range(W + 1 - p):
                if self.cells[(p, q)].total == 0:
                    continue
                if p >= 2 and self.cells[(p - 2, q)].total:
                    if not self.h_map(p, q).then(self.h_map(p - 1, q)).is_zero():
                        raise ValueError(f"d_h^2 != 0 at {(p, q)}")
                if q >= 2 and self.cells[(p, q - 2)].total:
                    if not self.v_map(p, q).then(self.v_map(p, q - 1)).is_zero():
                        raise ValueError(f"d_v^2 != 0 at {(p, q)}")
                if p >= 1 and q >= 1:
                    a = self.v_map(p, q).then(self.h_map(p, q - 1))
                    b = self.h_map(p, q).then(self.v_map(p - 1, q))
                    if not (a - b).is_zero():
                        raise ValueError(f"d_h d_v != d_v d_h at {(p, q)}")

    # -- totalisation ---------------------------------------------------

    def tot_basis(self, n):
        self._build_tot_bases()
        return self._tot_bases[n]

    def cell_offset(self, p, q):
        """(block_offset, coord_offset) of cell (p,q) inside Tot_{p+q}."""
        self._build_tot_bases()
        return self._offsets[(p, q)]

    def _build_tot_bases(self):
        if self._tot_bases is not None:
            return
        self._tot_bases = {}
        self._offsets = {}
        for n in range(self.window + 1):
            blocks = []
            coord = 0
            for p in range(n + 1):
                basis = self.cells[(p, n - p)]
                self._offsets[(p, n - p)] = (len(blocks), coord)
                for k, d in zip(basis.keys, basis.dims):
                    blocks.append(((p, k), d))
                coord += basis.total
            self._tot_bases[n] = BlockBasis(blocks)

    def totalize(self):
        """The total complex with differential d_h + (-1)^p d_v."""
        if self._tot is None:
            self._build_tot_bases()
            spaces = {n: self._tot_bases[n] for n in range(self.window + 1)}
            diffs = {}
            for n in range(1, self.window + 1):
                placed = []
                for p in range(n + 1):
                    q = n - p
                    if self.cells[(p, q)].total == 0:
                        continue
                    if p >= 1 and self.cells[(p - 1, q)].total:
                        placed.append((self.h_map(p, q),
                                       self._offsets[(p, q)][0],
                                       self._offsets[(p - 1, q)][0], 1))
                    if q >= 1 and self.cells[(p, q - 1)].total:
                        placed.append((self.v_map(p, q),
                                       self._offsets[(p, q)][0],
                                       self._offsets[(p, q - 1)][0],
                                       -1 if p % 2 else 1))
                diffs[n] = stack_blockmaps(self._tot_bases[n],
                                           self._tot_bases[n - 1], placed)
            self._tot = ChainComplex(spaces, diffs, truncated=True, check=True)
        return self._tot

    # -- spectral sequence -------------------------------------------------

    def spectral_sequence(self, n_max=None, r_max=None):
        """Column-filtration spectral sequence of the totalisation.

        Returns an SSResult holding page dimensions E^r_{p,q} for
        r = 1..r_max, the verified d_r matrices, and the E_infinity /
        abutment comparison for total degrees <= n_max.
        """
        tot = self.totalize()
        n_max = tot.max_homology_degree() if n_max is None else n_max
        if n_max > tot.max_homology_degree():
            raise WindowError("spectral sequence degree beyond the window")
        r_max = (n_max + 2) if r_max is None else r_max

        z_cache = {}

        def z_space(p, q, r):
            # meaningful for any integers: F_p is zero below p=0 and the
            # whole of Tot_n once p >= n (negative q included)
            key = (p, q, r)
            if key in z_cache:
                return z_cache[key]
            n = p + q
            ambient = tot.dim(n)
            if p < 0 or n < 0 or n > self.window:
                s = Subspace.zero(ambient)
            else:
                col_end = self._prefix_end(n, p)
                if n == 0:
                    s = Subspace(ambient, [{i: 1} for i in range(col_end)],
                                 list(range(col_end)))
                else:
                    row_start = self._prefix_end(n - 1, p - r)
                    D = tot.d_mat(n)
                    cols = []
                    for j in range(col_end):
                        cols.append({rr - row_start: v
                                     for rr, v in D.column(j).items()
                                     if rr >= row_start})
                    k = Mat(tot.dim(n - 1) - row_start, col_end, cols).kernel()
                    s = Subspace(ambient, k.basis, k.pivots)
            z_cache[key] = s
            return s

        def den_space(p, q, r):
            n = p + q
            parts = list(z_space(p - 1, q + 1, r - 1).basis)
            zb = z_space(p + r - 1, q - r + 2, r - 1)
            if zb.dim and n + 1 <= self.window:
                D = tot.d_mat(n + 1)
                parts += [D.apply(b) for b in zb.basis]
            return Subspace.span(tot.dim(n), parts)

        # Work one total degree deeper than reported, so differentials
        # arriving at degree n_max have honest source subquotients: at
        # grid_max the denominators lose only boundary parts, which map
        # to zero under the induced differential and leave ranks intact.
        grid_max = min(n_max + 1, self.window)
        pages = {}
        e_data = {}
        for r in range(1, r_max + 1):
            page = {}
            for n in range(grid_max + 1):
                for p in range(n + 1):
                    q = n - p
                    z = z_space(p, q, r)
                    den = den_space(p, q, r)
                    page[(p, q)] = z.dim - den.dim
                    e_data[(p, q, r)] = (z, den)
            pages[r] = page

        d_mats = {}
        for r in range(1, r_max):
            for (p, q), dim_here in pages[r].items():
                tp, tq = p - r, q + r - 1
                if dim_here == 0 or tp < 0 or pages[r].get((tp, tq), 0) == 0:
                    continue
                n = p + q
                z, den = e_data[(p, q, r)]
                zt, dent = e_data[(tp, tq, r)]
                m = restrict_to_quotient(tot.d_mat(n), src_den=den,
                                         dst_den=dent, src_num=z, dst_num=zt)
                d_mats[(p, q, r)] = m
        # verify the page turn E^{r+1} = H(E^r, d_r) where both pages
        # are fully inside the reported region
        diff_ok = True
        for r in range(1, r_max):
            for (p, q), dim_here in pages[r].items():
                if p + q > n_max:
                    continue
                out_m = d_mats.get((p, q, r))
                in_m = d_mats.get((p + r, q - r + 1, r))
                rank_out = out_m.rank() if out_m is not None else 0
                rank_in = in_m.rank() if in_m is not None else 0
                expected = dim_here - rank_out - rank_in
                if pages[r + 1][(p, q)] != expected:
                    diff_ok = False

        convergence = {}
        for n in range(n_max + 1):
            total = sum(pages[r_max][(p, n - p)] for p in range(n + 1))
            convergence[n] = (total, tot.betti(n))
        reported = {r: {pq: d for pq, d in page.items() if pq[0] + pq[1] <= n_max}
                    for r, page in pages.items()}
        return SSResult(reported, d_mats, diff_ok, convergence)

    def _prefix_end(self, n, p):
        """Number of Tot_n coordinates occupied by cells with index <= p."""
        if p < 0:
            return 0
        self._build_tot_bases()
        p = min(p, n)
        end = 0
        for pp in range(p + 1):
            end += self.cells[(pp, n - pp)].total
        return end


class SSResult:
    """Pages, differentials and abutment data of a spectral sequence run."""

    def __init__(self, pages, differentials, pages_consistent, convergence):
        self.pages = pages
        self.differentials = differentials
        self.pages_consistent = pages_consistent
        self.convergence = convergence

    @property
    def converged(self):
        return self.pages_consistent and all(
            a == b for a, b in self.convergence.values())

    def page(self, r):
        return self.pages[r]

    def infinity_page(self):
        return self.pages[max(self.pages)]
