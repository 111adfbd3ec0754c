"""Equivariant sheaves of rational vector spaces on finite groupoids.

A sheaf assigns a finite-dimensional vector space to every object and an
invertible matrix act(g): A_{t(g)} -> A_{s(g)} to every arrow, with
act(g.h) = act(h) . act(g).  The simplicial bar complex of a sheaf
computes groupoid homology with sheaf coefficients; functors pull sheaves
back and induce chain maps of bar complexes.  Cyclic sheaves carry, on
top of a tower of level sheaves, equivariant face/degeneracy/cyclic
structure maps whose (n+1)-st cyclic power is the action of a chosen
central family of loops.
"""

import random

from .exactla import (
    BlockBasis,
    BlockMap,
    Mat,
    _small_id,
    _small_scale,
    inverse,
    random_invertible,
    restrict_to_quotient,
    small_block_of,
)
from .groupoid import (
    CyclicGroupoid,
    Functor,
    comma_groupoid,
    comma_precompose,
    skeleton,
)
from .homalg import ChainComplex, ChainMap


class SheafError(ValueError):
    """Raised when sheaf data fails validation."""


_small_of = small_block_of


class GSheaf:
    """A functor from a finite groupoid to rational vector spaces.

    ``dims`` maps objects to stalk dimensions; ``act`` maps arrow ids to
    the matrix A_{t(g)} -> A_{s(g)}.  Contravariant functoriality and
    unit laws are checked exhaustively on construction.
    """

    def __init__(self, gpd, dims, act, check=True):
        self.gpd = gpd
        self.dims = dict(dims)
        self.act = dict(act)
        if check:
            self._validate()

    def dim_at(self, obj):
        return self.dims[obj]

    def act_of(self, arrow_idx):
        return self.act[self.gpd.aid(arrow_idx)]

    def total_dim(self):
        return sum(self.dims[o] for o in self.gpd.objects)

    def _validate(self):
        g = self.gpd
        for o in g.objects:
            if o not in self.dims or self.dims[o] < 0:
                raise SheafError(f"missing or negative stalk dimension at {o!r}")
        for i in range(g.n_arrows):
            a = g.aid(i)
            m = self.act.get(a)
            if m is None:
                raise SheafError(f"missing action matrix for arrow {a!r}")
            want = (self.dims[g.src_obj(i)], self.dims[g.tgt_obj(i)])
            if (m.rows, m.cols) != want:
                raise SheafError(f"action matrix for {a!r} has shape "
                                 f"{(m.rows, m.cols)}, expected {want}")
        for o in g.objects:
            u = g.unit_at(o)
            if self.act[g.aid(u)] != Mat.identity(self.dims[o]):
                raise SheafError(f"unit at {o!r} does not act as identity")
        for (i, j), k in g.comp.items():
            left = self.act[g.aid(j)] @ self.act[g.aid(i)]
            if left != self.act[g.aid(k)]:
                raise SheafError(
                    f"action not functorial on {g.aid(i)!r} . {g.aid(j)!r}")


def constant_sheaf(gpd, dim=1):
    """The sheaf with the same stalk everywhere and identity actions."""
    dims = {o: dim for o in gpd.objects}
    act = {gpd.aid(i): Mat.identity(dim) for i in range(gpd.n_arrows)}
    return GSheaf(gpd, dims, act, check=False)


def pullback_sheaf(functor, sheaf, check=True):
    """The sheaf on functor.src with stalks and actions taken downstairs."""
    if sheaf.gpd is not functor.dst and sheaf.gpd.arrow_ids != functor.dst.arrow_ids:
        raise SheafError("sheaf does not live on the functor's target")
    g = functor.src
    dims = {o: sheaf.dims[functor.on_obj(o)] for o in g.objects}
    act = {a: sheaf.act[functor.on_arrow_id(a)] for a in g.arrow_ids}
    return GSheaf(g, dims, act, check=check)


def restrict_sheaf(sheaf, objects, subgpd=None, check=True):
    """The restriction to the full subgroupoid on the given objects."""
    sub = sheaf.gpd.full_subgroupoid(objects) if subgpd is None else subgpd
    dims = {o: sheaf.dims[o] for o in sub.objects}
    act = {a: sheaf.act[a] for a in sub.arrow_ids}
    return GSheaf(sub, dims, act, check=check)


def gamma_c(sheaf):
    """Compactly supported sections: the ordered direct sum of all stalks."""
    g = sheaf.gpd
    return BlockBasis([(i, sheaf.dims[g.objects[i]])
                       for i in range(g.n_objects)])


# ---------------------------------------------------------------------------
# bar complex and groupoid homology
# ---------------------------------------------------------------------------

def bar_basis(sheaf, n):
    """Degree-n bar space: one block per composable n-string, carrying the
    stalk at the target of its first arrow (objects themselves at n=0)."""
    g = sheaf.gpd
    if n == 0:
        return gamma_c(sheaf)
    return BlockBasis([(s, sheaf.dims[g.tgt_obj(s[0])]) for s in g.nerve(n)])


def bar_complex(sheaf, window=5, check=True):
    """The bar complex of a sheaf through degree ``window``.

    d = sum_i (-1)^i d_i where d_0 acts by the first arrow, middle faces
    compose adjacent arrows and the last face drops the final arrow.
    Homology is reliable in degrees <= window - 1.
    """
    g = sheaf.gpd
    spaces = {n: bar_basis(sheaf, n) for n in range(window + 1)}
    diffs = {}
    for n in range(1, window + 1):
        src, dst = spaces[n], spaces[n - 1]
        items = []
        for bp, s in enumerate(src.keys):
            dim = src.dims[bp]
            if dim == 0:
                continue
            ident = _small_id(dim)
            if n == 1:
                a = s[0]
                items.append((bp, dst.index[g.src[a]], _small_of(sheaf.act_of(a))))
                items.append((bp, dst.index[g.tgt[a]], _small_scale(ident, -1)))
                continue
            items.append((bp, dst.index[s[1:]], _small_of(sheaf.act_of(s[0]))))
            sign = -1
            for i in range(1, n):
                merged = s[:i - 1] + (g.compose(s[i - 1], s[i]),) + s[i + 1:]
                blk = ident if sign == 1 else _small_scale(ident, -1)
                items.append((bp, dst.index[merged], blk))
                sign = -sign
            blk = ident if sign == 1 else _small_scale(ident, -1)
            items.append((bp, dst.index[s[:-1]], blk))
        diffs[n] = BlockMap.from_terms(src, dst, items)
    return ChainComplex(spaces, diffs, truncated=True, check=check)


def groupoid_homology(sheaf, window=5):
    """Betti numbers of the groupoid with sheaf coefficients, degrees
    0 .. window-1."""
    return bar_complex(sheaf, window).betti_list()


def _bar_functor_components(functor, src_gpd, src_cc, dst_gpd, dst_cc):
    """Blockwise components of the chain map of bar complexes induced by a
    functor whose pulled-back stalks match the downstairs stalks."""
    comps = {}
    hi = min(src_cc.hi, dst_cc.hi)
    for n in range(hi + 1):
        src, dst = src_cc.bases[n], dst_cc.bases[n]
        items = []
        for bp, key in enumerate(src.keys):
            dim = src.dims[bp]
            if dim == 0:
                continue
            if n == 0:
                obj = functor.on_obj(src_gpd.objects[key])
                dkey = dst_gpd.obj_index[obj]
            else:
                dkey = tuple(dst_gpd.index[functor.on_arrow_id(src_gpd.aid(a))]
                             for a in key)
            if dim != dst.dims[dst.index[dkey]]:
                raise SheafError("stalk dimensions disagree along the functor")
            items.append((bp, dst.index[dkey], _small_id(dim)))
        comps[n] = BlockMap.from_terms(src, dst, items)
    return comps


def bar_chain_map(functor, sheaf, window=5, check=True):
    """The chain map bar(src, pullback sheaf) -> bar(dst, sheaf)."""
    pulled = pullback_sheaf(functor, sheaf, check=False)
    src_cc = bar_complex(pulled, window, check=check)
    dst_cc = bar_complex(sheaf, window, check=check)
    comps = _bar_functor_components(functor, functor.src, src_cc,
                                    functor.dst, dst_cc)
    return ChainMap(src_cc, dst_cc, comps, check=check)


# ---------------------------------------------------------------------------
# coinvariant pushforward along an elliptic localization
# ---------------------------------------------------------------------------

class Pushforward:
    """The data of a coinvariant pushforward: the localized groupoid, the
    arrow projection, the descended sheaf and the per-object projectors
    A_c -> A_c / im(1 - theta_c)."""

    def __init__(self, local, proj, sheaf, projectors):
        self.local = local
        self.proj = proj
        self.sheaf = sheaf
        self.projectors = projectors


def coinvariant_pushforward(cyclic, sheaf, check=True):
    """Descend a sheaf on a cyclic groupoid to its elliptic localization.

    The stalk at c becomes A_c / im(1 - act(theta_c)); naturality of theta
    makes every arrow's action descend, and the descended matrix is
    checked to be independent of the orbit representative.
    """
    g = cyclic.gpd
    if sheaf.gpd is not g and sheaf.gpd.arrow_ids != g.arrow_ids:
        raise SheafError("sheaf does not live on the cyclic groupoid")
    local, proj = cyclic.localize()
    dens = {}
    projectors = {}
    dims = {}
    for o in g.objects:
        t = sheaf.act[g.aid(cyclic.theta[o])]
        m = Mat.identity(sheaf.dims[o]) - t
        dens[o] = m.image()
        dims[o] = sheaf.dims[o] - dens[o].dim
        projectors[o] = dens[o].quotient_projector()
    act = {}
    for i in range(g.n_arrows):
        a = g.aid(i)
        induced = restrict_to_quotient(sheaf.act[a],
                                       dens[g.tgt_obj(i)],
                                       dens[g.src_obj(i)])
        r = proj[a]
        prev = act.setdefault(r, induced)
        if check and prev != induced:
            raise SheafError(
                f"descended action differs across the orbit of {r!r}")
    down = GSheaf(local, dims, act, check=check)
    return Pushforward(local, proj, down, projectors)


# ---------------------------------------------------------------------------
# random sheaves (coset permutation representations, transported and
# conjugated by random invertible rational matrices)
# ---------------------------------------------------------------------------

def random_gsheaf(gpd, seed=0, max_dim=3):
    """A deterministic pseudo-random sheaf on a groupoid.

    Per component, the isotropy group at the representative acts on the
    left cosets of a random cyclic subgroup (index capped by max_dim),
    and the permutation matrices are transported along the skeleton and
    conjugated by random invertible rational matrices.  Each stalk is a
    transitive permutation representation in disguise, so degree-0
    homology contributes exactly one dimension per component.
    """
    rng = random.Random(seed)
    sk = skeleton(gpd)
    dims = {}
    act = {}
    comp_data = {}
    for comp in sk.components:
        rep = comp[0]
        ri = gpd.obj_index[rep]
        elements = [a for a in range(gpd.n_arrows)
                    if gpd.src[a] == ri and gpd.tgt[a] == ri]
        for _ in range(8):
            lam = rng.choice(elements)
            order = gpd.loop_order(lam)
            sub = {gpd.loop_power(lam, k) for k in range(order)}
            if len(elements) // len(sub) <= max_dim:
                break
        else:
            sub = set(elements)
        cosets = sorted({frozenset(gpd.compose(x, h) for h in sub)
                         for x in elements}, key=min)
        cindex = {}
        for pos, cs in enumerate(cosets):
            for x in cs:
                cindex[x] = pos
        m = len(cosets)
        perm = {}
        for lam in elements:
            entries = []
            inv = gpd.inv[lam]
            for j, cs in enumerate(cosets):
                entries.append((cindex[gpd.compose(inv, min(cs))], j, 1))
            perm[lam] = Mat.from_entries(m, m, entries)
        q = {o: random_invertible(rng, m) for o in comp}
        qinv = {o: inverse(q[o]) for o in comp}
        for o in comp:
            dims[o] = m
        comp_data[rep] = (perm, q, qinv)
    for i in range(gpd.n_arrows):
        c, d = gpd.src_obj(i), gpd.tgt_obj(i)
        rep = sk.rep_of(c)
        perm, q, qinv = comp_data[rep]
        p_c = gpd.index[sk.transport[c]]
        p_d = gpd.index[sk.transport[d]]
        lam = gpd.compose(gpd.inv[p_d], gpd.compose(i, p_c))
        act[gpd.aid(i)] = q[c] @ perm[lam] @ qinv[d]
    return GSheaf(gpd, dims, act)


# ---------------------------------------------------------------------------
# cyclic sheaves
# ---------------------------------------------------------------------------

class ThetaCyclicSheaf:
    """A tower of sheaves with equivariant simplicial and cyclic structure.

    ``levels[n]`` is a GSheaf on ``cyclic.gpd`` for 0 <= n <= window;
    ``face[(n, i)]``, ``degen[(n, i)]`` and ``cyc[n]`` map objects to the
    stalkwise structure matrices.  Validation checks equivariance, the
    simplicial and cyclic operator identities stalk by stalk, and that
    the (n+1)-st power of the degree-n cyclic operator is the action of
    theta at each object.
    """

    def __init__(self, cyclic, levels, face, degen, cyc, check=True):
        self.cyclic = cyclic
        self.gpd = cyclic.gpd
        self.levels = list(levels)
        self.window = len(self.levels) - 1
        self.face = dict(face)
        self.degen = dict(degen)
        self.cyc = dict(cyc)
        if check:
            self._validate()

    def level(self, n):
        return self.levels[n]

    def face_mat(self, n, i, obj):
        return self.face[(n, i)][obj]

    def degen_mat(self, n, i, obj):
        return self.degen[(n, i)][obj]

    def cyc_mat(self, n, obj):
        return self.cyc[n][obj]

    def stalk_complex(self, obj, check=True):
        """The stalkwise simplicial chain complex at one object, with
        d_n = sum_i (-1)^i face(n, i)."""
        spaces = {n: self.levels[n].dims[obj] for n in range(self.window + 1)}
        diffs = {}
        for n in range(1, self.window + 1):
            d = Mat.zero(spaces[n - 1], spaces[n])
            sign = 1
            for i in range(n + 1):
                f = self.face[(n, i)][obj]
                d = d + (f if sign == 1 else -f)
                sign = -sign
            diffs[n] = d
        return ChainComplex(spaces, diffs, truncated=True, check=check)

    # -- validation -------------------------------------------------------

    def _families(self):
        w = self.window
        for n in range(1, w + 1):
            for i in range(n + 1):
                yield ("face", (n, i), self.face.get((n, i)), n, n - 1)
        for n in range(w):
            for i in range(n + 1):
                yield ("degen", (n, i), self.degen.get((n, i)), n, n + 1)
        for n in range(w + 1):
            yield ("cyc", n, self.cyc.get(n), n, n)

    def _validate(self):
        g = self.gpd
        w = self.window
        for lv in self.levels:
            if lv.gpd is not g and lv.gpd.arrow_ids != g.arrow_ids:
                raise SheafError("level sheaf lives on the wrong groupoid")
        for kind, key, fam, n_src, n_dst in self._families():
            if fam is None:
                raise SheafError(f"missing {kind} family {key!r}")
            src_l, dst_l = self.levels[n_src], self.levels[n_dst]
            for o in g.objects:
                m = fam.get(o)
                if m is None or (m.rows, m.cols) != (dst_l.dims[o], src_l.dims[o]):
                    raise SheafError(f"{kind} family {key!r} malformed at {o!r}")
            for i in range(g.n_arrows):
                c, d = g.src_obj(i), g.tgt_obj(i)
                a = g.aid(i)
                if fam[c] @ src_l.act[a] != dst_l.act[a] @ fam[d]:
                    raise SheafError(
                        f"{kind} family {key!r} not equivariant along {a!r}")
        for o in g.objects:
            self._validate_stalk(o)

    def _validate_stalk(self, o):
        w = self.window

        def fc(n, i):
            return self.face[(n, i)][o]

        def sg(n, i):
            return self.degen[(n, i)][o]

        def tt(n):
            return self.cyc[n][o]

        def err(msg):
            raise SheafError(f"{msg} fails stalkwise at {o!r}")
        for n in range(2, w + 1):
            for j in range(1, n + 1):
                for i in range(j):
                    if fc(n - 1, i) @ fc(n, j) != fc(n - 1, j - 1) @ fc(n, i):
                        err(f"face identity (n={n}, i={i}, j={j})")
        for n in range(w - 1):
            for j in range(n + 1):
                for i in range(j + 1):
                    if sg(n + 1, i) @ sg(n, j) != sg(n + 1, j + 1) @ sg(n, i):
                        err(f"degeneracy identity (n={n}, i={i}, j={j})")
        for n in range(w):
            dim = self.levels[n].dims[o]
            for j in range(n + 1):
                for i in range(n + 2):
                    m = fc(n + 1, i) @ sg(n, j)
                    if i == j or i == j + 1:
                        ok = m == Mat.identity(dim)
                    elif i < j:
                        ok = m == sg(n - 1, j - 1) @ fc(n, i)
                    else:
                        ok = m == sg(n - 1, j) @ fc(n, i - 1)
                    if not ok:
                        err(f"mixed identity (n={n}, i={i}, j={j})")
        for n in range(1, w + 1):
            if fc(n, 0) @ tt(n) != fc(n, n):
                err(f"cyclic face identity (n={n}, i=0)")
            for i in range(1, n + 1):
                if fc(n, i) @ tt(n) != tt(n - 1) @ fc(n, i - 1):
                    err(f"cyclic face identity (n={n}, i={i})")
        for n in range(w):
            if sg(n, 0) @ tt(n) != tt(n + 1) @ tt(n + 1) @ sg(n, n):
                err(f"cyclic degeneracy identity (n={n}, i=0)")
            for i in range(1, n + 1):
                if sg(n, i) @ tt(n) != tt(n + 1) @ sg(n, i - 1):
                    err(f"cyclic degeneracy identity (n={n}, i={i})")
        g = self.gpd
        for n in range(w + 1):
            power = Mat.identity(self.levels[n].dims[o])
            for _ in range(n + 1):
                power = tt(n) @ power
            want = self.levels[n].act[g.aid(self.cyclic.theta[o])]
            if power != want:
                err(f"cyclic power rule (n={n})")


def standard_cyclic_sheaf(gpd, window=3, check=True):
    """The cyclic sheaf of based composable strings.

    The degree-n stalk at c has basis the strings (g_0, ..., g_n) with
    t(g_0) = c and consecutive arrows composable; an arrow h: b -> c acts
    by (g_0, ...) -> (h^{-1}.g_0, ...).  Faces compose adjacent arrows or
    drop the last one, degeneracies insert units, and the cyclic operator
    sends (g_0, ..., g_n) to (g_0.w, w^{-1}, g_1, ..., g_{n-1}) for
    w = g_1 ... g_n.  Each stalk complex is a resolution of the ground
    field.  The attribute ``stalk_keys[(n, c)]`` lists the string bases.
    """
    cyclic = CyclicGroupoid(
        gpd, {o: gpd.aid(gpd.unit_at(o)) for o in gpd.objects})
    keys = {}
    for o in gpd.objects:
        oi = gpd.obj_index[o]
        strings = [(a,) for a in gpd.arrows_into(oi)]
        keys[(0, o)] = sorted(strings)
        for n in range(1, window + 1):
            strings = [s + (a,) for s in strings
                       for a in gpd.arrows_into(gpd.src[s[-1]])]
            keys[(n, o)] = sorted(strings)
    index = {k: {s: p for p, s in enumerate(v)} for k, v in keys.items()}

    def perm_mat(n_src, n_dst, obj_src, obj_dst, image):
        rows = len(keys[(n_dst, obj_dst)])
        cols = len(keys[(n_src, obj_src)])
        entries = [(index[(n_dst, obj_dst)][image(s)], j, 1)
                   for j, s in enumerate(keys[(n_src, obj_src)])]
        return Mat.from_entries(rows, cols, entries)

    levels = []
    for n in range(window + 1):
        dims = {o: len(keys[(n, o)]) for o in gpd.objects}
        act = {}
        for i in range(gpd.n_arrows):
            b, c = gpd.src_obj(i), gpd.tgt_obj(i)
            hinv = gpd.inv[i]
            act[gpd.aid(i)] = perm_mat(
                n, n, c, b, lambda s: (gpd.compose(hinv, s[0]),) + s[1:])
        levels.append(GSheaf(gpd, dims, act, check=False))
    face = {}
    degen = {}
    cyc = {}
    for n in range(1, window + 1):
        for i in range(n + 1):
            if i < n:
                img = lambda s, i=i: (s[:i] + (gpd.compose(s[i], s[i + 1]),)
                                      + s[i + 2:])
            else:
                img = lambda s: s[:-1]
            face[(n, i)] = {o: perm_mat(n, n - 1, o, o, img)
                            for o in gpd.objects}
    for n in range(window):
        for i in range(n + 1):
            img = lambda s, i=i: (s[:i + 1] + (gpd.unit[gpd.src[s[i]]],)
                                  + s[i + 1:])
            degen[(n, i)] = {o: perm_mat(n, n + 1, o, o, img)
                             for o in gpd.objects}
    for n in range(window + 1):
        if n == 0:
            img = lambda s: s
        else:
            def img(s, n=n):
                w = gpd.compose_many(list(s[1:]))
                return (gpd.compose(s[0], w), gpd.inv[w]) + s[1:n]
        cyc[n] = {o: perm_mat(n, n, o, o, img) for o in gpd.objects}
    tcs = ThetaCyclicSheaf(cyclic, levels, face, degen, cyc, check=check)
    tcs.stalk_keys = keys
    return tcs


# ---------------------------------------------------------------------------
# derived pushforward along a functor, via comma groupoids
# ---------------------------------------------------------------------------

def comma_projection(comma):
    """The forgetful functor d/phi -> G, (c, h) -> c."""
    omap = {(c, hid): c for (c, hid) in comma.objects}
    amap = {aid: g for aid, (g, hid) in comma.parts.items()}
    return Functor(comma, comma.functor.src, omap, amap, check=False)


class DerivedPushforward:
    """Derived pushforward data for a functor phi: G -> H and a sheaf S.

    ``derived[q]`` is the sheaf on H with stalk H_q(d/phi; S pulled back)
    at d, and action induced on homology by precomposition.  ``e2`` holds
    dim H_p(H; derived[q]); ``abutment`` is the homology of G with S
    directly.  When every derived sheaf above degree 0 vanishes, the
    composite rule says the q = 0 row must reproduce the abutment, and
    ``degenerate_match`` records whether it does.
    """

    def __init__(self, derived, e2, abutment, degenerate, degenerate_match):
        self.derived = derived
        self.e2 = e2
        self.abutment = abutment
        self.degenerate = degenerate
        self.degenerate_match = degenerate_match


def derived_pushforward(phi, sheaf, window=4, q_max=None, check=True):
    """Compute the derived pushforward sheaves of ``sheaf`` along ``phi``
    and the double-grading dims they produce over the target."""
    H = phi.dst
    if q_max is None:
        q_max = window - 1
    if q_max > window - 1:
        raise ValueError("q_max exceeds the reliable window")
    commas = {}
    complexes = {}
    for d in H.objects:
        cm = comma_groupoid(phi, d)
        commas[d] = cm
        pulled = pullback_sheaf(comma_projection(cm), sheaf, check=False)
        complexes[d] = bar_complex(pulled, window, check=check)
    induced = {}
    for i in range(H.n_arrows):
        k = H.aid(i)
        f_k = comma_precompose(phi, k)
        up = commas[H.tgt_obj(i)]
        low = commas[H.src_obj(i)]
        comps = _bar_functor_components(f_k, up, complexes[H.tgt_obj(i)],
                                        low, complexes[H.src_obj(i)])
        cmap = ChainMap(complexes[H.tgt_obj(i)], complexes[H.src_obj(i)],
                        comps, check=check)
        induced[k] = cmap
    derived = []
    for q in range(q_max + 1):
        dims = {d: complexes[d].betti(q) for d in H.objects}
        act = {k: cm.induced(q) for k, cm in induced.items()}
        derived.append(GSheaf(H, dims, act, check=check))
    e2 = {}
    for q, lq in enumerate(derived):
        row = groupoid_homology(lq, window)
        for p, v in enumerate(row):
            e2[(p, q)] = v
    abutment = groupoid_homology(sheaf, window)
    degenerate = all(lq.total_dim() == 0 for lq in derived[1:])
    match = None
    if degenerate:
        match = all(e2[(p, 0)] == abutment[p] for p in range(window))
    return DerivedPushforward(derived, e2, abutment, degenerate, match)
