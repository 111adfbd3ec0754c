"""Tests for sheaves on groupoids, bar homology and cyclic sheaves."""

from fractions import Fraction

import pytest

from artifact.exactla import Mat
from artifact.groupoid import (
    ActionGroupoid,
    CyclicGroupoid,
    Functor,
    GAction,
    cyclic_group,
    pair_groupoid,
    symmetric_group,
    trivial_groupoid,
)
from artifact.gsheaf import (
    GSheaf,
    SheafError,
    bar_basis,
    bar_chain_map,
    bar_complex,
    coinvariant_pushforward,
    constant_sheaf,
    derived_pushforward,
    groupoid_homology,
    pullback_sheaf,
    random_gsheaf,
    restrict_sheaf,
    standard_cyclic_sheaf,
)


def swap_groupoid():
    g = cyclic_group(2)
    table = {("x0", "c0"): "x0", ("x1", "c0"): "x1",
             ("x0", "c1"): "x1", ("x1", "c1"): "x0"}
    return ActionGroupoid(GAction(g, ["x0", "x1"],
                                  {"x0": "*", "x1": "*"}, table))


def sign_sheaf_z2():
    z2 = cyclic_group(2)
    return GSheaf(z2, {"*": 1},
                  {"c0": Mat.identity(1), "c1": Mat.from_dense([[-1]])})


def swap_stalk_sheaf_z2():
    z2 = cyclic_group(2)
    swap = Mat.from_dense([[0, 1], [1, 0]])
    return GSheaf(z2, {"*": 2}, {"c0": Mat.identity(2), "c1": swap})


# -- sheaf validation ------------------------------------------------------

def test_sheaf_validation_rejects_nonfunctorial_action():
    z2 = cyclic_group(2)
    with pytest.raises(SheafError):
        GSheaf(z2, {"*": 1},
               {"c0": Mat.identity(1), "c1": Mat.from_dense([[2]])})


def test_sheaf_validation_rejects_bad_unit():
    z2 = cyclic_group(2)
    with pytest.raises(SheafError):
        GSheaf(z2, {"*": 1},
               {"c0": Mat.from_dense([[-1]]), "c1": Mat.identity(1)})


def test_sheaf_validation_rejects_shape_mismatch():
    z2 = cyclic_group(2)
    with pytest.raises(SheafError):
        GSheaf(z2, {"*": 2},
               {"c0": Mat.identity(2), "c1": Mat.identity(1)})


# -- bar complex -------------------------------------------------------------

def test_bar_basis_sizes():
    z2 = cyclic_group(2)
    cc = bar_complex(constant_sheaf(z2), window=5)
    assert [cc.dim(n) for n in range(6)] == [1, 2, 4, 8, 16, 32]


def test_bar_differential_ranks_z2():
    # hand-checked echelon ranks of the bar differentials with trivial
    # rational coefficients
    cc = bar_complex(constant_sheaf(cyclic_group(2)), window=5)
    assert [cc.rank_d(n) for n in range(1, 6)] == [0, 2, 2, 6, 10]


def test_homology_trivial_coefficients_z2():
    assert groupoid_homology(constant_sheaf(cyclic_group(2)), window=5) == \
        [1, 0, 0, 0, 0]


def test_homology_sign_coefficients_z2():
    # coinvariants are killed by a + a = 0
    assert groupoid_homology(sign_sheaf_z2(), window=5) == [0, 0, 0, 0, 0]


def test_homology_swap_coefficients_z2():
    # the 2-dimensional permutation stalk has 1-dimensional coinvariants
    assert groupoid_homology(swap_stalk_sheaf_z2(), window=5) == \
        [1, 0, 0, 0, 0]


def test_homology_pair_groupoid():
    p = pair_groupoid(["a", "b"])
    assert groupoid_homology(constant_sheaf(p), window=4) == [1, 0, 0, 0]


def test_homology_s3_trivial_coefficients():
    s3 = symmetric_group(3)
    assert groupoid_homology(constant_sheaf(s3), window=3) == [1, 0, 0]


def test_fractional_stalk_sheaf():
    z2 = cyclic_group(2)
    q = Mat.from_dense([[Fraction(1, 2), 1], [0, 1]])
    from artifact.exactla import inverse
    m = q @ Mat.from_dense([[0, 1], [1, 0]]) @ inverse(q)
    sheaf = GSheaf(z2, {"*": 2}, {"c0": Mat.identity(2), "c1": m})
    assert groupoid_homology(sheaf, window=4) == [1, 0, 0, 0]


@pytest.mark.parametrize("maker,seed", [
    (lambda: cyclic_group(2), 1),
    (lambda: cyclic_group(3), 2),
    (lambda: cyclic_group(4), 3),
    (lambda: symmetric_group(3), 4),
    (lambda: swap_groupoid(), 5),
    (lambda: pair_groupoid(["a", "b", "c"]), 6),
])
def test_random_sheaf_homology_counts_components(maker, seed):
    # random sheaves are transported transitive permutation stalks, so
    # degree 0 sees one dimension per component and higher degrees vanish
    g = maker()
    sheaf = random_gsheaf(g, seed=seed)
    n_comp = len(g.components())
    assert groupoid_homology(sheaf, window=3) == [n_comp, 0, 0]


def test_random_sheaf_is_deterministic():
    g = symmetric_group(3)
    a = random_gsheaf(g, seed=11)
    b = random_gsheaf(g, seed=11)
    assert all(a.act[k] == b.act[k] for k in a.act)


# -- pullback, restriction, chain maps ---------------------------------------

def test_pullback_along_inclusion():
    ag = swap_groupoid()
    sheaf = random_gsheaf(ag, seed=7)
    sub = ag.full_subgroupoid(["x0"])
    inc = Functor.inclusion(sub, ag)
    pulled = pullback_sheaf(inc, sheaf)
    assert pulled.dims["x0"] == sheaf.dims["x0"]
    restricted = restrict_sheaf(sheaf, ["x0"])
    assert all(pulled.act[a] == restricted.act[a] for a in sub.arrow_ids)


def test_bar_chain_map_of_skeleton_inclusion():
    p = pair_groupoid(["a", "b", "c"])
    sub = p.full_subgroupoid(["a"])
    inc = Functor.inclusion(sub, p)
    cmap = bar_chain_map(inc, constant_sheaf(p), window=3)
    ind = cmap.induced(0)
    assert (ind.rows, ind.cols) == (1, 1)
    assert ind.rank() == 1  # equivalence of groupoids on H_0


# -- coinvariant pushforward --------------------------------------------------

def test_pushforward_constant_sheaf():
    z2 = cyclic_group(2)
    cg = CyclicGroupoid(z2, {"*": "c1"})
    push = coinvariant_pushforward(cg, constant_sheaf(z2))
    assert push.local.n_arrows == 1
    assert push.sheaf.dims["*"] == 1


def test_pushforward_sign_sheaf_vanishes():
    z2 = cyclic_group(2)
    cg = CyclicGroupoid(z2, {"*": "c1"})
    push = coinvariant_pushforward(cg, sign_sheaf_z2())
    assert push.sheaf.dims["*"] == 0


def test_pushforward_swap_sheaf():
    z2 = cyclic_group(2)
    cg = CyclicGroupoid(z2, {"*": "c1"})
    push = coinvariant_pushforward(cg, swap_stalk_sheaf_z2())
    assert push.sheaf.dims["*"] == 1
    # the projector intertwines the upstairs and descended actions
    p = push.projectors["*"]
    down = push.sheaf.act[push.proj["c1"]]
    up = swap_stalk_sheaf_z2().act["c1"]
    assert p @ up == down @ p


def test_pushforward_descends_sign_through_z4():
    z4 = cyclic_group(4)
    cg = CyclicGroupoid(z4, {"*": "c2"})
    sheaf = GSheaf(z4, {"*": 1}, {
        "c0": Mat.identity(1), "c1": Mat.from_dense([[-1]]),
        "c2": Mat.identity(1), "c3": Mat.from_dense([[-1]])})
    push = coinvariant_pushforward(cg, sheaf)
    assert push.local.n_arrows == 2
    assert push.sheaf.dims["*"] == 1
    assert push.sheaf.act[push.proj["c1"]] == Mat.from_dense([[-1]])
    assert groupoid_homology(push.sheaf, window=3) == [0, 0, 0]


# -- cyclic sheaves ------------------------------------------------------------

def test_standard_cyclic_sheaf_z2():
    tcs = standard_cyclic_sheaf(cyclic_group(2), window=4)
    assert [lv.dims["*"] for lv in tcs.levels] == [2, 4, 8, 16, 32]
    assert tcs.stalk_complex("*").betti_list() == [1, 0, 0, 0]


def test_standard_cyclic_sheaf_on_action_groupoid():
    tcs = standard_cyclic_sheaf(swap_groupoid(), window=3)
    for o in ("x0", "x1"):
        assert [lv.dims[o] for lv in tcs.levels] == [2, 4, 8, 16]
        assert tcs.stalk_complex(o).betti_list() == [1, 0, 0]


def test_standard_cyclic_sheaf_s3_validates():
    tcs = standard_cyclic_sheaf(symmetric_group(3), window=2)
    assert [lv.dims["*"] for lv in tcs.levels] == [6, 36, 216]
    assert tcs.stalk_complex("*").betti_list() == [1, 0]


def test_cyclic_sheaf_validation_catches_broken_operator():
    tcs = standard_cyclic_sheaf(cyclic_group(2), window=2)
    from artifact.gsheaf import ThetaCyclicSheaf
    bad_cyc = dict(tcs.cyc)
    bad_cyc[1] = {"*": Mat.identity(4)}  # wrong rotation
    with pytest.raises(SheafError):
        ThetaCyclicSheaf(tcs.cyclic, tcs.levels, tcs.face, tcs.degen, bad_cyc)


# -- derived pushforward -------------------------------------------------------

def test_derived_pushforward_of_collapse():
    z2 = cyclic_group(2)
    t = trivial_groupoid()
    phi = Functor(z2, t, {"*": "*"}, {"c0": "c0", "c1": "c0"})
    res = derived_pushforward(phi, constant_sheaf(z2), window=3)
    assert res.derived[0].dims["*"] == 1
    assert all(lq.total_dim() == 0 for lq in res.derived[1:])
    assert res.degenerate and res.degenerate_match
    assert res.abutment == [1, 0, 0]


def test_derived_pushforward_of_action_projection():
    ag = swap_groupoid()
    z2 = cyclic_group(2)
    omap = {"x0": "*", "x1": "*"}
    amap = {a: a.split("|")[1] for a in ag.arrow_ids}
    phi = Functor(ag, z2, omap, amap)
    res = derived_pushforward(phi, constant_sheaf(ag), window=3)
    # the comma fiber splits into two contractible pieces
    assert res.derived[0].dims["*"] == 2
    assert res.degenerate and res.degenerate_match
    assert res.abutment == [1, 0, 0]
    assert res.e2[(0, 0)] == 1


def test_derived_pushforward_of_identity():
    s3 = symmetric_group(3)
    res = derived_pushforward(Functor.identity(s3), constant_sheaf(s3),
                              window=3)
    assert res.derived[0].dims["*"] == 1
    assert res.degenerate and res.degenerate_match


def test_bar_basis_block_keys_are_nerve_strings():
    z3 = cyclic_group(3)
    basis = bar_basis(constant_sheaf(z3), 2)
    assert len(basis.keys) == 9
    assert all(len(k) == 2 for k in basis.keys)
