"""Tests for cyclic modules, Hochschild/cyclic homology and the SBI tower.

Expected values are derived independently of the implementation:
semisimple algebras have vanishing higher Hochschild homology and
HH_0 = A/[A, A] (computable by brute force from the multiplication
table), the ground field has the classical period-two cyclic homology,
and the operator identities on one-dimensional modules reduce to signed
integer arithmetic that is worked out by hand in the comments.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.cyclic import (
    CyclicError,
    CyclicModule,
    algebra_cyclic_module,
    conjugate_cyclic_module,
    diagonal_cyclic,
    ez_diagonal,
    ground_field_module,
    hc,
    hc_via_cyclic_bicomplex,
    hh,
    hp,
    mixed,
    sbi,
    tensor_bicyclic,
)
from artifact.exactla import IntEchelonTable, Mat
from artifact.groupoid import (
    CyclicGroupoid,
    GroupoidError,
    cyclic_group,
    symmetric_group,
    trivial_groupoid,
)
from artifact.gsheaf import standard_cyclic_sheaf
from artifact.homalg import WindowError


class GroupAlgebra:
    """The convolution algebra of a finite groupoid on the arrow basis."""

    def __init__(self, gpd):
        self.gpd = gpd
        self.dim = gpd.n_arrows
        self.unit = {gpd.unit[k]: 1 for k in range(gpd.n_objects)}

    def mul_basis(self, i, j):
        try:
            return {self.gpd.compose(i, j): 1}
        except GroupoidError:
            return {}


class DiagonalAlgebra:
    """Q x Q with the coordinatewise product."""

    dim = 2
    unit = {0: 1, 1: 1}

    def mul_basis(self, i, j):
        return {i: 1} if i == j else {}


def dense(op):
    m = op if isinstance(op, Mat) else op.to_mat()
    return m.to_dense()


def commutator_quotient_dim(alg):
    """dim A/[A, A] straight from the multiplication table."""
    table = IntEchelonTable()
    for i in range(alg.dim):
        for j in range(alg.dim):
            col = dict(alg.mul_basis(i, j))
            for k, c in alg.mul_basis(j, i).items():
                col[k] = col.get(k, 0) - c
            table.add({k: c for k, c in col.items() if c})
    return alg.dim - table.dim


# -- ground field --------------------------------------------------------------


def test_ground_field_dimensions_and_homology():
    M = ground_field_module(7)
    assert M.dims_list() == [1] * 8
    assert hh(M) == [1, 0, 0, 0, 0, 0, 0]
    assert hc(M) == [1, 0, 1, 0, 1, 0, 1]


def test_ground_field_operators_by_hand():
    M = ground_field_module(5)
    # b_n = sum (-1)^i over n+1 identity faces: zero in odd degrees,
    # identity in positive even ones.
    assert dense(M.op_b(1)) == [[0]]
    assert dense(M.op_b(2)) == [[1]]
    assert dense(M.op_b(3)) == [[0]]
    # tau_n = (-1)^n, so N_n = n+1 in even degrees and 0 in odd ones,
    # s_{-1} = 1, and B_n = (1 - tau_{n+1}) s_{-1} N_n = 2(n+1) or 0.
    assert dense(M.op_B(0)) == [[2]]
    assert M.op_B(1).is_zero()
    assert dense(M.op_B(2)) == [[6]]
    assert M.op_B(3).is_zero()
    assert dense(M.op_B(4)) == [[10]]
    # N_1 = 1 + tau_1 = 0 kills degree one.
    assert M.op_norm(1).is_zero()


def test_ground_field_sbi_and_periodicity():
    M = ground_field_module(7)
    d = sbi(M)
    assert d.hh == [1, 0, 0, 0, 0, 0, 0]
    assert d.hc == [1, 0, 1, 0, 1, 0, 1]
    assert d.exact
    assert all(v == 0 for node in d.defects.values() for v in node.values())
    # I_0 is an isomorphism and S: HC_2 -> HC_0 is one too.
    assert d.I[0].rank() == 1
    assert d.S[2].rank() == 1
    # B[0]: HC_0 -> HH_1 lands in a zero space.
    assert (d.B[0].rows, d.B[0].cols) == (0, 1)
    per = hp(M)
    assert per[0]["dim"] == 1 and per[0]["stabilized"]
    assert per[1]["dim"] == 0 and per[1]["stabilized"]
    assert sbi(M) is d  # cached


# -- group algebras ------------------------------------------------------------


@pytest.mark.parametrize("order,window", [(2, 6), (3, 6), (4, 4)])
def test_cyclic_group_algebra_homology(order, window):
    # Q[Z/n] is commutative and semisimple over Q: HH_0 = n, higher
    # Hochschild homology vanishes, cyclic homology repeats with period 2.
    A = algebra_cyclic_module(GroupAlgebra(cyclic_group(order)),
                              window=window)
    assert A.dims_list() == [order ** (n + 1) for n in range(window + 1)]
    expect_hh = [order] + [0] * (window - 1)
    expect_hc = [order if n % 2 == 0 else 0 for n in range(window)]
    assert hh(A) == expect_hh
    assert hc(A) == expect_hc


def test_symmetric_group_algebra_hochschild():
    # Q[S_3] is semisimple with three irreducible blocks, so HH_0 = 3
    # (one class function per conjugacy class) and HH_{>0} = 0; the
    # commutator quotient computed from the raw multiplication table
    # must agree in degree zero.
    alg = GroupAlgebra(symmetric_group(3))
    assert commutator_quotient_dim(alg) == 3
    A = algebra_cyclic_module(alg, window=3)
    assert hh(A) == [3, 0, 0]


def test_commutator_quotient_matches_hh0_for_cyclic_groups():
    for order in (2, 3, 4):
        alg = GroupAlgebra(cyclic_group(order))
        assert commutator_quotient_dim(alg) == order


def test_group_algebra_sbi_and_periodicity():
    A = algebra_cyclic_module(GroupAlgebra(cyclic_group(2)), window=6)
    d = sbi(A)
    assert d.hh == [2, 0, 0, 0, 0, 0]
    assert d.hc == [2, 0, 2, 0, 2, 0]
    assert d.exact
    per = hp(A)
    assert per[0]["dim"] == 2 and per[0]["stabilized"]
    assert per[1]["dim"] == 0 and per[1]["stabilized"]


def test_norm_operator_rank_on_group_algebra():
    # On X_1 = A tensor A for A = Q[Z/2], N_1 = 1 - swap has the
    # antisymmetric image: rank 1 on a 4-dimensional space.
    A = algebra_cyclic_module(GroupAlgebra(cyclic_group(2)), window=2)
    assert A.op_norm(1).rank() == 1


# -- two routes to cyclic homology ---------------------------------------------


@pytest.mark.parametrize("build", [
    lambda: ground_field_module(5),
    lambda: algebra_cyclic_module(GroupAlgebra(cyclic_group(2)), window=4),
    lambda: algebra_cyclic_module(GroupAlgebra(cyclic_group(3)), window=3),
])
def test_staircase_and_plane_bicomplex_agree(build):
    M = build()
    assert hc(M) == hc_via_cyclic_bicomplex(M)


# -- invariance under basis change ---------------------------------------------


def test_conjugated_module_has_same_homology():
    M = algebra_cyclic_module(GroupAlgebra(cyclic_group(2)), window=3)
    C = conjugate_cyclic_module(M, seed=7)
    assert C.dims_list() == M.dims_list()
    assert hh(C) == hh(M)
    assert hc(C) == hc(M)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_conjugated_ground_field_homology_is_invariant(seed):
    C = conjugate_cyclic_module(ground_field_module(4), seed=seed)
    assert hh(C) == [1, 0, 0, 0]
    assert hc(C) == [1, 0, 1, 0]


# -- fast and generic algebra assembly agree -----------------------------------


def test_fast_and_generic_algebra_paths_identical():
    alg = GroupAlgebra(cyclic_group(2))
    F = algebra_cyclic_module(alg, window=3, fast=True)
    G = algebra_cyclic_module(alg, window=3, fast=False)
    for n in range(1, 4):
        for i in range(n + 1):
            assert dense(F.face_op(n, i)) == dense(G.face_op(n, i))
    for n in range(3):
        for i in range(n + 1):
            assert dense(F.degen_op(n, i)) == dense(G.degen_op(n, i))
    for n in range(4):
        assert dense(F.cyc_op(n)) == dense(G.cyc_op(n))


# -- twisted modules -----------------------------------------------------------


def test_swap_twisted_module_has_order_two():
    swap = Mat.from_dense([[0, 1], [1, 0]])
    M = algebra_cyclic_module(DiagonalAlgebra(), alpha=swap, window=3)
    assert M.r == 2
    # t_1^{r(n+1)} = t_1^4 is the identity, but t_1^2 is not.
    t = M.cyc_op(1)
    t2 = t.then(t)
    t4 = t2.then(t2)
    assert (t4 - M.identity_op(1)).is_zero()
    assert not (t2 - M.identity_op(1)).is_zero()
    # every basis idempotent e_i is a twisted commutator
    # e_i e_i - alpha(e_i) e_i, so the twisted HH_0 vanishes.
    assert hh(M)[0] == 0
    with pytest.raises(CyclicError):
        mixed(M)


def test_alpha_validation():
    with pytest.raises(CyclicError):
        algebra_cyclic_module(DiagonalAlgebra(),
                              alpha=Mat.from_dense([[2, 0], [0, 1]]),
                              window=2)  # does not fix the unit
    with pytest.raises(CyclicError):
        algebra_cyclic_module(DiagonalAlgebra(),
                              alpha=Mat.from_dense([[1, 1], [0, 1]]),
                              window=2)  # not multiplicative
    with pytest.raises(CyclicError):
        algebra_cyclic_module(DiagonalAlgebra(),
                              alpha=Mat.from_dense([[1, 0]]),
                              window=2)  # not square


# -- groupoid diagonal modules -------------------------------------------------


def test_diagonal_module_of_trivial_groupoid_is_ground_field_like():
    g = trivial_groupoid()
    sheaf = standard_cyclic_sheaf(g, window=4)
    cg = CyclicGroupoid(g, {o: g.aid(g.unit_at(o)) for o in g.objects})
    M = diagonal_cyclic(cg, sheaf)
    assert M.dims_list() == [1] * 5
    assert hh(M) == [1, 0, 0, 0]


def test_diagonal_module_of_z2_computes_group_homology():
    # Each stalk complex of the string sheaf resolves the ground field,
    # so the diagonal module's Hochschild homology is the groupoid
    # homology of the point with Z/2 symmetry: Q in degree 0 only.
    g = cyclic_group(2)
    sheaf = standard_cyclic_sheaf(g, window=3)
    cg = CyclicGroupoid(g, {o: g.aid(g.unit_at(o)) for o in g.objects})
    M = diagonal_cyclic(cg, sheaf)
    # 2^n composable strings, each carrying a 2^{n+1}-dimensional stalk
    assert M.dims_list() == [2 ** (2 * n + 1) for n in range(4)]
    assert hh(M) == [1, 0, 0]


# -- tensor products and the shuffle comparison --------------------------------


def test_tensor_of_ground_fields_diagonal():
    gf = ground_field_module(4)
    bc = tensor_bicyclic(gf, gf)
    res = ez_diagonal(bc)
    assert res.hh_diagonal == [1, 0, 0, 0]
    assert res.h_total == [1, 0, 0, 0]
    assert res.agree


def test_tensor_square_of_group_algebra_diagonal():
    # A tensor A for A = Q[Z/2] is Q^4, so both routes give [4, 0, 0].
    A = algebra_cyclic_module(GroupAlgebra(cyclic_group(2)), window=3)
    res = ez_diagonal(tensor_bicyclic(A, A))
    assert res.hh_diagonal == [4, 0, 0]
    assert res.h_total == [4, 0, 0]
    assert res.agree


def test_tensor_window_guard():
    gf = ground_field_module(3)
    with pytest.raises(WindowError):
        tensor_bicyclic(gf, gf, window=5)


# -- validation and error channels ---------------------------------------------


def one_dim_module_data(window):
    one = Mat.identity(1)
    spaces = {n: 1 for n in range(window + 1)}
    face = {(n, i): one for n in range(1, window + 1) for i in range(n + 1)}
    degen = {(n, i): one for n in range(window) for i in range(n + 1)}
    cyc = {n: one for n in range(window + 1)}
    return spaces, face, degen, cyc


def test_broken_face_identity_rejected():
    spaces, face, degen, cyc = one_dim_module_data(2)
    face[(2, 1)] = Mat.from_dense([[-1]])
    with pytest.raises(CyclicError):
        CyclicModule(spaces, face, degen, cyc)


def test_broken_cyclic_compatibility_rejected():
    spaces, face, degen, cyc = one_dim_module_data(2)
    cyc[1] = Mat.from_dense([[-1]])
    with pytest.raises(CyclicError):
        CyclicModule(spaces, face, degen, cyc)


def test_bad_cyclicity_order_rejected():
    spaces, face, degen, cyc = one_dim_module_data(2)
    with pytest.raises(CyclicError):
        CyclicModule(spaces, face, degen, cyc, r=0)


def test_window_guards():
    with pytest.raises(WindowError):
        hh(ground_field_module(3), 3)  # top degree is truncated
    with pytest.raises(WindowError):
        sbi(ground_field_module(2))
    with pytest.raises(WindowError):
        hp(ground_field_module(5))
    with pytest.raises(CyclicError):
        hp(ground_field_module(6), parity=2)


def test_one_dimensional_algebra_matches_ground_field():
    class FieldAlgebra:
        dim = 1
        unit = {0: 1}

        def mul_basis(self, i, j):
            return {0: 1}

    A = algebra_cyclic_module(FieldAlgebra(), window=4)
    M = ground_field_module(4)
    assert hh(A) == hh(M)
    assert hc(A) == hc(M)


def test_homology_class_spaces_accessible_by_degree():
    M = algebra_cyclic_module(GroupAlgebra(cyclic_group(2)), window=3)
    h0 = hh(M, 0)
    assert h0.dim == 2
    assert len(h0.reps) == 2
    assert hc(M, 2).dim == 2
    # coordinates of a representative in itself are a unit vector
    assert h0.coords_of(h0.reps[0]) == {0: Fraction(1)}
