"""Tests for chain complexes, homology representatives and spectral sequences."""

import pytest

from artifact.exactla import BlockBasis, BlockMap, Mat, Subspace
from artifact.homalg import (
    ChainComplex,
    ChainMap,
    DoubleComplex,
    WindowError,
    check_exact_sequence,
    exactness_defect,
    snake_connecting,
)


def cc_from_dense(dims, dense_diffs, truncated=False):
    diffs = {n: Mat.from_dense(d) for n, d in dense_diffs.items()}
    return ChainComplex(dict(enumerate(dims)), diffs, truncated=truncated)


def test_exact_three_term_complex():
    cc = cc_from_dense([1, 2, 1], {1: [[1, -1]], 2: [[1], [1]]})
    assert cc.betti_list() == [0, 0, 0]


def test_zero_differentials_betti_equals_dims():
    cc = ChainComplex({0: 3, 1: 2, 2: 5}, {}, truncated=False)
    assert cc.betti_list() == [3, 2, 5]


def test_d_squared_checked():
    with pytest.raises(ValueError):
        cc_from_dense([1, 1, 1], {1: [[1]], 2: [[1]]})


def test_shape_mismatch_rejected():
    with pytest.raises(Exception):
        ChainComplex({0: 2, 1: 2}, {1: Mat.from_dense([[1, 0, 0]])})


def test_truncated_window_guard():
    cc = cc_from_dense([1, 2, 1], {1: [[1, -1]], 2: [[1], [1]]}, truncated=True)
    assert cc.max_homology_degree() == 1
    with pytest.raises(WindowError):
        cc.betti(2)


def test_homology_representatives_and_coords():
    cc = cc_from_dense([2, 2], {1: [[1, 1], [1, 1]]})
    h0 = cc.homology(0)
    assert h0.dim == 1
    (r0,) = h0.reps
    assert r0 in ({0: 1}, {1: 1})
    # e0 + e1 is a boundary, so [e1] = -[e0]
    s = 1 if 0 in r0 else -1
    assert h0.coords_of({0: 1}) == {0: s}
    assert h0.coords_of({1: 1}) == {0: -s}
    h1 = cc.homology(1)
    assert h1.dim == 1
    (z,) = h1.reps
    # the kernel of d_1 is spanned by e0 - e1
    assert z in ({0: 1, 1: -1}, {0: -1, 1: 1})
    assert h1.coords_of({0: 2, 1: -2}) == {0: 2 * z[0]}
    # representatives are cached and deterministic
    assert cc.homology(1).reps is h1.reps


def test_noncycle_rejected_in_coords():
    cc = cc_from_dense([1, 2], {1: [[1, 0]]})
    h0 = cc.homology(0)
    with pytest.raises(ValueError):
        cc.homology(1).coords_of({0: 1})  # e0 is not a cycle in degree 1


def test_chain_map_induced_identity():
    cc = cc_from_dense([2, 2], {1: [[1, 1], [1, 1]]})
    f = ChainMap(cc, cc, {0: Mat.identity(2), 1: Mat.identity(2)})
    assert f.induced(0).to_dense() == [[1]]
    assert f.induced(1).to_dense() == [[1]]


def test_chain_map_condition_checked():
    src = cc_from_dense([1, 1], {1: [[1]]})
    dst = cc_from_dense([1, 1], {})
    with pytest.raises(ValueError):
        ChainMap(src, dst, {0: Mat.identity(1), 1: Mat.identity(1)})


def test_snake_connecting_classic():
    # 0 -> A -> B -> C -> 0 with B acyclic forces delta: H_1(C) ~ H_0(A)
    A = ChainComplex({0: 1, 1: 0}, {}, truncated=False)
    B = cc_from_dense([1, 1], {1: [[1]]})
    C = ChainComplex({0: 0, 1: 1}, {}, truncated=False)
    incl = ChainMap(A, B, {0: Mat.identity(1)})
    proj = ChainMap(B, C, {1: Mat.identity(1)})
    delta = snake_connecting(incl, proj, 1)
    assert delta.to_dense() == [[1]]


def test_exactness_defect():
    f = Mat.from_dense([[1], [0]])
    g = Mat.from_dense([[0, 1]])
    # im f = span{e0}, ker g = span{e0}: exact
    assert exactness_defect(f, g) == 0
    g2 = Mat.zero(1, 2)
    assert exactness_defect(f, g2) == 1
    with pytest.raises(ValueError):
        exactness_defect(f, Mat.from_dense([[1, 0]]))


def test_check_exact_sequence_runs():
    f = Mat.from_dense([[1], [0]])
    g = Mat.from_dense([[0, 1]])  # im g = Q, so the next junction is exact too
    h = Mat.zero(0, 1)
    assert check_exact_sequence([f, g, h]) == [0, 0]


# -- double complexes ---------------------------------------------------------

def square_cells(window, dims):
    cells = {}
    for p in range(window + 1):
        for q in range(window + 1 - p):
            cells[(p, q)] = dims.get((p, q), 0)
    return cells


def one_by_one(val=1):
    basis = BlockBasis([("pt", 1)])
    return BlockMap.from_terms(basis, basis, [(0, 0, val)])


def test_double_complex_totalisation_signs():
    # unit square with identity edges: commuting, exact totalisation
    m = one_by_one()
    cells = square_cells(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1})
    dc = DoubleComplex(cells,
                       horiz={(1, 0): m, (1, 1): m},
                       vert={(0, 1): m, (1, 1): m},
                       window=2)
    tot = dc.totalize()
    assert [tot.dim(n) for n in range(3)] == [1, 2, 1]
    # d_tot on degree 2: +1 to (0,1) via d_h, -1 to (1,0) via (-1)^1 d_v
    assert tot.d_mat(2).to_dense() == [[1], [-1]]
    assert tot.d_mat(1).to_dense() == [[1, 1]]
    assert tot.betti_list() == [0, 0]


def test_double_complex_commutation_enforced():
    m = one_by_one()
    m2 = one_by_one(2)
    cells = square_cells(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1})
    with pytest.raises(ValueError):
        DoubleComplex(cells, horiz={(1, 0): m, (1, 1): m},
                      vert={(0, 1): m, (1, 1): m2}, window=2)


def test_from_anticommuting_matches_total_differential():
    # anticommuting square: d_h d_v = -d_v d_h with all edges "identity"
    # except one sign; totalisation must be d_h + d_v on the nose
    m = one_by_one()
    cells = square_cells(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1})
    dc = DoubleComplex.from_anticommuting(
        cells, horiz={(1, 0): m, (1, 1): m},
        vert={(0, 1): m, (1, 1): m.scale(-1)}, window=2)
    tot = dc.totalize()
    # degree 2 source is cell (1,1): horizontal +1, vertical (anticomm) -1
    assert tot.d_mat(2).to_dense() == [[1], [-1]]
    assert tot.betti_list() == [0, 0]


def test_spectral_sequence_vertical_page_and_abutment():
    # zero vertical maps: E^1 = cells, d_1 = horizontal, E^2 = E_inf = 0
    m = one_by_one()
    cells = square_cells(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1})
    dc = DoubleComplex(cells, horiz={(1, 0): m, (1, 1): m}, vert={}, window=2)
    ss = dc.spectral_sequence(n_max=1)
    assert ss.pages[1][(0, 0)] == 1 and ss.pages[1][(1, 0)] == 1
    assert ss.pages[2][(0, 0)] == 0 and ss.pages[2][(1, 0)] == 0
    assert ss.pages_consistent
    assert ss.converged
    for n, (einf, betti) in ss.convergence.items():
        assert einf == betti


def test_spectral_sequence_degenerate_at_e2():
    # zero horizontal maps: E^2 = E^1 = cells, abutment = direct sums
    cells = square_cells(3, {(0, 0): 2, (1, 0): 1, (0, 1): 1, (1, 1): 3})
    dc = DoubleComplex(cells, horiz={}, vert={}, window=3)
    ss = dc.spectral_sequence(n_max=2)
    assert ss.converged
    assert ss.convergence[1] == (2, 2)
    assert ss.convergence[2] == (3, 3)


def test_spectral_sequence_window_guard():
    cells = square_cells(1, {(0, 0): 1})
    dc = DoubleComplex(cells, horiz={}, vert={}, window=1)
    with pytest.raises(WindowError):
        dc.spectral_sequence(n_max=5)


def test_shifted_complex():
    cc = cc_from_dense([1, 2, 1], {1: [[1, -1]], 2: [[1], [1]]})
    sh = cc.shifted(2)
    assert sh.dim(2) == 1 and sh.dim(3) == 2 and sh.dim(0) == 0
    assert sh.betti(3) == cc.betti(1)
