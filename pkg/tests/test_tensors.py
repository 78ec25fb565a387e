import numpy as np
import pytest

from parakahler.tensors import (
    GrassBilinear,
    grass_split,
    grassmann_projections,
    matrix_from_momentum,
    momentum_from_matrix,
    split_sym_alt,
)


def test_split_sym_alt_basic():
    t = np.array([[0.0, 1.0], [0.0, 0.0]])
    s, a = split_sym_alt(t)
    assert np.array_equal(s, [[0.0, 0.5], [0.5, 0.0]])
    assert np.array_equal(a, [[0.0, 0.5], [-0.5, 0.0]])


def test_split_symmetric_has_zero_alt(rng):
    t = rng.normal(size=(4, 4))
    t = t + t.T
    _, a = split_sym_alt(t)
    assert np.max(np.abs(a)) == 0.0


def test_split_reconstructs(rng):
    t = rng.normal(size=(5, 5))
    s, a = split_sym_alt(t)
    assert np.allclose(s + a, t, rtol=1e-15, atol=1e-16)


def test_split_rejects_non_square():
    with pytest.raises(ValueError):
        split_sym_alt(np.zeros((2, 3)))


def test_split_is_idempotent(rng):
    t = rng.normal(size=(3, 3))
    s, a = split_sym_alt(t)
    s2, zero_a = split_sym_alt(s)
    zero_s, a2 = split_sym_alt(a)
    assert np.array_equal(s2, s) and np.max(np.abs(zero_a)) == 0.0
    assert np.array_equal(a2, a) and np.max(np.abs(zero_s)) == 0.0


def test_rank_one_charts_have_no_antisymmetric_output_part(rng):
    # m = 1: the output twist is the identity, so the aa and as parts vanish
    # and ss + sa rebuild the input.
    p = GrassBilinear(1, 2, rng.normal(size=(1, 2, 1, 2)))
    ss, aa, sa, as_ = grassmann_projections(p)
    assert np.max(np.abs(aa.entries)) == 0.0
    assert np.max(np.abs(as_.entries)) == 0.0
    assert np.allclose(ss.entries + sa.entries, p.entries)


def test_projections_partition_identity(rng):
    p = GrassBilinear(2, 2, rng.normal(size=(2, 2, 2, 2)))
    parts = grassmann_projections(p)
    assert np.allclose(sum(q.entries for q in parts), p.entries)


def test_swap_symmetric_input_relates_mixed_parts(rng):
    # P symmetric under the simultaneous swap (a, alpha) <-> (b, beta):
    # then P^sa is the transpose of P^as in the composite flattening.
    e = rng.normal(size=(2, 2, 2, 2))
    e = e + np.transpose(e, (2, 3, 0, 1))
    p = GrassBilinear(2, 2, e)
    _, _, sa, as_ = grassmann_projections(p)
    assert np.allclose(sa.flat(), as_.flat().T, rtol=0, atol=1e-14)


@pytest.mark.parametrize("m,n", [(1, 2), (2, 2), (2, 3)])
def test_projections_idempotent_and_mutually_annihilating(m, n, rng):
    p = GrassBilinear(m, n, rng.normal(size=(m, n, m, n)))
    parts = grassmann_projections(p)
    for i, part in enumerate(parts):
        again = grassmann_projections(part)
        for j, piece in enumerate(again):
            if i == j:
                assert np.allclose(piece.entries, part.entries, atol=1e-14)
            else:
                assert np.max(np.abs(piece.entries)) < 1e-14


def test_coordinate_view_roundtrip(rng):
    m, n = 2, 3
    b = rng.normal(size=(m * n, m * n))
    p = GrassBilinear.from_coordinates(b, m, n)
    assert np.allclose(p.to_coordinates(), b)


def test_grass_split_matches_projection_objects(rng):
    m, n = 2, 2
    b = rng.normal(size=(m * n, m * n))
    coords = grass_split(b, m, n)
    objs = grassmann_projections(GrassBilinear.from_coordinates(b, m, n))
    for c, o in zip(coords, objs):
        assert np.allclose(c, o.to_coordinates(), atol=1e-14)


def test_momentum_flattening_convention():
    # base coordinate x^{pq} has flat index p*m + q and pairs with z[q, p]
    m, n = 2, 3
    z = np.arange(6.0).reshape(m, n)
    xi = momentum_from_matrix(z, m, n)
    for p in range(n):
        for q in range(m):
            assert xi[p * m + q] == z[q, p]
    assert np.array_equal(matrix_from_momentum(xi, m, n), z)
