import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from haydys import lattice as lat

finite = st.floats(-10, 10, allow_nan=False)
lie = arrays(np.float64, (3,), elements=finite)


def commutator(x, y):
    X, Y = lat.to_matrix(x), lat.to_matrix(y)
    return lat.from_matrix(X @ Y - Y @ X)


@given(lie, lie)
def test_bracket_is_matrix_commutator(x, y):
    assert np.allclose(lat.bracket(x, y), commutator(x, y), atol=1e-10)


@given(lie, lie)
def test_dot_is_minus_twice_trace(x, y):
    tr = np.trace(lat.to_matrix(x) @ lat.to_matrix(y))
    assert np.isclose(lat.lie_dot(x, y), -2.0 * lat.KILLING_SCALE * tr.real, atol=1e-9)


@given(lie, lie, lie)
def test_jacobi_and_invariance(x, y, z):
    b = lat.bracket
    jac = b(x, b(y, z)) + b(y, b(z, x)) + b(z, b(x, y))
    assert np.allclose(jac, 0.0, atol=1e-9)
    assert np.isclose(lat.lie_dot(b(x, y), z), lat.lie_dot(x, b(y, z)), atol=1e-8)


def test_matrix_round_trip(rng):
    x = rng.standard_normal((5, 3))
    m = lat.to_matrix(x)
    assert np.allclose(m + np.conj(np.swapaxes(m, -1, -2)), 0)
    assert np.allclose(np.trace(m, axis1=-2, axis2=-1), 0)
    assert np.allclose(lat.from_matrix(m), x)


@pytest.mark.parametrize("n, h", [(8, 0.5), (7, 0.5), (11, 0.0), (11, -1.0)])
def test_grid_rejects_bad_parameters(n, h):
    with pytest.raises(ValueError):
        lat.Grid(n, h)


def test_grid_geometry():
    g = lat.Grid.from_radius(17, 8.0)
    assert g.h == pytest.approx(1.0)
    assert g.radius == pytest.approx(8.0)
    assert g.points[8, 8, 8].tolist() == [0.0, 0.0, 0.0]
    assert g.padded_points.shape == (19, 19, 19, 3)
    assert g.metadata() == {"n": 17, "h": 1.0, "radius": 8.0, "periodic": False}


def test_cdiff_exact_on_quadratics():
    g = lat.Grid.from_radius(13, 2.0)
    x = g.points
    f = (x[..., 0] ** 2 + 3 * x[..., 0] * x[..., 1])[..., None] * np.ones(3)
    d = lat.cdiff(f, 0, g)
    want = (2 * x[..., 0] + 3 * x[..., 1])[..., None] * np.ones(3)
    assert np.allclose(d[1:-1], want[1:-1], atol=1e-12)


def test_cdiff_ghost_supplies_exterior():
    g = lat.Grid.from_radius(11, 2.0)
    fn = lambda p: np.stack([p[..., 0] ** 2, p[..., 1], p[..., 2] ** 3], axis=-1)
    f = fn(g.points)
    ghost = fn(g.padded_points)
    for axis in range(3):
        padded = lat.cdiff(ghost, axis, lat.Grid(13, g.h))  # interior of a larger grid
        sl = (slice(1, -1),) * 3
        assert np.allclose(lat.cdiff(f, axis, g, ghost), padded[sl], atol=1e-12)


def test_periodic_difference_wraps():
    g = lat.Grid(9, 1.0, periodic=True)
    f = np.zeros(g.shape + (3,))
    f[0, 0, 0] = 1.0
    d = lat.cdiff(f, 0, g)
    assert d[-1, 0, 0, 0] == pytest.approx(0.5)
    assert d[1, 0, 0, 0] == pytest.approx(-0.5)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_d0_d1_adjoints(seed):
    g = lat.Grid.from_radius(9, 2.0)
    r = np.random.default_rng(seed)
    A = r.standard_normal(g.shape + (3, 3))
    f = r.standard_normal(g.shape + (3,))
    w = r.standard_normal(g.shape + (3, 3))
    u = r.standard_normal(g.shape + (3, 3))
    lhs = lat.inner(lat.d0(A, f, g), w, g)
    assert lhs == pytest.approx(lat.inner(f, lat.d0_adjoint(A, w, g), g), rel=1e-12)
    lhs = lat.inner(lat.d1(A, u, g), w, g)
    assert lhs == pytest.approx(lat.inner(u, lat.d1_adjoint(A, w, g), g), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_curl_of_gradient_is_curvature_bracket_for_constant_connection(seed):
    # with spatially constant A the lattice differences commute, so d_A d_A f = [F_A, f] exactly
    g = lat.Grid.from_radius(9, 2.0)
    r = np.random.default_rng(seed)
    A0 = r.standard_normal((3, 3))
    A = np.broadcast_to(A0, g.shape + (3, 3)).copy()
    ghost = np.broadcast_to(A0, (g.n + 2,) * 3 + (3, 3))
    f = r.standard_normal(g.shape + (3,))
    lhs = lat.d1(A, lat.d0(A, f, g), g)
    F = lat.curvature(A, g, ghost)
    rhs = lat.bracket(F, f[..., None, :])
    assert np.allclose(lhs, rhs, atol=1e-10 * np.abs(lhs).max())


def test_bracket_wedge_dual_symmetric_and_curvature_of_pure_gauge(rng):
    g = lat.Grid.from_radius(9, 2.0)
    a = rng.standard_normal(g.shape + (3, 3))
    b = rng.standard_normal(g.shape + (3, 3))
    assert np.allclose(lat.bracket_wedge_dual(a, b), lat.bracket_wedge_dual(b, a))
    assert np.allclose(lat.hodge_star(lat.hodge_star(a)), a)
    # an abelian gradient connection A = d(chi) T_3 is flat
    chi = np.sin(g.points[..., 0]) * g.points[..., 1]
    A = np.zeros(g.shape + (3, 3))
    for i in range(3):
        A[..., i, 2] = lat.cdiff(chi, i, g)
    F = lat.curvature(A, g)
    assert np.abs(F).max() < 1e-12


def test_pair_packing(rng, small_grid):
    one = rng.standard_normal(small_grid.shape + (3, 3))
    zero = rng.standard_normal(small_grid.shape + (3,))
    p = lat.make_pair(one, zero)
    assert p.shape == small_grid.shape + (4, 3)
    assert np.array_equal(lat.one_part(p), one)
    assert np.array_equal(lat.zero_part(p), zero)
    with pytest.raises(lat.GridMismatch):
        lat.check_grid(lat.Grid(9, 1.0), p)


def test_weighted_norms_ordering(small_seed, small_grid, rng):
    c = rng.standard_normal(small_grid.shape + (4, 3))
    n0 = lat.norm_H0(small_seed, c, small_grid)
    assert n0 == pytest.approx(lat.norm(c, small_grid))
    # every H1 term is part of H2, and the rho^-1 term bounds H1 below
    n1 = lat.norm_H1(small_seed, c, small_grid)
    n2 = lat.norm_H2(small_seed, c, small_grid)
    assert n1 >= lat.norm(c / small_grid.rho[..., None, None], small_grid)
    assert n2 > 0
