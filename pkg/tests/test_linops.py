import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.linalg import LinearOperator, eigsh

from haydys import lattice as lat
from haydys import linops as lo
from haydys.monopole import Configuration, bps_seed

TINY = lat.Grid.from_radius(9, 3.0)


@pytest.fixture(scope="module")
def tiny_op():
    return lo.LinearizedOperator(bps_seed(TINY))


def _as_linop(op, fn):
    N = op.dof
    return LinearOperator((N, N), matvec=lambda x: fn(x.reshape(op.shape)).ravel(), dtype=float)


@pytest.mark.parametrize("weight", [0.0, lo.DOUBLER_WEIGHT, 1.0])
def test_kernels_match_array_reference(small_seed, rng, weight):
    op = lo.LinearizedOperator(small_seed, doubler_weight=weight)
    v = rng.standard_normal(op.shape)
    assert np.allclose(op.D(v), lo.reference_D(small_seed, v, weight), atol=1e-12)
    assert np.allclose(op.Dstar(v), lo.reference_Dstar(small_seed, v, weight), atol=1e-12)


def test_kernels_match_reference_on_periodic_grid(rng):
    g = lat.Grid(9, 0.7, periodic=True)
    m = Configuration(g, 0.3 * rng.standard_normal(g.shape + (3, 3)), rng.standard_normal(g.shape + (3,)))
    with pytest.warns(UserWarning):
        op = lo.LinearizedOperator(m)
    v = rng.standard_normal(op.shape)
    assert np.allclose(op.D(v), lo.reference_D(m, v), atol=1e-12)
    assert np.allclose(op.Dstar(v), lo.reference_Dstar(m, v), atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_discrete_adjointness(seed, bare):
    op = lo.LinearizedOperator(bps_seed(TINY))
    r = np.random.default_rng(seed)
    v, w = r.standard_normal((2,) + op.shape)
    lhs = lat.inner(op.D(v, bare=bare), w, TINY)
    rhs = lat.inner(v, op.Dstar(w, bare=bare), TINY)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))


def test_base_must_be_real(small_seed, rng):
    with pytest.raises(ValueError):
        lo.LinearizedOperator(small_seed.with_imaginary(rng.standard_normal(small_seed.grid.shape + (4, 3))))


def test_rough_base_warns(rng):
    m = Configuration(TINY, rng.standard_normal(TINY.shape + (3, 3)), rng.standard_normal(TINY.shape + (3,)))
    with pytest.warns(UserWarning, match="Bogomolny residual"):
        lo.LinearizedOperator(m)


def test_shape_mismatch(tiny_op):
    with pytest.raises(lat.GridMismatch):
        tiny_op.D(np.zeros((11, 11, 11, 4, 3)))


def test_jacobi_diagonal_matches_probing(tiny_op, rng):
    diag = tiny_op.jacobi_diagonal
    flat = np.arange(tiny_op.dof)
    for idx in rng.choice(flat, 60, replace=False):
        e = np.zeros(tiny_op.dof)
        e[idx] = 1.0
        col = tiny_op.DDstar(e.reshape(tiny_op.shape)).ravel()
        assert col[idx] == pytest.approx(diag.ravel()[idx], rel=1e-12)


def test_flat_periodic_symbol_inverts_exactly(rng):
    g = lat.Grid(11, 0.5, periodic=True)
    op = lo.LinearizedOperator(Configuration.zeros(g))
    v = rng.standard_normal(op.shape)
    v -= v.mean(axis=(0, 1, 2))
    assert np.allclose(op.spectral_precondition(op.DDstar(v)), v, atol=1e-10)


def test_flat_periodic_plane_wave_eigenvalue(rng):
    # D D* = -Laplacian + W^2 on a flat base: a single Fourier mode is an eigenvector
    g = lat.Grid(13, 0.4, periodic=True)
    op = lo.LinearizedOperator(Configuration.zeros(g))
    k = np.array([2, 5, 1])
    theta = 2 * np.pi * k / g.n
    idx = np.indices(g.shape)
    phase = sum(theta[i] * idx[i] for i in range(3))
    v = np.zeros(op.shape)
    v[..., 1, 2] = np.cos(phase)
    lam = np.sum(np.sin(theta) ** 2) / g.h**2 + (op._wc * np.sum((2 - 2 * np.cos(theta)) ** 2)) ** 2
    assert np.allclose(op.DDstar(v), lam * v, atol=1e-9 * lam)


def test_doubler_map_is_orthogonal(rng):
    v = rng.standard_normal((5, 4, 3))
    Tv = lo.doubler_T(v)
    assert np.allclose(np.sum(Tv**2), np.sum(v**2))
    assert np.allclose(lo.doubler_T_transpose(Tv), v)


def test_weitzenbock_defect_is_small_and_shrinks():
    out = []
    for n in (17, 33):
        g = lat.Grid.from_radius(n, 8.0)
        op = lo.LinearizedOperator(bps_seed(g))
        out.append(lo.weitzenbock_defect(op, lo.smooth_pair(g)))
    assert out[1] < out[0] / 2.5
    assert out[1] < 0.1


def test_weitzenbock_rejects_zero(tiny_op):
    with pytest.raises(ValueError):
        lo.weitzenbock_defect(tiny_op, np.zeros(tiny_op.shape))


@pytest.mark.parametrize("pre", ["spectral", "jacobi", "none"])
def test_green_solve_meets_tolerance(tiny_op, rng, pre):
    b = rng.standard_normal(tiny_op.shape)
    res = lo.green_solve(tiny_op, b, tol=1e-10, preconditioner=pre, max_iter=5000)
    assert res.converged
    assert np.linalg.norm(tiny_op.DDstar(res.x) - b) <= 1e-10 * np.linalg.norm(b)


def test_green_solve_edge_cases(tiny_op, rng):
    zero = lo.green_solve(tiny_op, np.zeros(tiny_op.shape))
    assert zero.converged and zero.iterations == 0 and not np.any(zero.x)
    b = rng.standard_normal(tiny_op.shape)
    with pytest.raises(lo.GreenSolveError):
        lo.green_solve(tiny_op, b, tol=1e-14, max_iter=2)
    soft = lo.green_solve(tiny_op, b, tol=1e-14, max_iter=2, raise_on_failure=False)
    assert not soft.converged and soft.iterations <= 2
    with pytest.raises(ValueError):
        lo.green_solve(tiny_op, b, preconditioner="amg")
    with pytest.raises(ValueError):
        lo.green_solve(tiny_op, b, shift=-1.0)
    bad = b.copy()
    bad[0, 0, 0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        lo.green_solve(tiny_op, bad)


def test_shifted_solve(tiny_op, rng):
    b = rng.standard_normal(tiny_op.shape)
    res = lo.green_solve(tiny_op, b, shift=0.3)
    assert np.linalg.norm(tiny_op.DDstar(res.x) + 0.3 * res.x - b) <= 1e-8 * np.linalg.norm(b)


def test_spectral_bounds_against_arpack(tiny_op):
    A = _as_linop(tiny_op, tiny_op.DDstar)
    top = eigsh(A, k=1, which="LA", return_eigenvectors=False, tol=1e-10)[0]
    assert lo.norm_Dstar(tiny_op, rtol=1e-10, max_iter=5000) == pytest.approx(np.sqrt(top), rel=1e-3)
    G = _as_linop(tiny_op, lambda x: lo.green_solve(tiny_op, x, tol=1e-12).x)
    low = 1.0 / eigsh(G, k=1, which="LA", return_eigenvectors=False, tol=1e-10)[0]
    assert lo.lambda_min_DDstar(tiny_op, rtol=1e-8, max_iter=200) == pytest.approx(low, rel=1e-4)


def test_low_spectrum_against_arpack(tiny_op):
    vals, vecs, res = lo.low_spectrum(tiny_op, 3, tol=1e-8, max_iter=1000)
    G = _as_linop(tiny_op, lambda x: lo.green_solve(tiny_op, tiny_op.Dstar(
        lo.green_solve(tiny_op, tiny_op.D(x), tol=1e-13).x), tol=1e-13).x)
    # D* D is invertible on this grid, and (D* D)^-1 = D^-1 G D^-T restricted suitably; compare with DD* spectrum
    want = np.sort(eigsh(_as_linop(tiny_op, tiny_op.DstarD), k=3, which="SA", tol=1e-10,
                         return_eigenvectors=False, maxiter=20000))
    assert np.allclose(vals, want, rtol=1e-4)
    assert vecs.shape == (3,) + tiny_op.shape
    for v in vecs:
        assert lat.norm(v, TINY) == pytest.approx(1.0)


def test_tangent_projection_reduces_defect():
    g = lat.Grid.from_radius(17, 8.0)
    op = lo.LinearizedOperator(bps_seed(g))
    for d in ("x", "phase"):
        raw = lo.raw_tangent(op.m0, d)
        raw /= lat.norm(raw, g)
        v = lo.make_tangent(op, d)
        assert lat.norm(v, g) == pytest.approx(1.0)
        assert lo.tangent_defect(op, v) < 0.5 * lo.tangent_defect(op, raw)
        assert abs(lat.inner(v, raw, g)) > 0.9


def test_tangent_directions_are_nearly_orthogonal():
    g = lat.Grid.from_radius(17, 8.0)
    m = bps_seed(g)
    vs = [lo.raw_tangent(m, d) for d in lo.DIRECTIONS]
    vs = [v / lat.norm(v, g) for v in vs]
    gram = np.array([[lat.inner(a, b, g) for b in vs] for a in vs])
    assert np.allclose(gram, np.eye(4), atol=1e-10)


def test_tangent_errors(tiny_op):
    with pytest.raises(ValueError):
        lo.raw_tangent(tiny_op.m0, "w")
    with pytest.raises(lo.DegenerateTangent):
        lo.make_tangent(lo.LinearizedOperator(Configuration.zeros(TINY)), "x")


def test_rotation_permutes_translations_and_fixes_phase():
    g = lat.Grid.from_radius(13, 6.0)
    m = bps_seed(g)
    tx, ty, tz, tp = (lo.raw_tangent(m, d) for d in lo.DIRECTIONS)
    assert np.array_equal(lo.rotate_xyz(tx), ty)
    assert np.array_equal(lo.rotate_xyz(ty), tz)
    assert np.array_equal(lo.rotate_xyz(tz), tx)
    assert np.allclose(lo.rotate_xyz(tp), tp, rtol=0, atol=1e-15 * np.abs(tp).max())


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rotation_is_an_isometry_of_order_three_commuting_with_bare_D(seed):
    r = np.random.default_rng(seed)
    v = r.standard_normal(TINY.shape + (4, 3))
    op = lo.LinearizedOperator(bps_seed(TINY))
    R = lo.rotate_xyz
    assert np.array_equal(R(R(R(v))), v)
    assert np.linalg.norm(R(v)) == pytest.approx(np.linalg.norm(v), rel=1e-14)
    lhs, rhs = op.D(R(v), bare=True), R(op.D(v, bare=True))
    assert np.linalg.norm(lhs - rhs) <= 1e-13 * np.linalg.norm(rhs)


def test_kernel_and_gap_against_wide_block():
    g = lat.Grid.from_radius(17, 8.0)
    op = lo.LinearizedOperator(bps_seed(g))
    vals, vecs, res, lanczos = lo.kernel_and_gap(op, tol=1e-7)
    wide, _, _ = lo.low_spectrum(op, 8, extra=8, tol=1e-7, max_iter=3000, seed=5)
    assert np.allclose(vals, wide[:5], rtol=1e-4)
    assert np.sum(vals < 1e-4 * vals[4]) == 4
    # single-vector Lanczos sees the near kernel as one value
    assert lanczos[0] == pytest.approx(vals[0], rel=1e-2) and lanczos[1] == pytest.approx(vals[4], rel=1e-6)
