import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haydys import lattice as lat
from haydys import linear_model as lm

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_basis_is_orthonormal_and_traceless(N):
    T = lm.sun_basis(N)
    assert T.shape == (N * N - 1, N, N)
    gram = -2.0 * np.einsum("aij,bji->ab", T, T)
    assert np.allclose(gram, np.eye(N * N - 1))
    assert np.allclose(T + np.conj(np.swapaxes(T, 1, 2)), 0)
    assert np.allclose(np.trace(T, axis1=1, axis2=2), 0)


def test_su2_structure_constants_are_levi_civita():
    f = lm.structure_constants(2)
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k], eps[j, i, k] = 1, -1
    assert np.array_equal(f, eps)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_bracket_is_commutator(seed, N):
    alg = lm.LieAlgebra(N)
    r = np.random.default_rng(seed)
    x, y = r.standard_normal((2, alg.dim))
    X, Y = alg.to_matrix(x), alg.to_matrix(y)
    assert np.allclose(alg.to_matrix(alg.bracket(x, y)), X @ Y - Y @ X, atol=1e-12)
    assert np.allclose(alg.from_matrix(X), x)


def test_su2_model_bracket_agrees_with_lattice(rng):
    x, y = rng.standard_normal((2, 3))
    assert np.allclose(lm.LieAlgebra(2).bracket(x, y), lat.bracket(x, y))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_adjoint_is_orthogonal_homomorphism(seed):
    alg = lm.LieAlgebra(3)
    r = np.random.default_rng(seed)
    g, h = alg.random_group(r), alg.random_group(r)
    R = alg.adjoint(g)
    assert np.allclose(R @ R.T, np.eye(alg.dim), atol=1e-10)
    assert np.allclose(alg.adjoint(g @ h), R @ alg.adjoint(h), atol=1e-10)
    x, y = r.standard_normal((2, alg.dim))
    assert np.allclose(R @ alg.bracket(x, y), alg.bracket(R @ x, R @ y), atol=1e-10)


def hamilton(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


@pytest.mark.parametrize("unit, q", [("I", (0, 1, 0, 0)), ("J", (0, 0, 1, 0)), ("K", (0, 0, 0, 1))])
def test_quaternion_left_multiplication(unit, q, rng):
    A = rng.standard_normal((4, 5))
    want = hamilton(np.array(q, float)[:, None], A)
    assert np.allclose(lm.quaternion_left(unit, A), want)


def test_quaternion_unit_errors():
    with pytest.raises(ValueError):
        lm.quaternion_left("L", np.zeros((4, 3)))
    with pytest.raises(ValueError):
        lm.ComplexStructureId("I", 4)
    with pytest.raises(ValueError):
        lm.clifford_check(2, 0)


@pytest.mark.parametrize("N", [2, 3])
def test_clifford_suite(N):
    r = lm.clifford_check(N, 200, seed=3)
    literal = {"I2J2K2 = diag(1,-1)", "I3J3K3 = diag(1,-1)"}
    # the triple products are diag(-1, 1) and -swap; everything else holds exactly
    assert set(r["violations"]) == literal
    for k in literal:
        assert r["defects"][k] > 0.5
    for k, v in r["defects"].items():
        if k not in literal:
            assert v <= 1e-12, k
    assert "e1e2 + e2e1 = 0" in r["defects"]


@pytest.mark.parametrize("check", [lm.moment_transform_check, lm.lagrangian_check, lm.equivariance_check])
@pytest.mark.parametrize("N", [2, 3])
def test_identity_suites_pass(check, N):
    r = check(N, 100, seed=5)
    assert r["passed"], r["violations"]
    assert max(r["defects"].values()) <= 1e-12


def test_moment_maps_are_hamiltonian():
    r = lm.hamiltonian_check(3, 50, seed=2)
    assert set(r["rows"]) == {str(cs) for cs in lm.ALL_STRUCTURES}
    assert r["passed"]
    for row in r["rows"].values():
        assert row["defect"] <= 1e-6
        # mu is quadratic, so the forward difference error is exactly linear in eps
        assert row["forward_order"] == pytest.approx(1.0, abs=1e-3)


def test_index_one_maps_coincide(rng):
    mu = lm.mu_moments(lm.LMPoint.random(rng, 3, (4,)))
    assert np.array_equal(mu["I1"], mu["J1"]) and np.array_equal(mu["I1"], mu["K1"])
    assert lm.nu_moment(rng.standard_normal((4, 3))).shape == (3, 3)


def test_structures_are_isometric_complex(rng):
    p = lm.LMPoint.random(rng, 8, (10,))
    for cs in lm.ALL_STRUCTURES:
        q = lm.apply_cs(cs, lm.apply_cs(cs, p))
        assert np.allclose(q.A, -p.A) and np.allclose(q.B, -p.B)
        # Kaehler forms are antisymmetric
        w = lm.LMPoint.random(rng, 8, (10,))
        assert np.allclose(lm.kahler_form(cs, p, w), -lm.kahler_form(cs, w, p))


def test_indefinite_pairing_is_iota_twisted_metric(rng):
    p, q = lm.LMPoint.random(rng, 3, (6,)), lm.LMPoint.random(rng, 3, (6,))
    assert np.allclose(lm.indefinite_pairing(p, q), lm.metric(p, q.iota()))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_field_moments_match_residuals(seed):
    g = lat.Grid.from_radius(9, 2.0)
    c = lm.random_configuration(g, np.random.default_rng(seed))
    r = lm.field_moment_correspondence(c)
    assert r["passed"], r["defects"]


def test_field_moments_with_exterior(small_seed, rng):
    c = small_seed.with_imaginary(0.2 * rng.standard_normal(small_seed.grid.shape + (4, 3)))
    assert lm.field_moment_correspondence(c)["passed"]


def test_convention_search_finds_table_and_its_iota_image(rng):
    g = lat.Grid.from_radius(9, 2.0)
    found = lm.search_conventions(lm.random_configuration(g, rng))
    assert lm.CONVENTION_TABLE in found
    assert len(found) == 2
    other = next(t for t in found if t != lm.CONVENTION_TABLE)
    assert (other.s_phi, other.s_psi, other.s_a) == (1.0, -1.0, -1.0)


def test_wrong_table_fails(rng):
    g = lat.Grid.from_radius(9, 2.0)
    c = lm.random_configuration(g, rng)
    bad = lm.ConventionTable(1.0, 1.0, 1.0, (1.0, 1.0, 1.0))
    assert not lm.field_moment_correspondence(c, bad)["passed"]
