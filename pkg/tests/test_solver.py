import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haydys import lattice as lat
from haydys import linear_model as lm
from haydys import solver as sv
from haydys.linops import LinearizedOperator, make_tangent, norm_Dstar
from haydys.monopole import bogomolny_residual, bps_seed

G = lat.Grid.from_radius(9, 2.0)


def _rand_stack(r, g=G):
    return r.standard_normal((2,) + g.shape + (4, 3))


def test_kappa_on_real_configuration_is_bogomolny(small_seed):
    k1, k2, k3 = sv.kappa(small_seed)
    assert np.array_equal(k1, bogomolny_residual(small_seed))
    assert not np.any(k2) and not np.any(k3)
    w1, w2, w3 = sv.kw_residual(small_seed)
    assert np.array_equal(w1, k1) and not np.any(w2)


def test_kw_and_haydys_differ_by_sign_of_middle_row(rng):
    c = lm.random_configuration(G, rng)
    _, k2, _ = sv.kappa(c)
    _, w2, _ = sv.kw_residual(c)
    d1 = lat.d1(c.nabla, c.a, G)
    assert np.allclose(k2 + w2, 2 * d1)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_derivative_matches_symmetric_difference(seed):
    # kappa is quadratic, so the symmetric difference quotient is exact for any step
    r = np.random.default_rng(seed)
    c0 = lm.random_configuration(G, r)
    dc = _rand_stack(r)
    kp = sv.kappa(c0.shifted(dc[0], dc[1]))
    km = sv.kappa(c0.shifted(-dc[0], -dc[1]))
    for exact, p, m in zip(sv.linearized_kappa(c0, dc), kp, km):
        fd = 0.5 * (p - m)
        assert np.allclose(exact, fd, atol=1e-12 * max(1.0, np.abs(fd).max()))


def test_gauge_residual_is_linear(rng):
    c0 = lm.random_configuration(G, rng)
    x, y = _rand_stack(rng), _rand_stack(rng)
    lhs = sv.gauge_fix_residual(c0, 2 * x - 3 * y)
    rhs = 2 * sv.gauge_fix_residual(c0, x) - 3 * sv.gauge_fix_residual(c0, y)
    assert np.allclose(lhs, rhs, atol=1e-12 * np.abs(lhs).max())


def test_split_parts(rng):
    c0 = lm.random_configuration(G, rng)
    K = sv.GaugeFixedMap(c0, 0.0625)
    dc = _rand_stack(rng)
    k0, lin, quad = K.split(dc)
    assert np.allclose(K(dc), k0 + lin + quad, atol=1e-12 * np.abs(K(dc)).max())
    _, lin2, quad2 = K.split(2 * dc)
    assert np.allclose(lin2, 2 * lin, atol=1e-11 * np.abs(lin).max())
    assert np.allclose(quad2, 4 * quad, atol=1e-11 * np.abs(quad).max())


def test_L_term_requires_positive_t(small_seed, rng):
    with pytest.raises(ValueError):
        sv.L_term(small_seed, 0.0, _rand_stack(rng, small_seed.grid))


def test_block_linearization_at_real_base(small_seed, small_op, rng):
    # at a real base the linear part is exactly (D dm, D dv)
    K = sv.GaugeFixedMap(small_seed, small_op.doubler_weight)
    dc = _rand_stack(rng, small_seed.grid)
    _, lin, _ = K.split(dc)
    want = sv._block_D(small_op, dc)
    assert np.allclose(lin, want, atol=1e-12 * np.abs(want).max())


@pytest.fixture(scope="module")
def coarse():
    g = lat.Grid.from_radius(17, 8.0)
    m = bps_seed(g)
    op = LinearizedOperator(m)
    return m, op, make_tangent(op, "x")


def test_zero_t_returns_seed(coarse):
    m, op, v = coarse
    c, rep, u = sv.fixed_point_solve(m, v, 0.0, op=op)
    assert rep.converged and rep.iterations == 1
    assert c.is_real and not np.any(u)


def test_fixed_point_converges_and_reports(coarse):
    m, op, v = coarse
    t = 0.05
    c, rep, u = sv.fixed_point_solve(m, v, t, op=op)
    assert rep.converged and rep.failure is None and not rep.diverged
    assert rep.monotone
    assert rep.imag_norm >= 0.5 * t
    assert rep.stabilized_residual <= 5 * (1e-6 + rep.floor)
    d = rep.as_dict()
    assert d["iterations"] == len(d["increments"]) == len(d["cg_iterations"])
    assert len(d["ratios"]) == d["iterations"] - 1
    assert rep.s == pytest.approx(t / rep.norm_dstar)
    assert u.shape == (2,) + op.shape


def test_half_t_halves_the_ratio(coarse):
    m, op, v = coarse
    r = []
    for t in (0.05, 0.025):
        _, rep, _ = sv.fixed_point_solve(m, v, t, op=op)
        r.append(np.mean(rep.ratios))
    assert r[1] / r[0] == pytest.approx(0.5, rel=0.3)


def test_large_t_is_flagged(coarse):
    m, op, v = coarse
    _, rep, _ = sv.fixed_point_solve(m, v, 200.0, op=op, max_outer=12)
    assert not rep.converged
    assert rep.diverged or rep.failure is not None or rep.iterations == 12


def test_monotone_property():
    rep = sv.SolveReport(t=0.1, s=0.01, norm_dstar=10.0, ratios=[0.3, 0.5])
    assert rep.monotone
    rep.ratios.append(1.2)
    assert not rep.monotone


def test_t_max_probe_is_dyadic(coarse):
    m, op, v = coarse
    out = sv.t_max_probe(m, v, op=op, t_start=0.8, t_cap=1.6)
    ts = [p["t"] for p in out["probes"]]
    assert all(np.log2(t / 0.8) == pytest.approx(round(np.log2(t / 0.8))) for t in ts)
    assert out["t_max"] in [0.0] + [p["t"] for p in out["probes"] if p["contracts"]]
    assert out["norm_dstar"] > 0


@pytest.mark.slow
def test_t_max_consistent_across_directions(coarse):
    # hedgehog symmetry relates the translations exactly; the phase may differ but not by more than 2x
    m, op, _ = coarse
    nd = norm_Dstar(op)
    tm = {d: sv.t_max_probe(m, make_tangent(op, d), op=op, norm_dstar=nd)["t_max"] for d in ("x", "y", "z", "phase")}
    assert min(tm.values()) > 0
    assert max(tm.values()) <= 2 * min(tm.values()), tm
