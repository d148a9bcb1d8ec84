"""Self-check suites behind ``haydys verify-all``.

Every check returns ``{"defect": ..., "tol": ..., "passed": ...}`` (plus
context); :func:`run_suite` collects them. Machine-precision checks run
on small random configurations; grid checks use the charge-1 seed.
"""
from __future__ import annotations

import numpy as np

from . import lattice as lat
from . import linear_model as lm
from .dimred import dimred_check, vafa_witten_iso
from .linops import LinearizedOperator, smooth_pair, weitzenbock_defect
from .monopole import Configuration, asymptotic_check, bogomolny_residual, bps_seed, interior_norm
from .solver import GaugeFixedMap, L_term, Q_term, _block_D, gauge_fix_residual, kappa, linearized_kappa

IDENTITY_TOL = 1e-12
SMALL_N = 11
CONVERGENCE_RATIO = 4.0
CONVERGENCE_SLACK = 0.25
ASYMPTOTIC_RADIUS = 8.0


def _row(defect: float, tol: float, **extra) -> dict:
    return {"defect": float(defect), "tol": tol, "passed": bool(defect <= tol), **extra}


def _rel(x: np.ndarray, ref: np.ndarray, grid: lat.Grid) -> float:
    s = lat.norm(ref, grid)
    return lat.norm(x, grid) / s if s > 0 else lat.norm(x, grid)


def _random_stack(grid: lat.Grid, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((2,) + grid.shape + (4, 3))


def _iota(c: Configuration) -> Configuration:
    return Configuration(c.grid, c.nabla, c.phi, -c.a, -c.psi, c.exterior)


# ----------------------------------------------------------------------------
# Field-level identities on random configurations
# ----------------------------------------------------------------------------


def dimred_random(configs: int = 5, seed: int = 0, n: int = SMALL_N) -> dict:
    g = lat.Grid.from_radius(n, 2.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(configs):
        r = dimred_check(lm.random_configuration(g, rng))
        worst = max(worst, r["re_defect"], r["im_defect"], r["coulomb_defect"])
    return _row(worst, IDENTITY_TOL, configs=configs)


def vafa_witten_selfdual(seed: int = 0, n: int = SMALL_N) -> dict:
    g = lat.Grid.from_radius(n, 2.0)
    b = np.random.default_rng(seed).standard_normal(g.shape + (3, 3))
    w = vafa_witten_iso(b)
    return _row((w.star() - w).norm(g) / w.norm(g), IDENTITY_TOL)


def iota_parity(configs: int = 5, seed: int = 0, n: int = SMALL_N) -> dict:
    """``kappa_1`` is even under ``(a, Psi) -> -(a, Psi)``; ``kappa_2`` and ``kappa_3`` are odd."""
    g = lat.Grid.from_radius(n, 2.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(configs):
        c = lm.random_configuration(g, rng)
        k, ki = kappa(c), kappa(_iota(c))
        for sign, x, y in zip((1.0, -1.0, -1.0), k, ki):
            worst = max(worst, _rel(y - sign * x, x, g))
    return _row(worst, IDENTITY_TOL, configs=configs)


def kappa_quadratic(configs: int = 5, seed: int = 0, n: int = SMALL_N) -> dict:
    """Third finite difference of ``s -> kappa(c + s dc)`` vanishes."""
    g = lat.Grid.from_radius(n, 2.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(configs):
        c = lm.random_configuration(g, rng)
        dc = _random_stack(g, rng)
        ks = [kappa(c.shifted(s * dc[0], s * dc[1])) for s in (-1.0, 0.0, 1.0, 2.0)]
        for j in range(3):
            third = ks[3][j] - 3 * ks[2][j] + 3 * ks[1][j] - ks[0][j]
            worst = max(worst, _rel(third, ks[2][j], g))
    return _row(worst, IDENTITY_TOL, configs=configs)


def decomposition(configs: int = 3, seed: int = 0, n: int = SMALL_N, t: float = 0.05) -> dict:
    """Split of the gauge-fixed map around ``m0 + i t v0``.

    Checks ``K(dc) = K(0) + (D dm, D dv) + t L(dc) + Q(dc)`` against the
    closed-form derivative, that ``L`` does not depend on ``t`` and that
    ``L`` vanishes for ``v0 = 0``.
    """
    g = lat.Grid.from_radius(n, 3.0)
    m0 = bps_seed(g)
    op = LinearizedOperator(m0)
    rng = np.random.default_rng(seed)
    recon = deriv = homog = base = 0.0
    for _ in range(configs):
        v0 = rng.standard_normal(g.shape + (4, 3))
        dc = _random_stack(g, rng)
        c0 = m0.with_imaginary(t * v0)
        K = GaugeFixedMap(c0, op.doubler_weight)
        full = K(dc)
        parts = K(np.zeros_like(dc)) + _block_D(op, dc) + t * L_term(c0, t, dc, op) + Q_term(c0, dc, op.doubler_weight)
        recon = max(recon, _rel(full - parts, full, g))
        r1, r2, r3 = linearized_kappa(c0, dc)
        dbl = K._doubler
        exact = np.stack([lat.make_pair(r1, gauge_fix_residual(c0, dc)) + dbl(dc[0]),
                          lat.make_pair(r2, r3) + dbl(dc[1])])
        _, lin, _ = K.split(dc)
        deriv = max(deriv, _rel(lin - exact, exact, g))
        L1 = L_term(c0, t, dc, op)
        L2 = L_term(m0.with_imaginary(2 * t * v0), 2 * t, dc, op)
        homog = max(homog, _rel(L2 - L1, L1, g))
        L0 = L_term(m0.with_imaginary(np.zeros_like(v0)), t, dc, op)
        base = max(base, _rel(L0, L1, g))
    worst = max(recon, deriv, homog, base)
    return _row(worst, IDENTITY_TOL, reconstruction=recon, derivative=deriv, t_independence=homog, zero_v0=base)


def adjointness(seed: int = 0, n: int = SMALL_N, radius: float = 3.0) -> dict:
    """``<D v, w> = <v, D* w>`` for the stabilised and the bare operator."""
    g = lat.Grid.from_radius(n, radius)
    op = LinearizedOperator(bps_seed(g))
    rng = np.random.default_rng(seed)
    v, w = rng.standard_normal((2,) + op.shape)
    worst = 0.0
    for bare in (False, True):
        lhs = lat.inner(op.D(v, bare=bare), w, g)
        rhs = lat.inner(v, op.Dstar(w, bare=bare), g)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    return _row(worst, IDENTITY_TOL)


def field_moments(configs: int = 100, seed: int = 0, n: int = 9) -> dict:
    g = lat.Grid.from_radius(n, 2.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(configs):
        r = lm.field_moment_correspondence(lm.random_configuration(g, rng))
        worst = max(worst, max(r["defects"].values()))
    return _row(worst, IDENTITY_TOL, configs=configs)


# ----------------------------------------------------------------------------
# Grid suites
# ----------------------------------------------------------------------------


def convergence(n_coarse: int = 33, n_fine: int = 65, radius: float = ASYMPTOTIC_RADIUS, seed: int = 0) -> dict:
    """Ratio of coarse to fine error for the Bogomolny residual and the Weitzenboeck defect."""
    bog, wz = [], []
    for n in (n_coarse, n_fine):
        g = lat.Grid.from_radius(n, radius)
        m = bps_seed(g)
        bog.append(interior_norm(bogomolny_residual(m), g))
        wz.append(weitzenbock_defect(LinearizedOperator(m), smooth_pair(g, seed)))
    lo = CONVERGENCE_RATIO * (1 - CONVERGENCE_SLACK)
    hi = CONVERGENCE_RATIO * (1 + CONVERGENCE_SLACK)
    rb, rw = bog[0] / bog[1], wz[0] / wz[1]
    ok = lo <= rb <= hi and lo <= rw <= hi
    return {"bogomolny": bog, "weitzenbock": wz, "bogomolny_ratio": rb, "weitzenbock_ratio": rw,
            "window": [lo, hi], "grids": [n_coarse, n_fine], "passed": bool(ok)}


def asymptotics(n: int = 65, radius: float = ASYMPTOTIC_RADIUS) -> dict:
    rep = asymptotic_check(bps_seed(lat.Grid.from_radius(n, radius)))
    ok = abs(rep.c0 - 1.0) <= 0.02 and abs(rep.c1 - 2.0) <= 0.2 and abs(rep.decay_slope + 2.0) <= 0.2
    return {**rep.as_dict(), "passed": bool(ok)}


def run_suite(quick: bool = False, seed: int = 0, max_n: int = 65, trials: int = 1000) -> dict:
    """Run every suite; ``quick`` skips the two-grid convergence study."""
    checks: dict[str, dict] = {}
    for N in (2, 3):
        checks[f"clifford_su{N}"] = lm.clifford_check(N, trials, seed)
        checks[f"moment_transforms_su{N}"] = lm.moment_transform_check(N, trials, seed)
        checks[f"lagrangian_su{N}"] = lm.lagrangian_check(N, trials, seed)
    checks["dimred_random"] = dimred_random(seed=seed)
    checks["vafa_witten_selfdual"] = vafa_witten_selfdual(seed=seed)
    checks["iota_parity_fields"] = iota_parity(seed=seed)
    checks["kappa_quadratic"] = kappa_quadratic(seed=seed)
    checks["decomposition"] = decomposition(seed=seed)
    checks["adjointness"] = adjointness(seed=seed)
    checks["field_moments"] = field_moments(seed=seed)
    checks["asymptotics"] = asymptotics(n=min(65, max_n))
    if not quick:
        fine = max_n if max_n % 2 else max_n - 1
        checks["convergence"] = convergence(((fine + 1) // 2) | 1, fine)
    failed = sorted(k for k, v in checks.items() if not v["passed"])
    return {"checks": checks, "failed": failed, "passed": not failed, "quick": quick}
