"""The Haydys map, gauge fixing and the fixed-point construction of solutions.

Perturbations ``dc = (b1, phi, b2, psi)`` are stored as a stack of two pairs,
shape ``(2, n, n, n, 4, 3)``: ``dc[0] = (b1, phi)`` moves the real part and
``dc[1] = (b2, psi)`` the imaginary part. Residuals of the gauge-fixed map
use the same layout: ``[0] = (kappa_1, gauge)`` and ``[1] = (kappa_2, kappa_3)``.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import lattice as lat
from .linops import (
    CG_TOL,
    GreenSolveError,
    LinearizedOperator,
    doubler_T,
    biharmonic,
    green_solve,
    norm_Dstar,
)
from .monopole import Configuration, bogomolny_residual

DIVERGENCE_STREAK = 3
PROBE_STEPS = 5
PROBE_RATIO = 0.9


def _stack(p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    return np.stack([p0, p1])


def _imag(c: Configuration) -> tuple[np.ndarray, np.ndarray]:
    return c.a, c.psi


# ----------------------------------------------------------------------------
# Haydys map
# ----------------------------------------------------------------------------


def kappa(c: Configuration) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three components of the Haydys map.

    ``(*F - d Phi - 1/2 *[a ^ a] + [a, Psi],  *d a - d Psi - [a, Phi],  d^* a + [Psi, Phi])``
    """
    g, A, phi = c.grid, c.nabla, c.phi
    a, psi = _imag(c)
    k1 = (
        lat.curvature(A, g, c.nabla_ghost)
        - lat.d0(A, phi, g, c.phi_ghost)
        - 0.5 * lat.bracket_wedge_dual(a, a)
        + lat.bracket(a, psi[..., None, :])
    )
    k2 = lat.d1(A, a, g) - lat.d0(A, psi, g) - lat.bracket(a, phi[..., None, :])
    k3 = lat.d0_adjoint(A, a, g) + lat.bracket(psi, phi)
    return k1, k2, k3


def kw_residual(c: Configuration) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kapustin-Witten monopole residual; differs from :func:`kappa` in the middle row."""
    g, A, phi = c.grid, c.nabla, c.phi
    a, psi = _imag(c)
    k1, _, k3 = kappa(c)
    k2 = lat.d1(A, a, g) + lat.d0(A, psi, g) + lat.bracket(a, phi[..., None, :])
    return k1, k2, k3


def _norms(parts, grid) -> list[float]:
    return [lat.norm(p, grid) for p in parts]


def gauge_fix_residual(c0: Configuration, dc: np.ndarray) -> np.ndarray:
    """``d_1^*(b1, phi) - sum_i [a0_i, b2_i] - [Psi0, psi]`` with ``(a0, Psi0)`` from ``c0``."""
    g = c0.grid
    dc = np.asarray(dc)
    lat.check_grid(g, dc[0], dc[1])
    b1, ph = lat.one_part(dc[0]), lat.zero_part(dc[0])
    b2, ps = lat.one_part(dc[1]), lat.zero_part(dc[1])
    A, Phi = c0.nabla, c0.phi
    d1s = lat.d0_adjoint(A, b1, g) - lat.bracket(Phi, ph)
    return d1s - np.sum(lat.bracket(c0.a, b2), axis=-2) - lat.bracket(c0.psi, ps)


def linearized_kappa(c0: Configuration, dc: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact derivative of :func:`kappa` at ``c0`` in the direction ``dc``."""
    g = c0.grid
    dc = np.asarray(dc)
    lat.check_grid(g, dc[0], dc[1])
    A, Phi, a0, Psi0 = c0.nabla, c0.phi, c0.a, c0.psi
    b1, ph = lat.one_part(dc[0]), lat.zero_part(dc[0])
    b2, ps = lat.one_part(dc[1]), lat.zero_part(dc[1])
    P = Phi[..., None, :]

    def d2(b, f):
        return lat.d1(A, b, g) - lat.d0(A, f, g) - lat.bracket(b, P)

    def d1s(b, f):
        return lat.d0_adjoint(A, b, g) - lat.bracket(Phi, f)

    r1 = d2(b1, ph) - lat.bracket_wedge_dual(a0, b2) + lat.bracket(b2, Psi0[..., None, :]) + lat.bracket(a0, ps[..., None, :])
    r2 = d2(b2, ps) + lat.bracket_wedge_dual(b1, a0) - lat.bracket(b1, Psi0[..., None, :]) - lat.bracket(a0, ph[..., None, :])
    r3 = d1s(b2, ps) - np.sum(lat.bracket(b1, a0), axis=-2) + lat.bracket(Psi0, ph)
    return r1, r2, r3


class GaugeFixedMap:
    """``dc -> (kappa(c0 + dc), g_c0(dc))`` stacked as two pairs.

    The doubler term of the linearized operator is carried along so that the
    block linearization is exactly ``(D dm, D dv)`` plus bracket terms in
    ``(a0, Psi0)``: ``W T dm`` enters ``(kappa_1, gauge)`` and ``W T v``
    (the full imaginary part) enters ``(kappa_2, kappa_3)``.
    """

    def __init__(self, c0: Configuration, doubler_weight: float):
        self.c0 = c0
        self.grid = c0.grid
        self._w = doubler_weight * self.grid.h**3

    def _doubler(self, p: np.ndarray) -> np.ndarray:
        if not self._w:
            return np.zeros_like(p)
        return self._w * doubler_T(biharmonic(p, self.grid))

    def __call__(self, dc: np.ndarray) -> np.ndarray:
        c = self.c0.shifted(dc[0], dc[1])
        k1, k2, k3 = kappa(c)
        gauge = gauge_fix_residual(self.c0, dc)
        first = lat.make_pair(k1, gauge) + self._doubler(dc[0])
        second = lat.make_pair(k2, k3) + self._doubler(c.imag_part)
        return _stack(first, second)

    def split(self, dc: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(value at 0, first-order part, second-order part)`` at ``dc``.

        The map is exactly quadratic, so the symmetric and antisymmetric
        parts of ``K(dc)`` and ``K(-dc)`` are the linear and quadratic terms.
        """
        k0 = self(np.zeros_like(dc))
        kp, km = self(dc), self(-dc)
        return k0, 0.5 * (kp - km), 0.5 * (kp + km) - k0


def _block_D(op: LinearizedOperator, dc: np.ndarray) -> np.ndarray:
    return _stack(op.D(dc[0]), op.D(dc[1]))


def _block_Dstar(op: LinearizedOperator, u: np.ndarray) -> np.ndarray:
    return _stack(op.Dstar(u[0]), op.Dstar(u[1]))


def L_term(c0: Configuration, t: float, dc: np.ndarray, op: LinearizedOperator | None = None) -> np.ndarray:
    """``(d kappa_hat(dc) - (D dm, D dv)) / t``: the bracket terms in ``v0``."""
    if t == 0:
        raise ValueError("L_term needs t > 0")
    op = op or LinearizedOperator(c0.real())
    K = GaugeFixedMap(c0, op.doubler_weight)
    _, lin, _ = K.split(dc)
    return (lin - _block_D(op, dc)) / t


def Q_term(c0: Configuration, dc: np.ndarray, doubler_weight: float | None = None) -> np.ndarray:
    """Quadratic remainder ``kappa_hat(dc) - kappa_hat(0) - d kappa_hat(dc)``."""
    from .linops import DOUBLER_WEIGHT

    K = GaugeFixedMap(c0, DOUBLER_WEIGHT if doubler_weight is None else doubler_weight)
    return K.split(dc)[2]


# ----------------------------------------------------------------------------
# Fixed point
# ----------------------------------------------------------------------------


@dataclass
class SolveReport:
    t: float
    s: float
    norm_dstar: float
    iterations: int = 0
    ratios: list = field(default_factory=list)
    increments: list = field(default_factory=list)
    cg_iterations: list = field(default_factory=list)
    converged: bool = False
    diverged: bool = False
    failure: str | None = None
    kappa_norms: list = field(default_factory=list)
    gauge_residual: float = float("nan")
    stabilized_residual: float = float("nan")
    floor: float = float("nan")
    imag_norm: float = float("nan")
    u_norm_H2: float = float("nan")
    exited_unit_ball: bool = False
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def monotone(self) -> bool:
        """Every increment is smaller than the one before it."""
        return all(r < 1.0 for r in self.ratios)


def _u_norm_H2(op, u) -> float:
    return float(np.sqrt(sum(lat.norm_H2(op.m0, ui, op.grid) ** 2 for ui in u)))


def fixed_point_solve(
    m0: Configuration,
    v0: np.ndarray,
    t: float,
    tol: float = 1e-6,
    max_outer: int = 50,
    op: LinearizedOperator | None = None,
    u0: np.ndarray | None = None,
    cg_tol: float = CG_TOL,
    norm_dstar: float | None = None,
    stop_after: int | None = None,
) -> tuple[Configuration, SolveReport, np.ndarray]:
    """Iterate ``u <- F(u)`` and return ``(c, report, u)``.

    ``F(u) = -(t^2/s) G(kappa(m0, v0), 0) - t G(L(D* u)) - s G(Q(D* u, D* u))``
    with ``s = t / |D*|`` and the output ``c = (m0 + s D* u1, t v0 + s D* u2)``.

    Parameters
    ----------
    m0 : Configuration
        Real base monopole.
    v0 : ndarray
        Tangent pair of unit L2 norm.
    tol : float
        Stop when ``|u_{n+1} - u_n| <= tol |u_{n+1}|``.
    stop_after : int, optional
        Return after this many steps whatever the increments (used by probes).
    """
    start = time.perf_counter()
    op = op or LinearizedOperator(m0)
    g = m0.grid
    nd = norm_dstar if norm_dstar is not None else norm_Dstar(op)
    if t == 0:
        rep = SolveReport(t=0.0, s=0.0, norm_dstar=nd, iterations=1, converged=True)
        c = m0.with_imaginary(lat.zeros_pair(g))
        _finish(rep, op, m0, c, v0, 0.0, np.zeros((2,) + op.shape), start)
        return c, rep, np.zeros((2,) + op.shape)
    s = t / nd
    rep = SolveReport(t=float(t), s=float(s), norm_dstar=float(nd))

    # t^2 (kappa(m0, v0), 0) in the stacked layout
    unit = m0.with_imaginary(v0)
    Kunit = GaugeFixedMap(unit, op.doubler_weight)
    base = t**2 * Kunit(np.zeros((2,) + op.shape))
    c0 = m0.with_imaginary(t * np.asarray(v0))
    K = GaugeFixedMap(c0, op.doubler_weight)
    k0 = K(np.zeros((2,) + op.shape))

    u = np.zeros((2,) + op.shape) if u0 is None else np.array(u0, dtype=float)
    prev_inc = None
    streak = 0
    limit = max_outer if stop_after is None else stop_after
    for it in range(1, limit + 1):
        dc = s * _block_Dstar(op, u)
        kp, km = K(dc), K(-dc)
        lin = 0.5 * (kp - km)
        quad = 0.5 * (kp + km) - k0
        rhs = base + (lin - _block_D(op, dc)) + quad
        new = np.empty_like(u)
        cg_its = []
        try:
            for b in range(2):
                res = green_solve(op, rhs[b], tol=cg_tol, x0=-s * u[b])
                new[b] = -res.x / s
                cg_its.append(res.iterations)
        except GreenSolveError as exc:
            rep.failure = str(exc)
            rep.iterations = it
            break
        inc = float(np.linalg.norm(new - u))
        size = float(np.linalg.norm(new))
        rep.increments.append(inc)
        rep.cg_iterations.append(cg_its)
        if prev_inc is not None and prev_inc > 0:
            ratio = inc / prev_inc
            rep.ratios.append(ratio)
            streak = streak + 1 if ratio >= 1.0 else 0
        prev_inc = inc
        u = new
        rep.iterations = it
        if not np.all(np.isfinite(u)):
            rep.diverged = True
            rep.failure = "non-finite iterate"
            break
        if streak >= DIVERGENCE_STREAK:
            rep.diverged = True
            rep.failure = f"contraction ratio >= 1 for {DIVERGENCE_STREAK} consecutive steps"
            break
        if inc <= tol * size or size == 0.0:
            rep.converged = True
            break

    dstar_u = _block_Dstar(op, u)
    c = m0.shifted(s * dstar_u[0]).with_imaginary(t * np.asarray(v0) + s * dstar_u[1])
    _finish(rep, op, m0, c, v0, t, u, start, K=K, c0=c0, k0=k0, base=base, dc=s * dstar_u)
    return c, rep, u


def _finish(rep, op, m0, c, v0, t, u, start, K=None, c0=None, k0=None, base=None, dc=None):
    g = op.grid
    rep.kappa_norms = _norms(kappa(c), g)
    if K is not None:
        rep.gauge_residual = lat.norm(gauge_fix_residual(c0, dc), g)
        rep.stabilized_residual = lat.norm(K(dc), g)
        rep.floor = lat.norm(k0 - base, g)
    else:
        rep.gauge_residual = 0.0
        rep.stabilized_residual = rep.kappa_norms[0]
        rep.floor = lat.norm(bogomolny_residual(m0), g)
    rep.imag_norm = lat.norm(c.imag_part, g)
    if np.all(np.isfinite(u)):
        rep.u_norm_H2 = _u_norm_H2(op, u)
        rep.exited_unit_ball = rep.u_norm_H2 > 1.0
    rep.wall_time = time.perf_counter() - start


def t_max_probe(
    m0: Configuration,
    v0: np.ndarray,
    op: LinearizedOperator | None = None,
    t_start: float = 0.05,
    t_min: float = 1e-3,
    t_cap: float = 10.0,
    norm_dstar: float | None = None,
) -> dict:
    """Largest dyadic ``t`` whose iteration contracts.

    A probe contracts when ``PROBE_STEPS`` consecutive ratios stay below
    ``PROBE_RATIO`` (or the iteration converges first). Returns a dict with
    ``t_max``, every probed ``t`` with its verdict, and the spectral
    surrogates ``|D*|``.
    """
    op = op or LinearizedOperator(m0)
    nd = norm_dstar if norm_dstar is not None else norm_Dstar(op)
    probes = []

    def contracts(t):
        _, rep, _ = fixed_point_solve(m0, v0, t, op=op, norm_dstar=nd, stop_after=PROBE_STEPS + 1, tol=1e-10)
        ok = rep.failure is None and (rep.converged or (len(rep.ratios) >= PROBE_STEPS and max(rep.ratios) < PROBE_RATIO))
        probes.append({"t": t, "contracts": bool(ok), "ratios": rep.ratios})
        return ok

    t = t_start
    best = 0.0
    if contracts(t):
        best = t
        while 2 * t <= t_cap and contracts(2 * t):
            t *= 2
            best = t
    else:
        while t / 2 >= t_min:
            t /= 2
            if contracts(t):
                best = t
                break
    monotone = all(p["contracts"] for p in probes if p["t"] <= best)
    return {"t_max": best, "probes": probes, "monotone": monotone, "norm_dstar": nd}
