"""The linearized Bogomolny operator, its adjoint, Green operator and spectrum.

For a pair ``v = (a, Psi)`` around a real base ``m0 = (A0, Phi0)``::

    D v  = (*d_A a - d_A Psi - [a, Phi0],  d_A^* a - [Phi0, Psi])
    D* w = (*d_A w1 + d_A w0 - [Phi0, w1], -d_A^* w1 + [Phi0, w0])

Central differences on an odd Dirichlet grid give every antisymmetric 1D
difference matrix a kernel, and the operator above inherits 12 exact
checkerboard zero modes plus doubled copies of every low mode. The
operator therefore carries a doubler term ``W T v`` with ``W`` the
biharmonic stencil scaled by ``doubler_weight * h^3`` and ``T`` a fixed
orthogonal map of the four slots. ``T`` anticommutes with the principal
symbol in the sense that the cross terms cancel, so on a flat base
``D D* = -Laplacian + W^2``. On smooth fields ``W`` is ``O(h^3)``; on
checkerboard modes it is ``O(1/h)``. Pass ``doubler_weight=0`` for the
bare operator.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft
from scipy.sparse.linalg import LinearOperator, cg, eigsh, lobpcg

from . import _stencil
from . import lattice as lat
from .monopole import Configuration, bogomolny_residual, interior_norm

DOUBLER_WEIGHT = 1.0 / 16.0
CG_TOL = 1e-8
RESTARTS = 4
BASE_RESIDUAL_WARN = 0.5
NEAR_KERNEL_DIM = 4
DIRECTIONS = ("x", "y", "z", "phase")


class GreenSolveError(RuntimeError):
    """Conjugate gradients did not reach the requested tolerance."""

    def __init__(self, result: "GreenResult"):
        super().__init__(
            f"CG stopped after {result.iterations} iterations with relative residual {result.residual:.3e}"
        )
        self.result = result


class DegenerateTangent(ValueError):
    pass


class StagnationError(RuntimeError):
    pass


# ----------------------------------------------------------------------------
# Array reference implementation
# ----------------------------------------------------------------------------


def biharmonic(f: np.ndarray, grid: lat.Grid) -> np.ndarray:
    """``sum_i delta_i^4 f`` with the 5-point stencil, zero outside the grid."""
    out = 6.0 * 3 * f
    for axis in range(3):
        for off, coef in ((1, -4.0), (2, 1.0)):
            if grid.periodic:
                out += coef * (np.roll(f, off, axis) + np.roll(f, -off, axis))
                continue
            sl_dst = [slice(None)] * f.ndim
            sl_src = [slice(None)] * f.ndim
            sl_dst[axis], sl_src[axis] = slice(off, None), slice(None, -off)
            out[tuple(sl_dst)] += coef * f[tuple(sl_src)]
            sl_dst[axis], sl_src[axis] = slice(None, -off), slice(off, None)
            out[tuple(sl_dst)] += coef * f[tuple(sl_src)]
    return out / grid.h**4


def doubler_T(v: np.ndarray) -> np.ndarray:
    """``(a1, a2, a3, Psi) -> (-Psi, a3, -a2, -a1)``."""
    return np.stack([-v[..., 3, :], v[..., 2, :], -v[..., 1, :], -v[..., 0, :]], axis=-2)


def doubler_T_transpose(v: np.ndarray) -> np.ndarray:
    return np.stack([-v[..., 3, :], -v[..., 2, :], v[..., 1, :], -v[..., 0, :]], axis=-2)


def d2(m0: Configuration, v: np.ndarray) -> np.ndarray:
    """``*d_A a - d_A Psi - [a, Phi0]``."""
    g, A, phi = m0.grid, m0.nabla, m0.phi
    a, psi = lat.one_part(v), lat.zero_part(v)
    return lat.d1(A, a, g) - lat.d0(A, psi, g) - lat.bracket(a, phi[..., None, :])


def d1_star(m0: Configuration, v: np.ndarray) -> np.ndarray:
    """``d_A^* a - [Phi0, Psi]``."""
    g, A, phi = m0.grid, m0.nabla, m0.phi
    return lat.d0_adjoint(A, lat.one_part(v), g) - lat.bracket(phi, lat.zero_part(v))


def reference_D(m0: Configuration, v: np.ndarray, doubler_weight: float = DOUBLER_WEIGHT) -> np.ndarray:
    out = lat.make_pair(d2(m0, v), d1_star(m0, v))
    if doubler_weight:
        g = m0.grid
        out += doubler_weight * g.h**3 * doubler_T(biharmonic(v, g))
    return out


def reference_Dstar(m0: Configuration, w: np.ndarray, doubler_weight: float = DOUBLER_WEIGHT) -> np.ndarray:
    g, A, phi = m0.grid, m0.nabla, m0.phi
    w1, w0 = lat.one_part(w), lat.zero_part(w)
    one = lat.d1(A, w1, g) + lat.d0(A, w0, g) - lat.bracket(phi[..., None, :], w1)
    zero = -lat.d0_adjoint(A, w1, g) + lat.bracket(phi, w0)
    out = lat.make_pair(one, zero)
    if doubler_weight:
        out += doubler_weight * g.h**3 * doubler_T_transpose(biharmonic(w, g))
    return out


# ----------------------------------------------------------------------------
# Operator object
# ----------------------------------------------------------------------------


@dataclass
class GreenResult:
    x: np.ndarray
    iterations: int
    residual: float
    converged: bool


class LinearizedOperator:
    """``D`` around a real base monopole, applied by fused site loops.

    Parameters
    ----------
    m0 : Configuration
        Real base configuration. A warning is issued when its interior
        Bogomolny residual exceeds ``BASE_RESIDUAL_WARN``.
    doubler_weight : float
        Coefficient of the biharmonic doubler term; 0 gives the bare operator.
    """

    def __init__(self, m0: Configuration, doubler_weight: float = DOUBLER_WEIGHT):
        if not m0.is_real:
            raise ValueError("base configuration must be real (a = 0, psi = 0)")
        self.m0 = m0
        self.grid = m0.grid
        self.doubler_weight = float(doubler_weight)
        self._A = np.ascontiguousarray(m0.nabla, dtype=float)
        self._phi = np.ascontiguousarray(m0.phi, dtype=float)
        self._nb = _stencil.neighbour_table(self.grid.n, self.grid.periodic)
        self._inv2h = 1.0 / (2.0 * self.grid.h)
        self._wc = self.doubler_weight / self.grid.h
        self._near_kernel = None
        res = interior_norm(bogomolny_residual(m0), self.grid)
        if res > BASE_RESIDUAL_WARN:
            warnings.warn(f"base configuration has Bogomolny residual {res:.3g}", stacklevel=2)

    @property
    def shape(self) -> tuple:
        return self.grid.shape + (4, 3)

    @property
    def dof(self) -> int:
        return int(np.prod(self.shape))

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != self.shape:
            raise lat.GridMismatch(f"pair of shape {v.shape} does not match operator shape {self.shape}")
        return np.ascontiguousarray(v)

    def D(self, v: np.ndarray, bare: bool = False) -> np.ndarray:
        out = np.empty(self.shape)
        _stencil.apply_D(self._A, self._phi, self._check(v), self._nb, self._inv2h, 0.0 if bare else self._wc, out)
        return out

    def Dstar(self, w: np.ndarray, bare: bool = False) -> np.ndarray:
        out = np.empty(self.shape)
        _stencil.apply_Dstar(self._A, self._phi, self._check(w), self._nb, self._inv2h, 0.0 if bare else self._wc, out)
        return out

    def DDstar(self, u: np.ndarray) -> np.ndarray:
        return self.D(self.Dstar(u))

    def DstarD(self, v: np.ndarray) -> np.ndarray:
        return self.Dstar(self.D(v))

    # -- preconditioners ---------------------------------------------------

    @cached_property
    def _symbol(self) -> np.ndarray:
        """Flat-base symbol of ``D D*`` in the sine (or Fourier) basis."""
        g = self.grid
        n = g.n
        if g.periodic:
            theta = 2.0 * np.pi * np.arange(n) / n
        else:
            theta = np.pi * np.arange(1, n + 1) / (n + 1)
        s2 = np.sin(theta) ** 2 / g.h**2
        b2 = (2.0 - 2.0 * np.cos(theta)) ** 2
        grad = s2[:, None, None] + s2[None, :, None] + s2[None, None, :]
        w = self._wc * (b2[:, None, None] + b2[None, :, None] + b2[None, None, :])
        sym = grad + w**2
        sym[sym < 1e-12] = 1.0
        return sym

    def spectral_precondition(self, r: np.ndarray) -> np.ndarray:
        """Apply the inverse of the flat-base operator by fast sine transforms."""
        r = np.ascontiguousarray(np.moveaxis(r.reshape(self.shape[:3] + (12,)), -1, 0))
        axes = (1, 2, 3)
        if self.grid.periodic:
            out = scipy.fft.ifftn(scipy.fft.fftn(r, axes=axes) / self._symbol, axes=axes).real
        else:
            rk = scipy.fft.dstn(r, type=1, axes=axes, norm="ortho", overwrite_x=True)
            rk /= self._symbol
            out = scipy.fft.idstn(rk, type=1, axes=axes, norm="ortho", overwrite_x=True)
        return np.moveaxis(out, 0, -1).reshape(self.shape)

    @cached_property
    def jacobi_diagonal(self) -> np.ndarray:
        """Exact diagonal of ``D D*``: squared row norms of the stencil of ``D``."""
        g = self.grid
        probe = lat.Grid(g.n, g.h, periodic=True)
        # pointwise block P(x) e_s from constant unit fields on a periodic copy
        diag = np.zeros(self.shape)
        m_flat = Configuration(probe, self.m0.nabla, self.m0.phi)
        n = g.n
        wc = self._wc
        T = doubler_T(np.eye(12).reshape(12, 4, 3)).reshape(12, 12).T
        # centre entry: P(x) + wc * 18 T  (the biharmonic centre weight is 6 per axis)
        for s in range(12):
            e = np.zeros(self.shape)
            e[..., s // 3, s % 3] = 1.0
            col = reference_D(m_flat, e, 0.0) + wc * 18.0 * doubler_T(e)
            diag += col**2
        # neighbour entries: +-M_i/(2h) + wc*(-4) T at distance 1, wc T at distance 2
        for axis in range(3):
            for sign in (1.0, -1.0):
                e_cols = np.zeros((12, 12))
                for s in range(12):
                    e = np.zeros((1, 1, 1, 4, 3))
                    e[0, 0, 0, s // 3, s % 3] = 1.0
                    # symbol row of the derivative part along this axis
                    e_cols[:, s] = _principal_symbol(axis, e).reshape(12) * sign / (2 * g.h)
                block = e_cols + wc * (-4.0) * T
                row_sq = np.sum(block**2, axis=1).reshape(4, 3)
                present = _present(n, axis, sign, 1, g.periodic)
                diag += present[..., None, None] * row_sq
                present2 = _present(n, axis, sign, 2, g.periodic)
                diag += present2[..., None, None] * np.sum((wc * T) ** 2, axis=1).reshape(4, 3)
        return diag

    def jacobi_precondition(self, r: np.ndarray) -> np.ndarray:
        return r.reshape(self.shape) / self.jacobi_diagonal

    # -- low spectrum --------------------------------------------------------

    def near_kernel(self, k: int = NEAR_KERNEL_DIM, **kwargs) -> tuple[np.ndarray, np.ndarray]:
        """Lowest ``k`` eigenpairs of ``D* D``; cached for the default call."""
        if kwargs or k != NEAR_KERNEL_DIM:
            return low_spectrum(self, k, **kwargs)[:2]
        if self._near_kernel is None:
            cands = np.stack([raw_tangent(self.m0, d) for d in DIRECTIONS])
            vals, vecs, _ = low_spectrum(self, k, guess=cands)
            self._near_kernel = (vals, vecs)
        return self._near_kernel


def _principal_symbol(axis: int, e: np.ndarray) -> np.ndarray:
    """Coefficient of the central difference along ``axis`` in the flat operator."""
    a, psi = e[..., :3, :], e[..., 3, :]
    out = np.zeros_like(e)
    i, j = (axis + 1) % 3, (axis + 2) % 3
    # curl: slot j gets +d_axis a_i, slot i gets -d_axis a_j
    out[..., j, :] += a[..., i, :]
    out[..., i, :] -= a[..., j, :]
    out[..., axis, :] -= psi
    out[..., 3, :] -= a[..., axis, :]
    return out


def _present(n: int, axis: int, sign: float, dist: int, periodic: bool) -> np.ndarray:
    """Sites whose neighbour at ``sign*dist`` along ``axis`` lies on the grid."""
    idx = np.arange(n)
    ok = np.ones(n) if periodic else ((idx + int(sign) * dist >= 0) & (idx + int(sign) * dist < n)).astype(float)
    shape = [1, 1, 1]
    shape[axis] = n
    return np.broadcast_to(ok.reshape(shape), (n, n, n))


# ----------------------------------------------------------------------------
# Module-level operations
# ----------------------------------------------------------------------------


def apply_D(op: LinearizedOperator, v: np.ndarray) -> np.ndarray:
    return op.D(v)


def apply_Dstar(op: LinearizedOperator, w: np.ndarray) -> np.ndarray:
    return op.Dstar(w)


def dPhi_W(op: LinearizedOperator, c: np.ndarray) -> np.ndarray:
    """``(*[a ^ d_A Phi0] - [d_A Phi0, Psi], sum_i [(d_A Phi0)_i, a_i])``."""
    m0 = op.m0
    E = lat.d0(m0.nabla, m0.phi, op.grid, m0.phi_ghost)
    a, psi = lat.one_part(c), lat.zero_part(c)
    one = lat.bracket_wedge_dual(a, E) - lat.bracket(E, psi[..., None, :])
    zero = np.sum(lat.bracket(E, a), axis=-2)
    return lat.make_pair(one, zero)


def smooth_pair(grid: lat.Grid, seed: int = 0) -> np.ndarray:
    """Gaussian-localised pair with random constant coefficients, grid independent."""
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal((4, 3))
    x = grid.points
    env = np.exp(-0.5 * np.sum(x**2, axis=-1)) * (1.0 + 0.3 * x[..., 0])
    return env[..., None, None] * coef


def weitzenbock_defect(op: LinearizedOperator, c: np.ndarray) -> float:
    """``|D*D c - D D* c - 2 (d_A Phi0)^W c| / |c|_H1`` for the bare operator."""
    nc = lat.norm_H1(op.m0, c, op.grid)
    if nc == 0.0:
        raise ValueError("weitzenbock_defect needs a nonzero pair")
    lhs = op.Dstar(op.D(c, bare=True), bare=True) - op.D(op.Dstar(c, bare=True), bare=True)
    return lat.norm(lhs - 2.0 * dPhi_W(op, c), op.grid) / nc


def green_solve(
    op: LinearizedOperator,
    rhs: np.ndarray,
    tol: float = CG_TOL,
    max_iter: int | None = None,
    x0: np.ndarray | None = None,
    preconditioner: str = "spectral",
    raise_on_failure: bool = True,
    shift: float = 0.0,
) -> GreenResult:
    """Solve ``(D D* + shift) u = rhs`` by preconditioned conjugate gradients.

    Parameters
    ----------
    tol : float
        Relative residual target ``|D D* u - rhs| <= tol |rhs|``.
    max_iter : int, optional
        Defaults to ``10 * sqrt(dof)``.
    x0 : ndarray, optional
        Warm start.
    preconditioner : {"spectral", "jacobi", "none"}
    shift : float
        Nonnegative Tikhonov shift; 0 gives the Green operator proper.

    Raises
    ------
    GreenSolveError
        If the tolerance is not met and ``raise_on_failure`` is set.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != op.shape:
        raise lat.GridMismatch(f"rhs of shape {rhs.shape} does not match {op.shape}")
    if not np.all(np.isfinite(rhs)):
        raise ValueError("rhs contains non-finite values")
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return GreenResult(np.zeros(op.shape), 0, 0.0, True)
    if max_iter is None:
        max_iter = int(10 * np.sqrt(op.dof))
    N = op.dof
    if shift < 0:
        raise ValueError("shift must be nonnegative")

    def apply(x):
        x = x.reshape(op.shape)
        return op.DDstar(x) + shift * x if shift else op.DDstar(x)

    A = LinearOperator((N, N), matvec=lambda x: apply(x).ravel(), dtype=float)
    M = None
    if preconditioner == "spectral":
        M = LinearOperator((N, N), matvec=lambda x: op.spectral_precondition(x).ravel(), dtype=float)
    elif preconditioner == "jacobi":
        M = LinearOperator((N, N), matvec=lambda x: op.jacobi_precondition(x).ravel(), dtype=float)
    elif preconditioner != "none":
        raise ValueError(f"unknown preconditioner {preconditioner!r}")
    count = [0]

    def cb(_):
        count[0] += 1

    # the recursive CG residual drifts from the true one on ill-conditioned
    # bases, so restart from the current iterate until the true residual agrees
    x = None if x0 is None else np.asarray(x0, float).ravel()
    b = rhs.ravel()
    for _ in range(RESTARTS + 1):
        x, _info = cg(A, b, x0=x, rtol=tol, atol=0.0, maxiter=max(max_iter - count[0], 1), M=M, callback=cb)
        res = float(np.linalg.norm(A.matvec(x) - b)) / bnorm
        if res <= tol or count[0] >= max_iter:
            break
    x = x.reshape(op.shape)
    result = GreenResult(x, count[0], res, res <= tol)
    if not result.converged and raise_on_failure:
        raise GreenSolveError(result)
    return result


def _rayleigh(op, x, apply):
    return float(np.sum(x * apply(x)) / np.sum(x * x))


def norm_Dstar(op: LinearizedOperator, rtol: float = 1e-4, max_iter: int = 300, seed: int = 0) -> float:
    """``sqrt(lambda_max(D D*))`` by power iteration in discrete L2."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.shape)
    lam = 0.0
    for _ in range(max_iter):
        y = op.DDstar(x)
        new = float(np.sum(x * y) / np.sum(x * x))
        x = y / np.linalg.norm(y)
        if abs(new - lam) <= rtol * new:
            return float(np.sqrt(new))
        lam = new
    return float(np.sqrt(lam))


def lambda_min_DDstar(
    op: LinearizedOperator, rtol: float = 1e-4, max_iter: int = 30, seed: int = 0, tol: float = 1e-7
) -> float:
    """Smallest eigenvalue of ``D D*`` by inverse power iteration.

    Raises
    ------
    StagnationError
        If the Rayleigh quotient has not settled after ``max_iter`` steps.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.shape)
    x /= np.linalg.norm(x)
    lam = np.inf
    guess = None
    for _ in range(max_iter):
        y = green_solve(op, x, tol=tol, x0=guess).x
        new = float(np.sum(x * x) / np.sum(x * y))
        guess = y / np.linalg.norm(y) / new
        x = y / np.linalg.norm(y)
        if abs(new - lam) <= rtol * new:
            return new
        lam = new
    raise StagnationError(f"inverse iteration did not settle; last estimate {lam:.6g}")


def low_spectrum(
    op: LinearizedOperator,
    k: int,
    guess: np.ndarray | None = None,
    extra: int = 4,
    tol: float = 1e-7,
    max_iter: int = 400,
    seed: int = 0,
):
    """Lowest ``k`` eigenpairs of ``D* D`` by preconditioned block Krylov iteration.

    Uses LOBPCG with the flat-base sine-transform preconditioner and a
    block of ``k + extra`` vectors so the ``k``-th value is separated from
    the rest of the block. Returns ``(values, vectors, residual_norms)``;
    vectors have shape ``(k,) + op.shape`` and unit discrete L2 norm.
    """
    rng = np.random.default_rng(seed)
    m = k + extra
    X = rng.standard_normal((op.dof, m))
    if guess is not None:
        G = np.asarray(guess, float).reshape(len(guess), -1).T
        X[:, : G.shape[1]] = G
    N = op.dof
    A = LinearOperator((N, N), matvec=lambda x: op.DstarD(x.reshape(op.shape)).ravel(),
                       matmat=lambda X: np.stack([op.DstarD(c.reshape(op.shape)).ravel() for c in X.T], axis=1),
                       dtype=float)
    M = LinearOperator((N, N), matvec=lambda x: op.spectral_precondition(x).ravel(),
                       matmat=lambda X: np.stack([op.spectral_precondition(c).ravel() for c in X.T], axis=1),
                       dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        vals, vecs, res = lobpcg(A, X, M=M, tol=tol, maxiter=max_iter, largest=False,
                                 retResidualNormsHistory=True)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    scale = 1.0 / np.sqrt(lat.KILLING_SCALE * op.grid.cell_volume)
    vectors = np.stack([vecs[:, i].reshape(op.shape) * scale for i in range(k)])
    return vals[:k], vectors, np.asarray(res[-1])[order][:k]


def rotate_xyz(v: np.ndarray) -> np.ndarray:
    """Image of a pair under the rotation ``e_x -> e_y -> e_z -> e_x``.

    The rotation acts on the site, the form slot and the isospin index
    together. It fixes the seed exactly and commutes with the bare ``D``;
    the doubler term breaks it at lattice scale.
    """
    w = np.transpose(v, (2, 0, 1, 3, 4))[..., [2, 0, 1]]
    return np.concatenate([w[..., [2, 0, 1], :], w[..., 3:, :]], axis=-2)


def kernel_and_gap(
    op: LinearizedOperator,
    tol: float = 1e-5,
    max_iter: int = 400,
    lanczos_modes: int = 4,
    seed: int = 0,
):
    """The near kernel of ``D* D`` and the first eigenvalue above it.

    Single-vector Lanczos resolves one member of each degenerate cluster,
    so it cannot count the near kernel by itself. It is used to locate the
    lowest mode outside the span of the raw tangents; that mode and its
    two rotated images complete a LOBPCG start block whose edge sits at a
    spectral gap. Returns ``(values, vectors, residuals, lanczos_values)``
    for the lowest ``NEAR_KERNEL_DIM + 1`` pairs.
    """
    g = op.grid
    tangents = np.stack([raw_tangent(op.m0, d) for d in DIRECTIONS]).reshape(NEAR_KERNEL_DIM, -1)
    Q, _ = np.linalg.qr(tangents.T)
    N = op.dof
    A = LinearOperator((N, N), matvec=lambda x: op.DstarD(x.reshape(op.shape)).ravel(), dtype=float)
    v0 = np.random.default_rng(seed).standard_normal(N)
    lv, lvec = eigsh(A, k=lanczos_modes, which="SA", ncv=max(6 * lanczos_modes, 20), tol=1e-6, v0=v0)
    order = np.argsort(lv)
    outside = [i for i in order if np.linalg.norm(Q.T @ lvec[:, i]) < 0.5]
    if not outside:
        raise StagnationError("Lanczos found no mode outside the tangent span")
    u = lvec[:, outside[0]].reshape(op.shape)
    block = np.concatenate([tangents.reshape((NEAR_KERNEL_DIM,) + op.shape),
                            np.stack([u, rotate_xyz(u), rotate_xyz(rotate_xyz(u))])])
    vals, vecs, res = low_spectrum(op, NEAR_KERNEL_DIM + 1, guess=block, extra=2, tol=tol, max_iter=max_iter, seed=seed)
    return vals, vecs, res, np.sort(lv)


# ----------------------------------------------------------------------------
# Tangent vectors
# ----------------------------------------------------------------------------


def raw_tangent(m0: Configuration, direction: str) -> np.ndarray:
    """Unprojected zero-mode candidate.

    A translation along ``e_k`` moves ``(A, Phi)`` by ``(i_k F, nabla_k Phi)``;
    the phase rotation generated by ``Phi`` moves it by ``(d_A Phi, 0)``.
    """
    g = m0.grid
    F = lat.curvature(m0.nabla, g, m0.nabla_ghost)
    E = lat.d0(m0.nabla, m0.phi, g, m0.phi_ghost)
    if direction == "phase":
        return lat.make_pair(E, lat.zeros0(g))
    if direction not in ("x", "y", "z"):
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    k = "xyz".index(direction)
    # (i_k F)_i = F_ki = sum_l eps_kil (*F)_l
    a = np.einsum("il,...la->...ia", lat.LEVI_CIVITA[k], F)
    return lat.make_pair(a, E[..., k, :])


def default_shift(grid: lat.Grid) -> float:
    """Tikhonov shift for tangent projection: 1e-3 of the lowest flat mode."""
    theta = np.pi / (grid.n + 1)
    return 1e-3 * 3.0 * np.sin(theta) ** 2 / grid.h**2


def make_tangent(
    op: LinearizedOperator,
    direction: str,
    sweeps: int = 2,
    shift: float | None = None,
    tol: float = CG_TOL,
    min_overlap: float = 1e-3,
) -> np.ndarray:
    """Unit-norm tangent vector along ``direction``.

    Each sweep replaces the candidate ``v`` by ``v - D* G_e D v`` with the
    shifted Green operator ``G_e = (D D* + e)^-1``. On a truncated grid ``D``
    is invertible and the unshifted projection would remove everything;
    with the shift, eigencomponents of ``D* D`` far below ``e`` are kept
    and those far above it are damped by ``e / lambda`` per sweep.

    Raises
    ------
    DegenerateTangent
        If less than ``min_overlap`` of the candidate survives projection.
    """
    g = op.grid
    eps = default_shift(g) if shift is None else shift
    v = raw_tangent(op.m0, direction)
    n0 = lat.norm(v, g)
    if n0 == 0.0:
        raise DegenerateTangent(f"direction {direction!r} has a vanishing candidate")
    v = v / n0
    for _ in range(sweeps):
        u = green_solve(op, op.D(v), tol=tol, shift=eps).x
        v = v - op.Dstar(u)
    n1 = lat.norm(v, g)
    if n1 < min_overlap:
        raise DegenerateTangent(f"direction {direction!r} is annihilated by the projection")
    return v / n1


def tangent_defect(op: LinearizedOperator, v: np.ndarray) -> float:
    """``|D v| / |v|_H1``."""
    return lat.norm(op.D(v), op.grid) / lat.norm_H1(op.m0, v, op.grid)
