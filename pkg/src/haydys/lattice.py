"""Lattice geometry and su(2)-valued differential forms on a cubic grid.

Fields are plain numpy arrays with the Lie-algebra index last:

* 0-forms (``Field0``) have shape ``(n, n, n, 3)``,
* 1-forms (``Field1``) have shape ``(n, n, n, 3, 3)`` with the form index
  (dx1, dx2, dx3) second to last,
* pairs ``(a, Psi)`` of a 1-form and a 0-form are packed into one array of
  shape ``(n, n, n, 4, 3)``; slots 0-2 hold the 1-form, slot 3 the 0-form.

2-forms are stored through their Hodge duals, so a 2-form is held in a
``Field1``: slot ``k`` carries the coefficient of ``dx^i ^ dx^j`` with
``(i, j, k)`` cyclic.

The Lie algebra is su(2) in the basis ``T_a = -i sigma_a / 2``. In that basis
``[T_a, T_b] = eps_abc T_c`` so the bracket is the cross product, and the
invariant inner product ``<x, y> = -2 tr(xy)`` is the dot product scaled by
``KILLING_SCALE``.

Derivatives are central differences. A stencil that reaches past the edge of
the grid reads the ``ghost`` array when one is supplied (an exterior model of
the field, padded by one site on every side) and zero otherwise. On periodic
grids the stencils wrap around and ghosts are ignored.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

KILLING_SCALE = 1.0
MIN_SITES = 9

# eps[k, i, j]
LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0

_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Cubic lattice with ``n`` sites per axis centred on the origin.

    ``n`` must be odd so that the origin is a lattice site.
    """

    n: int
    h: float
    periodic: bool = False

    def __post_init__(self):
        if self.n < MIN_SITES or self.n % 2 == 0:
            raise ValueError(f"n must be odd and >= {MIN_SITES}, got {self.n}")
        if not self.h > 0:
            raise ValueError(f"lattice spacing must be positive, got {self.h}")

    @classmethod
    def from_radius(cls, n: int, radius: float, periodic: bool = False) -> "Grid":
        return cls(n, 2.0 * radius / (n - 1), periodic)

    @property
    def radius(self) -> float:
        return self.h * (self.n - 1) / 2

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def cell_volume(self) -> float:
        return self.h**3

    @property
    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - (self.n - 1) / 2) * self.h

    @cached_property
    def points(self) -> np.ndarray:
        """Site positions, shape ``(n, n, n, 3)``."""
        x = self.axis
        return np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1)

    @cached_property
    def r(self) -> np.ndarray:
        return np.sqrt(np.sum(self.points**2, axis=-1))

    @cached_property
    def rho(self) -> np.ndarray:
        return np.sqrt(1.0 + self.r**2)

    @cached_property
    def padded_points(self) -> np.ndarray:
        """Site positions including one ghost layer, shape ``(n+2,)*3 + (3,)``."""
        x = (np.arange(-1, self.n + 1) - (self.n - 1) / 2) * self.h
        return np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1)

    def interior(self, margin: float) -> np.ndarray:
        """Mask of sites whose sup-distance to the grid edge exceeds ``margin``."""
        return np.max(np.abs(self.points), axis=-1) <= self.radius - margin

    def metadata(self) -> dict:
        return {"n": self.n, "h": self.h, "radius": self.radius, "periodic": self.periodic}


# ----------------------------------------------------------------------------
# Lie algebra
# ----------------------------------------------------------------------------


def bracket(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pointwise su(2) bracket over the last axis."""
    x0, x1, x2 = x[..., 0], x[..., 1], x[..., 2]
    y0, y1, y2 = y[..., 0], y[..., 1], y[..., 2]
    return np.stack((x1 * y2 - x2 * y1, x2 * y0 - x0 * y2, x0 * y1 - x1 * y0), axis=-1)


def lie_dot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return KILLING_SCALE * np.sum(x * y, axis=-1)


def to_matrix(x: np.ndarray) -> np.ndarray:
    """2x2 anti-Hermitian matrix sum_a x_a T_a with T_a = -i sigma_a / 2."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    basis = np.stack((sx, sy, sz)) * (-0.5j)
    return np.tensordot(x, basis, axes=([-1], [0]))


def from_matrix(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_matrix` for traceless anti-Hermitian input."""
    return np.stack(
        (
            -2.0 * np.imag(m[..., 0, 1]),
            2.0 * np.real(m[..., 1, 0]),
            -2.0 * np.imag(m[..., 0, 0]),
        ),
        axis=-1,
    )


# ----------------------------------------------------------------------------
# Field containers
# ----------------------------------------------------------------------------


def zeros0(grid: Grid) -> np.ndarray:
    return np.zeros(grid.shape + (3,))


def zeros1(grid: Grid) -> np.ndarray:
    return np.zeros(grid.shape + (3, 3))


def zeros_pair(grid: Grid) -> np.ndarray:
    return np.zeros(grid.shape + (4, 3))


def make_pair(one: np.ndarray, zero: np.ndarray) -> np.ndarray:
    return np.concatenate((one, zero[..., None, :]), axis=-2)


def one_part(p: np.ndarray) -> np.ndarray:
    return p[..., :3, :]


def zero_part(p: np.ndarray) -> np.ndarray:
    return p[..., 3, :]


def check_grid(grid: Grid, *fields: np.ndarray) -> None:
    for f in fields:
        if f.shape[:3] != grid.shape:
            raise GridMismatch(f"field of shape {f.shape} does not live on {grid.shape} grid")


# ----------------------------------------------------------------------------
# Exterior calculus
# ----------------------------------------------------------------------------


def _faces(ghost: np.ndarray, axis: int):
    """Low and high ghost faces of a padded array along ``axis``."""
    inner = [slice(1, -1)] * 3
    lo, hi = list(inner), list(inner)
    lo[axis], hi[axis] = 0, -1
    return ghost[tuple(lo)], ghost[tuple(hi)]


def cdiff(f: np.ndarray, axis: int, grid: Grid, ghost: np.ndarray | None = None) -> np.ndarray:
    """Central difference of ``f`` along a lattice axis."""
    if grid.periodic:
        return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2.0 * grid.h)
    out = np.empty_like(f)
    sl = [slice(None)] * f.ndim

    def at(s):
        sl[axis] = s
        return tuple(sl)

    out[at(slice(1, -1))] = f[at(slice(2, None))] - f[at(slice(None, -2))]
    if ghost is None:
        out[at(0)] = f[at(1)]
        out[at(-1)] = -f[at(-2)]
    else:
        lo, hi = _faces(ghost, axis)
        out[at(0)] = f[at(1)] - lo
        out[at(-1)] = hi - f[at(-2)]
    out *= 1.0 / (2.0 * grid.h)
    return out


def hodge_star(w: np.ndarray) -> np.ndarray:
    """Hodge star between 1-forms and dual-stored 2-forms.

    With 2-forms stored through their duals (``dx^2 ^ dx^3 -> slot 0`` and
    cyclically), the star acts as the identity on the stored coefficients
    in either direction, for the orientation ``dx^1 ^ dx^2 ^ dx^3``.
    """
    return np.array(w, copy=True)


def bracket_wedge_dual(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``*[a ^ b]`` for two 1-forms; slot k is ``sum eps_kij [a_i, b_j]``."""
    if a.shape != b.shape:
        raise GridMismatch("bracket_wedge_dual: operands live on different grids")
    out = np.empty_like(a)
    for k, i, j in _CYCLIC:
        out[..., k, :] = bracket(a[..., i, :], b[..., j, :]) - bracket(a[..., j, :], b[..., i, :])
    return out


def d0(A: np.ndarray, f: np.ndarray, grid: Grid, ghost: np.ndarray | None = None) -> np.ndarray:
    """Covariant derivative ``d_A f = df + [A, f]`` of a 0-form."""
    check_grid(grid, A, f)
    out = np.empty(f.shape[:3] + (3, 3))
    for i in range(3):
        out[..., i, :] = cdiff(f, i, grid, ghost) + bracket(A[..., i, :], f)
    return out


def d0_adjoint(A: np.ndarray, w: np.ndarray, grid: Grid) -> np.ndarray:
    """Exact lattice transpose of :func:`d0` (zero exterior), ``-sum_i nabla_i w_i``."""
    check_grid(grid, A, w)
    out = np.zeros(w.shape[:3] + (3,))
    for i in range(3):
        out -= cdiff(w[..., i, :], i, grid) + bracket(A[..., i, :], w[..., i, :])
    return out


def d1(A: np.ndarray, w: np.ndarray, grid: Grid, ghost: np.ndarray | None = None) -> np.ndarray:
    """``*d_A w`` for a 1-form: the covariant curl ``curl w + *[A ^ w]``."""
    check_grid(grid, A, w)
    out = bracket_wedge_dual(A, w)
    for k, i, j in _CYCLIC:
        gi = None if ghost is None else ghost[..., j, :]
        gj = None if ghost is None else ghost[..., i, :]
        out[..., k, :] += cdiff(w[..., j, :], i, grid, gi) - cdiff(w[..., i, :], j, grid, gj)
    return out


def d1_adjoint(A: np.ndarray, w: np.ndarray, grid: Grid) -> np.ndarray:
    """Transpose of :func:`d1` with zero exterior; the covariant curl is symmetric."""
    return d1(A, w, grid)


def curvature(A: np.ndarray, grid: Grid, ghost: np.ndarray | None = None) -> np.ndarray:
    """Dual-stored curvature ``*F_A = *(dA + 1/2 [A ^ A])``."""
    check_grid(grid, A)
    out = 0.5 * bracket_wedge_dual(A, A)
    for k, i, j in _CYCLIC:
        gi = None if ghost is None else ghost[..., j, :]
        gj = None if ghost is None else ghost[..., i, :]
        out[..., k, :] += cdiff(A[..., j, :], i, grid, gi) - cdiff(A[..., i, :], j, grid, gj)
    return out


def covariant_gradient(A: np.ndarray, c: np.ndarray, grid: Grid) -> np.ndarray:
    """``nabla_i c`` for a stack of Lie-valued slots ``c[..., s, :]``.

    Returns shape ``c.shape[:3] + (3,) + c.shape[3:]`` with the derivative
    direction inserted after the site axes. The exterior of ``c`` is zero.
    """
    out = np.empty(c.shape[:3] + (3,) + c.shape[3:])
    for i in range(3):
        Ai = A[..., i, :]
        if c.ndim == 5:
            Ai = Ai[..., None, :]
        out[:, :, :, i] = cdiff(c, i, grid) + bracket(Ai, c)
    return out


# ----------------------------------------------------------------------------
# Inner products and weighted norms
# ----------------------------------------------------------------------------


def inner(x: np.ndarray, y: np.ndarray, grid: Grid) -> float:
    """Discrete L2 inner product ``h^3 sum_sites <x, y>``."""
    if x.shape != y.shape:
        raise GridMismatch(f"inner: shapes {x.shape} and {y.shape} differ")
    return float(KILLING_SCALE * grid.cell_volume * np.sum(x * y))


def norm(x: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(inner(x, x, grid)))


def _weight(w: np.ndarray, c: np.ndarray) -> np.ndarray:
    return w.reshape(w.shape + (1,) * (c.ndim - 3)) * c


def _ad(phi: np.ndarray, c: np.ndarray) -> np.ndarray:
    if c.ndim > 4:
        phi = phi.reshape(phi.shape[:3] + (1,) * (c.ndim - 4) + (3,))
    return bracket(phi, c)


def norm_H0(m0, c: np.ndarray, grid: Grid) -> float:
    """Weighted H_0 norm; identical to the L2 norm."""
    return norm(c, grid)


def norm_H1(m0, c: np.ndarray, grid: Grid) -> float:
    """``|c|_H1^2 = |nabla_0 c|^2 + |rho^-1 c|^2 + |[Phi_0, c]|^2``.

    ``m0`` is any object with ``nabla`` and ``phi`` arrays (a Configuration).
    """
    check_grid(grid, c)
    A, phi = m0.nabla, m0.phi
    grad = covariant_gradient(A, c, grid)
    total = inner(grad, grad, grid)
    total += inner(_weight(1 / grid.rho, c), _weight(1 / grid.rho, c), grid)
    ad = _ad(phi, c)
    total += inner(ad, ad, grid)
    return float(np.sqrt(total))


def norm_H2(m0, c: np.ndarray, grid: Grid) -> float:
    """Six-term weighted second-order norm."""
    check_grid(grid, c)
    A, phi = m0.nabla, m0.phi
    rinv = 1.0 / grid.rho
    grad = covariant_gradient(A, c, grid)
    # second derivatives nabla_j nabla_i c, flattened over (i, slots)
    flat = grad.reshape(grad.shape[:3] + (-1, 3))
    hess = covariant_gradient(A, flat, grid)
    terms = [
        inner(hess, hess, grid),
        inner(_weight(rinv, grad), _weight(rinv, grad), grid),
    ]
    adg = _ad(phi, grad)
    terms.append(inner(adg, adg, grid))
    ad = _ad(phi, c)
    ad2 = _ad(phi, ad)
    terms.append(inner(ad2, ad2, grid))
    adw = _weight(rinv, ad)
    terms.append(inner(adw, adw, grid))
    w2 = _weight(rinv**2, c)
    terms.append(inner(w2, w2, grid))
    return float(np.sqrt(sum(terms)))
