"""Static reduction of complex connections on ``R_t x R^3``.

A static complex connection ``A + iB`` with ``A = nabla + Phi dt`` and
``B = a + Psi dt`` never needs a 4D lattice: every 4D 2-form splits as

    w = *sigma + e ^ dt

with ``sigma`` (the dual-stored spatial part) and ``e`` both 3D 1-forms.
:class:`TwoForm4` holds that pair.

Orientation is ``dt ^ dx1 ^ dx2 ^ dx3``. On the six basis bivectors the
4D star acts as

    *4 (dx2^dx3) = dt^dx1    *4 (dt^dx1) = dx2^dx3   (and cyclically)

which in the ``(sigma, e)`` storage reads ``*4 (sigma, e) = (-e, -sigma)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lattice as lat
from .monopole import Configuration
from .solver import kappa

# (spatial index pair, time index) -> image under *4, as (sign, bivector)
# bivectors are written as ordered index pairs with 0 = t, 1..3 = x^i
STAR4_TABLE = {
    (2, 3): (1.0, (0, 1)),
    (3, 1): (1.0, (0, 2)),
    (1, 2): (1.0, (0, 3)),
    (0, 1): (1.0, (2, 3)),
    (0, 2): (1.0, (3, 1)),
    (0, 3): (1.0, (1, 2)),
}


@dataclass(frozen=True)
class TwoForm4:
    """Static Lie-valued 2-form ``*sigma + e ^ dt``."""

    sigma: np.ndarray
    e: np.ndarray

    def star(self) -> "TwoForm4":
        return TwoForm4(-self.e, -self.sigma)

    def __add__(self, other: "TwoForm4") -> "TwoForm4":
        return TwoForm4(self.sigma + other.sigma, self.e + other.e)

    def __sub__(self, other: "TwoForm4") -> "TwoForm4":
        return TwoForm4(self.sigma - other.sigma, self.e - other.e)

    def scale(self, c: float) -> "TwoForm4":
        return TwoForm4(c * self.sigma, c * self.e)

    def inner(self, other: "TwoForm4", grid: lat.Grid) -> float:
        return lat.inner(self.sigma, other.sigma, grid) + lat.inner(self.e, other.e, grid)

    def norm(self, grid: lat.Grid) -> float:
        return float(np.sqrt(self.inner(self, grid)))

    @classmethod
    def basis(cls, pair: tuple[int, int], shape=(1, 1, 1)) -> "TwoForm4":
        """Unit bivector ``dx^pair[0] ^ dx^pair[1]`` with a constant unit Lie value."""
        sigma = np.zeros(shape + (3, 3))
        e = np.zeros(shape + (3, 3))
        i, j = pair
        lie = np.array([1.0, 0.0, 0.0])
        if i == 0 or j == 0:
            k = (j if i == 0 else i) - 1
            # dt ^ dx^k = -(dx^k ^ dt)
            e[..., k, :] = (-1.0 if i == 0 else 1.0) * lie
        else:
            k = 3 - (i - 1) - (j - 1)
            sign = 1.0 if ((i - 1) + 1) % 3 == (j - 1) else -1.0
            sigma[..., k, :] = sign * lie
        return cls(sigma, e)


def selfdual_part(w: TwoForm4) -> TwoForm4:
    return (w + w.star()).scale(0.5)


def antiselfdual_part(w: TwoForm4) -> TwoForm4:
    return (w - w.star()).scale(0.5)


@dataclass(frozen=True)
class FourDPieces:
    """Components of ``A = A3 + A_t dt`` and ``B = B3 + B_t dt``."""

    grid: lat.Grid
    A3: np.ndarray
    A_t: np.ndarray
    B3: np.ndarray
    B_t: np.ndarray
    A3_ghost: np.ndarray | None = None
    A_t_ghost: np.ndarray | None = None


def assemble_4d(c: Configuration) -> FourDPieces:
    return FourDPieces(c.grid, c.nabla, c.phi, c.a, c.psi, c.nabla_ghost, c.phi_ghost)


def disassemble(p: FourDPieces, like: Configuration | None = None) -> Configuration:
    """Inverse of :func:`assemble_4d`; ``like`` supplies the exterior model."""
    ext = None if like is None else like.exterior
    return Configuration(p.grid, p.A3, p.A_t, p.B3, p.B_t, ext)


def curvature_decomp(p: FourDPieces) -> tuple[TwoForm4, TwoForm4]:
    """``(Re F, Im F)`` of the complex connection ``A + iB``.

    ``Re F = F_A - 1/2 [B ^ B]`` and ``Im F = d_A B`` with
    ``F_A = F_nabla + d Phi ^ dt``, ``1/2 [B ^ B] = 1/2 [a ^ a] + [a, Psi] ^ dt``
    and ``d_A B = d a + (d Psi + [a, Phi]) ^ dt``.
    """
    g = p.grid
    a, psi, phi = p.B3, p.B_t, p.A_t
    P = phi[..., None, :]
    S = psi[..., None, :]
    F_A = TwoForm4(lat.curvature(p.A3, g, p.A3_ghost), lat.d0(p.A3, phi, g, p.A_t_ghost))
    BB = TwoForm4(0.5 * lat.bracket_wedge_dual(a, a), lat.bracket(a, S))
    dAB = TwoForm4(lat.d1(p.A3, a, g), lat.d0(p.A3, psi, g) + lat.bracket(a, P))
    return F_A - BB, dAB


def coulomb_4d(p: FourDPieces) -> np.ndarray:
    """``d_A^* B``; the time derivative drops out and leaves ``-[Phi, Psi]``."""
    return lat.d0_adjoint(p.A3, p.B3, p.grid) - lat.bracket(p.A_t, p.B_t)


def _rel(x: float, scale: float) -> float:
    return x / scale if scale > 0 else x


def dimred_check(c: Configuration) -> dict:
    """Compare the 4D Haydys system with the three monopole residuals.

    The self-dual part of a 2-form ``(sigma, e)`` is ``1/2 (sigma - e, e - sigma)``,
    so ``Re F^+`` must equal ``1/2 (k1, -k1)`` and ``Im F^+`` must equal
    ``1/2 (k2, -k2)``; the 4D Coulomb condition is ``k3`` itself.
    """
    g = c.grid
    p = assemble_4d(c)
    re, im = curvature_decomp(p)
    k1, k2, k3 = kappa(c)
    re_p, im_p = selfdual_part(re), selfdual_part(im)
    want1 = TwoForm4(0.5 * k1, -0.5 * k1)
    want2 = TwoForm4(0.5 * k2, -0.5 * k2)
    cz = coulomb_4d(p)
    scale1 = max(re.norm(g), lat.norm(k1, g))
    scale2 = max(im.norm(g), lat.norm(k2, g))
    scale3 = max(lat.norm(cz, g), lat.norm(k3, g))
    return {
        "re_defect": _rel((re_p - want1).norm(g), scale1),
        "im_defect": _rel((im_p - want2).norm(g), scale2),
        "coulomb_defect": _rel(lat.norm(cz - k3, g), scale3),
        "asd_defect": float(np.sqrt(re_p.norm(g) ** 2 + im_p.norm(g) ** 2 + lat.norm(cz, g) ** 2)),
        "kappa_norm": float(np.sqrt(sum(lat.norm(k, g) ** 2 for k in (k1, k2, k3)))),
        "grid": g.metadata(),
    }


def vafa_witten_iso(b: np.ndarray) -> TwoForm4:
    """``b -> 1/2 (dt ^ b + *b)``; ``dt ^ b = -(b ^ dt)``."""
    return TwoForm4(0.5 * b, -0.5 * b)


VAFA_WITTEN_SCALE = 0.5
"""``|vafa_witten_iso(b)|^2 / |b|^2``."""
