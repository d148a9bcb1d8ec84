"""Configurations, the charge-1 Prasad-Sommerfield seed and its diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import lattice as lat
from .lattice import Grid

SERIES_CUTOFF = 1e-3


@dataclass(frozen=True)
class Exterior:
    """Values of the connection and Higgs field one site beyond the grid.

    Arrays are padded by one site per side; only the outer shell is read.
    """

    nabla: np.ndarray
    phi: np.ndarray


@dataclass
class Configuration:
    """A quadruple ``(nabla, phi, a, psi)``.

    ``nabla`` is the connection 1-form relative to the product connection.
    ``exterior`` prescribes the real part outside the grid; the imaginary
    part ``(a, psi)`` always has zero exterior.
    """

    grid: Grid
    nabla: np.ndarray
    phi: np.ndarray
    a: np.ndarray = None
    psi: np.ndarray = None
    exterior: Exterior | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.a is None:
            self.a = lat.zeros1(self.grid)
        if self.psi is None:
            self.psi = lat.zeros0(self.grid)
        lat.check_grid(self.grid, self.nabla, self.phi, self.a, self.psi)

    @classmethod
    def zeros(cls, grid: Grid) -> "Configuration":
        return cls(grid, lat.zeros1(grid), lat.zeros0(grid))

    @property
    def is_real(self) -> bool:
        return not (np.any(self.a) or np.any(self.psi))

    @property
    def real_part(self) -> np.ndarray:
        return lat.make_pair(self.nabla, self.phi)

    @property
    def imag_part(self) -> np.ndarray:
        return lat.make_pair(self.a, self.psi)

    @property
    def nabla_ghost(self):
        return None if self.exterior is None else self.exterior.nabla

    @property
    def phi_ghost(self):
        return None if self.exterior is None else self.exterior.phi

    def shifted(self, dm: np.ndarray | None = None, dv: np.ndarray | None = None) -> "Configuration":
        """``(m + dm, v + dv)`` for pair-valued increments; exterior is kept."""
        out = replace(self)
        if dm is not None:
            out.nabla = self.nabla + lat.one_part(dm)
            out.phi = self.phi + lat.zero_part(dm)
        if dv is not None:
            out.a = self.a + lat.one_part(dv)
            out.psi = self.psi + lat.zero_part(dv)
        return out

    def with_imaginary(self, v: np.ndarray) -> "Configuration":
        return replace(self, a=np.array(lat.one_part(v)), psi=np.array(lat.zero_part(v)))

    def real(self) -> "Configuration":
        return replace(self, a=lat.zeros1(self.grid), psi=lat.zeros0(self.grid))


# ----------------------------------------------------------------------------
# Prasad-Sommerfield monopole
# ----------------------------------------------------------------------------


def higgs_profile(r: np.ndarray) -> np.ndarray:
    """``H(r) = coth r - 1/r`` with its series ``r/3`` near the origin."""
    r = np.asarray(r, dtype=float)
    small = r < SERIES_CUTOFF
    rs = np.where(small, 1.0, r)
    return np.where(small, r / 3.0, 1.0 / np.tanh(rs) - 1.0 / rs)


def gauge_profile(r: np.ndarray) -> np.ndarray:
    """``K(r) = 1 - r/sinh r`` with its series ``r^2/6`` near the origin."""
    r = np.asarray(r, dtype=float)
    small = r < SERIES_CUTOFF
    rs = np.where(small, 1.0, r)
    return np.where(small, r**2 / 6.0, 1.0 - rs / np.sinh(rs))


def _hedgehog(points: np.ndarray):
    r = np.sqrt(np.sum(points**2, axis=-1))
    small = r < SERIES_CUTOFF
    rs = np.where(small, 1.0, r)
    # K(r)/r^2 -> 1/6 at the origin
    k_over_r2 = np.where(small, 1.0 / 6.0, gauge_profile(r) / rs**2)
    h_over_r = np.where(small, 1.0 / 3.0, higgs_profile(r) / rs)
    # With [T_a, T_b] = eps_abc T_c the hedgehog solving *F = d_A Phi has the
    # Higgs field pointing inwards in the Lie algebra.
    phi = -h_over_r[..., None] * points
    A = np.einsum("aij,...j->...ia", lat.LEVI_CIVITA, points) * k_over_r2[..., None, None]
    return A, phi


def bps_seed(grid: Grid, reflect: bool = False) -> Configuration:
    """Charge-1 Prasad-Sommerfield monopole centred at the origin.

    With ``reflect=True`` the seed is pulled back by ``x -> -x``, which
    reverses orientation and yields charge -1 (a solution of ``*F = -d_A Phi``).
    """

    def build(points):
        A, phi = _hedgehog(-points if reflect else points)
        return (-A if reflect else A), phi

    A, phi = build(grid.points)
    Ag, phig = build(grid.padded_points)
    return Configuration(grid, A, phi, exterior=Exterior(Ag, phig))


def bogomolny_residual(m: Configuration) -> np.ndarray:
    """``*F - d_A Phi`` (dual-stored)."""
    g = m.grid
    return lat.curvature(m.nabla, g, m.nabla_ghost) - lat.d0(m.nabla, m.phi, g, m.phi_ghost)


def interior_norm(w: np.ndarray, grid: Grid, margin: float = 1.0) -> float:
    """L2 norm over sites at least ``margin`` away from the grid edge."""
    mask = grid.interior(margin)
    return float(np.sqrt(lat.KILLING_SCALE * grid.cell_volume * np.sum(w[mask] ** 2)))


ENERGY_TERMS = (
    "F_nabla",
    "nabla_a",
    "nabla_phi",
    "nabla_psi",
    "a_wedge_a",
    "a_phi",
    "a_psi",
    "psi_phi",
)


def energy(c: Configuration) -> tuple[float, dict]:
    """Yang-Mills-Higgs energy and its eight squared L2 terms.

    ``|nabla a|^2`` is the full covariant gradient of the 1-form ``a``;
    ``|[a ^ a]|^2`` is the norm of the 2-form, entering with weight 1/4.
    """
    g = c.grid
    A = c.nabla
    F = lat.curvature(A, g, c.nabla_ghost)
    dphi = lat.d0(A, c.phi, g, c.phi_ghost)
    grad_a = lat.covariant_gradient(A, c.a, g)
    dpsi = lat.d0(A, c.psi, g)
    aa = lat.bracket_wedge_dual(c.a, c.a)
    a_phi = lat.bracket(c.a, c.phi[..., None, :])
    a_psi = lat.bracket(c.a, c.psi[..., None, :])
    psi_phi = lat.bracket(c.psi, c.phi)
    sq = lambda x: lat.inner(x, x, g)
    terms = {
        "F_nabla": sq(F),
        "nabla_a": sq(grad_a),
        "nabla_phi": sq(dphi),
        "nabla_psi": sq(dpsi),
        "a_wedge_a": 0.25 * sq(aa),
        "a_phi": sq(a_phi),
        "a_psi": sq(a_psi),
        "psi_phi": sq(psi_phi),
    }
    return float(sum(terms.values())), terms


# ----------------------------------------------------------------------------
# Shell quadrature: charge and asymptotics
# ----------------------------------------------------------------------------


def icosphere(subdivisions: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Geodesic icosahedral points on the unit sphere and their area weights.

    Three subdivisions give 642 points. Weights are the areas of the dual
    (barycentric) cells, normalised to sum to ``4 pi``.
    """
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    pts = np.array(verts)
    tri = np.array(faces)
    p0, p1, p2 = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    # spherical excess would be exact; flat areas rescaled are adequate here
    area = 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=1)
    w = np.zeros(len(pts))
    for k in range(3):
        np.add.at(w, tri[:, k], area / 3.0)
    w *= 4.0 * np.pi / w.sum()
    return pts, w


_SPHERE = icosphere(3)


def sample(field: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Trilinear interpolation of a site field at arbitrary points."""
    ax = grid.axis
    flat = field.reshape(grid.shape + (-1,))
    interp = RegularGridInterpolator((ax, ax, ax), flat, method="linear")
    return interp(points).reshape(points.shape[:-1] + field.shape[3:])


class ShellError(ValueError):
    pass


def charge(m: Configuration, r_shell: float, threshold: float = 0.1) -> float:
    """Magnetic charge ``(1/4 pi) \\oint <Phi_hat, *F> . n dS`` on a sphere."""
    g = m.grid
    if r_shell <= 0 or r_shell > g.radius - g.h:
        raise ShellError(f"shell radius {r_shell} leaves the grid (R = {g.radius})")
    nrm, w = _SPHERE
    pts = r_shell * nrm
    F = sample(lat.curvature(m.nabla, g, m.nabla_ghost), g, pts)
    phi = sample(m.phi, g, pts)
    mag = np.linalg.norm(phi, axis=-1)
    if np.min(mag) < threshold:
        raise ShellError(f"|Phi| = {np.min(mag):.3g} on the shell is below {threshold}")
    phat = phi / mag[:, None]
    flux = np.einsum("pka,pa,pk->p", F, phat, nrm) * lat.KILLING_SCALE
    return float(np.sum(w * flux) * r_shell**2 / (4.0 * np.pi))


@dataclass
class AsymptoticReport:
    c0: float
    c1: float
    remainder: float
    decay_slope: float
    radii: np.ndarray
    grid: dict

    def as_dict(self) -> dict:
        return {
            "c0": self.c0,
            "c1": self.c1,
            "remainder": self.remainder,
            "decay_slope": self.decay_slope,
            "radii": self.radii.tolist(),
            "grid": self.grid,
        }


SLOPE_WINDOW = 0.6


def asymptotic_check(m: Configuration, shells: int = 8, r_min: float | None = None,
                     r_max: float | None = None, slope_window: float = SLOPE_WINDOW) -> AsymptoticReport:
    """Fit ``|Phi| ~ c0 - c1/(2r)`` and the decay of ``|d_A Phi|`` over shells.

    The decay slope uses only shells with ``r >= slope_window * R``: the
    angular part of ``d_A Phi`` decays like ``exp(-r)`` and still steepens
    the log-log slope by about 10% at ``r = R/2`` for ``R = 8``.
    """
    g = m.grid
    r_min = g.radius / 2 if r_min is None else r_min
    r_max = g.radius - 2 * g.h if r_max is None else r_max
    if shells < 3:
        raise ShellError("need at least three shells")
    radii = np.linspace(r_min, r_max, shells)
    nrm, w = _SPHERE
    dphi = lat.d0(m.nabla, m.phi, g, m.phi_ghost)
    mean_phi, mean_dphi = [], []
    for r in radii:
        pts = r * nrm
        phi = np.linalg.norm(sample(m.phi, g, pts), axis=-1)
        dp = np.sqrt(np.sum(sample(dphi, g, pts) ** 2, axis=(-1, -2)))
        mean_phi.append(np.sum(w * phi) / (4 * np.pi))
        mean_dphi.append(np.sum(w * dp) / (4 * np.pi))
    mean_phi = np.array(mean_phi)
    mean_dphi = np.array(mean_dphi)
    design = np.stack((np.ones_like(radii), -0.5 / radii), axis=1)
    coef, *_ = np.linalg.lstsq(design, mean_phi, rcond=None)
    remainder = float(np.max(np.abs(design @ coef - mean_phi)))
    far = radii >= slope_window * g.radius
    if np.count_nonzero(far) < 2:
        far = radii >= radii[-2]
    if np.all(mean_dphi > 0):
        slope = float(np.polyfit(np.log(radii[far]), np.log(mean_dphi[far]), 1)[0])
    else:
        slope = float("nan")
    return AsymptoticReport(float(coef[0]), float(coef[1]), remainder, slope, radii, g.metadata())
