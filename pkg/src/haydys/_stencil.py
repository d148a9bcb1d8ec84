"""Fused site loops for the linearized operator and its transpose.

These kernels evaluate the same lattice formulas as the array code in
:mod:`haydys.lattice` (central differences, pointwise brackets) in a single
pass over the grid, plus the biharmonic doubler term. The array versions in
:mod:`haydys.linops` remain the reference they are tested against.

Neighbour tables ``nb[o, i]`` give the index reached from ``i`` by the
offset ``(-2, -1, +1, +2)[o]`` along any axis, or ``-1`` past a Dirichlet
edge.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange

OFFSETS = (-2, -1, 1, 2)


def neighbour_table(n: int, periodic: bool) -> np.ndarray:
    idx = np.arange(n)
    nb = np.empty((4, n), dtype=np.int64)
    for o, off in enumerate(OFFSETS):
        j = idx + off
        nb[o] = j % n if periodic else np.where((j >= 0) & (j < n), j, -1)
    return nb


@njit(cache=True, inline="always")
def _get(v, x, y, z, s, l):
    if x < 0 or y < 0 or z < 0:
        return 0.0
    return v[x, y, z, s, l]


@njit(cache=True)
def _derivs(v, x, y, z, nb, inv2h, wc, dv, bih):
    """Central differences ``dv[axis, slot, lie]`` and the biharmonic term."""
    n = v.shape[0]
    for s in range(4):
        for l in range(3):
            c0 = v[x, y, z, s, l]
            acc = 0.0
            # axis 0
            xm2, xm1, xp1, xp2 = nb[0, x], nb[1, x], nb[2, x], nb[3, x]
            fm1 = _get(v, xm1, y, z, s, l)
            fp1 = _get(v, xp1, y, z, s, l)
            dv[0, s, l] = (fp1 - fm1) * inv2h
            acc += _get(v, xm2, y, z, s, l) + _get(v, xp2, y, z, s, l) - 4.0 * (fm1 + fp1) + 6.0 * c0
            # axis 1
            ym2, ym1, yp1, yp2 = nb[0, y], nb[1, y], nb[2, y], nb[3, y]
            fm1 = _get(v, x, ym1, z, s, l)
            fp1 = _get(v, x, yp1, z, s, l)
            dv[1, s, l] = (fp1 - fm1) * inv2h
            acc += _get(v, x, ym2, z, s, l) + _get(v, x, yp2, z, s, l) - 4.0 * (fm1 + fp1) + 6.0 * c0
            # axis 2
            zm2, zm1, zp1, zp2 = nb[0, z], nb[1, z], nb[2, z], nb[3, z]
            fm1 = _get(v, x, y, zm1, s, l)
            fp1 = _get(v, x, y, zp1, s, l)
            dv[2, s, l] = (fp1 - fm1) * inv2h
            acc += _get(v, x, y, zm2, s, l) + _get(v, x, y, zp2, s, l) - 4.0 * (fm1 + fp1) + 6.0 * c0
            bih[s, l] = wc * acc
    return n


@njit(cache=True, inline="always")
def _cross(p, q, out, sign):
    out[0] += sign * (p[1] * q[2] - p[2] * q[1])
    out[1] += sign * (p[2] * q[0] - p[0] * q[2])
    out[2] += sign * (p[0] * q[1] - p[1] * q[0])


@njit(cache=True, parallel=True)
def apply_D(A, phi, v, nb, inv2h, wc, out):
    """``out = D v`` with the doubler term ``W T v``.

    Slot layout of ``v`` and ``out``: 0-2 the 1-form, 3 the 0-form.
    """
    n = v.shape[0]
    for x in prange(n):
        dv = np.empty((3, 4, 3))
        bih = np.empty((4, 3))
        acc = np.empty(3)
        for y in range(n):
            for z in range(n):
                _derivs(v, x, y, z, nb, inv2h, wc, dv, bih)
                a = v[x, y, z]
                Ax = A[x, y, z]
                ph = phi[x, y, z]
                psi = a[3]
                for k in range(3):
                    i = (k + 1) % 3
                    j = (k + 2) % 3
                    for l in range(3):
                        # curl a - d psi
                        acc[l] = dv[i, j, l] - dv[j, i, l] - dv[k, 3, l]
                    _cross(Ax[i], a[j], acc, 1.0)
                    _cross(Ax[j], a[i], acc, -1.0)
                    _cross(Ax[k], psi, acc, -1.0)
                    _cross(a[k], ph, acc, -1.0)
                    for l in range(3):
                        out[x, y, z, k, l] = acc[l]
                for l in range(3):
                    acc[l] = -(dv[0, 0, l] + dv[1, 1, l] + dv[2, 2, l])
                for i in range(3):
                    _cross(Ax[i], a[i], acc, -1.0)
                _cross(ph, psi, acc, -1.0)
                for l in range(3):
                    out[x, y, z, 3, l] = acc[l]
                # T: (a1, a2, a3, psi) -> (-psi, a3, -a2, -a1)
                for l in range(3):
                    out[x, y, z, 0, l] -= bih[3, l]
                    out[x, y, z, 1, l] += bih[2, l]
                    out[x, y, z, 2, l] -= bih[1, l]
                    out[x, y, z, 3, l] -= bih[0, l]


@njit(cache=True, parallel=True)
def apply_Dstar(A, phi, w, nb, inv2h, wc, out):
    """``out = D^T w``, the exact transpose of :func:`apply_D`."""
    n = w.shape[0]
    for x in prange(n):
        dw = np.empty((3, 4, 3))
        bih = np.empty((4, 3))
        acc = np.empty(3)
        for y in range(n):
            for z in range(n):
                _derivs(w, x, y, z, nb, inv2h, wc, dw, bih)
                b = w[x, y, z]
                Ax = A[x, y, z]
                ph = phi[x, y, z]
                w0 = b[3]
                for k in range(3):
                    i = (k + 1) % 3
                    j = (k + 2) % 3
                    for l in range(3):
                        # curl w1 + d w0
                        acc[l] = dw[i, j, l] - dw[j, i, l] + dw[k, 3, l]
                    _cross(Ax[i], b[j], acc, 1.0)
                    _cross(Ax[j], b[i], acc, -1.0)
                    _cross(Ax[k], w0, acc, 1.0)
                    _cross(ph, b[k], acc, -1.0)
                    for l in range(3):
                        out[x, y, z, k, l] = acc[l]
                for l in range(3):
                    acc[l] = dw[0, 0, l] + dw[1, 1, l] + dw[2, 2, l]
                for i in range(3):
                    _cross(Ax[i], b[i], acc, 1.0)
                _cross(ph, w0, acc, 1.0)
                for l in range(3):
                    out[x, y, z, 3, l] = acc[l]
                # T^T: (a1, a2, a3, psi) -> (-psi, -a3, a2, -a1)
                for l in range(3):
                    out[x, y, z, 0, l] -= bih[3, l]
                    out[x, y, z, 1, l] -= bih[2, l]
                    out[x, y, z, 2, l] += bih[1, l]
                    out[x, y, z, 3, l] -= bih[0, l]
