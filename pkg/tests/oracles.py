"""Independent symbolic oracles (sympy) for curvature checks."""

from __future__ import annotations

import itertools
import math

import numpy as np
import sympy as sp


def _christoffel(g, ginv, x):
    n = len(x)
    return [[[sp.Rational(1, 2) * sum(ginv[a, d] * (sp.diff(g[d, b], x[c]) + sp.diff(g[d, c], x[b])
                                                     - sp.diff(g[b, c], x[d])) for d in range(n))
              for c in range(n)] for b in range(n)] for a in range(n)]


def riemann_lower(g, x, point):
    """``R_{abcd}`` (all indices down) of the coordinate metric ``g`` evaluated at ``point``."""
    n = len(x)
    ginv = g.inv()
    G = _christoffel(g, ginv, x)
    subs = dict(zip(x, point))
    # R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}
    Rup = np.zeros((n, n, n, n))
    for a, b, c, d in itertools.product(range(n), repeat=4):
        if c >= d:
            continue
        expr = (sp.diff(G[a][d][b], x[c]) - sp.diff(G[a][c][b], x[d])
                + sum(G[a][c][e] * G[e][d][b] - G[a][d][e] * G[e][c][b] for e in range(n)))
        v = float(expr.subs(subs).evalf())
        Rup[a, b, c, d] = v
        Rup[a, b, d, c] = -v
    gnum = np.array(g.subs(subs).evalf(), dtype=float)
    return np.einsum("ae,ebcd->abcd", gnum, Rup), gnum


def euler_coframe(theta, phi, psi):
    """Left-invariant SU(2) coframe with ``d sigma^1 = -sigma^2 ^ sigma^3`` (cyclic)."""
    s1 = [0, sp.sin(psi), -sp.cos(psi) * sp.sin(theta)]
    s2 = [0, sp.cos(psi), sp.sin(psi) * sp.sin(theta)]
    s3 = [1, 0, sp.cos(theta)]
    # components on (dpsi, dtheta, dphi)
    return [s1, s2, s3]


def bianchi_ix_scalar_curvature(h, point=(0.9, 0.4, 0.3)) -> float:
    """Scalar curvature of ``sum h_i sigma^i (x) sigma^i`` on SU(2) in Euler angles."""
    psi, theta, phi = sp.symbols("psi theta phi")
    x = [psi, theta, phi]
    co = sp.Matrix(euler_coframe(theta, phi, psi))
    g = sp.zeros(3, 3)
    for i in range(3):
        g += sp.nsimplify(h[i], rational=True) * co[i, :].T * co[i, :]
    R, gnum = riemann_lower(g, x, point)
    ginv = np.linalg.inv(gnum)
    return float(np.einsum("ac,bd,abcd->", ginv, ginv, R))


def orthonormal_norm(R: np.ndarray, frame: np.ndarray) -> float:
    """Euclidean norm of ``R`` in the frame whose rows are the frame vectors."""
    Rf = np.einsum("abcd,ia,jb,kc,ld->ijkl", R, frame, frame, frame, frame)
    return float(np.sqrt(np.sum(Rf**2)))


def kasner_t2_curvature_norm(p, t: float) -> float:
    """``t^2 |Rm|_T`` of ``-(1/9) dt^2 + sum t^{2 p_i} dx_i^2``."""
    T, x1, x2, x3 = sp.symbols("t x1 x2 x3", positive=True)
    ps = [sp.nsimplify(v) for v in p]
    g = sp.diag(-sp.Rational(1, 9), *[T ** (2 * q) for q in ps])
    R, gnum = riemann_lower(g, [T, x1, x2, x3], (t, 0.0, 0.0, 0.0))
    frame = np.diag(1.0 / np.sqrt(np.abs(np.diag(gnum))))
    return t * t * orthonormal_norm(R, frame)


def bianchi_spacetime_norm(h0, h1, h2, L0, L1, point=(0.9, 0.4, 0.3)):
    """``|Rm|_T`` and the mixed-block norm at ``t = 0`` for
    ``-L(t)^2 dt^2 + sum h_i(t) sigma^i (x) sigma^i`` with ``h_i(t) = h0 + h1 t + h2 t^2 / 2``
    and ``L(t) = L0 + L1 t`` (Bianchi IX coframe).
    """
    t, psi, theta, phi = sp.symbols("t psi theta phi")
    x = [t, psi, theta, phi]
    co3 = euler_coframe(theta, phi, psi)
    co = sp.zeros(4, 4)
    co[0, 0] = 1
    for i in range(3):
        for j in range(3):
            co[i + 1, j + 1] = co3[i][j]
    Q = lambda v: sp.nsimplify(v, rational=True)  # noqa: E731
    hs = [Q(a) + Q(b) * t + Q(c) * t**2 / 2 for a, b, c in zip(h0, h1, h2)]
    Lt = Q(L0) + Q(L1) * t
    g = -(Lt**2) * co[0, :].T * co[0, :]
    for i in range(3):
        g += hs[i] * co[i + 1, :].T * co[i + 1, :]
    pt = (0.0, *point)
    R, _ = riemann_lower(g, x, pt)
    # orthonormal frame: rows are vectors; invert the scaled coframe
    cof = np.array(co.subs(dict(zip(x, pt))).evalf(), dtype=float)
    scale = np.array([L0, *np.sqrt(h0)])
    frame = np.linalg.inv(scale[:, None] * cof).T
    Rf = np.einsum("abcd,ia,jb,kc,ld->ijkl", R, frame, frame, frame, frame)
    mixed = Rf[0, 1:, 1:, 1:]
    return float(np.sqrt(np.sum(Rf**2))), float(np.sqrt(np.sum(mixed**2)))
