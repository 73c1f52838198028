"""Vectorized numpy implementations of the hot kernels.

This is the fallback execution lane (``BVODE_BACKEND=numpy``).  Instead of the
per-point loops in :mod:`bvode._kernels` it batches lattice points, sorting a
per-row list of quadrature split points; zero-width subintervals produced by
inactive splits contribute nothing, so no per-row branching is needed.
"""

from __future__ import annotations

import numpy as np

from ._kernels import (
    FIELD_AFFINE,
    FIELD_CONST,
    PLAIN,
    PROFILE_TRIANGULAR,
    PROFILE_UNIFORM,
)


def rho_base_vec(code, cnorm, tbl_x, tbl_tail, s):
    s = np.asarray(s, dtype=float)
    if code == PROFILE_UNIFORM:
        return np.where((s >= 0.0) & (s <= 1.0), 1.0, 0.0)
    if code == PROFILE_TRIANGULAR:
        inside = (s >= 0.0) & (s <= 1.0)
        return np.where(inside, np.where(s <= 0.5, 4.0 * s, 4.0 * (1.0 - s)), 0.0)
    interior = (s > 0.0) & (s < 1.0)
    safe = np.where(interior, s, 0.5)
    return np.where(interior, cnorm * np.exp(-1.0 / (safe * (1.0 - safe))), 0.0)


def tail_base_vec(code, cnorm, tbl_x, tbl_tail, y):
    y = np.asarray(y, dtype=float)
    if code == PROFILE_UNIFORM:
        return np.clip(1.0 - y, 0.0, 1.0)
    if code == PROFILE_TRIANGULAR:
        out = np.where(y <= 0.5, 1.0 - 2.0 * y * y, 2.0 * (1.0 - y) ** 2)
        return np.where(y <= 0.0, 1.0, np.where(y >= 1.0, 0.0, out))
    inner = np.interp(np.clip(y, 0.0, 1.0), tbl_x, tbl_tail)
    return np.where(y <= 0.0, 1.0, np.where(y >= 1.0, 0.0, inner))


def lc_value_vec(dom_a, dom_b, breaks, coefs, t):
    t = np.clip(np.asarray(t, dtype=float), dom_a, dom_b)
    idx = np.clip(np.searchsorted(breaks, t, side="right") - 1, 0, coefs.shape[0] - 1)
    u = t - breaks[idx]
    c = coefs[idx]
    return ((c[..., 3] * u + c[..., 2]) * u + c[..., 1]) * u + c[..., 0]


def driver_lattice_vec(ts, n, code, cnorm, kinks, tbl_x, tbl_tail,
                       dom_a, dom_b, breaks, coefs, jpos, jsize, gl_x, gl_w,
                       chunk: int = 4096):
    """Vectorized counterpart of ``_kernels.driver_lattice`` (same signature)."""
    ts = np.asarray(ts, dtype=float)
    inv = 1.0 / n
    out = np.empty(ts.size)
    base = np.concatenate(([0.0], kinks * inv, [inv]))
    for start in range(0, ts.size, chunk):
        t = ts[start:start + chunk]
        B = t.size
        cand = np.clip(breaks[None, :] - t[:, None], 0.0, inv)
        bounds = np.sort(
            np.concatenate([np.broadcast_to(base, (B, base.size)), cand], axis=1), axis=1
        )
        lo = bounds[:, :-1, None]
        half = 0.5 * (bounds[:, 1:, None] - lo)
        s = lo + half * (1.0 + gl_x[None, None, :])
        w = half * gl_w[None, None, :]
        rho = n * rho_base_vec(code, cnorm, tbl_x, tbl_tail, s * n)
        vals = lc_value_vec(dom_a, dom_b, breaks, coefs, t[:, None, None] + s)
        conv = np.einsum("bsq,bsq->b", w, rho * vals)
        jacc = tail_base_vec(code, cnorm, tbl_x, tbl_tail,
                             (jpos[None, :] - t[:, None]) * n) @ jsize
        out[start:start + chunk] = conv + jacc
    return out


def euler_exact_vec(kind, p, tau, h, dLn, x0):
    """Euler recurrence; closed-form scan for fields affine in x."""
    dLn = np.asarray(dLn, dtype=float)
    K = dLn.size
    if kind == FIELD_CONST:
        x = np.empty(K + 1)
        x[0] = x0
        np.cumsum(p[0] * dLn, out=x[1:])
        x[1:] += x0
        return x
    if kind == FIELD_AFFINE:
        A = 1.0 + p[1] * dLn
        if K == 0:
            return np.full(1, float(x0))
        if np.min(np.abs(A)) > 1e-12:
            P = np.cumprod(A)
            if np.all(np.isfinite(P)) and np.min(np.abs(P)) > 1e-290 and np.max(np.abs(P)) < 1e290:
                S = np.cumsum(p[0] * dLn / P)
                x = np.empty(K + 1)
                x[0] = x0
                x[1:] = P * (x0 + S)
                return x
    return PLAIN.euler_exact(kind, p, tau, h, dLn, x0)
