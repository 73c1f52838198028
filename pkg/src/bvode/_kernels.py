"""Numerical kernels shared by the numba and pure-python execution lanes.

Everything inside :func:`build_kernels` is written in nopython-compatible
style (scalar loops, preallocated outputs, no Python objects).  The factory is
instantiated twice: once undecorated, giving the reference lane, and once under
``numba.njit`` in :mod:`bvode.backend`.  Both lanes therefore run the exact
same arithmetic, which the backend tests exploit.
"""

from __future__ import annotations

from types import SimpleNamespace

import numpy as np

FIELD_CONST = 0
FIELD_AFFINE = 1
FIELD_RAMP = 2
FIELD_SIN = 3
FIELD_TANH = 4

PROFILE_UNIFORM = 0
PROFILE_TRIANGULAR = 1
PROFILE_TABLE = 2

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
GL_NODES = np.ascontiguousarray(GL_NODES)
GL_WEIGHTS = np.ascontiguousarray(GL_WEIGHTS)


def build_kernels(jit):
    """Build the kernel namespace under a decorator (identity or numba.njit)."""

    @jit
    def field_value(kind, p, t, x):
        if kind == FIELD_CONST:
            return p[0]
        if kind == FIELD_AFFINE:
            return p[0] + p[1] * x
        if kind == FIELD_RAMP:
            if x <= p[0]:
                return p[2]
            d = x - p[0]
            if d >= p[1]:
                return 0.0
            return p[2] * (1.0 - d / p[1])
        if kind == FIELD_SIN:
            return p[0] * np.sin(p[1] * x + p[2] * t + p[3]) + p[4]
        return p[0] * np.tanh(p[1] * x) + p[2]

    @jit
    def rho_base(code, cnorm, s):
        # base mollifier density on [0, 1]
        if code == PROFILE_UNIFORM:
            if 0.0 <= s <= 1.0:
                return 1.0
            return 0.0
        if code == PROFILE_TRIANGULAR:
            if s < 0.0 or s > 1.0:
                return 0.0
            if s <= 0.5:
                return 4.0 * s
            return 4.0 * (1.0 - s)
        if s <= 0.0 or s >= 1.0:
            return 0.0
        return cnorm * np.exp(-1.0 / (s * (1.0 - s)))

    @jit
    def tail_base(code, cnorm, tbl_x, tbl_tail, y):
        # tail mass of the base profile: integral of rho over [y, 1]
        if y <= 0.0:
            return 1.0
        if y >= 1.0:
            return 0.0
        if code == PROFILE_UNIFORM:
            return 1.0 - y
        if code == PROFILE_TRIANGULAR:
            if y <= 0.5:
                return 1.0 - 2.0 * y * y
            w = 1.0 - y
            return 2.0 * w * w
        # dense table, linear interpolation
        lo = 0
        hi = tbl_x.size - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if tbl_x[mid] <= y:
                lo = mid
            else:
                hi = mid
        w = (y - tbl_x[lo]) / (tbl_x[hi] - tbl_x[lo])
        return tbl_tail[lo] * (1.0 - w) + tbl_tail[hi] * w

    @jit
    def _seg_index(breaks, t):
        hi = breaks.size - 1
        if t <= breaks[0]:
            return 0
        if t >= breaks[hi]:
            return hi - 1
        lo = 0
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if breaks[mid] <= t:
                lo = mid
            else:
                hi = mid
        return lo

    @jit
    def lc_value(dom_a, dom_b, breaks, coefs, t):
        # continuous part with constant extension beyond the domain
        tt = t
        if tt < dom_a:
            tt = dom_a
        if tt > dom_b:
            tt = dom_b
        i = _seg_index(breaks, tt)
        u = tt - breaks[i]
        return ((coefs[i, 3] * u + coefs[i, 2]) * u + coefs[i, 1]) * u + coefs[i, 0]

    @jit
    def driver_lattice(ts, n, code, cnorm, kinks, tbl_x, tbl_tail,
                       dom_a, dom_b, breaks, coefs, jpos, jsize, gl_x, gl_w):
        """Mollified driver values L_n(t) for every t in ts.

        Jump part is a finite tail-mass sum; the continuous part is a
        Gauss-Legendre convolution split at profile kinks and driver
        breakpoints falling inside the window [t, t + 1/n].
        """
        inv = 1.0 / n
        m = breaks.size
        nk = kinks.size
        out = np.empty(ts.size)
        sp = np.empty(2 + nk + m)
        for i in range(ts.size):
            t = ts[i]
            acc = 0.0
            for j in range(jpos.size):
                acc += jsize[j] * tail_base(code, cnorm, tbl_x, tbl_tail, (jpos[j] - t) * n)
            cnt = 0
            sp[cnt] = 0.0
            cnt += 1
            for k in range(nk):
                sp[cnt] = kinks[k] * inv
                cnt += 1
            for k in range(m):
                s = breaks[k] - t
                if 0.0 < s < inv:
                    sp[cnt] = s
                    cnt += 1
            sp[cnt] = inv
            cnt += 1
            for a in range(1, cnt):
                key = sp[a]
                b = a - 1
                while b >= 0 and sp[b] > key:
                    sp[b + 1] = sp[b]
                    b -= 1
                sp[b + 1] = key
            conv = 0.0
            for a in range(cnt - 1):
                lo = sp[a]
                hi = sp[a + 1]
                if hi - lo <= 0.0:
                    continue
                half = 0.5 * (hi - lo)
                mid = 0.5 * (hi + lo)
                for q in range(gl_x.size):
                    s = mid + half * gl_x[q]
                    conv += (gl_w[q] * half * (n * rho_base(code, cnorm, s * n))
                             * lc_value(dom_a, dom_b, breaks, coefs, t + s))
            out[i] = acc + conv
        return out

    @jit
    def euler_exact(kind, p, tau, h, dLn, x0):
        K = dLn.size
        x = np.empty(K + 1)
        x[0] = x0
        cur = x0
        for k in range(K):
            cur = cur + field_value(kind, p, tau + k * h, cur) * dLn[k]
            x[k + 1] = cur
        return x

    @jit
    def euler_mollified(kind, p, tau, h, dLn, x0, conv_s, conv_w):
        # conv_s/conv_w: quadrature rule for the window [0, 1/n] with the
        # mollifier density folded into the weights (sum of conv_w is 1).
        K = dLn.size
        Q = conv_s.size
        x = np.empty(K + 1)
        x[0] = x0
        cur = x0
        for k in range(K):
            t = tau + k * h
            fn = 0.0
            for a in range(Q):
                wa = conv_w[a]
                sa = conv_s[a]
                for b in range(Q):
                    fn += wa * conv_w[b] * field_value(kind, p, t + sa, cur + conv_s[b])
            cur = cur + fn * dLn[k]
            x[k + 1] = cur
        return x

    @jit
    def _rk4_step(kind, p, x, dm):
        k1 = field_value(kind, p, 0.0, x)
        k2 = field_value(kind, p, 0.0, x + 0.5 * dm * k1)
        k3 = field_value(kind, p, 0.0, x + 0.5 * dm * k2)
        k4 = field_value(kind, p, 0.0, x + dm * k3)
        return x + (dm / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    @jit
    def flow_mass(kind, p, x, mass, substep, kinks):
        """Integrate dphi/dm = z(phi) over Lebesgue mass ``mass``.

        Steps are realigned to land exactly on declared x-kinks of z so that
        the integrator never straddles a derivative discontinuity.
        """
        if mass <= 0.0:
            return x
        cur = x
        rem = mass
        while rem > 1e-15:
            dm = substep if substep < rem else rem
            nxt = _rk4_step(kind, p, cur, dm)
            lo = cur if cur < nxt else nxt
            hi = cur if cur > nxt else nxt
            cross = np.nan
            for kk in range(kinks.size):
                v = kinks[kk]
                if lo < v < hi:
                    if cross != cross:
                        cross = v
                    elif cur < nxt:
                        if v < cross:
                            cross = v
                    else:
                        if v > cross:
                            cross = v
            if cross == cross:
                a = 0.0
                b = dm
                for _ in range(60):
                    mid = 0.5 * (a + b)
                    xm = _rk4_step(kind, p, cur, mid)
                    if (cur < nxt and xm < cross) or (cur > nxt and xm > cross):
                        a = mid
                    else:
                        b = mid
                cur = cross
                rem -= 0.5 * (a + b)
            else:
                cur = nxt
                rem -= dm
        return cur

    @jit
    def heun_path(kind, p, sg, Lg, x0):
        """Predictor-corrector path for dx = f(s, x) dL along grid sg."""
        npts = sg.size
        x = np.empty(npts)
        x[0] = x0
        cur = x0
        for i in range(npts - 1):
            dL = Lg[i + 1] - Lg[i]
            f0 = field_value(kind, p, sg[i], cur)
            pred = cur + f0 * dL
            f1 = field_value(kind, p, sg[i + 1], pred)
            cur = cur + 0.5 * (f0 + f1) * dL
            x[i + 1] = cur
        return x

    return SimpleNamespace(
        field_value=field_value,
        rho_base=rho_base,
        tail_base=tail_base,
        lc_value=lc_value,
        driver_lattice=driver_lattice,
        euler_exact=euler_exact,
        euler_mollified=euler_mollified,
        flow_mass=flow_mass,
        heun_path=heun_path,
    )


PLAIN = build_kernels(lambda f: f)
