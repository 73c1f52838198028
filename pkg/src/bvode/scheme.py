"""Forward Euler scheme on shifted lattices driven by smoothed signals.

The recursion x_{k+1} = x_k + f(t_k, x_k) (L_n(t_{k+1}) - L_n(t_k)) runs
on the lattice t_k = tau + k h until the first point at or past the right
end of the driver's domain.  Shifting tau inside [a, a + h) changes where
the lattice samples each smoothed jump, which is exactly the effect the
offset grid and the discrete jump map expose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .drivers import BVFunction
from .fields import ScalarField
from .jumpmap import XiGrid, phi_recursion
from .mollify import F_n, MollifierProfile


class StepLimitError(RuntimeError):
    """Raised when a run would need more lattice steps than the cap allows."""


def _step_count(a: float, b: float, tau: float, h: float) -> int:
    """Smallest K with tau + K h >= b, robust to rounding."""
    k = int(math.ceil((b - tau) / h))
    while tau + k * h < b:
        k += 1
    while k >= 1 and tau + (k - 1) * h >= b:
        k -= 1
    return max(k, 0)


def solve_offset(f: ScalarField, L: BVFunction, profile: MollifierProfile,
                 n: int, h: float, tau: float, x0: float,
                 mollify_coefficient: bool = False, conv_points: int = 16,
                 step_cap: int = 10 ** 8) -> np.ndarray:
    """Run one lattice and return the state sequence x_0 .. x_K.

    The lattice is t_k = tau + k h with tau in [a, a + h); the driver is
    smoothed at sharpness n before differencing.  With
    ``mollify_coefficient`` the coefficient is averaged with the same
    kernel in both arguments instead of evaluated pointwise.
    """
    a, b = L.domain
    if not (h > 0.0 and math.isfinite(h)):
        raise ValueError("step size h must be positive and finite")
    if not a <= tau < a + h:
        raise ValueError(f"offset tau={tau!r} must lie in [{a!r}, {a + h!r})")
    if n < 1:
        raise ValueError("sharpness n must be a positive integer")
    K = _step_count(a, b, tau, h)
    if K > step_cap:
        raise StepLimitError(f"run needs {K} steps, cap is {step_cap}")
    ts = tau + h * np.arange(K + 1, dtype=np.float64)
    Ln = backend.driver_lattice_values(ts, n, profile, L)
    dLn = np.diff(Ln)
    if mollify_coefficient:
        s, w = profile.convolution_rule(n, conv_points)
        return backend.euler_mollified(f, tau, h, dLn, float(x0), s, w)
    return backend.euler_exact(f, tau, h, dLn, float(x0))


@dataclass(frozen=True)
class GridPath:
    """Scheme runs over a fan of lattice offsets, padded to one array.

    ``values[j, :lengths[j]]`` is the state sequence for offset
    ``offsets[j]``; the padding repeats each final state so clamped
    indexing stays valid.  Each path is read as piecewise constant:
    x(t) = x_k on [t_k, t_{k+1}).
    """

    offsets: np.ndarray
    values: np.ndarray
    lengths: np.ndarray
    n: int
    h: float
    profile_name: str
    domain: tuple

    def path(self, j: int):
        """Times and states of offset j, without padding."""
        m = int(self.lengths[j])
        ts = self.offsets[j] + self.h * np.arange(m, dtype=np.float64)
        return ts, self.values[j, :m]

    def eval(self, j: int, t) -> np.ndarray:
        """Piecewise-constant read-out of offset j at times t."""
        t = np.asarray(t, dtype=np.float64)
        k = np.floor((t - self.offsets[j]) / self.h).astype(np.int64)
        k = np.clip(k, 0, int(self.lengths[j]) - 1)
        return self.values[j, k]

    def eval_nearest(self, t) -> np.ndarray:
        """Value at arbitrary t via the split t = tau_t + m h.

        tau_t snaps to the nearest stored offset, m indexes into that
        offset's run; the snap error is one offset spacing, O(h).
        """
        arr = np.asarray(t, dtype=np.float64)
        shape = arr.shape
        tt = np.atleast_1d(arr).reshape(-1)
        a = self.domain[0]
        J = self.offsets.size
        r = (tt - a) / self.h
        m = np.floor(r).astype(np.int64)
        j = np.rint((r - m) * J).astype(np.int64)
        wrap = j >= J
        j[wrap] = 0
        m[wrap] += 1
        k = np.clip(m, 0, self.lengths[j] - 1)
        out = self.values[j, k].reshape(shape)
        return float(out) if shape == () else out

    def final_values(self) -> np.ndarray:
        return self.values[np.arange(self.values.shape[0]), self.lengths - 1]

    def rows(self):
        """CSV rows (offset_index, tau, k, t, x)."""
        for j in range(self.offsets.size):
            tau = float(self.offsets[j])
            for k in range(int(self.lengths[j])):
                yield j, tau, k, tau + k * self.h, float(self.values[j, k])


def solve_grid(f: ScalarField, L: BVFunction, profile: MollifierProfile,
               n: int, h: float, x0, n_offsets: int = 16,
               **kwargs) -> GridPath:
    """Run the scheme for n_offsets equispaced lattice offsets in [a, a + h).

    ``x0`` is a number or a callable of the offset tau.  Keyword arguments
    are forwarded to :func:`solve_offset`.
    """
    if n_offsets < 1:
        raise ValueError("need at least one offset")
    a, _ = L.domain
    taus = a + (h / n_offsets) * np.arange(n_offsets, dtype=np.float64)
    runs = []
    for tau in taus:
        start = x0(float(tau)) if callable(x0) else float(x0)
        runs.append(solve_offset(f, L, profile, n, h, float(tau), start, **kwargs))
    lengths = np.array([r.size for r in runs], dtype=np.int64)
    values = np.empty((n_offsets, int(lengths.max())), dtype=np.float64)
    for j, r in enumerate(runs):
        values[j, :r.size] = r
        values[j, r.size:] = r[-1]
    return GridPath(offsets=taus, values=values, lengths=lengths, n=n, h=h,
                    profile_name=profile.name, domain=L.domain)


def xi_grid_for_offset(profile: MollifierProfile, n: int, h: float,
                       tau: float, zeta: float) -> XiGrid:
    """Smoothed-jump fractions seen by one lattice around the epoch zeta.

    With t_j the last lattice point before zeta - 1/n, the values
    xi_k = F_n(zeta - t_{j+k}) for k = 0 .. p + 2 (p = floor(1/(n h)))
    rise from exactly 0 to exactly 1: they are the fractions of the
    smoothed jump already consumed at each step the scheme takes while
    crossing it.
    """
    if h <= 0.0:
        raise ValueError("step size h must be positive")
    if n < 1:
        raise ValueError("sharpness n must be a positive integer")
    width = 1.0 / n
    if zeta - width <= tau:
        raise ValueError("epoch must sit at least one smoothing width past tau")
    jj = int(math.ceil((zeta - width - tau) / h))
    while tau + jj * h < zeta - width:
        jj += 1
    while jj >= 1 and tau + (jj - 1) * h >= zeta - width:
        jj -= 1
    j = jj - 1
    p = int(math.floor(1.0 / (n * h) + 1e-9))
    ks = np.arange(p + 3, dtype=np.float64)
    xi = F_n(profile, n, zeta - (tau + (j + ks) * h))
    return XiGrid(xi, clamp=True)


def discrete_jump_map(f: ScalarField, L: BVFunction, zeta: float,
                      profile: MollifierProfile, n: int, h: float,
                      tau: float, x: float) -> float:
    """State the scheme reaches after crossing the smoothed jump at zeta.

    Runs the explicit recursion for the frozen, jump-scaled coefficient
    z(y) = dL * f(zeta, y) over the crossing fractions of this lattice,
    starting from the pre-jump state x.
    """
    dL = L.jump_at(zeta)
    if dL == 0.0:
        raise ValueError(f"driver has no jump at {zeta!r}")
    z = f.scaled_frozen(zeta, dL)
    grid = xi_grid_for_offset(profile, n, h, tau, zeta)
    return float(phi_recursion(z, float(x), grid)[-1])
