"""Experiments connecting the lattice scheme to the limit equation.

The basic metric is the offset-averaged L1 distance between a fan of
scheme runs (piecewise constant) and a limit path (piecewise smooth with
jumps).  Studies sweep a mesh schedule and report the error per mesh;
the staircase check probes which limit staircase a schedule produces.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .drivers import BVFunction
from .fields import ScalarField
from .jumpmap import JumpMeasure, SigmaG, sigma_staircase
from .limit import LimitPath, solve_limit
from .mollify import MollifierProfile, Schedule
from .scheme import GridPath, solve_grid, xi_grid_for_offset

DEFAULT_PROBES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def l1_distance(p: GridPath, q: LimitPath) -> float:
    """Offset-averaged integral of |p(t) - q(t)| over the common domain.

    Each offset path is read as piecewise constant on its lattice; the
    integration grid is the common refinement of that lattice with the
    breakpoints of q, one midpoint evaluation per cell.
    """
    if (abs(p.domain[0] - q.domain[0]) > 1e-9
            or abs(p.domain[1] - q.domain[1]) > 1e-9):
        raise ValueError(f"domain mismatch: {p.domain!r} vs {q.domain!r}")
    a, b = q.domain
    total = 0.0
    for j in range(p.offsets.size):
        K = int(p.lengths[j])
        lattice = p.offsets[j] + p.h * np.arange(K, dtype=np.float64)
        edges = np.concatenate((np.asarray([a, b]), lattice, q.t))
        edges = np.unique(np.clip(edges, a, b))
        mids = 0.5 * (edges[:-1] + edges[1:])
        dt = np.diff(edges)
        total += float(np.sum(np.abs(p.eval(j, mids) - q.eval(mids)) * dt))
    return total / p.offsets.size


def _trend_decreasing(errors: np.ndarray) -> bool:
    # last value is the minimum and no step increases by more than 10%
    if errors.size < 2:
        return True
    if errors[-1] > errors.min():
        return False
    return bool(np.all(errors[1:] <= 1.1 * errors[:-1]))


@dataclass(frozen=True)
class StudyResult:
    """Error table of a mesh sweep against one limit path."""

    ns: tuple
    h_values: tuple
    l1_errors: tuple
    rel_errors: tuple
    limit_norm: float
    decreasing: bool

    def rows(self):
        """CSV rows (n, h_n, metric, value)."""
        for n, h, e, r in zip(self.ns, self.h_values, self.l1_errors,
                              self.rel_errors):
            yield n, h, "l1", e
            yield n, h, "l1_rel", r


def convergence_study(f: ScalarField, L: BVFunction,
                      profile: MollifierProfile, sched: Schedule,
                      mu_expected: JumpMeasure, x0: float,
                      n_offsets: int = 16, threads: int = 1,
                      **kwargs) -> StudyResult:
    """Sweep the schedule and measure the scheme's L1 distance to the limit.

    The limit path is solved once under ``mu_expected``; each mesh then
    contributes one row.  Rows are computed concurrently when ``threads``
    allows, and assembled in schedule order either way.
    """
    if len(sched.meshes) < 3:
        raise ValueError("schedule needs at least three meshes")
    limit = solve_limit(f, L, mu_expected, float(x0))
    norm = limit.l1_norm()

    def one(n: int) -> float:
        gp = solve_grid(f, L, profile, n, sched.h(n), float(x0),
                        n_offsets=n_offsets, **kwargs)
        return l1_distance(gp, limit)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            errs = list(ex.map(one, sched.meshes))
    else:
        errs = [one(n) for n in sched.meshes]
    errs = np.asarray(errs, dtype=np.float64)
    rels = errs / norm if norm > 0.0 else errs.copy()
    return StudyResult(ns=tuple(sched.meshes),
                       h_values=tuple(sched.h(n) for n in sched.meshes),
                       l1_errors=tuple(float(e) for e in errs),
                       rel_errors=tuple(float(r) for r in rels),
                       limit_norm=float(norm),
                       decreasing=_trend_decreasing(errs))


@dataclass(frozen=True)
class SigmaCheckResult:
    """Offset-averaged staircase gaps, one row per mesh and probe."""

    ns: tuple
    h_values: tuple
    probes: tuple
    gaps: np.ndarray  # shape (len(ns), len(probes))
    zeta: float
    decreasing: bool

    def rows(self):
        """CSV rows (n, h_n, metric, value) with metric gap@u."""
        for i, n in enumerate(self.ns):
            for k, u in enumerate(self.probes):
                yield n, self.h_values[i], f"gap@{u:g}", float(self.gaps[i, k])


def sigma_n_check(profile: MollifierProfile, sched: Schedule, zeta: float,
                  sigma: SigmaG, probes=DEFAULT_PROBES, n_offsets: int = 16,
                  domain=(0.0, 1.0)) -> SigmaCheckResult:
    """Measure how far each mesh's crossing staircase sits from sigma.

    For every mesh n and every lattice offset, the crossing fractions
    around zeta define a staircase sigma^n(., tau); the gap at probe u is
    the offset-quadrature value of the time integral of
    |sigma^n(u, .) - sigma(u)|, i.e. (b - a) times the offset mean.
    """
    a, b = float(domain[0]), float(domain[1])
    if not a < zeta <= b:
        raise ValueError("zeta must lie inside the domain")
    probes = tuple(float(u) for u in probes)
    us = np.asarray(probes, dtype=np.float64)
    target = np.asarray(sigma(us), dtype=np.float64).reshape(-1)
    gaps = np.empty((len(sched.meshes), us.size), dtype=np.float64)
    hs = []
    for i, n in enumerate(sched.meshes):
        h = sched.h(n)
        hs.append(h)
        taus = a + (h / n_offsets) * np.arange(n_offsets, dtype=np.float64)
        acc = np.zeros(us.size, dtype=np.float64)
        for tau in taus:
            grid = xi_grid_for_offset(profile, n, h, float(tau), float(zeta))
            vals = np.asarray(sigma_staircase(grid, us), dtype=np.float64)
            acc += np.abs(vals.reshape(-1) - target)
        gaps[i] = (b - a) * acc / n_offsets
    worst = gaps.max(axis=1)
    return SigmaCheckResult(ns=tuple(sched.meshes), probes=probes, gaps=gaps,
                            zeta=float(zeta), decreasing=_trend_decreasing(worst),
                            h_values=tuple(hs))
