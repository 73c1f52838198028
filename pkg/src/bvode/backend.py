"""Execution-lane selection for the hot numerical kernels.

The environment variable ``BVODE_BACKEND`` picks the lane:

* ``numba`` (default when numba imports): kernels from
  :mod:`bvode._kernels` compiled with ``numba.njit``;
* ``numpy``: vectorized batch implementations from :mod:`bvode._blocks`
  plus the plain-python reference kernels for the sequential integrators.

Both lanes run the same arithmetic and are cross-checked by the test suite.
The flag is read once at import time.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

from . import _blocks, _kernels
from ._kernels import GL_NODES, GL_WEIGHTS

_flag = os.environ.get("BVODE_BACKEND", "").strip().lower()
if _flag not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"BVODE_BACKEND={_flag!r} not recognized; use 'numba' or 'numpy'"
    )

ACTIVE = "numpy"
_K = _kernels.PLAIN

if _flag in ("", "numba"):
    try:
        import numba

        _K = _kernels.build_kernels(numba.njit(nogil=True))
        ACTIVE = "numba"
    except ImportError:
        if _flag == "numba":
            raise
        warnings.warn("numba unavailable; falling back to the numpy lane")

USING_NUMBA = ACTIVE == "numba"


def _pack_profile(profile):
    return (profile.code, profile.cnorm, profile.kinks,
            profile.table_x, profile.table_tail)


def _pack_driver(driver):
    a, b = driver.domain
    return (a, b, driver.seg_breaks, driver.seg_coefs,
            driver.jump_epochs, driver.jump_sizes)


def driver_lattice_values(ts, n, profile, driver):
    """Mollified driver L_n evaluated at every t in ``ts``."""
    ts = np.ascontiguousarray(ts, dtype=np.float64)
    code, cnorm, kinks, tbl_x, tbl_tail = _pack_profile(profile)
    dom_a, dom_b, breaks, coefs, jpos, jsize = _pack_driver(driver)
    fn = _K.driver_lattice if USING_NUMBA else _blocks.driver_lattice_vec
    return fn(ts, n, code, cnorm, kinks, tbl_x, tbl_tail,
              dom_a, dom_b, breaks, coefs, jpos, jsize, GL_NODES, GL_WEIGHTS)


def euler_exact(field, tau, h, dLn, x0):
    """Explicit recurrence x_{k+1} = x_k + f(t_k, x_k) dL_k."""
    dLn = np.ascontiguousarray(dLn, dtype=np.float64)
    if USING_NUMBA:
        return _K.euler_exact(field.kind, field.packed, tau, h, dLn, x0)
    return _blocks.euler_exact_vec(field.kind, field.packed, tau, h, dLn, x0)


def euler_mollified(field, tau, h, dLn, x0, conv_s, conv_w):
    """Explicit recurrence with the mollified coefficient f_n."""
    dLn = np.ascontiguousarray(dLn, dtype=np.float64)
    return _K.euler_mollified(field.kind, field.packed, tau, h, dLn, x0,
                              np.ascontiguousarray(conv_s), np.ascontiguousarray(conv_w))


def flow_mass(field, x, mass, substep):
    """Integrate dphi/dm = z(phi) over the given Lebesgue mass."""
    kinks = np.asarray(field.x_kinks(), dtype=np.float64)
    return _K.flow_mass(field.kind, field.packed, float(x), float(mass),
                        float(substep), kinks)


def heun_path(field, s_grid, L_grid, x0):
    """Heun predictor-corrector along a grid of (s, L(s)) samples."""
    s_grid = np.ascontiguousarray(s_grid, dtype=np.float64)
    L_grid = np.ascontiguousarray(L_grid, dtype=np.float64)
    return _K.heun_path(field.kind, field.packed, s_grid, L_grid, float(x0))


def warmup() -> None:
    """Compile (numba lane) or exercise every kernel on toy inputs."""
    from .drivers import BVFunction
    from .fields import ScalarField
    from .mollify import get_profile

    drv = BVFunction.from_poly((0.0, 1.0), (0.0, 1.0), jumps=((0.5, 1.0),))
    fld = ScalarField.affine(0.1, 1.0)
    rmp = ScalarField.ramp(0.5, 0.25)
    for name in ("uniform", "triangular", "bump"):
        prof = get_profile(name)
        driver_lattice_values(np.linspace(0.0, 1.0, 5), 8, prof, drv)
    dln = np.array([0.1, 0.2])
    euler_exact(fld, 0.0, 0.5, dln, 1.0)
    nodes, weights = get_profile("uniform").convolution_rule(8)
    euler_mollified(fld, 0.0, 0.5, dln, 1.0, nodes, weights)
    flow_mass(fld, 1.0, 0.01, 1e-3)
    flow_mass(rmp, 0.4, 0.3, 1e-3)
    heun_path(fld, np.array([0.0, 0.5, 1.0]), np.array([0.0, 0.4, 1.0]), 1.0)
