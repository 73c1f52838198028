"""Scalar coefficient fields f(t, x) with declared Lipschitz and growth constants.

Fields are stored as a small integer kind plus a parameter tuple so that the
numerical kernels can evaluate them without Python callbacks.  Every
constructor computes the constants

    |f(t, x) - f(t, y)| <= M |x - y|        (``lipschitz_const``)
    |f(t, x)|          <= K (1 + |x|)       (``growth_const``)

for the produced field.  For the built-in library, ``lipschitz_const`` is a
joint (t, x) Lipschitz bound, which is what the mollification error estimates
need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import FIELD_AFFINE, FIELD_CONST, FIELD_RAMP, FIELD_SIN, FIELD_TANH

_PARAM_SLOTS = 5

_KIND_NAMES = {
    FIELD_CONST: "constant",
    FIELD_AFFINE: "affine",
    FIELD_RAMP: "ramp",
    FIELD_SIN: "sin",
    FIELD_TANH: "tanh",
}


@dataclass(frozen=True)
class ScalarField:
    """Coefficient field f(t, x); immutable and closed under freeze/scale."""

    kind: int
    params: tuple
    lipschitz_const: float
    growth_const: float
    name: str = ""

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: float) -> "ScalarField":
        value = float(value)
        return cls(FIELD_CONST, (value,), 0.0, abs(value), f"const({value:g})")

    @classmethod
    def affine(cls, offset: float, slope: float) -> "ScalarField":
        """f(t, x) = offset + slope * x."""
        offset = float(offset)
        slope = float(slope)
        return cls(
            FIELD_AFFINE,
            (offset, slope),
            abs(slope),
            max(abs(offset), abs(slope)),
            f"affine({offset:g},{slope:g})",
        )

    @classmethod
    def linear_x(cls) -> "ScalarField":
        """f(t, x) = x."""
        return cls.affine(0.0, 1.0)

    @classmethod
    def ramp(cls, threshold: float, width: float, height: float = 1.0) -> "ScalarField":
        """Plateau of ``height`` for x <= threshold, linear to 0 on
        (threshold, threshold + width], 0 beyond."""
        width = float(width)
        if width <= 0.0:
            raise ValueError("ramp width must be positive")
        threshold = float(threshold)
        height = float(height)
        return cls(
            FIELD_RAMP,
            (threshold, width, height),
            abs(height) / width,
            abs(height),
            f"ramp({threshold:g},{width:g},{height:g})",
        )

    @classmethod
    def bounded_sin(cls, amp: float, freq_x: float, freq_t: float = 0.0,
                    phase: float = 0.0, offset: float = 0.0) -> "ScalarField":
        """f(t, x) = amp * sin(freq_x * x + freq_t * t + phase) + offset."""
        amp, freq_x, freq_t, phase, offset = map(float, (amp, freq_x, freq_t, phase, offset))
        lip = abs(amp) * max(abs(freq_x), abs(freq_t))
        return cls(
            FIELD_SIN,
            (amp, freq_x, freq_t, phase, offset),
            lip,
            abs(amp) + abs(offset),
            f"sin({amp:g},{freq_x:g},{freq_t:g})",
        )

    @classmethod
    def bounded_tanh(cls, amp: float, slope: float, offset: float = 0.0) -> "ScalarField":
        """f(t, x) = amp * tanh(slope * x) + offset."""
        amp, slope, offset = map(float, (amp, slope, offset))
        return cls(
            FIELD_TANH,
            (amp, slope, offset),
            abs(amp) * abs(slope),
            abs(amp) + abs(offset),
            f"tanh({amp:g},{slope:g})",
        )

    # -- evaluation --------------------------------------------------------

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == FIELD_CONST:
            out = np.broadcast_to(np.float64(p[0]), np.broadcast_shapes(t.shape, x.shape)).copy()
        elif self.kind == FIELD_AFFINE:
            out = p[0] + p[1] * x + 0.0 * t
        elif self.kind == FIELD_RAMP:
            d = x - p[0]
            out = np.where(d <= 0.0, p[2], np.where(d >= p[1], 0.0, p[2] * (1.0 - d / p[1])))
            out = out + 0.0 * t
        elif self.kind == FIELD_SIN:
            out = p[0] * np.sin(p[1] * x + p[2] * t + p[3]) + p[4]
        else:
            out = p[0] * np.tanh(p[1] * x) + p[2] + 0.0 * t
        if out.ndim == 0:
            return float(out)
        return out

    # -- kernel marshalling ------------------------------------------------

    @property
    def packed(self) -> np.ndarray:
        buf = np.zeros(_PARAM_SLOTS, dtype=np.float64)
        buf[: len(self.params)] = self.params
        return buf

    @property
    def is_autonomous(self) -> bool:
        """True when the field does not depend on t."""
        if self.kind == FIELD_SIN:
            return self.params[2] == 0.0
        return True

    def x_kinks(self) -> tuple:
        """x-values where f( . , x) is not smooth (used for step alignment)."""
        if self.kind == FIELD_RAMP:
            return (self.params[0], self.params[0] + self.params[1])
        return ()

    def scaled_frozen(self, t0: float, scale: float) -> "ScalarField":
        """Return the autonomous field x -> scale * f(t0, x).

        Used to turn a coefficient field into the jump field z(p) = dL * f(zeta, p).
        The result stays within the coded field family, so kernels can run it.
        """
        t0 = float(t0)
        scale = float(scale)
        p = self.params
        tag = f"{scale:g}*{self.name}@t={t0:g}"
        if self.kind == FIELD_CONST:
            return ScalarField(FIELD_CONST, (scale * p[0],), 0.0, abs(scale) * self.growth_const, tag)
        if self.kind == FIELD_AFFINE:
            return ScalarField(
                FIELD_AFFINE, (scale * p[0], scale * p[1]),
                abs(scale) * self.lipschitz_const, abs(scale) * self.growth_const, tag,
            )
        if self.kind == FIELD_RAMP:
            return ScalarField(
                FIELD_RAMP, (p[0], p[1], scale * p[2]),
                abs(scale) * self.lipschitz_const, abs(scale) * self.growth_const, tag,
            )
        if self.kind == FIELD_SIN:
            return ScalarField(
                FIELD_SIN, (scale * p[0], p[1], 0.0, p[2] * t0 + p[3], scale * p[4]),
                abs(scale * p[0] * p[1]), abs(scale) * self.growth_const, tag,
            )
        return ScalarField(
            FIELD_TANH, (scale * p[0], p[1], scale * p[2]),
            abs(scale) * self.lipschitz_const, abs(scale) * self.growth_const, tag,
        )

    def __repr__(self) -> str:  # pragma: no cover
        return f"ScalarField<{_KIND_NAMES[self.kind]}:{self.name}>"


def check_field_constants(field: ScalarField, rng: np.random.Generator,
                          trials: int = 200, t_span=(-2.0, 2.0), x_span=(-5.0, 5.0)) -> None:
    """Spot-check the declared Lipschitz and growth constants by sampling.

    Raises AssertionError on a violation; used by the test suite and available
    for user-defined sanity checks.
    """
    ts = rng.uniform(*t_span, size=trials)
    xs = rng.uniform(*x_span, size=trials)
    ys = rng.uniform(*x_span, size=trials)
    fx = np.asarray(field(ts, xs))
    fy = np.asarray(field(ts, ys))
    tol = 1e-12
    assert np.all(np.abs(fx - fy) <= field.lipschitz_const * np.abs(xs - ys) + tol)
    assert np.all(np.abs(fx) <= field.growth_const * (1.0 + np.abs(xs)) + tol)
