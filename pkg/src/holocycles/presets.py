"""Named demo inputs that run the cycle pipeline without user data."""
from __future__ import annotations

import cmath
import math

from .core import DEFAULT_CONFIG, CrossSection, LocalLinearModel, NumericConfig, PolynomialVectorField
from .transport import STANDARD_LOOP, AffineGerm, GermMap, LiftedGerm, MoebiusGerm

DEMO_LAMBDA = 1j
DEMO_A, DEMO_B = 0.5, 0.2


def lifted_demo_field(a: complex = DEMO_A, b: complex = DEMO_B) -> PolynomialVectorField:
    """``xdot = x - 2``, ``ydot = mu (y - c)``: its holonomy over the standard loop is ``w -> a + b w``."""
    mu = cmath.log(b) / (2j * math.pi)
    c = a / (1 - b)
    return PolynomialVectorField([(1, 0, 1.0), (0, 0, -2.0)], [(0, 1, mu), (0, 0, -mu * c)])


def preset(name: str, cfg: NumericConfig = DEFAULT_CONFIG) -> tuple[LocalLinearModel, GermMap]:
    """``(model, germ)`` for ``affine-demo``, ``moebius-demo`` or ``lifted-demo``."""
    model = LocalLinearModel(DEMO_LAMBDA)
    if name == "affine-demo":
        return model, AffineGerm(DEMO_A, DEMO_B)
    if name == "moebius-demo":
        return model, MoebiusGerm(0.5, 0.2, 1.0, 0.3)
    if name == "lifted-demo":
        germ = LiftedGerm(lifted_demo_field(), STANDARD_LOOP, CrossSection(0.5, anchor_z=1.0), cfg, base="x")
        return model, germ
    raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


PRESETS = ("affine-demo", "moebius-demo", "lifted-demo")
