"""Independent reference computations used by the tests."""
import cmath
import math

import numpy as np


def affine_fixed_point(nu, n, a, b):
    nun = cmath.exp(n * cmath.log(nu))
    return nun * a / (1 - nun * b), nun * b


def spiral_samples(w, lam, turns, count):
    t = np.linspace(0.0, turns, count)
    return np.exp(2j * math.pi * t), w * np.exp(2j * math.pi * lam * t)


def spirals_meet_sampled(n, w_n, m, w_m, lam, count=100, proximity=1e-6):
    """Smallest sampled distance between two spirals is below ``proximity``.

    ``count`` parameter values per spiral, so ``count**2`` pairs.
    """
    z1, w1 = spiral_samples(w_n, lam, n, count)
    z2, w2 = spiral_samples(w_m, lam, m, count)
    dist = np.hypot(np.abs(z1[:, None] - z2[None, :]), np.abs(w1[:, None] - w2[None, :]))
    return bool(dist.min() < proximity), float(dist.min())


def enumerate_dependency(values, tol):
    """Plain recursion over {-1, 0, 1} tuples; returns True when a nonzero tuple sums below tol."""
    import itertools

    for alpha in itertools.product((-1, 0, 1), repeat=len(values)):
        if any(alpha) and abs(sum(a * v for a, v in zip(alpha, values))) < tol:
            return True
    return False
