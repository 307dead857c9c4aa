"""Dormand-Prince 5(4) integrator for complex states on a real parameter.

States are short tuples of Python complex numbers; for the two-component
leaf systems this is several times faster than small numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import NoConvergence

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

SAFETY, MIN_FACTOR, MAX_FACTOR = 0.9, 0.2, 5.0

State = tuple


class StepCollapse(NoConvergence):
    """Step size underflow or a non-finite state: the solution is blowing up."""


@dataclass
class Trajectory:
    """Accepted steps of one integration: times, states and local error estimates."""

    t: list[float] = field(default_factory=list)
    y: list[State] = field(default_factory=list)
    local_error: list[tuple[float, ...]] = field(default_factory=list)
    rejected: int = 0


def _combine(y: State, h: float, coeffs: Sequence[float], ks: Sequence[State]) -> State:
    out = list(y)
    for a, k in zip(coeffs, ks):
        if a:
            ha = h * a
            for i, ki in enumerate(k):
                out[i] += ha * ki
    return tuple(out)


def dopri5(rhs: Callable[[float, State], State], t0: float, t1: float,
           y0: Sequence[complex], rtol: float, atol: float, first_step: float, max_step: float,
           max_steps: int, traj: Trajectory | None = None) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t1 > t0``.

    A step is accepted when its embedded error estimate satisfies
    ``|err| <= atol + rtol * |y|`` componentwise.

    Appends to ``traj`` (the initial point is recorded only if ``traj`` is
    empty) and returns it.  ``rhs`` may raise to abort.
    """
    if traj is None:
        traj = Trajectory()
    y = tuple(complex(v) for v in y0)
    t = float(t0)
    if not traj.t:
        traj.t.append(t)
        traj.y.append(y)
        traj.local_error.append((0.0,) * len(y))
    span = t1 - t0
    if span <= 0:
        return traj
    h = min(first_step, max_step, span)
    k: list[State] = [rhs(t, y)] + [()] * 6
    steps = 0
    while t < t1:
        if steps >= max_steps:
            raise NoConvergence(f"step budget of {max_steps} exhausted at t={t:.6g}")
        steps += 1
        last = t + h >= t1 - 1e-14 * max(1.0, abs(t1))
        if last:
            h = t1 - t
        for s in range(1, 7):
            ts = t1 if (s == 6 and last) else t + _C[s] * h
            k[s] = rhs(ts, _combine(y, h, _A[s], k[:s]))
        y_new = _combine(y, h, _B, k[:6])
        err = tuple(abs(h * sum(e * kk[i] for e, kk in zip(_E, k) if e)) for i in range(len(y)))
        err_norm = max(e / (atol + rtol * max(abs(a), abs(b))) for e, a, b in zip(err, y, y_new))
        if err_norm != err_norm or err_norm == float("inf"):
            raise StepCollapse(f"non-finite state at t={t:.6g}")
        if err_norm <= 1.0:
            t = t1 if last else t + h
            y = y_new
            k[0] = k[6]
            traj.t.append(t)
            traj.y.append(y)
            traj.local_error.append(err)
            factor = MAX_FACTOR if err_norm == 0 else min(MAX_FACTOR, SAFETY * err_norm ** -0.2)
            h = min(max_step, h * max(factor, MIN_FACTOR))
        else:
            traj.rejected += 1
            h *= max(MIN_FACTOR, SAFETY * err_norm ** -0.2)
            if h < 1e-14 * max(1.0, abs(t)):
                raise StepCollapse(f"step size underflow at t={t:.6g}")
    return traj
