"""Random test systems with controllable phase profiles.

Stable dynamics come from a shifted random matrix ``A = R - (||R|| + rho) I``
whose eigenvalues all have real part at most ``-rho``.  Phase shaping adds a
multiple of the identity to the feedthrough: if ``mu = c ||G0||_inf`` with
``c > 1`` then ``mu I + G0`` has H-infinity phase at most ``arcsin(1/c)``.
"""

from __future__ import annotations

import numpy as np

from .response import hinf_norm
from .sslti import StateSpace, is_hurwitz

__all__ = [
    "random_stable",
    "random_strongly_positive_real",
    "random_sectored",
    "lead_lag",
    "random_half_cramped",
    "random_phase_targeted",
    "lead_for_phase",
    "rotation_gain",
]


def random_stable(
    rng: np.random.Generator,
    n: int,
    m: int,
    rho: float = 0.5,
    d_scale: float = 1.0,
    complex_data: bool = False,
) -> StateSpace:
    def draw(*shape):
        x = rng.standard_normal(shape)
        if complex_data:
            x = x + 1j * rng.standard_normal(shape)
        return x

    R = draw(n, n)
    A = R - (np.linalg.norm(R, 2) + rho) * np.eye(n) if n else np.zeros((0, 0))
    ss = StateSpace(A, draw(n, m), draw(m, n), d_scale * draw(m, m))
    assert is_hurwitz(ss)
    return ss


def _shift(G0: StateSpace, c: float) -> StateSpace:
    return G0.plus_static(c * hinf_norm(G0, tol=1e-8) + 1e-12)


def random_strongly_positive_real(rng, n: int, m: int, c_range=(1.05, 4.0)) -> StateSpace:
    """``mu I + G0`` with ``mu > ||G0||_inf``: its Hermitian part is uniformly positive."""
    return _shift(random_stable(rng, n, m), rng.uniform(*c_range))


def random_sectored(rng, n: int, m: int, c: float) -> StateSpace:
    """Stable system with H-infinity phase at most ``arcsin(1/c)``."""
    return _shift(random_stable(rng, n, m), c)


def lead_lag(a: float, b: float, m: int) -> StateSpace:
    """``(s + a)/(s + b)`` times the m x m identity (a lead when b > a)."""
    I = np.eye(m)
    return StateSpace(-b * I, I, (a - b) * I, I)


def lead_for_phase(a: float, peak: float, m: int) -> StateSpace:
    """Lead (peak > 0) or lag (peak < 0) whose phase extremum is ``peak`` at omega = a sqrt(ratio)."""
    ratio = (1 + np.sin(abs(peak))) / (1 - np.sin(abs(peak)))
    return lead_lag(a, a * ratio, m) if peak >= 0 else lead_lag(a * ratio, a, m)


def random_phase_targeted(rng, n: int, m: int, peak: float, core_c: float = 8.0) -> StateSpace:
    """Scalar lead/lag times a nearly static sectored core.

    A scalar factor rotates the numerical range rigidly, so the H-infinity
    phase lies within ``arcsin(1/core_c)`` of ``|peak|``.
    """
    from .feedback import series

    core = random_sectored(rng, n, m, core_c)
    if peak == 0:
        return core
    return series(lead_for_phase(10 ** rng.uniform(-1, 1), peak, m), core)


def random_half_cramped(rng, n: int, m: int, theta_max: float = 0.4, stages: int = 3) -> StateSpace:
    """Lead-shaped sectored system whose nonnegative-frequency phases stay in
    ``[-theta, theta + psi]`` with ``2 theta + psi < pi``.

    The core ``mu I + G0`` has phases within ``[-theta, theta]``; each lead
    stage adds between 0 and ``psi/stages`` radians.
    """
    from .feedback import series

    theta = rng.uniform(0.05, theta_max)
    core = random_sectored(rng, n, m, 1.0 / np.sin(theta))
    psi = rng.uniform(0.2, np.pi - 2 * theta - 0.1)
    per = psi / stages
    # a lead (s+a)/(s+b) peaks at arcsin((b-a)/(b+a)) at omega = sqrt(ab)
    ratio = (1 + np.sin(per)) / (1 - np.sin(per))
    sys = core
    for _ in range(stages):
        a = 10 ** rng.uniform(-1, 1)
        sys = series(lead_lag(a, a * ratio, m), sys)
    return sys


def rotation_gain(a: float) -> StateSpace:
    """Static 2 x 2 rotation, a normal matrix with eigenvalue arguments +-a."""
    return StateSpace.static(np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]]))
