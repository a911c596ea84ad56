"""Feedback interconnections and stability certificates.

The loop is ``u1 = w1 - y2``, ``u2 = y1 - w2`` with ``y1 = G u1`` and
``y2 = H u2``; the map from ``(w1, w2)`` to ``(u1, y1)`` is then the Gang of
Four matrix ``[[(I+HG)^-1, (I+HG)^-1 H], [G(I+HG)^-1, G(I+HG)^-1 H]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, IllPosed, NotCramped, Unstable
from .matphase import PhaseVector, phases_many
from .response import (
    FrequencyGrid,
    _phase_sample,
    default_grid,
    hinf_phase,
)
from .sslti import StateSpace, freq_response_many, is_hurwitz, minimal_realization

__all__ = [
    "Certificate",
    "series",
    "gang_of_four",
    "closed_loop_stable",
    "certification_grid",
    "small_gain_certify",
    "small_phase_certify",
    "angular_passivity_index",
    "phase_margin",
    "search_phase_counterexample",
]

CERTIFIED = "certified"
NOT_CERTIFIED = "not_certified"
ILL_POSED = "ill_posed"


@dataclass(frozen=True)
class Certificate:
    method: str
    verdict: str
    margin: float
    worst_frequency: float
    grid: FrequencyGrid | None = field(default=None, repr=False)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_json(self) -> dict:
        worst = self.worst_frequency
        return {
            "method": self.method,
            "verdict": self.verdict,
            "margin": None if math.isnan(self.margin) else self.margin,
            "worst_frequency": "inf" if math.isinf(worst) else (None if math.isnan(worst) else worst),
            "grid_size": len(self.grid) if self.grid is not None else 0,
        }


def series(G: StateSpace, H: StateSpace) -> StateSpace:
    """Cascade with transfer function ``G(s) H(s)`` (H acts first)."""
    if G.inputs != H.outputs:
        raise DimensionMismatch(f"G takes {G.inputs} inputs but H has {H.outputs} outputs")
    nh, ng = H.n, G.n
    A = np.block([[H.A, np.zeros((nh, ng))], [G.B @ H.C, G.A]])
    B = np.vstack([H.B, G.B @ H.D])
    C = np.hstack([G.D @ H.C, G.C])
    return StateSpace(A, B, C, G.D @ H.D)


def _loop_matrix(G: StateSpace, H: StateSpace) -> np.ndarray:
    if G.inputs != H.outputs or G.outputs != H.inputs:
        raise DimensionMismatch("G and H dimensions do not form a loop")
    m, p = G.inputs, G.outputs
    K = np.block([[np.eye(m), H.D], [-G.D, np.eye(p)]])
    if np.linalg.cond(K) > 1e12:
        raise IllPosed("I + D_H D_G is singular")
    return K


def _is_well_posed(G, H) -> bool:
    try:
        _loop_matrix(G, H)
    except IllPosed:
        return False
    return True


def gang_of_four(G: StateSpace, H: StateSpace) -> StateSpace:
    """Realization of the map ``(w1, w2) -> (u1, y1)``."""
    K = _loop_matrix(G, H)
    m, p = G.inputs, G.outputs
    ng, nh = G.n, H.n
    # K [u1; u2] = Cx x + E w
    Cx = np.block([[np.zeros((m, ng)), -H.C], [G.C, np.zeros((p, nh))]])
    E = np.block([[np.eye(m), np.zeros((m, p))], [np.zeros((p, m)), -np.eye(p)]])
    U = np.linalg.solve(K, Cx)
    V = np.linalg.solve(K, E)
    Bd = np.block([[G.B, np.zeros((ng, p))], [np.zeros((nh, m)), H.B]])
    A = np.block([[G.A, np.zeros((ng, nh))], [np.zeros((nh, ng)), H.A]]) + Bd @ U
    B = Bd @ V
    Gc = np.hstack([G.C, np.zeros((p, nh))])
    C = np.vstack([U[:m], Gc + G.D @ U[:m]])
    D = np.vstack([V[:m], G.D @ V[:m]])
    return StateSpace(A, B, C, D)


def closed_loop_stable(G: StateSpace, H: StateSpace) -> bool:
    """Eigenvalue ground truth: the Gang of Four of minimal realizations is Hurwitz."""
    _loop_matrix(G, H)
    return is_hurwitz(gang_of_four(minimal_realization(G), minimal_realization(H)))


def certification_grid(G: StateSpace, H: StateSpace) -> FrequencyGrid:
    """Union of both systems' adaptive grids; the D-limits are added by the callers."""
    return default_grid(G).union(default_grid(H))


def _frequencies(G, H, grid):
    w = grid.frequencies
    if G.is_real and H.is_real:
        return w
    return np.concatenate([w, -w[w > 0]])


def _prepare(G, H, grid, method):
    for name, s in (("G", G), ("H", H)):
        if not is_hurwitz(s):
            raise Unstable(f"{name} is not Hurwitz")
    grid = certification_grid(G, H) if grid is None else grid
    if not _is_well_posed(G, H):
        return grid, Certificate(method, ILL_POSED, math.nan, math.nan, grid)
    return grid, None


def _finish(method, slack, freqs, grid):
    k = int(np.argmin(slack))
    margin = float(slack[k])
    verdict = CERTIFIED if margin > 0 else NOT_CERTIFIED
    return Certificate(method, verdict, margin, float(freqs[k]), grid)


def small_gain_certify(G: StateSpace, H: StateSpace, grid: FrequencyGrid | None = None) -> Certificate:
    """Check sigma_max(G) sigma_max(H) < 1 on the grid and at the D-limits."""
    grid, early = _prepare(G, H, grid, "small_gain")
    if early:
        return early
    w = _frequencies(G, H, grid)
    sg = np.linalg.norm(freq_response_many(G, w), 2, axis=(1, 2))
    sh = np.linalg.norm(freq_response_many(H, w), 2, axis=(1, 2))
    lim = np.linalg.norm(G.D, 2) * np.linalg.norm(H.D, 2)
    slack = np.concatenate([1.0 - sg * sh, [1.0 - lim]])
    return _finish("small_gain", slack, np.concatenate([w, [np.inf]]), grid)


def _phases_or_raise(Ms, omegas, name) -> list[PhaseVector]:
    # Matrix-level phases (anchored at the mid-angle) are used even where the
    # numerical range crosses the negative real axis: they then sit near +-pi
    # and the slack comes out negative, which is the conservative outcome.
    phs = phases_many(Ms)
    for omega, ph in zip(omegas, phs):
        if ph is None:
            raise NotCramped(f"{name} is not cramped at omega={omega:.6g}", frequency=float(omega))
    return phs


def small_phase_certify(G: StateSpace, H: StateSpace, grid: FrequencyGrid | None = None) -> Certificate:
    """Check both one-sided small-phase inequalities at every grid frequency.

    The D-limit is included when both feedthrough matrices have phases.
    """
    grid, early = _prepare(G, H, grid, "small_phase")
    if early:
        return early
    w = _frequencies(G, H, grid)
    RG = freq_response_many(G, w)
    RH = freq_response_many(H, w)
    slack = []
    for omega, pg, ph in zip(w, _phases_or_raise(RG, w, "G"), _phases_or_raise(RH, w, "H")):
        slack.append(min(np.pi - pg.max - ph.max, np.pi + pg.min + ph.min))
    freqs = list(w)
    lg, _, _ = _phase_sample(G.D)
    lh, _, _ = _phase_sample(H.D)
    if lg is not None and lh is not None:
        slack.append(min(np.pi - lg.max - lh.max, np.pi + lg.min + lh.min))
        freqs.append(np.inf)
    return _finish("small_phase", np.array(slack), np.array(freqs), grid)


def angular_passivity_index(G: StateSpace, grid: FrequencyGrid | None = None) -> float:
    return float(np.pi / 2 - hinf_phase(G, grid))


def phase_margin(G: StateSpace, H: StateSpace, grid: FrequencyGrid | None = None) -> float:
    """pi minus the H-infinity phase of the cascade G H."""
    return float(np.pi - hinf_phase(series(G, H), grid))


def search_phase_counterexample(G, alpha, candidates, grid=None):
    """Probe the conjectured converse of the small phase theorem.

    ``candidates`` yields controllers H; those with H-infinity phase at most
    ``alpha`` are closed around ``G`` and the outcome is recorded.  The
    returned records make no claim either way about the conjecture; a record
    with ``stable`` false while ``hinf_phase(G) < pi - alpha`` would be a
    counterexample.
    """
    records = []
    for H in candidates:
        try:
            phi_h = hinf_phase(H, grid)
        except (NotCramped, Unstable):
            continue
        if phi_h > alpha:
            continue
        try:
            stable = closed_loop_stable(G, H)
        except IllPosed:
            continue
        records.append({"hinf_phase": phi_h, "stable": stable, "controller": H})
    return records
