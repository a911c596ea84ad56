"""Frequency sweeps: MIMO Bode data, H-infinity norm and phase, and
system-level classification (frequency-wise cramped, half-cramped,
strongly positive real, strictly negative imaginary).

Every "for all frequencies" verdict here is certified on a finite grid only;
reports carry the grid so the verdict can be reproduced.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NotCramped, NumericallySingular, Unstable
from .matphase import (
    HullPolygon,
    PhaseVector,
    convex_hull,
    matrix_phases,
    numerical_range_boundary,
    phases_many,
)
from .sslti import StateSpace, default_band, freq_response_many, is_hurwitz

__all__ = [
    "FrequencyGrid",
    "BodeSample",
    "SystemClassification",
    "adaptive_grid",
    "default_grid",
    "bode_data",
    "bode_csv",
    "hinf_norm",
    "hinf_phase",
    "is_frequencywise_cramped",
    "positive_freq_hull",
    "is_half_cramped",
    "classify",
    "limit_phases",
    "EPS_HALF",
]

EPS_HALF = 1e-7
MAX_GRID_POINTS = 20000


@dataclass(frozen=True)
class FrequencyGrid:
    frequencies: np.ndarray
    adaptive_refined: bool = False

    def __post_init__(self):
        w = np.asarray(self.frequencies, dtype=float).ravel()
        if w.size == 0:
            raise ValueError("frequency grid is empty")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("frequencies must be finite and nonnegative")
        if np.any(np.diff(w) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies", w)

    def __len__(self):
        return self.frequencies.size

    def union(self, other: "FrequencyGrid") -> "FrequencyGrid":
        w = np.union1d(self.frequencies, other.frequencies)
        return FrequencyGrid(w, self.adaptive_refined or other.adaptive_refined)

    def describe(self) -> dict:
        w = self.frequencies
        return {
            "points": int(w.size),
            "omega_min": float(w[0]),
            "omega_max": float(w[-1]),
            "adaptive_refined": self.adaptive_refined,
        }


@dataclass(frozen=True)
class BodeSample:
    omega: float
    magnitudes: np.ndarray
    phases: PhaseVector | None
    cramped: bool
    touches_negative_axis: bool


@dataclass(frozen=True)
class SystemClassification:
    frequencywise_cramped: bool
    half_cramped: bool
    strongly_positive_real: bool
    strictly_negative_imaginary: bool
    hinf_phase: float | None
    separating_direction: float | None
    infinity_limit_cramped: bool
    phase_checks_agree: bool
    grid: FrequencyGrid = field(repr=False)

    def to_json(self) -> dict:
        return {
            "frequencywise_cramped": self.frequencywise_cramped,
            "half_cramped": self.half_cramped,
            "strongly_positive_real": self.strongly_positive_real,
            "strictly_negative_imaginary": self.strictly_negative_imaginary,
            "hinf_phase": self.hinf_phase,
            "separating_direction": self.separating_direction,
            "infinity_limit_cramped": self.infinity_limit_cramped,
            "phase_checks_agree": self.phase_checks_agree,
            "grid": self.grid.describe(),
        }


def _require_stable(ss: StateSpace):
    if not is_hurwitz(ss):
        raise Unstable("system is not Hurwitz")


def _phase_sample(G):
    """(phases or None, cramped, touches_negative_axis) of one matrix."""
    try:
        ph = matrix_phases(G)
    except NotCramped:
        return None, False, True
    except NumericallySingular:
        return None, False, True
    touches = _touches(ph)
    return (None if touches else ph), True, touches


def _touches(ph: PhaseVector) -> bool:
    return ph.max >= np.pi - EPS_HALF or ph.min <= -np.pi + EPS_HALF


def _samples(ss: StateSpace, omegas) -> list[BodeSample]:
    G = freq_response_many(ss, omegas)
    mags = np.linalg.svd(G, compute_uv=False)
    out = []
    for w, s, ph in zip(omegas, mags, phases_many(G)):
        if ph is None:
            out.append(BodeSample(float(w), s, None, False, True))
        else:
            touches = _touches(ph)
            out.append(BodeSample(float(w), s, None if touches else ph, True, touches))
    return out


def _bounds(sample: BodeSample):
    if sample.phases is None:
        return np.nan, np.nan
    return sample.phases.max, sample.phases.min


def adaptive_grid(
    ss: StateSpace,
    omega_min: float | None = None,
    omega_max: float | None = None,
    base_points: int = 200,
    tol: float = 0.05,
    max_points: int = MAX_GRID_POINTS,
) -> FrequencyGrid:
    """Logarithmic grid refined by bisection where the extreme phases move by
    more than ``tol`` radians or the largest singular value by more than 20%
    between neighbours.  Refinement stops at a relative spacing of 1e-6.
    """
    lo_def, hi_def = default_band(ss)
    omega_min = 0.0 if omega_min is None else float(omega_min)
    omega_max = hi_def if omega_max is None else float(omega_max)
    if not 0 <= omega_min < omega_max:
        raise ValueError("need 0 <= omega_min < omega_max")
    if base_points < 2:
        raise ValueError("base_points must be at least 2")
    start = omega_min if omega_min > 0 else min(lo_def, omega_max * 1e-4)
    w = np.logspace(np.log10(start), np.log10(omega_max), base_points)
    if omega_min == 0:
        w = np.concatenate([[0.0], w])
    samples = dict(zip(w.tolist(), _samples(ss, w)))
    refined = False
    while len(samples) < max_points:
        ws = np.array(sorted(samples))
        sm = [samples[x] for x in ws]
        sig = np.array([s.magnitudes[0] for s in sm])
        hi, lo = np.array([_bounds(s) for s in sm]).T
        defined = ~np.isnan(hi)
        a, b = slice(None, -1), slice(1, None)
        with np.errstate(invalid="ignore", divide="ignore"):
            jump = np.fmax(np.abs(hi[b] - hi[a]), np.abs(lo[b] - lo[a]))
            jump = np.where(defined[a] & defined[b], jump, 0.0)
            ratio = np.maximum(sig[b], sig[a]) / np.minimum(sig[b], sig[a])
            ratio = np.where(np.maximum(sig[a], sig[b]) > 0, ratio, 1.0)
        need = (jump > tol) | (ratio > 1.2) | (defined[a] != defined[b])
        need &= (ws[b] - ws[a]) > 1e-6 * ws[b]
        idx = np.nonzero(need)[0]
        if idx.size == 0:
            break
        idx = idx[: max_points - len(samples)]
        left, right = ws[idx], ws[idx + 1]
        mids = np.where(left > 0, np.sqrt(left * right), 0.5 * right)
        mids = mids[(mids > left) & (mids < right)]
        if mids.size == 0:
            break
        samples.update(zip(mids.tolist(), _samples(ss, mids)))
        refined = True
    return FrequencyGrid(np.array(sorted(samples)), refined)


def default_grid(ss: StateSpace, base_points: int = 200, tol: float = 0.05) -> FrequencyGrid:
    """Adaptive grid over [0, omega_hi] from the pole magnitudes."""
    return adaptive_grid(ss, 0.0, default_band(ss)[1], base_points, tol)


def _grid(ss, grid):
    return default_grid(ss) if grid is None else grid


def bode_data(ss: StateSpace, grid: FrequencyGrid | None = None) -> list[BodeSample]:
    """Magnitude and phase response on ``grid``.

    Phases are reported only where the response is cramped and its numerical
    range stays off the negative real axis; they then lie in (-pi, pi) and
    are continuous in frequency.
    """
    _require_stable(ss)
    return _samples(ss, _grid(ss, grid).frequencies)


def bode_csv(samples: list[BodeSample]) -> str:
    """Delimited Bode table: omega, sigma_1..m, phi_1..m, cramped, neg_axis."""
    m = len(samples[0].magnitudes)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["omega"]
        + [f"sigma_{k + 1}" for k in range(m)]
        + [f"phi_{k + 1}" for k in range(m)]
        + ["cramped", "neg_axis"]
    )
    for s in samples:
        phis = [repr(float(p)) for p in s.phases.values] if s.phases is not None else [""] * m
        writer.writerow(
            [repr(s.omega)]
            + [repr(float(x)) for x in s.magnitudes]
            + phis
            + [int(s.cramped), int(s.touches_negative_axis)]
        )
    return buf.getvalue()


# -- norms and phases ----------------------------------------------------------------


def _imag_axis_freqs(ss: StateSpace, gamma: float) -> np.ndarray:
    """Frequencies where sigma_max(G(jw)) = gamma, from the Hamiltonian."""
    A, B, C, D = ss.A, ss.B, ss.C, ss.D
    Dh = D.conj().T
    R = Dh @ D - gamma**2 * np.eye(D.shape[1])
    S = D @ Dh - gamma**2 * np.eye(D.shape[0])
    Ri = np.linalg.inv(R)
    Si = np.linalg.inv(S)
    Ah = A - B @ Ri @ Dh @ C
    H = np.block([[Ah, -gamma * B @ Ri @ B.conj().T], [gamma * C.conj().T @ Si @ C, -Ah.conj().T]])
    lam = np.linalg.eigvals(H)
    scale = max(1.0, np.linalg.norm(H, 1))
    on_axis = np.abs(lam.real) <= 1e-8 * scale
    freqs = lam[on_axis].imag
    # real systems are conjugate symmetric, so the sign of w carries no information
    return np.sort(np.abs(freqs) if ss.is_real else freqs)


def _sigma_max(ss, omegas):
    if len(omegas) == 0:
        return np.empty(0)
    return np.linalg.norm(freq_response_many(ss, omegas), 2, axis=(1, 2))


def hinf_norm(ss: StateSpace, tol: float = 1e-9) -> float:
    """H-infinity norm to absolute accuracy ``tol``.

    Bisection on gamma with the imaginary-axis eigenvalue test of the
    associated Hamiltonian; the lower bound starts at the sup over a grid and
    is raised by evaluating sigma_max between crossing frequencies.
    """
    _require_stable(ss)
    dnorm = float(np.linalg.norm(ss.D, 2)) if ss.D.size else 0.0
    if ss.n == 0:
        return dnorm
    w = np.concatenate([[0.0], np.logspace(*np.log10(default_band(ss)), 400)])
    if not ss.is_real:
        w = np.concatenate([-w[:0:-1], w])
    lb = max(dnorm, float(_sigma_max(ss, w).max()))
    if lb == 0.0:
        return 0.0

    def probe(gamma):
        freqs = _imag_axis_freqs(ss, gamma)
        if freqs.size == 0:
            return None
        pts = np.concatenate([freqs, 0.5 * (freqs[1:] + freqs[:-1])])
        return float(_sigma_max(ss, pts).max())

    ub = 2.0 * lb
    while True:
        val = probe(ub)
        if val is None:
            break
        lb = max(lb, val, ub)
        ub *= 2.0
    while ub - lb > tol:
        gamma = 0.5 * (lb + ub)
        val = probe(gamma)
        # an eigenvalue only counts as a crossing if sigma_max confirms it
        if val is None or val < gamma * (1 - 1e-12):
            ub = gamma
        else:
            lb = max(gamma, val)
    return 0.5 * (lb + ub)


def _two_sided(ph: PhaseVector) -> float:
    return max(ph.max, -ph.min)


def limit_phases(ss: StateSpace) -> PhaseVector | None:
    """Phases of the omega -> infinity limit D, when defined."""
    ph, _, _ = _phase_sample(ss.D)
    return ph


def hinf_phase(ss: StateSpace, grid: FrequencyGrid | None = None) -> float:
    """Sup over frequency of the largest |phase|, using conjugate symmetry.

    Grid local maxima are polished by a bounded scalar search; the
    omega -> infinity limit contributes when D itself has defined phases.
    """
    grid = _grid(ss, grid)
    if not ss.is_real:
        # G(-jw) is the entrywise conjugate of the conjugate system at +jw
        mirror = StateSpace(ss.A.conj(), ss.B.conj(), ss.C.conj(), ss.D.conj())
        return max(_hinf_phase_half(ss, grid), _hinf_phase_half(mirror, grid))
    return _hinf_phase_half(ss, grid)


def _hinf_phase_half(ss: StateSpace, grid: FrequencyGrid) -> float:
    if ss.n == 0:
        ph, _, _ = _phase_sample(ss.D)
        if ph is None:
            raise NotCramped("the static gain has no phases", frequency=0.0)
        return _two_sided(ph)
    samples = bode_data(ss, grid)
    for s in samples:
        if s.phases is None:
            raise NotCramped(f"phases undefined at omega={s.omega:.6g}", frequency=s.omega)
    vals = np.array([_two_sided(s.phases) for s in samples])
    best = float(vals.max())
    ws = grid.frequencies
    if ws.size >= 3:

        def neg_obj(w):
            ph, _, _ = _phase_sample(freq_response_many(ss, [w])[0])
            return -_two_sided(ph) if ph is not None else np.inf

        mid, left, right = vals[1:-1], vals[:-2], vals[2:]
        # flat stretches carry no interior peak worth polishing
        peak = (mid >= left) & (mid >= right) & ((mid > left) | (mid > right))
        interior = np.nonzero(peak)[0] + 1
        for k in interior:
            res = minimize_scalar(
                neg_obj, bounds=(ws[k - 1], ws[k + 1]), method="bounded", options={"xatol": 1e-10 * ws[k + 1]}
            )
            if np.isfinite(res.fun):
                best = max(best, float(-res.fun))
    lim = limit_phases(ss)
    if lim is not None:
        best = max(best, _two_sided(lim))
    return best


def is_frequencywise_cramped(ss: StateSpace, grid: FrequencyGrid | None = None):
    """(verdict, first offending frequency or None) on the grid."""
    grid = _grid(ss, grid)
    for s in _samples(ss, grid.frequencies):
        if s.phases is None:
            return False, s.omega
    return True, None


def positive_freq_hull(
    ss: StateSpace, grid: FrequencyGrid | None = None, num_angles: int = 64
) -> HullPolygon:
    """Convex hull of the numerical ranges over the nonnegative grid
    frequencies together with the omega -> infinity limit W(D)."""
    _require_stable(ss)
    grid = _grid(ss, grid)
    G = freq_response_many(ss, grid.frequencies)
    pts = []
    for Gw in list(G) + [ss.D.astype(complex)]:
        pts.append(numerical_range_boundary(Gw, num_angles).vertices)
        ph, _, _ = _phase_sample(Gw)
        if ph is not None:
            pts.append(_ray_points(Gw))
    return HullPolygon(convex_hull(np.concatenate(pts)))


def _ray_points(C):
    """Points of W(C) lying on the rays of its phases (exact extreme angles)."""
    import scipy.linalg as sla

    _, V = sla.eig(C.conj().T, C)
    return np.einsum("ik,ij,jk->k", V.conj(), C, V)


def _phase_span(samples):
    """(lowest phase, highest phase) over samples with defined phases."""
    lo = min(s.phases.min for s in samples)
    hi = max(s.phases.max for s in samples)
    return lo, hi


def is_half_cramped(ss: StateSpace, grid: FrequencyGrid | None = None):
    """(verdict, separating direction or None).

    The nonnegative-frequency phase span must be narrower than pi (by
    EPS_HALF) and stay inside (-pi, pi); the direction returned bisects the
    span, which maximizes the angular margin of the separating half-plane.
    The omega -> infinity limit joins the span only when D has defined
    phases.
    """
    samples = bode_data(ss, grid)
    if any(s.phases is None for s in samples):
        return False, None
    lim = limit_phases(ss)
    phs = [s.phases for s in samples] + ([lim] if lim is not None else [])
    lo = min(p.min for p in phs)
    hi = max(p.max for p in phs)
    if hi - lo >= np.pi - EPS_HALF:
        return False, None
    return True, 0.5 * (hi + lo)


def classify(ss: StateSpace, grid: FrequencyGrid | None = None) -> SystemClassification:
    """Classify a stable system on a grid (default: adaptive from 0)."""
    _require_stable(ss)
    grid = _grid(ss, grid)
    w = grid.frequencies
    samples = _samples(ss, w)
    G = freq_response_many(ss, w)
    Gh = np.conj(np.swapaxes(G, 1, 2))
    D = ss.D
    # complex-coefficient systems are not conjugate symmetric
    if not ss.is_real:
        Gn = freq_response_many(ss, -w)
        herm = np.concatenate([G + Gh, Gn + np.conj(np.swapaxes(Gn, 1, 2))])
    else:
        herm = G + Gh
    spr = bool(
        np.linalg.eigvalsh(herm)[:, 0].min() > 0
        and np.linalg.eigvalsh(D + D.conj().T)[0] > 0
    )
    pos = w > 0
    skew = (G[pos] - Gh[pos]) / 1j
    sni = bool(pos.any() and np.linalg.eigvalsh(skew)[:, -1].max() < 0)

    fw = all(s.phases is not None for s in samples)
    lim = limit_phases(ss)
    phi_inf = None
    half, direction = False, None
    if fw:
        phi_inf = hinf_phase(ss, grid)
        half, direction = is_half_cramped(ss, grid)

    spr_phase = fw and lim is not None and phi_inf < np.pi / 2
    sni_phase = fw and pos.any() and all(
        s.phases.max < 0 and s.phases.min > -np.pi for s in samples if s.omega > 0
    )
    return SystemClassification(
        frequencywise_cramped=fw,
        half_cramped=half,
        strongly_positive_real=spr,
        strictly_negative_imaginary=sni,
        hinf_phase=phi_inf,
        separating_direction=direction,
        infinity_limit_cramped=lim is not None,
        phase_checks_agree=(spr == spr_phase) and (sni == sni_phase or not fw),
        grid=grid,
    )
