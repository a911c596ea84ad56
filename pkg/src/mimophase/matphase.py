"""Magnitudes and phases of complex square matrices.

Phases are the canonical angles of a cramped matrix (one whose numerical
range excludes the origin).  They are computed from the generalized
eigenproblem ``C^* x = lambda C x`` and anchored on the mid-angle of the
numerical range, so every phase lies in ``(gamma - pi/2, gamma + pi/2)``
with ``gamma`` normalized to ``(-pi, pi]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq, minimize_scalar

from .errors import DimensionMismatch, NotCramped, NumericallySingular

__all__ = [
    "SectorInfo",
    "PhaseVector",
    "HullPolygon",
    "as_matrix",
    "singular_values",
    "numerical_range_boundary",
    "crampedness",
    "matrix_phases",
    "phases_many",
    "phase_bounds",
    "majorizes",
    "log_majorizes",
    "product_eig_angles",
    "in_cone",
    "convex_hull",
    "matrix_to_json",
    "matrix_from_json",
]

CRAMPED_GRID = 720
_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SectorInfo:
    """Crampedness verdict for a matrix.

    When ``cramped`` is False the angle fields are None and
    ``distance_to_origin`` is 0 (the origin lies in the numerical range).
    """

    cramped: bool
    distance_to_origin: float
    mid_angle: float | None = None
    field_angle: float | None = None
    upper_ray: float | None = None
    lower_ray: float | None = None


@dataclass(frozen=True)
class PhaseVector:
    values: np.ndarray
    anchor: float

    @property
    def max(self) -> float:
        return float(self.values[0])

    @property
    def min(self) -> float:
        return float(self.values[-1])

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class HullPolygon:
    """Counterclockwise convex polygon with optional support-function data.

    ``support_angles``/``support_values`` describe the outer approximation
    ``{z : Re(exp(-i t) z) <= h(t)}``; the vertices themselves are points of
    the approximated set, so their hull is an inner approximation.
    """

    vertices: np.ndarray
    support_angles: np.ndarray = field(default_factory=lambda: np.empty(0))
    support_values: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.vertices))) if len(self.vertices) else 0.0

    def angles(self) -> np.ndarray:
        return np.angle(self.vertices)


def as_matrix(C) -> np.ndarray:
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ValueError("matrix has non-finite entries")
    return C


def matrix_to_json(C) -> dict:
    C = np.asarray(C, dtype=complex)
    return {"re": C.real.tolist(), "im": C.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise DimensionMismatch("'re' and 'im' parts differ in shape")
    return as_matrix(re + 1j * im)


def singular_values(C) -> np.ndarray:
    """All singular values of ``C`` in non-increasing order."""
    return np.linalg.svd(as_matrix(C), compute_uv=False)


def _rotated_hermitian(C, thetas):
    """Hermitian parts of exp(-i t) C for every t in ``thetas`` (stacked)."""
    rot = np.exp(-1j * np.asarray(thetas, dtype=float))[:, None, None] * C[None]
    return 0.5 * (rot + np.conj(np.swapaxes(rot, 1, 2)))


def _min_eig(C, theta):
    H = np.exp(-1j * theta) * C
    return np.linalg.eigvalsh(0.5 * (H + H.conj().T))[0]


def _wrap(x, period=_TWO_PI):
    """Map into (-period/2, period/2]."""
    x = np.asarray(x, dtype=float)
    return x - period * np.ceil(x / period - 0.5)


def convex_hull(points, tol: float = 1e-14) -> np.ndarray:
    """Counterclockwise hull of complex points (monotone chain).

    Degenerate inputs are handled: a segment returns its two endpoints and a
    single point returns itself.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size == 0:
        return pts
    scale = max(1.0, float(np.max(np.abs(pts))))
    order = np.lexsort((pts.imag, pts.real))
    pts = pts[order]
    # drop near duplicates
    keep = [pts[0]]
    for p in pts[1:]:
        if abs(p - keep[-1]) > tol * scale:
            keep.append(p)
    if len(keep) <= 2:
        return np.asarray(keep)

    def cross(o, a, b):
        return (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)

    lower, upper = [], []
    eps = tol * scale * scale
    for p in keep:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= eps:
            lower.pop()
        lower.append(p)
    for p in reversed(keep):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= eps:
            upper.pop()
        upper.append(p)
    return np.asarray(lower[:-1] + upper[:-1])


def numerical_range_boundary(C, num_angles: int = 360) -> HullPolygon:
    """Boundary samples of the numerical range of ``C``.

    For each direction the top eigenvector of the rotated Hermitian part
    gives a boundary point ``x^* C x``; the top eigenvalue is the support
    value in that direction.
    """
    if num_angles < 3:
        raise ValueError("num_angles must be at least 3")
    C = as_matrix(C)
    thetas = np.linspace(0.0, _TWO_PI, num_angles, endpoint=False)
    w, V = np.linalg.eigh(_rotated_hermitian(C, thetas))
    x = V[:, :, -1]
    pts = np.einsum("ki,ij,kj->k", x.conj(), C, x)
    return HullPolygon(convex_hull(pts), thetas, w[:, -1])


def crampedness(C) -> SectorInfo:
    """Decide whether 0 lies outside the numerical range of ``C``.

    The support-type function ``f(t) = lambda_min(He(exp(-i t) C))`` is
    maximized on a uniform grid and refined; its maximum is the distance
    from the origin to W(C).  The supporting rays come from the two zero
    crossings of ``f`` around the maximizer.
    """
    C = as_matrix(C)
    smax = singular_values(C)[0]
    eps = 1e-9 * (1.0 + smax)
    thetas = np.linspace(-np.pi, np.pi, CRAMPED_GRID, endpoint=False)
    fvals = np.linalg.eigvalsh(_rotated_hermitian(C, thetas))[:, 0]
    k = int(np.argmax(fvals))
    h = _TWO_PI / CRAMPED_GRID
    res = minimize_scalar(
        lambda t: -_min_eig(C, t),
        bounds=(thetas[k] - h, thetas[k] + h),
        method="bounded",
        options={"xatol": 1e-12},
    )
    if -res.fun > fvals[k]:
        t_star, dist = float(res.x), float(-res.fun)
    else:
        t_star, dist = float(thetas[k]), float(fvals[k])
    if dist <= eps:
        return _congruence_sector(C, dist)

    f = lambda t: _min_eig(C, t)  # noqa: E731
    t_lo = brentq(f, t_star - np.pi, t_star, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    t_hi = brentq(f, t_star, t_star + np.pi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    upper = t_lo + np.pi / 2
    lower = t_hi - np.pi / 2
    if upper < lower:
        # rounding on a zero-width sector
        upper = lower = 0.5 * (upper + lower)
    mid = 0.5 * (upper + lower)
    shift = _wrap(mid) - mid
    return SectorInfo(
        True,
        dist,
        mid_angle=mid + shift,
        field_angle=upper - lower,
        upper_ray=upper + shift,
        lower_ray=lower + shift,
    )


def _congruence_margin(C, V, z, mid):
    """Certified lower bound on dist(0, W(C)), or None.

    The direct test on ``C`` is tried first.  When the directions of ``C``
    differ wildly in scale the direct margin can fall under the threshold
    although W(C) misses the origin, so the test is repeated on the
    congruent matrix ``K = S V^* C V S`` (S scales ``v^* C v`` to unit
    modulus).  Congruence by an invertible matrix preserves crampedness and
    ``dist(0, W(C)) >= dist(0, W(K)) / sigma_max(V S)^2``.
    """
    smax = np.linalg.norm(C, 2)
    direct = _min_eig(C, mid)
    if direct > 1e-9 * (1.0 + smax):
        return direct
    VS = V / np.sqrt(np.abs(z))
    if np.linalg.cond(VS) > 1e12:
        return None
    K = VS.conj().T @ C @ VS
    margin = _min_eig(K, mid)
    if margin <= 1e-9 * (1.0 + np.linalg.norm(K, 2)):
        return None
    return max(direct, margin / np.linalg.norm(VS, 2) ** 2)


def _eig_data(C):
    """Generalized eigenpairs of (C^*, C) and the diagonal v^* C v."""
    try:
        lam, V = sla.eig(C.conj().T, C)
    except (np.linalg.LinAlgError, ValueError):
        return None
    if not np.all(np.isfinite(lam)):
        return None
    z = np.einsum("ik,ij,jk->k", V.conj(), C, V)
    if np.any(np.abs(z) <= 1e-300):
        return None
    return lam, V, z


def _congruence_sector(C, dist):
    """Fallback verdict for matrices whose direct margin is below threshold."""
    if np.linalg.cond(C) > 1e14:
        return SectorInfo(False, 0.0)
    data = _eig_data(C)
    phases = _fast_phases(C)
    if phases is None or data is None:
        return SectorInfo(False, 0.0)
    lam, V, z = data
    upper, lower = float(phases.max()), float(phases.min())
    mid = 0.5 * (upper + lower)
    bound = _congruence_margin(C, V, z, mid)
    return SectorInfo(
        True,
        float(max(dist, bound)),
        mid_angle=mid,
        field_angle=upper - lower,
        upper_ray=upper,
        lower_ray=lower,
    )


def _fast_phases(C):
    """Phases from the generalized eigenproblem, certified by one eigensolve.

    Returns the unsorted phases (with the mid-angle in (-pi, pi]) or None
    when the quick certificate is inconclusive.  The eigenvectors ``v`` of
    ``C^{-1} C^*`` satisfy ``v^* C v = d |.|^2`` for the unitary factor
    ``d`` of the sectoral decomposition, which fixes the mod-pi ambiguity
    of ``-angle(lambda)/2``.
    """
    n = C.shape[0]
    data = _eig_data(C)
    if data is None:
        return None
    lam, V, z = data
    psi = np.sort(np.angle(z))
    if n == 1:
        gaps_start = 0
        width = 0.0
    else:
        gaps = np.diff(np.concatenate([psi, [psi[0] + _TWO_PI]]))
        g = int(np.argmax(gaps))
        width = _TWO_PI - gaps[g]
        gaps_start = (g + 1) % n
    if width >= np.pi:
        return None
    mid = psi[gaps_start] + 0.5 * width
    if _congruence_margin(C, V, z, mid) is None:
        return None
    mid = float(_wrap(mid))
    raw = -0.5 * np.angle(lam)
    ref = mid + _wrap(np.angle(z) - mid)
    phases = ref + _wrap(raw - ref, np.pi)
    gamma = 0.5 * (phases.max() + phases.min())
    shift = _wrap(gamma) - gamma
    return phases + shift


def matrix_phases(C) -> PhaseVector:
    """Canonical-angle phases of a cramped matrix, sorted non-increasing.

    Raises NotCramped when 0 is in the numerical range.
    """
    C = as_matrix(C)
    if np.linalg.cond(C) > 1e14:
        info = crampedness(C)
        if not info.cramped:
            raise NotCramped()
        raise NumericallySingular("matrix is too ill-conditioned for phase computation")
    phases = _fast_phases(C)
    if phases is None:
        info = crampedness(C)
        if not info.cramped:
            raise NotCramped()
        gamma = info.mid_angle
        lam = sla.eigvals(C.conj().T, C)
        phases = gamma - 0.5 * np.angle(lam * np.exp(2j * gamma))
    else:
        gamma = 0.5 * (phases.max() + phases.min())
    return PhaseVector(np.sort(phases)[::-1], gamma - np.pi / 2)


def phases_many(Cs) -> list[PhaseVector | None]:
    """``matrix_phases`` over a stack of matrices; None marks non-cramped ones.

    Well-conditioned members go through one batched eigensolve of
    ``C^{-1} C^*`` (formed with a linear solve) with a batched Hermitian
    certificate; the rest, and any member whose quick certificate is
    inconclusive, take the per-matrix route.
    """
    Cs = np.asarray(Cs, dtype=complex)
    k, n, _ = Cs.shape
    out: list[PhaseVector | None] = [None] * k
    todo = np.ones(k, dtype=bool)
    if k and n:
        good = np.linalg.cond(Cs) < 1e8
        idx = np.nonzero(good)[0]
        if idx.size:
            C = Cs[idx]
            Ch = np.conj(np.swapaxes(C, 1, 2))
            M = np.linalg.solve(C, Ch)
            lam, V = np.linalg.eig(M)
            z = np.einsum("bik,bij,bjk->bk", V.conj(), C, V)
            psi = np.sort(np.angle(z), axis=1)
            gaps = np.diff(np.concatenate([psi, psi[:, :1] + _TWO_PI], axis=1), axis=1)
            g = np.argmax(gaps, axis=1)
            width = _TWO_PI - gaps[np.arange(idx.size), g]
            start = psi[np.arange(idx.size), (g + 1) % n]
            mid = start + 0.5 * width
            Hm = _rotated_hermitian_each(C, mid)
            margin = np.linalg.eigvalsh(Hm)[:, 0]
            smax = np.linalg.norm(C, 2, axis=(1, 2))
            ok = (width < np.pi) & (margin > 1e-9 * (1.0 + smax))
            mid = _wrap(mid)
            raw = -0.5 * np.angle(lam)
            ref = mid[:, None] + _wrap(np.angle(z) - mid[:, None])
            ph = ref + _wrap(raw - ref, np.pi)
            gamma = 0.5 * (ph.max(axis=1) + ph.min(axis=1))
            ph += (_wrap(gamma) - gamma)[:, None]
            gamma = _wrap(gamma)
            ph = -np.sort(-ph, axis=1)
            for j in np.nonzero(ok)[0]:
                out[idx[j]] = PhaseVector(ph[j], gamma[j] - np.pi / 2)
                todo[idx[j]] = False
            # C = V^{-*} diag(z) V^{-1}: when the z's do not fit in any open
            # half-plane some nonzero y gives y^* diag(z) y = 0, so 0 is in W(C)
            # For cramped C, C^{-1} C^* is similar to a unitary matrix, so an
            # eigenvalue clearly off the unit circle also rules C out.
            # Bauer-Fike style error estimate for the computed eigenvalues
            err = 1e2 * np.finfo(float).eps * np.linalg.cond(V) * np.linalg.cond(C)
            err = err * np.linalg.norm(M, 2, axis=(1, 2))
            off_circle = np.abs(np.abs(lam) - 1.0).max(axis=1) > 10 * err + 1e-9
            wide = (width > np.pi + 1e-6) & (err < 1e-8)
            todo[idx[wide | off_circle]] = False
    for j in np.nonzero(todo)[0]:
        try:
            out[j] = matrix_phases(Cs[j])
        except (NotCramped, NumericallySingular):
            out[j] = None
    return out


def _rotated_hermitian_each(Cs, thetas):
    R = np.exp(-1j * np.asarray(thetas))[:, None, None] * Cs
    return 0.5 * (R + np.conj(np.swapaxes(R, 1, 2)))


def phase_bounds(C) -> tuple[float, float]:
    """(smallest, largest) phase, read off the supporting rays of W(C)."""
    info = crampedness(C)
    if not info.cramped:
        raise NotCramped()
    return info.lower_ray, info.upper_ray


def _check_pair(x, y):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise DimensionMismatch(f"lengths differ: {x.size} vs {y.size}")
    return np.sort(x)[::-1], np.sort(y)[::-1]


def majorizes(x, y, tol: float = 1e-9) -> bool:
    """True when ``x`` is majorized by ``y`` (x < y in the majorization order).

    The tolerance is additive and scaled by the larger 1-norm of the inputs.
    """
    x, y = _check_pair(x, y)
    atol = tol * max(1.0, np.abs(x).sum(), np.abs(y).sum())
    cx, cy = np.cumsum(x), np.cumsum(y)
    return bool(np.all(cx[:-1] <= cy[:-1] + atol) and abs(cx[-1] - cy[-1]) <= atol)


def log_majorizes(x, y, tol: float = 1e-9) -> bool:
    """True when nonnegative ``x`` is log-majorized by ``y``.

    Partial products are compared with a relative tolerance ``tol``.
    """
    x, y = _check_pair(x, y)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("log-majorization needs nonnegative vectors")
    px, py = np.cumprod(x), np.cumprod(y)
    top = max(x[0], y[0], 1e-300)
    floor = tol * top ** np.arange(1, len(x) + 1)
    ok = np.all(px[:-1] <= py[:-1] * (1 + tol) + floor[:-1])
    eq = abs(px[-1] - py[-1]) <= tol * max(px[-1], py[-1]) + floor[-1]
    return bool(ok and eq)


def product_eig_angles(A, B) -> np.ndarray:
    """Arguments of the eigenvalues of AB, sorted non-increasing.

    The arguments are placed in ``(t1 + t2, t1 + t2 + 2 pi)`` where
    ``t_i = gamma_i - pi/2`` are the lower ends of the phase intervals used
    by :func:`matrix_phases` for A and B.
    """
    A, B = as_matrix(A), as_matrix(B)
    if A.shape != B.shape:
        raise DimensionMismatch("A and B must have the same size")
    ta = matrix_phases(A).anchor
    tb = matrix_phases(B).anchor
    base = ta + tb
    ang = np.angle(np.linalg.eigvals(A @ B))
    out = base + np.mod(ang - base, _TWO_PI)
    return np.sort(out)[::-1]


def in_cone(C, alpha: float, beta: float, tol: float = 0.0) -> bool:
    """Membership of ``C`` in the cone of cramped matrices with phases in
    ``[alpha, beta]``."""
    if not 0 <= beta - alpha < _TWO_PI:
        raise ValueError("need 0 <= beta - alpha < 2 pi")
    C = as_matrix(C)
    try:
        ph = matrix_phases(C)
    except NotCramped:
        return False
    lo, hi = ph.min, ph.max
    k = np.round((0.5 * (alpha + beta) - 0.5 * (lo + hi)) / _TWO_PI)
    lo, hi = lo + _TWO_PI * k, hi + _TWO_PI * k
    return bool(lo >= alpha - tol and hi <= beta + tol)
