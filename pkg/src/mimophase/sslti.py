"""State-space LTI systems: realization, reduction and frequency evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, ResonantFrequency, ToleranceNotMet
from .tfparse import ONE, Polynomial, RationalTransferMatrix, eval_tfm

__all__ = [
    "StateSpace",
    "realize",
    "minimal_realization",
    "is_hurwitz",
    "freq_response",
    "freq_response_many",
    "default_band",
    "EPS_STAB",
    "gramians",
    "response_error",
    "realization_fidelity",
]

EPS_STAB = 1e-9


def _arr(x, shape=None):
    a = np.asarray(x)
    if a.dtype.kind == "c" and not np.any(a.imag):
        a = a.real
    a = a.astype(complex if a.dtype.kind == "c" else float)
    if shape is not None:
        a = a.reshape(shape)
    return a


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Realization ``x' = A x + B u, y = C x + D u``.

    Static gains have ``A`` of shape (0, 0).  Complex data is allowed for
    test purposes; systems built from transfer matrices are real.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = np.atleast_2d(_arr(self.D))
        p, m = D.shape
        A = _arr(self.A)
        n = A.shape[0] if A.size else 0
        A = A.reshape(n, n)
        B = _arr(self.B, (n, m))
        C = _arr(self.C, (p, n))
        for name, val in zip("ABCD", (A, B, C, D)):
            if not np.all(np.isfinite(val)):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, val)

    @classmethod
    def static(cls, D):
        D = np.atleast_2d(D)
        return cls(np.zeros((0, 0)), np.zeros((0, D.shape[1])), np.zeros((D.shape[0], 0)), D)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def inputs(self) -> int:
        return self.D.shape[1]

    @property
    def outputs(self) -> int:
        return self.D.shape[0]

    @property
    def is_real(self) -> bool:
        return all(m.dtype.kind != "c" for m in (self.A, self.B, self.C, self.D))

    def poles(self) -> np.ndarray:
        return np.linalg.eigvals(self.A) if self.n else np.empty(0, dtype=complex)

    def __call__(self, omega):
        return freq_response(self, omega)

    def scaled(self, k) -> "StateSpace":
        """The system ``k G`` (k may be complex)."""
        return StateSpace(self.A, self.B, k * self.C, k * self.D)

    def plus_static(self, K) -> "StateSpace":
        """The system ``G + K`` for a constant matrix (or scalar times I) K."""
        K = np.asarray(K)
        if K.ndim == 0:
            K = K * np.eye(self.outputs)
        return StateSpace(self.A, self.B, self.C, self.D + K)

    def to_json(self) -> dict:
        def enc(M):
            if M.dtype.kind == "c":
                return {"re": M.real.tolist(), "im": M.imag.tolist()}
            return M.tolist()

        return {k: enc(getattr(self, k)) for k in "ABCD"}

    @classmethod
    def from_json(cls, obj) -> "StateSpace":
        def dec(v):
            if isinstance(v, dict):
                return np.asarray(v["re"], float) + 1j * np.asarray(v["im"], float)
            return np.asarray(v, dtype=float)

        D = np.atleast_2d(dec(obj["D"]))
        p, m = D.shape
        A = dec(obj.get("A", []))
        n = A.shape[0] if A.size else 0
        B = dec(obj.get("B", [])) if n else np.zeros((0, m))
        C = dec(obj.get("C", [])) if n else np.zeros((p, 0))
        return cls(A, B, C, D)


def is_hurwitz(ss: StateSpace, eps: float = EPS_STAB) -> bool:
    """All poles strictly left of ``-eps``; static gains count as stable."""
    return bool(ss.n == 0 or np.max(ss.poles().real) < -eps)


def freq_response_many(ss: StateSpace, omegas) -> np.ndarray:
    """Stacked ``C (j w I - A)^{-1} B + D`` for every frequency (shape K x p x m)."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    K = omegas.size
    out = np.broadcast_to(ss.D.astype(complex), (K,) + ss.D.shape).copy()
    if ss.n == 0:
        return out
    poles = ss.poles()
    gap = np.min(np.abs(1j * omegas[:, None] - poles[None, :]), axis=1)
    scale = max(1.0, np.linalg.norm(ss.A, 2))
    bad = np.nonzero(gap <= 1e-12 * scale)[0]
    if bad.size:
        raise ResonantFrequency(f"j*{omegas[bad[0]]} is an eigenvalue of A")
    M = 1j * omegas[:, None, None] * np.eye(ss.n)[None] - ss.A[None]
    X = np.linalg.solve(M, np.broadcast_to(ss.B, (K,) + ss.B.shape))
    return out + ss.C[None] @ X


def freq_response(ss: StateSpace, omega: float) -> np.ndarray:
    return freq_response_many(ss, [omega])[0]


def default_band(ss: StateSpace) -> tuple[float, float]:
    """Sweep limits bracketing the pole magnitudes by two decades."""
    mags = np.abs(ss.poles())
    mags = mags[mags > 0]
    if mags.size == 0:
        return 0.01, 100.0
    return min(0.01, 0.01 * mags.min()), 100.0 * max(1.0, mags.max())


# -- realization ----------------------------------------------------------------


def _divides(d: Polynomial, L: Polynomial, rtol=1e-10) -> bool:
    if d.degree > L.degree:
        return False
    _, r = L.divmod(d)
    return float(np.max(np.abs(r.coeffs))) <= rtol * float(np.max(np.abs(L.coeffs)))


def _common_denominator(dens) -> Polynomial:
    """Monic common multiple built from divisibility checks only."""
    L = ONE
    for d in dens:
        d = d.monic()
        if _divides(d, L):
            continue
        if _divides(L, d):
            L = d
        else:
            L = (L * d).monic()
    return L


def realize(tfm: RationalTransferMatrix) -> StateSpace:
    """Block-diagonal realization with one controllable-canonical block per
    column, built over that column's common denominator."""
    m = tfm.size
    blocks_A, blocks_B, blocks_C = [], [], []
    D = np.zeros((m, m))
    for j in range(m):
        L = _common_denominator([tfm.den(i, j) for i in range(m)])
        nj = L.degree
        Cj = np.zeros((m, nj))
        for i in range(m):
            num, den = tfm.entries[i][j]
            q, _ = L.divmod(den.monic())
            N = np.zeros(nj + 1)
            c = (num * q).coeffs
            N[: min(len(c), nj + 1)] = np.asarray(c[: nj + 1]) / den.leading
            D[i, j] = N[nj]
            Cj[i] = N[:nj] - N[nj] * np.asarray(L.coeffs[:nj])
        if nj == 0:
            continue
        Aj = np.zeros((nj, nj))
        Aj[:-1, 1:] = np.eye(nj - 1)
        Aj[-1] = -np.asarray(L.coeffs[:nj])
        Bj = np.zeros((nj, m))
        Bj[-1, j] = 1.0
        blocks_A.append(Aj)
        blocks_B.append(Bj)
        blocks_C.append(Cj)
    if not blocks_A:
        return StateSpace.static(D)
    return StateSpace(sla.block_diag(*blocks_A), np.vstack(blocks_B), np.hstack(blocks_C), D)


def _reachable_basis(A, B, tol):
    """Orthonormal basis of the Krylov space of (A, B) by block Arnoldi."""
    n = A.shape[0]
    Q = np.zeros((n, 0), dtype=A.dtype if A.dtype.kind == "c" else B.dtype)
    W = B
    ref = max(np.linalg.norm(B, 2), 1e-300)
    while Q.shape[1] < n:
        for _ in range(2):
            W = W - Q @ (Q.conj().T @ W)
        if W.size == 0:
            break
        U, s, _ = np.linalg.svd(W, full_matrices=False)
        r = int(np.sum(s > tol * ref))
        if r == 0:
            break
        Qn = U[:, :r]
        Q = np.hstack([Q, Qn])
        W = A @ Qn
        ref = max(np.linalg.norm(A, 2), 1e-300)
    return Q


def _project(ss: StateSpace, Q) -> StateSpace:
    Qh = Q.conj().T
    return StateSpace(Qh @ ss.A @ Q, Qh @ ss.B, ss.C @ Q, ss.D)


def _staircase(ss: StateSpace, tol) -> StateSpace:
    if ss.n == 0:
        return ss
    Q = _reachable_basis(ss.A, ss.B, tol)
    red = _project(ss, Q)
    if red.n == 0:
        return StateSpace.static(ss.D)
    Q = _reachable_basis(red.A.conj().T, red.C.conj().T, tol)
    red = _project(red, Q)
    return red if red.n else StateSpace.static(ss.D)


def _psd_factor(W):
    w, V = np.linalg.eigh(0.5 * (W + W.conj().T))
    return V * np.sqrt(np.clip(w, 0.0, None))


def gramians(ss: StateSpace):
    """Controllability and observability gramians of a Hurwitz system."""
    Wc = sla.solve_continuous_lyapunov(ss.A, -ss.B @ ss.B.conj().T)
    Wo = sla.solve_continuous_lyapunov(ss.A.conj().T, -ss.C.conj().T @ ss.C)
    return Wc, Wo


def _balanced_truncation(ss: StateSpace, tol):
    Wc, Wo = gramians(ss)
    Lc, Lo = _psd_factor(Wc), _psd_factor(Wo)
    U, hsv, Vh = np.linalg.svd(Lo.conj().T @ Lc)
    if hsv.size == 0 or hsv[0] == 0.0:
        return StateSpace.static(ss.D), hsv, 0
    r = int(np.sum(hsv > tol * hsv[0]))
    S = 1.0 / np.sqrt(hsv[:r])
    T = Lc @ Vh[:r].conj().T * S
    Ti = (S[:, None] * U[:, :r].conj().T) @ Lo.conj().T
    red = StateSpace(Ti @ ss.A @ T, Ti @ ss.B, ss.C @ T, ss.D)
    return red, hsv, r


def _verification_grid(ss: StateSpace, n=200):
    lo, hi = default_band(ss)
    return np.concatenate([[0.0], np.logspace(np.log10(lo), np.log10(hi), n)])


def response_error(full: StateSpace, red: StateSpace, omegas=None) -> tuple[float, float]:
    """(max sigma_max of the difference, max sigma_max of ``full``) on a grid."""
    if omegas is None:
        omegas = _verification_grid(full)
    Gf = freq_response_many(full, omegas)
    Gr = freq_response_many(red, omegas)
    err = np.linalg.norm(Gf - Gr, 2, axis=(1, 2)).max()
    gmax = max(np.linalg.norm(Gf, 2, axis=(1, 2)).max(), np.linalg.norm(full.D, 2))
    return float(err), float(gmax)


def minimal_realization(ss: StateSpace, tol: float = 1e-9) -> StateSpace:
    """Remove uncontrollable/unobservable dynamics.

    A controllability/observability staircase always runs first; for
    Hurwitz systems balanced truncation then discards Hankel singular
    values below ``tol`` times the largest.  The reduced response is checked
    against the original on a frequency grid.
    """
    if ss.n == 0:
        return ss
    red = _staircase(ss, tol)
    discarded = 0.0
    if red.n and is_hurwitz(red):
        red, hsv, r = _balanced_truncation(red, tol)
        discarded = float(np.sum(hsv[r:]))
    if is_hurwitz(ss) or not ss.n:
        omegas = _verification_grid(ss)
    else:
        # avoid imaginary-axis poles of the original in the check grid
        omegas = _verification_grid(ss)
        gaps = np.min(np.abs(1j * omegas[:, None] - ss.poles()[None]), axis=1)
        omegas = omegas[gaps > 1e-6 * max(1.0, np.abs(ss.poles()).max())]
    err, gmax = response_error(ss, red, omegas)
    bound = max(tol * gmax, 2.0 * discarded) * (1 + 1e-6) + 1e3 * np.finfo(float).eps * gmax
    if err > bound:
        raise ToleranceNotMet(f"reduced response deviates by {err:.3g} (bound {bound:.3g})")
    return red


def check_square(ss: StateSpace):
    if ss.inputs != ss.outputs:
        raise DimensionMismatch("system must be square")


def realization_fidelity(tfm: RationalTransferMatrix, ss: StateSpace, omegas=None) -> float:
    """Largest relative deviation between ``ss`` and direct evaluation of ``tfm``."""
    if omegas is None:
        omegas = _verification_grid(ss)
    G = freq_response_many(ss, omegas)
    worst = 0.0
    for w, Gw in zip(omegas, G):
        ref = eval_tfm(tfm, 1j * w)
        worst = max(worst, np.linalg.norm(Gw - ref, 2) / max(np.linalg.norm(ref, 2), 1e-300))
    return float(worst)
