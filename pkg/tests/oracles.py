"""Independent reference computations used by the test-suite.

None of these reuse the code paths they check: phases come from sampling
the boundary of the numerical range, stability from dense eigensolves, and
H-infinity quantities from brute-force frequency grids.
"""

import numpy as np
from scipy.optimize import minimize_scalar


def random_cramped(rng, n, width=None, centre=None):
    """``T^* diag(exp(i phi)) T`` with phases in an interval shorter than pi."""
    T = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    c = rng.uniform(-np.pi, np.pi) if centre is None else centre
    w = rng.uniform(0.1, np.pi - 0.05) if width is None else width
    ph = c + rng.uniform(-w / 2, w / 2, n)
    return T.conj().T @ np.diag(np.exp(1j * ph)) @ T


def random_in_sector(rng, n, lo, hi):
    """Cramped matrix whose phases all lie in ``[lo, hi]``."""
    T = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    ph = rng.uniform(lo, hi, n)
    return T.conj().T @ np.diag(np.exp(1j * ph)) @ T


def _boundary_point(C, theta):
    H = 0.5 * (np.exp(-1j * theta) * C + np.exp(1j * theta) * C.conj().T)
    _, V = np.linalg.eigh(H)
    x = V[:, -1]
    return x.conj() @ C @ x


def boundary_phase_extremes(C, num_angles=2048):
    """Extreme arguments of the numerical range boundary.

    Boundary points are sampled at ``num_angles`` support directions; the
    best sample on each side is then polished by a bounded scalar search in
    the neighbouring direction interval, since the raw samples are only
    accurate to second order in the angular step.
    """
    C = np.asarray(C, dtype=complex)
    step = 2 * np.pi / num_angles
    thetas = np.arange(num_angles) * step
    H = 0.5 * (np.exp(-1j * thetas)[:, None, None] * C + np.exp(1j * thetas)[:, None, None] * C.conj().T)
    _, V = np.linalg.eigh(H)
    x = V[:, :, -1]
    pts = np.einsum("ki,ij,kj->k", x.conj(), C, x)
    mid = np.angle(np.mean(pts))
    rel = lambda z: np.angle(z * np.exp(-1j * mid))
    ang = rel(pts)
    out = []
    for sign in (1.0, -1.0):
        k = int(np.argmax(sign * ang))
        res = minimize_scalar(
            lambda t: -sign * rel(_boundary_point(C, t)),
            bounds=(thetas[k] - step, thetas[k] + step),
            method="bounded",
            options={"xatol": 1e-13},
        )
        out.append(max(sign * ang[k], -res.fun) * sign + mid)
    return out[0], out[1]


def dense_hinf_norm(G, omegas):
    from mimophase.sslti import freq_response_many

    R = freq_response_many(G, omegas)
    return float(np.max(np.linalg.norm(R, 2, axis=(1, 2))))


def closed_loop_eigs_stable(G, H):
    """Hurwitz test on the textbook closed-loop A-matrix, built here from scratch."""
    m = G.inputs
    E = np.eye(m) + H.D @ G.D
    Ei = np.linalg.inv(E)
    # u1 = -y2 = -(Ch xh + Dh y1), y1 = Cg xg + Dg u1
    # => (I + Dh Dg) u1 = -Ch xh - Dh Cg xg
    Ku_g = -Ei @ H.D @ G.C
    Ku_h = -Ei @ H.C
    A = np.block(
        [
            [G.A + G.B @ Ku_g, G.B @ Ku_h],
            [H.B @ (G.C + G.D @ Ku_g), H.A + H.B @ G.D @ Ku_h],
        ]
    )
    return bool(A.size == 0 or np.max(np.linalg.eigvals(A).real) < 0)
