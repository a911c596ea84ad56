"""Linear matrix inequalities for frequency-domain conditions.

An LMI here is ``F(x) = F0 + sum_i x_i F_i < 0`` over real scalars ``x`` with
Hermitian data, plus side constraints ``S(x) > 0``.  Hermitian decision
matrices are expanded into real scalars (diagonal entries, then real and
imaginary parts of the strict upper triangle), and ``labels`` records which
scalar is which entry so certificates can be handed back as matrices.

Feasibility is decided by a small interior-point SDP (cvxopt) on the real
embedding, but a "feasible" verdict is only issued after an independent
eigenvalue check of the certificate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers

from .errors import AlphaOutOfRange, DimensionMismatch, ImaginaryAxisEigenvalue, Unstable
from .sslti import StateSpace, freq_response_many, is_hurwitz

__all__ = [
    "HermitianLmi",
    "SdpResult",
    "CurveSpec",
    "IMAGINARY_AXIS",
    "POSITIVE_FREQUENCIES",
    "hermitian_basis",
    "assemble_kyp",
    "assemble_gkyp",
    "bounded_real_lmi",
    "sectored_real_lmi",
    "half_cramped_lmi",
    "realify",
    "solve_feasibility",
    "verify_certificate",
    "sectored_lmi_test",
    "sectored_sweep_test",
    "kyp_sweep_margin",
]

EPS_FEAS = 1e-7
BOX = 1e6


def _herm(M):
    return 0.5 * (M + M.conj().T)


@dataclass(frozen=True)
class CurveSpec:
    sigma: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        for name in ("sigma", "psi"):
            M = np.asarray(getattr(self, name), dtype=complex)
            if M.shape != (2, 2) or not np.allclose(M, M.conj().T, atol=1e-12):
                raise ValueError(f"{name} must be a 2x2 Hermitian matrix")
            object.__setattr__(self, name, M)


IMAGINARY_AXIS = CurveSpec(np.array([[0, 1], [1, 0]]), np.zeros((2, 2)))
POSITIVE_FREQUENCIES = CurveSpec(np.array([[0, 1], [1, 0]]), np.array([[0, 1j], [-1j, 0]]))


@dataclass(frozen=True)
class HermitianLmi:
    """``constant + sum_i x_i basis[i] < 0`` and every side block ``> 0``."""

    constant: np.ndarray
    basis: np.ndarray
    labels: tuple = ()
    side_constraints: tuple = ()  # of (constant, basis) pairs
    shapes: dict = field(default_factory=dict)  # decision matrix name -> (size, kind)

    def __post_init__(self):
        F0 = np.asarray(self.constant)
        N = F0.shape[0]
        basis = np.asarray(self.basis).reshape(-1, N, N)
        object.__setattr__(self, "constant", F0)
        object.__setattr__(self, "basis", basis)
        if len(self.labels) not in (0, basis.shape[0]):
            raise DimensionMismatch("one label per scalar variable is required")
        for S0, Sb in self.side_constraints:
            if np.asarray(Sb).reshape(-1, *np.shape(S0)).shape[0] != basis.shape[0]:
                raise DimensionMismatch("side constraint has the wrong number of variables")
        for M in [F0, *basis, *(s for pair in self.side_constraints for s in [pair[0], *pair[1]])]:
            if not np.allclose(M, np.conj(np.swapaxes(M, -1, -2)), atol=1e-12 * max(1.0, np.abs(M).max())):
                raise ValueError("LMI data must be Hermitian")

    @property
    def num_vars(self) -> int:
        return self.basis.shape[0]

    @property
    def size(self) -> int:
        return self.constant.shape[0]

    def blocks(self):
        """All constraints as ``(constant, basis, sign)``; sign -1 means ``< 0``."""
        yield self.constant, self.basis, -1
        for S0, Sb in self.side_constraints:
            S0 = np.asarray(S0)
            yield S0, np.asarray(Sb).reshape(-1, *S0.shape), +1

    def evaluate(self, x) -> np.ndarray:
        return self.constant + np.tensordot(np.asarray(x, float), self.basis, axes=1)

    def side_values(self, x):
        x = np.asarray(x, float)
        return [np.asarray(S0) + np.tensordot(x, np.asarray(Sb).reshape(-1, *np.shape(S0)), axes=1)
                for S0, Sb in self.side_constraints]

    def data_norm(self) -> float:
        mats = [F0 for F0, _, _ in self.blocks()] + [B for _, Bs, _ in self.blocks() for B in Bs]
        vals = [np.linalg.norm(M, 2) for M in mats if M.size]
        scale = max(vals) if vals else 0.0
        return scale if scale > 0 else 1.0

    def unpack(self, x) -> dict:
        """Decision matrices from the scalar vector."""
        out = {name: np.zeros((n, n), dtype=complex if kind == "hermitian" else float)
               for name, (n, kind) in self.shapes.items()}
        for val, (name, i, j, part) in zip(np.asarray(x, float), self.labels):
            M = out[name]
            if part == "re":
                M[i, j] += val
                if i != j:
                    M[j, i] += val
            else:
                M[i, j] += 1j * val
                M[j, i] -= 1j * val
        return out

    def pack(self, mats: dict) -> np.ndarray:
        x = np.empty(self.num_vars)
        for k, (name, i, j, part) in enumerate(self.labels):
            M = np.asarray(mats[name])
            if M.shape != (self.shapes[name][0],) * 2:
                raise DimensionMismatch(f"{name} has shape {M.shape}")
            x[k] = M[i, j].real if part == "re" else M[i, j].imag
        return x

    def to_json(self) -> dict:
        def enc(M):
            M = np.asarray(M)
            return {"re": M.real.tolist(), "im": M.imag.tolist()}

        return {
            "constant": enc(self.constant),
            "basis": [enc(B) for B in self.basis],
            "labels": [list(lab) for lab in self.labels],
            "shapes": {k: list(v) for k, v in self.shapes.items()},
            "side_constraints": [
                {"constant": enc(S0), "basis": [enc(B) for B in np.asarray(Sb).reshape(-1, *np.shape(S0))]}
                for S0, Sb in self.side_constraints
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "HermitianLmi":
        def dec(d):
            return np.asarray(d["re"], float) + 1j * np.asarray(d["im"], float)

        F0 = dec(obj["constant"])
        N = F0.shape[0]
        basis = np.array([dec(B) for B in obj["basis"]]).reshape(-1, N, N)
        side = []
        for s in obj.get("side_constraints", []):
            S0 = dec(s["constant"])
            side.append((S0, np.array([dec(B) for B in s["basis"]]).reshape(-1, *S0.shape)))
        return cls(
            F0,
            basis,
            tuple(tuple(lab) for lab in obj.get("labels", [])),
            tuple(side),
            {k: tuple(v) for k, v in obj.get("shapes", {}).items()},
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass(frozen=True)
class SdpResult:
    status: str  # "feasible" | "infeasible_budget"
    certificate: dict
    min_slack: float
    iterations: int
    x: np.ndarray = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def to_json(self) -> dict:
        def enc(M):
            M = np.asarray(M)
            if M.dtype.kind == "c":
                return {"re": M.real.tolist(), "im": M.imag.tolist()}
            return M.tolist()

        return {
            "status": self.status,
            "min_slack": self.min_slack,
            "iterations": self.iterations,
            "certificate": {k: enc(v) for k, v in self.certificate.items()},
        }


# -- decision-variable bases ----------------------------------------------------------


def hermitian_basis(n: int, name: str, real: bool = False):
    """Basis matrices and labels for an n x n Hermitian (or real symmetric) matrix."""
    mats, labels = [], []
    for i in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1
        mats.append(E)
        labels.append((name, i, i, "re"))
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = E[j, i] = 1
            mats.append(E)
            labels.append((name, i, j, "re"))
            if not real:
                E = np.zeros((n, n), dtype=complex)
                E[i, j], E[j, i] = 1j, -1j
                mats.append(E)
                labels.append((name, i, j, "im"))
    return mats, labels


def _check_hermitian(M, what="M"):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{what} must be square")
    if not np.allclose(M, M.conj().T, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise ValueError(f"{what} must be Hermitian")
    return _herm(M)


def _check_ab(A, B, M):
    A = np.asarray(A, dtype=complex)
    A = A.reshape(0, 0) if A.size == 0 else np.atleast_2d(A)
    n = A.shape[0]
    M = _check_hermitian(M)
    B = np.asarray(B, dtype=complex)
    m = B.shape[-1] if B.ndim == 2 else M.shape[0] - n
    B = B.reshape(n, m)
    if M.shape[0] != n + m:
        raise DimensionMismatch(f"M must be {(n + m)}x{(n + m)}")
    return A, B, M


def _side_block(n, basis_all, offset, count, total):
    """Side constraint 'the decision matrix occupying ``[offset, offset+count)`` > 0'."""
    S0 = np.zeros((n, n), dtype=complex)
    Sb = np.zeros((total, n, n), dtype=complex)
    Sb[offset:offset + count] = basis_all
    return S0, Sb


def assemble_kyp(A, B, M) -> HermitianLmi:
    """``M + [[A^*X + XA, XB], [B^*X, 0]] < 0`` in Hermitian X (sign-free)."""
    A, B, M = _check_ab(A, B, M)
    n = A.shape[0]
    eig = np.linalg.eigvals(A) if n else np.empty(0)
    if np.any(np.abs(eig.real) <= 1e-12 * max(1.0, np.abs(eig).max(initial=0.0))):
        raise ImaginaryAxisEigenvalue("A has an eigenvalue on the imaginary axis")
    mats, labels = hermitian_basis(n, "X")
    basis = [np.block([[A.conj().T @ E + E @ A, E @ B], [B.conj().T @ E, np.zeros((B.shape[1],) * 2)]]) for E in mats]
    return HermitianLmi(M, np.array(basis).reshape(-1, *M.shape), tuple(labels), (), {"X": (n, "hermitian")})


def _gkyp_parts(A, B, M, curve: CurveSpec, xname="X", yname="Y"):
    n, m = B.shape
    T = np.block([[A, B], [np.eye(n), np.zeros((n, m))]])
    mx, lx = hermitian_basis(n, xname)
    my, ly = hermitian_basis(n, yname)
    bx = [_herm(T.conj().T @ np.kron(curve.sigma, E) @ T) for E in mx]
    by = [_herm(T.conj().T @ np.kron(curve.psi, E) @ T) for E in my]
    return bx, lx, by, ly, my


def assemble_gkyp(A, B, M, curve: CurveSpec) -> HermitianLmi:
    """``T^*(Sigma (x) X + Psi (x) Y) T + M < 0`` with ``Y > 0``, ``T = [[A, B], [I, 0]]``."""
    A, B, M = _check_ab(A, B, M)
    n = A.shape[0]
    bx, lx, by, ly, my = _gkyp_parts(A, B, M, curve)
    total = len(bx) + len(by)
    basis = np.array(bx + by).reshape(total, *M.shape)
    side = _side_block(n, np.array(my).reshape(-1, n, n), len(bx), len(by), total)
    return HermitianLmi(
        M, basis, tuple(lx + ly), (side,), {"X": (n, "hermitian"), "Y": (n, "hermitian")}
    )


def _require(ss: StateSpace):
    if not is_hurwitz(ss):
        raise Unstable("system is not Hurwitz")
    if ss.inputs != ss.outputs:
        raise DimensionMismatch("system must be square")


def bounded_real_lmi(ss: StateSpace, gamma: float) -> HermitianLmi:
    """``[[A'X+XA, XB, C'], [B'X, -g I, D'], [C, D, -g I]] < 0`` with ``X > 0``.

    X is real symmetric for real data and Hermitian otherwise.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    _require(ss)
    A, B, C, D = (np.asarray(M, dtype=complex) for M in (ss.A, ss.B, ss.C, ss.D))
    n, m, p = ss.n, ss.inputs, ss.outputs
    F0 = np.block([
        [np.zeros((n, n)), np.zeros((n, m)), C.conj().T],
        [np.zeros((m, n)), -gamma * np.eye(m), D.conj().T],
        [C, D, -gamma * np.eye(p)],
    ])
    mats, labels = hermitian_basis(n, "X", real=ss.is_real)
    basis = []
    for E in mats:
        Z = np.zeros((n + m + p, n + m + p), dtype=complex)
        Z[:n, :n] = A.conj().T @ E + E @ A
        Z[:n, n:n + m] = E @ B
        Z[n:n + m, :n] = B.conj().T @ E
        basis.append(Z)
    k = len(mats)
    side = (np.zeros((n, n)), np.array(mats).reshape(k, n, n))
    kind = "symmetric" if ss.is_real else "hermitian"
    return HermitianLmi(F0, np.array(basis).reshape(k, *F0.shape), tuple(labels), (side,) if n else (), {"X": (n, kind)})


def _kyp_block(ss: StateSpace, M, positive_x: bool):
    """KYP LMI for ``ss`` (state dimension n) with optional ``X > 0``."""
    lmi = assemble_kyp(ss.A, ss.B, M)
    n = ss.n
    if not positive_x or n == 0:
        return lmi
    mats, _ = hermitian_basis(n, "X")
    side = (np.zeros((n, n)), np.array(mats).reshape(-1, n, n))
    return HermitianLmi(lmi.constant, lmi.basis, lmi.labels, (side,), lmi.shapes)


def _rotation_supply(ss: StateSpace, c: complex):
    """M with ``v^* M v = -(c G + conj(c) G^*)`` along the KYP frequency vector."""
    C = np.asarray(ss.C, dtype=complex)
    D = np.asarray(ss.D, dtype=complex)
    n, m = ss.n, ss.inputs
    return np.block([
        [np.zeros((n, n)), -np.conj(c) * C.conj().T],
        [-c * C, -c * D - np.conj(c) * D.conj().T],
    ]).reshape(n + m, n + m)


def sectored_real_lmi(ss: StateSpace, alpha: float) -> HermitianLmi:
    """The LMI characterizing H-infinity phase below ``alpha`` in (0, pi/2], with X > 0."""
    if not 0 < alpha <= np.pi / 2:
        raise AlphaOutOfRange(f"alpha={alpha} is outside (0, pi/2]")
    _require(ss)
    M = _rotation_supply(ss, np.exp(1j * (np.pi / 2 - alpha)))
    return _kyp_block(ss, M, positive_x=True)


def half_cramped_lmi(ss: StateSpace, alpha: float) -> tuple[HermitianLmi, HermitianLmi]:
    """The two positive-frequency LMIs (M and N variants) for alpha in (pi/2, pi]."""
    if not np.pi / 2 < alpha <= np.pi:
        raise AlphaOutOfRange(f"alpha={alpha} is outside (pi/2, pi]")
    _require(ss)
    e = np.exp(1j * (alpha - np.pi / 2))
    return (
        assemble_gkyp(ss.A, ss.B, _rotation_supply(ss, e), POSITIVE_FREQUENCIES),
        assemble_gkyp(ss.A, ss.B, _rotation_supply(ss, np.conj(e)), POSITIVE_FREQUENCIES),
    )


def realify(lmi: HermitianLmi) -> HermitianLmi:
    """Embed every Hermitian ``P + jQ`` as the real symmetric ``[[P, -Q], [Q, P]]``."""

    def emb(M):
        M = np.asarray(M)
        P, Q = M.real, M.imag
        return np.block([[P, -Q], [Q, P]])

    def emb_all(Bs):
        return np.array([emb(B) for B in Bs]).reshape(len(Bs), *(2 * np.array(Bs.shape[1:])))

    side = tuple((emb(S0), emb_all(np.asarray(Sb).reshape(-1, *np.shape(S0)))) for S0, Sb in lmi.side_constraints)
    return HermitianLmi(emb(lmi.constant), emb_all(lmi.basis), lmi.labels, side, lmi.shapes)


# -- feasibility -----------------------------------------------------------------------


def _slacks(lmi: HermitianLmi, x) -> tuple[float, float]:
    """(-lambda_max of the main block, min lambda_min over side blocks)."""
    main = -np.linalg.eigvalsh(_herm(lmi.evaluate(x)))[-1]
    side = min((np.linalg.eigvalsh(_herm(S))[0] for S in lmi.side_values(x)), default=np.inf)
    return float(main), float(side)


def verify_certificate(lmi: HermitianLmi, certificate, eps_feas: float | None = None) -> bool:
    """Independent eigenvalue check at half the feasibility margin.

    ``certificate`` is either the scalar vector or a dict of decision matrices.
    """
    x = lmi.pack(certificate) if isinstance(certificate, dict) else np.asarray(certificate, float).ravel()
    if x.size != lmi.num_vars:
        raise DimensionMismatch(f"expected {lmi.num_vars} variables, got {x.size}")
    eps = (EPS_FEAS if eps_feas is None else eps_feas) * lmi.data_norm()
    main, side = _slacks(lmi, x)
    return main > eps / 2 and side > eps / 2


def _vec(M):
    # cvxopt stores symmetric matrix blocks column-major
    return np.asarray(M, float).T.ravel()


def solve_feasibility(lmi: HermitianLmi, eps_feas: float = EPS_FEAS, budget: int = 100) -> SdpResult:
    """Minimize t with ``F(x) <= t I`` and ``S(x) >= -t I`` on the real embedding."""
    if eps_feas <= 0:
        raise ValueError("eps_feas must be positive")
    scale = lmi.data_norm()
    eps = eps_feas * scale
    k = lmi.num_vars
    if k == 0:
        main, side = _slacks(lmi, np.empty(0))
        ok = main > eps and side > eps
        return SdpResult("feasible" if ok else "infeasible_budget", {}, min(main, side), 0, np.empty(0))

    real = realify(lmi)
    Gs, hs = [], []
    for F0, Fb, sign in real.blocks():
        F0 = F0 / scale
        Fb = Fb / scale
        N = F0.shape[0]
        # sign -1:  t I - F(x) >= 0 ;  sign +1:  S(x) + t I >= 0
        cols = [-sign * _vec(B) for B in Fb] + [-_vec(np.eye(N))]
        Gs.append(cvx_matrix(np.column_stack(cols)))
        hs.append(sign * F0)
    # box |x_i| <= BOX keeps the problem bounded; t >= -1 avoids a runaway objective
    Gl = np.zeros((2 * k + 1, k + 1))
    Gl[:k, :k] = np.eye(k)
    Gl[k:2 * k, :k] = -np.eye(k)
    Gl[2 * k, k] = -1.0
    hl = np.concatenate([np.full(2 * k, BOX), [1.0]])
    c = np.zeros(k + 1)
    c[k] = 1.0
    try:
        sol = solvers.sdp(
            cvx_matrix(c), Gl=cvx_matrix(Gl), hl=cvx_matrix(hl), Gs=Gs, hs=[cvx_matrix(h) for h in hs],
            options={"show_progress": False, "maxiters": int(budget)},
        )
        x = np.array(sol["x"]).ravel()[:k] if sol["x"] is not None else np.zeros(k)
        iters = int(sol.get("iterations", 0) or 0)
    except (ValueError, ArithmeticError):
        x, iters = np.zeros(k), int(budget)
    main, side = _slacks(lmi, x)
    slack = min(main, side)
    ok = main > eps and side > eps and verify_certificate(lmi, x, eps_feas)
    return SdpResult("feasible" if ok else "infeasible_budget", lmi.unpack(x) if lmi.labels else {}, slack, iters, x)


# -- convenience drivers and sweep counterparts -----------------------------------------


def sectored_lmi_test(ss: StateSpace, alpha: float, eps_feas: float = EPS_FEAS) -> dict:
    """Run the phase-bound LMI(s) for ``alpha``; reports which variant certified."""
    if alpha <= np.pi / 2:
        res = solve_feasibility(sectored_real_lmi(ss, alpha), eps_feas)
        return {"feasible": res.feasible, "variant": "sectored" if res.feasible else None, "results": {"sectored": res}}
    lm, ln = half_cramped_lmi(ss, alpha)
    results = {"M": solve_feasibility(lm, eps_feas), "N": solve_feasibility(ln, eps_feas)}
    variant = next((v for v, r in results.items() if r.feasible), None)
    return {"feasible": variant is not None, "variant": variant, "results": results}


def _rotated_margin(ss: StateSpace, c: complex, omegas) -> float:
    G = freq_response_many(ss, omegas)
    H = c * G + np.conj(c) * np.conj(np.swapaxes(G, 1, 2))
    D = np.asarray(ss.D)
    lim = np.linalg.eigvalsh(c * D + np.conj(c) * D.conj().T)[0]
    return float(min(np.linalg.eigvalsh(H)[:, 0].min(), lim))


def sectored_sweep_test(ss: StateSpace, alpha: float, omegas=None) -> dict:
    """Frequency-sweep counterpart of ``sectored_lmi_test``.

    For alpha <= pi/2 this checks that ``exp(j(pi/2 - alpha)) G`` is strongly
    positive real over both signs of frequency and the D-limit; above pi/2 it
    checks the two one-sided rotated inequalities over nonnegative frequency.
    """
    from .response import default_grid

    w = default_grid(ss).frequencies if omegas is None else np.asarray(omegas, float)
    if alpha <= np.pi / 2:
        both = np.concatenate([w, -w[w > 0]])
        margin = _rotated_margin(ss, np.exp(1j * (np.pi / 2 - alpha)), both)
        return {"feasible": margin > 0, "variant": "sectored" if margin > 0 else None, "margins": {"sectored": margin}}
    e = np.exp(1j * (alpha - np.pi / 2))
    margins = {"M": _rotated_margin(ss, e, w), "N": _rotated_margin(ss, np.conj(e), w)}
    variant = next((v for v, mg in margins.items() if mg > 0), None)
    return {"feasible": variant is not None, "variant": variant, "margins": margins}


def kyp_sweep_margin(A, B, M, omegas) -> float:
    """max over omega of ``lambda_max(v^* M v)`` with ``v = [(jwI - A)^{-1} B; I]``
    (including omega = infinity); negative means the frequency inequality holds."""
    A, B, M = _check_ab(A, B, M)
    n, m = B.shape
    worst = np.linalg.eigvalsh(M[n:, n:])[-1] if m else -np.inf
    for w in np.asarray(omegas, float):
        X = np.linalg.solve(1j * w * np.eye(n) - A, B) if n else np.zeros((0, m))
        V = np.vstack([X, np.eye(m)])
        worst = max(worst, np.linalg.eigvalsh(_herm(V.conj().T @ M @ V))[-1])
    return float(worst)
