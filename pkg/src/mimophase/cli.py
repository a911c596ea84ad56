"""Command-line entry point.

Machine output (JSON reports, CSV tables) always uses radians and goes to
``--out`` or stdout; a one-line human summary goes to stderr, in degrees when
``--degrees`` is given.

Exit codes: 0 success/certified/feasible, 1 not certified/infeasible,
2 bad input, ill-posed or not applicable, 3 not cramped, 4 unstable,
5 LMI and sweep disagree.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import feedback, lmikit, response
from .errors import IllPosed, MimoPhaseError, NotCramped, TransferSyntaxError, Unstable
from .matphase import crampedness, matrix_from_json, matrix_phases, numerical_range_boundary, singular_values
from .sslti import StateSpace, is_hurwitz, minimal_realization, realization_fidelity, realize
from .tfparse import parse_transfer_matrix

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_NOT_CRAMPED, EXIT_UNSTABLE, EXIT_DISAGREE = range(6)

# LMI/sweep disagreements inside this band around the phase bound are not reported
BOUNDARY_BAND = 0.02


class _Fail(Exception):
    def __init__(self, code, message, report=None):
        super().__init__(message)
        self.code = code
        self.report = report


def _write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str):
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _config(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _angle(args, rad: float) -> str:
    return f"{np.degrees(rad):.4f} deg" if args.degrees else f"{rad:.6f} rad"


def _say(msg: str):
    print(msg, file=sys.stderr)


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise _Fail(EXIT_INPUT, f"cannot read {path}: {exc}") from None


def load_system(path: str) -> StateSpace:
    """A state-space JSON file, or transfer-matrix text (realized minimally)."""
    text = _read(path)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        obj = None
    try:
        if isinstance(obj, dict):
            return StateSpace.from_json(obj)
        return minimal_realization(realize(parse_transfer_matrix(text)))
    except TransferSyntaxError as exc:
        raise _Fail(EXIT_INPUT, f"{path}: {exc}") from None
    except (MimoPhaseError, ValueError, KeyError, TypeError) as exc:
        raise _Fail(EXIT_INPUT, f"{path}: {exc}") from None


# -- commands --------------------------------------------------------------------


def cmd_phase(args) -> int:
    try:
        C = matrix_from_json(json.loads(_read(args.matrix)))
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise _Fail(EXIT_INPUT, f"{args.matrix}: {exc}") from None
    info = crampedness(C)
    sv = singular_values(C).tolist()
    if not info.cramped:
        hull = numerical_range_boundary(C, 360)
        report = {
            "config": _config(args),
            "cramped": False,
            "singular_values": sv,
            "hull": {"vertices": len(hull.vertices), "radius": hull.radius, "contains_origin": True},
        }
        raise _Fail(EXIT_NOT_CRAMPED, "matrix is not cramped (0 lies in its numerical range)", report)
    ph = matrix_phases(C)
    report = {
        "config": _config(args),
        "cramped": True,
        "distance_to_origin": info.distance_to_origin,
        "field_angle": info.field_angle,
        "mid_angle": info.mid_angle,
        "phases": ph.values.tolist(),
        "singular_values": sv,
    }
    _emit(args, _json(report))
    _say(f"cramped; phases in [{_angle(args, ph.min)}, {_angle(args, ph.max)}]")
    return EXIT_OK


def _grid(args, ss):
    lo = 0.0 if args.omega_min is None else args.omega_min
    hi = args.omega_max
    return response.adaptive_grid(ss, lo, hi, args.points, args.tol)


def cmd_bode(args) -> int:
    ss = load_system(args.system)
    if not is_hurwitz(ss):
        raise _Fail(EXIT_UNSTABLE, "system is not Hurwitz")
    samples = response.bode_data(ss, _grid(args, ss))
    _emit(args, response.bode_csv(samples))
    defined = [s.phases for s in samples if s.phases is not None]
    if defined:
        lo = min(p.min for p in defined)
        hi = max(p.max for p in defined)
        _say(f"{len(samples)} frequencies; phase span [{_angle(args, lo)}, {_angle(args, hi)}]")
    else:
        _say(f"{len(samples)} frequencies; no phases defined")
    return EXIT_OK


def cmd_certify(args) -> int:
    G = load_system(args.plant)
    H = load_system(args.controller)
    try:
        if args.method == "eigenvalue":
            stable = feedback.closed_loop_stable(G, H)
            cl = feedback.gang_of_four(minimal_realization(G), minimal_realization(H))
            margin = float(-np.max(cl.poles().real)) if cl.n else float("inf")
            cert = feedback.Certificate(
                "eigenvalue", feedback.CERTIFIED if stable else feedback.NOT_CERTIFIED, margin, float("nan")
            )
        else:
            fn = feedback.small_gain_certify if args.method == "small_gain" else feedback.small_phase_certify
            cert = fn(G, H)
    except IllPosed:
        cert = feedback.Certificate(args.method, feedback.ILL_POSED, float("nan"), float("nan"))
    except Unstable as exc:
        raise _Fail(EXIT_UNSTABLE, str(exc)) from None
    except NotCramped as exc:
        report = {"config": _config(args), "method": args.method, "verdict": "not_applicable",
                  "reason": str(exc), "frequency": exc.frequency}
        raise _Fail(EXIT_INPUT, str(exc), report) from None
    report = cert.to_json()
    if report["margin"] is not None and not np.isfinite(report["margin"]):
        report["margin"] = "inf"
    report["config"] = _config(args)
    _emit(args, _json(report))
    code = {feedback.CERTIFIED: EXIT_OK, feedback.NOT_CERTIFIED: EXIT_NO}.get(cert.verdict, EXIT_INPUT)
    _say(f"{args.method}: {cert.verdict}")
    return code


def _lmi_part(ss, alpha):
    out = lmikit.sectored_lmi_test(ss, alpha)
    return {
        "feasible": out["feasible"],
        "variant": out["variant"],
        "results": {k: {"status": r.status, "min_slack": r.min_slack, "iterations": r.iterations}
                    for k, r in out["results"].items()},
    }


def _sweep_part(ss, alpha):
    """Sweep verdict on the phase bound, plus the raw rotated-inequality test."""
    grid = response.default_grid(ss)
    raw = lmikit.sectored_sweep_test(ss, alpha, grid.frequencies)
    try:
        phi = response.hinf_phase(ss, grid)
    except NotCramped:
        phi = None
    if alpha <= np.pi / 2:
        # the lemma quantifies over omega = infinity too, so D must have phases
        verdict = phi is not None and phi < alpha and response.limit_phases(ss) is not None
        half = None
    else:
        half, _ = response.is_half_cramped(ss, grid)
        verdict = bool(half and phi is not None and phi < alpha)
    return {
        "feasible": bool(verdict),
        "hinf_phase": phi,
        "half_cramped": half,
        "rotated_inequality": {"feasible": raw["feasible"], "variant": raw["variant"], "margins": raw["margins"]},
        "grid": grid.describe(),
    }


def cmd_sectored(args) -> int:
    alpha = args.alpha
    if not 0 < alpha <= np.pi:
        raise _Fail(EXIT_INPUT, "alpha must lie in (0, pi]")
    ss = load_system(args.system)
    if not is_hurwitz(ss):
        raise _Fail(EXIT_UNSTABLE, "system is not Hurwitz")
    report = {"config": _config(args), "alpha": alpha}
    if args.method in ("lmi", "both"):
        report["lmi"] = _lmi_part(ss, alpha)
    if args.method in ("sweep", "both"):
        report["sweep"] = _sweep_part(ss, alpha)
    code = EXIT_OK
    if args.method == "both":
        agree = report["lmi"]["feasible"] == report["sweep"]["feasible"]
        phi = report["sweep"]["hinf_phase"]
        in_band = phi is not None and abs(phi - alpha) < BOUNDARY_BAND
        report["agree"] = agree
        report["within_boundary_band"] = in_band
        if not agree and not in_band:
            code = EXIT_DISAGREE
    feasible = report.get("lmi", report.get("sweep"))["feasible"]
    _emit(args, _json(report))
    _say(f"alpha={_angle(args, alpha)}: {'feasible' if feasible else 'infeasible'}")
    if code == EXIT_OK and not feasible:
        code = EXIT_NO
    return code


def cmd_realize(args) -> int:
    text = _read(args.tf_file)
    try:
        tfm = parse_transfer_matrix(text)
    except TransferSyntaxError as exc:
        raise _Fail(EXIT_INPUT, f"{args.tf_file}: {exc}") from None
    except MimoPhaseError as exc:
        raise _Fail(EXIT_INPUT, f"{args.tf_file}: {exc}") from None
    full = realize(tfm)
    ss = minimal_realization(full)
    report = {
        "config": _config(args),
        "system": ss.to_json(),
        "order": ss.n,
        "initial_order": full.n,
        "fidelity": realization_fidelity(tfm, ss),
    }
    _emit(args, _json(report))
    _say(f"order {ss.n} (from {full.n}); fidelity {report['fidelity']:.3g}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mimophase", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report here (atomically) instead of stdout")
    common.add_argument("--degrees", action="store_true", help="degrees in the human summary only")
    common.add_argument("--seed", type=int, default=0, help="recorded in the report for reproducibility")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("phase", parents=[common], help="phases of a complex matrix (JSON re/im)")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_phase)

    s = sub.add_parser("bode", parents=[common], help="magnitude/phase table as CSV")
    s.add_argument("system")
    s.add_argument("--omega-min", type=float, default=None)
    s.add_argument("--omega-max", type=float, default=None)
    s.add_argument("--points", type=int, default=200, help="base grid size")
    s.add_argument("--tol", type=float, default=0.05, help="phase refinement tolerance (rad)")
    s.set_defaults(func=cmd_bode)

    s = sub.add_parser("certify", parents=[common], help="feedback stability certificate")
    s.add_argument("plant")
    s.add_argument("controller")
    s.add_argument("--method", choices=["small_gain", "small_phase", "eigenvalue"], default="small_phase")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("sectored", parents=[common], help="phase-bound test by LMI and/or sweep")
    s.add_argument("system")
    s.add_argument("--alpha", type=float, required=True, help="phase bound in radians, (0, pi]")
    s.add_argument("--method", choices=["lmi", "sweep", "both"], default="both")
    s.set_defaults(func=cmd_sectored)

    s = sub.add_parser("realize", parents=[common], help="minimal state-space realization")
    s.add_argument("tf_file")
    s.set_defaults(func=cmd_realize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "omega_max", None) is not None and args.omega_max <= (args.omega_min or 0.0):
        parser.error("--omega-max must exceed --omega-min")
    try:
        return args.func(args)
    except _Fail as exc:
        if exc.report is not None:
            _emit(args, _json(exc.report))
        _say(f"error: {exc}")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
