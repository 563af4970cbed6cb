"""Command-line interface.

Every subcommand prints one JSON object on stdout.  Decision commands exit 0
for true/feasible and 1 for false/infeasible; any error exits 2.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import channels as ch
from . import fileio
from .entropy import conditional_entropy, hmin, hmin_up, parse_kind, reduction_criterion
from .errors import CondentError, RankObstruction
from .majorize import EPS_MAJ, cond_majorizes, majorizes
from .sdp import EPS_FEAS
from .verify import VerifyConfig, run_verification_suite

MODES = {"lb": "locally_balanced", "cu": "conditionally_unital"}


def _clean(obj):
    """Make an object JSON-safe: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def _emit(obj) -> None:
    sys.stdout.write(fileio.dumps(_clean(obj)))


def _matrix(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, complex)]


def _cmd_entropy(args) -> int:
    rho = fileio.read_state(args.state)
    kind = parse_kind(args.kind, args.alpha)
    val = conditional_entropy(kind, rho)
    _emit({"kind": kind.tag, "alpha": kind.alpha, "value": val.value, "support_warning": val.support_warning})
    return 0


def _cmd_hmin(args) -> int:
    val = hmin(fileio.read_state(args.state))
    _emit({"value": val.value, "support_warning": val.support_warning})
    return 0


def _cmd_hmin_up(args) -> int:
    val, sigma = hmin_up(fileio.read_state(args.state), return_state=True)
    _emit({"value": val.value, "sigma_b": _matrix(sigma)})
    return 0


def _cmd_reduction(args) -> int:
    _, low = reduction_criterion(fileio.read_state(args.state))
    tol = args.tol if args.tol is not None else 1e-9
    holds = low >= -tol
    _emit({"holds": holds, "min_eigenvalue": low})
    return 0 if holds else 1


def _cmd_majorize(args) -> int:
    v = majorizes(fileio.read_state(args.source), fileio.read_state(args.target),
                  args.tol if args.tol is not None else EPS_MAJ)
    _emit({"holds": v.holds, "margin": v.margin})
    return 0 if v.holds else 1


def _cmd_cond_majorize(args) -> int:
    rho = fileio.read_state(args.source)
    sigma = fileio.read_state(args.target)
    mode = MODES[args.mode]
    try:
        v = cond_majorizes(rho, sigma, mode, args.tol if args.tol is not None else EPS_FEAS)
    except RankObstruction as exc:
        _emit({"feasible": False, "mode": mode, "margin": None, "reason": "rank_obstruction", "message": str(exc)})
        return 1
    out = {"feasible": v.holds, "mode": mode, "margin": v.margin}
    if v.witness is not None:
        out["witness_dims"] = list(v.witness.dims)
    _emit(out)
    return 0 if v.holds else 1


def _cmd_channel_check(args) -> int:
    path = args.channel or args.state
    if path is None:
        raise CondentError("channel-check needs --channel <path>")
    n = fileio.read_channel(path)
    tol = args.tol if args.tol is not None else ch.EPS_PROP
    rep = ch.check_properties(n, tol)
    _emit({
        "dims": list(n.dims),
        "cptp": rep.cptp,
        "unital": rep.unital,
        "conditionally_unital": rep.conditionally_unital,
        "semi_causal": rep.semi_causal,
        "locally_balanced": rep.locally_balanced,
        "residuals": rep.residuals,
    })
    return 0 if rep.locally_balanced else 1


def _cmd_verify(args) -> int:
    cfg = VerifyConfig.quick() if args.quick else VerifyConfig()
    sizes = [int(k) for k in args.sizes.split(",")] if args.sizes else None
    rep = run_verification_suite(args.seed, sizes, cfg)
    out = rep.to_dict()
    _emit(out)
    return 0 if rep.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="condent", description="Conditional entropies and conditional majorization.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="JSON output (the default and only format)")
        sp.add_argument("--tol", type=float, default=None,
                        help="decision threshold override; affects verdicts only")
        return sp

    sp = common(sub.add_parser("entropy", help="conditional entropy H(A|B)"))
    sp.add_argument("--state", required=True)
    sp.add_argument("--kind", default="umegaki", choices=["umegaki", "petz", "sandwiched", "max"])
    sp.add_argument("--alpha", type=float, default=None)
    sp.set_defaults(func=_cmd_entropy)

    sp = common(sub.add_parser("hmin", help="conditional min-entropy relative to rho_B"))
    sp.add_argument("--state", required=True)
    sp.set_defaults(func=_cmd_hmin)

    sp = common(sub.add_parser("hmin-up", help="min-entropy optimized over sigma_B (SDP)"))
    sp.add_argument("--state", required=True)
    sp.set_defaults(func=_cmd_hmin_up)

    sp = common(sub.add_parser("reduction", help="reduction criterion I (x) rho_B >= rho_AB"))
    sp.add_argument("--state", required=True)
    sp.set_defaults(func=_cmd_reduction)

    sp = common(sub.add_parser("majorize", help="spectral majorization of unconditional states"))
    sp.add_argument("--from", dest="source", required=True)
    sp.add_argument("--to", dest="target", required=True)
    sp.set_defaults(func=_cmd_majorize)

    sp = common(sub.add_parser("cond-majorize", help="conditional majorization with respect to A"))
    sp.add_argument("--from", dest="source", required=True)
    sp.add_argument("--to", dest="target", required=True)
    sp.add_argument("--mode", choices=sorted(MODES), default="lb")
    sp.set_defaults(func=_cmd_cond_majorize)

    sp = common(sub.add_parser("channel-check", help="classify a channel given as a Choi file"))
    sp.add_argument("--channel", default=None)
    sp.add_argument("--state", default=None, help="alias for --channel")
    sp.set_defaults(func=_cmd_channel_check)

    sp = common(sub.add_parser("verify", help="run the numerical verification suite"))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sizes", default=None, help="comma-separated k values for the maximally entangled checks")
    sp.add_argument("--quick", action="store_true", help="reduced sample counts")
    sp.set_defaults(func=_cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (CondentError, ValueError, OSError) as exc:
        sys.stderr.write(f"condent {args.command}: {type(exc).__name__}: {exc}\n")
        return 2


def run_command(argv) -> int:
    return main(list(argv))


if __name__ == "__main__":
    sys.exit(main())
