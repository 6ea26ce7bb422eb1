"""Command line surface.

Subcommands: run, plan, report, transfer-matrix, verify-threshold.
Exit codes: 0 success or certified, 2 certification failed, 1
operational error (bad config, unreadable files, infeasible plan, ...).
"""

import argparse
import sys
from typing import Optional, Sequence

from .errors import CertificationError, ConfigError, Perc3dError
from .runner import load_config, report, run_experiment
from .stats import decimal_str, plan
from .upsilon import (
    REFERENCE_M6,
    TYPE_ORDER,
    TransferMatrix,
    reconcile_reference,
    transfer_matrix,
    verify_threshold,
)


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 is reserved for
    # certification failures here, so route usage errors through the
    # normal operational-error path instead.
    def error(self, message):
        raise ConfigError(message)


def _render_matrix(M: TransferMatrix) -> str:
    names = [t.value for t in TYPE_ORDER]
    width = max(len(str(e)) for row in M.entries for e in row)
    width = max(width, max(len(n) for n in names))
    head = " " * 12 + "  ".join(n.rjust(width) for n in names)
    lines = [f"transfer matrix, k = {M.k}", f"convention: {M.convention}", head]
    for name, row in zip(names, M.entries):
        lines.append(name.ljust(12) + "  ".join(str(e).rjust(width) for e in row))
    lines.append("row sums: " + ", ".join(str(s) for s in M.row_sums()))
    if M.elapsed_s:
        lines.append(f"elapsed: {M.elapsed_s:.2f}s")
    return "\n".join(lines)


def _build_parser() -> _Parser:
    parser = _Parser(prog="perc3d",
                     description="Rigorous Monte-Carlo bounds for cubic-lattice "
                                 "percolation thresholds")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run (or resume) a configured experiment")
    p_run.add_argument("config", help="flat key=value config file")
    p_run.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: PERC3D_WORKERS or CPU count)")

    p_plan = sub.add_parser("plan", help="compute the certifiable success threshold")
    p_plan.add_argument("--direction", required=True, choices=("lower", "upper"))
    p_plan.add_argument("--trials", required=True, type=int)
    p_plan.add_argument("--alpha", required=True,
                        help="confidence level, e.g. 0.999999")
    p_plan.add_argument("--p0", default=None,
                        help="certification probability (default: registry constant)")

    p_rep = sub.add_parser("report", help="assemble a verdict from two record files")
    p_rep.add_argument("--lower", required=True, help="lower-mode record file")
    p_rep.add_argument("--upper", required=True, help="upper-mode record file")
    p_rep.add_argument("--alpha", required=True)

    p_tm = sub.add_parser("transfer-matrix",
                          help="enumerate the minimal-path transfer matrix")
    p_tm.add_argument("--k", type=int, default=6, help="path steps (default 6)")
    p_tm.add_argument("--full", action="store_true",
                      help="enumerate all 54 starts instead of symmetry classes")
    p_tm.add_argument("--reconcile", action="store_true",
                      help="compare enumerations against the reference matrix "
                           "and print the reconciliation report")

    p_vt = sub.add_parser("verify-threshold",
                          help="exact-arithmetic certificate for the 3/100 bound")
    p_vt.add_argument("--source", choices=("reference", "enumerated"),
                      default="reference",
                      help="matrix to certify (default: reference)")
    p_vt.add_argument("--k", type=int, default=6,
                      help="steps for --source enumerated (must be 6)")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    result = run_experiment(cfg, workers=args.workers)
    print(result.render())
    return 0


def _cmd_plan(args) -> int:
    pl = plan(args.direction, args.trials, args.alpha, args.p0)
    print(pl.render())
    return 0


def _cmd_report(args) -> int:
    rep = report(args.lower, args.upper, args.alpha)
    print(rep.render())
    ok = rep.verdict.lower_passed and rep.verdict.upper_passed
    return 0 if ok else 2


def _cmd_transfer_matrix(args) -> int:
    if args.reconcile:
        print(reconcile_reference().render())
        return 0
    M = transfer_matrix(args.k, use_symmetry=not args.full)
    print(_render_matrix(M))
    return 0


def _cmd_verify_threshold(args) -> int:
    if args.source == "enumerated":
        M = transfer_matrix(args.k)
    else:
        M = REFERENCE_M6
    cert = verify_threshold(M)
    print(cert.render())
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "run": _cmd_run,
            "plan": _cmd_plan,
            "report": _cmd_report,
            "transfer-matrix": _cmd_transfer_matrix,
            "verify-threshold": _cmd_verify_threshold,
        }[args.command]
        return handler(args)
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return 2
    except Perc3dError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
