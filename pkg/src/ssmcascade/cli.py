"""Command-line interface.

Exit codes: 0 success, 1 numerical or verification failure, 2 usage or file
error (message on stderr).
"""

from __future__ import annotations

import argparse
import sys as _sys
from pathlib import Path

import numpy as np

from . import cascade, oracles
from .bench import random_input, run_bench
from .io import (
    METHODS,
    FormatError,
    export_csv,
    load_model,
    read_csv_matrix,
    read_matrix,
    save_model,
    write_matrix,
)
from .linalg import ContractError, NumericalError, SignalBlock
from .lti import ContinuousLTI, default_io, discretize, hippo_matrix
from .plr import plr_build, plr_power_build
from .verify import run_checks

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path) -> np.ndarray | SignalBlock:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file: {p}")
    if p.suffix.lower() == ".csv":
        return read_csv_matrix(p)
    return read_matrix(p)


def _load_matrix(path) -> np.ndarray:
    a = _load(path)
    return a.data if isinstance(a, SignalBlock) else a


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _plan_for(args, sys):
    if getattr(args, "stages", None):
        return cascade.plan_stages(sys, args.stages)
    return cascade.plan(sys, args.tol, getattr(args, "max_stages", cascade.DEFAULT_MAX_STAGES),
                        criterion=getattr(args, "criterion", "spectral"))


def cmd_hippo(args) -> int:
    write_matrix(args.out, hippo_matrix(args.m))
    print(f"wrote {args.m}x{args.m} HiPPO matrix to {args.out}")
    return EXIT_OK


def cmd_signal(args) -> int:
    write_matrix(args.out, random_input(args.seed, args.p, args.L))
    print(f"wrote {args.p}x{args.L} signal block to {args.out}")
    return EXIT_OK


def cmd_discretize(args) -> int:
    if not (args.model or (args.out_a and args.out_b)):
        raise UsageError("give --out-a and --out-b, or --model DIR")
    A = _load_matrix(args.a)
    m = A.shape[0]
    B, C, D = default_io(m)
    if args.b:
        B = _load_matrix(args.b)
    if args.c:
        C = _load_matrix(args.c)
    if args.d:
        D = _load_matrix(args.d)
    elif args.b or args.c:
        D = np.zeros((C.shape[0], B.shape[1]))
    dsys = discretize(ContinuousLTI(A, B, C, D), args.delta, args.scheme)
    if args.out_a:
        write_matrix(args.out_a, dsys.Abar)
    if args.out_b:
        write_matrix(args.out_b, dsys.Bbar)
    if args.model:
        save_model(args.model, dsys)
    diag = [float(x) for x in np.diag(dsys.Abar)]
    print(f"scheme={dsys.scheme} delta={dsys.delta!r} m={dsys.m}")
    print(f"diag_first={diag[0]!r} diag_last={diag[-1]!r}")
    print(f"diag_max={max(diag)!r} diag_min={min(diag)!r}")
    print(f"spectral_radius={dsys.spectral_radius!r} stable={dsys.stable}")
    return EXIT_OK


def cmd_plan(args) -> int:
    sys = load_model(args.model)
    p = _plan_for(args, sys)
    marker = " (heuristic)" if p.heuristic else ""
    print(f"stages={p.stages}")
    print(f"degree={p.degree}")
    print(f"gamma={p.gamma!r}")
    print(f"rho={p.rho!r}")
    bnd = "n/a (gamma >= 1)" if np.isnan(p.bound) else repr(p.bound)
    print(f"bound={bnd}")
    print(f"heuristic_tail={p.heuristic_tail!r}")
    print(f"criterion={p.criterion}{marker} value={p.criterion_value!r}")
    return EXIT_OK


def cmd_apply(args) -> int:
    sys = load_model(args.model)
    u = _load(args.input)
    if not isinstance(u, SignalBlock):
        u = SignalBlock(u)
    if args.method == "recurrence":
        y = oracles.recurrence_apply(sys, u)
        print(f"method=recurrence L={u.length} matvec_count={u.length}")
    elif args.method == "conv":
        y = oracles.conv_apply(oracles.kernel_materialize(sys, u.length), u)
        print(f"method=conv L={u.length}")
    else:
        p = _plan_for(args, sys)
        ops = None
        if args.method == "cascade-plr":
            ops = plr_power_build(sys, p.stages, args.plr_eps, powers=p.powers)
        y, stats = cascade.apply(p, sys, u, operators=ops)
        print(f"method={args.method} L={u.length} stages={stats.stage_count} "
              f"effective_stages={stats.effective_stages} matvec_count={stats.matvec_count} "
              f"flops={stats.flops} wall_ns={stats.wall_ns}")
    write_matrix(args.out, y)
    return EXIT_OK


def cmd_freq(args) -> int:
    sys = load_model(args.model)
    p = cascade.plan_stages(sys, args.stages)
    err, bnd = cascade.frequency_check(p, sys, args.grid)
    marker = " (heuristic)" if p.gamma >= 1.0 else ""
    print(f"stages={p.stages} grid={args.grid}")
    print(f"max_error={err!r}")
    print(f"bound={bnd!r}{marker}")
    return EXIT_OK if p.gamma >= 1.0 or err <= bnd else EXIT_NUMERIC


def cmd_plr(args) -> int:
    a = _load_matrix(args.a)
    plr = plr_build(a, args.eps, args.leaf)
    dense_err = float(np.linalg.norm(plr.to_dense() - a, 2))
    print(f"size={plr.size} leaf={plr.leaf_size} depth={plr.depth} eps={plr.eps!r}")
    print(f"max_offdiag_rank={plr.max_offdiag_rank}")
    print("ranks=" + ",".join(str(r) for r in plr.offdiag_ranks))
    print(f"flops={plr.flops_per_matvec} dense_flops={2 * plr.size * plr.size}")
    print(f"reconstruction_error={dense_err!r}")
    return EXIT_OK


def cmd_bench(args) -> int:
    sys = load_model(args.model)
    rows = run_bench(sys, args.L, args.methods, reps=args.reps, seed=args.seed, tol=args.tol,
                     stages=args.stages, plr_eps=args.plr_eps,
                     is_deterministic=args.deterministic)
    export_csv(rows, args.csv)
    for r in rows:
        err = "" if r.rel_l2_err is None else f" rel_l2_err={r.rel_l2_err:.3e}"
        print(f"{r.method:<12} L={r.L:<8} matvec_count={r.matvec_count:<10} wall_ns={r.wall_ns}{err}")
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_checks(seed=args.seed, tol=args.tol, is_deterministic=args.deterministic)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssmcascade", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hippo", help="write the HiPPO state matrix")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hippo)

    p = sub.add_parser("signal", help="write a seeded random input block")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_signal)

    p = sub.add_parser("discretize", help="discretize a continuous system")
    p.add_argument("--a", required=True)
    p.add_argument("--b", help="input matrix (default: ones, m x 1)")
    p.add_argument("--c", help="output matrix (default: ones / m, 1 x m)")
    p.add_argument("--d", help="feedthrough (default: zeros)")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--scheme", choices=("bilinear", "exponential"), default="bilinear")
    p.add_argument("--out-a")
    p.add_argument("--out-b")
    p.add_argument("--model", help="also write a full model directory")
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("plan", help="choose the stage count for a tolerance")
    p.add_argument("--model", required=True)
    p.add_argument("--tol", type=float, required=True)
    p.add_argument("--max-stages", type=int, default=cascade.DEFAULT_MAX_STAGES)
    p.add_argument("--criterion", choices=cascade.CRITERIA, default="spectral")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("apply", help="apply the transfer function to an input block")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=METHODS, default="cascade")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tol", type=float, default=1e-12)
    g.add_argument("--stages", type=int)
    p.add_argument("--criterion", choices=cascade.CRITERIA, default="spectral")
    p.add_argument("--plr-eps", type=float, default=1e-10)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("freq", help="compare H and its truncation on the unit circle")
    p.add_argument("--model", required=True)
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--grid", type=int, default=512)
    p.set_defaults(func=cmd_freq)

    p = sub.add_parser("plr", help="compress a matrix to PLR form and report ranks")
    p.add_argument("--a", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--leaf", type=int, default=16)
    p.set_defaults(func=cmd_plr)

    p = sub.add_parser("bench", help="time methods and write a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--L", type=_int_list, required=True)
    p.add_argument("--methods", type=lambda s: [x.strip() for x in s.split(",") if x.strip()],
                   default=list(METHODS))
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--csv", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--stages", type=int)
    p.add_argument("--plr-eps", type=float, default=1e-10)
    p.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=False)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="run cross-method consistency checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, IsADirectoryError, PermissionError, FormatError,
            ContractError, UsageError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=_sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    _sys.exit(main())
