"""Command-line front end.

Reports are JSON objects with a top-level "ok"; sweeps write CSV. Exit codes:
0 success, 1 invalid arguments, 2 an internal check failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import kraus
from .gates import PAULI_X, PolState, dist_up_to_global_phase
from .interferometer import CycleConfig
from .phase_unit import MODES, PhaseUnitConfig, run_phase_unit, send_dit, survival_surface
from .protocol import BobProgram, compile_unitary, run_protocol, zyz_angles
from .remote_circuit import verification_table
from .ry_direct import RyDirectConfig, run_ry_direct, run_ry_direct_arbitrary

EXIT_OK, EXIT_VALIDATION, EXIT_INVARIANT = 0, 1, 2
SWEEP_HEADER = ("M", "N", "k", "survival")


class InvariantError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def cplx(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def state_json(st: PolState) -> dict:
    return {"H": cplx(st.amp_h), "V": cplx(st.amp_v)}


def parse_range(text: str) -> list[int]:
    """'5:40:5' (inclusive), '5,10,20' or '7'."""
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(1)
        start, stop, step = parts
        if step <= 0:
            raise ValueError(f"bad range step in {text!r}")
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(",") if p]


def parse_matrix(vals: Sequence[float]) -> np.ndarray:
    if len(vals) != 8:
        raise ValueError("a 2x2 complex matrix needs 8 reals: re00 im00 re01 im01 re10 im10 re11 im11")
    z = [complex(vals[i], vals[i + 1]) for i in range(0, 8, 2)]
    return np.array(z, dtype=complex).reshape(2, 2)


def emit(report: dict, out: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_phase_unit(args) -> dict:
    cycle = CycleConfig(args.M, args.N, av_variant=args.av)
    cfg = PhaseUnitConfig(cycle, args.L, args.k, mode=args.mode)
    res = run_phase_unit(cfg)
    balance = res.survival_prob + res.ledger.total_lost_prob
    if abs(balance - 1) > 1e-12:
        raise InvariantError(f"probability not conserved: {balance!r}")
    return {
        "ok": True,
        "M": args.M,
        "N": args.N,
        "L": args.L,
        "k": args.k,
        "mode": args.mode,
        "survival": res.survival_prob,
        "exit_bin": res.exit_bin,
        "phase": cfg.phase,
        "out_state": state_json(res.out_state),
        "bob_tag_weight": res.out_state.tag_weight(),
    }


def sweep_path(out: str, k: int, many: bool) -> Path:
    if "{k}" in out:
        return Path(out.format(k=k))
    p = Path(out)
    return p.with_name(f"{p.stem}_k{k}{p.suffix}") if many else p


def cmd_sweep(args) -> dict:
    grid = [(m, n) for m in parse_range(args.M) for n in parse_range(args.N)]
    ks = parse_range(args.k)
    written = []
    for k in ks:
        rows = survival_surface(
            grid,
            k,
            args.L if args.L is not None else max(k, 1),
            check_runs_max=args.check_L,
            av_variant=args.av,
        )
        path = sweep_path(args.out, k, len(ks) > 1)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SWEEP_HEADER)
            for m, n, kk, s in rows:
                w.writerow((m, n, kk, repr(s)))
        written.append(str(path))
    return {"ok": True, "files": written, "points": len(grid)}


def cmd_decompose(args) -> dict:
    u = parse_matrix(args.u)
    prog = compile_unitary(u, args.L, equalize=args.equalize)
    alpha, beta, gamma, delta = zyz_angles(u)
    err = dist_up_to_global_phase(prog.unitary(), u)
    return {
        "ok": True,
        **prog.to_dict(),
        "angles": {"alpha": alpha, "beta": beta, "gamma": gamma, "delta": delta},
        "quantization_error": err,
    }


def load_program(text: str) -> BobProgram:
    p = Path(text)
    if p.exists():
        text = p.read_text()
    return BobProgram.from_json(text)


def cmd_run_unitary(args) -> dict:
    prog = load_program(args.program)
    if args.equalize:
        prog = BobProgram(prog.beta, prog.gamma, prog.delta, prog.resolution, equalize=True)
    vals = args.input
    if len(vals) != 4:
        raise ValueError("--input needs 4 reals: reH imH reV imV")
    state = PolState(complex(vals[0], vals[1]), complex(vals[2], vals[3]))
    res = run_protocol(state, prog, CycleConfig(args.M, args.N, av_variant=args.av))
    prod = math.prod(res.stage_survivals)
    if abs(prod - res.total_survival) > 1e-12:
        raise InvariantError("total survival is not the product of stage survivals")
    expected = state.normalized().apply(prog.unitary())
    return {
        "ok": True,
        "program": prog.to_dict(),
        "out_state": state_json(res.out_state),
        "total_survival": res.total_survival,
        "stage_survivals": res.stage_survivals,
        "stage_bins": res.stage_bins,
        "exit_bin_total": res.exit_bin_total,
        "bob_tag_weight": res.out_state.tag_weight(),
        "distance_to_program_unitary": dist_up_to_global_phase(
            res.out_state.vector, expected.vector
        ),
    }


def cmd_kraus_verify(args) -> dict:
    report = kraus.verify(args.M, args.N)
    if args.dump:
        a12_b, a12_nb = kraus.build_outer_channels(args.M, args.N)
        Path(args.dump).write_text(
            json.dumps({"A12_B": kraus.to_json(a12_b), "A12_NB": kraus.to_json(a12_nb)}, indent=2)
            + "\n"
        )
    return report


def cmd_ry_simple(args) -> dict:
    cfg = RyDirectConfig(CycleConfig(args.M, args.N), args.k)
    if args.input is None:
        out, p = run_ry_direct(cfg)
    else:
        vals = args.input
        if len(vals) != 4:
            raise ValueError("--input needs 4 reals: reH imH reV imV")
        out, p = run_ry_direct_arbitrary(PolState(complex(vals[0], vals[1]), complex(vals[2], vals[3])), cfg)
    return {
        "ok": True,
        "M": args.M,
        "N": args.N,
        "k": args.k,
        "angle": cfg.angle,
        "out_state": state_json(out),
        "success_prob": p,
        "bob_tag_weight": out.tag_weight(),
    }


def cmd_dit(args) -> dict:
    cfg = PhaseUnitConfig(CycleConfig(args.M, args.N), args.L, args.k, mode="dit")
    b = send_dit(cfg)
    return {"ok": b == args.k, "L": args.L, "k": args.k, "exit_bin": b}


def cmd_ccu(args) -> dict:
    u = PAULI_X if args.u is None else parse_matrix(args.u)
    rows = verification_table(u)
    worst = max(r["error"] for r in rows)
    table = [
        {
            "b1": r["b1"],
            "b2": r["b2"],
            "target": r["target"],
            "output": {"H": cplx(r["output"][0]), "V": cplx(r["output"][1])},
            "error": r["error"],
        }
        for r in rows
    ]
    if not args.json:
        for r in rows:
            o = r["output"]
            print(f"b1={r['b1']} b2={r['b2']} in=|{r['target']}>  out=({o[0]:.6f}, {o[1]:.6f})  err={r['error']:.1e}", file=sys.stderr)
    return {"ok": worst <= 1e-12, "max_error": worst, "table": table}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="exchange-free", description=__doc__.splitlines()[0])
    p.add_argument("--runs-descriptor", help="JSON file with {command, params, output}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def cycles(sp, m=20, n=20):
        sp.add_argument("--M", type=int, default=m, help="outer cycles")
        sp.add_argument("--N", type=int, default=n, help="inner cycles")

    sp = sub.add_parser("phase-unit", help="run one Phase Unit")
    cycles(sp)
    sp.add_argument("--L", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--mode", choices=MODES, default="phase")
    sp.add_argument("--av", action="store_true", help="doubled inner chain")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_phase_unit)

    sp = sub.add_parser("sweep", help="survival surface over an (M, N) grid, CSV")
    sp.add_argument("--M", default="5:40:5", help="range 'a:b:step' or list 'a,b,c'")
    sp.add_argument("--N", default="5:40:5")
    sp.add_argument("--k", default="1,5,10,20")
    sp.add_argument("--L", type=int, default=None, help="runs budget (default max(k, 1))")
    sp.add_argument("--check-L", type=int, default=None, help="second L for the independence check")
    sp.add_argument("--av", action="store_true")
    sp.add_argument("--out", required=True, help="CSV path; '{k}' or a _k<k> suffix for several k")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("decompose", help="compile a 2x2 unitary into a Bob program")
    sp.add_argument("--u", type=float, nargs=8, required=True, metavar="X")
    sp.add_argument("--L", type=int, required=True, help="resolution L'")
    sp.add_argument("--equalize", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("run-unitary", help="execute a Bob program on an input state")
    sp.add_argument("--program", required=True, help="program JSON text or file")
    sp.add_argument("--input", type=float, nargs=4, default=[1.0, 0.0, 0.0, 0.0], metavar="X")
    cycles(sp, 10, 10)
    sp.add_argument("--av", action="store_true")
    sp.add_argument("--equalize", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_run_unitary)

    sp = sub.add_parser("kraus-verify", help="check the channel construction")
    cycles(sp, 5, 5)
    sp.add_argument("--dump", help="write the outer channels' Kraus sets as JSON")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_kraus_verify)

    sp = sub.add_parser("ry-simple", help="single-run Ry preparation")
    cycles(sp, 10, 10)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--input", type=float, nargs=4, default=None, metavar="X")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_ry_simple)

    sp = sub.add_parser("dit", help="send a dit as an exit time bin")
    cycles(sp, 10, 10)
    sp.add_argument("--L", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_dit)

    sp = sub.add_parser("ccu", help="controlled-controlled-U truth table with classical controls")
    sp.add_argument("--u", type=float, nargs=8, default=None, metavar="X")
    sp.add_argument("--json", action="store_true", help="suppress the text table")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_ccu)
    return p


def descriptor_argv(path: str) -> list[str]:
    d = json.loads(Path(path).read_text())
    argv = [d["command"]]
    for key, val in d.get("params", {}).items():
        flag = "--" + key
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        elif isinstance(val, list):
            argv.append(flag)
            argv.extend(str(v) for v in val)
        else:
            argv.extend([flag, str(val)])
    if d.get("output"):
        argv.extend(["--out", d["output"]])
    return argv


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.runs_descriptor:
            args = parser.parse_args(descriptor_argv(args.runs_descriptor))
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    except (OSError, KeyError, ValueError) as exc:
        print(json.dumps({"ok": False, "error": str(exc)}))
        return EXIT_VALIDATION
    if not args.command:
        parser.print_help()
        return EXIT_VALIDATION
    try:
        report = args.func(args)
    except InvariantError as exc:
        print(json.dumps({"ok": False, "error": str(exc)}))
        return EXIT_INVARIANT
    except (ValueError, OSError) as exc:
        print(json.dumps({"ok": False, "error": str(exc)}))
        return EXIT_VALIDATION
    except ArithmeticError as exc:
        print(json.dumps({"ok": False, "error": str(exc)}))
        return EXIT_INVARIANT
    emit(report, getattr(args, "out", None) if args.command != "sweep" else None)
    return EXIT_OK if report.get("ok") else EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
