"""Command line front end: ``liarwalk {simulate,discrepancy,force-parity,game,bounds}``.

Exit codes: 0 success, 2 bad input, 3 resource cap hit, 4 internal invariant violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from fractions import Fraction

from .chipfield import (
    ChipConfiguration,
    format_configuration,
    liar_trajectory,
    parse_configurations,
    parse_inline,
    random_configuration,
)
from .discrepancy import REPORT_COLUMNS, IntervalSpec, PairedRun, report_row
from .errors import InvariantViolation, ResourceLimitError
from .liargame import (
    alternating_question,
    apply_question,
    solve_game,
    transcript,
)
from .numerics import BOUNDS_COLUMNS, bounds_row
from .parityforge import ParityGrid, adversarial_config, force_parity

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE, EXIT_INVARIANT = 0, 2, 3, 4


class InputError(ValueError):
    pass


def _read_text(path_or_inline: str) -> str | None:
    if os.path.exists(path_or_inline):
        with open(path_or_inline) as fh:
            return fh.read()
    return None


def load_configs(args) -> list[ChipConfiguration]:
    if args.config is not None:
        text = _read_text(args.config)
        if text is not None:
            return [cfg for _, cfg in parse_configurations(text)]
        return [parse_inline(args.config)]
    if args.random:
        rng = random.Random(args.seed)
        return [random_configuration(rng) for _ in range(args.random)]
    raise InputError("give --config <path|inline> or --random K")


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad fraction {text!r}") from None


def _write_csv(out, columns, rows):
    w = csv.DictWriter(out, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)


# ------------------------------------------------------------------ commands


def cmd_simulate(args, out):
    if args.steps is None or args.steps < 0:
        raise InputError("--steps must be a nonnegative integer")
    for f0 in load_configs(args):
        for t, f in enumerate(liar_trajectory(f0, args.steps, args.max_window)):
            out.write(format_configuration(f, t))


def _times(args) -> list[int]:
    if args.times:
        ts = sorted(set(_int_list(args.times)))
    elif args.steps is not None:
        ts = list(range(1, args.steps + 1))
    else:
        raise InputError("give --steps or --times")
    if not ts or ts[0] < 0:
        raise InputError("times must be nonnegative")
    return ts


def cmd_discrepancy(args, out):
    configs = load_configs(args)
    times = _times(args)
    interval = IntervalSpec.parse(args.interval) if args.interval else None
    multi = len(configs) > 1
    columns = (("config",) if multi else ()) + REPORT_COLUMNS
    rows = []
    for idx, f0 in enumerate(configs):
        run = PairedRun(f0)
        for t in times:
            run.advance_to(t)
            if interval is not None:
                r = run.interval(interval)
            elif args.B is not None:
                r = run.worst_interval(args.B)
            else:
                r = run.pointwise()
            row = report_row(r)
            if multi:
                row = {"config": idx, **row}
            rows.append(row)
    _write_csv(out, columns, rows)


def cmd_force_parity(args, out):
    if args.grid:
        text = _read_text(args.grid)
        if text is None:
            raise InputError(f"grid file {args.grid!r} not found")
        grid = ParityGrid.from_text(text)
        out.write(format_configuration(force_parity(grid)))
    elif args.adversarial is not None:
        if args.adversarial < 1:
            raise InputError("--adversarial needs T >= 1")
        target = IntervalSpec.parse(args.interval) if args.interval else args.target
        out.write(format_configuration(adversarial_config(args.adversarial, target)))
    else:
        raise InputError("give --grid <path> or --adversarial T")


def _x0(args) -> tuple:
    if args.x0 is not None:
        x0 = tuple(_int_list(args.x0))
    elif args.m is not None:
        x0 = (args.m,) + (0,) * (args.e or 0)
    else:
        raise InputError("give --x0 or --m")
    if not x0 or any(v < 0 for v in x0):
        raise InputError("state vector entries must be nonnegative")
    e = args.e if args.e is not None else len(x0) - 1
    if len(x0) > e + 1:
        raise InputError(f"--x0 has {len(x0)} entries but e = {e}")
    return x0 + (0,) * (e + 1 - len(x0))


def cmd_game(args, out, stdin=None):
    x0 = _x0(args)
    if args.n is None or args.n < 0:
        raise InputError("--n (rounds) must be a nonnegative integer")
    n = args.n
    if args.mode == "solve":
        sol = solve_game(x0, n, len(x0) - 1, max_nodes=args.max_nodes)
        out.write(json.dumps(sol.record()) + "\n")
    elif args.mode == "odd-run":
        for rec in transcript(x0, n):
            out.write(json.dumps(rec) + "\n")
    else:
        stdin = stdin or sys.stdin
        x = x0
        for r in range(1, n + 1):
            a = alternating_question(x)
            print(f"round {r}: state {list(x)}, question {list(a)}; answer yes/no:", file=sys.stderr)
            line = stdin.readline()
            if not line:
                raise InputError("input ended before the game did")
            try:
                x = apply_question(x, a, line.strip().lower())
            except ValueError as exc:
                raise InputError(str(exc)) from None
            out.write(json.dumps({"round": r, "question": list(a), "answer": line.strip().lower(), "state": list(x)}) + "\n")
        out.write(json.dumps({"paul_wins": sum(x) >= 1, "state": list(x)}) + "\n")


def cmd_bounds(args, out):
    if args.n is None and not args.n_list:
        raise InputError("give --n or --n-list")
    ns = _int_list(args.n_list) if args.n_list else [args.n]
    f = _fraction(args.f)
    cprime = _fraction(args.cprime)
    _write_csv(out, BOUNDS_COLUMNS, (bounds_row(n, f, cprime) for n in ns))


# ---------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liarwalk", description=__doc__.splitlines()[0])
    p.add_argument("--out", help="output file (default: stdout)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=argparse.SUPPRESS, help="output file (default: stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-window", type=int, default=None, help="cap on occupied window width")

    s = sub.add_parser("simulate", help="liar machine trajectory")
    common(s)
    s.add_argument("--config", help="configuration file or inline '0:1,2:11'")
    s.add_argument("--random", type=int, default=0, help="use K seeded random configurations")
    s.add_argument("--steps", type=int, required=True)

    d = sub.add_parser("discrepancy", help="liar minus linear discrepancy reports (CSV)")
    common(d)
    d.add_argument("--config")
    d.add_argument("--random", type=int, default=0)
    d.add_argument("--steps", type=int, help="report every t in 1..steps")
    d.add_argument("--times", help="comma-separated list of times")
    d.add_argument("--interval", help="fixed interval a:b")
    d.add_argument("--B", type=int, help="report the worst interval of length B")

    fp = sub.add_parser("force-parity", help="initial configuration realizing a parity grid")
    common(fp)
    fp.add_argument("--grid", help="grid file: header 'N T parity' then T rows over {0,1,.}")
    fp.add_argument("--adversarial", type=int, metavar="T", help="adversarial configuration for T steps")
    fp.add_argument("--target", type=int, default=0)
    fp.add_argument("--interval")

    g = sub.add_parser("game", help="pathological liar game")
    common(g)
    g.add_argument("mode", choices=("solve", "odd-run", "interactive"))
    g.add_argument("--x0", help="state vector, e.g. 1,11")
    g.add_argument("--m", type=int, help="M elements with no lies")
    g.add_argument("--n", type=int, help="rounds")
    g.add_argument("--e", type=int, help="maximum lies")
    g.add_argument("--max-nodes", type=int, default=1 << 22)

    b = sub.add_parser("bounds", help="threshold table (CSV)")
    common(b)
    b.add_argument("--n", type=int)
    b.add_argument("--n-list")
    b.add_argument("--f", default="1/4")
    b.add_argument("--cprime", default="1")
    return p


COMMANDS = {
    "simulate": cmd_simulate,
    "discrepancy": cmd_discrepancy,
    "force-parity": cmd_force_parity,
    "game": cmd_game,
    "bounds": cmd_bounds,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "max_window", None) is not None and args.max_window < 1:
        print("error: --max-window must be positive", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "max_nodes", 1) < 1:
        print("error: --max-nodes must be positive", file=sys.stderr)
        return EXIT_INPUT
    buf = io.StringIO()
    try:
        COMMANDS[args.command](args, buf)
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
