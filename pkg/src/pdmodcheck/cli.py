"""Command line interface: ``pdmodcheck check --system FILE --formula STR``."""
from __future__ import annotations

import argparse
import json
import sys

from . import logic as L
from .checker import MODEL, MODULE, check, oracle_module_check
from .errors import CheckError
from .system_model import load_pms

EXIT_SAT = 0
EXIT_UNSAT = 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pdmodcheck",
                                 description="Module checking of pushdown multi-agent systems")
    sub = ap.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", help="check formulas against a system file")
    c.add_argument("--system", required=True, help="system description file")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--formula", help="formula text")
    src.add_argument("--formula-file", help="file with one formula per line")
    c.add_argument("--mode", choices=[MODULE, MODEL], default=MODULE)
    c.add_argument("--oracle-depth", type=int, default=None,
                   help="also run the explicit pruning oracle up to this depth")
    c.add_argument("--budget", type=int, default=64,
                   help="state budget for path automata of ATL* formulas")
    c.add_argument("--max-positions", type=int, default=400_000,
                   help="size cap for the emptiness game")
    c.add_argument("--dump-acg", action="store_true")
    c.add_argument("--dump-npta", action="store_true")
    c.add_argument("--dump-dpw", action="store_true")
    c.add_argument("--stats", metavar="OUT.json", help="write per-formula statistics")
    return ap


def _run(args, out) -> int:
    pms = load_pms(args.system)
    if args.formula is not None:
        formulas = [L.parse_formula(args.formula, pms.agents, pms.props)]
    else:
        with open(args.formula_file, encoding="utf-8") as fh:
            formulas = L.parse_formula_file(fh.read(), pms.agents, pms.props)
    dump = tuple(name for name, flag in (("acg", args.dump_acg), ("npta", args.dump_npta),
                                         ("dpw", args.dump_dpw)) if flag)
    records = []
    code = EXIT_SAT
    for phi in formulas:
        v = check(pms, phi, args.mode, budget=args.budget,
                  max_positions=args.max_positions, dump=dump)
        rel = "|=r" if args.mode == MODULE else "|="
        word = "holds" if v.satisfied else "fails"
        print(f"{word}: G {rel} {L.pretty(phi)}", file=out)
        for name in dump:
            print(v.dumps[name], file=out)
        rec = {"formula": L.pretty(phi), "satisfied": v.satisfied, "stats": v.stats,
               "certificate": v.certificate}
        if args.oracle_depth is not None:
            o = oracle_module_check(pms if args.mode == MODULE else pms.as_closed(),
                                    phi, args.oracle_depth)
            rec["oracle"] = {"satisfied": o.satisfied, "negation_satisfied": o.negation_satisfied,
                             "prunings": o.prunings}
            agree = "agrees" if o.satisfied == v.satisfied else "DISAGREES"
            print(f"  oracle (depth {args.oracle_depth}, {o.prunings} prunings): "
                  f"{o.satisfied} [{agree}]", file=out)
        records.append(rec)
        if not v.satisfied:
            code = EXIT_UNSAT
    if args.stats:
        with open(args.stats, "w", encoding="utf-8") as fh:
            json.dump({"system": args.system, "mode": args.mode, "results": records},
                      fh, indent=2, default=str)
    return code


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return _run(args, out)
    except CheckError as e:
        stage = f" [{e.stage}]" if e.stage else ""
        print(f"error{stage}: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
