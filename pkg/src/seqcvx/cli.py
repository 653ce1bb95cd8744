"""Command-line entry point: ``seqcvx solve|certify|compare|list-instances``."""

import argparse
import json
import os
import sys

from .descriptors import load_point, load_problem
from .errors import InputError, NonconvergenceError
from .harness import ExperimentConfig, compare_methods, configure_logging, run_experiment
from .instances import bundled_instances, get_instance
from .kkt import kkt_residual


def _parser():
    ap = argparse.ArgumentParser(prog="seqcvx", description="Sequential convex programming solvers.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run one experiment config")
    s.add_argument("--config", required=True, help="experiment config JSON")
    s.add_argument("--method", choices=("exact", "variant", "inexact"), help="override the method")
    s.add_argument("--out", help="override the output directory")

    c = sub.add_parser("certify", help="KKT residual of a point")
    c.add_argument("--problem", required=True, help="problem JSON or bundled instance name")
    c.add_argument("--point", required=True, help='point JSON: {"x": [...], "multipliers": [...]}')

    m = sub.add_parser("compare", help="run several configs on one problem")
    m.add_argument("--configs", nargs="+", required=True)

    sub.add_parser("list-instances", help="show the bundled instances")
    return ap


def _summary_text(summary):
    out = {k: v for k, v in summary.items() if k != "trace"}
    return json.dumps(out, indent=1)


def _certify(args):
    try:
        prob = get_instance(args.problem).problem()
    except InputError:
        prob = load_problem(args.problem)
    x, lam = load_point(args.point)
    res = kkt_residual(prob, x, lam)
    return {
        "stationarity": res.stationarity,
        "feasibility": res.feasibility,
        "complementarity": res.complementarity,
        "set_gap": res.set_gap,
        "active": list(res.active),
        "violation": res.violation,
    }


def main(argv=None):
    configure_logging()
    args = _parser().parse_args(argv)
    try:
        if args.command == "solve":
            cfg = ExperimentConfig.from_json(args.config)
            if args.method:
                cfg.method = args.method
            if args.out:
                cfg.output_dir = os.path.abspath(args.out)
            print(_summary_text(run_experiment(cfg)))
        elif args.command == "certify":
            print(json.dumps(_certify(args), indent=1))
        elif args.command == "compare":
            report = compare_methods(ExperimentConfig.from_json(p) for p in args.configs)
            print(report.to_table())
        else:
            for e in bundled_instances():
                print(f"{e.name:16s} {e.description}")
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except NonconvergenceError as err:
        print(f"nonconvergence: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
