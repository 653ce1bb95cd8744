"""Experiment configuration, persistence and method comparison."""

import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .descriptors import load_problem
from .errors import InputError, NonconvergenceError
from .exact import ExactOptions, run_exact
from .inexact import InexactOptions, run_inexact
from .instances import get_instance
from .trace import atomic_write
from .variant import VariantOptions, run_variant

log = logging.getLogger(__name__)

METHODS = {
    "exact": (ExactOptions, run_exact),
    "variant": (VariantOptions, run_variant),
    "inexact": (InexactOptions, run_inexact),
}
LOG_ENV = "SEQCVX_LOG_LEVEL"


def configure_logging():
    """Set the package log level from ``SEQCVX_LOG_LEVEL`` (default WARNING)."""
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


class ConfigError(InputError):
    """Invalid experiment configuration; ``issues`` lists every problem found."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("invalid experiment config: " + "; ".join(self.issues))


@dataclass
class ExperimentConfig:
    """One solver run.

    ``problem`` is a bundled instance name, an inline descriptor, or a path
    to a descriptor file (relative paths resolve against ``base_dir``).
    ``x0`` defaults to the instance's start or the descriptor's ``x0``.
    ``seed`` regenerates randomised bundled instances.
    """

    problem: object
    method: str = "exact"
    options: dict = field(default_factory=dict)
    x0: list = None
    seed: int = None
    output_dir: str = None
    name: str = None
    base_dir: str = "."

    @classmethod
    def from_dict(cls, d, base_dir="."):
        known = set(cls.__dataclass_fields__) - {"base_dir"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError([f"unknown config fields {sorted(unknown)}"])
        if "problem" not in d:
            raise ConfigError(["config needs a 'problem'"])
        return cls(**d, base_dir=base_dir)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            d = json.load(fh)
        return cls.from_dict(d, base_dir=os.path.dirname(os.path.abspath(path)))

    def to_dict(self):
        d = asdict(self)
        d.pop("base_dir")
        return d

    def problem_key(self):
        """Canonical text identifying the problem this config solves."""
        prob = self.problem
        if isinstance(prob, str) and not _is_instance_name(prob):
            prob = os.path.abspath(os.path.join(self.base_dir, prob))
        return json.dumps({"problem": prob, "seed": self.seed}, sort_keys=True)

    def build_options(self):
        try:
            cls, _ = METHODS[self.method]
        except KeyError:
            raise ConfigError([f"method must be one of {sorted(METHODS)}"]) from None
        try:
            return cls(**(self.options or {}))
        except TypeError as err:
            raise ConfigError([f"bad options for {self.method}: {err}"]) from None
        except InputError as err:
            raise ConfigError([f"bad options for {self.method}: {err}"]) from None

    def resolve(self):
        """``(problem, x0)`` after validating everything that can be checked up front."""
        issues = []
        try:
            self.build_options()
        except ConfigError as err:
            issues += err.issues
        prob = x0 = None
        try:
            prob, x0 = self._problem_and_start()
        except (InputError, OSError, KeyError, ValueError) as err:
            issues.append(f"problem: {err}")
        if prob is not None and x0 is not None and np.shape(x0) != (prob.dim,):
            issues.append(f"x0 has shape {np.shape(x0)}, expected ({prob.dim},)")
        if issues:
            raise ConfigError(issues)
        return prob, x0

    def _problem_and_start(self):
        src = self.problem
        if isinstance(src, str) and _is_instance_name(src):
            entry = get_instance(src)
            prob = entry.problem(self.seed)
            x0 = entry.start(prob) if self.x0 is None else np.asarray(self.x0, dtype=float)
            return prob, x0
        if isinstance(src, str):
            path = os.path.join(self.base_dir, src)
            if not os.path.exists(path):
                raise InputError(f"file {path} does not exist")
            with open(path) as fh:
                desc = json.load(fh)
            name = os.path.splitext(os.path.basename(path))[0]
        elif isinstance(src, dict):
            desc, name = src, None
        else:
            raise InputError("problem must be an instance name, a path or an object")
        prob = load_problem(desc, name)
        start = self.x0 if self.x0 is not None else desc.get("x0")
        if start is None:
            raise InputError("no x0 given in the config or the problem descriptor")
        return prob, np.asarray(start, dtype=float)


def _is_instance_name(s):
    try:
        get_instance(s)
        return True
    except InputError:
        return False


def run_experiment(cfg):
    """Run one config; write traces when ``cfg.output_dir`` is set.

    Returns
    -------
    dict
        Summary with the final objective, residuals, iteration counts,
        wall time, and the paths written.  Only the summary carries wall
        time, so trace files are reproducible byte for byte.
    """
    prob, x0 = cfg.resolve()
    opts = cfg.build_options()
    _, runner = METHODS[cfg.method]
    stem = cfg.name or f"{prob.name}_{cfg.method}"
    t0 = time.perf_counter()
    error = None
    try:
        trace = runner(prob, x0, opts)
    except NonconvergenceError as err:
        if err.trace is None:
            raise
        trace, error = err.trace, err
    wall = time.perf_counter() - t0
    final = trace.final
    summary = {
        "name": stem,
        "method": cfg.method,
        "problem": prob.name,
        "termination": trace.termination,
        "outer_iterations": trace.outer_iterations,
        "total_inner_iterations": trace.total_inner,
        "final_F": None if final is None else final.F,
        "final_residual": None if final is None else {
            "stationarity": final.stat, "feasibility": final.feas, "complementarity": final.comp,
        },
        "x_final": None if final is None else final.x.tolist(),
        "rejections": len(trace.rejections),
        "warnings": trace.warnings,
        "violations": trace.violations,
        "error": trace.error,
        "wall_time": wall,
        "files": {},
    }
    if cfg.output_dir:
        out = os.path.join(cfg.base_dir, cfg.output_dir)
        files = {"csv": os.path.join(out, stem + ".csv"), "json": os.path.join(out, stem + ".json")}
        trace.write_csv(files["csv"])
        trace.write_json(files["json"])
        if cfg.method == "variant":
            files["rejections"] = os.path.join(out, stem + "_rejections.csv")
            trace.write_rejections(files["rejections"])
        if error is not None:
            files["diagnostics"] = os.path.join(out, stem + "_diagnostics.json")
            error.dump(files["diagnostics"])
        files["summary"] = os.path.join(out, stem + "_summary.json")
        summary["files"] = files
        atomic_write(files["summary"], json.dumps(summary, indent=1))
    summary["trace"] = trace
    if error is not None:
        raise error
    return summary


@dataclass
class ComparisonReport:
    rows: list
    summaries: list

    def to_table(self):
        head = ("method", "outer", "inner", "final_F", "final_residual")
        lines = ["  ".join(f"{h:>14}" for h in head)]
        for r in self.rows:
            lines.append("  ".join([
                f"{r['method']:>14}", f"{r['outer']:>14d}", f"{r['inner']:>14d}",
                f"{r['final_F']:>14.8g}", f"{r['final_residual']:>14.3e}",
            ]))
        return "\n".join(lines)


def compare_methods(cfgs):
    """Run configs that share one problem and tabulate their outcomes.

    Raises
    ------
    InputError
        The configs refer to different problems (or the list is empty).
    """
    cfgs = list(cfgs)
    if not cfgs:
        raise InputError("no configs to compare")
    keys = {c.problem_key() for c in cfgs}
    if len(keys) != 1:
        raise InputError("all configs must share one problem")
    summaries = [run_experiment(c) for c in cfgs]
    rows = []
    for s in summaries:
        fin = s["trace"].final
        rows.append({
            "method": s["method"],
            "outer": s["outer_iterations"],
            "inner": s["total_inner_iterations"],
            "final_F": s["final_F"],
            "final_residual": fin.kkt_violation,
        })
    return ComparisonReport(rows, summaries)
