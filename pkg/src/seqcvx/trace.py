"""Per-iteration records and their CSV/JSON serialisation."""

import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

BASE_COLUMNS = ("k", "F", "max_g", "stat", "feas", "comp", "step", "inner_iters")
INEXACT_COLUMNS = ("eps_k", "stat_res", "feas_res", "comp_res", "dual_gap_partial")
REJECTION_COLUMNS = ("k", "trial", "l_f", "l_g", "reason")
TERMINATIONS = ("kkt_tol", "step_tol", "max_outer", "error")


def _num(v):
    """Shortest round-trip text for a number."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(t) for t in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(t) for t in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(t) for k, t in v.items()}
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class IterationRecord:
    """State at outer iteration ``k``.

    ``stat``/``feas``/``comp`` are the KKT residuals at ``x`` with the
    multipliers of the subproblem solved at ``x``; ``step`` is
    ``||x^{k+1} - x^k||`` for that subproblem's solution; ``trials`` counts
    the curvature trials (always 1 outside the variant method).
    """

    k: int
    x: np.ndarray
    F: float
    max_g: float
    stat: float
    feas: float
    comp: float
    step: float
    multipliers: np.ndarray
    inner_iters: int
    l_f: float
    l_g: np.ndarray
    model_value: float = math.nan
    trials: int = 1
    extra: dict = field(default_factory=dict)

    @property
    def kkt_violation(self):
        return max(self.stat, max(self.feas, 0.0), abs(self.comp))

    def to_dict(self):
        out = {
            "k": self.k, "x": self.x, "F": self.F, "max_g": self.max_g, "stat": self.stat,
            "feas": self.feas, "comp": self.comp, "step": self.step,
            "multipliers": self.multipliers, "inner_iters": self.inner_iters, "l_f": self.l_f,
            "l_g": self.l_g, "model_value": self.model_value, "trials": self.trials,
        }
        out.update(self.extra)
        return _jsonable(out)


@dataclass
class Rejection:
    k: int
    trial: int
    l_f: float
    l_g: np.ndarray
    reason: str

    def to_dict(self):
        return _jsonable({"k": self.k, "trial": self.trial, "l_f": self.l_f, "l_g": self.l_g,
                          "reason": self.reason})


@dataclass
class SolverTrace:
    """Everything a driver produced, in iteration order."""

    method: str
    problem: str
    records: list = field(default_factory=list)
    termination: str = None
    rejections: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    options: dict = field(default_factory=dict)
    error: str = None

    @property
    def x_final(self):
        return self.records[-1].x if self.records else None

    @property
    def final(self):
        return self.records[-1] if self.records else None

    @property
    def outer_iterations(self):
        return len(self.records)

    @property
    def total_inner(self):
        return int(sum(r.inner_iters for r in self.records))

    @property
    def columns(self):
        return BASE_COLUMNS + (INEXACT_COLUMNS if self.method == "inexact" else ())

    def iterates(self):
        return np.array([r.x for r in self.records])

    def objective_values(self):
        return np.array([r.F for r in self.records])

    def to_csv(self):
        buf = io.StringIO()
        cols = self.columns
        buf.write(",".join(cols) + "\n")
        for r in self.records:
            row = []
            for c in cols:
                v = getattr(r, c) if c in BASE_COLUMNS else r.extra.get(c, math.nan)
                row.append(_num(v))
            buf.write(",".join(row) + "\n")
        return buf.getvalue()

    def rejections_csv(self):
        buf = io.StringIO()
        buf.write(",".join(REJECTION_COLUMNS) + "\n")
        for r in self.rejections:
            lg = ";".join(_num(v) for v in np.atleast_1d(r.l_g))
            buf.write(f"{r.k},{r.trial},{_num(r.l_f)},{lg},{r.reason}\n")
        return buf.getvalue()

    def to_dict(self):
        return {
            "method": self.method, "problem": self.problem, "termination": self.termination,
            "error": self.error, "options": _jsonable(self.options),
            "warnings": list(self.warnings), "violations": list(self.violations),
            "records": [r.to_dict() for r in self.records],
            "rejections": [r.to_dict() for r in self.rejections],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1)

    def write_csv(self, path):
        atomic_write(path, self.to_csv())

    def write_json(self, path):
        atomic_write(path, self.to_json())

    def write_rejections(self, path):
        atomic_write(path, self.rejections_csv())

    @classmethod
    def from_dict(cls, d):
        base = {f for f in IterationRecord.__dataclass_fields__ if f != "extra"}
        recs = []
        for r in d["records"]:
            kw = {k: r[k] for k in base if k in r}
            kw["x"] = np.array(kw["x"], dtype=float)
            kw["multipliers"] = np.array(kw["multipliers"], dtype=float)
            kw["l_g"] = np.array(kw["l_g"], dtype=float)
            recs.append(IterationRecord(**kw, extra={k: v for k, v in r.items() if k not in base}))
        rej = [Rejection(**r) for r in d.get("rejections", [])]
        return cls(d["method"], d["problem"], recs, d.get("termination"), rej,
                   d.get("warnings", []), d.get("violations", []), d.get("options", {}),
                   d.get("error"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    @classmethod
    def read_json(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())
