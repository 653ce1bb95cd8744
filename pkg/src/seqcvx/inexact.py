"""Inexact sequential convex programming.

Each convex model is solved only until its approximate KKT residuals drop
below a tolerance ``eps_k`` from a schedule.  The starting point only has to
lie in ``X``.
"""

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InputError, NonconvergenceError
from .exact import attach_trace, default_kkt_stop, make_record, validate_common
from .problem import check_point, constraint_values, is_feasible
from .subproblem import InnerOptions, linearize, solve_inexact, subproblem_residuals
from .trace import SolverTrace

log = logging.getLogger(__name__)

SCHEDULES = ("constant", "power", "geometric")


class ConvergenceRiskWarning(UserWarning):
    """A run shows a symptom the convergence theory rules out."""


@dataclass(frozen=True)
class EpsSchedule:
    """Inner tolerances ``eps_k`` for ``k = 0, 1, ...``.

    ``constant``: ``eps0``; ``power``: ``eps0 / (k + 1)^r``;
    ``geometric``: ``eps0 * rho^k``.
    """

    kind: str = "power"
    eps0: float = 1e-2
    r: float = 2.0
    rho: float = 0.5

    def __post_init__(self):
        if self.kind not in SCHEDULES:
            raise InputError(f"schedule must be one of {SCHEDULES}")
        if not self.eps0 > 0:
            raise InputError("eps0 must be positive")
        if self.kind == "power" and not self.r > 0:
            raise InputError("power schedule needs r > 0")
        if self.kind == "geometric" and not 0 < self.rho <= 1:
            raise InputError("geometric schedule needs 0 < rho <= 1")

    def __call__(self, k):
        if self.kind == "constant":
            return self.eps0
        if self.kind == "power":
            return self.eps0 / (k + 1) ** self.r
        return self.eps0 * self.rho**k

    @property
    def summable(self):
        return (self.kind == "power" and self.r > 1) or (self.kind == "geometric" and self.rho < 1)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class InexactOptions:
    """Schedule, caps and tolerances for the inexact method.

    ``require_summable`` rejects schedules whose tolerances do not sum to
    a finite value.  ``tol_floor`` bounds the effective inner tolerance
    from below.  ``multiplier_cap`` aborts the run when multipliers grow
    past it.
    """

    eps_schedule: EpsSchedule = field(default_factory=EpsSchedule)
    require_summable: bool = True
    tol_floor: float = 0.0
    max_outer: int = 500
    kkt_tol: float = 1e-6
    tol_inner: float = 1e-9
    step_tol: float = 1e-12
    multiplier_cap: float = 1e8
    feas_tol: float = 1e-9
    inner: InnerOptions = field(default_factory=InnerOptions)

    def __post_init__(self):
        if isinstance(self.inner, dict):
            self.inner = InnerOptions(**self.inner)
        if isinstance(self.eps_schedule, dict):
            self.eps_schedule = EpsSchedule.from_dict(self.eps_schedule)
        validate_common(self)
        if self.require_summable and not self.eps_schedule.summable:
            raise InputError("schedule is not summable; set require_summable to False to allow it")
        if self.tol_floor < 0:
            raise InputError("tol_floor must be nonnegative")

    def to_dict(self):
        return asdict(self)


def run_inexact(prob, x0, opts=None):
    """Run inexact SCP from ``x0 in X``.

    Each record carries ``eps_k``, the residuals of the subproblem solution
    re-evaluated independently (``stat_res``, ``feas_res``, ``comp_res``,
    plus the two-sided ``comp_abs``), the largest true constraint value at
    the next iterate (``next_max_g``) and the running multiplier-change sum
    ``dual_gap_partial``.

    Raises
    ------
    InputError
        ``x0`` outside ``X``.
    NonconvergenceError
        Propagated from a subproblem, or multipliers above the cap.
    """
    opts = opts or InexactOptions()
    x = check_point(prob, x0).copy()
    if not prob.X.membership(x, opts.feas_tol):
        raise InputError("the inexact method needs a starting point in X")
    trace = SolverTrace("inexact", prob.name, options=opts.to_dict())
    if prob.L_f <= 0:
        msg = "objective has zero curvature; raising it to the floor 1e-08"
        warnings.warn(msg, ConvergenceRiskWarning, stacklevel=2)
        trace.warnings.append(msg)
    if not is_feasible(prob, x, opts.feas_tol):
        msg = "starting point is infeasible; the first models may be empty"
        warnings.warn(msg, ConvergenceRiskWarning, stacklevel=2)
        trace.warnings.append(msg)
    warm = None
    lam_prev = None
    gap = 0.0
    for k in range(int(opts.max_outer) + 1):
        eps_k = opts.eps_schedule(k)
        try:
            sub = linearize(prob, x)
            sol = solve_inexact(sub, eps_k, opts.tol_floor, opts.inner, warm)
        except NonconvergenceError as err:
            raise attach_trace(err, trace)
        if sol.multipliers.size and np.max(sol.multipliers) > opts.multiplier_cap:
            raise attach_trace(NonconvergenceError(f"k={k}: multipliers exceed the cap"), trace)
        stat, feas, comp, comp_abs, _ = subproblem_residuals(sub, sol.y, sol.multipliers)
        if lam_prev is not None and prob.m:
            gap += float((sol.multipliers - lam_prev) @ constraint_values(prob, x))
        rec = make_record(
            prob, k, x, sol, sub,
            eps_k=eps_k, stat_res=stat, feas_res=feas, comp_res=comp, comp_abs=comp_abs,
            dual_gap_partial=gap,
        )
        trace.records.append(rec)
        log.debug("inexact k=%d F=%.12g eps=%.3g step=%.3g", k, rec.F, eps_k, rec.step)
        if default_kkt_stop(rec, opts.kkt_tol):
            trace.termination = "kkt_tol"
            break
        # A loose solve may return y = x without x being stationary, so a
        # zero step only counts once the tolerance is as tight as exact solves.
        if rec.step <= opts.step_tol and max(eps_k, opts.tol_floor) <= opts.tol_inner:
            trace.termination = "step_tol"
            break
        if k == opts.max_outer:
            trace.termination = "max_outer"
            break
        cons_next = constraint_values(prob, sol.y)
        rec.extra["next_max_g"] = float(np.max(cons_next)) if prob.m else -math.inf
        x, warm, lam_prev = sol.y, sol.multipliers, sol.multipliers
    return trace


def dual_gap_monitor(trace, window=50):
    """Final multiplier-change partial sum of an inexact trace.

    The sum adds ``(lam^{k+1} - lam^k) . c(x^{k+1})`` over iterations,
    ``c`` being the true constraint values.  A :class:`ConvergenceRiskWarning`
    is issued when the sum grew at every one of the last ``window``
    iterations.
    """
    if not trace.records:
        return 0.0
    sums = [r.extra.get("dual_gap_partial", 0.0) for r in trace.records]
    tail = np.diff(sums[-(window + 1):])
    if len(sums) > window and np.all(tail > 0):
        msg = f"multiplier-change sum grew over the last {window} iterations"
        warnings.warn(msg, ConvergenceRiskWarning, stacklevel=2)
        if msg not in trace.warnings:
            trace.warnings.append(msg)
    return float(sums[-1])
