"""Exact sequential convex programming.

At every iterate the smooth parts are linearised with a quadratic term
at their global Lipschitz constants, the subtracted convex parts are
linearised with subgradients, and the convex model is solved tightly.
Starting from a feasible point, every iterate stays feasible and the
objective never increases.
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InputError, NonconvergenceError
from .kkt import kkt_residual
from .problem import check_point, evaluate_objective, is_feasible, max_constraint
from .subproblem import InnerOptions, linearize, solve_exact
from .trace import IterationRecord, SolverTrace

log = logging.getLogger(__name__)


@dataclass
class ExactOptions:
    """Stopping rules and inner accuracy.

    The run stops at the first of: KKT violation ``<= kkt_tol``, step
    ``||x^{k+1} - x^k|| <= step_tol``, or ``max_outer`` iterations.
    """

    max_outer: int = 500
    kkt_tol: float = 1e-8
    tol_inner: float = 1e-9
    step_tol: float = 1e-12
    feas_tol: float = 1e-9
    inner: InnerOptions = field(default_factory=InnerOptions)

    def __post_init__(self):
        if isinstance(self.inner, dict):
            self.inner = InnerOptions(**self.inner)
        validate_common(self)

    def to_dict(self):
        return asdict(self)


def validate_common(opts):
    if not opts.kkt_tol > 0 or not opts.tol_inner > 0:
        raise InputError("kkt_tol and tol_inner must be positive")
    if opts.step_tol < 0:
        raise InputError("step_tol must be nonnegative")
    if int(opts.max_outer) < 0:
        raise InputError("max_outer must be nonnegative")


def default_kkt_stop(record, kkt_tol):
    """True iff ``max(stat, feas^+, |comp|) <= kkt_tol``."""
    return record.kkt_violation <= kkt_tol


def make_record(prob, k, x, sol, sub, **extra):
    """Record for iterate ``x`` given the subproblem solved there."""
    kkt = kkt_residual(prob, x, sol.multipliers)
    return IterationRecord(
        k=k,
        x=x.copy(),
        F=evaluate_objective(prob, x),
        max_g=max_constraint(prob, x),
        stat=kkt.stationarity,
        feas=kkt.feasibility,
        comp=kkt.complementarity,
        step=float(np.linalg.norm(sol.y - x)),
        multipliers=sol.multipliers.copy(),
        inner_iters=sol.inner_iterations,
        l_f=sub.l_f,
        l_g=sub.l_g.copy(),
        model_value=sol.model_value,
        extra=extra,
    )


def attach_trace(err, trace):
    trace.termination = "error"
    trace.error = str(err)
    err.trace = trace
    return err


def run_exact(prob, x0, opts=None):
    """Run exact SCP from a feasible ``x0``.

    Returns
    -------
    SolverTrace
        One record per visited iterate.  ``trace.violations`` lists any
        iteration where feasibility, monotone descent or the majorisation
        sandwich failed beyond its slack (empty on well-posed instances).

    Raises
    ------
    InputError
        ``x0`` infeasible.
    NonconvergenceError
        Propagated from a subproblem, with the partial trace in ``.trace``.
    """
    opts = opts or ExactOptions()
    x = check_point(prob, x0).copy()
    if not is_feasible(prob, x, opts.feas_tol):
        raise InputError("exact SCP needs a feasible starting point")
    trace = SolverTrace("exact", prob.name, options=opts.to_dict())
    if prob.L_f < 1e-8:
        trace.warnings.append("objective curvature raised to the floor 1e-08")
    slack = 10 * opts.tol_inner
    warm = None
    for k in range(int(opts.max_outer) + 1):
        try:
            sub = linearize(prob, x)
            sol = solve_exact(sub, opts.tol_inner, opts.inner, warm)
        except NonconvergenceError as err:
            raise attach_trace(err, trace)
        rec = make_record(prob, k, x, sol, sub)
        trace.records.append(rec)
        log.debug("exact k=%d F=%.12g kkt=%.3g step=%.3g", k, rec.F, rec.kkt_violation, rec.step)
        if default_kkt_stop(rec, opts.kkt_tol):
            trace.termination = "kkt_tol"
            break
        if rec.step <= opts.step_tol:
            trace.termination = "step_tol"
            break
        if k == opts.max_outer:
            trace.termination = "max_outer"
            break
        y = sol.y
        F_next = evaluate_objective(prob, y)
        if not is_feasible(prob, y, 1e-7):
            trace.violations.append(f"k={k}: iterate infeasible")
        if F_next > rec.F + slack:
            trace.violations.append(f"k={k}: objective increased by {F_next - rec.F:.3g}")
        if F_next > sol.model_value + slack or sol.model_value > rec.F + slack:
            trace.violations.append(f"k={k}: majorisation sandwich failed")
        x, warm = y, sol.multipliers
    return trace
