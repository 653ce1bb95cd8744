"""SCP with local curvature estimates and nonmonotone acceptance.

Each outer iteration starts from curvature guesses (spectral estimates or
constants) and retries the convex model with inflated curvatures until the
trial point is feasible and passes the window-max decrease test

    F(y) <= max_{[k-M]^+ <= i <= k} F(x^i) - c/2 ||y - x^k||^2.

With the default ``separate`` strategy an infeasible trial multiplies all
constraint curvatures by ``tau`` and an insufficient decrease multiplies
the objective curvature by ``tau``.
"""

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InputError, NonconvergenceError
from .exact import attach_trace, default_kkt_stop, make_record, validate_common
from .problem import check_point, constraint_values, evaluate_objective, is_feasible
from .subproblem import InnerOptions, linearize, solve_exact
from .trace import Rejection, SolverTrace

log = logging.getLogger(__name__)

STRATEGIES = ("separate", "simultaneous", "per_constraint")
INITS = ("bb", "constant")


@dataclass
class VariantOptions:
    """Parameters of the curvature-search method.

    ``init = "constant"`` starts every outer iteration from ``l_f0`` and
    ``l_g0`` (both default to ``L_min``; ``l_g0`` may be a scalar or one
    value per constraint, and zero is kept only for constraints with zero
    curvature).  ``init = "bb"`` uses spectral estimates from
    the previous step, clamped to ``[L_min, L_max]``.
    """

    c: float = 1e-4
    L_min: float = 1e-6
    L_max: float = 1e8
    tau: float = 2.0
    M: int = 3
    update_strategy: str = "separate"
    init: str = "bb"
    l_f0: float = None
    l_g0: object = None
    max_outer: int = 500
    kkt_tol: float = 1e-8
    tol_inner: float = 1e-9
    step_tol: float = 1e-12
    feas_tol: float = 1e-9
    max_trials: int = 200
    inner: InnerOptions = field(default_factory=InnerOptions)

    def __post_init__(self):
        if isinstance(self.inner, dict):
            self.inner = InnerOptions(**self.inner)
        validate_common(self)
        if not self.c > 0:
            raise InputError("c must be positive")
        if not 0 < self.L_min < self.L_max:
            raise InputError("need 0 < L_min < L_max")
        if not self.tau > 1:
            raise InputError("tau must exceed 1")
        if int(self.M) != self.M or self.M < 0:
            raise InputError("M must be a nonnegative integer")
        if self.update_strategy not in STRATEGIES:
            raise InputError(f"update_strategy must be one of {STRATEGIES}")
        if self.init not in INITS:
            raise InputError(f"init must be one of {INITS}")
        if self.l_f0 is not None and not self.l_f0 > 0:
            raise InputError("l_f0 must be positive")
        if self.l_g0 is not None and np.any(np.asarray(self.l_g0, dtype=float) < 0):
            raise InputError("l_g0 must be nonnegative")

    def to_dict(self):
        d = asdict(self)
        if isinstance(self.l_g0, np.ndarray):
            d["l_g0"] = self.l_g0.tolist()
        return d


def bb_estimate(dx, dgrad, L_min, L_max):
    """Spectral curvature ``dx.dgrad / ||dx||^2`` clamped to ``[L_min, L_max]``.

    Returns ``L_min`` when ``dx`` is zero.
    """
    dx = np.asarray(dx, dtype=float)
    nn = float(dx @ dx)
    if nn == 0.0:
        return float(L_min)
    return float(min(max(float(dx @ np.asarray(dgrad, dtype=float)) / nn, L_min), L_max))


def nonmonotone_reference(F_history, k, M):
    """``max(F_history[max(k - M, 0) : k + 1])``."""
    return float(max(F_history[max(k - M, 0): k + 1]))


def inner_iteration_bound(L_f, c, L_g_max, L_min, tau):
    """Closed-form cap on curvature trials per outer iteration.

    ``floor((ln(L_f + c) + ln(max L_g) - 2 ln(2 L_min)) / ln(tau) + 4)``.
    Returns None when there is no constraint curvature (the logarithm is
    undefined).
    """
    if not L_g_max > 0:
        return None
    val = (math.log(L_f + c) + math.log(L_g_max) - 2 * math.log(2 * L_min)) / math.log(tau) + 4
    return int(math.floor(val))


def _bumps(start, target, tau):
    """Multiplications by ``tau`` needed to lift ``start`` to ``target``."""
    if start >= target:
        return 0
    return int(math.ceil(math.log(target / start) / math.log(tau) - 1e-12))


def safe_trial_bound(L_f, L_g, c, l_f0, l_g0, tau, strategy):
    """Trials per outer iteration sufficient under each update strategy.

    Acceptance is guaranteed once ``l_f >= (L_f + c)/2`` (decrease) and
    ``l_gi >= L_gi`` (feasibility); this counts the bumps needed to get
    there from the initial values, plus the final accepted trial.
    """
    n_f = _bumps(l_f0, 0.5 * (L_f + c), tau)
    per_g = [_bumps(s, t, tau) for s, t in zip(np.atleast_1d(l_g0), np.atleast_1d(L_g)) if t > 0]
    if strategy == "per_constraint":
        n_g = sum(per_g)
    else:
        n_g = max(per_g, default=0)
    if strategy == "simultaneous":
        return max(n_f, n_g) + 1
    return n_f + n_g + 1


def _initial_curvatures(prob, opts, k, x, x_prev):
    m = prob.m
    if opts.init == "constant":
        l_f = opts.L_min if opts.l_f0 is None else float(opts.l_f0)
        if opts.l_g0 is None:
            return l_f, np.full(m, opts.L_min)
        l_g = np.broadcast_to(np.asarray(opts.l_g0, dtype=float), (m,)).copy()
        # A zero start could never be bumped; only linear constraints may keep it.
        return l_f, np.where((l_g <= 0) & (prob.L_g > 0), opts.L_min, l_g)
    if k == 0:
        return opts.L_min, np.full(m, opts.L_min)
    dx = x - x_prev
    l_f = bb_estimate(dx, prob.f.grad(x) - prob.f.grad(x_prev), opts.L_min, opts.L_max)
    l_g = np.array(
        [bb_estimate(dx, gi.grad(x) - gi.grad(x_prev), opts.L_min, opts.L_max) for gi in prob.g]
    )
    return l_f, l_g


def run_variant(prob, x0, opts=None):
    """Run the curvature-search SCP method from a feasible ``x0``.

    Returns
    -------
    SolverTrace
        Accepted iterates in ``records`` (``trials`` holds the number of
        curvature trials of each outer iteration) and every rejected trial
        in ``rejections``.  A step whose required decrease is below the
        inner-solve noise is accepted if it rises by at most that noise;
        the allowance is stored as ``extra["slack"]`` (zero otherwise).

    Raises
    ------
    InputError
        ``x0`` infeasible.
    NonconvergenceError
        Propagated from a subproblem, with the partial trace.
    AssertionError
        More trials in one outer iteration than the proven bound allows.
    """
    opts = opts or VariantOptions()
    x = check_point(prob, x0).copy()
    if not is_feasible(prob, x, opts.feas_tol):
        raise InputError("the variant method needs a feasible starting point")
    trace = SolverTrace("variant", prob.name, options=opts.to_dict())
    if prob.m == 0:
        trace.warnings.append("no constraints: the infeasibility branch is unreachable")
    L_f, L_g = prob.L_f, prob.L_g
    L_g_max = float(np.max(L_g)) if prob.m else 0.0
    closed_bound = inner_iteration_bound(L_f, opts.c, L_g_max, opts.L_min, opts.tau)
    F_hist = []
    x_prev = None
    warm = None
    for k in range(int(opts.max_outer) + 1):
        Fx = evaluate_objective(prob, x)
        F_hist.append(Fx)
        ref = nonmonotone_reference(F_hist, k, int(opts.M))
        l_f, l_g = _initial_curvatures(prob, opts, k, x, x_prev)
        bound = max(
            closed_bound or 0,
            safe_trial_bound(L_f, L_g, opts.c, max(l_f, 1e-8), l_g, opts.tau, opts.update_strategy),
        )
        base = None
        first = None
        inner_total = 0
        stop = None
        slack = 0.0
        for trial in range(int(opts.max_trials)):
            try:
                if base is None:
                    base = linearize(prob, x, l_f, l_g)
                    sub = base
                else:
                    sub = base.with_curvatures(max(l_f, 1e-8), l_g)
                sol = solve_exact(sub, opts.tol_inner, opts.inner, warm)
            except NonconvergenceError as err:
                raise attach_trace(err, trace)
            inner_total += sol.inner_iterations
            y = sol.y
            step = float(np.linalg.norm(y - x))
            if first is None:
                first = make_record(prob, k, x, sol, sub)
                if default_kkt_stop(first, opts.kkt_tol):
                    stop = "kkt_tol"
                elif step <= opts.step_tol:
                    stop = "step_tol"
                elif k == opts.max_outer:
                    stop = "max_outer"
                if stop:
                    break
            cons = constraint_values(prob, y)
            feasible = prob.X.membership(y, opts.feas_tol) and bool(np.all(cons <= opts.feas_tol))
            if not feasible:
                reason = "infeasible"
                violated = cons > opts.feas_tol
            else:
                Fy = evaluate_objective(prob, y)
                target = ref - 0.5 * opts.c * step**2
                if Fy <= target:
                    break
                noise = 10 * opts.tol_inner * (1 + float(np.sum(sol.multipliers))) + 1e-14 * (1 + abs(Fx))
                if 0.5 * opts.c * step**2 <= noise and Fy <= ref + noise:
                    # The required decrease is below what the inner accuracy can resolve.
                    slack = noise
                    break
                reason = "insufficient_decrease"
            trace.rejections.append(Rejection(k, trial, sub.l_f, sub.l_g.copy(), reason))
            if trial + 2 > bound:
                raise AssertionError(f"outer iteration {k} needs more than {bound} curvature trials")
            strat = opts.update_strategy
            if strat == "simultaneous":
                l_f, l_g = l_f * opts.tau, l_g * opts.tau
            elif reason == "insufficient_decrease":
                l_f *= opts.tau
            elif strat == "separate":
                l_g = l_g * opts.tau
            else:
                l_g = np.where(violated, l_g * opts.tau, l_g)
        else:
            raise attach_trace(
                NonconvergenceError(f"outer iteration {k}: trial cap {opts.max_trials} reached"), trace
            )
        n_trials = trial + 1
        if n_trials > bound:
            raise AssertionError(f"outer iteration {k} used {n_trials} > {bound} curvature trials")
        rec = first
        rec.trials = n_trials
        rec.inner_iters = inner_total
        rec.extra.update({"ref": ref, "trial_bound": bound})
        if stop is None:
            rec.step = step
            rec.l_f, rec.l_g = sub.l_f, sub.l_g.copy()
            rec.model_value = sol.model_value
            rec.extra["accepted_F"] = evaluate_objective(prob, y)
            rec.extra["slack"] = slack
        trace.records.append(rec)
        log.debug("variant k=%d F=%.12g trials=%d step=%.3g", k, rec.F, n_trials, rec.step)
        if stop:
            trace.termination = stop
            break
        x_prev, x, warm = x, y, sol.multipliers
    return trace
