"""Convex model subproblems and their solver.

At a base point ``x`` the model objective is

    h(y) = f(x) + s_f'(y-x) + l_f/2 ||y-x||^2 + p(y) - u(x) - s_u'(y-x)

and the model constraints are

    c_i(y) = g_i(x) + s_gi'(y-x) + l_gi/2 ||y-x||^2 + q_i(y) - v_i(x) - s_vi'(y-x).

``min h`` over ``{y in X: c(y) <= 0}`` is solved by an augmented
Lagrangian method carried out on the dual side.  For fixed multipliers
``mu`` the Lagrangian is a single strongly convex prox problem,

    y(mu) = prox_{(p + sum_i mu_i q_i)/kappa + i_X}(x - a(mu)/kappa),

whose gradient with respect to ``mu`` is ``c(y(mu))``.  Each augmented
Lagrangian round maximises the dual regularised by
``||mu - lam||^2 / (2 rho)`` with projected gradient ascent; the maximiser
is the usual multiplier update, and ``y(mu)`` is the augmented Lagrangian
primal minimiser.  Nonsmooth ``q_i`` therefore enter only through the
combined prox, never through a gradient.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NonconvergenceError, SubproblemInfeasibleError
from .kkt import projected_stationarity
from .oracles import WeightedL1, Zero, is_zero, soft_threshold
from .problem import finite
from .sets import Box, EpiAbsProduct, Product, project_epigraph_abs

log = logging.getLogger(__name__)

CURVATURE_FLOOR = 1e-8
SLATER_MARGIN = 1e-8
PROX_MAX_ITER = 10000
PROX_TOL = 1e-12


@dataclass
class SubproblemData:
    """Linearisation snapshot defining one convex model.

    Arrays ``s_g``/``s_v`` have shape ``(m, n)``; ``g_x``/``v_x``/``l_g``
    have shape ``(m,)``.
    """

    x: np.ndarray
    s_f: np.ndarray
    s_u: np.ndarray
    s_g: np.ndarray
    s_v: np.ndarray
    l_f: float
    l_g: np.ndarray
    f_x: float
    u_x: float
    g_x: np.ndarray
    v_x: np.ndarray
    p: object
    q: tuple
    X: object
    floor_applied: bool = False

    def __post_init__(self):
        if not self.l_f > 0:
            raise InputError("objective curvature l_f must be positive")
        self.l_g = np.asarray(self.l_g, dtype=float).reshape(-1)
        if np.any(self.l_g < 0):
            raise InputError("constraint curvatures must be nonnegative")
        n = self.x.size
        self.s_g = np.asarray(self.s_g, dtype=float).reshape(-1, n)
        self.s_v = np.asarray(self.s_v, dtype=float).reshape(-1, n)

    @property
    def m(self):
        return self.l_g.size

    @property
    def n(self):
        return self.x.size

    def with_curvatures(self, l_f, l_g):
        """Same linearisation, different curvatures."""
        return SubproblemData(
            self.x, self.s_f, self.s_u, self.s_g, self.s_v, float(l_f), np.array(l_g, dtype=float),
            self.f_x, self.u_x, self.g_x, self.v_x, self.p, self.q, self.X, self.floor_applied,
        )

    def to_dict(self):
        return {
            "x": self.x.tolist(), "s_f": self.s_f.tolist(), "s_u": self.s_u.tolist(),
            "s_g": self.s_g.tolist(), "s_v": self.s_v.tolist(), "l_f": self.l_f,
            "l_g": self.l_g.tolist(), "f_x": self.f_x, "u_x": self.u_x,
            "g_x": list(map(float, self.g_x)), "v_x": list(map(float, self.v_x)),
            "set": repr(self.X), "floor_applied": self.floor_applied,
        }


def linearize(prob, x, l_f=None, l_g=None):
    """Build :class:`SubproblemData` for ``prob`` at ``x``.

    Curvatures default to the declared global Lipschitz constants.  An
    objective curvature below ``CURVATURE_FLOOR`` is raised to it and
    ``floor_applied`` is set.
    """
    x = np.asarray(x, dtype=float)
    l_f = prob.L_f if l_f is None else float(l_f)
    floor = l_f < CURVATURE_FLOOR
    l_f = max(l_f, CURVATURE_FLOOR)
    l_g = prob.L_g if l_g is None else np.asarray(l_g, dtype=float)
    m = prob.m
    return SubproblemData(
        x=x,
        s_f=finite("grad f", prob.f.grad(x)),
        s_u=finite("subgradient u", prob.u.subgradient(x)),
        s_g=np.array([finite(f"grad g[{i}]", prob.g[i].grad(x)) for i in range(m)]).reshape(m, x.size),
        s_v=np.array([finite(f"subgradient v[{i}]", prob.v[i].subgradient(x)) for i in range(m)]).reshape(
            m, x.size
        ),
        l_f=l_f,
        l_g=l_g,
        f_x=finite("f", prob.f.value(x)),
        u_x=finite("u", prob.u.value(x)),
        g_x=np.array([finite(f"g[{i}]", prob.g[i].value(x)) for i in range(m)], dtype=float),
        v_x=np.array([finite(f"v[{i}]", prob.v[i].value(x)) for i in range(m)], dtype=float),
        p=prob.p,
        q=prob.q,
        X=prob.X,
        floor_applied=floor,
    )


def model_objective(sub, y):
    d = np.asarray(y, dtype=float) - sub.x
    return float(
        sub.f_x + sub.s_f @ d + 0.5 * sub.l_f * (d @ d) + sub.p.value(y) - sub.u_x - sub.s_u @ d
    )


def model_constraint(sub, i, y):
    if not 0 <= i < sub.m:
        raise InputError(f"constraint index {i} out of range for m = {sub.m}")
    d = np.asarray(y, dtype=float) - sub.x
    return float(
        sub.g_x[i] + sub.s_g[i] @ d + 0.5 * sub.l_g[i] * (d @ d) + sub.q[i].value(y)
        - sub.v_x[i] - sub.s_v[i] @ d
    )


def model_constraints(sub, y):
    d = np.asarray(y, dtype=float) - sub.x
    dd = d @ d
    qy = np.array([qi.value(y) for qi in sub.q], dtype=float)
    return sub.g_x + sub.s_g @ d + 0.5 * sub.l_g * dd + qy - sub.v_x - sub.s_v @ d


# --- proximal maps of (nonsmooth + indicator of X) ---------------------------


def _prox_dykstra(P, X, z, t):
    """Prox of ``t*P + i_X`` by the Dykstra-like proximal splitting."""
    x = np.array(z, dtype=float)
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(PROX_MAX_ITER):
        y = P.prox(x + p, t)
        p = x + p - y
        x_new = X.project(y + q)
        q = y + q - x_new
        if np.linalg.norm(x_new - x) <= PROX_TOL * (1.0 + np.linalg.norm(x_new)):
            return x_new
        x = x_new
    raise NonconvergenceError("proximal Dykstra did not converge")


def prox_on_set(P, X, z, t):
    """``argmin_y P(y) + ||y - z||^2/(2t)`` over ``y in X``."""
    z = np.asarray(z, dtype=float)
    if is_zero(P):
        return X.project(z)
    if X.is_full_space:
        return P.prox(z, t)
    if isinstance(P, WeightedL1):
        w = P.l1_weights
        if isinstance(X, Box):
            return X.project(soft_threshold(z, t * w))
        if isinstance(X, EpiAbsProduct) and X.omega.is_full_space and not np.any(w[: X.n]):
            # On the cone y >= 0, so the y-weights act linearly.
            a, b = project_epigraph_abs(z[: X.n], z[X.n:] - t * w[X.n:])
            return np.concatenate([np.atleast_1d(a), np.atleast_1d(b)])
        if isinstance(X, Product):
            out = np.empty_like(z)
            for j, blk in enumerate(X.blocks):
                sl = slice(X.offsets[j], X.offsets[j + 1])
                out[sl] = prox_on_set(WeightedL1(w[sl]), blk, z[sl], t)
            return out
    return _prox_dykstra(P, X, z, t)


def _combined_nonsmooth(sub, mu):
    """``p + sum_i mu_i q_i`` as a prox-able oracle, or None if unavailable."""
    active = [i for i in range(sub.m) if mu[i] > 0 and not is_zero(sub.q[i])]
    if not active:
        return sub.p
    parts = [sub.p] + [sub.q[i] for i in active]
    if all(getattr(o, "l1_weights", None) is not None for o in parts):
        w = sub.p.l1_weights + sum(mu[i] * sub.q[i].l1_weights for i in active)
        return WeightedL1(w)
    return None


# --- the solver ---------------------------------------------------------------


@dataclass
class InnerOptions:
    """Augmented Lagrangian settings for subproblem solves."""

    rho0: float = 10.0
    growth: float = 5.0
    multiplier_cap: float = 1e8
    max_inner: int = 20000
    max_rounds: int = 100
    fallback_iters: int = 5000


@dataclass
class SubproblemSolution:
    """Approximate minimiser with its multiplier certificate.

    ``stationarity_residual``, ``feasibility_residual`` and
    ``complementarity_residual`` are the left-hand sides of the approximate
    KKT conditions: the projected-gradient residual, ``max_i c_i(y)``
    (``-inf`` when ``m = 0``) and ``max_i (-mu_i c_i(y))^+``.
    ``complementarity_abs`` is the two-sided ``max_i |mu_i c_i(y)|``.
    ``s_nonsmooth`` is the element of ``d(p + sum mu_i q_i)(y)`` used in
    the stationarity residual.
    """

    y: np.ndarray
    multipliers: np.ndarray
    stationarity_residual: float
    feasibility_residual: float
    complementarity_residual: float
    complementarity_abs: float
    inner_iterations: int
    s_nonsmooth: np.ndarray = None
    model_value: float = math.nan
    rounds: int = 0
    history: list = field(default_factory=list, repr=False)


def subproblem_residuals(sub, y, mu, hint=None):
    """Residuals of the model KKT system at ``(y, mu)``.

    Returns ``(stationarity, feasibility, comp_one_sided, comp_abs, s)``.
    """
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    d = y - sub.x
    G = sub.s_f + sub.l_f * d - sub.s_u
    if sub.m:
        G = G + mu @ (sub.s_g - sub.s_v) + (mu @ sub.l_g) * d
    lo, hi = sub.p.subdiff_bounds(y)
    for i in range(sub.m):
        if mu[i]:
            qlo, qhi = sub.q[i].subdiff_bounds(y)
            lo, hi = lo + mu[i] * qlo, hi + mu[i] * qhi
    stat, s = projected_stationarity(sub.X, y, G, lo, hi, hints=(hint,))
    if sub.m:
        c = model_constraints(sub, y)
        feas = float(np.max(c))
        comp = float(np.max(np.maximum(-mu * c, 0.0)))
        comp_abs = float(np.max(np.abs(mu * c)))
    else:
        feas, comp, comp_abs = -math.inf, 0.0, 0.0
    return stat, feas, comp, comp_abs, s


class _Lagrangian:
    """Evaluates ``y(mu)`` and ``c(y(mu))`` with an evaluation counter."""

    def __init__(self, sub, options):
        self.sub = sub
        self.options = options
        self.evals = 0

    def primal(self, mu):
        sub = self.sub
        self.evals += 1
        kappa = sub.l_f + (mu @ sub.l_g if sub.m else 0.0)
        a = sub.s_f - sub.s_u
        if sub.m:
            a = a + mu @ (sub.s_g - sub.s_v)
        z = sub.x - a / kappa
        P = _combined_nonsmooth(sub, mu)
        if P is None:
            return self._fallback(mu, kappa, z), None
        y = prox_on_set(P, sub.X, z, 1.0 / kappa)
        return y, kappa * (z - y)

    def _fallback(self, mu, kappa, z):
        """Prox-subgradient method for ``kappa/2||y-z||^2 + p + sum mu_i q_i``.

        Used only when some active ``q_i`` lacks an l1 structure.  Steps
        ``2/(kappa (j+2))``; returns the better of the best iterate and the
        ``(j+1)``-weighted average.  Counts as one evaluation.
        """
        sub = self.sub
        active = [i for i in range(sub.m) if mu[i] > 0 and not is_zero(sub.q[i])]

        def obj(y):
            return 0.5 * kappa * np.sum((y - z) ** 2) + sub.p.value(y) + sum(
                mu[i] * sub.q[i].value(y) for i in active
            )

        y = prox_on_set(sub.p, sub.X, z, 1.0 / kappa)
        best, best_val = y, obj(y)
        avg, wsum = np.zeros_like(y), 0.0
        for j in range(self.options.fallback_iters):
            step = 2.0 / (kappa * (j + 2))
            g = kappa * (y - z) + sum(mu[i] * sub.q[i].subgradient(y) for i in active)
            y = prox_on_set(sub.p, sub.X, y - step * g, step)
            val = obj(y)
            if val < best_val:
                best, best_val = y, val
            avg, wsum = avg + (j + 1) * y, wsum + (j + 1)
        avg = avg / wsum
        if obj(avg) < best_val:
            best = avg
        return best


def _solve(sub, accept, options, warm=None, label="subproblem"):
    opts = options or InnerOptions()
    lag = _Lagrangian(sub, opts)
    m = sub.m
    history = []
    best = {}

    def finish(pt, res, rounds):
        stat, feas, comp, comp_abs, s = res
        return SubproblemSolution(
            y=pt.y, multipliers=pt.mu.copy(), stationarity_residual=stat, feasibility_residual=feas,
            complementarity_residual=comp, complementarity_abs=comp_abs,
            inner_iterations=lag.evals, s_nonsmooth=s, model_value=model_objective(sub, pt.y),
            rounds=rounds, history=history,
        )

    def fail(cls, msg):
        diag = {"subproblem": sub.to_dict(), "history": history, "best": best}
        raise cls(f"{label}: {msg}", diagnostics=diag)

    lam = np.zeros(m) if warm is None else np.maximum(np.asarray(warm, dtype=float), 0.0)
    rho = opts.rho0
    pt = _DualPoint(lag, lam, lam, rho)
    alpha = 1.0 / (sub.l_f + 1.0)
    prev_viol = math.inf
    for rnd in range(opts.max_rounds):
        inner_tol = max(1e-15, 1e-2 * 10.0 ** (-2 * rnd))
        while True:
            res = subproblem_residuals(sub, pt.y, pt.mu, pt.hint)
            history.append([float(r) for r in res[:4]])
            score = max(res[0], max(res[1], 0.0), res[3])
            if not best or score < best["score"]:
                best.update(score=score, y=pt.y.tolist(), mu=pt.mu.tolist())
            if accept(res):
                return finish(pt, res, rnd)
            if m == 0:
                fail(NonconvergenceError, "prox step does not meet the tolerance")
            if lag.evals >= opts.max_inner:
                fail(NonconvergenceError, "inner iteration cap exceeded")
            if pt.phi_norm <= inner_tol:
                break
            new = _newton_step(lag, pt, lam, rho)
            if new is None:
                new, alpha = _gradient_step(lag, pt, lam, rho, alpha)
            if new is None:
                break
            pt = new
            if np.max(pt.mu) > opts.multiplier_cap:
                fail(SubproblemInfeasibleError, "multipliers exceeded the cap; model set looks empty")
        viol = float(np.linalg.norm(np.maximum(pt.c, 0.0)))
        if viol > 0.5 * prev_viol:
            rho *= opts.growth
        prev_viol = viol
        lam = pt.mu.copy()
        pt = _DualPoint(lag, lam, lam, rho, pt)
    fail(NonconvergenceError, "augmented Lagrangian round cap exceeded")


class _DualPoint:
    """Multiplier iterate of one round with its primal point and residual map.

    The round solves the complementarity system ``mu >= 0``, ``G <= 0``,
    ``mu G = 0`` with ``G(mu) = c(y(mu)) - (mu - lam)/rho``, the optimality
    system of the regularised dual.  ``phi = min(mu, -G)``.
    """

    def __init__(self, lag, mu, lam, rho, reuse=None):
        self.mu = np.asarray(mu, dtype=float)
        if reuse is not None and np.array_equal(reuse.mu, self.mu):
            self.y, self.hint, self.c = reuse.y, reuse.hint, reuse.c
        else:
            self.y, self.hint = lag.primal(self.mu)
            self.c = model_constraints(lag.sub, self.y) if lag.sub.m else np.zeros(0)
        self.G = self.c - (self.mu - lam) / rho
        self.phi = np.minimum(self.mu, -self.G)
        self.phi_norm = float(np.linalg.norm(self.phi))


def _newton_step(lag, pt, lam, rho):
    """Semismooth Newton step on ``phi`` with a finite-difference Jacobian of ``G``."""
    m = pt.mu.size
    J = np.empty((m, m))
    for j in range(m):
        h = 1e-7 * (1.0 + pt.mu[j])
        e = pt.mu.copy()
        e[j] += h
        J[:, j] = (_DualPoint(lag, e, lam, rho).G - pt.G) / h
    free = pt.mu > -pt.G
    N = np.where(free[:, None], -J, np.eye(m))
    try:
        delta = np.linalg.solve(N, -pt.phi)
    except np.linalg.LinAlgError:
        delta = np.linalg.lstsq(N, -pt.phi, rcond=None)[0]
    if not np.all(np.isfinite(delta)):
        return None
    t = 1.0
    while t >= 1e-6:
        cand = _DualPoint(lag, np.maximum(pt.mu + t * delta, 0.0), lam, rho)
        if cand.phi_norm <= (1.0 - 1e-4 * t) * pt.phi_norm:
            return cand
        t *= 0.5
    return None


def _gradient_step(lag, pt, lam, rho, alpha):
    """Projected ascent step on the regularised dual, with a local curvature test."""
    while True:
        mu_new = np.maximum(pt.mu + alpha * pt.G, 0.0)
        step = mu_new - pt.mu
        snorm = np.linalg.norm(step)
        if snorm == 0.0:
            return None, alpha
        cand = _DualPoint(lag, mu_new, lam, rho)
        curv = np.linalg.norm(cand.G - pt.G) / snorm
        if alpha * curv <= 1.0 or alpha < 1e-14:
            return cand, 2.0 * alpha
        alpha = 0.9 / curv


def solve_exact(sub, tol_inner=1e-9, options=None, warm=None):
    """Solve the model to all residuals ``<= tol_inner`` (two-sided complementarity)."""
    if not tol_inner > 0:
        raise InputError("tol_inner must be positive")

    def accept(res):
        stat, feas, _, comp_abs, _ = res
        return stat <= tol_inner and feas <= tol_inner and comp_abs <= tol_inner

    return _solve(sub, accept, options, warm, "exact subproblem")


def solve_inexact(sub, eps_k, tol_floor=0.0, options=None, warm=None):
    """Stop at the first multiplier iterate meeting the ``eps_k`` conditions.

    Stationarity, every model constraint, and every ``-mu_i c_i(y)`` must
    be at most ``max(eps_k, tol_floor)``.
    """
    if not eps_k > 0:
        raise InputError("eps_k must be positive")
    eps = max(eps_k, tol_floor)

    def accept(res):
        stat, feas, comp, _, _ = res
        return stat <= eps and feas <= eps and comp <= eps

    return _solve(sub, accept, options, warm, "inexact subproblem")


def find_slater_point(sub, margin=SLATER_MARGIN, max_steps=500):
    """Search for ``y in X`` with every model constraint ``< -margin``.

    Minimises ``max_i c_i`` by projected subgradient steps from ``sub.x``
    with a Polyak step aimed one unit below the current value.  Returns the
    point, or None if none was found within ``max_steps``.
    """
    if sub.m == 0:
        return sub.x.copy()
    y = sub.X.project(sub.x)
    best = None
    for _ in range(max_steps + 1):
        c = model_constraints(sub, y)
        j = int(np.argmax(c))
        if c[j] < -margin:
            return y
        d = y - sub.x
        s = sub.s_g[j] + sub.l_g[j] * d + sub.q[j].subgradient(y) - sub.s_v[j]
        ss = s @ s
        if ss == 0.0:
            return best
        y = sub.X.project(y - ((c[j] + 1.0) / ss) * s)
    return best


def slater_margin(sub, y):
    """``-max_i c_i(y)``: radius of the ball around ``c(y)`` inside the negative orthant."""
    return float(-np.max(model_constraints(sub, y))) if sub.m else math.inf


def project_onto_model_set(sub, z, tol=1e-11, options=None):
    """Euclidean projection of ``z`` onto ``{y in X : c_i(y) <= 0}``.

    Solved as a model with objective ``||y - z||^2 / 2`` written around
    ``sub.x`` so the constraint data is reused unchanged.
    """
    z = np.asarray(z, dtype=float)
    w = sub.x - z
    proj = SubproblemData(
        sub.x, w, np.zeros(sub.n), sub.s_g, sub.s_v, 1.0, sub.l_g, 0.5 * float(w @ w), 0.0,
        sub.g_x, sub.v_x, Zero(sub.n), sub.q, sub.X,
    )
    return solve_exact(proj, tol, options).y


def error_bound_terms(sub, y_hat, z, tol=1e-11):
    """Both sides of the Slater error bound at ``z``.

    Returns ``(dist(z, C), ||z - y_hat|| * ||c(z)^+|| / delta)`` with
    ``delta = slater_margin(sub, y_hat)`` and ``C`` the model feasible set.
    """
    delta = slater_margin(sub, y_hat)
    if not delta > 0:
        raise InputError("y_hat is not a Slater point")
    z = np.asarray(z, dtype=float)
    lhs = float(np.linalg.norm(z - project_onto_model_set(sub, z, tol)))
    viol = np.maximum(model_constraints(sub, z), 0.0)
    rhs = float(np.linalg.norm(z - y_hat) * np.linalg.norm(viol) / delta)
    return lhs, rhs
