"""Approximate KKT residuals and a brute-force grid oracle.

Stationarity is measured in projected form,

    || P_X(x - [grad_smooth + s]) - x ||,

with ``s`` drawn from the (box-shaped) subdifferential of the nonsmooth
terms.  Because oracles only expose one selection or a box, a handful of
candidate selections from the box are tried and the smallest residual is
reported.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .problem import check_point, constraint_values

TOL_ACTIVE = 1e-7


def projected_stationarity(X, x, grad_smooth, lo, hi, hints=(), refine=3):
    """Smallest projected residual over a few selections ``s`` in ``[lo, hi]``.

    Candidates are the hints (each clipped to the box), the selection
    closest to ``-grad_smooth``, both box corners, and a few fixed-point
    refinements ``s <- clip(-grad_smooth - n)`` where ``n`` is the normal
    component rejected by the projection.

    Returns
    -------
    (float, ndarray)
        The residual and the selection achieving it.
    """
    x = np.asarray(x, dtype=float)
    G = np.asarray(grad_smooth, dtype=float)

    def resid(s):
        w = x - G - s
        return float(np.linalg.norm(X.project(w) - x))

    cands = [np.clip(h, lo, hi) for h in hints if h is not None]
    s = np.clip(-G, lo, hi)
    cands += [s, lo, hi]
    for _ in range(refine):
        w = x - G - s
        s = np.clip(-G - (w - X.project(w)), lo, hi)
        cands.append(s)
    best, best_s = math.inf, None
    for c in cands:
        if not np.all(np.isfinite(c)):
            continue
        r = resid(c)
        if r < best:
            best, best_s = r, c
        if best == 0.0:
            break
    return best, best_s


def nonsmooth_box(prob, x, lam):
    """Box for ``dp(x) - du(x) + sum_i lam_i (dq_i(x) - dv_i(x))``."""
    plo, phi = prob.p.subdiff_bounds(x)
    ulo, uhi = prob.u.subdiff_bounds(x)
    lo, hi = plo - uhi, phi - ulo
    for i in range(prob.m):
        if lam[i] == 0:
            continue
        qlo, qhi = prob.q[i].subdiff_bounds(x)
        vlo, vhi = prob.v[i].subdiff_bounds(x)
        lo = lo + lam[i] * (qlo - vhi)
        hi = hi + lam[i] * (qhi - vlo)
    return lo, hi


def default_selection(prob, x, lam):
    s = prob.p.subgradient(x) - prob.u.subgradient(x)
    for i in range(prob.m):
        if lam[i]:
            s = s + lam[i] * (prob.q[i].subgradient(x) - prob.v[i].subgradient(x))
    return s


@dataclass
class KktResidual:
    """Residuals of the KKT system at ``(x, multipliers)``.

    ``feasibility`` is the largest constraint value (``-inf`` when there
    are no constraints) and may be negative; ``set_gap`` is the distance
    from ``x`` to ``X``.
    """

    stationarity: float
    feasibility: float
    complementarity: float
    multipliers: np.ndarray
    set_gap: float = 0.0
    active: tuple = field(default=())

    @property
    def violation(self):
        """``max(stationarity, feasibility^+, set_gap, |complementarity|)``."""
        return max(
            self.stationarity, max(self.feasibility, 0.0), self.set_gap, abs(self.complementarity)
        )

    def as_tuple(self):
        return (self.stationarity, self.feasibility, self.complementarity)


def kkt_residual(prob, x, lam=None, tol_active=TOL_ACTIVE):
    """KKT residual of ``prob`` at ``x`` with multipliers ``lam``.

    Raises
    ------
    InputError
        Negative multiplier or wrong length.
    """
    x = check_point(prob, x)
    lam = np.zeros(prob.m) if lam is None else np.asarray(lam, dtype=float).reshape(-1)
    if lam.size != prob.m:
        raise InputError(f"expected {prob.m} multipliers, got {lam.size}")
    if np.any(lam < 0):
        raise InputError("multipliers must be nonnegative")
    G = prob.f.grad(x)
    for i in range(prob.m):
        if lam[i]:
            G = G + lam[i] * prob.g[i].grad(x)
    lo, hi = nonsmooth_box(prob, x, lam)
    stat, _ = projected_stationarity(prob.X, x, G, lo, hi, hints=(default_selection(prob, x, lam),))
    cons = constraint_values(prob, x)
    feas = float(np.max(cons)) if prob.m else -math.inf
    comp = float(np.max(np.abs(lam * cons))) if prob.m else 0.0
    active = tuple(int(i) for i in np.flatnonzero(np.abs(cons) <= tol_active))
    return KktResidual(stat, feas, comp, lam.copy(), prob.X.distance(x), active)


def active_set(prob, x, tol=TOL_ACTIVE):
    """0-based indices with ``|g_i + q_i - v_i|(x) <= tol``."""
    cons = constraint_values(prob, x)
    return tuple(int(i) for i in np.flatnonzero(np.abs(cons) <= tol))


def _batched(oracle, pts):
    return np.asarray(oracle.values(pts), dtype=float)


def brute_force_minimize(prob, box, grid_step, chunk=200000):
    """Exhaustive grid search over ``box`` (a pair ``(lo, hi)`` of arrays).

    Grid points are kept when they lie in ``X`` and satisfy every
    constraint, both to tolerance ``grid_step``.

    Returns
    -------
    (ndarray, float) or (None, None)
        Best feasible grid point and its objective; ``(None, None)`` when no
        grid point is feasible.
    """
    if prob.dim > 3:
        raise InputError("brute force is limited to dim <= 3")
    lo, hi = (np.asarray(b, dtype=float).reshape(-1) for b in box)
    if lo.size != prob.dim or hi.size != prob.dim or not np.all(np.isfinite(np.r_[lo, hi])):
        raise InputError("brute force needs a bounded box matching the dimension")
    axes = [np.linspace(a, b, int(round((b - a) / grid_step)) + 1) for a, b in zip(lo, hi)]
    best_x, best_v = None, math.inf
    total = math.prod(ax.size for ax in axes)
    it = itertools.product(*axes)
    # Chunks are processed in grid order and ties keep the first point, so the
    # result does not depend on the chunk size.
    for start in range(0, total, chunk):
        pts = np.array(list(itertools.islice(it, chunk)), dtype=float)
        ok = prob.X.membership_batch(pts, grid_step)
        for i in range(prob.m):
            cons = _batched(prob.g[i], pts) + _batched(prob.q[i], pts) - _batched(prob.v[i], pts)
            ok &= cons <= grid_step
        if not np.any(ok):
            continue
        cand = pts[ok]
        vals = _batched(prob.f, cand) + _batched(prob.p, cand) - _batched(prob.u, cand)
        j = int(np.argmin(vals))
        if vals[j] < best_v:
            best_v, best_x = float(vals[j]), cand[j]
    if best_x is None:
        return None, None
    return best_x, best_v
