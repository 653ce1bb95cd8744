"""Oracle bundle for ``min f + p - u  s.t.  g_i + q_i - v_i <= 0, x in X``."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, OracleError
from .oracles import Zero
from .sets import FullSpace, SetOracle

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class ProblemInstance:
    """A structured nonconvex program.

    ``f`` and each ``g[i]`` are smooth oracles carrying ``lipschitz``;
    ``p``, ``u``, ``q[i]``, ``v[i]`` are convex oracles; ``X`` is a
    :class:`~seqcvx.sets.SetOracle`.  Missing parts default to zero.
    """

    dim: int
    f: object = None
    p: object = None
    u: object = None
    g: tuple = ()
    q: tuple = ()
    v: tuple = ()
    X: SetOracle = None
    name: str = "problem"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = int(self.dim)
        if n <= 0:
            raise InputError("dim must be positive")
        set_ = object.__setattr__
        set_(self, "dim", n)
        for attr in ("f", "p", "u"):
            if getattr(self, attr) is None:
                set_(self, attr, Zero(n))
        m = len(self.g)
        q = tuple(self.q) if self.q else tuple(Zero(n) for _ in range(m))
        v = tuple(self.v) if self.v else tuple(Zero(n) for _ in range(m))
        if len(q) != m or len(v) != m:
            raise InputError("g, q, v must have the same length")
        set_(self, "g", tuple(self.g))
        set_(self, "q", q)
        set_(self, "v", v)
        if self.X is None:
            set_(self, "X", FullSpace(n))
        if self.X.dim != n:
            raise InputError(f"set dimension {self.X.dim} != problem dimension {n}")
        for label, orc in self._labelled():
            if getattr(orc, "dim", n) != n:
                raise InputError(f"oracle {label} has dimension {orc.dim}, expected {n}")

    @property
    def m(self):
        return len(self.g)

    @property
    def L_f(self):
        return float(self.f.lipschitz)

    @property
    def L_g(self):
        return np.array([gi.lipschitz for gi in self.g], dtype=float)

    def _labelled(self):
        yield "f", self.f
        yield "p", self.p
        yield "u", self.u
        for i in range(self.m):
            yield f"g[{i}]", self.g[i]
            yield f"q[{i}]", self.q[i]
            yield f"v[{i}]", self.v[i]


def check_point(prob, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (prob.dim,):
        raise InputError(f"point has shape {x.shape}, expected ({prob.dim},)")
    if not np.all(np.isfinite(x)):
        raise InputError("point has non-finite entries")
    return x


def finite(label, value):
    """Return ``value`` or raise :class:`OracleError` naming ``label``."""
    if not np.all(np.isfinite(value)):
        raise OracleError(label, f"non-finite output {value!r}")
    return value


def objective_parts(prob, x):
    return (
        finite("f", prob.f.value(x)),
        finite("p", prob.p.value(x)),
        finite("u", prob.u.value(x)),
    )


def evaluate_objective(prob, x):
    """``F(x) = f(x) + p(x) - u(x)``."""
    x = check_point(prob, x)
    fx, px, ux = objective_parts(prob, x)
    return fx + px - ux


def evaluate_constraint(prob, i, x):
    """``g_i(x) + q_i(x) - v_i(x)`` for the 0-based index ``i``."""
    if not 0 <= i < prob.m:
        raise InputError(f"constraint index {i} out of range for m = {prob.m}")
    x = check_point(prob, x)
    return (
        finite(f"g[{i}]", prob.g[i].value(x))
        + finite(f"q[{i}]", prob.q[i].value(x))
        - finite(f"v[{i}]", prob.v[i].value(x))
    )


def constraint_values(prob, x):
    return np.array([evaluate_constraint(prob, i, x) for i in range(prob.m)], dtype=float)


def max_constraint(prob, x):
    """Largest constraint value, ``-inf`` when there are no constraints."""
    return float(np.max(constraint_values(prob, x))) if prob.m else float("-inf")


def is_feasible(prob, x, tol=FEAS_TOL):
    if tol < 0:
        raise InputError("tol must be nonnegative")
    x = check_point(prob, x)
    if not prob.X.membership(x, tol):
        return False
    return all(evaluate_constraint(prob, i, x) <= tol for i in range(prob.m))


def sample_points(prob, n_points, rng, scale=2.0, center=None):
    """Random points of ``X`` (Gaussian cloud projected onto ``X``)."""
    c = np.zeros(prob.dim) if center is None else np.asarray(center, dtype=float)
    raw = c + scale * rng.standard_normal((n_points, prob.dim))
    return np.array([prob.X.project(z) for z in raw])


def check_oracles(prob, n_pairs=1000, seed=0, rtol=1e-8, scale=2.0, center=None):
    """Sampled property suite for every oracle of ``prob``.

    Checks, on ``n_pairs`` random pairs in ``X``: the descent lemma for
    ``f`` and each ``g_i`` at their declared constants; the subgradient
    inequality and midpoint convexity for ``p``, ``u``, ``q_i``, ``v_i``;
    idempotence and nonexpansiveness of the projection.  Returns a list of
    human-readable violation strings (empty when all pass).
    """
    rng = np.random.default_rng(seed)
    xs = sample_points(prob, n_pairs, rng, scale, center)
    ys = sample_points(prob, n_pairs, rng, scale, center)
    thetas = rng.uniform(0.0, 1.0, n_pairs)
    bad = []

    def slack(*vals):
        return rtol * (1.0 + max(abs(v) for v in vals))

    smooth = [("f", prob.f)] + [(f"g[{i}]", gi) for i, gi in enumerate(prob.g)]
    convex = [("p", prob.p), ("u", prob.u)]
    convex += [(f"q[{i}]", qi) for i, qi in enumerate(prob.q)]
    convex += [(f"v[{i}]", vi) for i, vi in enumerate(prob.v)]

    for x, y, th in zip(xs, ys, thetas):
        d = y - x
        for label, orc in smooth:
            fx, fy = orc.value(x), orc.value(y)
            bound = fx + orc.grad(x) @ d + 0.5 * orc.lipschitz * (d @ d)
            if fy > bound + slack(fx, fy, bound):
                bad.append(f"descent lemma {label} at {x.tolist()} -> {y.tolist()}")
        for label, orc in convex:
            fx, fy = orc.value(x), orc.value(y)
            lin = fx + orc.subgradient(x) @ d
            if fy < lin - slack(fx, fy, lin):
                bad.append(f"subgradient inequality {label} at {x.tolist()}")
            mid = orc.value(th * x + (1 - th) * y)
            if th * fx + (1 - th) * fy - mid < -slack(fx, fy, mid):
                bad.append(f"convexity {label} at {x.tolist()}")
    raw = (np.zeros(prob.dim) if center is None else np.asarray(center, dtype=float)) + (
        2 * scale * rng.standard_normal((n_pairs, 2, prob.dim))
    )
    for (z1, z2), x in zip(raw, xs):
        p1, p2 = prob.X.project(z1), prob.X.project(z2)
        if np.linalg.norm(prob.X.project(p1) - p1) > 1e-9 * (1 + np.linalg.norm(p1)):
            bad.append("projection not idempotent")
        if np.linalg.norm(p1 - p2) > np.linalg.norm(z1 - z2) * (1 + 1e-9) + 1e-12:
            bad.append("projection expansive")
        if not prob.X.membership(p1, 1e-9):
            bad.append("projection leaves the set")
        if np.linalg.norm(p1 - z1) > np.linalg.norm(x - z1) * (1 + 1e-9) + 1e-12:
            bad.append("projection is not nearest")
    return bad
