"""Sparsity-inducing penalties and the lifted sparse-approximation program.

Each penalty ``h`` is split as ``h(t) = lam*t - (lam*t - h(t))`` where the
bracket is convex on ``[0, inf)``.  Summed over coordinates, the bracket is
the ``u`` part of a structured program, and ``min l(x) + sum h(|x_j|)``
over ``x in omega`` becomes

    min  l(x) + lam*||y||_1 - u(y)   s.t.  y >= |x|,  x in omega.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .oracles import Oracle, WeightedL1
from .problem import ProblemInstance
from .sets import EpiAbsProduct

KINDS = ("l1", "scad", "lq", "log", "capped_l1")
_ALIASES = {"cappedl1": "capped_l1", "capped-l1": "capped_l1", "capped": "capped_l1"}


@dataclass(frozen=True)
class PenaltySpec:
    """One of the five penalties with its parameters.

    ``a`` is used by SCAD, ``q`` and ``eps`` by Lq, ``eps`` by Log and
    ``eta`` by capped-l1.  Unused parameters are ignored.
    """

    kind: str
    lam: float
    a: float = 3.7
    q: float = 0.5
    eps: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise InputError(f"unknown penalty kind {self.kind!r}")
        if not self.lam > 0:
            raise InputError("lambda must be positive")
        if kind == "scad" and not self.a > 1:
            raise InputError("SCAD needs a > 1")
        if kind == "lq" and not 0 < self.q < 1:
            raise InputError("Lq needs 0 < q < 1")
        if kind in ("lq", "log") and not self.eps > 0:
            raise InputError("eps must be positive")
        if kind == "capped_l1" and not self.eta > 0:
            raise InputError("eta must be positive")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind")
        lam = d.pop("lambda", d.pop("lam", None))
        if lam is None:
            raise InputError("penalty needs 'lambda'")
        unknown = set(d) - {"a", "q", "eps", "eta"}
        if unknown:
            raise InputError(f"unknown penalty fields {sorted(unknown)}")
        return cls(kind, float(lam), **{k: float(v) for k, v in d.items()})

    def to_dict(self):
        out = {"kind": self.kind, "lambda": self.lam}
        extra = {"scad": ("a",), "lq": ("q", "eps"), "log": ("eps",), "capped_l1": ("eta",)}
        out.update({k: getattr(self, k) for k in extra.get(self.kind, ())})
        return out

    @property
    def kinks(self):
        """Branch points where ``h`` changes formula."""
        if self.kind == "scad":
            return (self.lam, self.a * self.lam)
        if self.kind == "capped_l1":
            return (self.eta,)
        return ()


def _nonneg(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InputError("penalty argument must be nonnegative")
    return t


def _h(spec, t):
    lam = spec.lam
    if spec.kind == "l1":
        return lam * t
    if spec.kind == "scad":
        a = spec.a
        mid = (-(t**2) + 2 * a * lam * t - lam**2) / (2 * (a - 1))
        return np.where(t <= lam, lam * t, np.where(t <= a * lam, mid, 0.5 * (a + 1) * lam**2))
    if spec.kind == "lq":
        return lam * (t + spec.eps) ** spec.q
    if spec.kind == "log":
        return lam * np.log(t + spec.eps) - lam * np.log(spec.eps)
    return np.where(t < spec.eta, lam * t, lam * spec.eta)


def penalty_value(spec, t):
    """``h(t)`` for ``t >= 0`` (scalar or array)."""
    out = _h(spec, _nonneg(t))
    return float(out) if np.ndim(out) == 0 else out


def penalty_derivative(spec, t, side="right"):
    """One-sided derivative of ``h``; ``side`` is ``"right"`` or ``"left"``.

    At ``t = 0`` only the right derivative exists and is returned for
    either side.
    """
    t = _nonneg(t)
    lam = spec.lam
    right = side == "right"
    if spec.kind == "l1":
        out = np.full_like(t, lam)
    elif spec.kind == "scad":
        a = spec.a
        mid = (a * lam - t) / (a - 1)
        if right:
            out = np.where(t < lam, lam, np.where(t < a * lam, mid, 0.0))
        else:
            out = np.where(t <= lam, lam, np.where(t <= a * lam, mid, 0.0))
    elif spec.kind == "lq":
        out = lam * spec.q * (t + spec.eps) ** (spec.q - 1)
    elif spec.kind == "log":
        out = lam / (t + spec.eps)
    else:
        below = t < spec.eta if right else t <= spec.eta
        out = np.where(below | (t == 0), lam, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def u_value(spec, y):
    """``sum_j (lam*y_j - h(y_j))``; convex on the nonnegative orthant."""
    y = _nonneg(np.atleast_1d(y))
    return float(np.sum(spec.lam * y - _h(spec, y)))


def u_subgradient(spec, y):
    """Selection ``lam - h'(y_j)`` using right derivatives of ``h``."""
    y = _nonneg(np.atleast_1d(y))
    return spec.lam - penalty_derivative(spec, y, "right") * np.ones_like(y)


def u_subdiff_bounds(spec, y):
    """Subdifferential box of ``u``: ``[lam - h'_+(y), lam - h'_-(y)]``."""
    y = _nonneg(np.atleast_1d(y))
    ones = np.ones_like(y)
    lo = spec.lam - penalty_derivative(spec, y, "right") * ones
    hi = spec.lam - penalty_derivative(spec, y, "left") * ones
    return np.minimum(lo, hi), np.maximum(lo, hi)


# Rounding in projections can leave y a hair below zero.
_NEG_SLOP = 1e-12


class PenaltyU(Oracle):
    """``u`` as a convex oracle acting on the block ``[start, start + k)``."""

    def __init__(self, spec, dim, start=0, size=None):
        self.spec = spec
        self.dim = int(dim)
        self.start = int(start)
        self.stop = self.dim if size is None else self.start + int(size)
        self.name = f"penalty_u[{spec.kind}]"

    def _block(self, x):
        y = np.asarray(x, dtype=float)[self.start:self.stop]
        if np.any(y < -_NEG_SLOP):
            raise InputError("penalty u evaluated at a negative coordinate")
        return np.maximum(y, 0.0)

    def value(self, x):
        return u_value(self.spec, self._block(x))

    def values(self, points):
        y = np.maximum(np.asarray(points, dtype=float)[:, self.start:self.stop], 0.0)
        return np.sum(self.spec.lam * y - _h(self.spec, y), axis=1)

    def _embed(self, block_vec):
        out = np.zeros(self.dim)
        out[self.start:self.stop] = block_vec
        return out

    def subgradient(self, x):
        return self._embed(u_subgradient(self.spec, self._block(x)))

    def subdiff_bounds(self, x):
        lo, hi = u_subdiff_bounds(self.spec, self._block(x))
        return self._embed(lo), self._embed(hi)


class LiftedLoss(Oracle):
    """A loss on ``x`` seen as a function of ``(x, y)``."""

    def __init__(self, loss, n):
        self.loss = loss
        self.n = int(n)
        self.dim = 2 * self.n
        self.lipschitz = float(loss.lipschitz)
        self.name = f"lifted[{getattr(loss, 'name', 'loss')}]"

    def value(self, z):
        return self.loss.value(np.asarray(z, dtype=float)[: self.n])

    def values(self, points):
        return self.loss.values(np.asarray(points, dtype=float)[:, : self.n])

    def grad(self, z):
        return np.concatenate([self.loss.grad(np.asarray(z, dtype=float)[: self.n]), np.zeros(self.n)])


def build_sparse_nlp(loss, omega, spec, name=None):
    """Lift ``min_{x in omega} l(x) + sum_j h(|x_j|)`` to a structured program.

    Parameters
    ----------
    loss : smooth oracle on R^n with a declared ``lipschitz``.
    omega : SetOracle on R^n, or None for the whole space.
    spec : PenaltySpec

    Returns
    -------
    ProblemInstance
        Dimension ``2n``, variables ordered ``(x, y)``, no constraints.
    """
    n = int(loss.dim)
    weights = np.concatenate([np.zeros(n), np.full(n, spec.lam)])
    return ProblemInstance(
        dim=2 * n,
        f=LiftedLoss(loss, n),
        p=WeightedL1(weights),
        u=PenaltyU(spec, 2 * n, start=n),
        X=EpiAbsProduct(n, omega),
        name=name or f"sparse_{spec.kind}",
        meta={"n": n, "penalty": spec, "loss": loss, "omega": omega},
    )


def lift(x):
    """Map ``x`` to the feasible lifted point ``(x, |x|)``."""
    x = np.asarray(x, dtype=float)
    return np.concatenate([x, np.abs(x)])


def sparse_objective(loss, spec, x):
    """The unlifted objective ``l(x) + sum_j h(|x_j|)``."""
    x = np.asarray(x, dtype=float)
    return loss.value(x) + float(np.sum(_h(spec, np.abs(x))))
