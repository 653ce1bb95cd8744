"""Function oracles.

Two roles appear in a structured program:

* smooth oracles (``f`` and ``g_i``): ``value``, ``grad`` and a declared
  ``lipschitz`` constant of the gradient;
* convex oracles (``p``, ``u``, ``q_i``, ``v_i``): ``value``, one
  ``subgradient`` selection, and optionally ``subdiff_bounds`` (the
  subdifferential as a coordinate box, when it is one) and ``prox``.

Convex oracles that are weighted l1 norms expose ``l1_weights`` so that
nonnegative combinations ``p + sum_i mu_i q_i`` can be formed and
prox-ed in closed form.
"""

import numpy as np

from .errors import InputError

_CUSTOM = {}


def register_oracle(name):
    """Register a factory ``params -> oracle`` under ``name``.

    Registered factories are reachable from JSON problem descriptors via
    ``{"custom": {"name": name, "params": {...}}}``.
    """

    def deco(factory):
        _CUSTOM[name] = factory
        return factory

    return deco


def custom_oracle(name, params=None):
    try:
        factory = _CUSTOM[name]
    except KeyError:
        raise InputError(f"no custom oracle registered under {name!r}") from None
    return factory(**(params or {}))


def soft_threshold(z, thresh):
    return np.sign(z) * np.maximum(np.abs(z) - thresh, 0.0)


class Oracle:
    """Common defaults.  ``values`` evaluates a batch of points (rows)."""

    lipschitz = 0.0
    l1_weights = None
    has_prox = False
    name = "oracle"

    def values(self, points):
        return np.array([self.value(p) for p in points], dtype=float)

    def subgradient(self, x):
        return self.grad(x)

    def subdiff_bounds(self, x):
        s = self.subgradient(x)
        return s, s

    def prox(self, z, t):
        raise NotImplementedError(f"{type(self).__name__} has no proximal map")


class Zero(Oracle):
    """The zero function, usable in every role."""

    has_prox = True
    name = "zero"

    def __init__(self, dim):
        self.dim = int(dim)
        self.l1_weights = np.zeros(self.dim)

    def value(self, x):
        return 0.0

    def values(self, points):
        return np.zeros(len(points))

    def grad(self, x):
        return np.zeros(self.dim)

    def prox(self, z, t):
        return np.array(z, dtype=float)


class Quadratic(Oracle):
    """``0.5 x'Qx + b'x + c``.

    The gradient Lipschitz constant defaults to the spectral norm of the
    symmetrised ``Q``.  Used as a convex oracle it must be PSD, which the
    problem-level property checks verify by sampling.
    """

    name = "quadratic"

    def __init__(self, Q, b=None, c=0.0, lipschitz=None):
        Q = np.atleast_2d(np.array(Q, dtype=float))
        if Q.shape[0] != Q.shape[1]:
            raise InputError("quadratic Q must be square")
        self.Q = 0.5 * (Q + Q.T)
        self.dim = Q.shape[0]
        self.b = np.zeros(self.dim) if b is None else np.array(b, dtype=float)
        self.c = float(c)
        self.lipschitz = (
            float(np.max(np.abs(np.linalg.eigvalsh(self.Q)))) if lipschitz is None else float(lipschitz)
        )

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.b @ x + self.c)

    def values(self, points):
        return 0.5 * np.einsum("ij,jk,ik->i", points, self.Q, points) + points @ self.b + self.c

    def grad(self, x):
        return self.Q @ np.asarray(x, dtype=float) + self.b


class LeastSquares(Oracle):
    """``0.5 ||A x - b||^2`` with Lipschitz constant ``||A||_2^2``."""

    name = "least_squares"

    def __init__(self, A, b, lipschitz=None):
        self.A = np.atleast_2d(np.array(A, dtype=float))
        self.b = np.array(b, dtype=float).reshape(-1)
        if self.A.shape[0] != self.b.size:
            raise InputError("least_squares A and b disagree in row count")
        self.dim = self.A.shape[1]
        self.lipschitz = (
            float(np.linalg.norm(self.A, 2) ** 2) if lipschitz is None else float(lipschitz)
        )

    def value(self, x):
        r = self.A @ np.asarray(x, dtype=float) - self.b
        return float(0.5 * r @ r)

    def values(self, points):
        r = points @ self.A.T - self.b
        return 0.5 * np.einsum("ij,ij->i", r, r)

    def grad(self, x):
        return self.A.T @ (self.A @ np.asarray(x, dtype=float) - self.b)


class WeightedL1(Oracle):
    """``sum_j w_j |x_j|`` with ``w >= 0``.

    The subgradient selection at ``x_j = 0`` is ``0`` (the minimum-norm
    element); the full box ``[-w_j, w_j]`` is available through
    :meth:`subdiff_bounds`.
    """

    has_prox = True
    name = "l1"

    def __init__(self, weights):
        w = np.array(weights, dtype=float).reshape(-1)
        if np.any(w < 0):
            raise InputError("l1 weights must be nonnegative")
        self.l1_weights = w
        self.dim = w.size

    def value(self, x):
        return float(self.l1_weights @ np.abs(x))

    def values(self, points):
        return np.abs(points) @ self.l1_weights

    def subgradient(self, x):
        return self.l1_weights * np.sign(x)

    def subdiff_bounds(self, x):
        x = np.asarray(x, dtype=float)
        s = self.l1_weights * np.sign(x)
        at_zero = x == 0
        return np.where(at_zero, -self.l1_weights, s), np.where(at_zero, self.l1_weights, s)

    def prox(self, z, t):
        return soft_threshold(np.asarray(z, dtype=float), t * self.l1_weights)


class SmoothFunction(Oracle):
    """Wrap plain callables as a smooth oracle."""

    def __init__(self, value, grad, lipschitz, dim, name="smooth"):
        self._value, self._grad = value, grad
        self.lipschitz = float(lipschitz)
        self.dim = int(dim)
        self.name = name

    def value(self, x):
        return float(self._value(np.asarray(x, dtype=float)))

    def grad(self, x):
        return np.asarray(self._grad(np.asarray(x, dtype=float)), dtype=float)


class ConvexFunction(Oracle):
    """Wrap plain callables as a convex (possibly nonsmooth) oracle.

    ``bounds`` and ``prox`` are optional; without ``bounds`` the
    subdifferential is represented by the single selection.
    """

    def __init__(self, value, subgradient, dim, bounds=None, prox=None, name="convex"):
        self._value, self._sub = value, subgradient
        self._bounds, self._prox = bounds, prox
        self.has_prox = prox is not None
        self.dim = int(dim)
        self.name = name

    def value(self, x):
        return float(self._value(np.asarray(x, dtype=float)))

    def subgradient(self, x):
        return np.asarray(self._sub(np.asarray(x, dtype=float)), dtype=float)

    def subdiff_bounds(self, x):
        if self._bounds is None:
            s = self.subgradient(x)
            return s, s
        lo, hi = self._bounds(np.asarray(x, dtype=float))
        return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)

    def prox(self, z, t):
        if self._prox is None:
            return super().prox(z, t)
        return np.asarray(self._prox(np.asarray(z, dtype=float), t), dtype=float)


def is_zero(oracle):
    return isinstance(oracle, Zero) or (
        isinstance(oracle, WeightedL1) and not np.any(oracle.l1_weights)
    )
