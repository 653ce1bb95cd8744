"""Closed convex sets with exact (or Dykstra-computed) Euclidean projections.

Every set exposes ``membership(x, tol)`` and ``project(z)`` plus a ``tag``
naming its kind.  Sets are immutable after construction.
"""

import numpy as np

from .errors import InputError, NonconvergenceError

DYKSTRA_MAX_ITER = 10000
DYKSTRA_TOL = 1e-12


def dykstra(projections, z, max_iter=DYKSTRA_MAX_ITER, tol=DYKSTRA_TOL):
    """Project ``z`` onto an intersection by Dykstra's alternating projections.

    Parameters
    ----------
    projections : sequence of callables
        Projections onto the individual closed convex sets.
    z : ndarray
        Point to project.

    Returns
    -------
    ndarray
        The projection of ``z`` onto the intersection.
    """
    x = np.array(z, dtype=float)
    increments = [np.zeros_like(x) for _ in projections]
    for _ in range(max_iter):
        x_old = x
        moved = 0.0
        for j, proj in enumerate(projections):
            y = proj(x + increments[j])
            inc = x + increments[j] - y
            moved += float(np.linalg.norm(inc - increments[j]))
            increments[j] = inc
            x = y
        # The iterate can repeat while the increments still move, so both must settle.
        if np.linalg.norm(x - x_old) + moved <= tol * (1.0 + np.linalg.norm(x)):
            return x
    raise NonconvergenceError(
        "Dykstra projection did not converge",
        diagnostics={"max_iter": max_iter, "last_change": float(np.linalg.norm(x - x_old))},
    )


def project_epigraph_abs(a, b):
    """Euclidean projection of ``(a, b)`` onto ``{(x, y): y >= |x|}``.

    Works elementwise on arrays.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    abs_a = np.abs(a)
    t = 0.5 * (abs_a + b)
    inside = b >= abs_a
    polar = b <= -abs_a
    x = np.where(inside, a, np.where(polar, 0.0, np.sign(a) * t))
    y = np.where(inside, b, np.where(polar, 0.0, t))
    if x.ndim == 0:
        return float(x), float(y)
    return x, y


class SetOracle:
    """Base class.  Subclasses define ``dim``, ``tag``, ``project``, ``membership``."""

    tag = "abstract"
    dim = 0

    def project(self, z):
        raise NotImplementedError

    def membership(self, x, tol=1e-9):
        raise NotImplementedError

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def membership_batch(self, points, tol=1e-9):
        return np.array([self.membership(p, tol) for p in points], dtype=bool)

    @property
    def is_full_space(self):
        return False


class FullSpace(SetOracle):
    tag = "full"

    def __init__(self, dim):
        self.dim = int(dim)

    def project(self, z):
        return np.array(z, dtype=float)

    def membership(self, x, tol=1e-9):
        return bool(np.all(np.isfinite(x)))

    def membership_batch(self, points, tol=1e-9):
        return np.all(np.isfinite(points), axis=1)

    @property
    def is_full_space(self):
        return True

    def __repr__(self):
        return f"FullSpace({self.dim})"


class Box(SetOracle):
    """``{x: lo <= x <= hi}``; infinite bounds are allowed."""

    tag = "box"

    def __init__(self, lo, hi):
        self.lo = np.array(lo, dtype=float)
        self.hi = np.array(hi, dtype=float)
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise InputError("box bounds must be 1-D arrays of equal length")
        if np.any(self.lo > self.hi):
            raise InputError("box has lo > hi")
        self.dim = self.lo.size

    def project(self, z):
        return np.clip(np.asarray(z, dtype=float), self.lo, self.hi)

    def membership(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def membership_batch(self, points, tol=1e-9):
        return np.all((points >= self.lo - tol) & (points <= self.hi + tol), axis=1)

    @property
    def is_full_space(self):
        return bool(np.all(np.isinf(self.lo)) and np.all(np.isinf(self.hi)))

    def __repr__(self):
        return f"Box({self.lo.tolist()}, {self.hi.tolist()})"


class Ball(SetOracle):
    tag = "ball"

    def __init__(self, center, radius):
        self.center = np.array(center, dtype=float)
        self.radius = float(radius)
        if self.radius < 0:
            raise InputError("ball radius must be nonnegative")
        self.dim = self.center.size

    def project(self, z):
        z = np.asarray(z, dtype=float)
        d = z - self.center
        nrm = np.linalg.norm(d)
        if nrm <= self.radius:
            return z.copy()
        return self.center + d * (self.radius / nrm)

    def membership(self, x, tol=1e-9):
        return bool(np.linalg.norm(np.asarray(x, dtype=float) - self.center) <= self.radius + tol)

    def membership_batch(self, points, tol=1e-9):
        return np.linalg.norm(points - self.center, axis=1) <= self.radius + tol


class Halfspaces(SetOracle):
    """``{x: A x <= b}``, projected by Dykstra over the individual halfspaces."""

    tag = "halfspace-intersection"

    def __init__(self, A, b):
        self.A = np.atleast_2d(np.array(A, dtype=float))
        self.b = np.array(b, dtype=float).reshape(-1)
        if self.A.shape[0] != self.b.size:
            raise InputError("halfspace A and b disagree in row count")
        self.dim = self.A.shape[1]

    def _halfspace(self, j):
        a, beta = self.A[j], self.b[j]
        aa = a @ a

        def proj(z):
            excess = a @ z - beta
            return z - (excess / aa) * a if excess > 0 else z

        return proj

    def project(self, z):
        z = np.asarray(z, dtype=float)
        if self.membership(z, 0.0):
            return z.copy()
        if self.A.shape[0] == 1:
            return self._halfspace(0)(z)
        return dykstra([self._halfspace(j) for j in range(self.A.shape[0])], z)

    def membership(self, x, tol=1e-9):
        return bool(np.all(self.A @ np.asarray(x, dtype=float) <= self.b + tol))


class Product(SetOracle):
    """Cartesian product; blocks occupy consecutive coordinate ranges."""

    tag = "cartesian-product"

    def __init__(self, blocks):
        self.blocks = tuple(blocks)
        if not self.blocks:
            raise InputError("product needs at least one block")
        self.offsets = np.cumsum([0] + [blk.dim for blk in self.blocks])
        self.dim = int(self.offsets[-1])

    def _slices(self):
        return [slice(self.offsets[j], self.offsets[j + 1]) for j in range(len(self.blocks))]

    def project(self, z):
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        for blk, sl in zip(self.blocks, self._slices()):
            out[sl] = blk.project(z[sl])
        return out

    def membership(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return all(blk.membership(x[sl], tol) for blk, sl in zip(self.blocks, self._slices()))

    @property
    def is_full_space(self):
        return all(blk.is_full_space for blk in self.blocks)


class Intersection(SetOracle):
    tag = "intersection"

    def __init__(self, sets):
        self.sets = tuple(sets)
        dims = {s.dim for s in self.sets}
        if len(dims) != 1:
            raise InputError("intersected sets must share a dimension")
        self.dim = dims.pop()

    def project(self, z):
        z = np.asarray(z, dtype=float)
        if self.membership(z, 0.0):
            return z.copy()
        return dykstra([s.project for s in self.sets], z)

    def membership(self, x, tol=1e-9):
        return all(s.membership(x, tol) for s in self.sets)


class EpiAbsProduct(SetOracle):
    """``{(x, y) in R^n x R^n: y >= |x|, x in omega}``.

    Coordinates are ordered ``(x_1..x_n, y_1..y_n)``.  With ``omega`` the
    whole space the projection is the closed form applied pair by pair;
    otherwise Dykstra alternates between the cone and ``omega x R^n``.
    """

    tag = "epigraph-product"

    def __init__(self, n, omega=None):
        self.n = int(n)
        self.dim = 2 * self.n
        if omega is not None and omega.dim != self.n:
            raise InputError("omega dimension must equal n")
        self.omega = omega if omega is not None else FullSpace(self.n)

    def _project_cone(self, z):
        x, y = project_epigraph_abs(z[: self.n], z[self.n:])
        return np.concatenate([np.atleast_1d(x), np.atleast_1d(y)])

    def _project_omega(self, z):
        out = np.array(z, dtype=float)
        out[: self.n] = self.omega.project(z[: self.n])
        return out

    def project(self, z):
        z = np.asarray(z, dtype=float)
        if self.omega.is_full_space:
            return self._project_cone(z)
        if self.membership(z, 0.0):
            return z.copy()
        return dykstra([self._project_cone, self._project_omega], z)

    def membership(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x[self.n:] >= np.abs(x[: self.n]) - tol)) and self.omega.membership(
            x[: self.n], tol
        )

    @property
    def is_full_space(self):
        return False
