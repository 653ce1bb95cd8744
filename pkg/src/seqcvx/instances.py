"""Bundled test instances with their known properties."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .oracles import LeastSquares, Quadratic, WeightedL1
from .penalties import PenaltySpec, build_sparse_nlp, lift
from .problem import ProblemInstance
from .sets import Box

DEFAULT_SEED = 7


def make_rng(seed):
    """The PRNG used everywhere instance data is drawn: PCG64 seeded explicitly."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class InstanceLibraryEntry:
    """A named instance generator.

    ``known`` holds reference facts; every numeric fact names how it was
    obtained under the key ``oracle`` (``"analytic"`` or ``"grid"``).
    """

    name: str
    builder: object
    x0: object
    params: dict = field(default_factory=dict)
    known: dict = field(default_factory=dict)
    description: str = ""

    def problem(self, seed=None):
        params = dict(self.params)
        if seed is not None and "seed" in params:
            params["seed"] = int(seed)
        return self.builder(name=self.name, **params)

    def start(self, prob=None):
        x0 = self.x0(prob) if callable(self.x0) else self.x0
        return np.array(x0, dtype=float)

    def summary(self):
        return {"name": self.name, "params": self.params, "known": self.known,
                "description": self.description}


def dc1d(name="dc1d"):
    """``x^2 - 2|x|`` on ``[-2, 2]``; minimisers ``+-1`` with value ``-1``."""
    return ProblemInstance(1, f=Quadratic([[2.0]]), u=WeightedL1([2.0]), X=Box([-2.0], [2.0]), name=name)


def mba2d(name="mba2d"):
    """``||x||^2`` subject to ``||x - (2, 0)||^2 <= 1``; minimiser ``(1, 0)``."""
    return ProblemInstance(
        2, f=Quadratic(2 * np.eye(2)), g=(Quadratic(2 * np.eye(2), [-4.0, 0.0], 3.0),), name=name
    )


def sparse_ls(kind, n=20, rows=30, lam=0.1, seed=DEFAULT_SEED, name=None, **penalty):
    """Lifted sparse least squares with ``n`` unknowns and a seeded design.

    ``A`` has i.i.d. normal entries scaled by ``1/sqrt(rows)``, the signal
    has 4 nonzeros of size 1 to 2, and the noise level is 0.01.
    """
    rng = make_rng(seed)
    A = rng.standard_normal((rows, n)) / np.sqrt(rows)
    x_true = np.zeros(n)
    idx = rng.choice(n, 4, replace=False)
    x_true[idx] = rng.uniform(1.0, 2.0, 4) * rng.choice([-1.0, 1.0], 4)
    b = A @ x_true + 0.01 * rng.standard_normal(rows)
    spec = PenaltySpec(kind, lam, **penalty)
    prob = build_sparse_nlp(LeastSquares(A, b), None, spec, name or f"sparse_ls_{kind}")
    prob.meta["x_true"] = x_true
    return prob


def constrained_dc(name="constrained_dc"):
    """Indefinite quadratic with l1 terms and two DC constraints on a box."""
    return ProblemInstance(
        2,
        f=Quadratic([[2.0, 0.5], [0.5, -1.0]], [-1.0, 0.5]),
        p=WeightedL1([0.2, 0.2]),
        u=WeightedL1([0.5, 0.3]),
        g=(Quadratic(2 * np.eye(2), c=-4.0), Quadratic(np.zeros((2, 2)), [1.0, -1.0], -2.0, lipschitz=0.0)),
        q=(WeightedL1([0.5, 0.0]), WeightedL1([0.0, 0.3])),
        v=(Quadratic(np.diag([0.5, 0.2])), WeightedL1([0.2, 0.0])),
        X=Box([-3.0, -3.0], [3.0, 3.0]),
        name=name,
    )


def dca2d(name="dca2d"):
    """``||x||_1 - x'Qx/2`` on ``[-1, 1]^2``: a pure DC program with no smooth part."""
    return ProblemInstance(
        2, p=WeightedL1([1.0, 1.0]), u=Quadratic([[1.6, 0.8], [0.8, 1.6]]), X=Box([-1.0, -1.0], [1.0, 1.0]),
        name=name,
    )


_PENALTY_PARAMS = {
    "scad": {"a": 3.7},
    "capped": {"eta": 0.5},
    "log": {"eps": 0.5},
    "lq": {"q": 0.5, "eps": 0.1},
    "l1": {},
}
_PENALTY_KIND = {"capped": "capped_l1"}


def _sparse_entry(tag):
    kind = _PENALTY_KIND.get(tag, tag)
    params = {"kind": kind, "n": 20, "rows": 30, "lam": 0.1, "seed": DEFAULT_SEED, **_PENALTY_PARAMS[tag]}
    known = {"convex": True} if tag == "l1" else {}
    return InstanceLibraryEntry(
        f"sparse_ls_{tag}",
        lambda name, **kw: sparse_ls(name=name, **kw),
        lambda prob: lift(np.zeros(prob.meta["n"])),
        params,
        known,
        f"sparse least squares with the {kind} penalty, lifted to 40 variables",
    )


def bundled_instances():
    """All library entries, in a fixed order."""
    return [
        InstanceLibraryEntry(
            "dc1d", dc1d, [0.5], {},
            {"optimal_value": -1.0, "minimizers": [[-1.0], [1.0]], "oracle": "grid"},
            "one-dimensional DC program x^2 - 2|x| on [-2, 2]",
        ),
        InstanceLibraryEntry(
            "mba2d", mba2d, [2.0, 0.5], {},
            {"optimal_value": 1.0, "minimizers": [[1.0, 0.0]], "multipliers": [1.0], "oracle": "analytic"},
            "nearest point of a disc to the origin",
        ),
        *(_sparse_entry(tag) for tag in ("scad", "capped", "log", "lq", "l1")),
        InstanceLibraryEntry(
            "constrained_dc", constrained_dc, [0.0, 0.0], {}, {},
            "two-dimensional DC objective with two DC constraints",
        ),
        InstanceLibraryEntry(
            "dca2d", dca2d, [0.9, 0.2], {},
            {"optimal_value": -0.4, "minimizers": [[1.0, 1.0], [-1.0, -1.0]], "oracle": "analytic"},
            "pure DC program without a smooth part",
        ),
    ]


def get_instance(name):
    for entry in bundled_instances():
        if entry.name == name:
            return entry
    raise InputError(f"unknown instance {name!r}; see list-instances")
