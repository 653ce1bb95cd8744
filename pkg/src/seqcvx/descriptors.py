"""Build problems from JSON-style descriptors.

A problem descriptor looks like::

    {"dim": 2,
     "set": {"box": {"lo": [-1, -1], "hi": [1, 1]}},
     "objective": {"f": {"quadratic": {"Q": [[2, 0], [0, 2]]}},
                   "p": {"l1": {"weight": 0.1}}},
     "constraints": [{"g": {"quadratic": {...}}, "q": {"zero": {}}}]}

A missing ``set`` means the whole space and missing oracles are zero.
Alternatively ``{"sparse_nlp": {"loss": ..., "omega": ..., "penalty": ...}}``
builds the lifted sparse program.
"""

import json
import os

import numpy as np

from .errors import InputError
from .oracles import LeastSquares, Quadratic, WeightedL1, Zero, custom_oracle
from .penalties import PenaltySpec, PenaltyU, build_sparse_nlp
from .problem import ProblemInstance
from .sets import Ball, Box, EpiAbsProduct, FullSpace, Halfspaces, Intersection, Product


def _single(d, what):
    if not isinstance(d, dict) or len(d) != 1:
        raise InputError(f"{what} descriptor must be a one-key object, got {d!r}")
    return next(iter(d.items()))


def build_set(d, dim):
    """Set oracle from a descriptor; None gives the whole space."""
    if d is None:
        return FullSpace(dim)
    kind, a = _single(d, "set")
    if kind == "full":
        return FullSpace(dim)
    if kind == "box":
        return Box(np.broadcast_to(np.asarray(a["lo"], float), (dim,)),
                   np.broadcast_to(np.asarray(a["hi"], float), (dim,)))
    if kind == "ball":
        return Ball(a["center"], a["radius"])
    if kind == "halfspaces":
        return Halfspaces(a["A"], a["b"])
    if kind == "epi_abs_product":
        n = dim // 2
        omega = a.get("omega") if isinstance(a, dict) else None
        return EpiAbsProduct(n, None if omega is None else build_set(omega, n))
    if kind == "product":
        blocks, used = [], 0
        for blk in a:
            if "dim" not in blk:
                raise InputError("product blocks need a 'dim'")
            bdim = int(blk["dim"])
            blocks.append(build_set(blk.get("set"), bdim))
            used += bdim
        if used != dim:
            raise InputError("product block dimensions do not add up")
        return Product(blocks)
    if kind == "intersection":
        return Intersection([build_set(s, dim) for s in a])
    raise InputError(f"unknown set kind {kind!r}")


def build_oracle(d, dim):
    """Oracle from a descriptor; None gives zero."""
    if d is None:
        return Zero(dim)
    kind, a = _single(d, "oracle")
    a = a or {}
    if kind == "zero":
        return Zero(dim)
    if kind == "quadratic":
        return Quadratic(a["Q"], a.get("b"), a.get("c", 0.0), a.get("lipschitz"))
    if kind == "least_squares":
        return LeastSquares(a["A"], a["b"], a.get("lipschitz"))
    if kind == "l1":
        if "weights" in a:
            return WeightedL1(a["weights"])
        return WeightedL1(np.full(dim, float(a.get("weight", 1.0))))
    if kind == "penalty":
        spec = PenaltySpec.from_dict(a["spec"])
        return PenaltyU(spec, dim, a.get("start", 0), a.get("size"))
    if kind == "custom":
        return custom_oracle(a["name"], a.get("params"))
    raise InputError(f"unknown oracle kind {kind!r}")


def load_problem(desc, name=None):
    """Problem from a descriptor dict or a path to a JSON file."""
    if isinstance(desc, (str, os.PathLike)):
        path = os.fspath(desc)
        with open(path) as fh:
            desc = json.load(fh)
        name = name or os.path.splitext(os.path.basename(path))[0]
    if not isinstance(desc, dict):
        raise InputError("problem descriptor must be a JSON object")
    name = desc.get("name", name or "problem")
    if "sparse_nlp" in desc:
        s = desc["sparse_nlp"]
        loss = build_oracle(s["loss"], None)
        omega = s.get("omega")
        omega = None if omega is None else build_set(omega, loss.dim)
        return build_sparse_nlp(loss, omega, PenaltySpec.from_dict(s["penalty"]), name)
    try:
        dim = int(desc["dim"])
    except (KeyError, TypeError, ValueError):
        raise InputError("problem descriptor needs an integer 'dim'") from None
    obj = desc.get("objective", {})
    unknown = set(obj) - {"f", "p", "u"}
    if unknown:
        raise InputError(f"unknown objective parts {sorted(unknown)}")
    cons = desc.get("constraints", [])
    if "m" in desc and int(desc["m"]) != len(cons):
        raise InputError("'m' disagrees with the number of constraints")
    return ProblemInstance(
        dim=dim,
        f=build_oracle(obj.get("f"), dim),
        p=build_oracle(obj.get("p"), dim),
        u=build_oracle(obj.get("u"), dim),
        g=tuple(build_oracle(c.get("g"), dim) for c in cons),
        q=tuple(build_oracle(c.get("q"), dim) for c in cons),
        v=tuple(build_oracle(c.get("v"), dim) for c in cons),
        X=build_set(desc.get("set"), dim),
        name=name,
    )


def load_point(desc):
    """``(x, multipliers)`` from ``{"x": [...], "multipliers": [...]}`` or a path."""
    if isinstance(desc, (str, os.PathLike)):
        with open(desc) as fh:
            desc = json.load(fh)
    if isinstance(desc, list):
        return np.asarray(desc, dtype=float), None
    if "x" not in desc:
        raise InputError("point descriptor needs 'x'")
    lam = desc.get("multipliers", desc.get("lambda"))
    return np.asarray(desc["x"], dtype=float), None if lam is None else np.asarray(lam, dtype=float)
