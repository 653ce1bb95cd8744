import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqcvx.errors import InputError
from seqcvx.exact import run_exact
from seqcvx.oracles import Quadratic
from seqcvx.penalties import (
    PenaltySpec,
    PenaltyU,
    build_sparse_nlp,
    lift,
    penalty_derivative,
    penalty_value,
    sparse_objective,
    u_subgradient,
    u_value,
)
from seqcvx.problem import check_oracles, evaluate_objective, is_feasible

SCAD = PenaltySpec("scad", 1.0, a=3.7)


def sweep():
    """Every kind over the documented parameter grid."""
    for lam in (0.1, 1.0, 10.0):
        yield PenaltySpec("l1", lam)
        for a in (2.1, 3.7):
            yield PenaltySpec("scad", lam, a=a)
        for q, eps in itertools.product((0.25, 0.5), (1e-2, 1.0)):
            yield PenaltySpec("lq", lam, q=q, eps=eps)
        for eps in (1e-2, 1.0):
            yield PenaltySpec("log", lam, eps=eps)
        for eta in (0.1, 1.0):
            yield PenaltySpec("capped_l1", lam, eta=eta)


def test_scad_values():
    assert penalty_value(SCAD, 1.0) == 1.0
    assert penalty_value(SCAD, 3.7) == pytest.approx(2.35, abs=1e-15)
    # Middle branch, cross-checked against the limits of the outer branches.
    assert penalty_value(SCAD, 2.0) == pytest.approx(1.8148148148148149, abs=1e-15)


def test_capped_value():
    assert penalty_value(PenaltySpec("capped_l1", 2.0, eta=0.5), 3.0) == 1.0


def test_values_at_zero():
    assert penalty_value(PenaltySpec("log", 1.0, eps=1.0), 0.0) == 0.0
    lq = PenaltySpec("lq", 2.0, q=0.5, eps=0.25)
    assert penalty_value(lq, 0.0) == pytest.approx(2.0 * 0.5)


def test_negative_argument_rejected():
    with pytest.raises(InputError):
        penalty_value(SCAD, -0.1)
    with pytest.raises(InputError):
        u_value(SCAD, [1.0, -1.0])


def test_spec_validation_and_json():
    with pytest.raises(InputError):
        PenaltySpec("scad", 1.0, a=1.0)
    with pytest.raises(InputError):
        PenaltySpec("lq", 1.0, q=1.5)
    with pytest.raises(InputError):
        PenaltySpec("mcp", 1.0)
    with pytest.raises(InputError):
        PenaltySpec("l1", 0.0)
    spec = PenaltySpec.from_dict({"kind": "scad", "lambda": 1.0, "a": 3.7})
    assert spec == SCAD
    assert PenaltySpec.from_dict(spec.to_dict()) == spec
    assert PenaltySpec("CappedL1", 1.0).kind == "capped_l1"


def test_u_values():
    assert u_value(PenaltySpec("l1", 0.7), [0.0, 3.0, 9.0]) == 0.0
    assert u_value(PenaltySpec("log", 1.0, eps=1.0), [0.0, 0.0]) == 0.0
    assert u_value(SCAD, [5.0]) == pytest.approx(2.65, abs=1e-15)


def test_u_subgradients():
    assert np.all(u_subgradient(PenaltySpec("l1", 2.0), [0.0, 1.0, 5.0]) == 0.0)
    assert u_subgradient(SCAD, [5.0])[0] == 1.0
    assert u_subgradient(PenaltySpec("capped_l1", 2.0, eta=0.5), [0.2])[0] == 0.0


def test_right_derivative_at_kinks():
    assert penalty_derivative(SCAD, 1.0) == pytest.approx((3.7 - 1.0) / 2.7)
    assert penalty_derivative(SCAD, 1.0, "left") == 1.0
    cap = PenaltySpec("capped_l1", 2.0, eta=0.5)
    assert penalty_derivative(cap, 0.5) == 0.0
    assert penalty_derivative(cap, 0.5, "left") == 2.0
    assert penalty_derivative(cap, 0.0, "left") == 2.0


@pytest.mark.parametrize("spec", list(sweep()), ids=lambda s: f"{s.kind}-{s.lam}-{s.a}-{s.q}-{s.eps}-{s.eta}")
def test_split_properties_on_grid(spec):
    t = np.linspace(0.0, 20.0, 10000)
    h = penalty_value(spec, t)
    assert np.all(np.diff(h) >= -1e-12)
    r = spec.lam * t - h
    assert np.all(r[2:] - 2 * r[1:-1] + r[:-2] >= -1e-10)
    for k in spec.kinks:
        left, right = penalty_value(spec, k * (1 - 1e-13)), penalty_value(spec, k * (1 + 1e-13))
        assert abs(left - right) <= 1e-12 * max(1.0, k * spec.lam)


@pytest.mark.parametrize("spec", list(sweep())[:12])
def test_u_subgradient_inequality(spec):
    rng = np.random.default_rng(5)
    for _ in range(1000):
        y, z = rng.uniform(0, 6, (2, 3))
        y[rng.random(3) < 0.2] = 0.0
        assert u_value(spec, z) >= u_value(spec, y) + u_subgradient(spec, y) @ (z - y) - 1e-9


def test_lifted_objective_matches_original():
    rng = np.random.default_rng(6)
    A, b = rng.standard_normal((6, 4)), rng.standard_normal(6)
    from seqcvx.oracles import LeastSquares

    loss = LeastSquares(A, b)
    for spec in sweep():
        prob = build_sparse_nlp(loss, None, spec)
        x = rng.standard_normal(4)
        assert evaluate_objective(prob, lift(x)) == pytest.approx(sparse_objective(loss, spec, x), abs=1e-12)


def test_lifted_instance_structure():
    spec = PenaltySpec("log", 0.5, eps=0.1)
    prob = build_sparse_nlp(Quadratic(np.eye(3)), None, spec)
    assert prob.dim == 6 and prob.m == 0
    assert prob.p.l1_weights.tolist() == [0, 0, 0, 0.5, 0.5, 0.5]
    assert is_feasible(prob, lift([1.0, -2.0, 0.0]))
    assert not is_feasible(prob, [1.0, 0.0, 0.0, 0.5, 0.0, 0.0])
    assert check_oracles(prob, n_pairs=200) == []


def one_dim_loss():
    # (x - 1)^2 as 0.5 x'Qx + bx + c
    return Quadratic([[2.0]], [-2.0], 1.0)


def best_of_starts(spec):
    prob = build_sparse_nlp(one_dim_loss(), None, spec)
    vals = [run_exact(prob, lift([s])).final.F for s in (-2.0, 0.0, 0.5, 2.0)]
    return min(vals)


def test_lifted_l1_optimum_matches_grid():
    # Grid search of (x-1)^2 + 0.5|x| with step 1e-4: 0.4375 at x = 0.75.
    assert best_of_starts(PenaltySpec("l1", 0.5)) == pytest.approx(0.4375, abs=1e-6)


def test_lifted_capped_optimum_matches_grid():
    # Grid search of (x-1)^2 + min(|x|, 0.5) over [-3, 3]: 0.5 at x = 1.
    assert best_of_starts(PenaltySpec("capped_l1", 1.0, eta=0.5)) == pytest.approx(0.5, abs=1e-3)


def test_penalty_u_oracle_block():
    u = PenaltyU(SCAD, 4, start=2)
    z = np.array([-7.0, 3.0, 0.5, 5.0])
    assert u.value(z) == pytest.approx(u_value(SCAD, [0.5, 5.0]))
    assert u.subgradient(z)[:2].tolist() == [0.0, 0.0]
    with pytest.raises(InputError):
        u.value(np.array([0.0, 0.0, -1.0, 0.0]))
    lo, hi = u.subdiff_bounds(np.array([0.0, 0.0, 1.0, 0.0]))
    assert lo[2] <= hi[2]


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 30), st.floats(0, 30), st.floats(0, 1))
def test_scad_split_is_midpoint_convex(s, t, th):
    def r(v):
        return SCAD.lam * v - penalty_value(SCAD, v)

    mid = th * s + (1 - th) * t
    assert r(mid) <= th * r(s) + (1 - th) * r(t) + 1e-12
