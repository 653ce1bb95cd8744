import numpy as np
import pytest

from seqcvx.errors import InputError
from seqcvx.exact import run_exact
from seqcvx.instances import bundled_instances, get_instance
from seqcvx.problem import evaluate_objective, is_feasible
from seqcvx.variant import (
    VariantOptions,
    bb_estimate,
    inner_iteration_bound,
    nonmonotone_reference,
    run_variant,
    safe_trial_bound,
)


def start(name):
    entry = get_instance(name)
    prob = entry.problem()
    return prob, entry.start(prob)


def test_bb_estimate():
    assert bb_estimate([1.0, 0.0], [3.0, 1.0], 1e-6, 1e8) == 3.0
    assert bb_estimate([0.0, 0.0], [3.0, 1.0], 0.5, 1e8) == 0.5
    assert bb_estimate([1.0], [-2.0], 0.5, 1e8) == 0.5
    assert bb_estimate([1.0], [1e9], 0.5, 1e8) == 1e8


def test_nonmonotone_reference():
    F = [5.0, 3.0, 4.0, 1.0]
    assert nonmonotone_reference(F, 3, 0) == 1.0
    assert nonmonotone_reference(F, 3, 1) == 4.0
    assert nonmonotone_reference(F, 3, 3) == 5.0
    assert nonmonotone_reference(F, 1, 10) == 5.0


def test_closed_form_bound_example():
    assert inner_iteration_bound(10.0, 1.0, 10.0, 1.0, 2.0) == 8
    assert inner_iteration_bound(10.0, 1.0, 0.0, 1.0, 2.0) is None


def test_safe_trial_bound():
    # l_f: 1 -> 8 needs 3 bumps to reach 5.5; l_g: 1 -> 16 needs 4 to reach 10.
    assert safe_trial_bound(10.0, [10.0], 1.0, 1.0, [1.0], 2.0, "separate") == 8
    assert safe_trial_bound(10.0, [10.0], 1.0, 1.0, [1.0], 2.0, "simultaneous") == 5
    assert safe_trial_bound(10.0, [10.0, 10.0], 1.0, 1.0, [1.0, 1.0], 2.0, "per_constraint") == 12
    assert safe_trial_bound(10.0, [], 1.0, 100.0, [], 2.0, "separate") == 1


def test_option_validation():
    for bad in ({"tau": 1.0}, {"c": 0.0}, {"L_min": 2.0, "L_max": 1.0}, {"M": -1},
                {"update_strategy": "both"}, {"init": "random"}, {"l_g0": [-1.0]}):
        with pytest.raises(InputError):
            VariantOptions(**bad)


@pytest.mark.parametrize("entry", bundled_instances(), ids=lambda e: e.name)
@pytest.mark.parametrize("tau,c", [(1.5, 0.1), (2.0, 1.0), (4.0, 0.1)])
def test_trials_within_bound(entry, tau, c):
    prob = entry.problem()
    tr = run_variant(prob, entry.start(prob), VariantOptions(tau=tau, c=c))
    for r in tr.records:
        assert r.trials <= r.extra["trial_bound"]
        assert all(is_feasible(prob, x, 1e-9) for x in tr.iterates())


@pytest.mark.parametrize("strategy", ["separate", "simultaneous", "per_constraint"])
def test_strategies_converge(strategy):
    prob, x0 = start("constrained_dc")
    tr = run_variant(prob, x0, VariantOptions(update_strategy=strategy))
    # The instance is nonconvex, so strategies may stop at different KKT points.
    assert tr.termination == "kkt_tol"
    assert tr.final.kkt_violation <= 1e-8
    assert tr.final.F <= tr.records[0].F


def test_per_constraint_bumps_only_violated():
    prob, x0 = start("constrained_dc")
    tr = run_variant(prob, x0, VariantOptions(update_strategy="per_constraint", init="constant", L_min=1e-3))
    infeasible = [r for r in tr.rejections if r.reason == "infeasible"]
    assert infeasible
    # Constraint curvatures move independently, so they differ somewhere.
    assert any(r.l_g[0] != r.l_g[1] for r in tr.rejections)


@pytest.mark.parametrize("strategy", ["separate", "per_constraint"])
def test_constraint_curvature_stays_below_tau_times_lipschitz(strategy):
    prob, x0 = start("constrained_dc")
    l_g0 = 1e-3
    tr = run_variant(prob, x0, VariantOptions(update_strategy=strategy, init="constant", L_min=l_g0))
    tried = [r.l_g for r in tr.rejections] + [r.l_g for r in tr.records]
    cap = np.maximum(l_g0, 2.0 * prob.L_g)
    for l_g in tried:
        if strategy == "per_constraint":
            assert np.all(l_g <= cap)
        else:
            assert np.max(l_g) <= np.max(cap)


def test_no_rejections_above_thresholds():
    for name in ("mba2d", "constrained_dc", "sparse_ls_scad"):
        prob, x0 = start(name)
        l_g0 = prob.L_g if prob.m else None
        opts = VariantOptions(M=0, init="constant", l_f0=prob.L_f, l_g0=l_g0, c=1e-4)
        tr = run_variant(prob, x0, opts)
        assert tr.rejections == []


def test_reduces_to_exact_method():
    for name in ("dc1d", "mba2d", "constrained_dc", "sparse_ls_capped"):
        prob, x0 = start(name)
        l_g0 = prob.L_g if prob.m else None
        ex = run_exact(prob, x0)
        va = run_variant(prob, x0, VariantOptions(M=0, init="constant", l_f0=max(prob.L_f, 1e-8), l_g0=l_g0))
        assert va.rejections == []
        assert len(va.records) == len(ex.records)
        for a, b in zip(va.records, ex.records):
            assert a.x == pytest.approx(b.x, abs=1e-10)


def test_monotone_when_window_is_zero():
    prob, x0 = start("constrained_dc")
    tr = run_variant(prob, x0, VariantOptions(M=0, L_min=0.01))
    for a, b in zip(tr.records, tr.records[1:]):
        assert b.F <= a.F + a.extra["slack"]


def test_accepted_steps_satisfy_window_predicate():
    prob, x0 = start("constrained_dc")
    opts = VariantOptions(M=5, L_min=0.01)
    tr = run_variant(prob, x0, opts)
    for r in tr.records:
        if "accepted_F" in r.extra:
            assert r.extra["accepted_F"] <= r.extra["ref"] - 0.5 * opts.c * r.step**2 + r.extra["slack"]
    F = tr.objective_values()
    assert np.any(np.diff(F) > 0)


def test_rejection_records_reasons():
    prob, x0 = start("mba2d")
    tr = run_variant(prob, x0)
    assert {r.reason for r in tr.rejections} <= {"infeasible", "insufficient_decrease"}
    assert all(r.k < len(tr.records) for r in tr.rejections)
    assert evaluate_objective(prob, tr.x_final) == pytest.approx(1.0, abs=1e-6)


def test_noise_slack_is_tiny():
    prob, x0 = start("constrained_dc")
    opts = VariantOptions()
    tr = run_variant(prob, x0, opts)
    for r in tr.records:
        if r.extra.get("slack", 0.0) > 0:
            assert 0.5 * opts.c * r.step**2 <= r.extra["slack"] <= 1e-6


def test_unconstrained_warning():
    prob, x0 = start("dc1d")
    assert run_variant(prob, x0).warnings
