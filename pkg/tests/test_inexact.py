import warnings

import numpy as np
import pytest

from seqcvx.errors import InputError
from seqcvx.exact import run_exact
from seqcvx.inexact import (
    ConvergenceRiskWarning,
    EpsSchedule,
    InexactOptions,
    dual_gap_monitor,
    run_inexact,
)
from seqcvx.instances import get_instance
from seqcvx.oracles import WeightedL1
from seqcvx.problem import ProblemInstance
from seqcvx.sets import Box
from seqcvx.trace import IterationRecord, SolverTrace


def start(name):
    entry = get_instance(name)
    prob = entry.problem()
    return prob, entry.start(prob)


def test_schedules():
    assert EpsSchedule("power", 1e-2, r=2)(0) == 1e-2
    assert EpsSchedule("power", 1e-2, r=2)(9) == pytest.approx(1e-4)
    assert EpsSchedule("geometric", 1.0, rho=0.5)(3) == 0.125
    assert EpsSchedule("constant", 0.3)(100) == 0.3
    assert EpsSchedule("power", r=2).summable and not EpsSchedule("power", r=1).summable
    assert not EpsSchedule("constant").summable
    assert EpsSchedule.from_dict({"kind": "geometric", "eps0": 2.0}).eps0 == 2.0
    with pytest.raises(InputError):
        EpsSchedule("linear")
    with pytest.raises(InputError):
        EpsSchedule("geometric", rho=1.5)


def test_non_summable_schedule_needs_opt_in():
    with pytest.raises(InputError):
        InexactOptions(eps_schedule=EpsSchedule("constant"))
    opts = InexactOptions(eps_schedule={"kind": "constant", "eps0": 1e-3}, require_summable=False)
    assert opts.eps_schedule.kind == "constant"


def test_mba2d_power_schedule():
    prob, x0 = start("mba2d")
    tr = run_inexact(prob, x0, InexactOptions(eps_schedule=EpsSchedule("power", 1e-2, r=2)))
    assert tr.termination == "kkt_tol"
    assert len(tr.records) <= 200
    assert tr.final.kkt_violation <= 1e-5
    assert tr.x_final == pytest.approx(run_exact(prob, x0).x_final, abs=1e-4)


def test_recorded_residuals_within_tolerance():
    prob, x0 = start("constrained_dc")
    tr = run_inexact(prob, x0)
    for r in tr.records:
        eps = r.extra["eps_k"]
        assert r.extra["stat_res"] <= eps and r.extra["feas_res"] <= eps and r.extra["comp_res"] <= eps


def test_huge_tolerance_still_runs():
    prob, x0 = start("mba2d")
    opts = InexactOptions(eps_schedule=EpsSchedule("geometric", 10.0, rho=0.5), max_outer=60)
    tr = run_inexact(prob, x0, opts)
    assert tr.termination in ("kkt_tol", "max_outer")
    assert tr.records[0].extra["eps_k"] == 10.0


def test_zero_curvature_warns():
    prob = ProblemInstance(1, p=WeightedL1([1.0]), u=WeightedL1([0.5]), X=Box([-1.0], [1.0]))
    with pytest.warns(ConvergenceRiskWarning):
        tr = run_inexact(prob, [0.5])
    assert tr.warnings


def test_infeasible_start_warns_but_runs():
    prob = get_instance("mba2d").problem()
    with pytest.warns(ConvergenceRiskWarning):
        tr = run_inexact(prob, [2.0, 1.5])
    assert tr.final.kkt_violation <= 1e-6


def test_start_outside_set_rejected():
    prob = get_instance("dc1d").problem()
    with pytest.raises(InputError):
        run_inexact(prob, [5.0])


def test_dual_gap_without_constraints_is_zero():
    prob, x0 = start("dc1d")
    assert dual_gap_monitor(run_inexact(prob, x0)) == 0.0
    assert dual_gap_monitor(SolverTrace("inexact", "empty")) == 0.0


def test_dual_gap_bounded_on_mba2d():
    prob, x0 = start("mba2d")
    tr = run_inexact(prob, x0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        value = dual_gap_monitor(tr)
    assert np.isfinite(value)


def test_dual_gap_warns_on_steady_growth():
    tr = SolverTrace("inexact", "synthetic")
    for k in range(8):
        rec = IterationRecord(k, np.zeros(1), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, np.zeros(1), 1, 1.0, np.ones(1))
        rec.extra["dual_gap_partial"] = float(k)
        tr.records.append(rec)
    with pytest.warns(ConvergenceRiskWarning):
        assert dual_gap_monitor(tr, window=5) == 7.0
    assert tr.warnings
