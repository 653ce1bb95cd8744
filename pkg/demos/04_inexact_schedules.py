"""Inexact subproblem solves with decreasing tolerances.

Run with ``python3 demos/04_inexact_schedules.py``.

The inexact method stops each subproblem solve as soon as its stationarity,
feasibility and complementarity residuals fall below eps_k.  Early
iterations are cheap; the tolerance shrinks as the iterates settle.
The partial sums of multiplier changes stay bounded on this instance.
"""

from seqcvx import EpsSchedule, InexactOptions, dual_gap_monitor, get_instance, run_exact, run_inexact

entry = get_instance("mba2d")
prob = entry.problem()
x0 = entry.start(prob)
exact = run_exact(prob, x0, None)
print(f"{'schedule':>28} {'outer':>6} {'inner':>6} {'final KKT':>10} {'gap sum':>10}")
print(f"{'exact solves':>28} {exact.outer_iterations:>6} {exact.total_inner:>6} "
      f"{exact.final.kkt_violation:>10.1e} {'':>10}")
for sched in (EpsSchedule("power", 1e-2, r=2), EpsSchedule("power", 1e-1, r=1.5),
              EpsSchedule("geometric", 1e-1, rho=0.5)):
    trace = run_inexact(prob, x0, InexactOptions(eps_schedule=sched))
    label = f"{sched.kind}(eps0={sched.eps0:g})"
    print(f"{label:>28} {trace.outer_iterations:>6} {trace.total_inner:>6} "
          f"{trace.final.kkt_violation:>10.1e} {dual_gap_monitor(trace):>10.2e}")
