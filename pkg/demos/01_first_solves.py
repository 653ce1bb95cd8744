"""First solves: a one-dimensional DC program and a disc-constrained quadratic.

Run with ``python3 demos/01_first_solves.py``.

``dc1d`` minimises x^2 - 2|x| on [-2, 2].  The subtracted |x| is replaced
by its linearisation at the current point, so each model is a convex
quadratic and the method jumps straight to the minimiser x = 1.

``mba2d`` finds the point of the disc ||x - (2, 0)|| <= 1 closest to the
origin.  The constraint is replaced by a ball inside the true disc, so
every iterate is feasible.
"""

from seqcvx import get_instance, kkt_residual, run_exact

for name in ("dc1d", "mba2d"):
    entry = get_instance(name)
    prob = entry.problem()
    trace = run_exact(prob, entry.start(prob))
    print(f"{name}: {entry.description}")
    for rec in trace.records:
        print(f"  k={rec.k}  x={rec.x.round(8).tolist()}  F={rec.F:.10f}  step={rec.step:.2e}")
    fin = trace.final
    res = kkt_residual(prob, fin.x, fin.multipliers)
    print(f"  stopped by {trace.termination}; KKT violation {res.violation:.1e}, "
          f"multipliers {fin.multipliers.round(6).tolist()}\n")
