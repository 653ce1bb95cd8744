"""Curvature search and nonmonotone acceptance.

Run with ``python3 demos/03_curvature_search.py``.

The variant method does not need global Lipschitz constants.  It starts
each iteration from a spectral estimate of the local curvature and
multiplies it by tau until the model step is feasible and decreases the
objective below the largest of the last M + 1 values.  With a window
M > 0 the objective may rise for a while, as the trace below shows.
"""

import numpy as np

from seqcvx import VariantOptions, get_instance, run_exact, run_variant

entry = get_instance("constrained_dc")
prob = entry.problem()
x0 = entry.start(prob)

exact = run_exact(prob, x0)
print(f"exact method: {exact.outer_iterations} outer iterations, F = {exact.final.F:.10f}")

for M in (0, 5):
    opts = VariantOptions(M=M, tau=4.0)
    trace = run_variant(prob, x0, opts)
    F = trace.objective_values()
    rises = np.flatnonzero(np.diff(F) > 1e-9)
    print(f"\nvariant with M={M}: {trace.outer_iterations} outer iterations, "
          f"{len(trace.rejections)} rejected trials, F = {trace.final.F:.10f}")
    print(f"  objective rises after k = {rises.tolist() or 'never'}")
    for rec in trace.records[:6]:
        print(f"  k={rec.k}  F={rec.F:+.6f}  trials={rec.trials}  l_f={rec.l_f:.3g}  "
              f"l_g={[float(f'{v:.3g}') for v in rec.l_g]}")
    reasons = {}
    for rej in trace.rejections:
        reasons[rej.reason] = reasons.get(rej.reason, 0) + 1
    print(f"  rejections by reason: {reasons}")
