"""Limit load of a homogeneous slope under gravity, by incremental loading.

The self-weight is scaled by a factor zeta that grows in steps of 0.1.  Steps
that fail to converge are halved, and collapse is declared once the step
falls below 1e-4.  The last accepted zeta is the limit load factor.  The
coarsest quad8 mesh runs in about 15 s.

    python demos/slope_limit_analysis.py [preset] [level]
"""
import sys
import time

import numpy as np

from returnmap.benchmark import run_slope

preset = sys.argv[1] if len(sys.argv) > 1 else "dp-associative"
level = int(sys.argv[2]) if len(sys.argv) > 2 else 1

t0 = time.perf_counter()
run = run_slope(preset, level, "quad8",
                progress=lambda zeta, newton: print(f"  zeta = {zeta:.5f}  iterations = {newton.iters}"))
curve = run.result.curve
print(f"\n{preset}, level {level}: {run.mesh.n_nodes} nodes, {run.mesh.n_elements} elements")
print(f"limit load factor {run.result.limit_factor:.4f} "
      f"({'collapse' if run.result.collapsed else 'no collapse'}), "
      f"{len(curve)} accepted steps, {run.result.failed_attempts} halvings, "
      f"{time.perf_counter() - t0:.1f} s")
settle = np.array(curve.settlement)
print(f"crest settlement at the limit: {settle[-1] * 1000:.2f} mm "
      f"(at half the limit load: {np.interp(curve.zeta[-1] / 2, curve.zeta, settle) * 1000:.2f} mm)")
