"""Nearest point of the wedge {w1 + |w2| <= 1}: the smallest problem with an apex.

The projection has three outcomes.  Points inside are left alone, points
beside a face drop onto that face, and points in the normal cone of the apex
all land on the apex (1, 0).  The multiplier of a single formula,
    lam = z1 - 1 + max(|z2| - z1 + 1, 0) / 2,
picks the right outcome without testing which face is active.
"""
import numpy as np

from returnmap.solver import project_wedge_2d, project_wedge_batch

names = {0: "inside", 1: "face", 2: "apex"}
for z in [(0.0, 0.0), (1.0, 1.0), (1.0, -1.0), (2.0, 0.0), (3.0, 1.5), (-2.0, 4.0)]:
    w, lam, kind = project_wedge_2d(np.array(z))
    print(f"z = {z!s:12}  ->  w = ({w[0]:+.3f}, {w[1]:+.3f})  lam = {lam:.3f}  {names[int(kind)]}")

# the batch version agrees and is vectorized
rng = np.random.default_rng(0)
z = rng.uniform(-3.0, 3.0, (100_000, 2))
w, lam, kind = project_wedge_batch(z)
counts = np.bincount(kind, minlength=3)
print("\n1e5 random points:", ", ".join(f"{names[k]} {counts[k]}" for k in range(3)))
print("max constraint violation:", float(np.max(w[:, 0] + np.abs(w[:, 1]) - 1.0)))
