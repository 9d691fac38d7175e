"""One Gauss point of the slope benchmark, driven through each return type.

The Drucker-Prager cone (friction angle 20 deg, cohesion 50 kPa) is loaded by
trial stresses chosen to land inside the cone, beside its smooth face, and in
the region that maps onto the apex.  The return type is known before any
iteration, the stress afterwards satisfies the yield condition, and the
consistent tangent matches a finite-difference derivative of the stress map.
The last section repeats the smooth case with the generic corrector.
"""
import numpy as np

from returnmap import DruckerPragerModel, TrialState, generic_return_map, invariants, presets
from returnmap import drucker_prager as dp, tensors as tn
from returnmap.state import integrate

params = presets.dp_associative()
print(f"eta = {params.eta:.6f}, xi = {params.xi:.6f}, apex pressure = {params.xi * params.c0 / params.eta:.3f} kPa")

# p is the mean stress (tension positive), rho the deviatoric norm.  K is about
# 50 times G, so only trials with small rho near the tension side reach the apex.
cases = {"elastic": (0.0, 30.0), "smooth": (-50.0, 200.0), "apex": (200.0, 2.0)}
names = {0: "elastic", 1: "smooth", 2: "apex"}
for label, (p_tr, rho_tr) in cases.items():
    res = dp.return_map(TrialState.from_invariants(p_tr, rho_tr), params)
    inv = invariants(res.sigma)
    f = dp.yield_function(inv.p, inv.rho, 0.0, params)
    print(f"{label:8} trial p = {p_tr:7.1f} rho = {rho_tr:6.1f}  ->  {names[int(res.kind)]:7} "
          f"p = {float(inv.p):8.3f} rho = {float(inv.rho):7.3f}  f = {float(f):+.1e}  dlam = {float(res.delta_lambda):.3e}")

# consistent tangent vs central differences of the strain-to-stress map
eps = tn.elastic_inverse(params.moduli, TrialState.from_invariants(-50.0, 200.0).sigma_tr)


def stress(e):
    return integrate(params, e[None], np.zeros((1, 6)), np.zeros(1), tangent=False).sigma[0]


A = integrate(params, eps[None], np.zeros((1, 6)), np.zeros(1)).tangent[0]
h = 1e-6 * np.linalg.norm(eps)
fd = np.column_stack([(stress(eps + h * e) - stress(eps - h * e)) / (2 * h) for e in np.eye(6)])
print(f"\ntangent vs finite differences: relative error {np.linalg.norm(A - fd) / np.linalg.norm(A):.1e}")
print(f"tangent asymmetry (associative flow): {np.linalg.norm(A - A.T) / np.linalg.norm(A):.1e}")

# the generic corrector solves one semismooth system for both return types
trial = TrialState.from_invariants(np.array([-50.0, 200.0]), np.array([200.0, 2.0]))
ded = dp.return_map(trial, params)
gen = generic_return_map(trial, DruckerPragerModel(params))
print(f"generic vs dedicated stress: max difference {np.max(np.abs(gen.sigma - ded.sigma)):.1e} kPa, "
      f"kinds {gen.kind.tolist()} vs {ded.kind.tolist()}")
