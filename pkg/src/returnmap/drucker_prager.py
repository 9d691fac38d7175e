"""Drucker-Prager plasticity with nonassociative flow and isotropic hardening.

Yield function and plastic pseudo-potential::

    f = rho / sqrt(2) + eta p - xi (c0 + kappa),    kappa = H(eps_bar_p)
    g = rho / sqrt(2) + eta_bar p

The deviatoric part of the discrete flow rule is written with a positive
part, ``rho = (rho_tr - dlam G sqrt(2))^+``, which turns the apex/smooth
alternative into a single scalar equation ``q_tr(dlam) = 0``.  Because
``q_tr`` is continuous and decreasing, the sign of ``q_tr`` at
``rho_tr / (G sqrt(2))`` tells in advance which return takes place.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensors as tn
from ._roots import solve_decreasing
from .hardening import HardeningCurve, ZeroHardening
from .state import ReturnKind, ReturnMapResult, TrialState, as_batch, as_result

INV_SQRT2 = 1.0 / tn.SQRT2


@dataclass(frozen=True)
class DPParams:
    eta: float
    eta_bar: float
    xi: float
    c0: float
    moduli: tn.ElasticModuli
    hardening: HardeningCurve = field(default_factory=ZeroHardening)

    def __post_init__(self):
        for name in ("eta", "eta_bar", "xi"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.c0 < 0:
            raise ValueError(f"c0 must be nonnegative, got {self.c0}")

    @property
    def associative(self) -> bool:
        return self.eta == self.eta_bar

    @property
    def stress_scale(self) -> float:
        return self.xi * (self.c0 + 1.0)

    def return_map(self, trial: TrialState, tangent: bool = True) -> ReturnMapResult:
        return return_map(trial, self, tangent=tangent)


def params_from_angles(phi, psi, c0, moduli, hardening=None) -> DPParams:
    """Plane-strain matching of Mohr-Coulomb friction/dilatancy angles (radians)."""
    if not 0.0 < phi < np.pi / 2:
        raise ValueError("friction angle must lie in (0, pi/2)")
    if not 0.0 <= psi <= phi:
        raise ValueError("dilatancy angle must lie in [0, phi]")
    tphi, tpsi = np.tan(phi), np.tan(psi)
    root_phi = np.sqrt(9.0 + 12.0 * tphi**2)
    eta = 3.0 * tphi / root_phi
    eta_bar = 3.0 * tpsi / np.sqrt(9.0 + 12.0 * tpsi**2)
    xi = 3.0 / root_phi
    return DPParams(eta=float(eta), eta_bar=float(eta_bar), xi=float(xi), c0=c0,
                    moduli=moduli, hardening=hardening or ZeroHardening())


def yield_function(p, rho, kappa, params: DPParams):
    return INV_SQRT2 * np.asarray(rho) + params.eta * np.asarray(p) - params.xi * (params.c0 + np.asarray(kappa))


def q_tr(gamma, trial: TrialState, params: DPParams):
    """Yield function along the return path as a function of the multiplier."""
    K, G = params.moduli.K, params.moduli.G
    gamma = np.asarray(gamma, dtype=float)
    rho = np.maximum(trial.rho_tr - gamma * G * tn.SQRT2, 0.0)
    p = trial.p_tr - gamma * K * params.eta_bar
    kappa = params.hardening(trial.eps_bar_p_tr + gamma * params.xi)
    return yield_function(p, rho, kappa, params)


def _smooth_multiplier(p, rho, ebar, q0, upper, params, closed):
    K, G = params.moduli.K, params.moduli.G
    eta, eta_bar, xi, H = params.eta, params.eta_bar, params.xi, params.hardening
    if closed:
        return q0 / (G + K * eta * eta_bar + xi * xi * H.slope)

    def fun(g):
        return INV_SQRT2 * rho - g * G + eta * (p - g * K * eta_bar) - xi * (params.c0 + H(ebar + g * xi))

    def dfun(g):
        return -G - K * eta * eta_bar - xi * xi * H.left_derivative(ebar + g * xi)

    ftol = 1e-14 * (np.abs(eta * p) + rho + params.stress_scale + xi * H(ebar))
    return solve_decreasing(fun, dfun, np.zeros_like(p), upper, np.zeros_like(p), ftol)


def _apex_multiplier(p, ebar, g_edge, q_edge, params, closed):
    K = params.moduli.K
    eta, eta_bar, xi, H = params.eta, params.eta_bar, params.xi, params.hardening
    if closed:
        return (eta * p - xi * params.c0 - xi * H(ebar)) / (K * eta * eta_bar + xi * xi * H.slope)

    def fun(g):
        # grouped like the closed form so both round the same way near the apex
        return (eta * p - xi * (params.c0 + H(ebar + g * xi))) - g * (K * eta * eta_bar)

    def dfun(g):
        return -K * eta * eta_bar - xi * xi * H.left_derivative(ebar + g * xi)

    # H nondecreasing => fun decreases at least with slope K eta eta_bar
    ftol = 1e-14 * (np.abs(eta * p) + params.stress_scale + xi * H(ebar))
    # slack covers rounding differences between q_edge and fun(g_edge)
    upper = g_edge + (q_edge * (1.0 + 1e-12) + 4.0 * ftol) / (K * eta * eta_bar) + 1e-300
    return solve_decreasing(fun, dfun, g_edge, upper, g_edge, ftol)


def return_map(trial: TrialState, params: DPParams, tangent: bool = True,
               method: str = "auto") -> ReturnMapResult:
    """Implicit Euler corrector with an a-priori choice of the return type.

    ``method="newton"`` forces the iterative scalar solve even when the
    hardening law admits a closed-form multiplier.
    """
    if method not in ("auto", "newton"):
        raise ValueError(f"unknown method {method!r}")
    batched = trial.batched
    t = as_batch(trial)
    K, G = params.moduli.K, params.moduli.G
    p, rho, ebar = t.p_tr, t.rho_tr, t.eps_bar_p_tr
    closed = method == "auto" and params.hardening.is_linear

    q0 = q_tr(0.0, t, params)
    g_edge = rho / (G * tn.SQRT2)
    q_edge = q_tr(g_edge, t, params)
    plastic = q0 > 0.0
    apex = plastic & (q_edge >= 0.0)
    smooth = plastic & ~apex

    dlam = np.zeros_like(p)
    if np.any(smooth):
        i = smooth
        dlam[i] = _smooth_multiplier(p[i], rho[i], ebar[i], q0[i], g_edge[i], params, closed)
    if np.any(apex):
        i = apex
        dlam[i] = _apex_multiplier(p[i], ebar[i], g_edge[i], q_edge[i], params, closed)

    sigma = t.sigma_tr.copy()
    flow = G * tn.SQRT2 * t.n_tr + K * params.eta_bar * tn.IDENTITY
    sigma[smooth] -= dlam[smooth, None] * flow[smooth]
    sigma[apex] = (p[apex] - dlam[apex] * K * params.eta_bar)[:, None] * tn.IDENTITY

    kind = np.full(p.shape, ReturnKind.ELASTIC, dtype=np.int8)
    kind[smooth] = ReturnKind.SMOOTH
    kind[apex] = ReturnKind.APEX
    result = ReturnMapResult(sigma=sigma, eps_bar_p=ebar + dlam * params.xi,
                             delta_lambda=dlam, kind=kind)
    if tangent:
        result.tangent = consistent_tangent(result, t, params)
    return as_result(result, batched)


def consistent_tangent(result: ReturnMapResult, trial: TrialState, params: DPParams):
    """Generalized derivative of the stress-strain map (6x6 per point).

    The hardening slope is the left derivative of ``H`` at the updated
    hardening variable.
    """
    t = as_batch(trial)
    kind = np.atleast_1d(result.kind)
    dlam = np.atleast_1d(result.delta_lambda)
    ebar = np.atleast_1d(result.eps_bar_p)
    K, G = params.moduli.K, params.moduli.G
    eta, eta_bar, xi = params.eta, params.eta_bar, params.xi
    h1 = params.hardening.left_derivative(ebar)

    out = np.broadcast_to(params.moduli.stiffness, kind.shape + (6, 6)).copy()
    smooth = kind == ReturnKind.SMOOTH
    if np.any(smooth):
        n = t.n_tr[smooth]
        rho = t.rho_tr[smooth]
        dl = dlam[smooth]
        proj = tn.I_DEV - tn.outer(n, n)
        a = G * tn.SQRT2 * n + K * eta_bar * tn.IDENTITY
        b = G * tn.SQRT2 * n + K * eta * tn.IDENTITY
        denom = G + K * eta * eta_bar + xi * xi * h1[smooth]
        out[smooth] -= (dl * 2.0 * G * G * tn.SQRT2 / rho)[:, None, None] * proj
        out[smooth] -= tn.outer(a, b) / denom[:, None, None]
    apex = kind == ReturnKind.APEX
    if np.any(apex):
        kee = K * eta * eta_bar
        coef = K * (1.0 - kee / (kee + xi * xi * h1[apex]))
        out[apex] = coef[:, None, None] * np.outer(tn.IDENTITY, tn.IDENTITY)
    return out if trial.batched else out[0]
