"""Perfectly plastic part of the Jirasek-Grassl concrete model.

Yield function and pseudo-potential in Haigh-Westergaard coordinates::

    f = 3/2 (rho / fc)^2 + m0 (rho_e / (sqrt6 fc) + p / fc) - 1
    g = 3/2 (rho / fc)^2 + m0 rho / (sqrt6 fc) + m_g(p) / fc
    m_g(p) = Ag Bg fc exp((p - ft/3) / (Bg fc))

The surface has a single apex at ``(p, rho) = (fc / m0, 0)``.  Whether the
corrector returns to it is decided in closed form from the trial state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensors as tn
from ._roots import solve_decreasing
from .drucker_prager import params_from_angles
from .state import (CorrectorFailure, ReturnKind, ReturnMapResult, TrialState,
                    as_batch, as_result)

MAX_NEWTON = 50
MAX_HALVINGS = 30


@dataclass(frozen=True)
class JGParams:
    m0: float
    fc_bar: float
    ft_bar: float
    Ag: float
    Bg: float
    e: float
    moduli: tn.ElasticModuli

    def __post_init__(self):
        if not (self.m0 > 0 and self.fc_bar > 0 and self.Ag > 0 and self.Bg > 0):
            raise ValueError("m0, fc_bar, Ag and Bg must be positive")
        if self.ft_bar < 0:
            raise ValueError("ft_bar must be nonnegative")
        if not 0.5 <= self.e <= 1.0:
            raise ValueError("eccentricity must lie in [0.5, 1]")

    @property
    def p_apex(self) -> float:
        return self.fc_bar / self.m0

    def return_map(self, trial: TrialState, tangent: bool = True) -> ReturnMapResult:
        return return_map(trial, self, tangent=tangent)


def fit_from_dp(c, phi, s, Bg, moduli) -> JGParams:
    """Fit to an associative Drucker-Prager material with cohesion ``c``.

    ``s`` scales the plastic multipliers between the two models and must
    exceed ``2 sqrt(3)`` for ``m0`` to be positive.
    """
    if not s > 2.0 * tn.SQRT3:
        raise ValueError(f"scale factor s={s} must exceed 2*sqrt(3)")
    dp = params_from_angles(phi, phi, c, moduli)
    fc = 3.0 * c * dp.xi / (tn.SQRT3 - dp.eta)
    return JGParams(m0=float(tn.SQRT3 * s - 6.0), fc_bar=float(fc), ft_bar=0.0,
                    Ag=float(s * dp.eta), Bg=float(Bg), e=1.0, moduli=moduli)


def m_g_prime(p, params: JGParams):
    return params.Ag * np.exp((np.asarray(p, dtype=float) - params.ft_bar / 3.0)
                              / (params.Bg * params.fc_bar))


def m_g_second(p, params: JGParams):
    return m_g_prime(p, params) / (params.Bg * params.fc_bar)


def yield_function(p, rho, rho_e, params: JGParams):
    fc = params.fc_bar
    rho = np.asarray(rho, dtype=float)
    return 1.5 * (rho / fc) ** 2 + params.m0 * (np.asarray(rho_e) / (tn.SQRT6 * fc) + np.asarray(p) / fc) - 1.0


def g_rho(rho, params: JGParams):
    """Derivative of the pseudo-potential with respect to ``rho``."""
    fc = params.fc_bar
    return 3.0 * np.asarray(rho) / fc**2 + params.m0 / (tn.SQRT6 * fc)


def hat_p(gamma, p_tr, params: JGParams):
    """Solve ``p + gamma K m_g'(p) / fc = p_tr`` (increasing in ``p``)."""
    gamma, p_tr = np.broadcast_arrays(np.asarray(gamma, dtype=float), np.asarray(p_tr, dtype=float))
    c = gamma * params.moduli.K / params.fc_bar
    lo = p_tr - c * m_g_prime(p_tr, params)

    def fun(p):
        return -(p + c * m_g_prime(p, params) - p_tr)

    def dfun(p):
        return -(1.0 + c * m_g_second(p, params))

    ftol = 1e-15 * (np.abs(p_tr) + params.fc_bar)
    return solve_decreasing(fun, dfun, lo, p_tr, p_tr, ftol)


def hat_rho(gamma, rho_tr, params: JGParams):
    G, fc = params.moduli.G, params.fc_bar
    gamma = np.asarray(gamma, dtype=float)
    num = np.maximum(rho_tr - gamma * 2.0 * G * params.m0 / (tn.SQRT6 * fc), 0.0)
    return num / (1.0 + gamma * 6.0 * G / fc**2)


def hat_p_rho_tr(gamma, p_tr, rho_tr, params: JGParams):
    return hat_p(gamma, p_tr, params), hat_rho(gamma, rho_tr, params)


def gamma_edge(rho_tr, params: JGParams):
    """Multiplier at which the deviatoric part of the return vanishes."""
    return tn.SQRT6 * params.fc_bar * np.asarray(rho_tr) / (2.0 * params.moduli.G * params.m0)


def q_tr(gamma, p_tr, rho_tr, re_tr, params: JGParams):
    p, rho = hat_p_rho_tr(gamma, p_tr, rho_tr, params)
    return yield_function(p, rho, rho * re_tr, params)


def apex_decision(p_tr, rho_tr, params: JGParams):
    """True iff a plastic trial state returns to the apex."""
    K, G = params.moduli.K, params.moduli.G
    pa = params.p_apex
    crit = p_tr - tn.SQRT6 * K / (2.0 * G) * m_g_prime(pa, params) / params.m0 * np.asarray(rho_tr) - pa
    return crit >= 0.0


def trial_shape_factor(trial: TrialState, params: JGParams):
    """``r_e`` at the trial Lode angle; 1 where the trial deviator vanishes."""
    rho = trial.rho_tr
    cos_t = np.clip(trial.cos_theta_tr, 0.5, 1.0)
    return np.where(rho > 0.0, tn.r_e(cos_t, params.e), 1.0)


def _smooth_residual(x, p_tr, rho_tr, re_tr, params):
    K, G, fc, m0 = params.moduli.K, params.moduli.G, params.fc_bar, params.m0
    p, rho, dl = x[:, 0], x[:, 1], x[:, 2]
    r1 = p + dl * K * m_g_prime(p, params) / fc - p_tr
    r2 = rho + dl * 2.0 * G * g_rho(rho, params) - rho_tr
    r3 = yield_function(p, rho, rho * re_tr, params)
    return np.stack([r1 / fc, r2 / fc, r3], axis=-1)


def smooth_jacobian(p, rho, dl, re_tr, params: JGParams):
    """Jacobian of the smooth-return system in the unknowns ``(p, rho, dlam)``."""
    K, G, fc, m0 = params.moduli.K, params.moduli.G, params.fc_bar, params.m0
    n = np.shape(p)[0]
    jac = np.zeros((n, 3, 3))
    jac[:, 0, 0] = 1.0 + dl * K * m_g_second(p, params) / fc
    jac[:, 0, 2] = K * m_g_prime(p, params) / fc
    jac[:, 1, 1] = 1.0 + dl * 6.0 * G / fc**2
    jac[:, 1, 2] = 2.0 * G * g_rho(rho, params)
    jac[:, 2, 0] = m0 / fc
    jac[:, 2, 1] = 3.0 * rho / fc**2 + m0 * re_tr / (tn.SQRT6 * fc)
    return jac


def _solve_smooth(p_tr, rho_tr, re_tr, params):
    """Newton with residual-norm line search from ``(p_tr, rho_tr, 0)``."""
    fc = params.fc_bar
    x = np.stack([p_tr, rho_tr, np.zeros_like(p_tr)], axis=-1)
    tol = 1e-14 * np.maximum(1.0, (np.abs(p_tr) + rho_tr) / fc)
    with np.errstate(over="ignore", invalid="ignore"):
        res = _smooth_residual(x, p_tr, rho_tr, re_tr, params)
    merit = np.max(np.abs(res), axis=-1)
    if not np.all(np.isfinite(merit)):
        raise CorrectorFailure("trial pressure too large for the potential (overflow)")
    active = merit > tol
    for _ in range(MAX_NEWTON):
        if not np.any(active):
            return x
        i = active
        jac = smooth_jacobian(x[i, 0], x[i, 1], x[i, 2], re_tr[i], params)
        scale = np.array([fc, fc, 1.0])
        dx = np.linalg.solve(jac, -(res[i] * scale)[..., None])[..., 0]
        alpha = np.ones(dx.shape[0])
        xi_, ri, mi = x[i], res[i], merit[i]
        for _ in range(MAX_HALVINGS):
            xn = xi_ + alpha[:, None] * dx
            with np.errstate(over="ignore", invalid="ignore"):
                rn = _smooth_residual(xn, p_tr[i], rho_tr[i], re_tr[i], params)
                mn = np.max(np.abs(rn), axis=-1)
            mn = np.where(np.isfinite(mn), mn, np.inf)
            worse = ~(mn < mi) & (mn > tol[i])
            if not np.any(worse):
                break
            alpha = np.where(worse, 0.5 * alpha, alpha)
        # roundoff floor: accept a tiny step that no longer reduces the residual
        stalled = np.all(np.abs(alpha[:, None] * dx) <= 1e-14 * np.abs(xi_), axis=-1)
        x[i], res[i], merit[i] = xn, rn, mn
        still = (mn > tol[i]) & ~(stalled & (mn < 1e3 * tol[i]))
        active[np.flatnonzero(i)] = still
    if np.any(active):
        raise CorrectorFailure(
            f"smooth-return Newton did not converge for {int(active.sum())} point(s)")
    return x


def return_map(trial: TrialState, params: JGParams, tangent: bool = True) -> ReturnMapResult:
    """Elastic predictor / plastic corrector with a closed-form apex criterion."""
    batched = trial.batched
    t = as_batch(trial)
    K, fc = params.moduli.K, params.fc_bar
    p_tr, rho_tr = t.p_tr, t.rho_tr
    re_tr = trial_shape_factor(t, params)

    plastic = yield_function(p_tr, rho_tr, rho_tr * re_tr, params) > 0.0
    apex = plastic & apex_decision(p_tr, rho_tr, params)
    smooth = plastic & ~apex

    sigma = t.sigma_tr.copy()
    dlam = np.zeros_like(p_tr)
    if np.any(apex):
        pa = params.p_apex
        dlam[apex] = fc * (p_tr[apex] - pa) / (K * m_g_prime(pa, params))
        sigma[apex] = pa * tn.IDENTITY
    if np.any(smooth):
        x = _solve_smooth(p_tr[smooth], rho_tr[smooth], re_tr[smooth], params)
        dlam[smooth] = x[:, 2]
        sigma[smooth] = x[:, 0, None] * tn.IDENTITY + x[:, 1, None] * t.n_tr[smooth]

    kind = np.full(p_tr.shape, ReturnKind.ELASTIC, dtype=np.int8)
    kind[smooth] = ReturnKind.SMOOTH
    kind[apex] = ReturnKind.APEX
    # eps_bar_p records the accumulated multiplier (no hardening in this model)
    result = ReturnMapResult(sigma=sigma, eps_bar_p=t.eps_bar_p_tr + dlam,
                             delta_lambda=dlam, kind=kind)
    if tangent:
        result.tangent = consistent_tangent(result, t, params)
    return as_result(result, batched)


def consistent_tangent(result: ReturnMapResult, trial: TrialState, params: JGParams):
    """Elastic stiffness, zero at the apex, linearized smooth system otherwise."""
    t = as_batch(trial)
    kind = np.atleast_1d(result.kind)
    sigma = np.atleast_2d(result.sigma)
    dlam = np.atleast_1d(result.delta_lambda)
    K, G, fc, m0 = params.moduli.K, params.moduli.G, params.fc_bar, params.m0

    out = np.broadcast_to(params.moduli.stiffness, kind.shape + (6, 6)).copy()
    out[kind == ReturnKind.APEX] = 0.0
    smooth = kind == ReturnKind.SMOOTH
    if np.any(smooth):
        p, s = tn.split(sigma[smooth])
        rho = tn.norm(s)
        dl = dlam[smooth]
        sig_tr = t.sigma_tr[smooth]
        rho_tr = t.rho_tr[smooth]
        n, dn_dsig, dtheta_dsig, ok = tn.deviatoric_direction(sig_tr)
        re_tr = trial_shape_factor(TrialState(sig_tr), params)

        dp_tr = np.broadcast_to(K * tn.IDENTITY, n.shape)
        drho_tr = 2.0 * G * n
        dn_tr = 2.0 * G * dn_dsig
        if params.e == 1.0:
            dre = np.zeros_like(n)
        else:
            theta = tn.invariants(sig_tr).theta
            coef = -tn.r_e_prime(np.cos(theta), params.e) * np.sin(theta) * 2.0 * G
            dre = np.where(ok[:, None], coef[:, None] * dtheta_dsig, 0.0)

        jac = smooth_jacobian(p, rho, dl, re_tr, params)
        rhs = np.stack([dp_tr, drho_tr, -(m0 * rho / (tn.SQRT6 * fc))[:, None] * dre], axis=1)
        if np.any(np.abs(np.linalg.det(jac)) < 1e-300):
            raise CorrectorFailure("singular linearized smooth-return system")
        d = np.linalg.solve(jac, rhs)
        out[smooth] = (tn.outer(np.broadcast_to(tn.IDENTITY, n.shape), d[:, 0])
                       + tn.outer(n, d[:, 1]) + rho[:, None, None] * dn_tr)
    return out if trial.batched else out[0]
