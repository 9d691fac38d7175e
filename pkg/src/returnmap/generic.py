"""Unified plastic corrector for isotropic models in Haigh-Westergaard form.

A model supplies the yield function ``f(p, rho, rho_e, kappa)``, the
derivatives ``g_V = dg/dp`` and ``g_rho = dg/drho`` of a Lode-angle
independent pseudo-potential, the hardening rate ``ell``, the hardening law
``H`` and the deviatoric shape functions ``r_tilde``/``r_e``.  The corrector
solves the four equations

    p     = p_tr - dlam K g_V(p, rho)
    rho   = (rho_tr - dlam 2G g_rho(p, rho))^+
    ebar  = ebar_tr + dlam ell(p, rho, rho r_tilde(cos theta_tr), H(ebar))
    0     = f(p, rho, rho r_e(cos theta_tr), H(ebar))

with one semismooth Newton iteration.  The positive part selects between the
apex and the smooth portion of the surface; nothing else does.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from . import tensors as tn
from .drucker_prager import DPParams
from .jirasek_grassl import JGParams, g_rho as _jg_g_rho, m_g_prime, m_g_second
from .jirasek_grassl import yield_function as _jg_yield
from .state import CorrectorFailure, ReturnKind, ReturnMapResult, TrialState

MAX_ITER = 100
MAX_HALVINGS = 30
TOL = 1e-13


class HaighWestergaardModel(ABC):
    """Ingredients of an isotropic model with singularities on the hydrostatic axis.

    Subclasses implement the yield function, the potential derivatives and
    their partial derivatives.  The defaults give ``ell = 1``, ``H = 0`` and
    ``r_tilde = r_e = 1``.
    """

    moduli: tn.ElasticModuli

    @abstractmethod
    def f(self, p, rho, rho_e, kappa): ...

    @abstractmethod
    def f_grad(self, p, rho, rho_e, kappa):
        """Partials ``(df/dp, df/drho, df/drho_e, df/dkappa)``."""

    @abstractmethod
    def g_v(self, p, rho): ...

    @abstractmethod
    def g_v_grad(self, p, rho): ...

    @abstractmethod
    def g_rho(self, p, rho): ...

    @abstractmethod
    def g_rho_grad(self, p, rho): ...

    def ell(self, p, rho, rho_t, kappa):
        return 1.0

    def ell_grad(self, p, rho, rho_t, kappa):
        return 0.0, 0.0, 0.0, 0.0

    def H(self, ebar):
        return 0.0

    def H_prime(self, ebar):
        return 0.0

    def r_e(self, c):
        return 1.0

    def r_e_prime(self, c):
        return 0.0

    def r_tilde(self, c):
        return self.r_e(c)

    def r_tilde_prime(self, c):
        return self.r_e_prime(c)

    @property
    def stress_scale(self) -> float:
        return 1.0

    @property
    def yield_scale(self) -> float:
        return 1.0

    def return_map(self, trial: TrialState, tangent: bool = True) -> ReturnMapResult:
        return generic_return_map(trial, self, tangent=tangent)


@dataclass(frozen=True)
class DruckerPragerModel(HaighWestergaardModel):
    params: DPParams

    @property
    def moduli(self):
        return self.params.moduli

    def f(self, p, rho, rho_e, kappa):
        q = self.params
        return rho / tn.SQRT2 + q.eta * p - q.xi * (q.c0 + kappa)

    def f_grad(self, p, rho, rho_e, kappa):
        return self.params.eta, 1.0 / tn.SQRT2, 0.0, -self.params.xi

    def g_v(self, p, rho):
        return self.params.eta_bar

    def g_v_grad(self, p, rho):
        return 0.0, 0.0

    def g_rho(self, p, rho):
        return 1.0 / tn.SQRT2

    def g_rho_grad(self, p, rho):
        return 0.0, 0.0

    def ell(self, p, rho, rho_t, kappa):
        return self.params.xi

    def H(self, ebar):
        return float(self.params.hardening(ebar))

    def H_prime(self, ebar):
        return float(self.params.hardening.left_derivative(ebar))

    @property
    def stress_scale(self):
        return self.params.c0 + 1.0

    @property
    def yield_scale(self):
        return self.params.stress_scale


@dataclass(frozen=True)
class JirasekGrasslModel(HaighWestergaardModel):
    """Perfectly plastic instance: ``H = 0`` and ``ell = 1`` keep ``ebar`` inert."""

    params: JGParams

    @property
    def moduli(self):
        return self.params.moduli

    def f(self, p, rho, rho_e, kappa):
        return float(_jg_yield(p, rho, rho_e, self.params))

    def f_grad(self, p, rho, rho_e, kappa):
        fc, m0 = self.params.fc_bar, self.params.m0
        return m0 / fc, 3.0 * rho / fc**2, m0 / (tn.SQRT6 * fc), 0.0

    def g_v(self, p, rho):
        return float(m_g_prime(p, self.params)) / self.params.fc_bar

    def g_v_grad(self, p, rho):
        return float(m_g_second(p, self.params)) / self.params.fc_bar, 0.0

    def g_rho(self, p, rho):
        return float(_jg_g_rho(rho, self.params))

    def g_rho_grad(self, p, rho):
        return 0.0, 3.0 / self.params.fc_bar**2

    def r_e(self, c):
        return float(tn.r_e(c, self.params.e))

    def r_e_prime(self, c):
        return float(tn.r_e_prime(c, self.params.e))

    @property
    def stress_scale(self):
        return self.params.fc_bar


@dataclass
class _Trial:
    p: float
    rho: float
    ebar: float
    n: np.ndarray
    cos_theta: float
    sigma: np.ndarray


def _unpack(trial: TrialState) -> _Trial:
    if trial.batched:
        raise ValueError("expected a single trial state")
    return _Trial(float(trial.p_tr), float(trial.rho_tr), float(trial.eps_bar_p_tr),
                  trial.n_tr, float(np.clip(trial.cos_theta_tr, 0.5, 1.0)), trial.sigma_tr)


def _shape_factors(t: _Trial, model):
    if t.rho > 0.0:
        return model.r_e(t.cos_theta), model.r_tilde(t.cos_theta)
    return 1.0, 1.0


def residual(x, trial: TrialState, model: HaighWestergaardModel) -> np.ndarray:
    """Residual of the reduced system in ``x = (p, rho, eps_bar_p, dlam)``."""
    t = _unpack(trial)
    return _residual(np.asarray(x, dtype=float), t, model, *_shape_factors(t, model))


def _residual(x, t, model, re_tr, rt_tr):
    K, G = model.moduli.K, model.moduli.G
    p, rho, ebar, dl = x
    kappa = model.H(ebar)
    return np.array([
        p - t.p + dl * K * model.g_v(p, rho),
        rho - max(t.rho - dl * 2.0 * G * model.g_rho(p, rho), 0.0),
        ebar - t.ebar - dl * model.ell(p, rho, rho * rt_tr, kappa),
        model.f(p, rho, rho * re_tr, kappa),
    ])


def _jacobian(x, t, model, re_tr, rt_tr):
    K, G = model.moduli.K, model.moduli.G
    p, rho, ebar, dl = x
    kappa = model.H(ebar)
    hp = model.H_prime(ebar)
    jac = np.zeros((4, 4))
    gvp, gvr = model.g_v_grad(p, rho)
    jac[0] = [1.0 + dl * K * gvp, dl * K * gvr, 0.0, K * model.g_v(p, rho)]
    # generalized derivative of (.)^+ : 1 for a positive argument, else 0
    grho = model.g_rho(p, rho)
    jac[1, 1] = 1.0
    if t.rho - dl * 2.0 * G * grho > 0.0:
        grp, grr = model.g_rho_grad(p, rho)
        jac[1] += [dl * 2.0 * G * grp, dl * 2.0 * G * grr, 0.0, 2.0 * G * grho]
    lp, lr, lt, lk = model.ell_grad(p, rho, rho * rt_tr, kappa)
    ell = model.ell(p, rho, rho * rt_tr, kappa)
    jac[2] = [-dl * lp, -dl * (lr + lt * rt_tr), 1.0 - dl * lk * hp, -ell]
    fp, fr, fe, fk = model.f_grad(p, rho, rho * re_tr, kappa)
    jac[3] = [fp, fr + fe * re_tr, fk * hp, 0.0]
    return jac


def generic_return_map(trial: TrialState, model: HaighWestergaardModel,
                       tangent: bool = True) -> ReturnMapResult:
    """Semismooth Newton solve of the reduced system from ``(p_tr, rho_tr, ebar_tr, 0)``.

    Batched trials are processed point by point.
    """
    if trial.batched:
        parts = [generic_return_map(TrialState(s, e), model, tangent)
                 for s, e in zip(trial.sigma_tr, trial.eps_bar_p_tr)]
        return ReturnMapResult(
            sigma=np.array([r.sigma for r in parts]),
            eps_bar_p=np.array([r.eps_bar_p for r in parts]),
            delta_lambda=np.array([r.delta_lambda for r in parts]),
            kind=np.array([r.kind for r in parts]),
            tangent=np.array([r.tangent for r in parts]) if tangent else None,
        )
    t = _unpack(trial)
    re_tr, rt_tr = _shape_factors(t, model)
    if model.f(t.p, t.rho, t.rho * re_tr, model.H(t.ebar)) <= 0.0:
        return ReturnMapResult(sigma=t.sigma.copy(), eps_bar_p=t.ebar, delta_lambda=0.0,
                               kind=ReturnKind.ELASTIC,
                               tangent=model.moduli.stiffness.copy() if tangent else None)

    stress = max(abs(t.p), t.rho, model.stress_scale)
    x = np.array([t.p, t.rho, t.ebar, 0.0])

    def merit(x):
        with np.errstate(over="ignore", invalid="ignore"):
            r = _residual(x, t, model, re_tr, rt_tr)
            ebar_scale = max(abs(t.ebar) + abs(x[2] - t.ebar), 1e-300)
            m = np.max(np.abs(r / [stress, stress, ebar_scale, model.yield_scale]))
        return m if np.isfinite(m) else np.inf

    m = merit(x)
    if not np.isfinite(m):
        raise CorrectorFailure("residual overflows at the trial state")
    for _ in range(MAX_ITER):
        if m <= TOL:
            break
        jac = _jacobian(x, t, model, re_tr, rt_tr)
        try:
            dx = np.linalg.solve(jac, -_residual(x, t, model, re_tr, rt_tr))
        except np.linalg.LinAlgError as exc:
            raise CorrectorFailure("singular generalized Jacobian") from exc
        alpha = 1.0
        for _ in range(MAX_HALVINGS):
            xn = x + alpha * dx
            mn = merit(xn)
            if mn < m or mn <= TOL:
                break
            alpha *= 0.5
        if np.all(np.abs(xn - x) <= 1e-15 * np.abs(x)) and mn < 1e3 * TOL:
            x, m = xn, mn
            break
        x, m = xn, mn
    else:
        if m > TOL:
            raise CorrectorFailure(f"generic corrector did not converge (merit {m:.3e})")

    p, rho, ebar, dl = x
    rho = max(rho, 0.0)
    sigma = p * tn.IDENTITY + rho * t.n if rho > 0.0 else p * tn.IDENTITY
    kind = ReturnKind.SMOOTH if rho > 0.0 else ReturnKind.APEX
    result = ReturnMapResult(sigma=sigma, eps_bar_p=ebar, delta_lambda=dl, kind=kind)
    if tangent:
        result.tangent = _tangent(x, t, model, re_tr, rt_tr)
    return result


def _tangent(x, t, model, re_tr, rt_tr):
    """Implicit differentiation of the reduced system with respect to strain."""
    K, G = model.moduli.K, model.moduli.G
    p, rho, ebar, dl = x
    kappa = model.H(ebar)
    jac = _jacobian(x, t, model, re_tr, rt_tr)
    rhs = np.zeros((4, 6))
    rhs[0] = K * tn.IDENTITY
    active = t.rho - dl * 2.0 * G * model.g_rho(p, rho) > 0.0
    if active:
        rhs[1] = 2.0 * G * t.n
    dn_tr = np.zeros((6, 6))
    if t.rho > 0.0:
        _, dn_dsig, dtheta, ok = tn.deviatoric_direction(t.sigma)
        dn_tr = 2.0 * G * dn_dsig
        if ok:
            theta = np.arccos(t.cos_theta)
            dcos = -np.sin(theta) * 2.0 * G * dtheta
            _, _, lt, _ = model.ell_grad(p, rho, rho * rt_tr, kappa)
            _, _, fe, _ = model.f_grad(p, rho, rho * re_tr, kappa)
            rhs[2] = dl * lt * rho * model.r_tilde_prime(t.cos_theta) * dcos
            rhs[3] = -fe * rho * model.r_e_prime(t.cos_theta) * dcos
    d = np.linalg.solve(jac, rhs)
    out = np.outer(tn.IDENTITY, d[0])
    if rho > 0.0:
        out += np.outer(t.n, d[1]) + rho * dn_tr
    return out
