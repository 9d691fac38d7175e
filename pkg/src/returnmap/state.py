"""Trial states, corrector results and the strain-driven point update."""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property

import numpy as np

from . import tensors as tn


class ReturnKind(IntEnum):
    ELASTIC = 0
    SMOOTH = 1
    APEX = 2


class CorrectorFailure(RuntimeError):
    """A local (material point) solve did not converge."""


@dataclass(frozen=True)
class TrialState:
    """Elastic predictor: trial stress and hardening variable.

    ``sigma_tr`` has shape ``(6,)`` or ``(n, 6)``; ``eps_bar_p_tr`` broadcasts
    against the leading dimensions.
    """

    sigma_tr: np.ndarray
    eps_bar_p_tr: np.ndarray = 0.0

    def __post_init__(self):
        sig = np.asarray(self.sigma_tr, dtype=float)
        ebar = np.broadcast_to(np.asarray(self.eps_bar_p_tr, dtype=float), sig.shape[:-1])
        object.__setattr__(self, "sigma_tr", sig)
        object.__setattr__(self, "eps_bar_p_tr", np.array(ebar))

    @classmethod
    def from_strain(cls, moduli: tn.ElasticModuli, eps, eps_p=0.0, eps_bar_p=0.0):
        eps = np.asarray(eps, dtype=float)
        return cls(tn.elastic_apply(moduli, eps - eps_p), eps_bar_p)

    @classmethod
    def from_invariants(cls, p, rho, direction=None, eps_bar_p=0.0):
        """Trial stress ``p I + rho n`` with ``n`` a unit deviator (default: diag(-1,0,1)/sqrt2)."""
        p = np.asarray(p, dtype=float)
        rho = np.asarray(rho, dtype=float)
        if direction is None:
            direction = np.array([-1.0, 0.0, 1.0, 0.0, 0.0, 0.0]) / tn.SQRT2
        n = np.asarray(direction, dtype=float)
        sig = p[..., None] * tn.IDENTITY + rho[..., None] * n
        return cls(sig, eps_bar_p)

    @property
    def batched(self) -> bool:
        return self.sigma_tr.ndim > 1

    @cached_property
    def p_tr(self):
        return tn.split(self.sigma_tr)[0]

    @cached_property
    def s_tr(self):
        return tn.split(self.sigma_tr)[1]

    @cached_property
    def rho_tr(self):
        return tn.norm(self.s_tr)

    @cached_property
    def n_tr(self):
        """Unit deviatoric direction; zero where ``rho_tr == 0``."""
        rho = self.rho_tr
        safe = np.where(rho > 0.0, rho, 1.0)
        return np.where((rho > 0.0)[..., None], self.s_tr / safe[..., None], 0.0)

    @cached_property
    def cos_theta_tr(self):
        """cos of the trial Lode angle; 1 where it is undefined."""
        inv = tn.invariants(self.sigma_tr)
        return np.where(inv.theta_defined, np.cos(inv.theta), 1.0)


@dataclass
class ReturnMapResult:
    """Solution of the incremental constitutive problem at one or many points."""

    sigma: np.ndarray
    eps_bar_p: np.ndarray
    delta_lambda: np.ndarray
    kind: np.ndarray
    tangent: np.ndarray | None = None

    def __post_init__(self):
        self.kind = np.asarray(self.kind, dtype=np.int8)

    @property
    def is_plastic(self):
        return self.kind != ReturnKind.ELASTIC


def as_result(result: ReturnMapResult, batched: bool) -> ReturnMapResult:
    """Squeeze a batch of size one back to scalar form."""
    if batched:
        return result
    return ReturnMapResult(
        sigma=result.sigma[0],
        eps_bar_p=float(result.eps_bar_p[0]),
        delta_lambda=float(result.delta_lambda[0]),
        kind=result.kind[0],
        tangent=None if result.tangent is None else result.tangent[0],
    )


def as_batch(trial: TrialState) -> TrialState:
    if trial.batched:
        return trial
    return TrialState(trial.sigma_tr[None, :], np.atleast_1d(trial.eps_bar_p_tr))


@dataclass
class PointUpdate:
    """Strain-driven update of a batch of integration points."""

    sigma: np.ndarray
    tangent: np.ndarray
    eps_p: np.ndarray
    eps_bar_p: np.ndarray
    delta_lambda: np.ndarray
    kind: np.ndarray


@dataclass(frozen=True)
class LinearElastic:
    """Material that never yields; useful for patch tests and load-path checks."""

    moduli: tn.ElasticModuli

    def return_map(self, trial: TrialState, tangent: bool = True) -> ReturnMapResult:
        t = as_batch(trial)
        n = len(t.sigma_tr)
        res = ReturnMapResult(
            sigma=t.sigma_tr.copy(),
            eps_bar_p=t.eps_bar_p_tr.copy(),
            delta_lambda=np.zeros(n),
            kind=np.zeros(n),
            tangent=np.broadcast_to(self.moduli.stiffness, (n, 6, 6)).copy() if tangent else None,
        )
        return as_result(res, trial.batched)


def integrate(model, eps, eps_p_old, eps_bar_p_old, tangent: bool = True) -> PointUpdate:
    """Elastic predictor, model corrector and plastic strain update.

    ``model`` is any parameter object exposing ``moduli`` and
    ``return_map(trial)``.
    """
    moduli = model.moduli
    eps = np.asarray(eps, dtype=float)
    trial = TrialState(tn.elastic_apply(moduli, eps - eps_p_old), eps_bar_p_old)
    res = model.return_map(as_batch(trial), tangent=tangent)
    eps_p = eps - tn.elastic_inverse(moduli, res.sigma)
    return PointUpdate(
        sigma=res.sigma,
        tangent=res.tangent,
        eps_p=eps_p,
        eps_bar_p=np.asarray(res.eps_bar_p),
        delta_lambda=np.asarray(res.delta_lambda),
        kind=res.kind,
    )
