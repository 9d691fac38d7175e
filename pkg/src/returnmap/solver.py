"""Equilibrium Newton solver, incremental limit analysis and the 2D wedge projection."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .state import CorrectorFailure, ReturnKind


@dataclass(frozen=True)
class NewtonSettings:
    epsilon_newton: float = 1e-12
    max_iters: int = 30
    damping: bool = False  # diagnostic backtracking on the residual; off by default

    def __post_init__(self):
        if not self.epsilon_newton > 0:
            raise ValueError("Newton tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class NewtonResult:
    u: np.ndarray
    iters: int
    converged: bool
    step_norms: list = field(default_factory=list)
    criteria: list = field(default_factory=list)
    message: str = ""


def relative_step(du, u_new, u_old) -> float:
    """``|du| / (|u_new| + |u_old|)``, with 0/0 read as converged."""
    num = np.linalg.norm(du)
    den = np.linalg.norm(u_new) + np.linalg.norm(u_old)
    if den == 0.0:
        return 0.0 if num == 0.0 else np.inf
    return num / den


def _solve(K, rhs):
    if hasattr(K, "tocsc"):
        return spla.splu(K.tocsc()).solve(rhs)
    return np.linalg.solve(np.atleast_2d(K), np.atleast_1d(rhs))


def semismooth_newton(u0, assemble_fn, load_vector, settings: NewtonSettings = NewtonSettings()) -> NewtonResult:
    """Plain Newton iteration ``K(u^i) du^i = l - F(u^i)``.

    ``assemble_fn(u)`` returns ``(F, K)`` with ``K`` a sparse or dense matrix.
    The iteration stops at the first ``i`` with
    ``|du^i| / (|u^{i+1}| + |u^i|) <= epsilon_newton``; ``iters`` reports
    that ``i``, so a linear problem needs one iteration.  Singular tangents,
    failed material updates and exhausted iteration budgets return a
    non-converged result instead of raising.
    """
    u = np.array(u0, dtype=float, copy=True)
    load = np.asarray(load_vector, dtype=float)
    res = NewtonResult(u=u, iters=0, converged=False)
    for i in range(settings.max_iters + 1):
        try:
            F, K = assemble_fn(u)
            du = _solve(K, load - F)
        except CorrectorFailure as exc:
            res.message = f"material update failed: {exc}"
            return res
        except (RuntimeError, np.linalg.LinAlgError) as exc:
            res.message = f"singular tangent: {exc}"
            return res
        if not np.all(np.isfinite(du)):
            res.message = "non-finite Newton correction"
            return res
        if settings.damping:
            du = _damped(u, du, load, assemble_fn, np.linalg.norm(load - F))
        u_new = u + du
        crit = relative_step(du, u_new, u)
        res.step_norms.append(float(np.linalg.norm(du)))
        res.criteria.append(crit)
        u = u_new
        res.u, res.iters = u, i
        if crit <= settings.epsilon_newton:
            res.converged = True
            return res
    res.message = f"no convergence within {settings.max_iters} iterations"
    return res


def _damped(u, du, load, assemble_fn, r0, max_halvings=10):
    alpha = 1.0
    for _ in range(max_halvings):
        try:
            F, _ = assemble_fn(u + alpha * du)
            if np.linalg.norm(load - F) < r0:
                break
        except CorrectorFailure:
            pass
        alpha *= 0.5
    return alpha * du


@dataclass(frozen=True)
class LoadSchedule:
    initial_increment: float = 0.1
    min_increment: float = 1e-4
    zeta_max: float = 10.0

    def __post_init__(self):
        if not 0 < self.min_increment <= self.initial_increment:
            raise ValueError("need 0 < min_increment <= initial_increment")
        if not self.zeta_max > 0:
            raise ValueError("zeta_max must be positive")


@dataclass
class LoadingCurve:
    """Accepted load steps: load factor, settlement of the monitor point, Newton iterations."""

    zeta: list = field(default_factory=list)
    settlement: list = field(default_factory=list)
    newton_iters: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    criteria: list = field(default_factory=list)

    def append(self, zeta, settlement, newton: NewtonResult):
        if self.zeta and not zeta > self.zeta[-1]:
            raise ValueError("load factors must increase strictly")
        self.zeta.append(float(zeta))
        self.settlement.append(float(settlement))
        self.newton_iters.append(int(newton.iters))
        self.step_norms.append(list(newton.step_norms))
        self.criteria.append(list(newton.criteria))

    def __len__(self):
        return len(self.zeta)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["zeta", "settlement_m", "newton_iters"])
            for z, s, n in zip(self.zeta, self.settlement, self.newton_iters):
                w.writerow([f"{z:.9g}", f"{s:.9g}", n])


@dataclass
class LimitAnalysisResult:
    curve: LoadingCurve
    u: np.ndarray
    states: object
    collapsed: bool
    failed_attempts: int = 0

    @property
    def limit_factor(self) -> float:
        return self.curve.zeta[-1] if self.curve.zeta else 0.0

    def summary(self) -> dict:
        return {
            "limit_factor": self.limit_factor,
            "collapsed": self.collapsed,
            "steps": len(self.curve),
            "total_newton_iters": int(sum(self.curve.newton_iters)),
            "failed_attempts": self.failed_attempts,
        }

    def summary_text(self) -> str:
        lines = []
        for key, value in self.summary().items():
            if isinstance(value, float):
                value = f"{value:.9g}"
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


class ConfigurationError(RuntimeError):
    """The analysis could not accept even a single load step."""


def _step(assembler, states, u0, load, zeta, settings):
    def assemble_fn(u):
        F, K, _ = assembler.evaluate(u, states)
        return F, K

    return semismooth_newton(u0, assemble_fn, zeta * load, settings)


def _commit(assembler, states, u):
    from .fem.assembly import QuadratureState

    _, _, update = assembler.evaluate(u, states, tangent=False)
    return QuadratureState.from_update(update)


def incremental_limit_analysis(assembler, load, monitor_dof: int,
                               schedule: LoadSchedule = LoadSchedule(),
                               settings: NewtonSettings = NewtonSettings(),
                               progress=None) -> LimitAnalysisResult:
    """Increase the load factor from zero until equilibrium is lost.

    ``load`` is the load vector for unit factor on the free dofs and
    ``monitor_dof`` the free-dof index of the vertical displacement whose
    negative is reported as settlement.  A failed Newton solve halves the
    increment and retries from the last accepted state; collapse is declared
    once the increment drops below ``schedule.min_increment``.
    """
    from .fem.assembly import QuadratureState

    states = QuadratureState.zeros(assembler.n_points)
    u = np.zeros(assembler.dofs.n_free)
    curve = LoadingCurve()
    zeta, inc, failed = 0.0, schedule.initial_increment, 0
    collapsed = False
    while zeta < schedule.zeta_max:
        target = min(zeta + inc, schedule.zeta_max)
        newton = _step(assembler, states, u, load, target, settings)
        if newton.converged:
            u = newton.u
            states = _commit(assembler, states, u)
            zeta = target
            curve.append(zeta, -u[monitor_dof], newton)
            if progress is not None:
                progress(zeta, newton)
            continue
        failed += 1
        inc *= 0.5
        if inc < schedule.min_increment:
            collapsed = True
            break
    if not curve.zeta and collapsed:
        raise ConfigurationError("no load step could be accepted; check material and mesh")
    return LimitAnalysisResult(curve, u, states, collapsed, failed)


def replay(assembler, load, zetas, settings: NewtonSettings = NewtonSettings()):
    """Recompute the state reached by accepting the given load factors in order."""
    from .fem.assembly import QuadratureState

    states = QuadratureState.zeros(assembler.n_points)
    u = np.zeros(assembler.dofs.n_free)
    for zeta in zetas:
        newton = _step(assembler, states, u, load, zeta, settings)
        if not newton.converged:
            raise RuntimeError(f"replayed step at load factor {zeta} did not converge")
        u = newton.u
        states = _commit(assembler, states, u)
    return u, states


def project_wedge_2d(z):
    """Nearest point of ``{w : w1 + |w2| <= 1}`` to ``z`` in closed form.

    Returns ``(w, lam, kind)`` where ``lam`` is the Lagrange multiplier.
    """
    z1, z2 = float(z[0]), float(z[1])
    if z1 + abs(z2) - 1.0 <= 0.0:
        return np.array([z1, z2]), 0.0, ReturnKind.ELASTIC
    lam = z1 - 1.0 + 0.5 * max(-z1 + abs(z2) + 1.0, 0.0)
    w = np.array([z1 - lam, max(abs(z2) - lam, 0.0) * np.sign(z2)])
    kind = ReturnKind.APEX if z1 - abs(z2) - 1.0 >= 0.0 else ReturnKind.SMOOTH
    return w, lam, kind


def project_wedge_batch(z):
    """Vectorized :func:`project_wedge_2d` for an ``(n, 2)`` array."""
    z = np.asarray(z, dtype=float)
    z1, a = z[:, 0], np.abs(z[:, 1])
    plastic = z1 + a - 1.0 > 0.0
    lam = np.where(plastic, z1 - 1.0 + 0.5 * np.maximum(-z1 + a + 1.0, 0.0), 0.0)
    w = np.column_stack([z1 - lam, np.maximum(a - lam, 0.0) * np.sign(z[:, 1])])
    kind = np.where(plastic, np.where(z1 - a - 1.0 >= 0.0, ReturnKind.APEX, ReturnKind.SMOOTH),
                    ReturnKind.ELASTIC).astype(np.int8)
    return w, lam, kind
