import math

import numpy as np
import pytest

from returnmap import presets
from returnmap.benchmark import setup
from returnmap.fem.mesh import SlopeGeometry
from returnmap.solver import (ConfigurationError, LoadingCurve, LoadSchedule, NewtonResult,
                              NewtonSettings, incremental_limit_analysis, project_wedge_2d,
                              project_wedge_batch, relative_step, replay, semismooth_newton)
from returnmap.state import CorrectorFailure, LinearElastic, PointUpdate, ReturnKind

SMALL = SlopeGeometry(left=5.0, right=5.0, depth=4.0, height=4.0)


# ------------------------------------------------------------------ Newton iteration

def test_linear_problem_takes_one_iteration(rng):
    A = rng.normal(size=(5, 5)) + 5 * np.eye(5)
    b = rng.normal(size=5)
    res = semismooth_newton(np.zeros(5), lambda u: (A @ u, A), b)
    assert res.converged and res.iters == 1
    np.testing.assert_allclose(A @ res.u, b, rtol=1e-13)
    assert res.criteria[-1] <= 1e-12


def test_quadratic_convergence_on_cubic():
    res = semismooth_newton(np.array([3.0]), lambda u: (u**3, np.array([[3 * u[0] ** 2]])), np.array([8.0]),
                            NewtonSettings(epsilon_newton=1e-15))
    assert res.converged
    # iterates before the step norms hit roundoff
    errors = [abs(3.0 - 2.0)]
    u = 3.0
    for du in res.step_norms:
        u -= du
        errors.append(abs(u - 2.0))
    errors = [e for e in errors if e > 1e-13]
    orders = [math.log(errors[k + 1] / errors[k]) / math.log(errors[k] / errors[k - 1])
              for k in range(1, len(errors) - 1)]
    assert orders[-1] >= 1.9


def test_stopping_ratio_on_synthetic_iterates():
    steps = [np.array([1.0, 0.0]), np.array([0.0, 0.5]), np.array([1e-3, 0.0]),
             np.array([1e-13, 0.0]), np.array([5.0, 5.0])]
    it = iter(steps)

    def assemble_fn(u):
        # K = I and F = load - du, so the Newton correction is the scripted step
        return np.zeros(2) - next(it), np.eye(2)

    res = semismooth_newton(np.zeros(2), assemble_fn, np.zeros(2), NewtonSettings(epsilon_newton=1e-12))
    u, expected = np.zeros(2), []
    for du in steps[:4]:
        expected.append(np.linalg.norm(du) / (np.linalg.norm(u + du) + np.linalg.norm(u)))
        u = u + du
    assert res.criteria == expected
    assert res.converged and res.iters == 3
    np.testing.assert_array_equal(res.u, u)
    assert relative_step(np.zeros(2), np.zeros(2), np.zeros(2)) == 0.0


def test_iteration_budget_and_singular_tangent():
    res = semismooth_newton(np.array([1.0]), lambda u: (1e3 * np.tanh(u), np.array([[1e3 / np.cosh(u[0]) ** 2]])),
                            np.array([900.0]), NewtonSettings(max_iters=2))
    assert not res.converged and "2 iterations" in res.message
    res = semismooth_newton(np.ones(2), lambda u: (u, np.zeros((2, 2))), np.ones(2))
    assert not res.converged and "singular" in res.message


def test_corrector_failure_reported_not_raised():
    def boom(u):
        raise CorrectorFailure("bad point")

    res = semismooth_newton(np.zeros(1), boom, np.ones(1))
    assert not res.converged and "bad point" in res.message


def test_settings_validation():
    with pytest.raises(ValueError):
        NewtonSettings(epsilon_newton=0.0)
    with pytest.raises(ValueError):
        NewtonSettings(max_iters=0)
    with pytest.raises(ValueError):
        LoadSchedule(initial_increment=0.1, min_increment=0.2)
    with pytest.raises(ValueError):
        LoadSchedule(zeta_max=0.0)


def test_damped_mode_still_solves_cubic():
    res = semismooth_newton(np.array([10.0]), lambda u: (u**3, np.array([[3 * u[0] ** 2]])),
                            np.array([8.0]), NewtonSettings(damping=True))
    assert res.converged and res.u[0] == pytest.approx(2.0, rel=1e-12)


# ------------------------------------------------------------------ incremental driver

class ScalarAssembler:
    """One-dof linear 'structure' whose material breaks beyond ``limit``."""

    n_points = 1

    class dofs:
        n_free = 1

    def __init__(self, limit):
        self.limit = limit

    def evaluate(self, u, states, tangent=True):
        if abs(u[0]) > self.limit:
            raise CorrectorFailure("beyond strength")
        update = PointUpdate(sigma=np.zeros((1, 6)), tangent=None, eps_p=np.zeros((1, 6)),
                             eps_bar_p=np.zeros(1), delta_lambda=np.zeros(1), kind=np.zeros(1, np.int8))
        return u.copy(), (np.eye(1) if tangent else None), update


def test_halving_resolves_the_limit():
    limit = 0.4567
    res = incremental_limit_analysis(ScalarAssembler(limit), np.array([-1.0]), 0)
    assert res.collapsed
    assert limit - 1e-4 <= res.limit_factor <= limit
    inc = np.diff([0.0] + res.curve.zeta)
    assert inc[0] == pytest.approx(0.1)
    # every increment is the initial one divided by a power of two
    powers = np.log2(0.1 / inc)
    np.testing.assert_allclose(powers, np.round(powers), atol=1e-9)
    assert np.all(np.diff(np.round(powers)) >= 0)
    assert res.failed_attempts == math.ceil(math.log2(0.1 / 1e-4))
    np.testing.assert_allclose(res.curve.settlement, res.curve.zeta)


def test_no_accepted_step_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        incremental_limit_analysis(ScalarAssembler(1e-6), np.array([1.0]), 0)


def test_elastic_slope_never_collapses():
    mesh, dofs, asm, load, monitor = setup(LinearElastic(presets.BENCHMARK_MODULI), 1, "quad8", SMALL)
    dof = int(dofs.free_index[2 * monitor + 1])
    res = incremental_limit_analysis(asm, load, dof, LoadSchedule(zeta_max=2.0))
    assert not res.collapsed and res.failed_attempts == 0
    assert res.limit_factor == 2.0
    z, s = np.array(res.curve.zeta), np.array(res.curve.settlement)
    assert np.all(s > 0)
    np.testing.assert_allclose(s / z, s[-1] / z[-1], rtol=1e-9)
    assert max(res.curve.newton_iters) <= 1


def test_replay_reproduces_final_state_bit_for_bit():
    material = presets.dp_nonassociative_hardening()
    mesh, dofs, asm, load, monitor = setup(material, 1, "quad8", SMALL)
    dof = int(dofs.free_index[2 * monitor + 1])
    res = incremental_limit_analysis(asm, load, dof, LoadSchedule(zeta_max=3.0, min_increment=1e-2))
    assert len(res.curve) > 3
    assert np.any(res.states.kind != 0)
    u, states = replay(asm, load, res.curve.zeta)
    np.testing.assert_array_equal(u, res.u)
    for name in ("eps_p", "eps_bar_p", "delta_lambda", "kind"):
        np.testing.assert_array_equal(getattr(states, name), getattr(res.states, name))


# ------------------------------------------------------------------ loading curve

def test_loading_curve_rejects_non_increasing():
    curve = LoadingCurve()
    curve.append(0.1, 0.0, NewtonResult(np.zeros(1), 1, True))
    with pytest.raises(ValueError):
        curve.append(0.1, 0.0, NewtonResult(np.zeros(1), 1, True))


def test_loading_curve_csv(tmp_path):
    curve = LoadingCurve()
    curve.append(0.1, 1.5e-3, NewtonResult(np.zeros(1), 2, True))
    curve.append(0.2, 3.25e-3, NewtonResult(np.zeros(1), 4, True))
    path = tmp_path / "curve.csv"
    curve.write_csv(path)
    assert path.read_text() == "zeta,settlement_m,newton_iters\n0.1,0.0015,2\n0.2,0.00325,4\n"


# ------------------------------------------------------------------ wedge projection

@pytest.mark.parametrize("z, w, lam, kind", [
    ((0.0, 0.0), (0.0, 0.0), 0.0, ReturnKind.ELASTIC),
    ((1.0, 1.0), (0.5, 0.5), 0.5, ReturnKind.SMOOTH),
    ((2.0, 0.0), (1.0, 0.0), 1.0, ReturnKind.APEX),
    ((1.0, -1.0), (0.5, -0.5), 0.5, ReturnKind.SMOOTH),
])
def test_wedge_examples(z, w, lam, kind):
    ws, ls, ks = project_wedge_2d(np.array(z))
    np.testing.assert_allclose(ws, w, atol=1e-15)
    assert ls == pytest.approx(lam) and ks == kind


def test_wedge_batch_matches_scalar(rng):
    z = rng.uniform(-3, 3, (500, 2))
    w, lam, kind = project_wedge_batch(z)
    for k in range(len(z)):
        ws, ls, ks = project_wedge_2d(z[k])
        np.testing.assert_array_equal(w[k], ws)
        assert lam[k] == ls and kind[k] == ks


def test_wedge_projection_properties(rng):
    z = rng.uniform(-3, 3, (20000, 2))
    w, lam, kind = project_wedge_batch(z)
    assert np.all(w[:, 0] + np.abs(w[:, 1]) <= 1.0 + 1e-14)
    assert np.all(lam >= 0.0)
    on = kind != ReturnKind.ELASTIC
    np.testing.assert_allclose(w[on, 0] + np.abs(w[on, 1]), 1.0, atol=1e-14)
    # 1-Lipschitz
    a, b = z[:10000], z[10000:]
    d_w = np.linalg.norm(w[:10000] - w[10000:], axis=1)
    assert np.all(d_w <= np.linalg.norm(a - b, axis=1) * (1 + 1e-14))
    # variational inequality of the projection: (z - w).(v - w) <= 0 for feasible v
    v = project_wedge_batch(rng.uniform(-3, 3, (20000, 2)))[0]
    assert np.all(np.einsum("ij,ij->i", z - w, v - w) <= 1e-12)
