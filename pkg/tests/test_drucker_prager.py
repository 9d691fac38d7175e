import math

import numpy as np
import pytest

from returnmap import presets, tensors as tn
from returnmap.drucker_prager import (DPParams, consistent_tangent, params_from_angles,
                                      q_tr, return_map, yield_function)
from returnmap.hardening import LinearHardening, SaturatingHardening
from returnmap.state import ReturnKind, TrialState, integrate

from oracles import ETA_10, ETA_20, XI_20, dp_multiplier_bisection, fd_tangent
from trials import dp_trials

SQ2 = math.sqrt(2.0)


# ------------------------------------------------------------------ parameters

def test_coefficients_at_twenty_and_ten_degrees():
    m = presets.BENCHMARK_MODULI
    p = params_from_angles(math.radians(20), math.radians(10), 50.0, m)
    assert p.eta == pytest.approx(ETA_20, rel=1e-14)
    assert p.xi == pytest.approx(XI_20, rel=1e-14)
    assert p.eta_bar == pytest.approx(ETA_10, rel=1e-14)


def test_small_angle_limit():
    p = params_from_angles(1e-9, 0.0 + 1e-12, 1.0, presets.BENCHMARK_MODULI)
    assert p.eta == pytest.approx(0.0, abs=1e-8)
    assert p.xi == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("phi, psi", [(0.0, 0.0), (math.pi / 2, 0.1), (0.3, 0.4), (0.3, -0.1)])
def test_angle_validation(phi, psi):
    with pytest.raises(ValueError):
        params_from_angles(phi, psi, 1.0, presets.BENCHMARK_MODULI)


def test_parameter_validation():
    m = presets.BENCHMARK_MODULI
    with pytest.raises(ValueError):
        DPParams(eta=0.0, eta_bar=1.0, xi=1.0, c0=1.0, moduli=m)
    with pytest.raises(ValueError):
        DPParams(eta=1.0, eta_bar=1.0, xi=1.0, c0=-1.0, moduli=m)


# ------------------------------------------------------------------ yield and q_tr

def test_yield_examples(unit_dp):
    bench = presets.dp_associative()
    assert yield_function(bench.xi * bench.c0 / bench.eta, 0.0, 0.0, bench) == pytest.approx(0.0, abs=1e-12)
    assert yield_function(0.0, 0.0, 0.0, bench) == pytest.approx(-bench.xi * bench.c0)
    assert yield_function(1.0, 2 * SQ2, 0.0, unit_dp) == pytest.approx(3.0)


def test_q_tr_examples(unit_dp):
    trial = TrialState.from_invariants(1.0, 2 * SQ2)
    assert q_tr(2.0, trial, unit_dp) == pytest.approx(-1.0)
    assert q_tr(0.0, trial, unit_dp) == pytest.approx(yield_function(1.0, 2 * SQ2, 0.0, unit_dp))


def test_q_tr_decreasing(rng):
    params = presets.dp_nonassociative_hardening()
    trials = dp_trials(rng, 200, params, ebar_max=0.003)
    g = np.linspace(0.0, 1e-2, 1000)[:, None]
    q = q_tr(g, trials, params)
    assert np.all(np.diff(q, axis=0) < 0.0)
    assert np.all(q_tr(1e6, trials, params) < -1e3)


# ------------------------------------------------------------------ return map examples

def test_elastic_trial_unchanged():
    params = presets.dp_associative()
    trial = TrialState.from_invariants(0.0, 10.0)
    res = return_map(trial, params)
    assert res.kind == ReturnKind.ELASTIC and res.delta_lambda == 0.0
    assert np.array_equal(res.sigma, trial.sigma_tr)
    assert np.array_equal(res.tangent, params.moduli.stiffness)


def test_smooth_example(unit_dp):
    res = return_map(TrialState.from_invariants(1.0, 2 * SQ2), unit_dp)
    assert res.kind == ReturnKind.SMOOTH
    assert res.delta_lambda == pytest.approx(1.5)
    inv = tn.invariants(res.sigma)
    assert inv.p == pytest.approx(-0.5)
    assert inv.rho == pytest.approx(SQ2 / 2)
    assert yield_function(inv.p, inv.rho, 0.0, unit_dp) == pytest.approx(0.0, abs=1e-14)


def test_apex_example(unit_dp):
    trial = TrialState.from_invariants(3.0, SQ2)
    assert q_tr(1.0, trial, unit_dp) == pytest.approx(2.0)
    res = return_map(trial, unit_dp)
    assert res.kind == ReturnKind.APEX
    assert res.delta_lambda == pytest.approx(3.0)
    np.testing.assert_allclose(res.sigma, 0.0, atol=1e-15)


def test_apex_tangent_vanishes_without_hardening(unit_dp):
    res = return_map(TrialState.from_invariants(3.0, SQ2), unit_dp)
    assert np.all(res.tangent == 0.0)


def test_newton_path_matches_closed_form(rng):
    for params in (presets.dp_associative(), params_from_angles(0.4, 0.2, 30.0, presets.BENCHMARK_MODULI,
                                                                  LinearHardening(800.0))):
        trials = dp_trials(rng, 2000, params, ebar_max=0.01)
        a = return_map(trials, params)
        b = return_map(trials, params, method="newton")
        assert np.array_equal(a.kind, b.kind)
        np.testing.assert_allclose(b.delta_lambda, a.delta_lambda, rtol=1e-12, atol=1e-300)


def test_unknown_method_rejected(unit_dp):
    with pytest.raises(ValueError):
        return_map(TrialState.from_invariants(1.0, 1.0), unit_dp, method="guess")


# ------------------------------------------------------------------ properties

PARAMS = {
    "associative": presets.dp_associative,
    "nonassociative-hardening": presets.dp_nonassociative_hardening,
}


@pytest.mark.parametrize("name", PARAMS)
def test_kkt_flow_rule_and_classification(name, rng):
    params = PARAMS[name]()
    K, G = params.moduli.K, params.moduli.G
    trials = dp_trials(rng, 5000, params, ebar_max=0.003 if name != "associative" else 0.0)
    res = return_map(trials, params)
    kinds = set(np.unique(res.kind))
    assert kinds == {0, 1, 2}
    inv = tn.invariants(res.sigma)
    plastic = res.kind != ReturnKind.ELASTIC
    # classification a priori vs posterior
    assert np.all((res.kind == ReturnKind.SMOOTH) == (plastic & (inv.rho > 0)))
    assert np.all((res.kind == ReturnKind.APEX) == (plastic & (inv.rho == 0)))
    # KKT
    f = yield_function(inv.p, inv.rho, params.hardening(res.eps_bar_p), params)
    scale = params.stress_scale
    assert np.all(res.delta_lambda >= 0.0)
    assert np.all(f <= 1e-10 * scale)
    assert np.all(np.abs(f[plastic]) <= 1e-10 * scale)
    np.testing.assert_array_equal(res.delta_lambda == 0, ~plastic)
    np.testing.assert_allclose(res.eps_bar_p, trials.eps_bar_p_tr + res.delta_lambda * params.xi)
    # flow rule
    sm = res.kind == ReturnKind.SMOOTH
    flow = trials.sigma_tr - res.delta_lambda[:, None] * (G * SQ2 * trials.n_tr + K * params.eta_bar * tn.IDENTITY)
    err = np.linalg.norm(res.sigma - flow, axis=1)
    assert np.all(err[sm] <= 1e-10 * np.linalg.norm(trials.sigma_tr[sm], axis=1))
    ap = res.kind == ReturnKind.APEX
    assert np.all(trials.rho_tr[ap] <= res.delta_lambda[ap] * G * SQ2 + 1e-10)


def test_multiplier_unique_against_bisection(rng):
    params = presets.dp_nonassociative_hardening()
    trials = dp_trials(rng, 400, params, ebar_max=0.003)
    res = return_map(trials, params)
    K, G = params.moduli.K, params.moduli.G
    for k in np.flatnonzero(res.kind != 0):
        ref = dp_multiplier_bisection(trials.p_tr[k], trials.rho_tr[k], trials.eps_bar_p_tr[k], K, G,
                                      params.eta, params.eta_bar, params.xi, params.c0,
                                      lambda x: float(params.hardening(x)))
        assert res.delta_lambda[k] == pytest.approx(ref, rel=1e-12)


def _stress_map(params, ebar0=0.0):
    def run(eps):
        return integrate(params, eps[None, :], np.zeros((1, 6)), np.array([ebar0]), tangent=False).sigma[0]
    return run


def _smooth_strains(rng, params, n, ebar_max=0.0):
    trials = dp_trials(rng, 20 * n, params, ebar_max)
    res = return_map(trials, params, tangent=False)
    g = trials.rho_tr / (params.moduli.G * SQ2)
    # well inside the smooth regime so that the FD stencil stays on one branch
    ok = (res.kind == ReturnKind.SMOOTH) & (res.delta_lambda < 0.9 * g) & (res.delta_lambda > 0.05 * g)
    idx = np.flatnonzero(ok)[:n]
    eps = tn.elastic_inverse(params.moduli, trials.sigma_tr[idx])
    return eps, trials.eps_bar_p_tr[idx]


@pytest.mark.parametrize("name", PARAMS)
def test_smooth_tangent_matches_finite_differences(name, rng):
    params = PARAMS[name]()
    eps_all, ebar_all = _smooth_strains(rng, params, 10, 0.001 if name != "associative" else 0.0)
    for eps, ebar in zip(eps_all, ebar_all):
        up = integrate(params, eps[None, :], np.zeros((1, 6)), np.array([ebar]))
        T = up.tangent[0]
        scale = np.linalg.norm(eps)
        for h in (1e-5, 1e-6, 1e-7):
            fd = fd_tangent(_stress_map(params, ebar), eps, h * scale)
            assert np.linalg.norm(fd - T) <= 1e-5 * np.linalg.norm(T)


def test_tangent_symmetry_iff_associative(rng):
    for name, symmetric in (("associative", True), ("nonassociative-hardening", False)):
        params = PARAMS[name]()
        trials = dp_trials(rng, 2000, params)
        res = return_map(trials, params)
        for kind in (ReturnKind.SMOOTH, ReturnKind.APEX):
            A = res.tangent[res.kind == kind]
            asym = np.linalg.norm(A - np.swapaxes(A, 1, 2), axis=(1, 2))
            norm = np.linalg.norm(A, axis=(1, 2))
            if symmetric:
                assert np.all(asym <= 1e-12 * norm)
            elif kind == ReturnKind.SMOOTH:
                assert np.all(asym > 1e-6 * norm)


def test_apex_tangent_formula_with_hardening():
    params = params_from_angles(0.3, 0.3, 10.0, presets.BENCHMARK_MODULI, LinearHardening(5000.0))
    trial = TrialState.from_invariants(200.0, 0.0)
    res = return_map(trial, params)
    assert res.kind == ReturnKind.APEX
    K, kee = params.moduli.K, params.moduli.K * params.eta * params.eta_bar
    coef = K * (1 - kee / (kee + params.xi**2 * 5000.0))
    np.testing.assert_allclose(res.tangent, coef * np.outer(tn.IDENTITY, tn.IDENTITY), rtol=1e-13)
    fd = fd_tangent(_stress_map(params), tn.elastic_inverse(params.moduli, trial.sigma_tr), 1e-9)
    np.testing.assert_allclose(fd, res.tangent, rtol=1e-5, atol=1e-5 * np.abs(res.tangent).max())


def test_consistent_tangent_reused_on_result(rng):
    params = presets.dp_nonassociative_hardening()
    trials = dp_trials(rng, 300, params, ebar_max=0.003)
    res = return_map(trials, params)
    np.testing.assert_array_equal(consistent_tangent(res, trials, params), res.tangent)


def test_stress_continuous_across_apex_boundary(rng):
    params = presets.dp_associative()
    K, G = params.moduli.K, params.moduli.G
    n = tn.split(rng.standard_normal(6))[1]
    n /= np.linalg.norm(n)
    for rho in (1.0, 25.0, 300.0):
        p_star = params.xi * params.c0 / params.eta + rho * K * params.eta_bar / (G * SQ2)
        dp = 1e-8 * p_star
        lo = return_map(TrialState.from_invariants(p_star - dp, rho, n), params)
        hi = return_map(TrialState.from_invariants(p_star + dp, rho, n), params)
        assert {int(lo.kind), int(hi.kind)} <= {1, 2}
        jump = np.linalg.norm(hi.sigma - lo.sigma)
        assert jump <= 10 * 2 * dp * math.sqrt(3)


def test_saturating_hardening_reaches_cohesion():
    params = presets.dp_nonassociative_hardening()
    p_big = 400.0
    res = return_map(TrialState.from_invariants(p_big, 0.0), params)
    assert res.kind == ReturnKind.APEX
    # once saturated the apex sits at xi c / eta with c = 50
    if res.eps_bar_p >= 0.002:
        assert tn.invariants(res.sigma).p == pytest.approx(params.xi * 50.0 / params.eta, rel=1e-12)


def test_scalar_and_batched_agree(rng):
    params = presets.dp_nonassociative_hardening()
    trials = dp_trials(rng, 50, params, ebar_max=0.002)
    batch = return_map(trials, params)
    for k in range(50):
        single = return_map(TrialState(trials.sigma_tr[k], trials.eps_bar_p_tr[k]), params)
        np.testing.assert_array_equal(single.sigma, batch.sigma[k])
        assert single.kind == batch.kind[k]
