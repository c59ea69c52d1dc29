import numpy as np
import pytest

from lpvsync import lmi
from lpvsync.errors import SingularCertificateError
from lpvsync.lmi import (DecisionLayout, FeasibleCertificate, GainPlan,
                         Infeasible, SolverOptions, assemble_lmi,
                         check_reduced_lmi, compute_gains, minimize_gamma_sq,
                         solve_feasibility)

import helpers


def _random_spd(rng, n, scale=1.0):
    M = rng.normal(size=(n, n))
    return scale * (M @ M.T + n * np.eye(n))


def test_layout_pack_unpack_roundtrip():
    layout = DecisionLayout(n=3, N=2, with_tau=True, with_theta=True,
                            gamma_variable=False)
    rng = np.random.default_rng(1)
    X = [_random_spd(rng, 3) for _ in range(2)]
    tau = rng.uniform(0.1, 2.0, 2)
    theta = rng.uniform(0.1, 2.0, 2)
    z = layout.pack(X, tau=tau, theta=theta)
    assert z.shape == (layout.size,)
    X2, tau2, theta2 = layout.unpack(z)[:3]
    for a, b in zip(X, X2):
        assert np.allclose(a, b)
    assert np.allclose(tau, tau2)
    assert np.allclose(theta, theta2)


def test_layout_sizes_without_multipliers():
    layout = DecisionLayout(n=2, N=3, with_tau=False, with_theta=False,
                            gamma_variable=False)
    assert layout.size == 3 * 3
    with pytest.raises(IndexError):
        layout.tau_index(0)
    with pytest.raises(IndexError):
        layout.gamma_index


def test_subgradient_matches_directional_difference():
    net = helpers.triangle_network()
    prob = assemble_lmi(net, 1.0, 1.05, 0.2, 2.0 * np.eye(2), 0.25)
    rng = np.random.default_rng(2)
    z = rng.normal(scale=0.3, size=prob.layout.size)
    t, g = prob.subgradient(z)
    d = rng.normal(size=z.size)
    d /= np.linalg.norm(d)
    h = 1e-6
    fd = (prob.max_eig(z + h * d)[0] - prob.max_eig(z - h * d)[0]) / (2 * h)
    # valid at smooth points; the draw above is one
    assert fd == pytest.approx(float(g @ d), abs=1e-4)


def test_compute_gains_closed_form():
    net = helpers.triangle_network()
    rng = np.random.default_rng(3)
    X = [_random_spd(rng, 2) for _ in range(3)]
    gsq = 1.3
    L, K = compute_gains(X, net, gsq)
    for i, ag in enumerate(net.agents):
        Xinv = np.linalg.inv(X[i])
        L_ref = (gsq * Xinv @ ag.C2.T - ag.B2 @ ag.D2.T) @ np.linalg.inv(ag.E2)
        assert np.allclose(L[i], L_ref, atol=1e-10)
        for j in net.graph.in_neighbors[i]:
            H, _ = ag.links[j]
            K_ref = gsq * Xinv @ H.T @ np.linalg.inv(ag.F(j))
            assert np.allclose(K[i][j], K_ref, atol=1e-10)


def test_compute_gains_rejects_singular_certificate():
    net = helpers.triangle_network()
    X = [np.diag([1.0, 1e-14]), np.eye(2), np.eye(2)]
    with pytest.raises(SingularCertificateError):
        compute_gains(X, net, 1.0)


def test_gain_plan_uniform_and_loop_paths_agree():
    net = helpers.triangle_network()
    plan = GainPlan(net)
    assert plan.uniform
    rng = np.random.default_rng(4)
    X = np.stack([_random_spd(rng, 2) for _ in range(3)])
    L_fast, K_fast = plan.gains(X, 0.9)
    # force the generic loop
    plan_loop = GainPlan(net)
    plan_loop.uniform = False
    L_slow, K_slow = plan_loop.gains(list(X), 0.9)
    for a, b in zip(L_fast, L_slow):
        assert np.allclose(a, b, atol=1e-13)
    for Ka, Kb in zip(K_fast, K_slow):
        assert Ka.keys() == Kb.keys()
        for j in Ka:
            assert np.allclose(Ka[j], Kb[j], atol=1e-13)


def test_gain_plan_mixed_shapes():
    net = helpers.mixed_network()
    plan = GainPlan(net)
    assert not plan.uniform
    rng = np.random.default_rng(5)
    X = [_random_spd(rng, 2) for _ in range(2)]
    L, K = plan.gains(X, 1.1)
    assert L[0].shape == (2, 1) and L[1].shape == (2, 2)
    assert K[0][1].shape == (2, 1) and K[1][0].shape == (2, 2)


def test_solve_feasibility_triangle_point():
    net = helpers.triangle_network()
    prob = assemble_lmi(net, 1.0, helpers.TRIANGLE_GAMMA_SQ, 0.2,
                        2.0 * np.eye(2), 0.25)
    res = solve_feasibility(prob)
    assert isinstance(res, FeasibleCertificate)
    assert res.margin > 0
    t, _ = prob.max_eig(lmi.certificate_vector(prob, res))
    assert t < 0


def test_solve_feasibility_reports_infeasible_at_tiny_level():
    net = helpers.triangle_network()
    prob = assemble_lmi(net, 1.0, 1e-4, 0.2, 2.0 * np.eye(2), 0.25)
    opts = SolverOptions(max_iter=4000, restarts=1)
    res = solve_feasibility(prob, options=opts)
    assert isinstance(res, Infeasible)
    assert not res


def test_minimize_gamma_sq_brackets_the_level():
    net = helpers.triangle_network()
    gsq, cert = minimize_gamma_sq(net, 1.0, 0.2, 2.0 * np.eye(2), 0.25,
                                  tol=0.05)
    assert np.isfinite(gsq) and gsq > 0
    assert cert.gamma_sq == pytest.approx(gsq)
    # the returned level admits the returned certificate
    prob = assemble_lmi(net, 1.0, gsq, 0.2, 2.0 * np.eye(2), 0.25)
    t, _ = prob.max_eig(lmi.certificate_vector(prob, cert))
    assert t < 0


def test_check_reduced_lmi_accepts_synthesized_point():
    net = helpers.triangle_network()
    prob = assemble_lmi(net, 1.0, helpers.TRIANGLE_GAMMA_SQ, 0.2,
                        2.0 * np.eye(2), 0.25)
    res = solve_feasibility(prob)
    chk = check_reduced_lmi(list(res.X), res.tau, net, 1.0,
                            helpers.TRIANGLE_GAMMA_SQ, 0.2, 2.0 * np.eye(2))
    assert chk.satisfied and chk.max_eig < 0


def test_fix_gamma_matches_fixed_assembly():
    net = helpers.triangle_network()
    var = assemble_lmi(net, 0.7, lmi.GAMMA_VARIABLE, 0.2, 2.0 * np.eye(2),
                       0.25)
    fixed = var.fix_gamma(1.4)
    direct = assemble_lmi(net, 0.7, 1.4, 0.2, 2.0 * np.eye(2), 0.25)
    rng = np.random.default_rng(6)
    z = rng.normal(scale=0.2, size=fixed.layout.size)
    for Mf, Md in zip(fixed.evaluate(z), direct.evaluate(z)):
        assert np.allclose(Mf, Md, atol=1e-12)
