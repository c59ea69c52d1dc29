import numpy as np
import pytest

from lpvsync import model
from lpvsync.model import (ParamDependence, ParamSignal, PhiSpec,
                           mismatch_radius, resolve_phi, spectral_norm,
                           validate_network)

import helpers


def test_affine_dependence_evaluates():
    A0 = np.array([[1.0, 0.0], [0.0, 2.0]])
    D = np.array([[0.0, 1.0], [0.0, 0.0]])
    dep = ParamDependence.affine(A0, D)
    assert dep.dim == 2
    assert np.allclose(dep(0.5), A0 + 0.5 * D)


def test_tabulated_dependence_interpolates():
    from lpvsync.errors import OutOfRangeError
    mats = [np.eye(2), 3.0 * np.eye(2)]
    dep = ParamDependence.tabulated([(0.0, mats[0]), (1.0, mats[1])])
    assert np.allclose(dep(0.5), 2.0 * np.eye(2))
    assert np.allclose(dep(1.0), mats[1])
    with pytest.raises(OutOfRangeError):
        dep(2.0)


def test_phi_registry_roundtrip_and_unknown():
    phi = resolve_phi(PhiSpec.make("zero", width=3))
    assert phi(np.ones(5)).shape == (3,)
    assert phi(np.ones((7, 5))).shape == (7, 3)
    with pytest.raises(KeyError):
        resolve_phi(PhiSpec.make("no-such-phi"))


def test_linear_gain_phi_batch():
    phi = resolve_phi(PhiSpec.make("linear_gain", gain=2.0, width=1))
    x = np.array([[1.0, 5.0], [3.0, 7.0]])
    assert np.allclose(phi(x), [[2.0], [6.0]])


def test_mismatch_radius_affine_exact():
    dep = ParamDependence.affine(np.zeros((2, 2)),
                                 np.array([[0.0, 0.0], [-0.2, 0.0]]))
    plant = model.ReferencePlant(A=dep, B1=np.zeros((2, 1)),
                                 B20=np.zeros((2, 1)),
                                 phi=PhiSpec.make("zero", width=1),
                                 R=np.zeros((2, 2)))
    # radius = max reach from the center times sigma(Delta)
    assert mismatch_radius(plant, 1.0, (0.0, 2.0)) == pytest.approx(0.2)
    assert mismatch_radius(plant, 0.5, (0.0, 2.0)) == pytest.approx(0.3)


def test_spectral_norm_matches_svd():
    rng = np.random.default_rng(0)
    for _ in range(5):
        M = rng.normal(size=(4, 3))
        assert spectral_norm(M) == pytest.approx(np.linalg.svd(M)[1][0])
    assert spectral_norm(np.zeros((3, 3))) == 0.0


def test_param_signal_kinds():
    c = ParamSignal.constant(1.5)
    assert c(10.0) == 1.5 and c.rho_dot_max == 0.0
    tab = ParamSignal.table([0.0, 2.0, 4.0], [0.0, 1.0, 0.0])
    assert tab(1.0) == pytest.approx(0.5)
    assert tab.rho_dot_max == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ParamSignal.table([0.0, 0.0], [1.0, 2.0])
    cp = ParamSignal.coupled(lambda r, x: -r, rho0=1.0, rho_dot_max=np.inf)
    with pytest.raises(ValueError):
        cp(0.0)


def test_validate_network_accepts_good_network():
    assert validate_network(helpers.triangle_network()).ok
    assert validate_network(helpers.mixed_network()).ok


def test_validate_network_flags_lipschitz_violation():
    net = helpers.triangle_network()
    # phi = 2x on one coordinate but R = 0 cannot bound it
    plant = model.ReferencePlant(
        A=net.plant.A, B1=net.plant.B1, B20=net.plant.B20,
        phi=PhiSpec.make("linear_gain", gain=2.0, width=1),
        R=np.zeros((2, 2)))
    bad = model.NetworkModel(graph=net.graph, plant=plant,
                             agents=net.agents,
                             gamma_interval=net.gamma_interval)
    rep = validate_network(bad)
    assert not rep.ok
    assert any("Lipschitz" in v for v in rep.violations)


def test_validate_network_flags_missing_link():
    net = helpers.triangle_network()
    a0 = net.agents[0]
    stripped = model.AgentModel(B2=a0.B2, C2=a0.C2, D2=a0.D2, links={})
    bad = model.NetworkModel(graph=net.graph,
                             agents=(stripped,) + net.agents[1:],
                             plant=net.plant,
                             gamma_interval=net.gamma_interval)
    rep = validate_network(bad)
    assert not rep.ok
