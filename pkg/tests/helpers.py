"""Shared network builders for the test suite."""

import numpy as np

from lpvsync import graph, model

TRIANGLE_GAMMA_SQ = 1.05


def triangle_network(interval=(0.0, 2.0)):
    """Three-agent directed ring around a lightly damped oscillator.

    Mirrors demos/configs/triangle.yaml: each agent's plant row and link
    row together span the plane, so the coupled inequality is feasible
    at a modest attenuation level.
    """
    g = graph.build_graph(3, [(0, 1), (1, 2), (2, 0)])
    dep = model.ParamDependence.affine(
        np.array([[0.0, 1.0], [-2.0, -1.0]]),
        np.array([[0.0, 0.0], [-0.2, 0.0]]))
    plant = model.ReferencePlant(
        A=dep,
        B1=np.array([[0.0], [1.0]]),
        B20=np.array([[0.1], [0.05]]),
        phi=model.PhiSpec.make("zero", width=1),
        R=np.zeros((2, 2)))
    B2 = np.array([[0.05], [-0.04]])
    D2 = np.array([[0.1]])
    G = np.array([[0.5]])
    rows_C = [[1.0, 0.2], [0.8, -0.6], [0.5, 0.86]]
    rows_H = [[-0.25, 0.97], [0.6, 0.8], [-0.87, 0.5]]
    agents = []
    for i in range(3):
        j = g.in_neighbors[i][0]
        agents.append(model.AgentModel(
            B2=B2.copy(),
            C2=np.array([rows_C[i]]),
            D2=D2.copy(),
            links={j: (np.array([rows_H[i]]), G.copy())}))
    return model.NetworkModel(graph=g, plant=plant, agents=tuple(agents),
                              gamma_interval=tuple(interval))


def triangle_grid_args():
    """Grid keyword arguments matching the demo configuration."""
    return dict(count=3, alpha=0.25, delta=0.2, Q=2.0 * np.eye(2))


def mixed_network():
    """Two agents with different channel shapes (scalar vs 2-channel
    measurements), exercising the per-agent code paths."""
    g = graph.build_graph(2, [(0, 1), (1, 0)])
    dep = model.ParamDependence.affine(
        np.array([[0.0, 1.0], [-2.0, -1.0]]),
        np.array([[0.0, 0.0], [-0.1, 0.0]]))
    plant = model.ReferencePlant(
        A=dep,
        B1=np.array([[0.0], [1.0]]),
        B20=np.array([[0.1], [0.05]]),
        phi=model.PhiSpec.make("zero", width=1),
        R=np.zeros((2, 2)))
    a0 = model.AgentModel(
        B2=np.array([[0.05], [-0.04]]),
        C2=np.array([[1.0, 0.2]]),
        D2=np.array([[0.1]]),
        links={1: (np.array([[-0.25, 0.97]]), np.array([[0.5]]))})
    a1 = model.AgentModel(
        B2=np.array([[0.02, 0.0], [0.0, 0.03]]),
        C2=np.array([[0.8, -0.6], [0.3, 0.9]]),
        D2=0.1 * np.eye(2),
        links={0: (np.array([[0.6, 0.8], [-0.7, 0.6]]), 0.5 * np.eye(2))})
    return model.NetworkModel(graph=g, plant=plant, agents=(a0, a1),
                              gamma_interval=(0.0, 2.0))
