"""Shared three-agent example network used by the numbered demo scripts.

Same system as demos/01_build_and_validate.py and
demos/configs/triangle.yaml: a directed ring of three agents around a
lightly damped oscillator with rho-dependent stiffness.
"""

import numpy as np

from lpvsync.graph import build_graph
from lpvsync.model import (AgentModel, NetworkModel, ParamDependence,
                           PhiSpec, ReferencePlant)


def triangle_network(interval=(0.0, 2.0)):
    graph = build_graph(3, [(0, 1), (1, 2), (2, 0)])
    plant = ReferencePlant(
        A=ParamDependence.affine(np.array([[0.0, 1.0], [-2.0, -1.0]]),
                                 np.array([[0.0, 0.0], [-0.2, 0.0]])),
        B1=np.array([[0.0], [1.0]]),
        B20=np.array([[0.1], [0.05]]),
        phi=PhiSpec.make("zero", width=1),
        R=np.zeros((2, 2)),
    )
    rows_C = np.array([[1.0, 0.2], [0.8, -0.6], [0.5, 0.86]])
    rows_H = np.array([[-0.25, 0.97], [0.6, 0.8], [-0.87, 0.5]])
    agents = []
    for i in range(3):
        j = graph.in_neighbors[i][0]
        agents.append(AgentModel(
            B2=np.array([[0.05], [-0.04]]),
            C2=rows_C[i:i + 1],
            D2=np.array([[0.1]]),
            links={j: (rows_H[i:i + 1], np.array([[0.5]]))},
        ))
    return NetworkModel(graph=graph, plant=plant, agents=tuple(agents),
                        gamma_interval=interval)
