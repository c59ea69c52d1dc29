import numpy as np
import pytest

from lpvsync import chaos, scheduling

import helpers


@pytest.fixture(scope="session")
def triangle_net():
    return helpers.triangle_network()


@pytest.fixture(scope="session")
def triangle_schedule(triangle_net):
    grid = scheduling.build_grid(triangle_net, **helpers.triangle_grid_args())
    return scheduling.synthesize_schedule(triangle_net, grid,
                                          gamma_sq=helpers.TRIANGLE_GAMMA_SQ)


@pytest.fixture(scope="session")
def benchmark_schedule():
    """Level-minimizing synthesis on the bundled five-agent benchmark.

    The expensive fixture of the suite (several minutes); shared by every
    test that exercises the benchmark schedule.
    """
    net = chaos.build_slave_network()
    grid = scheduling.build_grid(net,
                                 count=chaos.BENCHMARK_GRID_COUNT,
                                 alpha_sq=chaos.BENCHMARK_ALPHA_SQ,
                                 delta=chaos.BENCHMARK_DELTA,
                                 Q=chaos.BENCHMARK_Q_SCALE * np.eye(2))
    return scheduling.synthesize_schedule(net, grid)


@pytest.fixture(scope="session")
def theta0_run(benchmark_schedule):
    return chaos.run_paper_example(theta_sim=0.0, schedule=benchmark_schedule)


@pytest.fixture(scope="session")
def theta1_run(benchmark_schedule):
    return chaos.run_paper_example(theta_sim=1.0, schedule=benchmark_schedule)
