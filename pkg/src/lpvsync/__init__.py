"""Gain-scheduled consensus synchronization for parameter-varying
multi-agent networks.

Workflow: describe the network (graph + LPV reference plant + agents),
synthesize per-grid-point certificates by semidefinite feasibility,
interpolate them into a continuous gain schedule, then simulate the
closed loop and evaluate disagreement performance.
"""

from .errors import (
    LpvSyncError,
    CoveringError,
    DimensionMismatchError,
    DivergenceError,
    DomainError,
    InfeasibleError,
    NoUpperBoundError,
    NumericalBreakdownError,
    OutOfRangeError,
    SingularCertificateError,
    ZeroDenominatorError,
)
from .graph import DiGraph, build_graph, is_weakly_connected, ring_graph
from .model import (
    AgentModel,
    NetworkModel,
    ParamDependence,
    ParamSignal,
    PhiSpec,
    ReferencePlant,
    eval_A,
    mismatch_radius,
    register_phi,
    spectral_norm,
    validate_network,
)
from .lmi import (
    AffineLmi,
    DecisionLayout,
    FeasibleCertificate,
    Infeasible,
    SolverOptions,
    assemble_lmi,
    check_reduced_lmi,
    compute_gains,
    minimize_gamma_sq,
    solve_feasibility,
)
from .scheduling import (
    GainSchedule,
    GridDesign,
    build_grid,
    certify_interpolants,
    check_rate_condition,
    gains_at,
    probe_gain_continuity,
    rate_bound,
    synthesize_schedule,
    tau_at,
    x_at,
)
from .simulation import (
    DisturbanceSpec,
    SimulationTrace,
    disagreement_series,
    dissipation_check,
    export_trace_csv,
    hinf_ratio,
    replay_inputs,
    rk4_integrate,
    rk4_step,
    simulate,
    sync_error_series,
)
from .archive import load_schedule, network_fingerprint, save_schedule

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
