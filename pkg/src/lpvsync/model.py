"""Data model: LPV reference plant, agents, measurement channels, and the
scheduling-parameter signal.

All matrix-valued model data is frozen to float64 numpy arrays at
construction; model objects are immutable after validation and safe to
share across parallel workers.

The plant nonlinearity is drawn from a named registry so that the
Lipschitz bound matrix R stays tied to the function that must satisfy
``|phi(x1)-phi(x2)|^2 <= (x1-x2)' R (x1-x2)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, OutOfRangeError
from .graph import DiGraph, is_weakly_connected

SPD_EIG_TOL = 1e-12


def _arr(a, dtype=float):
    out = np.asarray(a, dtype=dtype)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# Nonlinearity registry
# ---------------------------------------------------------------------------

_PHI_REGISTRY = {}


def register_phi(name, factory):
    """Register a nonlinearity factory: params dict -> callable x -> phi(x).

    Callables must accept both a single state (n,) and a batch (..., n)
    and return matching (..., l) output.
    """
    _PHI_REGISTRY[name] = factory


def resolve_phi(spec):
    """Resolve a PhiSpec to its callable."""
    if spec.name not in _PHI_REGISTRY:
        raise KeyError(f"unknown nonlinearity {spec.name!r}; "
                       f"known: {sorted(_PHI_REGISTRY)}")
    return _PHI_REGISTRY[spec.name](dict(spec.params))


@dataclass(frozen=True)
class PhiSpec:
    """Named nonlinearity with parameters, resolvable via the registry."""

    name: str
    params: tuple = ()  # sorted (key, value) pairs so the spec hashes

    @staticmethod
    def make(name, **params):
        return PhiSpec(name, tuple(sorted(params.items())))


def _phi_zero(params):
    l = int(params.get("width", 0))

    def phi(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (l,))

    return phi


def _phi_linear_gain(params):
    # phi(x) = gain * x restricted to the first `width` coordinates;
    # Lipschitz with R = gain^2 I.
    gain = float(params["gain"])
    width = params.get("width")

    def phi(x):
        x = np.asarray(x, dtype=float)
        w = x.shape[-1] if width is None else int(width)
        return gain * x[..., :w]

    return phi


register_phi("zero", _phi_zero)
register_phi("linear_gain", _phi_linear_gain)


# ---------------------------------------------------------------------------
# Parameter dependence of the plant matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamDependence:
    """A(rho): either affine ``A0 + rho*Delta`` or a tabulated curve with
    linear interpolation between strictly increasing samples."""

    kind: str
    A0: np.ndarray = None
    Delta: np.ndarray = None
    table_rho: np.ndarray = None
    table_mats: np.ndarray = None  # (S, n, n)

    @staticmethod
    def affine(A0, Delta):
        A0 = _arr(A0)
        Delta = _arr(Delta)
        if A0.shape != Delta.shape or A0.ndim != 2 or A0.shape[0] != A0.shape[1]:
            raise DimensionMismatchError("A0 and Delta must be equal square matrices")
        return ParamDependence(kind="affine", A0=A0, Delta=Delta)

    @staticmethod
    def tabulated(samples):
        rhos = _arr([s[0] for s in samples])
        mats = _arr([s[1] for s in samples])
        if len(rhos) < 2:
            raise ValueError("tabulated dependence needs at least two samples")
        if not np.all(np.diff(rhos) > 0):
            raise ValueError("tabulated samples must be strictly increasing in rho")
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise DimensionMismatchError("tabulated matrices must be square")
        return ParamDependence(kind="tabulated", table_rho=rhos, table_mats=mats)

    @property
    def dim(self):
        if self.kind == "affine":
            return self.A0.shape[0]
        return self.table_mats.shape[1]

    def __call__(self, rho):
        if self.kind == "affine":
            return self.A0 + rho * self.Delta
        rhos, mats = self.table_rho, self.table_mats
        if rho < rhos[0] or rho > rhos[-1]:
            raise OutOfRangeError(
                f"rho={rho} outside tabulated span [{rhos[0]}, {rhos[-1]}]")
        k = int(np.searchsorted(rhos, rho, side="right") - 1)
        k = min(k, len(rhos) - 2)
        w = (rho - rhos[k]) / (rhos[k + 1] - rhos[k])
        return (1.0 - w) * mats[k] + w * mats[k + 1]


@dataclass(frozen=True)
class ReferencePlant:
    """Leader dynamics ``xdot = A(rho) x + B1 phi(x) + B20 w0``."""

    A: ParamDependence
    B1: np.ndarray
    B20: np.ndarray
    phi: PhiSpec
    R: np.ndarray  # Lipschitz bound matrix, symmetric PSD

    def __post_init__(self):
        object.__setattr__(self, "B1", _arr(self.B1))
        object.__setattr__(self, "B20", _arr(self.B20))
        object.__setattr__(self, "R", _arr(self.R))
        n = self.A.dim
        for name in ("B1", "B20"):
            m = getattr(self, name)
            if m.ndim != 2 or m.shape[0] != n:
                raise DimensionMismatchError(f"{name} must have {n} rows")
        if self.R.shape != (n, n):
            raise DimensionMismatchError(f"R must be {n}x{n}")

    @property
    def n(self):
        return self.A.dim

    @property
    def phi_width(self):
        return self.B1.shape[1]

    def phi_fn(self):
        return resolve_phi(self.phi)

    @property
    def lipschitz_free(self):
        """True when R == 0, i.e. the nonlinearity channel carries nothing."""
        return not np.any(self.R)


@dataclass(frozen=True)
class AgentModel:
    """Per-agent disturbance input, plant measurement, and neighbor links.

    ``links`` maps an in-neighbor index j to the pair (H_ij, G_ij) defining
    the broadcast ``v_ij = H_ij x_j + G_ij w_ij`` that this agent receives.
    """

    B2: np.ndarray   # n x r_i
    C2: np.ndarray   # m_i x n
    D2: np.ndarray   # m_i x r_i
    links: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "B2", _arr(self.B2))
        object.__setattr__(self, "C2", _arr(self.C2))
        object.__setattr__(self, "D2", _arr(self.D2))
        frozen = {}
        for j, (H, G) in self.links.items():
            frozen[int(j)] = (_arr(H), _arr(G))
        object.__setattr__(self, "links", frozen)

    @property
    def E2(self):
        return self.D2 @ self.D2.T

    def F(self, j):
        _, G = self.links[j]
        return G @ G.T


@dataclass(frozen=True)
class NetworkModel:
    """Graph + reference plant + N agents + scheduling interval."""

    graph: DiGraph
    plant: ReferencePlant
    agents: tuple
    gamma_interval: tuple  # (rho_min, rho_max)

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        lo, hi = self.gamma_interval
        object.__setattr__(self, "gamma_interval", (float(lo), float(hi)))

    @property
    def n(self):
        return self.plant.n

    @property
    def N(self):
        return self.graph.node_count

    def eval_A(self, rho):
        lo, hi = self.gamma_interval
        if not (lo <= rho <= hi):
            raise OutOfRangeError(f"rho={rho} outside [{lo}, {hi}]")
        return self.plant.A(rho)

    def mismatch_radius(self, rho_center, interval):
        lo, hi = self.gamma_interval
        a, b = interval
        if not (lo <= a <= b <= hi):
            raise OutOfRangeError(f"interval {interval} not inside [{lo}, {hi}]")
        return mismatch_radius(self.plant, rho_center, interval)


def eval_A(plant, rho):
    """Evaluate the plant matrix at ``rho``."""
    return plant.A(rho)


def mismatch_radius(plant, rho_center, interval, samples=1000):
    """Smallest alpha with (A(rho)-A(c))'(A(rho)-A(c)) <= alpha^2 I on [a, b].

    Affine dependence admits the exact value
    ``max(|a-c|, |b-c|) * sigma_max(Delta)``; tabulated dependence is
    estimated as the max largest-singular-value over a dense sample grid,
    so the result carries a sampling caveat.
    """
    a, b = float(interval[0]), float(interval[1])
    if b < a:
        raise ValueError(f"empty interval {interval}")
    dep = plant.A
    if dep.kind == "affine":
        reach = max(abs(a - rho_center), abs(b - rho_center))
        return reach * spectral_norm(dep.Delta)
    Ac = dep(rho_center)
    grid = np.linspace(a, b, samples)
    worst = 0.0
    for rho in grid:
        worst = max(worst, spectral_norm(dep(rho) - Ac))
    return worst


def spectral_norm(M):
    """Largest singular value; the matrix norm used throughout."""
    M = np.asarray(M, dtype=float)
    if not np.any(M):
        return 0.0
    return float(np.linalg.norm(M, 2))


# ---------------------------------------------------------------------------
# Scheduling-parameter signals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamSignal:
    """rho(t) known to all agents.

    kinds:
      constant  -- rho(t) = value
      table     -- piecewise-linear in t through (times, values)
      coupled   -- rho carries its own state integrated jointly with the
                   reference: rhodot = ode(rho, x_ref); used by
                   master-driven scenarios.
    """

    kind: str
    rho_dot_max: float
    value: float = 0.0
    times: np.ndarray = None
    values: np.ndarray = None
    ode: object = None
    rho0: float = 0.0

    @staticmethod
    def constant(value):
        return ParamSignal(kind="constant", rho_dot_max=0.0, value=float(value))

    @staticmethod
    def table(times, values, rho_dot_max=None):
        times = _arr(times)
        values = _arr(values)
        if times.ndim != 1 or times.shape != values.shape or len(times) < 2:
            raise ValueError("table signal needs matching 1-d times/values")
        if not np.all(np.diff(times) > 0):
            raise ValueError("table times must be strictly increasing")
        slopes = np.abs(np.diff(values) / np.diff(times))
        declared = float(slopes.max()) if rho_dot_max is None else float(rho_dot_max)
        return ParamSignal(kind="table", rho_dot_max=declared,
                           times=times, values=values)

    @staticmethod
    def coupled(ode, rho0, rho_dot_max):
        return ParamSignal(kind="coupled", rho_dot_max=float(rho_dot_max),
                           ode=ode, rho0=float(rho0))

    def __call__(self, t):
        if self.kind == "constant":
            return self.value
        if self.kind == "table":
            return float(np.interp(t, self.times, self.values))
        raise ValueError("coupled signals are evaluated by the integrator")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def add(self, msg):
        self.violations.append(msg)

    def __str__(self):
        return "valid" if self.ok else "; ".join(self.violations)


def _min_eig(M):
    return float(np.linalg.eigvalsh(0.5 * (M + M.T)).min())


def validate_network(net, lipschitz_samples=64, seed=0):
    """Check the standing assumptions; returns a report of violations.

    Checks: E2i = D2i D2i' positive definite, F_ij = G_ij G_ij' positive
    definite, R symmetric PSD, weak connectivity, dimension consistency,
    tabulated A covering the scheduling interval, and a randomized
    spot-check of the nonlinearity's Lipschitz bound.
    """
    rep = ValidationReport()
    g = net.graph
    n = net.n

    if len(net.agents) != g.node_count:
        rep.add(f"expected {g.node_count} agents, got {len(net.agents)}")
        return rep

    if not is_weakly_connected(g):
        rep.add("graph not weakly connected")

    R = net.plant.R
    if not np.allclose(R, R.T, atol=1e-12):
        rep.add("R not symmetric")
    elif _min_eig(R) < -1e-10 * max(1.0, spectral_norm(R)):
        rep.add("R not PSD")

    dep = net.plant.A
    if dep.kind == "tabulated":
        lo, hi = net.gamma_interval
        if dep.table_rho[0] > lo or dep.table_rho[-1] < hi:
            rep.add("tabulated A(rho) does not cover the scheduling interval")

    for i, ag in enumerate(net.agents):
        if ag.B2.shape[0] != n:
            rep.add(f"agent {i}: B2 rows != {n}")
        if ag.C2.shape[1] != n:
            rep.add(f"agent {i}: C2 cols != {n}")
        if ag.D2.shape != (ag.C2.shape[0], ag.B2.shape[1]):
            rep.add(f"agent {i}: D2 shape inconsistent with C2/B2")
            continue
        if _min_eig(ag.E2) <= SPD_EIG_TOL:
            rep.add(f"agent {i}: E2i singular")
        if set(ag.links) != set(g.in_neighbors[i]):
            rep.add(f"agent {i}: links {sorted(ag.links)} != in-neighbors "
                    f"{list(g.in_neighbors[i])}")
            continue
        for j, (H, G) in ag.links.items():
            if H.shape[1] != n:
                rep.add(f"agent {i}: H[{j}] cols != {n}")
            if G.shape[0] != H.shape[0]:
                rep.add(f"agent {i}: G[{j}] rows != H rows")
                continue
            if _min_eig(ag.F(j)) <= SPD_EIG_TOL:
                rep.add(f"agent {i}: F[{j}] singular")

    # Lipschitz spot-check of the registered nonlinearity against R
    try:
        phi = net.plant.phi_fn()
    except KeyError as exc:
        rep.add(str(exc))
        return rep
    rng = np.random.default_rng(seed)
    for _ in range(lipschitz_samples):
        x1 = rng.normal(scale=10.0, size=n)
        x2 = rng.normal(scale=10.0, size=n)
        d = x1 - x2
        lhs = float(np.sum((phi(x1) - phi(x2)) ** 2))
        rhs = float(d @ R @ d)
        if lhs > rhs * (1.0 + 1e-9) + 1e-12:
            rep.add(f"phi violates Lipschitz bound: {lhs:.3e} > {rhs:.3e}")
            break
    return rep
