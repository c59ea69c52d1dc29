"""Closed-loop network simulation and performance metrics.

Integrates the reference plant plus N agents under the scheduled
protocol with classical fixed-step RK4, evaluating gains, the scheduling
parameter, and disturbances at every stage time. Metrics cover the
disagreement cost, the attenuation ratio against the synthesized level,
per-agent dissipation inequalities, and synchronization error series.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DivergenceError, OutOfRangeError, ZeroDenominatorError)
from .lmi import _as_Q, _as_delta

DIVERGENCE_LIMIT = 1e12


# ---------------------------------------------------------------------------
# Disturbances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DisturbanceSpec:
    """Finite-energy disturbance family for all channels (w0, w_i, w_ij).

    kinds:
      zero      -- all channels identically zero
      decaying  -- seeded Gaussian noise, sampled on a fixed grid of
                   spacing noise_dt, run through a first-order low-pass
                   filter (pole rad/s) held piecewise-constant, then
                   multiplied by amplitude * exp(-decay * t). The noise
                   grid is independent of the integration step, so
                   energies converge under step refinement and identical
                   seeds give bit-identical signals.
      table     -- deterministic per-channel samples, linearly
                   interpolated (end values held outside the table).
    """

    kind: str
    seed: int = 0
    amplitude: float = 0.1
    decay: float = 0.05
    pole: float = 10.0
    noise_dt: float = 0.01
    table: object = None

    @staticmethod
    def zero():
        return DisturbanceSpec(kind="zero")

    @staticmethod
    def decaying(seed=0, amplitude=0.1, decay=0.05, pole=10.0, noise_dt=0.01):
        if decay <= 0 or pole <= 0 or noise_dt <= 0:
            raise ValueError("decay, pole and noise_dt must be positive")
        return DisturbanceSpec(kind="decaying", seed=int(seed),
                               amplitude=float(amplitude), decay=float(decay),
                               pole=float(pole), noise_dt=float(noise_dt))

    @staticmethod
    def from_table(times, w0=None, w_agents=None, w_links=None):
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or times.size < 2 or np.any(np.diff(times) <= 0):
            raise ValueError("table times must be strictly increasing, >= 2")

        def _prep(v):
            return None if v is None else np.atleast_2d(np.asarray(v, float))

        tab = (times,
               _prep(w0),
               None if w_agents is None else
               {int(i): _prep(v) for i, v in dict(w_agents).items()},
               None if w_links is None else
               {(int(i), int(j)): _prep(v)
                for (i, j), v in dict(w_links).items()})
        return DisturbanceSpec(kind="table", table=tab)

    def realize(self, net, T):
        return _RealizedDisturbance(self, net, T)


class _RealizedDisturbance:
    """Evaluates every channel at arbitrary times in [0, T].

    Channels live concatenated in one vector ordered [w0, agents by
    index, links by key]; per-channel views slice into it, and the whole
    vector for the most recent t is cached so the four RK4 stage times
    cost two exponentials each.
    """

    def __init__(self, spec, net, T):
        self.spec = spec
        self.net = net
        self.dims_w0 = net.plant.B20.shape[1]
        self.dims_agent = [ag.D2.shape[1] for ag in net.agents]
        self.link_keys = [(i, j) for i, ag in enumerate(net.agents)
                          for j in sorted(ag.links)]
        self.dims_link = {(i, j): net.agents[i].links[j][1].shape[1]
                          for (i, j) in self.link_keys}
        dims = ([self.dims_w0] + list(self.dims_agent)
                + [self.dims_link[k] for k in self.link_keys])
        self._offs = np.concatenate([[0], np.cumsum(dims)]).astype(int)
        self._agent_off = int(self._offs[1])
        self._link_off = int(self._offs[1 + len(self.dims_agent)])
        self._stacks = {}
        if spec.kind == "decaying":
            self._init_decaying(T, dims)

    def _init_decaying(self, T, dims):
        s = self.spec
        K = int(math.ceil(T / s.noise_dt)) + 2
        children = np.random.SeedSequence(s.seed).spawn(len(dims))
        a = math.exp(-s.pole * s.noise_dt)
        eta = np.empty((K, int(self._offs[-1])))
        for child, lo, hi in zip(children, self._offs[:-1], self._offs[1:]):
            rng = np.random.default_rng(child)
            eta[:, lo:hi] = rng.standard_normal((K, hi - lo))
        v = np.zeros_like(eta)
        for j in range(K - 1):
            v[j + 1] = a * v[j] + (1.0 - a) * eta[j]
        self._eta, self._v = eta, v
        self._cache_t = None
        self._cache_vec = None

    def _all_decaying(self, t):
        if t != self._cache_t:
            s = self.spec
            j = min(int(t / s.noise_dt), self._eta.shape[0] - 2)
            j = max(j, 0)
            e = math.exp(-s.pole * (t - j * s.noise_dt))
            self._cache_vec = (s.amplitude * math.exp(-s.decay * t)) * (
                e * self._v[j] + (1.0 - e) * self._eta[j])
            self._cache_t = t
        return self._cache_vec

    def _decaying_eval(self, channel, t):
        vec = self._all_decaying(t)
        return vec[self._offs[channel]:self._offs[channel + 1]]

    def _table_eval(self, values, t, dim):
        if values is None:
            return np.zeros(dim)
        times = self.spec.table[0]
        return np.array([np.interp(t, times, col) for col in values])

    def w0(self, t):
        if self.spec.kind == "zero":
            return np.zeros(self.dims_w0)
        if self.spec.kind == "decaying":
            return self._decaying_eval(0, t)
        return self._table_eval(self.spec.table[1], t, self.dims_w0)

    def w_agent(self, i, t):
        if self.spec.kind == "zero":
            return np.zeros(self.dims_agent[i])
        if self.spec.kind == "decaying":
            return self._decaying_eval(1 + i, t)
        tab = self.spec.table[2]
        return self._table_eval(None if tab is None else tab.get(i), t,
                                self.dims_agent[i])

    def w_link(self, i, j, t):
        if self.spec.kind == "zero":
            return np.zeros(self.dims_link[(i, j)])
        if self.spec.kind == "decaying":
            ch = 1 + len(self.dims_agent) + self.link_keys.index((i, j))
            return self._decaying_eval(ch, t)
        tab = self.spec.table[3]
        return self._table_eval(None if tab is None else tab.get((i, j)), t,
                                self.dims_link[(i, j)])

    # stacked views for networks whose channels share widths
    def agents_at(self, t):
        """All agent channels as one (N, r) array; equal widths only."""
        N = len(self.dims_agent)
        if self.spec.kind == "decaying":
            return self._all_decaying(t)[self._agent_off:self._link_off] \
                .reshape(N, -1)
        if self.spec.kind == "zero":
            z = self._stacks.get("agents")
            if z is None:
                z = np.zeros((N, max(self.dims_agent, default=0)))
                self._stacks["agents"] = z
            return z
        return np.stack([self.w_agent(i, t) for i in range(N)])

    def links_at(self, t):
        """All link channels as one (len(link_keys), m) array, in
        link_keys order; equal widths only, at least one link."""
        M = len(self.link_keys)
        if self.spec.kind == "decaying":
            return self._all_decaying(t)[self._link_off:].reshape(M, -1)
        if self.spec.kind == "zero":
            z = self._stacks.get("links")
            if z is None:
                z = np.zeros((M, self.dims_link[self.link_keys[0]]))
                self._stacks["links"] = z
            return z
        return np.stack([self.w_link(i, j, t) for (i, j) in self.link_keys])


# ---------------------------------------------------------------------------
# Integrator
# ---------------------------------------------------------------------------

def rk4_step(f, t, y, dt):
    """One classical Runge-Kutta step for y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + (0.5 * dt) * k1)
    k3 = f(t + 0.5 * dt, y + (0.5 * dt) * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_integrate(f, y0, T, dt):
    """Fixed-step integration on [0, T]; returns (times, states)."""
    steps = int(round(T / dt))
    y = np.asarray(y0, dtype=float).copy()
    times = np.linspace(0.0, steps * dt, steps + 1)
    out = np.empty((steps + 1,) + y.shape)
    out[0] = y
    for k in range(steps):
        y = rk4_step(f, times[k], y, dt)
        out[k + 1] = y
    return times, out


# ---------------------------------------------------------------------------
# Trace
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimulationTrace:
    """Synchronized time series from one closed-loop run."""

    t: np.ndarray            # (S+1,)
    x: np.ndarray            # (S+1, n) reference states
    agents: np.ndarray       # (S+1, N, n)
    rho: np.ndarray          # (S+1,)
    u: np.ndarray            # (S+1, N, n) applied protocol inputs
    w0: np.ndarray           # (S+1, r0)
    w_agents: tuple          # per agent (S+1, r_i)
    w_links: dict            # (i, j) -> (S+1, m_ij)
    dt: float
    T: float

    @property
    def e(self):
        """Synchronization errors x - x_i, shape (S+1, N, n)."""
        return self.x[:, None, :] - self.agents


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

class _StackedOps:
    """Per-agent operators stacked for batched protocol evaluation.

    Only networks whose agents share every channel shape (and in-degree)
    qualify; ``build`` returns None otherwise and callers fall back to
    the per-agent loop. ``link_keys`` matches the realized-disturbance
    channel order, so link noise stacks index straight in.
    """

    @staticmethod
    def build(net):
        ags, nbrs = net.agents, net.graph.in_neighbors
        if len({(a.B2.shape, a.C2.shape, a.D2.shape) for a in ags}) != 1:
            return None
        if len({len(nb) for nb in nbrs}) != 1:
            return None
        pairs = [(i, j) for i in range(net.N) for j in nbrs[i]]
        if len({ags[i].links[j][0].shape for i, j in pairs}) > 1:
            return None
        if len({ags[i].links[j][1].shape for i, j in pairs}) > 1:
            return None
        return _StackedOps(net)

    def __init__(self, net):
        ags, nbrs, N = net.agents, net.graph.in_neighbors, net.N
        self.C2s = np.stack([a.C2 for a in ags])
        self.D2s = np.stack([a.D2 for a in ags])
        self.B2s = np.stack([a.B2 for a in ags])
        self.d = len(nbrs[0])
        self.nbr = np.array([list(nb) for nb in nbrs], dtype=int) \
            .reshape(N, self.d)
        self.Hs = [np.stack([ags[i].links[nbrs[i][p]][0] for i in range(N)])
                   for p in range(self.d)]
        self.Gs = [np.stack([ags[i].links[nbrs[i][p]][1] for i in range(N)])
                   for p in range(self.d)]
        self.link_keys = [(i, j) for i, a in enumerate(ags)
                          for j in sorted(a.links)]
        pos = {key: q for q, key in enumerate(self.link_keys)}
        self.slot = [np.array([pos[(i, nbrs[i][p])] for i in range(N)])
                     for p in range(self.d)]

    def inputs(self, Lst, Ksts, xr, ags, wag, wl):
        """u for all agents; wl may be None when there are no links."""
        res = np.einsum("nmk,nk->nm", self.C2s, xr - ags)
        res += np.einsum("nmr,nr->nm", self.D2s, wag)
        u = np.einsum("nim,nm->ni", Lst, res)
        for p in range(self.d):
            lr = np.einsum("nhk,nk->nh", self.Hs[p],
                           ags[self.nbr[:, p]] - ags)
            lr += np.einsum("nhr,nr->nh", self.Gs[p], wl[self.slot[p]])
            u += np.einsum("nih,nh->ni", Ksts[p], lr)
        return u


def _batched_drift(A, phi, B1, states):
    """Rows of A x + B1 phi(x) for stacked states.

    Broadcast-multiply plus axis sum keeps every row's reduction order
    identical, so bitwise-equal state rows yield bitwise-equal
    derivative rows (a blocked matmul would not guarantee that); an
    agent that coincides with the reference then tracks it exactly.
    """
    der = (states[:, None, :] * A[None, :, :]).sum(axis=2)
    der += (phi(states)[:, None, :] * B1[None, :, :]).sum(axis=2)
    return der


def simulate(net, schedule, rho, dist, x0, x0_agents, T, dt=1e-3):
    """Integrate the reference and all agents under the scheduled protocol.

    rho is a ParamSignal; its "coupled" kind appends the parameter to the
    integrated state and drives it with the supplied ODE of (rho, x_ref).
    Measurements are formed from true states at every stage:
    y_i = C2i x + D2i w_i and v_ij = H_ij x_j + G_ij w_ij, and the input
    is u_i = L_i(rho)(y_i - C2i x_i) + sum_j K_ij(rho)(v_ij - H_ij x_i).

    Raises OutOfRange if rho leaves the scheduled interval (with the
    first violation time) and Divergence if any state magnitude passes
    1e12.
    """
    n, N = net.n, net.N
    steps = int(round(T / dt))
    if steps < 1 or dt <= 0:
        raise ValueError("need dt > 0 and T >= dt")
    coupled = rho.kind == "coupled"
    lo, hi = schedule.design.interval
    grace = 1e-9 * max(1.0, hi - lo)

    x0 = np.asarray(x0, dtype=float).reshape(n)
    agents0 = np.asarray([np.asarray(a, dtype=float).reshape(n)
                          for a in x0_agents])
    if agents0.shape != (N, n):
        raise ValueError(f"x0_agents must have shape ({N}, {n})")
    w = dist.realize(net, T + dt)
    phi = net.plant.phi_fn()
    B1, B20 = net.plant.B1, net.plant.B20
    in_nbrs = net.graph.in_neighbors

    def rho_of(t, y):
        val = y[n] if coupled else rho(t)
        if val < lo - grace or val > hi + grace:
            raise OutOfRangeError(
                f"rho(t={t:.6g}) = {val:.6g} left the scheduled interval "
                f"[{lo:.6g}, {hi:.6g}]")
        return lo if val < lo else hi if val > hi else float(val)

    off = n + 1 if coupled else n

    def unpack(y):
        return y[:n], y[off:].reshape(N, n)

    ops = _StackedOps.build(net)

    if ops is not None:
        def protocol(t, xr, ags, rv):
            Lst, Ksts = schedule._gains_stacked(rv)
            wag = w.agents_at(t)
            wl = w.links_at(t) if ops.d else None
            return ops.inputs(Lst, Ksts, xr, ags, wag, wl)

        def f(t, y):
            xr, ags = unpack(y)
            rv = rho_of(t, y)
            A = net.plant.A(rv)
            u = protocol(t, xr, ags, rv)
            states = np.empty((N + 1, n))
            states[0] = xr
            states[1:] = ags
            der = _batched_drift(A, phi, B1, states)
            dy = np.empty_like(y)
            dy[:n] = der[0] + B20 @ w.w0(t)
            if coupled:
                dy[n] = rho.ode(y[n], xr)
            dy[off:] = (der[1:] + np.einsum("nir,nr->ni", ops.B2s,
                                            w.agents_at(t)) + u).ravel()
            return dy
    else:
        def protocol(t, xr, ags, rv):
            L, K = schedule.gains_all(rv)
            u = np.empty((N, n))
            for i in range(N):
                ag = net.agents[i]
                yi = ag.C2 @ (xr - ags[i]) + ag.D2 @ w.w_agent(i, t)
                ui = L[i] @ yi
                for j in in_nbrs[i]:
                    H, G = ag.links[j]
                    vij = H @ (ags[j] - ags[i]) + G @ w.w_link(i, j, t)
                    ui = ui + K[i][j] @ vij
                u[i] = ui
            return u

        def f(t, y):
            xr, ags = unpack(y)
            rv = rho_of(t, y)
            A = net.plant.A(rv)
            u = protocol(t, xr, ags, rv)
            dy = np.empty_like(y)
            dy[:n] = A @ xr + B1 @ phi(xr) + B20 @ w.w0(t)
            if coupled:
                dy[n] = rho.ode(y[n], xr)
            for i in range(N):
                dy[off + i * n:off + (i + 1) * n] = (
                    A @ ags[i] + B1 @ phi(ags[i])
                    + net.agents[i].B2 @ w.w_agent(i, t) + u[i])
            return dy

    y = np.concatenate([x0, [rho.rho0]] + list(agents0)) if coupled \
        else np.concatenate([x0] + list(agents0))

    S = steps
    t_grid = np.linspace(0.0, S * dt, S + 1)
    xs = np.empty((S + 1, n))
    ags_out = np.empty((S + 1, N, n))
    rhos = np.empty(S + 1)
    us = np.empty((S + 1, N, n))
    w0s = np.empty((S + 1, net.plant.B20.shape[1]))
    was = [np.empty((S + 1, a.D2.shape[1])) for a in net.agents]
    wls = {(i, j): np.empty((S + 1, net.agents[i].links[j][1].shape[1]))
           for i in range(N) for j in in_nbrs[i]}

    for k in range(S + 1):
        t = t_grid[k]
        xr, ags = unpack(y)
        rv = rho_of(t, y)
        xs[k], ags_out[k], rhos[k] = xr, ags, rv
        w0s[k] = w.w0(t)
        for i in range(N):
            was[i][k] = w.w_agent(i, t)
            for j in in_nbrs[i]:
                wls[(i, j)][k] = w.w_link(i, j, t)
        us[k] = protocol(t, xr, ags, rv)
        if k == S:
            break
        y = rk4_step(f, t, y, dt)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"state magnitude passed {DIVERGENCE_LIMIT:.0e} at "
                f"t={t + dt:.6g}")

    return SimulationTrace(t=t_grid, x=xs, agents=ags_out, rho=rhos, u=us,
                           w0=w0s, w_agents=tuple(was), w_links=wls,
                           dt=float(dt), T=float(S * dt))


def replay_inputs(trace, net, schedule):
    """Largest deviation between recorded inputs and the protocol law
    recomputed from stored states, gains and disturbances.

    Uses the same evaluation path as the simulator, so a trace produced
    by this schedule replays to zero deviation.
    """
    ops = _StackedOps.build(net)
    worst = 0.0
    if ops is not None:
        for k in range(trace.t.size):
            Lst, Ksts = schedule._gains_stacked(trace.rho[k])
            wag = np.stack([wi[k] for wi in trace.w_agents])
            wl = np.stack([trace.w_links[key][k] for key in ops.link_keys]) \
                if ops.d else None
            u = ops.inputs(Lst, Ksts, trace.x[k], trace.agents[k], wag, wl)
            worst = max(worst, float(np.max(np.abs(u - trace.u[k]))))
        return worst
    for k in range(trace.t.size):
        L, K = schedule.gains_all(trace.rho[k])
        for i in range(net.N):
            ag = net.agents[i]
            yi = (ag.C2 @ (trace.x[k] - trace.agents[k, i])
                  + ag.D2 @ trace.w_agents[i][k])
            ui = L[i] @ yi
            for j in net.graph.in_neighbors[i]:
                H, G = ag.links[j]
                vij = (H @ (trace.agents[k, j] - trace.agents[k, i])
                       + G @ trace.w_links[(i, j)][k])
                ui = ui + K[i][j] @ vij
            worst = max(worst, float(np.max(np.abs(ui - trace.u[k, i]))))
    return worst


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def disagreement_series(trace, graph):
    """Graph disagreement of the error vector per sample:
    (1/N) sum_i sum_{j in V_i} ||e_j - e_i||^2."""
    e = trace.e
    N = e.shape[1]
    out = np.zeros(e.shape[0])
    for i in range(N):
        for j in graph.in_neighbors[i]:
            out += np.sum((e[:, j, :] - e[:, i, :]) ** 2, axis=1)
    return out / N


def sync_error_series(trace):
    """Per-agent ||x - x_i|| series and the summed squared series."""
    e = trace.e
    norms = np.linalg.norm(e, axis=2)
    return norms, np.sum(norms ** 2, axis=1)


def exp_decay_rate(times, series, window=None):
    """Least-squares exponent w for series ~ c * exp(-w t) on a window."""
    times = np.asarray(times, float)
    series = np.asarray(series, float)
    mask = series > 0
    if window is not None:
        mask &= (times >= window[0]) & (times <= window[1])
    if mask.sum() < 2:
        raise ValueError("need at least two positive samples to fit")
    slope = np.polyfit(times[mask], np.log(series[mask]), 1)[0]
    return -float(slope)


def _disturbance_energies(trace):
    """(||w0||^2, per-agent ||w_i||^2, per-link ||w_ij||^2) by trapezoid."""
    t = trace.t
    e0 = np.trapezoid(np.sum(trace.w0 ** 2, axis=1), t)
    ea = [np.trapezoid(np.sum(wi ** 2, axis=1), t) for wi in trace.w_agents]
    el = {k: np.trapezoid(np.sum(v ** 2, axis=1), t)
          for k, v in trace.w_links.items()}
    return e0, ea, el


def hinf_ratio(trace, schedule, Q=None, mode="weak", eta=0.0):
    """Attenuation ratio of the run, for comparison against the level.

    numerator: integral of the disagreement cost (weak), plus the
    filtering cost (1/N) sum_i e_i' Q_i e_i scaled by (1 - eta) in
    strong mode. denominator: initial mismatch in the schedule's
    rho(0)-weighted norm plus ||w0||^2 plus the agent-averaged agent and
    link disturbance energies.
    """
    if mode not in ("weak", "strong"):
        raise ValueError("mode must be 'weak' or 'strong'")
    net = schedule.net
    N = net.N
    psi = disagreement_series(trace, net.graph)
    num_series = psi
    if mode == "strong":
        if Q is None:
            Q = schedule.design.Q
        Qs = _as_Q(Q, N, net.n)
        e = trace.e
        filt = np.zeros(e.shape[0])
        for i in range(N):
            filt += np.einsum("sk,kl,sl->s", e[:, i, :],
                              (1.0 - eta) * Qs[i], e[:, i, :])
        num_series = psi + filt / N
    numerator = float(np.trapezoid(num_series, trace.t))

    P = schedule.P_matrix(trace.rho[0])
    e0 = trace.e[0].reshape(-1)
    mism = float(e0 @ P @ e0)
    en0, en_a, en_l = _disturbance_energies(trace)
    denom = mism + en0 + (sum(en_a) + sum(en_l.values())) / N
    if denom <= 0.0:
        raise ZeroDenominatorError(
            "no initial mismatch and no disturbance energy")
    return numerator / denom


@dataclass(frozen=True)
class DissipationReport:
    fraction_satisfied: float
    worst_violation: float
    checked: int
    excluded: int


def dissipation_check(trace, schedule, delta=None, Q=None, gamma_sq=None,
                      eta=0.0, corner_window=None, tol_scale=1e-6):
    """Verify the per-agent storage inequality along the trace.

    For V_i = e_i' X_{i,rho(t)} e_i, central differences of V_i must stay
    below
        -(p_i+q_i)||e_i||^2 + 2 e_i' sum_j e_j - 2 delta_i V_i
        + sum_{j in V_i} (2 delta_j/(q_j+1)) V_j
        + gsq (||w0||^2 + ||w_i||^2 + sum_j ||w_ij||^2)
    with an optional filtering term -(1-eta) e_i' Q_i e_i when Q is
    given. Samples within corner_window of a blend corner are excluded
    (non-differentiable certificate there); the default window is
    2*dt*max|drho/dt| measured from the trace.
    """
    net = schedule.net
    N, n = net.N, net.n
    d = schedule.design
    deltas = _as_delta(d.delta if delta is None else delta, N)
    gsq = schedule.gamma_sq if gamma_sq is None else float(gamma_sq)
    Qs = None if Q is None else _as_Q(Q, N, n)
    g = net.graph
    p_in = list(g.in_degree)
    q_out = list(g.out_degree)

    S = trace.t.size
    e = trace.e
    V = np.empty((S, N))
    for k in range(S):
        for i in range(N):
            V[k, i] = e[k, i] @ schedule.x_at(i, trace.rho[k]) @ e[k, i]

    corners = schedule.corners
    if corner_window is None:
        rdot = (np.max(np.abs(np.diff(trace.rho))) / trace.dt
                if S > 1 else 0.0)
        corner_window = 2.0 * trace.dt * rdot

    wsq0 = np.sum(trace.w0 ** 2, axis=1)
    wsq_a = [np.sum(wa ** 2, axis=1) for wa in trace.w_agents]
    wsq_l = {k: np.sum(v ** 2, axis=1) for k, v in trace.w_links.items()}

    checked = excluded = 0
    satisfied = 0
    worst = -np.inf
    for k in range(1, S - 1):
        if corners.size and np.min(np.abs(corners - trace.rho[k])) < corner_window:
            excluded += N
            continue
        for i in range(N):
            lhs = (V[k + 1, i] - V[k - 1, i]) / (2.0 * trace.dt)
            ei = e[k, i]
            rhs = -(p_in[i] + q_out[i]) * float(ei @ ei)
            acc = np.zeros(n)
            for j in g.in_neighbors[i]:
                acc = acc + e[k, j]
                rhs += (2.0 * deltas[j] / (q_out[j] + 1.0)) * V[k, j]
                rhs += gsq * wsq_l[(i, j)][k]
            rhs += 2.0 * float(ei @ acc)
            rhs += -2.0 * deltas[i] * V[k, i]
            rhs += gsq * (wsq0[k] + wsq_a[i][k])
            if Qs is not None:
                rhs -= (1.0 - eta) * float(ei @ Qs[i] @ ei)
            scale = max(1.0, abs(lhs), abs(rhs))
            checked += 1
            viol = (lhs - rhs) / scale
            worst = max(worst, viol)
            if lhs <= rhs + tol_scale * scale:
                satisfied += 1
    frac = satisfied / checked if checked else 1.0
    return DissipationReport(fraction_satisfied=frac,
                             worst_violation=float(worst),
                             checked=checked, excluded=excluded)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def export_trace_csv(trace, path):
    """Write the trace as CSV with a header row; %.17g round-trips floats
    so repeated seeded runs produce byte-identical files."""
    S, N, n = trace.agents.shape
    cols = [("t", trace.t), ("rho", trace.rho)]
    for a in range(n):
        cols.append((f"x{a}", trace.x[:, a]))
    for i in range(N):
        for a in range(n):
            cols.append((f"agent{i}_x{a}", trace.agents[:, i, a]))
        for a in range(n):
            cols.append((f"agent{i}_u{a}", trace.u[:, i, a]))
    header = ",".join(name for name, _ in cols)
    data = np.column_stack([v for _, v in cols])
    np.savetxt(path, data, delimiter=",", header=header, comments="",
               fmt="%.17g")
