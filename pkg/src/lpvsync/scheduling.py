"""Scheduling grids, per-point synthesis, and interpolated gain schedules.

The pipeline: build_grid places grid points whose validity neighborhoods
cover the parameter interval; synthesize_schedule solves the coupled
feasibility problem at every grid point (optionally minimizing the
attenuation level gsq per point and taking the largest); the resulting
GainSchedule blends neighboring certificates piecewise-affinely in rho
and serves continuous protocol gains.
"""

import threading
import warnings
from bisect import bisect_right
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import lmi as _lmi
from .errors import CoveringError, InfeasibleError, OutOfRangeError
from .model import NetworkModel, mismatch_radius, spectral_norm

MAX_GRID_POINTS = 10_000
GAIN_CACHE_SIZE = 1 << 16
RHO_QUANTUM = 1e-9


# ---------------------------------------------------------------------------
# Grid design
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridDesign:
    """Grid points with mismatch radii, blend segments, and synthesis data.

    points    -- strictly increasing grid rho^1 .. rho^M spanning the interval
    alphas    -- per-point mismatch radius alpha_k
    lowers    -- blend-segment start inside [rho^k, rho^{k+1}] (length M-1)
    uppers    -- blend-segment end   inside [rho^k, rho^{k+1}] (length M-1)
    delta     -- per-agent decay offsets (scalar broadcasts)
    Q         -- per-agent filtering weight (single matrix broadcasts)
    interval  -- the parameter interval the grid must cover

    The default ("collapsed") segments blend across the full gap:
    lowers[k] = points[k] and uppers[k] = points[k+1], so interpolation is
    active everywhere between neighboring grid points. Strict-interior
    segments give constant plateaus around each grid point instead.
    """

    points: np.ndarray
    alphas: np.ndarray
    lowers: np.ndarray
    uppers: np.ndarray
    delta: object
    Q: object
    interval: tuple

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "alphas",
                           np.broadcast_to(np.asarray(self.alphas, dtype=float),
                                           pts.shape).copy())
        lo = np.atleast_1d(np.asarray(self.lowers, dtype=float))
        up = np.atleast_1d(np.asarray(self.uppers, dtype=float))
        if pts.size == 1:
            lo = lo[:0]
            up = up[:0]
        object.__setattr__(self, "lowers", lo)
        object.__setattr__(self, "uppers", up)
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if lo.shape != (pts.size - 1,) or up.shape != (pts.size - 1,):
            raise ValueError("need one blend segment per consecutive pair")
        a, b = self.interval
        if pts[0] > a or pts[-1] < b:
            raise CoveringError(
                f"grid [{pts[0]}, {pts[-1]}] does not span [{a}, {b}]")
        for k in range(pts.size - 1):
            if not (pts[k] <= lo[k] < up[k] <= pts[k + 1]):
                raise ValueError(
                    f"segment {k}: need rho^k <= lower < upper <= rho^k+1")

    @property
    def M(self):
        return int(self.points.size)

    @property
    def corners(self):
        """Blend-segment endpoints interior to the interval (the points
        where the interpolant is non-differentiable)."""
        a, b = self.interval
        vals = np.concatenate([self.lowers, self.uppers])
        vals = vals[(vals > a) & (vals < b)]
        return np.unique(vals)

    def segment_of(self, rho):
        """Index k with rho in [points[k], points[k+1]] (clamped ends)."""
        if self.M == 1:
            return 0
        k = bisect_right(self.points, rho) - 1
        return min(max(k, 0), self.M - 2)


def build_grid(net, count=None, alpha=None, alpha_sq=None, *, delta, Q,
               overlap=None):
    """Place grid points so the validity neighborhoods cover the interval.

    Exactly one sizing policy applies: a point count (uniform spacing,
    affine dependence only) or a target mismatch radius alpha (also
    accepted squared, as alpha_sq). For affine dependence A0 + rho*Delta
    the neighborhood of rho^k has radius alpha/sigma(Delta), so uniform
    spacing strictly below that radius covers. For tabulated dependence
    the grid is grown greedily left to right, measuring mismatch radii
    numerically.

    overlap: None collapses blend segments onto the full gaps (the
    default); otherwise pass (lowers, uppers) arrays for strict-interior
    plateaus.
    """
    lo, hi = net.gamma_interval
    span = hi - lo
    if alpha is None and alpha_sq is not None:
        alpha = float(np.sqrt(alpha_sq))

    dep = net.plant.A
    degenerate = span <= 0
    if dep.kind == "affine":
        sigma = spectral_norm(dep.Delta)
        if sigma == 0.0 or degenerate:
            points = np.array([0.5 * (lo + hi)])
            alphas = np.array([0.0 if alpha is None else alpha])
        elif count is not None:
            if count < 2:
                raise ValueError("affine grid over a nonempty interval "
                                 "needs at least two points")
            points = np.linspace(lo, hi, int(count))
            spacing = span / (count - 1)
            if alpha is None:
                alpha = spacing * sigma * (1.0 + 1e-6)
            if spacing >= alpha / sigma:
                raise CoveringError(
                    f"spacing {spacing:.6g} is not below alpha/sigma "
                    f"= {alpha / sigma:.6g}; widen alpha or add points")
            alphas = np.full(points.shape, alpha)
        elif alpha is not None:
            count = max(2, int(np.floor(span * sigma / alpha)) + 2)
            if count > MAX_GRID_POINTS:
                raise CoveringError(
                    f"covering needs {count} points (cap {MAX_GRID_POINTS})")
            points = np.linspace(lo, hi, count)
            alphas = np.full(points.shape, alpha)
        else:
            raise ValueError("give either count or alpha/alpha_sq")
    else:
        if degenerate:
            points = np.array([lo])
            alphas = np.array([0.0 if alpha is None else alpha])
        else:
            if alpha is None:
                raise ValueError("tabulated dependence needs a target alpha")
            points, alphas = _greedy_tabulated_grid(net.plant, lo, hi, alpha)

    if overlap is None:
        lowers, uppers = points[:-1].copy(), points[1:].copy()
    else:
        lowers, uppers = (np.asarray(overlap[0], dtype=float),
                          np.asarray(overlap[1], dtype=float))
    return GridDesign(points=points, alphas=alphas, lowers=lowers,
                      uppers=uppers, delta=delta, Q=Q, interval=(lo, hi))


def _greedy_tabulated_grid(plant, lo, hi, alpha):
    """Left-to-right placement: each new point's neighborhood must reach
    back to the covered frontier and is then extended right as far as the
    mismatch radius allows."""
    points = []
    frontier = lo
    while True:
        if len(points) >= MAX_GRID_POINTS:
            raise CoveringError(
                f"greedy covering exceeded {MAX_GRID_POINTS} points "
                f"(alpha={alpha} too small for this dependence)")
        center = _extend(plant, frontier, hi, alpha,
                         lambda c: mismatch_radius(plant, c, (frontier, c)))
        points.append(center)
        if center >= hi:
            break
        reach = _extend(plant, center, hi, alpha,
                        lambda r: mismatch_radius(plant, center, (center, r)))
        if reach <= frontier:
            raise CoveringError(
                f"cannot extend coverage past {frontier} with alpha={alpha}")
        frontier = reach
        if frontier >= hi:
            # one more point so the last grid point reaches the right edge
            if points[-1] < hi:
                points.append(hi)
            break
    pts = np.unique(np.asarray(points, dtype=float))
    return pts, np.full(pts.shape, alpha)


def _extend(plant, start, hi, alpha, radius_of):
    """Largest x in [start, hi] with radius_of(x) <= alpha, by doubling
    then bisection (radius grows with the interval)."""
    if start >= hi:
        return hi
    step = max((hi - start) * 1e-4, 1e-12)
    good, probe = start, min(start + step, hi)
    while probe < hi and radius_of(probe) <= alpha:
        good = probe
        step *= 2.0
        probe = min(probe + step, hi)
    if probe >= hi and radius_of(hi) <= alpha:
        return hi
    bad = probe
    for _ in range(60):
        mid = 0.5 * (good + bad)
        if radius_of(mid) <= alpha:
            good = mid
        else:
            bad = mid
    return good


# ---------------------------------------------------------------------------
# Gain schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GainSchedule:
    """Grid certificates plus the piecewise-affine blending rule.

    certs holds one FeasibleCertificate per grid point, all valid at the
    common level gamma_sq = max_k of the per-point table. recertified
    records, per point, whether validity at the final level came from
    plain re-evaluation ("evaluated") or needed a fresh solve
    ("resolved").
    """

    design: GridDesign
    net: NetworkModel
    certs: tuple
    gamma_sq: float
    gamma_sq_table: np.ndarray
    recertified: tuple = ()
    _cache: OrderedDict = field(default_factory=OrderedDict, repr=False,
                                compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False,
                                  compare=False)
    _fast: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gamma_sq_table",
                           np.asarray(self.gamma_sq_table, dtype=float))
        if len(self.certs) != self.design.M:
            raise ValueError("one certificate per grid point required")

    @property
    def corners(self):
        return self.design.corners

    def blend(self, rho):
        """(segment k, weight lam on the left certificate)."""
        d = self.design
        lo, hi = d.interval
        grace = 1e-9 * max(1.0, hi - lo)
        if rho < lo - grace or rho > hi + grace:
            raise OutOfRangeError(
                f"rho={rho} outside the scheduled interval [{lo}, {hi}]")
        rho = lo if rho < lo else hi if rho > hi else float(rho)
        if d.M == 1:
            return 0, 1.0
        k = d.segment_of(rho)
        if rho <= d.lowers[k]:
            return k, 1.0
        if rho >= d.uppers[k]:
            return k, 0.0
        return k, float((d.uppers[k] - rho) / (d.uppers[k] - d.lowers[k]))

    def x_at(self, i, rho):
        """Certificate matrix for agent i at rho (piecewise-affine)."""
        k, lam = self.blend(rho)
        if lam == 1.0 or self.design.M == 1:
            return self.certs[k].X[i]
        if lam == 0.0:
            return self.certs[k + 1].X[i]
        return lam * self.certs[k].X[i] + (1.0 - lam) * self.certs[k + 1].X[i]

    def tau_at(self, i, rho):
        """Interpolated multiplier for agent i at rho."""
        k, lam = self.blend(rho)
        if lam == 1.0 or self.design.M == 1:
            return float(self.certs[k].tau[i])
        if lam == 0.0:
            return float(self.certs[k + 1].tau[i])
        return float(lam * self.certs[k].tau[i]
                     + (1.0 - lam) * self.certs[k + 1].tau[i])

    def _tables(self):
        """Stacked certificates plus per-segment condition safety flags.

        The largest eigenvalue of lam*X + (1-lam)*Y is at most the larger
        endpoint's and the smallest at least the smaller endpoint's, so
        one eigendecomposition per grid point bounds the condition number
        of every blend inside a segment. Segments whose bound stays under
        the singularity limit skip the per-evaluation check.
        """
        with self._lock:
            t = self._fast.get("tables")
        if t is not None:
            return t
        Xst = np.stack([np.stack(c.X) for c in self.certs])
        plan = _lmi.GainPlan(self.net)
        w = np.linalg.eigvalsh(Xst)
        lo = w[:, :, 0].min(axis=1)
        hi = w[:, :, -1].max(axis=1)
        if self.design.M > 1:
            lo = np.minimum(lo[:-1], lo[1:])
            hi = np.maximum(hi[:-1], hi[1:])
        safe = (lo > 0) & (hi < _lmi.COND_LIMIT * np.where(lo > 0, lo, 1.0))
        t = (Xst, plan, safe)
        with self._lock:
            self._fast["tables"] = t
        return t

    def _entry(self, rho):
        """Cached 4-tuple (L, K, L_stacked, K_stacked) at rho."""
        k, lam = self.blend(rho)
        key = (k, int(round(lam / RHO_QUANTUM)))
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache.move_to_end(key)
                return hit
        Xst, plan, safe = self._tables()
        if lam == 1.0 or self.design.M == 1:
            Xb = Xst[k]
        elif lam == 0.0:
            Xb = Xst[k + 1]
        else:
            Xb = lam * Xst[k] + (1.0 - lam) * Xst[k + 1]
        check = not bool(safe[k])
        if plan.uniform:
            Lst, Ksts = plan.stacked(Xb, self.gamma_sq, check=check)
            nbrs = self.net.graph.in_neighbors
            K = [{nbrs[i][p]: Ksts[p][i] for p in range(len(Ksts))}
                 for i in range(self.net.N)]
            entry = (list(Lst), K, Lst, Ksts)
        else:
            L, K = plan.gains(Xb, self.gamma_sq, check=check)
            entry = (L, K, None, None)
        with self._lock:
            self._cache[key] = entry
            if len(self._cache) > GAIN_CACHE_SIZE:
                self._cache.popitem(last=False)
        return entry

    def gains_all(self, rho):
        """Protocol gains (L list, K list of dicts) for every agent at rho.

        Cached per (segment, quantized rho); the cache is bounded and
        safe for concurrent readers.
        """
        e = self._entry(rho)
        return e[0], e[1]

    def _gains_stacked(self, rho):
        """(L stack, [K stack per link slot]); None entries when agents
        have mixed channel shapes."""
        e = self._entry(rho)
        return e[2], e[3]

    def gains_at(self, i, rho):
        """(L_i, {j: K_ij}) for one agent at rho."""
        L, K = self.gains_all(rho)
        return L[i], K[i]

    def P_matrix(self, rho0):
        """Initial-mismatch weight diag[(1/N) X_{i,rho0}].

        rho0 sitting exactly on a blend corner is nudged infinitesimally
        (with a warning) so the segment choice is unambiguous.
        """
        rho0 = self._nudge_off_corner(rho0)
        N = self.net.N
        blocks = [self.x_at(i, rho0) / N for i in range(N)]
        n = self.net.n
        P = np.zeros((N * n, N * n))
        for i, B in enumerate(blocks):
            P[i * n:(i + 1) * n, i * n:(i + 1) * n] = B
        return P

    def _nudge_off_corner(self, rho0):
        lo, hi = self.design.interval
        eps = 1e-9 * max(1.0, hi - lo)
        corners = self.corners
        if corners.size and np.min(np.abs(corners - rho0)) < eps:
            nudged = rho0 + eps if rho0 + eps <= hi else rho0 - eps
            warnings.warn(
                f"rho(0)={rho0} lies on a blend corner; using {nudged} "
                f"for the initial-weight segment choice", stacklevel=3)
            return nudged
        return rho0


# module-level aliases matching the operation names
def x_at(schedule, i, rho):
    return schedule.x_at(i, rho)


def tau_at(schedule, i, rho):
    return schedule.tau_at(i, rho)


def gains_at(schedule, i, rho):
    return schedule.gains_at(i, rho)


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------

def _map_points(fn, count, jobs):
    """Apply fn to grid indices 0..count-1, optionally on a thread pool.

    Each point's solve is self-contained (own seeded generator, no shared
    state), so results are identical for any jobs value; iteration order
    guarantees the lowest failing index raises first either way.
    """
    jobs = 1 if jobs is None else max(1, int(jobs))
    if jobs == 1 or count <= 1:
        return [fn(k) for k in range(count)]
    with ThreadPoolExecutor(max_workers=min(jobs, count)) as pool:
        return list(pool.map(fn, range(count)))


def synthesize_schedule(net, grid, gamma_sq=None, tol=0.01, options=None,
                        backend=None, margin_target=None, jobs=1):
    """Solve the coupled inequality at every grid point and assemble the
    blended schedule.

    gamma_sq=None minimizes the level per point and takes the largest;
    a numeric gamma_sq synthesizes at that fixed level everywhere.
    jobs > 1 solves grid points concurrently (same results, any order).

    Every stored certificate must be valid at the final common level.
    Certificates from per-point minimization are first re-evaluated at
    the final level; linearity in gsq suggests they stay feasible, but
    the coupled blocks are not always monotone in practice, so any point
    that fails re-evaluation is re-solved at the final level (recorded
    in GainSchedule.recertified, with a warning).
    """
    pts = grid.points
    if gamma_sq is None:
        def minimize_point(k):
            rho = pts[k]
            try:
                return _lmi.minimize_gamma_sq(
                    net, float(rho), grid.delta, grid.Q, float(grid.alphas[k]),
                    tol=tol, options=options, backend=backend,
                    margin_target=margin_target)
            except Exception as exc:
                raise InfeasibleError(
                    f"level minimization failed at grid point {k} "
                    f"(rho={rho}): {exc}", grid_index=k) from exc

        pairs = _map_points(minimize_point, grid.M, jobs)
        table = np.asarray([g for g, _ in pairs], dtype=float)
        certs = [c for _, c in pairs]
        gamma_final = float(table.max())
    else:
        gamma_final = float(gamma_sq)
        table = np.full(pts.shape, gamma_final)

        def solve_point(k):
            rho = pts[k]
            prob = _lmi.assemble_lmi(net, float(rho), gamma_final,
                                     grid.delta, grid.Q, float(grid.alphas[k]))
            res = _lmi.solve_feasibility(prob, margin_target=margin_target,
                                         options=options, backend=backend)
            if not isinstance(res, _lmi.FeasibleCertificate):
                raise InfeasibleError(
                    f"infeasible at grid point {k} (rho={rho}, "
                    f"gsq={gamma_final})", grid_index=k,
                    best_max_eig=res.best_max_eig)
            return res

        certs = _map_points(solve_point, grid.M, jobs)

    certs, modes = _recertify(net, grid, certs, gamma_final,
                              options=options, backend=backend,
                              margin_target=margin_target)
    return GainSchedule(design=grid, net=net, certs=tuple(certs),
                        gamma_sq=gamma_final, gamma_sq_table=table,
                        recertified=tuple(modes))


def _recertify(net, grid, certs, gamma_final, options=None, backend=None,
               margin_target=None):
    """Make every certificate valid at the common final level."""
    out, modes = [], []
    for k, (rho, cert) in enumerate(zip(grid.points, certs)):
        if cert.gamma_sq == gamma_final and cert.margin > 0:
            out.append(cert)
            modes.append("evaluated")
            continue
        prob = _lmi.assemble_lmi(net, float(rho), gamma_final, grid.delta,
                                 grid.Q, float(grid.alphas[k]))
        need = (margin_target if margin_target is not None
                else _lmi.default_margin(prob))
        z = prob.layout.pack(list(cert.X), tau=cert.tau, theta=cert.theta)
        t, _ = prob.max_eig(z)
        if t <= -need:
            out.append(_lmi.FeasibleCertificate(
                X=cert.X, tau=cert.tau, theta=cert.theta, rho=float(rho),
                gamma_sq=gamma_final, margin=-t, iterations=cert.iterations))
            modes.append("evaluated")
            continue
        warnings.warn(
            f"certificate at grid point {k} (rho={rho}) failed "
            f"re-evaluation at the final level gsq={gamma_final:.6g} "
            f"(max eig {t:.3g}); re-solving", stacklevel=3)
        res = _lmi.solve_feasibility(prob, margin_target=margin_target,
                                     options=options, backend=backend, z0=z)
        if not isinstance(res, _lmi.FeasibleCertificate):
            raise InfeasibleError(
                f"re-certification at the final level failed at grid "
                f"point {k} (rho={rho}, gsq={gamma_final})", grid_index=k,
                best_max_eig=res.best_max_eig)
        out.append(res)
        modes.append("resolved")
    return out, modes


# ---------------------------------------------------------------------------
# Rate conditions and interpolant certification
# ---------------------------------------------------------------------------

def rate_bound(schedule, Q=None):
    """Largest sup|drho/dt| certified by the blended schedule.

    min over agents of lambda_min(Q_i) divided by that agent's worst
    certificate difference quotient across blend segments. Identical
    certificates give an unconstrained (+inf) bound.
    """
    d = schedule.design
    if d.M == 1:
        return np.inf
    net = schedule.net
    Qs = _lmi._as_Q(d.Q if Q is None else Q, net.N, net.n)
    widths = d.uppers - d.lowers
    best = np.inf
    for i in range(net.N):
        quot = 0.0
        for k in range(d.M - 1):
            dX = spectral_norm(schedule.certs[k + 1].X[i]
                               - schedule.certs[k].X[i])
            quot = max(quot, dX / widths[k])
        lam = float(np.linalg.eigvalsh(Qs[i])[0])
        if quot > 0:
            best = min(best, lam / quot)
    return best


@dataclass(frozen=True)
class RateCheck:
    weak_ok: bool
    strong_ok: bool
    effective_Q_scale: object
    bound: float
    rho_dot_max: float
    eta: float


def check_rate_condition(schedule, rho_dot_max, eta=0.5, Q=None):
    """Compare a parameter slew bound against the schedule's rate bound.

    weak_ok certifies plain synchronization; strong_ok leaves an eta
    fraction of slack, in exchange scaling the filtering weight by
    (1 - eta)."""
    if not 0.0 <= eta < 1.0:
        raise ValueError("eta must be in [0, 1)")
    bound = rate_bound(schedule, Q=Q)
    weak = bool(rho_dot_max <= bound)
    strong = bool(rho_dot_max <= eta * bound)
    return RateCheck(weak_ok=weak, strong_ok=strong,
                     effective_Q_scale=(1.0 - eta) if strong else None,
                     bound=float(bound), rho_dot_max=float(rho_dot_max),
                     eta=float(eta))


@dataclass(frozen=True)
class InterpolantReport:
    worst_eig: float
    failures: tuple
    probes: int

    @property
    def ok(self):
        return not self.failures


@dataclass(frozen=True)
class ContinuityReport:
    ok: bool
    max_ratio: float
    worst_rho: float
    probes: int


def probe_gain_continuity(schedule, num_points=10000, rel_slack=1.25,
                          abs_floor=1e-9):
    """Finite-difference sweep of the protocol gains across the interval.

    Samples L_i and K_ij on a dense grid including every blend corner
    (with probes squeezed tightly around each corner) and compares each
    consecutive jump against the local Lipschitz estimate taken from the
    surrounding segments' own slopes. A jump exceeding that estimate
    (with slack) flags a discontinuity. Returns the worst
    jump-to-allowance ratio and where it happened.
    """
    lo, hi = schedule.design.interval
    span = hi - lo
    if span <= 0 or schedule.design.M == 1:
        return ContinuityReport(ok=True, max_ratio=0.0, worst_rho=lo,
                                probes=1)
    eps = 1e-9 * max(1.0, span)
    pts = [np.linspace(lo, hi, num_points)]
    for c in schedule.corners:
        pts.append(np.array([max(lo, c - eps), c, min(hi, c + eps)]))
    rhos = np.unique(np.concatenate(pts))

    def flat(rho):
        L, K = schedule.gains_all(rho)
        parts = [Li.ravel() for Li in L]
        for Ki in K:
            parts.extend(Ki[j].ravel() for j in sorted(Ki))
        return np.concatenate(parts)

    vals = np.array([flat(r) for r in rhos])
    gaps = np.diff(rhos)
    jumps = np.max(np.abs(np.diff(vals, axis=0)), axis=1)
    slopes = jumps / gaps

    # Per-segment slope estimate from corner-free intervals only: an
    # actual jump at a corner must not calibrate its own allowance.
    corners = schedule.corners
    near = np.zeros(len(gaps), dtype=bool)
    if corners.size:
        left = np.minimum(np.abs(corners[None, :] - rhos[:-1, None]).min(1),
                          np.abs(corners[None, :] - rhos[1:, None]).min(1))
        near = left < 2.0 * eps
    seg_of = np.array([schedule.design.segment_of(r) for r in rhos[:-1]])
    seg_slope = {}
    for k in np.unique(seg_of):
        mask = (seg_of == k) & ~near
        pool = slopes[mask] if mask.any() else slopes[seg_of == k]
        seg_slope[int(k)] = float(np.max(pool))

    worst_ratio, worst_rho = 0.0, lo
    for m in range(len(gaps)):
        local = seg_slope[int(seg_of[m])]
        if m > 0:
            local = max(local, seg_slope[int(seg_of[m - 1])])
        if m + 1 < len(gaps):
            local = max(local, seg_slope[int(seg_of[m + 1])])
        allowance = rel_slack * local * gaps[m] + abs_floor
        ratio = jumps[m] / allowance
        if ratio > worst_ratio:
            worst_ratio, worst_rho = float(ratio), float(rhos[m])
    return ContinuityReport(ok=worst_ratio <= 1.0, max_ratio=worst_ratio,
                            worst_rho=worst_rho, probes=len(rhos))


def certify_interpolants(schedule, probes_per_segment=101):
    """Check the blended certificates on every segment against the
    reduced (mismatch-free) inequality at the schedule level.

    Grid certificates satisfy the full inequality, which majorizes the
    reduced one, and the reduced inequality is affine in the blended
    variables, so interior probes are expected to pass; this verifies it
    numerically."""
    d = schedule.design
    net = schedule.net
    worst = -np.inf
    failures = []
    probes = 0
    for k in range(d.M - 1):
        for rho in np.linspace(d.lowers[k], d.uppers[k], probes_per_segment):
            X_list = [schedule.x_at(i, rho) for i in range(net.N)]
            tau = [schedule.tau_at(i, rho) for i in range(net.N)]
            chk = _lmi.check_reduced_lmi(X_list, tau, net, float(rho),
                                         schedule.gamma_sq, d.delta, d.Q)
            probes += 1
            worst = max(worst, chk.max_eig)
            if not chk.satisfied:
                failures.append((k, float(rho), chk.max_eig))
    return InterpolantReport(worst_eig=worst, failures=tuple(failures),
                             probes=probes)
