"""Coupled certificate inequalities: assembly, feasibility, gain extraction.

Per agent i the synthesis condition is one symmetric block

    [[ S_i(rho) + tau_i R + theta_i alpha^2 I,  T_i,   X_i ],
     [ T_i',                                   -Ups_i, 0   ],
     [ X_i,                                     0,    -theta_i I ]]  < 0

with
    S_i(rho) = X_i Abar_i + Abar_i' X_i + (p_i + q_i) I
               - gsq C2i' E2i^-1 C2i - gsq sum_j H_ij' F_ij^-1 H_ij + Q_i,
    Abar_i   = A(rho) + delta_i I + B2i D2i' E2i^-1 C2i,
    T_i      = [X_i B20, X_i B2i (I - D2i' E2i^-1 D2i), X_i B1, Xi_i],
    Xi_i     = [gsq H_ij' F_ij^-1 H_ij - I]_{j in V_i},
    Ups_i    = diag[gsq I, gsq I, tau_i I, Z_i],
    Z_i      = diag[(2 delta_j / (q_j + 1)) X_j]_{j in V_i}.

The blocks are jointly affine in the decision variables (all X_i, tau_i,
theta_i, and optionally gsq), so each block is represented as a constant
plus a coefficient slab probed from an explicit assembly routine. The
blocks couple neighbouring agents through Z_i; they are solved as one
stacked problem.

Semidefinite feasibility is decided by minimizing t subject to
M_i(vars) <= t I via projected subgradient on the max-eigenvalue
objective; strict inequalities are realized as "<= -margin I". A
solver-backend seam allows swapping in an external conic solver without
touching assembly.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DimensionMismatchError,
    InfeasibleError,
    NoUpperBoundError,
    NumericalBreakdownError,
    OutOfRangeError,
    SingularCertificateError,
)

GAMMA_VARIABLE = "variable"

EPS_PD = 1e-7    # floor on eigenvalues of X_i
EPS_SC = 1e-9    # floor on tau_i, theta_i
COND_LIMIT = 1e12


def _as_delta(delta, N):
    d = np.asarray(delta, dtype=float)
    if d.ndim == 0:
        d = np.full(N, float(d))
    if d.shape != (N,):
        raise DimensionMismatchError(f"need {N} delta values, got shape {d.shape}")
    if np.any(d <= 0):
        raise ValueError("delta values must be positive")
    return d


def _as_Q(Q, N, n):
    Q = np.asarray(Q, dtype=float)
    if Q.ndim == 2:
        Q = np.broadcast_to(Q, (N, n, n)).copy()
    if Q.shape != (N, n, n):
        raise DimensionMismatchError(f"need {N} {n}x{n} weight matrices Q_i")
    return Q


def _spd_inv(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return np.linalg.inv(0.5 * (M + M.T))


# ---------------------------------------------------------------------------
# Decision variable layout
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecisionLayout:
    """Flat indexing of the stacked decision vector.

    Stores only the upper triangle of each X_i so symmetry is structural.
    tau/theta coordinates exist only when the corresponding machinery is
    active (tau goes with a nonzero Lipschitz matrix R, theta with a
    nonzero mismatch radius alpha). An optional trailing coordinate holds
    gsq when it is treated as a variable.
    """

    n: int
    N: int
    with_tau: bool
    with_theta: bool
    gamma_variable: bool

    @property
    def tri(self):
        return self.n * (self.n + 1) // 2

    @property
    def size(self):
        s = self.N * self.tri
        if self.with_tau:
            s += self.N
        if self.with_theta:
            s += self.N
        if self.gamma_variable:
            s += 1
        return s

    def tri_pairs(self):
        return [(a, b) for a in range(self.n) for b in range(a, self.n)]

    def x_slice(self, i):
        return slice(i * self.tri, (i + 1) * self.tri)

    def tau_index(self, i):
        if not self.with_tau:
            raise IndexError("layout has no tau coordinates")
        return self.N * self.tri + i

    def theta_index(self, i):
        if not self.with_theta:
            raise IndexError("layout has no theta coordinates")
        return self.N * self.tri + (self.N if self.with_tau else 0) + i

    @property
    def gamma_index(self):
        if not self.gamma_variable:
            raise IndexError("layout treats gsq as fixed")
        return self.size - 1

    def pack(self, X_list, tau=None, theta=None, gamma_sq=None):
        z = np.zeros(self.size)
        pairs = self.tri_pairs()
        for i, X in enumerate(X_list):
            z[self.x_slice(i)] = [X[a, b] for a, b in pairs]
        if self.with_tau:
            z[self.N * self.tri: self.N * self.tri + self.N] = tau
        if self.with_theta:
            base = self.N * self.tri + (self.N if self.with_tau else 0)
            z[base: base + self.N] = theta
        if self.gamma_variable:
            z[self.gamma_index] = gamma_sq
        return z

    def unpack(self, z):
        pairs = self.tri_pairs()
        X_list = []
        for i in range(self.N):
            X = np.zeros((self.n, self.n))
            vals = z[self.x_slice(i)]
            for (a, b), v in zip(pairs, vals):
                X[a, b] = X[b, a] = v
            X_list.append(X)
        tau = (np.array([z[self.tau_index(i)] for i in range(self.N)])
               if self.with_tau else np.ones(self.N))
        theta = (np.array([z[self.theta_index(i)] for i in range(self.N)])
                 if self.with_theta else np.ones(self.N))
        gsq = z[self.gamma_index] if self.gamma_variable else None
        return X_list, tau, theta, gsq

    def initial_point(self):
        """Default start: X_i = I, tau_i = theta_i = 1."""
        z = self.pack([np.eye(self.n)] * self.N,
                      tau=np.ones(self.N), theta=np.ones(self.N),
                      gamma_sq=1.0 if self.gamma_variable else None)
        return z


# ---------------------------------------------------------------------------
# Affine assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Block:
    dim: int
    const: np.ndarray       # (d, d)
    var_idx: np.ndarray     # (P,) global decision indices this block touches
    coeffs: np.ndarray      # (P, d, d)

    def evaluate(self, z):
        M = self.const
        if len(self.var_idx):
            M = M + np.einsum("p,pjk->jk", z[self.var_idx], self.coeffs)
        return M


@dataclass(frozen=True)
class AffineLmi:
    """Stacked affine symmetric matrix maps, one block per agent."""

    layout: DecisionLayout
    blocks: tuple
    rho: float
    gamma_sq: object  # float, or GAMMA_VARIABLE

    def evaluate(self, z):
        return [b.evaluate(z) for b in self.blocks]

    def max_eig(self, z):
        """Largest eigenvalue over all blocks and the index attaining it."""
        worst, worst_i = -np.inf, -1
        for i, b in enumerate(self.blocks):
            lam = np.linalg.eigvalsh(b.evaluate(z))[-1]
            if lam > worst:
                worst, worst_i = lam, i
        return worst, worst_i

    def subgradient(self, z):
        """(max eigenvalue, its subgradient w.r.t. the decision vector)."""
        t, i = self.max_eig(z)
        b = self.blocks[i]
        w, V = np.linalg.eigh(b.evaluate(z))
        v = V[:, -1]
        g = np.zeros(self.layout.size)
        if len(b.var_idx):
            g[b.var_idx] = np.einsum("pjk,j,k->p", b.coeffs, v, v)
        return t, g

    def const_norm(self):
        return max(float(np.linalg.norm(b.const, 2)) for b in self.blocks)

    def fix_gamma(self, gamma_sq):
        """Fold a concrete gsq value into the constants, dropping the
        trailing gsq coordinate."""
        if not self.layout.gamma_variable:
            raise ValueError("gsq is already fixed in this problem")
        gidx = self.layout.gamma_index
        new_layout = replace(self.layout, gamma_variable=False)
        new_blocks = []
        for b in self.blocks:
            mask = b.var_idx == gidx
            const = b.const.copy()
            if mask.any():
                const = const + gamma_sq * b.coeffs[mask][0]
            keep = ~mask
            new_blocks.append(_Block(dim=b.dim, const=const,
                                     var_idx=b.var_idx[keep].copy(),
                                     coeffs=b.coeffs[keep].copy()))
        return AffineLmi(layout=new_layout, blocks=tuple(new_blocks),
                         rho=self.rho, gamma_sq=float(gamma_sq))


def _agent_block(net, i, A_rho, delta, Q, alpha, gsq,
                 X_list, tau, theta, with_tau, with_theta):
    """Numeric block for agent i at explicit variable values.

    Affine jointly in (X_list, tau, theta, gsq); used directly for point
    evaluations and probed at unit vectors to extract coefficients.
    """
    ag = net.agents[i]
    g = net.graph
    n = net.n
    X = X_list[i]
    nbrs = list(g.in_neighbors[i])
    p_i = len(nbrs)
    q_i = g.out_degree[i]

    Einv = _spd_inv(ag.E2)
    B2, C2, D2 = ag.B2, ag.C2, ag.D2

    Abar = A_rho + delta[i] * np.eye(n) + B2 @ D2.T @ Einv @ C2
    S = X @ Abar + Abar.T @ X + (p_i + q_i) * np.eye(n) + Q[i]
    S = S - gsq * (C2.T @ Einv @ C2)

    HFH = []
    for j in nbrs:
        H, _ = ag.links[j]
        HFH_j = H.T @ _spd_inv(ag.F(j)) @ H
        HFH.append(HFH_j)
        S = S - gsq * HFH_j

    TL = S.copy()
    if with_tau:
        TL = TL + tau[i] * net.plant.R
    if with_theta:
        TL = TL + theta[i] * alpha ** 2 * np.eye(n)

    # middle channels: w0, w_i, phi channel (when tau machinery is active),
    # then one n-wide channel per neighbour
    T_cols = [X @ net.plant.B20,
              X @ B2 @ (np.eye(B2.shape[1]) - D2.T @ Einv @ D2)]
    ups_diag = [gsq * np.eye(net.plant.B20.shape[1]),
                gsq * np.eye(B2.shape[1])]
    if with_tau:
        T_cols.append(X @ net.plant.B1)
        ups_diag.append(tau[i] * np.eye(net.plant.B1.shape[1]))
    for idx_j, j in enumerate(nbrs):
        T_cols.append(gsq * HFH[idx_j] - np.eye(n))
        ups_diag.append((2.0 * delta[j] / (g.out_degree[j] + 1)) * X_list[j])

    T = np.hstack(T_cols) if T_cols else np.zeros((n, 0))
    mid = T.shape[1]
    d = n + mid + (n if with_theta else 0)
    M = np.zeros((d, d))
    M[:n, :n] = TL
    M[:n, n:n + mid] = T
    M[n:n + mid, :n] = T.T
    off = n
    for Dblk in ups_diag:
        w = Dblk.shape[0]
        M[off:off + w, off:off + w] = -Dblk
        off += w
    if with_theta:
        M[n + mid:, :n] = X
        M[:n, n + mid:] = X.T
        M[n + mid:, n + mid:] = -theta[i] * np.eye(n)
    return M


def assemble_lmi(net, rho, gamma_sq, delta, Q, alpha):
    """Build the stacked affine inequality for the network at one rho.

    gamma_sq may be a positive number or the string "variable", in which
    case gsq becomes the trailing decision coordinate (used for folding
    different bisection probes into the same probed coefficients).

    The tau machinery (tau_i R, the phi channel column, tau_i I block) is
    dropped when R == 0, and the theta machinery (theta_i alpha^2 I and
    the bottom [X_i, 0, -theta_i I] row) when alpha == 0, rather than
    pinning the degenerate scalars near zero.
    """
    n, N = net.n, net.N
    lo, hi = net.gamma_interval
    if not (lo <= rho <= hi):
        raise OutOfRangeError(f"rho={rho} outside [{lo}, {hi}]")
    delta = _as_delta(delta, N)
    Q = _as_Q(Q, N, n)
    alpha = float(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")

    gamma_variable = isinstance(gamma_sq, str)
    if gamma_variable and gamma_sq != GAMMA_VARIABLE:
        raise ValueError(f"unknown gamma_sq mode {gamma_sq!r}")
    if not gamma_variable and float(gamma_sq) <= 0:
        raise ValueError("gamma_sq must be positive")

    with_tau = bool(np.any(net.plant.R))
    with_theta = alpha > 0
    layout = DecisionLayout(n=n, N=N, with_tau=with_tau,
                            with_theta=with_theta,
                            gamma_variable=gamma_variable)
    A_rho = net.plant.A(rho)

    def numeric_block(i, z):
        X_list, tau, theta, g = layout.unpack(z)
        gval = g if gamma_variable else float(gamma_sq)
        return _agent_block(net, i, A_rho, delta, Q, alpha, gval,
                            X_list, tau, theta, with_tau, with_theta)

    blocks = []
    for i in range(N):
        idx = list(range(layout.x_slice(i).start, layout.x_slice(i).stop))
        for j in net.graph.in_neighbors[i]:
            idx.extend(range(layout.x_slice(j).start, layout.x_slice(j).stop))
        if with_tau:
            idx.append(layout.tau_index(i))
        if with_theta:
            idx.append(layout.theta_index(i))
        if gamma_variable:
            idx.append(layout.gamma_index)
        idx = np.array(sorted(set(idx)), dtype=int)

        zero = np.zeros(layout.size)
        const = numeric_block(i, zero)
        coeffs = np.empty((len(idx), const.shape[0], const.shape[0]))
        for p, gi in enumerate(idx):
            unit = np.zeros(layout.size)
            unit[gi] = 1.0
            coeffs[p] = numeric_block(i, unit) - const
        blocks.append(_Block(dim=const.shape[0], const=const,
                             var_idx=idx, coeffs=coeffs))
    return AffineLmi(layout=layout, blocks=tuple(blocks), rho=float(rho),
                     gamma_sq=(GAMMA_VARIABLE if gamma_variable
                               else float(gamma_sq)))


def default_margin(lmi):
    """Slack converting the strict inequality into "<= -margin I"."""
    return 1e-6 * (1.0 + lmi.const_norm())


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeasibleCertificate:
    """A strictly feasible point of the stacked inequality."""

    X: tuple                # per-agent SPD matrices
    tau: np.ndarray
    theta: np.ndarray
    rho: float
    gamma_sq: float
    margin: float           # -(max eigenvalue over blocks), > 0
    iterations: int = 0

    def __post_init__(self):
        object.__setattr__(self, "X", tuple(np.asarray(Xi, dtype=float)
                                            for Xi in self.X))
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=float))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        if self.margin <= 0:
            raise ValueError("certificate margin must be positive")
        for i, Xi in enumerate(self.X):
            if np.linalg.eigvalsh(Xi)[0] <= 0:
                raise ValueError(f"X_{i} is not positive definite")


@dataclass(frozen=True)
class Infeasible:
    """Failed feasibility search with the best evidence found."""

    best_max_eig: float
    iterations: int
    rho: float = np.nan
    gamma_sq: float = np.nan

    def __bool__(self):
        return False


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 50000
    seed: int = 0
    eps_pd: float = EPS_PD
    eps_sc: float = EPS_SC
    stall_window: int = 250
    # relative improvement per window below which the target gap shrinks
    stall_tol: float = 1e-3
    restarts: int = 2
    polish: bool = True


def _project(z, layout, opts):
    """Clip X_i eigenvalues at eps_pd and scalars at eps_sc, in place."""
    pairs = layout.tri_pairs()
    for i in range(layout.N):
        sl = layout.x_slice(i)
        X = np.zeros((layout.n, layout.n))
        for (a, b), v in zip(pairs, z[sl]):
            X[a, b] = X[b, a] = v
        w, V = np.linalg.eigh(X)
        if w[0] < opts.eps_pd:
            X = (V * np.maximum(w, opts.eps_pd)) @ V.T
            z[sl] = [X[a, b] for a, b in pairs]
    if layout.with_tau:
        base = layout.N * layout.tri
        np.clip(z[base:base + layout.N], opts.eps_sc, None,
                out=z[base:base + layout.N])
    if layout.with_theta:
        base = layout.N * layout.tri + (layout.N if layout.with_tau else 0)
        np.clip(z[base:base + layout.N], opts.eps_sc, None,
                out=z[base:base + layout.N])
    return z


def _coordinate_scales(lmi):
    """Per-coordinate aggregate coefficient norms.

    Coordinates act on the blocks with wildly different strengths (a
    certificate entry moves eigenvalues orders of magnitude harder than
    a multiplier entry). The largest per-block spectral norm of each
    coordinate's coefficient matrix measures that strength and defines a
    diagonal preconditioner for the subgradient iteration.
    """
    s = np.zeros(lmi.layout.size)
    for b in lmi.blocks:
        for p, gi in enumerate(b.var_idx):
            s[gi] = max(s[gi], float(np.linalg.norm(b.coeffs[p], 2)))
    return np.maximum(s, 1e-9)


def _subgradient_backend(lmi, margin_target, opts, z0=None):
    """Projected subgradient on t = max_i lambda_max(M_i(z)).

    Polyak-style steps in a diagonally preconditioned metric (weights
    from _coordinate_scales), with an adaptive target gap: step length
    (f - (f_best - gap)) / |g|_D^2, the gap halving whenever a window
    passes without sufficient decrease. Feasibility is declared once
    f_best < -margin_target; with polish enabled the iteration then
    continues until progress stalls, which deepens the margin and
    improves conditioning of downstream gain computations.

    Returns (z_best or None, f_best, iterations).
    """
    layout = lmi.layout
    rng = np.random.default_rng(opts.seed)
    z = layout.initial_point() if z0 is None else np.array(z0, dtype=float)
    z = _project(z, layout, opts)
    d2 = 1.0 / _coordinate_scales(lmi) ** 2

    f, g = lmi.subgradient(z)
    f_best, z_best = f, z.copy()
    gap = max(1.0, 0.1 * abs(f))
    gap_floor = max(1e-4 * margin_target, 1e-14)
    window_best = f_best
    restarts_left = opts.restarts
    it = 0
    while it < opts.max_iter:
        it += 1
        gd = d2 * g
        gnorm2 = float(g @ gd)
        if not np.isfinite(f) or not np.isfinite(gnorm2):
            raise NumericalBreakdownError(
                f"non-finite solver state at iteration {it}")
        if gnorm2 <= 1e-300:
            break
        step = max(f - (f_best - gap), 0.0) / gnorm2
        z -= step * gd
        _project(z, layout, opts)
        f, g = lmi.subgradient(z)
        if f < f_best:
            f_best, z_best = f, z.copy()

        if it % opts.stall_window == 0:
            improved = window_best - f_best
            needed = opts.stall_tol * max(abs(f_best), margin_target, 1.0)
            if improved < needed:
                gap *= 0.5
                if gap < gap_floor:
                    feasible_now = f_best < -margin_target
                    if feasible_now or restarts_left == 0:
                        break
                    restarts_left -= 1
                    z = z_best + rng.normal(scale=0.05 * (1.0 + np.abs(z_best)))
                    _project(z, layout, opts)
                    f, g = lmi.subgradient(z)
                    gap = max(1.0, 0.1 * abs(f))
            window_best = f_best

        if f_best < -margin_target and not opts.polish:
            break

    if f_best < -margin_target:
        return z_best, f_best, it
    return None, f_best, it


def solve_feasibility(lmi, margin_target=None, options=None, backend=None,
                      z0=None):
    """Search for a strictly feasible point of the stacked inequality.

    Returns a FeasibleCertificate with all blocks <= -margin_target I, or
    an Infeasible record carrying the best achieved max eigenvalue. The
    backend seam accepts any callable with the signature of
    _subgradient_backend.
    """
    if lmi.layout.gamma_variable:
        raise ValueError("fix gsq before solving (use fix_gamma)")
    opts = options or SolverOptions()
    if margin_target is None:
        margin_target = default_margin(lmi)
    run = backend or _subgradient_backend
    z_best, f_best, it = run(lmi, margin_target, opts, z0=z0)
    if z_best is None:
        return Infeasible(best_max_eig=f_best, iterations=it,
                          rho=lmi.rho, gamma_sq=lmi.gamma_sq)
    X_list, tau, theta, _ = lmi.layout.unpack(z_best)
    t, _ = lmi.max_eig(z_best)
    return FeasibleCertificate(X=X_list, tau=tau, theta=theta, rho=lmi.rho,
                               gamma_sq=float(lmi.gamma_sq), margin=-t,
                               iterations=it)


def certificate_vector(lmi, cert):
    """Pack a certificate back into the decision vector of ``lmi``."""
    return lmi.layout.pack(
        list(cert.X), tau=cert.tau, theta=cert.theta,
        gamma_sq=cert.gamma_sq if lmi.layout.gamma_variable else None)


GSQ_FLOOR = 1e-9
GSQ_CEIL = 1e9


def minimize_gamma_sq(net, rho, delta, Q, alpha, tol=0.01, options=None,
                      backend=None, margin_target=None):
    """Smallest gsq (within relative tol) for which the inequality at rho
    admits a strictly feasible point.

    Bisection: the initial bracket is found by doubling from 1 (halving
    downward when 1 is already feasible); each probe folds the gsq value
    into constants and warm-starts from the last feasible point. The
    bisection assumes the set of feasible levels is upward closed (a
    larger budget cannot make the synthesis harder). Note this is a
    statement about the set, not about points: gsq also scales cross
    terms, so a certificate found at one level need not re-verify at a
    higher one, which is why each probe re-solves instead of re-checking
    the warm start.

    Returns (gsq_min, certificate at gsq_min).
    """
    varlmi = assemble_lmi(net, rho, GAMMA_VARIABLE, delta, Q, alpha)
    warm = {"z": None}

    def probe(gsq):
        fixed = varlmi.fix_gamma(gsq)
        mt = (margin_target if margin_target is not None
              else default_margin(fixed))
        res = solve_feasibility(fixed, margin_target=mt, options=options,
                                backend=backend, z0=warm["z"])
        if isinstance(res, FeasibleCertificate):
            warm["z"] = fixed.layout.pack(list(res.X), tau=res.tau,
                                          theta=res.theta)
        return res

    g = 1.0
    res = probe(g)
    if isinstance(res, FeasibleCertificate):
        hi, best = g, res
        while g > GSQ_FLOOR:
            g *= 0.5
            res = probe(g)
            if isinstance(res, FeasibleCertificate):
                hi, best = g, res
            else:
                break
        else:
            return hi, best
        lo = g
    else:
        lo = g
        while True:
            g *= 2.0
            if g > GSQ_CEIL:
                raise NoUpperBoundError(
                    f"no feasible gsq found up to {GSQ_CEIL:g} at rho={rho}")
            res = probe(g)
            if isinstance(res, FeasibleCertificate):
                hi, best = g, res
                break
        lo = hi / 2.0

    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        res = probe(mid)
        if isinstance(res, FeasibleCertificate):
            hi, best = mid, res
        else:
            lo = mid
    return hi, best


# ---------------------------------------------------------------------------
# Gains and the reduced inequality
# ---------------------------------------------------------------------------

class GainPlan:
    """Precomputed constant factors of the gain formulas for one network.

    Everything rho-independent is hoisted here (noise-covariance
    inverses, feedthrough products, the stacked right-hand side
    [C2' H'...]), leaving one SPD solve per agent per evaluation point.
    When all agents share channel shapes the solve and the trailing
    products are batched across the network.
    """

    def __init__(self, net):
        self.net = net
        self.N = net.N
        n = net.n
        self.rhs, self.einv, self.fd, self.links, sigs = [], [], [], [], []
        for i, ag in enumerate(net.agents):
            cols = [ag.C2.T]
            row_links, widths = [], []
            off = ag.C2.shape[0]
            for j in net.graph.in_neighbors[i]:
                H, _ = ag.links[j]
                row_links.append((j, slice(off, off + H.shape[0]),
                                  _spd_inv(ag.F(j))))
                cols.append(H.T)
                widths.append(H.shape[0])
                off += H.shape[0]
            einv = _spd_inv(ag.E2)
            self.rhs.append(np.hstack(cols))
            self.einv.append(einv)
            self.fd.append(ag.B2 @ ag.D2.T @ einv)
            self.links.append(row_links)
            sigs.append((ag.C2.shape[0], tuple(widths)))
        self.uniform = len(set(sigs)) == 1
        if self.uniform:
            self.m = sigs[0][0]
            self.slices = [sl for _, sl, _ in self.links[0]]
            self.rhs_stack = np.stack(self.rhs)
            self.einv_stack = np.stack(self.einv)
            self.fd_stack = np.stack(self.fd)
            self.finv_stacks = [
                np.stack([self.links[i][p][2] for i in range(self.N)])
                for p in range(len(self.slices))]

    def _check(self, X):
        for i in range(self.N):
            w = np.linalg.eigvalsh(X[i])
            if w[0] <= 0 or w[-1] / w[0] > COND_LIMIT:
                raise SingularCertificateError(
                    f"certificate matrix {i} has condition "
                    f"{w[-1] / max(w[0], 0):.2e}")

    def stacked(self, X, gamma_sq, check=True):
        """(L_stack, [K_stack per link position]) on a uniform network;
        X is the (N, n, n) array of certificate matrices."""
        X = np.asarray(X, dtype=float)
        if check:
            self._check(X)
        G = np.linalg.solve(X, self.rhs_stack)
        Lst = gamma_sq * np.einsum("nik,nkl->nil", G[:, :, :self.m],
                                   self.einv_stack) - self.fd_stack
        Ksts = [gamma_sq * np.einsum("nik,nkl->nil", G[:, :, sl], fi)
                for sl, fi in zip(self.slices, self.finv_stacks)]
        return Lst, Ksts

    def gains(self, X, gamma_sq, check=True):
        """(L list, K list of dicts) for arbitrary channel shapes."""
        if self.uniform:
            Lst, Ksts = self.stacked(X, gamma_sq, check)
            K = [{self.net.graph.in_neighbors[i][p]: Ksts[p][i]
                  for p in range(len(Ksts))} for i in range(self.N)]
            return list(Lst), K
        X = [np.asarray(Xi, dtype=float) for Xi in X]
        if check:
            self._check(X)
        L, K = [], []
        for i in range(self.N):
            G = np.linalg.solve(X[i], self.rhs[i])
            m = self.net.agents[i].C2.shape[0]
            L.append(gamma_sq * G[:, :m] @ self.einv[i] - self.fd[i])
            K.append({j: gamma_sq * G[:, sl] @ Finv
                      for j, sl, Finv in self.links[i]})
        return L, K


def compute_gains(cert_X, net, gamma_sq):
    """Protocol gains from certificate matrices.

        K_ij = gsq X_i^-1 H_ij' F_ij^-1
        L_i  = (gsq X_i^-1 C2i' - B2i D2i') E2i^-1

    cert_X is a sequence of per-agent SPD matrices (a FeasibleCertificate
    is accepted too). A certificate matrix with condition number above
    1e12 raises SingularCertificate.
    """
    if isinstance(cert_X, FeasibleCertificate):
        cert_X = cert_X.X
    return GainPlan(net).gains(cert_X, gamma_sq, check=True)


@dataclass(frozen=True)
class ReducedCheck:
    satisfied: bool
    max_eig: float


def check_reduced_lmi(X_list, tau, net, rho, gamma_sq, delta, Q):
    """Evaluate the theta-free two-by-two block inequality at a point.

    This is the inequality satisfied by interpolated certificates: the
    mismatch row is removed and the top-left keeps only S_i(rho) plus the
    tau_i R term. Returns the satisfaction flag (all block max eigenvalues
    negative) and the worst eigenvalue.
    """
    n, N = net.n, net.N
    delta = _as_delta(delta, N)
    Q = _as_Q(Q, N, n)
    A_rho = net.plant.A(rho)
    with_tau = bool(np.any(net.plant.R))
    tau = np.asarray(tau, dtype=float) if tau is not None else np.ones(N)
    worst = -np.inf
    for i in range(N):
        M = _agent_block(net, i, A_rho, delta, Q, 0.0, float(gamma_sq),
                         [np.asarray(X, dtype=float) for X in X_list],
                         tau, np.ones(N), with_tau, False)
        worst = max(worst, float(np.linalg.eigvalsh(M)[-1]))
    return ReducedCheck(satisfied=worst < 0.0, max_eig=worst)


def cvxpy_backend(lmi, margin_target, opts, z0=None):
    """Optional conic-solver backend through the same seam (requires
    cvxpy; raises ImportError otherwise). Minimizes t subject to
    M_i(z) <= t I plus the side constraints, then returns the same
    triple as the default backend."""
    import cvxpy as cp

    layout = lmi.layout
    z = cp.Variable(layout.size)
    t = cp.Variable()
    cons = []
    for b in lmi.blocks:
        expr = cp.Constant(b.const)
        for p, gi in enumerate(b.var_idx):
            expr = expr + z[gi] * b.coeffs[p]
        cons.append(expr << t * np.eye(b.dim))
    pairs = layout.tri_pairs()
    for i in range(layout.N):
        sl = layout.x_slice(i)
        Xe = cp.bmat([[z[sl.start + pairs.index((min(a, bb), max(a, bb)))]
                       for bb in range(layout.n)] for a in range(layout.n)])
        cons.append(Xe >> opts.eps_pd * np.eye(layout.n))
    if layout.with_tau:
        cons.extend(z[layout.tau_index(i)] >= opts.eps_sc
                    for i in range(layout.N))
    if layout.with_theta:
        cons.extend(z[layout.theta_index(i)] >= opts.eps_sc
                    for i in range(layout.N))
    prob = cp.Problem(cp.Minimize(t), cons)
    prob.solve()
    if z.value is None:
        return None, np.inf, 0
    zv = np.asarray(z.value, dtype=float)
    f, _ = lmi.max_eig(zv)
    if f < -margin_target:
        return zv, f, 1
    return None, f, 1
