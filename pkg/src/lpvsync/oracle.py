"""Independent numerical cross-checks used by the test suite.

Deliberately avoids the library's own linear-algebra paths: eigenvalues
come from cyclic Jacobi rotations rather than LAPACK wrappers, derivatives
from central differences, and integrals from the composite trapezoid rule.
Production modules must not import this file; it exists so tests can
verify results against a second, slower implementation.
"""

from dataclasses import dataclass, field

import numpy as np


def jacobi_eigs(M, tol=1e-12, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues sorted ascending. Sweeps until the off-diagonal
    Frobenius norm drops below ``tol`` times the matrix norm.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("need a square matrix")
    if not np.allclose(A, A.T, atol=1e-10 * (1.0 + np.abs(A).max())):
        raise ValueError("need a symmetric matrix")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    if n == 1:
        return A[0, 0:1].copy()
    scale = np.sqrt(np.sum(A * A))
    if scale == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        # clamp: cancellation can drive the difference a hair negative
        off = np.sqrt(max(0.0, np.sum(A * A) - np.sum(np.diag(A) ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                # classic 2x2 symmetric Schur rotation
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:  # theta^2 would overflow
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta)
                                          + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * A[:, p] - s * A[:, q]
                rot_q = s * A[:, p] + c * A[:, q]
                A[:, p], A[:, q] = rot_p, rot_q
                rot_p = c * A[p, :] - s * A[q, :]
                rot_q = s * A[p, :] + c * A[q, :]
                A[p, :], A[q, :] = rot_p, rot_q
                A[p, q] = A[q, p] = 0.0
    return np.sort(np.diag(A))


def jacobi_min_eig(M, **kw):
    return float(jacobi_eigs(M, **kw)[0])


def fd_derivative(f, t, h=1e-6):
    """Central-difference derivative of a scalar-or-vector function of t."""
    return (np.asarray(f(t + h), dtype=float)
            - np.asarray(f(t - h), dtype=float)) / (2.0 * h)


def fd_series_derivative(times, values):
    """Derivative of a sampled series: central in the interior, one-sided
    at the endpoints. ``values`` may be (T,) or (T, ...)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    return np.gradient(values, times, axis=0)


def trapezoid(times, values):
    """Composite trapezoid integral of a sampled series over times."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    return np.trapezoid(values, times, axis=0)


@dataclass
class OracleReport:
    """Accumulates named comparisons, each with its own tolerance."""

    checks: list = field(default_factory=list)

    def compare(self, name, got, want, rtol=1e-9, atol=1e-12):
        got_a = np.asarray(got, dtype=float)
        want_a = np.asarray(want, dtype=float)
        ok = got_a.shape == want_a.shape and bool(
            np.allclose(got_a, want_a, rtol=rtol, atol=atol))
        err = float(np.max(np.abs(got_a - want_a))) if got_a.shape == want_a.shape else np.inf
        self.checks.append((name, ok, err))
        return ok

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.checks)

    def __str__(self):
        lines = []
        for name, ok, err in self.checks:
            lines.append(f"{'PASS' if ok else 'FAIL'} {name} (max err {err:.3e})")
        return "\n".join(lines) if lines else "no checks recorded"
