"""Full (non-restarted) GMRES with right preconditioning.

`gmres` minimizes the Euclidean residual norm; `weighted_gmres` minimizes the
norm induced by an SPD matrix F = L L^T by running the identical Arnoldi
process on the symmetrically transformed operator L^T (A M^{-1}) L^{-T}, so
the two share one core and coincide when F = I.

Orthogonalization is modified Gram-Schmidt with one reorthogonalization pass
whenever the remaining projection exceeds 1e-8 relative to the new vector;
the least-squares problem is updated with Givens rotations, whose byproduct
is the exact minimized residual at every iteration.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

REORTH_THRESHOLD = 1e-8


@dataclass
class SolveReport:
    x: np.ndarray
    iterations: int
    residuals: np.ndarray  # relative, residuals[k] after k Krylov steps
    converged: bool
    norm: str = "euclidean"


def _as_op(op):
    if op is None:
        return None
    if callable(op):
        return op
    return lambda v, _M=op: _M @ v


def _gmres_core(apply_op, r0, tol, maxit, ref_norm=None):
    """Arnoldi + Givens on an abstract operator.  Returns the Krylov basis V,
    the least-squares solution y (so the correction is V[:, :k] @ y), the
    relative residual history, the iteration count, and the converged flag.

    Residuals are measured relative to ref_norm (typically ||b||); when
    ref_norm is absent or zero the initial residual is used, so with a zero
    initial guess the two conventions coincide."""
    n = len(r0)
    maxit = min(maxit, n)
    beta = np.linalg.norm(r0)
    if beta == 0.0:
        return np.zeros((n, 0)), np.zeros(0), np.array([0.0]), 0, True
    denom = ref_norm if ref_norm is not None and ref_norm > 0.0 else beta

    V = np.zeros((n, maxit + 1))
    H = np.zeros((maxit + 1, maxit))
    cs = np.zeros(maxit)
    sn = np.zeros(maxit)
    g = np.zeros(maxit + 1)
    g[0] = beta
    V[:, 0] = r0 / beta
    history = [beta / denom]
    converged = False
    k = 0
    for k in range(maxit):
        w = apply_op(V[:, k])
        wnorm_pre = np.linalg.norm(w)
        # modified Gram-Schmidt
        for i in range(k + 1):
            H[i, k] = V[:, i] @ w
            w -= H[i, k] * V[:, i]
        # one reorthogonalization pass if orthogonality degraded
        corr = V[:, : k + 1].T @ w
        wnorm = np.linalg.norm(w)
        if wnorm > 0 and np.abs(corr).max() > REORTH_THRESHOLD * wnorm:
            H[: k + 1, k] += corr
            w -= V[:, : k + 1] @ corr
            wnorm = np.linalg.norm(w)
        H[k + 1, k] = wnorm
        lucky = wnorm <= 1e-14 * max(wnorm_pre, 1.0)

        # apply accumulated Givens rotations to the new column
        for i in range(k):
            t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
            H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
            H[i, k] = t
        r = np.hypot(H[k, k], H[k + 1, k])
        if r == 0.0:
            cs[k], sn[k] = 1.0, 0.0
        else:
            cs[k], sn[k] = H[k, k] / r, H[k + 1, k] / r
        H[k, k] = r
        H[k + 1, k] = 0.0
        g[k + 1] = -sn[k] * g[k]
        g[k] = cs[k] * g[k]

        history.append(abs(g[k + 1]) / denom)
        if history[-1] <= tol or lucky:
            converged = history[-1] <= tol
            k += 1
            break
        V[:, k + 1] = w / wnorm
    else:
        k = maxit

    y = np.linalg.solve(np.triu(H[:k, :k]), g[:k]) if k else np.zeros(0)
    if not converged:
        converged = history[-1] <= tol
    return V[:, :k], y, np.asarray(history), k, converged


def gmres(opA, opM, b, x0=None, tol=1e-6, maxit=300):
    """Right-preconditioned GMRES minimizing ||b - A M^{-1} u||_2; returns
    x = M^{-1} u.  opM = None means no preconditioning.  The residual history
    is relative to ||b|| (to the initial residual when b = 0; identical for a
    zero initial guess); iteration count = Krylov dimension."""
    A = _as_op(opA)
    M = _as_op(opM)
    b = np.asarray(b, dtype=float)
    x0 = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=float)
    r0 = b - A(x0)
    op = (lambda v: A(M(v))) if M is not None else A
    V, y, history, iters, converged = _gmres_core(
        op, r0, tol, maxit, ref_norm=np.linalg.norm(b)
    )
    corr = V @ y
    x = x0 + (M(corr) if M is not None else corr)
    return SolveReport(x=x, iterations=iters, residuals=history, converged=converged)


def weighted_gmres(opA, opM, spd_factor, b, x0=None, tol=1e-6, maxit=300):
    """GMRES minimizing the residual in the norm ||r||_F = ||L^T r||_2 where
    F = L L^T is given by its Cholesky factor (an SpdFactorization).  Same
    Arnoldi core as `gmres`, applied to L^T A M^{-1} L^{-T}."""
    A = _as_op(opA)
    M = _as_op(opM)
    b = np.asarray(b, dtype=float)
    x0 = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=float)
    r0 = spd_factor.apply_L_transpose(b - A(x0))

    def op(vhat):
        v = spd_factor.solve_L_transpose(vhat)
        if M is not None:
            v = M(v)
        return spd_factor.apply_L_transpose(A(v))

    V, y, history, iters, converged = _gmres_core(
        op, r0, tol, maxit, ref_norm=np.linalg.norm(spd_factor.apply_L_transpose(b))
    )
    corr = spd_factor.solve_L_transpose(V @ y)
    x = x0 + (M(corr) if M is not None else corr)
    return SolveReport(
        x=x, iterations=iters, residuals=history, converged=converged, norm="weighted"
    )


def write_residual_history(report, path):
    """CSV export of the relative residual history (iteration, residual)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "residual"])
        for i, r in enumerate(report.residuals):
            writer.writerow([i, f"{r:.16e}"])
