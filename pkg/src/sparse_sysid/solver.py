"""Sparse linear least squares on a low-rank projected system.

The solver projects ``A`` and ``Y`` onto the leading ``r = rk_delta(A)`` left
singular vectors, starts from the truncated pseudo-inverse solution, and then
repeatedly keeps the largest-modulus coefficients of each column and refits
them against the projected matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import _as_matrix, economy_svd, lstsq, truncation_projector

__all__ = [
    "SolverConfig",
    "SparseSolution",
    "support_select",
    "slr_solve",
    "verify_bound",
]


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances for :func:`slr_solve`.

    Parameters
    ----------
    delta : float
        Truncation tolerance for the delta-rank and the sweep stopping rule.
    max_sweeps : int
        Maximum number of support/refit sweeps per column.
    support_threshold : float
        Coefficients with modulus at or below this value are dropped.
    """

    delta: float
    max_sweeps: int = 10
    support_threshold: float = 1e-8

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta!r}")
        if not self.support_threshold > 0:
            raise ValueError(
                f"support_threshold must be positive, got {self.support_threshold!r}"
            )
        if int(self.max_sweeps) < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps!r}")


@dataclass
class SparseSolution:
    X: np.ndarray
    supports: list
    residual_norms: np.ndarray
    truncation_rank: int
    sweeps_used: list
    U_delta: np.ndarray = field(repr=False)
    s_constant: float = 0.0

    @property
    def projector(self) -> np.ndarray:
        """Orthogonal projector ``Q = U_delta U_delta^*`` onto the truncated range."""
        return self.U_delta @ self.U_delta.conj().T


def support_select(x, epsilon: float):
    """Rank entries by modulus and count how many exceed ``epsilon``.

    Returns ``(sigma, n0)`` where ``sigma`` is a stable descending sort of
    ``|x|`` (ties keep ascending index order) and ``n0`` is the number of
    moduli strictly above ``epsilon``, floored at one.
    """
    mod = np.abs(np.asarray(x))
    if mod.size == 0:
        raise ValueError("support_select needs a nonempty vector")
    sigma = np.argsort(-mod, kind="stable")
    n0 = max(int(np.count_nonzero(mod > epsilon)), 1)
    return sigma, n0


def _solve_column(A_hat, y_hat, x_ref, cfg: SolverConfig, r: int):
    n = A_hat.shape[1]
    x0 = x_ref
    sigma, n0 = support_select(x0, cfg.support_threshold)
    # the support never exceeds the delta-rank
    n0 = min(n0, r)
    error = 1.0 + cfg.delta
    k = 1
    x = x0
    support = np.sort(sigma[:n0])
    while k <= cfg.max_sweeps and error > cfg.delta:
        cols = sigma[:n0]
        x = np.zeros(n, dtype=np.result_type(A_hat, y_hat))
        x[cols] = lstsq(A_hat[:, cols], y_hat)
        support = np.sort(cols)
        error = float(np.max(np.abs(x - x0)))
        x0 = x
        sigma, n0 = support_select(x, cfg.support_threshold)
        n0 = min(n0, r)
        k += 1
    return x, support, k - 1


def slr_solve(A, Y, cfg: SolverConfig, reference=None) -> SparseSolution:
    """Column-wise sparse solution of ``A X ~ Y`` using the delta-truncated SVD.

    Each column of the result has at most ``rk_delta(A)`` nonzero entries and
    satisfies ``||A x - y|| <= ||x|| s(r) delta + ||(I - Q) y||`` whenever the
    selected columns span the truncated range.

    Parameters
    ----------
    A : (m, n) array
    Y : (m,) or (m, p) array
    cfg : SolverConfig
    reference : (n, p) array, optional
        Starting reference solution. Defaults to the truncated pseudo-inverse
        solution ``V_delta^* S_delta^{-1} U_delta^* Y``.

    Raises
    ------
    ZeroDeltaRankError
        If ``rk_delta(A) == 0``.
    ValueError
        On dimension mismatch.
    """
    A = _as_matrix(A)
    Y = np.asarray(Y)
    vector = Y.ndim == 1
    Y2 = Y[:, None] if vector else Y
    if Y2.shape[0] != A.shape[0]:
        raise ValueError(
            f"dimension mismatch: A has {A.shape[0]} rows, Y has {Y2.shape[0]}"
        )
    m, n = A.shape
    p = Y2.shape[1]
    svd = economy_svd(A)
    U_delta, report = truncation_projector(A, cfg.delta, svd=svd)
    r = report.r
    A_hat = U_delta.conj().T @ A
    Y_hat = U_delta.conj().T @ Y2
    if reference is None:
        X0 = svd.V[:r].conj().T @ (Y_hat / svd.singular_values[:r, None])
    else:
        X0 = np.asarray(reference)
        X0 = X0[:, None] if X0.ndim == 1 else X0
        if X0.shape != (n, p):
            raise ValueError(f"reference has shape {X0.shape}, expected {(n, p)}")

    X = np.zeros((n, p), dtype=np.result_type(A_hat, Y_hat, X0))
    supports, sweeps = [], []
    for j in range(p):
        x, support, used = _solve_column(A_hat, Y_hat[:, j], X0[:, j], cfg, r)
        X[:, j] = x
        supports.append(support)
        sweeps.append(used)
    residuals = np.linalg.norm(A @ X - Y2, axis=0)
    if vector:
        X = X[:, 0]
    return SparseSolution(
        X=X,
        supports=supports,
        residual_norms=residuals,
        truncation_rank=r,
        sweeps_used=sweeps,
        U_delta=U_delta,
        s_constant=report.s_constant,
    )


def verify_bound(A, Y, sol: SparseSolution, cfg: SolverConfig, rtol: float = 1e-10):
    """Check the per-column residual bound for a solver output.

    Tests ``||A x_j - y_j|| <= ||x_j|| s(r) delta + ||(I - Q) y_j||`` with a
    floating-point allowance of ``rtol * (||A||_2 ||x_j|| + ||y_j||)``.
    Returns a boolean array with one verdict per column.
    """
    A = _as_matrix(A)
    Y = np.asarray(Y)
    Y2 = Y[:, None] if Y.ndim == 1 else Y
    X = np.asarray(sol.X)
    X2 = X[:, None] if X.ndim == 1 else X
    U = sol.U_delta
    lhs = np.linalg.norm(A @ X2 - Y2, axis=0)
    tail = np.linalg.norm(Y2 - U @ (U.conj().T @ Y2), axis=0)
    xnorm = np.linalg.norm(X2, axis=0)
    rhs = xnorm * sol.s_constant * cfg.delta + tail
    slack = rtol * (np.linalg.norm(A, 2) * xnorm + np.linalg.norm(Y2, axis=0))
    return lhs <= rhs + slack
