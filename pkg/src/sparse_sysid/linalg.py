"""Dense linear algebra kernel: economy SVD, delta-rank and truncation projectors.

Matrices are plain ``numpy.ndarray`` objects. Real input stays in real
arithmetic; complex input is handled in complex arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SvdFactorization",
    "DeltaRankReport",
    "ZeroDeltaRankError",
    "step_indicator",
    "economy_svd",
    "delta_rank",
    "truncation_projector",
    "lstsq",
    "s_constant",
]


class ZeroDeltaRankError(ValueError):
    """Raised when a matrix has no singular value above the tolerance.

    The identification problem is not solvable at this ``delta``; callers
    should pick a smaller tolerance or gather more data.
    """

    def __init__(self, delta: float, top_singular_value: float):
        self.delta = delta
        self.top_singular_value = top_singular_value
        super().__init__(
            f"unidentifiable at delta={delta:g}: largest singular value is "
            f"{top_singular_value:.6g} (delta-rank 0)"
        )


@dataclass(frozen=True)
class SvdFactorization:
    """Economy SVD ``A = U @ diag(singular_values) @ V``."""

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V


@dataclass(frozen=True)
class DeltaRankReport:
    r: int
    delta: float
    tail_energy: float
    s_constant: float


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.issubdtype(A.dtype, np.inexact):
        A = A.astype(float)
    return A


def step_indicator(x: float, a: float) -> int:
    """Heaviside-type step: 1 if ``x > a`` (strictly), else 0."""
    return 1 if x > a else 0


def s_constant(r: int, rows: int, cols: int) -> float:
    """``sqrt(r * (min(rows, cols) - r))``, the constant in the residual bound."""
    return float(np.sqrt(r * (min(rows, cols) - r)))


def economy_svd(A) -> SvdFactorization:
    """Economy-sized SVD with singular values sorted in descending order.

    Raises
    ------
    ValueError
        If ``A`` is empty or contains non-finite entries.
    numpy.linalg.LinAlgError
        If LAPACK fails to converge.
    """
    A = _as_matrix(A)
    if A.size == 0:
        raise ValueError("economy_svd requires a nonempty matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains NaN or Inf entries")
    U, s, V = np.linalg.svd(A, full_matrices=False)
    return SvdFactorization(U, s, V)


def _report_from_values(s: np.ndarray, delta: float, shape) -> DeltaRankReport:
    # exact comparison: values equal to delta are not counted
    r = int(np.count_nonzero(s > delta))
    tail = float(np.sqrt(np.sum(s[r:] ** 2)))
    return DeltaRankReport(r, float(delta), tail, s_constant(r, *shape))


def delta_rank(A, delta: float) -> DeltaRankReport:
    """Count the singular values of ``A`` strictly greater than ``delta``."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    A = _as_matrix(A)
    if A.size == 0:
        return DeltaRankReport(0, float(delta), 0.0, 0.0)
    svd = economy_svd(A)
    return _report_from_values(svd.singular_values, delta, A.shape)


def truncation_projector(A, delta: float, svd: SvdFactorization | None = None):
    """Leading left singular vectors spanning the delta-truncated range of ``A``.

    Returns ``(U_delta, report)``; the orthogonal projector is
    ``U_delta @ U_delta.conj().T`` and satisfies
    ``||A - Q A||_F <= sqrt(min(m, n) - r) * delta``.

    Raises
    ------
    ZeroDeltaRankError
        If no singular value exceeds ``delta``.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    A = _as_matrix(A)
    if svd is None:
        svd = economy_svd(A)
    report = _report_from_values(svd.singular_values, delta, A.shape)
    if report.r == 0:
        raise ZeroDeltaRankError(delta, float(svd.singular_values[0]))
    return svd.U[:, : report.r], report


def lstsq(A, Y, rcond: float | None = None) -> np.ndarray:
    """Minimum-norm least-squares solution of ``A X = Y`` via the SVD.

    Singular values below ``rcond * s_max`` are treated as zero; the default
    ``rcond`` is ``max(m, n) * eps``.
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
    dtype = np.result_type(A, Y2, float)
    if A.size == 0:
        X = np.zeros((n, Y2.shape[1]), dtype=dtype)
        return X[:, 0] if vector else X
    svd = economy_svd(A)
    s = svd.singular_values
    if rcond is None:
        rcond = max(m, n) * np.finfo(float).eps
    keep = s > rcond * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    k = int(np.count_nonzero(keep))
    U, V = svd.U[:, :k], svd.V[:k]
    X = V.conj().T @ ((U.conj().T @ Y2) / s[:k, None])
    X = X.astype(dtype, copy=False)
    return X[:, 0] if vector else X
