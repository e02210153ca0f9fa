"""Sparse identification of lag-embedded linear transition operators.

A series ``x_1, ..., x_T`` is embedded as stacked windows of ``L`` samples.
The transition matrix ``A_hat`` is found column by column with the sparse
low-rank solver, then averaged over a finite symmetry group to obtain an
exactly equivariant ``A_sym``. Both operators can be used to forecast.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .integrate import DIVERGENCE_LIMIT, DivergenceError
from .linalg import s_constant
from .obstruction import degree
from .solver import SolverConfig, slr_solve
from .trajectory import (
    GroupRep,
    TimeSeries,
    equivariant_hankel,
    kron_lift,
    trivial_group,
    validate_group,
)

__all__ = [
    "SdsiModel",
    "BoundReport",
    "identify",
    "symmetrize",
    "predict",
    "predict_orbit",
    "identify_reduced",
    "reduced_predict",
    "commutator_norms",
    "rmse",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SdsiModel:
    """Identified lag-embedded model.

    ``A_hat`` is the sparse operator, ``A_sym`` its group average and ``X1``
    the stacked initial window ``(x_1, ..., x_L)``.
    """

    L: int
    n: int
    A_hat: np.ndarray
    A_sym: np.ndarray
    X1: np.ndarray
    group: GroupRep
    delta: float
    epsilon: float

    def operator(self, symmetrized: bool = False) -> np.ndarray:
        return self.A_sym if symmetrized else self.A_hat

    def readout(self, z) -> np.ndarray:
        """First block of a stacked state, i.e. ``(e_1^T (x) I_n) z``."""
        return np.asarray(z)[: self.n]

    def recurrence(self) -> np.ndarray:
        """Last block row of ``A_hat``: coefficients of ``x_{t+1}`` on the window."""
        return self.A_hat[-self.n :]

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        cplx = bool(
            np.iscomplexobj(self.A_hat) or np.iscomplexobj(self.A_sym)
            or np.iscomplexobj(self.X1) or np.iscomplexobj(self.group.elements)
        )
        return {
            "format": "sdsi-model",
            "version": 1,
            "complex": cplx,
            "n": self.n,
            "L": self.L,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "A_hat": encode_array(self.A_hat, cplx),
            "A_sym": encode_array(self.A_sym, cplx),
            "X1": encode_array(self.X1, cplx),
            "group": {
                "elements": [encode_array(g, cplx) for g in self.group.elements],
                "identity_index": self.group.identity_index,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SdsiModel":
        if d.get("format") != "sdsi-model":
            raise ValueError("not a serialized SDSI model")
        cplx = bool(d.get("complex", False))
        elements = np.array([decode_array(g, cplx) for g in d["group"]["elements"]])
        group = GroupRep(elements, identity_index=int(d["group"]["identity_index"]))
        return cls(
            L=int(d["L"]),
            n=int(d["n"]),
            A_hat=decode_array(d["A_hat"], cplx),
            A_sym=decode_array(d["A_sym"], cplx),
            X1=decode_array(d["X1"], cplx),
            group=group,
            delta=float(d["delta"]),
            epsilon=float(d["epsilon"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "SdsiModel":
        return cls.from_dict(json.loads(text))


def encode_array(a, as_complex: bool | None = None):
    """Row-major nested lists; complex entries become ``[re, im]`` pairs."""
    a = np.asarray(a)
    if as_complex is None:
        as_complex = np.iscomplexobj(a)
    if as_complex:
        a = a.astype(complex)
        return np.stack([a.real, a.imag], axis=-1).tolist()
    return a.astype(float).tolist()


def decode_array(x, as_complex: bool) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    return a[..., 0] + 1j * a[..., 1] if as_complex else a


@dataclass
class BoundReport:
    """Constants of the one-step and t-step error bounds for an identified model."""

    D: float
    E: float
    F: float
    nu: float
    eps_bound: float
    residual: float
    tail: float
    truncation_rank: int
    op_norm: float
    vacuous: bool
    bound_satisfied: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def symmetrize(A_hat, G: GroupRep, L: int) -> np.ndarray:
    """Group average ``(1/N) sum_j (I_L (x) g_j)^* A_hat (I_L (x) g_j)``."""
    A_hat = np.asarray(A_hat)
    if A_hat.ndim != 2 or A_hat.shape[0] != A_hat.shape[1] or A_hat.shape[0] != G.n * L:
        raise ValueError(f"A_hat must be square of side {G.n * L}, got {A_hat.shape}")
    conj = np.empty((G.N,) + A_hat.shape, dtype=np.result_type(A_hat, G.elements))
    for k, g in enumerate(G.elements):
        P = kron_lift(g, L)
        conj[k] = P.conj().T @ A_hat @ P
    # For permutation representations every orbit of entries sees the same
    # multiset of values; summing them in sorted order makes the average
    # exactly invariant instead of invariant up to summation rounding.
    return np.sort(conj, axis=0).sum(axis=0) / G.N


def commutator_norms(A, G: GroupRep, L: int) -> np.ndarray:
    """``||(I_L (x) g) A - A (I_L (x) g)||_F`` for every group element."""
    out = []
    for g in G.elements:
        P = kron_lift(g, L)
        out.append(np.linalg.norm(P @ A - A @ P))
    return np.array(out)


def identify(series: TimeSeries, group: GroupRep | None = None, lag_min: int = 1,
             delta: float = 1e-2, epsilon: float = 1e-2, max_sweeps: int | None = None,
             use_degree: bool = True, allow_invalid_group: bool = False,
             lag_cap: int | None = None):
    """Identify sparse and symmetrized transition operators from a time series.

    The lag is ``max(degree(series, group, delta), lag_min)``; pass
    ``use_degree=False`` to use ``lag_min`` as given. The system
    ``H0^T C ~ H1^T`` is solved with :func:`slr_solve` and ``A_hat = C^T``.

    Returns
    -------
    model : SdsiModel
    bounds : BoundReport

    Raises
    ------
    ZeroDeltaRankError
        If the shifted trajectory matrix has delta-rank zero.
    ValueError
        On too few samples or an invalid group (unless overridden).
    """
    X = series.samples if isinstance(series, TimeSeries) else np.asarray(series)
    if X.ndim == 1:
        X = X[:, None]
    T, n = X.shape
    G = trivial_group(n) if group is None else group
    if G.n != n:
        raise ValueError(f"group acts on dimension {G.n}, series has dimension {n}")
    if not allow_invalid_group:
        check = validate_group(G)
        if not check.ok:
            raise ValueError(f"group representation failed validation: {check}")
    if lag_min < 1:
        raise ValueError("lag_min must be >= 1")
    if T <= 2 * lag_min:
        raise ValueError(f"need T > 2*lag_min samples, got T={T}, lag_min={lag_min}")

    L = lag_min
    if use_degree:
        L = max(degree(X, G, delta, lag_cap=lag_cap).degree, lag_min)
    if T - L < 1:
        raise ValueError(f"lag {L} leaves no transitions in {T} samples")

    H0 = equivariant_hankel(X[:-1], G, L)
    H1 = equivariant_hankel(X[1:], G, L)
    sweeps = n * L if max_sweeps is None else max_sweeps
    cfg = SolverConfig(delta=delta, max_sweeps=sweeps, support_threshold=epsilon)
    sol = slr_solve(H0.T, H1.T, cfg)
    A_hat = sol.X.T.copy()
    A_sym = symmetrize(A_hat, G, L)
    X1 = X[:L].reshape(-1).copy()
    for arr in (A_hat, A_sym, X1):
        arr.setflags(write=False)
    model = SdsiModel(L, n, A_hat, A_sym, X1, G, float(delta), float(epsilon))
    return model, _bounds(H0, H1, A_hat, sol, delta, T, n, L)


def _mul(a, b):
    # 0 * inf is 0 here: a vanishing factor kills an overflowing geometric sum
    return 0.0 if a == 0 or b == 0 else a * b


def _bounds(H0, H1, A_hat, sol, delta, T, n, L) -> BoundReport:
    r = sol.truncation_rank
    U = sol.U_delta
    C = s_constant(r, *H0.T.shape)
    op = float(np.linalg.norm(A_hat))
    D = np.sqrt(n * L) * op * C
    # Q = Qhat^T, so H1 (I - Q) = ((I - Qhat) H1^T)^T
    tail = float(np.linalg.norm(H1.T - U @ (U.conj().T @ H1.T)))
    residual = float(np.linalg.norm(H1 - A_hat @ H0))
    with np.errstate(over="ignore"):
        geom = float(np.sum(op ** np.arange(T, dtype=float)))
    E = _mul(D, geom)
    F = np.sqrt(n * L) * geom
    nu = D * delta + np.sqrt(n * L) * tail
    eps_bound = _mul(E, delta) + _mul(F, tail)
    ok = residual <= nu * (1 + 1e-12) + 1e-12
    if not ok:
        log.warning("one-step residual %.3g exceeds bound %.3g", residual, nu)
    return BoundReport(float(D), float(E), float(F), float(nu), float(eps_bound), residual,
                       tail, r, op, op > 1.0, bool(ok))


def _iterate(A, z, steps, n):
    out = np.empty((steps, n), dtype=np.result_type(A, z))
    for t in range(steps):
        z = A @ z
        norm = float(np.linalg.norm(z))
        if not np.isfinite(norm) or norm > DIVERGENCE_LIMIT:
            raise DivergenceError(t + 1, norm)
        out[t] = z[:n]
    return out


def predict(model: SdsiModel, steps: int, use_symmetrized: bool = False,
            start=None) -> TimeSeries:
    """Forecast ``x_2, ..., x_{steps+1}`` as ``P_L A^t X_1`` for ``t = 1..steps``.

    The state is iterated; matrix powers are never formed. ``start``
    replaces ``X_1`` as the initial stacked window.

    Raises
    ------
    DivergenceError
        If the state norm exceeds 1e100.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    z = model.X1 if start is None else np.asarray(start)
    if z.shape != (model.n * model.L,):
        raise ValueError(f"initial window must have length {model.n * model.L}")
    return TimeSeries(_iterate(model.operator(use_symmetrized), z, steps, model.n))


def predict_orbit(model: SdsiModel, g_index: int, steps: int,
                  use_symmetrized: bool = False) -> TimeSeries:
    """Forecast the orbit seeded with ``(I_L (x) g_j) X_1``."""
    if not 0 <= g_index < model.group.N:
        raise IndexError(f"group element {g_index} out of range")
    seed = kron_lift(model.group[g_index], model.L) @ model.X1
    return predict(model, steps, use_symmetrized, start=seed)


def identify_reduced(series: TimeSeries, delta: float, epsilon: float,
                     max_sweeps: int = 10) -> np.ndarray:
    """Coefficient-space operator for lag one.

    Solves ``H_1(x_1..x_{T-1}) A ~ H_1(x_2..x_T)`` with the sparse solver;
    forecast with :func:`reduced_predict` on the first ``T - 1`` samples.
    """
    X = series.samples
    cfg = SolverConfig(delta=delta, max_sweeps=max_sweeps, support_threshold=epsilon)
    return slr_solve(X[:-1].T, X[1:].T, cfg).X


def reduced_predict(series: TimeSeries, A, steps: int) -> TimeSeries:
    """``u_{k+1} = H_1(series) A^k e_1`` for ``k = 1..steps``, iterated in coefficient space."""
    H = series.samples.T
    A = np.asarray(A)
    M = H.shape[1]
    if A.shape != (M, M):
        raise ValueError(f"A must be {M}x{M} to match the {M} training samples")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    c = np.zeros(M, dtype=A.dtype)
    c[0] = 1.0
    out = np.empty((steps, H.shape[0]), dtype=np.result_type(H, A))
    for k in range(steps):
        c = A @ c
        norm = float(np.linalg.norm(c))
        if not np.isfinite(norm) or norm > DIVERGENCE_LIMIT:
            raise DivergenceError(k + 1, norm)
        out[k] = H @ c
    return TimeSeries(out, series.dt, series.names)


def rmse(a, b) -> float:
    a = np.asarray(a.samples if isinstance(a, TimeSeries) else a)
    b = np.asarray(b.samples if isinstance(b, TimeSeries) else b)
    return float(np.sqrt(np.mean(np.abs(a - b) ** 2)))
