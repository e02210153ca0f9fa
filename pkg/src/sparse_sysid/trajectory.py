"""Time series containers, Hankel trajectory matrices and finite group representations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TimeSeries",
    "GroupRep",
    "GroupValidation",
    "hankel",
    "kron_lift",
    "equivariant_hankel",
    "validate_group",
    "trivial_group",
]


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled sequence of state vectors.

    ``samples`` has shape ``(T, n)``: one row per time sample.
    """

    samples: np.ndarray
    dt: float = 1.0
    names: tuple | None = None
    timestamps: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2:
            raise ValueError(f"samples must be (T, n), got shape {s.shape}")
        if not np.issubdtype(s.dtype, np.inexact):
            s = s.astype(float)
        if not np.all(np.isfinite(s)):
            raise ValueError("time series contains NaN or Inf")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.names is not None and len(self.names) != s.shape[1]:
            raise ValueError("names must match the state dimension")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def T(self) -> int:
        return self.samples.shape[0]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.samples)

    def __len__(self):
        return self.T

    def window(self, start: int = 0, stop: int | None = None) -> "TimeSeries":
        """Contiguous sub-series ``samples[start:stop]``."""
        ts = None if self.timestamps is None else self.timestamps[start:stop]
        return TimeSeries(self.samples[start:stop], self.dt, self.names, ts)


def hankel(series, L: int) -> np.ndarray:
    """Block Hankel trajectory matrix of shape ``(n L, T - L + 1)``.

    Block ``(i, j)`` (zero-based) is the sample ``x[i + j]``.
    """
    X = _samples(series)
    T, n = X.shape
    if not 1 <= L <= T:
        raise ValueError(f"lag L={L} out of range [1, {T}]")
    K = T - L + 1
    # row block i holds x[i], ..., x[i + K - 1] as columns
    return np.concatenate([X[i : i + K].T for i in range(L)], axis=0)


def kron_lift(g, L: int) -> np.ndarray:
    """``I_L (x) g``: block diagonal matrix with ``L`` copies of ``g``."""
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"g must be square, got shape {g.shape}")
    return np.kron(np.eye(L, dtype=g.dtype), g)


@dataclass(frozen=True)
class GroupRep:
    """Finite group of ``n x n`` unitary matrices, stored in the given order."""

    elements: np.ndarray
    identity_index: int = -1

    def __post_init__(self):
        E = np.asarray(self.elements)
        if E.ndim == 2:
            E = E[None]
        if E.ndim != 3 or E.shape[1] != E.shape[2]:
            raise ValueError(f"elements must be (N, n, n), got shape {E.shape}")
        if not np.issubdtype(E.dtype, np.inexact):
            E = E.astype(float)
        E.setflags(write=False)
        object.__setattr__(self, "elements", E)
        if self.identity_index < 0:
            eye = np.eye(E.shape[1])
            dev = [np.linalg.norm(g - eye) for g in E]
            object.__setattr__(self, "identity_index", int(np.argmin(dev)))

    @property
    def n(self) -> int:
        return self.elements.shape[1]

    @property
    def N(self) -> int:
        return self.elements.shape[0]

    def __len__(self):
        return self.N

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, j):
        return self.elements[j]


def trivial_group(n: int) -> GroupRep:
    return GroupRep(np.eye(n)[None], identity_index=0)


@dataclass(frozen=True)
class GroupValidation:
    unitarity_ok: bool
    unitarity_deviation: float
    identity_ok: bool
    identity_deviation: float
    closure_ok: bool
    closure_deviation: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.unitarity_ok and self.identity_ok and self.closure_ok


def validate_group(G: GroupRep, tol: float = 1e-10) -> GroupValidation:
    """Check unitarity, identity membership and closure of a representation.

    Each check reports its largest Frobenius-norm deviation.
    """
    E = G.elements
    eye = np.eye(G.n)
    unit = max(float(np.linalg.norm(g.conj().T @ g - eye)) for g in E)
    ident = min(float(np.linalg.norm(g - eye)) for g in E)
    closure = 0.0
    for g in E:
        for h in E:
            gh = g @ h
            closure = max(closure, min(float(np.linalg.norm(gh - k)) for k in E))
    return GroupValidation(
        unit <= tol, unit, ident <= tol, ident, closure <= tol, closure, tol
    )


def equivariant_hankel(series, G: GroupRep, L: int) -> np.ndarray:
    """``[(I_L (x) g_1) H | ... | (I_L (x) g_N) H]`` with ``H = hankel(series, L)``."""
    X = _samples(series)
    if G.n != X.shape[1]:
        raise ValueError(
            f"group acts on dimension {G.n}, series has dimension {X.shape[1]}"
        )
    H = hankel(X, L)
    n, K = X.shape[1], H.shape[1]
    blocks = []
    H3 = H.reshape(L, n, K)
    for g in G.elements:
        # (I_L (x) g) H applies g to each row block
        blocks.append(np.einsum("ab,lbk->lak", g, H3).reshape(n * L, K))
    return np.concatenate(blocks, axis=1)


def _samples(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.samples
    X = np.asarray(series)
    if X.ndim == 1:
        X = X[:, None]
    return X
