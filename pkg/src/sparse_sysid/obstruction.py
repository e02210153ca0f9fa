"""Identification degree, grading set, rank-gap obstruction and lag ceilings."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import delta_rank
from .trajectory import GroupRep, _samples, equivariant_hankel, trivial_group

__all__ = [
    "DegreeReport",
    "rank_pair",
    "grading_set",
    "degree",
    "drk",
    "lag_upper_bound",
]


@dataclass
class DegreeReport:
    degree: int
    grading_set: list
    rank_trace: dict = field(default_factory=dict)
    delta: float = 0.0

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "grading_set": list(self.grading_set),
            "delta": self.delta,
            "rank_trace": [
                {"lag": L, "rank_next": a, "rank_prev": b}
                for L, (a, b) in sorted(self.rank_trace.items())
            ],
        }


def _group(G, n):
    return trivial_group(n) if G is None else G


def max_lag(T: int) -> int:
    return (T + 1) // 2


def rank_pair(series, G: GroupRep | None, delta: float, L: int):
    """``(rk_delta(H_{L+1}(x_1..x_T, G)), rk_delta(H_L(x_1..x_{T-1}, G)))``."""
    X = _samples(series)
    G = _group(G, X.shape[1])
    r_next = delta_rank(equivariant_hankel(X, G, L + 1), delta).r
    r_prev = delta_rank(equivariant_hankel(X[:-1], G, L), delta).r
    return r_next, r_prev


def _lag_range(T, lag_cap):
    top = max_lag(T)
    if lag_cap is not None:
        top = min(top, int(lag_cap))
    return range(1, top + 1)


def grading_set(series, G: GroupRep | None, delta: float, lag_cap: int | None = None):
    """All lags ``1 <= L <= (T+1)//2`` where the two delta-ranks agree and are positive."""
    return set(_scan(series, G, delta, lag_cap, stop_at_first=False).grading_set)


def degree(series, G: GroupRep | None, delta: float, lag_cap: int | None = None,
           full: bool = False) -> DegreeReport:
    """Smallest lag in the grading set, or 0 when the set is empty.

    The scan stops at the first qualifying lag unless ``full`` is set, in
    which case every lag is examined and ``grading_set`` is complete.
    """
    return _scan(series, G, delta, lag_cap, stop_at_first=not full)


def _scan(series, G, delta, lag_cap, stop_at_first):
    X = _samples(series)
    T = X.shape[0]
    if T < 2:
        raise ValueError("need at least two samples")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    trace, members = {}, []
    for L in _lag_range(T, lag_cap):
        a, b = rank_pair(X, G, delta, L)
        trace[L] = (a, b)
        if a == b and b > 0:
            members.append(L)
            if stop_at_first:
                break
    return DegreeReport(members[0] if members else 0, members, trace, float(delta))


def drk(series, G: GroupRep | None, delta: float, L: int) -> int:
    """Rank gap ``rk_delta(H_{L+1}(x_1..x_T)) - rk_delta(H_L(x_1..x_{T-1}))``."""
    if L < 1:
        raise ValueError("L must be >= 1")
    a, b = rank_pair(series, G, delta, L)
    return a - b


def lag_upper_bound(series, threshold: float = float(np.exp(-1.0))) -> int:
    """First lag where the biased sample autocorrelation drops below ``threshold``.

    The result is clamped to ``[1, (T+1)//2]`` and is meant as a ceiling for
    lag searches. A constant series has autocorrelation identically one and
    returns the upper clamp.
    """
    x = np.asarray(_samples(series), dtype=float)
    if x.shape[1] != 1:
        raise ValueError("lag_upper_bound expects a scalar series")
    x = x[:, 0]
    T = x.size
    if T < 4:
        raise ValueError("need at least four samples")
    top = max_lag(T)
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        return top
    for k in range(1, top + 1):
        rho = float(xc[:-k] @ xc[k:]) / denom
        if rho < threshold:
            return max(1, min(k, top))
    return top
