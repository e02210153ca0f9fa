"""Synthetic data: triangle wave, coupled Duffing network, discretized NLSE, D3 symmetry."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrate import rk4_trajectory
from .trajectory import GroupRep, TimeSeries

__all__ = [
    "NoiseSpec",
    "DuffingParams",
    "triangle_wave",
    "add_noise",
    "duffing_network",
    "duffing_rhs",
    "nlse_grid",
    "nlse_rhs",
    "soliton_profile",
    "d3_representation",
    "TRIANGLE_PERIOD",
]

TRIANGLE_PERIOD = 32


@dataclass(frozen=True)
class NoiseSpec:
    scale: float
    seed: int = 0
    distribution: str = "gaussian"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"noise scale must be positive, got {self.scale!r}")
        if self.distribution != "gaussian":
            raise ValueError("only gaussian noise is supported")


def triangle_wave(T: int) -> TimeSeries:
    """Unit triangle wave with period 32 samples, ``s_1 = 0`` and peak 0.5 at ``k = 17``.

    Evaluates ``s_k = sum_j min(t - j, 1 - t + j) [j < t <= j + 1]`` with
    ``t = (k - 1) / 32``.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    t = np.arange(T, dtype=float) / TRIANGLE_PERIOD
    s = np.zeros(T)
    for j in range(int(np.ceil(t[-1])) + 1):
        window = (t > j).astype(float) - (t > j + 1).astype(float)
        s += np.minimum(t - j, 1.0 - t + j) * window
    return TimeSeries(s[:, None], dt=1.0, names=("s",))


def add_noise(series: TimeSeries, spec: NoiseSpec) -> TimeSeries:
    """Add seeded gaussian noise of standard deviation ``spec.scale`` to every component.

    Complex series get independent noise on real and imaginary parts.
    """
    rng = np.random.default_rng(spec.seed)
    X = series.samples
    noise = rng.normal(0.0, spec.scale, size=X.shape)
    if np.iscomplexobj(X):
        noise = noise + 1j * rng.normal(0.0, spec.scale, size=X.shape)
    return TimeSeries(X + noise, series.dt, series.names, series.timestamps)


@dataclass(frozen=True)
class DuffingParams:
    alpha: float = 1.0
    beta: float = -36.0
    sigma: float = 0.0
    eta: float = 0.2


DUFFING_X0 = (8.0, 7.0, 4.0)
DUFFING_Y0 = (15.0, 14.0, 9.0)
DUFFING_NAMES = ("x1", "x2", "x3", "y1", "y2", "y3")


def duffing_rhs(params: DuffingParams = DuffingParams()):
    """Right-hand side for the state ``(x1, x2, x3, y1, y2, y3)``."""
    a2, b, s, eta = params.alpha ** 2, params.beta, params.sigma, params.eta

    def f(z):
        x, y = z[:3], z[3:]
        # each node couples to the other two
        coupling = eta * (3.0 * x - x.sum())
        return np.concatenate([y, s * y - x * (b + a2 * x) + coupling])

    return f


def duffing_network(T: int, dt: float = 1e-3, params: DuffingParams = DuffingParams(),
                    x0=DUFFING_X0, y0=DUFFING_Y0) -> TimeSeries:
    """Three coupled Duffing oscillators integrated with fixed-step RK4.

    Returns ``T`` samples (including the initial state) of
    ``(x1, x2, x3, y1, y2, y3)`` spaced ``dt`` apart.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if T < 1:
        raise ValueError("T must be >= 1")
    z0 = np.concatenate([np.asarray(x0, float), np.asarray(y0, float)])
    Z = rk4_trajectory(duffing_rhs(params), z0, dt, T - 1)
    return TimeSeries(Z, dt=dt, names=DUFFING_NAMES)


def soliton_profile(x, shift: float = 10.0, speed: float = 0.5):
    """Bright soliton ``sqrt(2) sech(x + shift) exp(i speed x)``."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(2.0) / np.cosh(x + shift) * np.exp(1j * speed * x)


def nlse_rhs(h_x: float, q: float = 1.0):
    """Time derivative of the Dirichlet semi-discretization ``i w' = D w + q |w|^2 w``."""
    c = 1.0 / h_x ** 2

    def f(w):
        out = np.zeros_like(w)
        inner = w[1:-1]
        lap = c * (w[2:] - 2.0 * inner + w[:-2])
        out[1:-1] = -1j * (lap + q * np.abs(inner) ** 2 * inner)
        return out

    return f


def nlse_grid(T: int, h_t: float, q: float = 1.0, xmin: float = -20.0,
              xmax: float = 20.0, h_x: float = 0.25, w0=None,
              record_every: int = 1) -> TimeSeries:
    """RK4 trajectory of the finite-difference nonlinear Schrodinger system.

    The grid has ``(xmax - xmin) / h_x + 1`` nodes with homogeneous Dirichlet
    end values. Recorded samples are spaced ``h_t * record_every``.

    Raises
    ------
    ValueError
        If ``h_t > h_x**2 / 4`` (RK4 stability guard).
    """
    if not 0 < h_t <= h_x ** 2 / 4:
        raise ValueError(f"h_t={h_t} violates the stability guard h_t <= h_x^2/4")
    npts = int(round((xmax - xmin) / h_x)) + 1
    x = xmin + h_x * np.arange(npts)
    w = soliton_profile(x) if w0 is None else np.asarray(w0, dtype=complex).copy()
    if w.shape != (npts,):
        raise ValueError(f"initial condition must have {npts} entries")
    w[0] = w[-1] = 0.0
    W = rk4_trajectory(nlse_rhs(h_x, q), w, h_t, T - 1, record_every=record_every)
    names = tuple(f"w{k + 1}" for k in range(npts))
    return TimeSeries(W, dt=h_t * record_every, names=names)


def d3_representation() -> GroupRep:
    """Permutation representation of D3 on ``(x1, x2, x3, y1, y2, y3)``.

    Elements in order ``e, r, r^2, k, k r, k r^2`` with
    ``r = I_2 (x) (3-cycle)`` and ``k = I_2 (x) (swap of nodes 2 and 3)``.
    """
    cyc = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float)
    swap = np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=float)
    r = np.kron(np.eye(2), cyc)
    k = np.kron(np.eye(2), swap)
    e = np.eye(6)
    elements = [e, r, r @ r, k, k @ r, k @ r @ r]
    return GroupRep(np.array(elements), identity_index=0)
