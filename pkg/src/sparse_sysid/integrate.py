"""Classical fixed-step fourth-order Runge-Kutta integration."""

from __future__ import annotations

import numpy as np

__all__ = ["DivergenceError", "rk4_step", "rk4_trajectory"]

DIVERGENCE_LIMIT = 1e100


class DivergenceError(ArithmeticError):
    """State norm exceeded the divergence limit during time stepping."""

    def __init__(self, step: int, norm: float):
        self.step = step
        self.norm = norm
        super().__init__(f"state diverged at step {step} (norm {norm:.3g})")


def rk4_step(f, x, dt):
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_trajectory(f, x0, dt: float, steps: int, record_every: int = 1,
                   limit: float = DIVERGENCE_LIMIT) -> np.ndarray:
    """Integrate ``x' = f(x)`` and return ``steps + 1`` recorded states including ``x0``.

    With ``record_every = k`` the integrator takes ``k`` steps of size ``dt``
    between consecutive recorded states.
    """
    x = np.array(x0, dtype=np.result_type(np.asarray(x0), float))
    out = np.empty((steps + 1,) + x.shape, dtype=x.dtype)
    out[0] = x
    for i in range(1, steps + 1):
        # overflow shows up as a non-finite norm below
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(record_every):
                x = rk4_step(f, x, dt)
        norm = float(np.linalg.norm(x))
        if not np.isfinite(norm) or norm > limit:
            raise DivergenceError(i, norm)
        out[i] = x
    return out
