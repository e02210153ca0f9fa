"""Recover three coupled Duffing oscillators from a dictionary of monomials.

Only the first fifth of the trajectory is used for fitting. The identified
model is then integrated over the full horizon and compared with the data.
"""

import numpy as np

from sparse_sysid import SolverConfig, duffing_network, identify_ode, simulate
from sparse_sysid.datagen import DUFFING_NAMES
from sparse_sysid.dictionary import power

names = DUFFING_NAMES
data = duffing_network(10000, 1e-3)

# linear terms in every variable, then x_i^2 .. x_i^9
dictionary = [power(list(names), 1, names)] + [power(names[:3], k, names) for k in range(2, 10)]
model = identify_ode(data.window(0, 2000), dictionary, SolverConfig(1e-2, 10, 1e-2))
print(model.format())
print(f"{np.count_nonzero(model.C)} of {model.C.size} coefficients are nonzero")

replay = simulate(model, data.samples[0], 1e-3, data.T - 1)
err = np.abs(replay.samples - data.samples).max(axis=1)
for t in (1999, 4999, 9999):
    print(f"max state error at t={data.dt * t:4.1f}: {err[t]:.2e}")
