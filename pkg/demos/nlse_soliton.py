"""Identify the discretized nonlinear Schrodinger equation from 40 snapshots.

The dictionary holds the two neighbour shifts, the identity and |w|^j w
for j = 1..200. Feature columns are equilibrated before the sparse solve,
otherwise the high powers swamp the conditioning.
"""

import numpy as np

from sparse_sysid import FiniteDiffSpec, NoiseSpec, SolverConfig, add_noise, identify_ode, nlse_grid
from sparse_sysid.dictionary import dictionary_from_spec

data = add_noise(nlse_grid(40, 0.01, record_every=5), NoiseSpec(1e-6, seed=0))
mass = (np.abs(data.samples) ** 2).sum(axis=1) * 0.25
print(f"{data.T} snapshots of {data.n} grid points, dt={data.dt}; "
      f"mass drift {abs(mass[-1] / mass[0] - 1):.1e}")

dictionary = dictionary_from_spec([
    {"map": "modulus-power", "exponent": 0},
    {"map": "shift-left"},
    {"map": "shift-right"},
    {"map": "modulus-power", "exponent": list(range(1, 201))},
])
model = identify_ode(data, dictionary, SolverConfig(1e-5, 10, 10.0),
                     FiniteDiffSpec(4, zero_components=(0, data.n - 1)),
                     feature_scale=-1j, normalize=True)
print(model.format(digits=5))
print("exact stencil for h_x = 1/4: -32 w_k + 16 w_(k+1) + 16 w_(k-1) + |w_k|^2 w_k")
