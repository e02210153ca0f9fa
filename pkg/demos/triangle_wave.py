"""Forecast a noisy triangle wave with a lag-embedded linear model.

The identification degree picks the lag. Below it, the rank of the
trajectory matrix keeps growing with the window and forecasts drift.
"""

import numpy as np

from sparse_sysid import NoiseSpec, add_noise, degree, identify, predict, rmse, triangle_wave

clean = triangle_wave(257)
train = add_noise(clean, NoiseSpec(1e-3, seed=0)).window(0, 70)

report = degree(train, None, delta=1e-2, full=True)
print(f"identification degree: {report.degree}")
for L in (1, 8, 15, 16, 17):
    if L in report.rank_trace:
        nxt, prev = report.rank_trace[L]
        print(f"  L={L:2d}  rank(L+1 window)={nxt:2d}  rank(L window)={prev:2d}")

model, bounds = identify(train, delta=1e-2, epsilon=0.05)
row = model.recurrence()[0]
terms = [f"{c:+.4f} s[t-{model.L - 1 - k}]" for k, c in enumerate(row) if c != 0]
print("recurrence: s[t+1] = " + " ".join(terms))
print(f"residual {bounds.residual:.2e}, bound {bounds.nu:.2e}")

print("\nholdout RMSE over 187 samples by lag:")
for L in (1, 4, 8, 12, 16, 17):
    m = model if L == model.L else identify(train, lag_min=L, use_degree=False,
                                            delta=1e-2, epsilon=0.05)[0]
    pred = predict(m, clean.T - 1)
    print(f"  L={L:2d}  {rmse(pred.samples[69:], clean.samples[70:]):.5f}")
