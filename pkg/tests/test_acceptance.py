"""End-to-end acceptance checks, one test per criterion.

Each test logs a single ``criterion N: PASS/FAIL`` line (collected into the
terminal summary) and then asserts on the same verdict.
"""

import itertools
import time

import numpy as np
import pytest

from sparse_sysid.datagen import (
    DUFFING_NAMES,
    NoiseSpec,
    add_noise,
    d3_representation,
    duffing_network,
    nlse_grid,
    triangle_wave,
)
from sparse_sysid.dictionary import (
    FiniteDiffSpec,
    dictionary_from_spec,
    finite_diff,
    identify_ode,
    power,
)
from sparse_sysid.linalg import delta_rank, truncation_projector
from sparse_sysid.obstruction import degree
from sparse_sysid.sdsi import (
    commutator_norms,
    identify,
    identify_reduced,
    predict,
    reduced_predict,
    rmse,
)
from sparse_sysid.solver import SolverConfig, slr_solve, verify_bound
from sparse_sysid.trajectory import TimeSeries

TRAIN = 70


@pytest.fixture(scope="module")
def triangle():
    clean = triangle_wave(257)
    noisy = add_noise(clean, NoiseSpec(1e-3, seed=0))
    return clean, noisy.window(0, TRAIN)


def holdout_rmse(model, clean):
    # forecast row k is sample k + 2 (1-based); rows TRAIN-1.. cover the 187 held-out samples
    pred = predict(model, clean.T - 1)
    return rmse(pred.samples[TRAIN - 1 :], clean.samples[TRAIN:])


def test_criterion_1_triangle_wave(triangle, acceptance_log):
    clean, train = triangle
    t0 = time.perf_counter()
    deg = degree(train, None, 1e-2).degree
    m17, _ = identify(train, delta=1e-2, epsilon=0.05)
    m16, _ = identify(train, lag_min=16, use_degree=False, delta=1e-2, epsilon=0.05)
    e17, e16 = holdout_rmse(m17, clean), holdout_rmse(m16, clean)
    elapsed = time.perf_counter() - t0
    row = m17.recurrence()[0]
    lags = {m17.L - k: float(c) for k, c in enumerate(row) if c != 0}
    target = {1: 1.0, 16: -0.998, 17: 0.998}
    coeffs_ok = set(lags) == set(target) and all(abs(lags[k] - v) <= 0.05 for k, v in target.items())
    ok = deg == 17 and m17.L == 17 and coeffs_ok and e17 < 0.01 and e16 > 0.05 and elapsed < 5
    acceptance_log(1, ok, f"degree={deg} lags={ {k: round(v, 4) for k, v in sorted(lags.items())} } "
                          f"rmse L17={e17:.4g} L16={e16:.4g} time={elapsed:.2f}s")
    assert ok


def graded(rng, m, n):
    U, _ = np.linalg.qr(rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n)))
    V, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return (U * np.logspace(1, -8, n)) @ V.conj().T


def test_criterion_2_solver_bound(acceptance_log):
    rng = np.random.default_rng(2)
    violations = support_excess = 0
    ranks = set()
    for k in range(100):
        A = graded(rng, 30, 20)
        p = int(rng.integers(1, 6))
        Y = rng.normal(size=(30, p)) + 1j * rng.normal(size=(30, p))
        cfg = SolverConfig((1e-1, 1e-3, 1e-6)[k % 3], 10, 1e-12)
        sol = slr_solve(A, Y, cfg)
        violations += int(np.count_nonzero(~verify_bound(A, Y, sol, cfg)))
        support_excess += sum(len(s) > sol.truncation_rank for s in sol.supports)
        ranks.add(sol.truncation_rank)
    ok = violations == 0 and support_excess == 0
    acceptance_log(2, ok, f"bound violations={violations} support>r={support_excess} "
                          f"ranks seen={sorted(ranks)}")
    assert ok


def test_criterion_3_delta_rank_properties(acceptance_log):
    rng = np.random.default_rng(3)
    bad = 0
    for _ in range(100):
        m, n = rng.integers(1, 25, size=2)
        A = rng.normal(size=(m, n)) * np.logspace(0, -rng.uniform(0, 10), n)
        if rng.random() < 0.5:
            A = A + 1j * rng.normal(size=(m, n)) * np.logspace(0, -rng.uniform(0, 10), n)
        delta = 10 ** rng.uniform(-8, 0.5)
        r = delta_rank(A, delta).r
        bad += r != delta_rank(A.T, delta).r
        bad += r > np.linalg.matrix_rank(A)
        if r > 0:
            U, _ = truncation_projector(A, delta)
            gap = np.linalg.norm(A - U @ (U.conj().T @ A))
            bad += gap > np.sqrt(min(m, n) - r) * delta * (1 + 1e-12) + 1e-13 * np.linalg.norm(A)
    acceptance_log(3, bad == 0, f"violations={bad} over 100 matrices")
    assert bad == 0


def best_subset(A, y, kmax=2):
    best = (np.inf, None)
    for k in range(1, kmax + 1):
        for cols in itertools.combinations(range(A.shape[1]), k):
            c = list(cols)
            res = np.linalg.norm(A[:, c] @ np.linalg.lstsq(A[:, c], y, rcond=None)[0] - y)
            if res < best[0] - 1e-9:
                best = (res, set(cols))
    return best


def planted(rng, wide):
    n = int(rng.integers(3, 9))
    m = int(rng.integers(2, n)) if wide else int(rng.integers(n, 9))
    A = rng.normal(size=(m, n))
    k = int(rng.integers(1, 3))
    x = np.zeros(n)
    idx = rng.choice(n, k, replace=False)
    x[idx] = rng.choice([-1, 1], k) * rng.uniform(1, 3, k)
    return A, A @ x


def subset_success(A, y):
    sol = slr_solve(A, y, SolverConfig(1e-8, 10, 0.1))
    res_best, supp_best = best_subset(A, y)
    got = set(np.nonzero(sol.X)[0])
    res = np.linalg.norm(A @ sol.X - y)
    return got == supp_best or (len(got) <= 2 and abs(res - res_best) < 1e-8)


def test_criterion_4_best_subset(acceptance_log):
    rng = np.random.default_rng(4)
    hits = sum(subset_success(*planted(rng, wide=False)) for _ in range(50))
    # underdetermined planted instances are reported but not gated
    wide = sum(subset_success(*planted(rng, wide=True)) for _ in range(50))
    ok = hits >= 48
    acceptance_log(4, ok, f"recovered {hits}/50 (m >= n); wide m < n diagnostic {wide}/50")
    assert ok


def test_criterion_5_duffing(acceptance_log):
    names = DUFFING_NAMES
    t0 = time.perf_counter()
    s = duffing_network(10000, 1e-3)
    d = [power(list(names), 1, names)] + [power(names[:3], k, names) for k in range(2, 10)]
    model = identify_ode(s.window(0, 2000), d, SolverConfig(1e-2, 10, 1e-2))
    elapsed = time.perf_counter() - t0
    labels = model.labels
    C = model.C
    expected = np.zeros_like(C)
    for i in range(3):
        expected[labels.index(f"y{i + 1}"), i] = 1.0
    for i in range(3):
        others = [f"x{j + 1}" for j in range(3) if j != i]
        rows = [f"x{i + 1}"] + others + [f"x{i + 1}^2"]
        expected[[labels.index(v) for v in rows], 3 + i] = [36.4, -0.2, -0.2, -1.0]
    x_rows = np.max(np.abs(C[:, :3] - expected[:, :3]))
    y1_row = np.max(np.abs(C[:, 3] - expected[:, 3]))
    y_rows = np.max(np.abs(C[:, 3:] - expected[:, 3:]))
    zeros_ok = bool(np.all(C[expected == 0] == 0))
    ok = x_rows <= 1e-3 and y1_row <= 1e-2 and y_rows <= 1e-2 and zeros_ok and elapsed < 10
    acceptance_log(5, ok, f"x-rows err={x_rows:.2e} y1-row err={y1_row:.2e} "
                          f"all y-rows err={y_rows:.2e} others zero={zeros_ok} time={elapsed:.2f}s")
    assert ok


def test_criterion_6_d3_symmetrization(acceptance_log):
    s = duffing_network(6000, 1e-3)
    sub = TimeSeries(s.samples[::20], dt=0.02)
    model, _ = identify(sub, d3_representation(), delta=1e-2, epsilon=1e-2)
    norms = commutator_norms(model.A_sym, model.group, model.L)
    ok = len(norms) == 6 and norms.max() <= 1e-12
    acceptance_log(6, ok, f"L={model.L} max commutator norm={norms.max():.3e}")
    assert ok


def test_criterion_7_nlse(acceptance_log):
    t0 = time.perf_counter()
    s = add_noise(nlse_grid(40, 0.01, record_every=5), NoiseSpec(1e-6, seed=0))
    d = dictionary_from_spec([{"map": "modulus-power", "exponent": 0}, {"map": "shift-left"},
                              {"map": "shift-right"},
                              {"map": "modulus-power", "exponent": list(range(1, 201))}])
    model = identify_ode(s, d, SolverConfig(1e-5, 10, 10.0),
                         FiniteDiffSpec(4, zero_components=(0, 160)),
                         feature_scale=-1j, normalize=True)
    elapsed = time.perf_counter() - t0
    c = model.C[:, 0]
    # columns: w, shift-left, shift-right, |w| w, |w|^2 w, |w|^3 w, ...
    core = c[[0, 1, 2, 4]]
    rel = np.abs(core - [-32, 16, 16, 1]) / np.array([32, 16, 16, 1])
    high_zero = bool(np.all(c[5:] == 0))
    ok = rel.max() <= 0.02 and high_zero and elapsed < 60
    acceptance_log(7, ok, f"snapshots={s.T} coeffs={np.round(core, 4).tolist()} "
                          f"max rel err={rel.max():.2e} |w|^j w (j>=3) zero={high_zero} "
                          f"time={elapsed:.2f}s")
    assert ok


def test_criterion_8_fd_order(acceptance_log):
    spec = FiniteDiffSpec(4)
    errs = []
    for h in (1e-1, 5e-2, 2.5e-2):
        t = h * np.arange(int(round(4 / h)) + 1)
        d = finite_diff(TimeSeries(np.sin(t), dt=h), spec)[:, 0]
        errs.append(np.max(np.abs(d - np.cos(t[spec.valid_slice(t.size)]))))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    ok = bool(np.all(np.abs(ratios / 16 - 1) <= 0.2))
    acceptance_log(8, ok, f"error ratios={np.round(ratios, 3).tolist()} (target 16)")
    assert ok


def test_criterion_9_substitutes(triangle, acceptance_log):
    # reduced form: periodic two-harmonic series in 8 dimensions, period 20
    t = np.arange(80)
    period = 20
    B = np.random.default_rng(9).normal(size=(8, 4))
    w = 2 * np.pi * t / period
    Z = np.stack([np.cos(w), np.sin(w), np.cos(2 * w), np.sin(2 * w)], 1) @ B.T
    A = identify_reduced(TimeSeries(Z[:60]), 1e-8, 1e-8)
    pred = reduced_predict(TimeSeries(Z[:59]), A, 59 + period)
    replay = np.max(np.abs(pred.samples[58:] - Z[59 : 60 + period]))

    clean, train = triangle
    m_deg, _ = identify(train, delta=1e-2, epsilon=0.05)
    m1, _ = identify(train, lag_min=1, use_degree=False, delta=1e-2, epsilon=0.05)
    ratio = holdout_rmse(m1, clean) / holdout_rmse(m_deg, clean)
    ok = replay <= 1e-8 and ratio >= 5
    acceptance_log(9, ok, f"reduced replay err={replay:.2e} AR L={m_deg.L} vs L=1 rmse ratio={ratio:.1f}")
    assert ok
