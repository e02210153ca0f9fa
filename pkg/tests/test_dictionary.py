import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparse_sysid.datagen import DUFFING_NAMES, duffing_network, nlse_grid
from sparse_sysid.dictionary import (
    DictionaryError,
    FeatureMap,
    FiniteDiffSpec,
    IdentifiedDynamics,
    build_feature_matrix,
    dictionary_from_spec,
    finite_diff,
    identify_dynamics,
    identify_ode,
    load_dictionary,
    modulus_power,
    power,
    shift_left,
    shift_right,
    simulate,
)
from sparse_sysid.integrate import DivergenceError
from sparse_sysid.linalg import ZeroDeltaRankError
from sparse_sysid.solver import SolverConfig
from sparse_sysid.trajectory import TimeSeries


def sampled(f, h, T=60):
    t = h * np.arange(T)
    return t, TimeSeries(f(t), dt=h)


def test_cubic_exact_with_fourth_order():
    t, s = sampled(lambda t: t ** 3, 0.1)
    d = finite_diff(s, FiniteDiffSpec(4))
    np.testing.assert_allclose(d[:, 0], 3 * t[2:-2] ** 2, atol=1e-10)


def test_constant_has_zero_derivative():
    for order in (1, 2, 4):
        d = finite_diff(TimeSeries(np.full(10, 3.0)), FiniteDiffSpec(order))
        assert np.all(d == 0)


def test_sine_accuracy():
    t, s = sampled(np.sin, 0.01, 400)
    d = finite_diff(s, FiniteDiffSpec(4))
    assert np.max(np.abs(d[:, 0] - np.cos(t[2:-2]))) <= 1e-8


@pytest.mark.parametrize("order", [1, 2, 4])
def test_convergence_order(order):
    errs = []
    for h in (1e-1, 5e-2, 2.5e-2):
        t, s = sampled(np.sin, h, int(round(4 / h)))
        spec = FiniteDiffSpec(order)
        lo, _ = spec.margins
        d = finite_diff(s, spec)[:, 0]
        errs.append(np.max(np.abs(d - np.cos(t[spec.valid_slice(len(t))]))))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    np.testing.assert_allclose(ratios, 2.0 ** order, rtol=0.2)


def test_boundary_policies_and_mask():
    X = np.arange(20.0)[:, None] * np.ones((1, 3))
    s = TimeSeries(X)
    kept = finite_diff(s, FiniteDiffSpec(4, boundary_policy="zero-pad-masked", zero_components=(0,)))
    assert kept.shape == (20, 3)
    assert np.all(kept[:2] == 0) and np.all(kept[-2:] == 0)
    assert np.all(kept[:, 0] == 0)
    np.testing.assert_allclose(kept[2:-2, 1:], 1.0)
    assert finite_diff(s, FiniteDiffSpec(4)).shape == (16, 3)
    assert FiniteDiffSpec(1).valid_slice(20) == slice(0, 19)


def test_finite_diff_errors():
    with pytest.raises(ValueError):
        finite_diff(TimeSeries(np.ones(4)), FiniteDiffSpec(4))
    with pytest.raises(ValueError):
        finite_diff(TimeSeries(np.ones(9), dt=0.1), FiniteDiffSpec(4, h=0.2))
    with pytest.raises(ValueError):
        FiniteDiffSpec(3)


def test_feature_matrix_examples():
    x = np.array([1.0, 2.0, 3.0])
    ident = FeatureMap("id", lambda X: X, ("u",))
    np.testing.assert_array_equal(build_feature_matrix(x, [ident]), x[:, None])
    d = [power([0], 1), power([0], 2)]
    np.testing.assert_array_equal(build_feature_matrix(x, d), [[1, 1], [2, 4], [3, 9]])


def test_nlse_feature_shapes_and_values():
    rng = np.random.default_rng(1)
    U = rng.normal(size=(3, 7)) + 1j * rng.normal(size=(3, 7))
    maps = [modulus_power(0), shift_right(), shift_left(), modulus_power(1), modulus_power(2)]
    F = build_feature_matrix(U, maps)
    assert F.shape == (21, 5)
    u = U[1]
    block = F[7:14]
    np.testing.assert_array_equal(block[:, 0], np.r_[0, u[1:6], 0])
    np.testing.assert_array_equal(block[:, 1], np.r_[0, 0, u[1:5], 0])
    np.testing.assert_array_equal(block[:, 2], np.r_[0, u[2:6], 0, 0])
    np.testing.assert_allclose(block[:, 3], np.r_[0, np.abs(u[1:6]) * u[1:6], 0])
    np.testing.assert_allclose(block[:, 4], np.r_[0, np.abs(u[1:6]) ** 2 * u[1:6], 0])


def test_layout_mixing_rejected():
    with pytest.raises(DictionaryError):
        build_feature_matrix(np.ones((3, 4)), [power([0], 1), shift_left()])


def test_spec_entries():
    maps = dictionary_from_spec(
        [{"map": "power", "vars": ["a", "b"], "exponent": [1, 2]}, {"map": "constant"}],
        names=("a", "b"),
    )
    assert [m.labels for m in maps] == [("a", "b"), ("a^2", "b^2"), ("1",)]
    with pytest.raises(DictionaryError):
        dictionary_from_spec([{"map": "sin"}])
    with pytest.raises(DictionaryError):
        dictionary_from_spec([{"map": "power", "vars": ["z"]}], names=("a",))


def test_load_dictionary_forms(tmp_path):
    p = tmp_path / "d.json"
    p.write_text(json.dumps([{"map": "power", "vars": [0], "exponent": 2}]))
    assert load_dictionary(p).maps[0].labels == ("x0^2",)
    p.write_text(json.dumps({"entries": [{"map": "shift-left"}], "feature_scale": [0, -1],
                             "normalize": True}))
    d = load_dictionary(p)
    assert d.feature_scale == -1j and d.normalize and not d.dirichlet
    p.write_text(json.dumps({"terms": []}))
    with pytest.raises(DictionaryError):
        load_dictionary(p)


def test_exponential_decay_identification():
    h = 0.01
    t = h * np.arange(300)
    s = TimeSeries(np.exp(-t), dt=h, names=("x",))
    d = [power([0], 1, ("x",)), power([0], 2, ("x",))]
    model = identify_ode(s, d, SolverConfig(1e-8, 10, 1e-3))
    np.testing.assert_allclose(model.C[:, 0], [-1.0, 0.0], atol=1e-6)
    dense = np.linalg.lstsq(build_feature_matrix(s.samples[2:-2], d),
                            finite_diff(s, FiniteDiffSpec(4)), rcond=None)[0]
    np.testing.assert_allclose(model.C[0], dense[0], atol=1e-6)
    traj = simulate(model, [1.0], 0.01, 100)
    assert traj.samples[-1, 0] == pytest.approx(np.exp(-1), abs=1e-6)
    assert traj.T == 101


def test_zero_dynamics_constant_trajectory():
    model = IdentifiedDynamics(np.zeros((1, 1)), [power([0], 1)], 0.0, 1)
    traj = simulate(model, [2.5], 0.1, 10)
    assert np.all(traj.samples == 2.5)


def test_simulation_divergence():
    model = IdentifiedDynamics(np.ones((1, 1)), [power([0], 3)], 0.0, 1)
    with pytest.raises(DivergenceError):
        simulate(model, [10.0], 0.1, 1000)


def test_zero_rank_features():
    with pytest.raises(ZeroDeltaRankError):
        identify_dynamics(np.ones(5), np.zeros((5, 2)), SolverConfig(1e-3))


def test_row_mismatch():
    with pytest.raises(ValueError):
        identify_dynamics(np.ones(5), np.ones((4, 2)), SolverConfig(1e-3))


@pytest.fixture(scope="module")
def duffing_model():
    names = DUFFING_NAMES
    d = [power(list(names), 1, names)] + [power(names[:3], k, names) for k in range(2, 10)]
    s = duffing_network(10000, 1e-3)
    return s, identify_ode(s.window(0, 2000), d, SolverConfig(1e-2, 10, 1e-2))


def test_duffing_terms(duffing_model):
    _, model = duffing_model
    terms = model.terms()
    assert [len(t) for t in terms] == [1, 1, 1, 4, 4, 4]
    coeffs = dict((lab, c) for c, lab in terms[3])
    assert coeffs["x1"] == pytest.approx(36.4, abs=1e-2)
    assert coeffs["x1^2"] == pytest.approx(-1.0, abs=1e-2)
    assert np.count_nonzero(model.C) <= model.truncation_rank * 6


def test_duffing_replay(duffing_model):
    s, model = duffing_model
    traj = simulate(model, s.samples[0], 1e-3, 1999)
    assert np.max(np.abs(traj.samples - s.samples[:2000])) < 1e-4


def test_duffing_step_halving_stable(duffing_model):
    _, model = duffing_model
    names = DUFFING_NAMES
    d = [power(list(names), 1, names)] + [power(names[:3], k, names) for k in range(2, 10)]
    fine = duffing_network(20000, 5e-4)
    other = identify_ode(fine.window(0, 4000), d, SolverConfig(1e-2, 10, 1e-2))
    assert np.max(np.abs(other.C - model.C)) < 1e-4


def test_serialization_round_trip(duffing_model):
    _, model = duffing_model
    back = IdentifiedDynamics.from_dict(json.loads(json.dumps(model.to_dict())))
    assert np.array_equal(back.C, model.C)
    assert back.format() == model.format()
    doc = model.to_dict()
    assert doc["model"][3]["terms"][0]["feature"] == "x1"


def test_nlse_desk_identification():
    s = nlse_grid(40, 0.01, record_every=5)
    d = dictionary_from_spec([{"map": "modulus-power", "exponent": 0}, {"map": "shift-left"},
                              {"map": "shift-right"},
                              {"map": "modulus-power", "exponent": list(range(1, 31))}])
    model = identify_ode(s, d, SolverConfig(1e-5, 10, 10.0), FiniteDiffSpec(4, zero_components=(0, 160)),
                         feature_scale=-1j, normalize=True)
    assert model.format().startswith("i d/dt w = ")
    c = model.C[:, 0]
    np.testing.assert_allclose(c[[0, 1, 2, 4]], [-32, 16, 16, 1], rtol=0.02)
    assert np.count_nonzero(c) == 4


@given(st.integers(0, 1000), st.floats(-5, 5).filter(lambda a: abs(a) > 1e-3))
def test_linear_maps_commute_with_scaling(seed, a):
    X = np.random.default_rng(seed).normal(size=(6, 5))
    d = [power([0, 1, 2], 1), modulus_power(0), shift_left()]
    cols = [d[0]]
    np.testing.assert_allclose(build_feature_matrix(a * X, cols), a * build_feature_matrix(X, cols))
    stacked = d[1:]
    np.testing.assert_allclose(build_feature_matrix(a * X, stacked), a * build_feature_matrix(X, stacked))
