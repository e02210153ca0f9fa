"""Dictionary-based identification of continuous-time dynamics.

Time derivatives are estimated with central finite differences, candidate
feature maps are evaluated on the samples, and the sparse low-rank solver
selects a few coefficients per target. The identified right-hand side can be
integrated forward with RK4.

Two feature layouts are supported. In the ``columns`` layout every output of
a feature map is its own regression column and every sample is one row
(e.g. polynomial terms of a small ODE). In the ``stacked`` layout a feature
map returns a vector per sample which is stacked into a single column, so the
coefficients are shared across components (e.g. spatial stencils of a
semi-discretized PDE).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .integrate import rk4_trajectory
from .solver import SolverConfig, slr_solve
from .trajectory import TimeSeries

__all__ = [
    "FeatureMap",
    "FiniteDiffSpec",
    "IdentifiedDynamics",
    "DictionaryError",
    "finite_diff",
    "build_feature_matrix",
    "identify_dynamics",
    "identify_ode",
    "simulate",
    "power",
    "constant",
    "modulus_power",
    "shift_left",
    "shift_right",
    "dictionary_from_spec",
    "load_dictionary",
    "DictionaryFile",
]


class DictionaryError(ValueError):
    pass


# finite differences -------------------------------------------------------

_STENCILS = {
    1: (np.array([0, 1]), np.array([-1.0, 1.0])),
    2: (np.array([-1, 1]), np.array([-0.5, 0.5])),
    4: (np.array([-2, -1, 1, 2]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0),
}


@dataclass(frozen=True)
class FiniteDiffSpec:
    """Finite-difference derivative settings.

    ``boundary_policy`` is ``"drop-endpoints"`` (rows without a full stencil
    are removed) or ``"zero-pad-masked"`` (those rows are kept and set to
    zero). ``zero_components`` lists state components whose derivative is
    forced to zero, e.g. Dirichlet boundary nodes.
    """

    order: int = 4
    h: float | None = None
    boundary_policy: str = "drop-endpoints"
    zero_components: tuple = ()

    def __post_init__(self):
        if self.order not in _STENCILS:
            raise ValueError(f"unsupported order {self.order}; use 1, 2 or 4")
        if self.h is not None and not self.h > 0:
            raise ValueError("h must be positive")
        if self.boundary_policy not in ("drop-endpoints", "zero-pad-masked"):
            raise ValueError(f"unknown boundary policy {self.boundary_policy!r}")

    @property
    def margins(self):
        offsets = _STENCILS[self.order][0]
        return max(0, -offsets.min()), max(0, offsets.max())

    def valid_slice(self, T: int) -> slice:
        """Rows of the original series that carry a derivative estimate."""
        lo, hi = self.margins
        if self.boundary_policy == "zero-pad-masked":
            return slice(0, T)
        return slice(lo, T - hi)


def finite_diff(series, spec: FiniteDiffSpec) -> np.ndarray:
    """Estimate time derivatives of every component.

    Order 4 uses ``(-f[t+2] + 8 f[t+1] - 8 f[t-1] + f[t-2]) / (12 h)``, order 2
    the central difference and order 1 the forward difference.

    Raises
    ------
    ValueError
        If the series is too short for the stencil or its step differs from
        ``spec.h``.
    """
    if isinstance(series, TimeSeries):
        X, dt = series.samples, series.dt
    else:
        X, dt = np.asarray(series), None
        if X.ndim == 1:
            X = X[:, None]
    h = spec.h if spec.h is not None else dt
    if h is None:
        raise ValueError("step size unknown: pass a TimeSeries or set spec.h")
    if dt is not None and abs(dt - h) > 1e-9 * h:
        raise ValueError(f"series step {dt} does not match stencil step {h}")
    offsets, weights = _STENCILS[spec.order]
    lo, hi = spec.margins
    T = X.shape[0]
    if T < lo + hi + 1:
        raise ValueError(f"need at least {lo + hi + 1} samples for order {spec.order}")
    D = np.zeros((T - lo - hi,) + X.shape[1:], dtype=np.result_type(X, float))
    for off, w in zip(offsets, weights):
        D += w * X[lo + off : T - hi + off]
    D /= h
    if spec.zero_components:
        D[:, list(spec.zero_components)] = 0.0
    if spec.boundary_policy == "zero-pad-masked":
        full = np.zeros(X.shape, dtype=D.dtype)
        full[lo : T - hi] = D
        return full
    return D


# feature maps -------------------------------------------------------------

@dataclass(frozen=True)
class FeatureMap:
    """Candidate term for the right-hand side.

    ``evaluator`` maps a ``(N, n)`` array of states to ``(N, p)`` outputs.
    In the stacked layout ``p`` equals ``n`` and the output forms a single
    regression column; ``labels`` then has one entry.
    """

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    labels: tuple
    stacked: bool = False
    spec: dict | None = field(default=None, compare=False)

    @property
    def width(self) -> int:
        return len(self.labels)

    def __call__(self, states) -> np.ndarray:
        return self.evaluator(np.atleast_2d(states))


def _var_indices(vars_, names):
    out = []
    for v in vars_:
        if isinstance(v, str):
            if names is None or v not in names:
                raise DictionaryError(f"unknown variable {v!r}")
            out.append(list(names).index(v))
        else:
            out.append(int(v))
    return out


def power(vars_: Sequence, exponent: int, names: Sequence[str] | None = None) -> FeatureMap:
    """Columns ``x_v ** exponent`` for each selected variable."""
    idx = _var_indices(vars_, names)
    labels = []
    for i in idx:
        base = names[i] if names is not None else f"x{i}"
        labels.append(base if exponent == 1 else f"{base}^{exponent}")
    spec = {"map": "power", "vars": list(vars_), "exponent": exponent}
    return FeatureMap(
        f"power{exponent}", lambda X: X[:, idx] ** exponent, tuple(labels), spec=spec
    )


def constant(stacked: bool = False, dirichlet: bool = True) -> FeatureMap:
    spec = {"map": "constant", "stacked": stacked}
    if not stacked:
        return FeatureMap("constant", lambda X: np.ones((X.shape[0], 1)), ("1",), spec=spec)

    def f(X):
        out = np.ones(X.shape)
        if dirichlet:
            out[:, [0, -1]] = 0.0
        return out

    return FeatureMap("constant", f, ("1",), stacked=True, spec=spec)


def modulus_power(exponent: int, dirichlet: bool = True) -> FeatureMap:
    """Componentwise ``|u|^exponent u`` with zeroed end components."""

    def f(X):
        out = np.abs(X) ** exponent * X if exponent else np.array(X, copy=True)
        if dirichlet:
            out[:, [0, -1]] = 0.0
        return out

    if exponent == 0:
        label = "w_k"
    elif exponent == 1:
        label = "|w_k| w_k"
    else:
        label = f"|w_k|^{exponent} w_k"
    spec = {"map": "modulus-power", "exponent": exponent, "dirichlet": dirichlet}
    return FeatureMap(f"modpow{exponent}", f, (label,), stacked=True, spec=spec)


def shift_left() -> FeatureMap:
    """``[0, u_3, ..., u_m, 0, 0]``: component ``k`` receives ``u_{k+1}``."""

    def f(X):
        out = np.zeros_like(X)
        out[:, 1:-2] = X[:, 2:-1]
        return out

    return FeatureMap("shift-left", f, ("w_{k+1}",), stacked=True, spec={"map": "shift-left"})


def shift_right() -> FeatureMap:
    """``[0, 0, u_2, ..., u_{m-2}, 0]``: component ``k`` receives ``u_{k-1}``."""

    def f(X):
        out = np.zeros_like(X)
        out[:, 2:-1] = X[:, 1:-2]
        return out

    return FeatureMap("shift-right", f, ("w_{k-1}",), stacked=True, spec={"map": "shift-right"})


def dictionary_from_spec(entries, names: Sequence[str] | None = None) -> list:
    """Build feature maps from a JSON-style list of built-in entries.

    Each entry is a mapping with a ``"map"`` key naming one of ``power``,
    ``constant``, ``shift-left``, ``shift-right`` or ``modulus-power``.
    ``exponent`` may be an integer or a list of integers, which expands into
    one map per exponent. Anything else is rejected.
    """
    maps = []
    for k, e in enumerate(entries):
        if not isinstance(e, dict) or "map" not in e:
            raise DictionaryError(f"entry {k}: expected an object with a 'map' key")
        kind = e["map"]
        exps = e.get("exponent", 1)
        exps = list(exps) if isinstance(exps, (list, tuple)) else [exps]
        if kind == "power":
            vars_ = e.get("vars")
            if vars_ is None:
                if names is None:
                    raise DictionaryError(f"entry {k}: 'vars' required")
                vars_ = list(names)
            maps.extend(power(vars_, int(p), names) for p in exps)
        elif kind == "modulus-power":
            dirichlet = bool(e.get("dirichlet", True))
            maps.extend(modulus_power(int(p), dirichlet) for p in exps)
        elif kind == "constant":
            maps.append(constant(bool(e.get("stacked", False))))
        elif kind == "shift-left":
            maps.append(shift_left())
        elif kind == "shift-right":
            maps.append(shift_right())
        else:
            raise DictionaryError(f"entry {k}: unknown map {kind!r}")
    return maps


@dataclass
class DictionaryFile:
    maps: list
    feature_scale: complex = 1.0
    normalize: bool = False
    dirichlet: bool = False


def load_dictionary(path, names=None) -> DictionaryFile:
    """Read a dictionary file.

    The file holds either a list of entries or an object
    ``{"entries": [...], "feature_scale": [re, im], "normalize": bool,
    "dirichlet": bool}``; ``dirichlet`` zeroes the derivative of the first
    and last state components.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, list):
        return DictionaryFile(dictionary_from_spec(doc, names))
    if not isinstance(doc, dict) or not isinstance(doc.get("entries"), list):
        raise DictionaryError("dictionary file must be a list or an object with 'entries'")
    s = doc.get("feature_scale", 1.0)
    if isinstance(s, list):
        s = complex(*s) if s[1] else float(s[0])
    return DictionaryFile(
        dictionary_from_spec(doc["entries"], names),
        s,
        bool(doc.get("normalize", False)),
        bool(doc.get("dirichlet", False)),
    )


def _layout(dictionary) -> bool:
    kinds = {fm.stacked for fm in dictionary}
    if len(kinds) != 1:
        raise DictionaryError("dictionary mixes stacked and column feature maps")
    return kinds.pop()


def _states(data) -> np.ndarray:
    if isinstance(data, TimeSeries):
        return data.samples
    if isinstance(data, tuple):
        return np.concatenate([_states(d) for d in data], axis=1)
    X = np.asarray(data)
    return X[:, None] if X.ndim == 1 else X


def build_feature_matrix(data, dictionary) -> np.ndarray:
    """Evaluate every feature map on every sample and concatenate the blocks.

    ``data`` is a TimeSeries, a ``(N, n)`` array or a tuple of either (the
    variables are concatenated). Column layout gives ``N`` rows; stacked
    layout gives ``N * n`` rows, sample-major.
    """
    X = _states(data)
    stacked = _layout(dictionary)
    blocks = []
    for fm in dictionary:
        out = np.asarray(fm(X))
        if out.shape[0] != X.shape[0]:
            raise DictionaryError(f"feature {fm.name} returned {out.shape[0]} rows")
        if stacked:
            if out.shape != X.shape:
                raise DictionaryError(f"stacked feature {fm.name} must preserve shape")
            out = out.reshape(-1, 1)
        elif out.shape[1] != fm.width:
            raise DictionaryError(f"feature {fm.name} has inconsistent width")
        blocks.append(out)
    return np.concatenate(blocks, axis=1)


# identification -----------------------------------------------------------

@dataclass
class IdentifiedDynamics:
    """Sparse coefficients ``C`` with ``lhs ~ feature_scale * features @ C``."""

    C: np.ndarray
    dictionary: list
    residual: float
    truncation_rank: int
    feature_scale: complex = 1.0
    target_names: tuple | None = None

    @property
    def stacked(self) -> bool:
        return _layout(self.dictionary)

    @property
    def labels(self) -> list:
        return [lab for fm in self.dictionary for lab in fm.labels]

    def rhs(self, x) -> np.ndarray:
        """Right-hand side ``x' = feature_scale * F(x) C`` for a single state."""
        x = np.asarray(x)
        if self.stacked:
            F = build_feature_matrix(x[None], self.dictionary)
            return self.feature_scale * (F @ self.C[:, 0])
        F = build_feature_matrix(x[None], self.dictionary)
        return self.feature_scale * (F @ self.C)[0]

    def terms(self, tol: float = 0.0) -> list:
        """Per target, the list of ``(coefficient, label)`` for nonzero entries."""
        labels = self.labels
        out = []
        for j in range(self.C.shape[1]):
            col = self.C[:, j]
            out.append([(col[i], labels[i]) for i in np.nonzero(np.abs(col) > tol)[0]])
        return out

    def format(self, digits: int = 6) -> str:
        lines = []
        names = self.target_names or tuple(f"y{j}" for j in range(self.C.shape[1]))
        scale = complex(self.feature_scale)
        if scale == 1:
            lhs = "d/dt"
        elif scale == -1j:
            lhs = "i d/dt"
        else:
            lhs = f"{_fmt(1 / scale, digits)} d/dt"
        for name, terms in zip(names, self.terms()):
            parts = [f"{_fmt(c, digits)}*{lab}" for c, lab in terms]
            lines.append(f"{lhs} {name} = " + (" + ".join(parts) if parts else "0"))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        specs = [fm.spec for fm in self.dictionary]
        if any(s is None for s in specs):
            raise DictionaryError("only built-in feature maps can be serialized")
        cplx = bool(np.iscomplexobj(self.C) or np.iscomplexobj(self.feature_scale))
        from .sdsi import encode_array

        names = self.target_names or tuple(f"y{j}" for j in range(self.C.shape[1]))
        model = []
        for name, terms in zip(names, self.terms()):
            model.append({
                "target": name,
                "terms": [
                    {"coefficient": encode_array(np.asarray(c), cplx), "feature": lab}
                    for c, lab in terms
                ],
            })
        fs = complex(self.feature_scale)
        return {
            "format": "identified-dynamics",
            "version": 1,
            "complex": cplx,
            "dictionary": specs,
            "feature_scale": [fs.real, fs.imag],
            "target_names": list(names),
            "residual": self.residual,
            "truncation_rank": self.truncation_rank,
            "C": encode_array(self.C, cplx),
            "model": model,
        }

    @classmethod
    def from_dict(cls, d: dict, names=None) -> "IdentifiedDynamics":
        if d.get("format") != "identified-dynamics":
            raise ValueError("not a serialized identified-dynamics document")
        from .sdsi import decode_array

        cplx = bool(d.get("complex", False))
        targets = tuple(d.get("target_names") or ())
        dictionary = dictionary_from_spec(d["dictionary"], names or targets or None)
        re, im = d.get("feature_scale", [1.0, 0.0])
        scale = complex(re, im) if im else re
        return cls(
            C=decode_array(d["C"], cplx),
            dictionary=dictionary,
            residual=float(d["residual"]),
            truncation_rank=int(d["truncation_rank"]),
            feature_scale=scale,
            target_names=targets or None,
        )


def _fmt(c, digits):
    c = complex(c)
    if c.imag == 0:
        return f"{c.real:.{digits}g}"
    return f"({c.real:.{digits}g}{c.imag:+.{digits}g}i)"


def identify_dynamics(lhs, features, cfg: SolverConfig, dictionary=None,
                      feature_scale=1.0, target_names=None,
                      normalize: bool = False) -> IdentifiedDynamics:
    """Solve ``feature_scale * features @ C ~ lhs`` with the sparse solver.

    With ``normalize`` the feature columns are scaled to unit 2-norm before
    solving and the coefficients are mapped back afterwards. The support
    threshold then compares ``|c_j| * ||column_j||``, the size of each term's
    contribution, which keeps dictionaries with wildly different column
    scales (high powers) numerically tractable.

    Raises
    ------
    ZeroDeltaRankError
        If the scaled feature matrix has delta-rank zero.
    """
    lhs = np.asarray(lhs)
    lhs = lhs[:, None] if lhs.ndim == 1 else lhs
    A = feature_scale * np.asarray(features)
    if A.shape[0] != lhs.shape[0]:
        raise ValueError(f"row mismatch: features {A.shape[0]}, lhs {lhs.shape[0]}")
    scale = None
    if normalize:
        scale = np.linalg.norm(A, axis=0)
        scale[scale == 0] = 1.0
        A = A / scale
    sol = slr_solve(A, lhs, cfg)
    X = sol.X[:, None] if sol.X.ndim == 1 else sol.X
    if scale is not None:
        A = A * scale
        X = X / scale[:, None]
    residual = float(np.linalg.norm(A @ X - lhs))
    return IdentifiedDynamics(
        C=X,
        dictionary=list(dictionary) if dictionary is not None else [],
        residual=residual,
        truncation_rank=sol.truncation_rank,
        feature_scale=feature_scale,
        target_names=tuple(target_names) if target_names is not None else None,
    )


def identify_ode(series: TimeSeries, dictionary, cfg: SolverConfig,
                 fd: FiniteDiffSpec = FiniteDiffSpec(), feature_scale=1.0,
                 normalize: bool = False) -> IdentifiedDynamics:
    """Finite-difference the series, build features on the same rows and identify."""
    if fd.boundary_policy != "drop-endpoints":
        raise ValueError("identify_ode aligns rows with the drop-endpoints policy")
    dX = finite_diff(series, fd)
    rows = series.samples[fd.valid_slice(series.T)]
    F = build_feature_matrix(rows, dictionary)
    if _layout(dictionary):
        lhs = dX.reshape(-1, 1)
        names = ("w",)
    else:
        lhs = dX
        names = series.names
    return identify_dynamics(lhs, F, cfg, dictionary, feature_scale, names, normalize)


def simulate(dynamics: IdentifiedDynamics, x0, dt: float, steps: int) -> TimeSeries:
    """Integrate the identified system with fixed-step RK4; includes ``x0``.

    Raises
    ------
    DivergenceError
        If the state norm exceeds 1e100.
    """
    x0 = np.asarray(x0)
    dtype = np.result_type(x0, dynamics.C, dynamics.feature_scale, float)
    Z = rk4_trajectory(dynamics.rhs, x0.astype(dtype), dt, steps)
    names = dynamics.target_names if not dynamics.stacked else None
    if names is not None and len(names) != Z.shape[1]:
        names = None
    return TimeSeries(Z, dt=dt, names=names)
