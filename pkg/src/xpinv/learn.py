"""Learning pipelines on top of the crosspoint circuit.

Every fit reduces to one or more least-squares solves, executed either by the
analytical solver (backend "oracle") or by mapping the problem onto the
paired arrays and reading the steady-state voltages (backend "circuit").
Logistic regression becomes linear regression of step-binarized targets; the
two-layer network fixes a random first layer and solves the second layer one
output at a time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from . import circuit as circuit_mod
from . import mapping as mapping_mod
from . import numerics
from .circuit import AmplifierModel, CrosspointCircuit
from .device import ConductanceLevelSet
from .errors import DimensionMismatchError, NonBinaryLabelError


def sigma_residual(y, y_hat):
    """Population standard deviation of the residuals y - y_hat."""
    r = np.asarray(y, float) - np.asarray(y_hat, float)
    return float(np.std(r))


@dataclass(frozen=True)
class RegressionProblem:
    """Overdetermined design matrix and targets (N > M)."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple = ()

    def __post_init__(self):
        X = numerics.as_matrix(self.X, "X")
        y = numerics.as_vector(self.y, "y")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.shape[0] <= X.shape[1]:
            raise DimensionMismatchError(
                f"problem must be overdetermined: N={X.shape[0]} <= M={X.shape[1]}"
            )
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatchError("X rows and y length differ")


@dataclass(frozen=True)
class ClassLabels:
    """Binary labels plus the binarization amplitude."""

    labels: np.ndarray
    a: float = 0.2

    def __post_init__(self):
        lab = np.asarray(self.labels)
        object.__setattr__(self, "labels", lab)
        if self.a <= 0:
            raise ValueError("amplitude a must be positive")
        if not np.all(np.isin(lab, (0, 1))):
            raise NonBinaryLabelError("labels must be 0 or 1")


@dataclass(frozen=True)
class CircuitBackend:
    """Device, scaling, and circuit configuration for circuit-backed fits."""

    levels: ConductanceLevelSet | None = None
    sigma_mode: str = "none"
    pv_tolerance: float = 0.05
    seed: int | None = None
    g_unit: float = 100e-6
    i_unit: float = 100e-6
    g_ti: float | None = None
    headroom: float = 0.8
    v_limit: float = 0.5
    y_scale: float | None = None      # overrides the automatic choice
    wire_r_per_segment: float = 0.0
    nfa: AmplifierModel = field(default_factory=AmplifierModel)
    pfa: AmplifierModel = field(default_factory=AmplifierModel)

    def rng(self):
        return np.random.default_rng(self.seed)

    def g_max(self):
        return self.levels.g_max if self.levels is not None else 1e-3


def _as_backend(backend):
    if backend == "oracle":
        return None
    if backend == "circuit":
        return CircuitBackend()
    if isinstance(backend, CircuitBackend):
        return backend
    raise ValueError(f"backend must be 'oracle', 'circuit' or CircuitBackend, got {backend!r}")


def build_circuit(X, y, backend: CircuitBackend, rng=None, oracle_w=None,
                  offset=None):
    """Map (X, y) and assemble the crosspoint circuit for it."""
    policy = mapping_mod.make_policy(
        X, y, g_max=backend.g_max(), g_unit=backend.g_unit,
        i_unit=backend.i_unit, g_ti=backend.g_ti, headroom=backend.headroom,
        v_limit=backend.v_limit, oracle_w=oracle_w,
    )
    if backend.y_scale is not None:
        policy = replace(policy, y_scale=backend.y_scale)
    mp = mapping_mod.map_to_conductance(
        X, y, policy, levels=backend.levels, sigma_mode=backend.sigma_mode,
        pv_tolerance=backend.pv_tolerance,
        rng=backend.rng() if rng is None else rng, offset=offset,
    )
    c = CrosspointCircuit(mapped=mp, g_ti=backend.g_ti, nfa=backend.nfa,
                          pfa=backend.pfa)
    if backend.wire_r_per_segment:
        c = circuit_mod.expand_with_wires(c, backend.wire_r_per_segment)
    return c


def _solve(X, y, backend, rng=None, oracle_w=None):
    """One least-squares solve through the chosen backend.

    Returns (w, circuit_or_None).
    """
    cb = _as_backend(backend)
    if cb is None:
        return numerics.pseudoinverse_solve(X, y), None
    c = build_circuit(X, y, cb, rng=rng, oracle_w=oracle_w)
    v = circuit_mod.steady_state(c)
    return mapping_mod.unscale_weights(v, c.mapped.policy), c


class LinearFit(NamedTuple):
    w: np.ndarray
    sigma_p: float
    lse: float
    circuit: CrosspointCircuit | None = None


def fit_linear(problem: RegressionProblem, backend="oracle"):
    """Least-squares fit; sigma_p is the residual standard deviation."""
    w, c = _solve(problem.X, problem.y, backend)
    eps, lse = numerics.residual_and_lse(problem.X, problem.y, w)
    return LinearFit(w=w, sigma_p=float(np.std(eps)), lse=lse, circuit=c)


def evaluate_prediction(w, X_test, y_test):
    """Residual standard deviation of w applied to held-out data."""
    X_test = numerics.as_matrix(X_test, "X_test")
    y_test = numerics.as_vector(y_test, "y_test")
    if X_test.shape[1] != len(w) or X_test.shape[0] != len(y_test):
        raise DimensionMismatchError("test shapes do not conform")
    return sigma_residual(y_test, X_test @ np.asarray(w, float))


# ---------------------------------------------------------------------------
# logistic regression

def binarize_labels(labels: ClassLabels):
    """Step binarization: +a for class 1, -a for class 0."""
    return np.where(labels.labels == 1, labels.a, -labels.a).astype(float)


def logit_targets(y_soft):
    """Inverse-sigmoid transform for soft targets strictly inside (0, 1).

    Hard 0/1 labels diverge under the logit; use :func:`binarize_labels`
    for those.
    """
    y = np.asarray(y_soft, dtype=np.float64)
    if np.any(y <= 0.0) or np.any(y >= 1.0):
        raise ValueError("logit targets must lie strictly in (0, 1)")
    return np.log(y / (1.0 - y))


@dataclass(frozen=True)
class DecisionBoundary:
    """Hyperplane w0 + sum_j w_j x_j = 0; score >= 0 means class 1."""

    w: np.ndarray

    def score(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return self.w[0] + x @ self.w[1:]

    def classify(self, x):
        return (self.score(x) >= 0.0).astype(int)


class LogisticFit(NamedTuple):
    w: np.ndarray
    boundary: DecisionBoundary
    circuit: CrosspointCircuit | None = None


def fit_logistic(X, labels: ClassLabels, backend="oracle"):
    """One-step logistic regression via least squares on binarized targets.

    ``X`` must carry the bias column (column 0 of ones).
    """
    X = numerics.as_matrix(X, "X")
    s = binarize_labels(labels)
    if X.shape[0] != s.shape[0]:
        raise DimensionMismatchError("X rows and label count differ")
    w, c = _solve(X, s, backend)
    return LogisticFit(w=w, boundary=DecisionBoundary(w=w), circuit=c)


def classify_point(w, x_new, backend="oracle", fitted_circuit=None, rng=None):
    """Class of a new point; ties (score exactly 0) go to class 1.

    With a circuit backend the score is the current of a grounded extra row
    holding [1, x_new], read from the fitted circuit.
    """
    x_new = np.atleast_1d(np.asarray(x_new, dtype=np.float64))
    if len(x_new) + 1 != len(w):
        raise DimensionMismatchError("coordinate dimensionality does not match weights")
    cb = _as_backend(backend)
    if cb is None or fitted_circuit is None:
        s = float(w[0] + x_new @ np.asarray(w[1:], float))
    else:
        s = circuit_mod.predict(fitted_circuit, np.concatenate([[1.0], x_new]), rng=rng)
    return int(s >= 0.0)


# ---------------------------------------------------------------------------
# two-layer network (random first layer, one-step second layer)

def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass(frozen=True)
class TwoLayerConfig:
    """Geometry and training constants for the random-first-layer network."""

    fan_out: int = 4          # hidden = fan_out * inputs
    a: float = 0.05           # target binarization amplitude
    seed: int = 0
    w1_range: float = 0.5     # first-layer weights ~ U(-range, +range)


@dataclass
class TwoLayerModel:
    """Fixed random first layer and solved second layer.

    ``w1`` is inputs x hidden; ``w2`` is (hidden + 1) x outputs with the bias
    weight in row 0.
    """

    w1: np.ndarray
    w2: np.ndarray
    config: TwoLayerConfig

    FORMAT_VERSION = 1

    def hidden_features(self, T):
        """Sigmoid hidden activations with the bias column prepended."""
        H = sigmoid(np.asarray(T, float) @ self.w1)
        return np.hstack([np.ones((H.shape[0], 1)), H])

    def save(self, path):
        meta = json.dumps({"version": self.FORMAT_VERSION,
                           "config": self.config.__dict__})
        np.savez_compressed(path, w1=self.w1, w2=self.w2,
                            meta=np.frombuffer(meta.encode(), dtype=np.uint8))

    @classmethod
    def load(cls, path):
        with np.load(path) as z:
            meta = json.loads(bytes(z["meta"]).decode())
            if meta["version"] != cls.FORMAT_VERSION:
                raise ValueError(f"unsupported model version {meta['version']}")
            return cls(w1=z["w1"], w2=z["w2"],
                       config=TwoLayerConfig(**meta["config"]))


def _one_hot(labels, n_classes=10):
    labels = np.asarray(labels)
    if labels.ndim == 2:
        return labels.astype(float)
    oh = np.zeros((len(labels), n_classes))
    oh[np.arange(len(labels)), labels.astype(int)] = 1.0
    return oh


def train_two_layer(T, digit_labels, config: TwoLayerConfig = TwoLayerConfig(),
                    backend="oracle"):
    """Train the network: sample w1 once, then one solve per output neuron.

    ``T`` holds training inputs in [0, 1]; ``digit_labels`` is either an
    integer vector or a one-hot matrix. Each output column of w2 is the
    least-squares solution against that class's +-a targets; the circuit
    backend programs the hidden-feature matrix once and re-runs the solve
    with each class's current vector, ten solves for ten digits.
    """
    T = numerics.as_matrix(T, "T")
    Y = _one_hot(digit_labels)
    if Y.shape[0] != T.shape[0]:
        raise DimensionMismatchError("inputs and labels differ in sample count")
    rng = np.random.default_rng(config.seed)
    w1 = rng.uniform(-config.w1_range, config.w1_range, (T.shape[1], config.fan_out * T.shape[1]))
    H = sigmoid(T @ w1)
    Xb = np.hstack([np.ones((H.shape[0], 1)), H])
    n_out = Y.shape[1]
    S = np.where(Y == 1.0, config.a, -config.a)

    cb = _as_backend(backend)
    w2_cols = []
    if cb is None:
        for k in range(n_out):
            w2_cols.append(numerics.pseudoinverse_solve(Xb, S[:, k]))
    else:
        # targets are already +-a, so the automatic output-voltage bound is
        # unnecessary; program the matrix once and swap input currents
        if cb.y_scale is None:
            cb = replace(cb, y_scale=1.0)
        c = build_circuit(Xb, S[:, 0], cb, oracle_w=np.zeros(Xb.shape[1]))
        for k in range(n_out):
            i_k = -(S[:, k] * c.mapped.policy.y_scale) * c.mapped.policy.i_unit
            mp_k = replace(c.mapped, input_currents=i_k)
            c_k = CrosspointCircuit(mapped=mp_k, g_ti=c.g_ti, nfa=c.nfa, pfa=c.pfa,
                                    wire_r_per_segment=c.wire_r_per_segment)
            v = circuit_mod.steady_state(c_k)
            w2_cols.append(mapping_mod.unscale_weights(v, c.mapped.policy))
    return TwoLayerModel(w1=w1, w2=np.column_stack(w2_cols), config=config)


def infer_two_layer(model: TwoLayerModel, t, backend="oracle"):
    """Digit prediction: argmax over output sums.

    Accepts one input vector or a batch. The circuit backend routes both
    matrix products through the open-loop conductance mapping.
    """
    t = np.asarray(t, dtype=np.float64)
    single = t.ndim == 1
    tb = np.atleast_2d(t)
    if tb.shape[1] != model.w1.shape[0]:
        raise DimensionMismatchError("input length does not match the first layer")
    cb = _as_backend(backend)
    if cb is None:
        scores = model.hidden_features(tb) @ model.w2
    else:
        rng = cb.rng()
        z = circuit_mod.open_loop_mvm(model.w1.T, tb, levels=cb.levels,
                                      sigma_mode=cb.sigma_mode, rng=rng,
                                      headroom=cb.headroom)
        Hb = np.hstack([np.ones((tb.shape[0], 1)), sigmoid(z)])
        scores = circuit_mod.open_loop_mvm(model.w2.T, Hb, levels=cb.levels,
                                           sigma_mode=cb.sigma_mode, rng=rng,
                                           headroom=cb.headroom)
    pred = np.argmax(scores, axis=1)
    return int(pred[0]) if single else pred
