"""Translate regression problems into crosspoint-array quantities.

The chain is: design matrix -> optional translation to nonnegative values ->
per-column scaling -> conductance targets (g_unit siemens per matrix unit) ->
program/verify onto the paired arrays. Targets map to input currents through
i_unit with opposite sign, so the array's steady state recovers the
least-squares weights up to the recorded scale factors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import device, numerics
from .errors import (
    ConductanceOutOfRangeError,
    EmptyDatasetError,
    InconsistentDimensionsError,
)


@dataclass(frozen=True)
class ScalingPolicy:
    """Fixed conversion factors between problem units and circuit units.

    ``column_scales[j]`` multiplies matrix column j before the g_unit
    conversion; ``y_scale`` multiplies targets before the i_unit conversion.
    Weights in problem units are recovered by :func:`unscale_weights`.
    """

    g_unit: float = 100e-6   # siemens per (scaled) matrix unit
    i_unit: float = 100e-6   # amperes per (scaled) target unit
    column_scales: np.ndarray = field(default_factory=lambda: np.ones(1))
    y_scale: float = 1.0

    def __post_init__(self):
        cs = np.asarray(self.column_scales, dtype=np.float64)
        object.__setattr__(self, "column_scales", cs)
        if self.g_unit <= 0 or self.i_unit <= 0 or self.y_scale <= 0 or np.any(cs <= 0):
            raise ValueError("all scale factors must be strictly positive")

    def scale_matrix(self, X):
        return X * self.column_scales[None, :]

    def unscale_matrix(self, Xs):
        return Xs / self.column_scales[None, :]


@dataclass
class MappedProblem:
    """A regression problem realized on the paired arrays.

    ``g_left``/``g_right`` are conductance matrices in siemens;
    ``input_currents`` in amperes. ``offset`` records any per-column
    translation applied upstream so weights can be re-interpreted in the
    original coordinates. ``pv_failed`` marks devices whose program/verify
    retry cap was exhausted.
    """

    g_left: np.ndarray
    g_right: np.ndarray
    input_currents: np.ndarray
    policy: ScalingPolicy
    offset: np.ndarray
    levels: device.ConductanceLevelSet | None = None
    sigma_mode: str = "none"
    pv_tolerance: float = 0.05
    pv_failed: np.ndarray | None = None
    subthreshold_entries: int = 0

    @property
    def shape(self):
        return self.g_left.shape

    def export_csv(self, directory):
        """Write g_left.csv, g_right.csv, input_currents.csv for inspection."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for name, arr in (("g_left", self.g_left), ("g_right", self.g_right)):
            with open(directory / f"{name}.csv", "w", newline="") as f:
                wr = csv.writer(f)
                for row in np.atleast_2d(arr):
                    wr.writerow([repr(v) for v in row])
        with open(directory / "input_currents.csv", "w", newline="") as f:
            wr = csv.writer(f)
            for v in self.input_currents:
                wr.writerow([repr(v)])


def build_design_matrix(xs, degree=1, include_bias=True):
    """Design matrix from sample coordinates.

    ``xs`` is a sequence of scalars (univariate) or equal-length coordinate
    vectors. degree > 1 builds univariate polynomial features x, x^2, ...;
    multivariate data is degree-1 only. The bias column of ones, when
    requested, is column 0.
    """
    if len(xs) == 0:
        raise EmptyDatasetError("no samples given")
    rows = [np.atleast_1d(np.asarray(x, dtype=np.float64)) for x in xs]
    d = rows[0].shape[0]
    if any(r.shape != (d,) for r in rows):
        raise InconsistentDimensionsError("samples have inconsistent dimensionality")
    if degree < 1:
        raise ValueError("degree must be >= 1")
    if degree > 1 and d != 1:
        raise InconsistentDimensionsError(
            "polynomial features require univariate samples"
        )
    pts = np.vstack(rows)
    if degree == 1:
        feats = pts
    else:
        feats = np.hstack([pts ** k for k in range(1, degree + 1)])
    if include_bias:
        return np.hstack([np.ones((len(rows), 1)), feats])
    return feats


def translate_nonnegative(X, has_bias=True):
    """Shift feature columns so every entry is nonnegative.

    Per column j (the bias column excluded), offset_j = max(0, -min_i X_ij)
    and X'_ij = X_ij + offset_j. Returns (X', offset) with offset_j = 0 for
    untouched columns; downstream weight interpretation is restored by
    :func:`weights_in_original_coords`.
    """
    X = numerics.as_matrix(X, "X")
    offset = np.maximum(0.0, -X.min(axis=0))
    if has_bias:
        offset[0] = 0.0
    return X + offset[None, :], offset


def weights_in_original_coords(w, offset):
    """Re-express weights of a translated problem in the original coordinates.

    Translation by ``offset`` leaves feature weights unchanged and folds
    sum_j offset_j * w_j into the intercept (column 0).
    """
    w = np.asarray(w, dtype=np.float64).copy()
    w[0] += float(w[1:] @ offset[1:]) if len(w) > 1 else 0.0
    return w


def make_policy(X, y, g_max=1e-3, g_unit=100e-6, i_unit=100e-6, g_ti=None,
                headroom=0.8, v_limit=0.5, oracle_w=None):
    """Scaling policy: column maxima land at ``headroom * g_max``; targets are
    scaled so no amplifier output in the expected solution exceeds ``v_limit``.

    The output-voltage bound needs the expected weights; they are computed
    with the analytical solver unless ``oracle_w`` is supplied. All-zero
    columns get unit scale (their devices sit at the HRS zero state).
    """
    X = numerics.as_matrix(X, "X")
    y = numerics.as_vector(y, "y")
    col_max = np.max(np.abs(X), axis=0)
    scales = np.where(col_max > 0, headroom * g_max / (np.where(col_max > 0, col_max, 1.0) * g_unit), 1.0)
    if oracle_w is None:
        oracle_w = numerics.pseudoinverse_solve(X, y)
    eps, _ = numerics.residual_and_lse(X, y, oracle_w)
    g_ti = g_unit if g_ti is None else g_ti
    caps = [1.0]
    v_out = np.max(np.abs(oracle_w) / scales) * (i_unit / g_unit)
    if v_out > 0:
        caps.append(v_limit / v_out)
    v_tia = np.max(np.abs(eps)) * i_unit / g_ti
    if v_tia > 0:
        caps.append(v_limit / v_tia)
    return ScalingPolicy(g_unit=g_unit, i_unit=i_unit, column_scales=scales,
                         y_scale=min(caps))


def map_to_conductance(X, y, policy, levels=None, sigma_mode="none",
                       pv_tolerance=0.05, rng=None, offset=None):
    """Realize (X, y) on the paired arrays under ``policy``.

    With ``levels`` given, every scaled entry is programmed via program/verify
    (quantize to the nearest level, then draw stochastic variation until the
    two arrays agree within ``pv_tolerance``); zero and sub-HRS entries land
    on the deep HRS state. Targets above the top level raise
    ConductanceOutOfRangeError. Without ``levels`` the mapping is ideal:
    exact conductances, zeros kept as true zeros.

    Targets become input currents with opposite sign.
    """
    X = numerics.as_matrix(X, "X")
    y = numerics.as_vector(y, "y")
    if X.shape[0] != y.shape[0]:
        raise InconsistentDimensionsError(
            f"X has {X.shape[0]} rows but y has length {y.shape[0]}"
        )
    if np.any(X < 0):
        i, j = np.argwhere(X < 0)[0]
        raise ConductanceOutOfRangeError(
            f"X[{i},{j}] = {X[i, j]} is negative; translate the data first",
            row=int(i), col=int(j),
        )
    if X.shape[1] != policy.column_scales.shape[0]:
        raise InconsistentDimensionsError(
            f"policy has {policy.column_scales.shape[0]} column scales for "
            f"{X.shape[1]} columns"
        )
    offset = np.zeros(X.shape[1]) if offset is None else np.asarray(offset, float)

    targets = policy.scale_matrix(X) * policy.g_unit
    currents = -(y * policy.y_scale) * policy.i_unit

    if levels is None:
        return MappedProblem(
            g_left=targets.copy(), g_right=targets.copy(),
            input_currents=currents, policy=policy, offset=offset,
            levels=None, sigma_mode=sigma_mode, pv_tolerance=pv_tolerance,
            pv_failed=np.zeros(X.shape, dtype=bool),
        )

    top = levels.levels[-1]
    over = targets > top * (1.0 + 1e-12)
    if np.any(over):
        i, j = np.argwhere(over)[0]
        raise ConductanceOutOfRangeError(
            f"scaled entry ({targets[i, j]:.4e} S) at ({i},{j}) exceeds the top "
            f"level {top:.4e} S", row=int(i), col=int(j),
        )
    sub = int(np.sum((targets > 0) & (targets < levels.hrs)))
    g_left, g_right, failed = device.program_verify_array(
        targets, levels, sigma_mode=sigma_mode, rng=rng, tolerance=pv_tolerance
    )
    return MappedProblem(
        g_left=g_left, g_right=g_right, input_currents=currents, policy=policy,
        offset=offset, levels=levels, sigma_mode=sigma_mode,
        pv_tolerance=pv_tolerance, pv_failed=failed, subthreshold_entries=sub,
    )


def unscale_weights(v, policy):
    """Output voltages back to problem-unit weights.

    Inverts the scaling chain: w_j = v_j * g_unit * column_scale_j /
    (i_unit * y_scale). With the unit pairing used throughout (g_unit and
    i_unit numerically equal) this is v_j * column_scale_j / y_scale.
    """
    v = numerics.as_vector(v, "v")
    return v * (policy.g_unit * policy.column_scales) / (policy.i_unit * policy.y_scale)
