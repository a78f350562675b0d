"""Analog RRAM conductance model.

Devices hold one of a discrete set of conductance levels: a ladder of
uniformly spaced levels plus one deep high-resistance state (HRS) that
stands in for zero. Programming is stochastic; a program/verify loop
re-draws until a pair of devices agrees within tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NegativeConductanceError, UnknownSigmaModeError

#: Programming-variation modes: standard deviation as a fraction of the
#: level spacing dG. ``None`` divisor means no variation.
SIGMA_MODES = {"none": None, "dG/6": 6.0, "dG/4": 4.0, "dG/2": 2.0}


@dataclass(frozen=True)
class ConductanceLevelSet:
    """Discrete programmable conductance levels.

    ``num_uniform_levels`` levels at k * delta_g for k = 1..n plus the HRS at
    g_max / ratio. Defaults give the 32-state device (31 uniform + HRS) with
    a 10^3 on/off window.
    """

    g_max: float = 1e-3
    num_uniform_levels: int = 31
    ratio: float = 1e3
    levels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.g_max <= 0 or self.num_uniform_levels < 1 or self.ratio <= 1:
            raise ValueError("need g_max > 0, num_uniform_levels >= 1, ratio > 1")
        lv = np.unique(np.concatenate(
            [[self.hrs], np.arange(1, self.num_uniform_levels + 1) * self.delta_g]
        ))
        object.__setattr__(self, "levels", lv)

    @property
    def hrs(self):
        return self.g_max / self.ratio

    @property
    def delta_g(self):
        return self.g_max / self.num_uniform_levels

    @classmethod
    def from_bits(cls, bits, g_max=1e-3, ratio=1e3):
        """Ladder with 2**bits - 1 uniform levels (plus HRS)."""
        return cls(g_max=g_max, num_uniform_levels=2 ** bits - 1, ratio=ratio)


@dataclass(frozen=True)
class DeviceInstance:
    """One programmed device: the requested level and the achieved value."""

    target: float
    programmed: float
    sigma_mode: str = "none"


class ProgrammedPair(NamedTuple):
    left: DeviceInstance
    right: DeviceInstance
    within_tolerance: bool


def sigma_value(sigma_mode, levels):
    """Gaussian programming sigma in siemens for a named mode."""
    try:
        div = SIGMA_MODES[sigma_mode]
    except KeyError:
        raise UnknownSigmaModeError(
            f"unknown sigma mode {sigma_mode!r}; expected one of {sorted(SIGMA_MODES)}"
        ) from None
    return 0.0 if div is None else levels.delta_g / div


def quantize_array(g, levels):
    """Nearest level for every entry of ``g`` (ties broken toward the larger level)."""
    g = np.asarray(g, dtype=np.float64)
    if np.any(g < 0):
        bad = np.argwhere(g < 0)
        raise NegativeConductanceError(f"negative conductance at index {tuple(bad[0])}")
    lv = levels.levels
    idx = np.clip(np.searchsorted(lv, g), 1, len(lv) - 1)
    lo, hi = lv[idx - 1], lv[idx]
    return np.where((g - lo) >= (hi - g), hi, lo)


def quantize(g, levels):
    """Scalar form of :func:`quantize_array`."""
    return float(quantize_array(np.asarray([g]), levels)[0])


def _as_rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def perturb(level, levels, sigma_mode, rng):
    """One stochastic programming of ``level``: level + N(0, sigma).

    Truncated below at hrs/10 so conductance stays positive. ``rng`` is a
    numpy Generator or a seed; a fixed seed reproduces the draw exactly.
    """
    sigma = sigma_value(sigma_mode, levels)
    if sigma == 0.0:
        return float(level)
    rng = _as_rng(rng)
    return float(max(level + rng.normal(0.0, sigma), levels.hrs / 10.0))


def program_verify_pair(target, levels, sigma_mode="none", rng=None,
                        tolerance=0.05, max_retries=100):
    """Program two devices to ``target`` until they agree within ``tolerance``.

    Both devices are quantized to the nearest level and perturbed; draws are
    rejected until the relative mismatch |l - r| / max(l, r) is within
    tolerance or the retry cap is hit, in which case the best pair seen is
    returned with ``within_tolerance = False``.
    """
    if not (0.0 < tolerance):
        raise ValueError("tolerance must be positive")
    level = quantize(target, levels)
    sigma = sigma_value(sigma_mode, levels)
    if sigma == 0.0:
        dev = DeviceInstance(target=target, programmed=level, sigma_mode=sigma_mode)
        return ProgrammedPair(dev, dev, True)
    rng = _as_rng(rng)
    best = (np.inf, level, level)
    for _ in range(max_retries):
        l = perturb(level, levels, sigma_mode, rng)
        r = perturb(level, levels, sigma_mode, rng)
        mm = abs(l - r) / max(abs(l), abs(r))
        if mm < best[0]:
            best = (mm, l, r)
        if mm <= tolerance:
            break
    mm, l, r = best
    return ProgrammedPair(
        DeviceInstance(target, l, sigma_mode),
        DeviceInstance(target, r, sigma_mode),
        bool(mm <= tolerance),
    )


def program_verify_array(targets, levels, sigma_mode="none", rng=None,
                         tolerance=0.05, max_retries=100):
    """Vectorized program/verify over an array of targets.

    Returns (g_left, g_right, cap_exhausted) where ``cap_exhausted`` marks
    entries whose best pair still violates the tolerance.
    """
    targets = np.asarray(targets, dtype=np.float64)
    q = quantize_array(targets, levels)
    sigma = sigma_value(sigma_mode, levels)
    if sigma == 0.0:
        return q.copy(), q.copy(), np.zeros(targets.shape, dtype=bool)
    rng = _as_rng(rng)
    floor = levels.hrs / 10.0
    best_mm = np.full(targets.shape, np.inf)
    g_left = q.copy()
    g_right = q.copy()
    active = np.ones(targets.shape, dtype=bool)
    for _ in range(max_retries):
        if not active.any():
            break
        l = np.maximum(q + rng.normal(0.0, sigma, targets.shape), floor)
        r = np.maximum(q + rng.normal(0.0, sigma, targets.shape), floor)
        mm = np.abs(l - r) / np.maximum(np.abs(l), np.abs(r))
        upd = active & (mm < best_mm)
        g_left[upd] = l[upd]
        g_right[upd] = r[upd]
        best_mm[upd] = mm[upd]
        active &= best_mm > tolerance
    return g_left, g_right, best_mm > tolerance
