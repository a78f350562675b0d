"""The feedback crosspoint circuit.

Two arrays store the same conductance matrix. The first bank of amplifiers
(TIAs with feedback conductance g_ti) converts the left array's row currents
plus the injected inputs to voltages with negative sign; the second bank
drives the left array's columns so that the right array's column currents are
nulled. At the nulled equilibrium

    g_right^T (g_left v + i) = 0,

which for matched arrays is the least-squares normal equation, so the output
voltages v hold the regression weights.

Dynamics use a single-pole macro-model per amplifier: each output is one
state with tau dV/dt = A0 * V_diff - V, tau = A0 / (2 pi gbw). The resistive
network (arrays, feedback conductances, wire parasitics) is memoryless and is
reduced to linear maps from amplifier outputs to amplifier input-node
voltages. Diode clamps are hard saturation on every amplifier output.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import (
    ClampViolationWarning,
    ConductanceOutOfRangeError,
    DimensionMismatchError,
    NotSettledWarning,
    RankDeficientError,
)
from .device import program_verify_array, quantize_array
from .mapping import MappedProblem


@dataclass(frozen=True)
class AmplifierModel:
    """Single-pole op-amp macro-model with an output diode clamp."""

    dc_gain: float = 1e5
    gbw: float = 10e6       # gain-bandwidth product, Hz
    clamp: float = 0.7      # volts; np.inf disables

    def __post_init__(self):
        if self.dc_gain <= 1 or self.gbw <= 0 or self.clamp <= 0:
            raise ValueError("need dc_gain > 1, gbw > 0, clamp > 0")

    @property
    def tau(self):
        """Open-loop time constant A0 / (2 pi gbw)."""
        return self.dc_gain / (2.0 * math.pi * self.gbw)


@dataclass
class CrosspointCircuit:
    """A mapped problem wired into the nested feedback loop.

    ``g_ti`` defaults to the mapping's conductance unit. ``prediction_rows``
    are grounded extra rows of the left array, each (design-row coordinates,
    programmed conductances). Treat instances as immutable after
    construction.
    """

    mapped: MappedProblem
    g_ti: float | None = None
    nfa: AmplifierModel = field(default_factory=AmplifierModel)
    pfa: AmplifierModel = field(default_factory=AmplifierModel)
    wire_r_per_segment: float = 0.0
    prediction_rows: list = field(default_factory=list)

    def __post_init__(self):
        if self.g_ti is None:
            self.g_ti = self.mapped.policy.g_unit
        if self.g_ti <= 0:
            raise ValueError("g_ti must be positive")
        if self.wire_r_per_segment < 0:
            raise ValueError("wire resistance must be nonnegative")
        gl, gr = self.mapped.g_left, self.mapped.g_right
        if gl.shape != gr.shape:
            raise DimensionMismatchError("left/right arrays differ in shape")
        if self.mapped.input_currents.shape[0] != gl.shape[0]:
            raise DimensionMismatchError("input currents do not match array rows")

    @property
    def shape(self):
        return self.mapped.g_left.shape


@dataclass
class TransientResult:
    """Output-voltage trace of a transient run.

    ``trace`` holds the second-bank outputs v(t) (one column per weight);
    ``settle_time`` is the first time after which every component stays
    within ``settle_band`` of its final value. ``clamped`` flags, per
    amplifier state (N TIA outputs then M outputs), whether the diode clamp
    ever engaged.
    """

    times: np.ndarray
    trace: np.ndarray
    settle_time: float
    settle_band: float
    clamped: np.ndarray
    final_v: np.ndarray
    settled: bool


# ---------------------------------------------------------------------------
# wire-parasitic reduction

def _wire_network(G, r_segment, g_port=0.0):
    """Sparse Laplacian of one array with per-segment wire resistance.

    Orientation: drivers feed the M column wires (entering before row 0),
    sense ports terminate the N row wires (before column 0). Device (k, j)
    bridges column node (k, j) and row node (k, j). ``g_port`` adds a lumped
    conductance from each port to an external source (the TIA feedback).

    Returns (Y, B_drive, port_ids) with unknowns ordered
    [column nodes row-major, row nodes row-major, ports].
    """
    import scipy.sparse as sp

    n, m = G.shape
    gs = 1.0 / r_segment
    nc = n * m            # column-wire nodes
    nd = n * m            # row-wire nodes
    tot = nc + nd + n

    def cid(k, j):
        return k * m + j

    def did(k, j):
        return nc + k * m + j

    def pid(k):
        return nc + nd + k

    rows, cols, vals = [], [], []
    b_rows, b_cols, b_vals = [], [], []

    def stamp(a, b):
        rows.extend((a, b, a, b))
        cols.extend((b, a, a, b))
        vals.extend((-gs, -gs, gs, gs))

    for j in range(m):
        # driver -> first column node
        rows.append(cid(0, j)); cols.append(cid(0, j)); vals.append(gs)
        b_rows.append(cid(0, j)); b_cols.append(j); b_vals.append(gs)
        for k in range(n - 1):
            stamp(cid(k, j), cid(k + 1, j))
    for k in range(n):
        rows.append(did(k, 0)); cols.append(did(k, 0)); vals.append(gs)
        rows.append(pid(k)); cols.append(pid(k)); vals.append(gs + g_port)
        rows.extend((did(k, 0), pid(k))); cols.extend((pid(k), did(k, 0)))
        vals.extend((-gs, -gs))
        for j in range(m - 1):
            stamp(did(k, j), did(k, j + 1))
    for k in range(n):
        for j in range(m):
            g = G[k, j]
            if g != 0.0:
                rows.extend((cid(k, j), did(k, j), cid(k, j), did(k, j)))
                cols.extend((did(k, j), cid(k, j), cid(k, j), did(k, j)))
                vals.extend((-g, -g, g, g))

    Y = sp.coo_matrix((vals, (rows, cols)), shape=(tot, tot)).tocsc()
    B = sp.coo_matrix((b_vals, (b_rows, b_cols)), shape=(tot, m)).tocsc()
    ports = np.arange(nc + nd, tot)
    return Y, B, ports


def _wire_effective(G, r_segment):
    """Port-grounded reduction: Geff such that (current into grounded port k)
    = sum_j Geff[k, j] * v_driver_j."""
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    n, m = G.shape
    Y, B, ports = _wire_network(G, r_segment)
    # ground the ports: drop their rows/columns
    keep = np.ones(Y.shape[0], dtype=bool)
    keep[ports] = False
    Yk = Y[keep][:, keep]
    Bk = B[keep]
    lu = spla.splu(Yk.tocsc())
    U = lu.solve(Bk.toarray())
    gs = 1.0 / r_segment
    # current into port k flows through its terminating segment from d(k, 0)
    nc = n * m
    d_first = nc + np.arange(n) * m
    return gs * U[d_first, :]


def _wire_port_maps(G, r_segment, g_port):
    """Floating-port reduction: port voltages as linear maps of the column
    drivers, the per-port source behind ``g_port``, and injected currents.

    Returns (T_drive, T_src, T_inj): u_port = T_drive v + T_src v_src + T_inj i.
    """
    import scipy.sparse.linalg as spla

    n, m = G.shape
    Y, B, ports = _wire_network(G, r_segment, g_port=g_port)
    lu = spla.splu(Y.tocsc())
    U_drive = lu.solve(B.toarray())
    rhs_src = np.zeros((Y.shape[0], n))
    rhs_src[ports, np.arange(n)] = g_port
    U_src = lu.solve(rhs_src)
    rhs_inj = np.zeros((Y.shape[0], n))
    rhs_inj[ports, np.arange(n)] = 1.0
    U_inj = lu.solve(rhs_inj)
    return U_drive[ports], U_src[ports], U_inj[ports]


def _effective_arrays(c: CrosspointCircuit):
    """Array matrices as seen from ideal (virtual-ground) amplifier nodes."""
    gl, gr = c.mapped.g_left, c.mapped.g_right
    if c.wire_r_per_segment == 0.0:
        return gl, gr
    geff_l = _wire_effective(gl, c.wire_r_per_segment)
    geff_r = _wire_effective(gr.T, c.wire_r_per_segment).T
    return geff_l, geff_r


# ---------------------------------------------------------------------------
# steady state and dynamics

def steady_state(c: CrosspointCircuit, cond_cap=numerics.COND_CAP):
    """Ideal-amplifier equilibrium: v solving g_right^T (g_left v + i) = 0.

    Warns with ClampViolationWarning when any output (second bank) or TIA
    output voltage in the solution exceeds its clamp.
    """
    gl, gr = _effective_arrays(c)
    i = c.mapped.input_currents
    S = gr.T @ gl
    cond = np.linalg.cond(S)
    if not np.isfinite(cond) or cond > cond_cap:
        raise RankDeficientError(f"array normal matrix condition {cond:.3e} exceeds cap")
    v = np.linalg.solve(S, -(gr.T @ i))
    v_r = -(gl @ v + i) / c.g_ti
    if np.any(np.abs(v) > c.pfa.clamp) or np.any(np.abs(v_r) > c.nfa.clamp):
        warnings.warn(
            "steady-state voltages exceed the diode clamp; transients will saturate",
            ClampViolationWarning,
        )
    return v


def _state_model(c: CrosspointCircuit):
    """Linearized (clamp-free) state model dx/dt = A x + b.

    State is [v_r (N TIA outputs); v (M outputs)]. Input-node voltages are
    algebraic functions of the state; each amplifier contributes one pole.
    """
    gl, gr = c.mapped.g_left, c.mapped.g_right
    n, m = gl.shape
    i = c.mapped.input_currents
    a_n, tau_n = c.nfa.dc_gain, c.nfa.tau
    a_p, tau_p = c.pfa.dc_gain, c.pfa.tau

    if c.wire_r_per_segment == 0.0:
        d_n = c.g_ti + gl.sum(axis=1)
        d_p = gr.sum(axis=0)
        if np.any(d_p == 0.0):
            raise RankDeficientError("an output column has no devices")
        T_drive = gl / d_n[:, None]
        T_src = np.diag(c.g_ti / d_n)
        T_inj = np.diag(1.0 / d_n)
        Q = gr.T / d_p[:, None]
    else:
        T_drive, T_src, T_inj = _wire_port_maps(gl, c.wire_r_per_segment, c.g_ti)
        Q, _, _ = _wire_port_maps(gr.T, c.wire_r_per_segment, 0.0)

    A = np.zeros((n + m, n + m))
    A[:n, :n] = -(np.eye(n) + a_n * T_src) / tau_n
    A[:n, n:] = -(a_n / tau_n) * T_drive
    A[n:, :n] = (a_p / tau_p) * Q
    A[n:, n:] = -np.eye(m) / tau_p
    b = np.concatenate([-(a_n / tau_n) * (T_inj @ i), np.zeros(m)])
    return A, b


def stability_spectrum(c: CrosspointCircuit):
    """Eigenvalues of the linearized state matrix.

    The circuit is stable iff every real part is negative;
    ``min_real_magnitude`` is the decay rate of the slowest pole and governs
    settling time.
    """
    A, _ = _state_model(c)
    return numerics.eigenvalues(A)


def transient(c: CrosspointCircuit, t_end=None, dt=None, settle_band=0.01,
              max_stored=2000, dt_factor=50.0):
    """Simulate the clamped circuit from the all-zero state.

    ``dt`` defaults to 1 / (dt_factor * f_max) with f_max the fastest pole
    frequency of the linearized model; ``t_end`` defaults to 12 time
    constants of the slowest pole. Clamps saturate every amplifier output.
    """
    A, b = _state_model(c)
    n, m = c.shape
    spec = numerics.eigenvalues(A)
    lam = spec.eigenvalues
    f_max = np.max(np.abs(lam)) / (2.0 * math.pi)
    if dt is None:
        dt = 1.0 / (dt_factor * f_max)
    if t_end is None:
        if spec.min_real_magnitude == 0.0 or not spec.stable:
            raise ValueError("t_end must be given for a non-decaying circuit")
        t_end = 12.0 / spec.min_real_magnitude
    t_end = max(t_end, dt)

    hi = np.concatenate([np.full(n, c.nfa.clamp), np.full(m, c.pfa.clamp)])
    hit = np.zeros(n + m, dtype=bool)

    def project(x):
        over = np.abs(x) > hi
        if over.any():
            hit[over] = True
            return np.clip(x, -hi, hi)
        return x

    finite = hi[np.isfinite(hi)]
    blow_up = 1e6 * (np.max(finite) if finite.size else 0.7)
    n_steps = int(round(t_end / dt))
    store_every = max(1, n_steps // max_stored)
    times, states = numerics.integrate_linear_ode(
        A, b, np.zeros(n + m), dt, t_end, project=project,
        store_every=store_every, blow_up=blow_up,
    )
    vt = states[:, n:]
    final_v = vt[-1].copy()
    scale = np.max(np.abs(final_v))
    if scale == 0.0:
        settle_time, settled = 0.0, True
    else:
        # near-zero outputs take an absolute band tied to the output scale
        band = settle_band * np.maximum(np.abs(final_v), 0.05 * scale)
        in_band = np.all(np.abs(vt - final_v[None, :]) <= band[None, :], axis=1)
        idx = len(in_band) - 1
        while idx > 0 and in_band[idx - 1]:
            idx -= 1
        settle_time = float(times[idx])
        settled = idx < len(in_band) - 1
        if not settled:
            warnings.warn(
                f"transient did not settle within t_end = {t_end:.3e} s",
                NotSettledWarning,
            )
    return TransientResult(
        times=times, trace=vt, settle_time=settle_time, settle_band=settle_band,
        clamped=hit, final_v=final_v, settled=settled,
    )


# ---------------------------------------------------------------------------
# prediction rows and open-loop inference

def program_prediction_row(c: CrosspointCircuit, x_row, rng=None):
    """Program a grounded extra left-array row holding a new design row.

    ``x_row`` is a full design-matrix row in problem units (bias entry
    included when the problem has one); translation offsets recorded in the
    mapping are applied. Returns the programmed conductances.
    """
    mp = c.mapped
    x_row = numerics.as_vector(x_row, "x_row")
    if x_row.shape[0] != mp.shape[1]:
        raise DimensionMismatchError(
            f"x_row has {x_row.shape[0]} entries for {mp.shape[1]} columns"
        )
    shifted = x_row + mp.offset
    if np.any(shifted < 0):
        j = int(np.argwhere(shifted < 0)[0])
        raise ConductanceOutOfRangeError(
            f"prediction coordinate {j} is negative after translation", col=j
        )
    targets = shifted * mp.policy.column_scales * mp.policy.g_unit
    if mp.levels is None:
        return targets
    top = mp.levels.levels[-1]
    over = targets > top * (1.0 + 1e-12)
    if np.any(over):
        j = int(np.argwhere(over)[0])
        raise ConductanceOutOfRangeError(
            f"prediction coordinate {j} maps above the top conductance level", col=j
        )
    row, _, _ = program_verify_array(
        targets, mp.levels, sigma_mode=mp.sigma_mode, rng=rng,
        tolerance=mp.pv_tolerance,
    )
    return row


def predict(c: CrosspointCircuit, x_row, v=None, rng=None):
    """One-step prediction: current in a grounded extra row, in problem units.

    The row current is sum_j g_row[j] * v[j]; dividing by i_unit * y_scale
    returns x_row^T w up to mapping error. ``v`` may carry a precomputed
    steady state to avoid re-solving.
    """
    g_row = program_prediction_row(c, x_row, rng=rng)
    if v is None:
        v = steady_state(c)
    current = float(g_row @ v)
    return current / (c.mapped.policy.i_unit * c.mapped.policy.y_scale)


def open_loop_mvm(weights, x, levels=None, sigma_mode="none", rng=None,
                  headroom=0.8):
    """Matrix-vector product through the conductance mapping.

    Signed weights map as sign * magnitude with magnitudes scaled so the
    largest lands at ``headroom`` of the top level, then quantized and
    optionally perturbed. Without a level set the product is exact. ``x``
    may be a vector or a (batch, n) matrix.
    """
    W = np.asarray(weights, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if W.ndim != 2:
        raise DimensionMismatchError("weights must be 2-D")
    if x.shape[-1] != W.shape[1]:
        raise DimensionMismatchError(
            f"input length {x.shape[-1]} does not match {W.shape[1]} columns"
        )
    if levels is not None:
        w_max = np.max(np.abs(W))
        if w_max > 0:
            scale = headroom * levels.levels[-1] / w_max
            mag, _, _ = program_verify_array(
                np.abs(W) * scale, levels, sigma_mode=sigma_mode, rng=rng
            )
            W = np.sign(W) * mag / scale
    return x @ W.T


def expand_with_wires(c: CrosspointCircuit, r_segment):
    """Circuit with per-segment series wire resistance along rows and columns.

    Every device then sees the cumulative interconnect between its driver and
    its sense amplifier; solves use exact nodal reduction of the expanded
    resistive network. ``r_segment = 0`` returns the circuit unchanged.
    """
    if r_segment < 0:
        raise ValueError("r_segment must be nonnegative")
    if r_segment == 0.0:
        return c
    return CrosspointCircuit(
        mapped=c.mapped, g_ti=c.g_ti, nfa=c.nfa, pfa=c.pfa,
        wire_r_per_segment=r_segment, prediction_rows=list(c.prediction_rows),
    )
