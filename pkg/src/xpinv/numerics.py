"""Dense linear algebra: least-squares solver, linear ODE integrator, spectra.

All carriers are plain float64 numpy arrays (matrices row-major 2-D, vectors
1-D). Public operations validate shapes and reject non-finite data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceFailureError,
    DimensionMismatchError,
    RankDeficientError,
    StepSizeInvalidError,
    UnstableError,
)

#: Condition-number cap on the normal-equation matrix before a solve is
#: declared rank deficient.
COND_CAP = 1e12


def as_matrix(a, name="matrix"):
    """Coerce to a finite 2-D float64 array."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(a, name="vector"):
    """Coerce to a finite 1-D float64 array."""
    v = np.asarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalue set of a real matrix.

    ``min_real_magnitude`` is |Re| of the eigenvalue closest to the imaginary
    axis; it bounds the slowest decay rate when the system is stable.
    """

    eigenvalues: np.ndarray  # complex, unordered
    min_real_magnitude: float

    @property
    def stable(self):
        """True when every eigenvalue lies strictly in the left half plane."""
        return bool(np.all(self.eigenvalues.real < 0.0))


def pseudoinverse_solve(X, y, cond_cap=COND_CAP):
    """Least-squares solution of the overdetermined system X w = y.

    Solves via QR of the column-equilibrated matrix, which is numerically
    equivalent to forming (X^T X)^{-1} X^T y but stable for badly scaled
    columns. Requires N >= M and full column rank.
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    n, m = X.shape
    if y.shape[0] != n:
        raise DimensionMismatchError(f"X is {n}x{m} but y has length {y.shape[0]}")
    if n < m:
        raise DimensionMismatchError(f"system must be overdetermined: N={n} < M={m}")

    # Column equilibration: unit max-norm columns. Zero columns are rank
    # deficiencies; leave them unscaled so the condition check catches them.
    col_scale = np.max(np.abs(X), axis=0)
    col_scale[col_scale == 0.0] = 1.0
    Xe = X / col_scale[None, :]

    q, r = np.linalg.qr(Xe)
    sv = np.linalg.svd(r, compute_uv=False)
    if sv[-1] == 0.0 or (sv[0] / sv[-1]) ** 2 > cond_cap:
        raise RankDeficientError(
            "normal-equation matrix condition number exceeds "
            f"{cond_cap:.1e} (cond(X)^2 = {(sv[0] / max(sv[-1], np.finfo(float).tiny)) ** 2:.3e})"
        )
    import scipy.linalg

    we = scipy.linalg.solve_triangular(r, q.T @ y)
    return we / col_scale


def residual_and_lse(X, y, w):
    """Residual vector Xw - y and its squared Euclidean norm."""
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    w = as_vector(w, "w")
    if X.shape[0] != y.shape[0] or X.shape[1] != w.shape[0]:
        raise DimensionMismatchError(
            f"shapes do not conform: X {X.shape}, y ({y.shape[0]},), w ({w.shape[0]},)"
        )
    eps = X @ w - y
    return eps, float(eps @ eps)


def integrate_linear_ode(A, b, x0, dt, t_end, project=None, store_every=1,
                         blow_up=1e12):
    """Fixed-step RK4 integration of dx/dt = A x + b from x(0) = x0.

    ``project``, when given, is applied to the state after every step (used
    for hard saturation); the returned trace holds projected states.
    ``store_every`` decimates the stored trace; the final state is always
    stored exactly. Returns (times, states) with states of shape
    (n_stored, len(x0)).

    Raises UnstableError when the state leaves the finite range or exceeds
    ``blow_up`` in max-norm.
    """
    A = as_matrix(A, "A")
    b = as_vector(b, "b")
    x = as_vector(x0, "x0").copy()
    n = A.shape[0]
    if A.shape[1] != n or b.shape[0] != n or x.shape[0] != n:
        raise DimensionMismatchError("A, b, x0 must agree on dimension")
    if not (dt > 0.0) or not (t_end >= dt):
        raise StepSizeInvalidError(f"need 0 < dt <= t_end, got dt={dt}, t_end={t_end}")
    if store_every < 1:
        raise StepSizeInvalidError("store_every must be >= 1")

    n_steps = int(round(t_end / dt))
    times = [0.0]
    states = [x.copy()]
    for k in range(1, n_steps + 1):
        k1 = A @ x + b
        k2 = A @ (x + 0.5 * dt * k1) + b
        k3 = A @ (x + 0.5 * dt * k2) + b
        k4 = A @ (x + dt * k3) + b
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if project is not None:
            x = project(x)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > blow_up:
            raise UnstableError(f"state diverged at t = {k * dt:.3e} s")
        if k % store_every == 0 or k == n_steps:
            times.append(k * dt)
            states.append(x.copy())
    return np.array(times), np.array(states)


def eigenvalues(A):
    """Full complex spectrum of a square matrix."""
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"matrix must be square, got {A.shape}")
    try:
        lam = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailureError(str(exc)) from exc
    return Spectrum(eigenvalues=lam, min_real_magnitude=float(np.min(np.abs(lam.real))))
