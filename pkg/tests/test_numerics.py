import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xpinv import numerics
from xpinv.errors import (
    DimensionMismatchError,
    RankDeficientError,
    StepSizeInvalidError,
    UnstableError,
)


class TestPseudoinverseSolve:
    def test_identity(self):
        w = numerics.pseudoinverse_solve(np.eye(3), [1.0, 2.0, 3.0])
        np.testing.assert_allclose(w, [1, 2, 3], atol=1e-14)

    def test_collinear_points_exact(self):
        X = np.array([[1.0, 1], [1, 2], [1, 3]])
        w = numerics.pseudoinverse_solve(X, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(w, [0, 1], atol=1e-12)
        _, lse = numerics.residual_and_lse(X, [1.0, 2.0, 3.0], w)
        assert lse < 1e-24

    def test_two_column_normal_equations(self):
        # independent oracle: solve the 2x2 normal equations directly
        X = np.array([[1.0, 1], [1, 2], [1, 3]])
        y = np.array([1.0, 2.0, 2.0])
        XtX = np.array([[3.0, 6.0], [6.0, 14.0]])
        Xty = np.array([5.0, 11.0])
        w_oracle = np.linalg.solve(XtX, Xty)
        np.testing.assert_allclose(w_oracle, [2 / 3, 1 / 2], atol=1e-12)
        w = numerics.pseudoinverse_solve(X, y)
        np.testing.assert_allclose(w, w_oracle, atol=1e-12)
        _, lse = numerics.residual_and_lse(X, y, w)
        assert lse == pytest.approx(1 / 6, rel=1e-10)

    def test_against_lstsq_oracle_random(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            m = int(rng.integers(1, 11))
            n = int(rng.integers(m + 1, 51))
            X = rng.normal(size=(n, m))
            y = rng.normal(size=n)
            w = numerics.pseudoinverse_solve(X, y)
            w_ref = np.linalg.lstsq(X, y, rcond=None)[0]
            scale = max(np.max(np.abs(w_ref)), 1e-12)
            assert np.max(np.abs(w - w_ref)) / scale < 1e-8

    def test_orthogonality_of_residual(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            X = rng.normal(size=(20, 5)) * rng.uniform(0.01, 100.0, size=5)
            y = rng.normal(size=20)
            w = numerics.pseudoinverse_solve(X, y)
            eps, _ = numerics.residual_and_lse(X, y, w)
            denom = np.linalg.norm(X, "fro") * np.linalg.norm(eps) + 1e-300
            assert np.max(np.abs(X.T @ eps)) / denom < 1e-10

    def test_square_equals_exact_solve(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(4, 4)) + 4 * np.eye(4)
        y = rng.normal(size=4)
        np.testing.assert_allclose(numerics.pseudoinverse_solve(A, y),
                                   np.linalg.solve(A, y), rtol=1e-10)

    def test_rank_deficient(self):
        X = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        with pytest.raises(RankDeficientError):
            numerics.pseudoinverse_solve(X, [1.0, 2.0, 3.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            numerics.pseudoinverse_solve(np.eye(3), [1.0, 2.0])
        with pytest.raises(DimensionMismatchError):
            numerics.pseudoinverse_solve(np.ones((2, 3)), [1.0, 2.0])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            numerics.pseudoinverse_solve(np.array([[np.nan, 1], [1, 1], [1, 2]]),
                                         [1.0, 2.0, 3.0])


class TestResidualAndLse:
    def test_examples(self):
        X = np.array([[1.0, 1], [1, 2], [1, 3]])
        eps, lse = numerics.residual_and_lse(X, [1.0, 2.0, 2.0], [2 / 3, 1 / 2])
        np.testing.assert_allclose(eps, [1 / 6, -1 / 3, 1 / 6], atol=1e-12)
        assert lse == pytest.approx(1 / 6, rel=1e-12)

    def test_shape_check(self):
        with pytest.raises(DimensionMismatchError):
            numerics.residual_and_lse(np.eye(2), [1.0, 2.0], [1.0, 2.0, 3.0])


class TestIntegrateLinearOde:
    def test_scalar_decay(self):
        t, x = numerics.integrate_linear_ode(np.array([[-1.0]]), [0.0], [1.0],
                                             dt=1e-3, t_end=1.0)
        assert abs(x[-1, 0] - np.exp(-1.0)) < 1e-6

    def test_pure_integrator(self):
        _, x = numerics.integrate_linear_ode(np.array([[0.0]]), [2.0], [0.0],
                                             dt=1e-2, t_end=3.0)
        assert x[-1, 0] == pytest.approx(6.0, rel=1e-12)

    def test_matrix_exponential_oracle(self):
        # A with eigenvalues {-1, -10}; expected terminal state from the
        # eigendecomposition, computed independently of the integrator
        V = np.array([[1.0, 1.0], [0.0, 1.0]])
        lam = np.array([-1.0, -10.0])
        A = V @ np.diag(lam) @ np.linalg.inv(V)
        x0 = np.array([1.0, 2.0])
        c = np.linalg.solve(V, x0)
        expected = V @ (c * np.exp(lam * 1.0))
        _, x = numerics.integrate_linear_ode(A, [0.0, 0.0], x0, dt=1e-4, t_end=1.0)
        assert np.max(np.abs(x[-1] - expected)) < 1e-6

    def test_order_at_least_two(self):
        err = []
        for dt in (1e-2, 5e-3):
            _, x = numerics.integrate_linear_ode(np.array([[-1.0]]), [0.0], [1.0],
                                                 dt=dt, t_end=1.0)
            err.append(abs(x[-1, 0] - np.exp(-1.0)))
        assert err[0] / err[1] >= 4.0

    def test_bad_step(self):
        with pytest.raises(StepSizeInvalidError):
            numerics.integrate_linear_ode(np.eye(1), [0.0], [0.0], dt=0.0, t_end=1.0)
        with pytest.raises(StepSizeInvalidError):
            numerics.integrate_linear_ode(np.eye(1), [0.0], [0.0], dt=1.0, t_end=0.5)

    def test_divergence_detected(self):
        with pytest.raises(UnstableError):
            numerics.integrate_linear_ode(np.array([[50.0]]), [0.0], [1.0],
                                          dt=0.1, t_end=20.0, blow_up=1e6)

    def test_projection_applied(self):
        clip = lambda x: np.clip(x, -0.5, 0.5)
        _, x = numerics.integrate_linear_ode(np.array([[0.0]]), [2.0], [0.0],
                                             dt=1e-2, t_end=1.0, project=clip)
        assert x[-1, 0] == pytest.approx(0.5)


class TestEigenvalues:
    def test_diagonal(self):
        spec = numerics.eigenvalues(np.diag([-1.0, -2.0]))
        assert sorted(spec.eigenvalues.real) == [-2.0, -1.0]
        assert spec.min_real_magnitude == 1.0
        assert spec.stable

    def test_rotation(self):
        spec = numerics.eigenvalues(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        np.testing.assert_allclose(sorted(spec.eigenvalues.imag), [-1.0, 1.0],
                                   atol=1e-12)
        assert spec.min_real_magnitude == pytest.approx(0.0, abs=1e-12)
        assert not spec.stable

    def test_characteristic_polynomial_oracle(self):
        rng = np.random.default_rng(11)
        A = rng.normal(size=(5, 5))
        A = (A + A.T) / 2.0
        spec = numerics.eigenvalues(A)
        roots = np.roots(np.poly(A))
        got = np.sort(spec.eigenvalues.real)
        want = np.sort(roots.real)
        np.testing.assert_allclose(got, want, atol=1e-8)

    def test_requires_square(self):
        with pytest.raises(DimensionMismatchError):
            numerics.eigenvalues(np.ones((2, 3)))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=6))
def test_residual_zero_for_exact_targets(vals):
    # y = Xw gives zero residual for any w
    w = np.asarray(vals)
    rng = np.random.default_rng(0)
    X = rng.normal(size=(len(w) + 3, len(w)))
    eps, lse = numerics.residual_and_lse(X, X @ w, w)
    assert np.max(np.abs(eps)) < 1e-6 * max(1.0, np.max(np.abs(X @ w)))
    assert lse >= 0.0
