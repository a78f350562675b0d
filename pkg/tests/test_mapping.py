import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xpinv import device, mapping, numerics
from xpinv.circuit import CrosspointCircuit, steady_state
from xpinv.errors import (
    ConductanceOutOfRangeError,
    EmptyDatasetError,
    InconsistentDimensionsError,
)


class TestDesignMatrix:
    def test_line_fit_structure(self):
        X = mapping.build_design_matrix([1, 2, 3], degree=1, include_bias=True)
        np.testing.assert_array_equal(X, [[1, 1], [1, 2], [1, 3]])

    def test_polynomial_powers(self):
        X = mapping.build_design_matrix([2], degree=3, include_bias=True)
        np.testing.assert_array_equal(X, [[1, 2, 4, 8]])

    def test_two_coordinates(self):
        X = mapping.build_design_matrix([(1, 2)], degree=1, include_bias=True)
        np.testing.assert_array_equal(X, [[1, 1, 2]])

    def test_no_bias(self):
        X = mapping.build_design_matrix([3.0, 4.0], include_bias=False)
        np.testing.assert_array_equal(X, [[3], [4]])

    def test_empty(self):
        with pytest.raises(EmptyDatasetError):
            mapping.build_design_matrix([])

    def test_mixed_dims(self):
        with pytest.raises(InconsistentDimensionsError):
            mapping.build_design_matrix([(1, 2), (1,)])

    def test_poly_needs_univariate(self):
        with pytest.raises(InconsistentDimensionsError):
            mapping.build_design_matrix([(1, 2)], degree=2)


class TestTranslate:
    def test_positive_untouched(self):
        X = np.array([[1.0, 2.0], [1.0, 3.0]])
        X2, off = mapping.translate_nonnegative(X)
        np.testing.assert_array_equal(X2, X)
        np.testing.assert_array_equal(off, [0.0, 0.0])

    def test_negative_column_shifted(self):
        X = np.array([[1.0, -3.0], [1.0, 2.0], [1.0, 0.0]])
        X2, off = mapping.translate_nonnegative(X)
        assert off[1] == 3.0
        assert X2[:, 1].min() == 0.0
        assert np.all(X2[:, 0] == 1.0)

    def test_end_to_end_fit_matches_untranslated(self):
        rng = np.random.default_rng(4)
        X = np.hstack([np.ones((12, 1)), rng.normal(size=(12, 3))])
        y = rng.normal(size=12)
        w_ref = numerics.pseudoinverse_solve(X, y)
        X2, off = mapping.translate_nonnegative(X)
        w2 = numerics.pseudoinverse_solve(X2, y)
        w_back = mapping.weights_in_original_coords(w2, off)
        np.testing.assert_allclose(X @ w_back, X @ w_ref, atol=1e-9)
        np.testing.assert_allclose(w_back, w_ref, atol=1e-9)


class TestScalingPolicy:
    def test_positive_scales_required(self):
        with pytest.raises(ValueError):
            mapping.ScalingPolicy(column_scales=np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            mapping.ScalingPolicy(y_scale=0.0)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=5))
    def test_scale_round_trip(self, scales):
        pol = mapping.ScalingPolicy(column_scales=np.array(scales))
        rng = np.random.default_rng(0)
        X = rng.uniform(0, 5, (4, len(scales)))
        back = pol.unscale_matrix(pol.scale_matrix(X))
        assert np.max(np.abs(back - X)) < 1e-12 * max(1.0, np.max(np.abs(X)))


class TestMapToConductance:
    def test_unit_matrix_mapping(self):
        # columns of ones and [1, 2] at 100 uS per unit, no quantization
        X = np.array([[1.0, 1.0], [1.0, 2.0]])
        y = np.array([0.3, 0.4])
        pol = mapping.ScalingPolicy(g_unit=100e-6, i_unit=100e-6,
                                    column_scales=np.array([1.0, 1.0]))
        mp = mapping.map_to_conductance(X, y, pol)
        np.testing.assert_allclose(mp.g_left,
                                   np.array([[100e-6, 100e-6], [100e-6, 200e-6]]))
        np.testing.assert_allclose(mp.input_currents, [-30e-6, -40e-6])

    def test_zero_maps_to_hrs_when_quantized(self):
        lv = device.ConductanceLevelSet()
        X = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 0.5]])
        pol = mapping.ScalingPolicy(column_scales=np.array([1.0, 1.0]),
                                    g_unit=100e-6)
        mp = mapping.map_to_conductance(X, [0.1, 0.2, 0.3], pol, levels=lv)
        assert mp.g_left[0, 1] == pytest.approx(lv.hrs)

    def test_negative_entry_rejected(self):
        pol = mapping.ScalingPolicy(column_scales=np.ones(2))
        with pytest.raises(ConductanceOutOfRangeError) as ei:
            mapping.map_to_conductance(np.array([[1.0, -0.1], [1, 1], [1, 2]]),
                                       [1.0, 2.0, 3.0], pol)
        assert ei.value.row == 0 and ei.value.col == 1

    def test_above_top_level_rejected(self):
        lv = device.ConductanceLevelSet(g_max=1e-3)
        pol = mapping.ScalingPolicy(column_scales=np.array([1.0]), g_unit=100e-6)
        with pytest.raises(ConductanceOutOfRangeError) as ei:
            mapping.map_to_conductance(np.array([[5.0], [20.0]]), [1.0, 2.0],
                                       pol, levels=lv)
        assert (ei.value.row, ei.value.col) == (1, 0)

    def test_subthreshold_counted_not_fatal(self):
        lv = device.ConductanceLevelSet(g_max=1e-3, ratio=1e3)
        pol = mapping.ScalingPolicy(column_scales=np.array([1.0]), g_unit=100e-6)
        # 1e-6 unit -> 0.1 nS target, far below the 1 uS HRS
        mp = mapping.map_to_conductance(np.array([[1e-6], [8.0]]), [0.1, 0.2],
                                        pol, levels=lv)
        assert mp.subthreshold_entries == 1
        assert mp.g_left[0, 0] == pytest.approx(lv.hrs)

    def test_export_csv(self, tmp_path):
        pol = mapping.ScalingPolicy(column_scales=np.ones(2))
        mp = mapping.map_to_conductance(np.array([[1.0, 2.0], [3, 4], [5, 6]]),
                                        [1.0, 2, 3], pol)
        mp.export_csv(tmp_path)
        assert (tmp_path / "g_left.csv").exists()
        grid = np.loadtxt(tmp_path / "g_right.csv", delimiter=",")
        np.testing.assert_allclose(grid, mp.g_right)


class TestPolicyAndUnscale:
    def test_identity_policy(self):
        pol = mapping.ScalingPolicy(column_scales=np.ones(3))
        v = np.array([0.1, -0.2, 0.3])
        np.testing.assert_allclose(mapping.unscale_weights(v, pol), v)

    def test_y_scale_linearity(self):
        pol = mapping.ScalingPolicy(column_scales=np.ones(2), y_scale=0.1)
        v = np.array([0.05, 0.1])
        np.testing.assert_allclose(mapping.unscale_weights(v, pol), 10 * v)

    def test_make_policy_headroom(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(0.1, 7.0, (10, 3))
        y = rng.uniform(-1, 1, 10)
        pol = mapping.make_policy(X, y, g_max=1e-3, headroom=0.8)
        scaled = pol.scale_matrix(X) * pol.g_unit
        np.testing.assert_allclose(scaled.max(axis=0), 0.8e-3, rtol=1e-12)

    def test_noiseless_round_trip(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            m = int(rng.integers(1, 6))
            n = int(rng.integers(m + 1, 20))
            X = rng.uniform(0, 5, (n, m))
            y = rng.uniform(-2, 2, n)
            w_ref = numerics.pseudoinverse_solve(X, y)
            pol = mapping.make_policy(X, y, oracle_w=w_ref)
            mp = mapping.map_to_conductance(X, y, pol)
            v = steady_state(CrosspointCircuit(mapped=mp))
            w = mapping.unscale_weights(v, pol)
            scale = max(np.max(np.abs(w_ref)), 1e-12)
            assert np.max(np.abs(w - w_ref)) / scale < 1e-6

    def test_column_scale_invariance(self):
        rng = np.random.default_rng(6)
        X = rng.uniform(0.1, 5, (12, 3))
        y = rng.uniform(-1, 1, 12)
        w_ref = None
        for seed in range(5):
            s = np.random.default_rng(seed).uniform(0.2, 4.0, 3)
            pol = mapping.ScalingPolicy(column_scales=s, y_scale=0.7)
            mp = mapping.map_to_conductance(X, y, pol)
            w = mapping.unscale_weights(steady_state(CrosspointCircuit(mapped=mp)), pol)
            if w_ref is None:
                w_ref = w
            else:
                assert np.max(np.abs(w - w_ref)) / np.max(np.abs(w_ref)) < 1e-6

    def test_pv_mismatch_bounded_when_converged(self):
        lv = device.ConductanceLevelSet()
        rng = np.random.default_rng(8)
        X = rng.uniform(0.5, 5, (10, 2))
        y = rng.uniform(0, 1, 10)
        pol = mapping.make_policy(X, y)
        mp = mapping.map_to_conductance(X, y, pol, levels=lv, sigma_mode="dG/6",
                                        pv_tolerance=0.05, rng=rng)
        ok = ~mp.pv_failed
        mm = np.abs(mp.g_left - mp.g_right) / np.maximum(mp.g_left, mp.g_right)
        assert np.all(mm[ok] <= 0.05 + 1e-12)
