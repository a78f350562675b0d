import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xpinv import device
from xpinv.errors import NegativeConductanceError, UnknownSigmaModeError


@pytest.fixture
def levels32():
    return device.ConductanceLevelSet(g_max=1e-3, num_uniform_levels=31, ratio=1e3)


class TestLevelSet:
    def test_structure(self, levels32):
        lv = levels32.levels
        assert len(lv) == 32
        assert lv[0] == pytest.approx(1e-6)           # deep HRS
        assert lv[-1] == pytest.approx(1e-3)
        assert np.all(np.diff(lv) > 0)
        np.testing.assert_allclose(lv[1:], np.arange(1, 32) * levels32.delta_g)
        assert levels32.g_max / levels32.hrs == pytest.approx(1e3)
        assert levels32.delta_g == pytest.approx(1e-3 / 31)

    def test_from_bits(self):
        lv8 = device.ConductanceLevelSet.from_bits(8)
        assert lv8.num_uniform_levels == 255
        assert len(lv8.levels) == 256

    def test_invalid(self):
        with pytest.raises(ValueError):
            device.ConductanceLevelSet(g_max=-1.0)
        with pytest.raises(ValueError):
            device.ConductanceLevelSet(ratio=0.5)


class TestQuantize:
    def test_zero_goes_to_hrs(self, levels32):
        assert device.quantize(0.0, levels32) == pytest.approx(1e-6)

    def test_top_level_exact(self, levels32):
        assert device.quantize(1e-3, levels32) == pytest.approx(1e-3)

    def test_nearest_level_example(self, levels32):
        # 100 uS sits 3.23 uS from level 3 (96.77 uS) and 29.0 uS from level 4
        got = device.quantize(100e-6, levels32)
        assert got == pytest.approx(3 * levels32.delta_g)
        assert abs(100e-6 - got) == pytest.approx(3.226e-6, rel=1e-3)

    def test_tie_breaks_toward_larger(self):
        lv = device.ConductanceLevelSet(g_max=1.0, num_uniform_levels=4, ratio=1e3)
        # exact midpoint of 0.25 and 0.5
        assert device.quantize(0.375, lv) == pytest.approx(0.5)

    def test_negative_rejected(self, levels32):
        with pytest.raises(NegativeConductanceError):
            device.quantize(-1e-9, levels32)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=0.0, max_value=2e-3, allow_nan=False))
    def test_idempotent(self, g):
        lv = device.ConductanceLevelSet()
        once = device.quantize(g, lv)
        assert device.quantize(once, lv) == once

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=1e-6, max_value=1e-3))
    def test_error_bounded_by_half_step(self, g):
        lv = device.ConductanceLevelSet()
        assert abs(device.quantize(g, lv) - g) <= lv.delta_g / 2 + 1e-18


class TestPerturb:
    def test_none_is_identity(self, levels32):
        assert device.perturb(5 * levels32.delta_g, levels32, "none", 0) == \
            pytest.approx(5 * levels32.delta_g)

    def test_seed_reproducible(self, levels32):
        a = device.perturb(5 * levels32.delta_g, levels32, "dG/4", 123)
        b = device.perturb(5 * levels32.delta_g, levels32, "dG/4", 123)
        assert a == b

    def test_sample_std_matches_sigma(self, levels32):
        rng = np.random.default_rng(9)
        level = 16 * levels32.delta_g
        xs = np.array([device.perturb(level, levels32, "dG/6", rng)
                       for _ in range(100_000)])
        sigma = levels32.delta_g / 6
        assert abs(xs.std() - sigma) / sigma < 0.02

    def test_sample_mean_stays_on_level(self, levels32):
        rng = np.random.default_rng(10)
        level = 16 * levels32.delta_g
        xs = np.array([device.perturb(level, levels32, "dG/2", rng)
                       for _ in range(100_000)])
        assert abs(xs.mean() - level) / level < 0.005

    def test_truncated_at_floor(self, levels32):
        rng = np.random.default_rng(1)
        floor = levels32.hrs / 10
        xs = [device.perturb(levels32.hrs, levels32, "dG/2", rng) for _ in range(2000)]
        assert min(xs) >= floor

    def test_unknown_mode(self, levels32):
        with pytest.raises(UnknownSigmaModeError):
            device.perturb(1e-4, levels32, "dG/5", 0)


class TestProgramVerify:
    def test_noise_free_pair_is_exact(self, levels32):
        pair = device.program_verify_pair(1.3e-4, levels32, sigma_mode="none")
        assert pair.left.programmed == pair.right.programmed
        assert pair.left.programmed == device.quantize(1.3e-4, levels32)
        assert pair.within_tolerance

    def test_vacuous_tolerance_accepts_first_draw(self, levels32):
        rng = np.random.default_rng(5)
        pair = device.program_verify_pair(1.6e-4, levels32, sigma_mode="dG/2",
                                          rng=rng, tolerance=1.0)
        assert pair.within_tolerance
        # exactly one draw per device was consumed
        rng_ref = np.random.default_rng(5)
        rng_ref.normal(0.0, 1.0, 2)
        assert rng.bit_generator.state == rng_ref.bit_generator.state

    def test_tolerance_satisfied_in_bulk(self, levels32):
        # mid-ladder target, default 5% pairing tolerance
        rng = np.random.default_rng(17)
        targets = np.full(10_000, 16 * levels32.delta_g)
        gl, gr, failed = device.program_verify_array(
            targets, levels32, sigma_mode="dG/6", rng=rng, tolerance=0.05)
        mm = np.abs(gl - gr) / np.maximum(gl, gr)
        assert (mm <= 0.05).mean() >= 0.99
        assert failed.mean() <= 0.01

    def test_array_noise_free(self, levels32):
        t = np.array([[0.0, 1e-4], [5e-4, 1e-3]])
        gl, gr, failed = device.program_verify_array(t, levels32)
        np.testing.assert_array_equal(gl, gr)
        assert not failed.any()

    def test_returned_pair_respects_tolerance_flag(self, levels32):
        rng = np.random.default_rng(2)
        pair = device.program_verify_pair(16 * levels32.delta_g, levels32,
                                          sigma_mode="dG/6", rng=rng)
        if pair.within_tolerance:
            mm = abs(pair.left.programmed - pair.right.programmed) / max(
                pair.left.programmed, pair.right.programmed)
            assert mm <= 0.05
