import math

import numpy as np
import pytest

from fradrc.discretize import (
    DigitalFilter,
    FilterStateError,
    default_fit_band,
    gl_fir,
    iir_fit,
    filter_step,
)


def response_errors(f, alpha, band, n=500):
    w = np.logspace(math.log10(band[0]), math.log10(band[1]), n)
    h = f.response(w)
    ideal = (1j * w) ** alpha
    mag_db = 20 * np.log10(np.abs(h / ideal))
    phase = np.degrees(np.angle(h / ideal))
    return mag_db, phase


class TestGlFir:
    def test_first_difference(self):
        f = gl_fir(1.0, 1.0, 2)
        np.testing.assert_allclose(f.b, [1.0, -1.0])
        np.testing.assert_allclose(f.a, [1.0])

    def test_identity(self):
        f = gl_fir(0.0, 10.0, 8)
        assert f.b[0] == 1.0
        np.testing.assert_allclose(f.b[1:], 0.0)

    def test_half_order_taps(self):
        f = gl_fir(0.5, 1.0, 4)
        np.testing.assert_allclose(f.b, [1.0, -0.5, -0.125, -0.0625])

    def test_sample_time_scaling(self):
        f = gl_fir(0.5, 100.0, 4)
        np.testing.assert_allclose(f.b, np.array([1, -0.5, -0.125, -0.0625]) * 100**0.5)


class TestFilterStep:
    def test_identity_passthrough(self):
        f = DigitalFilter([1.0], [1.0], 10.0)
        assert filter_step(f, 3.7) == 3.7

    def test_first_difference_sequence(self):
        f = gl_fir(1.0, 1.0, 2)
        out = [f.step(1.0), f.step(1.0), f.step(1.0)]
        np.testing.assert_allclose(out, [1.0, 0.0, 0.0])

    def test_fir_impulse_response_is_taps(self):
        f = gl_fir(0.5, 1.0, 64)
        out = [f.step(1.0)] + [f.step(0.0) for _ in range(63)]
        np.testing.assert_allclose(out, f.b, rtol=1e-15)

    def test_matches_direct_convolution(self):
        rng = np.random.default_rng(3)
        u = rng.standard_normal(200)
        f = gl_fir(0.7, 50.0, 32)
        y = np.array([f.step(v) for v in u])
        ref = np.convolve(u, f.b)[:200]
        assert np.max(np.abs(y - ref)) < 1e-12

    def test_poisoned_state(self):
        f = gl_fir(0.5, 1.0, 8)
        f.step(1.0)
        with pytest.raises(FilterStateError):
            f.step(float("nan"))
        with pytest.raises(FilterStateError):
            f.step(1.0)
        f.reset()
        assert f.step(1.0) == f.b[0]

    def test_iir_step_matches_frequency_response(self):
        f = iir_fit(0.5, 100.0, 4, band=(0.5, 30.0))
        w0 = 5.0
        t = np.arange(4000) / 100.0
        u = np.sin(w0 * t)
        y = np.array([f.step(v) for v in u])
        seg = slice(2000, None)
        A = np.stack([np.sin(w0 * t[seg]), np.cos(w0 * t[seg])], axis=1)
        coef, *_ = np.linalg.lstsq(A, y[seg], rcond=None)
        measured = coef[0] + 1j * coef[1]
        assert measured == pytest.approx(f.response([w0])[0], rel=1e-5)

    def test_affine_split_is_exact(self):
        f = iir_fit(-0.2, 8000.0, 6)
        rng = np.random.default_rng(5)
        for u in rng.standard_normal(50):
            g = f.feedthrough
            bias = f.zero_input_output()
            assert f.step(u) == pytest.approx(g * u + bias, rel=1e-13, abs=1e-13)


class TestIirFit:
    def test_zero_order_shortcut(self):
        f = iir_fit(0.0, 8000.0, 6)
        np.testing.assert_allclose(f.b, [1.0])
        np.testing.assert_allclose(f.a, [1.0])

    @pytest.mark.parametrize("alpha", [0.8, 1.2])
    def test_reference_settings_tolerance(self, alpha):
        f = iir_fit(alpha, 8000.0, 6, band=(1.0, 2513.0))
        mag, phase = response_errors(f, alpha, (1.0, 2513.0))
        assert np.max(np.abs(mag)) < 1.0
        assert np.max(np.abs(phase)) < 3.0
        assert f.is_stable

    def test_integrator_low_order(self):
        f = iir_fit(-1.0, 100.0, 2, band=(0.1, 10.0))
        mag, _ = response_errors(f, -1.0, (0.1, 10.0))
        assert np.max(np.abs(mag)) < 0.5
        assert f.is_stable

    @pytest.mark.parametrize("alpha", [-0.2, 0.2])
    def test_observer_bank_orders_default_band(self, alpha):
        f = iir_fit(alpha, 8000.0, 6)
        mag, phase = response_errors(f, alpha, default_fit_band(8000.0))
        assert np.max(np.abs(mag)) < 1.0
        assert np.max(np.abs(phase)) < 3.0
        assert f.is_stable

    def test_band_validation(self):
        with pytest.raises(ValueError):
            iir_fit(0.5, 100.0, 4, band=(10.0, 1.0))
        with pytest.raises(ValueError):
            iir_fit(0.5, 100.0, 0)

    def test_state_length_matches_coefficient_orders(self):
        for alpha, order in ((0.8, 6), (1.2, 6), (-0.2, 4)):
            f = iir_fit(alpha, 8000.0, order, band=(1.0, 2513.0))
            assert len(f.state) == max(len(f.a), len(f.b)) - 1

    def test_expanded_coefficients_match_sections_in_band_center(self):
        # the b/a expansion is for export; away from the z = 1 cluster it
        # must agree with the section evaluation
        f = iir_fit(0.8, 8000.0, 6, band=(1.0, 2513.0))
        w = np.logspace(np.log10(500.0), np.log10(2500.0), 50)
        zinv = np.exp(-1j * w / f.fs)
        num = np.polynomial.polynomial.polyval(zinv, f.b)
        den = np.polynomial.polynomial.polyval(zinv, f.a)
        np.testing.assert_allclose(num / den, f.response(w), rtol=1e-6)


class TestCascadeConsistency:
    def test_cascade_error_shrinks_with_memory(self):
        # feeding a smooth signal through s^0.4 then s^0.7 should act like
        # s^1.1; truncation error must fall as the memory grows
        fs = 100.0
        n = 4096
        t = np.arange(n) / fs
        u = np.sin(2 * np.pi * 0.7 * t) * (1 - np.exp(-t))
        ref_f = gl_fir(1.1, fs, n + 1)
        ref = np.array([ref_f.step(v) for v in u])
        errs = []
        for mem in (64, 256, 1024):
            f1, f2 = gl_fir(0.4, fs, mem), gl_fir(0.7, fs, mem)
            y = np.array([f2.step(f1.step(v)) for v in u])
            errs.append(np.sqrt(np.mean((y - ref) ** 2)))
        assert errs[0] > errs[1] > errs[2]


class TestExport:
    def test_csv_rows(self, tmp_path):
        f = gl_fir(0.5, 1.0, 4)
        path = tmp_path / "filt.csv"
        f.write_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("b,1,-0.5,-0.125,-0.0625")
        assert lines[1] == "a,1"
