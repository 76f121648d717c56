import math

import numpy as np
import pytest

from sgfdkit.coefficients import (
    CALIBRATED_BAND_FRACTION,
    TABLE1_WEIGHTS,
    FitBand,
    calibrate_fit_band,
    default_fit_band,
    export_coefficients,
    parse_coefficients,
    solve_balanced_space_domain,
    solve_space_domain,
    solve_time_space_domain,
    stencil_symbol,
    table1_coefficients,
    taylor_coefficients,
)
from sgfdkit.errors import CoefficientError


def moment_system_oracle(m):
    """Float solve of the odd-moment system, independent of the shipped path."""
    a = np.array([[(2 * j - 1) ** (2 * p - 1) for j in range(1, m + 1)] for p in range(1, m + 1)], float)
    b = np.zeros(m)
    b[0] = 1.0
    return np.linalg.solve(a, b)


class TestTaylor:
    def test_m1(self):
        assert taylor_coefficients(1).c == (1.0,)

    def test_m2_against_oracle_and_table(self):
        c = taylor_coefficients(2).as_array()
        np.testing.assert_allclose(c, moment_system_oracle(2), rtol=1e-14)
        np.testing.assert_allclose(c, [1.125, -1.0 / 24.0], rtol=1e-15)

    @pytest.mark.parametrize("m", [3, 5, 7])
    def test_matches_float_oracle(self, m):
        # the float oracle itself degrades beyond m ~ 10; the shipped rational
        # solve stays exact, so compare only where the oracle is trustworthy
        np.testing.assert_allclose(
            taylor_coefficients(m).as_array(), moment_system_oracle(m), rtol=1e-9
        )

    def test_m7_symbol_error_at_half(self, taylor7):
        # 2*sum c sin((m-1/2)*0.5) - 0.5 must be far below 1e-6
        res = abs(taylor7.residual_vs_kh(0.5))
        assert res < 1e-6

    def test_m7_alternating(self, taylor7):
        signs = np.sign(taylor7.as_array())
        assert list(signs) == [(-1.0) ** k for k in range(7)]

    def test_m0_rejected(self):
        with pytest.raises(CoefficientError):
            taylor_coefficients(0)

    def test_large_m_exact_arithmetic(self):
        # the rational solve keeps the long reference operator healthy
        c = taylor_coefficients(30)
        assert c.c[0] == pytest.approx(1.26267, abs=1e-4)
        assert abs(c.residual_vs_kh(0.5)) < 1e-12


class TestTable1:
    @pytest.mark.parametrize("m", [3, 5, 7])
    def test_published_digits(self, m):
        assert table1_coefficients(m).c == TABLE1_WEIGHTS[m]

    @pytest.mark.parametrize("m", [1, 2, 4, 6, 8])
    def test_unsupported_m(self, m):
        with pytest.raises(CoefficientError, match="published"):
            table1_coefficients(m)


class TestSpaceDomain:
    @pytest.mark.parametrize("m", [3, 5, 7])
    def test_matches_published_weights(self, m):
        c = solve_space_domain(m, default_fit_band(m))
        dev = np.abs(c.as_array() - np.array(TABLE1_WEIGHTS[m]))
        assert dev.max() < 5e-3

    def test_m1_closed_form(self):
        band = FitBand(kh_max=0.5 * math.pi, n_samples=400)
        kh = band.kh_samples()
        g = np.sin(0.5 * kh) * np.sin(0.5 * kh)
        b = 0.25 * kh * kh
        oracle = float(g @ b / (g @ g))
        c = solve_space_domain(1, band)
        assert c.c[0] == pytest.approx(oracle, rel=1e-12)

    @pytest.mark.parametrize("m,rel_bound", [(1, 0.15), (3, 2e-3), (5, 2e-3), (7, 2e-3)])
    def test_long_wavelength_consistency(self, m, rel_bound):
        # at kh = 1e-4 the fitted product symbol sits on (kh)^2/4 up to the
        # first-moment offset of the fit: ~1e-3 relative for m >= 3, but a
        # one-parameter wide-band fit cannot pin the moment (~9% for m=1);
        # the absolute residual is tiny either way
        c = solve_space_domain(m, default_fit_band(m))
        kh = 1e-4
        fitted = math.sin(0.5 * kh) * stencil_symbol(c.as_array(), kh)
        target = kh * kh / 4.0
        assert abs(fitted - target) < 1e-9
        assert abs(fitted / target - 1.0) < rel_bound

    def test_velocity_independence_and_determinism(self):
        band = default_fit_band(7)
        a = solve_space_domain(7, band)
        b = solve_space_domain(7, band)
        assert a.c == b.c  # bit-identical; no velocity enters the signature

    def test_provenance_records_band(self):
        band = default_fit_band(5)
        c = solve_space_domain(5, band)
        assert c.provenance == "space_domain_ls"
        assert c.kh_max == band.kh_max


class TestBalancedSpaceDomain:
    def test_m1_closed_form(self):
        band = FitBand(kh_max=0.6 * math.pi, n_samples=300)
        kh = band.kh_samples()
        g = 2.0 * np.sin(0.5 * kh)
        oracle = float(g @ kh / (g @ g))
        c = solve_balanced_space_domain(1, band)
        assert c.c[0] == pytest.approx(oracle, rel=1e-12)

    def test_small_band_limit_recovers_taylor(self):
        # the fit collapses onto the Taylor weights as kh_max -> 0
        assert abs(solve_balanced_space_domain(1, FitBand(0.005)).c[0] - 1.0) < 1e-6
        for m in (1, 2, 3):
            ref = taylor_coefficients(m).as_array()
            devs = [
                np.abs(solve_balanced_space_domain(m, FitBand(k)).as_array() - ref).max()
                for k in (0.5, 0.2, 0.05)
            ]
            assert devs[0] > devs[1] > devs[2]
            assert devs[2] < 1e-4

    def test_wide_band_beats_taylor_at_kh2(self, taylor7):
        c = solve_balanced_space_domain(7, FitBand(0.9 * math.pi))
        kh = 2.0
        err_opt = abs(2.0 * stencil_symbol(c.as_array(), kh) / kh - 1.0)
        err_tay = abs(2.0 * stencil_symbol(taylor7.as_array(), kh) / kh - 1.0)
        assert err_opt < err_tay


class TestTimeSpaceDomain:
    def test_single_direction_reduces_to_space_fit(self):
        band_s = default_fit_band(5)
        band_ts = default_fit_band(5, angles=(0.0,), courant=1e-4)
        cs = solve_space_domain(5, band_s)
        cts = solve_time_space_domain(5, band_ts)
        assert np.abs(cts.as_array() - cs.as_array()).max() < 1e-6

    @pytest.mark.parametrize("m", [3, 7])
    def test_small_courant_limit_matches_space_fit(self, m):
        # axis-aligned angles: the 2D objective duplicates the 1D one
        band_s = default_fit_band(m)
        band_ts = default_fit_band(m, angles=(0.0, math.pi / 2), courant=1e-4)
        cs = solve_space_domain(m, band_s)
        cts = solve_time_space_domain(m, band_ts)
        assert np.abs(cts.as_array() - cs.as_array()).max() < 1e-4

    def test_beats_taylor_on_its_own_objective(self, taylor7):
        r = 0.2
        angles = (0.0, math.pi / 8, math.pi / 4)
        band = default_fit_band(7, angles=angles, courant=r)
        c = solve_time_space_domain(7, band)

        def rms_residual(weights):
            kh = band.kh_samples()
            total = 0.0
            for theta in angles:
                kxh, kzh = kh * math.cos(theta), kh * math.sin(theta)
                lhs = np.sin(0.5 * kxh) * stencil_symbol(weights, kxh) + np.sin(
                    0.5 * kzh
                ) * stencil_symbol(weights, kzh)
                rhs = (1.0 - np.cos(kh * r)) / (2.0 * r * r)
                total += float(np.mean((lhs - rhs) ** 2))
            return math.sqrt(total / len(angles))

        assert rms_residual(c.as_array()) < rms_residual(taylor7.as_array())

    def test_missing_courant(self):
        with pytest.raises(CoefficientError, match="courant"):
            solve_time_space_domain(3, default_fit_band(3, angles=(0.0,)))

    def test_missing_angles(self):
        with pytest.raises(CoefficientError, match="angle"):
            solve_time_space_domain(3, default_fit_band(3, courant=0.1))

    def test_unstable_courant_rejected(self):
        band = default_fit_band(7, angles=(0.0, math.pi / 4), courant=0.6)
        with pytest.raises(CoefficientError, match="stability bound"):
            solve_time_space_domain(7, band)


class TestApproximationChains:
    """Numeric restatements of the scheme-equivalence identities: each
    scheme's symbol, built with that scheme's weights, tracks the exact
    squared wavenumber over a wide band."""

    def setup_method(self):
        self.kh = np.linspace(2.0 / 512, 2.0, 512)
        self.bal = solve_balanced_space_domain(7, default_fit_band(7)).as_array()
        self.tay = taylor_coefficients(7).as_array()
        self.nb = table1_coefficients(7).as_array()

    def chain_terms(self, kh):
        exact = kh**2
        balanced_sq = (2.0 * stencil_symbol(self.bal, kh)) ** 2
        taylor_sq = (2.0 * stencil_symbol(self.tay, kh)) ** 2
        nonbalanced = 2.0 * np.sin(0.5 * kh) * (2.0 * stencil_symbol(self.nb, kh))
        return exact, balanced_sq, taylor_sq, nonbalanced

    @pytest.mark.parametrize("axis", ["x", "z"])
    def test_squared_wavenumber_chain(self, axis):
        exact, balanced_sq, taylor_sq, nonbalanced = self.chain_terms(self.kh)
        for approx in (balanced_sq, taylor_sq, nonbalanced):
            assert np.max(np.abs(approx - exact) / exact) < 1e-2
        # pairwise closeness of the two scheme forms
        assert np.max(np.abs(balanced_sq - nonbalanced) / exact) < 1e-2
        assert np.max(np.abs(taylor_sq - nonbalanced) / exact) < 1.2e-2

    def test_mixed_product_chain(self):
        ax = np.linspace(2.0 / 64, 2.0, 64)
        kx, kz = np.meshgrid(ax, ax, indexing="ij")
        exact = (kx * kz) ** 2
        balanced = (
            (2.0 * stencil_symbol(self.bal, kx)) ** 2 * (2.0 * stencil_symbol(self.bal, kz)) ** 2
        )
        nonbalanced = (
            16.0
            * np.sin(0.5 * kx)
            * np.sin(0.5 * kz)
            * stencil_symbol(self.nb, kx)
            * stencil_symbol(self.nb, kz)
        )
        assert np.max(np.abs(balanced - exact) / exact) < 2e-2
        assert np.max(np.abs(nonbalanced - exact) / exact) < 2e-2
        assert np.max(np.abs(balanced - nonbalanced) / exact) < 2e-2


class TestCalibration:
    def test_frozen_band_fractions_regenerate(self):
        for m, frac in CALIBRATED_BAND_FRACTION.items():
            band, dev = calibrate_fit_band(m)
            assert band.kh_max == pytest.approx(frac * math.pi, abs=1e-12)
            assert dev < 2e-3

    def test_reference_required_for_other_m(self):
        with pytest.raises(CoefficientError, match="reference"):
            calibrate_fit_band(4)

    def test_custom_reference(self):
        ref = solve_space_domain(2, FitBand(0.5 * math.pi)).as_array()
        band, dev = calibrate_fit_band(2, reference=ref)
        assert dev < 1e-6
        assert band.kh_max == pytest.approx(0.5 * math.pi, abs=0.01)


class TestFitBandValidation:
    def test_kh_max_range(self):
        with pytest.raises(CoefficientError, match="kh_max"):
            FitBand(kh_max=3.5)

    def test_sample_count(self):
        with pytest.raises(CoefficientError, match="samples"):
            solve_space_domain(7, FitBand(kh_max=2.0, n_samples=20))

    def test_courant_range(self):
        with pytest.raises(CoefficientError, match="Courant"):
            FitBand(kh_max=2.0, courant=1.5)


class TestExport:
    def test_round_trip(self):
        c = solve_space_domain(5, default_fit_band(5))
        text = export_coefficients(c)
        lines = text.strip().splitlines()
        assert lines[0] == f"M=5 provenance=space_domain_ls kh_max={c.kh_max:.9g}"
        assert len(lines) == 6
        back = parse_coefficients(text)
        assert back.m == 5
        np.testing.assert_allclose(back.as_array(), c.as_array(), rtol=1e-8)

    def test_nine_significant_digits(self, table1_7):
        text = export_coefficients(table1_7)
        assert "kh_max=none" in text.splitlines()[0]
        assert "1.59906" in text

    def test_malformed_inputs(self):
        with pytest.raises(CoefficientError, match="must start with"):
            parse_coefficients("1.0\n2.0\n")
        with pytest.raises(CoefficientError, match="weights follow"):
            parse_coefficients("M=3 provenance=user kh_max=none\n1.0\n-0.1\n")
