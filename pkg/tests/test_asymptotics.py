"""
Tests for sweep fitting, s-limits and the auxiliary kernel integrals
"""
import numpy as np
import pytest

from app.exceptions import DomainError
from app.schemas import ExpansionReport, LimitOptions, SweepOptions
from app.services.asymptotics import (
    appendix_checks,
    default_r_grid,
    eun_closed_form,
    eun_integral,
    fit_slope,
    qutr_value,
    r_sweep,
    richardson_limit,
    s_sweep,
    trois_integral,
)


@pytest.fixture
def x_1d():
    return np.array([0.4])


class TestSlopeFit:
    def test_exact_power_law(self):
        """Test a pure power law returns its exponent with a vanishing interval"""
        r = np.array([0.1 * 2.0 ** -k for k in range(6)])
        fit = fit_slope(r, 3.0 * r ** 1.3)
        assert fit.slope == pytest.approx(1.3, abs=1e-12)
        assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-10)
        assert fit.ci < 1e-8

    def test_single_point(self):
        """Test one point is not enough for a slope"""
        with pytest.raises(DomainError):
            fit_slope([0.1], [1.0])


class TestRSweep:
    """Synthetic residuals on the dyadic grid"""

    def test_default_grid(self, gaussian_1d, x_1d):
        """Test the grid starts at smooth_radius/8 and halves"""
        grid = default_r_grid(gaussian_1d, x_1d)
        assert len(grid) == 8
        assert grid[0] == pytest.approx(gaussian_1d.smooth_radius(x_1d) / 8.0)
        assert np.allclose(np.array(grid[1:]) / np.array(grid[:-1]), 0.5)

    def test_expected_order_passes(self, gaussian_1d, x_1d):
        """Test 3 r^1.3 passes against 1.3"""
        report = r_sweep(lambda u, x, r: 3.0 * r ** 1.3, gaussian_1d, x_1d,
                         SweepOptions(label="probe", expected_slope=1.3))
        assert report.passed
        assert report.fitted_slope == pytest.approx(1.3, abs=1e-10)
        assert report.window == (1, 7)

    def test_two_sided_rejects_faster_decay(self, gaussian_1d, x_1d):
        """Test r^3 fails a two-sided check against order 2"""
        report = r_sweep(lambda u, x, r: r ** 3, gaussian_1d, x_1d,
                         SweepOptions(label="probe", expected_slope=2.0, tolerance=0.2, two_sided=True))
        assert not report.passed

    def test_one_sided_flags_faster_decay(self, gaussian_1d, x_1d):
        """Test r^3 passes one-sided with the faster flag and a note"""
        report = r_sweep(lambda u, x, r: r ** 3, gaussian_1d, x_1d,
                         SweepOptions(label="probe", expected_slope=2.0))
        assert report.passed
        assert report.faster_than_expected
        assert report.notes

    def test_slower_decay_fails(self, gaussian_1d, x_1d):
        """Test r^1 fails one-sided against order 2"""
        report = r_sweep(lambda u, x, r: r, gaussian_1d, x_1d,
                         SweepOptions(label="probe", expected_slope=2.0))
        assert not report.passed

    def test_report_json_round_trip(self, gaussian_1d, x_1d):
        """Test a report re-parses from its JSON to an equal report"""
        report = r_sweep(lambda u, x, r: r ** 3, gaussian_1d, x_1d,
                         SweepOptions(label="probe", expected_slope=2.0))
        assert ExpansionReport.model_validate_json(report.model_dump_json()) == report

    def test_noise_floor_saturates(self, gaussian_1d, x_1d):
        """Test an identically zero residual is reported as saturated, not failed"""
        report = r_sweep(lambda u, x, r: 0.0, gaussian_1d, x_1d,
                         SweepOptions(label="probe", expected_slope=2.0))
        assert report.saturated
        assert report.passed
        assert report.fitted_slope is None

    def test_too_few_radii(self, gaussian_1d, x_1d):
        """Test grids shorter than six radii are rejected"""
        with pytest.raises(DomainError):
            r_sweep(lambda u, x, r: r, gaussian_1d, x_1d, SweepOptions(expected_slope=1.0),
                    r_grid=[0.1, 0.05, 0.025, 0.0125, 0.00625])


class TestSSweep:
    def test_richardson_is_exact_for_quadratics(self):
        """Test L + a(1-s) + b(1-s)^2 extrapolates to L"""
        s = [0.9, 0.99, 0.999]
        values = [2.0 + 3.0 * (1 - v) - 4.0 * (1 - v) ** 2 for v in s]
        assert richardson_limit(s, values) == pytest.approx(2.0, abs=1e-10)

    def test_richardson_needs_three_points(self):
        """Test two points give no extrapolation"""
        assert richardson_limit([0.9, 0.99], [1.0, 1.0]) is None

    def test_scaled_limit(self, gaussian_1d, x_1d):
        """Test (1-s)(5/(1-s) + 1) approaches 5"""
        report = s_sweep(lambda u, x, s: 5.0 / (1.0 - s) + 1.0, 5.0, gaussian_1d, x_1d,
                         [0.9, 0.99, 0.999], LimitOptions(label="probe"))
        assert report.passed
        assert report.relative_errors[-1] == pytest.approx(2e-4, rel=1e-6)
        assert report.extrapolated_limit == pytest.approx(5.0, abs=1e-9)

    def test_callable_target_unscaled(self, gaussian_1d, x_1d):
        """Test an unscaled sweep against a field-dependent target"""
        report = s_sweep(lambda u, x, s: float(u.value(x)) + (1.0 - s), lambda u, x: float(u.value(x)),
                         gaussian_1d, x_1d, [0.9, 0.99, 0.999],
                         LimitOptions(label="probe", scaled=False, tolerance=0.01))
        assert report.passed
        assert report.target == pytest.approx(float(gaussian_1d.value(x_1d)))

    def test_diagnostics_tabulated(self, gaussian_1d, x_1d):
        """Test diagnostic columns are evaluated at every s"""
        report = s_sweep(lambda u, x, s: 1.0, 0.0, gaussian_1d, x_1d, [0.9, 0.99],
                         diagnostics={"half": lambda u, x, s: 0.5 * s})
        assert report.diagnostics["half"] == pytest.approx([0.45, 0.495])

    def test_grid_must_increase(self, gaussian_1d, x_1d):
        """Test a non-increasing s-grid is rejected"""
        with pytest.raises(DomainError):
            s_sweep(lambda u, x, s: 1.0, 1.0, gaussian_1d, x_1d, [0.99, 0.9])


class TestAuxiliaryIntegrals:
    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    @pytest.mark.parametrize("r", [0.1, 0.01])
    def test_eun_matches_closed_form(self, s, r):
        """Test the numerical eun integral against its antiderivative"""
        assert eun_integral(s, r) == pytest.approx(eun_closed_form(s, r), rel=1e-8)

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_trois_leading_order(self, s):
        """Test trois / r^2 approaches s/2"""
        r = 0.01
        assert trois_integral(s, r) / r ** 2 == pytest.approx(0.5 * s, rel=0.02)

    def test_qutr_vanishes(self):
        """Test qutr falls below 0.01 at s = 0.999"""
        assert qutr_value(0.999, 0.1) < 0.01
        assert qutr_value(0.9, 0.1) > qutr_value(0.999, 0.1)

    @pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
    def test_appendix_report(self, s):
        """Test the bundled checks pass"""
        report = appendix_checks(s)
        assert report.eun_bounded
        assert report.trois_passed
        assert report.qutr_passed
        assert report.passed
        assert len(report.eun) == len(report.r_grid) == 7

    def test_appendix_grid_domain(self):
        """Test radii outside (0,1) are rejected"""
        with pytest.raises(DomainError):
            appendix_checks(0.5, r_grid=[0.1, 1.5])

    def test_appendix_order_domain(self):
        """Test s outside (0,1) is rejected"""
        with pytest.raises(DomainError):
            appendix_checks(1.0)
